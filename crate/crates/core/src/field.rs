//! Scalar fields that the extension operators act on.

use num_complex::Complex64;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{Frame, Line, Point};

/// Value of a field with its gradient, when known.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: Complex64,
    pub gradient: Option<[Complex64; 2]>,
}

impl FieldSample {
    pub fn new(value: Complex64, gradient: [Complex64; 2]) -> Self {
        Self {
            value,
            gradient: Some(gradient),
        }
    }

    pub fn value_only(value: Complex64) -> Self {
        Self {
            value,
            gradient: None,
        }
    }
}

/// A field that can be evaluated on its domain of validity.
pub trait FieldOracle: Send + Sync {
    fn eval(&self, p: &Point) -> Result<FieldSample>;

    /// Whether `p` lies in the region where the field is valid.
    fn contains(&self, _p: &Point) -> bool {
        true
    }

    /// Points near which the field is singular; quadrature panels are graded
    /// toward their closest approach.
    fn singular_points(&self) -> Vec<Point> {
        Vec::new()
    }
}

/// Step of the central-difference gradient fallback.
pub const FD_STEP: f64 = 1e-5;

/// Value and gradient, with a central-difference gradient when the oracle
/// does not supply one.
pub fn sample_with_gradient(f: &dyn FieldOracle, p: &Point) -> Result<(Complex64, [Complex64; 2])> {
    let s = f.eval(p)?;
    if let Some(g) = s.gradient {
        return Ok((s.value, g));
    }
    let h = FD_STEP;
    let dx = (f.eval(&(p + Point::new(h, 0.0)))?.value - f.eval(&(p - Point::new(h, 0.0)))?.value)
        / (2.0 * h);
    let dy = (f.eval(&(p + Point::new(0.0, h)))?.value - f.eval(&(p - Point::new(0.0, h)))?.value)
        / (2.0 * h);
    Ok((s.value, [dx, dy]))
}

/// Finite sum Σ cⱼ exp(αⱼ · x) with complex coefficient vectors αⱼ.
///
/// Plane waves e^{ik d·x} have α = ik d; harmonic exponentials e^{μ(x₁ ± i x₂)}
/// have α = (μ, ±iμ).
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSum {
    terms: Vec<(Complex64, [Complex64; 2])>,
}

impl ExpSum {
    pub fn new(terms: Vec<(Complex64, [Complex64; 2])>) -> Self {
        Self { terms }
    }

    pub fn plane_wave(k: f64, d: Point) -> Self {
        let ik = Complex64::new(0.0, k);
        Self::new(vec![(Complex64::new(1.0, 0.0), [ik * d.x, ik * d.y])])
    }

    pub fn terms(&self) -> &[(Complex64, [Complex64; 2])] {
        &self.terms
    }

    pub fn value(&self, p: &Point) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, a)| c * (a[0] * p.x + a[1] * p.y).exp())
            .sum()
    }

    /// Mirror image x ↦ f(x₁, −x₂).
    pub fn mirrored(&self) -> ExpSum {
        ExpSum::new(self.terms.iter().map(|(c, a)| (*c, [a[0], -a[1]])).collect())
    }
}

impl FieldOracle for ExpSum {
    fn eval(&self, p: &Point) -> Result<FieldSample> {
        let mut v = Complex64::new(0.0, 0.0);
        let mut g = [v, v];
        for (c, a) in &self.terms {
            let e = c * (a[0] * p.x + a[1] * p.y).exp();
            v += e;
            g[0] += a[0] * e;
            g[1] += a[1] * e;
        }
        Ok(FieldSample::new(v, g))
    }
}

type EvalFn = dyn Fn(&Point) -> Result<FieldSample> + Send + Sync;
type DomainFn = dyn Fn(&Point) -> bool + Send + Sync;

/// Field given by closures.
#[derive(Clone)]
pub struct FnField {
    eval: Arc<EvalFn>,
    domain: Option<Arc<DomainFn>>,
    singular: Vec<Point>,
}

impl FnField {
    pub fn new(eval: impl Fn(&Point) -> Result<FieldSample> + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(eval),
            domain: None,
            singular: Vec::new(),
        }
    }

    pub fn with_domain(mut self, domain: impl Fn(&Point) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn with_singular_points(mut self, pts: Vec<Point>) -> Self {
        self.singular = pts;
        self
    }
}

impl FieldOracle for FnField {
    fn eval(&self, p: &Point) -> Result<FieldSample> {
        if !self.contains(p) {
            return Err(Error::OutsideDomain(format!("({}, {})", p.x, p.y)));
        }
        (self.eval)(p)
    }

    fn contains(&self, p: &Point) -> bool {
        self.domain.as_ref().is_none_or(|d| d(p))
    }

    fn singular_points(&self) -> Vec<Point> {
        self.singular.clone()
    }
}

/// View of a world-coordinate field in the local coordinates of a frame.
pub struct LocalView<'a> {
    pub field: &'a dyn FieldOracle,
    pub frame: Frame,
}

impl FieldOracle for LocalView<'_> {
    fn eval(&self, q: &Point) -> Result<FieldSample> {
        let s = self.field.eval(&self.frame.to_world(q))?;
        Ok(FieldSample {
            value: s.value,
            gradient: s.gradient.map(|g| self.frame.complex_vector_to_local(&g)),
        })
    }

    fn contains(&self, q: &Point) -> bool {
        self.field.contains(&self.frame.to_world(q))
    }

    fn singular_points(&self) -> Vec<Point> {
        self.field
            .singular_points()
            .iter()
            .map(|p| self.frame.to_local(p))
            .collect()
    }
}

/// The composition x ↦ f(R_L x).
pub struct Reflected<F> {
    pub field: F,
    pub line: Line,
}

impl<F: FieldOracle> FieldOracle for Reflected<F> {
    fn eval(&self, p: &Point) -> Result<FieldSample> {
        let s = self.field.eval(&self.line.reflect(p))?;
        let g = s.gradient.map(|g| {
            // ∇(f∘R) = R∇f for the linear part R = I − 2nnᵀ.
            let n = self.line.normal();
            let dot = g[0] * n.x + g[1] * n.y;
            [g[0] - dot * (2.0 * n.x), g[1] - dot * (2.0 * n.y)]
        });
        Ok(FieldSample {
            value: s.value,
            gradient: g,
        })
    }

    fn contains(&self, p: &Point) -> bool {
        self.field.contains(&self.line.reflect(p))
    }

    fn singular_points(&self) -> Vec<Point> {
        self.field
            .singular_points()
            .iter()
            .map(|p| self.line.reflect(p))
            .collect()
    }
}

impl<T: FieldOracle + ?Sized> FieldOracle for Arc<T> {
    fn eval(&self, p: &Point) -> Result<FieldSample> {
        (**self).eval(p)
    }
    fn contains(&self, p: &Point) -> bool {
        (**self).contains(p)
    }
    fn singular_points(&self) -> Vec<Point> {
        (**self).singular_points()
    }
}

impl<T: FieldOracle + ?Sized> FieldOracle for &T {
    fn eval(&self, p: &Point) -> Result<FieldSample> {
        (**self).eval(p)
    }
    fn contains(&self, p: &Point) -> bool {
        (**self).contains(p)
    }
    fn singular_points(&self) -> Vec<Point> {
        (**self).singular_points()
    }
}
