//! Reflection of harmonic functions across a straight Robin line.
//!
//! In the canonical frame the line is {x₂ = 0}, the field w is known in the
//! upper half-plane and satisfies ∂₂w + iλw = 0 on the line. For a point x
//! above the line, [`dtilde_apply`] returns the value of the harmonic
//! continuation of w at the mirror point (x₁, −x₂), computed from w and ∇w
//! along any path from the line to x.

use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{sample_with_gradient, ExpSum, FieldOracle, LocalView};
use crate::geometry::{pt, Frame, Line, PathCurve, Point, Segment};
use crate::quadrature::{graded_breaks, integrate_adaptive, AdaptiveOptions};

/// Largest |λ(χ₁ − x₁)| for which the hyperbolic kernels are evaluated.
pub const MAX_HYPERBOLIC_ARGUMENT: f64 = 300.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

type LambdaFn = dyn Fn(Complex64) -> Complex64 + Send + Sync;

/// Impedance λ on the line: a constant, or a holomorphic function of the
/// complexified abscissa of the canonical frame.
#[derive(Clone)]
pub enum Impedance {
    Constant(Complex64),
    Holomorphic(Arc<LambdaFn>),
}

impl fmt::Debug for Impedance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Impedance::Constant(l) => write!(f, "Constant({l})"),
            Impedance::Holomorphic(_) => write!(f, "Holomorphic(..)"),
        }
    }
}

impl Impedance {
    pub fn at(&self, tau: Complex64) -> Complex64 {
        match self {
            Impedance::Constant(l) => *l,
            Impedance::Holomorphic(f) => f(tau),
        }
    }
}

/// Robin condition ∂ₙw + iλw = 0 on a line, with n the unit normal pointing
/// into the side where w is known.
#[derive(Debug, Clone)]
pub struct RobinLineBC {
    line: Line,
    frame: Frame,
    impedance: Impedance,
}

impl RobinLineBC {
    /// `known_side` is any point strictly on the side where w is given.
    pub fn new(line: Line, known_side: &Point, impedance: Impedance) -> Result<Self> {
        let frame = Frame::for_line(&line, known_side)?;
        Ok(Self {
            line,
            frame,
            impedance,
        })
    }

    /// The line {x₂ = 0} with w known above it and constant λ.
    pub fn canonical(lambda: Complex64) -> Self {
        Self::canonical_with(Impedance::Constant(lambda))
    }

    pub fn canonical_with(impedance: Impedance) -> Self {
        Self {
            line: Line::horizontal_axis(),
            frame: Frame::identity(),
            impedance,
        }
    }

    pub fn line(&self) -> &Line {
        &self.line
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn impedance(&self) -> &Impedance {
        &self.impedance
    }

    pub fn constant_lambda(&self) -> Option<Complex64> {
        match self.impedance {
            Impedance::Constant(l) => Some(l),
            Impedance::Holomorphic(_) => None,
        }
    }

    /// Mirror image across the line.
    pub fn reflect(&self, p: &Point) -> Point {
        self.line.reflect(p)
    }
}

/// Tuning for the reflection operators.
#[derive(Debug, Clone, Copy, PartialEq)]
#[derive(Default)]
pub struct ReflectionOptions {
    pub quad: AdaptiveOptions,
    /// Test hook: flips the sign of the sinh arguments in the reflection
    /// kernel. Any verification run with this set must fail.
    pub corrupt_kernel_sign: bool,
}


/// Kernel V(y; x̃) = −4 e^{−iλ(y₂ + x̃₂)} sinh(λ(y₁ − x̃₁)) for constant λ,
/// in canonical coordinates.
pub fn v_kernel_line(y: &Point, xt: &Point, lambda: Complex64) -> Complex64 {
    -4.0 * (-I * lambda * (y.y + xt.y)).exp() * (lambda * (y.x - xt.x)).sinh()
}

/// Gradient of [`v_kernel_line`] with respect to y.
pub fn v_kernel_line_gradient(y: &Point, xt: &Point, lambda: Complex64) -> [Complex64; 2] {
    let e = (-I * lambda * (y.y + xt.y)).exp();
    let a = lambda * (y.x - xt.x);
    [-4.0 * lambda * e * a.cosh(), 4.0 * I * lambda * e * a.sinh()]
}

/// ∫ λ(τ) dτ along the straight complex segment from `a` to `b`.
fn lambda_integral(imp: &Impedance, a: Complex64, b: Complex64, quad: &AdaptiveOptions) -> Result<Complex64> {
    match imp {
        Impedance::Constant(l) => Ok(l * (b - a)),
        Impedance::Holomorphic(f) => {
            let d = b - a;
            if d.norm() == 0.0 {
                return Ok(c(0.0, 0.0));
            }
            integrate_adaptive(&|s: f64| f(a + d * s) * d, &[0.0, 1.0], quad)
        }
    }
}

/// Kernel V = V₁ − V₂ with holomorphic λ, in canonical coordinates:
/// V₁ = 1 − 2 exp(∫_{z₀}^{ω} λ), V₂ = 1 − 2 exp(−∫_{ω₀}^{z} λ), where
/// z = y₁ + iy₂, ω = y₁ − iy₂, z₀ = x̃₁ + ix̃₂, ω₀ = x̃₁ − ix̃₂.
///
/// Returns V and its gradient in y.
pub fn v_kernel_general_with_gradient(
    y: &Point,
    xt: &Point,
    bc: &RobinLineBC,
    quad: &AdaptiveOptions,
) -> Result<(Complex64, [Complex64; 2])> {
    let imp = bc.impedance();
    let z = c(y.x, y.y);
    let w = z.conj();
    let z0 = c(xt.x, xt.y);
    let w0 = z0.conj();
    let f = lambda_integral(imp, z0, w, quad)?;
    let g = lambda_integral(imp, w0, z, quad)?;
    let ef = f.exp();
    let eg = (-g).exp();
    if !ef.is_finite() || !eg.is_finite() {
        return Err(Error::Range(format!("kernel exponent overflow at ({}, {})", y.x, y.y)));
    }
    let v = (1.0 - 2.0 * ef) - (1.0 - 2.0 * eg);
    let lw = imp.at(w);
    let lz = imp.at(z);
    // ∂ω/∂y₂ = −i, ∂z/∂y₂ = i.
    let d1 = -2.0 * ef * lw - 2.0 * eg * lz;
    let d2 = 2.0 * I * ef * lw - 2.0 * I * eg * lz;
    Ok((v, [d1, d2]))
}

/// Kernel value of [`v_kernel_general_with_gradient`].
pub fn v_kernel_general(y: &Point, xt: &Point, bc: &RobinLineBC) -> Result<Complex64> {
    Ok(v_kernel_general_with_gradient(y, xt, bc, &AdaptiveOptions::default())?.0)
}

/// Breakpoints on [0, 1] for a path leg, graded toward the closest approach
/// of each singular point lying within the leg length.
fn leg_breaks(leg: &Segment, singular: &[Point]) -> Vec<f64> {
    let len = leg.length();
    let mut out = vec![0.0, 1.0];
    for s in singular {
        let d = leg.distance(s);
        if d < 0.5 * len {
            let t = leg.closest_parameter(s);
            out.extend(graded_breaks(0.0, 1.0, t, d / len));
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    out
}

/// Path in canonical coordinates, checked to start on the line and end at `x`.
fn local_path(path: &PathCurve, bc: &RobinLineBC, x_local: &Point) -> Result<PathCurve> {
    let frame = bc.frame();
    let lp = path.map_points(|p| frame.to_local(p))?;
    if lp.start().y.abs() > 1e-10 {
        return Err(Error::PathNotAdmissible(format!(
            "path starts at distance {} from the line",
            lp.start().y.abs()
        )));
    }
    if (lp.end() - x_local).norm() > 1e-10 * (1.0 + x_local.norm()) {
        return Err(Error::PathNotAdmissible("path does not end at the evaluation point".into()));
    }
    Ok(lp)
}

fn check_hyperbolic(lambda: Complex64, path: &PathCurve, x1: f64) -> Result<()> {
    let excursion = path
        .waypoints()
        .iter()
        .map(|p| (p.x - x1).abs())
        .fold(0.0, f64::max);
    if lambda.norm() * excursion > MAX_HYPERBOLIC_ARGUMENT {
        return Err(Error::Range(format!(
            "|λ(χ₁ − x₁)| = {} exceeds {MAX_HYPERBOLIC_ARGUMENT}",
            lambda.norm() * excursion
        )));
    }
    Ok(())
}

fn constant_lambda(bc: &RobinLineBC) -> Result<Complex64> {
    bc.constant_lambda().ok_or_else(|| {
        Error::InvalidParameter("this operator needs a constant impedance; use extend_general".into())
    })
}

/// Harmonic reflection D̃w(x) with default options.
pub fn dtilde_apply(w: &dyn FieldOracle, path: &PathCurve, bc: &RobinLineBC, x: &Point) -> Result<Complex64> {
    dtilde_apply_with(w, path, bc, x, &ReflectionOptions::default())
}

/// D̃w(x) for x on the known side: the value at R_L x of the harmonic
/// continuation of w across the line, computed along `path` from the line
/// to x. In canonical coordinates
///
/// D̃w(x) = w(x) + e^{iλx₂} ∫ e^{−iλχ₂} [2iλ cosh(λ(χ₁−x₁)) χ₂' w
///          − 2λ sinh(λ(χ₁−x₁)) χ₁' w + 2i sinh(λ(χ₁−x₁)) (∂₂w χ₁' − ∂₁w χ₂')] dt.
pub fn dtilde_apply_with(
    w: &dyn FieldOracle,
    path: &PathCurve,
    bc: &RobinLineBC,
    x: &Point,
    opts: &ReflectionOptions,
) -> Result<Complex64> {
    let lambda = constant_lambda(bc)?;
    let frame = *bc.frame();
    let xl = frame.to_local(x);
    let lw = LocalView { field: w, frame };
    let value = lw.eval(&xl)?.value;
    if lambda == c(0.0, 0.0) {
        return Ok(value);
    }
    let lp = local_path(path, bc, &xl)?;
    check_hyperbolic(lambda, &lp, xl.x)?;
    let sign = if opts.corrupt_kernel_sign { -1.0 } else { 1.0 };
    let singular = lw.singular_points();
    let mut total = c(0.0, 0.0);
    for leg in lp.legs() {
        let d = leg.b() - leg.a();
        let f = |t: f64| -> Result<Complex64> {
            let chi = leg.point_at(t);
            let (u, g) = sample_with_gradient(&lw, &chi)?;
            let a = sign * lambda * (chi.x - xl.x);
            let (sh, ch) = (a.sinh(), (lambda * (chi.x - xl.x)).cosh());
            let e = (-I * lambda * chi.y).exp();
            Ok(e * (2.0 * I * lambda * ch * d.y * u - 2.0 * lambda * sh * d.x * u
                + 2.0 * I * sh * (g[1] * d.x - g[0] * d.y)))
        };
        total += integrate_fallible(&f, &leg_breaks(&leg, &singular), &opts.quad)?;
    }
    Ok(value + (I * lambda * xl.y).exp() * total)
}

/// D̃w(x) along the perpendicular from the line to x; needs values of w only:
/// D̃w(x) = w(x) + 2iλ e^{iλx₂} ∫₀^{x₂} e^{−iλs} w(x₁, s) ds.
pub fn dtilde_apply_vertical(w: &dyn FieldOracle, bc: &RobinLineBC, x: &Point) -> Result<Complex64> {
    dtilde_apply_vertical_with(w, bc, x, &AdaptiveOptions::default())
}

pub fn dtilde_apply_vertical_with(
    w: &dyn FieldOracle,
    bc: &RobinLineBC,
    x: &Point,
    quad: &AdaptiveOptions,
) -> Result<Complex64> {
    let lambda = constant_lambda(bc)?;
    let frame = *bc.frame();
    let xl = frame.to_local(x);
    let lw = LocalView { field: w, frame };
    let value = lw.eval(&xl)?.value;
    if lambda == c(0.0, 0.0) || xl.y == 0.0 {
        return Ok(value);
    }
    let leg = Segment::new(pt(xl.x, 0.0), xl)?;
    let f = |t: f64| -> Result<Complex64> {
        let s = t * xl.y;
        Ok((-I * lambda * s).exp() * lw.eval(&pt(xl.x, s))?.value * xl.y)
    };
    let integral = integrate_fallible(&f, &leg_breaks(&leg, &lw.singular_points()), quad)?;
    Ok(value + 2.0 * I * lambda * (I * lambda * xl.y).exp() * integral)
}

/// Value at `x` (on the unknown side) of the continuation of w with
/// holomorphic impedance, along `path` from the line to R_L x:
///
/// w̃(x) = w(R_L x) + (1/2i) ∫ V(y; x)(∂₂w dy₁ − ∂₁w dy₂) − (1/2i) ∫ w (∂₂V dy₁ − ∂₁V dy₂)
///
/// in canonical coordinates, with V from [`v_kernel_general_with_gradient`].
pub fn extend_general(w: &dyn FieldOracle, path: &PathCurve, bc: &RobinLineBC, x: &Point) -> Result<Complex64> {
    extend_general_with(w, path, bc, x, &ReflectionOptions::default())
}

pub fn extend_general_with(
    w: &dyn FieldOracle,
    path: &PathCurve,
    bc: &RobinLineBC,
    x: &Point,
    opts: &ReflectionOptions,
) -> Result<Complex64> {
    let frame = *bc.frame();
    let xl = frame.to_local(x);
    if xl.y >= 0.0 {
        return Err(Error::OutsideDomain(format!(
            "({}, {}) is not on the far side of the line",
            x.x, x.y
        )));
    }
    let rx = pt(xl.x, -xl.y);
    let lw = LocalView { field: w, frame };
    let value = lw.eval(&rx)?.value;
    if let Impedance::Constant(l) = bc.impedance() {
        if *l == c(0.0, 0.0) {
            return Ok(value);
        }
    }
    let lp = local_path(path, bc, &rx)?;
    let singular = lw.singular_points();
    // Kernel exponents use a tighter tolerance than the outer integral.
    let inner = AdaptiveOptions {
        tol: opts.quad.tol * 1e-2,
        ..opts.quad
    };
    let mut total = c(0.0, 0.0);
    for leg in lp.legs() {
        let d = leg.b() - leg.a();
        let f = |t: f64| -> Result<Complex64> {
            let y = leg.point_at(t);
            let (u, g) = sample_with_gradient(&lw, &y)?;
            let (v, dv) = v_kernel_general_with_gradient(&y, &xl, bc, &inner)?;
            Ok(v * (g[1] * d.x - g[0] * d.y) - u * (dv[1] * d.x - dv[0] * d.y))
        };
        total += integrate_fallible(&f, &leg_breaks(&leg, &singular), &opts.quad)?;
    }
    Ok(value + total / (2.0 * I))
}

/// Adaptive quadrature of an integrand that may fail; the first error wins.
pub(crate) fn integrate_fallible(
    f: &impl Fn(f64) -> Result<Complex64>,
    breaks: &[f64],
    quad: &AdaptiveOptions,
) -> Result<Complex64> {
    let err = std::cell::RefCell::new(None);
    let g = |t: f64| match f(t) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            c(0.0, 0.0)
        }
    };
    let r = integrate_adaptive(&g, breaks, quad);
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    r
}

/// Harmonic field (μ + λ) e^{μ(x₁ − ix₂)} + (μ − λ) e^{μ(x₁ + ix₂)}, which
/// satisfies ∂₂w + iλw = 0 on {x₂ = 0} and is its own continuation.
/// μ = −λ gives a multiple of e^{−λ(x₁ + ix₂)}.
pub fn robin_harmonic_exponential(lambda: Complex64, mu: Complex64) -> ExpSum {
    ExpSum::new(vec![(mu + lambda, [mu, -I * mu]), (mu - lambda, [mu, I * mu])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldSample, FnField};

    fn cl(l: f64) -> RobinLineBC {
        RobinLineBC::canonical(c(l, 0.0))
    }

    fn decaying(l: f64) -> ExpSum {
        ExpSum::new(vec![(c(1.0, 0.0), [c(-l, 0.0), c(0.0, -l)])])
    }

    #[test]
    fn v_kernel_examples() {
        assert_eq!(v_kernel_line(&pt(0.3, 0.2), &pt(0.3, -0.7), c(1.0, 0.0)), c(0.0, 0.0) * 1.0);
        let v = v_kernel_line(&pt(1.0, 0.0), &pt(0.0, 0.0), c(1.0, 0.0));
        assert!((v - c(-4.0 * 1f64.sinh(), 0.0)).norm() < 1e-14);
        assert!((v - c(-4.7008, 0.0)).norm() < 1e-4);
        assert_eq!(v_kernel_line(&pt(1.0, 2.0), &pt(0.0, 0.5), c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn v_kernel_gradient_matches_differences() {
        let (y, xt, l) = (pt(0.4, 0.3), pt(-0.2, -0.6), c(1.3, 0.2));
        let g = v_kernel_line_gradient(&y, &xt, l);
        let h = 1e-6;
        let d1 = (v_kernel_line(&(y + pt(h, 0.0)), &xt, l) - v_kernel_line(&(y - pt(h, 0.0)), &xt, l)) / (2.0 * h);
        let d2 = (v_kernel_line(&(y + pt(0.0, h)), &xt, l) - v_kernel_line(&(y - pt(0.0, h)), &xt, l)) / (2.0 * h);
        assert!((g[0] - d1).norm() < 1e-8);
        assert!((g[1] - d2).norm() < 1e-8);
    }

    #[test]
    fn general_kernel_reduces_to_line_kernel() {
        let l = c(0.8, 0.0);
        let bc = RobinLineBC::canonical_with(Impedance::Holomorphic(Arc::new(move |_| l)));
        let (y, xt) = (pt(0.7, 0.4), pt(-0.3, -0.5));
        let (v, g) = v_kernel_general_with_gradient(&y, &xt, &bc, &AdaptiveOptions::default()).unwrap();
        assert!((v - v_kernel_line(&y, &xt, l)).norm() < 1e-10);
        let gl = v_kernel_line_gradient(&y, &xt, l);
        assert!((g[0] - gl[0]).norm() < 1e-10 && (g[1] - gl[1]).norm() < 1e-10);
    }

    #[test]
    fn general_kernel_zero_impedance() {
        let bc = RobinLineBC::canonical_with(Impedance::Holomorphic(Arc::new(|_| c(0.0, 0.0))));
        assert_eq!(v_kernel_general(&pt(0.3, 0.2), &pt(0.0, 0.5), &bc).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn general_kernel_gradient_matches_differences() {
        let bc = RobinLineBC::canonical_with(Impedance::Holomorphic(Arc::new(|t| 1.0 + t * t * 0.3)));
        let (y, xt) = (pt(0.3, 0.2), pt(0.1, -0.5));
        let q = AdaptiveOptions { tol: 1e-13, ..Default::default() };
        let (_, g) = v_kernel_general_with_gradient(&y, &xt, &bc, &q).unwrap();
        let h = 1e-5;
        let v = |p: Point| v_kernel_general_with_gradient(&p, &xt, &bc, &q).unwrap().0;
        let d1 = (v(y + pt(h, 0.0)) - v(y - pt(h, 0.0))) / (2.0 * h);
        let d2 = (v(y + pt(0.0, h)) - v(y - pt(0.0, h))) / (2.0 * h);
        assert!((g[0] - d1).norm() < 1e-7, "{} vs {}", g[0], d1);
        assert!((g[1] - d2).norm() < 1e-7, "{} vs {}", g[1], d2);
    }

    #[test]
    fn general_kernel_self_convergence() {
        // λ(τ) = 1 + τ with x̃ = (0, 0.5), y = (0.3, 0.2); the exponents are
        // polynomial so a much finer rule must agree.
        let bc = RobinLineBC::canonical_with(Impedance::Holomorphic(Arc::new(|t| 1.0 + t)));
        let (y, xt) = (pt(0.3, 0.2), pt(0.0, 0.5));
        let coarse = v_kernel_general(&y, &xt, &bc).unwrap();
        let fine_opts = AdaptiveOptions { order: 64, tol: 1e-14, max_points: 1 << 16 };
        let fine = v_kernel_general_with_gradient(&y, &xt, &bc, &fine_opts).unwrap().0;
        assert!((coarse - fine).norm() < 1e-9);
        // Closed form: ∫_a^b (1 + τ) dτ = (b − a) + (b² − a²)/2.
        let prim = |a: Complex64, b: Complex64| (b - a) + (b * b - a * a) / 2.0;
        let (z, z0) = (c(0.3, 0.2), c(0.0, 0.5));
        let exact = -2.0 * prim(z0, z.conj()).exp() + 2.0 * (-prim(z0.conj(), z)).exp();
        assert!((coarse - exact).norm() < 1e-12);
    }

    #[test]
    fn neumann_is_identity() {
        let w = ExpSum::plane_wave(1.0, pt(0.6, 0.8));
        let path = PathCurve::new(vec![pt(0.5, 0.0), pt(0.9, 0.5), pt(0.2, 0.6)]).unwrap();
        let x = pt(0.2, 0.6);
        assert_eq!(dtilde_apply(&w, &path, &cl(0.0), &x).unwrap(), w.value(&x));
        assert_eq!(dtilde_apply_vertical(&w, &cl(0.0), &x).unwrap(), w.value(&x));
    }

    #[test]
    fn decaying_exponential_oracle() {
        let w = decaying(1.0);
        let x = pt(0.0, 1.0);
        let expect = c(1f64.cos(), 1f64.sin());
        let v = dtilde_apply(&w, &PathCurve::vertical(x).unwrap(), &cl(1.0), &x).unwrap();
        assert!((v - expect).norm() < 1e-12);
        let detour = PathCurve::new(vec![pt(-0.5, 0.0), pt(-0.8, 0.6), pt(0.4, 1.3), x]).unwrap();
        let d = dtilde_apply(&w, &detour, &cl(1.0), &x).unwrap();
        assert!((d - v).norm() < 1e-9, "{d} vs {v}");
    }

    #[test]
    fn vertical_form_oracle() {
        let w = decaying(2.0);
        let x = pt(0.3, 0.7);
        let v = dtilde_apply_vertical(&w, &cl(2.0), &x).unwrap();
        assert!((v - c(-0.6, 1.4).exp()).norm() < 1e-12);
        let full = dtilde_apply(&w, &PathCurve::vertical(x).unwrap(), &cl(2.0), &x).unwrap();
        assert!((v - full).norm() < 1e-10);
    }

    #[test]
    fn vertical_form_is_continuous_at_the_line() {
        let w = robin_harmonic_exponential(c(1.0, 0.0), c(0.7, 0.3));
        let on = w.value(&pt(0.4, 0.0));
        let v = dtilde_apply_vertical(&w, &cl(1.0), &pt(0.4, 1e-9)).unwrap();
        assert!((v - on).norm() < 1e-8);
    }

    #[test]
    fn exponential_family_is_reproduced() {
        for &l in &[0.5, 1.0, 2.0] {
            for mu in [c(0.6, 0.0), c(-1.1, 0.4), c(0.0, 1.5)] {
                let w = robin_harmonic_exponential(c(l, 0.0), mu);
                let m = w.mirrored();
                for x in [pt(0.2, 0.5), pt(-0.7, 1.4)] {
                    let path = PathCurve::new(vec![pt(x.x + 0.3, 0.0), pt(x.x - 0.2, 0.5 * x.y), x]).unwrap();
                    let v = dtilde_apply(&w, &path, &cl(l), &x).unwrap();
                    let e = m.value(&x);
                    assert!((v - e).norm() < 1e-8 * (1.0 + e.norm()), "λ={l} μ={mu}: {v} vs {e}");
                }
            }
        }
    }

    #[test]
    fn general_line_frame() {
        // Line through (1, 0) with direction (1, 1); known side contains (0, 1).
        let line = Line::new(pt(1.0, 0.0), pt(1.0, 1.0)).unwrap();
        let bc = RobinLineBC::new(line, &pt(0.0, 1.0), Impedance::Constant(c(0.9, 0.0))).unwrap();
        let frame = *bc.frame();
        let local = robin_harmonic_exponential(c(0.9, 0.0), c(0.5, -0.2));
        let world = FnField::new({
            let local = local.clone();
            move |p| {
                let s = local.eval(&frame.to_local(p))?;
                Ok(FieldSample::new(s.value, frame.complex_vector_to_world(&s.gradient.unwrap())))
            }
        });
        let x = frame.to_world(&pt(0.3, 0.8));
        let path = PathCurve::new(vec![frame.to_world(&pt(-0.4, 0.0)), frame.to_world(&pt(0.0, 1.0)), x]).unwrap();
        let v = dtilde_apply(&world, &path, &bc, &x).unwrap();
        let e = local.value(&pt(0.3, -0.8));
        assert!((v - e).norm() < 1e-9);
        let vv = dtilde_apply_vertical(&world, &bc, &x).unwrap();
        assert!((vv - e).norm() < 1e-9);
    }

    #[test]
    fn path_must_start_on_line() {
        let w = decaying(1.0);
        let x = pt(0.0, 1.0);
        let path = PathCurve::new(vec![pt(0.0, 0.2), x]).unwrap();
        assert!(matches!(dtilde_apply(&w, &path, &cl(1.0), &x), Err(Error::PathNotAdmissible(_))));
    }

    #[test]
    fn hyperbolic_overflow_is_reported() {
        let w = decaying(1.0);
        let x = pt(0.0, 1.0);
        let path = PathCurve::new(vec![pt(400.0, 0.0), pt(400.0, 1.0), x]).unwrap();
        assert!(matches!(dtilde_apply(&w, &path, &cl(1.0), &x), Err(Error::Range(_))));
    }

    #[test]
    fn holomorphic_impedance_extension() {
        // w = exp(−Λ(z)) with Λ(τ) = τ + τ²/2 satisfies ∂₂w + i(1 + x₁)w = 0
        // on the axis and continues to itself.
        let lam = |t: Complex64| 1.0 + t;
        let big = |t: Complex64| t + t * t / 2.0;
        let w = FnField::new(move |p| {
            let z = c(p.x, p.y);
            let v = (-big(z)).exp();
            let dz = -lam(z) * v;
            Ok(FieldSample::new(v, [dz, I * dz]))
        });
        let bc = RobinLineBC::canonical_with(Impedance::Holomorphic(Arc::new(lam)));
        let x = pt(0.3, -0.6);
        let exact = (-big(c(x.x, x.y))).exp();
        for path in [
            PathCurve::vertical(pt(0.3, 0.6)).unwrap(),
            PathCurve::new(vec![pt(-0.2, 0.0), pt(0.1, 0.9), pt(0.3, 0.6)]).unwrap(),
        ] {
            let v = extend_general(&w, &path, &bc, &x).unwrap();
            assert!((v - exact).norm() < 1e-8, "{v} vs {exact}");
        }
    }

    #[test]
    fn general_extension_matches_constant_case() {
        let l = c(1.2, 0.0);
        let w = robin_harmonic_exponential(l, c(0.4, 0.9));
        let hol = RobinLineBC::canonical_with(Impedance::Holomorphic(Arc::new(move |_| l)));
        let x = pt(0.5, 0.8);
        let path = PathCurve::new(vec![pt(0.0, 0.0), pt(0.2, 1.0), x]).unwrap();
        let a = dtilde_apply(&w, &path, &RobinLineBC::canonical(l), &x).unwrap();
        let b = extend_general(&w, &path, &hol, &pt(0.5, -0.8)).unwrap();
        assert!((a - b).norm() < 1e-7);
        let b0 = extend_general(&w, &path, &RobinLineBC::canonical(c(0.0, 0.0)), &pt(0.5, -0.8)).unwrap();
        assert_eq!(b0, w.value(&x));
    }

    #[test]
    fn negative_control_breaks_slanted_paths() {
        let w = decaying(1.0);
        let x = pt(0.0, 1.0);
        let path = PathCurve::new(vec![pt(-0.5, 0.0), pt(0.4, 0.5), x]).unwrap();
        let opts = ReflectionOptions { corrupt_kernel_sign: true, ..Default::default() };
        let v = dtilde_apply_with(&w, &path, &cl(1.0), &x, &opts).unwrap();
        assert!((v - c(1f64.cos(), 1f64.sin())).norm() > 1e-3);
    }
}
