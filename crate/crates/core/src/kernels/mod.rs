//! Fundamental solutions of the Laplace and Helmholtz operators and the Green's
//! function of the upper half-plane with the Robin condition
//! ∂₂G + iλG = 0 on {x₂ = 0}.

pub mod bessel;
pub mod expint;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Point;

pub use bessel::{bessel_hankel, hankel01, jy_range, BesselHankel};
pub use expint::{exp_e1, half_line_integral, half_line_integral_complex};

/// Value and x-gradient of a kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensEval {
    pub value: Complex64,
    pub gradient: [Complex64; 2],
}

impl GreensEval {
    pub fn real(value: f64, gradient: [f64; 2]) -> Self {
        Self {
            value: value.into(),
            gradient: [gradient[0].into(), gradient[1].into()],
        }
    }
}

impl std::ops::Add for GreensEval {
    type Output = GreensEval;
    fn add(self, o: GreensEval) -> GreensEval {
        GreensEval {
            value: self.value + o.value,
            gradient: [self.gradient[0] + o.gradient[0], self.gradient[1] + o.gradient[1]],
        }
    }
}

/// Wavenumber, constant impedance and unit incident direction.
///
/// Per-edge impedances live on [`crate::geometry::Polygon`] edges and
/// holomorphic impedances on [`crate::harmonic_reflection::RobinLineBC`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveParams {
    pub k: f64,
    pub lambda: Complex64,
    pub direction: Point,
}

impl WaveParams {
    /// Validates k > 0 and normalizes the direction.
    pub fn new(k: f64, lambda: Complex64, direction: Point) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("impedance must be finite".into()));
        }
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter("incident direction must be nonzero".into()));
        }
        Ok(Self {
            k,
            lambda,
            direction: direction / n,
        })
    }

    /// Scattering mode additionally needs real λ > 0.
    pub fn check_scattering(&self) -> Result<()> {
        if self.lambda.im != 0.0 || !(self.lambda.re > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scattering needs a real positive impedance, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

fn separation(x: &Point, y: &Point) -> Result<(Point, f64)> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok((d, r))
}

/// Φ(x;y) = −(1/2π) ln|x − y|.
pub fn phi_laplace(x: &Point, y: &Point) -> Result<Complex64> {
    let (_, r) = separation(x, y)?;
    Ok((-r.ln() / (2.0 * PI)).into())
}

/// Φ(x;y) with its x-gradient −(x − y)/(2π|x − y|²).
pub fn phi_laplace_eval(x: &Point, y: &Point) -> Result<GreensEval> {
    let (d, r) = separation(x, y)?;
    let s = -1.0 / (2.0 * PI * r * r);
    Ok(GreensEval::real(-r.ln() / (2.0 * PI), [s * d.x, s * d.y]))
}

/// Radiating fundamental solution (i/4)H₀⁽¹⁾(k|x − y|) and its x-gradient.
pub fn phi_helmholtz(x: &Point, y: &Point, k: f64) -> Result<GreensEval> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("wavenumber must be positive, got {k}")));
    }
    let (d, r) = separation(x, y)?;
    let (h0, h1) = hankel01(k * r);
    let i4 = Complex64::new(0.0, 0.25);
    let g = -i4 * k * h1 / r;
    Ok(GreensEval {
        value: i4 * h0,
        gradient: [g * d.x, g * d.y],
    })
}

fn half_line(cpt: Complex64, lambda: Complex64) -> Result<Complex64> {
    if lambda.im == 0.0 {
        half_line_integral(cpt, lambda.re)
    } else {
        half_line_integral_complex(cpt, lambda)
    }
}

/// Shared closed form of the Robin Green's function
/// G₀ = Φ(x;y) + Φ(x;y*) + 2iλ∫₀^∞ e^{iλt}Φ(x; y* − te₂) dt, y* = (y₁, −y₂),
/// written as Φ(x;y) − Φ(x;y*) + (J(c) + J(c̄))/2π with c = x₂ + y₂ + i(x₁ − y₁).
fn g0_closed_form(x: &Point, y: &Point, lambda: Complex64) -> Result<GreensEval> {
    let direct = phi_laplace_eval(x, y)?;
    let a = x.x - y.x;
    let b = x.y + y.y;
    let rho2 = a * a + b * b;
    if rho2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let s = -1.0 / (2.0 * PI * rho2);
    let image = GreensEval::real(-rho2.ln() / (4.0 * PI), [s * a, s * b]);
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(direct + image);
    }
    let c1 = Complex64::new(b, a);
    let c2 = Complex64::new(b, -a);
    let j1 = half_line(c1, lambda)?;
    let j2 = half_line(c2, lambda)?;
    let two_pi = 2.0 * PI;
    let i = Complex64::new(0.0, 1.0);
    Ok(GreensEval {
        value: direct.value - image.value + (j1 + j2) / two_pi,
        gradient: [
            direct.gradient[0] + image.gradient[0] + lambda * (j1 - j2) / two_pi,
            direct.gradient[1] + image.gradient[1] - i * lambda * (j1 + j2) / two_pi,
        ],
    })
}

/// Green's function of the upper half-plane for −Δ with the Robin condition
/// ∂₂G₀ + iλG₀ = 0 on {x₂ = 0}, and its x-gradient.
///
/// For λ = 0 this is the Neumann image sum Φ(x;y) + Φ(x₁,−x₂;y). Real λ uses
/// the exponential-integral closed form, complex λ contour quadrature.
pub fn g0_robin_halfplane(x: &Point, y: &Point, lambda: Complex64) -> Result<GreensEval> {
    if !(x.y > 0.0) || !(y.y > 0.0) {
        return Err(Error::OutsideDomain(
            "Robin Green's function needs both points in the open upper half-plane".into(),
        ));
    }
    if x == y {
        return Err(Error::CoincidentPoints);
    }
    g0_closed_form(x, y, lambda)
}

/// Analytic continuation of x ↦ G₀(x;y) from the upper half-plane along
/// vertical paths, defined for all x off the half-line {x₁ = y₁, x₂ ≤ −y₂}
/// and off y itself. Agrees with [`g0_robin_halfplane`] for x₂ > 0.
pub fn g0_continued(x: &Point, y: &Point, lambda: Complex64) -> Result<GreensEval> {
    if !(y.y > 0.0) {
        return Err(Error::OutsideDomain("source point must lie above the line".into()));
    }
    if x.x == y.x && x.y + y.y <= 0.0 && lambda != Complex64::new(0.0, 0.0) {
        return Err(Error::OutsideDomain(format!(
            "({}, {}) lies on the branch cut below the image point",
            x.x, x.y
        )));
    }
    g0_closed_form(x, y, lambda)
}
