//! Series solution for the impedance disk, used as an independent oracle.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::FarFieldPattern;
use crate::error::{Error, Result};
use crate::kernels::{bessel_hankel, WaveParams};

/// Magnitude below which the last retained coefficient must fall.
pub const TAIL_TOL: f64 = 1e-12;

/// Coefficient Aₙ of the scattered mode iⁿAₙHₙ⁽¹⁾(kr)e^{in(θ−θ_d)}:
/// Aₙ = −(kJₙ'(ka) + iλJₙ(ka)) / (kHₙ⁽¹⁾'(ka) + iλHₙ⁽¹⁾(ka)).
pub fn mie_coefficient(n: i32, radius: f64, k: f64, lambda: Complex64) -> Result<Complex64> {
    let b = bessel_hankel(n, k * radius)?;
    let i = Complex64::new(0.0, 1.0);
    Ok(-(k * b.dj + i * lambda * b.j) / (k * b.dh + i * lambda * b.h))
}

/// Coefficients A₀ … A_N (A₋ₙ = Aₙ).
pub fn mie_coefficients(radius: f64, wave: &WaveParams, truncation: usize) -> Result<Vec<Complex64>> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("radius must be positive".into()));
    }
    let ka = wave.k * radius;
    if (truncation as f64) < ka + 20.0 {
        return Err(Error::InvalidParameter(format!(
            "truncation {truncation} is below ka + 20 = {:.1}",
            ka + 20.0
        )));
    }
    let coeffs = (0..=truncation as i32)
        .map(|n| mie_coefficient(n, radius, wave.k, wave.lambda))
        .collect::<Result<Vec<_>>>()?;
    let tail = coeffs[truncation].norm();
    if !(tail < TAIL_TOL) {
        return Err(Error::Range(format!(
            "series tail |A_{truncation}| = {tail:.3e} exceeds {TAIL_TOL:e}"
        )));
    }
    Ok(coeffs)
}

/// u∞(θ) = √(2/(πk)) e^{−iπ/4} Σₙ Aₙ e^{in(θ−θ_d)} at `m` uniform angles.
pub fn mie_disk_oracle(radius: f64, wave: &WaveParams, m: usize, truncation: usize) -> Result<FarFieldPattern> {
    let coeffs = mie_coefficients(radius, wave, truncation)?;
    let c = Complex64::from_polar((2.0 / (PI * wave.k)).sqrt(), -FRAC_PI_4);
    let theta_d = wave.direction.y.atan2(wave.direction.x);
    FarFieldPattern::sample(m, |th| {
        let phi = th - theta_d;
        let mut s = coeffs[0];
        for (n, a) in coeffs.iter().enumerate().skip(1) {
            s += a * (2.0 * (n as f64 * phi).cos());
        }
        c * s
    })
}
