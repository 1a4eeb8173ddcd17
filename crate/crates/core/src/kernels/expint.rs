//! Complex exponential integral E₁ and the half-line integral
//! J(c) = ∫₀^∞ e^{iλt}/(t + c) dt that appears in the Robin Green's function.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate_fixed, graded_breaks};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Principal branch of E₁(z), cut along the negative real axis.
pub fn exp_e1(z: Complex64) -> Result<Complex64> {
    let r = z.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("E₁ undefined at {z}")));
    }
    if r > 50.0 {
        Ok(asymptotic(z))
    } else if r + z.re < 10.0 {
        Ok(series(z))
    } else {
        continued_fraction(z)
    }
}

fn series(z: Complex64) -> Complex64 {
    // E₁(z) = −γ − Log z − Σ_{n≥1} (−z)ⁿ/(n·n!)
    let mut sum = c(0.0, 0.0);
    let mut term = c(1.0, 0.0);
    for n in 1..400 {
        let nf = n as f64;
        term *= -z / nf;
        let add = term / nf;
        sum += add;
        if nf > z.norm() && add.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - z.ln() - sum
}

fn continued_fraction(z: Complex64) -> Result<Complex64> {
    // Modified Lentz on E₁(z) = e^{−z}·1/(z + 1 − 1²/(z + 3 − 2²/(z + 5 − …))).
    let tiny = 1e-300;
    let mut b = z + 1.0;
    let mut cc = c(1.0 / tiny, 0.0);
    let mut d = c(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = c(1.0, 0.0) / (an * d + b);
        cc = b + an / cc;
        if cc.norm() < tiny {
            cc = c(tiny, 0.0);
        }
        let del = cc * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            return Ok(h * (-z).exp());
        }
    }
    Err(Error::Quadrature(format!("E₁ continued fraction stalled at {z}")))
}

fn asymptotic(z: Complex64) -> Complex64 {
    let mut sum = c(1.0, 0.0);
    let mut term = c(1.0, 0.0);
    for n in 1..60 {
        let next = term * (-(n as f64)) / z;
        if next.norm() > term.norm() {
            break;
        }
        term = next;
        sum += term;
        if term.norm() < 1e-17 {
            break;
        }
    }
    (-z).exp() / z * sum
}

/// J(c) = ∫₀^∞ e^{iλt}/(t + c) dt for real λ ≠ 0, continued analytically in c
/// off the cut (−∞, 0]. Convergence at infinity is oscillatory (Abel sense).
///
/// Uses J(c) = e^{−iλc}E₁(−iλc) for Re c > 0 and adds the branch jump ±2πi in
/// the half of the left plane reached across the cut of E₁.
pub fn half_line_integral(cpt: Complex64, lambda: f64) -> Result<Complex64> {
    if lambda == 0.0 {
        return Err(Error::InvalidParameter("J(c) diverges for λ = 0".into()));
    }
    if cpt.re <= 0.0 && cpt.im == 0.0 {
        return Err(Error::InvalidParameter(format!("J(c) is singular on the cut, c = {cpt}")));
    }
    let z = c(0.0, -lambda) * cpt;
    let mut e = exp_e1(z)?;
    if cpt.re < 0.0 {
        if lambda > 0.0 && cpt.im < 0.0 {
            e += c(0.0, 2.0 * PI);
        } else if lambda < 0.0 && cpt.im > 0.0 {
            e -= c(0.0, 2.0 * PI);
        }
    }
    Ok(z.exp() * e)
}

/// J(c) for complex λ by contour quadrature: along the real axis up to
/// t = max(0, −Re c) + 1, then along a ray on which e^{iλt} decays.
///
/// Requires Re λ ≠ 0 or Im λ > 0 so that such a ray exists within the right
/// half-plane. The path passes below the pole t = −c when Im c > 0 and above
/// it otherwise, matching the continuation off the cut (−∞, 0].
pub fn half_line_integral_complex(cpt: Complex64, lambda: Complex64) -> Result<Complex64> {
    // Decay along direction e^{iθ}: Re(iλe^{iθ}) = −|λ| sin(θ + arg λ) < 0.
    let arg = lambda.arg();
    let theta = if lambda.norm() == 0.0 {
        return Err(Error::InvalidParameter("J(c) diverges for λ = 0".into()));
    } else {
        // Choose θ ∈ [−π/2, π/2] maximising sin(θ + arg λ).
        (PI / 2.0 - arg).clamp(-PI / 2.0, PI / 2.0)
    };
    let rate = lambda.norm() * (theta + arg).sin();
    if rate <= 1e-3 * lambda.norm() {
        return Err(Error::InvalidParameter(format!(
            "no decaying contour for λ = {lambda}"
        )));
    }
    if cpt.re <= 0.0 && cpt.im == 0.0 {
        return Err(Error::InvalidParameter(format!("J(c) is singular on the cut, c = {cpt}")));
    }
    let i_lambda = c(0.0, 1.0) * lambda;
    let f = |t: Complex64| (i_lambda * t).exp() / (t + cpt);
    // Real segment [0, T], refined toward the closest approach to −c.
    let big_t = (-cpt.re).max(0.0) + 1.0;
    let closest = (-cpt.re).clamp(0.0, big_t);
    let dist = (c(closest, 0.0) + cpt).norm();
    let breaks = graded_breaks(0.0, big_t, closest, dist);
    let mut total = c(0.0, 0.0);
    for w in breaks.windows(2) {
        total += integrate_fixed(&|t: f64| f(c(t, 0.0)), w[0], w[1], 32);
    }
    // Ray T + s e^{iθ}, s ∈ [0, S] with e^{−rate·S} below round-off.
    let dir = c(theta.cos(), theta.sin());
    let s_max = 40.0 / rate;
    let panels = ((s_max * lambda.norm()).ceil() as usize).clamp(8, 4000);
    let h = s_max / panels as f64;
    for p in 0..panels {
        let a = p as f64 * h;
        total += integrate_fixed(&|s: f64| f(c(big_t, 0.0) + dir * s) * dir, a, a + h, 24);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// E₁(z) = e^{−z}∫₀^∞ e^{−t}/(z + t) dt, valid for |arg z| < π.
    fn e1_oracle(z: Complex64) -> Complex64 {
        let d = z.re.min(0.0).abs();
        let mut breaks = graded_breaks(0.0, 60.0, d, z.im.abs().max(1e-6));
        breaks.retain(|&b| b <= 60.0);
        let mut s = c(0.0, 0.0);
        for w in breaks.windows(2) {
            let mut a = w[0];
            let n = ((w[1] - w[0]) / 0.5).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / n as f64;
            for _ in 0..n {
                s += integrate_fixed(&|t: f64| c((-t).exp(), 0.0) / (z + t), a, a + h, 32);
                a += h;
            }
        }
        (-z).exp() * s
    }

    #[test]
    fn e1_against_quadrature() {
        let pts = [
            c(0.01, 0.02),
            c(0.5, -0.3),
            c(1.0, 0.0),
            c(2.0, -5.0),
            c(-3.0, 2.0),
            c(-3.0, -2.0),
            c(-0.5, -8.0),
            c(7.0, 1.0),
            c(-8.0, 0.5),
            c(-20.0, 20.0),
            c(0.0, -30.0),
            c(-45.0, -1.0),
            c(30.0, -45.0),
        ];
        for z in pts {
            let v = exp_e1(z).unwrap();
            let o = e1_oracle(z);
            assert!((v - o).norm() <= 1e-11 * o.norm().max(1e-300), "E1({z}) = {v} vs {o}");
        }
    }

    #[test]
    fn e1_regions_are_continuous() {
        // Switch between series and continued fraction at |z| + Re z = 10.
        for th in [0.3f64, 1.0, 1.8, 2.5] {
            let r = 10.0 / (1.0 + th.cos());
            let z = c(r * th.cos(), r * th.sin());
            let a = series(z);
            let b = continued_fraction(z).unwrap();
            assert!((a - b).norm() < 1e-9 * a.norm(), "θ={th}: {a} vs {b}");
        }
    }

    #[test]
    fn half_line_integral_matches_contour_quadrature() {
        for &lambda in &[0.5, 1.0, 2.0, -1.0] {
            for cpt in [c(0.5, 0.3), c(2.0, -1.0), c(0.1, 0.0), c(-0.7, 0.4), c(-0.7, -0.4), c(-2.0, 3.0)] {
                let a = half_line_integral(cpt, lambda).unwrap();
                let b = half_line_integral_complex(cpt, c(lambda, 0.0)).unwrap();
                assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()), "λ={lambda} c={cpt}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn half_line_integral_derivative() {
        // J'(c) = −1/c − iλJ(c).
        let lambda = 1.3;
        let cpt = c(0.4, -0.9);
        let h = 1e-6;
        let d = (half_line_integral(cpt + h, lambda).unwrap()
            - half_line_integral(cpt - h, lambda).unwrap())
            / (2.0 * h);
        let exact = -1.0 / cpt - c(0.0, lambda) * half_line_integral(cpt, lambda).unwrap();
        assert!((d - exact).norm() < 1e-8);
    }
}
