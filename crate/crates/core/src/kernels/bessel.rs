//! Bessel functions of the first and second kind and Hankel functions of the
//! first kind for integer order and positive real argument.
//!
//! J₀, J₁, Y₀, Y₁ use ascending series below x = 12 and Hankel's asymptotic
//! expansion above. Higher orders come from recurrences: Miller's backward
//! recurrence (normalised by J₀ + 2ΣJ₂ₖ = 1) for J where it is unstable
//! forwards, forward recurrence for Y.

use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SWITCH: f64 = 12.0;
pub const MAX_ORDER: usize = 200;

/// Jₙ, Jₙ', Hₙ⁽¹⁾, Hₙ⁽¹⁾' at one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselHankel {
    pub j: f64,
    pub dj: f64,
    pub h: Complex64,
    pub dh: Complex64,
}

fn check_argument(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Bessel argument must be positive and finite, got {x}"
        )));
    }
    Ok(())
}

/// Ascending series for J₀, J₁, Y₀, Y₁.
fn series_01(x: f64) -> [f64; 4] {
    let q = 0.25 * x * x;
    let mut term = 1.0; // (−q)^k / (k!)²
    let mut j0 = 0.0;
    let mut y0_sum = 0.0;
    let mut harmonic = 0.0;
    let mut j1 = 0.0;
    let mut y1_sum = 0.0;
    let half = 0.5 * x;
    for k in 0..200 {
        let kf = k as f64;
        if k > 0 {
            term *= -q / (kf * kf);
            harmonic += 1.0 / kf;
        }
        j0 += term;
        y0_sum += -term * harmonic;
        // (−q)^k / (k!(k+1)!)·(x/2)
        let t1 = term / (kf + 1.0) * half;
        j1 += t1;
        // ψ(k+1) + ψ(k+2) = −2γ + 2H_k + 1/(k+1)
        y1_sum += t1 * (-2.0 * EULER_GAMMA + 2.0 * harmonic + 1.0 / (kf + 1.0));
        if kf > q && term.abs() < 1e-18 {
            break;
        }
    }
    let log_term = (half.ln() + EULER_GAMMA) * 2.0 / PI;
    let y0 = log_term * j0 + 2.0 / PI * y0_sum;
    let y1 = 2.0 / PI * j1 * half.ln() - 2.0 / (PI * x) - y1_sum / PI;
    [j0, j1, y0, y1]
}

/// Hankel asymptotic expansion P, Q for order ν.
fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 0.0;
    let mut q = 0.0;
    let mut a = 1.0; // a_k(ν)/x^k with alternating signs handled below
    let mut last = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let kf = k as f64;
            a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        }
        if a.abs() > last && k > 2 {
            break;
        }
        last = a.abs();
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-18 {
            break;
        }
    }
    (p, q)
}

fn asymptotic_01(x: f64) -> [f64; 4] {
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    let chi0 = x - FRAC_PI_4;
    let chi1 = x - 3.0 * FRAC_PI_4;
    let (s0, c0) = chi0.sin_cos();
    let (s1, c1) = chi1.sin_cos();
    [
        amp * (p0 * c0 - q0 * s0),
        amp * (p1 * c1 - q1 * s1),
        amp * (p0 * s0 + q0 * c0),
        amp * (p1 * s1 + q1 * c1),
    ]
}

/// J₀(x), J₁(x), Y₀(x), Y₁(x) for x > 0.
pub fn jy01(x: f64) -> [f64; 4] {
    if x < SWITCH {
        series_01(x)
    } else {
        asymptotic_01(x)
    }
}

/// H₀⁽¹⁾(x) and H₁⁽¹⁾(x) for x > 0.
pub fn hankel01(x: f64) -> (Complex64, Complex64) {
    let [j0, j1, y0, y1] = jy01(x);
    (Complex64::new(j0, y0), Complex64::new(j1, y1))
}

/// J₀ … J_{nmax} by Miller's backward recurrence.
fn j_miller(nmax: usize, x: f64) -> Vec<f64> {
    let start = {
        let m = nmax.max(x as usize) + 20 + (40.0 * (nmax as f64).max(x)).sqrt() as usize;
        m + (m % 2)
    };
    let mut vals = vec![0.0; start + 2];
    let mut jp1 = 0.0;
    let mut j = 1e-300;
    vals[start] = j;
    for n in (1..=start).rev() {
        let jm1 = 2.0 * n as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        vals[n - 1] = j;
        if j.abs() > 1e250 {
            for v in vals[(n - 1)..].iter_mut() {
                *v *= 1e-250;
            }
            jp1 *= 1e-250;
            j *= 1e-250;
        }
    }
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }
    vals.truncate(nmax + 1);
    for v in vals.iter_mut() {
        *v /= norm;
    }
    vals
}

/// Jₙ(x) and Yₙ(x) for n = 0 … nmax.
pub fn jy_range(nmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_argument(x)?;
    if nmax > MAX_ORDER {
        return Err(Error::Range(format!("Bessel order {nmax} exceeds {MAX_ORDER}")));
    }
    let [j0, j1, y0, y1] = jy01(x);
    let j = if x >= SWITCH && (nmax as f64) < x {
        // Forward recurrence is stable for n < x.
        let mut v = vec![j0, j1];
        for n in 1..nmax {
            v.push(2.0 * n as f64 / x * v[n] - v[n - 1]);
        }
        v.truncate(nmax + 1);
        v
    } else {
        j_miller(nmax, x)
    };
    let mut y = vec![y0, y1];
    for n in 1..nmax {
        y.push(2.0 * n as f64 / x * y[n] - y[n - 1]);
    }
    y.truncate(nmax + 1);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Range(format!(
            "Yₙ({x}) overflows below order {nmax}"
        )));
    }
    Ok((j, y))
}

/// Jₙ, Jₙ', Hₙ⁽¹⁾, Hₙ⁽¹⁾' for integer order n (|n| ≤ 200) and x > 0.
pub fn bessel_hankel(order: i32, x: f64) -> Result<BesselHankel> {
    let n = order.unsigned_abs() as usize;
    let (j, y) = jy_range(n + 1, x)?;
    let h = |m: usize| Complex64::new(j[m], y[m]);
    // Cₙ' = Cₙ₋₁ − (n/x)Cₙ with C₋₁ = −C₁.
    let (jv, djv, hv, dhv) = if n == 0 {
        (j[0], -j[1], h(0), -h(1))
    } else {
        let nf = n as f64;
        (
            j[n],
            j[n - 1] - nf / x * j[n],
            h(n),
            h(n - 1) - h(n) * (nf / x),
        )
    };
    if order < 0 && n % 2 == 1 {
        Ok(BesselHankel {
            j: -jv,
            dj: -djv,
            h: -hv,
            dh: -dhv,
        })
    } else {
        Ok(BesselHankel {
            j: jv,
            dj: djv,
            h: hv,
            dh: dhv,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_fixed;

    /// Jₙ(x) = (1/2π)∫₀^{2π} cos(x sin τ − nτ) dτ by the trapezoid rule, which
    /// is spectrally accurate for this periodic integrand.
    fn j_oracle(n: i32, x: f64) -> f64 {
        let m = 2048;
        let h = 2.0 * PI / m as f64;
        (0..m)
            .map(|i| {
                let t = i as f64 * h;
                (x * t.sin() - n as f64 * t).cos()
            })
            .sum::<f64>()
            / m as f64
    }

    /// Yₙ(x) = (1/π)∫₀^π sin(x sin τ − nτ)dτ − (1/π)∫₀^∞ (e^{nt} + (−1)ⁿe^{−nt}) e^{−x sinh t} dt.
    fn y_oracle(n: i32, x: f64) -> f64 {
        let panels = 64;
        let mut first = 0.0;
        for p in 0..panels {
            let a = PI * p as f64 / panels as f64;
            let b = PI * (p + 1) as f64 / panels as f64;
            first += integrate_fixed(&|t: f64| (x * t.sin() - n as f64 * t).sin(), a, b, 32);
        }
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let f = |t: f64| ((n as f64) * t - x * t.sinh()).exp() + sign * (-(n as f64) * t - x * t.sinh()).exp();
        let upper = 12.0;
        let mut second = 0.0;
        for p in 0..400 {
            let a = upper * p as f64 / 400.0;
            let b = upper * (p + 1) as f64 / 400.0;
            second += integrate_fixed(&f, a, b, 16);
        }
        (first - second) / PI
    }

    #[test]
    fn j1_at_one() {
        let v = bessel_hankel(1, 1.0).unwrap();
        assert!((v.j - 0.440_050_585_7).abs() < 1e-10);
    }

    #[test]
    fn j0_small_argument() {
        let v = bessel_hankel(0, 1e-8).unwrap();
        assert!((v.j - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wronskian_identity() {
        let z = 2.5;
        for n in 0..=10 {
            let v = bessel_hankel(n, z).unwrap();
            let w = v.dh * v.j - v.h * v.dj;
            let expected = Complex64::new(0.0, 2.0 / (PI * z));
            assert!((w - expected).norm() < 1e-13, "n={n}: {w}");
        }
    }

    #[test]
    fn matches_integral_oracles() {
        for &x in &[0.1, 0.7, 1.0, 2.5, 5.0, 11.9, 12.1, 20.0, 35.0, 80.0] {
            for n in [0, 1, 2, 3, 5, 10, 17] {
                let v = bessel_hankel(n, x).unwrap();
                let jo = j_oracle(n, x);
                let yo = y_oracle(n, x);
                let scale = v.h.norm();
                assert!((v.j - jo).abs() <= 1e-10 * scale, "J_{n}({x}) = {} vs {jo}", v.j);
                assert!((v.h.im - yo).abs() <= 1e-10 * scale, "Y_{n}({x}) = {} vs {yo}", v.h.im);
            }
        }
    }

    #[test]
    fn high_order_decay_and_negative_orders() {
        // Ascending series, all terms of one sign dominate for n ≫ x.
        let (n, x) = (40, 5.0);
        let mut term = (1..=n).fold(1.0, |t, k| t * (x / 2.0) / k as f64);
        let mut series = 0.0;
        for k in 0..40 {
            series += term;
            term *= -(x * x / 4.0) / ((k + 1) as f64 * (k + 1 + n) as f64);
        }
        let v = bessel_hankel(n, x).unwrap();
        assert!((v.j / series - 1.0).abs() < 1e-12, "{} vs {series}", v.j);
        let p = bessel_hankel(3, 2.0).unwrap();
        let m = bessel_hankel(-3, 2.0).unwrap();
        assert_eq!(m.j, -p.j);
        assert_eq!(m.h, -p.h);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(matches!(bessel_hankel(200, 1e-3), Err(Error::Range(_))));
        assert!(bessel_hankel(201, 1.0).is_err());
        assert!(bessel_hankel(0, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for n in [0, 1, 4] {
            let x = 3.3;
            let h = 1e-5;
            let p = bessel_hankel(n, x + h).unwrap();
            let m = bessel_hankel(n, x - h).unwrap();
            let v = bessel_hankel(n, x).unwrap();
            assert!(((p.j - m.j) / (2.0 * h) - v.dj).abs() < 1e-9);
            assert!(((p.h - m.h) / (2.0 * h) - v.dh).norm() < 1e-9);
        }
    }
}
