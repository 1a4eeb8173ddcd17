//! Direct boundary integral formulation for the total-field trace.
//!
//! For x on ∂D the Green representation of the radiating part gives
//! u(x)/2 − K[u](x) + S[∂νu](x) = u^in(x), with S and K the single- and
//! double-layer operators of the radiating fundamental solution and ν the
//! outward normal. On Robin panels ∂νu = −iλu is substituted, leaving the
//! trace as the unknown; on Dirichlet panels u = 0 and the unknown is ∂νu.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_4, PI};

use super::mesh::{BoundaryMesh, MeshParams, Panel, PanelBc};
use super::FarFieldPattern;
use crate::error::{Error, Result};
use crate::geometry::{Containment, Point, Polygon};
use crate::kernels::{hankel01, WaveParams};
use crate::quadrature::{gauss_legendre, graded_breaks};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Condition estimates above this are reported as a warning.
pub const CONDITION_WARNING: f64 = 1e8;
/// Condition estimates above this abort the solve.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Quadrature nodes (point, weight) on `panel` suitable for a target at `x`.
fn panel_nodes(x: &Point, panel: &Panel) -> Vec<(Point, f64)> {
    let t = panel.tangent();
    let s_star = (x - panel.a).dot(&t).clamp(0.0, panel.length);
    let d = (x - panel.point_at(s_star)).norm();
    let ratio = d / panel.length;
    let breaks = if ratio > 4.0 {
        return gauss_legendre(6)
            .on(0.0, panel.length)
            .map(|(s, w)| (panel.point_at(s), w))
            .collect();
    } else if ratio > 1.5 {
        vec![0.0, panel.length]
    } else {
        graded_breaks(0.0, panel.length, s_star, d.max(1e-14 * panel.length))
    };
    let rule = gauss_legendre(12);
    breaks
        .windows(2)
        .flat_map(|w| rule.on(w[0], w[1]).map(|(s, wt)| (panel.point_at(s), wt)))
        .collect()
}

/// Φ(x, y) and ∂Φ/∂ν(y).
fn kernel(x: &Point, y: &Point, normal: &Point, k: f64) -> (Complex64, Complex64) {
    let d = x - y;
    let r = d.norm();
    let (h0, h1) = hankel01(k * r);
    let i4 = 0.25 * I;
    (i4 * h0, i4 * k * h1 * d.dot(normal) / r)
}

/// Values and x-gradients of Φ(x, y) and ∂Φ/∂ν(y).
fn kernel_with_gradient(x: &Point, y: &Point, normal: &Point, k: f64) -> [Complex64; 6] {
    let d = x - y;
    let r = d.norm();
    let kr = k * r;
    let (h0, h1) = hankel01(kr);
    let i4 = 0.25 * I;
    let dn = d.dot(normal);
    // ∂Φ/∂ν(y) = f(r)(x − y)·ν with f = (i/4)kH₁(kr)/r.
    let f = i4 * k * h1 / r;
    let fp = i4 * k * (h0 * kr - h1 * 2.0) / (r * r);
    let g = -f;
    [
        i4 * h0,
        f * dn,
        g * d.x,
        g * d.y,
        f * normal.x + fp * dn * d.x / r,
        f * normal.y + fp * dn * d.y / r,
    ]
}

/// ∫Φ and ∫∂Φ/∂ν(y) over a panel for a target not at its midpoint.
fn panel_integrals(x: &Point, panel: &Panel, k: f64) -> (Complex64, Complex64) {
    let mut s = Complex64::new(0.0, 0.0);
    let mut dl = s;
    for (y, w) in panel_nodes(x, panel) {
        let (a, b) = kernel(x, &y, &panel.normal, k);
        s += a * w;
        dl += b * w;
    }
    (s, dl)
}

/// ∫Φ over a panel from the point at arclength `s0` on it: the logarithmic
/// part −(1/2π)ln r is integrated exactly and the smooth remainder by Gauss
/// rules on both sides. The double-layer kernel vanishes on a flat panel.
fn single_layer_on_panel(panel: &Panel, s0: f64, k: f64) -> Complex64 {
    let xlogx = |a: f64| if a > 0.0 { a * (a.ln() - 1.0) } else { 0.0 };
    let log_part = -(xlogx(s0) + xlogx(panel.length - s0)) / (2.0 * PI);
    let rule = gauss_legendre(12);
    let remainder = |h: f64| -> Complex64 {
        rule.on(0.0, h)
            .map(|(r, w)| {
                let (h0, _) = hankel01(k * r);
                (0.25 * I * h0 + r.ln() / (2.0 * PI)) * w
            })
            .sum()
    };
    // The remainder is continuous at r = 0 and no node sits there.
    log_part + remainder(s0) + remainder(panel.length - s0)
}

fn self_single_layer(panel: &Panel, k: f64) -> Complex64 {
    single_layer_on_panel(panel, panel.length / 2.0, k)
}

/// Hager's estimate of ‖A⁻¹‖₁ from an LU factorization.
fn inverse_norm1_estimate(lu: &nalgebra::linalg::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>, n: usize) -> f64 {
    let l = lu.l();
    let u = lu.u();
    let p = lu.p();
    let solve_adjoint = |rhs: &DVector<Complex64>| -> Option<DVector<Complex64>> {
        let w = u.adjoint().solve_lower_triangular(rhs)?;
        let mut v = l.adjoint().solve_upper_triangular(&w)?;
        p.inv_permute_rows(&mut v);
        Some(v)
    };
    let mut x = DVector::from_element(n, Complex64::new(1.0 / n as f64, 0.0));
    let mut est = 0.0;
    for _ in 0..5 {
        let Some(y) = lu.solve(&x) else { return f64::INFINITY };
        est = y.iter().map(|v| v.norm()).sum::<f64>();
        let xi = y.map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) });
        let Some(z) = solve_adjoint(&xi) else { return f64::INFINITY };
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .map(|(j, v)| (j, v.norm()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        let zx = z.dotc(&x).re;
        if zmax <= zx {
            break;
        }
        x = DVector::from_element(n, Complex64::new(0.0, 0.0));
        x[jmax] = Complex64::new(1.0, 0.0);
    }
    est
}

/// Boundary trace of the total field and the data needed to evaluate it.
#[derive(Debug, Clone)]
pub struct ScatteringSolution {
    pub polygon: Polygon,
    pub mesh: BoundaryMesh,
    pub wave: WaveParams,
    /// u on each panel.
    pub trace: Vec<Complex64>,
    /// ∂νu on each panel.
    pub flux: Vec<Complex64>,
    /// ‖Ax − b‖/‖b‖ of the discrete system.
    pub residual: f64,
    /// Estimate of the 1-norm condition number of the system matrix.
    pub condition: f64,
    pub warnings: Vec<String>,
}

/// Assemble and solve the boundary integral equation on `poly`.
pub fn assemble_solve(poly: &Polygon, wave: &WaveParams, params: &MeshParams) -> Result<ScatteringSolution> {
    if params.diagnostics {
        if !wave.lambda.is_finite() {
            return Err(Error::InvalidParameter("impedance must be finite".into()));
        }
    } else if wave.lambda.im != 0.0 || wave.lambda.re < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "the forward solver needs a real impedance λ ≥ 0 (got {}); complex values need diagnostics mode",
            wave.lambda
        )));
    }
    let mesh = BoundaryMesh::new(poly, wave.lambda, params)?;
    if !params.diagnostics
        && mesh.panels.iter().any(|p| matches!(p.bc, PanelBc::Robin(l) if l.im != 0.0 || l.re < 0.0))
    {
        return Err(Error::InvalidParameter(
            "edge impedances must be real and non-negative outside diagnostics mode".into(),
        ));
    }
    let k = wave.k;
    let n = mesh.len();
    let panels = &mesh.panels;
    let rows: Vec<Vec<Complex64>> = panels
        .par_iter()
        .enumerate()
        .map(|(i, pi)| {
            let x = pi.midpoint;
            (0..n)
                .map(|j| {
                    let pj = &panels[j];
                    let (s, dl) = if i == j {
                        (self_single_layer(pj, k), Complex64::new(0.0, 0.0))
                    } else {
                        panel_integrals(&x, pj, k)
                    };
                    let mut a = match pj.bc {
                        PanelBc::Robin(lambda) => -dl - I * lambda * s,
                        PanelBc::Dirichlet => s,
                    };
                    if i == j && matches!(pi.bc, PanelBc::Robin(_)) {
                        a += 0.5;
                    }
                    a
                })
                .collect()
        })
        .collect();
    let a = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let b = DVector::from_iterator(n, panels.iter().map(|p| incident(wave, &p.midpoint)));
    let a_norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let lu = a.clone().lu();
    let x = lu.solve(&b).ok_or(Error::Singular(f64::INFINITY))?;
    let condition = a_norm1 * inverse_norm1_estimate(&lu, n);
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(Error::Singular(condition));
    }
    let mut warnings = Vec::new();
    if condition > CONDITION_WARNING {
        warnings.push(format!(
            "condition estimate {condition:.3e}: k may be close to an interior resonance"
        ));
    }
    let residual = (&a * &x - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    let (trace, flux) = panels
        .iter()
        .zip(x.iter())
        .map(|(p, v)| match p.bc {
            PanelBc::Robin(lambda) => (*v, -I * lambda * v),
            PanelBc::Dirichlet => (Complex64::new(0.0, 0.0), *v),
        })
        .unzip();
    Ok(ScatteringSolution {
        polygon: poly.clone(),
        mesh,
        wave: *wave,
        trace,
        flux,
        residual,
        condition,
        warnings,
    })
}

/// Incident plane wave e^{ikx·d}.
pub fn incident(wave: &WaveParams, x: &Point) -> Complex64 {
    (I * wave.k * x.dot(&wave.direction)).exp()
}

impl ScatteringSolution {
    fn check_exterior(&self, x: &Point) -> Result<()> {
        if self.polygon.classify(x) != Containment::Outside {
            return Err(Error::OutsideDomain(format!(
                "({}, {}) is not in the exterior of the obstacle",
                x.x, x.y
            )));
        }
        Ok(())
    }

    /// Whether `x` is closer to the boundary than the nearest panel's length,
    /// where the piecewise-constant representation loses accuracy.
    pub fn near_boundary(&self, x: &Point) -> bool {
        self.mesh.panels.iter().any(|p| {
            let t = p.tangent();
            let s = (x - p.a).dot(&t).clamp(0.0, p.length);
            (x - p.point_at(s)).norm() < p.length
        })
    }

    /// Scattered field u − u^in at an exterior point.
    pub fn scattered_field(&self, x: &Point) -> Result<Complex64> {
        self.check_exterior(x)?;
        let k = self.wave.k;
        Ok(self
            .mesh
            .panels
            .iter()
            .zip(self.trace.iter().zip(&self.flux))
            .map(|(p, (u, q))| {
                let (s, dl) = panel_integrals(x, p, k);
                u * dl - q * s
            })
            .sum())
    }

    /// Total field u = u^in + u^sc at an exterior point.
    pub fn evaluate_field(&self, x: &Point) -> Result<Complex64> {
        Ok(incident(&self.wave, x) + self.scattered_field(x)?)
    }

    /// Scattered field and its gradient at an exterior point.
    pub fn scattered_with_gradient(&self, x: &Point) -> Result<(Complex64, [Complex64; 2])> {
        self.check_exterior(x)?;
        let k = self.wave.k;
        let zero = Complex64::new(0.0, 0.0);
        let mut acc = [zero; 3];
        for (p, (u, q)) in self.mesh.panels.iter().zip(self.trace.iter().zip(&self.flux)) {
            for (y, w) in panel_nodes(x, p) {
                let kv = kernel_with_gradient(x, &y, &p.normal, k);
                acc[0] += (u * kv[1] - q * kv[0]) * w;
                acc[1] += (u * kv[4] - q * kv[2]) * w;
                acc[2] += (u * kv[5] - q * kv[3]) * w;
            }
        }
        Ok((acc[0], [acc[1], acc[2]]))
    }

    /// Total field and its gradient.
    pub fn field_with_gradient(&self, x: &Point) -> Result<(Complex64, [Complex64; 2])> {
        let (v, g) = self.scattered_with_gradient(x)?;
        let ui = incident(&self.wave, x);
        let ik = I * self.wave.k;
        Ok((
            v + ui,
            [g[0] + ik * self.wave.direction.x * ui, g[1] + ik * self.wave.direction.y * ui],
        ))
    }

    /// Far-field amplitude in the direction `xhat` (unit vector):
    /// u∞(x̂) = e^{iπ/4}/√(8πk) ∫ [(−ik x̂·ν)u − ∂νu] e^{−ikx̂·y} ds(y),
    /// with the exponential integrated exactly over each panel.
    pub fn far_field_at(&self, xhat: &Point) -> Complex64 {
        let k = self.wave.k;
        let c = Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), FRAC_PI_4);
        let sum: Complex64 = self
            .mesh
            .panels
            .iter()
            .zip(self.trace.iter().zip(&self.flux))
            .map(|(p, (u, q))| {
                let arg = 0.5 * k * xhat.dot(&p.tangent()) * p.length;
                let sinc = if arg.abs() < 1e-8 { 1.0 - arg * arg / 6.0 } else { arg.sin() / arg };
                let phase = (-I * k * xhat.dot(&p.midpoint)).exp() * (p.length * sinc);
                (-I * k * xhat.dot(&p.normal) * u - q) * phase
            })
            .sum();
        c * sum
    }

    /// u∞ at `m` uniform angles θᵢ = 2πi/m.
    pub fn far_field(&self, m: usize) -> Result<FarFieldPattern> {
        FarFieldPattern::sample(m, |th| self.far_field_at(&Point::new(th.cos(), th.sin())))
    }

    /// Trace interpolated linearly between the midpoints of
    /// neighbouring panels on the same edge, at arclength `s` on panel `j`.
    fn interpolated(&self, j: usize, s: f64) -> Complex64 {
        let panels = &self.mesh.panels;
        let p = &panels[j];
        let half = p.length / 2.0;
        let other = if s < half { j.checked_sub(1) } else { Some(j + 1) }
            .filter(|&i| i < panels.len() && panels[i].edge == p.edge);
        let Some(i) = other else {
            return self.trace[j];
        };
        // Signed distance between the two midpoints along the edge.
        let gap = if i < j { -(half + panels[i].length / 2.0) } else { half + panels[i].length / 2.0 };
        let w = (s - half) / gap;
        self.trace[j] * (1.0 - w) + self.trace[i] * w
    }

    /// Residual of the boundary integral equation at the quarter points of
    /// every panel (away from the collocation points), with the linearly
    /// interpolated trace, relative to max |u| on the boundary. The boundary
    /// condition is built into the unknowns, so this measures how well the
    /// discrete trace satisfies the boundary problem between collocation
    /// points.
    pub fn boundary_residual(&self) -> f64 {
        let k = self.wave.k;
        let panels = &self.mesh.panels;
        let umax = self.trace.iter().map(|v| v.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let worst = panels
            .par_iter()
            .enumerate()
            .flat_map_iter(|(j, p)| [0.25, 0.75].map(|f| (j, p, f * p.length)))
            .map(|(j, p, s0)| {
                let y = p.point_at(s0);
                let u_y = self.interpolated(j, s0);
                let mut lhs = match p.bc {
                    PanelBc::Robin(_) => 0.5 * u_y,
                    PanelBc::Dirichlet => Complex64::new(0.0, 0.0),
                };
                for (i, pi) in panels.iter().enumerate() {
                    let (s, dl) = if i == j {
                        (single_layer_on_panel(pi, s0, k), Complex64::new(0.0, 0.0))
                    } else {
                        panel_integrals(&y, pi, k)
                    };
                    lhs += -self.trace[i] * dl + self.flux[i] * s;
                }
                (lhs - incident(&self.wave, &y)).norm()
            })
            .reduce(|| 0.0, f64::max);
        worst / umax
    }
}
