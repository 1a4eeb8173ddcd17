//! Forward impedance scattering by a polygon: boundary integral solver,
//! far-field pattern, the impedance-disk series oracle and the two-obstacle
//! far-field comparison.

pub mod mesh;
pub mod mie;
pub mod solver;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::kernels::WaveParams;

pub use mesh::{BoundaryMesh, MeshParams, Panel, PanelBc};
pub use mie::{mie_coefficient, mie_coefficients, mie_disk_oracle};
pub use solver::{assemble_solve, incident, ScatteringSolution};

/// Smallest number of far-field samples accepted.
pub const MIN_FAR_FIELD_SAMPLES: usize = 64;

/// u∞ at uniform angles θᵢ = 2πi/M.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldPattern {
    pub angles: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl FarFieldPattern {
    pub fn sample(m: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        if m < MIN_FAR_FIELD_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "far field needs at least {MIN_FAR_FIELD_SAMPLES} samples, got {m}"
            )));
        }
        let angles: Vec<f64> = (0..m).map(|i| 2.0 * PI * i as f64 / m as f64).collect();
        let values = angles.iter().map(|&t| f(t)).collect();
        Ok(Self { angles, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// L²(S¹) norm by the trapezoidal rule.
    pub fn l2_norm(&self) -> f64 {
        let w = 2.0 * PI / self.len() as f64;
        (w * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// ‖self − other‖ in L²(S¹).
    pub fn l2_distance(&self, other: &FarFieldPattern) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::InvalidParameter("far fields sampled at different angles".into()));
        }
        let w = 2.0 * PI / self.len() as f64;
        Ok((w * self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>())
        .sqrt())
    }

    /// ‖self − reference‖ / ‖reference‖.
    pub fn relative_error(&self, reference: &FarFieldPattern) -> Result<f64> {
        Ok(self.l2_distance(reference)? / reference.l2_norm())
    }
}

/// Options for [`uniqueness_experiment`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions {
    /// Panels on the coarsest of three meshes; each further mesh doubles it.
    pub base_panels: usize,
    pub grading: f64,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            base_panels: 96,
            grading: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of comparing the far fields of two obstacles.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessReport {
    /// ‖u₁∞ − u₂∞‖ in L²(S¹) on the finest meshes.
    pub farfield_gap: f64,
    /// Sum of the two per-obstacle self-convergence estimates.
    pub mesh_error_estimate: f64,
    pub per_obstacle_error: [f64; 2],
    /// Observed convergence orders used in the estimates.
    pub observed_order: [f64; 2],
    /// Same vertices (up to cyclic shift) and the same boundary conditions.
    pub identical: bool,
    pub verdict: Verdict,
}

/// Far field on the finest of three nested meshes with a Richardson-style
/// estimate of its error: with differences e₁ = ‖u₂ − u₁‖, e₂ = ‖u₃ − u₂‖
/// the observed order is p = log₂(e₁/e₂) (clamped to [0.5, 4]) and the
/// estimate is e₂/(2ᵖ − 1).
pub fn self_convergence(
    poly: &Polygon,
    wave: &WaveParams,
    m: usize,
    opts: &ExperimentOptions,
) -> Result<(FarFieldPattern, f64, f64)> {
    let mut fields = Vec::new();
    for level in 0..3 {
        let params = MeshParams {
            panels: opts.base_panels << level,
            grading: opts.grading,
            ..MeshParams::default()
        };
        fields.push(assemble_solve(poly, wave, &params)?.far_field(m)?);
    }
    let e1 = fields[1].l2_distance(&fields[0])?;
    let e2 = fields[2].l2_distance(&fields[1])?;
    let p = if e2 > 0.0 && e1 > 0.0 { (e1 / e2).log2().clamp(0.5, 4.0) } else { 1.0 };
    let est = e2 / (2f64.powf(p) - 1.0);
    Ok((fields.pop().unwrap(), est, p))
}

fn same_obstacle(a: &Polygon, b: &Polygon) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    let tol = 1e-12 * a.diameter().max(1.0);
    (0..n).any(|s| {
        (0..n).all(|i| {
            (a.vertex(i) - b.vertex((i + s) % n)).norm() <= tol && a.edge_bc(i) == b.edge_bc((i + s) % n)
        })
    })
}

/// Compare the far fields of two obstacles illuminated by the same wave.
///
/// Identical obstacles pass when the gap is at most three times the mesh
/// error estimate (and fail otherwise); distinct obstacles pass when it is at
/// least ten times the estimate and are inconclusive otherwise.
pub fn uniqueness_experiment(
    d1: &Polygon,
    d2: &Polygon,
    wave: &WaveParams,
    m: usize,
    opts: &ExperimentOptions,
) -> Result<UniquenessReport> {
    let (f1, e1, p1) = self_convergence(d1, wave, m, opts)?;
    let (f2, e2, p2) = self_convergence(d2, wave, m, opts)?;
    let identical = same_obstacle(d1, d2);
    let gap = f1.l2_distance(&f2)?;
    let est = e1 + e2;
    let verdict = match (identical, gap <= 3.0 * est, gap >= 10.0 * est) {
        (true, true, _) => Verdict::Pass,
        (true, false, _) => Verdict::Fail,
        (false, _, true) => Verdict::Pass,
        (false, _, false) => Verdict::Inconclusive,
    };
    Ok(UniquenessReport {
        farfield_gap: gap,
        mesh_error_estimate: est,
        per_obstacle_error: [e1, e2],
        observed_order: [p1, p2],
        identical,
        verdict,
    })
}
