//! Boundary discretization: straight panels graded toward every vertex.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{EdgeBc, Point, Polygon};

/// Boundary condition of one panel after resolving the default impedance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PanelBc {
    /// ∂νu + iλu = 0; λ = 0 is the Neumann condition.
    Robin(Complex64),
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub a: Point,
    pub b: Point,
    pub midpoint: Point,
    pub length: f64,
    /// Outward unit normal.
    pub normal: Point,
    pub edge: usize,
    pub bc: PanelBc,
}

impl Panel {
    pub fn point_at(&self, s: f64) -> Point {
        self.a + (self.b - self.a) * (s / self.length)
    }

    pub fn tangent(&self) -> Point {
        (self.b - self.a) / self.length
    }
}

/// Discretization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshParams {
    /// Total number of panels, distributed over the edges in proportion to
    /// their length.
    pub panels: usize,
    /// Grading exponent toward the vertices.
    pub grading: f64,
    /// Minimum number of panels per edge.
    pub min_per_edge: usize,
    /// Accept complex impedances (no well-posedness claim).
    pub diagnostics: bool,
}

impl MeshParams {
    pub fn with_panels(panels: usize) -> Self {
        Self {
            panels,
            ..Self::default()
        }
    }
}

impl Default for MeshParams {
    fn default() -> Self {
        Self {
            panels: 256,
            grading: 3.0,
            min_per_edge: 4,
            diagnostics: false,
        }
    }
}

/// Graded map of [0, 1] onto itself, symmetric about 1/2, with
/// g(t) ~ t^p at both ends.
fn grade(t: f64, p: f64) -> f64 {
    if t <= 0.5 {
        0.5 * (2.0 * t).powf(p)
    } else {
        1.0 - 0.5 * (2.0 * (1.0 - t)).powf(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub panels: Vec<Panel>,
    pub grading: f64,
}

impl BoundaryMesh {
    pub fn new(poly: &Polygon, lambda: Complex64, params: &MeshParams) -> Result<Self> {
        if !(params.grading >= 1.0) {
            return Err(Error::InvalidParameter("grading exponent must be at least 1".into()));
        }
        let per = params.min_per_edge.max(1);
        let perimeter = poly.perimeter();
        let mut panels = Vec::new();
        for i in 0..poly.len() {
            let e = poly.edge(i);
            let m = ((params.panels as f64 * e.length() / perimeter).round() as usize).max(per);
            let bc = match poly.edge_bc(i) {
                EdgeBc::Impedance => PanelBc::Robin(lambda),
                EdgeBc::Robin { lambda } => PanelBc::Robin(lambda),
                EdgeBc::Neumann => PanelBc::Robin(Complex64::new(0.0, 0.0)),
                EdgeBc::Dirichlet => PanelBc::Dirichlet,
            };
            let normal = poly.edge_normal(i);
            let nodes: Vec<Point> = (0..=m)
                .map(|j| e.point_at(grade(j as f64 / m as f64, params.grading)))
                .collect();
            for w in nodes.windows(2) {
                let length = (w[1] - w[0]).norm();
                panels.push(Panel {
                    a: w[0],
                    b: w[1],
                    midpoint: (w[0] + w[1]) / 2.0,
                    length,
                    normal,
                    edge: i,
                    bc,
                });
            }
        }
        Ok(Self {
            panels,
            grading: params.grading,
        })
    }

    pub fn len(&self) -> usize {
        self.panels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.panels.is_empty()
    }

    pub fn max_length(&self) -> f64 {
        self.panels.iter().map(|p| p.length).fold(0.0, f64::max)
    }

    pub fn min_length(&self) -> f64 {
        self.panels.iter().map(|p| p.length).fold(f64::INFINITY, f64::min)
    }
}
