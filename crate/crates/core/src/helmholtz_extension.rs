//! Reflection of Helmholtz solutions across Robin lines and through sectors.
//!
//! In the canonical frame (line {x₂ = 0}, field known above it) the extension
//! operator is
//!
//! (Du)(x) = D̃u(x) − k² ∫_K [D̃ₓG₀(x;y) − G₀(x₁,−x₂;y)] u(y) dy,
//!
//! where D̃ is the harmonic reflection along a path χ ⊂ K from the line to x,
//! G₀ is the Robin Green's function of the half-plane continued below the
//! line, and K is any connected subdomain of the field's domain containing
//! χ and the perpendicular from x to the line. The value is u(x₁, −x₂).

use num_complex::Complex64;
use std::cell::RefCell;

use crate::error::{Error, Result};
use crate::field::{FieldOracle, FieldSample, FnField};
use crate::geometry::{
    cross, pt, winding_number, Containment, Line, PathCurve, Point, Polygon, Sector, Segment,
};
use crate::harmonic_reflection::{
    dtilde_apply_vertical_with, dtilde_apply_with, Impedance, ReflectionOptions, RobinLineBC,
};
use crate::kernels::{g0_continued, WaveParams};
use crate::quadrature::{integrate_triangles, AdaptiveOptions, CubatureOptions};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// How the area term is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AreaMode {
    /// Evaluate the bracket D̃ₓG₀(x;y) − G₀(x₁,−x₂;y) numerically at every
    /// cubature node of K.
    Direct,
    /// Use the closed form of the bracket: it vanishes outside the loop
    /// formed by χ, the perpendicular from x and the line, and equals
    /// 2i·wind(y)·e^{iλ(x₂−y₂)} sinh(λ(y₁−x₁)) inside.
    Residue,
}

/// Quadrature settings for [`dk_apply`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtensionQuadrature {
    pub cubature: CubatureOptions,
    pub mode: AreaMode,
    /// Path integral of D̃u.
    pub path: ReflectionOptions,
    /// Path integral of D̃ₓG₀ inside the area term.
    pub kernel: AdaptiveOptions,
}

impl Default for ExtensionQuadrature {
    fn default() -> Self {
        Self {
            cubature: CubatureOptions::default(),
            mode: AreaMode::Direct,
            path: ReflectionOptions::default(),
            kernel: AdaptiveOptions {
                order: 16,
                tol: 1e-9,
                max_points: 1 << 12,
            },
        }
    }
}

/// Domain Ω⁺ on which the field is known, in canonical position, with an
/// optional smaller integration domain K.
#[derive(Debug, Clone)]
pub struct ExtensionRegion {
    omega_plus: Polygon,
    subdomain: Option<Polygon>,
    pub quad: ExtensionQuadrature,
}

fn touches_axis(p: &Polygon) -> bool {
    p.edges()
        .any(|e| e.a().y.abs() <= 1e-12 && e.b().y.abs() <= 1e-12)
}

impl ExtensionRegion {
    /// Ω⁺ must lie in the closed upper half-plane and have an edge on the line.
    pub fn new(omega_plus: Polygon) -> Result<Self> {
        if omega_plus.vertices().iter().any(|v| v.y < -1e-12) {
            return Err(Error::InvalidGeometry("Ω⁺ extends below the reflection line".into()));
        }
        if !touches_axis(&omega_plus) {
            return Err(Error::InvalidGeometry("Ω⁺ has no edge on the reflection line".into()));
        }
        Ok(Self {
            omega_plus,
            subdomain: None,
            quad: ExtensionQuadrature::default(),
        })
    }

    /// Restrict the area integrals to K ⊆ Ω⁺, which must touch the line.
    pub fn with_subdomain(mut self, k: Polygon) -> Result<Self> {
        let outside = k
            .vertices()
            .iter()
            .any(|v| self.omega_plus.classify(v) == Containment::Outside)
            || self
                .omega_plus
                .vertices()
                .iter()
                .any(|v| k.classify(v) == Containment::Inside);
        if outside {
            return Err(Error::InvalidGeometry("K is not contained in Ω⁺".into()));
        }
        if !touches_axis(&k) {
            return Err(Error::InvalidGeometry("K has no edge on the reflection line".into()));
        }
        self.subdomain = Some(k);
        Ok(self)
    }

    pub fn with_quadrature(mut self, quad: ExtensionQuadrature) -> Self {
        self.quad = quad;
        self
    }

    pub fn omega_plus(&self) -> &Polygon {
        &self.omega_plus
    }

    /// The integration domain K.
    pub fn domain(&self) -> &Polygon {
        self.subdomain.as_ref().unwrap_or(&self.omega_plus)
    }
}

/// Split a convex polygon by a line into the parts on either side.
fn split_convex(poly: &[Point], a: &Point, d: &Point) -> (Vec<Point>, Vec<Point>) {
    let side = |p: &Point| cross(d, &(p - a));
    let (mut left, mut right) = (Vec::new(), Vec::new());
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (sp, sq) = (side(&p), side(&q));
        if sp >= 0.0 {
            left.push(p);
        }
        if sp <= 0.0 {
            right.push(p);
        }
        if (sp > 0.0 && sq < 0.0) || (sp < 0.0 && sq > 0.0) {
            let x = p + (q - p) * (sp / (sp - sq));
            left.push(x);
            right.push(x);
        }
    }
    (left, right)
}

fn convex_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| cross(&poly[i], &poly[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

/// Decompose K into triangles none of which is crossed by the lines through
/// the legs of `cuts`, tagged with the winding number of `loop_pts` around
/// them.
fn cut_triangles(k: &Polygon, cuts: &[Segment], loop_pts: &[Point]) -> Vec<([Point; 3], i32)> {
    let v = k.vertices();
    let mut pieces: Vec<Vec<Point>> = k
        .triangulate()
        .iter()
        .map(|t| vec![v[t[0]], v[t[1]], v[t[2]]])
        .collect();
    let scale = k.diameter().powi(2);
    for c in cuts {
        let (a, d) = (c.a(), c.direction());
        let mut next = Vec::with_capacity(pieces.len() * 2);
        for p in pieces {
            let (l, r) = split_convex(&p, &a, &d);
            for q in [l, r] {
                if q.len() >= 3 && convex_area(&q).abs() > 1e-14 * scale {
                    next.push(q);
                }
            }
        }
        pieces = next;
    }
    let mut out = Vec::new();
    for p in pieces {
        let centroid = p.iter().fold(pt(0.0, 0.0), |s, q| s + q) / p.len() as f64;
        let w = winding_number(loop_pts, &centroid);
        for i in 1..p.len() - 1 {
            let tri = [p[0], p[i], p[i + 1]];
            if cross(&(tri[1] - tri[0]), &(tri[2] - tri[0])).abs() > 1e-14 * scale {
                out.push((tri, w));
            }
        }
    }
    out
}

fn check_inside(k: &Polygon, seg: &Segment, what: &str) -> Result<()> {
    for i in 0..=16 {
        let p = seg.point_at(i as f64 / 16.0);
        if k.classify(&p) == Containment::Outside {
            return Err(Error::PathNotAdmissible(format!(
                "{what} leaves the integration domain at ({}, {})",
                p.x, p.y
            )));
        }
    }
    Ok(())
}

/// The closed-form value of D̃ₓG₀(x;y) − G₀(x₁,−x₂;y) for y inside the loop
/// with winding number `wind`.
fn residue_bracket(x: &Point, y: &Point, lambda: Complex64, wind: i32) -> Complex64 {
    2.0 * I * wind as f64 * (I * lambda * (x.y - y.y)).exp() * (lambda * (y.x - x.x)).sinh()
}

/// D̃ₓG₀(x;y) along `path` minus G₀ continued to (x₁, −x₂).
fn direct_bracket(
    x: &Point,
    y: &Point,
    path: &PathCurve,
    bc: &RobinLineBC,
    opts: &ReflectionOptions,
) -> Result<Complex64> {
    let lambda = bc.constant_lambda().unwrap_or_default();
    let y0 = *y;
    let g = FnField::new(move |p| {
        let e = g0_continued(p, &y0, lambda)?;
        Ok(FieldSample::new(e.value, e.gradient))
    })
    .with_singular_points(vec![y0]);
    let along = dtilde_apply_with(&g, path, bc, x, opts)?;
    let below = g0_continued(&pt(x.x, -x.y), y, lambda)?.value;
    Ok(along - below)
}

/// Helmholtz extension D at x ∈ Ω⁺ along `path`; returns u(x₁, −x₂).
/// Canonical coordinates: the Robin line is {x₂ = 0} with
/// ∂₂u + iλu = 0, λ = `wave.lambda`.
pub fn dk_apply(
    u: &dyn FieldOracle,
    region: &ExtensionRegion,
    path: &PathCurve,
    wave: &WaveParams,
    x: &Point,
) -> Result<Complex64> {
    let lambda = wave.lambda;
    if !(x.y > 0.0) || region.omega_plus.classify(x) == Containment::Outside {
        return Err(Error::OutsideDomain(format!("({}, {}) is not in Ω⁺", x.x, x.y)));
    }
    if lambda == Complex64::new(0.0, 0.0) {
        return Ok(u.eval(x)?.value);
    }
    let k_dom = region.domain();
    for leg in path.legs() {
        check_inside(k_dom, &leg, "path")?;
    }
    let foot = pt(x.x, 0.0);
    let perpendicular = Segment::new(foot, *x)?;
    check_inside(k_dom, &perpendicular, "perpendicular from x")?;

    let bc = RobinLineBC::canonical(lambda);
    let q = &region.quad;
    let along = dtilde_apply_with(u, path, &bc, x, &q.path)?;

    let mut cuts: Vec<Segment> = path.legs().collect();
    cuts.push(perpendicular);
    let mut loop_pts = path.waypoints().to_vec();
    loop_pts.push(foot);
    let tris: Vec<([Point; 3], i32)> = cut_triangles(k_dom, &cuts, &loop_pts)
        .into_iter()
        .filter(|(_, w)| q.mode == AreaMode::Direct || *w != 0)
        .collect();

    let kernel_opts = ReflectionOptions {
        quad: q.kernel,
        corrupt_kernel_sign: q.path.corrupt_kernel_sign,
    };
    let tube = 0.05 * k_dom.diameter();
    let near = |t: &[Point; 3]| {
        let c = (t[0] + t[1] + t[2]) / 3.0;
        let r = t.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
        path.distance(&c).min(perpendicular.distance(&c)) <= tube + r
    };
    let err = RefCell::new(None);
    let mut area = Complex64::new(0.0, 0.0);
    for (tri, wind) in &tris {
        let f = |y: &Point| -> Complex64 {
            let r = (|| -> Result<Complex64> {
                let b = match q.mode {
                    AreaMode::Direct => direct_bracket(x, y, path, &bc, &kernel_opts)?,
                    AreaMode::Residue => residue_bracket(x, y, lambda, *wind),
                };
                Ok(b * u.eval(y)?.value)
            })();
            r.unwrap_or_else(|e| {
                err.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            })
        };
        area += integrate_triangles(&f, std::slice::from_ref(tri), &near, &q.cubature);
    }
    if let Some(e) = err.into_inner() {
        return Err(e);
    }
    Ok(along - wave.k * wave.k * area)
}

/// Extension of u across the line through `l`, from the side U opposite
/// the gap polygon.
///
/// u solves the Helmholtz equation in gap ∪ l ∪ U with ∂ᵥu + iλu = 0 on l, ν
/// the outward normal of the gap. The result v satisfies v = u∘R_L on
/// R_L(gap), and on U it is the Helmholtz extension D of u evaluated at x,
/// computed along the perpendicular from the line to x (which must stay
/// where u is valid).
pub fn extend_across_segment(
    u: &dyn FieldOracle,
    gap: &Polygon,
    l: &Segment,
    wave: &WaveParams,
    x: &Point,
) -> Result<Complex64> {
    let line = l.line();
    let gap_side = line.signed_distance(&gap.centroid());
    if gap_side.abs() <= 1e-12 {
        return Err(Error::InvalidGeometry("gap centroid lies on the reflection line".into()));
    }
    let rx = line.reflect(x);
    let mirrored = || -> Result<Complex64> {
        if !u.contains(&rx) {
            return Err(Error::OutsideDomain(format!("({}, {})", rx.x, rx.y)));
        }
        Ok(u.eval(&rx)?.value)
    };
    if wave.lambda == Complex64::new(0.0, 0.0) {
        return mirrored();
    }
    if gap.reflect(&line).classify(x) != Containment::Outside {
        return mirrored();
    }
    let sx = line.signed_distance(x);
    if sx.abs() <= 1e-14 {
        return Ok(u.eval(x)?.value);
    }
    if sx * gap_side > 0.0 {
        return Err(Error::OutsideDomain(format!(
            "({}, {}) is on the gap side but not in the reflected gap",
            x.x, x.y
        )));
    }
    let known = line.reflect(&gap.centroid());
    let bc = RobinLineBC::new(line, &known, Impedance::Constant(wave.lambda))?;
    let quad = AdaptiveOptions::default();
    let perpendicular = |p: &Point| -> Result<Complex64> {
        let foot = line.foot(p);
        for i in 0..=16 {
            let q = foot + (p - foot) * (i as f64 / 16.0);
            if i > 0 && !u.contains(&q) {
                return Err(Error::PathNotAdmissible(format!(
                    "perpendicular from ({}, {}) leaves the field's domain",
                    p.x, p.y
                )));
            }
        }
        dtilde_apply_vertical_with(u, &bc, p, &quad)
    };
    // Near l the extension must agree with the mirror image of u in the gap.
    let n = (known - line.foot(&known)).normalize();
    let probe = l.midpoint() + n * (1e-2 * l.length());
    let expect = u.eval(&line.reflect(&probe))?.value;
    let got = perpendicular(&probe)?;
    if (got - expect).norm() > 1e-6 * (1.0 + expect.norm()) {
        return Err(Error::Unstable(format!(
            "extension disagrees with the mirror image near l by {:.3e}; \
             the Robin condition on l does not hold",
            (got - expect).norm()
        )));
    }
    perpendicular(x)
}

/// Boundary condition on one half-line of a sector; normals point into Σ₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineCondition {
    /// ∂ᵥu + iηu = 0.
    Robin(Complex64),
    Dirichlet,
    Neumann,
}

/// Field known on a neighbourhood of Σ₀ with conditions on L₀ and L₁.
pub struct SectorProblem<F> {
    pub sector: Sector,
    pub conditions: [LineCondition; 2],
    pub field: F,
}

/// Default cap on the reflection depth.
pub const DEFAULT_MAX_REFLECTIONS: usize = 16;

/// Ratio between an extended value and the data it came from beyond which
/// the composition is reported as unstable.
const GROWTH_LIMIT: f64 = 1e8;

impl<F: FieldOracle> SectorProblem<F> {
    pub fn new(sector: Sector, conditions: [LineCondition; 2], field: F) -> Self {
        Self {
            sector,
            conditions,
            field,
        }
    }

    /// Largest boundary residual at sample points r ∈ {0.25, 0.5, 1, 2} on
    /// both half-lines, relative to |u| + |∇u|.
    pub fn boundary_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (j, cond) in self.conditions.iter().enumerate() {
            let d = self.sector.half_line_direction(j as i64);
            // Normal into Σ₀: rotate toward the interior.
            let n = if j == 0 { pt(-d.y, d.x) } else { pt(d.y, -d.x) };
            for r in [0.25, 0.5, 1.0, 2.0] {
                let p = self.sector.apex() + d * r;
                let (v, g) = crate::field::sample_with_gradient(&self.field, &p)?;
                let dn = g[0] * n.x + g[1] * n.y;
                let res = match cond {
                    LineCondition::Robin(eta) => dn + I * eta * v,
                    LineCondition::Dirichlet => v,
                    LineCondition::Neumann => dn,
                };
                worst = worst.max(res.norm() / (1.0 + v.norm() + dn.norm()));
            }
        }
        Ok(worst)
    }

    fn value(&self, x: &Point, depth_left: usize, quad: &AdaptiveOptions) -> Result<Complex64> {
        let j = self.sector.sector_index(x)?;
        if j == 0 {
            return Ok(self.field.eval(x)?.value);
        }
        if depth_left == 0 {
            return Err(Error::BudgetExceeded(j.unsigned_abs() as usize));
        }
        // Reflect across L₁ for j > 0 and across L₀ for j < 0: u = D[G] with
        // G = u∘R, whose values come from copies one step closer to Σ₀.
        let (m, cond) = if j > 0 { (1, self.conditions[1]) } else { (0, self.conditions[0]) };
        let line = self.sector.half_line(m);
        let mirror = Mirror {
            prob: self,
            line,
            depth_left: depth_left - 1,
            quad: *quad,
        };
        match cond {
            LineCondition::Dirichlet => Ok(-mirror.value(x)?),
            LineCondition::Neumann => mirror.value(x),
            LineCondition::Robin(eta) => {
                if eta == Complex64::new(0.0, 0.0) {
                    return mirror.value(x);
                }
                let dir = self.sector.half_line_direction(m);
                let foot_s = (x - self.sector.apex()).dot(&dir);
                if foot_s <= 0.0 {
                    return Err(Error::PathNotAdmissible(format!(
                        "perpendicular from ({}, {}) misses the half-line L{}",
                        x.x, x.y, m
                    )));
                }
                // Known side of G: the copy adjacent across the half-line.
                let inner = self.sector.apex() + self.sector.half_line_direction(m) * 1.0;
                let side_dir = if j > 0 {
                    self.sector.half_line_direction(2)
                } else {
                    self.sector.half_line_direction(-1)
                };
                let known = inner + side_dir * 1e-3 + (side_dir - dir) * 0.5;
                let bc = RobinLineBC::new(line, &known, Impedance::Constant(eta))?;
                let v = dtilde_apply_vertical_with(&mirror, &bc, x, quad)?;
                let base = mirror.value(x)?.norm();
                if !v.is_finite() || v.norm() > GROWTH_LIMIT * base.max(1e-300) {
                    return Err(Error::Unstable(format!(
                        "extended value {:.3e} grew from data of size {:.3e}",
                        v.norm(),
                        base
                    )));
                }
                Ok(v)
            }
        }
    }
}

/// G = u∘R across one half-line, evaluated through the sector extension.
struct Mirror<'a, F> {
    prob: &'a SectorProblem<F>,
    line: Line,
    depth_left: usize,
    quad: AdaptiveOptions,
}

impl<F: FieldOracle> Mirror<'_, F> {
    fn value(&self, p: &Point) -> Result<Complex64> {
        self.prob.value(&self.line.reflect(p), self.depth_left, &self.quad)
    }
}

impl<F: FieldOracle> FieldOracle for Mirror<'_, F> {
    fn eval(&self, p: &Point) -> Result<FieldSample> {
        Ok(FieldSample::value_only(self.value(p)?))
    }
}

/// Value at x of the continuation of the sector field, obtained by
/// composing reflections across the bounding half-lines and their images.
///
/// Dirichlet and Neumann half-lines reflect oddly and evenly to any depth.
/// Robin half-lines use the perpendicular form of the extension, which needs
/// the foot of x to lie on the half-line; otherwise the point is reported as
/// not admissible.
pub fn sector_extend<F: FieldOracle>(
    prob: &SectorProblem<F>,
    x: &Point,
    max_reflections: usize,
) -> Result<Complex64> {
    sector_extend_with(prob, x, max_reflections, &AdaptiveOptions::default())
}

pub fn sector_extend_with<F: FieldOracle>(
    prob: &SectorProblem<F>,
    x: &Point,
    max_reflections: usize,
    quad: &AdaptiveOptions,
) -> Result<Complex64> {
    let j = prob.sector.sector_index(x)?;
    if j.unsigned_abs() as usize > max_reflections {
        return Err(Error::BudgetExceeded(max_reflections));
    }
    prob.value(x, max_reflections, quad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::ExpSum;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Plane wave with ∂₂u + iλu = 0 on {x₂ = 0}: k d₂ = −λ.
    fn robin_plane_wave(k: f64, lambda: f64) -> (ExpSum, WaveParams) {
        let d2 = -lambda / k;
        let d = pt((1.0 - d2 * d2).sqrt(), d2);
        (ExpSum::plane_wave(k, d), WaveParams::new(k, c(lambda, 0.0), d).unwrap())
    }

    fn box_region() -> ExtensionRegion {
        ExtensionRegion::new(Polygon::rectangle(-1.0, 0.0, 1.5, 1.5).unwrap()).unwrap()
    }

    #[test]
    fn split_convex_keeps_area() {
        let sq = vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        let (l, r) = split_convex(&sq, &pt(0.2, 0.0), &pt(0.3, 1.0));
        assert!((convex_area(&l) + convex_area(&r) - 1.0).abs() < 1e-14);
        assert!(convex_area(&l) > 0.0 && convex_area(&r) > 0.0);
    }

    #[test]
    fn neumann_is_identity() {
        let (u, _) = robin_plane_wave(1.0, 0.5);
        let wave = WaveParams::new(1.0, c(0.0, 0.0), pt(1.0, 0.0)).unwrap();
        let x = pt(0.2, 0.4);
        let path = PathCurve::new(vec![pt(0.5, 0.0), pt(0.6, 0.6), x]).unwrap();
        assert_eq!(dk_apply(&u, &box_region(), &path, &wave, &x).unwrap(), u.value(&x));
    }

    #[test]
    fn plane_wave_is_reflected() {
        let (u, wave) = robin_plane_wave(1.0, 0.5);
        let x = pt(0.2, 0.4);
        let expect = u.mirrored().value(&x);
        let paths = [
            PathCurve::vertical(x).unwrap(),
            PathCurve::new(vec![pt(0.8, 0.0), pt(0.7, 0.9), x]).unwrap(),
        ];
        for mode in [AreaMode::Residue, AreaMode::Direct] {
            let mut region = box_region();
            region.quad.mode = mode;
            for path in &paths {
                let v = dk_apply(&u, &region, path, &wave, &x).unwrap();
                assert!((v - expect).norm() < 1e-6, "{mode:?}: {v} vs {expect}");
            }
        }
    }

    #[test]
    fn direct_and_residue_brackets_agree() {
        let lambda = c(0.7, 0.0);
        let bc = RobinLineBC::canonical(lambda);
        let x = pt(0.2, 0.5);
        let path = PathCurve::new(vec![pt(0.9, 0.0), pt(0.8, 0.9), x]).unwrap();
        let mut loop_pts = path.waypoints().to_vec();
        loop_pts.push(pt(x.x, 0.0));
        let opts = ReflectionOptions::default();
        for y in [pt(0.5, 0.3), pt(0.6, 0.7), pt(-0.3, 0.4), pt(0.5, 1.2), pt(0.85, 0.1)] {
            let d = direct_bracket(&x, &y, &path, &bc, &opts).unwrap();
            let r = residue_bracket(&x, &y, lambda, winding_number(&loop_pts, &y));
            assert!((d - r).norm() < 1e-8, "y={y:?}: {d} vs {r}");
        }
    }

    #[test]
    fn subdomain_invariance() {
        let (u, wave) = robin_plane_wave(1.0, 0.5);
        let x = pt(0.2, 0.4);
        let path = PathCurve::new(vec![pt(0.6, 0.0), pt(0.5, 0.6), x]).unwrap();
        let full = box_region();
        let strip = box_region()
            .with_subdomain(Polygon::rectangle(0.0, 0.0, 0.8, 0.8).unwrap())
            .unwrap();
        let a = dk_apply(&u, &full, &path, &wave, &x).unwrap();
        let b = dk_apply(&u, &strip, &path, &wave, &x).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn path_outside_subdomain_is_rejected() {
        let (u, wave) = robin_plane_wave(1.0, 0.5);
        let x = pt(0.2, 0.4);
        let path = PathCurve::new(vec![pt(1.2, 0.0), pt(1.2, 1.0), x]).unwrap();
        let strip = box_region()
            .with_subdomain(Polygon::rectangle(0.0, 0.0, 0.8, 0.8).unwrap())
            .unwrap();
        assert!(matches!(
            dk_apply(&u, &strip, &path, &wave, &x),
            Err(Error::PathNotAdmissible(_))
        ));
    }

    #[test]
    fn segment_extension_plane_wave() {
        // Gap below the segment l on the x-axis; U is the upper half-plane.
        let (u, wave) = robin_plane_wave(1.0, 0.5);
        // Robin condition ∂ᵥu + iλu = 0 with ν = (0, 1), outward from the gap.
        let gap = Polygon::new(vec![pt(0.0, 0.0), pt(1.0, -0.8), pt(2.0, 0.0)]).unwrap();
        let l = Segment::new(pt(0.0, 0.0), pt(2.0, 0.0)).unwrap();
        let line = l.line();
        for x in [pt(1.0, 0.3), pt(0.5, 0.1), pt(1.4, 1.5), pt(-2.0, 0.7)] {
            let v = extend_across_segment(&u, &gap, &l, &wave, &x).unwrap();
            let e = u.value(&line.reflect(&x));
            assert!((v - e).norm() < 1e-8, "{x:?}: {v} vs {e}");
        }
        let on = pt(0.7, 0.0);
        assert!((extend_across_segment(&u, &gap, &l, &wave, &on).unwrap() - u.value(&on)).norm() < 1e-12);
        let zero = WaveParams::new(1.0, c(0.0, 0.0), pt(1.0, 0.0)).unwrap();
        let x = pt(1.1, 0.4);
        assert_eq!(
            extend_across_segment(&u, &gap, &l, &zero, &x).unwrap(),
            u.value(&line.reflect(&x))
        );
    }

    #[test]
    fn segment_extension_detects_wrong_condition() {
        let (u, _) = robin_plane_wave(1.0, 0.5);
        let wrong = WaveParams::new(1.0, c(0.9, 0.0), pt(1.0, 0.0)).unwrap();
        let gap = Polygon::new(vec![pt(0.0, 0.0), pt(1.0, -0.8), pt(2.0, 0.0)]).unwrap();
        let l = Segment::new(pt(0.0, 0.0), pt(2.0, 0.0)).unwrap();
        assert!(matches!(
            extend_across_segment(&u, &gap, &l, &wrong, &pt(3.0, 0.5)),
            Err(Error::Unstable(_))
        ));
    }

    /// Plane wave on the quarter plane with Robin data on both axes.
    fn quarter_plane_wave(k: f64, d: Point) -> SectorProblem<ExpSum> {
        let sector = Sector::new(pt(0.0, 0.0), 0.0, PI / 2.0).unwrap();
        // Normals into Σ₀: (0, 1) on L₀, (1, 0) on L₁; η = −k d·n.
        let conds = [
            LineCondition::Robin(c(-k * d.y, 0.0)),
            LineCondition::Robin(c(-k * d.x, 0.0)),
        ];
        SectorProblem::new(sector, conds, ExpSum::plane_wave(k, d))
    }

    #[test]
    fn sector_plane_wave() {
        let d = pt(0.6, -0.8);
        let prob = quarter_plane_wave(1.0, d);
        assert!(prob.boundary_residual().unwrap() < 1e-9);
        for x in [pt(-0.5, 0.7), pt(-1.2, 0.2), pt(0.4, -0.9)] {
            let v = sector_extend(&prob, &x, DEFAULT_MAX_REFLECTIONS).unwrap();
            let e = prob.field.value(&x);
            assert!((v - e).norm() < 1e-9, "{x:?}: {v} vs {e}");
        }
        // The third quadrant needs a perpendicular that misses the half-line.
        assert!(matches!(
            sector_extend(&prob, &pt(-1.0, -0.5), DEFAULT_MAX_REFLECTIONS),
            Err(Error::PathNotAdmissible(_))
        ));
    }

    #[test]
    fn sector_depth_two_narrow() {
        // θ₀ = π/6: Σ₂ is reached through the mirror field.
        let k = 1.0;
        let th = PI / 6.0;
        let sector = Sector::new(pt(0.0, 0.0), 0.0, th).unwrap();
        let d = pt(0.3f64.cos(), -(0.3f64.sin()));
        let n0 = pt(0.0, 1.0);
        let n1 = pt(th.sin(), -th.cos());
        let conds = [
            LineCondition::Robin(c(-k * d.dot(&n0), 0.0)),
            LineCondition::Robin(c(-k * d.dot(&n1), 0.0)),
        ];
        let prob = SectorProblem::new(sector, conds, ExpSum::plane_wave(k, d));
        assert!(prob.boundary_residual().unwrap() < 1e-9);
        let x = pt(2.0 * (2.5 * th).cos(), 2.0 * (2.5 * th).sin());
        assert_eq!(sector.sector_index(&x).unwrap(), 2);
        let v = sector_extend(&prob, &x, 4).unwrap();
        assert!((v - prob.field.value(&x)).norm() < 1e-8);
        assert!(matches!(sector_extend(&prob, &x, 1), Err(Error::BudgetExceeded(1))));
    }

    #[test]
    fn neumann_tiling_is_exact() {
        let sector = Sector::new(pt(0.0, 0.0), 0.0, PI / 2.0).unwrap();
        let f = ExpSum::new(vec![
            (c(1.0, 0.0), [c(0.0, 0.7), c(0.0, 0.4)]),
            (c(1.0, 0.0), [c(0.0, -0.7), c(0.0, 0.4)]),
        ]);
        // cos(0.7x₁)e^{0.4ix₂} is even in x₁ only; use cos·cos for both axes.
        let g = ExpSum::new(
            f.terms()
                .iter()
                .flat_map(|(c0, a)| [(*c0, *a), (*c0, [a[0], -a[1]])])
                .collect(),
        );
        let prob = SectorProblem::new(sector, [LineCondition::Neumann; 2], g.clone());
        for x in [pt(-0.3, 0.5), pt(-0.7, -0.2), pt(0.4, -1.1)] {
            let v = sector_extend(&prob, &x, DEFAULT_MAX_REFLECTIONS).unwrap();
            assert_eq!(v, g.value(&pt(x.x.abs(), x.y.abs())));
        }
    }

    #[test]
    fn mixed_dirichlet_neumann_signs() {
        // sin(kx₁)cos(kx₂): Dirichlet on the x₂-axis (L₁), Neumann on the x₁-axis (L₀).
        let k = 1.3;
        let sector = Sector::new(pt(0.0, 0.0), 0.0, PI / 2.0).unwrap();
        let u = FnField::new(move |p| Ok(FieldSample::value_only(c((k * p.x).sin() * (k * p.y).cos(), 0.0))));
        let prob = SectorProblem::new(sector, [LineCondition::Neumann, LineCondition::Dirichlet], u);
        for x in [pt(-0.4, 0.6), pt(-0.8, -0.3), pt(0.5, -0.9)] {
            let v = sector_extend(&prob, &x, DEFAULT_MAX_REFLECTIONS).unwrap();
            let e = (k * x.x).sin() * (k * x.y).cos();
            assert!((v.re - e).abs() < 1e-14 && v.im == 0.0);
        }
    }
}
