//! Geometry of two distinct polygonal obstacles: locating a corner with two
//! Robin half-lines or a Robin segment across a gap, and the walk of
//! reflected gap domains along an escape path until a reflected side gives a
//! full Robin line or two sides give a Robin sector.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{cross, pt, Containment, EscapePath, Line, Point, Polygon, Segment};
use crate::kernels::WaveParams;

/// Snap tolerance for intersections and corner hits, relative to the
/// joint diameter.
pub const SNAP_TOL: f64 = 1e-9;

/// Membership in the unbounded component E of the complement of the closed
/// obstacles, by flood fill on a grid covering four times their joint extent.
#[derive(Debug, Clone)]
pub struct ExteriorRegion {
    obstacles: Vec<Polygon>,
    origin: Point,
    h: f64,
    n: usize,
    reached: Vec<bool>,
}

impl ExteriorRegion {
    pub const GRID: usize = 256;

    pub fn new(obstacles: &[Polygon]) -> Self {
        let (mut lo, mut hi) = (pt(f64::INFINITY, f64::INFINITY), pt(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for o in obstacles {
            let (a, b) = o.bounding_box();
            lo = pt(lo.x.min(a.x), lo.y.min(a.y));
            hi = pt(hi.x.max(b.x), hi.y.max(b.y));
        }
        let center = (lo + hi) / 2.0;
        let size = 4.0 * (hi - lo).norm().max(1e-12);
        let n = Self::GRID;
        let h = size / n as f64;
        let origin = center - pt(size / 2.0, size / 2.0);
        let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
        let blocked: Vec<bool> = (0..n * n)
            .map(|idx| {
                let c = origin + pt((idx % n) as f64 + 0.5, (idx / n) as f64 + 0.5) * h;
                obstacles.iter().any(|o| {
                    o.classify(&c) != Containment::Outside || o.distance_to_boundary(&c) <= half_diag
                })
            })
            .collect();
        let mut reached = vec![false; n * n];
        let mut queue = VecDeque::new();
        for i in 0..n {
            for idx in [i, (n - 1) * n + i, i * n, i * n + n - 1] {
                if !blocked[idx] && !reached[idx] {
                    reached[idx] = true;
                    queue.push_back(idx);
                }
            }
        }
        while let Some(idx) = queue.pop_front() {
            let (i, j) = ((idx % n) as isize, (idx / n) as isize);
            for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let (a, b) = (i + di, j + dj);
                if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                    continue;
                }
                let k = b as usize * n + a as usize;
                if !blocked[k] && !reached[k] {
                    reached[k] = true;
                    queue.push_back(k);
                }
            }
        }
        Self {
            obstacles: obstacles.to_vec(),
            origin,
            h,
            n,
            reached,
        }
    }

    fn cell_center(&self, i: usize, j: usize) -> Point {
        self.origin + pt(i as f64 + 0.5, j as f64 + 0.5) * self.h
    }

    /// Whether `p` lies in E.
    pub fn contains(&self, p: &Point) -> bool {
        if self.obstacles.iter().any(|o| o.classify(p) != Containment::Outside) {
            return false;
        }
        let q = (p - self.origin) / self.h;
        let (fi, fj) = (q.x.floor(), q.y.floor());
        if fi < 0.0 || fj < 0.0 || fi >= self.n as f64 || fj >= self.n as f64 {
            return true;
        }
        let (i, j) = (fi as usize, fj as usize);
        if self.reached[j * self.n + i] {
            return true;
        }
        // Cells near a boundary are blocked; look for a visible reached cell.
        let r = 3isize;
        for dj in -r..=r {
            for di in -r..=r {
                let (a, b) = (i as isize + di, j as isize + dj);
                if a < 0 || b < 0 || a >= self.n as isize || b >= self.n as isize {
                    continue;
                }
                let (a, b) = (a as usize, b as usize);
                if !self.reached[b * self.n + a] {
                    continue;
                }
                let c = self.cell_center(a, b);
                if let Ok(seg) = Segment::new(*p, c) {
                    if !self.obstacles.iter().any(|o| o.meets_segment(&seg)) {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// Whether `p` lies on the closure of E: some point at distance
    /// `SNAP_TOL·scale`-ish from `p` belongs to E.
    pub fn touches(&self, p: &Point) -> bool {
        let eps = 1e-6 * self.h;
        (0..16).any(|k| {
            let th = k as f64 * std::f64::consts::PI / 8.0 + 0.1;
            self.contains(&(p + pt(th.cos(), th.sin()) * eps))
        })
    }
}

/// Configuration of two obstacles with respect to the uniqueness argument.
#[derive(Debug, Clone, PartialEq)]
pub enum GapCase {
    Identical,
    /// Corner of the source polygon whose two adjacent sides extend from the
    /// corner to half-lines avoiding the obstacle, spanning a sector that
    /// avoids it too.
    Corner {
        corner: Point,
        half_lines: [Point; 2],
        opening: f64,
    },
    /// Segment through a side of the source polygon, outside the obstacle,
    /// with both end points on the obstacle boundary; `gap` is the bounded
    /// domain it cuts off.
    Segment { segment: Segment, gap: Polygon },
    Unclassified(String),
}

/// Result of [`classify_gap`]. `source` plays the role of the obstacle whose
/// boundary supplies the Robin lines; `obstacle` is the one whose field is
/// extended. `swapped` records whether these are (d2, d1) of the call.
#[derive(Debug, Clone)]
pub struct GapConfiguration {
    pub source: Polygon,
    pub obstacle: Polygon,
    pub swapped: bool,
    pub case: GapCase,
    pub exterior: ExteriorRegion,
}

fn same_polygon(a: &Polygon, b: &Polygon, tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    (0..n).any(|shift| (0..n).all(|i| (a.vertex(i) - b.vertex((i + shift) % n)).norm() <= tol))
}

/// Whether the closed ray from `o` along `d` meets the closed polygon.
fn ray_meets(poly: &Polygon, o: &Point, d: &Point) -> bool {
    poly.meets_ray(o, d)
}

/// Whether the closed convex cone at `o` spanned by unit `da`, `db`
/// (opening < π) meets the closed polygon.
fn cone_meets(poly: &Polygon, o: &Point, da: &Point, db: &Point) -> bool {
    if ray_meets(poly, o, da) || ray_meets(poly, o, db) {
        return true;
    }
    let s = cross(da, db).signum();
    // A bounded polygon meeting the cone without meeting its rays has a
    // vertex inside it.
    poly.vertices().iter().any(|v| {
        let q = v - o;
        s * cross(da, &q) >= 0.0 && s * cross(&q, db) >= 0.0
    })
}

fn corner_witness(source: &Polygon, obstacle: &Polygon, ext: &ExteriorRegion) -> Option<GapCase> {
    let n = source.len();
    for i in 0..n {
        let o = source.vertex(i);
        let prev = source.vertex((i + n - 1) % n);
        let next = source.vertex((i + 1) % n);
        if cross(&(o - prev), &(next - o)) <= 0.0 {
            continue;
        }
        if obstacle.classify(&o) != Containment::Outside || !ext.touches(&o) {
            continue;
        }
        let da = (prev - o).normalize();
        let db = (next - o).normalize();
        if cone_meets(obstacle, &o, &da, &db) {
            continue;
        }
        return Some(GapCase::Corner {
            corner: o,
            half_lines: [da, db],
            opening: da.dot(&db).clamp(-1.0, 1.0).acos(),
        });
    }
    None
}

/// Parameters s ≤ 0 and s ≥ 0 of the closest points of the closed polygon
/// on the line q + s·d.
fn blocking_interval(poly: &Polygon, q: &Point, d: &Point) -> (Option<f64>, Option<f64>) {
    let (mut lo, mut hi): (Option<f64>, Option<f64>) = (None, None);
    let mut push = |s: f64| {
        if s <= 0.0 {
            lo = Some(lo.map_or(s, |l: f64| l.max(s)));
        }
        if s >= 0.0 {
            hi = Some(hi.map_or(s, |h: f64| h.min(s)));
        }
    };
    for e in poly.edges() {
        let r = e.b() - e.a();
        let den = cross(d, &r);
        let w = e.a() - q;
        if den.abs() <= 1e-14 * r.norm() {
            if cross(&w, d).abs() <= 1e-12 * (1.0 + w.norm()) {
                push(w.dot(d));
                push((e.b() - q).dot(d));
            }
            continue;
        }
        let s = cross(&w, &r) / den;
        let u = cross(&w, d) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&u) {
            push(s);
        }
    }
    (lo, hi)
}

/// Bounded domain cut off from the complement of `obstacle` by the chord
/// `seg` whose end points lie on its boundary.
fn gap_domain(obstacle: &Polygon, seg: &Segment) -> Result<Polygon> {
    let n = obstacle.len();
    let edge_of = |p: &Point| -> Result<usize> {
        (0..n)
            .min_by(|&i, &j| {
                obstacle.edge(i).distance(p).partial_cmp(&obstacle.edge(j).distance(p)).unwrap()
            })
            .filter(|&i| obstacle.edge(i).distance(p) <= 1e-8 * (1.0 + p.norm()))
            .ok_or_else(|| Error::InvalidGeometry("chord end point is not on the boundary".into()))
    };
    let (p1, p2) = (seg.a(), seg.b());
    let (i1, i2) = (edge_of(&p1)?, edge_of(&p2)?);
    let arc = |from: Point, i: usize, to: Point, j: usize| -> Vec<Point> {
        let mut pts = vec![from];
        let mut k = i;
        while k != j {
            k = (k + 1) % n;
            pts.push(obstacle.vertex(k));
        }
        pts.push(to);
        let mut clean: Vec<Point> = Vec::new();
        for p in pts {
            if clean.last().is_none_or(|l: &Point| (p - l).norm() > 1e-12) {
                clean.push(p);
            }
        }
        if clean.len() > 1 && (clean[0] - clean[clean.len() - 1]).norm() <= 1e-12 {
            clean.pop();
        }
        clean
    };
    let mut candidates = Vec::new();
    for pts in [arc(p1, i1, p2, i2), arc(p2, i2, p1, i1)] {
        if let Ok(p) = Polygon::new(pts) {
            candidates.push(p);
        }
    }
    candidates
        .into_iter()
        .min_by(|a, b| a.area().partial_cmp(&b.area()).unwrap())
        .ok_or_else(|| Error::InvalidGeometry("chord does not cut off a simple gap domain".into()))
}

fn segment_witness(source: &Polygon, obstacle: &Polygon, ext: &ExteriorRegion) -> Option<GapCase> {
    for e in source.edges() {
        let d = e.direction();
        for k in 1..10 {
            let q = e.point_at(k as f64 / 10.0);
            if obstacle.classify(&q) != Containment::Outside || !ext.touches(&q) {
                continue;
            }
            let (Some(lo), Some(hi)) = blocking_interval(obstacle, &q, &d) else {
                continue;
            };
            let (a, b) = (q + d * lo, q + d * hi);
            let Ok(seg) = Segment::new(a, b) else { continue };
            let inside_source = (1..20).any(|m| source.classify(&seg.point_at(m as f64 / 20.0)) == Containment::Inside);
            if inside_source || !ext.touches(&a) || !ext.touches(&b) {
                continue;
            }
            if let Ok(gap) = gap_domain(obstacle, &seg) {
                return Some(GapCase::Segment { segment: seg, gap });
            }
        }
    }
    None
}

/// Classify the configuration of two obstacles. Corner witnesses are
/// preferred over segment witnesses; the roles of the two polygons are
/// exchanged when only the exchanged order yields a witness.
pub fn classify_gap(d1: &Polygon, d2: &Polygon) -> Result<GapConfiguration> {
    let ext = ExteriorRegion::new(&[d1.clone(), d2.clone()]);
    let scale = d1.diameter().max(d2.diameter());
    let make = |swapped: bool, case: GapCase| {
        let (s, o) = if swapped { (d2, d1) } else { (d1, d2) };
        GapConfiguration {
            source: s.clone(),
            obstacle: o.clone(),
            swapped,
            case,
            exterior: ext.clone(),
        }
    };
    if same_polygon(d1, d2, SNAP_TOL * scale.max(1.0)) {
        return Ok(make(false, GapCase::Identical));
    }
    for swapped in [false, true] {
        let (s, o) = if swapped { (d2, d1) } else { (d1, d2) };
        if let Some(c) = corner_witness(s, o, &ext) {
            return Ok(make(swapped, c));
        }
    }
    for swapped in [false, true] {
        let (s, o) = if swapped { (d2, d1) } else { (d1, d2) };
        if let Some(c) = segment_witness(s, o, &ext) {
            return Ok(make(swapped, c));
        }
    }
    Ok(make(
        false,
        GapCase::Unclassified("no corner or segment witness; boundaries may be tangent".into()),
    ))
}

/// One domain of the reflection walk.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionStep {
    /// Ωₙ.
    pub domain: Polygon,
    /// Side lₙ of Ωₙ through Pₙ and the line Lₙ carrying it.
    pub segment: Segment,
    pub line: Line,
    /// Exit parameter tₙ of the escape path and Pₙ = γ(tₙ).
    pub t: f64,
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// A side of Ωₙ extends to a full line avoiding the obstacle.
    FullLine { step: usize, side: Segment },
    /// Two neighbouring sides of Ωₙ extend from their common corner to
    /// half-lines spanning a sector that avoids the obstacle.
    SectorPair {
        step: usize,
        corner: Point,
        half_lines: [Point; 2],
        opening: f64,
    },
    BudgetExceeded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionPlan {
    pub steps: Vec<ReflectionStep>,
    pub termination: Termination,
}

fn termination_for(domain: &Polygon, obstacle: &Polygon, step: usize) -> Option<Termination> {
    for side in domain.edges() {
        if !obstacle.meets_line(&side.line()) {
            return Some(Termination::FullLine { step, side });
        }
    }
    let n = domain.len();
    for i in 0..n {
        let o = domain.vertex(i);
        let prev = domain.vertex((i + n - 1) % n);
        let next = domain.vertex((i + 1) % n);
        if cross(&(o - prev), &(next - o)) <= 0.0 || obstacle.classify(&o) != Containment::Outside {
            continue;
        }
        let da = (prev - o).normalize();
        let db = (next - o).normalize();
        if !cone_meets(obstacle, &o, &da, &db) {
            return Some(Termination::SectorPair {
                step,
                corner: o,
                half_lines: [da, db],
                opening: da.dot(&db).clamp(-1.0, 1.0).acos(),
            });
        }
    }
    None
}

/// Walk for a segment configuration.
pub fn plan_reflections(config: &GapConfiguration, gamma: &EscapePath, budget: usize) -> Result<ReflectionPlan> {
    match &config.case {
        GapCase::Segment { segment, gap } => {
            plan_reflections_from(gap, segment, &config.obstacle, gamma, budget)
        }
        other => Err(Error::InvalidParameter(format!(
            "reflection walk needs a segment configuration, got {other:?}"
        ))),
    }
}

/// Walk starting from an explicit gap domain Ω₀ with side l₀.
pub fn plan_reflections_from(
    omega0: &Polygon,
    l0: &Segment,
    obstacle: &Polygon,
    gamma: &EscapePath,
    budget: usize,
) -> Result<ReflectionPlan> {
    let scale = omega0.diameter().max(obstacle.diameter()).max(1.0);
    let tol = SNAP_TOL * scale;
    let p0 = gamma.start();
    if l0.distance(&p0) > tol {
        return Err(Error::PathNotAdmissible("escape path does not start on l₀".into()));
    }
    let mut steps = vec![ReflectionStep {
        domain: omega0.clone(),
        segment: *l0,
        line: l0.line(),
        t: 0.0,
        point: p0,
    }];
    if let Some(t) = termination_for(omega0, obstacle, 0) {
        return Ok(ReflectionPlan { steps, termination: t });
    }
    for n in 1..=budget {
        let prev = steps.last().unwrap();
        let domain = prev.domain.reflect(&prev.line);
        let t = domain
            .edges()
            .flat_map(|e| gamma.intersections(&e))
            .fold(f64::NEG_INFINITY, f64::max);
        if !(t > prev.t + tol) {
            return Err(Error::Degenerate(format!(
                "escape path does not advance through reflected domain {n}"
            )));
        }
        let p = gamma.point_at(t);
        if domain.vertices().iter().any(|v| (v - p).norm() <= tol) {
            return Err(Error::CornerHit { step: n });
        }
        let segment = domain
            .edges()
            .min_by(|a, b| a.distance(&p).partial_cmp(&b.distance(&p)).unwrap())
            .unwrap();
        steps.push(ReflectionStep {
            line: segment.line(),
            segment,
            domain: domain.clone(),
            t,
            point: p,
        });
        if let Some(term) = termination_for(&domain, obstacle, n) {
            return Ok(ReflectionPlan { steps, termination: term });
        }
    }
    Ok(ReflectionPlan {
        steps,
        termination: Termination::BudgetExceeded,
    })
}

impl fmt::Display for ReflectionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in self.steps.iter().enumerate() {
            let [a, b, c] = s.line.coefficients();
            writeln!(f, "step {n}")?;
            writeln!(f, "  line {a:.12} {b:.12} {c:.12}")?;
            writeln!(f, "  t {:.12}", s.t)?;
            writeln!(f, "  point {:.12} {:.12}", s.point.x, s.point.y)?;
            write!(f, "  domain")?;
            for v in s.domain.vertices() {
                write!(f, " {:.12},{:.12}", v.x, v.y)?;
            }
            writeln!(f)?;
        }
        match &self.termination {
            Termination::FullLine { step, side } => writeln!(
                f,
                "termination full-line step {step} side {:.12},{:.12} {:.12},{:.12}",
                side.a().x,
                side.a().y,
                side.b().x,
                side.b().y
            ),
            Termination::SectorPair { step, corner, opening, .. } => writeln!(
                f,
                "termination sector-pair step {step} corner {:.12},{:.12} opening {opening:.12}",
                corner.x, corner.y
            ),
            Termination::BudgetExceeded => writeln!(f, "termination budget-exceeded"),
        }
    }
}

/// Evaluation of ν·d + λ/k on the edges of a polygon (ν the outward normal),
/// which would all vanish if the plane wave e^{ikx·d} satisfied the Robin
/// condition on the whole boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveCheck {
    pub consistent: bool,
    pub residuals: Vec<f64>,
    /// Three outward normals ν⁽¹⁾, ν⁽²⁾, ν⁽³⁾ with ν⁽²⁾ − ν⁽¹⁾ and ν⁽³⁾ − ν⁽¹⁾
    /// linearly independent.
    pub witness: [Point; 3],
    /// cross(ν⁽²⁾ − ν⁽¹⁾, ν⁽³⁾ − ν⁽¹⁾).
    pub witness_cross: f64,
}

pub fn plane_wave_impossibility(poly: &Polygon, wave: &WaveParams) -> PlaneWaveCheck {
    let ratio = wave.lambda.re / wave.k;
    let normals: Vec<Point> = (0..poly.len()).map(|i| poly.edge_normal(i)).collect();
    let residuals: Vec<f64> = normals.iter().map(|n| n.dot(&wave.direction) + ratio).collect();
    let consistent = residuals.iter().all(|r| r.abs() <= 1e-12);
    let mut best = ([normals[0]; 3], 0.0f64);
    let m = normals.len();
    for i in 0..m {
        for j in (i + 1)..m {
            for k in (j + 1)..m {
                let c = cross(&(normals[j] - normals[i]), &(normals[k] - normals[i]));
                if c.abs() > best.1.abs() {
                    best = ([normals[i], normals[j], normals[k]], c);
                }
            }
        }
    }
    PlaneWaveCheck {
        consistent,
        residuals,
        witness: best.0,
        witness_cross: best.1,
    }
}
