//! Planar primitives: lines, segments, polygons, sectors, rigid frames and
//! piecewise-linear paths.
//!
//! Polygons are stored counterclockwise; the outward normal of an edge is its
//! direction rotated by −90°.

use nalgebra::Vector2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = Vector2<f64>;

/// Tolerance used for on-boundary and on-line decisions.
pub const BOUNDARY_TOL: f64 = 1e-12;

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// z-component of the cross product.
pub fn cross(a: &Point, b: &Point) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotate by +90°.
pub fn perp(v: &Point) -> Point {
    pt(-v.y, v.x)
}

/// Infinite straight line through `anchor` with unit `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    anchor: Point,
    direction: Point,
}

impl Line {
    pub fn new(anchor: Point, direction: Point) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidGeometry("line direction must be nonzero".into()));
        }
        Ok(Self {
            anchor,
            direction: direction / n,
        })
    }

    pub fn through(a: Point, b: Point) -> Result<Self> {
        Self::new(a, b - a)
    }

    /// The axis {x₂ = 0}.
    pub fn horizontal_axis() -> Self {
        Self {
            anchor: pt(0.0, 0.0),
            direction: pt(1.0, 0.0),
        }
    }

    pub fn anchor(&self) -> Point {
        self.anchor
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    /// Unit normal to the left of the direction.
    pub fn normal(&self) -> Point {
        perp(&self.direction)
    }

    /// Signed distance, positive on the side of [`Line::normal`].
    pub fn signed_distance(&self, p: &Point) -> f64 {
        (p - self.anchor).dot(&self.normal())
    }

    /// Coordinate of the orthogonal projection of `p` along the direction.
    pub fn project(&self, p: &Point) -> f64 {
        (p - self.anchor).dot(&self.direction)
    }

    pub fn point_at(&self, s: f64) -> Point {
        self.anchor + self.direction * s
    }

    pub fn foot(&self, p: &Point) -> Point {
        self.point_at(self.project(p))
    }

    pub fn reflect(&self, p: &Point) -> Point {
        p - self.normal() * (2.0 * self.signed_distance(p))
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.signed_distance(p).abs() <= tol
    }

    /// Coefficients (a, b, c) of a·x + b·y = c with (a, b) the unit normal.
    pub fn coefficients(&self) -> [f64; 3] {
        let n = self.normal();
        [n.x, n.y, n.dot(&self.anchor)]
    }
}

pub fn reflect_point(line: &Line, p: &Point) -> Point {
    line.reflect(p)
}

/// Closed segment between two distinct points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    a: Point,
    b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        if (b - a).norm() <= BOUNDARY_TOL {
            return Err(Error::InvalidGeometry("degenerate segment".into()));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> Point {
        self.a
    }

    pub fn b(&self) -> Point {
        self.b
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn direction(&self) -> Point {
        (self.b - self.a) / self.length()
    }

    pub fn line(&self) -> Line {
        Line {
            anchor: self.a,
            direction: self.direction(),
        }
    }

    pub fn point_at(&self, t: f64) -> Point {
        self.a + (self.b - self.a) * t
    }

    pub fn midpoint(&self) -> Point {
        self.point_at(0.5)
    }

    /// Parameter in [0, 1] of the closest point to `p`.
    pub fn closest_parameter(&self, p: &Point) -> f64 {
        let d = self.b - self.a;
        ((p - self.a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0)
    }

    pub fn distance(&self, p: &Point) -> f64 {
        (self.point_at(self.closest_parameter(p)) - p).norm()
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        self.distance(p) <= tol
    }

    pub fn reflect(&self, line: &Line) -> Segment {
        Segment {
            a: line.reflect(&self.a),
            b: line.reflect(&self.b),
        }
    }
}

/// Intersection parameters (s on p→p+r, t on q→q+s) of two lines given in
/// point/direction form, or `None` when parallel.
pub fn line_line_parameters(p: &Point, r: &Point, q: &Point, s: &Point) -> Option<(f64, f64)> {
    let denom = cross(r, s);
    let scale = r.norm() * s.norm();
    if denom.abs() <= 1e-14 * scale {
        return None;
    }
    let qp = q - p;
    Some((cross(&qp, s) / denom, cross(&qp, r) / denom))
}

/// Whether two closed segments share a point (including touching and collinear
/// overlap).
pub fn segments_intersect(s1: &Segment, s2: &Segment, tol: f64) -> bool {
    let r = s1.b - s1.a;
    let s = s2.b - s2.a;
    match line_line_parameters(&s1.a, &r, &s2.a, &s) {
        Some((t, u)) => {
            let et = tol / r.norm();
            let eu = tol / s.norm();
            t >= -et && t <= 1.0 + et && u >= -eu && u <= 1.0 + eu
        }
        None => {
            s1.contains(&s2.a, tol)
                || s1.contains(&s2.b, tol)
                || s2.contains(&s1.a, tol)
                || s2.contains(&s1.b, tol)
        }
    }
}

/// Boundary condition attached to a polygon edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum EdgeBc {
    /// Robin condition with the impedance taken from the wave parameters.
    #[default]
    Impedance,
    /// Robin condition ∂νu + iλu = 0 with an edge-specific λ.
    Robin {
        #[serde(with = "complex_repr")]
        lambda: Complex64,
    },
    Dirichlet,
    Neumann,
}

/// Serialises a complex number as a bare real when the imaginary part is zero
/// and as `[re, im]` otherwise.
pub mod complex_repr {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        if z.im == 0.0 {
            Repr::Real(z.re).serialize(s)
        } else {
            Repr::Pair([z.re, z.im]).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(x) => Complex64::new(x, 0.0),
            Repr::Pair([re, im]) => Complex64::new(re, im),
        })
    }
}

/// Result of a containment query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Containment {
    Inside,
    Outside,
    OnBoundary,
}

/// Simple counterclockwise polygon with a boundary condition per edge.
///
/// Edge `i` runs from vertex `i` to vertex `i + 1` (cyclically).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolygonFile", into = "PolygonFile")]
pub struct Polygon {
    vertices: Vec<Point>,
    bc: Vec<EdgeBc>,
}

#[derive(Serialize, Deserialize)]
struct PolygonFile {
    vertices: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    bc: Option<Vec<EdgeBc>>,
}

impl TryFrom<PolygonFile> for Polygon {
    type Error = Error;

    fn try_from(f: PolygonFile) -> Result<Self> {
        let vertices: Vec<Point> = f.vertices.iter().map(|v| pt(v[0], v[1])).collect();
        match f.bc {
            Some(bc) => Polygon::with_bc(vertices, bc),
            None => Polygon::new(vertices),
        }
    }
}

impl From<Polygon> for PolygonFile {
    fn from(p: Polygon) -> Self {
        PolygonFile {
            vertices: p.vertices.iter().map(|v| [v.x, v.y]).collect(),
            bc: Some(p.bc),
        }
    }
}

impl Polygon {
    /// Polygon with the default impedance condition on every edge. Clockwise
    /// input is reoriented.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        let n = vertices.len();
        Self::with_bc(vertices, vec![EdgeBc::Impedance; n])
    }

    pub fn with_bc(mut vertices: Vec<Point>, mut bc: Vec<EdgeBc>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::InvalidGeometry("a polygon needs at least 3 vertices".into()));
        }
        if bc.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "{} boundary conditions given for {} edges",
                bc.len(),
                n
            )));
        }
        if vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite vertex".into()));
        }
        for i in 0..n {
            if (vertices[(i + 1) % n] - vertices[i]).norm() <= BOUNDARY_TOL {
                return Err(Error::InvalidGeometry(format!("repeated vertex {i}")));
            }
        }
        let area = signed_area(&vertices);
        let scale = diameter_of(&vertices);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::InvalidGeometry("polygon has zero area".into()));
        }
        if area < 0.0 {
            // Reverse the vertex order; edge i (v_i → v_{i+1}) becomes the edge
            // ending at the reversed position of v_i.
            vertices.reverse();
            bc.reverse();
            bc.rotate_left(1);
        }
        let poly = Self { vertices, bc };
        poly.check_simple()?;
        Ok(poly)
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (ei, ej) = (self.edge(i), self.edge(j));
                if adjacent {
                    // Adjacent edges may only share their common vertex.
                    let shared = if j == i + 1 { ei.b } else { ei.a };
                    let other_i = if j == i + 1 { ei.a } else { ei.b };
                    let other_j = if j == i + 1 { ej.b } else { ej.a };
                    if ej.contains(&other_i, BOUNDARY_TOL) || ei.contains(&other_j, BOUNDARY_TOL)
                    {
                        return Err(Error::InvalidGeometry(format!(
                            "edges {i} and {j} overlap at {:?}",
                            shared
                        )));
                    }
                } else if segments_intersect(&ei, &ej, BOUNDARY_TOL) {
                    return Err(Error::InvalidGeometry(format!(
                        "edges {i} and {j} intersect"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned rectangle [x0, x1] × [y0, y1].
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1)])
    }

    /// Regular polygon with `n` vertices on the circle of radius `r`, the
    /// first vertex at angle `phase`.
    pub fn regular(n: usize, center: Point, r: f64, phase: f64) -> Result<Self> {
        let vertices = (0..n)
            .map(|j| {
                let th = phase + 2.0 * PI * j as f64 / n as f64;
                center + pt(th.cos(), th.sin()) * r
            })
            .collect();
        Self::new(vertices)
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i % self.len()]
    }

    pub fn edge(&self, i: usize) -> Segment {
        let n = self.len();
        Segment {
            a: self.vertices[i % n],
            b: self.vertices[(i + 1) % n],
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = Segment> + '_ {
        (0..self.len()).map(move |i| self.edge(i))
    }

    /// Outward unit normal of edge `i`.
    pub fn edge_normal(&self, i: usize) -> Point {
        let d = self.edge(i).direction();
        pt(d.y, -d.x)
    }

    pub fn edge_bc(&self, i: usize) -> EdgeBc {
        self.bc[i % self.len()]
    }

    pub fn boundary_conditions(&self) -> &[EdgeBc] {
        &self.bc
    }

    /// Copy with every edge carrying `bc`.
    pub fn with_uniform_bc(&self, bc: EdgeBc) -> Self {
        Self {
            vertices: self.vertices.clone(),
            bc: vec![bc; self.len()],
        }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|e| e.length()).sum()
    }

    pub fn diameter(&self) -> f64 {
        diameter_of(&self.vertices)
    }

    pub fn centroid(&self) -> Point {
        let n = self.len();
        let mut c = pt(0.0, 0.0);
        let mut a = 0.0;
        for i in 0..n {
            let p = self.vertices[i];
            let q = self.vertices[(i + 1) % n];
            let w = cross(&p, &q);
            a += w;
            c += (p + q) * w;
        }
        c / (3.0 * a)
    }

    /// (min, max) corners of the bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo = pt(lo.x.min(v.x), lo.y.min(v.y));
            hi = pt(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    pub fn distance_to_boundary(&self, p: &Point) -> f64 {
        self.edges()
            .map(|e| e.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Winding-number containment with a distinct on-boundary status.
    pub fn classify(&self, p: &Point) -> Containment {
        if self.distance_to_boundary(p) <= BOUNDARY_TOL {
            return Containment::OnBoundary;
        }
        let winding = winding_number(&self.vertices, p);
        if winding != 0 {
            Containment::Inside
        } else {
            Containment::Outside
        }
    }

    /// Reflection across `line`, re-oriented counterclockwise; boundary
    /// conditions follow their edges.
    pub fn reflect(&self, line: &Line) -> Polygon {
        let mut vertices: Vec<Point> = self.vertices.iter().map(|v| line.reflect(v)).collect();
        let mut bc = self.bc.clone();
        vertices.reverse();
        bc.reverse();
        bc.rotate_left(1);
        Polygon { vertices, bc }
    }

    /// Apply a rigid motion (rotation + translation, possibly a reflection).
    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> Result<Polygon> {
        Polygon::with_bc(self.vertices.iter().map(f).collect(), self.bc.clone())
    }

    /// Whether the closed segment meets the closed polygon.
    pub fn meets_segment(&self, seg: &Segment) -> bool {
        if self.classify(&seg.a) != Containment::Outside
            || self.classify(&seg.b) != Containment::Outside
        {
            return true;
        }
        self.edges().any(|e| segments_intersect(&e, seg, BOUNDARY_TOL))
    }

    /// Whether the closed ray `origin + s·dir`, s ≥ 0, meets the closed polygon.
    pub fn meets_ray(&self, origin: &Point, dir: &Point) -> bool {
        if self.classify(origin) != Containment::Outside {
            return true;
        }
        let d = dir / dir.norm();
        self.edges().any(|e| {
            let r = e.b - e.a;
            match line_line_parameters(origin, &d, &e.a, &r) {
                Some((s, u)) => {
                    let eu = BOUNDARY_TOL / r.norm();
                    s >= -BOUNDARY_TOL && u >= -eu && u <= 1.0 + eu
                }
                None => {
                    // Parallel: collinear overlap only.
                    let l = Line { anchor: *origin, direction: d };
                    l.contains(&e.a, BOUNDARY_TOL)
                        && (l.project(&e.a) >= -BOUNDARY_TOL || l.project(&e.b) >= -BOUNDARY_TOL)
                }
            }
        })
    }

    /// Whether the whole line meets the closed polygon.
    pub fn meets_line(&self, line: &Line) -> bool {
        let d: Vec<f64> = self.vertices.iter().map(|v| line.signed_distance(v)).collect();
        let lo = d.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        lo <= BOUNDARY_TOL && hi >= -BOUNDARY_TOL
    }

    /// Index of the vertex within `tol` of `p`.
    pub fn vertex_near(&self, p: &Point, tol: f64) -> Option<usize> {
        self.vertices.iter().position(|v| (v - p).norm() <= tol)
    }

    /// Triangulation by ear clipping; returns vertex index triples.
    pub fn triangulate(&self) -> Vec<[usize; 3]> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        let mut tris = Vec::with_capacity(self.len() - 2);
        let v = &self.vertices;
        while idx.len() > 3 {
            let m = idx.len();
            let mut clipped = false;
            for k in 0..m {
                let (ia, ib, ic) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
                let (a, b, c) = (v[ia], v[ib], v[ic]);
                if cross(&(b - a), &(c - b)) <= 0.0 {
                    continue;
                }
                let blocked = idx.iter().any(|&j| {
                    j != ia && j != ib && j != ic && point_in_triangle(&v[j], &a, &b, &c)
                });
                if !blocked {
                    tris.push([ia, ib, ic]);
                    idx.remove(k);
                    clipped = true;
                    break;
                }
            }
            if !clipped {
                // Only reachable through round-off on nearly collinear chains.
                let k = 0;
                tris.push([idx[m - 1], idx[k], idx[1]]);
                idx.remove(k);
            }
        }
        tris.push([idx[0], idx[1], idx[2]]);
        tris
    }
}

/// Winding number of the closed polyline through `closed` (last point joined
/// to the first) around `p`; counterclockwise loops count positive.
pub fn winding_number(closed: &[Point], p: &Point) -> i32 {
    let n = closed.len();
    let mut winding = 0i32;
    for i in 0..n {
        let a = closed[i];
        let b = closed[(i + 1) % n];
        if a.y <= p.y {
            if b.y > p.y && cross(&(b - a), &(p - a)) > 0.0 {
                winding += 1;
            }
        } else if b.y <= p.y && cross(&(b - a), &(p - a)) < 0.0 {
            winding -= 1;
        }
    }
    winding
}

fn point_in_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> bool {
    let d1 = cross(&(b - a), &(p - a));
    let d2 = cross(&(c - b), &(p - b));
    let d3 = cross(&(a - c), &(p - c));
    d1 >= 0.0 && d2 >= 0.0 && d3 >= 0.0
}

pub fn reflect_polygon(line: &Line, poly: &Polygon) -> Polygon {
    poly.reflect(line)
}

pub fn polygon_contains(poly: &Polygon, p: &Point) -> Result<bool> {
    match poly.classify(p) {
        Containment::Inside => Ok(true),
        Containment::Outside => Ok(false),
        Containment::OnBoundary => Err(Error::OnBoundary(p.x, p.y)),
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| cross(&v[i], &v[(i + 1) % n])).sum::<f64>() / 2.0
}

fn diameter_of(v: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..v.len() {
        for j in (i + 1)..v.len() {
            d = d.max((v[i] - v[j]).norm());
        }
    }
    d
}

/// How far the line through a segment extends without meeting obstacles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtensionClass {
    FullLine,
    /// Free in the given unit direction only.
    HalfLine(Point),
    Blocked,
}

/// Classify the extension of `seg` beyond its endpoints within the complement
/// of the closed obstacles.
pub fn segment_extension_classification(
    seg: &Segment,
    obstacles: &[Polygon],
) -> Result<ExtensionClass> {
    let d = seg.direction();
    // Start the rays slightly past the endpoints so that endpoints lying on an
    // obstacle boundary do not count as blocking.
    let eps = 1e-9 * seg.length().max(1.0);
    let forward_free = obstacles
        .iter()
        .all(|o| !o.meets_ray(&(seg.b + d * eps), &d));
    let backward_free = obstacles
        .iter()
        .all(|o| !o.meets_ray(&(seg.a - d * eps), &(-d)));
    Ok(match (forward_free, backward_free) {
        (true, true) => ExtensionClass::FullLine,
        (true, false) => ExtensionClass::HalfLine(d),
        (false, true) => ExtensionClass::HalfLine(-d),
        (false, false) => ExtensionClass::Blocked,
    })
}

/// Rigid frame taking a reflection line to {x₂ = 0} with a designated side
/// mapped to the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    origin: Point,
    e1: Point,
    e2: Point,
}

impl Frame {
    pub fn identity() -> Self {
        Self {
            origin: pt(0.0, 0.0),
            e1: pt(1.0, 0.0),
            e2: pt(0.0, 1.0),
        }
    }

    /// Frame whose x₁-axis is `line` and whose upper half-plane contains
    /// `known_side`. The map is a proper rotation plus translation.
    pub fn for_line(line: &Line, known_side: &Point) -> Result<Self> {
        let s = line.signed_distance(known_side);
        if s.abs() <= BOUNDARY_TOL {
            return Err(Error::InvalidGeometry(
                "side marker lies on the reflection line".into(),
            ));
        }
        let (e1, e2) = if s > 0.0 {
            (line.direction(), line.normal())
        } else {
            (-line.direction(), -line.normal())
        };
        Ok(Self {
            origin: line.anchor(),
            e1,
            e2,
        })
    }

    pub fn to_local(&self, p: &Point) -> Point {
        let q = p - self.origin;
        pt(q.dot(&self.e1), q.dot(&self.e2))
    }

    pub fn to_world(&self, q: &Point) -> Point {
        self.origin + self.e1 * q.x + self.e2 * q.y
    }

    pub fn vector_to_local(&self, v: &Point) -> Point {
        pt(v.dot(&self.e1), v.dot(&self.e2))
    }

    pub fn vector_to_world(&self, v: &Point) -> Point {
        self.e1 * v.x + self.e2 * v.y
    }

    pub fn complex_vector_to_local(&self, g: &[Complex64; 2]) -> [Complex64; 2] {
        [
            g[0] * self.e1.x + g[1] * self.e1.y,
            g[0] * self.e2.x + g[1] * self.e2.y,
        ]
    }

    pub fn complex_vector_to_world(&self, g: &[Complex64; 2]) -> [Complex64; 2] {
        [
            g[0] * self.e1.x + g[1] * self.e2.x,
            g[0] * self.e1.y + g[1] * self.e2.y,
        ]
    }
}

/// Sector {apex + r(cos θ, sin θ): θ ∈ (start, start + θ₀)} with the two
/// bounding half-lines L₀ (angle `start`) and L₁ (angle `start + θ₀`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    apex: Point,
    start: f64,
    opening: f64,
}

impl Sector {
    pub fn new(apex: Point, start: f64, opening: f64) -> Result<Self> {
        if !(opening > 0.0 && opening <= PI / 2.0 + 1e-14) {
            return Err(Error::InvalidGeometry(format!(
                "sector opening {opening} outside (0, π/2]"
            )));
        }
        Ok(Self {
            apex,
            start,
            opening,
        })
    }

    pub fn apex(&self) -> Point {
        self.apex
    }

    pub fn start_angle(&self) -> f64 {
        self.start
    }

    pub fn opening(&self) -> f64 {
        self.opening
    }

    /// Unit direction of the half-line Lⱼ at angle start + j·θ₀.
    pub fn half_line_direction(&self, j: i64) -> Point {
        let th = self.start + j as f64 * self.opening;
        pt(th.cos(), th.sin())
    }

    /// Full line carrying the half-line Lⱼ.
    pub fn half_line(&self, j: i64) -> Line {
        Line {
            anchor: self.apex,
            direction: self.half_line_direction(j),
        }
    }

    /// Index j of the copy Σⱼ containing `p`, chosen with the angle offset
    /// from the middle of Σ₀ in (−π, π].
    pub fn sector_index(&self, p: &Point) -> Result<i64> {
        let q = p - self.apex;
        if q.norm() <= BOUNDARY_TOL {
            return Err(Error::OnBoundary(p.x, p.y));
        }
        let mid = self.start + self.opening / 2.0;
        let mut phi = q.y.atan2(q.x) - mid;
        phi = (phi + PI).rem_euclid(2.0 * PI) - PI;
        Ok(((phi + self.opening / 2.0) / self.opening).floor() as i64)
    }
}

/// Piecewise-linear integration path χ: [0, 1] → ℝ² through its waypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCurve {
    waypoints: Vec<Point>,
}

impl PathCurve {
    pub fn new(waypoints: Vec<Point>) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidGeometry("a path needs at least two points".into()));
        }
        let mut cleaned: Vec<Point> = Vec::with_capacity(waypoints.len());
        for w in waypoints {
            if cleaned.last().is_none_or(|l: &Point| (w - l).norm() > BOUNDARY_TOL) {
                cleaned.push(w);
            }
        }
        if cleaned.len() < 2 {
            return Err(Error::InvalidGeometry("path has zero length".into()));
        }
        Ok(Self { waypoints: cleaned })
    }

    /// Straight segment from the foot of `x` on {x₂ = 0} up to `x`.
    pub fn vertical(x: Point) -> Result<Self> {
        Self::new(vec![pt(x.x, 0.0), x])
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn start(&self) -> Point {
        self.waypoints[0]
    }

    pub fn end(&self) -> Point {
        *self.waypoints.last().unwrap()
    }

    pub fn legs(&self) -> impl Iterator<Item = Segment> + '_ {
        self.waypoints.windows(2).map(|w| Segment { a: w[0], b: w[1] })
    }

    pub fn length(&self) -> f64 {
        self.legs().map(|l| l.length()).sum()
    }

    pub fn distance(&self, p: &Point) -> f64 {
        self.legs().map(|l| l.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Check that χ(0) lies on `line` within 1e-10.
    pub fn check_starts_on(&self, line: &Line) -> Result<()> {
        if line.contains(&self.start(), 1e-10) {
            Ok(())
        } else {
            Err(Error::PathNotAdmissible(format!(
                "path starts at ({}, {}), off the boundary line",
                self.start().x,
                self.start().y
            )))
        }
    }

    /// Whether the path is the perpendicular drop from its end point to
    /// {x₂ = 0}.
    pub fn is_vertical_drop(&self) -> bool {
        self.waypoints.len() == 2
            && self.start().y.abs() <= 1e-10
            && (self.start().x - self.end().x).abs() <= 1e-12
    }

    pub fn map_points(&self, f: impl Fn(&Point) -> Point) -> Result<PathCurve> {
        PathCurve::new(self.waypoints.iter().map(f).collect())
    }
}

/// Unbounded escape path: a polyline followed by a final ray.
///
/// The parameter t runs over [i, i+1] on the i-th polyline piece and beyond
/// the last waypoint along the ray at unit speed.
#[derive(Debug, Clone, PartialEq)]
pub struct EscapePath {
    waypoints: Vec<Point>,
    ray: Point,
}

impl EscapePath {
    pub fn new(waypoints: Vec<Point>, ray: Point) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidGeometry("escape path needs a start point".into()));
        }
        let n = ray.norm();
        if !(n > 0.0) {
            return Err(Error::InvalidGeometry("escape ray direction must be nonzero".into()));
        }
        let path = Self {
            waypoints,
            ray: ray / n,
        };
        path.check_injective()?;
        Ok(path)
    }

    fn check_injective(&self) -> Result<()> {
        let segs: Vec<Segment> = self
            .waypoints
            .windows(2)
            .map(|w| Segment::new(w[0], w[1]))
            .collect::<Result<_>>()?;
        for i in 0..segs.len() {
            for j in (i + 2)..segs.len() {
                if segments_intersect(&segs[i], &segs[j], BOUNDARY_TOL) {
                    return Err(Error::InvalidGeometry(format!(
                        "escape path pieces {i} and {j} intersect"
                    )));
                }
            }
        }
        // Ray against all pieces except the last one (which it touches).
        let last = *self.waypoints.last().unwrap();
        let start = last + self.ray * 1e-9;
        for (i, s) in segs.iter().enumerate() {
            if i + 1 == segs.len() {
                if cross(&(s.b - s.a), &self.ray).abs() <= 1e-14
                    && (s.b - s.a).dot(&self.ray) < 0.0
                {
                    return Err(Error::InvalidGeometry("escape ray doubles back".into()));
                }
                continue;
            }
            let r = s.b - s.a;
            if let Some((t, u)) = line_line_parameters(&start, &self.ray, &s.a, &r) {
                if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
                    return Err(Error::InvalidGeometry(format!(
                        "escape ray crosses piece {i}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn waypoints(&self) -> &[Point] {
        &self.waypoints
    }

    pub fn ray(&self) -> Point {
        self.ray
    }

    pub fn start(&self) -> Point {
        self.waypoints[0]
    }

    /// Parameter at which the final ray begins.
    pub fn ray_start(&self) -> f64 {
        (self.waypoints.len() - 1) as f64
    }

    pub fn point_at(&self, t: f64) -> Point {
        let m = self.waypoints.len() - 1;
        if t >= m as f64 {
            return self.waypoints[m] + self.ray * (t - m as f64);
        }
        let i = t.max(0.0).floor() as usize;
        let s = t - i as f64;
        self.waypoints[i] + (self.waypoints[i + 1] - self.waypoints[i]) * s
    }

    /// All parameters t at which the path meets the closed segment `seg`.
    pub fn intersections(&self, seg: &Segment) -> Vec<f64> {
        let mut out = Vec::new();
        let r = seg.b - seg.a;
        let eu = BOUNDARY_TOL / r.norm();
        let m = self.waypoints.len() - 1;
        for i in 0..m {
            let p = self.waypoints[i];
            let d = self.waypoints[i + 1] - p;
            if let Some((s, u)) = line_line_parameters(&p, &d, &seg.a, &r) {
                let es = BOUNDARY_TOL / d.norm();
                if s >= -es && s <= 1.0 + es && u >= -eu && u <= 1.0 + eu {
                    out.push(i as f64 + s.clamp(0.0, 1.0));
                }
            }
        }
        let p = self.waypoints[m];
        if let Some((s, u)) = line_line_parameters(&p, &self.ray, &seg.a, &r) {
            if s >= -BOUNDARY_TOL && u >= -eu && u <= 1.0 + eu {
                out.push(m as f64 + s.max(0.0));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn reflect_point_examples() {
        let axis = Line::horizontal_axis();
        assert_eq!(reflect_point(&axis, &pt(1.0, 2.0)), pt(1.0, -2.0));
        assert_eq!(reflect_point(&axis, &pt(3.0, 0.0)), pt(3.0, 0.0));
        let diag = Line::new(pt(0.0, 0.0), pt(1.0, 1.0)).unwrap();
        let r = reflect_point(&diag, &pt(1.0, 0.0));
        assert!((r - pt(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn reflect_polygon_examples() {
        let axis = Line::horizontal_axis();
        let r = reflect_polygon(&axis, &unit_square());
        assert!(r.area() > 0.0);
        let (lo, hi) = r.bounding_box();
        assert!((lo - pt(0.0, -1.0)).norm() < 1e-15 && (hi - pt(1.0, 0.0)).norm() < 1e-15);
        let twice = reflect_polygon(&axis, &r);
        for v in unit_square().vertices() {
            assert!(twice.vertices().iter().any(|w| (w - v).norm() < 1e-12));
        }
        let tri = Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0)]).unwrap();
        let rt = reflect_polygon(&axis, &tri);
        assert!(rt.area() > 0.0);
        for v in [pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, -1.0)] {
            assert!(rt.vertices().iter().any(|w| (w - v).norm() < 1e-15));
        }
    }

    #[test]
    fn reflected_bc_follows_edges() {
        let bc = vec![
            EdgeBc::Dirichlet,
            EdgeBc::Neumann,
            EdgeBc::Robin { lambda: Complex64::new(2.0, 0.0) },
            EdgeBc::Impedance,
        ];
        let sq = Polygon::with_bc(
            vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)],
            bc,
        )
        .unwrap();
        let axis = Line::new(pt(0.0, 0.0), pt(1.0, 0.0)).unwrap();
        let r = sq.reflect(&axis);
        for i in 0..4 {
            let e = sq.edge(i);
            let (a, b) = (axis.reflect(&e.a), axis.reflect(&e.b));
            let j = (0..4)
                .find(|&j| {
                    let f = r.edge(j);
                    (f.a - b).norm() < 1e-14 && (f.b - a).norm() < 1e-14
                })
                .expect("reflected edge present with reversed orientation");
            assert_eq!(r.edge_bc(j), sq.edge_bc(i));
        }
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let bc = vec![EdgeBc::Dirichlet, EdgeBc::Neumann, EdgeBc::Impedance];
        let cw = vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(1.0, 0.0)];
        let p = Polygon::with_bc(cw.clone(), bc.clone()).unwrap();
        assert!(p.area() > 0.0);
        // The Dirichlet edge (0,0)-(0,1) keeps its tag.
        let j = (0..3)
            .find(|&j| {
                let e = p.edge(j);
                (e.a - pt(0.0, 1.0)).norm() < 1e-15 && (e.b - pt(0.0, 0.0)).norm() < 1e-15
            })
            .unwrap();
        assert_eq!(p.edge_bc(j), EdgeBc::Dirichlet);
    }

    #[test]
    fn containment_examples() {
        let sq = unit_square();
        assert_eq!(polygon_contains(&sq, &pt(0.5, 0.5)), Ok(true));
        assert_eq!(polygon_contains(&sq, &pt(2.0, 2.0)), Ok(false));
        assert!(polygon_contains(&sq, &pt(1.0, 0.5)).is_err());
        let l = Polygon::new(vec![
            pt(0.0, 0.0),
            pt(2.0, 0.0),
            pt(2.0, 1.0),
            pt(1.0, 1.0),
            pt(1.0, 2.0),
            pt(0.0, 2.0),
        ])
        .unwrap();
        assert_eq!(polygon_contains(&l, &pt(1.5, 1.5)), Ok(false));
        assert_eq!(polygon_contains(&l, &pt(0.5, 1.5)), Ok(true));
    }

    #[test]
    fn normals_point_outward() {
        let sq = unit_square();
        for i in 0..4 {
            let e = sq.edge(i);
            let n = sq.edge_normal(i);
            assert!(n.dot(&e.direction()).abs() < 1e-15);
            let probe = e.midpoint() + n * 1e-3;
            assert_eq!(sq.classify(&probe), Containment::Outside);
        }
    }

    #[test]
    fn invalid_polygons_rejected() {
        assert!(Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)]).is_err());
        assert!(Polygon::new(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(2.0, 0.0)]).is_err());
        let bowtie = vec![pt(0.0, 0.0), pt(1.0, 1.0), pt(1.0, 0.0), pt(0.0, 1.0)];
        assert!(Polygon::new(bowtie).is_err());
    }

    #[test]
    fn extension_classification() {
        let sq = unit_square();
        let above = Segment::new(pt(0.0, 2.0), pt(1.0, 2.0)).unwrap();
        assert_eq!(
            segment_extension_classification(&above, std::slice::from_ref(&sq)).unwrap(),
            ExtensionClass::FullLine
        );
        let left = Segment::new(pt(-3.0, 0.5), pt(-2.0, 0.5)).unwrap();
        assert_eq!(
            segment_extension_classification(&left, std::slice::from_ref(&sq)).unwrap(),
            ExtensionClass::HalfLine(pt(-1.0, 0.0))
        );
        let between = Segment::new(pt(1.5, 0.5), pt(2.5, 0.5)).unwrap();
        let other = Polygon::rectangle(3.0, 0.0, 4.0, 1.0).unwrap();
        assert_eq!(
            segment_extension_classification(&between, &[sq, other]).unwrap(),
            ExtensionClass::Blocked
        );
    }

    #[test]
    fn frame_round_trip() {
        let line = Line::new(pt(1.0, 2.0), pt(1.0, 3.0)).unwrap();
        let side = pt(-5.0, 0.0);
        let f = Frame::for_line(&line, &side).unwrap();
        assert!(f.to_local(&side).y > 0.0);
        let p = pt(0.3, -0.7);
        assert!((f.to_world(&f.to_local(&p)) - p).norm() < 1e-14);
        assert!(f.to_local(&line.point_at(2.5)).y.abs() < 1e-14);
    }

    #[test]
    fn sector_indices() {
        let s = Sector::new(pt(0.0, 0.0), 0.0, PI / 2.0).unwrap();
        assert_eq!(s.sector_index(&pt(1.0, 1.0)).unwrap(), 0);
        assert_eq!(s.sector_index(&pt(-1.0, 1.0)).unwrap(), 1);
        assert_eq!(s.sector_index(&pt(1.0, -1.0)).unwrap(), -1);
        assert!(Sector::new(pt(0.0, 0.0), 0.0, 2.0).is_err());
    }

    #[test]
    fn escape_path_intersections() {
        let g = EscapePath::new(vec![pt(0.0, 0.0), pt(0.0, 1.0)], pt(1.0, 0.0)).unwrap();
        let seg = Segment::new(pt(2.0, -1.0), pt(2.0, 5.0)).unwrap();
        let ts = g.intersections(&seg);
        assert_eq!(ts.len(), 1);
        assert!((ts[0] - 3.0).abs() < 1e-14);
        assert!((g.point_at(ts[0]) - pt(2.0, 1.0)).norm() < 1e-14);
        assert!(EscapePath::new(vec![pt(0.0, 0.0), pt(1.0, 0.0)], pt(-1.0, 0.0)).is_err());
    }

    #[test]
    fn triangulation_covers_area() {
        let l = Polygon::new(vec![
            pt(0.0, 0.0),
            pt(2.0, 0.0),
            pt(2.0, 1.0),
            pt(1.0, 1.0),
            pt(1.0, 2.0),
            pt(0.0, 2.0),
        ])
        .unwrap();
        let v = l.vertices();
        let total: f64 = l
            .triangulate()
            .iter()
            .map(|t| cross(&(v[t[1]] - v[t[0]]), &(v[t[2]] - v[t[0]])) / 2.0)
            .sum();
        assert!((total - l.area()).abs() < 1e-14);
    }

    #[test]
    fn polygon_json_round_trip() {
        let text = r#"{"vertices": [[0,0],[1,0],[1,1],[0,1]],
            "bc": [{"type":"robin","lambda":1.5},{"type":"dirichlet"},
                   {"type":"neumann"},{"type":"robin","lambda":[1.0,0.5]}]}"#;
        let p: Polygon = serde_json::from_str(text).unwrap();
        assert_eq!(p.edge_bc(0), EdgeBc::Robin { lambda: Complex64::new(1.5, 0.0) });
        assert_eq!(p.edge_bc(3), EdgeBc::Robin { lambda: Complex64::new(1.0, 0.5) });
        let back: Polygon = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
