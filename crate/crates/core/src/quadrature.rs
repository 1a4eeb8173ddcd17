//! Gauss–Legendre rules, panel-doubling adaptive integration on intervals, and
//! refined tensor rules on triangles.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{cross, Point};

/// Largest cached Gauss–Legendre order.
pub const MAX_ORDER: usize = 128;

/// Nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Map to [a, b]: iterator of (node, weight).
    pub fn on(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let c = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached Gauss–Legendre rule of order `n` (1 ≤ n ≤ [`MAX_ORDER`]).
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static CACHE: [OnceLock<GaussRule>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    assert!((1..=MAX_ORDER).contains(&n), "Gauss–Legendre order {n} not supported");
    CACHE[n].get_or_init(|| GaussRule::compute(n))
}

/// Values that can be accumulated by a quadrature rule.
pub trait Integrand: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// Fixed-order rule on [a, b].
pub fn integrate_fixed<T: Integrand>(f: &impl Fn(f64) -> T, a: f64, b: f64, order: usize) -> T {
    gauss_legendre(order)
        .on(a, b)
        .fold(T::zero(), |acc, (x, w)| acc + f(x) * w)
}

/// Options for [`integrate_adaptive`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    /// Gauss–Legendre order per panel.
    pub order: usize,
    /// Convergence threshold on successive doublings (absolute plus relative).
    pub tol: f64,
    /// Upper bound on the number of nodes per interval.
    pub max_points: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            order: 32,
            tol: 1e-10,
            max_points: 1 << 14,
        }
    }
}

/// Integrate over [breaks[0], breaks[last]], treating each interval between
/// consecutive breakpoints separately: the number of equal panels is doubled
/// until successive composite values differ by less than
/// `tol·(1 + |value|)`.
pub fn integrate_adaptive<T: Integrand>(
    f: &impl Fn(f64) -> T,
    breaks: &[f64],
    opts: &AdaptiveOptions,
) -> Result<T> {
    let mut total = T::zero();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let mut panels = 1usize;
        let mut prev = integrate_fixed(f, a, b, opts.order);
        loop {
            panels *= 2;
            if panels * opts.order > opts.max_points {
                return Err(Error::Quadrature(format!(
                    "no convergence on [{a}, {b}] with {} nodes",
                    panels / 2 * opts.order
                )));
            }
            let h = (b - a) / panels as f64;
            let mut cur = T::zero();
            for p in 0..panels {
                let lo = a + h * p as f64;
                cur = cur + integrate_fixed(f, lo, lo + h, opts.order);
            }
            let diff = (cur - prev).magnitude();
            prev = cur;
            if diff <= opts.tol * (1.0 + cur.magnitude()) {
                break;
            }
        }
        total = total + prev;
    }
    Ok(total)
}

/// Breakpoints in [a, b] graded geometrically toward `s` so that panels next
/// to `s` have length about `scale` (the distance of a nearby singularity).
pub fn graded_breaks(a: f64, b: f64, s: f64, scale: f64) -> Vec<f64> {
    const RATIO: f64 = 0.2;
    let s = s.clamp(a, b);
    let scale = scale.max(1e-14 * (b - a).abs().max(1.0));
    let mut out = vec![a];
    let mut left = Vec::new();
    let mut d = s - a;
    while d > scale {
        d *= RATIO;
        left.push(s - d);
    }
    out.extend(left);
    out.push(s);
    let mut d = b - s;
    while d > scale {
        d *= RATIO;
        out.push(s + d);
    }
    out.push(b);
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * (b - a).abs().max(1e-300));
    out
}

/// Collapsed tensor Gauss rule on a triangle: (points, weights) with the
/// weights including the area Jacobian.
pub fn triangle_rule(tri: &[Point; 3], order: usize) -> Vec<(Point, f64)> {
    let rule = gauss_legendre(order);
    let [a, b, c] = *tri;
    let jac = cross(&(b - a), &(c - a)).abs();
    let mut out = Vec::with_capacity(order * order);
    for (xi, wx) in rule.on(0.0, 1.0) {
        for (eta, wy) in rule.on(0.0, 1.0) {
            let p = a + (b - a) * xi + (c - b) * (xi * eta);
            out.push((p, wx * wy * xi * jac));
        }
    }
    out
}

pub fn triangle_area(tri: &[Point; 3]) -> f64 {
    0.5 * cross(&(tri[1] - tri[0]), &(tri[2] - tri[0])).abs()
}

fn subdivide(tri: &[Point; 3]) -> [[Point; 3]; 4] {
    let [a, b, c] = *tri;
    let ab = (a + b) * 0.5;
    let bc = (b + c) * 0.5;
    let ca = (c + a) * 0.5;
    [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
}

/// Options for [`integrate_triangles`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubatureOptions {
    /// Tensor Gauss order per triangle.
    pub order: usize,
    /// Maximum refinement depth for triangles flagged by the refinement test.
    pub max_depth: usize,
    /// Absolute tolerance for the whole integral, distributed by area.
    pub tol: f64,
}

impl Default for CubatureOptions {
    fn default() -> Self {
        Self {
            order: 8,
            max_depth: 6,
            tol: 1e-9,
        }
    }
}

/// Integrate `f` over the union of `tris`. Triangles for which `needs_refine`
/// holds are split into four children as long as the children disagree with
/// their parent by more than the area share of the tolerance, up to
/// `max_depth` levels.
pub fn integrate_triangles<T: Integrand>(
    f: &impl Fn(&Point) -> T,
    tris: &[[Point; 3]],
    needs_refine: &impl Fn(&[Point; 3]) -> bool,
    opts: &CubatureOptions,
) -> T {
    let total_area: f64 = tris.iter().map(triangle_area).sum();
    let apply = |tri: &[Point; 3]| {
        triangle_rule(tri, opts.order)
            .into_iter()
            .fold(T::zero(), |acc, (p, w)| acc + f(&p) * w)
    };
    fn rec<T: Integrand>(
        tri: &[Point; 3],
        value: T,
        depth: usize,
        apply: &impl Fn(&[Point; 3]) -> T,
        needs_refine: &impl Fn(&[Point; 3]) -> bool,
        opts: &CubatureOptions,
        total_area: f64,
    ) -> T {
        if depth >= opts.max_depth || !needs_refine(tri) {
            return value;
        }
        let kids = subdivide(tri);
        let vals: Vec<T> = kids.iter().map(apply).collect();
        let sum = vals.iter().fold(T::zero(), |a, v| a + *v);
        let local_tol = opts.tol * triangle_area(tri) / total_area;
        if (sum - value).magnitude() <= local_tol {
            return sum;
        }
        kids.iter().zip(vals).fold(T::zero(), |acc, (k, v)| {
            acc + rec(k, v, depth + 1, apply, needs_refine, opts, total_area)
        })
    }
    tris.iter().fold(T::zero(), |acc, t| {
        let v = apply(t);
        acc + rec(t, v, 0, &apply, needs_refine, opts, total_area)
    })
}
