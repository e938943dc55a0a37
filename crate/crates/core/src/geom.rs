//! Planar primitives shared by the world model and the metrics.

use core::ops::{Add, Mul, Neg, Sub};

/// Tolerance for intersection and containment predicates.
pub const EPS: f64 = 1e-9;

pub const TAU: f64 = core::f64::consts::TAU;
pub const PI: f64 = core::f64::consts::PI;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` scaled by `r`.
    pub fn polar(angle: f64, r: f64) -> Self {
        Self::new(r * libm::cos(angle), r * libm::sin(angle))
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn angle(self) -> f64 {
        libm::atan2(self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(a: f64) -> f64 {
    if (0.0..TAU).contains(&a) {
        return a;
    }
    let r = a - TAU * libm::floor(a / TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let r = wrap_two_pi(a);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Parameter of the projection of `p` onto segment `ab`, clamped to `[0, 1]`.
pub fn project_param(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 0.0 {
        return 0.0;
    }
    ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let t = project_param(p, a, b);
    p.dist(a.lerp(b, t))
}

/// Orientation of `c` relative to the directed line `ab`: +1 left, -1 right, 0 collinear.
fn orient(a: Point, b: Point, c: Point) -> i8 {
    let v = (b - a).cross(c - a);
    let scale = (b - a).norm().max(1.0) * (c - a).norm().max(1.0);
    if v > EPS * scale {
        1
    } else if v < -EPS * scale {
        -1
    } else {
        0
    }
}

fn on_segment(p: Point, a: Point, b: Point) -> bool {
    point_segment_distance(p, a, b) <= EPS
}

/// True when the open interiors of `ab` and `cd` cross at a single point.
pub fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// True when the closed segments share at least one point.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    if segments_cross_properly(a, b, c, d) {
        return true;
    }
    on_segment(c, a, b) || on_segment(d, a, b) || on_segment(a, c, d) || on_segment(b, c, d)
}

pub fn segment_segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Distance along a ray (`origin + t * dir`, `dir` unit length) to segment `ab`.
pub fn ray_segment_hit(origin: Point, dir: Point, a: Point, b: Point) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    let ao = a - origin;
    if libm::fabs(denom) <= EPS * e.norm().max(1.0) {
        // Parallel: only a collinear overlap counts.
        if libm::fabs(ao.cross(dir)) > EPS * ao.norm().max(1.0) {
            return None;
        }
        let ta = ao.dot(dir);
        let tb = (b - origin).dot(dir);
        let (lo, hi) = if ta <= tb { (ta, tb) } else { (tb, ta) };
        if hi < -EPS {
            return None;
        }
        return Some(lo.max(0.0));
    }
    let t = ao.cross(e) / denom;
    let s = ao.cross(dir) / denom;
    if t >= -EPS && (-EPS..=1.0 + EPS).contains(&s) {
        Some(t.max(0.0))
    } else {
        None
    }
}

/// Parameters along `pq` where it touches segment `ab` (one value, or two for a
/// collinear overlap). Assumes the segments do intersect.
pub fn contact_params(p: Point, q: Point, a: Point, b: Point) -> ([f64; 2], usize) {
    let d = q - p;
    let e = b - a;
    let denom = d.cross(e);
    let len2 = d.dot(d);
    if len2 <= 0.0 {
        return ([0.0, 0.0], 1);
    }
    if libm::fabs(denom) <= EPS * d.norm().max(1.0) * e.norm().max(1.0) {
        let ta = ((a - p).dot(d) / len2).clamp(0.0, 1.0);
        let tb = ((b - p).dot(d) / len2).clamp(0.0, 1.0);
        return ([ta.min(tb), ta.max(tb)], 2);
    }
    let t = ((a - p).cross(e) / denom).clamp(0.0, 1.0);
    ([t, t], 1)
}

/// Twice the signed area; positive for counter-clockwise vertex order.
pub fn signed_area2(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum()
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| w[0].dist(w[1])).sum()
}

pub fn point_polyline_distance(p: Point, line: &[Point]) -> f64 {
    match line {
        [] => f64::INFINITY,
        [only] => p.dist(*only),
        _ => line
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}
