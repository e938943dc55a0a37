//! The continuous environment: a rectangular floor plan with polygonal
//! obstacles and labeled objects.
//!
//! The map boundary behaves like a wall for every query. A [`WorldMap`] is
//! immutable once built, so all queries take `&self` and can be shared
//! across threads.

use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::{
    contact_params, point_segment_distance, ray_segment_hit, segment_segment_distance,
    segments_cross_properly, signed_area2, wrap_two_pi, Point, EPS,
};
use crate::waypoint::Waypoint;
use crate::MAX_RANGE;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("ray origin ({x}, {y}) lies inside an obstacle or outside the map")]
    InvalidOrigin { x: f64, y: f64 },
    #[error("no collision-free path between the given positions")]
    Unreachable,
    #[error("invalid obstacle {index}: {reason}")]
    InvalidObstacle { index: usize, reason: &'static str },
    #[error("invalid object {label:?}: {reason}")]
    InvalidObject { label: String, reason: &'static str },
    #[error("invalid map bounds")]
    InvalidBounds,
}

/// Agent pose. `heading` is kept in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading: wrap_two_pi(heading) }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        Self { min_x, min_y, max_x, max_y }
    }

    /// Square of side `size` centered on the origin.
    pub fn centered(size: f64) -> Self {
        let h = size / 2.0;
        Self::new(-h, -h, h, h)
    }

    /// True if `p` is at least `margin` away from every side (inside).
    pub fn contains_with_margin(&self, p: Point, margin: f64) -> bool {
        p.x >= self.min_x + margin - EPS
            && p.x <= self.max_x - margin + EPS
            && p.y >= self.min_y + margin - EPS
            && p.y <= self.max_y - margin + EPS
    }

    pub fn contains(&self, p: Point) -> bool {
        self.contains_with_margin(p, 0.0)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            Point::new(self.min_x, self.min_y),
            Point::new(self.max_x, self.min_y),
            Point::new(self.max_x, self.max_y),
            Point::new(self.min_x, self.max_y),
        ]
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// A simple polygon; the last vertex connects back to the first.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ObstaclePolygon {
    vertices: Vec<Point>,
}

impl ObstaclePolygon {
    pub fn new(vertices: Vec<Point>) -> Result<Self, &'static str> {
        let n = vertices.len();
        if n < 3 {
            return Err("fewer than 3 vertices");
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err("non-finite vertex");
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            if a.dist(b) <= EPS {
                return Err("repeated vertex");
            }
            for j in (i + 2)..n {
                if i == 0 && j == n - 1 {
                    continue;
                }
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                if segment_segment_distance(a, b, c, d) <= EPS {
                    return Err("self-intersecting");
                }
            }
        }
        if libm::fabs(signed_area2(&vertices)) <= EPS {
            return Err("zero area");
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle helper.
    pub fn rect(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self, &'static str> {
        Self::new(alloc::vec![
            Point::new(min_x, min_y),
            Point::new(max_x, min_y),
            Point::new(max_x, max_y),
            Point::new(min_x, max_y),
        ])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Strict interior test; points on the boundary are outside.
    pub fn contains(&self, p: Point) -> bool {
        if self.boundary_distance(p) <= EPS {
            return false;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneObject {
    pub label: String,
    pub position: Point,
}

impl SceneObject {
    pub fn new(label: impl Into<String>, x: f64, y: f64) -> Self {
        Self { label: label.into(), position: Point::new(x, y) }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct WorldMap {
    bounds: Bounds,
    obstacles: Vec<ObstaclePolygon>,
    objects: Vec<SceneObject>,
    max_range: f64,
}

impl WorldMap {
    pub fn new(
        bounds: Bounds,
        obstacles: Vec<ObstaclePolygon>,
        objects: Vec<SceneObject>,
    ) -> Result<Self, WorldError> {
        let finite = [bounds.min_x, bounds.min_y, bounds.max_x, bounds.max_y]
            .iter()
            .all(|v| v.is_finite());
        if !finite || bounds.width() <= 0.0 || bounds.height() <= 0.0 {
            return Err(WorldError::InvalidBounds);
        }
        for (index, obstacle) in obstacles.iter().enumerate() {
            if !obstacle.vertices().iter().all(|v| bounds.contains(*v)) {
                return Err(WorldError::InvalidObstacle { index, reason: "vertex outside bounds" });
            }
        }
        for object in &objects {
            let reason = if object.label.trim().is_empty() {
                Some("empty label")
            } else if !object.position.is_finite() || !bounds.contains(object.position) {
                Some("position outside bounds")
            } else if obstacles.iter().any(|o| o.contains(object.position)) {
                Some("position inside an obstacle")
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(WorldError::InvalidObject { label: object.label.clone(), reason });
            }
        }
        Ok(Self { bounds, obstacles, objects, max_range: MAX_RANGE })
    }

    /// Map with no obstacles and no objects.
    pub fn empty(bounds: Bounds) -> Self {
        Self::new(bounds, Vec::new(), Vec::new()).expect("empty map with valid bounds")
    }

    pub fn with_max_range(mut self, max_range: f64) -> Self {
        self.max_range = max_range;
        self
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn obstacles(&self) -> &[ObstaclePolygon] {
        &self.obstacles
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn max_range(&self) -> f64 {
        self.max_range
    }

    pub fn inside_obstacle(&self, p: Point) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    /// Distance from `origin` to the first obstacle edge or map side along
    /// `angle`, capped at the sensing range.
    pub fn raycast(&self, origin: Point, angle: f64) -> Result<f64, WorldError> {
        if !origin.is_finite() || !self.bounds.contains(origin) || self.inside_obstacle(origin) {
            return Err(WorldError::InvalidOrigin { x: origin.x, y: origin.y });
        }
        let dir = Point::polar(angle, 1.0);
        let corners = self.bounds.corners();
        let sides = (0..4).map(|i| (corners[i], corners[(i + 1) % 4]));
        let hit = self
            .obstacles
            .iter()
            .flat_map(|o| o.edges())
            .chain(sides)
            .filter_map(|(a, b)| ray_segment_hit(origin, dir, a, b))
            .fold(self.max_range, f64::min);
        Ok(hit)
    }

    /// Whether a disc of `radius` can sweep from `p` to `q` without touching
    /// an obstacle or leaving the map.
    pub fn segment_clear(&self, p: Point, q: Point, radius: f64) -> bool {
        if !self.bounds.contains_with_margin(p, radius) || !self.bounds.contains_with_margin(q, radius) {
            return false;
        }
        let mut contacts: Vec<f64> = Vec::new();
        for obstacle in &self.obstacles {
            if obstacle.contains(p) || obstacle.contains(q) {
                return false;
            }
            contacts.clear();
            for (a, b) in obstacle.edges() {
                let d = segment_segment_distance(p, q, a, b);
                if d < radius - EPS {
                    return false;
                }
                if d <= EPS {
                    if segments_cross_properly(p, q, a, b) {
                        return false;
                    }
                    let (ts, n) = contact_params(p, q, a, b);
                    contacts.extend_from_slice(&ts[..n]);
                }
            }
            // Zero-radius sweeps may graze vertices; make sure no stretch
            // between consecutive contacts runs through the interior.
            if !contacts.is_empty() {
                contacts.push(0.0);
                contacts.push(1.0);
                contacts.sort_by(f64::total_cmp);
                for w in contacts.windows(2) {
                    if w[1] - w[0] > EPS && obstacle.contains(p.lerp(q, (w[0] + w[1]) / 2.0)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Whether a disc of `radius` centered at `p` is collision free.
    pub fn is_free(&self, p: Point, radius: f64) -> bool {
        self.segment_clear(p, p, radius)
    }

    /// Rotates by the waypoint angle and advances up to its distance,
    /// stopping where the swept disc would first touch an obstacle.
    pub fn move_along(&self, pose: Pose2D, waypoint: &Waypoint, radius: f64) -> Pose2D {
        let heading = wrap_two_pi(pose.heading + waypoint.angle);
        let start = pose.position();
        let dir = Point::polar(heading, 1.0);
        let target = |t: f64| start + dir * t;
        let requested = waypoint.distance.max(0.0);
        let travel = if self.segment_clear(start, target(requested), radius) {
            requested
        } else if !self.is_free(start, radius) {
            0.0
        } else {
            let (mut lo, mut hi) = (0.0, requested);
            for _ in 0..64 {
                let mid = (lo + hi) / 2.0;
                if self.segment_clear(start, target(mid), radius) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let end = target(travel);
        Pose2D::new(end.x, end.y, heading)
    }
}
