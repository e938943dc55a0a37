//! Episodes: instruction, start pose, goal and reference path, plus a
//! seeded generator of synthetic episodes over any map with labeled objects.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{point_polyline_distance, polyline_length, project_param, wrap_pi, Point, PI, TAU};
use crate::visibility::VisibilityGraph;
use crate::world::{Pose2D, WorldMap};

/// Endpoint tolerance when matching a reference path to start and goal.
const ENDPOINT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EpisodeError {
    #[error("episode {id}: {reason}")]
    InvariantViolation { id: String, reason: String },
    #[error("duplicate episode id {0}")]
    DuplicateId(String),
    #[error("could not place episode {index} after {attempts} attempts")]
    Generation { index: usize, attempts: usize },
    #[error("map needs at least 2 labeled objects, found {0}")]
    TooFewObjects(usize),
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Episode {
    pub id: String,
    pub instruction: String,
    pub start: Pose2D,
    pub goal: Point,
    pub reference_path: Vec<Point>,
    pub success_radius: f64,
}

impl Episode {
    pub fn validate(&self, map: &WorldMap, radius: f64) -> Result<(), EpisodeError> {
        let fail = |reason: &str| {
            Err(EpisodeError::InvariantViolation { id: self.id.clone(), reason: reason.to_string() })
        };
        if self.id.trim().is_empty() {
            return fail("empty id");
        }
        if self.instruction.trim().is_empty() {
            return fail("empty instruction");
        }
        if !(self.success_radius > 0.0) || !self.success_radius.is_finite() {
            return fail("success_radius must be positive");
        }
        let (Some(first), Some(last)) = (self.reference_path.first(), self.reference_path.last()) else {
            return fail("empty reference_path");
        };
        if !self.start.x.is_finite() || !self.start.y.is_finite() || !self.start.heading.is_finite() {
            return fail("non-finite start pose");
        }
        if first.dist(self.start.position()) > ENDPOINT_TOLERANCE {
            return fail("reference_path does not start at the start position");
        }
        if last.dist(self.goal) > ENDPOINT_TOLERANCE {
            return fail("reference_path does not end at the goal");
        }
        if !map.is_free(self.start.position(), radius) {
            return fail("start position is not collision free");
        }
        for (i, w) in self.reference_path.windows(2).enumerate() {
            if !map.segment_clear(w[0], w[1], radius) {
                return fail(&format!("reference_path segment {i} is blocked"));
            }
        }
        Ok(())
    }

    pub fn reference_length(&self) -> f64 {
        polyline_length(&self.reference_path)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeSet {
    pub map_ref: String,
    pub episodes: Vec<Episode>,
}

impl EpisodeSet {
    pub fn validate(&self, map: &WorldMap, radius: f64) -> Result<(), EpisodeError> {
        let mut seen = BTreeSet::new();
        for ep in &self.episodes {
            if !seen.insert(ep.id.as_str()) {
                return Err(EpisodeError::DuplicateId(ep.id.clone()));
            }
            ep.validate(map, radius)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticConfig {
    pub map_ref: String,
    pub agent_radius: f64,
    pub success_radius: f64,
    pub min_geodesic: f64,
    pub max_geodesic: f64,
    pub attempts_per_episode: usize,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            map_ref: String::from("demo"),
            agent_radius: crate::AGENT_RADIUS,
            success_radius: crate::SUCCESS_RADIUS,
            min_geodesic: 3.0,
            max_geodesic: 14.0,
            attempts_per_episode: 2000,
        }
    }
}

/// Distance along `path` of the point closest to `p`.
fn arc_position(p: Point, path: &[Point]) -> f64 {
    let mut best = (f64::INFINITY, 0.0);
    let mut walked = 0.0;
    for w in path.windows(2) {
        let t = project_param(p, w[0], w[1]);
        let q = w[0].lerp(w[1], t);
        let d = p.dist(q);
        let len = w[0].dist(w[1]);
        if d < best.0 {
            best = (d, walked + t * len);
        }
        walked += len;
    }
    best.1
}

fn turn_word(angle: f64) -> &'static str {
    if angle > 0.0 {
        "turn left"
    } else {
        "turn right"
    }
}

const TURN_THRESHOLD: f64 = PI / 6.0;

fn compose_instruction(
    rng: &mut ChaCha8Rng,
    map: &WorldMap,
    heading: f64,
    path: &[Point],
    goal_object: usize,
) -> String {
    let first_leg = wrap_pi((path[1] - path[0]).angle() - heading);
    let opening = if first_leg.abs() < TURN_THRESHOLD {
        "walk forward"
    } else if first_leg.abs() > 5.0 * PI / 6.0 {
        "turn around"
    } else {
        turn_word(first_leg)
    };

    let total = polyline_length(path);
    let mut events: Vec<(f64, String)> = Vec::new();
    let mut walked = 0.0;
    for k in 1..path.len().saturating_sub(1) {
        walked += path[k - 1].dist(path[k]);
        let turn = wrap_pi((path[k + 1] - path[k]).angle() - (path[k] - path[k - 1]).angle());
        if turn.abs() > TURN_THRESHOLD {
            events.push((walked, turn_word(turn).to_string()));
        }
    }
    for (i, obj) in map.objects().iter().enumerate() {
        if i == goal_object || point_polyline_distance(obj.position, path) > 2.0 {
            continue;
        }
        let s = arc_position(obj.position, path);
        if s > 0.5 && s < total - 0.5 {
            events.push((s, format!("walk past the {}", obj.label)));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let clauses_wanted = rng.random_range(2..=4usize);
    let mut clauses: Vec<String> = Vec::new();
    clauses.push(opening.to_string());
    clauses.extend(events.into_iter().take(clauses_wanted - 2).map(|e| e.1));
    clauses.push(format!("stop near the {}", map.objects()[goal_object].label));

    let mut text = clauses.join(", then ");
    if let Some(first) = text.get(..1) {
        let upper = first.to_uppercase();
        text.replace_range(..1, &upper);
    }
    text.push('.');
    text
}

/// Deterministic synthetic episodes: the goal is placed near a labeled
/// object, the reference path is the geodesic from start to goal, and the
/// instruction names landmarks along that path.
pub fn generate_synthetic(
    map: &WorldMap,
    seed: u64,
    n: usize,
    cfg: &SyntheticConfig,
) -> Result<EpisodeSet, EpisodeError> {
    let mut set = EpisodeSet { map_ref: cfg.map_ref.clone(), episodes: Vec::with_capacity(n) };
    if n == 0 {
        return Ok(set);
    }
    let objects = map.objects();
    if objects.len() < 2 {
        return Err(EpisodeError::TooFewObjects(objects.len()));
    }
    let graph = VisibilityGraph::new(map, cfg.agent_radius);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = map.bounds();
    let r = cfg.agent_radius;

    for index in 0..n {
        let mut placed = None;
        for _ in 0..cfg.attempts_per_episode {
            let goal_object = rng.random_range(0..objects.len());
            let anchor = objects[goal_object].position;
            let offset = Point::polar(rng.random_range(0.0..TAU), rng.random_range(0.5..1.5));
            let goal = anchor + offset;
            if !map.is_free(goal, r) {
                continue;
            }
            match map.raycast(goal, (anchor - goal).angle()) {
                Ok(free) if free >= offset.norm() - 1e-6 => {}
                _ => continue,
            }
            let start = Point::new(
                rng.random_range(b.min_x + r..b.max_x - r),
                rng.random_range(b.min_y + r..b.max_y - r),
            );
            let heading = rng.random_range(0.0..TAU);
            if !map.is_free(start, r) {
                continue;
            }
            let Ok(path) = graph.shortest_path(map, start, goal) else { continue };
            if path.length < cfg.min_geodesic || path.length > cfg.max_geodesic {
                continue;
            }
            let instruction = compose_instruction(&mut rng, map, heading, &path.points, goal_object);
            placed = Some(Episode {
                id: format!("syn-{seed}-{index:03}"),
                instruction,
                start: Pose2D::new(start.x, start.y, heading),
                goal,
                reference_path: path.points,
                success_radius: cfg.success_radius,
            });
            break;
        }
        match placed {
            Some(ep) => set.episodes.push(ep),
            None => return Err(EpisodeError::Generation { index, attempts: cfg.attempts_per_episode }),
        }
    }
    Ok(set)
}
