//! Ground-truth navigator that answers every stage from the map and the
//! episode's reference path. Serves as the upper-bound baseline and as a
//! network-free backend for integration tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::episodes::Episode;
use crate::geom::{polyline_length, Point};
use crate::llm::{ChatRequest, Stage, StepContext};
use crate::navigator::heuristic_decomposition;
use crate::visibility::VisibilityGraph;
use crate::waypoint::Waypoint;
use crate::world::{Pose2D, WorldMap};

/// A reference vertex closer than this counts as visited.
pub const VERTEX_REACHED: f64 = 1.0;

/// Slack when testing whether a vertex lies on a shortest path.
pub const ON_PATH_TOLERANCE: f64 = 0.05;

/// The first reference vertex (after the start) that is still ahead: farther
/// than [`VERTEX_REACHED`] and lying on a shortest path from the agent to
/// the goal. Falls back to the goal once every vertex is behind.
pub fn next_reference_target(
    map: &WorldMap,
    graph: &VisibilityGraph,
    episode: &Episode,
    pose: &Pose2D,
) -> Point {
    let path = &episode.reference_path;
    let here = pose.position();
    let Ok(to_goal) = graph.distance(map, here, episode.goal) else {
        return episode.goal;
    };
    for i in 1..path.len().saturating_sub(1) {
        if here.dist(path[i]) <= VERTEX_REACHED {
            continue;
        }
        let Ok(to_vertex) = graph.distance(map, here, path[i]) else { continue };
        if to_vertex + polyline_length(&path[i..]) <= to_goal + ON_PATH_TOLERANCE {
            return path[i];
        }
    }
    episode.goal
}

pub fn oracle_decide(
    map: &WorldMap,
    graph: &VisibilityGraph,
    episode: &Episode,
    pose: &Pose2D,
    candidates: &[Waypoint],
    radius: f64,
) -> String {
    if pose.position().dist(episode.goal) <= episode.success_radius || candidates.is_empty() {
        return String::from("Final Answer: STOP");
    }
    let target = next_reference_target(map, graph, episode, pose);
    let mut best = (0usize, f64::INFINITY);
    for (i, c) in candidates.iter().enumerate() {
        let landing = map.move_along(*pose, c, radius).position();
        let cost = graph.distance(map, landing, target).unwrap_or(f64::INFINITY);
        if cost < best.1 {
            best = (i, cost);
        }
    }
    format!("Final Answer: {}", best.0)
}

/// Status lines marking the leading fraction of actions complete in
/// proportion to geodesic progress along the reference path.
pub fn oracle_progress(ctx: &StepContext<'_>) -> String {
    let total = ctx.episode.reference_length().max(1e-9);
    let here = ctx.pose.position();
    let left = ctx.graph.distance(ctx.map, here, ctx.episode.goal).unwrap_or(total);
    let done = if here.dist(ctx.episode.goal) <= ctx.success_radius {
        ctx.actions.len()
    } else {
        let frac = (1.0 - left / total).clamp(0.0, 1.0);
        libm::floor(frac * ctx.actions.len() as f64) as usize
    };
    ctx.actions
        .iter()
        .enumerate()
        .map(|(i, a)| format!("{a} - {}", if i < done { "COMPLETED" } else { "PENDING" }))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Numbered list of the rule-based decomposition of the instruction.
pub fn numbered(items: &[String]) -> String {
    items
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {}", i + 1, s))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Oracle answer for any stage.
pub fn oracle_respond(request: &ChatRequest<'_>) -> String {
    let ctx = &request.context;
    match request.stage {
        Stage::ComprehendActions => numbered(&heuristic_decomposition(&ctx.episode.instruction).actions),
        Stage::ComprehendLandmarks => numbered(&heuristic_decomposition(&ctx.episode.instruction).landmarks),
        Stage::Progress => oracle_progress(ctx),
        Stage::Decision => oracle_decide(ctx.map, ctx.graph, ctx.episode, &ctx.pose, ctx.candidates, ctx.agent_radius),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::PI;
    use crate::world::{Bounds, ObstaclePolygon};
    use alloc::vec;

    fn corridor() -> WorldMap {
        WorldMap::new(
            Bounds::new(-2.0, -3.0, 20.0, 3.0),
            vec![
                ObstaclePolygon::rect(-2.0, 0.6, 20.0, 3.0).unwrap(),
                ObstaclePolygon::rect(-2.0, -3.0, 20.0, -0.6).unwrap(),
            ],
            vec![],
        )
        .unwrap()
    }

    fn episode(goal: Point) -> Episode {
        Episode {
            id: String::from("c"),
            instruction: String::from("Walk forward, then stop at the end."),
            start: Pose2D::new(0.0, 0.0, 0.0),
            goal,
            reference_path: vec![Point::new(0.0, 0.0), goal],
            success_radius: 3.0,
        }
    }

    #[test]
    fn stops_near_goal() {
        let map = corridor();
        let g = VisibilityGraph::new(&map, 0.18);
        let ep = episode(Point::new(1.0, 0.0));
        let out = oracle_decide(&map, &g, &ep, &Pose2D::new(0.0, 0.0, 0.0), &[Waypoint::new(0.0, 1.0)], 0.18);
        assert_eq!(out, "Final Answer: STOP");
    }

    #[test]
    fn prefers_forward_in_corridor() {
        let map = corridor();
        let g = VisibilityGraph::new(&map, 0.18);
        let ep = episode(Point::new(15.0, 0.0));
        let cands = [Waypoint::new(PI, 2.0), Waypoint::new(0.0, 2.0)];
        let out = oracle_decide(&map, &g, &ep, &Pose2D::new(0.0, 0.0, 0.0), &cands, 0.18);
        assert_eq!(out, "Final Answer: 1");
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let map = corridor();
        let g = VisibilityGraph::new(&map, 0.18);
        let ep = episode(Point::new(15.0, 0.0));
        let cands = [Waypoint::new(0.0, 2.0), Waypoint::new(0.0, 2.0)];
        let out = oracle_decide(&map, &g, &ep, &Pose2D::new(0.0, 0.0, 0.0), &cands, 0.18);
        assert_eq!(out, "Final Answer: 0");
    }
}
