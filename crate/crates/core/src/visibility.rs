//! Shortest collision-free paths for a disc agent via a visibility graph.
//!
//! Every convex obstacle corner contributes nodes on a small polygon
//! circumscribing the clearance arc around it: the corner is offset outward
//! so that straight segments between neighbouring nodes keep the full
//! `radius + 1 mm` clearance from both incident edges. Reflex corners never
//! lie on a shortest path and contribute nothing.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::geom::{Point, PI};
use crate::world::{WorldError, WorldMap};

/// Extra clearance added to the agent radius when placing graph nodes.
pub const NODE_MARGIN: f64 = 1e-3;

/// Largest arc (radians) covered by one node around a convex corner.
const MAX_NODE_ARC: f64 = PI / 4.0;

#[derive(Clone, Debug)]
pub struct VisibilityGraph {
    radius: f64,
    nodes: Vec<Point>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicPath {
    pub length: f64,
    pub points: Vec<Point>,
}

#[derive(Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        other.cost.total_cmp(&self.cost).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn corner_nodes(map: &WorldMap, radius: f64) -> Vec<Point> {
    let clearance = radius + NODE_MARGIN;
    let mut nodes = Vec::new();
    for obstacle in map.obstacles() {
        let v = obstacle.vertices();
        let n = v.len();
        let ccw = crate::geom::signed_area2(v) > 0.0;
        for i in 0..n {
            let (prev, cur, next) = (v[(i + n - 1) % n], v[i], v[(i + 1) % n]);
            let (e1, e2) = (cur - prev, next - cur);
            let turn = e1.cross(e2);
            let convex = if ccw { turn > 0.0 } else { turn < 0.0 };
            if !convex {
                continue;
            }
            // outward normal of the incoming edge
            let normal = if ccw { Point::new(e1.y, -e1.x) } else { Point::new(-e1.y, e1.x) };
            let start = normal.angle();
            let sweep = libm::atan2(libm::fabs(turn), e1.dot(e2));
            let signed = if ccw { sweep } else { -sweep };
            let pieces = libm::ceil(sweep / MAX_NODE_ARC).max(1.0);
            let reach = clearance / libm::cos(sweep / (2.0 * pieces));
            for k in 0..pieces as usize {
                let theta = start + signed * (k as f64 + 0.5) / pieces;
                let node = cur + Point::polar(theta, reach);
                if map.is_free(node, radius) {
                    nodes.push(node);
                }
            }
        }
    }
    nodes
}

impl VisibilityGraph {
    pub fn new(map: &WorldMap, radius: f64) -> Self {
        let nodes = corner_nodes(map, radius);
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for i in 0..nodes.len() {
            for j in (i + 1)..nodes.len() {
                if map.segment_clear(nodes[i], nodes[j], radius) {
                    let w = nodes[i].dist(nodes[j]);
                    adjacency[i].push((j, w));
                    adjacency[j].push((i, w));
                }
            }
        }
        Self { radius, nodes, adjacency }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Shortest collision-free path from `p` to `q`. `map` must be the map
    /// the graph was built from.
    pub fn shortest_path(&self, map: &WorldMap, p: Point, q: Point) -> Result<GeodesicPath, WorldError> {
        if p == q {
            return Ok(GeodesicPath { length: 0.0, points: vec![p] });
        }
        let r = self.radius;
        if map.segment_clear(p, q, r) {
            return Ok(GeodesicPath { length: p.dist(q), points: vec![p, q] });
        }
        if !map.is_free(p, r) || !map.is_free(q, r) {
            return Err(WorldError::Unreachable);
        }
        let n = self.nodes.len();
        let (src, dst) = (n, n + 1);
        let to_dst: Vec<Option<f64>> = self
            .nodes
            .iter()
            .map(|&v| map.segment_clear(v, q, r).then(|| v.dist(q)))
            .collect();
        let mut cost = vec![f64::INFINITY; n + 2];
        let mut parent = vec![usize::MAX; n + 2];
        let mut heap = BinaryHeap::new();
        for (i, &v) in self.nodes.iter().enumerate() {
            if map.segment_clear(p, v, r) {
                cost[i] = p.dist(v);
                parent[i] = src;
                heap.push(Frontier { cost: cost[i], node: i });
            }
        }
        cost[src] = 0.0;
        while let Some(Frontier { cost: c, node }) = heap.pop() {
            if c > cost[node] {
                continue;
            }
            if node == dst {
                break;
            }
            let relax = |next: usize, w: f64, cost: &mut Vec<f64>, parent: &mut Vec<usize>, heap: &mut BinaryHeap<Frontier>| {
                let nc = c + w;
                if nc < cost[next] {
                    cost[next] = nc;
                    parent[next] = node;
                    heap.push(Frontier { cost: nc, node: next });
                }
            };
            for &(next, w) in &self.adjacency[node] {
                relax(next, w, &mut cost, &mut parent, &mut heap);
            }
            if let Some(w) = to_dst[node] {
                relax(dst, w, &mut cost, &mut parent, &mut heap);
            }
        }
        if !cost[dst].is_finite() {
            return Err(WorldError::Unreachable);
        }
        let mut points = vec![q];
        let mut at = parent[dst];
        while at != src {
            points.push(self.nodes[at]);
            at = parent[at];
        }
        points.push(p);
        points.reverse();
        Ok(GeodesicPath { length: cost[dst], points })
    }

    pub fn distance(&self, map: &WorldMap, p: Point, q: Point) -> Result<f64, WorldError> {
        self.shortest_path(map, p, q).map(|path| path.length)
    }
}

/// Builds a graph for a single query. Reuse a [`VisibilityGraph`] when
/// querying the same map repeatedly.
pub fn geodesic_distance(map: &WorldMap, p: Point, q: Point, radius: f64) -> Result<f64, WorldError> {
    VisibilityGraph::new(map, radius).distance(map, p, q)
}
