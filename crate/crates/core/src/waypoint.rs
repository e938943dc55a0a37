//! Candidate waypoint proposal.
//!
//! A geometric traversability heatmap over (heading sector × distance bin)
//! is smoothed across adjacent sectors and reduced to at most `k`
//! well-separated candidates with greedy non-maximum suppression.

use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{wrap_pi, Point, TAU};
use crate::world::{Pose2D, WorldMap};

/// A candidate move relative to the agent: `angle` in `(-π, π]` (positive is
/// counter-clockwise), `distance` in meters.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Waypoint {
    pub angle: f64,
    pub distance: f64,
}

impl Waypoint {
    pub fn new(angle: f64, distance: f64) -> Self {
        Self { angle: wrap_pi(angle), distance }
    }

    /// Absolute landing point if the move is unobstructed.
    pub fn target(&self, pose: &Pose2D) -> Point {
        pose.position() + Point::polar(pose.heading + self.angle, self.distance)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HeatmapConfig {
    pub sectors: usize,
    pub bins: usize,
    pub min_distance: f64,
    pub max_distance: f64,
    /// Suppression half-width in sectors.
    pub suppress_sectors: usize,
    /// Suppression half-width in meters.
    pub suppress_distance: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            sectors: 12,
            bins: 12,
            min_distance: 0.25,
            max_distance: 3.0,
            suppress_sectors: 1,
            suppress_distance: 0.5,
        }
    }
}

impl HeatmapConfig {
    pub fn sector_angle(&self, sector: usize) -> f64 {
        wrap_pi(TAU * sector as f64 / self.sectors as f64)
    }

    pub fn bin_distance(&self, bin: usize) -> f64 {
        if self.bins <= 1 {
            return self.max_distance;
        }
        let step = (self.max_distance - self.min_distance) / (self.bins - 1) as f64;
        self.min_distance + step * bin as f64
    }

    fn sector_gap(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b) % self.sectors;
        d.min(self.sectors - d)
    }

    /// Whether two bins fall inside each other's suppression neighbourhood.
    pub fn suppresses(&self, a: (usize, usize), b: (usize, usize)) -> bool {
        self.sector_gap(a.0, b.0) <= self.suppress_sectors
            && (self.bin_distance(a.1) - self.bin_distance(b.1)).abs() <= self.suppress_distance + 1e-9
    }
}

/// Scores in `[0, 1]` indexed by `(sector, bin)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Heatmap {
    config: HeatmapConfig,
    scores: Vec<f64>,
}

impl Heatmap {
    pub fn filled(config: HeatmapConfig, value: f64) -> Self {
        Self { config, scores: vec![value.clamp(0.0, 1.0); config.sectors * config.bins] }
    }

    pub fn config(&self) -> &HeatmapConfig {
        &self.config
    }

    pub fn sectors(&self) -> usize {
        self.config.sectors
    }

    pub fn bins(&self) -> usize {
        self.config.bins
    }

    pub fn get(&self, sector: usize, bin: usize) -> f64 {
        self.scores[sector * self.config.bins + bin]
    }

    pub fn set(&mut self, sector: usize, bin: usize, value: f64) {
        self.scores[sector * self.config.bins + bin] = value.clamp(0.0, 1.0);
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn waypoint(&self, sector: usize, bin: usize) -> Waypoint {
        Waypoint::new(self.config.sector_angle(sector), self.config.bin_distance(bin))
    }

    /// Elementwise product; used to mask smoothed scores with raw traversability.
    pub fn masked_by(&self, mask: &Heatmap) -> Heatmap {
        let scores = self.scores.iter().zip(&mask.scores).map(|(a, b)| a * b).collect();
        Heatmap { config: self.config, scores }
    }
}

/// 1 where the straight sweep from the agent to the bin center is clear.
pub fn build_heatmap(map: &WorldMap, pose: &Pose2D, radius: f64, config: HeatmapConfig) -> Heatmap {
    let mut heatmap = Heatmap::filled(config, 0.0);
    let origin = pose.position();
    for sector in 0..config.sectors {
        for bin in 0..config.bins {
            let target = heatmap.waypoint(sector, bin).target(pose);
            if map.segment_clear(origin, target, radius) {
                heatmap.set(sector, bin, 1.0);
            }
        }
    }
    heatmap
}

/// Circular mean over each bin and its two angular neighbours.
pub fn smooth_heatmap(h: &Heatmap) -> Heatmap {
    let a = h.sectors();
    let mut out = Heatmap::filled(h.config, 0.0);
    for sector in 0..a {
        let left = (sector + a - 1) % a;
        let right = (sector + 1) % a;
        for bin in 0..h.bins() {
            let mean = (h.get(left, bin) + h.get(sector, bin) + h.get(right, bin)) / 3.0;
            out.set(sector, bin, mean);
        }
    }
    out
}

/// Greedy non-maximum suppression. Ties prefer the farther bin, then the
/// lower sector index.
pub fn nms_select(h: &Heatmap, k: usize) -> Vec<Waypoint> {
    nms_select_grid(&h.config, &h.scores, k)
}

/// [`nms_select`] over a raw `sectors × bins` score grid (sector-major).
/// Only the ordering of scores matters, so any non-negative scale works.
pub fn nms_select_grid(cfg: &HeatmapConfig, scores: &[f64], k: usize) -> Vec<Waypoint> {
    assert_eq!(scores.len(), cfg.sectors * cfg.bins, "score grid has the wrong shape");
    let score = |sector: usize, bin: usize| scores[sector * cfg.bins + bin];
    let mut alive: Vec<bool> = scores.iter().map(|&s| s > 0.0).collect();
    let mut picked = Vec::new();
    while picked.len() < k {
        let mut best: Option<(usize, usize)> = None;
        for sector in 0..cfg.sectors {
            for bin in 0..cfg.bins {
                if !alive[sector * cfg.bins + bin] {
                    continue;
                }
                let better = match best {
                    None => true,
                    Some((bs, bb)) => {
                        let (s, b) = (score(sector, bin), score(bs, bb));
                        s > b || (s == b && bin > bb)
                    }
                };
                if better {
                    best = Some((sector, bin));
                }
            }
        }
        let Some(winner) = best else { break };
        picked.push(Waypoint::new(cfg.sector_angle(winner.0), cfg.bin_distance(winner.1)));
        for sector in 0..cfg.sectors {
            for bin in 0..cfg.bins {
                if cfg.suppresses(winner, (sector, bin)) {
                    alive[sector * cfg.bins + bin] = false;
                }
            }
        }
    }
    picked
}

/// Full proposal pipeline: heatmap, smoothing, masking by raw
/// traversability, suppression, and a final clearance check.
pub fn propose_waypoints(
    map: &WorldMap,
    pose: &Pose2D,
    radius: f64,
    k: usize,
    config: HeatmapConfig,
) -> Vec<Waypoint> {
    let raw = build_heatmap(map, pose, radius, config);
    let smoothed = smooth_heatmap(&raw).masked_by(&raw);
    let origin = pose.position();
    nms_select(&smoothed, k)
        .into_iter()
        .filter(|w| map.segment_clear(origin, w.target(pose), radius))
        .collect()
}
