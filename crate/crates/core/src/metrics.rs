//! Navigation metrics (TL, NE, SR, OSR, SPL, nDTW) and decomposition
//! quality scores (token F1, ROUGE-L).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::geom::{polyline_length, Point};

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("polyline must contain at least one point")]
    EmptyPath,
    #[error("shortest path length must be positive, got {0}")]
    NonPositiveShortest(f64),
    #[error("distance threshold must be positive, got {0}")]
    NonPositiveThreshold(f64),
    #[error("cannot aggregate an empty set of reports")]
    NoReports,
}

/// Per-episode metrics. `sr` and `osr` are 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsReport {
    pub tl: f64,
    pub ne: f64,
    pub sr: f64,
    pub osr: f64,
    pub spl: f64,
    pub ndtw: f64,
}

/// Means over episodes; success-type metrics scaled to 0–100.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MetricsSummary {
    pub episodes: usize,
    pub tl: f64,
    pub ne: f64,
    pub ndtw: f64,
    pub osr: f64,
    pub sr: f64,
    pub spl: f64,
}

/// Trajectory length.
pub fn path_length(points: &[Point]) -> f64 {
    polyline_length(points)
}

/// Navigation error: distance from the final position to the goal.
pub fn nav_error(points: &[Point], goal: Point) -> Result<f64, MetricsError> {
    points.last().map(|p| p.dist(goal)).ok_or(MetricsError::EmptyPath)
}

pub fn success(points: &[Point], goal: Point, radius: f64) -> Result<f64, MetricsError> {
    Ok(if nav_error(points, goal)? <= radius { 1.0 } else { 0.0 })
}

pub fn oracle_success(points: &[Point], goal: Point, radius: f64) -> Result<f64, MetricsError> {
    if points.is_empty() {
        return Err(MetricsError::EmptyPath);
    }
    let closest = points.iter().map(|p| p.dist(goal)).fold(f64::INFINITY, f64::min);
    Ok(if closest <= radius { 1.0 } else { 0.0 })
}

/// Success weighted by path length.
pub fn spl(success: f64, shortest: f64, taken: f64) -> Result<f64, MetricsError> {
    if !(shortest > 0.0) {
        return Err(MetricsError::NonPositiveShortest(shortest));
    }
    Ok(success * shortest / taken.max(shortest))
}

/// Dynamic time warping with Euclidean point cost and the symmetric step
/// pattern {(i-1, j), (i, j-1), (i-1, j-1)}.
pub fn dtw(p: &[Point], r: &[Point]) -> Result<f64, MetricsError> {
    if p.is_empty() || r.is_empty() {
        return Err(MetricsError::EmptyPath);
    }
    let m = r.len();
    let mut prev = vec![f64::INFINITY; m + 1];
    let mut cur = vec![f64::INFINITY; m + 1];
    prev[0] = 0.0;
    for a in p {
        cur[0] = f64::INFINITY;
        for (j, b) in r.iter().enumerate() {
            let best = prev[j].min(prev[j + 1]).min(cur[j]);
            cur[j + 1] = a.dist(*b) + best;
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m])
}

/// Normalized DTW: `exp(-dtw / (|r| * threshold))`.
pub fn ndtw(p: &[Point], r: &[Point], threshold: f64) -> Result<f64, MetricsError> {
    if !(threshold > 0.0) {
        return Err(MetricsError::NonPositiveThreshold(threshold));
    }
    let d = dtw(p, r)?;
    Ok(libm::exp(-d / (r.len() as f64 * threshold)))
}

/// Points every `spacing` meters of arc length, always keeping both ends.
pub fn resample(points: &[Point], spacing: f64) -> Vec<Point> {
    let Some(&first) = points.first() else { return Vec::new() };
    let mut out = vec![first];
    if !(spacing > 0.0) {
        out.extend_from_slice(&points[1..]);
        return out;
    }
    let mut carried = 0.0;
    for w in points.windows(2) {
        let len = w[0].dist(w[1]);
        let mut s = spacing - carried;
        while s < len - 1e-9 {
            out.push(w[0].lerp(w[1], s / len));
            s += spacing;
        }
        carried = len - (s - spacing);
    }
    let last = *points.last().unwrap();
    if out.last().is_none_or(|p| p.dist(last) > 1e-9) {
        out.push(last);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoringConfig {
    pub success_radius: f64,
    pub ndtw_threshold: f64,
    /// Arc-length spacing for densifying both paths before nDTW; `None`
    /// compares the raw vertices.
    pub resample_spacing: Option<f64>,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        Self {
            success_radius: crate::SUCCESS_RADIUS,
            ndtw_threshold: crate::SUCCESS_RADIUS,
            resample_spacing: Some(0.25),
        }
    }
}

/// Scores one trajectory (agent positions per step) against its episode.
pub fn evaluate(
    trajectory: &[Point],
    goal: Point,
    shortest: f64,
    reference: &[Point],
    cfg: &ScoringConfig,
) -> Result<MetricsReport, MetricsError> {
    let tl = path_length(trajectory);
    let ne = nav_error(trajectory, goal)?;
    let sr = success(trajectory, goal, cfg.success_radius)?;
    let osr = oracle_success(trajectory, goal, cfg.success_radius)?;
    let spl = spl(sr, shortest, tl)?;
    let ndtw = match cfg.resample_spacing {
        Some(s) => ndtw(&resample(trajectory, s), &resample(reference, s), cfg.ndtw_threshold)?,
        None => ndtw(trajectory, reference, cfg.ndtw_threshold)?,
    };
    Ok(MetricsReport { tl, ne, sr, osr, spl, ndtw })
}

pub fn aggregate(reports: &[MetricsReport]) -> Result<MetricsSummary, MetricsError> {
    if reports.is_empty() {
        return Err(MetricsError::NoReports);
    }
    let n = reports.len() as f64;
    let mean = |f: fn(&MetricsReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
    Ok(MetricsSummary {
        episodes: reports.len(),
        tl: mean(|r| r.tl),
        ne: mean(|r| r.ne),
        ndtw: 100.0 * mean(|r| r.ndtw),
        osr: 100.0 * mean(|r| r.osr),
        sr: 100.0 * mean(|r| r.sr),
        spl: 100.0 * mean(|r| r.spl),
    })
}

fn tokens(phrases: &[String]) -> Vec<String> {
    phrases
        .iter()
        .flat_map(|p| p.split(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

fn f_measure(precision: f64, recall: f64) -> f64 {
    if precision + recall <= 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Token-level F1 over bags of lowercased tokens, and ROUGE-L F-measure
/// over the joined token sequences.
pub fn score_decomposition(predicted: &[String], reference: &[String]) -> (f64, f64) {
    let pred = tokens(predicted);
    let refs = tokens(reference);
    if pred.is_empty() || refs.is_empty() {
        return (0.0, 0.0);
    }
    let mut pool = refs.clone();
    let mut overlap = 0usize;
    for t in &pred {
        if let Some(pos) = pool.iter().position(|r| r == t) {
            pool.swap_remove(pos);
            overlap += 1;
        }
    }
    let f1 = f_measure(overlap as f64 / pred.len() as f64, overlap as f64 / refs.len() as f64);
    let lcs = lcs_len(&pred, &refs) as f64;
    let rouge_l = f_measure(lcs / pred.len() as f64, lcs / refs.len() as f64);
    (f1, rouge_l)
}
