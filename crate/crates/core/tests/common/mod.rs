#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vlnav_core::geom::{Point, TAU};
use vlnav_core::world::{Bounds, ObstaclePolygon};
use vlnav_core::WorldMap;

pub const SIZE: f64 = 12.0;

/// Convex polygon with vertices on a circle, at sorted random angles.
pub fn random_convex(rng: &mut ChaCha8Rng) -> ObstaclePolygon {
    loop {
        let c = Point::new(rng.random_range(1.5..SIZE - 1.5), rng.random_range(1.5..SIZE - 1.5));
        let r = rng.random_range(0.4..1.4);
        let n = rng.random_range(3..7);
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let gaps_ok = angles.windows(2).all(|w| w[1] - w[0] > 0.3) && angles[0] + TAU - angles[n - 1] > 0.3;
        if !gaps_ok {
            continue;
        }
        let ring = angles.iter().map(|&a| c + Point::polar(a, r)).collect();
        if let Ok(poly) = ObstaclePolygon::new(ring) {
            return poly;
        }
    }
}

pub fn random_obstacles(seed: u64, count: usize) -> Vec<ObstaclePolygon> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_convex(&mut rng)).collect()
}

pub fn random_map(seed: u64) -> WorldMap {
    let count = 2 + (seed % 4) as usize;
    WorldMap::new(Bounds::new(0.0, 0.0, SIZE, SIZE), random_obstacles(seed, count), vec![]).unwrap()
}

/// Uniform free point for a disc of `radius`; `None` after many misses.
pub fn free_point(map: &WorldMap, rng: &mut ChaCha8Rng, radius: f64) -> Option<Point> {
    for _ in 0..500 {
        let p = Point::new(rng.random_range(0.0..SIZE), rng.random_range(0.0..SIZE));
        if map.is_free(p, radius) {
            return Some(p);
        }
    }
    None
}

/// Minimum over every monotone alignment, enumerated recursively.
pub fn brute_force_dtw(p: &[Point], r: &[Point]) -> f64 {
    fn go(p: &[Point], r: &[Point], i: usize, j: usize) -> f64 {
        let here = p[i].dist(r[j]);
        if i + 1 == p.len() && j + 1 == r.len() {
            return here;
        }
        let mut best = f64::INFINITY;
        if i + 1 < p.len() {
            best = best.min(go(p, r, i + 1, j));
        }
        if j + 1 < r.len() {
            best = best.min(go(p, r, i, j + 1));
        }
        if i + 1 < p.len() && j + 1 < r.len() {
            best = best.min(go(p, r, i + 1, j + 1));
        }
        here + best
    }
    go(p, r, 0, 0)
}
