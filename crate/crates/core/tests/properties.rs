mod common;

use common::{brute_force_dtw, free_point, random_map, random_obstacles, SIZE};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vlnav_core::geom::{Point, TAU};
use vlnav_core::metrics::{dtw, ndtw};
use vlnav_core::perception::{describe_view, VisibleObject, WaypointView};
use vlnav_core::waypoint::{nms_select, nms_select_grid, Heatmap, HeatmapConfig};
use vlnav_core::world::{Bounds, SceneObject};
use vlnav_core::{Pose2D, VisibilityGraph, Waypoint, WorldMap, AGENT_RADIUS};

fn point() -> impl Strategy<Value = Point> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(x, y)| Point::new(x, y))
}

fn polyline(max: usize) -> impl Strategy<Value = Vec<Point>> {
    prop::collection::vec(point(), 1..=max)
}

fn heatmap() -> impl Strategy<Value = Heatmap> {
    // coarse values so ties actually occur
    prop::collection::vec(0u8..6, 144).prop_map(|v| {
        let mut h = Heatmap::filled(HeatmapConfig::default(), 0.0);
        for (i, s) in v.into_iter().enumerate() {
            h.set(i / 12, i % 12, f64::from(s) / 5.0);
        }
        h
    })
}

fn dedup(p: &[Point]) -> Vec<Point> {
    let mut out: Vec<Point> = Vec::new();
    for &q in p {
        if out.last() != Some(&q) {
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raycast_never_grows_when_obstacles_are_added(seed in 0u64..10_000, angle in 0.0..TAU) {
        let all = random_obstacles(seed, 4);
        let bounds = Bounds::new(0.0, 0.0, SIZE, SIZE);
        let fewer = WorldMap::new(bounds, all[..3].to_vec(), vec![]).unwrap();
        let more = WorldMap::new(bounds, all, vec![]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if let Some(origin) = free_point(&more, &mut rng, 0.0) {
            let a = fewer.raycast(origin, angle).unwrap();
            let b = more.raycast(origin, angle).unwrap();
            prop_assert!(b <= a + 1e-12, "{b} > {a}");
        }
    }

    #[test]
    fn geodesic_is_a_metric_bounded_by_euclid(seed in 0u64..10_000) {
        let map = random_map(seed);
        let graph = VisibilityGraph::new(&map, AGENT_RADIUS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let pts: Vec<Point> = (0..3).filter_map(|_| free_point(&map, &mut rng, AGENT_RADIUS)).collect();
        prop_assume!(pts.len() == 3);
        let (p, q, s) = (pts[0], pts[1], pts[2]);
        let d = |a, b| graph.distance(&map, a, b).ok();
        if let (Some(pq), Some(qp)) = (d(p, q), d(q, p)) {
            prop_assert!((pq - qp).abs() <= 1e-9);
            prop_assert!(pq >= p.dist(q) - 1e-12);
            if let (Some(ps), Some(sq)) = (d(p, s), d(s, q)) {
                prop_assert!(pq <= ps + sq + 1e-9, "{pq} > {ps} + {sq}");
            }
        } else {
            prop_assert!(d(q, p).is_none());
        }
    }

    #[test]
    fn clear_segments_have_euclidean_geodesics(seed in 0u64..10_000) {
        let map = random_map(seed);
        let graph = VisibilityGraph::new(&map, AGENT_RADIUS);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc1ea);
        let (Some(p), Some(q)) = (free_point(&map, &mut rng, AGENT_RADIUS), free_point(&map, &mut rng, AGENT_RADIUS)) else {
            return Ok(());
        };
        if map.segment_clear(p, q, AGENT_RADIUS) {
            prop_assert_eq!(graph.distance(&map, p, q).unwrap(), p.dist(q));
        }
    }

    #[test]
    fn move_along_lands_free(seed in 0u64..10_000, heading in 0.0..TAU, angle in -3.2..3.2f64, dist in 0.0..6.0f64) {
        let map = random_map(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0afe);
        let Some(p) = free_point(&map, &mut rng, AGENT_RADIUS) else { return Ok(()) };
        let pose = Pose2D::new(p.x, p.y, heading);
        let wp = Waypoint::new(angle, dist);
        let out = map.move_along(pose, &wp, AGENT_RADIUS);
        prop_assert!(map.is_free(out.position(), AGENT_RADIUS));
        prop_assert!(out.position().dist(p) <= dist + 1e-9);
    }

    #[test]
    fn nms_scale_invariant_and_separated(h in heatmap(), k in 1usize..8, scale in 0.01..20.0f64) {
        let picks = nms_select(&h, k);
        let scaled: Vec<f64> = h.scores().iter().map(|v| v * scale).collect();
        prop_assert_eq!(&nms_select_grid(h.config(), &scaled, k), &picks);
        prop_assert_eq!(&nms_select(&h, k), &picks);
        let cfg = h.config();
        let cell = |w: &Waypoint| {
            let s = (0..12).find(|&s| cfg.sector_angle(s) == w.angle).unwrap();
            let b = (0..12).find(|&b| cfg.bin_distance(b) == w.distance).unwrap();
            (s, b)
        };
        for (i, a) in picks.iter().enumerate() {
            for b in &picks[i + 1..] {
                prop_assert!(!cfg.suppresses(cell(a), cell(b)));
            }
        }
    }

    #[test]
    fn dtw_matches_brute_force(p in polyline(6), r in polyline(6)) {
        let fast = dtw(&p, &r).unwrap();
        prop_assert!((fast - brute_force_dtw(&p, &r)).abs() <= 1e-9);
        prop_assert!((fast - dtw(&r, &p).unwrap()).abs() <= 1e-9);
        let n = ndtw(&p, &r, 3.0).unwrap();
        prop_assert!(n > 0.0 && n <= 1.0);
    }

    #[test]
    fn dtw_zero_iff_same_after_dedup(p in polyline(5), repeats in prop::collection::vec(1usize..3, 5)) {
        let stretched: Vec<Point> = p.iter().zip(&repeats).flat_map(|(&q, &n)| std::iter::repeat_n(q, n)).collect();
        prop_assert_eq!(dtw(&p, &stretched).unwrap(), 0.0);
        let mut other = p.clone();
        other.push(Point::new(9.0, 9.0));
        prop_assert_eq!(dtw(&p, &other).unwrap() == 0.0, dedup(&p) == dedup(&other));
    }

    #[test]
    fn ndtw_strictly_decreasing(p in polyline(4), shift in 0.01..2.0f64) {
        let moved: Vec<Point> = p.iter().map(|q| Point::new(q.x + shift, q.y)).collect();
        let further: Vec<Point> = p.iter().map(|q| Point::new(q.x + 2.0 * shift, q.y)).collect();
        let (a, b) = (dtw(&moved, &p).unwrap(), dtw(&further, &p).unwrap());
        prop_assert!(b > a);
        prop_assert!(ndtw(&further, &p, 3.0).unwrap() < ndtw(&moved, &p, 3.0).unwrap());
    }

    #[test]
    fn descriptions_separate_distances(d in 0.0..9.0f64, gap in 0.1..3.0f64) {
        let view = |dist: f64| WaypointView {
            index: 0,
            waypoint: Waypoint::new(0.0, 2.0),
            objects: vec![VisibleObject { label: "lamp".into(), distance: dist, bearing: 0.0 }],
            openness: 4.0,
        };
        let (a, b) = (view(d), view(d + gap));
        prop_assume!(b.objects[0].distance - a.objects[0].distance >= 0.1);
        prop_assert_ne!(describe_view(&a).text, describe_view(&b).text);
        prop_assert_eq!(describe_view(&a).text, describe_view(&a).text);
    }
}

#[test]
fn described_labels_exist_in_observation() {
    let map = WorldMap::new(
        Bounds::centered(20.0),
        vec![],
        vec![SceneObject::new("sofa", 3.0, 0.2), SceneObject::new("lamp", 0.0, 4.0), SceneObject::new("rug", -3.0, 0.0)],
    )
    .unwrap();
    let wps: Vec<Waypoint> = (0..6).map(|i| Waypoint::new(i as f64, 2.0)).collect();
    let obs = vlnav_core::perception::observe(&map, &Pose2D::new(0.0, 0.0, 0.0), &wps);
    for view in &obs.views {
        let text = describe_view(view).text;
        for o in map.objects() {
            let mentioned = text.contains(&o.label);
            let observed = view.objects.iter().any(|v| v.label == o.label);
            assert_eq!(mentioned, observed, "{text}");
        }
    }
}
