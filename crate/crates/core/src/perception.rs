//! Textualized observations for each candidate waypoint.
//!
//! Objects come from the map's ground-truth annotations. An object is listed
//! for a waypoint when it lies within the field of view around the waypoint
//! direction, within sensing range, and is not occluded.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geom::{wrap_pi, PI};
use crate::waypoint::Waypoint;
use crate::world::{Pose2D, WorldMap};

/// Half-width of the per-waypoint field of view (15°).
pub const FOV_HALF_ANGLE: f64 = PI / 12.0;
/// Bearings closer than this (10°) to the view direction read as "ahead".
pub const AHEAD_ANGLE: f64 = PI / 18.0;

const OCCLUSION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VisibleObject {
    pub label: String,
    pub distance: f64,
    /// Radians relative to the waypoint direction, counter-clockwise positive.
    pub bearing: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WaypointView {
    pub index: usize,
    pub waypoint: Waypoint,
    pub objects: Vec<VisibleObject>,
    /// Free space along the waypoint direction.
    pub openness: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneObservation {
    pub views: Vec<WaypointView>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneDescription {
    pub text: String,
}

pub fn observe(map: &WorldMap, pose: &Pose2D, waypoints: &[Waypoint]) -> SceneObservation {
    let origin = pose.position();
    let views = waypoints
        .iter()
        .enumerate()
        .map(|(index, wp)| {
            let direction = pose.heading + wp.angle;
            let openness = map.raycast(origin, direction).unwrap_or(0.0);
            let mut objects: Vec<VisibleObject> = map
                .objects()
                .iter()
                .filter_map(|obj| {
                    let offset = obj.position - origin;
                    let distance = offset.norm();
                    if distance <= 0.0 || distance > map.max_range() {
                        return None;
                    }
                    let bearing = wrap_pi(offset.angle() - direction);
                    if bearing.abs() > FOV_HALF_ANGLE {
                        return None;
                    }
                    let free = map.raycast(origin, offset.angle()).ok()?;
                    if free < distance - OCCLUSION_TOLERANCE {
                        return None;
                    }
                    Some(VisibleObject { label: obj.label.clone(), distance, bearing })
                })
                .collect();
            objects.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.label.cmp(&b.label)));
            WaypointView { index, waypoint: *wp, objects, openness }
        })
        .collect();
    SceneObservation { views }
}

fn bearing_word(bearing: f64) -> &'static str {
    if bearing.abs() < AHEAD_ANGLE {
        "ahead"
    } else if bearing > 0.0 {
        "slightly left"
    } else {
        "slightly right"
    }
}

pub fn describe_view(view: &WaypointView) -> SceneDescription {
    let degrees = libm::round(view.waypoint.angle.to_degrees()) as i64;
    let objects = if view.objects.is_empty() {
        String::from("none visible")
    } else {
        view.objects
            .iter()
            .map(|o| format!("{} at {:.1} m {}", o.label, o.distance, bearing_word(o.bearing)))
            .collect::<Vec<_>>()
            .join(", ")
    };
    SceneDescription {
        text: format!(
            "Heading {}°, {:.1} m away: open space for {:.1} m. Objects: {}.",
            degrees, view.waypoint.distance, view.openness, objects
        ),
    }
}

pub fn textualize(obs: &SceneObservation) -> Vec<SceneDescription> {
    obs.views.iter().map(describe_view).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{Bounds, ObstaclePolygon, SceneObject};
    use alloc::vec;

    fn map_with(objects: Vec<SceneObject>, obstacles: Vec<ObstaclePolygon>) -> WorldMap {
        WorldMap::new(Bounds::centered(30.0), obstacles, objects).unwrap()
    }

    #[test]
    fn table_dead_ahead() {
        let map = map_with(vec![SceneObject::new("table", 2.0, 0.0)], vec![]);
        let obs = observe(&map, &Pose2D::new(0.0, 0.0, 0.0), &[Waypoint::new(0.0, 1.0)]);
        let objs = &obs.views[0].objects;
        assert_eq!(objs.len(), 1);
        assert_eq!(objs[0].label, "table");
        assert!((objs[0].distance - 2.0).abs() < 1e-12);
        assert_eq!(objs[0].bearing, 0.0);
        let text = &textualize(&obs)[0].text;
        assert!(text.contains("table at 2.0 m ahead"), "{text}");
    }

    #[test]
    fn occluded_object_is_excluded() {
        let map = map_with(
            vec![SceneObject::new("table", 3.0, 0.0)],
            vec![ObstaclePolygon::rect(1.0, -1.0, 1.2, 1.0).unwrap()],
        );
        let obs = observe(&map, &Pose2D::new(0.0, 0.0, 0.0), &[Waypoint::new(0.0, 0.5)]);
        assert!(obs.views[0].objects.is_empty());
        assert!((obs.views[0].openness - 1.0).abs() < 1e-12);
    }

    #[test]
    fn object_on_obstacle_face_is_visible() {
        let map = map_with(
            vec![SceneObject::new("cabinet", 1.0, 0.0)],
            vec![ObstaclePolygon::rect(1.0, -1.0, 1.2, 1.0).unwrap()],
        );
        let obs = observe(&map, &Pose2D::new(0.0, 0.0, 0.0), &[Waypoint::new(0.0, 0.5)]);
        assert_eq!(obs.views[0].objects.len(), 1);
    }

    #[test]
    fn no_objects_reports_openness() {
        let map = map_with(vec![], vec![]);
        let obs = observe(&map, &Pose2D::new(0.0, 0.0, 0.0), &[Waypoint::new(0.0, 1.0), Waypoint::new(PI, 2.0)]);
        assert_eq!(obs.views.len(), 2);
        assert!(obs.views.iter().all(|v| v.objects.is_empty() && v.openness == 10.0));
        let texts = textualize(&obs);
        assert!(texts[0].text.contains("Objects: none visible"));
        assert_eq!(texts[1].text, "Heading 180°, 2.0 m away: open space for 10.0 m. Objects: none visible.");
    }

    #[test]
    fn nearer_objects_first_and_fov() {
        let map = map_with(
            vec![
                SceneObject::new("lamp", 2.5, 0.2),
                SceneObject::new("chair", 1.0, -0.05),
                SceneObject::new("door", 1.0, 1.0),
            ],
            vec![],
        );
        let obs = observe(&map, &Pose2D::new(0.0, 0.0, 0.0), &[Waypoint::new(0.0, 1.0)]);
        let labels: Vec<&str> = obs.views[0].objects.iter().map(|o| o.label.as_str()).collect();
        assert_eq!(labels, ["chair", "lamp"]);
        let text = &textualize(&obs)[0].text;
        assert!(text.find("chair").unwrap() < text.find("lamp").unwrap());
    }

    #[test]
    fn bearing_words() {
        assert_eq!(bearing_word(0.1), "ahead");
        assert_eq!(bearing_word(0.2), "slightly left");
        assert_eq!(bearing_word(-0.2), "slightly right");
    }
}
