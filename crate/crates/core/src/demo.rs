//! A small furnished apartment used by the CLI defaults and the tests.

use alloc::vec;

use crate::geom::Point;
use crate::world::{Bounds, ObstaclePolygon, SceneObject, WorldMap};

/// 16 m × 12 m floor plan: a living room and a kitchen/bedroom wing joined
/// by a doorway in the dividing wall.
pub fn demo_map() -> WorldMap {
    let rect = |a, b, c, d| ObstaclePolygon::rect(a, b, c, d).expect("valid rectangle");
    let obstacles = vec![
        rect(7.85, 0.0, 8.15, 5.0),
        rect(7.85, 7.5, 8.15, 12.0),
        rect(1.0, 1.0, 3.5, 2.0),
        rect(3.0, 6.0, 5.0, 7.2),
        rect(0.0, 9.0, 0.5, 11.5),
        rect(5.5, 2.5, 6.5, 3.5),
        rect(10.5, 2.0, 13.0, 3.2),
        rect(12.0, 8.5, 15.0, 11.0),
        ObstaclePolygon::new(vec![
            Point::new(10.0, 6.0),
            Point::new(11.0, 6.3),
            Point::new(10.8, 7.2),
            Point::new(9.9, 7.0),
        ])
        .expect("valid quad"),
    ];
    let objects = vec![
        SceneObject::new("sofa", 2.25, 2.0),
        SceneObject::new("television", 2.25, 0.2),
        SceneObject::new("rug", 4.0, 4.0),
        SceneObject::new("armchair", 6.0, 2.5),
        SceneObject::new("dining table", 4.0, 6.0),
        SceneObject::new("bookshelf", 0.5, 10.25),
        SceneObject::new("window", 6.0, 11.9),
        SceneObject::new("doorway", 8.0, 6.25),
        SceneObject::new("potted plant", 10.5, 6.15),
        SceneObject::new("kitchen island", 11.75, 3.2),
        SceneObject::new("refrigerator", 15.7, 1.0),
        SceneObject::new("bed", 13.5, 8.5),
        SceneObject::new("lamp", 15.5, 7.5),
    ];
    WorldMap::new(Bounds::new(0.0, 0.0, 16.0, 12.0), obstacles, objects).expect("demo map is valid")
}
