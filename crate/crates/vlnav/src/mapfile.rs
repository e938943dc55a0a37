//! JSON floor-plan format.
//!
//! ```json
//! {
//!   "bounds": {"min_x": 0, "min_y": 0, "max_x": 16, "max_y": 12},
//!   "max_range": 10.0,
//!   "obstacles": [[[1, 1], [3.5, 1], [3.5, 2], [1, 2]]],
//!   "objects": [{"label": "sofa", "x": 2.25, "y": 2.0}]
//! }
//! ```

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use vlnav_core::geom::Point;
use vlnav_core::world::{Bounds, ObstaclePolygon, SceneObject, WorldError};
use vlnav_core::{WorldMap, MAX_RANGE};

/// Name that resolves to the built-in demo apartment instead of a file.
pub const DEMO_MAP: &str = "demo";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    pub bounds: Bounds,
    #[serde(default = "default_range")]
    pub max_range: f64,
    #[serde(default)]
    pub obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub objects: Vec<ObjectEntry>,
}

fn default_range() -> f64 {
    MAX_RANGE
}

impl MapFile {
    pub fn from_world(map: &WorldMap) -> Self {
        Self {
            bounds: map.bounds(),
            max_range: map.max_range(),
            obstacles: map
                .obstacles()
                .iter()
                .map(|o| o.vertices().iter().map(|v| [v.x, v.y]).collect())
                .collect(),
            objects: map
                .objects()
                .iter()
                .map(|o| ObjectEntry { label: o.label.clone(), x: o.position.x, y: o.position.y })
                .collect(),
        }
    }

    pub fn to_world(&self) -> Result<WorldMap, WorldError> {
        let mut obstacles = Vec::with_capacity(self.obstacles.len());
        for (index, ring) in self.obstacles.iter().enumerate() {
            let vertices = ring.iter().map(|&[x, y]| Point::new(x, y)).collect();
            let polygon =
                ObstaclePolygon::new(vertices).map_err(|reason| WorldError::InvalidObstacle { index, reason })?;
            obstacles.push(polygon);
        }
        let objects = self.objects.iter().map(|o| SceneObject::new(o.label.clone(), o.x, o.y)).collect();
        Ok(WorldMap::new(self.bounds, obstacles, objects)?.with_max_range(self.max_range))
    }
}

pub fn load_map(path: &Path) -> Result<WorldMap> {
    let text = fs::read_to_string(path).with_context(|| format!("reading map {}", path.display()))?;
    parse_map(&text).with_context(|| format!("loading map {}", path.display()))
}

pub fn parse_map(text: &str) -> Result<WorldMap> {
    let file: MapFile = serde_json::from_str(text)?;
    Ok(file.to_world()?)
}

pub fn save_map(map: &WorldMap, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&MapFile::from_world(map))?;
    fs::write(path, text + "\n").with_context(|| format!("writing map {}", path.display()))
}

/// Resolves a map reference: the demo name or a path relative to `base`.
pub fn resolve_map(reference: &str, base: Option<&Path>) -> Result<WorldMap> {
    if reference == DEMO_MAP {
        return Ok(vlnav_core::demo::demo_map());
    }
    let path = match base {
        Some(dir) => dir.join(reference),
        None => reference.into(),
    };
    load_map(&path)
}
