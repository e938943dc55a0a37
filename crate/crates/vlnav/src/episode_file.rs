//! Episode sets on disk: a single JSON document holding `map_ref` and the
//! list of episodes.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use vlnav_core::episodes::EpisodeSet;
use vlnav_core::WorldMap;

pub fn parse_episodes(text: &str) -> Result<EpisodeSet> {
    Ok(serde_json::from_str(text)?)
}

/// Reads an episode file without validating it.
pub fn read_episodes(path: &Path) -> Result<EpisodeSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading episodes {}", path.display()))?;
    parse_episodes(&text).with_context(|| format!("parsing episodes {}", path.display()))
}

/// Reads an episode file and checks every episode against `map`.
pub fn load_episodes(path: &Path, map: &WorldMap, agent_radius: f64) -> Result<EpisodeSet> {
    let set = read_episodes(path)?;
    set.validate(map, agent_radius).with_context(|| format!("validating {}", path.display()))?;
    Ok(set)
}

pub fn save_episodes(set: &EpisodeSet, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(set)?;
    fs::write(path, text + "\n").with_context(|| format!("writing episodes {}", path.display()))
}
