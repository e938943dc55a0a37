//! Spatial-temporal chain of thought: instruction comprehension once per
//! episode, then progress estimation and a decision at every step.

mod history;
mod parse;
mod prompts;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

pub use history::{summarize_step, HISTORY_LINES, THOUGHT_EXCERPT_CHARS};
pub use parse::{parse_decision, parse_decomposition, parse_progress, ParseFailure};
pub use prompts::{
    build_comprehension_prompt, build_decision_prompt, build_progress_prompt, PromptError,
    PROGRESS_STEP_NAMES,
};

use crate::perception::SceneDescription;
use crate::waypoint::Waypoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecompositionKind {
    Actions,
    Landmarks,
}

impl DecompositionKind {
    pub(crate) fn plural(self) -> &'static str {
        match self {
            Self::Actions => "actions",
            Self::Landmarks => "landmarks",
        }
    }

    pub(crate) fn singular(self) -> &'static str {
        match self {
            Self::Actions => "action",
            Self::Landmarks => "landmark",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Decomposition {
    pub actions: Vec<String>,
    pub landmarks: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ActionStatus {
    Completed,
    Pending,
}

/// Per-action completion. No pending action ever precedes a completed one.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProgressEstimate {
    pub statuses: Vec<ActionStatus>,
    pub last_completed_index: i64,
    pub rationale: String,
}

impl Default for ProgressEstimate {
    fn default() -> Self {
        Self::all_pending(0)
    }
}

impl ProgressEstimate {
    /// Builds an estimate, demoting every status after the first pending one.
    pub fn sequential(mut statuses: Vec<ActionStatus>, rationale: String) -> Self {
        let mut done = 0usize;
        let mut blocked = false;
        for s in statuses.iter_mut() {
            if blocked {
                *s = ActionStatus::Pending;
            } else if *s == ActionStatus::Completed {
                done += 1;
            } else {
                blocked = true;
            }
        }
        Self { statuses, last_completed_index: done as i64 - 1, rationale }
    }

    pub fn all_pending(n: usize) -> Self {
        Self::sequential(alloc::vec![ActionStatus::Pending; n], String::new())
    }

    pub fn all_completed(&self) -> bool {
        !self.statuses.is_empty() && self.statuses.iter().all(|s| *s == ActionStatus::Completed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Choice {
    Waypoint(usize),
    Stop,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NavDecision {
    pub choice: Choice,
    pub thought: String,
    pub fallback_used: bool,
}

/// Everything the progress and decision prompts draw on.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptContext {
    pub instruction: String,
    pub decomposition: Decomposition,
    pub history_summary: String,
    pub progress: ProgressEstimate,
    pub candidate_descriptions: Vec<SceneDescription>,
    pub step_index: usize,
}

/// Straightest-ahead candidate; ties go to the lower index.
pub fn decide_fallback(candidates: &[Waypoint]) -> NavDecision {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if best.is_none_or(|(_, a)| c.angle.abs() < a) {
            best = Some((i, c.angle.abs()));
        }
    }
    let choice = best.map_or(Choice::Stop, |(i, _)| Choice::Waypoint(i));
    NavDecision { choice, thought: String::from("fallback: straightest candidate"), fallback_used: true }
}

fn split_clauses(instruction: &str) -> Vec<String> {
    let mut parts: Vec<String> = Vec::new();
    for sentence in instruction.split(['.', ';', '\n']) {
        for chunk in sentence.split(',') {
            for piece in chunk.split(" then ") {
                for clause in piece.split(" and ") {
                    let clause = clause.trim();
                    let clause = clause.strip_prefix("then ").unwrap_or(clause).trim();
                    let clause = clause.strip_prefix("and ").unwrap_or(clause).trim();
                    if !clause.is_empty() {
                        parts.push(clause.to_lowercase());
                    }
                }
            }
        }
    }
    parts
}

/// Rule-based split used when the model's comprehension output is
/// unusable, and by the offline backends.
pub fn heuristic_decomposition(instruction: &str) -> Decomposition {
    let actions = split_clauses(instruction);
    let mut landmarks: Vec<String> = Vec::new();
    for action in &actions {
        if let Some(pos) = action.rfind("the ") {
            let landmark = action[pos + 4..].trim().to_string();
            if !landmark.is_empty() && !landmarks.contains(&landmark) {
                landmarks.push(landmark);
            }
        }
    }
    Decomposition { actions, landmarks }
}
