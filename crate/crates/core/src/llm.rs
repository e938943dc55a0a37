//! Backend-agnostic chat interface used by the navigator.

use alloc::string::String;

use crate::episodes::Episode;
use crate::visibility::VisibilityGraph;
use crate::waypoint::Waypoint;
use crate::world::{Pose2D, WorldMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// Which chain-of-thought stage a request belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stage {
    ComprehendActions,
    ComprehendLandmarks,
    Progress,
    Decision,
}

/// Structured state that accompanies every request. Network backends only
/// read `messages`; the offline backends use this to answer without parsing
/// prompts.
#[derive(Clone, Copy)]
pub struct StepContext<'a> {
    pub map: &'a WorldMap,
    pub graph: &'a VisibilityGraph,
    pub episode: &'a Episode,
    pub pose: Pose2D,
    pub candidates: &'a [Waypoint],
    pub agent_radius: f64,
    pub success_radius: f64,
    /// Number of decomposed actions; zero before comprehension.
    pub n_actions: usize,
    pub actions: &'a [String],
}

#[derive(Clone, Copy)]
pub struct ChatRequest<'a> {
    pub messages: &'a [ChatMessage],
    pub stage: Stage,
    pub context: StepContext<'a>,
}

/// Transport-level failure (timeout, non-2xx status, malformed body). Kept
/// distinct from a response the navigator cannot parse.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

pub trait ChatBackend: Sync {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError>;
}

impl<T: ChatBackend + ?Sized> ChatBackend for &T {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        (**self).chat(request)
    }
}
