//! Single-episode loop: waypoints, perception, chain of thought, motion,
//! and scoring. Everything here is deterministic given the backend.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::episodes::Episode;
use crate::geom::Point;
use crate::llm::{ChatBackend, ChatMessage, ChatRequest, Stage, StepContext, TransportError};
use crate::metrics::{evaluate, MetricsError, MetricsReport, ScoringConfig};
use crate::navigator::{
    build_comprehension_prompt, build_decision_prompt, build_progress_prompt, decide_fallback,
    heuristic_decomposition, parse_decision, parse_decomposition, parse_progress, summarize_step,
    Choice, Decomposition, DecompositionKind, NavDecision, ParseFailure, ProgressEstimate, PromptContext,
};
use crate::perception::{observe, textualize, SceneDescription};
use crate::visibility::VisibilityGraph;
use crate::waypoint::{build_heatmap, nms_select, smooth_heatmap, Heatmap, HeatmapConfig, Waypoint};
use crate::world::{Pose2D, WorldMap};

#[derive(Clone, Debug, PartialEq)]
pub struct RunnerConfig {
    pub k_waypoints: usize,
    pub max_steps: usize,
    pub agent_radius: f64,
    pub heatmap: HeatmapConfig,
    /// Extra attempts after an unparseable answer, per stage.
    pub parse_retries: usize,
    /// Arc-length spacing used to densify paths for nDTW.
    pub resample_spacing: Option<f64>,
    pub record_heatmaps: bool,
}

impl Default for RunnerConfig {
    fn default() -> Self {
        Self {
            k_waypoints: 5,
            max_steps: 20,
            agent_radius: crate::AGENT_RADIUS,
            heatmap: HeatmapConfig::default(),
            parse_retries: 3,
            resample_spacing: Some(0.25),
            record_heatmaps: false,
        }
    }
}

/// One prompt/response round trip, logged verbatim.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Exchange {
    pub stage: Stage,
    pub attempt: usize,
    pub messages: Vec<ChatMessage>,
    pub response: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub step: usize,
    pub pose: Pose2D,
    pub candidates: Vec<Waypoint>,
    pub descriptions: Vec<String>,
    #[cfg_attr(feature = "serde", serde(default, skip_serializing_if = "Option::is_none"))]
    pub heatmap: Option<Heatmap>,
    pub exchanges: Vec<Exchange>,
    pub progress: ProgressEstimate,
    pub decision: NavDecision,
    pub fallback_used: bool,
    pub next_pose: Pose2D,
    pub moved: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum EpisodeStatus {
    Completed,
    TransportError,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpisodeReport {
    pub episode_id: String,
    pub status: EpisodeStatus,
    pub error: Option<String>,
    pub instruction: String,
    pub start: Pose2D,
    pub goal: Point,
    pub shortest_path: f64,
    pub reference_path: Vec<Point>,
    pub scoring: ScoringConfig,
    pub decomposition: Decomposition,
    pub steps: usize,
    pub metrics: MetricsReport,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrajectoryLog {
    pub steps: Vec<StepRecord>,
    pub report: EpisodeReport,
}

/// Agent positions: the start, then the landing point of every executed move.
pub fn trajectory_positions(start: Point, steps: &[StepRecord]) -> Vec<Point> {
    let mut out = Vec::with_capacity(steps.len() + 1);
    out.push(start);
    out.extend(
        steps
            .iter()
            .filter(|s| matches!(s.decision.choice, Choice::Waypoint(_)))
            .map(|s| s.next_pose.position()),
    );
    out
}

/// Scores positions; a zero-length shortest path (start at goal) gives SPL = SR.
pub fn score_positions(
    positions: &[Point],
    goal: Point,
    shortest: f64,
    reference: &[Point],
    scoring: &ScoringConfig,
) -> Result<MetricsReport, MetricsError> {
    if shortest > 0.0 {
        evaluate(positions, goal, shortest, reference, scoring)
    } else {
        let mut report = evaluate(positions, goal, 1.0, reference, scoring)?;
        report.spl = report.sr;
        Ok(report)
    }
}

impl TrajectoryLog {
    pub fn positions(&self) -> Vec<Point> {
        trajectory_positions(self.report.start.position(), &self.steps)
    }

    /// Recomputes the metrics from the logged positions alone.
    pub fn rescore(&self) -> Result<MetricsReport, MetricsError> {
        let r = &self.report;
        score_positions(&self.positions(), r.goal, r.shortest_path, &r.reference_path, &r.scoring)
    }
}


/// Chain-of-thought state carried across the steps of one episode.
#[derive(Default)]
struct NavState {
    decomposition: Decomposition,
    progress: ProgressEstimate,
    history: String,
}

struct Session<'a, B: ChatBackend + ?Sized> {
    backend: &'a B,
    map: &'a WorldMap,
    graph: &'a VisibilityGraph,
    episode: &'a Episode,
    cfg: &'a RunnerConfig,
}

impl<'a, B: ChatBackend + ?Sized> Session<'a, B> {
    fn context<'b>(&'b self, pose: Pose2D, candidates: &'b [Waypoint], actions: &'b [String]) -> StepContext<'b> {
        StepContext {
            map: self.map,
            graph: self.graph,
            episode: self.episode,
            pose,
            candidates,
            agent_radius: self.cfg.agent_radius,
            success_radius: self.episode.success_radius,
            n_actions: actions.len(),
            actions,
        }
    }

    /// Sends `prompt`, re-asking with a correction after unparseable answers.
    /// Returns `Ok(None)` when every attempt failed to parse.
    fn ask<T>(
        &self,
        stage: Stage,
        prompt: String,
        ctx: StepContext<'_>,
        log: &mut Vec<Exchange>,
        parse: impl Fn(&str) -> Result<T, ParseFailure>,
    ) -> Result<Option<T>, TransportError> {
        let mut messages = alloc::vec![ChatMessage::user(prompt)];
        for attempt in 0..=self.cfg.parse_retries {
            let request = ChatRequest { messages: &messages, stage, context: ctx };
            let response = match self.backend.chat(&request) {
                Ok(r) => r,
                Err(e) => {
                    log.push(Exchange { stage, attempt, messages, response: None, error: Some(e.to_string()) });
                    return Err(e);
                }
            };
            match parse(&response) {
                Ok(v) => {
                    log.push(Exchange { stage, attempt, messages, response: Some(response), error: None });
                    return Ok(Some(v));
                }
                Err(e) => {
                    log.push(Exchange {
                        stage,
                        attempt,
                        messages: messages.clone(),
                        response: Some(response.clone()),
                        error: Some(e.to_string()),
                    });
                    messages.push(ChatMessage::assistant(response));
                    messages.push(ChatMessage::user(format!(
                        "Your answer could not be used ({e}). Please answer again in the requested format."
                    )));
                }
            }
        }
        Ok(None)
    }

    fn comprehend(&self, pose: Pose2D, candidates: &[Waypoint], log: &mut Vec<Exchange>) -> Result<Decomposition, TransportError> {
        let instruction = &self.episode.instruction;
        let fallback = heuristic_decomposition(instruction);
        let mut ask_half = |kind: DecompositionKind, stage: Stage| -> Result<Option<Vec<String>>, TransportError> {
            match build_comprehension_prompt(instruction, kind) {
                Ok(prompt) => self.ask(stage, prompt, self.context(pose, candidates, &[]), log, parse_decomposition),
                Err(_) => Ok(None),
            }
        };
        let actions = ask_half(DecompositionKind::Actions, Stage::ComprehendActions)?.unwrap_or(fallback.actions);
        let landmarks =
            ask_half(DecompositionKind::Landmarks, Stage::ComprehendLandmarks)?.unwrap_or(fallback.landmarks);
        Ok(Decomposition { actions, landmarks })
    }

    /// Comprehension (first step only), progress estimation, then decision.
    fn think(
        &self,
        step: usize,
        pose: Pose2D,
        candidates: &[Waypoint],
        descriptions: &[SceneDescription],
        state: &mut NavState,
        log: &mut Vec<Exchange>,
    ) -> Result<NavDecision, TransportError> {
        if step == 0 {
            state.decomposition = self.comprehend(pose, candidates, log)?;
            state.progress = ProgressEstimate::all_pending(state.decomposition.actions.len());
        }
        let mut prompt_ctx = PromptContext {
            instruction: self.episode.instruction.clone(),
            decomposition: state.decomposition.clone(),
            history_summary: state.history.clone(),
            progress: state.progress.clone(),
            candidate_descriptions: descriptions.to_vec(),
            step_index: step,
        };
        let actions = &state.decomposition.actions;
        let n_actions = actions.len();
        if n_actions > 0 {
            let prompt = build_progress_prompt(&prompt_ctx);
            let ctx = self.context(pose, candidates, actions);
            if let Some(p) = self.ask(Stage::Progress, prompt, ctx, log, |t| parse_progress(t, n_actions))? {
                state.progress = p;
            }
            prompt_ctx.progress = state.progress.clone();
        }
        let Ok(prompt) = build_decision_prompt(&prompt_ctx) else {
            return Ok(NavDecision {
                choice: Choice::Stop,
                thought: String::from("no traversable candidates"),
                fallback_used: true,
            });
        };
        let n = candidates.len();
        let ctx = self.context(pose, candidates, actions);
        let parsed = self.ask(Stage::Decision, prompt, ctx, log, |t| parse_decision(t, n))?;
        Ok(parsed.unwrap_or_else(|| decide_fallback(candidates)))
    }
}

pub fn run_episode<B: ChatBackend + ?Sized>(
    map: &WorldMap,
    graph: &VisibilityGraph,
    episode: &Episode,
    backend: &B,
    cfg: &RunnerConfig,
) -> TrajectoryLog {
    let session = Session { backend, map, graph, episode, cfg };
    let radius = cfg.agent_radius;
    let scoring = ScoringConfig {
        success_radius: episode.success_radius,
        ndtw_threshold: episode.success_radius,
        resample_spacing: cfg.resample_spacing,
    };
    let shortest = graph
        .distance(map, episode.start.position(), episode.goal)
        .unwrap_or_else(|_| episode.reference_length());

    let mut steps: Vec<StepRecord> = Vec::new();
    let mut pose = episode.start;
    let mut state = NavState::default();
    let mut failure: Option<TransportError> = None;

    for step in 0..cfg.max_steps {
        let raw = build_heatmap(map, &pose, radius, cfg.heatmap);
        let smoothed = smooth_heatmap(&raw).masked_by(&raw);
        let candidates: Vec<Waypoint> = nms_select(&smoothed, cfg.k_waypoints)
            .into_iter()
            .filter(|w| map.segment_clear(pose.position(), w.target(&pose), radius))
            .collect();
        let observation = observe(map, &pose, &candidates);
        let descriptions = textualize(&observation);
        let mut exchanges = Vec::new();

        let decision = match session.think(step, pose, &candidates, &descriptions, &mut state, &mut exchanges) {
            Ok(d) => d,
            Err(e) => {
                failure = Some(e);
                break;
            }
        };
        let (next_pose, moved) = match decision.choice {
            Choice::Waypoint(i) => {
                let next = map.move_along(pose, &candidates[i], radius);
                let moved = next.position().dist(pose.position());
                let executed = Waypoint { angle: candidates[i].angle, distance: moved };
                state.history = summarize_step(&state.history, step, &decision, &executed, observation.views.get(i));
                (next, moved)
            }
            Choice::Stop => (pose, 0.0),
        };
        let stop = decision.choice == Choice::Stop;
        steps.push(StepRecord {
            step,
            pose,
            candidates,
            descriptions: descriptions.into_iter().map(|d| d.text).collect(),
            heatmap: cfg.record_heatmaps.then_some(smoothed),
            exchanges,
            progress: state.progress.clone(),
            fallback_used: decision.fallback_used,
            decision,
            next_pose,
            moved,
        });
        pose = next_pose;
        if stop {
            break;
        }
    }

    let positions = trajectory_positions(episode.start.position(), &steps);
    let metrics = score_positions(&positions, episode.goal, shortest, &episode.reference_path, &scoring)
        .expect("positions and reference are non-empty");
    let report = EpisodeReport {
        episode_id: episode.id.clone(),
        status: if failure.is_some() { EpisodeStatus::TransportError } else { EpisodeStatus::Completed },
        error: failure.map(|e| e.to_string()),
        instruction: episode.instruction.clone(),
        start: episode.start,
        goal: episode.goal,
        shortest_path: shortest,
        reference_path: episode.reference_path.clone(),
        scoring,
        decomposition: state.decomposition,
        steps: steps.len(),
        metrics,
    };
    TrajectoryLog { steps, report }
}
