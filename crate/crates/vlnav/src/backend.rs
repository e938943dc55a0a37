//! Chat backends: an OpenAI-compatible HTTP client for locally served models
//! and three offline backends (scripted, oracle, random).

use std::collections::VecDeque;
use std::str::FromStr;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vlnav_core::llm::{ChatBackend, ChatMessage, ChatRequest, Stage, TransportError};
use vlnav_core::navigator::heuristic_decomposition;
use vlnav_core::oracle::{numbered, oracle_respond};

/// Overrides the configured endpoint when set.
pub const ENDPOINT_ENV: &str = "VLNAV_ENDPOINT";
/// Sent as a bearer token when set.
pub const API_KEY_ENV: &str = "VLNAV_API_KEY";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Scripted,
    Oracle,
    Random,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "http" => Ok(Self::Http),
            "scripted" => Ok(Self::Scripted),
            "oracle" => Ok(Self::Oracle),
            "random" => Ok(Self::Random),
            other => Err(format!("unknown backend {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model: String,
    pub temperature: f64,
    /// Per-request timeout in seconds.
    pub timeout: f64,
    pub seed: u64,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Oracle,
            endpoint: None,
            model: String::from("llama3.1"),
            temperature: 0.0,
            timeout: 120.0,
            seed: 0,
        }
    }
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.endpoint) {
            (BackendKind::Http, None) => bail!("the http backend needs an endpoint (--endpoint or {ENDPOINT_ENV})"),
            (BackendKind::Http, Some(_)) => {}
            (_, Some(_)) => bail!("an endpoint is only meaningful for the http backend"),
            (_, None) => {}
        }
        if !(self.temperature >= 0.0) {
            bail!("temperature must be non-negative");
        }
        if !(self.timeout > 0.0) {
            bail!("timeout must be positive");
        }
        Ok(())
    }
}

/// Completes a bare server URL to the chat-completions route.
pub fn completions_url(endpoint: &str) -> String {
    let trimmed = endpoint.trim_end_matches('/');
    if trimmed.ends_with("/chat/completions") {
        trimmed.to_string()
    } else if trimmed.ends_with("/v1") {
        format!("{trimmed}/chat/completions")
    } else {
        format!("{trimmed}/v1/chat/completions")
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
    stream: bool,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<CompletionChoice>,
}

#[derive(Deserialize)]
struct CompletionChoice {
    message: CompletionMessage,
}

#[derive(Deserialize)]
struct CompletionMessage {
    content: Option<String>,
}

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    slots: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn new(n: usize) -> Self {
        Self { slots: Mutex::new(n.max(1)), freed: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut slots = self.slots.lock().unwrap_or_else(|e| e.into_inner());
        while *slots == 0 {
            slots = self.freed.wait(slots).unwrap_or_else(|e| e.into_inner());
        }
        *slots -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.slots.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HttpOptions {
    /// Sleeps between attempts; one retry per entry.
    pub backoff: Vec<Duration>,
    pub max_in_flight: usize,
    pub api_key: Option<String>,
}

impl Default for HttpOptions {
    fn default() -> Self {
        Self {
            backoff: [500, 1000, 2000].into_iter().map(Duration::from_millis).collect(),
            max_in_flight: 4,
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
        }
    }
}

pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    model: String,
    temperature: f64,
    options: HttpOptions,
    in_flight: InFlight,
}

impl HttpBackend {
    pub fn new(endpoint: &str, model: &str, temperature: f64, timeout: Duration, options: HttpOptions) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let in_flight = InFlight::new(options.max_in_flight);
        Self { agent, url: completions_url(endpoint), model: model.to_string(), temperature, options, in_flight }
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    /// One POST; any non-2xx status or unusable body is an error.
    pub fn complete_once(&self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        let body = CompletionRequest { model: &self.model, messages, temperature: self.temperature, stream: false };
        let mut request = self.agent.post(&self.url).header("Content-Type", "application/json");
        if let Some(key) = &self.options.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let _permit = self.in_flight.acquire();
        let mut response = request.send_json(&body).map_err(|e| TransportError(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| TransportError(e.to_string()))?;
        if !(200..300).contains(&status) {
            let excerpt: String = text.chars().take(200).collect();
            return Err(TransportError(format!("HTTP {status}: {excerpt}")));
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| TransportError(format!("malformed body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| TransportError(String::from("malformed body: no choices[0].message.content")))
    }

    /// Retries transport failures with the configured backoff.
    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        let mut last = None;
        for attempt in 0..=self.options.backoff.len() {
            if attempt > 0 {
                thread::sleep(self.options.backoff[attempt - 1]);
            }
            match self.complete_once(messages) {
                Ok(text) => return Ok(text),
                Err(e) => {
                    log::warn!("chat attempt {} of {} failed: {}", attempt + 1, self.options.backoff.len() + 1, e.0);
                    last = Some(e);
                }
            }
        }
        Err(last.unwrap_or_else(|| TransportError(String::from("no attempts made"))))
    }
}

impl ChatBackend for HttpBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        self.complete(request.messages)
    }
}

/// Replays canned responses in order, repeating the last one when the
/// queue runs dry.
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<String>>,
    last: Mutex<Option<String>>,
}

impl ScriptedBackend {
    pub fn new(responses: impl IntoIterator<Item = String>) -> Self {
        Self { queue: Mutex::new(responses.into_iter().collect()), last: Mutex::new(None) }
    }
}

impl ChatBackend for ScriptedBackend {
    fn chat(&self, _request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let next = self.queue.lock().unwrap_or_else(|e| e.into_inner()).pop_front();
        let mut last = self.last.lock().unwrap_or_else(|e| e.into_inner());
        match next {
            Some(text) => {
                *last = Some(text.clone());
                Ok(text)
            }
            None => last.clone().ok_or_else(|| TransportError(String::from("scripted backend has no responses"))),
        }
    }
}

pub struct OracleBackend;

impl ChatBackend for OracleBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        Ok(oracle_respond(request))
    }
}

/// Uniform choice among the candidates, seeded by a hash of the seed and
/// the full conversation so identical requests get identical answers.
pub struct RandomBackend {
    seed: u64,
}

impl RandomBackend {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    fn rng_for(&self, request: &ChatRequest<'_>) -> ChaCha8Rng {
        let mut hasher = Sha256::new();
        hasher.update(self.seed.to_le_bytes());
        for m in request.messages {
            hasher.update(format!("{:?}", m.role).as_bytes());
            hasher.update([0]);
            hasher.update(m.content.as_bytes());
            hasher.update([0]);
        }
        let digest = hasher.finalize();
        let mut seed = [0u8; 32];
        seed.copy_from_slice(&digest[..32]);
        ChaCha8Rng::from_seed(seed)
    }
}

impl ChatBackend for RandomBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let ctx = &request.context;
        Ok(match request.stage {
            Stage::Decision => {
                let n = ctx.candidates.len().max(1);
                format!("Final Answer: {}", self.rng_for(request).random_range(0..n))
            }
            Stage::Progress => {
                ctx.actions.iter().map(|a| format!("{a} - PENDING")).collect::<Vec<_>>().join("\n")
            }
            Stage::ComprehendActions => numbered(&heuristic_decomposition(&ctx.episode.instruction).actions),
            Stage::ComprehendLandmarks => numbered(&heuristic_decomposition(&ctx.episode.instruction).landmarks),
        })
    }
}

/// A configured backend. Offline kinds hand each episode a fresh instance,
/// so results do not depend on scheduling; the HTTP client is shared.
pub enum Backend {
    Http(Arc<HttpBackend>),
    Scripted(Vec<String>),
    Oracle,
    Random(u64),
}

impl Backend {
    /// Builds a backend; `script` supplies the canned responses for the
    /// scripted kind. The endpoint environment variable wins over `cfg`.
    pub fn from_config(cfg: &BackendConfig, script: Option<Vec<String>>) -> Result<Self> {
        let mut cfg = cfg.clone();
        if cfg.kind == BackendKind::Http {
            if let Ok(endpoint) = std::env::var(ENDPOINT_ENV) {
                if !endpoint.is_empty() {
                    cfg.endpoint = Some(endpoint);
                }
            }
        }
        cfg.validate()?;
        Ok(match cfg.kind {
            BackendKind::Http => {
                let endpoint = cfg.endpoint.as_deref().unwrap_or_default();
                let timeout = Duration::from_secs_f64(cfg.timeout);
                Self::Http(Arc::new(HttpBackend::new(endpoint, &cfg.model, cfg.temperature, timeout, HttpOptions::default())))
            }
            BackendKind::Scripted => match script {
                Some(lines) if !lines.is_empty() => Self::Scripted(lines),
                _ => bail!("the scripted backend needs a non-empty response script"),
            },
            BackendKind::Oracle => Self::Oracle,
            BackendKind::Random => Self::Random(cfg.seed),
        })
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Self::Http(_) => BackendKind::Http,
            Self::Scripted(_) => BackendKind::Scripted,
            Self::Oracle => BackendKind::Oracle,
            Self::Random(_) => BackendKind::Random,
        }
    }

    pub fn for_episode(&self) -> Box<dyn ChatBackend + '_> {
        match self {
            Self::Http(client) => Box::new(client.as_ref()),
            Self::Scripted(lines) => Box::new(ScriptedBackend::new(lines.iter().cloned())),
            Self::Oracle => Box::new(OracleBackend),
            Self::Random(seed) => Box::new(RandomBackend::new(*seed)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_completion() {
        assert_eq!(completions_url("http://h:1"), "http://h:1/v1/chat/completions");
        assert_eq!(completions_url("http://h:1/v1/"), "http://h:1/v1/chat/completions");
        assert_eq!(completions_url("http://h:1/v1/chat/completions"), "http://h:1/v1/chat/completions");
    }

    #[test]
    fn endpoint_iff_http() {
        let mut cfg = BackendConfig { kind: BackendKind::Http, ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.endpoint = Some("http://localhost:11434".into());
        assert!(cfg.validate().is_ok());
        cfg.kind = BackendKind::Random;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn request_body_shape() {
        let messages = [ChatMessage::user("hi")];
        let body = CompletionRequest { model: "m", messages: &messages, temperature: 0.0, stream: false };
        assert_eq!(
            serde_json::to_string(&body).unwrap(),
            r#"{"model":"m","messages":[{"role":"user","content":"hi"}],"temperature":0.0,"stream":false}"#
        );
    }
}
