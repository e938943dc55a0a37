use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{ActionStatus, Choice, NavDecision, ProgressEstimate};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseFailure {
    #[error("no phrases found")]
    NoPhrases,
    #[error("found {found} status lines, expected {expected}")]
    MissingStatuses { found: usize, expected: usize },
    #[error("no 'Final Answer:' marker")]
    NoAnswer,
    #[error("answer {0:?} is not a valid candidate")]
    InvalidAnswer(String),
}

/// Drops list markers such as `1.`, `2)`, `(3)`, `-`, `*`, `•`.
fn strip_marker(line: &str) -> &str {
    let mut s = line.trim().trim_start_matches(['-', '*', '•', '#']).trim_start();
    let inner = s.strip_prefix('(').unwrap_or(s);
    let digits = inner.len() - inner.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        let rest = &inner[digits..];
        if let Some(r) = rest.strip_prefix(['.', ')', ':']) {
            s = r;
        }
    }
    s.trim()
}

fn is_header(s: &str) -> bool {
    let lower = s.to_ascii_lowercase();
    matches!(lower.trim_end_matches(':'), "actions" | "landmarks" | "action" | "landmark")
        && s.ends_with(':')
}

/// Splits a list answer on newlines and semicolons into clean phrases.
pub fn parse_decomposition(llm_output: &str) -> Result<Vec<String>, ParseFailure> {
    let phrases: Vec<String> = llm_output
        .split(['\n', ';'])
        .map(strip_marker)
        .filter(|s| !s.is_empty() && !is_header(s))
        .map(|s| {
            let lower = s.to_ascii_lowercase();
            let s = if lower.starts_with("actions:") || lower.starts_with("landmarks:") {
                s.split_once(':').map_or(s, |(_, rest)| rest.trim())
            } else {
                s
            };
            s.trim_end_matches(['.', ',']).trim().to_string()
        })
        .filter(|s| !s.is_empty())
        .collect();
    if phrases.is_empty() {
        Err(ParseFailure::NoPhrases)
    } else {
        Ok(phrases)
    }
}

fn line_status(line: &str) -> Option<ActionStatus> {
    let tail = line.trim().trim_end_matches(|c: char| !c.is_alphanumeric());
    let word_start = tail.rfind(|c: char| !c.is_alphanumeric()).map_or(0, |i| i + 1);
    match tail[word_start..].to_ascii_uppercase().as_str() {
        "COMPLETED" => Some(ActionStatus::Completed),
        "PENDING" => Some(ActionStatus::Pending),
        _ => None,
    }
}

/// Reads one status per line (the line's last word must be COMPLETED or
/// PENDING) and enforces sequential completion.
pub fn parse_progress(llm_output: &str, n_actions: usize) -> Result<ProgressEstimate, ParseFailure> {
    let mut statuses = Vec::with_capacity(n_actions);
    let mut rationale: Vec<&str> = Vec::new();
    for line in llm_output.lines() {
        match line_status(line) {
            Some(s) if statuses.len() < n_actions => statuses.push(s),
            Some(_) => {}
            None if !line.trim().is_empty() => rationale.push(line.trim()),
            None => {}
        }
    }
    if statuses.len() < n_actions || n_actions == 0 {
        return Err(ParseFailure::MissingStatuses { found: statuses.len(), expected: n_actions });
    }
    Ok(ProgressEstimate::sequential(statuses, rationale.join(" ")))
}

/// Takes the last `Final Answer:` marker; the answer must be `STOP` or an
/// index below `n_candidates`.
pub fn parse_decision(llm_output: &str, n_candidates: usize) -> Result<NavDecision, ParseFailure> {
    const MARKER: &str = "final answer";
    let lower = llm_output.to_ascii_lowercase();
    let at = lower.rfind(MARKER).ok_or(ParseFailure::NoAnswer)?;
    let rest = llm_output[at + MARKER.len()..]
        .trim_start_matches(|c: char| c == ':' || c == '*' || c == '"' || c == '\'' || c == '<' || c == '[' || c == '(' || c.is_whitespace());
    let rest = if rest.to_ascii_lowercase().starts_with("candidate") {
        rest["candidate".len()..].trim_start()
    } else {
        rest
    };
    let token: String = rest.chars().take_while(|c| c.is_alphanumeric()).collect();
    let choice = if token.eq_ignore_ascii_case("stop") {
        Choice::Stop
    } else {
        match token.parse::<usize>() {
            Ok(i) if i < n_candidates => Choice::Waypoint(i),
            _ => return Err(ParseFailure::InvalidAnswer(token)),
        }
    };
    Ok(NavDecision { choice, thought: llm_output.to_string(), fallback_used: false })
}
