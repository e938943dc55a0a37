use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::NavDecision;
use crate::perception::WaypointView;
use crate::waypoint::Waypoint;

/// Lines of history kept in the summary.
pub const HISTORY_LINES: usize = 20;
/// Characters of the decision thought kept per step.
pub const THOUGHT_EXCERPT_CHARS: usize = 120;

/// Appends one line for the executed step and keeps the newest
/// [`HISTORY_LINES`] lines. `executed.distance` is the distance actually
/// moved.
pub fn summarize_step(
    prev_summary: &str,
    step_index: usize,
    decision: &NavDecision,
    executed: &Waypoint,
    view: Option<&WaypointView>,
) -> String {
    let nearest: Vec<&str> = view
        .map(|v| v.objects.iter().take(3).map(|o| o.label.as_str()).collect())
        .unwrap_or_default();
    let nearest = if nearest.is_empty() { String::from("none") } else { nearest.join(", ") };
    let thought: String = decision
        .thought
        .chars()
        .map(|c| if c.is_whitespace() { ' ' } else { c })
        .take(THOUGHT_EXCERPT_CHARS)
        .collect();
    let line = format!(
        "Step {step_index}: moved {:.1} m at {}°; nearest objects: {nearest}; thought: {}",
        executed.distance,
        libm::round(executed.angle.to_degrees()) as i64,
        thought.trim_end()
    );
    let mut lines: Vec<&str> = prev_summary.lines().filter(|l| !l.trim().is_empty()).collect();
    lines.push(&line);
    let skip = lines.len().saturating_sub(HISTORY_LINES);
    lines[skip..].join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigator::Choice;
    use alloc::string::ToString;

    fn decision(thought: &str) -> NavDecision {
        NavDecision { choice: Choice::Waypoint(0), thought: thought.to_string(), fallback_used: false }
    }

    #[test]
    fn first_step_single_line() {
        let s = summarize_step("", 0, &decision("go\nahead"), &Waypoint::new(0.0, 3.0), None);
        assert_eq!(s, "Step 0: moved 3.0 m at 0°; nearest objects: none; thought: go ahead");
        assert_eq!(s.lines().count(), 1);
    }

    #[test]
    fn keeps_last_twenty_lines() {
        let mut s = String::new();
        for t in 0..25 {
            s = summarize_step(&s, t, &decision("x"), &Waypoint::new(0.5, 1.0), None);
        }
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 20);
        assert!(lines[0].starts_with("Step 5:"));
        assert!(lines[19].starts_with("Step 24:"));
    }

    #[test]
    fn thought_excerpt_is_capped() {
        let long = "a".repeat(500);
        let s = summarize_step("", 3, &decision(&long), &Waypoint::new(0.0, 1.0), None);
        let excerpt = s.rsplit("thought: ").next().unwrap();
        assert_eq!(excerpt.chars().count(), 120);
    }
}
