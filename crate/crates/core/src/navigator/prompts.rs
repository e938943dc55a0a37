use alloc::format;
use alloc::string::String;
use core::fmt::Write;

use super::{ActionStatus, DecompositionKind, PromptContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("instruction is empty")]
    EmptyInstruction,
    #[error("decision prompt needs at least one candidate")]
    NoCandidates,
}

/// The four analysis steps of progress estimation, in order.
pub const PROGRESS_STEP_NAMES: [&str; 4] = [
    "Landmark and Action Verification",
    "Directional Analysis",
    "Action Completion Estimation",
    "Sequential Evaluation",
];

const PROGRESS_STEP_BODIES: [&str; 4] = [
    "list the landmarks already seen and the actions already carried out, using only the history above.",
    "compare every turn the agent has made with the turns the instruction asks for.",
    "for each action, judge whether the movement so far fulfils it.",
    "mark an action COMPLETED only if every earlier action is COMPLETED.",
];

fn capitalized(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

pub fn build_comprehension_prompt(instruction: &str, kind: DecompositionKind) -> Result<String, PromptError> {
    let instruction = instruction.trim();
    if instruction.is_empty() {
        return Err(PromptError::EmptyInstruction);
    }
    let (many, one) = (kind.plural(), kind.singular());
    Ok(format!(
        "Instruction: {instruction}\n\n\
         You are an action decomposition expert. Your task is to detect all {many} in the given \
         navigation instruction. Ensure the integrity of each {one}. Your answer must consist ONLY \
         of a series of labeled action phrases without beginning sentences. Can you decompose {many} \
         in the instruction? {}:",
        capitalized(many)
    ))
}

fn push_common(out: &mut String, ctx: &PromptContext) {
    let _ = writeln!(out, "Instruction: {}", ctx.instruction);
    out.push_str("Decomposed actions:\n");
    if ctx.decomposition.actions.is_empty() {
        out.push_str("(none)\n");
    }
    for (i, a) in ctx.decomposition.actions.iter().enumerate() {
        let _ = writeln!(out, "{}. {}", i + 1, a);
    }
    let landmarks = if ctx.decomposition.landmarks.is_empty() {
        String::from("(none)")
    } else {
        ctx.decomposition.landmarks.join(", ")
    };
    let _ = writeln!(out, "Landmarks: {landmarks}");
    if ctx.history_summary.trim().is_empty() {
        out.push_str("Navigation history: no steps taken yet.\n");
    } else {
        let _ = writeln!(out, "Navigation history:\n{}", ctx.history_summary.trim_end());
    }
}

pub fn build_progress_prompt(ctx: &PromptContext) -> String {
    let mut out = String::from(
        "You track the progress of an indoor navigation agent that follows a spoken instruction.\n\n",
    );
    push_common(&mut out, ctx);
    out.push_str("\nWork through these steps:\n");
    for (i, (name, body)) in PROGRESS_STEP_NAMES.iter().zip(PROGRESS_STEP_BODIES).enumerate() {
        let _ = writeln!(out, "{}. {}: {}", i + 1, name, body);
    }
    let n = ctx.decomposition.actions.len();
    let _ = write!(
        out,
        "\nWrite a short rationale, then exactly {n} status lines, one line per action in order, \
         formatted as: <action> - COMPLETED|PENDING"
    );
    out
}

pub fn build_decision_prompt(ctx: &PromptContext) -> Result<String, PromptError> {
    if ctx.candidate_descriptions.is_empty() {
        return Err(PromptError::NoCandidates);
    }
    let mut out = String::from("You are an agent navigating an indoor environment. Choose where to go next.\n\n");
    push_common(&mut out, ctx);
    out.push_str("Progress estimate:\n");
    for (action, status) in ctx.decomposition.actions.iter().zip(&ctx.progress.statuses) {
        let word = match status {
            ActionStatus::Completed => "COMPLETED",
            ActionStatus::Pending => "PENDING",
        };
        let _ = writeln!(out, "- {action} - {word}");
    }
    if ctx.progress.all_completed() {
        out.push_str("All actions appear to be completed; stopping now may be appropriate.\n");
    }
    let _ = writeln!(out, "\nCandidate waypoints at step {}:", ctx.step_index);
    for (i, d) in ctx.candidate_descriptions.iter().enumerate() {
        let _ = writeln!(out, "Candidate {i}: {}", d.text);
    }
    out.push_str(
        "\nThink about which candidate best continues the instruction given the landmarks, the \
         history and the progress estimate. Choose STOP only if the destination has been reached. \
         End your answer with 'Final Answer: <index>' or 'Final Answer: STOP'.",
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigator::{Decomposition, ProgressEstimate};
    use crate::perception::SceneDescription;
    use alloc::string::ToString;
    use alloc::vec;
    use alloc::vec::Vec;

    fn ctx(actions: &[&str], history: &str) -> PromptContext {
        PromptContext {
            instruction: String::from("Turn left, then walk past the sofa, then stop near the bed."),
            decomposition: Decomposition {
                actions: actions.iter().map(|s| s.to_string()).collect(),
                landmarks: vec![String::from("sofa"), String::from("bed")],
            },
            history_summary: history.to_string(),
            progress: ProgressEstimate::all_pending(actions.len()),
            candidate_descriptions: (0..3)
                .map(|i| SceneDescription { text: format!("view {i}") })
                .collect(),
            step_index: 0,
        }
    }

    #[test]
    fn comprehension_prompt_variants() {
        let a = build_comprehension_prompt("Go to the kitchen.", DecompositionKind::Actions).unwrap();
        assert!(a.contains("You are an action decomposition expert"));
        assert!(a.ends_with("Actions:"));
        assert!(a.contains("detect all actions in the given navigation instruction"));
        let l = build_comprehension_prompt("Go to the kitchen.", DecompositionKind::Landmarks).unwrap();
        assert!(l.contains("You are an action decomposition expert"));
        assert!(l.contains("detect all landmarks in the given navigation instruction"));
        assert!(l.ends_with("Landmarks:"));
        assert_eq!(
            build_comprehension_prompt("  ", DecompositionKind::Actions),
            Err(PromptError::EmptyInstruction)
        );
    }

    #[test]
    fn progress_prompt_contents() {
        let p = build_progress_prompt(&ctx(&["turn left", "walk past the sofa", "stop near the bed"], ""));
        for name in PROGRESS_STEP_NAMES {
            assert!(p.contains(name), "{name}");
        }
        assert!(p.contains("no steps taken yet"));
        assert!(p.contains("exactly 3 status lines"));
        assert!(p.contains("<action> - COMPLETED|PENDING"));
        let later = build_progress_prompt(&ctx(&["turn left"], "Step 0: moved 3.0 m at 0°"));
        assert!(!later.contains("no steps taken yet"));
        assert!(later.contains("Step 0: moved"));
    }

    #[test]
    fn decision_prompt_contents() {
        let mut c = ctx(&["turn left", "stop near the bed"], "");
        let p = build_decision_prompt(&c).unwrap();
        assert!(p.contains(&c.instruction));
        let positions: Vec<usize> = (0..3).map(|i| p.find(&format!("Candidate {i}: view {i}")).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
        assert!(p.contains("Final Answer: <index>"));
        assert!(!p.contains("stopping now may be appropriate"));

        c.progress = ProgressEstimate::sequential(vec![ActionStatus::Completed; 2], String::new());
        assert!(build_decision_prompt(&c).unwrap().contains("stopping now may be appropriate"));

        c.candidate_descriptions.clear();
        assert_eq!(build_decision_prompt(&c), Err(PromptError::NoCandidates));
    }
}
