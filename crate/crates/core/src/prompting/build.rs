use std::fmt::Write;

use super::{Mode, ShotExample, ShotSchemaError, ShotSet, SHOTS_PER_PROMPT};
use crate::datasets::ProblemInstance;

pub const COT_CUE: &str = "Let's think step by step.";

fn problem_header(out: &mut String, premises: &[String], conclusion: &str) {
    out.push_str("<PREMISES>\n");
    for p in premises {
        out.push_str(p);
        out.push('\n');
    }
    out.push_str("</PREMISES>\n<CONCLUSION>\n");
    out.push_str(conclusion);
    out.push_str("\n</CONCLUSION>\n<EVALUATE>\n");
}

/// The worked answer for one shot. Fields were checked beforehand.
fn shot_answer(out: &mut String, mode: Mode, shot: &ShotExample) {
    let nl = shot
        .premises_nl
        .iter()
        .chain(std::iter::once(&shot.conclusion_nl));
    let fol = || {
        shot.fol_premises
            .iter()
            .flatten()
            .chain(shot.fol_conclusion.iter())
    };
    match mode {
        Mode::Naive => {}
        Mode::CoT => {
            let _ = writeln!(out, "{COT_CUE} {}", shot.reasoning.as_deref().unwrap_or_default());
        }
        Mode::ScratchPad | Mode::Linc => {
            for (text, formula) in nl.zip(fol()) {
                let _ = writeln!(out, "TEXT: {text}\nFOL: {formula}");
            }
        }
        Mode::NsCot => {
            let steps = shot.premise_reasoning.iter().flatten();
            for (i, ((text, step), formula)) in nl.zip(steps).zip(fol()).enumerate() {
                if i > 0 {
                    out.push('\n');
                }
                let _ = writeln!(out, "TEXT: {text}\nREASONING: {step}\nFOL: {formula}");
            }
        }
    }
    if let (Mode::Naive | Mode::CoT | Mode::ScratchPad, Some(label)) = (mode, shot.label) {
        let _ = writeln!(out, "ANSWER: {label}");
    }
}

pub(crate) fn render_prompt(
    mode: Mode,
    instruction: &str,
    shots: &[ShotExample],
    instance: &ProblemInstance,
) -> Result<String, ShotSchemaError> {
    if shots.len() != SHOTS_PER_PROMPT {
        return Err(ShotSchemaError::Count {
            mode,
            expected: SHOTS_PER_PROMPT,
            found: shots.len(),
        });
    }
    for (i, shot) in shots.iter().enumerate() {
        shot.check(mode, i)?;
    }
    let mut out = String::new();
    out.push_str(instruction.trim_end());
    out.push_str("\n\n");
    for shot in shots {
        problem_header(&mut out, &shot.premises_nl, &shot.conclusion_nl);
        shot_answer(&mut out, mode, shot);
        out.push_str("</EVALUATE>\n\n");
    }
    problem_header(&mut out, &instance.premises_nl, &instance.conclusion_nl);
    if mode == Mode::CoT {
        out.push_str(COT_CUE);
    }
    Ok(out)
}

/// Prompt text for `instance` under `mode`, using the mode's shipped
/// instruction and the given shots. Pure: the same inputs always give the
/// same bytes.
pub fn build_prompt(
    mode: Mode,
    shots: &[ShotExample],
    instance: &ProblemInstance,
) -> Result<String, ShotSchemaError> {
    render_prompt(mode, &ShotSet::builtin(mode).instruction, shots, instance)
}
