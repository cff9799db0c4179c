//! Prompt modes, few-shot assets, prompt construction and output
//! extraction.

mod build;
mod extract;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prover::Label;

pub use build::{build_prompt, COT_CUE};
pub use extract::{
    extract_fol_program, extract_label, truncate_generation, ExtractionError, FolProgram,
    GenerationError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Mode {
    Naive,
    ScratchPad,
    CoT,
    #[serde(rename = "LINC")]
    Linc,
    #[serde(rename = "NSCoT")]
    NsCot,
}

impl Mode {
    pub const ALL: [Mode; 5] = [Mode::Naive, Mode::ScratchPad, Mode::CoT, Mode::Linc, Mode::NsCot];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Naive => "Naive",
            Mode::ScratchPad => "ScratchPad",
            Mode::CoT => "CoT",
            Mode::Linc => "LINC",
            Mode::NsCot => "NSCoT",
        }
    }

    /// Whether generations are FOL programs decided by the prover rather
    /// than labels.
    pub fn uses_prover(self) -> bool {
        matches!(self, Mode::Linc | Mode::NsCot)
    }

    fn builtin_asset(self) -> &'static str {
        match self {
            Mode::Naive => include_str!("../../assets/shots/naive.json"),
            Mode::ScratchPad => include_str!("../../assets/shots/scratchpad.json"),
            Mode::CoT => include_str!("../../assets/shots/cot.json"),
            Mode::Linc => include_str!("../../assets/shots/linc.json"),
            Mode::NsCot => include_str!("../../assets/shots/nscot.json"),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                format!("unknown mode `{s}` (expected Naive, ScratchPad, CoT, LINC or NSCoT)")
            })
    }
}

/// One in-context example. Which optional fields must be present depends
/// on the mode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotExample {
    pub premises_nl: Vec<String>,
    pub conclusion_nl: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<Label>,
    /// Free-form chain over the whole problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<String>,
    /// One step per premise, then one for the conclusion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise_reasoning: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fol_premises: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fol_conclusion: Option<String>,
}

pub const SHOTS_PER_PROMPT: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum ShotSchemaError {
    #[error("{mode} prompts need {expected} shots, got {found}")]
    Count { mode: Mode, expected: usize, found: usize },
    #[error("{mode} shot {shot} lacks `{field}`")]
    MissingField {
        mode: Mode,
        shot: usize,
        field: &'static str,
    },
    #[error("{mode} shot {shot}: {message}")]
    Shape { mode: Mode, shot: usize, message: String },
    #[error("shot asset: {0}")]
    Asset(String),
}

impl ShotExample {
    pub fn check(&self, mode: Mode, shot: usize) -> Result<(), ShotSchemaError> {
        let missing = |field| ShotSchemaError::MissingField { mode, shot, field };
        let shape = |message: String| ShotSchemaError::Shape { mode, shot, message };
        if self.premises_nl.is_empty() {
            return Err(shape("no premises".into()));
        }
        let needs_label = matches!(mode, Mode::Naive | Mode::CoT | Mode::ScratchPad);
        if needs_label && self.label.is_none() {
            return Err(missing("label"));
        }
        if mode == Mode::CoT && self.reasoning.is_none() {
            return Err(missing("reasoning"));
        }
        if matches!(mode, Mode::ScratchPad | Mode::Linc | Mode::NsCot) {
            let fol = self.fol_premises.as_ref().ok_or_else(|| missing("fol_premises"))?;
            if self.fol_conclusion.is_none() {
                return Err(missing("fol_conclusion"));
            }
            if fol.len() != self.premises_nl.len() {
                return Err(shape(format!(
                    "{} premises but {} FOL premises",
                    self.premises_nl.len(),
                    fol.len()
                )));
            }
        }
        if mode == Mode::NsCot {
            let steps = self
                .premise_reasoning
                .as_ref()
                .ok_or_else(|| missing("premise_reasoning"))?;
            if steps.len() != self.premises_nl.len() + 1 {
                return Err(shape(format!(
                    "expected {} reasoning steps, got {}",
                    self.premises_nl.len() + 1,
                    steps.len()
                )));
            }
        }
        Ok(())
    }
}

/// A mode's instruction text and its shots, as stored in an asset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotSet {
    pub mode: Mode,
    pub instruction: String,
    pub shots: Vec<ShotExample>,
}

impl ShotSet {
    pub fn builtin(mode: Mode) -> ShotSet {
        Self::from_json(mode.builtin_asset()).expect("shipped shot assets are valid")
    }

    pub fn from_json(text: &str) -> Result<ShotSet, ShotSchemaError> {
        let set: ShotSet =
            serde_json::from_str(text).map_err(|e| ShotSchemaError::Asset(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }

    pub fn load(path: &Path) -> Result<ShotSet, ShotSchemaError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ShotSchemaError::Asset(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ShotSchemaError> {
        if self.shots.len() != SHOTS_PER_PROMPT {
            return Err(ShotSchemaError::Count {
                mode: self.mode,
                expected: SHOTS_PER_PROMPT,
                found: self.shots.len(),
            });
        }
        for (i, shot) in self.shots.iter().enumerate() {
            shot.check(self.mode, i)?;
        }
        Ok(())
    }

    pub fn render(&self, instance: &crate::datasets::ProblemInstance) -> Result<String, ShotSchemaError> {
        build::render_prompt(self.mode, &self.instruction, &self.shots, instance)
    }
}
