//! Judging generations, majority voting and the reported statistics.

mod report;
mod stats;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::DatasetError;
use crate::fol::SyntaxErrorClass;
use crate::gateway::Generation;
use crate::prompting::{extract_fol_program, extract_label, GenerationError, Mode};
use crate::prover::{classify_entailment, Label, ResourceLimits};

pub use report::{build_report, table_csv, EvalReport, InstanceResult, JudgeFlags};
pub use stats::{
    accuracy, bucket_by_premises, confusion_matrix, delta_from_accuracies, error_taxonomy,
    mcnemar_counts, mcnemar_exact, robustness_delta, BucketStat, ConfusionMatrix, OtherBucket,
    PremiseBuckets, Taxonomy, TaxonomyBucket, BUCKET_RANGE, SIGNIFICANCE_LEVEL,
};

/// Why a generation produced no label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorClass {
    ArityMismatch,
    UnexpectedToken,
    EmptyPredicate,
    ForbiddenSymbol,
    UnboundVariable,
    MissingConclusion,
    ExtractionFailure,
    TransportError,
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 8] = [
        ErrorClass::ArityMismatch,
        ErrorClass::UnexpectedToken,
        ErrorClass::EmptyPredicate,
        ErrorClass::ForbiddenSymbol,
        ErrorClass::UnboundVariable,
        ErrorClass::MissingConclusion,
        ErrorClass::ExtractionFailure,
        ErrorClass::TransportError,
    ];

    pub fn bucket(self) -> TaxonomyBucket {
        match self {
            ErrorClass::ArityMismatch => TaxonomyBucket::ArityMismatch,
            ErrorClass::UnexpectedToken => TaxonomyBucket::UnexpectedToken,
            _ => TaxonomyBucket::Other,
        }
    }
}

impl From<SyntaxErrorClass> for ErrorClass {
    fn from(c: SyntaxErrorClass) -> Self {
        match c {
            SyntaxErrorClass::UnexpectedToken => ErrorClass::UnexpectedToken,
            SyntaxErrorClass::ArityMismatch => ErrorClass::ArityMismatch,
            SyntaxErrorClass::EmptyPredicate => ErrorClass::EmptyPredicate,
            SyntaxErrorClass::ForbiddenSymbol => ErrorClass::ForbiddenSymbol,
            SyntaxErrorClass::UnboundVariable => ErrorClass::UnboundVariable,
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A judged sample: a label or the reason there is none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgement {
    Label(Label),
    Error(ErrorClass),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationOutcome {
    pub instance_id: String,
    pub mode: Mode,
    pub sample_index: usize,
    #[serde(flatten)]
    pub result: Judgement,
    #[serde(default)]
    pub inconsistent_premises: bool,
    #[serde(default)]
    pub resource_exhausted: bool,
}

impl GenerationOutcome {
    pub fn label(&self) -> Option<Label> {
        match self.result {
            Judgement::Label(l) => Some(l),
            Judgement::Error(_) => None,
        }
    }

    pub fn error(&self) -> Option<ErrorClass> {
        match self.result {
            Judgement::Label(_) => None,
            Judgement::Error(e) => Some(e),
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("outcomes mix keys: ({0}) and ({1})")]
    MixedKey(String, String),
    #[error("no outcomes to vote over")]
    NoOutcomes,
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error("instance `{0}` has no counterpart prediction")]
    UnpairedInstance(String),
    #[error("{0}")]
    Dataset(String),
}

impl From<DatasetError> for EvalError {
    fn from(e: DatasetError) -> Self {
        EvalError::Dataset(e.to_string())
    }
}

/// Turns one generation into a label or an error class. Never fails.
pub fn judge_generation(
    instance_id: &str,
    mode: Mode,
    generation: &Generation,
    limits: &ResourceLimits,
) -> GenerationOutcome {
    let mut outcome = GenerationOutcome {
        instance_id: instance_id.to_string(),
        mode,
        sample_index: generation.sample_index,
        result: Judgement::Error(ErrorClass::TransportError),
        inconsistent_premises: false,
        resource_exhausted: false,
    };
    if generation.is_transport_error() {
        return outcome;
    }
    if !mode.uses_prover() {
        outcome.result = match extract_label(mode, &generation.raw_text) {
            Ok(label) => Judgement::Label(label),
            Err(_) => Judgement::Error(ErrorClass::ExtractionFailure),
        };
        return outcome;
    }
    let program = match extract_fol_program(mode, &generation.raw_text) {
        Ok(p) => p,
        Err(GenerationError::Syntax { error, .. }) => {
            outcome.result = Judgement::Error(error.class.into());
            return outcome;
        }
        Err(GenerationError::MissingConclusion { .. } | GenerationError::NotAProverMode(_)) => {
            outcome.result = Judgement::Error(ErrorClass::MissingConclusion);
            return outcome;
        }
    };
    outcome.result = match classify_entailment(&program.premises, &program.conclusion, limits) {
        Ok(e) => {
            outcome.inconsistent_premises = e.trace.inconsistent_premises;
            outcome.resource_exhausted = e.trace.resource_exhausted;
            Judgement::Label(e.label)
        }
        Err(error) => Judgement::Error(error.class.into()),
    };
    outcome
}

/// Majority vote over one instance's samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalPrediction {
    pub instance_id: String,
    pub mode: Mode,
    pub label: Option<Label>,
    pub vote_counts: BTreeMap<Label, usize>,
    pub error_count: usize,
    pub all_errors: bool,
    pub tie_broken: bool,
}

impl FinalPrediction {
    pub fn n_samples(&self) -> usize {
        self.vote_counts.values().sum::<usize>() + self.error_count
    }
}

/// Plurality over non-error samples. Ties go to Uncertain when it is among
/// the leaders, otherwise to the leader seen at the lowest sample index.
/// With only errors there is no label.
pub fn majority_vote(outcomes: &[GenerationOutcome]) -> Result<FinalPrediction, EvalError> {
    let first = outcomes.first().ok_or(EvalError::NoOutcomes)?;
    let key = |o: &GenerationOutcome| format!("{}, {}", o.instance_id, o.mode);
    if let Some(other) = outcomes
        .iter()
        .find(|o| o.instance_id != first.instance_id || o.mode != first.mode)
    {
        return Err(EvalError::MixedKey(key(first), key(other)));
    }
    let mut ordered: Vec<&GenerationOutcome> = outcomes.iter().collect();
    ordered.sort_by_key(|o| o.sample_index);

    let mut vote_counts: BTreeMap<Label, usize> = Label::ALL.iter().map(|&l| (l, 0)).collect();
    let mut first_seen: BTreeMap<Label, usize> = BTreeMap::new();
    let mut error_count = 0;
    for (position, o) in ordered.iter().enumerate() {
        match o.label() {
            Some(l) => {
                *vote_counts.get_mut(&l).unwrap() += 1;
                first_seen.entry(l).or_insert(position);
            }
            None => error_count += 1,
        }
    }
    let top = vote_counts.values().copied().max().unwrap_or(0);
    let leaders: Vec<Label> = Label::ALL
        .into_iter()
        .filter(|l| top > 0 && vote_counts[l] == top)
        .collect();
    let tie_broken = leaders.len() > 1;
    let label = if leaders.contains(&Label::Uncertain) && tie_broken {
        Some(Label::Uncertain)
    } else {
        leaders.into_iter().min_by_key(|l| first_seen[l])
    };
    Ok(FinalPrediction {
        instance_id: first.instance_id.clone(),
        mode: first.mode,
        label,
        vote_counts,
        error_count,
        all_errors: label.is_none(),
        tie_broken,
    })
}
