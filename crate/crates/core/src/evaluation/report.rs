use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::stats::{paired_correctness, BUCKET_RANGE};
use super::{
    accuracy, bucket_by_premises, confusion_matrix, delta_from_accuracies, error_taxonomy,
    majority_vote, mcnemar_exact, ConfusionMatrix, EvalError, FinalPrediction, GenerationOutcome,
    PremiseBuckets, Taxonomy, SIGNIFICANCE_LEVEL,
};
use crate::datasets::{pair_instances, ProblemInstance, Variant};
use crate::prompting::Mode;
use crate::prover::Label;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub variant: Variant,
    pub gold: Label,
    pub premise_count: usize,
    pub label: Option<Label>,
    pub correct: bool,
    pub vote_counts: BTreeMap<Label, usize>,
    pub error_count: usize,
    pub all_errors: bool,
    pub tie_broken: bool,
}

/// How many judged samples carried each prover flag.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JudgeFlags {
    pub inconsistent_premises: usize,
    pub resource_exhausted: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mode: Mode,
    pub dataset: String,
    pub n_samples: usize,
    pub instances: usize,
    /// Percent over every instance in the dataset.
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cf_accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mcnemar_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significant: Option<bool>,
    pub confusion: ConfusionMatrix,
    pub taxonomy: Taxonomy,
    pub premise_buckets: PremiseBuckets,
    pub flags: JudgeFlags,
    pub per_instance: Vec<InstanceResult>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Accuracy on default instances: the paired default accuracy when the
    /// dataset has counterfactuals, otherwise the overall accuracy.
    pub fn default_row(&self) -> f64 {
        self.default_accuracy.unwrap_or(self.accuracy)
    }
}

/// Votes every instance and computes all statistics for one mode.
///
/// Each instance needs exactly `n_samples` outcomes with indices
/// `0..n_samples`. Datasets containing counterfactual instances are paired
/// and also get Δ and a McNemar p-value.
pub fn build_report(
    mode: Mode,
    dataset: &str,
    n_samples: usize,
    instances: &[ProblemInstance],
    outcomes: &[GenerationOutcome],
) -> Result<EvalReport, EvalError> {
    let mut grouped: HashMap<&str, Vec<GenerationOutcome>> =
        instances.iter().map(|i| (i.instance_id.as_str(), Vec::new())).collect();
    for o in outcomes {
        if o.mode != mode {
            return Err(EvalError::MixedKey(mode.to_string(), o.mode.to_string()));
        }
        grouped
            .get_mut(o.instance_id.as_str())
            .ok_or_else(|| {
                EvalError::CountMismatch(format!("outcome for unknown instance `{}`", o.instance_id))
            })?
            .push(o.clone());
    }
    let mut predictions = Vec::with_capacity(instances.len());
    for instance in instances {
        let samples = &grouped[instance.instance_id.as_str()];
        let mut indices: Vec<usize> = samples.iter().map(|o| o.sample_index).collect();
        indices.sort();
        if indices != (0..n_samples).collect::<Vec<_>>() {
            return Err(EvalError::CountMismatch(format!(
                "instance `{}` has samples {:?}, expected 0..{}",
                instance.instance_id, indices, n_samples
            )));
        }
        predictions.push(majority_vote(samples)?);
    }

    let mut report = EvalReport {
        mode,
        dataset: dataset.to_string(),
        n_samples,
        instances: instances.len(),
        accuracy: accuracy(&predictions, instances)?,
        default_accuracy: None,
        cf_accuracy: None,
        delta: None,
        mcnemar_p: None,
        significant: None,
        confusion: confusion_matrix(&predictions, instances)?,
        taxonomy: error_taxonomy(outcomes),
        premise_buckets: bucket_by_premises(&predictions, instances)?,
        flags: JudgeFlags {
            inconsistent_premises: outcomes.iter().filter(|o| o.inconsistent_premises).count(),
            resource_exhausted: outcomes.iter().filter(|o| o.resource_exhausted).count(),
        },
        per_instance: instances
            .iter()
            .zip(&predictions)
            .map(|(i, p)| instance_result(i, p))
            .collect(),
    };

    if instances.iter().any(|i| i.variant == Variant::Counterfactual) {
        let pairs = pair_instances(instances.to_vec())?;
        let (defaults, cfs): (Vec<FinalPrediction>, Vec<FinalPrediction>) = {
            let by_id: HashMap<&str, &FinalPrediction> =
                predictions.iter().map(|p| (p.instance_id.as_str(), p)).collect();
            (
                pairs.iter().map(|(d, _)| by_id[d.instance_id.as_str()].clone()).collect(),
                pairs.iter().map(|(_, c)| by_id[c.instance_id.as_str()].clone()).collect(),
            )
        };
        let default_instances: Vec<ProblemInstance> = pairs.iter().map(|(d, _)| d.clone()).collect();
        let cf_instances: Vec<ProblemInstance> = pairs.iter().map(|(_, c)| c.clone()).collect();
        let d = accuracy(&defaults, &default_instances)?;
        let c = accuracy(&cfs, &cf_instances)?;
        let p = mcnemar_exact(&paired_correctness(&defaults, &cfs, &pairs)?);
        report.default_accuracy = Some(d);
        report.cf_accuracy = Some(c);
        report.delta = Some(delta_from_accuracies(d, c));
        report.mcnemar_p = Some(p);
        report.significant = Some(p < SIGNIFICANCE_LEVEL);
    }
    debug_assert!(report
        .premise_buckets
        .buckets
        .keys()
        .all(|k| BUCKET_RANGE.contains(k)));
    Ok(report)
}

fn instance_result(i: &ProblemInstance, p: &FinalPrediction) -> InstanceResult {
    InstanceResult {
        instance_id: i.instance_id.clone(),
        variant: i.variant,
        gold: i.gold,
        premise_count: i.premise_count(),
        label: p.label,
        correct: p.label == Some(i.gold),
        vote_counts: p.vote_counts.clone(),
        error_count: p.error_count,
        all_errors: p.all_errors,
        tie_broken: p.tie_broken,
    }
}

fn signed(v: f64) -> String {
    let rounded = (v * 100.0).round() / 100.0;
    if rounded > 0.0 {
        format!("+{rounded:.2}")
    } else {
        // avoid printing -0.00
        format!("{:.2}", rounded + 0.0)
    }
}

/// Accuracy table with one column per mode: a Default row, and CF and Δ
/// rows when any report is paired. Δ cells get `*` when significant.
pub fn table_csv(model: &str, reports: &[EvalReport]) -> String {
    let by_mode: HashMap<Mode, &EvalReport> = reports.iter().map(|r| (r.mode, r)).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model".to_string(), "row".to_string()];
    header.extend(Mode::ALL.iter().map(|m| m.to_string()));
    w.write_record(&header).unwrap();

    let cells = |f: &dyn Fn(&EvalReport) -> Option<String>| -> Vec<String> {
        Mode::ALL
            .iter()
            .map(|m| by_mode.get(m).and_then(|r| f(r)).unwrap_or_default())
            .collect()
    };
    let mut rows: Vec<(&str, Vec<String>)> =
        vec![("Default", cells(&|r| Some(format!("{:.2}", r.default_row()))))];
    if reports.iter().any(|r| r.delta.is_some()) {
        rows.push(("CF", cells(&|r| r.cf_accuracy.map(|a| format!("{a:.2}")))));
        rows.push((
            "Delta",
            cells(&|r| {
                r.delta.map(|d| {
                    let star = if r.significant == Some(true) { "*" } else { "" };
                    format!("{}{star}", signed(d))
                })
            }),
        ));
    }
    for (name, values) in rows {
        let mut record = vec![model.to_string(), name.to_string()];
        record.extend(values);
        w.write_record(&record).unwrap();
    }
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
