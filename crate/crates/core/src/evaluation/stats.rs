use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{EvalError, FinalPrediction, GenerationOutcome};
use crate::datasets::ProblemInstance;
use crate::prover::Label;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Premise counts reported individually; anything else lands in "other".
pub const BUCKET_RANGE: std::ops::RangeInclusive<usize> = 2..=8;

/// Pairs each instance with its prediction, in instance order.
fn align<'a>(
    predictions: &'a [FinalPrediction],
    instances: &'a [ProblemInstance],
) -> Result<Vec<(&'a ProblemInstance, &'a FinalPrediction)>, EvalError> {
    if predictions.len() != instances.len() {
        return Err(EvalError::CountMismatch(format!(
            "{} predictions for {} instances",
            predictions.len(),
            instances.len()
        )));
    }
    let mut by_id: HashMap<&str, &FinalPrediction> = HashMap::new();
    for p in predictions {
        if by_id.insert(p.instance_id.as_str(), p).is_some() {
            return Err(EvalError::CountMismatch(format!(
                "two predictions for `{}`",
                p.instance_id
            )));
        }
    }
    instances
        .iter()
        .map(|i| {
            by_id
                .get(i.instance_id.as_str())
                .map(|p| (i, *p))
                .ok_or_else(|| EvalError::CountMismatch(format!("no prediction for `{}`", i.instance_id)))
        })
        .collect()
}

fn is_correct(instance: &ProblemInstance, prediction: &FinalPrediction) -> bool {
    prediction.label == Some(instance.gold)
}

/// Percentage of instances predicted correctly; all-error predictions are
/// wrong.
pub fn accuracy(predictions: &[FinalPrediction], instances: &[ProblemInstance]) -> Result<f64, EvalError> {
    let aligned = align(predictions, instances)?;
    if aligned.is_empty() {
        return Ok(0.0);
    }
    let correct = aligned.iter().filter(|(i, p)| is_correct(i, p)).count();
    Ok(100.0 * correct as f64 / aligned.len() as f64)
}

/// Counterfactual minus default accuracy, in percentage points.
pub fn delta_from_accuracies(default: f64, counterfactual: f64) -> f64 {
    counterfactual - default
}

fn pair_predictions<'a>(
    default_preds: &'a [FinalPrediction],
    cf_preds: &'a [FinalPrediction],
    pairs: &'a [(ProblemInstance, ProblemInstance)],
) -> Result<Vec<(bool, bool)>, EvalError> {
    let index = |preds: &'a [FinalPrediction]| -> HashMap<&'a str, &'a FinalPrediction> {
        preds.iter().map(|p| (p.instance_id.as_str(), p)).collect()
    };
    let (d, c) = (index(default_preds), index(cf_preds));
    let paired: HashSet<&str> = pairs
        .iter()
        .flat_map(|(a, b)| [a.instance_id.as_str(), b.instance_id.as_str()])
        .collect();
    if let Some(stray) = d.keys().chain(c.keys()).find(|id| !paired.contains(**id)) {
        return Err(EvalError::UnpairedInstance(stray.to_string()));
    }
    pairs
        .iter()
        .map(|(di, ci)| {
            let dp = d
                .get(di.instance_id.as_str())
                .ok_or_else(|| EvalError::UnpairedInstance(di.instance_id.clone()))?;
            let cp = c
                .get(ci.instance_id.as_str())
                .ok_or_else(|| EvalError::UnpairedInstance(ci.instance_id.clone()))?;
            Ok((is_correct(di, dp), is_correct(ci, cp)))
        })
        .collect()
}

/// Δ over paired default/counterfactual predictions.
pub fn robustness_delta(
    default_preds: &[FinalPrediction],
    cf_preds: &[FinalPrediction],
    pairs: &[(ProblemInstance, ProblemInstance)],
) -> Result<f64, EvalError> {
    let bits = pair_predictions(default_preds, cf_preds, pairs)?;
    if bits.is_empty() {
        return Ok(0.0);
    }
    let n = bits.len() as f64;
    let d = bits.iter().filter(|b| b.0).count() as f64;
    let c = bits.iter().filter(|b| b.1).count() as f64;
    Ok(delta_from_accuracies(100.0 * d / n, 100.0 * c / n))
}

pub(crate) fn paired_correctness(
    default_preds: &[FinalPrediction],
    cf_preds: &[FinalPrediction],
    pairs: &[(ProblemInstance, ProblemInstance)],
) -> Result<Vec<(bool, bool)>, EvalError> {
    pair_predictions(default_preds, cf_preds, pairs)
}

/// Exact two-sided McNemar test on `b` (default right, counterfactual
/// wrong) and `c` (the reverse) discordant pairs.
pub fn mcnemar_counts(b: u64, c: u64) -> f64 {
    let n = b + c;
    if n == 0 {
        return 1.0;
    }
    let k = b.min(c);
    let tail = if n <= 120 {
        let mut coef: u128 = 1;
        let mut sum: u128 = 0;
        for i in 0..=k {
            sum += coef;
            coef = coef * (n - i) as u128 / (i + 1) as u128;
        }
        sum as f64 / 2f64.powi(n as i32)
    } else {
        // log-space sum of C(n, i) / 2^n for i <= k
        let mut log_coef = 0.0f64;
        let mut terms = Vec::with_capacity(k as usize + 1);
        for i in 0..=k {
            terms.push(log_coef);
            log_coef += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
        }
        let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        (max + sum.ln() - n as f64 * std::f64::consts::LN_2).exp()
    };
    (2.0 * tail).min(1.0)
}

pub fn mcnemar_exact(paired_correctness: &[(bool, bool)]) -> f64 {
    let b = paired_correctness.iter().filter(|&&(d, c)| d && !c).count() as u64;
    let c = paired_correctness.iter().filter(|&&(d, c)| !d && c).count() as u64;
    mcnemar_counts(b, c)
}

/// Rows are gold True/False/Uncertain; columns are predicted
/// True/False/Uncertain and all-errors.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionMatrix(pub [[usize; 4]; 3]);

impl ConfusionMatrix {
    pub const ALL_ERRORS: usize = 3;

    pub fn row_sums(&self) -> [usize; 3] {
        self.0.map(|row| row.iter().sum())
    }

    pub fn total(&self) -> usize {
        self.row_sums().iter().sum()
    }
}

pub fn confusion_matrix(
    predictions: &[FinalPrediction],
    instances: &[ProblemInstance],
) -> Result<ConfusionMatrix, EvalError> {
    let mut m = ConfusionMatrix::default();
    for (i, p) in align(predictions, instances)? {
        let column = p.label.map_or(ConfusionMatrix::ALL_ERRORS, Label::index);
        m.0[i.gold.index()][column] += 1;
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaxonomyBucket {
    ArityMismatch,
    UnexpectedToken,
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub total_queries: usize,
    pub errors: usize,
    /// Percent of all queries.
    pub error_rate: f64,
    pub counts: BTreeMap<TaxonomyBucket, usize>,
    /// Fractions of all queries.
    pub proportions: BTreeMap<TaxonomyBucket, f64>,
    pub by_class: BTreeMap<super::ErrorClass, usize>,
}

/// Error counts over every query, bucketed into the two dominant syntax
/// failures and the rest.
pub fn error_taxonomy(outcomes: &[GenerationOutcome]) -> Taxonomy {
    let buckets = [TaxonomyBucket::ArityMismatch, TaxonomyBucket::UnexpectedToken, TaxonomyBucket::Other];
    let mut counts: BTreeMap<TaxonomyBucket, usize> = buckets.iter().map(|&b| (b, 0)).collect();
    let mut by_class = BTreeMap::new();
    for e in outcomes.iter().filter_map(GenerationOutcome::error) {
        *counts.get_mut(&e.bucket()).unwrap() += 1;
        *by_class.entry(e).or_insert(0) += 1;
    }
    let total = outcomes.len();
    let frac = |n: usize| if total == 0 { 0.0 } else { n as f64 / total as f64 };
    let errors: usize = counts.values().sum();
    Taxonomy {
        total_queries: total,
        errors,
        error_rate: 100.0 * frac(errors),
        proportions: counts.iter().map(|(&b, &n)| (b, frac(n))).collect(),
        counts,
        by_class,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

impl BucketStat {
    fn add(&mut self, correct: bool) {
        self.total += 1;
        self.correct += correct as usize;
        self.accuracy = 100.0 * self.correct as f64 / self.total as f64;
    }

    fn empty() -> Self {
        BucketStat {
            total: 0,
            correct: 0,
            accuracy: 0.0,
        }
    }
}

/// Instances whose premise count falls outside the reported range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OtherBucket {
    pub premise_counts: Vec<usize>,
    #[serde(flatten)]
    pub stat: BucketStat,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PremiseBuckets {
    /// Only non-empty counts appear.
    pub buckets: BTreeMap<usize, BucketStat>,
    pub other: Option<OtherBucket>,
}

pub fn bucket_by_premises(
    predictions: &[FinalPrediction],
    instances: &[ProblemInstance],
) -> Result<PremiseBuckets, EvalError> {
    let mut out = PremiseBuckets::default();
    for (i, p) in align(predictions, instances)? {
        let n = i.premise_count();
        let correct = is_correct(i, p);
        if BUCKET_RANGE.contains(&n) {
            out.buckets.entry(n).or_insert_with(BucketStat::empty).add(correct);
        } else {
            let other = out.other.get_or_insert_with(|| OtherBucket {
                premise_counts: Vec::new(),
                stat: BucketStat::empty(),
            });
            if !other.premise_counts.contains(&n) {
                other.premise_counts.push(n);
                other.premise_counts.sort();
            }
            other.stat.add(correct);
        }
    }
    Ok(out)
}
