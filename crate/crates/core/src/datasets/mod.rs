//! Problem instances, the JSON-lines dataset schema and upstream
//! conversion.

mod convert;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prover::Label;

pub use convert::{convert_upstream, UpstreamFormat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Default,
    Counterfactual,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Default => "default",
            Variant::Counterfactual => "counterfactual",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "default" => Ok(Variant::Default),
            "counterfactual" | "cf" => Ok(Variant::Counterfactual),
            _ => Err(format!("unknown variant `{s}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub instance_id: String,
    pub premises_nl: Vec<String>,
    pub conclusion_nl: String,
    pub gold: Label,
    pub variant: Variant,
    pub pair_id: Option<String>,
}

impl ProblemInstance {
    pub fn premise_count(&self) -> usize {
        self.premises_nl.len()
    }

    /// Whitespace-delimited tokens over premises and conclusion.
    pub fn word_count(&self) -> usize {
        self.premises_nl
            .iter()
            .chain(std::iter::once(&self.conclusion_nl))
            .map(|s| s.split_whitespace().count())
            .sum()
    }

    pub fn to_record(&self) -> DatasetRecord {
        DatasetRecord {
            id: self.instance_id.clone(),
            pair_id: self.pair_id.clone(),
            variant: self.variant.as_str().to_string(),
            premises: self.premises_nl.clone(),
            conclusion: self.conclusion_nl.clone(),
            label: self.gold.as_str().to_string(),
        }
    }
}

/// One line of a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_id: Option<String>,
    #[serde(default = "default_variant")]
    pub variant: String,
    pub premises: Vec<String>,
    pub conclusion: String,
    pub label: String,
}

fn default_variant() -> String {
    Variant::Default.as_str().to_string()
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("line {line}: unknown gold label `{value}`")]
    Label { line: usize, value: String },
    #[error("pair `{pair_id}`: {message}")]
    Pairing { pair_id: String, message: String },
    #[error("pair `{pair_id}`: gold labels differ ({default} vs {counterfactual})")]
    GoldMismatch {
        pair_id: String,
        default: Label,
        counterfactual: Label,
    },
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("{0}")]
    Convert(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn instance_from_record(record: DatasetRecord, line: usize) -> Result<ProblemInstance, DatasetError> {
    let schema = |message: String| DatasetError::Schema { line, message };
    if record.id.trim().is_empty() {
        return Err(schema("empty id".into()));
    }
    if record.premises.is_empty() {
        return Err(schema("premises must be nonempty".into()));
    }
    let gold = record.label.parse().map_err(|_| DatasetError::Label {
        line,
        value: record.label.clone(),
    })?;
    let variant: Variant = record.variant.parse().map_err(schema)?;
    if variant == Variant::Counterfactual && record.pair_id.is_none() {
        return Err(schema("counterfactual record without pair_id".into()));
    }
    Ok(ProblemInstance {
        instance_id: record.id,
        premises_nl: record.premises,
        conclusion_nl: record.conclusion,
        gold,
        variant,
        pair_id: record.pair_id,
    })
}

/// Parses JSON-lines text into instances, in file order. Blank lines are
/// skipped; ids must be unique.
pub fn parse_instances(text: &str) -> Result<Vec<ProblemInstance>, DatasetError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: DatasetRecord = serde_json::from_str(line).map_err(|e| DatasetError::Schema {
            line: i + 1,
            message: e.to_string(),
        })?;
        let instance = instance_from_record(record, i + 1)?;
        if !seen.insert(instance.instance_id.clone()) {
            return Err(DatasetError::Schema {
                line: i + 1,
                message: format!("duplicate id `{}`", instance.instance_id),
            });
        }
        out.push(instance);
    }
    Ok(out)
}

pub fn load_instances(path: &Path) -> Result<Vec<ProblemInstance>, DatasetError> {
    parse_instances(&fs::read_to_string(path)?)
}

/// Loads a default-only evaluation set.
pub fn load_folio(path: &Path) -> Result<Vec<ProblemInstance>, DatasetError> {
    let text = fs::read_to_string(path)?;
    let instances = parse_instances(&text)?;
    if let Some(pos) = instances.iter().position(|i| i.variant != Variant::Default) {
        return Err(DatasetError::Schema {
            line: line_of(&text, pos),
            message: "counterfactual record in a default-only dataset".into(),
        });
    }
    Ok(instances)
}

fn line_of(text: &str, record_index: usize) -> usize {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .nth(record_index)
        .map_or(0, |(i, _)| i + 1)
}

/// Groups instances into (default, counterfactual) pairs, ordered by the
/// first appearance of each pair id.
pub fn pair_instances(
    instances: Vec<ProblemInstance>,
) -> Result<Vec<(ProblemInstance, ProblemInstance)>, DatasetError> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, (Vec<ProblemInstance>, Vec<ProblemInstance>)> = HashMap::new();
    for instance in instances {
        let Some(pair_id) = instance.pair_id.clone() else {
            return Err(DatasetError::Pairing {
                pair_id: instance.instance_id,
                message: "record has no pair_id".into(),
            });
        };
        let group = groups.entry(pair_id.clone()).or_insert_with(|| {
            order.push(pair_id);
            Default::default()
        });
        match instance.variant {
            Variant::Default => group.0.push(instance),
            Variant::Counterfactual => group.1.push(instance),
        }
    }
    let mut pairs = Vec::with_capacity(order.len());
    for pair_id in order {
        let (mut defaults, mut cfs) = groups.remove(&pair_id).unwrap();
        if defaults.len() != 1 || cfs.len() != 1 {
            return Err(DatasetError::Pairing {
                pair_id,
                message: format!(
                    "expected one default and one counterfactual record, found {} and {}",
                    defaults.len(),
                    cfs.len()
                ),
            });
        }
        let (d, c) = (defaults.pop().unwrap(), cfs.pop().unwrap());
        if d.gold != c.gold {
            return Err(DatasetError::GoldMismatch {
                pair_id,
                default: d.gold,
                counterfactual: c.gold,
            });
        }
        pairs.push((d, c));
    }
    Ok(pairs)
}

pub fn load_rr_pairs(path: &Path) -> Result<Vec<(ProblemInstance, ProblemInstance)>, DatasetError> {
    pair_instances(load_instances(path)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub instances: usize,
    pub mean_premises: f64,
    pub mean_words: f64,
}

pub fn dataset_stats(instances: &[ProblemInstance]) -> Result<DatasetStats, DatasetError> {
    if instances.is_empty() {
        return Err(DatasetError::EmptyDataset);
    }
    let n = instances.len() as f64;
    let premises: usize = instances.iter().map(ProblemInstance::premise_count).sum();
    let words: usize = instances.iter().map(ProblemInstance::word_count).sum();
    Ok(DatasetStats {
        instances: instances.len(),
        mean_premises: premises as f64 / n,
        mean_words: words as f64 / n,
    })
}

/// Serializes instances back into dataset lines.
pub fn to_jsonl(instances: &[ProblemInstance]) -> String {
    instances
        .iter()
        .map(|i| serde_json::to_string(&i.to_record()).unwrap() + "\n")
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, pair: Option<&str>, variant: &str, label: &str) -> String {
        let mut v = serde_json::json!({
            "id": id, "variant": variant,
            "premises": ["All cats purr.", "Tom is a cat."],
            "conclusion": "Tom purrs.", "label": label,
        });
        if let Some(p) = pair {
            v["pair_id"] = p.into();
        }
        v.to_string()
    }

    #[test]
    fn empty_text_is_empty_list() {
        assert!(parse_instances("").unwrap().is_empty());
    }

    #[test]
    fn unknown_label() {
        let text = format!("{}\n{}\n", line("a", None, "default", "True"), line("b", None, "default", "Maybe"));
        assert!(matches!(parse_instances(&text), Err(DatasetError::Label { line: 2, .. })));
    }

    #[test]
    fn schema_errors_carry_line_numbers() {
        let text = format!("{}\n\n{{\"id\": \"x\"}}\n", line("a", None, "default", "True"));
        assert!(matches!(parse_instances(&text), Err(DatasetError::Schema { line: 3, .. })));
        let dup = format!("{}\n{}\n", line("a", None, "default", "True"), line("a", None, "default", "True"));
        assert!(matches!(parse_instances(&dup), Err(DatasetError::Schema { line: 2, .. })));
    }

    #[test]
    fn pairing() {
        let ok = parse_instances(&format!(
            "{}\n{}\n",
            line("d1", Some("p1"), "default", "True"),
            line("c1", Some("p1"), "counterfactual", "true"),
        ))
        .unwrap();
        let pairs = pair_instances(ok).unwrap();
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0.instance_id, "d1");

        let mismatch = parse_instances(&format!(
            "{}\n{}\n",
            line("d1", Some("p1"), "default", "True"),
            line("c1", Some("p1"), "cf", "False"),
        ))
        .unwrap();
        assert!(matches!(pair_instances(mismatch), Err(DatasetError::GoldMismatch { .. })));

        let single = parse_instances(&line("d1", Some("p1"), "default", "True")).unwrap();
        assert!(matches!(pair_instances(single), Err(DatasetError::Pairing { .. })));
    }

    #[test]
    fn counterfactual_needs_pair_id() {
        assert!(matches!(
            parse_instances(&line("c", None, "counterfactual", "True")),
            Err(DatasetError::Schema { .. })
        ));
    }

    #[test]
    fn stats() {
        let text = line("a", None, "default", "True");
        let instances = parse_instances(&text).unwrap();
        let s = dataset_stats(&instances).unwrap();
        assert_eq!(s.mean_premises, 2.0);
        assert_eq!(s.mean_words, 9.0);
        assert!(matches!(dataset_stats(&[]), Err(DatasetError::EmptyDataset)));
    }
}
