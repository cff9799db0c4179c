use std::collections::HashSet;
use std::str::FromStr;

use serde_json::Value;

use super::{DatasetError, DatasetRecord, Variant};
use crate::prover::Label;

/// Upstream release layouts the converter understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpstreamFormat {
    /// FOLIO releases: `premises` as a list or a newline-joined string,
    /// `conclusion`, `label` (True/False/Unknown), `example_id` or `id`.
    Folio,
    /// FOLIO-style records that also carry `cf_premises` and optionally
    /// `cf_conclusion` (or the `counterfactual_` spellings). Each record
    /// becomes a default/counterfactual pair.
    Rr,
}

impl FromStr for UpstreamFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "folio" => Ok(UpstreamFormat::Folio),
            "rr" => Ok(UpstreamFormat::Rr),
            _ => Err(format!("unknown upstream format `{s}` (expected folio or rr)")),
        }
    }
}

fn records(text: &str) -> Result<Vec<(usize, Value)>, DatasetError> {
    if text.trim_start().starts_with('[') {
        let values: Vec<Value> =
            serde_json::from_str(text).map_err(|e| DatasetError::Convert(e.to_string()))?;
        return Ok(values.into_iter().enumerate().map(|(i, v)| (i + 1, v)).collect());
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map(|v| (i + 1, v))
                .map_err(|e| DatasetError::Schema {
                    line: i + 1,
                    message: e.to_string(),
                })
        })
        .collect()
}

fn field<'a>(v: &'a Value, names: &[&str]) -> Option<&'a Value> {
    names.iter().find_map(|n| v.get(*n)).filter(|v| !v.is_null())
}

fn premises(v: &Value, line: usize) -> Result<Vec<String>, DatasetError> {
    let items: Vec<String> = match v {
        Value::String(s) => s.lines().map(str::to_string).collect(),
        Value::Array(items) => items
            .iter()
            .map(|i| {
                i.as_str().map(str::to_string).ok_or_else(|| DatasetError::Schema {
                    line,
                    message: "premises must be strings".into(),
                })
            })
            .collect::<Result<_, _>>()?,
        _ => {
            return Err(DatasetError::Schema {
                line,
                message: "premises must be a string or a list".into(),
            })
        }
    };
    let items: Vec<String> = items
        .into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(DatasetError::Schema {
            line,
            message: "no premises".into(),
        });
    }
    Ok(items)
}

fn text_field(v: &Value, names: &[&str], line: usize) -> Result<String, DatasetError> {
    field(v, names)
        .and_then(Value::as_str)
        .map(|s| s.trim().to_string())
        .ok_or_else(|| DatasetError::Schema {
            line,
            message: format!("missing string field `{}`", names[0]),
        })
}

fn label(v: &Value, line: usize) -> Result<Label, DatasetError> {
    let raw = text_field(v, &["label"], line)?;
    if raw.eq_ignore_ascii_case("unknown") {
        return Ok(Label::Uncertain);
    }
    raw.parse().map_err(|_| DatasetError::Label { line, value: raw })
}

fn id(v: &Value, index: usize) -> String {
    match field(v, &["id", "example_id"]) {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => format!("ex{index}"),
    }
}

/// Converts an upstream release (JSON lines or one JSON array) into
/// dataset records.
pub fn convert_upstream(text: &str, format: UpstreamFormat) -> Result<Vec<DatasetRecord>, DatasetError> {
    let mut out = Vec::new();
    for (index, (line, v)) in records(text)?.into_iter().enumerate() {
        let base_id = id(&v, index);
        let gold = label(&v, line)?;
        let default_premises = premises(field(&v, &["premises"]).unwrap_or(&Value::Null), line)?;
        let conclusion = text_field(&v, &["conclusion"], line)?;
        match format {
            UpstreamFormat::Folio => out.push(DatasetRecord {
                id: base_id,
                pair_id: None,
                variant: Variant::Default.as_str().into(),
                premises: default_premises,
                conclusion,
                label: gold.as_str().into(),
            }),
            UpstreamFormat::Rr => {
                let cf_raw = field(&v, &["cf_premises", "counterfactual_premises"]).ok_or_else(|| {
                    DatasetError::Schema {
                        line,
                        message: "missing `cf_premises`".into(),
                    }
                })?;
                let cf_premises = premises(cf_raw, line)?;
                let cf_conclusion = match field(&v, &["cf_conclusion", "counterfactual_conclusion"]) {
                    Some(_) => text_field(&v, &["cf_conclusion", "counterfactual_conclusion"], line)?,
                    None => conclusion.clone(),
                };
                out.push(DatasetRecord {
                    id: format!("{base_id}_default"),
                    pair_id: Some(base_id.clone()),
                    variant: Variant::Default.as_str().into(),
                    premises: default_premises,
                    conclusion,
                    label: gold.as_str().into(),
                });
                out.push(DatasetRecord {
                    id: format!("{base_id}_cf"),
                    pair_id: Some(base_id),
                    variant: Variant::Counterfactual.as_str().into(),
                    premises: cf_premises,
                    conclusion: cf_conclusion,
                    label: gold.as_str().into(),
                });
            }
        }
    }
    let mut seen = HashSet::new();
    for r in &out {
        if !seen.insert(&r.id) {
            return Err(DatasetError::Convert(format!("duplicate id `{}`", r.id)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folio_string_premises_and_unknown() {
        let text = r#"{"story_id": 4, "example_id": 12, "premises": "All A are B.\nC is A.\n", "premises-FOL": "x", "conclusion": "C is B.", "label": "Unknown"}"#;
        let out = convert_upstream(text, UpstreamFormat::Folio).unwrap();
        assert_eq!(out[0].id, "12");
        assert_eq!(out[0].premises, vec!["All A are B.", "C is A."]);
        assert_eq!(out[0].label, "Uncertain");
    }

    #[test]
    fn array_input_and_bad_label() {
        let text = r#"[{"id": "q", "premises": ["P."], "conclusion": "Q.", "label": "Perhaps"}]"#;
        assert!(matches!(
            convert_upstream(text, UpstreamFormat::Folio),
            Err(DatasetError::Label { line: 1, .. })
        ));
    }

    #[test]
    fn rr_pairs() {
        let text = r#"{"id": "r1", "premises": ["All cats purr."], "cf_premises": ["All cats bark."], "conclusion": "Tom purrs.", "label": "True"}"#;
        let out = convert_upstream(text, UpstreamFormat::Rr).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].variant, "counterfactual");
        assert_eq!(out[1].conclusion, "Tom purrs.");
        assert_eq!(out[0].pair_id, out[1].pair_id);
    }
}
