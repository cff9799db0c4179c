use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GatewayError, Generation, GenerationSource, PromptKey, SamplingConfig};

fn default_finish_reason() -> String {
    "stop".to_string()
}

/// One line of a fixture file. Extra fields are ignored, so a run's
/// outcomes file doubles as a fixture file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub instance_id: String,
    pub mode: String,
    pub sample_index: usize,
    pub raw_text: String,
    #[serde(default = "default_finish_reason")]
    pub finish_reason: String,
}

/// Recorded generations keyed by (instance_id, mode, sample_index).
#[derive(Clone, Debug, Default)]
pub struct FixtureStore {
    records: HashMap<(String, String, usize), FixtureRecord>,
}

impl FixtureStore {
    pub fn open(path: &Path) -> Result<Self, GatewayError> {
        Self::from_jsonl(&fs::read_to_string(path)?)
    }

    /// Later lines win over earlier ones with the same key.
    pub fn from_jsonl(text: &str) -> Result<Self, GatewayError> {
        let mut store = FixtureStore::default();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: FixtureRecord = serde_json::from_str(line).map_err(|e| {
                GatewayError::Fixture {
                    line: i + 1,
                    message: e.to_string(),
                }
            })?;
            store.insert(record);
        }
        Ok(store)
    }

    pub fn insert(&mut self, record: FixtureRecord) {
        let key = (record.instance_id.clone(), record.mode.clone(), record.sample_index);
        self.records.insert(key, record);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn replay(
        &self,
        instance_id: &str,
        mode: &str,
        sample_index: usize,
    ) -> Result<Generation, GatewayError> {
        let key = (instance_id.to_string(), mode.to_string(), sample_index);
        let record = self
            .records
            .get(&key)
            .ok_or_else(|| GatewayError::MissingFixture {
                instance_id: instance_id.to_string(),
                mode: mode.to_string(),
                sample_index,
            })?;
        Ok(Generation {
            raw_text: record.raw_text.clone(),
            sample_index,
            finish_reason: record.finish_reason.clone(),
            latency: 0.0,
        })
    }
}

/// Looks up one recorded generation in the fixture file at `path`.
pub fn replay(
    path: &Path,
    instance_id: &str,
    mode: &str,
    sample_index: usize,
) -> Result<Generation, GatewayError> {
    FixtureStore::open(path)?.replay(instance_id, mode, sample_index)
}

impl GenerationSource for FixtureStore {
    fn generate(
        &self,
        key: &PromptKey,
        _prompt: &str,
        _sampling: &SamplingConfig,
        sample_indices: &[usize],
    ) -> Result<Vec<Generation>, GatewayError> {
        sample_indices
            .iter()
            .map(|&i| self.replay(&key.instance_id, &key.mode, i))
            .collect()
    }
}
