//! End-to-end runs: prompt, sample, judge, record, report.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datasets::{load_instances, DatasetError, ProblemInstance};
use crate::evaluation::{build_report, judge_generation, table_csv, EvalError, EvalReport, GenerationOutcome};
use crate::gateway::{
    ChatClient, EndpointConfig, FixtureRecord, FixtureStore, GatewayError, GenerationSource, PromptKey,
    SamplingConfig,
};
use crate::prompting::{Mode, ShotSchemaError, ShotSet};
use crate::prover::ResourceLimits;

pub const OUTCOMES_FILE: &str = "outcomes.jsonl";
pub const TABLE_FILE: &str = "table.csv";

pub fn report_file_name(mode: Mode) -> String {
    format!("report_{mode}.json")
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Auth(GatewayError),
    #[error("{0}")]
    Data(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PipelineError {
    /// 1 for bad input data, 2 for configuration and credentials.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::Auth(_) => 2,
            PipelineError::Data(_) | PipelineError::Io(_) => 1,
        }
    }
}

impl From<GatewayError> for PipelineError {
    fn from(e: GatewayError) -> Self {
        match e {
            GatewayError::Config(m) => PipelineError::Config(m),
            GatewayError::Auth { .. } => PipelineError::Auth(e),
            GatewayError::Io(e) => PipelineError::Io(e),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

impl From<DatasetError> for PipelineError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(e) => PipelineError::Io(e),
            other => PipelineError::Data(other.to_string()),
        }
    }
}

impl From<EvalError> for PipelineError {
    fn from(e: EvalError) -> Self {
        PipelineError::Data(e.to_string())
    }
}

impl From<ShotSchemaError> for PipelineError {
    fn from(e: ShotSchemaError) -> Self {
        PipelineError::Config(e.to_string())
    }
}

/// Where generations come from.
#[derive(Clone, Debug)]
pub enum Backend {
    Endpoint(EndpointConfig),
    Fixtures(PathBuf),
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub dataset: PathBuf,
    pub modes: Vec<Mode>,
    pub backend: Backend,
    pub sampling: SamplingConfig,
    pub limits: ResourceLimits,
    pub output_dir: PathBuf,
    /// Directory with `<mode>.json` shot files; shipped shots otherwise.
    pub shots_dir: Option<PathBuf>,
    pub workers: usize,
}

impl RunConfig {
    /// Exactly one of `endpoint` and `fixtures` must be given.
    pub fn new(
        dataset: PathBuf,
        modes: Vec<Mode>,
        endpoint: Option<EndpointConfig>,
        fixtures: Option<PathBuf>,
        output_dir: PathBuf,
    ) -> Result<Self, PipelineError> {
        let backend = match (endpoint, fixtures) {
            (Some(_), Some(_)) => {
                return Err(PipelineError::Config(
                    "an endpoint and a fixture file are mutually exclusive".into(),
                ))
            }
            (None, None) => {
                return Err(PipelineError::Config("need an endpoint or a fixture file".into()))
            }
            (Some(e), None) => Backend::Endpoint(e),
            (None, Some(f)) => Backend::Fixtures(f),
        };
        Ok(RunConfig {
            dataset,
            modes,
            backend,
            sampling: SamplingConfig::default(),
            limits: ResourceLimits::default(),
            output_dir,
            shots_dir: None,
            workers: 4,
        })
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.modes.is_empty() {
            return Err(PipelineError::Config("no modes selected".into()));
        }
        if self.workers == 0 {
            return Err(PipelineError::Config("workers must be at least 1".into()));
        }
        self.sampling.validate()?;
        self.limits.validate().map_err(PipelineError::Config)?;
        if let Backend::Endpoint(e) = &self.backend {
            e.validate()?;
        }
        Ok(())
    }

    pub fn model_name(&self) -> String {
        match &self.backend {
            Backend::Endpoint(e) => e.model_name.clone(),
            Backend::Fixtures(_) => "fixtures".into(),
        }
    }

    fn shots(&self, mode: Mode) -> Result<ShotSet, PipelineError> {
        let set = match &self.shots_dir {
            Some(dir) => ShotSet::load(&dir.join(format!("{}.json", mode.as_str().to_lowercase())))?,
            None => ShotSet::builtin(mode),
        };
        if set.mode != mode {
            return Err(PipelineError::Config(format!(
                "shot file for {mode} declares mode {}",
                set.mode
            )));
        }
        Ok(set)
    }
}

/// One line of the outcomes file: the judged outcome plus what the model
/// said, so the file can be replayed as fixtures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    #[serde(flatten)]
    pub outcome: GenerationOutcome,
    pub raw_text: String,
    pub finish_reason: String,
}

impl From<&OutcomeRecord> for FixtureRecord {
    fn from(r: &OutcomeRecord) -> Self {
        FixtureRecord {
            instance_id: r.outcome.instance_id.clone(),
            mode: r.outcome.mode.to_string(),
            sample_index: r.outcome.sample_index,
            raw_text: r.raw_text.clone(),
            finish_reason: r.finish_reason.clone(),
        }
    }
}

type Key = (String, Mode, usize);

fn key_of(o: &GenerationOutcome) -> Key {
    (o.instance_id.clone(), o.mode, o.sample_index)
}

/// Reads an outcomes file. A final line without a newline is a write that
/// was cut short and is dropped; later duplicates of a key replace earlier
/// ones.
pub fn read_outcomes(path: &Path) -> Result<Vec<OutcomeRecord>, PipelineError> {
    let text = fs::read_to_string(path)?;
    let complete = match text.rfind('\n') {
        Some(i) => &text[..=i],
        None => "",
    };
    let mut by_key: BTreeMap<Key, OutcomeRecord> = BTreeMap::new();
    for (i, line) in complete.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: OutcomeRecord = serde_json::from_str(line).map_err(|e| {
            PipelineError::Data(format!("{} line {}: {e}", path.display(), i + 1))
        })?;
        by_key.insert(key_of(&record.outcome), record);
    }
    Ok(by_key.into_values().collect())
}

/// Reports for every mode present in `records`, in mode order. The sample
/// count is the number of samples recorded per instance.
pub fn reports_from_outcomes(
    records: &[OutcomeRecord],
    instances: &[ProblemInstance],
    dataset_name: &str,
    modes: Option<&[Mode]>,
) -> Result<Vec<EvalReport>, PipelineError> {
    let mut by_mode: BTreeMap<Mode, Vec<GenerationOutcome>> = BTreeMap::new();
    for r in records {
        by_mode.entry(r.outcome.mode).or_default().push(r.outcome.clone());
    }
    if let Some(modes) = modes {
        by_mode.retain(|m, _| modes.contains(m));
        if let Some(missing) = modes.iter().find(|m| !by_mode.contains_key(m)) {
            return Err(PipelineError::Data(format!("no outcomes for mode {missing}")));
        }
    }
    by_mode
        .into_iter()
        .map(|(mode, outcomes)| {
            let n = outcomes.iter().map(|o| o.sample_index + 1).max().unwrap_or(0);
            Ok(build_report(mode, dataset_name, n, instances, &outcomes)?)
        })
        .collect()
}

pub fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into())
}

/// Writes one JSON report per mode and the accuracy table.
pub fn write_reports(dir: &Path, model: &str, reports: &[EvalReport]) -> Result<(), PipelineError> {
    fs::create_dir_all(dir)?;
    for r in reports {
        fs::write(dir.join(report_file_name(r.mode)), r.to_json())?;
    }
    fs::write(dir.join(TABLE_FILE), table_csv(model, reports))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    /// Generations requested from the backend in this run.
    pub queried: usize,
    /// Samples already present in the outcomes file.
    pub reused: usize,
    pub reports: Vec<EvalReport>,
}

struct Job {
    key: PromptKey,
    mode: Mode,
    prompt: String,
    missing: Vec<usize>,
}

pub fn open_backend(config: &RunConfig) -> Result<Box<dyn GenerationSource>, PipelineError> {
    Ok(match &config.backend {
        Backend::Endpoint(e) => Box::new(ChatClient::new(e.clone())?),
        Backend::Fixtures(path) => Box::new(FixtureStore::open(path)?),
    })
}

/// Runs every (instance, mode) pair, skipping samples already recorded in
/// the output directory, then writes reports covering all recorded
/// samples.
pub fn run(config: &RunConfig, source: &dyn GenerationSource) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let instances = load_instances(&config.dataset)?;
    fs::create_dir_all(&config.output_dir)?;
    let outcomes_path = config.output_dir.join(OUTCOMES_FILE);

    let recorded = if outcomes_path.exists() {
        read_outcomes(&outcomes_path)?
    } else {
        Vec::new()
    };
    // drops a torn final line; records of other modes stay in the file
    rewrite(&outcomes_path, &recorded)?;
    let n = config.sampling.n_samples;
    let existing: Vec<OutcomeRecord> = recorded
        .into_iter()
        .filter(|r| config.modes.contains(&r.outcome.mode) && r.outcome.sample_index < n)
        .collect();
    let done: HashSet<Key> = existing.iter().map(|r| key_of(&r.outcome)).collect();

    let mut jobs = VecDeque::new();
    for &mode in &config.modes {
        let shots = config.shots(mode)?;
        for instance in &instances {
            let missing: Vec<usize> = (0..n)
                .filter(|&i| !done.contains(&(instance.instance_id.clone(), mode, i)))
                .collect();
            if missing.is_empty() {
                continue;
            }
            jobs.push_back(Job {
                key: PromptKey {
                    instance_id: instance.instance_id.clone(),
                    mode: mode.to_string(),
                },
                mode,
                prompt: shots.render(instance)?,
                missing,
            });
        }
    }
    let queried: usize = jobs.iter().map(|j| j.missing.len()).sum();
    let reused = existing.len();

    let queue = Mutex::new(jobs);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel::<Result<Vec<OutcomeRecord>, PipelineError>>();
    let mut writer = OpenOptions::new().append(true).create(true).open(&outcomes_path)?;
    let mut new_records = Vec::new();
    let mut failure = None;
    thread::scope(|s| {
        for _ in 0..config.workers {
            let tx = tx.clone();
            let (queue, stop) = (&queue, &stop);
            s.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let Some(job) = queue.lock().unwrap().pop_front() else { break };
                let result = source
                    .generate(&job.key, &job.prompt, &config.sampling, &job.missing)
                    .map_err(PipelineError::from)
                    .map(|gens| {
                        gens.into_iter()
                            .map(|g| OutcomeRecord {
                                outcome: judge_generation(&job.key.instance_id, job.mode, &g, &config.limits),
                                raw_text: g.raw_text,
                                finish_reason: g.finish_reason,
                            })
                            .collect()
                    });
                if tx.send(result).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        // the single writer
        for message in rx {
            match message {
                Ok(records) => {
                    let mut buf = String::new();
                    for r in &records {
                        buf.push_str(&serde_json::to_string(r).unwrap());
                        buf.push('\n');
                    }
                    if let Err(e) = writer.write_all(buf.as_bytes()).and_then(|_| writer.flush()) {
                        failure.get_or_insert(PipelineError::Io(e));
                        stop.store(true, Ordering::SeqCst);
                    }
                    new_records.extend(records);
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    stop.store(true, Ordering::SeqCst);
                }
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let mut all = existing;
    all.extend(new_records);
    let reports = reports_from_outcomes(&all, &instances, &dataset_name(&config.dataset), Some(&config.modes))?;
    write_reports(&config.output_dir, &config.model_name(), &reports)?;
    Ok(RunSummary {
        queried,
        reused,
        reports,
    })
}

fn rewrite(path: &Path, records: &[OutcomeRecord]) -> Result<(), PipelineError> {
    let mut f = File::create(path)?;
    for r in records {
        writeln!(f, "{}", serde_json::to_string(r).unwrap())?;
    }
    Ok(())
}
