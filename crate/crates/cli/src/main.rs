use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use folharness::datasets::{convert_upstream, load_instances, UpstreamFormat};
use folharness::fol::parse_formula;
use folharness::gateway::{EndpointConfig, SamplingConfig};
use folharness::pipeline::{
    dataset_name, open_backend, read_outcomes, reports_from_outcomes, run, write_reports, PipelineError,
    RunConfig, OUTCOMES_FILE,
};
use folharness::prompting::Mode;
use folharness::prover::{classify_entailment, ResourceLimits};

#[derive(Parser)]
#[command(name = "folharness", version, about = "NL to FOL evaluation harness with a built-in prover")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse one formula and print its syntax tree.
    Parse {
        #[arg(allow_hyphen_values = true)]
        formula: String,
    },
    /// Decide whether premises entail a conclusion.
    Prove(ProveArgs),
    /// Convert an upstream FOLIO or RR release to the internal JSONL schema.
    Convert {
        input: PathBuf,
        #[arg(long, default_value = "folio")]
        format: UpstreamFormat,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Query a model (or replay fixtures) over a dataset and write reports.
    Run(RunArgs),
    /// Rebuild reports from a recorded outcomes file.
    Report {
        outcomes: PathBuf,
        dataset: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        /// Model name for the accuracy table.
        #[arg(long, default_value = "model")]
        model: String,
        /// Restrict to these modes; every recorded mode otherwise.
        #[arg(long, value_delimiter = ',')]
        mode: Vec<Mode>,
    },
}

#[derive(Args)]
struct LimitArgs {
    #[arg(long, default_value_t = ResourceLimits::default().max_clauses)]
    max_clauses: usize,
    #[arg(long, default_value_t = ResourceLimits::default().max_seconds)]
    max_seconds: f64,
    #[arg(long, default_value_t = ResourceLimits::default().max_literal_depth)]
    max_literal_depth: usize,
}

impl LimitArgs {
    fn limits(&self) -> ResourceLimits {
        ResourceLimits {
            max_clauses: self.max_clauses,
            max_seconds: self.max_seconds,
            max_literal_depth: self.max_literal_depth,
        }
    }
}

#[derive(Args)]
struct ProveArgs {
    /// One formula per line; blank lines and `#` comments are skipped.
    premises: PathBuf,
    #[arg(allow_hyphen_values = true)]
    conclusion: String,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct RunArgs {
    dataset: PathBuf,
    /// Comma-separated modes; all five by default.
    #[arg(long, value_delimiter = ',')]
    mode: Vec<Mode>,
    /// Base URL of an OpenAI-compatible endpoint.
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long, default_value = "LLM_API_KEY")]
    api_key_env: String,
    /// Recorded generations to replay instead of querying an endpoint.
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    #[arg(long)]
    shots_dir: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    workers: usize,

    #[arg(long, default_value_t = SamplingConfig::default().n_samples)]
    n_samples: usize,
    #[arg(long, default_value_t = SamplingConfig::default().temperature)]
    temperature: f64,
    #[arg(long, default_value_t = SamplingConfig::default().top_p)]
    top_p: f64,
    #[arg(long, default_value_t = SamplingConfig::default().max_tokens)]
    max_tokens: usize,
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 3)]
    max_retries: u32,
    #[arg(long, default_value_t = 4)]
    max_concurrency: usize,
    /// Ask for all samples in one request using `n`.
    #[arg(long)]
    batched: bool,
    #[arg(long)]
    system_prompt: Option<String>,

    #[command(flatten)]
    limits: LimitArgs,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, PipelineError> {
        let endpoint = match (&self.endpoint, &self.model) {
            (Some(url), Some(model)) => {
                let mut e = EndpointConfig::new(url.clone(), model.clone());
                e.api_key_env = self.api_key_env.clone();
                e.request_timeout = self.timeout;
                e.max_retries = self.max_retries;
                e.max_concurrency = self.max_concurrency;
                e.batched = self.batched;
                e.system_prompt = self.system_prompt.clone();
                Some(e)
            }
            (Some(_), None) => return Err(PipelineError::Config("--endpoint needs --model".into())),
            (None, Some(_)) => return Err(PipelineError::Config("--model needs --endpoint".into())),
            (None, None) => None,
        };
        let modes = if self.mode.is_empty() { Mode::ALL.to_vec() } else { self.mode.clone() };
        let mut config = RunConfig::new(
            self.dataset.clone(),
            modes,
            endpoint,
            self.fixtures.clone(),
            self.out.clone(),
        )?;
        config.sampling = SamplingConfig {
            n_samples: self.n_samples,
            temperature: self.temperature,
            top_p: self.top_p,
            max_tokens: self.max_tokens,
            seed: self.seed,
        };
        config.limits = self.limits.limits();
        config.shots_dir = self.shots_dir.clone();
        config.workers = self.workers;
        config.validate()?;
        Ok(config)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<PipelineError>().map_or(1, |p| p.exit_code());
            ExitCode::from(code as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<u8> {
    match command {
        Command::Parse { formula } => Ok(cmd_parse(&formula)),
        Command::Prove(args) => cmd_prove(&args),
        Command::Convert { input, format, output } => cmd_convert(&input, format, output.as_deref()),
        Command::Run(args) => cmd_run(&args),
        Command::Report {
            outcomes,
            dataset,
            out,
            model,
            mode,
        } => cmd_report(&outcomes, &dataset, &out, &model, &mode),
    }
}

fn cmd_parse(text: &str) -> u8 {
    match parse_formula(text) {
        Ok(f) => {
            println!("{f:#?}");
            0
        }
        Err(e) => {
            println!("{:?} at {}: {}", e.class, e.position, e.message);
            1
        }
    }
}

fn cmd_prove(args: &ProveArgs) -> Result<u8> {
    let text = fs::read_to_string(&args.premises)
        .with_context(|| format!("reading {}", args.premises.display()))?;
    let mut premises = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_formula(line) {
            Ok(f) => premises.push(f),
            Err(e) => {
                println!("line {}: {:?} at {}: {}", i + 1, e.class, e.position, e.message);
                return Ok(1);
            }
        }
    }
    let conclusion = match parse_formula(&args.conclusion) {
        Ok(f) => f,
        Err(e) => {
            println!("conclusion: {:?} at {}: {}", e.class, e.position, e.message);
            return Ok(1);
        }
    };
    let limits = args.limits.limits();
    limits.validate().map_err(PipelineError::Config)?;
    match classify_entailment(&premises, &conclusion, &limits) {
        Ok(e) => {
            println!("{}", e.label);
            println!("{}", serde_json::to_string_pretty(&e.trace)?);
            Ok(0)
        }
        Err(e) => {
            println!("{:?} at {}: {}", e.class, e.position, e.message);
            Ok(1)
        }
    }
}

fn cmd_convert(input: &Path, format: UpstreamFormat, output: Option<&Path>) -> Result<u8> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let records = convert_upstream(&text, format).map_err(PipelineError::from)?;
    let mut buf = String::new();
    for r in &records {
        buf.push_str(&serde_json::to_string(r)?);
        buf.push('\n');
    }
    match output {
        Some(path) => fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(buf.as_bytes())?,
    }
    eprintln!("converted {} records", records.len());
    Ok(0)
}

fn cmd_run(args: &RunArgs) -> Result<u8> {
    let config = args.config()?;
    let source = open_backend(&config)?;
    let summary = run(&config, source.as_ref())?;
    eprintln!(
        "queried {} samples, reused {}; outcomes in {}",
        summary.queried,
        summary.reused,
        config.output_dir.join(OUTCOMES_FILE).display()
    );
    for r in &summary.reports {
        println!("{}\t{:.2}", r.mode, r.accuracy);
    }
    Ok(0)
}

fn cmd_report(outcomes: &Path, dataset: &Path, out: &Path, model: &str, modes: &[Mode]) -> Result<u8> {
    let records = read_outcomes(outcomes)?;
    let instances = load_instances(dataset).map_err(PipelineError::from)?;
    let modes = (!modes.is_empty()).then_some(modes);
    let reports = reports_from_outcomes(&records, &instances, &dataset_name(dataset), modes)?;
    write_reports(out, model, &reports)?;
    for r in &reports {
        println!("{}\t{:.2}", r.mode, r.accuracy);
    }
    Ok(0)
}
