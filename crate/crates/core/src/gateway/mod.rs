//! Chat-completion client and fixture replay behind one interface.

mod client;
mod fixtures;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use url::Url;

pub use client::{complete, ChatClient, Semaphore};
pub use fixtures::{replay, FixtureRecord, FixtureStore};

/// Finish reason recorded for samples whose request never succeeded.
pub const TRANSPORT_ERROR: &str = "transport_error";

pub const DEFAULT_API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    pub n_samples: usize,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
    pub seed: Option<u64>,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_samples: 10,
            temperature: 0.8,
            top_p: 0.95,
            max_tokens: 2048,
            seed: None,
        }
    }
}

impl SamplingConfig {
    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.n_samples == 0 {
            return Err(GatewayError::Config("n_samples must be at least 1".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(GatewayError::Config("temperature must be non-negative".into()));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(GatewayError::Config("top_p must lie in (0, 1]".into()));
        }
        if self.max_tokens == 0 {
            return Err(GatewayError::Config("max_tokens must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointConfig {
    /// Root of an OpenAI-compatible API; `/chat/completions` is appended.
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the API key. The key
    /// itself never appears in configs or reports.
    pub api_key_env: String,
    pub request_timeout: f64,
    pub max_retries: u32,
    pub max_concurrency: usize,
    /// First retry waits this long; each further retry doubles it.
    pub retry_backoff: f64,
    /// Ask for all samples in one request through the `n` parameter.
    pub batched: bool,
    pub system_prompt: Option<String>,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model_name: impl Into<String>) -> Self {
        EndpointConfig {
            base_url: base_url.into(),
            model_name: model_name.into(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            request_timeout: 120.0,
            max_retries: 3,
            max_concurrency: 4,
            retry_backoff: 1.0,
            batched: false,
            system_prompt: None,
        }
    }

    pub fn completions_url(&self) -> Result<Url, GatewayError> {
        let base = Url::parse(&self.base_url)
            .map_err(|e| GatewayError::Config(format!("base_url `{}`: {e}", self.base_url)))?;
        if !matches!(base.scheme(), "http" | "https") {
            return Err(GatewayError::Config(format!(
                "base_url must be http or https, got `{}`",
                base.scheme()
            )));
        }
        let joined = format!("{}/chat/completions", base.as_str().trim_end_matches('/'));
        Url::parse(&joined).map_err(|e| GatewayError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        self.completions_url()?;
        if self.model_name.trim().is_empty() {
            return Err(GatewayError::Config("model_name is empty".into()));
        }
        if self.max_concurrency == 0 {
            return Err(GatewayError::Config("max_concurrency must be at least 1".into()));
        }
        if !(self.request_timeout > 0.0) {
            return Err(GatewayError::Config("request_timeout must be positive".into()));
        }
        if !(self.retry_backoff >= 0.0) {
            return Err(GatewayError::Config("retry_backoff must be non-negative".into()));
        }
        Ok(())
    }
}

/// One sampled completion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generation {
    pub raw_text: String,
    pub sample_index: usize,
    pub finish_reason: String,
    /// Seconds.
    pub latency: f64,
}

impl Generation {
    pub fn transport_error(sample_index: usize, latency: f64) -> Self {
        Generation {
            raw_text: String::new(),
            sample_index,
            finish_reason: TRANSPORT_ERROR.to_string(),
            latency,
        }
    }

    pub fn is_transport_error(&self) -> bool {
        self.finish_reason == TRANSPORT_ERROR
    }
}

/// Identifies which prompt a batch of samples belongs to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PromptKey {
    pub instance_id: String,
    pub mode: String,
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("credentials rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("no fixture for ({instance_id}, {mode}, {sample_index})")]
    MissingFixture {
        instance_id: String,
        mode: String,
        sample_index: usize,
    },
    #[error("fixture file line {line}: {message}")]
    Fixture { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Anything that can produce generations for a prompt: a live endpoint or a
/// fixture store.
pub trait GenerationSource: Send + Sync {
    /// Returns one generation per requested sample index, in the order
    /// given.
    fn generate(
        &self,
        key: &PromptKey,
        prompt: &str,
        sampling: &SamplingConfig,
        sample_indices: &[usize],
    ) -> Result<Vec<Generation>, GatewayError>;
}
