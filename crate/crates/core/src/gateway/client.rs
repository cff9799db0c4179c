use std::fmt;
use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::Deserialize;
use serde_json::{json, Value};
use url::Url;

use super::{
    EndpointConfig, GatewayError, Generation, GenerationSource, PromptKey, SamplingConfig,
};

/// Counting semaphore bounding in-flight requests.
pub struct Semaphore {
    available: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    pub fn new(permits: usize) -> Self {
        Semaphore {
            available: Mutex::new(permits),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap();
        while *n == 0 {
            n = self.freed.wait(n).unwrap();
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap() += 1;
        self.0.freed.notify_one();
    }
}

#[derive(Deserialize)]
struct Response {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    #[serde(default)]
    index: Option<usize>,
    message: Message,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

enum Failure {
    Retryable,
    Permanent,
    Fatal(GatewayError),
}

/// Blocking client for an OpenAI-compatible chat-completions endpoint.
/// Shareable across threads; all requests go through one semaphore.
pub struct ChatClient {
    endpoint: EndpointConfig,
    url: Url,
    http: Client,
    api_key: Option<String>,
    permits: Arc<Semaphore>,
}

impl fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChatClient")
            .field("url", &self.url.as_str())
            .field("model", &self.endpoint.model_name)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

impl ChatClient {
    /// Reads the API key from the configured environment variable; a
    /// missing key means requests are sent without authorization.
    pub fn new(endpoint: EndpointConfig) -> Result<Self, GatewayError> {
        let api_key = std::env::var(&endpoint.api_key_env)
            .ok()
            .filter(|k| !k.is_empty());
        Self::with_api_key(endpoint, api_key)
    }

    pub fn with_api_key(
        endpoint: EndpointConfig,
        api_key: Option<String>,
    ) -> Result<Self, GatewayError> {
        endpoint.validate()?;
        let url = endpoint.completions_url()?;
        let http = Client::builder()
            .timeout(Duration::from_secs_f64(endpoint.request_timeout))
            .build()
            .map_err(|e| GatewayError::Config(e.to_string()))?;
        let permits = Arc::new(Semaphore::new(endpoint.max_concurrency));
        Ok(ChatClient {
            endpoint,
            url,
            http,
            api_key,
            permits,
        })
    }

    pub fn endpoint(&self) -> &EndpointConfig {
        &self.endpoint
    }

    /// `n_samples` generations indexed `0..n_samples`.
    pub fn complete(
        &self,
        prompt: &str,
        sampling: &SamplingConfig,
    ) -> Result<Vec<Generation>, GatewayError> {
        let indices: Vec<usize> = (0..sampling.n_samples).collect();
        self.sample(prompt, sampling, &indices)
    }

    fn body(&self, prompt: &str, sampling: &SamplingConfig, n: usize, seed: Option<u64>) -> Value {
        let mut messages = Vec::new();
        if let Some(system) = &self.endpoint.system_prompt {
            messages.push(json!({"role": "system", "content": system}));
        }
        messages.push(json!({"role": "user", "content": prompt}));
        let mut body = json!({
            "model": self.endpoint.model_name,
            "messages": messages,
            "temperature": sampling.temperature,
            "top_p": sampling.top_p,
            "n": n,
            "max_tokens": sampling.max_tokens,
        });
        if let Some(seed) = seed {
            body["seed"] = json!(seed);
        }
        body
    }

    fn send_once(&self, body: &Value) -> Result<Vec<(String, String)>, Failure> {
        let _permit = self.permits.acquire();
        let mut request = self.http.post(self.url.clone()).json(body);
        if let Some(key) = &self.api_key {
            request = request.bearer_auth(key);
        }
        let response = request.send().map_err(|_| Failure::Retryable)?;
        let status = response.status();
        if status == StatusCode::UNAUTHORIZED || status == StatusCode::FORBIDDEN {
            return Err(Failure::Fatal(GatewayError::Auth {
                status: status.as_u16(),
            }));
        }
        if status.is_server_error() {
            return Err(Failure::Retryable);
        }
        if !status.is_success() {
            return Err(Failure::Permanent);
        }
        let text = response.text().map_err(|_| Failure::Retryable)?;
        let mut parsed: Response = serde_json::from_str(&text).map_err(|_| Failure::Permanent)?;
        parsed.choices.sort_by_key(|c| c.index.unwrap_or(usize::MAX));
        Ok(parsed
            .choices
            .into_iter()
            .map(|c| {
                (
                    c.message.content.unwrap_or_default(),
                    c.finish_reason.unwrap_or_else(|| "stop".to_string()),
                )
            })
            .collect())
    }

    /// Sends `body` with retries. `Ok(None)` means the request failed for
    /// good and the affected samples become transport errors.
    fn send(&self, body: &Value) -> Result<Option<Vec<(String, String)>>, GatewayError> {
        let mut attempt = 0;
        loop {
            match self.send_once(body) {
                Ok(choices) => return Ok(Some(choices)),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Permanent) => return Ok(None),
                Err(Failure::Retryable) if attempt >= self.endpoint.max_retries => return Ok(None),
                Err(Failure::Retryable) => {
                    let wait = self.endpoint.retry_backoff * 2f64.powi(attempt as i32);
                    thread::sleep(Duration::from_secs_f64(wait));
                    attempt += 1;
                }
            }
        }
    }

    fn single(
        &self,
        prompt: &str,
        sampling: &SamplingConfig,
        index: usize,
    ) -> Result<Generation, GatewayError> {
        let seed = sampling.seed.map(|s| s.wrapping_add(index as u64));
        let start = Instant::now();
        let result = self.send(&self.body(prompt, sampling, 1, seed))?;
        let latency = start.elapsed().as_secs_f64();
        Ok(match result.and_then(|c| c.into_iter().next()) {
            Some((raw_text, finish_reason)) => Generation {
                raw_text,
                sample_index: index,
                finish_reason,
                latency,
            },
            None => Generation::transport_error(index, latency),
        })
    }

    fn sample(
        &self,
        prompt: &str,
        sampling: &SamplingConfig,
        indices: &[usize],
    ) -> Result<Vec<Generation>, GatewayError> {
        sampling.validate()?;
        let mut out: Vec<Option<Generation>> = vec![None; indices.len()];
        if self.endpoint.batched && indices.len() > 1 {
            let start = Instant::now();
            let body = self.body(prompt, sampling, indices.len(), sampling.seed);
            if let Some(choices) = self.send(&body)? {
                let latency = start.elapsed().as_secs_f64();
                for ((slot, &index), (raw_text, finish_reason)) in
                    out.iter_mut().zip(indices).zip(choices)
                {
                    *slot = Some(Generation {
                        raw_text,
                        sample_index: index,
                        finish_reason,
                        latency,
                    });
                }
            }
        }
        // whatever the batch did not cover is requested one by one
        let pending: Vec<usize> = (0..indices.len()).filter(|&i| out[i].is_none()).collect();
        let results: Vec<Result<Generation, GatewayError>> = thread::scope(|s| {
            let handles: Vec<_> = pending
                .iter()
                .map(|&i| s.spawn(move || self.single(prompt, sampling, indices[i])))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (i, result) in pending.into_iter().zip(results) {
            out[i] = Some(result?);
        }
        Ok(out.into_iter().map(Option::unwrap).collect())
    }
}

impl GenerationSource for ChatClient {
    fn generate(
        &self,
        _key: &PromptKey,
        prompt: &str,
        sampling: &SamplingConfig,
        sample_indices: &[usize],
    ) -> Result<Vec<Generation>, GatewayError> {
        self.sample(prompt, sampling, sample_indices)
    }
}

/// Queries `endpoint` for `sampling.n_samples` generations of `prompt`.
pub fn complete(
    prompt: &str,
    endpoint: &EndpointConfig,
    sampling: &SamplingConfig,
) -> Result<Vec<Generation>, GatewayError> {
    ChatClient::new(endpoint.clone())?.complete(prompt, sampling)
}
