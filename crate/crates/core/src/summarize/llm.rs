//! Chat-completion client (OpenAI-compatible wire format) with an offline stub.
//!
//! The API key is read from the environment at call time and is never stored
//! in the config, logged, or included in error messages.

use std::sync::atomic::{AtomicU32, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::sentences::split_sentences;
use crate::topics::label_prompt;

pub const DEFAULT_API_KEY_ENV: &str = "HADES_LLM_API_KEY";

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("LLM unavailable after {attempts} attempt(s): {last_error}")]
    LlmUnavailable { attempts: u32, last_error: String },
    #[error("LLM response malformed: {0}")]
    BadResponse(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub max_retries: u32,
    pub timeout_secs: u64,
    pub backoff_base_ms: u64,
    pub stub: bool,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1".into(),
            model: "gpt-3.5-turbo-instruct".into(),
            api_key_env: DEFAULT_API_KEY_ENV.into(),
            max_retries: 3,
            timeout_secs: 60,
            backoff_base_ms: 1000,
            stub: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LlmRequest {
    TopicLabel { topic: usize, words: Vec<String> },
    Summary { text: String, prompt: String },
}

impl LlmRequest {
    fn user_message(&self) -> String {
        match self {
            LlmRequest::TopicLabel { words, .. } => {
                let refs: Vec<&str> = words.iter().map(String::as_str).collect();
                label_prompt(&refs)
            }
            LlmRequest::Summary { text, prompt } => format!("{text}\n\n{prompt}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub retries: u32,
}

enum Backend {
    Stub { failures_left: AtomicU32 },
    Http(ureq::Agent),
}

pub struct LlmClient {
    config: LlmConfig,
    backend: Backend,
}

impl std::fmt::Debug for LlmClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LlmClient")
            .field("endpoint", &self.config.endpoint)
            .field("model", &self.config.model)
            .field("stub", &self.config.stub)
            .finish()
    }
}

impl LlmClient {
    pub fn new(config: LlmConfig) -> Self {
        let backend = if config.stub {
            Backend::Stub {
                failures_left: AtomicU32::new(0),
            }
        } else {
            let agent = ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .build()
                .into();
            Backend::Http(agent)
        };
        Self { config, backend }
    }

    /// Deterministic offline double: labels are `topic-{k}: w1/w2`, summaries
    /// are the first three sentences of the input.
    pub fn stub() -> Self {
        Self::new(LlmConfig {
            stub: true,
            ..LlmConfig::default()
        })
    }

    /// Stub whose first `n` calls fail, for exercising the retry path.
    pub fn stub_failing(n: u32, backoff_base: Duration) -> Self {
        Self {
            config: LlmConfig {
                stub: true,
                backoff_base_ms: backoff_base.as_millis() as u64,
                ..LlmConfig::default()
            },
            backend: Backend::Stub {
                failures_left: AtomicU32::new(n),
            },
        }
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    pub fn is_stub(&self) -> bool {
        matches!(self.backend, Backend::Stub { .. })
    }

    /// Send with up to `max_retries` retries, sleeping base·2^i before retry i.
    pub fn complete(&self, request: &LlmRequest) -> Result<Completion, LlmError> {
        let base = Duration::from_millis(self.config.backoff_base_ms);
        let mut retries = 0;
        loop {
            match self.attempt(request) {
                Ok(text) => return Ok(Completion { text, retries }),
                Err(e) if retries >= self.config.max_retries => {
                    return Err(LlmError::LlmUnavailable {
                        attempts: retries + 1,
                        last_error: e,
                    })
                }
                Err(_) => {
                    std::thread::sleep(base * 2u32.pow(retries));
                    retries += 1;
                }
            }
        }
    }

    fn attempt(&self, request: &LlmRequest) -> Result<String, String> {
        match &self.backend {
            Backend::Stub { failures_left } => {
                if failures_left
                    .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |n| n.checked_sub(1))
                    .is_ok()
                {
                    return Err("stub failure".into());
                }
                Ok(stub_response(request))
            }
            Backend::Http(agent) => self.http_attempt(agent, request),
        }
    }

    fn http_attempt(&self, agent: &ureq::Agent, request: &LlmRequest) -> Result<String, String> {
        let url = format!("{}/chat/completions", self.config.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": self.config.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": request.user_message()}],
        });
        let mut req = agent.post(&url);
        if let Ok(key) = std::env::var(&self.config.api_key_env) {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = req.send_json(&body).map_err(|e| e.to_string())?;
        let value: serde_json::Value = response.body_mut().read_json().map_err(|e| e.to_string())?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(|s| s.trim().to_string())
            .ok_or_else(|| "response has no choices[0].message.content".to_string())
    }
}

fn stub_response(request: &LlmRequest) -> String {
    match request {
        LlmRequest::TopicLabel { topic, words } => {
            let head: Vec<&str> = words.iter().take(2).map(String::as_str).collect();
            format!("topic-{topic}: {}", head.join("/"))
        }
        LlmRequest::Summary { text, .. } => split_sentences(text)
            .sentences
            .iter()
            .take(3)
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" "),
    }
}
