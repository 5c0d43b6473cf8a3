//! Chat-completion client with retry and exponential backoff.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LlmError {
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { attempts: u32, message: String },
    #[error("rate limited or server error (HTTP {status}) after {attempts} attempt(s)")]
    RateLimited { attempts: u32, status: u16 },
    #[error("bad response: {0}")]
    BadResponse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatExchange {
    pub endpoint: String,
    pub model: String,
    #[serde(skip_serializing, default)]
    pub api_key: Option<String>,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub timeout: f64,
    pub max_retries: u32,
    /// First backoff delay in seconds; doubles on every retry.
    pub backoff_base: f64,
}

impl ChatExchange {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self {
            endpoint: endpoint.into(),
            model: model.into(),
            api_key: None,
            messages,
            temperature: 0.2,
            timeout: 60.0,
            max_retries: 3,
            backoff_base: 1.0,
        }
    }

    /// Full URL of the chat-completions route.
    pub fn url(&self) -> String {
        let base = self.endpoint.trim_end_matches('/');
        if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        }
    }

    pub fn body(&self) -> serde_json::Value {
        json!({"model": self.model, "messages": self.messages, "temperature": self.temperature})
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChatReply {
    pub text: String,
    pub attempts: u32,
    /// Backoff delays slept before each retry, in seconds.
    pub backoffs: Vec<f64>,
}

/// Something that answers chat prompts: a live endpoint or an in-process
/// stand-in.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatReply, LlmError>;
}

enum Attempt {
    Done(String),
    Retry(LlmError),
    Fatal(LlmError),
}

fn attempt(agent: &ureq::Agent, ex: &ChatExchange) -> Attempt {
    let mut req = agent.post(ex.url()).header("Content-Type", "application/json");
    if let Some(key) = &ex.api_key {
        req = req.header("Authorization", format!("Bearer {key}"));
    }
    let mut resp = match req.send(ex.body().to_string()) {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(LlmError::Transport { attempts: 0, message: e.to_string() }),
    };
    let status = resp.status().as_u16();
    let body = match resp.body_mut().read_to_string() {
        Ok(b) => b,
        Err(e) => return Attempt::Retry(LlmError::Transport { attempts: 0, message: e.to_string() }),
    };
    if status == 429 || (500..600).contains(&status) {
        return Attempt::Retry(LlmError::RateLimited { attempts: 0, status });
    }
    if !(200..300).contains(&status) {
        return Attempt::Fatal(LlmError::BadResponse(format!("HTTP {status}: {}", body.chars().take(200).collect::<String>())));
    }
    match extract_content(&body) {
        Some(text) => Attempt::Done(text),
        None => Attempt::Fatal(LlmError::BadResponse("no assistant message content in response".into())),
    }
}

/// Pulls `choices[0].message.content` out of a chat-completion response.
pub fn extract_content(body: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(body).ok()?;
    v.get("choices")?.get(0)?.get("message")?.get("content")?.as_str().map(str::to_string)
}

/// Sends the exchange, retrying timeouts, 429s and 5xx responses with
/// delays of `base * 2^k` seconds scaled by a random factor in [1, 1.25).
pub fn call_chat<R: Rng>(ex: &ChatExchange, sleep: &dyn Fn(Duration), rng: &mut R) -> Result<ChatReply, LlmError> {
    assert!(!ex.messages.is_empty(), "chat exchange needs at least one message");
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs_f64(ex.timeout)))
        .http_status_as_error(false)
        .build()
        .into();
    let mut backoffs = Vec::new();
    let mut k = 0u32;
    loop {
        let attempts = k + 1;
        match attempt(&agent, ex) {
            Attempt::Done(text) => return Ok(ChatReply { text, attempts, backoffs }),
            Attempt::Fatal(e) => return Err(e),
            Attempt::Retry(e) => {
                if k >= ex.max_retries {
                    return Err(match e {
                        LlmError::RateLimited { status, .. } => LlmError::RateLimited { attempts, status },
                        LlmError::Transport { message, .. } => LlmError::Transport { attempts, message },
                        other => other,
                    });
                }
                let delay = ex.backoff_base * 2f64.powi(k as i32) * rng.random_range(1.0..1.25);
                log::warn!("chat call failed ({e}); retrying in {delay:.3} s");
                backoffs.push(delay);
                sleep(Duration::from_secs_f64(delay));
                k += 1;
            }
        }
    }
}

/// Live endpoint backend.
pub struct HttpBackend {
    pub template: ChatExchange,
    pub seed: u64,
}

impl HttpBackend {
    /// Endpoint and key from `COGX_LLM_BASE_URL` / `COGX_LLM_API_KEY` unless
    /// given explicitly.
    pub fn from_env(endpoint: Option<String>, api_key: Option<String>, model: &str, temperature: f64) -> Result<Self, LlmError> {
        let endpoint = endpoint
            .or_else(|| std::env::var("COGX_LLM_BASE_URL").ok())
            .ok_or_else(|| LlmError::Transport { attempts: 0, message: "COGX_LLM_BASE_URL is not set".into() })?;
        let mut template = ChatExchange::new(endpoint, model, Vec::new());
        template.api_key = api_key.or_else(|| std::env::var("COGX_LLM_API_KEY").ok());
        template.temperature = temperature;
        Ok(Self { template, seed: 0 })
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatReply, LlmError> {
        let mut ex = self.template.clone();
        ex.messages = messages.to_vec();
        let mut rng = crate::rng::stream_rng(self.seed, crate::rng::Stream::Backoff);
        call_chat(&ex, &|d| std::thread::sleep(d), &mut rng)
    }
}
