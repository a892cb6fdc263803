//! Live chat-completion backend.
//!
//! Speaks the common chat-completion wire protocol: POST
//! `{base}/chat/completions` with a JSON body of model name, role-tagged
//! messages, and temperature. Endpoint, credential, and model come from the
//! `MODS_API_BASE`, `MODS_API_KEY`, and `MODS_MODEL` environment variables.

use super::{approx_tokens, ChatRequest, ChatResponse, LlmError, ModelBackend, Role};
use serde::Deserialize;
use std::time::Duration;

pub const ENV_API_BASE: &str = "MODS_API_BASE";
pub const ENV_API_KEY: &str = "MODS_API_KEY";
pub const ENV_MODEL: &str = "MODS_MODEL";

const TRANSPORT_ATTEMPTS: u32 = 3;

#[derive(Debug, Clone)]
pub struct HttpBackend {
    base: String,
    key: String,
    model: String,
    attempts: u32,
    retry_delay: Duration,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: String,
}

#[derive(Deserialize, Default)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl HttpBackend {
    pub fn new(base: impl Into<String>, key: impl Into<String>, model: impl Into<String>) -> Self {
        HttpBackend {
            base: base.into(),
            key: key.into(),
            model: model.into(),
            attempts: TRANSPORT_ATTEMPTS,
            retry_delay: Duration::from_millis(250),
        }
    }

    /// Configure from the environment; a missing variable is a configuration
    /// error naming it.
    pub fn from_env() -> Result<HttpBackend, LlmError> {
        let read = |var: &str, what: &str| {
            std::env::var(var)
                .ok()
                .filter(|v| !v.trim().is_empty())
                .ok_or_else(|| LlmError::Configuration(format!("missing {what} {var}")))
        };
        Ok(HttpBackend::new(
            read(ENV_API_BASE, "configuration")?,
            read(ENV_API_KEY, "credential")?,
            read(ENV_MODEL, "configuration")?,
        ))
    }

    #[cfg(test)]
    fn with_retry_delay(mut self, delay: Duration) -> Self {
        self.retry_delay = delay;
        self
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.base.trim_end_matches('/'))
    }

    fn request_body(&self, request: &ChatRequest) -> serde_json::Value {
        let messages: Vec<serde_json::Value> = request
            .messages
            .iter()
            .map(|m| {
                serde_json::json!({
                    "role": match m.role {
                        Role::System => "system",
                        Role::User => "user",
                    },
                    "content": m.content,
                })
            })
            .collect();
        serde_json::json!({
            "model": self.model,
            "messages": messages,
            "temperature": request.temperature,
        })
    }

    fn call_once(&self, body: &serde_json::Value) -> Result<WireResponse, String> {
        let mut response = ureq::post(&self.endpoint())
            .header("authorization", &format!("Bearer {}", self.key))
            .send_json(body)
            .map_err(|e| e.to_string())?;
        response
            .body_mut()
            .read_json::<WireResponse>()
            .map_err(|e| format!("malformed completion response: {e}"))
    }
}

impl ModelBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let body = self.request_body(request);
        let mut last_error = String::new();
        for attempt in 1..=self.attempts {
            match self.call_once(&body) {
                Ok(wire) => {
                    let text = wire
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.message.content)
                        .ok_or_else(|| LlmError::Backend {
                            attempts: attempt,
                            message: "completion response carried no choices".into(),
                        })?;
                    let usage = wire.usage.unwrap_or_default();
                    let input_tokens = if usage.prompt_tokens > 0 {
                        usage.prompt_tokens
                    } else {
                        approx_tokens(&request.joined_content())
                    };
                    let output_tokens = if usage.completion_tokens > 0 {
                        usage.completion_tokens
                    } else {
                        approx_tokens(&text)
                    };
                    return Ok(ChatResponse {
                        text,
                        input_tokens,
                        output_tokens,
                    });
                }
                Err(message) => {
                    last_error = message;
                    if attempt < self.attempts {
                        std::thread::sleep(self.retry_delay * attempt);
                    }
                }
            }
        }
        Err(LlmError::Backend {
            attempts: self.attempts,
            message: last_error,
        })
    }

    fn name(&self) -> &'static str {
        "live"
    }
}
