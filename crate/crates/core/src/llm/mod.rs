//! Chat-completion backend abstraction.
//!
//! Every model interaction flows through a [`ModelBackend`]: either the live
//! HTTP client ([`HttpBackend`]) or the deterministic [`ScriptedBackend`]
//! used by tests and fixtures. A [`Session`] wraps one backend with a
//! [`UsageLedger`] so token and call counts accumulate per pipeline stage,
//! and implements the structured-output retry policy: up to two re-prompts
//! on a schema violation, each appending a corrective instruction, then a
//! hard error.

mod http;
mod prompts;
mod script;
mod shapes;

pub use http::HttpBackend;
pub use prompts::{render_template, PromptLibrary};
pub use script::ScriptedBackend;
pub use shapes::{
    parse_structured, render_entailment, render_grouped_perspectives, render_perspectives,
    render_selection, render_summary_sections, render_topics, Shape, SpeakerPerspectives,
    SpeakerPick, Structured, SummarySection,
};

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};
use thiserror::Error;

/// Re-prompts allowed after a schema-violating reply.
pub const MAX_REPROMPTS: u32 = 2;

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("backend error after {attempts} attempt(s): {message}")]
    Backend { attempts: u32, message: String },
    #[error("structured output error for shape {shape}: {message} (offending output: {span:?})")]
    StructuredOutput {
        shape: String,
        message: String,
        span: String,
    },
    #[error("prompt template error: {0}")]
    Template(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// One chat-completion request. Temperature defaults to 0 so runs are as
/// deterministic as the backend allows.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub expected_shape: Option<Shape>,
}

impl ChatRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>, shape: Shape) -> ChatRequest {
        ChatRequest {
            messages: vec![ChatMessage::system(system), ChatMessage::user(user)],
            temperature: 0.0,
            expected_shape: Some(shape),
        }
    }

    fn validate(&self) -> Result<(), LlmError> {
        if !self.messages.iter().any(|m| m.role == Role::User) {
            return Err(LlmError::InvalidRequest(
                "request must contain at least one user message".into(),
            ));
        }
        if self.temperature < 0.0 {
            return Err(LlmError::InvalidRequest(format!(
                "temperature must be nonnegative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }

    /// All message contents joined, as matched by scripted backends.
    pub fn joined_content(&self) -> String {
        let mut out = String::new();
        for message in &self.messages {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str(&message.content);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub input_tokens: u64,
    pub output_tokens: u64,
}

/// Abstract chat-completion endpoint. Implementations must be safe for
/// concurrent `complete` calls.
pub trait ModelBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;

    /// Short label used in run reports.
    fn name(&self) -> &'static str;
}

/// Token and call accounting, keyed by pipeline stage name.
#[derive(Debug, Default)]
pub struct UsageLedger {
    stages: Mutex<BTreeMap<String, StageUsage>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageUsage {
    pub input_tokens: u64,
    pub output_tokens: u64,
    pub calls: u64,
}

/// Point-in-time view of a ledger; totals are always the per-stage sums.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageSummary {
    pub total_input_tokens: u64,
    pub total_output_tokens: u64,
    pub call_count: u64,
    pub per_stage: BTreeMap<String, StageUsage>,
}

impl UsageSummary {
    /// Cost estimate under caller-supplied per-token rates.
    pub fn cost(&self, rate_in: f64, rate_out: f64) -> f64 {
        self.total_input_tokens as f64 * rate_in + self.total_output_tokens as f64 * rate_out
    }
}

impl UsageLedger {
    pub fn new() -> UsageLedger {
        UsageLedger::default()
    }

    pub fn record(&self, stage: &str, response: &ChatResponse) {
        let mut stages = self.stages.lock().expect("ledger lock");
        let entry = stages.entry(stage.to_string()).or_default();
        entry.input_tokens += response.input_tokens;
        entry.output_tokens += response.output_tokens;
        entry.calls += 1;
    }

    pub fn summary(&self) -> UsageSummary {
        let stages = self.stages.lock().expect("ledger lock");
        let mut summary = UsageSummary {
            per_stage: stages.clone(),
            ..UsageSummary::default()
        };
        for usage in stages.values() {
            summary.total_input_tokens += usage.input_tokens;
            summary.total_output_tokens += usage.output_tokens;
            summary.call_count += usage.calls;
        }
        summary
    }
}

/// A backend plus its ledger: the handle pipeline stages call into. Backends
/// are shared via `Arc` so several sessions (one per dataset entry, say) can
/// meter the same backend independently.
pub struct Session {
    backend: Arc<dyn ModelBackend>,
    ledger: UsageLedger,
}

impl Session {
    pub fn new(backend: Arc<dyn ModelBackend>) -> Session {
        Session {
            backend,
            ledger: UsageLedger::new(),
        }
    }

    pub fn backend_name(&self) -> &'static str {
        self.backend.name()
    }

    pub fn usage(&self) -> UsageSummary {
        self.ledger.summary()
    }

    /// Complete a request, recording usage under `stage`.
    pub fn complete(&self, stage: &str, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let response = self.backend.complete(request)?;
        self.ledger.record(stage, &response);
        Ok(response)
    }

    /// Complete a request whose reply must parse into the request's expected
    /// shape and pass `validate`. Schema violations are re-prompted up to
    /// [`MAX_REPROMPTS`] times with a corrective instruction appended.
    pub fn complete_structured<F>(
        &self,
        stage: &str,
        request: &ChatRequest,
        validate: F,
    ) -> Result<Structured, LlmError>
    where
        F: Fn(&Structured) -> Result<(), String>,
    {
        let shape = request.expected_shape.clone().ok_or_else(|| {
            LlmError::InvalidRequest("structured completion requires an expected shape".into())
        })?;
        let mut attempt_request = request.clone();
        for attempt in 0..=MAX_REPROMPTS {
            let response = self.complete(stage, &attempt_request)?;
            let outcome = parse_structured(&response.text, &shape).and_then(|value| {
                validate(&value)
                    .map(|()| value)
                    .map_err(|message| LlmError::StructuredOutput {
                        shape: shape.tag().to_string(),
                        message,
                        span: truncate_span(&response.text),
                    })
            });
            match outcome {
                Ok(value) => return Ok(value),
                Err(error) if attempt < MAX_REPROMPTS => {
                    attempt_request.messages.push(ChatMessage::user(format!(
                        "Your previous reply could not be used: {error}. \
                         Reply again and follow the required format exactly."
                    )));
                }
                Err(error) => return Err(error),
            }
        }
        unreachable!("retry loop returns on success or final error")
    }
}

pub(crate) fn truncate_span(text: &str) -> String {
    const LIMIT: usize = 160;
    if text.chars().count() <= LIMIT {
        text.to_string()
    } else {
        let head: String = text.chars().take(LIMIT).collect();
        format!("{head}…")
    }
}

/// Whitespace token count: the approximate accounting used by offline
/// backends where exact API tokenization is unavailable.
pub(crate) fn approx_tokens(text: &str) -> u64 {
    text.split_whitespace().count() as u64
}
