//! Deterministic scripted backend for offline runs and tests.
//!
//! A script maps `{shape tag: {match key: response text}}`. A request is
//! answered by the entry whose match key is a substring of the request's
//! joined message content; among matching keys the longest wins (ties go to
//! the lexicographically greatest), so the empty key `""` doubles as the
//! shape's default response. Identical requests always produce identical
//! responses.

use super::{approx_tokens, ChatRequest, ChatResponse, LlmError, ModelBackend};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Default)]
pub struct ScriptedBackend {
    script: BTreeMap<String, BTreeMap<String, String>>,
}

impl ScriptedBackend {
    pub fn new() -> ScriptedBackend {
        ScriptedBackend::default()
    }

    /// Parse a script from its JSON form.
    pub fn from_json(text: &str) -> Result<ScriptedBackend, LlmError> {
        let script: BTreeMap<String, BTreeMap<String, String>> = serde_json::from_str(text)
            .map_err(|e| LlmError::Configuration(format!("invalid script file: {e}")))?;
        Ok(ScriptedBackend { script })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<ScriptedBackend, LlmError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            LlmError::Configuration(format!("cannot read script {}: {e}", path.display()))
        })?;
        ScriptedBackend::from_json(&text)
    }

    /// Register a response for `(shape, match_key)`.
    pub fn insert(
        &mut self,
        shape: impl Into<String>,
        match_key: impl Into<String>,
        response: impl Into<String>,
    ) -> &mut ScriptedBackend {
        self.script
            .entry(shape.into())
            .or_default()
            .insert(match_key.into(), response.into());
        self
    }

    fn lookup(&self, shape: &str, haystack: &str) -> Option<&str> {
        let rules = self.script.get(shape)?;
        rules
            .iter()
            .filter(|(key, _)| haystack.contains(key.as_str()))
            .max_by_key(|(key, _)| (key.len(), key.as_str()))
            .map(|(_, response)| response.as_str())
    }
}

impl ModelBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let shape = request
            .expected_shape
            .as_ref()
            .map(|s| s.tag())
            .unwrap_or("raw");
        let haystack = request.joined_content();
        let text = self
            .lookup(shape, &haystack)
            .ok_or_else(|| LlmError::Backend {
                attempts: 1,
                message: format!("no scripted response matches shape {shape:?}"),
            })?
            .to_string();
        Ok(ChatResponse {
            input_tokens: approx_tokens(&haystack),
            output_tokens: approx_tokens(&text),
            text,
        })
    }

    fn name(&self) -> &'static str {
        "scripted"
    }
}
