//! The moderated panel-discussion pipeline and its baselines.
//!
//! A run walks the loop: build per-document biographies by retrieval, plan an
//! agenda of topics, have a moderator pick and query-tailor speakers per
//! topic, collect each speaker's stance-labeled perspectives into an outline,
//! and condense the outline into a cited, topic-structured summary. Ablation
//! flags switch individual stages off; the baseline variants produce the same
//! summary artifact without the panel.

mod baselines;
mod export;
mod render;
mod stages;
mod types;

pub use export::{export_outline, parse_outline_json, ExportFormat};
pub use types::{
    Ablation, BaselineKind, Biography, Mode, Outline, OutlineEntry, OutlineSection, OutlineStats,
    Perspective, PipelineConfig, Selection, Sentence, SpeakerAssignment, Summary, SummaryParagraph,
    Topic, TopicDraft,
};

use crate::corpus::DebateEntry;
use crate::llm::{LlmError, PromptLibrary, Session, UsageSummary};
use crate::retrieval::RetrievalError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// System message sent with every pipeline request.
pub const SYSTEM_PROMPT: &str =
    "You are a careful component of a document summarization pipeline. \
     Follow the output format instructions exactly.";

pub const STAGE_AGENDA: &str = "agenda";
pub const STAGE_SELECTION: &str = "selection";
pub const STAGE_TAILOR: &str = "tailor";
pub const STAGE_SPEAKER: &str = "speaker";
pub const STAGE_SUMMARIZE: &str = "summarize";
pub const STAGE_DOC_SUMMARY: &str = "doc_summary";
pub const STAGE_MERGE: &str = "merge";
pub const STAGE_UPDATE: &str = "update";
pub const STAGE_REFINE: &str = "refine";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("agenda planning failed: {0}")]
    Agenda(#[source] LlmError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error("validation failed: {0}")]
    Validation(String),
}

/// A documented skip: which document was left out of which stage and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Omission {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topic_index: Option<usize>,
    pub doc_id: u32,
    pub stage: String,
    pub reason: String,
}

/// Everything the discussion loop produced before summarization.
#[derive(Debug, Clone, PartialEq)]
pub struct Discussion {
    pub outline: Outline,
    pub topics: Vec<Topic>,
    pub selections: Vec<Selection>,
    pub omissions: Vec<Omission>,
    pub warnings: Vec<String>,
    /// Per-topic free-form paragraphs, present only under the outline
    /// ablation.
    pub drafts: Option<Vec<TopicDraft>>,
}

/// Machine-readable record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub query: String,
    pub backend: String,
    pub config: PipelineConfig,
    pub topics: Vec<Topic>,
    pub selections: Vec<Selection>,
    pub omissions: Vec<Omission>,
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outline_stats: Option<OutlineStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freeform_drafts: Option<Vec<TopicDraft>>,
    pub usage: UsageSummary,
}

/// Output of a full panel run.
#[derive(Debug, Clone, PartialEq)]
pub struct ModsRun {
    pub outline: Outline,
    pub summary: Summary,
    pub report: RunReport,
}

/// Output of a baseline run.
#[derive(Debug, Clone, PartialEq)]
pub struct BaselineRun {
    pub summary: Summary,
    pub report: RunReport,
}

/// One configured driver over a session and prompt set.
pub struct Pipeline<'a> {
    session: &'a Session,
    prompts: &'a PromptLibrary,
    config: PipelineConfig,
}

impl<'a> Pipeline<'a> {
    pub fn new(
        session: &'a Session,
        prompts: &'a PromptLibrary,
        config: PipelineConfig,
    ) -> Result<Pipeline<'a>, PipelineError> {
        config.validate().map_err(PipelineError::Config)?;
        Ok(Pipeline {
            session,
            prompts,
            config,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn usage(&self) -> UsageSummary {
        self.session.usage()
    }

    /// Run the full panel pipeline on one entry.
    pub fn run_mods(&self, entry: &DebateEntry) -> Result<ModsRun, PipelineError> {
        let mode = self
            .config
            .mode
            .ok_or_else(|| PipelineError::Config("panel run needs a mode".into()))?;
        let discussion = self.build_outline(entry)?;
        let (summary, summary_warnings) = self.summarize_outline(entry, &discussion, mode)?;
        let mut warnings = discussion.warnings.clone();
        warnings.extend(summary_warnings);
        let outline_stats = discussion
            .drafts
            .is_none()
            .then(|| discussion.outline.stats(entry.documents.len()));
        let report = RunReport {
            query: entry.query.clone(),
            backend: self.session.backend_name().to_string(),
            config: self.config.clone(),
            topics: discussion.topics.clone(),
            selections: discussion.selections.clone(),
            omissions: discussion.omissions.clone(),
            warnings,
            outline_stats,
            freeform_drafts: discussion.drafts.clone(),
            usage: self.session.usage(),
        };
        Ok(ModsRun {
            outline: discussion.outline,
            summary,
            report,
        })
    }

    /// Run one baseline summarizer on one entry.
    pub fn run_baseline(
        &self,
        entry: &DebateEntry,
        kind: BaselineKind,
    ) -> Result<BaselineRun, PipelineError> {
        self.run_baseline_inner(entry, kind)
    }
}
