//! Moderated panel summarization of debatable queries.
//!
//! Given a yes/no query and a set of stance-labeled documents, the pipeline
//! treats each document as a panel speaker, plans an agenda of topics, has a
//! moderator pick and query-tailor speakers per topic, tracks the speakers'
//! stance-labeled perspectives in an outline, and condenses the outline into
//! a topic-structured summary whose every sentence cites its sources. The
//! [`metrics`] module scores such summaries by citation coverage, stance
//! balance (KL to uniform and to the input distribution), entailment-judged
//! citation accuracy, and self-BLEU.
//!
//! Model access is abstracted behind [`llm::ModelBackend`]: a live
//! chat-completion client or a deterministic scripted stand-in, both metered
//! by a per-stage usage ledger.

pub mod corpus;
pub mod llm;
pub mod metrics;
pub mod parallel;
pub mod pipeline;
pub mod retrieval;

pub use corpus::{DebateEntry, Document, Stance, StanceDist};
pub use llm::{HttpBackend, ModelBackend, PromptLibrary, ScriptedBackend, Session};
pub use metrics::{CitationReport, CitationSet};
pub use pipeline::{
    Ablation, BaselineKind, Mode, Outline, Pipeline, PipelineConfig, RunReport, Summary,
};
