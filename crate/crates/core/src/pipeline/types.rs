//! Domain types threaded through the panel-discussion pipeline.

use crate::corpus::Stance;
use crate::metrics::CitationSet;
use crate::retrieval::{RankedContexts, DEFAULT_K};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// One planned discussion topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    /// 0-based position in the agenda.
    pub index: usize,
    pub title: String,
}

/// Extractive biography of one document: its top-k paragraphs for a query.
#[derive(Debug, Clone, PartialEq)]
pub struct Biography {
    pub doc_id: u32,
    pub query_used: String,
    pub contexts: RankedContexts,
}

/// One tailored speaker assignment within a topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeakerAssignment {
    pub doc_id: u32,
    pub tailored_query: String,
}

/// The moderator's picks for one topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub topic_index: usize,
    pub speakers: Vec<SpeakerAssignment>,
}

impl Selection {
    pub fn doc_ids(&self) -> BTreeSet<u32> {
        self.speakers.iter().map(|s| s.doc_id).collect()
    }
}

/// A stance-labeled factual sentence contributed by one document. The stance
/// is absent only under the stance-dropping ablation, where exports show the
/// perspective as "unlabeled".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Perspective {
    #[serde(with = "stance_label")]
    pub stance: Option<Stance>,
    pub fact: String,
}

mod stance_label {
    use super::Stance;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Option<Stance>, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(match value {
            Some(Stance::Yes) => "yes",
            Some(Stance::No) => "no",
            None => "unlabeled",
        })
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<Option<Stance>, D::Error> {
        let raw = String::deserialize(de)?;
        match raw.as_str() {
            "yes" => Ok(Some(Stance::Yes)),
            "no" => Ok(Some(Stance::No)),
            "unlabeled" => Ok(None),
            other => Err(serde::de::Error::custom(format!(
                "stance must be yes, no, or unlabeled, got {other:?}"
            ))),
        }
    }
}

/// One document's contribution to one topic section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineEntry {
    pub doc_id: u32,
    pub tailored_query: String,
    pub perspectives: Vec<Perspective>,
    /// Recorded when a speaker responded but contributed nothing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub empty_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutlineSection {
    pub topic: Topic,
    /// Entries sorted by ascending document id.
    pub entries: Vec<OutlineEntry>,
}

/// The structured ledger built during speaker discussion: the content plan
/// the final summary is written from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outline {
    pub query: String,
    pub sections: Vec<OutlineSection>,
}

/// Outline-level coverage figures for run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlineStats {
    /// Per topic: fraction of documents contributing at least one perspective.
    pub per_topic_coverage: Vec<f64>,
    pub mean_coverage: f64,
    pub total_perspectives: usize,
    /// (topic, document) entries with at least one perspective.
    pub contributing_entries: usize,
    pub perspectives_per_contributing_entry: f64,
}

impl Outline {
    /// All document ids appearing anywhere in the outline.
    pub fn doc_ids(&self) -> BTreeSet<u32> {
        self.sections
            .iter()
            .flat_map(|s| s.entries.iter().map(|e| e.doc_id))
            .collect()
    }

    pub fn stats(&self, n_docs: usize) -> OutlineStats {
        let mut per_topic_coverage = Vec::with_capacity(self.sections.len());
        let mut total_perspectives = 0;
        let mut contributing_entries = 0;
        for section in &self.sections {
            let contributing = section
                .entries
                .iter()
                .filter(|e| !e.perspectives.is_empty())
                .count();
            per_topic_coverage.push(contributing as f64 / n_docs.max(1) as f64);
            contributing_entries += contributing;
            total_perspectives += section
                .entries
                .iter()
                .map(|e| e.perspectives.len())
                .sum::<usize>();
        }
        let mean_coverage = if per_topic_coverage.is_empty() {
            0.0
        } else {
            per_topic_coverage.iter().sum::<f64>() / per_topic_coverage.len() as f64
        };
        OutlineStats {
            per_topic_coverage,
            mean_coverage,
            total_perspectives,
            contributing_entries,
            perspectives_per_contributing_entry: if contributing_entries == 0 {
                0.0
            } else {
                total_perspectives as f64 / contributing_entries as f64
            },
        }
    }
}

/// Free-form paragraph built for one topic when the outline is ablated away.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicDraft {
    pub topic_index: usize,
    pub draft: String,
}

/// One summary sentence with the citations it carries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub text: String,
    pub citations: CitationSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryParagraph {
    pub topic: Topic,
    pub sentences: Vec<Sentence>,
}

impl SummaryParagraph {
    /// Sentences joined back into the paragraph's running text.
    pub fn text(&self) -> String {
        self.sentences
            .iter()
            .map(|s| s.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn citations(&self) -> CitationSet {
        let mut out = CitationSet::default();
        for sentence in &self.sentences {
            out.extend(sentence.citations.iter());
        }
        out
    }
}

/// The final output: one paragraph of cited sentences per topic, in topic
/// order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub paragraphs: Vec<SummaryParagraph>,
}

impl Summary {
    pub fn all_citations(&self) -> CitationSet {
        let mut out = CitationSet::default();
        for paragraph in &self.paragraphs {
            out.extend(paragraph.citations().iter());
        }
        out
    }

    pub fn total_sentences(&self) -> usize {
        self.paragraphs.iter().map(|p| p.sentences.len()).sum()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        for paragraph in &self.paragraphs {
            if !out.is_empty() {
                out.push('\n');
            }
            out.push_str("## ");
            out.push_str(&paragraph.topic.title);
            out.push_str("\n\n");
            out.push_str(&paragraph.text());
            out.push('\n');
        }
        out
    }
}

/// How the outline is condensed into the summary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Summarize each topic section in its own prompt.
    ModsTopic,
    /// Summarize the whole outline in one prompt.
    ModsAll,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::ModsTopic => "mods_topic",
            Mode::ModsAll => "mods_all",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s.replace('-', "_").as_str() {
            "mods_topic" => Ok(Mode::ModsTopic),
            "mods_all" => Ok(Mode::ModsAll),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

/// Pipeline components that can be switched off for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    /// Tailored queries are replaced by the topic title.
    NoTailor,
    /// Speaker selection returns ids only; queries come from a second pass.
    NoCot,
    /// One combined call replaces the per-speaker calls.
    NoSpeak,
    /// Every speaker responds to every topic.
    NoMod,
    /// Stances are dropped from the outline.
    NoStance,
    /// Free-form per-topic drafts replace outline entries.
    NoOutline,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::NoTailor,
        Ablation::NoCot,
        Ablation::NoSpeak,
        Ablation::NoMod,
        Ablation::NoStance,
        Ablation::NoOutline,
    ];
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ablation::NoTailor => "no_tailor",
            Ablation::NoCot => "no_cot",
            Ablation::NoSpeak => "no_speak",
            Ablation::NoMod => "no_mod",
            Ablation::NoStance => "no_stance",
            Ablation::NoOutline => "no_outline",
        })
    }
}

impl FromStr for Ablation {
    type Err = String;

    fn from_str(s: &str) -> Result<Ablation, String> {
        match s.replace('-', "_").as_str() {
            "no_tailor" => Ok(Ablation::NoTailor),
            "no_cot" => Ok(Ablation::NoCot),
            "no_speak" => Ok(Ablation::NoSpeak),
            "no_mod" => Ok(Ablation::NoMod),
            "no_stance" => Ok(Ablation::NoStance),
            "no_outline" => Ok(Ablation::NoOutline),
            other => Err(format!("unknown ablation {other:?}")),
        }
    }
}

/// The non-panel summarizers compared against the panel pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    /// All documents in a single prompt.
    LongContext,
    /// Top k·|D| contexts pooled across documents.
    RagAll,
    /// Top k contexts of each document.
    RagDoc,
    /// Per-document summaries merged in a second pass.
    Hierarchical,
    /// Draft updated per document, then refined all at once.
    IncrementalAll,
    /// Draft updated per document, then refined per topic.
    IncrementalTopic,
}

impl BaselineKind {
    pub const ALL: [BaselineKind; 6] = [
        BaselineKind::LongContext,
        BaselineKind::RagAll,
        BaselineKind::RagDoc,
        BaselineKind::Hierarchical,
        BaselineKind::IncrementalAll,
        BaselineKind::IncrementalTopic,
    ];
}

impl fmt::Display for BaselineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaselineKind::LongContext => "long_context",
            BaselineKind::RagAll => "rag_all",
            BaselineKind::RagDoc => "rag_doc",
            BaselineKind::Hierarchical => "hierarchical",
            BaselineKind::IncrementalAll => "incremental_all",
            BaselineKind::IncrementalTopic => "incremental_topic",
        })
    }
}

impl FromStr for BaselineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<BaselineKind, String> {
        match s.replace('-', "_").as_str() {
            "long_context" => Ok(BaselineKind::LongContext),
            "rag_all" => Ok(BaselineKind::RagAll),
            "rag_doc" => Ok(BaselineKind::RagDoc),
            "hierarchical" => Ok(BaselineKind::Hierarchical),
            "incremental_all" => Ok(BaselineKind::IncrementalAll),
            "incremental_topic" => Ok(BaselineKind::IncrementalTopic),
            other => Err(format!("unknown baseline {other:?}")),
        }
    }
}

/// Full configuration of one pipeline run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Number of summary topics (the task's m).
    pub topics: usize,
    /// Retrieval depth.
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineKind>,
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub ablations: BTreeSet<Ablation>,
    /// Upper bound on concurrent speaker calls.
    pub parallelism: usize,
}

impl Default for PipelineConfig {
    fn default() -> PipelineConfig {
        PipelineConfig {
            topics: 3,
            k: DEFAULT_K,
            mode: None,
            baseline: None,
            ablations: BTreeSet::new(),
            parallelism: 4,
        }
    }
}

impl PipelineConfig {
    pub fn mods(mode: Mode, topics: usize) -> PipelineConfig {
        PipelineConfig {
            topics,
            mode: Some(mode),
            ..PipelineConfig::default()
        }
    }

    pub fn for_baseline(kind: BaselineKind, topics: usize) -> PipelineConfig {
        PipelineConfig {
            topics,
            baseline: Some(kind),
            ..PipelineConfig::default()
        }
    }

    pub fn with_ablations(
        mut self,
        ablations: impl IntoIterator<Item = Ablation>,
    ) -> PipelineConfig {
        self.ablations.extend(ablations);
        self
    }

    pub fn has(&self, ablation: Ablation) -> bool {
        self.ablations.contains(&ablation)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.topics < 2 {
            return Err(format!("topics must exceed 1, got {}", self.topics));
        }
        if self.k < 1 {
            return Err("retrieval depth k must be at least 1".into());
        }
        if self.parallelism < 1 {
            return Err("parallelism must be at least 1".into());
        }
        if self.mode.is_some() && self.baseline.is_some() {
            return Err("mode and baseline are mutually exclusive".into());
        }
        if self.baseline.is_some() && !self.ablations.is_empty() {
            return Err("ablations require a panel mode, not a baseline".into());
        }
        Ok(())
    }
}
