//! The non-panel baseline summarizers.
//!
//! All produce the same artifact as the panel pipeline: m topic paragraphs of
//! cited sentences. Long-context and the two RAG variants are single-prompt;
//! hierarchical merging summarizes each document and merges; the incremental
//! variants plan topics, update an m-paragraph draft one document at a time,
//! and finish with a densifying self-refine pass (all paragraphs at once, or
//! one refine call per topic).

use super::render;
use super::types::{BaselineKind, Summary, Topic};
use super::{
    BaselineRun, Omission, Pipeline, PipelineError, RunReport, STAGE_DOC_SUMMARY, STAGE_MERGE,
    STAGE_REFINE, STAGE_SUMMARIZE, STAGE_UPDATE, SYSTEM_PROMPT,
};
use crate::corpus::{DebateEntry, Document};
use crate::llm::{render_template, ChatRequest, Shape, SummarySection};
use crate::retrieval::{build_index, retrieve};

impl<'a> Pipeline<'a> {
    pub(crate) fn run_baseline_inner(
        &self,
        entry: &DebateEntry,
        kind: BaselineKind,
    ) -> Result<BaselineRun, PipelineError> {
        let mut warnings = Vec::new();
        let mut omissions = Vec::new();
        let m = self.config.topics;
        let (summary, topics) = match kind {
            BaselineKind::LongContext => {
                let prompt = render_template(
                    &self.prompts.long_context,
                    &[
                        ("query", entry.query.as_str()),
                        ("m", &m.to_string()),
                        ("documents", &render::full_documents(entry)),
                    ],
                )?;
                let sections = self.summary_call(STAGE_SUMMARIZE, prompt, Some(m), entry)?;
                let summary = self.sections_to_summary(sections, None, &mut warnings);
                let topics = summary_topics(&summary);
                (summary, topics)
            }
            BaselineKind::RagAll => {
                let pooled = self.pooled_contexts(entry)?;
                let prompt = render_template(
                    &self.prompts.rag_all,
                    &[
                        ("query", entry.query.as_str()),
                        ("m", &m.to_string()),
                        ("contexts", &render::pooled_contexts(&pooled)),
                    ],
                )?;
                let sections = self.summary_call(STAGE_SUMMARIZE, prompt, Some(m), entry)?;
                let summary = self.sections_to_summary(sections, None, &mut warnings);
                let topics = summary_topics(&summary);
                (summary, topics)
            }
            BaselineKind::RagDoc => {
                let biographies = self.make_biographies(entry, &entry.query)?;
                let prompt = render_template(
                    &self.prompts.rag_doc,
                    &[
                        ("query", entry.query.as_str()),
                        ("m", &m.to_string()),
                        ("contexts", &render::biographies(entry, &biographies)),
                    ],
                )?;
                let sections = self.summary_call(STAGE_SUMMARIZE, prompt, Some(m), entry)?;
                let summary = self.sections_to_summary(sections, None, &mut warnings);
                let topics = summary_topics(&summary);
                (summary, topics)
            }
            BaselineKind::Hierarchical => {
                let mut doc_summaries = Vec::new();
                for doc in &entry.documents {
                    match self.summarize_document(entry, doc) {
                        Ok(text) => doc_summaries.push(format!("Document {}:\n{text}", doc.id)),
                        Err(error) => omissions.push(Omission {
                            topic_index: None,
                            doc_id: doc.id,
                            stage: STAGE_DOC_SUMMARY.to_string(),
                            reason: error.to_string(),
                        }),
                    }
                }
                let prompt = render_template(
                    &self.prompts.hierarchical_merge,
                    &[
                        ("query", entry.query.as_str()),
                        ("m", &m.to_string()),
                        ("doc_summaries", &doc_summaries.join("\n\n")),
                    ],
                )?;
                let sections = self.summary_call(STAGE_MERGE, prompt, Some(m), entry)?;
                let summary = self.sections_to_summary(sections, None, &mut warnings);
                let topics = summary_topics(&summary);
                (summary, topics)
            }
            BaselineKind::IncrementalAll | BaselineKind::IncrementalTopic => {
                self.run_incremental(entry, kind, &mut warnings, &mut omissions)?
            }
        };
        Ok(BaselineRun {
            summary,
            report: RunReport {
                query: entry.query.clone(),
                backend: self.session.backend_name().to_string(),
                config: self.config.clone(),
                topics,
                selections: Vec::new(),
                omissions,
                warnings,
                outline_stats: None,
                freeform_drafts: None,
                usage: self.session.usage(),
            },
        })
    }

    /// Top k·|D| paragraphs pooled across all documents, ranked against the
    /// query with the same scorer retrieval uses per document.
    fn pooled_contexts(&self, entry: &DebateEntry) -> Result<Vec<(u32, String)>, PipelineError> {
        let mut origins: Vec<(u32, usize)> = Vec::new();
        let mut paragraphs: Vec<String> = Vec::new();
        for doc in &entry.documents {
            for (pi, text) in doc.paragraphs.iter().enumerate() {
                origins.push((doc.id, pi));
                paragraphs.push(text.clone());
            }
        }
        // One synthetic pool document: paragraph order preserves (doc, index)
        // order, so score ties resolve to the lower doc id first.
        let pool = Document {
            id: u32::MAX,
            source_url: None,
            stance: crate::corpus::Stance::Yes,
            paragraphs,
        };
        let index = build_index(&pool);
        let k = self.config.k * entry.documents.len();
        let ranked = retrieve(&index, &entry.query, k)?;
        Ok(ranked
            .items
            .iter()
            .map(|item| {
                let (doc_id, pi) = origins[item.paragraph_index];
                let doc = entry.document(doc_id).expect("origin is valid");
                (doc_id, doc.paragraphs[pi].clone())
            })
            .collect())
    }

    fn summarize_document(
        &self,
        entry: &DebateEntry,
        doc: &Document,
    ) -> Result<String, PipelineError> {
        let prompt = render_template(
            &self.prompts.hierarchical_doc,
            &[
                ("query", entry.query.as_str()),
                ("doc_id", &doc.id.to_string()),
                ("document", &doc.paragraphs.join("\n")),
            ],
        )?;
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::Paragraph);
        Ok(self
            .session
            .complete_structured(STAGE_DOC_SUMMARY, &request, |_| Ok(()))?
            .into_paragraph())
    }

    fn run_incremental(
        &self,
        entry: &DebateEntry,
        kind: BaselineKind,
        warnings: &mut Vec<String>,
        omissions: &mut Vec<Omission>,
    ) -> Result<(Summary, Vec<Topic>), PipelineError> {
        let m = self.config.topics;
        let biographies = self.make_biographies(entry, &entry.query)?;
        let topics = self.plan_agenda(entry, &biographies)?;
        let mut draft: Vec<SummarySection> = topics
            .iter()
            .map(|t| SummarySection {
                title: t.title.clone(),
                body: "(empty)".to_string(),
            })
            .collect();
        for doc in &entry.documents {
            let prompt = render_template(
                &self.prompts.incremental_update,
                &[
                    ("query", entry.query.as_str()),
                    ("m", &m.to_string()),
                    ("draft", &render::draft_sections(&draft)),
                    ("doc_id", &doc.id.to_string()),
                    ("document", &doc.paragraphs.join("\n")),
                ],
            )?;
            match self.summary_call(STAGE_UPDATE, prompt, Some(m), entry) {
                Ok(sections) => draft = adopt_sections(&topics, sections, warnings),
                Err(error) => omissions.push(Omission {
                    topic_index: None,
                    doc_id: doc.id,
                    stage: STAGE_UPDATE.to_string(),
                    reason: error.to_string(),
                }),
            }
        }
        let refined = match kind {
            BaselineKind::IncrementalAll => {
                let prompt = render_template(
                    &self.prompts.incremental_refine_all,
                    &[
                        ("query", entry.query.as_str()),
                        ("m", &m.to_string()),
                        ("draft", &render::draft_sections(&draft)),
                    ],
                )?;
                let sections = self.summary_call(STAGE_REFINE, prompt, Some(m), entry)?;
                adopt_sections(&topics, sections, warnings)
            }
            BaselineKind::IncrementalTopic => {
                let mut refined = Vec::with_capacity(draft.len());
                for (topic, section) in topics.iter().zip(&draft) {
                    let prompt = render_template(
                        &self.prompts.incremental_refine_topic,
                        &[
                            ("query", entry.query.as_str()),
                            ("topic", topic.title.as_str()),
                            ("paragraph", section.body.as_str()),
                        ],
                    )?;
                    let sections = self.summary_call(STAGE_REFINE, prompt, Some(1), entry)?;
                    refined.extend(adopt_sections(
                        std::slice::from_ref(topic),
                        sections,
                        warnings,
                    ));
                }
                refined
            }
            _ => unreachable!("incremental kinds only"),
        };
        let summary = self.sections_to_summary(refined, Some(&topics), warnings);
        Ok((summary, topics))
    }
}

/// Keep the canonical topic titles when adopting a draft update, warning on
/// headers the model changed.
fn adopt_sections(
    topics: &[Topic],
    sections: Vec<SummarySection>,
    warnings: &mut Vec<String>,
) -> Vec<SummarySection> {
    sections
        .into_iter()
        .enumerate()
        .map(|(i, section)| match topics.get(i) {
            Some(topic) => {
                if topic.title != section.title {
                    warnings.push(format!(
                        "draft section {i} titled {:?}, expected {:?}",
                        section.title, topic.title
                    ));
                }
                SummarySection {
                    title: topic.title.clone(),
                    body: section.body,
                }
            }
            None => section,
        })
        .collect()
}

fn summary_topics(summary: &Summary) -> Vec<Topic> {
    summary.paragraphs.iter().map(|p| p.topic.clone()).collect()
}
