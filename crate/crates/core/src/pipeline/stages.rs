//! The panel-discussion stages: agenda planning, speaker selection and query
//! tailoring, speaker discussion into the outline, and outline summarization.

use super::render;
use super::types::{
    Ablation, Biography, Mode, Outline, OutlineEntry, OutlineSection, Selection, Sentence,
    SpeakerAssignment, Summary, SummaryParagraph, Topic, TopicDraft,
};
use super::{
    Discussion, Omission, Pipeline, PipelineError, STAGE_AGENDA, STAGE_SELECTION, STAGE_SPEAKER,
    STAGE_SUMMARIZE, STAGE_TAILOR, SYSTEM_PROMPT,
};
use crate::corpus::DebateEntry;
use crate::llm::{render_template, ChatRequest, Shape, Structured, SummarySection};
use crate::metrics::{extract_citations, split_sentences, CitationSet};
use crate::parallel::parallel_map;
use crate::pipeline::types::Perspective;
use crate::retrieval::{build_index, retrieve, tokenize};
use std::collections::BTreeMap;

impl<'a> Pipeline<'a> {
    /// One biography per document, in document order: the top-k paragraphs
    /// for `query`.
    pub fn make_biographies(
        &self,
        entry: &DebateEntry,
        query: &str,
    ) -> Result<Vec<Biography>, PipelineError> {
        entry
            .documents
            .iter()
            .map(|doc| {
                let index = build_index(doc);
                let contexts = retrieve(&index, query, self.config.k)?;
                Ok(Biography {
                    doc_id: doc.id,
                    query_used: query.to_string(),
                    contexts,
                })
            })
            .collect()
    }

    /// Plan the discussion agenda: exactly `m` distinct topics grounded in
    /// the speaker biographies.
    pub fn plan_agenda(
        &self,
        entry: &DebateEntry,
        biographies: &[Biography],
    ) -> Result<Vec<Topic>, PipelineError> {
        let m = self.config.topics;
        let bio_text = render::biographies(entry, biographies);
        let prompt = render_template(
            &self.prompts.agenda,
            &[
                ("query", entry.query.as_str()),
                ("m", &m.to_string()),
                ("biographies", &bio_text),
            ],
        )?;
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::TopicList { expected: m });
        let topics = self
            .session
            .complete_structured(STAGE_AGENDA, &request, |value| {
                let Structured::Topics(titles) = value else {
                    return Ok(());
                };
                for title in titles {
                    if tokenize(title).is_empty() {
                        return Err(format!("topic {title:?} has no searchable terms"));
                    }
                }
                Ok(())
            })
            .map_err(PipelineError::Agenda)?
            .into_topics();
        Ok(topics
            .into_iter()
            .enumerate()
            .map(|(index, title)| Topic { index, title })
            .collect())
    }

    /// Pick the speakers for one topic and tailor each a query. The ablation
    /// flags reshape this stage:
    /// - `no_mod`: every document is selected, no picking call;
    /// - `no_cot`: the picking call returns ids only and tailored queries come
    ///   from a second pass;
    /// - `no_tailor`: the tailored query is the topic title verbatim (and the
    ///   second pass is skipped).
    pub fn select_and_tailor(
        &self,
        entry: &DebateEntry,
        topic: &Topic,
        topic_biographies: &[Biography],
    ) -> Result<Selection, PipelineError> {
        let no_mod = self.config.has(Ablation::NoMod);
        let no_cot = self.config.has(Ablation::NoCot);
        let no_tailor = self.config.has(Ablation::NoTailor);
        let bio_text = render::biographies(entry, topic_biographies);

        let ids: Vec<u32> = if no_mod {
            entry.documents.iter().map(|d| d.id).collect()
        } else {
            let template = if no_cot {
                &self.prompts.selection_ids
            } else {
                &self.prompts.selection
            };
            let prompt = render_template(
                template,
                &[
                    ("query", entry.query.as_str()),
                    ("topic", topic.title.as_str()),
                    ("biographies", &bio_text),
                ],
            )?;
            let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::SpeakerSelection);
            let require_queries = !no_cot && !no_tailor;
            let picks = self
                .session
                .complete_structured(STAGE_SELECTION, &request, |value| {
                    validate_picks(value, entry, require_queries, None)
                })?
                .into_selection();
            if !no_cot && !no_tailor {
                // The chain-of-thought reply already tailored the queries.
                return Ok(Selection {
                    topic_index: topic.index,
                    speakers: picks
                        .into_iter()
                        .map(|p| SpeakerAssignment {
                            doc_id: p.doc_id,
                            tailored_query: p.query.expect("validator requires queries"),
                        })
                        .collect(),
                });
            }
            picks.into_iter().map(|p| p.doc_id).collect()
        };

        let queries: BTreeMap<u32, String> = if no_tailor || ids.is_empty() {
            BTreeMap::new()
        } else {
            self.tailor_queries(entry, topic, &bio_text, &ids)?
        };
        Ok(Selection {
            topic_index: topic.index,
            speakers: ids
                .into_iter()
                .map(|doc_id| SpeakerAssignment {
                    doc_id,
                    tailored_query: queries
                        .get(&doc_id)
                        .cloned()
                        .unwrap_or_else(|| topic.title.clone()),
                })
                .collect(),
        })
    }

    /// Second-pass query tailoring for a fixed set of speakers.
    fn tailor_queries(
        &self,
        entry: &DebateEntry,
        topic: &Topic,
        bio_text: &str,
        ids: &[u32],
    ) -> Result<BTreeMap<u32, String>, PipelineError> {
        let speakers = ids
            .iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        let prompt = render_template(
            &self.prompts.tailor,
            &[
                ("query", entry.query.as_str()),
                ("topic", topic.title.as_str()),
                ("speakers", &speakers),
                ("biographies", bio_text),
            ],
        )?;
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::SpeakerSelection);
        let picks = self
            .session
            .complete_structured(STAGE_TAILOR, &request, |value| {
                validate_picks(value, entry, true, Some(ids))
            })?
            .into_selection();
        Ok(picks
            .into_iter()
            .filter_map(|p| p.query.map(|q| (p.doc_id, q)))
            .collect())
    }

    /// Ask one speaker for its document's perspectives on a tailored query.
    pub fn speaker_respond(
        &self,
        entry: &DebateEntry,
        doc_id: u32,
        topic: &Topic,
        tailored_query: &str,
    ) -> Result<Vec<Perspective>, PipelineError> {
        let doc = entry
            .document(doc_id)
            .ok_or_else(|| PipelineError::Validation(format!("unknown document {doc_id}")))?;
        let index = build_index(doc);
        let contexts = retrieve(&index, tailored_query, self.config.k)?;
        let contexts_text = render::context_list(doc, &contexts);
        let prompt = render_template(
            &self.prompts.speaker,
            &[
                ("query", entry.query.as_str()),
                ("topic", topic.title.as_str()),
                ("tailored_query", tailored_query),
                ("contexts", &contexts_text),
                ("doc_id", &doc_id.to_string()),
            ],
        )?;
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::PerspectiveList);
        let pairs = self
            .session
            .complete_structured(STAGE_SPEAKER, &request, |_| Ok(()))?
            .into_perspectives();
        Ok(self.label_perspectives(pairs))
    }

    fn label_perspectives(&self, pairs: Vec<(crate::corpus::Stance, String)>) -> Vec<Perspective> {
        let drop_stance = self.config.has(Ablation::NoStance);
        pairs
            .into_iter()
            .map(|(stance, fact)| Perspective {
                stance: (!drop_stance).then_some(stance),
                fact,
            })
            .collect()
    }

    /// Run the discussion for one topic, producing its outline entries.
    fn discuss_topic(
        &self,
        entry: &DebateEntry,
        topic: &Topic,
        selection: &Selection,
    ) -> (Vec<OutlineEntry>, Vec<Omission>) {
        let mut entries = Vec::new();
        let mut omissions = Vec::new();
        if selection.speakers.is_empty() {
            return (entries, omissions);
        }
        if self.config.has(Ablation::NoSpeak) {
            (entries, omissions) = self.discuss_combined(entry, topic, selection);
        } else {
            let results = parallel_map(
                selection.speakers.clone(),
                self.config.parallelism,
                |assignment| {
                    let outcome = self.speaker_respond(
                        entry,
                        assignment.doc_id,
                        topic,
                        &assignment.tailored_query,
                    );
                    (assignment, outcome)
                },
            );
            for (assignment, outcome) in results {
                match outcome {
                    Ok(perspectives) => entries.push(make_entry(assignment, perspectives)),
                    Err(error) => omissions.push(Omission {
                        topic_index: Some(topic.index),
                        doc_id: assignment.doc_id,
                        stage: STAGE_SPEAKER.to_string(),
                        reason: error.to_string(),
                    }),
                }
            }
        }
        entries.sort_by_key(|e| e.doc_id);
        (entries, omissions)
    }

    /// Single combined call covering every selected speaker. Speakers whose
    /// contexts cannot be retrieved are omitted individually; a failed
    /// combined call omits every remaining speaker.
    fn discuss_combined(
        &self,
        entry: &DebateEntry,
        topic: &Topic,
        selection: &Selection,
    ) -> (Vec<OutlineEntry>, Vec<Omission>) {
        let mut omissions = Vec::new();
        let omit = |doc_id: u32, reason: String| Omission {
            topic_index: Some(topic.index),
            doc_id,
            stage: STAGE_SPEAKER.to_string(),
            reason,
        };
        let mut blocks = Vec::new();
        let mut included: Vec<&SpeakerAssignment> = Vec::new();
        for assignment in &selection.speakers {
            let contexts = entry
                .document(assignment.doc_id)
                .ok_or_else(|| {
                    PipelineError::Validation(format!("unknown document {}", assignment.doc_id))
                })
                .and_then(|doc| {
                    let index = build_index(doc);
                    let contexts = retrieve(&index, &assignment.tailored_query, self.config.k)?;
                    Ok(render::context_list(doc, &contexts))
                });
            match contexts {
                Ok(text) => {
                    blocks.push((assignment.doc_id, assignment.tailored_query.clone(), text));
                    included.push(assignment);
                }
                Err(error) => omissions.push(omit(assignment.doc_id, error.to_string())),
            }
        }
        if included.is_empty() {
            return (Vec::new(), omissions);
        }
        let outcome = render_template(
            &self.prompts.speaker_combined,
            &[
                ("query", entry.query.as_str()),
                ("topic", topic.title.as_str()),
                ("speaker_contexts", &render::speaker_contexts(&blocks)),
            ],
        )
        .map_err(PipelineError::from)
        .and_then(|prompt| {
            let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::GroupedPerspectiveList);
            let selected = selection.doc_ids();
            let groups = self
                .session
                .complete_structured(STAGE_SPEAKER, &request, |value| {
                    let Structured::GroupedPerspectives(groups) = value else {
                        return Ok(());
                    };
                    for group in groups {
                        if !selected.contains(&group.doc_id) {
                            return Err(format!(
                                "combined response references unselected speaker {}",
                                group.doc_id
                            ));
                        }
                    }
                    Ok(())
                })?
                .into_grouped();
            Ok(groups)
        });
        match outcome {
            Ok(groups) => {
                let mut by_doc: BTreeMap<u32, Vec<Perspective>> = groups
                    .into_iter()
                    .map(|g| (g.doc_id, self.label_perspectives(g.perspectives)))
                    .collect();
                let entries = included
                    .into_iter()
                    .map(|assignment| match by_doc.remove(&assignment.doc_id) {
                        Some(perspectives) => make_entry(assignment.clone(), perspectives),
                        None => OutlineEntry {
                            doc_id: assignment.doc_id,
                            tailored_query: assignment.tailored_query.clone(),
                            perspectives: Vec::new(),
                            empty_reason: Some("no perspectives in combined response".into()),
                        },
                    })
                    .collect();
                (entries, omissions)
            }
            Err(error) => {
                for assignment in included {
                    omissions.push(omit(assignment.doc_id, error.to_string()));
                }
                (Vec::new(), omissions)
            }
        }
    }

    /// Free-form alternative to the outline: each selected speaker updates
    /// the topic's draft paragraph in document order.
    fn draft_topic(
        &self,
        entry: &DebateEntry,
        topic: &Topic,
        selection: &Selection,
    ) -> (TopicDraft, Vec<Omission>) {
        let mut draft = String::from("(no draft yet)");
        let mut omissions = Vec::new();
        let mut speakers = selection.speakers.clone();
        speakers.sort_by_key(|s| s.doc_id);
        for assignment in speakers {
            match self.draft_update(entry, topic, &assignment, &draft) {
                Ok(updated) => draft = updated,
                Err(error) => omissions.push(Omission {
                    topic_index: Some(topic.index),
                    doc_id: assignment.doc_id,
                    stage: STAGE_SPEAKER.to_string(),
                    reason: error.to_string(),
                }),
            }
        }
        (
            TopicDraft {
                topic_index: topic.index,
                draft,
            },
            omissions,
        )
    }

    fn draft_update(
        &self,
        entry: &DebateEntry,
        topic: &Topic,
        assignment: &SpeakerAssignment,
        draft: &str,
    ) -> Result<String, PipelineError> {
        let doc = entry.document(assignment.doc_id).ok_or_else(|| {
            PipelineError::Validation(format!("unknown document {}", assignment.doc_id))
        })?;
        let index = build_index(doc);
        let contexts = retrieve(&index, &assignment.tailored_query, self.config.k)?;
        let prompt = render_template(
            &self.prompts.freeform_update,
            &[
                ("query", entry.query.as_str()),
                ("topic", topic.title.as_str()),
                ("tailored_query", assignment.tailored_query.as_str()),
                ("contexts", &render::context_list(doc, &contexts)),
                ("draft", draft),
                ("doc_id", &assignment.doc_id.to_string()),
            ],
        )?;
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::Paragraph);
        Ok(self
            .session
            .complete_structured(STAGE_SPEAKER, &request, |_| Ok(()))?
            .into_paragraph())
    }

    /// Run agenda planning, per-topic selection, and speaker discussion.
    pub fn build_outline(&self, entry: &DebateEntry) -> Result<Discussion, PipelineError> {
        let biographies = self.make_biographies(entry, &entry.query)?;
        let topics = self.plan_agenda(entry, &biographies)?;
        let no_outline = self.config.has(Ablation::NoOutline);

        let mut sections = Vec::with_capacity(topics.len());
        let mut selections = Vec::with_capacity(topics.len());
        let mut omissions = Vec::new();
        let mut warnings = Vec::new();
        let mut drafts = Vec::new();
        for topic in &topics {
            let topic_biographies = self.make_biographies(entry, &topic.title)?;
            let selection = self.select_and_tailor(entry, topic, &topic_biographies)?;
            if selection.speakers.is_empty() {
                warnings.push(format!(
                    "topic {} ({:?}): empty selection, no speakers responded",
                    topic.index, topic.title
                ));
            }
            let entries = if no_outline {
                let (draft, topic_omissions) = self.draft_topic(entry, topic, &selection);
                drafts.push(draft);
                omissions.extend(topic_omissions);
                Vec::new()
            } else {
                let (entries, topic_omissions) = self.discuss_topic(entry, topic, &selection);
                omissions.extend(topic_omissions);
                entries
            };
            selections.push(selection);
            sections.push(OutlineSection {
                topic: topic.clone(),
                entries,
            });
        }
        Ok(Discussion {
            outline: Outline {
                query: entry.query.clone(),
                sections,
            },
            topics,
            selections,
            omissions,
            warnings,
            drafts: no_outline.then_some(drafts),
        })
    }

    /// Condense the discussion into the final summary, one prompt per topic
    /// section or one prompt for the whole outline.
    pub fn summarize_outline(
        &self,
        entry: &DebateEntry,
        discussion: &Discussion,
        mode: Mode,
    ) -> Result<(Summary, Vec<String>), PipelineError> {
        let titles: Vec<String> = discussion.topics.iter().map(|t| t.title.clone()).collect();
        let mut warnings = Vec::new();
        let sections = match mode {
            Mode::ModsAll => {
                let outline_text = match &discussion.drafts {
                    Some(drafts) => render::drafts(drafts, &titles),
                    None => render::outline(&discussion.outline),
                };
                let prompt = render_template(
                    &self.prompts.summarize_all,
                    &[
                        ("query", entry.query.as_str()),
                        ("m", &self.config.topics.to_string()),
                        ("outline", &outline_text),
                    ],
                )?;
                self.summary_call(STAGE_SUMMARIZE, prompt, Some(self.config.topics), entry)?
            }
            Mode::ModsTopic => {
                let mut sections = Vec::with_capacity(discussion.topics.len());
                for topic in &discussion.topics {
                    let section_text = match &discussion.drafts {
                        Some(drafts) => drafts
                            .iter()
                            .find(|d| d.topic_index == topic.index)
                            .map(|d| d.draft.clone())
                            .unwrap_or_else(|| "(no draft yet)".into()),
                        None => render::outline_section(&discussion.outline.sections[topic.index]),
                    };
                    let prompt = render_template(
                        &self.prompts.summarize_topic,
                        &[
                            ("query", entry.query.as_str()),
                            ("topic", topic.title.as_str()),
                            ("section", &section_text),
                        ],
                    )?;
                    sections.extend(self.summary_call(STAGE_SUMMARIZE, prompt, Some(1), entry)?);
                }
                sections
            }
        };
        let summary = self.sections_to_summary(sections, Some(&discussion.topics), &mut warnings);
        if discussion.drafts.is_none() {
            let outline_docs: CitationSet = discussion.outline.doc_ids().into_iter().collect();
            let cited = summary.all_citations();
            if !cited.is_subset(&outline_docs) {
                warnings.push(format!(
                    "summary cites documents outside the outline: {:?}",
                    cited
                        .iter()
                        .filter(|id| !outline_docs.contains(*id))
                        .collect::<Vec<_>>()
                ));
            }
        }
        Ok((summary, warnings))
    }

    /// Issue one summary-shaped call, re-prompting on invalid citations.
    pub(crate) fn summary_call(
        &self,
        stage: &str,
        prompt: String,
        expected_sections: Option<usize>,
        entry: &DebateEntry,
    ) -> Result<Vec<SummarySection>, PipelineError> {
        let n_docs = entry.documents.len();
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::Summary { expected_sections });
        let sections = self
            .session
            .complete_structured(stage, &request, |value| {
                let Structured::SummarySections(sections) = value else {
                    return Ok(());
                };
                for section in sections {
                    for id in extract_citations(&section.body).iter() {
                        if id as usize > n_docs {
                            return Err(format!(
                                "citation [{id}] does not exist: the entry has {n_docs} documents"
                            ));
                        }
                    }
                }
                Ok(())
            })?
            .into_sections();
        Ok(sections)
    }

    /// Convert raw summary sections into the typed summary. When canonical
    /// topics are given, sections map to them by order and differing headers
    /// are recorded as warnings; otherwise the response headers become the
    /// topics.
    pub(crate) fn sections_to_summary(
        &self,
        sections: Vec<SummarySection>,
        topics: Option<&[Topic]>,
        warnings: &mut Vec<String>,
    ) -> Summary {
        let paragraphs = sections
            .into_iter()
            .enumerate()
            .map(|(index, section)| {
                let topic = match topics {
                    Some(canonical) => {
                        let topic = canonical.get(index).cloned().unwrap_or(Topic {
                            index,
                            title: section.title.clone(),
                        });
                        if topic.title != section.title {
                            warnings.push(format!(
                                "summary section {index} titled {:?}, expected {:?}",
                                section.title, topic.title
                            ));
                        }
                        topic
                    }
                    None => Topic {
                        index,
                        title: section.title.clone(),
                    },
                };
                let sentences: Vec<Sentence> = split_sentences(&section.body)
                    .into_iter()
                    .map(|(text, citations)| {
                        if citations.is_empty() {
                            warnings
                                .push(format!("uncited sentence in paragraph {index}: {text:?}"));
                        }
                        Sentence { text, citations }
                    })
                    .collect();
                SummaryParagraph { topic, sentences }
            })
            .collect();
        Summary { paragraphs }
    }
}

fn make_entry(assignment: SpeakerAssignment, perspectives: Vec<Perspective>) -> OutlineEntry {
    let empty_reason = perspectives
        .is_empty()
        .then(|| "no relevant perspectives".to_string());
    OutlineEntry {
        doc_id: assignment.doc_id,
        tailored_query: assignment.tailored_query,
        perspectives,
        empty_reason,
    }
}

/// Selection/tailor response validation: known ids, queries where required,
/// and (for the tailor pass) only the requested speakers.
fn validate_picks(
    value: &Structured,
    entry: &DebateEntry,
    require_queries: bool,
    requested: Option<&[u32]>,
) -> Result<(), String> {
    let Structured::Selection(picks) = value else {
        return Ok(());
    };
    for pick in picks {
        if entry.document(pick.doc_id).is_none() {
            return Err(format!(
                "selection references unknown document {}",
                pick.doc_id
            ));
        }
        if require_queries && pick.query.is_none() {
            return Err(format!("speaker {} missing a tailored query", pick.doc_id));
        }
        if let Some(requested) = requested {
            if !requested.contains(&pick.doc_id) {
                return Err(format!(
                    "response tailored a query for unrequested speaker {}",
                    pick.doc_id
                ));
            }
        }
    }
    Ok(())
}
