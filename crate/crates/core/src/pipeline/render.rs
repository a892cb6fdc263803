//! Textual rendering of pipeline state for prompt inputs.

use super::types::{Biography, Outline, OutlineSection, TopicDraft};
use crate::corpus::{DebateEntry, Document};
use crate::llm::SummarySection;
use crate::retrieval::RankedContexts;

/// Dash-listed paragraph texts of one retrieval result.
pub(crate) fn context_list(doc: &Document, contexts: &RankedContexts) -> String {
    contexts
        .texts(doc)
        .iter()
        .map(|t| format!("- {t}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Biographies block: one labeled context list per document.
pub(crate) fn biographies(entry: &DebateEntry, biographies: &[Biography]) -> String {
    let mut out = String::new();
    for biography in biographies {
        let doc = entry
            .document(biography.doc_id)
            .expect("biography references a valid document");
        if !out.is_empty() {
            out.push_str("\n\n");
        }
        out.push_str(&format!("Document {}:\n", biography.doc_id));
        out.push_str(&context_list(doc, &biography.contexts));
    }
    out
}

/// Combined-speaker block for the single-call discussion ablation.
pub(crate) fn speaker_contexts(blocks: &[(u32, String, String)]) -> String {
    blocks
        .iter()
        .map(|(doc_id, tailored_query, contexts)| {
            format!("Document {doc_id} (tailored query: \"{tailored_query}\"):\n{contexts}")
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// One outline section as summarizer input.
pub(crate) fn outline_section(section: &OutlineSection) -> String {
    let mut out = String::new();
    for entry in &section.entries {
        if !out.is_empty() {
            out.push_str("\n\n");
        }
        out.push_str(&format!(
            "Document {} (follow-up query: \"{}\"):",
            entry.doc_id, entry.tailored_query
        ));
        if entry.perspectives.is_empty() {
            let reason = entry.empty_reason.as_deref().unwrap_or("no perspectives");
            out.push_str(&format!("\n- ({reason})"));
        }
        for perspective in &entry.perspectives {
            let label = match perspective.stance {
                Some(stance) => stance.to_string(),
                None => "unlabeled".to_string(),
            };
            out.push_str(&format!("\n- {label}: {}", perspective.fact));
        }
    }
    if out.is_empty() {
        out.push_str("(no contributions recorded)");
    }
    out
}

/// The whole outline as summarizer input, sections headed by topic titles.
pub(crate) fn outline(outline: &Outline) -> String {
    outline
        .sections
        .iter()
        .map(|section| format!("## {}\n{}", section.topic.title, outline_section(section)))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Free-form drafts in outline order, used in place of the outline under the
/// draft ablation.
pub(crate) fn drafts(drafts: &[TopicDraft], titles: &[String]) -> String {
    drafts
        .iter()
        .map(|d| {
            let title = titles.get(d.topic_index).map(String::as_str).unwrap_or("");
            format!("## {title}\n{}", d.draft)
        })
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Every document in full, labeled by id.
pub(crate) fn full_documents(entry: &DebateEntry) -> String {
    entry
        .documents
        .iter()
        .map(|doc| format!("Document {}:\n{}", doc.id, doc.paragraphs.join("\n")))
        .collect::<Vec<_>>()
        .join("\n\n")
}

/// Pooled contexts labeled by source document.
pub(crate) fn pooled_contexts(items: &[(u32, String)]) -> String {
    items
        .iter()
        .map(|(doc_id, text)| format!("[Document {doc_id}] {text}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Draft sections rendered back into the summarizer's own output format.
pub(crate) fn draft_sections(sections: &[SummarySection]) -> String {
    sections
        .iter()
        .map(|s| format!("## {}\n{}", s.title, s.body))
        .collect::<Vec<_>>()
        .join("\n\n")
}
