//! Citation accuracy via entailment judging.
//!
//! Every (sentence, cited document) pair is judged by one backend call asking
//! whether the cited document's paragraphs entail the sentence. The reported
//! accuracy is the entailed fraction of the pairs that produced a verdict;
//! pairs whose calls fail are excluded and counted.

use super::citations::strip_citations;
use crate::corpus::DebateEntry;
use crate::llm::{render_template, ChatRequest, PromptLibrary, Session, Shape};
use crate::parallel::parallel_map;
use crate::pipeline::{Summary, SYSTEM_PROMPT};
use serde::{Deserialize, Serialize};

pub const STAGE_ENTAILMENT: &str = "entailment";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CitationAccuracy {
    pub entailed_pairs: usize,
    pub judged_pairs: usize,
    pub excluded_pairs: usize,
}

impl CitationAccuracy {
    /// Entailed fraction of judged pairs; absent when nothing was judged.
    pub fn accuracy(&self) -> Option<f64> {
        if self.judged_pairs == 0 {
            None
        } else {
            Some(self.entailed_pairs as f64 / self.judged_pairs as f64)
        }
    }
}

/// Judge every (sentence, cited document) pair of `summary`. Backend calls
/// fan out up to `parallelism` wide; aggregation is order-independent.
pub fn citation_accuracy(
    summary: &Summary,
    entry: &DebateEntry,
    session: &Session,
    prompts: &PromptLibrary,
    parallelism: usize,
) -> CitationAccuracy {
    let mut pairs: Vec<(String, u32)> = Vec::new();
    for paragraph in &summary.paragraphs {
        for sentence in &paragraph.sentences {
            for id in sentence.citations.iter() {
                pairs.push((strip_citations(&sentence.text), id));
            }
        }
    }
    let verdicts = parallel_map(pairs, parallelism, |(hypothesis, id)| {
        let doc = entry.document(id)?;
        let premise = doc.paragraphs.join("\n\n");
        let prompt = render_template(
            &prompts.entailment,
            &[
                ("premise", premise.as_str()),
                ("hypothesis", hypothesis.as_str()),
            ],
        )
        .ok()?;
        let request = ChatRequest::new(SYSTEM_PROMPT, prompt, Shape::Entailment);
        session
            .complete_structured(STAGE_ENTAILMENT, &request, |_| Ok(()))
            .ok()
            .map(|v| v.into_entailment())
    });
    let mut outcome = CitationAccuracy::default();
    for verdict in verdicts {
        match verdict {
            Some(true) => {
                outcome.entailed_pairs += 1;
                outcome.judged_pairs += 1;
            }
            Some(false) => outcome.judged_pairs += 1,
            None => outcome.excluded_pairs += 1,
        }
    }
    outcome
}
