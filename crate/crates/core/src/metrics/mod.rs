//! Citation-based evaluation of summaries.
//!
//! Coverage (fraction of documents cited), fairness (KL from the cited
//! stance distribution to uniform), and faithfulness (KL to the input stance
//! distribution) are computed over the full summary and per topic paragraph.
//! Paragraphs citing nothing contribute 0 coverage but are excluded from the
//! paragraph-level KL macro-averages; the exclusion count is reported.

mod accuracy;
mod balance;
mod bleu;
mod citations;
mod report;

pub use accuracy::{citation_accuracy, CitationAccuracy, STAGE_ENTAILMENT};
pub use balance::{doc_coverage, kl_divergence, stance_balance, BalanceScores};
pub use bleu::{self_bleu, SMOOTHING_EPSILON};
pub use citations::{
    extract_citations, render_cited_sentence, split_sentences, strip_citations, CitationSet,
};
pub use report::{mean_report, write_report_csv, write_report_json, EvalRow, ReportMeans};

use crate::corpus::DebateEntry;
use crate::pipeline::Summary;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("citation {id} exceeds the document count {n_docs}")]
    CitationOutOfRange { id: u32, n_docs: usize },
    #[error("citation {id} does not resolve to a document")]
    UnknownCitation { id: u32 },
    #[error("undefined metric: {0}")]
    Undefined(String),
}

/// Per-example evaluation row: everything the result tables hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CitationReport {
    pub summary_dc: f64,
    pub summary_fairness: Option<f64>,
    pub summary_faithfulness: Option<f64>,
    /// Macro-averages over topic paragraphs.
    pub paragraph_dc: f64,
    pub paragraph_fairness: Option<f64>,
    pub paragraph_faithfulness: Option<f64>,
    /// Paragraphs with no citations, excluded from the KL macro-averages.
    pub uncited_paragraphs: usize,
    pub citation_accuracy: Option<f64>,
    pub accuracy_excluded_pairs: usize,
    pub total_sentences: usize,
    pub avg_sentences_per_paragraph: f64,
    pub self_bleu: Option<f64>,
}

/// Evaluate a summary's citations against its entry. Citation accuracy and
/// self-BLEU are filled in by their dedicated passes.
pub fn evaluate_summary(
    summary: &Summary,
    entry: &DebateEntry,
) -> Result<CitationReport, MetricsError> {
    if summary.paragraphs.is_empty() {
        return Err(MetricsError::Undefined("summary has no paragraphs".into()));
    }
    let n_docs = entry.documents.len();

    let all_cited = summary.all_citations();
    let summary_dc = doc_coverage(&all_cited, n_docs)?;
    let summary_balance = if all_cited.is_empty() {
        None
    } else {
        Some(stance_balance(&all_cited, entry)?)
    };

    let mut paragraph_dc_sum = 0.0;
    let mut kl_sums = (0.0, 0.0);
    let mut kl_count = 0usize;
    let mut uncited_paragraphs = 0usize;
    for paragraph in &summary.paragraphs {
        let cited = paragraph.citations();
        paragraph_dc_sum += doc_coverage(&cited, n_docs)?;
        if cited.is_empty() {
            uncited_paragraphs += 1;
        } else {
            let scores = stance_balance(&cited, entry)?;
            kl_sums.0 += scores.fairness;
            kl_sums.1 += scores.faithfulness;
            kl_count += 1;
        }
    }
    let paragraph_count = summary.paragraphs.len();
    let total_sentences = summary.total_sentences();

    Ok(CitationReport {
        summary_dc,
        summary_fairness: summary_balance.map(|b| b.fairness),
        summary_faithfulness: summary_balance.map(|b| b.faithfulness),
        paragraph_dc: paragraph_dc_sum / paragraph_count as f64,
        paragraph_fairness: (kl_count > 0).then(|| kl_sums.0 / kl_count as f64),
        paragraph_faithfulness: (kl_count > 0).then(|| kl_sums.1 / kl_count as f64),
        uncited_paragraphs,
        citation_accuracy: None,
        accuracy_excluded_pairs: 0,
        total_sentences,
        avg_sentences_per_paragraph: total_sentences as f64 / paragraph_count as f64,
        self_bleu: None,
    })
}
