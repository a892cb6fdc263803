//! Per-document extractive retrieval.
//!
//! Each document is indexed on its own: paragraphs play the role of the
//! retrieval units and an Okapi-style BM25 scorer (`k1 = 1.2`, `b = 0.75`)
//! ranks them against a query. Scoring is fully deterministic — ties break
//! toward the lower paragraph index — so retrieval results are reproducible
//! across runs and platforms.

use crate::corpus::Document;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

pub const BM25_K1: f64 = 1.2;
pub const BM25_B: f64 = 0.75;
/// Retrieval depth used throughout the pipeline unless overridden.
pub const DEFAULT_K: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum RetrievalError {
    #[error("unretrievable query: no tokens survive tokenization of {0:?}")]
    UnretrievableQuery(String),
}

/// Lowercase a text and split it on non-alphanumeric runs.
///
/// This is the one tokenization rule shared by the scorer and every oracle
/// that re-derives scores: Unicode-aware lowercasing, no stemming, no stop
/// words.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
struct ParagraphStats {
    term_freq: HashMap<String, u32>,
    token_count: u32,
}

/// Immutable term statistics for one document; safe to query concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct DocIndex {
    pub doc_id: u32,
    paragraphs: Vec<ParagraphStats>,
    doc_freq: HashMap<String, u32>,
    avg_tokens: f64,
}

impl DocIndex {
    pub fn paragraph_count(&self) -> usize {
        self.paragraphs.len()
    }
}

/// One ranked paragraph reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedContext {
    /// 0-based index into the source document's paragraph list.
    pub paragraph_index: usize,
    pub score: f64,
}

/// Top-k paragraphs of one document for one query, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedContexts {
    pub doc_id: u32,
    pub query: String,
    pub items: Vec<RankedContext>,
}

impl RankedContexts {
    /// Resolve the ranked paragraph texts against their source document.
    pub fn texts<'d>(&self, doc: &'d Document) -> Vec<&'d str> {
        self.items
            .iter()
            .filter_map(|c| doc.paragraphs.get(c.paragraph_index))
            .map(String::as_str)
            .collect()
    }
}

/// Index every paragraph of a document. Idempotent: the same document always
/// produces a structurally equal index.
pub fn build_index(doc: &Document) -> DocIndex {
    let mut paragraphs = Vec::with_capacity(doc.paragraphs.len());
    let mut doc_freq: HashMap<String, u32> = HashMap::new();
    let mut total_tokens = 0u64;
    for text in &doc.paragraphs {
        let tokens = tokenize(text);
        total_tokens += tokens.len() as u64;
        let mut term_freq: HashMap<String, u32> = HashMap::new();
        for token in tokens {
            *term_freq.entry(token).or_insert(0) += 1;
        }
        for term in term_freq.keys() {
            *doc_freq.entry(term.clone()).or_insert(0) += 1;
        }
        paragraphs.push(ParagraphStats {
            token_count: term_freq.values().sum(),
            term_freq,
        });
    }
    let avg_tokens = if paragraphs.is_empty() {
        0.0
    } else {
        total_tokens as f64 / paragraphs.len() as f64
    };
    DocIndex {
        doc_id: doc.id,
        paragraphs,
        doc_freq,
        avg_tokens,
    }
}

/// BM25 score of one paragraph against pre-tokenized query terms. Query term
/// multiplicity is preserved; the IDF uses the non-negative
/// `ln(1 + (N - df + 0.5) / (df + 0.5))` form.
fn score_paragraph(index: &DocIndex, stats: &ParagraphStats, query_tokens: &[String]) -> f64 {
    let n = index.paragraphs.len() as f64;
    let mut score = 0.0;
    for token in query_tokens {
        let df = *index.doc_freq.get(token).unwrap_or(&0) as f64;
        if df == 0.0 {
            continue;
        }
        let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
        let tf = *stats.term_freq.get(token).unwrap_or(&0) as f64;
        let dl = stats.token_count as f64;
        let denom = tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / index.avg_tokens);
        score += idf * (tf * (BM25_K1 + 1.0)) / denom;
    }
    score
}

/// Return the `min(k, paragraph_count)` best paragraphs for `query`, sorted by
/// descending score with ties broken by ascending paragraph index.
pub fn retrieve(index: &DocIndex, query: &str, k: usize) -> Result<RankedContexts, RetrievalError> {
    assert!(k >= 1, "retrieval depth must be at least 1");
    let query_tokens = tokenize(query);
    if query_tokens.is_empty() {
        return Err(RetrievalError::UnretrievableQuery(query.to_string()));
    }
    let mut scored: Vec<RankedContext> = index
        .paragraphs
        .iter()
        .enumerate()
        .map(|(paragraph_index, stats)| RankedContext {
            paragraph_index,
            score: score_paragraph(index, stats, &query_tokens),
        })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.paragraph_index.cmp(&b.paragraph_index))
    });
    scored.truncate(k);
    Ok(RankedContexts {
        doc_id: index.doc_id,
        query: query.to_string(),
        items: scored,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Stance;

    fn doc(paragraphs: &[&str]) -> Document {
        Document {
            id: 1,
            source_url: None,
            stance: Stance::Yes,
            paragraphs: paragraphs.iter().map(|p| p.to_string()).collect(),
        }
    }

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(
            tokenize("Hello, World! Ärger-42 done"),
            vec!["hello", "world", "ärger", "42", "done"]
        );
        assert!(tokenize("?!... --").is_empty());
    }

    #[test]
    fn index_covers_all_paragraphs() {
        let d = doc(&["alpha beta", "gamma delta"]);
        let index = build_index(&d);
        assert_eq!(index.paragraph_count(), 2);
        assert_eq!(build_index(&d), index);
    }

    #[test]
    fn index_covers_large_documents() {
        let texts: Vec<String> = (0..57).map(|i| format!("paragraph number {i}")).collect();
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        assert_eq!(build_index(&doc(&refs)).paragraph_count(), 57);
    }

    #[test]
    fn unique_term_match_ranks_first() {
        let index = build_index(&doc(&["alpha beta", "gamma delta"]));
        let ranked = retrieve(&index, "gamma", 1).unwrap();
        assert_eq!(ranked.items.len(), 1);
        assert_eq!(ranked.items[0].paragraph_index, 1);
    }

    #[test]
    fn k_clamps_to_paragraph_count() {
        let index = build_index(&doc(&["alpha beta", "gamma delta"]));
        let ranked = retrieve(&index, "alpha", 5).unwrap();
        assert_eq!(ranked.items.len(), 2);
    }

    #[test]
    fn empty_query_is_unretrievable() {
        let index = build_index(&doc(&["alpha"]));
        assert_eq!(
            retrieve(&index, " ?! ", 1),
            Err(RetrievalError::UnretrievableQuery(" ?! ".into()))
        );
    }

    #[test]
    fn zero_match_queries_still_fill_k() {
        let index = build_index(&doc(&["alpha beta", "gamma delta", "epsilon"]));
        let ranked = retrieve(&index, "unrelated terms", 2).unwrap();
        assert_eq!(ranked.items.len(), 2);
        // All-zero scores fall back to paragraph order.
        assert_eq!(ranked.items[0].paragraph_index, 0);
        assert_eq!(ranked.items[1].paragraph_index, 1);
    }

    #[test]
    fn texts_resolve_against_document() {
        let d = doc(&["alpha beta", "gamma delta"]);
        let index = build_index(&d);
        let ranked = retrieve(&index, "delta", 1).unwrap();
        assert_eq!(ranked.texts(&d), vec!["gamma delta"]);
    }
}
