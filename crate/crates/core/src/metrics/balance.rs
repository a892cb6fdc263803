//! Coverage and stance-balance metrics over cited documents.

use super::citations::CitationSet;
use super::MetricsError;
use crate::corpus::{input_stance_distribution, DebateEntry, Stance, StanceDist};

/// Fraction of the `n_docs` input documents that are cited.
pub fn doc_coverage(cited: &CitationSet, n_docs: usize) -> Result<f64, MetricsError> {
    assert!(n_docs >= 1, "coverage needs at least one document");
    if let Some(id) = cited.iter().find(|&id| id as usize > n_docs) {
        return Err(MetricsError::CitationOutOfRange { id, n_docs });
    }
    Ok(cited.len() as f64 / n_docs as f64)
}

/// KL divergence between two-outcome distributions in nats, with the
/// convention `0·ln 0 = 0`.
pub fn kl_divergence(p: StanceDist, q: StanceDist) -> f64 {
    let term = |p: f64, q: f64| if p == 0.0 { 0.0 } else { p * (p / q).ln() };
    term(p.p_yes, q.p_yes) + term(p.p_no, q.p_no)
}

/// Stance balance of a cited set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceScores {
    /// KL from the cited stance distribution to uniform; 0 is perfectly
    /// balanced, ln 2 is a point mass.
    pub fairness: f64,
    /// KL from the cited stance distribution to the input documents' stance
    /// distribution.
    pub faithfulness: f64,
}

/// Fairness and faithfulness of the cited documents, using their ground-truth
/// stances. The cited set must be non-empty and resolve against the entry.
pub fn stance_balance(
    cited: &CitationSet,
    entry: &DebateEntry,
) -> Result<BalanceScores, MetricsError> {
    if cited.is_empty() {
        return Err(MetricsError::Undefined(
            "stance balance of an empty citation set".into(),
        ));
    }
    let mut yes = 0usize;
    let mut no = 0usize;
    for id in cited.iter() {
        let doc = entry
            .document(id)
            .ok_or(MetricsError::UnknownCitation { id })?;
        match doc.stance {
            Stance::Yes => yes += 1,
            Stance::No => no += 1,
        }
    }
    let cited_dist = StanceDist::from_counts(yes, no);
    Ok(BalanceScores {
        fairness: kl_divergence(cited_dist, StanceDist::UNIFORM),
        faithfulness: kl_divergence(cited_dist, input_stance_distribution(entry)),
    })
}
