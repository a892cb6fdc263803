//! Self-BLEU over summary paragraphs.
//!
//! Each paragraph is scored as a BLEU-n candidate against the remaining
//! paragraphs as references, and the scores are averaged. Higher means the
//! paragraphs repeat each other more. Conventions, pinned so independent
//! oracles can agree exactly:
//!
//! - tokens come from [`crate::retrieval::tokenize`];
//! - modified n-gram precision with per-gram clipping against the maximum
//!   reference count;
//! - zero matches (or no n-grams at an order) floor that order's precision at
//!   `SMOOTHING_EPSILON` instead of collapsing the geometric mean to zero;
//! - brevity penalty uses the reference length closest to the candidate,
//!   ties resolved toward the shorter reference.

use super::MetricsError;
use crate::retrieval::tokenize;
use std::collections::HashMap;

pub const SMOOTHING_EPSILON: f64 = 1e-9;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], u32> {
    let mut counts: HashMap<&[String], u32> = HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// BLEU-n of `candidate` against `references`, with the smoothing and
/// brevity-penalty conventions documented at the module level.
fn bleu(candidate: &[String], references: &[&[String]], max_order: usize) -> f64 {
    if candidate.is_empty() {
        return 0.0;
    }
    let mut log_precision_sum = 0.0;
    for order in 1..=max_order {
        let cand_counts = ngram_counts(candidate, order);
        let total: u32 = cand_counts.values().sum();
        let mut clipped = 0u32;
        for (gram, &count) in &cand_counts {
            let best_ref = references
                .iter()
                .map(|r| *ngram_counts(r, order).get(gram).unwrap_or(&0))
                .max()
                .unwrap_or(0);
            clipped += count.min(best_ref);
        }
        let precision = if total == 0 || clipped == 0 {
            SMOOTHING_EPSILON
        } else {
            clipped as f64 / total as f64
        };
        log_precision_sum += precision.ln() / max_order as f64;
    }
    let c = candidate.len() as f64;
    let r = references
        .iter()
        .map(|r| r.len())
        .min_by_key(|&len| {
            let diff = (len as i64 - candidate.len() as i64).abs();
            (diff, len)
        })
        .unwrap_or(0) as f64;
    let brevity = if c > r { 1.0 } else { (1.0 - r / c).exp() };
    brevity * log_precision_sum.exp()
}

/// Mean BLEU-n of each paragraph against the others. Needs at least two
/// paragraphs.
pub fn self_bleu(paragraphs: &[String], max_order: usize) -> Result<f64, MetricsError> {
    if paragraphs.len() < 2 {
        return Err(MetricsError::Undefined(
            "self-BLEU needs at least two paragraphs".into(),
        ));
    }
    let tokenized: Vec<Vec<String>> = paragraphs.iter().map(|p| tokenize(p)).collect();
    let mut sum = 0.0;
    for (i, candidate) in tokenized.iter().enumerate() {
        let references: Vec<&[String]> = tokenized
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, r)| r.as_slice())
            .collect();
        sum += bleu(candidate, &references, max_order);
    }
    Ok(sum / paragraphs.len() as f64)
}
