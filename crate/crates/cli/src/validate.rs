//! `mods validate`: load a dataset, report per-entry shape and stance splits.

use anyhow::Result;
use mods_core::corpus::{input_stance_distribution, load_dataset, Stance};
use std::path::Path;

pub fn cmd_validate(dataset: &Path) -> Result<u8> {
    let entries = load_dataset(dataset)?;
    let mut doc_total = 0usize;
    let mut majority_sum = 0.0;
    for (index, entry) in entries.iter().enumerate() {
        let dist = input_stance_distribution(entry);
        doc_total += entry.documents.len();
        majority_sum += dist.majority_share();
        let warnings = if entry.warnings.is_empty() {
            String::new()
        } else {
            let notes: Vec<String> = entry.warnings.iter().map(|w| w.to_string()).collect();
            format!("  [warnings: {}]", notes.join("; "))
        };
        println!(
            "entry {index:03}: {} docs, {} yes / {} no ({:.3}/{:.3}) {:?}{warnings}",
            entry.documents.len(),
            entry.count_stance(Stance::Yes),
            entry.count_stance(Stance::No),
            dist.p_yes,
            dist.p_no,
            entry.query,
        );
    }
    let n = entries.len();
    println!(
        "{n} entries, mean docs/entry {:.3}, mean majority/minority split {:.3}/{:.3}",
        doc_total as f64 / n as f64,
        majority_sum / n as f64,
        1.0 - majority_sum / n as f64,
    );
    Ok(0)
}
