//! Shared fixtures for the benchmark targets.

use mods_core::corpus::{DebateEntry, Document, Stance};
use std::path::{Path, PathBuf};

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn load_fixture_entries() -> Vec<DebateEntry> {
    mods_core::corpus::load_dataset(fixture_path("dataset_small.json")).expect("fixture dataset")
}

/// A deterministic synthetic document sized like a typical web-scraped
/// source: `paragraphs` blocks of rotating vocabulary.
pub fn synthetic_document(paragraphs: usize) -> Document {
    const VOCAB: &[&str] = &[
        "transit",
        "budget",
        "station",
        "corridor",
        "housing",
        "ridership",
        "service",
        "network",
        "parking",
        "zoning",
        "capital",
        "forecast",
        "maintenance",
        "emission",
        "frequency",
    ];
    let paragraphs = (0..paragraphs)
        .map(|p| {
            (0..24)
                .map(|w| VOCAB[(p * 7 + w * 3) % VOCAB.len()])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    Document {
        id: 1,
        source_url: None,
        stance: Stance::Yes,
        paragraphs,
    }
}
