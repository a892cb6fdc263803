//! Dataset schema for debatable-query summarization.
//!
//! A dataset is a JSON array of entries, each pairing a yes/no query with a
//! set of stance-labeled documents. Documents are ordered and carry 1-based
//! ids so bracket citations like `[3]` resolve by position. The loader
//! validates every structural invariant up front; downstream code can assume
//! entries are well-formed.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

/// Topic count assumed when a dataset entry does not specify one.
pub const DEFAULT_TOPICS: u32 = 3;

/// Ground-truth answer a document argues for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stance {
    Yes,
    No,
}

impl fmt::Display for Stance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stance::Yes => f.write_str("yes"),
            Stance::No => f.write_str("no"),
        }
    }
}

/// One source document: an ordered set of context paragraphs with a
/// ground-truth stance toward the entry's query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Document {
    /// 1-based position in the entry; citation `[i]` refers to this id.
    pub id: u32,
    #[serde(rename = "url", default, skip_serializing_if = "Option::is_none")]
    pub source_url: Option<String>,
    pub stance: Stance,
    pub paragraphs: Vec<String>,
}

/// One task instance: a debatable yes/no query plus its document collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DebateEntry {
    pub query: String,
    /// Suggested number of summary topics; runs may override it.
    #[serde(rename = "topics", default = "default_topics")]
    pub topics_requested: u32,
    pub documents: Vec<Document>,
    /// Soft-filter findings recorded at load time; never serialized.
    #[serde(skip)]
    pub warnings: Vec<LoadWarning>,
}

fn default_topics() -> u32 {
    DEFAULT_TOPICS
}

/// Non-fatal corpus filter violations. Entries that would have been dropped
/// by the published corpus filters still load, flagged, so small fixtures
/// remain usable.
#[derive(Debug, Clone, PartialEq)]
pub enum LoadWarning {
    /// Fewer than five source documents.
    FewSources { count: usize },
    /// Minority stance holds less than a quarter of the documents.
    SkewedSplit { minority_share: f64 },
}

impl fmt::Display for LoadWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadWarning::FewSources { count } => {
                write!(
                    f,
                    "entry has {count} sources (corpus filter expects at least 5)"
                )
            }
            LoadWarning::SkewedSplit { minority_share } => write!(
                f,
                "minority stance share {minority_share:.3} below the 75/25 corpus filter"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed dataset {origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("entry {index} ({query:?}): {rule}")]
    Validation {
        index: usize,
        query: String,
        rule: String,
    },
}

impl DebateEntry {
    /// Check every structural invariant, returning the soft-filter warnings
    /// on success. Rules are phrased so error messages name what broke.
    pub fn validate(&self) -> Result<Vec<LoadWarning>, String> {
        if self.documents.is_empty() {
            return Err("entry has no documents".into());
        }
        if self.topics_requested < 2 {
            return Err(format!(
                "topics must exceed 1, got {}",
                self.topics_requested
            ));
        }
        for (position, doc) in self.documents.iter().enumerate() {
            let expected = position as u32 + 1;
            if doc.id != expected {
                return Err(format!(
                    "document ids must be 1..{} in order; position {} has id {}",
                    self.documents.len(),
                    position + 1,
                    doc.id
                ));
            }
            if doc.paragraphs.is_empty() {
                return Err(format!("document {} has no paragraphs", doc.id));
            }
            for (pi, para) in doc.paragraphs.iter().enumerate() {
                if para.trim().is_empty() {
                    return Err(format!(
                        "paragraph {} of document {} is empty",
                        pi + 1,
                        doc.id
                    ));
                }
            }
        }
        let yes = self.count_stance(Stance::Yes);
        let no = self.count_stance(Stance::No);
        if yes == 0 || no == 0 {
            return Err("entry not debatable: both yes and no stances must occur".into());
        }

        let mut warnings = Vec::new();
        if self.documents.len() < 5 {
            warnings.push(LoadWarning::FewSources {
                count: self.documents.len(),
            });
        }
        let minority_share = yes.min(no) as f64 / self.documents.len() as f64;
        if minority_share < 0.25 {
            warnings.push(LoadWarning::SkewedSplit { minority_share });
        }
        Ok(warnings)
    }

    pub fn count_stance(&self, stance: Stance) -> usize {
        self.documents.iter().filter(|d| d.stance == stance).count()
    }

    /// Look a document up by citation id.
    pub fn document(&self, id: u32) -> Option<&Document> {
        if id == 0 {
            return None;
        }
        self.documents.get(id as usize - 1)
    }
}

/// Stance proportions of a document set; components always sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StanceDist {
    pub p_yes: f64,
    pub p_no: f64,
}

impl StanceDist {
    pub fn from_counts(yes: usize, no: usize) -> StanceDist {
        let total = (yes + no) as f64;
        StanceDist {
            p_yes: yes as f64 / total,
            p_no: no as f64 / total,
        }
    }

    pub const UNIFORM: StanceDist = StanceDist {
        p_yes: 0.5,
        p_no: 0.5,
    };

    pub fn majority_share(&self) -> f64 {
        self.p_yes.max(self.p_no)
    }

    pub fn minority_share(&self) -> f64 {
        self.p_yes.min(self.p_no)
    }
}

/// Stance distribution of all input documents of an entry.
pub fn input_stance_distribution(entry: &DebateEntry) -> StanceDist {
    StanceDist::from_counts(
        entry.count_stance(Stance::Yes),
        entry.count_stance(Stance::No),
    )
}

/// Parse and validate a dataset from JSON text. `origin` names the source in
/// error messages (a path, or a label for in-memory fixtures).
pub fn parse_dataset(text: &str, origin: &str) -> Result<Vec<DebateEntry>, CorpusError> {
    let raw: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| CorpusError::Parse {
            origin: origin.to_string(),
            message: format!("expected a top-level array of entries: {e}"),
        })?;
    let mut entries = Vec::with_capacity(raw.len());
    for (index, value) in raw.into_iter().enumerate() {
        let mut entry: DebateEntry =
            serde_json::from_value(value).map_err(|e| CorpusError::Parse {
                origin: origin.to_string(),
                message: format!("entry {index}: {e}"),
            })?;
        entry.warnings = entry.validate().map_err(|rule| CorpusError::Validation {
            index,
            query: entry.query.clone(),
            rule,
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Load a dataset file (see [`parse_dataset`]); order is preserved.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Vec<DebateEntry>, CorpusError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_dataset(&text, &path.display().to_string())
}

/// Serialize entries to the canonical on-disk form. Loading the result and
/// serializing again is byte-stable.
pub fn serialize_dataset(entries: &[DebateEntry]) -> String {
    let mut out = serde_json::to_string_pretty(entries).expect("dataset serializes");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: u32, stance: Stance, paragraphs: &[&str]) -> Document {
        Document {
            id,
            source_url: None,
            stance,
            paragraphs: paragraphs.iter().map(|p| p.to_string()).collect(),
        }
    }

    fn entry(query: &str, docs: Vec<Document>) -> DebateEntry {
        DebateEntry {
            query: query.to_string(),
            topics_requested: DEFAULT_TOPICS,
            documents: docs,
            warnings: Vec::new(),
        }
    }

    fn balanced_entry(n_yes: usize, n_no: usize) -> DebateEntry {
        let docs = (0..n_yes + n_no)
            .map(|i| {
                doc(
                    i as u32 + 1,
                    if i < n_yes { Stance::Yes } else { Stance::No },
                    &["some paragraph text"],
                )
            })
            .collect();
        entry("Is it so?", docs)
    }

    #[test]
    fn fixture_round_trips_with_counts() {
        let entries = vec![balanced_entry(3, 2), balanced_entry(4, 3)];
        let json = serialize_dataset(&entries);
        let loaded = parse_dataset(&json, "fixture").unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded[0].documents.len(), 5);
        assert_eq!(loaded[1].documents.len(), 7);
        // Byte-stable canonical form.
        assert_eq!(serialize_dataset(&loaded), json);
    }

    #[test]
    fn single_stance_entry_rejected() {
        let bad = entry(
            "Is it?",
            vec![doc(1, Stance::Yes, &["a"]), doc(2, Stance::Yes, &["b"])],
        );
        let json = serialize_dataset(&[bad]);
        let err = parse_dataset(&json, "fixture").unwrap_err();
        assert!(err.to_string().contains("not debatable"), "{err}");
    }

    #[test]
    fn out_of_order_ids_rejected() {
        let mut e = balanced_entry(2, 2);
        e.documents[2].id = 9;
        let err = parse_dataset(&serialize_dataset(&[e]), "fixture").unwrap_err();
        assert!(err.to_string().contains("ids must be 1..4"), "{err}");
    }

    #[test]
    fn whitespace_paragraph_rejected() {
        let mut e = balanced_entry(2, 2);
        e.documents[1].paragraphs.push("   ".into());
        let err = parse_dataset(&serialize_dataset(&[e]), "fixture").unwrap_err();
        assert!(
            err.to_string().contains("paragraph 2 of document 2"),
            "{err}"
        );
    }

    #[test]
    fn unknown_fields_are_parse_errors_naming_the_entry() {
        let json = r#"[{"query": "q?", "documents": [
            {"id": 1, "stance": "yes", "paragraphs": ["a"], "extra": 1},
            {"id": 2, "stance": "no", "paragraphs": ["b"]}
        ]}]"#;
        let err = parse_dataset(json, "fixture").unwrap_err();
        let message = err.to_string();
        assert!(message.contains("entry 0"), "{message}");
        assert!(message.contains("extra"), "{message}");
    }

    #[test]
    fn soft_filters_warn_instead_of_rejecting() {
        let few = balanced_entry(2, 1);
        let warnings = few.validate().unwrap();
        assert!(matches!(warnings[0], LoadWarning::FewSources { count: 3 }));

        let skewed = balanced_entry(9, 1);
        let warnings = skewed.validate().unwrap();
        assert!(
            matches!(warnings[0], LoadWarning::SkewedSplit { minority_share } if minority_share == 0.1)
        );

        let clean = balanced_entry(13, 7);
        assert!(clean.validate().unwrap().is_empty());
    }

    #[test]
    fn stance_distribution_examples() {
        assert_eq!(
            input_stance_distribution(&balanced_entry(3, 3)),
            StanceDist {
                p_yes: 0.5,
                p_no: 0.5
            }
        );
        let dist = input_stance_distribution(&balanced_entry(13, 7));
        assert!((dist.p_yes - 0.65).abs() < 1e-15);
        assert!((dist.p_no - 0.35).abs() < 1e-15);
    }

    #[test]
    fn stance_distribution_sums_to_one() {
        for yes in 1..40usize {
            for no in 1..40usize {
                let d = StanceDist::from_counts(yes, no);
                assert!((d.p_yes + d.p_no - 1.0).abs() < 1e-12, "{yes}/{no}");
            }
        }
    }

    #[test]
    fn citation_index_resolves_by_position() {
        let e = balanced_entry(3, 2);
        for d in &e.documents {
            assert_eq!(e.document(d.id).unwrap().id, d.id);
        }
        assert!(e.document(0).is_none());
        assert!(e.document(6).is_none());
    }
}
