//! Citation extraction and sentence segmentation.
//!
//! Citations are integers inside square-bracket spans: `[1]`, `[1][3]`, and
//! `[2, 4]` all parse; bracket spans without integers contribute nothing.
//! Sentences split on terminal punctuation followed by whitespace, with a
//! documented abbreviation guard list, intra-number periods kept intact, and
//! bracket citations after the terminator attached to the preceding sentence.

use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::sync::LazyLock;

/// Document ids cited by a piece of text. Ids are unique and at least 1.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CitationSet(BTreeSet<u32>);

impl CitationSet {
    pub fn new() -> CitationSet {
        CitationSet::default()
    }

    pub fn insert(&mut self, id: u32) {
        if id >= 1 {
            self.0.insert(id);
        }
    }

    pub fn contains(&self, id: u32) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &CitationSet) -> bool {
        self.0.is_subset(&other.0)
    }
}

impl FromIterator<u32> for CitationSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> CitationSet {
        let mut set = CitationSet::new();
        for id in iter {
            set.insert(id);
        }
        set
    }
}

impl Extend<u32> for CitationSet {
    fn extend<I: IntoIterator<Item = u32>>(&mut self, iter: I) {
        for id in iter {
            self.insert(id);
        }
    }
}

static BRACKET_SPAN: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\[([^\[\]]*)\]").expect("bracket regex"));
static INTEGER_RUN: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[0-9]+").expect("int regex"));

/// All integers found inside square-bracket spans of `text`. Non-integer
/// bracket contents and the non-document id 0 are ignored.
pub fn extract_citations(text: &str) -> CitationSet {
    let mut out = CitationSet::new();
    for span in BRACKET_SPAN.captures_iter(text) {
        for run in INTEGER_RUN.find_iter(&span[1]) {
            if let Ok(id) = run.as_str().parse::<u32>() {
                out.insert(id);
            }
        }
    }
    out
}

/// Remove bracket citation spans from a sentence, collapsing the whitespace
/// they leave behind. Used to build clean entailment hypotheses.
pub fn strip_citations(text: &str) -> String {
    let stripped = BRACKET_SPAN.replace_all(text, "");
    stripped.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Words whose trailing period does not end a sentence. Compared
/// case-insensitively against the chunk before the period.
const ABBREVIATIONS: &[&str] = &[
    "dr", "mr", "mrs", "ms", "prof", "sr", "jr", "st", "mt", "ave", "blvd", "rd", "inc", "corp",
    "ltd", "co", "vs", "etc", "al", "approx", "fig", "eq", "no", "vol", "pp", "cf", "i.e", "e.g",
    "u.s", "u.k", "ph.d", "m.d",
];

fn is_abbreviation(chunk: &str) -> bool {
    let chunk = chunk.trim_start_matches(|c: char| !c.is_alphanumeric() && c != '.');
    if chunk.is_empty() {
        return false;
    }
    // Single uppercase letters are initials ("J. K. Rowling").
    if chunk.len() == 1 && chunk.chars().all(|c| c.is_uppercase()) {
        return true;
    }
    ABBREVIATIONS.iter().any(|a| chunk.eq_ignore_ascii_case(a))
}

/// Split a paragraph into sentences, each paired with its extracted
/// citations.
pub fn split_sentences(paragraph: &str) -> Vec<(String, CitationSet)> {
    let chars: Vec<char> = paragraph.chars().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        if c != '.' && c != '!' && c != '?' {
            i += 1;
            continue;
        }
        if c == '.' {
            // Intra-number period: 3.14
            let prev_digit = i > 0 && chars[i - 1].is_ascii_digit();
            let next_digit = i + 1 < chars.len() && chars[i + 1].is_ascii_digit();
            if prev_digit && next_digit {
                i += 1;
                continue;
            }
            // Abbreviation guard: inspect the whitespace-delimited chunk
            // ending at this period.
            let mut w = i;
            while w > start && !chars[w - 1].is_whitespace() {
                w -= 1;
            }
            let chunk: String = chars[w..i].iter().collect();
            if is_abbreviation(&chunk) {
                i += 1;
                continue;
            }
        }
        // Absorb a run of terminators ("?!", "...").
        let mut end = i + 1;
        while end < chars.len() && matches!(chars[end], '.' | '!' | '?') {
            end += 1;
        }
        // Absorb trailing bracket citations, optionally space-separated.
        loop {
            let mut probe = end;
            while probe < chars.len() && chars[probe] == ' ' {
                probe += 1;
            }
            if probe < chars.len() && chars[probe] == '[' {
                if let Some(close) = chars[probe..].iter().position(|&c| c == ']') {
                    end = probe + close + 1;
                    continue;
                }
            }
            break;
        }
        // Boundary only when followed by whitespace or end of text.
        if end < chars.len() && !chars[end].is_whitespace() {
            i = end;
            continue;
        }
        let sentence: String = chars[start..end].iter().collect();
        let sentence = sentence.trim().to_string();
        if !sentence.is_empty() {
            let citations = extract_citations(&sentence);
            sentences.push((sentence, citations));
        }
        start = end;
        i = end;
    }
    let tail: String = chars[start..].iter().collect();
    let tail = tail.trim().to_string();
    if !tail.is_empty() {
        let citations = extract_citations(&tail);
        sentences.push((tail, citations));
    }
    sentences
}

/// Append citations to a clean sentence in the style the pipeline's models
/// are instructed to use: bracket ids before the final punctuation run.
/// `extract_citations(render_cited_sentence(text, c)) == c` whenever `text`
/// itself carries no bracketed integers.
pub fn render_cited_sentence(text: &str, citations: &CitationSet) -> String {
    if citations.is_empty() {
        return text.to_string();
    }
    let marks: String = citations.iter().map(|id| format!("[{id}]")).collect();
    let trailing = text
        .char_indices()
        .rev()
        .take_while(|(_, c)| matches!(c, '.' | '!' | '?'))
        .map(|(i, _)| i)
        .last();
    match trailing {
        Some(punct_start) => {
            let (body, punct) = text.split_at(punct_start);
            format!("{} {}{}", body.trim_end(), marks, punct)
        }
        None => format!("{} {}", text.trim_end(), marks),
    }
}
