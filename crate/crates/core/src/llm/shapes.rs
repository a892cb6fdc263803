//! Structured model-output payloads.
//!
//! Each pipeline stage declares the payload schema it expects via a [`Shape`]
//! tag; [`parse_structured`] converts raw model text into the corresponding
//! typed value or reports a schema violation. Every shape also has a render
//! function producing text the parser accepts, which is what fixture scripts
//! and the round-trip properties build on.

use super::LlmError;
use crate::corpus::Stance;
use serde::Deserialize;

/// Schema tag naming which structured payload a reply must carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    /// `{"topics": [..]}` with an exact expected count.
    TopicList { expected: usize },
    /// `{"speakers": [{"id": n, "query": s?}, ..]}`.
    SpeakerSelection,
    /// `{"yes": [..], "no": [..]}` flattened yes-then-no.
    PerspectiveList,
    /// `{"speakers": [{"id": n, "yes": [..], "no": [..]}, ..]}`.
    GroupedPerspectiveList,
    /// Markdown sections headed by `## <title>` lines.
    Summary { expected_sections: Option<usize> },
    /// Free-form non-empty text.
    Paragraph,
    /// A binary entailment verdict.
    Entailment,
}

impl Shape {
    /// Stable tag used by script files and error messages.
    pub fn tag(&self) -> &'static str {
        match self {
            Shape::TopicList { .. } => "topic-list",
            Shape::SpeakerSelection => "speaker-selection",
            Shape::PerspectiveList => "perspective-list",
            Shape::GroupedPerspectiveList => "grouped-perspective-list",
            Shape::Summary { .. } => "summary",
            Shape::Paragraph => "paragraph",
            Shape::Entailment => "entailment",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeakerPick {
    pub doc_id: u32,
    pub query: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpeakerPerspectives {
    pub doc_id: u32,
    pub perspectives: Vec<(Stance, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummarySection {
    pub title: String,
    pub body: String,
}

/// A parsed structured payload; the variant always matches the shape it was
/// parsed under.
#[derive(Debug, Clone, PartialEq)]
pub enum Structured {
    Topics(Vec<String>),
    Selection(Vec<SpeakerPick>),
    Perspectives(Vec<(Stance, String)>),
    GroupedPerspectives(Vec<SpeakerPerspectives>),
    SummarySections(Vec<SummarySection>),
    Paragraph(String),
    Entailment(bool),
}

impl Structured {
    pub fn into_topics(self) -> Vec<String> {
        match self {
            Structured::Topics(v) => v,
            other => unreachable!("expected topics, parsed {other:?}"),
        }
    }

    pub fn into_selection(self) -> Vec<SpeakerPick> {
        match self {
            Structured::Selection(v) => v,
            other => unreachable!("expected selection, parsed {other:?}"),
        }
    }

    pub fn into_perspectives(self) -> Vec<(Stance, String)> {
        match self {
            Structured::Perspectives(v) => v,
            other => unreachable!("expected perspectives, parsed {other:?}"),
        }
    }

    pub fn into_grouped(self) -> Vec<SpeakerPerspectives> {
        match self {
            Structured::GroupedPerspectives(v) => v,
            other => unreachable!("expected grouped perspectives, parsed {other:?}"),
        }
    }

    pub fn into_sections(self) -> Vec<SummarySection> {
        match self {
            Structured::SummarySections(v) => v,
            other => unreachable!("expected summary sections, parsed {other:?}"),
        }
    }

    pub fn into_paragraph(self) -> String {
        match self {
            Structured::Paragraph(v) => v,
            other => unreachable!("expected paragraph, parsed {other:?}"),
        }
    }

    pub fn into_entailment(self) -> bool {
        match self {
            Structured::Entailment(v) => v,
            other => unreachable!("expected entailment verdict, parsed {other:?}"),
        }
    }
}

fn schema_error(shape: &Shape, message: impl Into<String>, text: &str) -> LlmError {
    LlmError::StructuredOutput {
        shape: shape.tag().to_string(),
        message: message.into(),
        span: super::truncate_span(text),
    }
}

/// Strip a surrounding Markdown code fence, if any.
fn strip_fence(text: &str) -> &str {
    let trimmed = text.trim();
    let Some(rest) = trimmed.strip_prefix("```") else {
        return trimmed;
    };
    let Some(body) = rest.split_once('\n').map(|(_, body)| body) else {
        return trimmed;
    };
    match body.rsplit_once("```") {
        Some((inner, _)) => inner.trim(),
        None => trimmed,
    }
}

/// Locate the JSON object in a reply: the whole text if it is bare JSON,
/// otherwise the span between the first `{` and the last `}`.
fn json_span(text: &str) -> &str {
    let stripped = strip_fence(text);
    if stripped.starts_with('{') {
        return stripped;
    }
    match (stripped.find('{'), stripped.rfind('}')) {
        (Some(start), Some(end)) if start < end => &stripped[start..=end],
        _ => stripped,
    }
}

fn parse_json<'a, T: Deserialize<'a>>(shape: &Shape, text: &'a str) -> Result<T, LlmError> {
    serde_json::from_str(json_span(text)).map_err(|e| schema_error(shape, e.to_string(), text))
}

#[derive(Deserialize)]
struct TopicsPayload {
    topics: Vec<String>,
}

#[derive(Deserialize)]
struct SpeakersPayload<T> {
    speakers: Vec<T>,
}

#[derive(Deserialize)]
struct PickPayload {
    id: u32,
    #[serde(default)]
    query: Option<String>,
}

#[derive(Deserialize)]
struct PerspectivesPayload {
    #[serde(default)]
    yes: Vec<String>,
    #[serde(default)]
    no: Vec<String>,
}

#[derive(Deserialize)]
struct GroupedPayload {
    id: u32,
    #[serde(default)]
    yes: Vec<String>,
    #[serde(default)]
    no: Vec<String>,
}

fn flatten_perspectives(
    shape: &Shape,
    text: &str,
    payload: PerspectivesPayload,
) -> Result<Vec<(Stance, String)>, LlmError> {
    let mut out = Vec::with_capacity(payload.yes.len() + payload.no.len());
    for (stance, facts) in [(Stance::Yes, payload.yes), (Stance::No, payload.no)] {
        for fact in facts {
            let fact = fact.trim().to_string();
            if fact.is_empty() {
                return Err(schema_error(shape, format!("empty {stance} fact"), text));
            }
            out.push((stance, fact));
        }
    }
    Ok(out)
}

/// Parse raw model output under a schema tag.
pub fn parse_structured(text: &str, shape: &Shape) -> Result<Structured, LlmError> {
    match shape {
        Shape::TopicList { expected } => {
            let payload: TopicsPayload = parse_json(shape, text)?;
            let topics: Vec<String> = payload
                .topics
                .into_iter()
                .map(|t| t.trim().to_string())
                .collect();
            if topics.iter().any(String::is_empty) {
                return Err(schema_error(shape, "empty topic title", text));
            }
            if topics.len() != *expected {
                return Err(schema_error(
                    shape,
                    format!(
                        "topic count mismatch: expected {expected}, got {}",
                        topics.len()
                    ),
                    text,
                ));
            }
            for (i, topic) in topics.iter().enumerate() {
                if topics[..i].contains(topic) {
                    return Err(schema_error(
                        shape,
                        format!("duplicate topic {topic:?}"),
                        text,
                    ));
                }
            }
            Ok(Structured::Topics(topics))
        }
        Shape::SpeakerSelection => {
            let payload: SpeakersPayload<PickPayload> = parse_json(shape, text)?;
            let mut picks = Vec::with_capacity(payload.speakers.len());
            for raw in payload.speakers {
                if raw.id == 0 {
                    return Err(schema_error(shape, "speaker id must be positive", text));
                }
                if picks.iter().any(|p: &SpeakerPick| p.doc_id == raw.id) {
                    return Err(schema_error(
                        shape,
                        format!("duplicate speaker id {}", raw.id),
                        text,
                    ));
                }
                let query = raw
                    .query
                    .map(|q| q.trim().to_string())
                    .filter(|q| !q.is_empty());
                picks.push(SpeakerPick {
                    doc_id: raw.id,
                    query,
                });
            }
            Ok(Structured::Selection(picks))
        }
        Shape::PerspectiveList => {
            let payload: PerspectivesPayload = parse_json(shape, text)?;
            Ok(Structured::Perspectives(flatten_perspectives(
                shape, text, payload,
            )?))
        }
        Shape::GroupedPerspectiveList => {
            let payload: SpeakersPayload<GroupedPayload> = parse_json(shape, text)?;
            let mut groups: Vec<SpeakerPerspectives> = Vec::with_capacity(payload.speakers.len());
            for raw in payload.speakers {
                if raw.id == 0 {
                    return Err(schema_error(shape, "speaker id must be positive", text));
                }
                if groups.iter().any(|g| g.doc_id == raw.id) {
                    return Err(schema_error(
                        shape,
                        format!("duplicate speaker id {}", raw.id),
                        text,
                    ));
                }
                let perspectives = flatten_perspectives(
                    shape,
                    text,
                    PerspectivesPayload {
                        yes: raw.yes,
                        no: raw.no,
                    },
                )?;
                groups.push(SpeakerPerspectives {
                    doc_id: raw.id,
                    perspectives,
                });
            }
            Ok(Structured::GroupedPerspectives(groups))
        }
        Shape::Summary { expected_sections } => {
            let sections = parse_summary_sections(shape, text)?;
            if let Some(expected) = expected_sections {
                if sections.len() != *expected {
                    return Err(schema_error(
                        shape,
                        format!(
                            "section count mismatch: expected {expected}, got {}",
                            sections.len()
                        ),
                        text,
                    ));
                }
            }
            Ok(Structured::SummarySections(sections))
        }
        Shape::Paragraph => {
            let body = strip_fence(text);
            if body.is_empty() {
                return Err(schema_error(shape, "empty paragraph", text));
            }
            Ok(Structured::Paragraph(body.to_string()))
        }
        Shape::Entailment => {
            let stripped = strip_fence(text);
            if stripped.starts_with('{') {
                #[derive(Deserialize)]
                struct Verdict {
                    entailed: bool,
                }
                let verdict: Verdict = parse_json(shape, stripped)?;
                return Ok(Structured::Entailment(verdict.entailed));
            }
            let normalized = stripped.trim_end_matches(['.', '!']).trim().to_lowercase();
            match normalized.as_str() {
                "entailed" | "yes" | "true" => Ok(Structured::Entailment(true)),
                "not entailed" | "no" | "false" => Ok(Structured::Entailment(false)),
                _ => Err(schema_error(shape, "expected an entailment verdict", text)),
            }
        }
    }
}

fn parse_summary_sections(shape: &Shape, text: &str) -> Result<Vec<SummarySection>, LlmError> {
    let body = strip_fence(text);
    let mut sections: Vec<SummarySection> = Vec::new();
    let mut current: Option<(String, Vec<&str>)> = None;
    for line in body.lines() {
        if let Some(rest) = line.strip_prefix("## ") {
            if let Some((title, lines)) = current.take() {
                sections.push(finish_section(shape, text, title, lines)?);
            }
            let title = rest.trim().to_string();
            if title.is_empty() {
                return Err(schema_error(shape, "empty topic header", text));
            }
            current = Some((title, Vec::new()));
        } else if let Some((_, lines)) = current.as_mut() {
            lines.push(line);
        } else if !line.trim().is_empty() {
            return Err(schema_error(
                shape,
                "text before the first `## <topic>` header",
                text,
            ));
        }
    }
    if let Some((title, lines)) = current.take() {
        sections.push(finish_section(shape, text, title, lines)?);
    }
    if sections.is_empty() {
        return Err(schema_error(shape, "no `## <topic>` sections found", text));
    }
    Ok(sections)
}

fn finish_section(
    shape: &Shape,
    text: &str,
    title: String,
    lines: Vec<&str>,
) -> Result<SummarySection, LlmError> {
    let body = lines.join("\n").trim().to_string();
    if body.is_empty() {
        return Err(schema_error(
            shape,
            format!("section {title:?} has no paragraph"),
            text,
        ));
    }
    Ok(SummarySection { title, body })
}

// Render functions: the inverse of `parse_structured` for each shape.

pub fn render_topics(topics: &[String]) -> String {
    serde_json::json!({ "topics": topics }).to_string()
}

pub fn render_selection(picks: &[SpeakerPick]) -> String {
    let speakers: Vec<serde_json::Value> = picks
        .iter()
        .map(|p| match &p.query {
            Some(q) => serde_json::json!({"id": p.doc_id, "query": q}),
            None => serde_json::json!({"id": p.doc_id}),
        })
        .collect();
    serde_json::json!({ "speakers": speakers }).to_string()
}

pub fn render_perspectives(perspectives: &[(Stance, String)]) -> String {
    let yes: Vec<&str> = perspectives
        .iter()
        .filter(|(s, _)| *s == Stance::Yes)
        .map(|(_, f)| f.as_str())
        .collect();
    let no: Vec<&str> = perspectives
        .iter()
        .filter(|(s, _)| *s == Stance::No)
        .map(|(_, f)| f.as_str())
        .collect();
    serde_json::json!({ "yes": yes, "no": no }).to_string()
}

pub fn render_grouped_perspectives(groups: &[SpeakerPerspectives]) -> String {
    let speakers: Vec<serde_json::Value> = groups
        .iter()
        .map(|g| {
            let yes: Vec<&str> = g
                .perspectives
                .iter()
                .filter(|(s, _)| *s == Stance::Yes)
                .map(|(_, f)| f.as_str())
                .collect();
            let no: Vec<&str> = g
                .perspectives
                .iter()
                .filter(|(s, _)| *s == Stance::No)
                .map(|(_, f)| f.as_str())
                .collect();
            serde_json::json!({"id": g.doc_id, "yes": yes, "no": no})
        })
        .collect();
    serde_json::json!({ "speakers": speakers }).to_string()
}

pub fn render_summary_sections(sections: &[SummarySection]) -> String {
    let mut out = String::new();
    for section in sections {
        if !out.is_empty() {
            out.push_str("\n\n");
        }
        out.push_str("## ");
        out.push_str(&section.title);
        out.push('\n');
        out.push_str(&section.body);
    }
    out
}

pub fn render_entailment(entailed: bool) -> &'static str {
    if entailed {
        "entailed"
    } else {
        "not entailed"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_list_parses() {
        let parsed = parse_structured(
            r#"{"topics": ["cost", "jobs", "prestige"]}"#,
            &Shape::TopicList { expected: 3 },
        )
        .unwrap();
        assert_eq!(
            parsed,
            Structured::Topics(vec!["cost".into(), "jobs".into(), "prestige".into()])
        );
    }

    #[test]
    fn topic_count_mismatch_is_a_schema_error() {
        let err = parse_structured(
            r#"{"topics": ["cost", "jobs"]}"#,
            &Shape::TopicList { expected: 3 },
        )
        .unwrap_err();
        assert!(err.to_string().contains("topic count mismatch"), "{err}");
    }

    #[test]
    fn perspectives_flatten_yes_then_no() {
        let parsed = parse_structured(
            r#"{"yes": ["f1"], "no": ["f2", "f3"]}"#,
            &Shape::PerspectiveList,
        )
        .unwrap();
        assert_eq!(
            parsed,
            Structured::Perspectives(vec![
                (Stance::Yes, "f1".into()),
                (Stance::No, "f2".into()),
                (Stance::No, "f3".into()),
            ])
        );
    }

    #[test]
    fn empty_perspectives_are_allowed() {
        let parsed = parse_structured(r#"{"yes": [], "no": []}"#, &Shape::PerspectiveList).unwrap();
        assert_eq!(parsed, Structured::Perspectives(vec![]));
    }

    #[test]
    fn fenced_json_is_accepted() {
        let text = "```json\n{\"topics\": [\"a\"]}\n```";
        let parsed = parse_structured(text, &Shape::TopicList { expected: 1 }).unwrap();
        assert_eq!(parsed, Structured::Topics(vec!["a".into()]));
    }

    #[test]
    fn selection_with_and_without_queries() {
        let parsed = parse_structured(
            r#"{"speakers": [{"id": 1, "query": "market trends"}, {"id": 3}]}"#,
            &Shape::SpeakerSelection,
        )
        .unwrap()
        .into_selection();
        assert_eq!(parsed[0].query.as_deref(), Some("market trends"));
        assert_eq!(parsed[1].query, None);
    }

    #[test]
    fn duplicate_speaker_ids_rejected() {
        let err = parse_structured(
            r#"{"speakers": [{"id": 2}, {"id": 2}]}"#,
            &Shape::SpeakerSelection,
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate speaker id 2"), "{err}");
    }

    #[test]
    fn summary_sections_parse_in_order() {
        let text = "## Costs\nTuition rose [1]. Debt grew [2].\n\n## Jobs\nHiring is mixed [3].";
        let sections = parse_structured(
            text,
            &Shape::Summary {
                expected_sections: Some(2),
            },
        )
        .unwrap()
        .into_sections();
        assert_eq!(sections[0].title, "Costs");
        assert_eq!(sections[0].body, "Tuition rose [1]. Debt grew [2].");
        assert_eq!(sections[1].title, "Jobs");
    }

    #[test]
    fn summary_preamble_rejected() {
        let err = parse_structured(
            "Here is the summary:\n## Costs\nBody.",
            &Shape::Summary {
                expected_sections: None,
            },
        )
        .unwrap_err();
        assert!(err.to_string().contains("before the first"), "{err}");
    }

    #[test]
    fn entailment_verdicts() {
        for (text, want) in [
            ("entailed", true),
            ("Entailed.", true),
            ("not entailed", false),
            (r#"{"entailed": true}"#, true),
        ] {
            assert_eq!(
                parse_structured(text, &Shape::Entailment).unwrap(),
                Structured::Entailment(want),
                "{text}"
            );
        }
        assert!(parse_structured("maybe", &Shape::Entailment).is_err());
    }

    #[test]
    fn renders_parse_back() {
        let picks = vec![
            SpeakerPick {
                doc_id: 1,
                query: Some("q1".into()),
            },
            SpeakerPick {
                doc_id: 4,
                query: None,
            },
        ];
        let parsed = parse_structured(&render_selection(&picks), &Shape::SpeakerSelection)
            .unwrap()
            .into_selection();
        assert_eq!(parsed, picks);
    }
}
