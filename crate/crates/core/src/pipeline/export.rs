//! Outline export: canonical JSON and a reader-facing Markdown view that
//! groups each topic's facts by stance and lists the tailored queries as
//! follow-up questions.

use super::types::{Outline, OutlineSection};
use super::PipelineError;
use crate::corpus::Stance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Markdown,
}

pub fn export_outline(outline: &Outline, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => {
            let mut out = serde_json::to_string_pretty(outline).expect("outline serializes");
            out.push('\n');
            out
        }
        ExportFormat::Markdown => outline_markdown(outline),
    }
}

/// Parse the canonical JSON form back into an outline.
pub fn parse_outline_json(text: &str) -> Result<Outline, PipelineError> {
    serde_json::from_str(text)
        .map_err(|e| PipelineError::Validation(format!("invalid outline JSON: {e}")))
}

fn outline_markdown(outline: &Outline) -> String {
    let mut out = format!("# Outline: {}\n", outline.query);
    for section in &outline.sections {
        out.push_str(&format!("\n## {}\n", section.topic.title));
        render_stance_group(&mut out, section, Some(Stance::Yes), "Yes");
        render_stance_group(&mut out, section, Some(Stance::No), "No");
        render_stance_group(&mut out, section, None, "Unlabeled");
        let follow_ups: Vec<String> = section
            .entries
            .iter()
            .map(|e| format!("- Document {}: {}", e.doc_id, e.tailored_query))
            .collect();
        if !follow_ups.is_empty() {
            out.push_str("\n### Follow-up queries\n");
            for line in follow_ups {
                out.push_str(&line);
                out.push('\n');
            }
        }
    }
    out
}

fn render_stance_group(
    out: &mut String,
    section: &OutlineSection,
    stance: Option<Stance>,
    label: &str,
) {
    let facts: Vec<String> = section
        .entries
        .iter()
        .flat_map(|e| {
            e.perspectives
                .iter()
                .filter(|p| p.stance == stance)
                .map(|p| format!("- {} [{}]", p.fact, e.doc_id))
        })
        .collect();
    if facts.is_empty() {
        return;
    }
    out.push_str(&format!("\n### {label}\n"));
    for fact in facts {
        out.push_str(&fact);
        out.push('\n');
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::types::{OutlineEntry, Perspective, Topic};

    fn sample() -> Outline {
        Outline {
            query: "Is it worth it?".into(),
            sections: vec![OutlineSection {
                topic: Topic {
                    index: 0,
                    title: "Costs".into(),
                },
                entries: vec![
                    OutlineEntry {
                        doc_id: 1,
                        tailored_query: "What do tuition trends show?".into(),
                        perspectives: vec![Perspective {
                            stance: Some(Stance::Yes),
                            fact: "Scholarships offset rising fees.".into(),
                        }],
                        empty_reason: None,
                    },
                    OutlineEntry {
                        doc_id: 3,
                        tailored_query: "How has debt load changed?".into(),
                        perspectives: vec![Perspective {
                            stance: Some(Stance::No),
                            fact: "Median debt doubled in a decade.".into(),
                        }],
                        empty_reason: None,
                    },
                ],
            }],
        }
    }

    #[test]
    fn markdown_groups_by_topic_and_stance() {
        let md = export_outline(&sample(), ExportFormat::Markdown);
        let yes_at = md.find("### Yes").unwrap();
        let no_at = md.find("### No").unwrap();
        let follow_at = md.find("### Follow-up queries").unwrap();
        assert!(md.starts_with("# Outline: Is it worth it?"));
        assert!(md.contains("## Costs"));
        assert!(yes_at < no_at && no_at < follow_at, "{md}");
        assert!(md.contains("- Scholarships offset rising fees. [1]"));
        assert!(md.contains("- Document 3: How has debt load changed?"));
    }

    #[test]
    fn empty_sections_export_headers_only() {
        let outline = Outline {
            query: "q".into(),
            sections: vec![OutlineSection {
                topic: Topic {
                    index: 0,
                    title: "Bare".into(),
                },
                entries: vec![],
            }],
        };
        let md = export_outline(&outline, ExportFormat::Markdown);
        assert!(md.contains("## Bare"));
        assert!(!md.contains("###"), "{md}");
    }

    #[test]
    fn json_round_trips() {
        let outline = sample();
        let json = export_outline(&outline, ExportFormat::Json);
        assert_eq!(parse_outline_json(&json).unwrap(), outline);
    }

    #[test]
    fn unlabeled_perspectives_get_their_own_group() {
        let mut outline = sample();
        outline.sections[0].entries[0].perspectives[0].stance = None;
        let md = export_outline(&outline, ExportFormat::Markdown);
        assert!(md.contains("### Unlabeled"), "{md}");
    }
}
