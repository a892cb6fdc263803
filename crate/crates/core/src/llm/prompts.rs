//! Prompt templates, one file per pipeline stage.
//!
//! Templates live under `prompts/` in this crate and are embedded into the
//! binary as defaults; [`PromptLibrary::from_dir`] loads a replacement set
//! from a directory with the same file names. Placeholders are written
//! `{name}`; literal braces are escaped as `{{` and `}}`.

use super::LlmError;
use std::path::Path;

macro_rules! prompt_library {
    ($(($field:ident, $file:literal)),+ $(,)?) => {
        /// The per-stage prompt set used by the pipeline.
        #[derive(Debug, Clone)]
        pub struct PromptLibrary {
            $(pub $field: String,)+
        }

        impl PromptLibrary {
            /// The templates compiled into the crate.
            pub fn embedded() -> PromptLibrary {
                PromptLibrary {
                    $($field: include_str!(concat!("../../prompts/", $file)).to_string(),)+
                }
            }

            /// Load every stage template from a directory; each stage must
            /// have its file.
            pub fn from_dir(dir: impl AsRef<Path>) -> Result<PromptLibrary, LlmError> {
                let dir = dir.as_ref();
                let read = |file: &str| {
                    std::fs::read_to_string(dir.join(file)).map_err(|e| {
                        LlmError::Template(format!(
                            "cannot read prompt template {}: {e}",
                            dir.join(file).display()
                        ))
                    })
                };
                Ok(PromptLibrary {
                    $($field: read($file)?,)+
                })
            }
        }
    };
}

prompt_library![
    (agenda, "agenda.txt"),
    (selection, "selection.txt"),
    (selection_ids, "selection_ids.txt"),
    (tailor, "tailor.txt"),
    (speaker, "speaker.txt"),
    (speaker_combined, "speaker_combined.txt"),
    (freeform_update, "freeform_update.txt"),
    (summarize_all, "summarize_all.txt"),
    (summarize_topic, "summarize_topic.txt"),
    (long_context, "long_context.txt"),
    (rag_all, "rag_all.txt"),
    (rag_doc, "rag_doc.txt"),
    (hierarchical_doc, "hierarchical_doc.txt"),
    (hierarchical_merge, "hierarchical_merge.txt"),
    (incremental_update, "incremental_update.txt"),
    (incremental_refine_all, "incremental_refine_all.txt"),
    (incremental_refine_topic, "incremental_refine_topic.txt"),
    (entailment, "entailment.txt"),
];

impl Default for PromptLibrary {
    fn default() -> PromptLibrary {
        PromptLibrary::embedded()
    }
}

/// Fill `{name}` placeholders from `vars`. Unknown placeholders and stray
/// braces are errors so template typos surface immediately.
pub fn render_template(template: &str, vars: &[(&str, &str)]) -> Result<String, LlmError> {
    let mut out = String::with_capacity(template.len());
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' => {
                if chars.peek() == Some(&'{') {
                    chars.next();
                    out.push('{');
                    continue;
                }
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some('}') => break,
                        Some(n) if n.is_ascii_alphanumeric() || n == '_' => name.push(n),
                        Some(n) => {
                            return Err(LlmError::Template(format!(
                                "invalid character {n:?} in placeholder {{{name}…"
                            )))
                        }
                        None => {
                            return Err(LlmError::Template(format!(
                                "unterminated placeholder {{{name}"
                            )))
                        }
                    }
                }
                let value = vars
                    .iter()
                    .find(|(k, _)| *k == name)
                    .map(|(_, v)| *v)
                    .ok_or_else(|| {
                        LlmError::Template(format!("no value for placeholder {{{name}}}"))
                    })?;
                out.push_str(value);
            }
            '}' => {
                if chars.peek() == Some(&'}') {
                    chars.next();
                    out.push('}');
                } else {
                    return Err(LlmError::Template("stray '}' in template".into()));
                }
            }
            other => out.push(other),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholders_fill_and_braces_unescape() {
        let rendered = render_template(
            "Ask {name}: {{\"topics\": [\"{name}\"]}}",
            &[("name", "who")],
        )
        .unwrap();
        assert_eq!(rendered, r#"Ask who: {"topics": ["who"]}"#);
    }

    #[test]
    fn unknown_placeholder_is_an_error() {
        assert!(render_template("{nope}", &[]).is_err());
        assert!(render_template("open { brace", &[]).is_err());
        assert!(render_template("close } brace", &[]).is_err());
    }

    #[test]
    fn embedded_templates_render_cleanly() {
        // Every embedded template must contain only known placeholders and
        // balanced braces; rendering with a full variable set proves it.
        let lib = PromptLibrary::embedded();
        let vars: Vec<(&str, &str)> = vec![
            ("query", "q"),
            ("m", "3"),
            ("k", "3"),
            ("topic", "t"),
            ("topics", "1. a"),
            ("biographies", "b"),
            ("speakers", "1, 2"),
            ("tailored_query", "tq"),
            ("contexts", "c"),
            ("speaker_contexts", "sc"),
            ("outline", "o"),
            ("section", "s"),
            ("draft", "d"),
            ("paragraph", "p"),
            ("documents", "docs"),
            ("document", "doc"),
            ("doc_id", "1"),
            ("doc_summaries", "ds"),
            ("premise", "prem"),
            ("hypothesis", "hyp"),
        ];
        for (name, template) in [
            ("agenda", &lib.agenda),
            ("selection", &lib.selection),
            ("selection_ids", &lib.selection_ids),
            ("tailor", &lib.tailor),
            ("speaker", &lib.speaker),
            ("speaker_combined", &lib.speaker_combined),
            ("freeform_update", &lib.freeform_update),
            ("summarize_all", &lib.summarize_all),
            ("summarize_topic", &lib.summarize_topic),
            ("long_context", &lib.long_context),
            ("rag_all", &lib.rag_all),
            ("rag_doc", &lib.rag_doc),
            ("hierarchical_doc", &lib.hierarchical_doc),
            ("hierarchical_merge", &lib.hierarchical_merge),
            ("incremental_update", &lib.incremental_update),
            ("incremental_refine_all", &lib.incremental_refine_all),
            ("incremental_refine_topic", &lib.incremental_refine_topic),
            ("entailment", &lib.entailment),
        ] {
            render_template(template, &vars).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn from_dir_reads_a_full_template_set() {
        let dir = std::env::temp_dir().join(format!("mods-prompts-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for file in [
            "agenda.txt",
            "selection.txt",
            "selection_ids.txt",
            "tailor.txt",
            "speaker.txt",
            "speaker_combined.txt",
            "freeform_update.txt",
            "summarize_all.txt",
            "summarize_topic.txt",
            "long_context.txt",
            "rag_all.txt",
            "rag_doc.txt",
            "hierarchical_doc.txt",
            "hierarchical_merge.txt",
            "incremental_update.txt",
            "incremental_refine_all.txt",
            "incremental_refine_topic.txt",
            "entailment.txt",
        ] {
            std::fs::write(dir.join(file), "stub {query}").unwrap();
        }
        let lib = PromptLibrary::from_dir(&dir).unwrap();
        assert_eq!(lib.agenda, "stub {query}");
        std::fs::remove_dir_all(&dir).unwrap();

        assert!(PromptLibrary::from_dir("/nonexistent-prompts").is_err());
    }
}
