//! `mods eval`: score summaries against their dataset entries and emit
//! report.json / report.csv.

use crate::fs_util::write_atomic;
use crate::manifest::BackendChoice;
use anyhow::{bail, Context, Result};
use mods_core::corpus::load_dataset;
use mods_core::metrics::{
    citation_accuracy, evaluate_summary, self_bleu, write_report_csv, write_report_json, EvalRow,
};
use mods_core::pipeline::Summary;
use mods_core::{PromptLibrary, Session};
use std::path::{Path, PathBuf};

pub struct EvalOptions {
    pub summaries_dir: PathBuf,
    pub dataset: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub cite_acc: bool,
    pub self_bleu: bool,
    pub backend: Option<BackendChoice>,
    pub parallelism: usize,
}

/// Find `entry_NNN/summary.json` files under the summaries directory.
fn discover_summaries(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut found = Vec::new();
    let listing = std::fs::read_dir(dir)
        .with_context(|| format!("cannot list summaries under {}", dir.display()))?;
    for item in listing {
        let item = item?;
        let path = item.path().join("summary.json");
        if !path.is_file() {
            continue;
        }
        let name = item.file_name();
        let name = name.to_string_lossy();
        let Some(index) = name
            .strip_prefix("entry_")
            .and_then(|raw| raw.parse::<usize>().ok())
        else {
            bail!(
                "summary file {} has no parseable entry index",
                path.display()
            );
        };
        found.push((index, path));
    }
    if found.is_empty() {
        bail!("no entry_*/summary.json files under {}", dir.display());
    }
    found.sort_by_key(|(index, _)| *index);
    Ok(found)
}

pub fn cmd_eval(options: &EvalOptions) -> Result<u8> {
    let entries = load_dataset(&options.dataset)?;
    let summaries = discover_summaries(&options.summaries_dir)?;

    let backend = if options.cite_acc {
        let choice = options
            .backend
            .as_ref()
            .ok_or_else(|| anyhow::anyhow!("--cite-acc needs --backend scripted:<path>|live"))?;
        Some(choice.build()?)
    } else {
        None
    };
    let prompts = PromptLibrary::embedded();

    let mut rows = Vec::with_capacity(summaries.len());
    for (index, path) in summaries {
        let Some(entry) = entries.get(index) else {
            bail!(
                "orphan summary file {}: dataset has no entry {index}",
                path.display()
            );
        };
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let summary: Summary = serde_json::from_str(&text)
            .with_context(|| format!("invalid summary {}", path.display()))?;
        let mut report = evaluate_summary(&summary, entry)?;
        if let Some(backend) = &backend {
            let session = Session::new(backend.clone());
            let outcome =
                citation_accuracy(&summary, entry, &session, &prompts, options.parallelism);
            report.citation_accuracy = outcome.accuracy();
            report.accuracy_excluded_pairs = outcome.excluded_pairs;
        }
        if options.self_bleu {
            let paragraphs: Vec<String> = summary.paragraphs.iter().map(|p| p.text()).collect();
            report.self_bleu = Some(self_bleu(&paragraphs, 4)?);
        }
        rows.push(EvalRow {
            entry_index: index,
            query: entry.query.clone(),
            report,
        });
    }

    let out_dir = options
        .out_dir
        .clone()
        .unwrap_or_else(|| options.summaries_dir.clone());
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    write_atomic(&out_dir.join("report.json"), &write_report_json(&rows))?;
    write_atomic(&out_dir.join("report.csv"), &write_report_csv(&rows))?;
    println!(
        "evaluated {} summaries -> {}",
        rows.len(),
        out_dir.join("report.csv").display()
    );
    Ok(0)
}
