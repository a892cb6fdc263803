//! `mods run`: execute the pipeline over selected dataset entries and write
//! per-entry artifacts.

use crate::fs_util::write_atomic;
use crate::manifest::RunManifest;
use anyhow::{Context, Result};
use mods_core::corpus::{load_dataset, DebateEntry};
use mods_core::parallel::parallel_map;
use mods_core::pipeline::{export_outline, ExportFormat, Pipeline};
use mods_core::{ModelBackend, PromptLibrary, Session};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Exit code 2 signals a partial run: some entries failed but the run
/// continued.
pub const EXIT_PARTIAL: u8 = 2;

pub fn entry_dir(out_dir: &Path, index: usize) -> PathBuf {
    out_dir.join(format!("entry_{index:03}"))
}

fn run_entry(
    manifest: &RunManifest,
    backend: &Arc<dyn ModelBackend>,
    prompts: &PromptLibrary,
    index: usize,
    entry: &DebateEntry,
) -> Result<()> {
    let session = Session::new(backend.clone());
    let pipeline = Pipeline::new(&session, prompts, manifest.config.clone())?;
    let dir = entry_dir(&manifest.out_dir, index);
    std::fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let (summary, report, outline) = match manifest.config.baseline {
        Some(kind) => {
            let run = pipeline.run_baseline(entry, kind)?;
            (run.summary, run.report, None)
        }
        None => {
            let run = pipeline.run_mods(entry)?;
            (run.summary, run.report, Some(run.outline))
        }
    };
    if let Some(outline) = &outline {
        write_atomic(
            &dir.join("outline.json"),
            &export_outline(outline, ExportFormat::Json),
        )?;
        write_atomic(
            &dir.join("outline.md"),
            &export_outline(outline, ExportFormat::Markdown),
        )?;
    }
    write_atomic(&dir.join("summary.md"), &summary.to_markdown())?;
    let mut summary_json = serde_json::to_string_pretty(&summary)?;
    summary_json.push('\n');
    write_atomic(&dir.join("summary.json"), &summary_json)?;
    let mut report_json = serde_json::to_string_pretty(&report)?;
    report_json.push('\n');
    write_atomic(&dir.join("run_report.json"), &report_json)?;
    Ok(())
}

pub fn cmd_run(manifest: &RunManifest) -> Result<u8> {
    let entries = load_dataset(&manifest.dataset)?;
    let indices = manifest.entries.select(entries.len())?;
    let backend = manifest.backend.build()?;
    let prompts = PromptLibrary::embedded();
    std::fs::create_dir_all(&manifest.out_dir)
        .with_context(|| format!("cannot create {}", manifest.out_dir.display()))?;

    let outcomes = parallel_map(indices, manifest.config.parallelism, |index| {
        let result = run_entry(manifest, &backend, &prompts, index, &entries[index]);
        (index, result)
    });

    let mut failures = 0usize;
    for (index, outcome) in &outcomes {
        match outcome {
            Ok(()) => println!(
                "entry {index:03}: ok -> {}",
                entry_dir(&manifest.out_dir, *index).display()
            ),
            Err(error) => {
                failures += 1;
                eprintln!("entry {index:03}: FAILED: {error:#}");
            }
        }
    }
    println!(
        "{} of {} entries succeeded",
        outcomes.len() - failures,
        outcomes.len()
    );
    Ok(if failures > 0 { EXIT_PARTIAL } else { 0 })
}
