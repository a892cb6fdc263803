//! End-to-end driver tests over the bundled fixtures.

use mods_cli::{
    build_manifest, cmd_eval, cmd_export, cmd_run, entry_dir, BackendChoice, EntrySelector,
    EvalOptions, FileConfig, RunFlags, RunManifest, EXIT_PARTIAL,
};
use mods_core::pipeline::{parse_outline_json, PipelineConfig};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn manifest(out_dir: &Path, configure: impl FnOnce(&mut PipelineConfig)) -> RunManifest {
    let mut config = PipelineConfig {
        mode: Some(mods_core::Mode::ModsTopic),
        ..PipelineConfig::default()
    };
    configure(&mut config);
    RunManifest {
        dataset: fixture("dataset_small.json"),
        entries: EntrySelector::All,
        config,
        backend: BackendChoice::Scripted {
            path: fixture("script_small.json"),
        },
        out_dir: out_dir.to_path_buf(),
    }
}

#[test]
fn run_writes_five_artifacts_per_entry() {
    let dir = tempfile::tempdir().unwrap();
    let code = cmd_run(&manifest(dir.path(), |_| {})).unwrap();
    assert_eq!(code, 0);
    for index in 0..2 {
        let entry = entry_dir(dir.path(), index);
        for file in [
            "outline.json",
            "outline.md",
            "summary.md",
            "summary.json",
            "run_report.json",
        ] {
            assert!(entry.join(file).is_file(), "missing {file} for {index}");
        }
    }
}

#[test]
fn every_artifact_is_byte_deterministic() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    cmd_run(&manifest(first.path(), |_| {})).unwrap();
    cmd_run(&manifest(second.path(), |_| {})).unwrap();
    for index in 0..2 {
        for file in [
            "outline.json",
            "outline.md",
            "summary.md",
            "summary.json",
            "run_report.json",
        ] {
            let a = std::fs::read(entry_dir(first.path(), index).join(file)).unwrap();
            let b = std::fs::read(entry_dir(second.path(), index).join(file)).unwrap();
            assert_eq!(a, b, "entry {index} {file} differs");
        }
    }
}

#[test]
fn baseline_runs_write_summary_artifacts_only() {
    let dir = tempfile::tempdir().unwrap();
    let m = manifest(dir.path(), |config| {
        config.mode = None;
        config.baseline = Some(mods_core::BaselineKind::Hierarchical);
    });
    assert_eq!(cmd_run(&m).unwrap(), 0);
    let entry = entry_dir(dir.path(), 0);
    assert!(entry.join("summary.md").is_file());
    assert!(entry.join("run_report.json").is_file());
    assert!(!entry.join("outline.json").exists());
}

#[test]
fn live_backend_without_credentials_is_fatal() {
    std::env::remove_var("MODS_API_KEY");
    std::env::set_var("MODS_API_BASE", "http://127.0.0.1:1");
    std::env::set_var("MODS_MODEL", "m");
    let dir = tempfile::tempdir().unwrap();
    let mut m = manifest(dir.path(), |_| {});
    m.backend = BackendChoice::Live;
    let err = cmd_run(&m).unwrap_err();
    assert!(err.to_string().contains("missing credential"), "{err}");
    std::env::remove_var("MODS_API_BASE");
    std::env::remove_var("MODS_MODEL");
}

#[test]
fn no_mod_rerun_widens_selections_per_topic() {
    let base_dir = tempfile::tempdir().unwrap();
    let ablated_dir = tempfile::tempdir().unwrap();
    cmd_run(&manifest(base_dir.path(), |_| {})).unwrap();
    cmd_run(&manifest(ablated_dir.path(), |config| {
        config.ablations.insert(mods_core::Ablation::NoMod);
    }))
    .unwrap();
    for index in 0..2 {
        let read = |dir: &Path| {
            parse_outline_json(
                &std::fs::read_to_string(entry_dir(dir, index).join("outline.json")).unwrap(),
            )
            .unwrap()
        };
        let base = read(base_dir.path());
        let ablated = read(ablated_dir.path());
        assert_eq!(base.sections.len(), ablated.sections.len());
        for (b, a) in base.sections.iter().zip(&ablated.sections) {
            assert_eq!(b.topic, a.topic);
            let base_ids: BTreeSet<u32> = b.entries.iter().map(|e| e.doc_id).collect();
            let ablated_ids: BTreeSet<u32> = a.entries.iter().map(|e| e.doc_id).collect();
            assert!(base_ids.is_subset(&ablated_ids));
            assert!(ablated_ids.len() > base_ids.len());
        }
    }
}

#[test]
fn per_entry_failures_continue_and_exit_partial() {
    // Topics are scripted only for the first entry's query, so the second
    // entry's agenda call dies and is recorded while the run continues.
    let dir = tempfile::tempdir().unwrap();
    let script = serde_json::json!({
        "topic-list": {
            "Is remote work better":
                "{\"topics\": [\"Team Productivity\", \"Collaboration Quality\", \"Cost Impact\"]}"
        },
        "speaker-selection": {
            "": "{\"speakers\": [{\"id\": 1, \"query\": \"focus\"}]}"
        },
        "perspective-list": { "": "{\"yes\": [\"Output holds.\"], \"no\": []}" },
        "summary": { "": "## Filler\nOne [1]. Two [1]. Three [1]." }
    });
    let script_path = dir.path().join("partial_script.json");
    std::fs::write(&script_path, serde_json::to_string(&script).unwrap()).unwrap();
    let mut m = manifest(dir.path(), |_| {});
    m.backend = BackendChoice::Scripted { path: script_path };
    let code = cmd_run(&m).unwrap();
    assert_eq!(code, EXIT_PARTIAL);
    assert!(entry_dir(dir.path(), 0).join("summary.md").is_file());
    assert!(!entry_dir(dir.path(), 1).join("summary.md").exists());
}

#[test]
fn eval_reports_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    cmd_run(&manifest(dir.path(), |_| {})).unwrap();
    let options = EvalOptions {
        summaries_dir: dir.path().to_path_buf(),
        dataset: fixture("dataset_small.json"),
        out_dir: None,
        cite_acc: true,
        self_bleu: true,
        backend: Some(BackendChoice::Scripted {
            path: fixture("script_small.json"),
        }),
        parallelism: 2,
    };
    assert_eq!(cmd_eval(&options).unwrap(), 0);
    let json_first = std::fs::read(dir.path().join("report.json")).unwrap();
    let csv_first = std::fs::read(dir.path().join("report.csv")).unwrap();
    assert_eq!(cmd_eval(&options).unwrap(), 0);
    assert_eq!(
        std::fs::read(dir.path().join("report.json")).unwrap(),
        json_first
    );
    assert_eq!(
        std::fs::read(dir.path().join("report.csv")).unwrap(),
        csv_first
    );

    let csv = String::from_utf8(csv_first).unwrap();
    // Two entry rows plus header and mean row.
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().last().unwrap().starts_with("mean,"));
}

#[test]
fn balanced_hand_built_summary_scores_zero_fairness() {
    // Entry 0 has stances yes/no/yes/no/yes; citing {1, 2} in every
    // paragraph is perfectly balanced, so the Fair columns are exactly 0.
    let dir = tempfile::tempdir().unwrap();
    let entry_out = entry_dir(dir.path(), 0);
    std::fs::create_dir_all(&entry_out).unwrap();
    let summary = serde_json::json!({
        "paragraphs": (0..3).map(|i| serde_json::json!({
            "topic": {"index": i, "title": format!("Topic {i}")},
            "sentences": [
                {"text": "First balanced point [1].", "citations": [1]},
                {"text": "Second balanced point [2].", "citations": [2]}
            ]
        })).collect::<Vec<_>>()
    });
    std::fs::write(
        entry_out.join("summary.json"),
        serde_json::to_string_pretty(&summary).unwrap(),
    )
    .unwrap();
    let options = EvalOptions {
        summaries_dir: dir.path().to_path_buf(),
        dataset: fixture("dataset_small.json"),
        out_dir: None,
        cite_acc: false,
        self_bleu: false,
        backend: None,
        parallelism: 1,
    };
    assert_eq!(cmd_eval(&options).unwrap(), 0);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    // Columns: entry, query, summary_dc, summary_fair, summary_faithful,
    // paragraph_dc, paragraph_fair, ...
    assert_eq!(fields[3], "0", "summary fair: {row}");
    assert_eq!(fields[6], "0", "paragraph fair: {row}");
    assert_eq!(fields[2], "0.4", "summary dc: {row}");
}

#[test]
fn orphan_summaries_fail_eval_by_name() {
    let dir = tempfile::tempdir().unwrap();
    cmd_run(&manifest(dir.path(), |_| {})).unwrap();
    let orphan = dir.path().join("entry_009");
    std::fs::create_dir_all(&orphan).unwrap();
    std::fs::copy(
        entry_dir(dir.path(), 0).join("summary.json"),
        orphan.join("summary.json"),
    )
    .unwrap();
    let options = EvalOptions {
        summaries_dir: dir.path().to_path_buf(),
        dataset: fixture("dataset_small.json"),
        out_dir: None,
        cite_acc: false,
        self_bleu: false,
        backend: None,
        parallelism: 1,
    };
    let err = cmd_eval(&options).unwrap_err();
    assert!(err.to_string().contains("orphan summary"), "{err}");
    assert!(err.to_string().contains("entry_009"), "{err}");
}

#[test]
fn cite_acc_requires_a_backend() {
    let dir = tempfile::tempdir().unwrap();
    cmd_run(&manifest(dir.path(), |_| {})).unwrap();
    let options = EvalOptions {
        summaries_dir: dir.path().to_path_buf(),
        dataset: fixture("dataset_small.json"),
        out_dir: None,
        cite_acc: true,
        self_bleu: false,
        backend: None,
        parallelism: 1,
    };
    let err = cmd_eval(&options).unwrap_err();
    assert!(
        err.to_string().contains("--cite-acc needs --backend"),
        "{err}"
    );
}

#[test]
fn export_round_trips_run_outlines() {
    let dir = tempfile::tempdir().unwrap();
    cmd_run(&manifest(dir.path(), |_| {})).unwrap();
    let outline_path = entry_dir(dir.path(), 0).join("outline.json");
    let md_path = dir.path().join("exported.md");
    assert_eq!(
        cmd_export(&outline_path, "markdown", Some(&md_path)).unwrap(),
        0
    );
    let markdown = std::fs::read_to_string(&md_path).unwrap();
    assert!(markdown.starts_with("# Outline: Is remote work better"));

    let json_path = dir.path().join("exported.json");
    cmd_export(&outline_path, "json", Some(&json_path)).unwrap();
    let original = parse_outline_json(&std::fs::read_to_string(&outline_path).unwrap()).unwrap();
    let reexported = parse_outline_json(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(original, reexported);
}

#[test]
fn config_file_drives_a_run_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.json");
    let config = serde_json::json!({
        "dataset": fixture("dataset_small.json"),
        "entries": { "index": 0 },
        "config": { "mode": "mods_all", "topics": 3 },
        "backend": { "kind": "scripted", "path": fixture("script_small.json") },
        "out_dir": dir.path().join("from-config")
    });
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let file = FileConfig::load(&config_path).unwrap();
    let flags = RunFlags {
        topics: Some(2),
        ..RunFlags::default()
    };
    let manifest = build_manifest(flags, file).unwrap();
    assert_eq!(manifest.config.topics, 2);
    assert_eq!(cmd_run(&manifest).unwrap(), 0);
    let summary =
        std::fs::read_to_string(entry_dir(&dir.path().join("from-config"), 0).join("summary.md"))
            .unwrap();
    assert_eq!(summary.matches("## ").count(), 2);
}
