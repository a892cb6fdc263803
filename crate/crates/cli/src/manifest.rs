//! Run manifests: the full description of one batch run, assembled from CLI
//! flags and an optional JSON config file. Flags win on conflict.

use anyhow::{anyhow, bail, Context, Result};
use mods_core::llm::{HttpBackend, ScriptedBackend};
use mods_core::pipeline::{Ablation, BaselineKind, Mode, PipelineConfig};
use mods_core::ModelBackend;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

/// Which dataset entries a run covers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntrySelector {
    #[default]
    All,
    Index(usize),
    /// Half-open index range.
    Range {
        start: usize,
        end: usize,
    },
}

impl FromStr for EntrySelector {
    type Err = String;

    fn from_str(s: &str) -> Result<EntrySelector, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(EntrySelector::All);
        }
        if let Some((start, end)) = s.split_once("..") {
            let start = start
                .trim()
                .parse()
                .map_err(|_| format!("bad range start in {s:?}"))?;
            let end = end
                .trim()
                .parse()
                .map_err(|_| format!("bad range end in {s:?}"))?;
            if start >= end {
                return Err(format!("empty range {s:?}"));
            }
            return Ok(EntrySelector::Range { start, end });
        }
        s.parse()
            .map(EntrySelector::Index)
            .map_err(|_| format!("entry selector must be \"all\", an index, or a..b, got {s:?}"))
    }
}

impl EntrySelector {
    /// Resolve to concrete indices against a dataset of `len` entries.
    pub fn select(&self, len: usize) -> Result<Vec<usize>> {
        let indices: Vec<usize> = match *self {
            EntrySelector::All => (0..len).collect(),
            EntrySelector::Index(i) => vec![i],
            EntrySelector::Range { start, end } => (start..end).collect(),
        };
        if let Some(&bad) = indices.iter().find(|&&i| i >= len) {
            bail!("entry {bad} out of range: dataset has {len} entries");
        }
        Ok(indices)
    }
}

/// Scripted fixture or live endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendChoice {
    Scripted { path: PathBuf },
    Live,
}

impl FromStr for BackendChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<BackendChoice, String> {
        if s.eq_ignore_ascii_case("live") {
            return Ok(BackendChoice::Live);
        }
        if let Some(path) = s.strip_prefix("scripted:") {
            if path.is_empty() {
                return Err("scripted backend needs a path: scripted:<path>".into());
            }
            return Ok(BackendChoice::Scripted {
                path: PathBuf::from(path),
            });
        }
        Err(format!(
            "backend must be \"scripted:<path>\" or \"live\", got {s:?}"
        ))
    }
}

impl BackendChoice {
    pub fn build(&self) -> Result<Arc<dyn ModelBackend>> {
        match self {
            BackendChoice::Scripted { path } => Ok(Arc::new(
                ScriptedBackend::from_file(path).map_err(|e| anyhow!("{e}"))?,
            )),
            BackendChoice::Live => Ok(Arc::new(
                HttpBackend::from_env().map_err(|e| anyhow!("{e}"))?,
            )),
        }
    }
}

/// Everything one `run` invocation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub dataset: PathBuf,
    pub entries: EntrySelector,
    pub config: PipelineConfig,
    pub backend: BackendChoice,
    pub out_dir: PathBuf,
}

/// Flag values as they arrive from the command line; `None` means the flag
/// was not given and the config file (then the default) applies.
#[derive(Debug, Clone, Default)]
pub struct RunFlags {
    pub dataset: Option<PathBuf>,
    pub entries: Option<String>,
    pub mode: Option<String>,
    pub baseline: Option<String>,
    pub topics: Option<usize>,
    pub k: Option<usize>,
    pub ablate: Option<String>,
    pub backend: Option<String>,
    pub out: Option<PathBuf>,
    pub parallelism: Option<usize>,
}

/// The config file carries the manifest schema itself, every field
/// optional; explicit flags win over it field by field.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub dataset: Option<PathBuf>,
    pub entries: Option<EntrySelector>,
    #[serde(default)]
    pub config: PartialConfig,
    pub backend: Option<BackendChoice>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub topics: Option<usize>,
    pub k: Option<usize>,
    pub mode: Option<Mode>,
    pub baseline: Option<BaselineKind>,
    pub ablations: Option<std::collections::BTreeSet<Ablation>>,
    pub parallelism: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }
}

fn parse_ablations(list: &str) -> Result<Vec<Ablation>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Ablation>().map_err(|e| anyhow!(e)))
        .collect()
}

/// Merge flags over the optional config file into a full manifest.
pub fn build_manifest(flags: RunFlags, file: FileConfig) -> Result<RunManifest> {
    let dataset = flags
        .dataset
        .or(file.dataset)
        .ok_or_else(|| anyhow!("a dataset is required (--dataset or config file)"))?;
    let entries = match flags.entries {
        Some(raw) => raw.parse::<EntrySelector>().map_err(|e| anyhow!(e))?,
        None => file.entries.unwrap_or_default(),
    };
    let backend = match flags.backend {
        Some(raw) => raw.parse::<BackendChoice>().map_err(|e| anyhow!(e))?,
        None => file
            .backend
            .ok_or_else(|| anyhow!("a backend is required (--backend scripted:<path>|live)"))?,
    };
    let out_dir = flags
        .out
        .or(file.out_dir)
        .ok_or_else(|| anyhow!("an output directory is required (--out)"))?;

    let mut config = PipelineConfig::default();
    if let Some(topics) = flags.topics.or(file.config.topics) {
        config.topics = topics;
    }
    if let Some(k) = flags.k.or(file.config.k) {
        config.k = k;
    }
    if let Some(parallelism) = flags.parallelism.or(file.config.parallelism) {
        config.parallelism = parallelism;
    }
    config.mode = match flags.mode {
        Some(mode) => Some(mode.parse::<Mode>().map_err(|e| anyhow!(e))?),
        None => file.config.mode,
    };
    config.baseline = match flags.baseline {
        Some(baseline) => Some(baseline.parse::<BaselineKind>().map_err(|e| anyhow!(e))?),
        None => file.config.baseline,
    };
    config.ablations = match flags.ablate {
        Some(list) => parse_ablations(&list)?.into_iter().collect(),
        None => file.config.ablations.unwrap_or_default(),
    };
    if config.mode.is_none() && config.baseline.is_none() {
        bail!("either --mode or --baseline is required");
    }
    config.validate().map_err(|e| anyhow!(e))?;
    Ok(RunManifest {
        dataset,
        entries,
        config,
        backend,
        out_dir,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selector_syntax() {
        assert_eq!("all".parse::<EntrySelector>().unwrap(), EntrySelector::All);
        assert_eq!(
            "4".parse::<EntrySelector>().unwrap(),
            EntrySelector::Index(4)
        );
        assert_eq!(
            "1..4".parse::<EntrySelector>().unwrap(),
            EntrySelector::Range { start: 1, end: 4 }
        );
        assert!("4..1".parse::<EntrySelector>().is_err());
        assert!("x".parse::<EntrySelector>().is_err());
    }

    #[test]
    fn selector_bounds_checked() {
        assert_eq!(EntrySelector::All.select(3).unwrap(), vec![0, 1, 2]);
        assert!(EntrySelector::Index(3).select(3).is_err());
        assert_eq!(
            EntrySelector::Range { start: 1, end: 3 }.select(3).unwrap(),
            vec![1, 2]
        );
    }

    #[test]
    fn backend_syntax() {
        assert_eq!(
            "scripted:fixtures/s.json".parse::<BackendChoice>().unwrap(),
            BackendChoice::Scripted {
                path: PathBuf::from("fixtures/s.json")
            }
        );
        assert_eq!(
            "live".parse::<BackendChoice>().unwrap(),
            BackendChoice::Live
        );
        assert!("other".parse::<BackendChoice>().is_err());
    }

    #[test]
    fn flags_win_over_config_file() {
        // The file carries the manifest schema itself.
        let file: FileConfig = serde_json::from_str(
            r#"{
                "dataset": "file.json",
                "entries": { "index": 1 },
                "config": { "topics": 5, "mode": "mods_all", "ablations": ["no_mod"] },
                "backend": { "kind": "live" },
                "out_dir": "file-out"
            }"#,
        )
        .unwrap();
        let flags = RunFlags {
            topics: Some(2),
            mode: Some("mods-topic".into()),
            out: Some(PathBuf::from("flag-out")),
            ..RunFlags::default()
        };
        let manifest = build_manifest(flags, file).unwrap();
        assert_eq!(manifest.dataset, PathBuf::from("file.json"));
        assert_eq!(manifest.entries, EntrySelector::Index(1));
        assert_eq!(manifest.config.topics, 2);
        assert_eq!(manifest.config.mode, Some(Mode::ModsTopic));
        assert!(manifest.config.has(Ablation::NoMod));
        assert_eq!(manifest.backend, BackendChoice::Live);
        assert_eq!(manifest.out_dir, PathBuf::from("flag-out"));
    }

    #[test]
    fn mode_or_baseline_is_required() {
        let flags = RunFlags {
            dataset: Some(PathBuf::from("d.json")),
            backend: Some("live".into()),
            out: Some(PathBuf::from("o")),
            ..RunFlags::default()
        };
        let err = build_manifest(flags, FileConfig::default()).unwrap_err();
        assert!(err.to_string().contains("--mode or --baseline"));
    }

    #[test]
    fn ablation_lists_parse() {
        let flags = RunFlags {
            dataset: Some(PathBuf::from("d.json")),
            backend: Some("live".into()),
            out: Some(PathBuf::from("o")),
            mode: Some("mods_topic".into()),
            ablate: Some("no-mod, no_tailor".into()),
            ..RunFlags::default()
        };
        let manifest = build_manifest(flags, FileConfig::default()).unwrap();
        assert!(manifest.config.has(Ablation::NoMod));
        assert!(manifest.config.has(Ablation::NoTailor));
    }
}
