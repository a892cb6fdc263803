use clap::{Parser, Subcommand};
use mods_cli::{
    build_manifest, cmd_eval, cmd_export, cmd_run, cmd_validate, BackendChoice, EvalOptions,
    FileConfig, RunFlags,
};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mods",
    version,
    about = "Moderated panel summarization of debatable queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset, check every invariant, and print shape statistics.
    Validate {
        /// Dataset JSON file.
        dataset: PathBuf,
    },
    /// Run the panel pipeline or a baseline over dataset entries.
    Run {
        /// Dataset JSON file.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// JSON config file with the same fields as the flags; flags win.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Panel mode: mods-topic | mods-all.
        #[arg(long)]
        mode: Option<String>,
        /// Baseline: long-context | rag-all | rag-doc | hierarchical |
        /// incremental-all | incremental-topic.
        #[arg(long)]
        baseline: Option<String>,
        /// Number of summary topics (m).
        #[arg(long)]
        topics: Option<usize>,
        /// Retrieval depth.
        #[arg(long)]
        k: Option<usize>,
        /// Comma-separated ablations: no-tailor,no-cot,no-speak,no-mod,
        /// no-stance,no-outline.
        #[arg(long)]
        ablate: Option<String>,
        /// Backend: `scripted:<path>` or `live` (env MODS_API_BASE,
        /// MODS_API_KEY, MODS_MODEL).
        #[arg(long)]
        backend: Option<String>,
        /// Output directory for per-entry artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Entry selector: all | N | A..B (half-open).
        #[arg(long)]
        entries: Option<String>,
        /// Concurrent workers for entries and speaker fan-out.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Evaluate written summaries against their dataset entries.
    Eval {
        /// Directory holding entry_*/summary.json artifacts.
        #[arg(long)]
        summaries: PathBuf,
        /// Dataset JSON file the summaries were produced from.
        #[arg(long)]
        dataset: PathBuf,
        /// Report output directory (defaults to the summaries directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Judge citation accuracy by entailment (needs --backend).
        #[arg(long = "cite-acc")]
        cite_acc: bool,
        /// Add the self-BLEU column.
        #[arg(long = "self-bleu")]
        self_bleu: bool,
        /// Backend for --cite-acc: `scripted:<path>` or `live`.
        #[arg(long)]
        backend: Option<String>,
        /// Concurrent entailment calls.
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
    },
    /// Re-export an outline.json as JSON or Markdown.
    Export {
        /// Outline JSON file written by `mods run`.
        #[arg(long)]
        outline: PathBuf,
        /// json | markdown.
        #[arg(long)]
        format: String,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate { dataset } => cmd_validate(&dataset),
        Command::Run {
            dataset,
            config,
            mode,
            baseline,
            topics,
            k,
            ablate,
            backend,
            out,
            entries,
            parallelism,
        } => {
            let file = match config {
                Some(path) => FileConfig::load(&path)?,
                None => FileConfig::default(),
            };
            let flags = RunFlags {
                dataset,
                entries,
                mode,
                baseline,
                topics,
                k,
                ablate,
                backend,
                out,
                parallelism,
            };
            let manifest = build_manifest(flags, file)?;
            cmd_run(&manifest)
        }
        Command::Eval {
            summaries,
            dataset,
            out,
            cite_acc,
            self_bleu,
            backend,
            parallelism,
        } => {
            let backend = backend
                .map(|raw| raw.parse::<BackendChoice>())
                .transpose()
                .map_err(|e| anyhow::anyhow!(e))?;
            cmd_eval(&EvalOptions {
                summaries_dir: summaries,
                dataset,
                out_dir: out,
                cite_acc,
                self_bleu,
                backend,
                parallelism,
            })
        }
        Command::Export {
            outline,
            format,
            out,
        } => cmd_export(&outline, &format, out.as_deref()),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            1
        }
    };
    std::process::exit(code as i32);
}
