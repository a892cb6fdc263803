//! Library surface of the `mods` command-line driver, kept callable so
//! integration tests exercise the same code paths the binary runs.

mod eval;
mod export;
mod fs_util;
mod manifest;
mod run;
mod validate;

pub use eval::{cmd_eval, EvalOptions};
pub use export::cmd_export;
pub use manifest::{
    build_manifest, BackendChoice, EntrySelector, FileConfig, RunFlags, RunManifest,
};
pub use run::{cmd_run, entry_dir, EXIT_PARTIAL};
pub use validate::cmd_validate;
