//! `mods export`: convert an outline.json into its export formats.

use crate::fs_util::write_atomic;
use anyhow::{bail, Context, Result};
use mods_core::pipeline::{export_outline, parse_outline_json, ExportFormat};
use std::path::Path;

pub fn cmd_export(outline_path: &Path, format: &str, out: Option<&Path>) -> Result<u8> {
    let format = match format.to_ascii_lowercase().as_str() {
        "json" => ExportFormat::Json,
        "markdown" | "md" => ExportFormat::Markdown,
        other => bail!("unknown export format {other:?} (expected json or markdown)"),
    };
    let text = std::fs::read_to_string(outline_path)
        .with_context(|| format!("cannot read {}", outline_path.display()))?;
    let outline = parse_outline_json(&text)?;
    let rendered = export_outline(&outline, format);
    match out {
        Some(path) => {
            write_atomic(path, &rendered)?;
            println!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(0)
}
