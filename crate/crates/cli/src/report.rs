//! File and markdown plumbing shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use rdfrank_core::plot::format_value;
use rdfrank_core::ranking::RankingSet;
use rdfrank_core::{Error, Result};

/// Report files for one dataset live under `<out>/report/<dataset>`.
pub fn report_dir(out: &Path, dataset: &str) -> PathBuf {
    out.join("report").join(dataset)
}

/// Turns a criterion or label into a safe file-name fragment: anything
/// outside `[A-Za-z0-9._-]` becomes `_` (so `sd:schema` → `sd_schema`).
pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes `contents`, creating parent directories as needed.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// A pipe-delimited markdown table; every row must match the header width.
pub fn md_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&format!("| {} |\n", header.join(" | ")));
    out.push_str(&format!("|{}\n", " --- |".repeat(header.len())));
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&format!("| {} |\n", row.join(" | ")));
    }
    out
}

/// The head of a ranking as a markdown document; errors when `k` exceeds
/// the space.
pub fn top_k_markdown(ranking: &RankingSet, k: usize) -> Result<String> {
    let top = ranking.top_k(k)?;
    let rows: Vec<Vec<String>> = top
        .iter()
        .enumerate()
        .map(|(i, e)| {
            vec![
                (i + 1).to_string(),
                e.label.clone(),
                format_value(e.score),
            ]
        })
        .collect();
    Ok(format!(
        "# Top-{k} configurations by {}\n\n{}",
        ranking.criterion,
        md_table(&["rank", "configuration", "score"], &rows)
    ))
}
