//! `zipfirm report`: sweep a directory tree for run manifests and bundle
//! them, with their JSON artifacts inlined, into one report. Best-effort:
//! anything unreadable becomes an error record and the exit stays 0.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;

use crate::errors::CliError;
use crate::io::SCHEMA_VERSION;
use crate::manifest::{RunManifest, MANIFEST_FILE};

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory tree holding prior run outputs
    dir: PathBuf,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Report {
    schema: u32,
    entries: Vec<Entry>,
    errors: Vec<ErrorRecord>,
}

#[derive(Serialize)]
struct Entry {
    /// Manifest path relative to the scanned directory.
    path: String,
    manifest: RunManifest,
    /// JSON outputs by file name, inlined.
    artifacts: BTreeMap<String, serde_json::Value>,
}

#[derive(Serialize)]
struct ErrorRecord {
    path: String,
    message: String,
}

pub fn run(args: ReportArgs) -> Result<(), CliError> {
    if !args.dir.is_dir() {
        return Err(CliError::Io(format!("{}: not a directory", args.dir.display())));
    }
    let mut manifests = Vec::new();
    collect_manifests(&args.dir, &mut manifests)?;
    manifests.sort();

    let mut entries = Vec::new();
    let mut errors = Vec::new();
    for path in manifests {
        let rel = relative_to(&path, &args.dir);
        match load_entry(&path, &rel) {
            Ok(entry) => entries.push(entry),
            Err(record) => errors.push(record),
        }
    }
    entries.sort_by(|a, b| {
        (a.manifest.timestamp.as_str(), a.path.as_str())
            .cmp(&(b.manifest.timestamp.as_str(), b.path.as_str()))
    });

    let report = Report { schema: SCHEMA_VERSION, entries, errors };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    if let Some(path) = &args.out {
        eprintln!(
            "report: {} entries, {} errors, written to {}",
            report.entries.len(),
            report.errors.len(),
            path.display()
        );
    }
    Ok(())
}

/// One run directory becomes one entry; any unreadable piece drops the whole
/// entry into the error list so the report never carries half a run.
fn load_entry(manifest_path: &Path, rel: &str) -> Result<Entry, ErrorRecord> {
    let fail = |path: &Path, message: String| ErrorRecord {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(manifest_path)
        .map_err(|e| fail(manifest_path, e.to_string()))?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| fail(manifest_path, e.to_string()))?;

    let dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let mut artifacts = BTreeMap::new();
    for name in &manifest.output_paths {
        if !name.ends_with(".json") {
            continue;
        }
        let artifact_path = dir.join(name);
        let body = std::fs::read_to_string(&artifact_path)
            .map_err(|e| fail(&artifact_path, e.to_string()))?;
        let value: serde_json::Value =
            serde_json::from_str(&body).map_err(|e| fail(&artifact_path, e.to_string()))?;
        artifacts.insert(name.clone(), value);
    }
    Ok(Entry { path: rel.to_string(), manifest, artifacts })
}

fn collect_manifests(dir: &Path, found: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut children: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .collect();
    children.sort();
    for child in children {
        if child.is_dir() {
            collect_manifests(&child, found)?;
        } else if child.file_name().is_some_and(|n| n == MANIFEST_FILE) {
            found.push(child);
        }
    }
    Ok(())
}

fn relative_to(path: &Path, root: &Path) -> String {
    path.strip_prefix(root).unwrap_or(path).display().to_string()
}
