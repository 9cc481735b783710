use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::behavior::FatigueLedger;
use crate::error::{Error, Result};
use crate::harness::{ExperimentResult, IterationRecord, StopReason, Summary};
use crate::selector::TestMode;

pub const ITERATIONS_FILE: &str = "iterations.csv";
pub const RUN_FILE: &str = "run.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything about a run except its per-iteration records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub batch_id: u32,
    pub seed: u64,
    pub mode: TestMode,
    pub config_fingerprint: String,
    pub seed_size: usize,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub correct_rate: f64,
    pub final_accuracy: f64,
    pub final_f1: f64,
    pub mean_uncertainty: f64,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
    pub ledger: FatigueLedger,
}

impl RunMeta {
    pub fn of(r: &ExperimentResult) -> Self {
        RunMeta {
            batch_id: r.batch_id,
            seed: r.seed,
            mode: r.mode,
            config_fingerprint: r.config_fingerprint.clone(),
            seed_size: r.seed_size,
            stop_reason: r.stop_reason,
            iterations: r.records.len(),
            correct_rate: r.correct_rate,
            final_accuracy: r.final_accuracy,
            final_f1: r.final_f1,
            mean_uncertainty: r.mean_uncertainty,
            wall_seconds: r.wall_seconds,
            cpu_seconds: r.cpu_seconds,
            ledger: r.ledger.clone(),
        }
    }

    pub fn with_records(self, records: Vec<IterationRecord>) -> ExperimentResult {
        ExperimentResult {
            batch_id: self.batch_id,
            seed: self.seed,
            mode: self.mode,
            config_fingerprint: self.config_fingerprint,
            seed_size: self.seed_size,
            stop_reason: self.stop_reason,
            records,
            correct_rate: self.correct_rate,
            final_accuracy: self.final_accuracy,
            final_f1: self.final_f1,
            mean_uncertainty: self.mean_uncertainty,
            wall_seconds: self.wall_seconds,
            cpu_seconds: self.cpu_seconds,
            ledger: self.ledger,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub rows: usize,
    pub features: usize,
    pub source_rows: usize,
    pub dropped_rows: usize,
    /// Original label text, indexed by class id.
    pub label_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub batch_id: u32,
    pub seed: u64,
    pub mode: TestMode,
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_hash: Option<String>,
    pub config_fingerprint: String,
    pub dataset: Option<DatasetInfo>,
    pub runs: Vec<RunEntry>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn new(config_hash: Option<String>, dataset: Option<DatasetInfo>) -> Self {
        Manifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            config_fingerprint: String::new(),
            dataset,
            runs: Vec::new(),
            files: Vec::new(),
        }
    }

    /// Checks every listed file against its recorded checksum.
    pub fn verify(&self, root: &Path) -> Result<()> {
        for f in &self.files {
            let path = root.join(&f.path);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            if hex::encode(Sha256::digest(&bytes)) != f.sha256 {
                return Err(Error::Dataset(format!("checksum mismatch for {}", f.path)));
            }
        }
        Ok(())
    }
}

pub fn run_dir_name(r: &ExperimentResult) -> String {
    format!("batch{}_seed{}_{}", r.batch_id, r.seed, r.mode.name())
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(path, &bytes)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

pub fn iterations_csv(records: &[IterationRecord]) -> Result<Vec<u8>> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record([
            "iter",
            "instance",
            "uncertainty",
            "annotator_id",
            "given_label",
            "true_label",
            "correct",
            "accuracy",
            "f1",
        ])?;
    }
    w.into_inner().map_err(|e| Error::io("iterations.csv", e.into_error()))
}

pub fn write_iterations(path: &Path, records: &[IterationRecord]) -> Result<()> {
    write_file(path, &iterations_csv(records)?)
}

pub fn read_iterations(path: &Path) -> Result<Vec<IterationRecord>> {
    let mut r = ::csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    write_json(path, summary)
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    read_json(path)
}

/// Adds a checksum entry for `rel` under `root`.
fn record_file(manifest: &mut Manifest, root: &Path, rel: &str) -> Result<()> {
    let path = root.join(rel);
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    manifest.files.push(FileEntry {
        path: rel.to_string(),
        bytes: bytes.len() as u64,
        sha256: hex::encode(Sha256::digest(&bytes)),
    });
    Ok(())
}

/// Writes per-run `iterations.csv` and `run.json` under `runs/`, the
/// per-mode `summary.json` and a `manifest.json` that lists every file with
/// its checksum.
pub fn export_results(
    out_dir: &Path,
    results: &[ExperimentResult],
    summary: &Summary,
    mut manifest: Manifest,
) -> Result<Manifest> {
    create_dir(out_dir)?;
    manifest.config_fingerprint = summary.config_fingerprint.clone();
    for r in results {
        let name = run_dir_name(r);
        let dir = out_dir.join("runs").join(&name);
        create_dir(&dir)?;
        write_iterations(&dir.join(ITERATIONS_FILE), &r.records)?;
        write_json(&dir.join(RUN_FILE), &RunMeta::of(r))?;
        record_file(&mut manifest, out_dir, &format!("runs/{name}/{ITERATIONS_FILE}"))?;
        record_file(&mut manifest, out_dir, &format!("runs/{name}/{RUN_FILE}"))?;
        manifest.runs.push(RunEntry {
            batch_id: r.batch_id,
            seed: r.seed,
            mode: r.mode,
            dir: format!("runs/{name}"),
        });
    }
    export_summary(out_dir, summary, manifest)
}

/// Writes `summary.json` and a manifest covering it plus any files the
/// manifest already lists.
pub fn export_summary(out_dir: &Path, summary: &Summary, mut manifest: Manifest) -> Result<Manifest> {
    create_dir(out_dir)?;
    manifest.config_fingerprint = summary.config_fingerprint.clone();
    write_summary(&out_dir.join(SUMMARY_FILE), summary)?;
    record_file(&mut manifest, out_dir, SUMMARY_FILE)?;
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// Adds externally written files (plot data, for example) to an existing
/// manifest on disk.
pub fn extend_manifest(out_dir: &Path, files: &[PathBuf]) -> Result<Manifest> {
    let path = out_dir.join(MANIFEST_FILE);
    let mut manifest: Manifest = read_json(&path)?;
    for f in files {
        let rel = f
            .strip_prefix(out_dir)
            .unwrap_or(f)
            .to_string_lossy()
            .replace('\\', "/");
        manifest.files.retain(|e| e.path != rel);
        record_file(&mut manifest, out_dir, &rel)?;
    }
    write_json(&path, &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    read_json(&dir.join(MANIFEST_FILE))
}

/// Loads one run directory holding `run.json` and `iterations.csv`.
pub fn load_run(dir: &Path) -> Result<ExperimentResult> {
    let meta: RunMeta = read_json(&dir.join(RUN_FILE))?;
    let records = read_iterations(&dir.join(ITERATIONS_FILE))?;
    if records.len() != meta.iterations {
        return Err(Error::Dataset(format!(
            "{} lists {} iterations, found {}",
            dir.display(),
            meta.iterations,
            records.len()
        )));
    }
    Ok(meta.with_records(records))
}

fn find_run_dirs(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    if dir.join(RUN_FILE).is_file() {
        out.push(dir.to_path_buf());
        return Ok(());
    }
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            find_run_dirs(&path, out)?;
        }
    }
    Ok(())
}

/// Loads every run found below `dir`, ordered by directory path.
pub fn load_runs(dir: &Path) -> Result<Vec<ExperimentResult>> {
    if !dir.is_dir() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let mut dirs = Vec::new();
    find_run_dirs(dir, &mut dirs)?;
    dirs.sort();
    dirs.iter().map(|d| load_run(d)).collect()
}
