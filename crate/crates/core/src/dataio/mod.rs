//! Dataset loading, configuration files, results export and plot data.

pub mod config;
pub mod csv;
pub mod export;
pub mod idx;
pub mod plot;

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::seed::proportional;
use crate::learner::Dataset;
use crate::population::{Annotator, BatchConfig};
use crate::rng::{self, Stream};

pub use self::config::{load_config, parse_modes, ConfigFile, ExperimentConfig};
pub use self::csv::load_csv_dataset;
pub use self::export::{
    export_results, export_summary, extend_manifest, load_run, load_runs, read_iterations, read_manifest, read_summary, write_iterations,
    write_summary, DatasetInfo, Manifest, RunMeta,
};
pub use self::idx::load_idx_images;
pub use self::plot::{emit_plot_data, moving_average};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    CsvTabular,
    IdxImages,
}

/// Row subsampling applied after loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subsample {
    pub max_rows: usize,
    #[serde(default = "default_true")]
    pub stratified: bool,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub kind: DatasetKind,
    /// CSV file.
    #[serde(default)]
    pub path: Option<PathBuf>,
    /// IDX image file.
    #[serde(default)]
    pub images: Option<PathBuf>,
    /// IDX label file.
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub label_column: Option<String>,
    #[serde(default)]
    pub categorical_columns: Vec<String>,
    /// Feature columns to keep, in order. All non-label columns when absent.
    #[serde(default)]
    pub feature_columns: Option<Vec<String>>,
    #[serde(default)]
    pub subsample: Option<Subsample>,
}

impl DatasetSpec {
    pub fn csv(path: impl Into<PathBuf>, label_column: impl Into<String>) -> Self {
        DatasetSpec {
            kind: DatasetKind::CsvTabular,
            path: Some(path.into()),
            images: None,
            labels: None,
            label_column: Some(label_column.into()),
            categorical_columns: Vec::new(),
            feature_columns: None,
            subsample: None,
        }
    }

    pub fn idx(images: impl Into<PathBuf>, labels: impl Into<PathBuf>) -> Self {
        DatasetSpec {
            kind: DatasetKind::IdxImages,
            path: None,
            images: Some(images.into()),
            labels: Some(labels.into()),
            label_column: None,
            categorical_columns: Vec::new(),
            feature_columns: None,
            subsample: None,
        }
    }

    pub fn with_subsample(mut self, subsample: Subsample) -> Self {
        self.subsample = Some(subsample);
        self
    }

    /// Resolves relative paths against `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.path, &mut self.images, &mut self.labels].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DatasetKind::CsvTabular => {
                if self.path.is_none() {
                    return Err(Error::Config("csv dataset needs a path".into()));
                }
                if self.label_column.is_none() {
                    return Err(Error::Config("csv dataset needs a label_column".into()));
                }
            }
            DatasetKind::IdxImages => {
                if self.images.is_none() || self.labels.is_none() {
                    return Err(Error::Config("idx dataset needs images and labels paths".into()));
                }
            }
        }
        if let Some(s) = self.subsample {
            if s.max_rows == 0 {
                return Err(Error::Config("subsample max_rows must be at least 1".into()));
            }
        }
        Ok(())
    }
}

/// A loaded dataset and what the loader did to get it.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub data: Dataset,
    /// Rows read from the source, before dropping and subsampling.
    pub source_rows: usize,
    /// Rows dropped for missing values.
    pub dropped_rows: usize,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<LoadedDataset> {
    match spec.kind {
        DatasetKind::CsvTabular => load_csv_dataset(spec),
        DatasetKind::IdxImages => load_idx_images(spec),
    }
}

/// Reads a batch file: a JSON array of annotator records.
pub fn load_batch(path: &Path) -> Result<Vec<Annotator>> {
    require_file(path)?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let batch: Vec<Annotator> =
        serde_json::from_slice(&bytes).map_err(|e| Error::Batch(format!("{}: {e}", path.display())))?;
    if batch.is_empty() {
        return Err(Error::Batch(format!("{} holds no annotators", path.display())));
    }
    for a in &batch {
        a.validate()?;
    }
    Ok(batch)
}

pub fn save_batch(path: &Path, batch: &[Annotator]) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(batch)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads a batch generator configuration.
pub fn load_batch_config(path: &Path) -> Result<BatchConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: BatchConfig = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub(crate) fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingFile(path.to_path_buf()))
    }
}

/// Picks at most `max_rows` rows, keeping source order. A stratified sample
/// allocates rows to classes in proportion to their frequency.
pub fn subsample_rows(data: &Dataset, spec: Subsample) -> Vec<usize> {
    let n = data.n_rows();
    if n <= spec.max_rows {
        return (0..n).collect();
    }
    let mut rng = rng::stream(spec.seed, Stream::Subsample, &[]);
    let mut picked = if spec.stratified {
        let mut by_class = vec![Vec::new(); data.n_classes()];
        for r in 0..n {
            by_class[data.label(r) as usize].push(r);
        }
        let counts: Vec<usize> = by_class.iter().map(Vec::len).collect();
        let take = proportional(spec.max_rows, &counts);
        let mut picked = Vec::with_capacity(spec.max_rows);
        for (mut rows, k) in by_class.into_iter().zip(take) {
            rows.shuffle(&mut rng);
            picked.extend_from_slice(&rows[..k]);
        }
        picked
    } else {
        rand::seq::index::sample(&mut rng, n, spec.max_rows).into_vec()
    };
    picked.sort_unstable();
    picked
}

pub(crate) fn apply_subsample(data: Dataset, spec: Option<Subsample>) -> Result<Dataset> {
    match spec {
        Some(s) if data.n_rows() > s.max_rows => data.select_rows(&subsample_rows(&data, s)),
        _ => Ok(data),
    }
}
