use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{DatasetKind, DatasetSpec, Subsample};
use crate::behavior::{MoodShapes, SimParams};
use crate::error::{Error, Result};
use crate::harness::{EvalSplit, RunSettings, SeedSetPolicy, ThresholdSource};
use crate::learner::{ForestParams, MaxFeatures};
use crate::selector::TestMode;

/// The on-disk experiment configuration: one flat JSON object. Every key is
/// optional except the dataset location and `batch_files`; unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub dataset_kind: DatasetKind,
    pub dataset_path: Option<PathBuf>,
    pub idx_images: Option<PathBuf>,
    pub idx_labels: Option<PathBuf>,
    pub label_column: Option<String>,
    pub categorical_columns: Vec<String>,
    pub feature_columns: Option<Vec<String>>,
    pub subsample_max_rows: Option<usize>,
    pub subsample_stratified: bool,
    pub subsample_seed: u64,

    pub batch_files: Vec<PathBuf>,
    pub modes: Vec<TestMode>,
    pub rng_seed: u64,
    pub replications: usize,
    pub max_annotations: usize,
    pub stop_accuracy: f64,
    pub eval_every: usize,
    pub seed_min_size: usize,
    pub seed_per_class: usize,
    pub threshold_source: ThresholdSource,
    /// Evaluate on a held-out stratified fraction instead of every row.
    pub holdout_fraction: Option<f64>,

    pub mood_unit_effect: f64,
    pub fatigue_penalty: f64,
    pub fatigue_start: u32,
    pub fatigue_step: u32,
    pub period_length: u32,
    pub periods_per_day: u32,
    pub mood_shapes: MoodShapes,

    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub max_bins: usize,
    pub min_samples_split: usize,

    pub smoothing_window: usize,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let run = RunSettings::default();
        let sim = run.sim;
        let forest = run.forest;
        ConfigFile {
            dataset_kind: DatasetKind::CsvTabular,
            dataset_path: None,
            idx_images: None,
            idx_labels: None,
            label_column: None,
            categorical_columns: Vec::new(),
            feature_columns: None,
            subsample_max_rows: None,
            subsample_stratified: true,
            subsample_seed: 0,
            batch_files: Vec::new(),
            modes: TestMode::ALL.to_vec(),
            rng_seed: 0,
            replications: 1,
            max_annotations: run.max_annotations,
            stop_accuracy: run.stop_accuracy,
            eval_every: run.eval_every,
            seed_min_size: run.seed_set.min_size,
            seed_per_class: run.seed_set.per_class,
            threshold_source: run.threshold_source,
            holdout_fraction: None,
            mood_unit_effect: sim.mood_unit_effect,
            fatigue_penalty: sim.fatigue_penalty,
            fatigue_start: sim.fatigue_start,
            fatigue_step: sim.fatigue_step,
            period_length: sim.period_length,
            periods_per_day: sim.periods_per_day,
            mood_shapes: sim.mood_shapes,
            n_trees: forest.n_trees,
            max_depth: forest.max_depth,
            max_features: forest.max_features,
            bootstrap: forest.bootstrap,
            max_bins: forest.max_bins,
            min_samples_split: forest.min_samples_split,
            smoothing_window: 25,
        }
    }
}

/// A validated configuration, split into the pieces the library consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetSpec,
    pub batch_files: Vec<PathBuf>,
    pub modes: Vec<TestMode>,
    /// One run per seed for each batch and mode.
    pub seeds: Vec<u64>,
    pub settings: RunSettings,
    pub smoothing_window: usize,
    /// SHA-256 of the normalized configuration document.
    pub config_hash: String,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn dataset_spec(&self) -> DatasetSpec {
        DatasetSpec {
            kind: self.dataset_kind,
            path: self.dataset_path.clone(),
            images: self.idx_images.clone(),
            labels: self.idx_labels.clone(),
            label_column: self.label_column.clone(),
            categorical_columns: self.categorical_columns.clone(),
            feature_columns: self.feature_columns.clone(),
            subsample: self.subsample_max_rows.map(|max_rows| Subsample {
                max_rows,
                stratified: self.subsample_stratified,
                seed: self.subsample_seed,
            }),
        }
    }

    pub fn run_settings(&self) -> RunSettings {
        RunSettings {
            sim: SimParams {
                mood_unit_effect: self.mood_unit_effect,
                fatigue_penalty: self.fatigue_penalty,
                fatigue_start: self.fatigue_start,
                fatigue_step: self.fatigue_step,
                period_length: self.period_length,
                periods_per_day: self.periods_per_day,
                mood_shapes: self.mood_shapes,
            },
            forest: ForestParams {
                n_trees: self.n_trees,
                max_depth: self.max_depth,
                max_features: self.max_features,
                bootstrap: self.bootstrap,
                max_bins: self.max_bins,
                min_samples_split: self.min_samples_split,
            },
            max_annotations: self.max_annotations,
            stop_accuracy: self.stop_accuracy,
            eval_every: self.eval_every,
            seed_set: SeedSetPolicy {
                min_size: self.seed_min_size,
                per_class: self.seed_per_class,
            },
            threshold_source: self.threshold_source,
            eval_split: match self.holdout_fraction {
                Some(fraction) => EvalSplit::Holdout { fraction },
                None => EvalSplit::Full,
            },
        }
    }

    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    /// Validates and splits the document. Relative paths resolve against
    /// `base`.
    pub fn into_experiment(self, base: &Path) -> Result<ExperimentConfig> {
        if self.batch_files.is_empty() {
            return Err(Error::Config("batch_files must list at least one batch".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::Config("modes must not be empty".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.smoothing_window == 0 {
            return Err(Error::Config("smoothing_window must be at least 1".into()));
        }
        let mut dataset = self.dataset_spec();
        dataset.validate()?;
        dataset.resolve_paths(base);
        let settings = self.run_settings();
        settings.validate()?;
        let mut modes = self.modes.clone();
        modes.sort();
        modes.dedup();
        let batch_files = self
            .batch_files
            .iter()
            .map(|p| if p.is_relative() { base.join(p) } else { p.clone() })
            .collect();
        Ok(ExperimentConfig {
            dataset,
            batch_files,
            modes,
            seeds: (0..self.replications as u64).map(|r| self.rng_seed + r).collect(),
            settings,
            smoothing_window: self.smoothing_window,
            config_hash: self.hash(),
        })
    }
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    ConfigFile::parse(&text)?.into_experiment(base)
}

/// Parses a comma-separated mode list such as `test1,test3`.
pub fn parse_modes(list: &str) -> Result<Vec<TestMode>> {
    let mut modes = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect::<Result<Vec<TestMode>>>()?;
    if modes.is_empty() {
        return Err(Error::Config("empty mode list".into()));
    }
    modes.sort();
    modes.dedup();
    Ok(modes)
}
