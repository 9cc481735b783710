use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::run::ExperimentResult;
use crate::error::{Error, Result};

/// A metric sampled at (possibly sparse) iteration indices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub iters: Vec<usize>,
    pub values: Vec<f64>,
}

impl Curve {
    pub fn len(&self) -> usize {
        self.iters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iters.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCurves {
    pub uncertainty: Curve,
    pub accuracy: Curve,
    pub f1: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub n_runs: usize,
    pub correct_rate: f64,
    pub final_accuracy: f64,
    pub final_f1: f64,
    pub mean_uncertainty: f64,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
    pub curves: ModeCurves,
}

/// Per-mode means keyed by mode name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub config_fingerprint: String,
    pub modes: BTreeMap<String, ModeSummary>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Mean curve over runs, truncated to the shortest run. Iterations where any
/// run lacks a value are skipped.
fn mean_curve<F>(runs: &[&ExperimentResult], value: F) -> Curve
where
    F: Fn(&super::run::IterationRecord) -> Option<f64>,
{
    let len = runs.iter().map(|r| r.records.len()).min().unwrap_or(0);
    let mut curve = Curve::default();
    for i in 0..len {
        let vals: Option<Vec<f64>> = runs.iter().map(|r| value(&r.records[i])).collect();
        if let Some(vals) = vals {
            curve.iters.push(i);
            curve.values.push(mean(vals.into_iter()));
        }
    }
    curve
}

pub fn summarize_mode(runs: &[&ExperimentResult]) -> ModeSummary {
    ModeSummary {
        n_runs: runs.len(),
        correct_rate: mean(runs.iter().map(|r| r.correct_rate)),
        final_accuracy: mean(runs.iter().map(|r| r.final_accuracy)),
        final_f1: mean(runs.iter().map(|r| r.final_f1)),
        mean_uncertainty: mean(runs.iter().map(|r| r.mean_uncertainty)),
        wall_seconds: mean(runs.iter().map(|r| r.wall_seconds)),
        cpu_seconds: mean(runs.iter().map(|r| r.cpu_seconds)),
        curves: ModeCurves {
            uncertainty: mean_curve(runs, |r| Some(r.uncertainty)),
            accuracy: mean_curve(runs, |r| r.accuracy),
            f1: mean_curve(runs, |r| r.f1),
        },
    }
}

/// Averages results per mode across batches and seeds.
pub fn aggregate(results: &[ExperimentResult]) -> Result<Summary> {
    let first = results.first().ok_or(Error::EmptyAggregate)?;
    if results
        .iter()
        .any(|r| r.config_fingerprint != first.config_fingerprint)
    {
        return Err(Error::MixedConfigs);
    }
    let mut by_mode: BTreeMap<String, Vec<&ExperimentResult>> = BTreeMap::new();
    for r in results {
        by_mode.entry(r.mode.name().to_string()).or_default().push(r);
    }
    let modes = by_mode
        .into_iter()
        .map(|(name, runs)| (name, summarize_mode(&runs)))
        .collect();
    Ok(Summary {
        config_fingerprint: first.config_fingerprint.clone(),
        modes,
    })
}
