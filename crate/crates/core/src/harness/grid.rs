use rayon::prelude::*;

use super::run::{run_experiment, ExperimentResult, RunSettings};
use crate::error::Result;
use crate::learner::Dataset;
use crate::population::Annotator;
use crate::selector::TestMode;

/// A batch with the id its results are reported under.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedBatch {
    pub batch_id: u32,
    pub annotators: Vec<Annotator>,
}

/// Runs every (batch, seed, mode) combination. Runs execute in parallel;
/// results come back ordered by batch, then seed, then mode.
pub fn run_grid(
    settings: &RunSettings,
    data: &Dataset,
    batches: &[NamedBatch],
    modes: &[TestMode],
    seeds: &[u64],
) -> Result<Vec<ExperimentResult>> {
    settings.validate()?;
    let jobs: Vec<(&NamedBatch, u64, TestMode)> = batches
        .iter()
        .flat_map(|b| seeds.iter().flat_map(move |&s| modes.iter().map(move |&m| (b, s, m))))
        .collect();
    jobs.par_iter()
        .map(|(b, seed, mode)| run_experiment(settings, data, &b.annotators, b.batch_id, *mode, *seed))
        .collect()
}
