//! Experiment orchestration: seed set, the labeling loop, the simulated
//! clock, and aggregation across runs.

pub mod aggregate;
pub mod clock;
pub mod grid;
pub mod run;
pub mod seed;

pub use aggregate::{aggregate, Curve, ModeCurves, ModeSummary, Summary};
pub use clock::{advance_clock, ClockEvents, SimClock};
pub use grid::{run_grid, NamedBatch};
pub use run::{
    prepare_batch, run_experiment, EvalSplit, ExperimentResult, IterationRecord, RunSettings, StopReason,
    ThresholdSource,
};
pub use seed::{build_seed_set, stratified_split, SeedSetPolicy};
