use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::clock::{advance_clock, SimClock};
use super::seed::{build_seed_set, stratified_split, SeedSetPolicy};
use crate::behavior::{fatigue_level, mood_trajectory, simulate_label, update_history, FatigueLedger, MoodDay, Observation, SimParams};
use crate::error::{Error, Result};
use crate::learner::{self, Classifier, Dataset, Evaluation, ForestParams, ProbVector, RandomForest, TrainingSet};
use crate::population::Annotator;
use crate::rng::{self, Stream};
use crate::selector::{self, AnnotatorView, TestMode, UncertaintyStats, THRESHOLD_WARMUP};

/// Where the recommender's high-uncertainty threshold comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdSource {
    /// Running statistics over previously queried instances.
    #[default]
    Queried,
    /// Statistics over the current pool's entropies.
    Pool,
}

/// Rows the model is scored on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum EvalSplit {
    /// Every row of the dataset, ground-truth labels.
    #[default]
    Full,
    /// A stratified held-out fraction that never enters the seed set or pool.
    Holdout { fraction: f64 },
}

/// Everything that shapes a single run besides the data, batch, mode and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSettings {
    pub sim: SimParams,
    pub forest: ForestParams,
    pub max_annotations: usize,
    pub stop_accuracy: f64,
    pub eval_every: usize,
    pub seed_set: SeedSetPolicy,
    pub threshold_source: ThresholdSource,
    pub eval_split: EvalSplit,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            sim: SimParams::default(),
            forest: ForestParams::default(),
            max_annotations: 1224,
            stop_accuracy: 0.99,
            eval_every: 10,
            seed_set: SeedSetPolicy::default(),
            threshold_source: ThresholdSource::Queried,
            eval_split: EvalSplit::Full,
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        self.forest.validate()?;
        if self.max_annotations == 0 {
            return Err(Error::Config("max_annotations must be at least 1".into()));
        }
        if !(self.stop_accuracy >= 0.0 && self.stop_accuracy <= 1.0) {
            return Err(Error::Config("stop_accuracy must be in [0, 1]".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Config("eval_every must be at least 1".into()));
        }
        if let EvalSplit::Holdout { fraction } = self.eval_split {
            if !(fraction > 0.0 && fraction < 1.0) {
                return Err(Error::Config("holdout fraction must be in (0, 1)".into()));
            }
        }
        Ok(())
    }

    /// Hash of these settings together with the dataset contents; runs with
    /// different fingerprints are not comparable.
    pub fn fingerprint(&self, data: &Dataset) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("settings serialize"));
        h.update((data.n_rows() as u64).to_le_bytes());
        h.update((data.n_features() as u64).to_le_bytes());
        for r in 0..data.n_rows() {
            for v in data.row(r) {
                h.update(v.to_le_bytes());
            }
            h.update(data.label(r).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub instance: usize,
    pub uncertainty: f64,
    pub annotator_id: u32,
    pub given_label: u32,
    pub true_label: u32,
    pub correct: bool,
    pub accuracy: Option<f64>,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxAnnotations,
    TargetAccuracy,
    PoolExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub batch_id: u32,
    pub seed: u64,
    pub mode: TestMode,
    pub config_fingerprint: String,
    pub seed_size: usize,
    pub stop_reason: StopReason,
    pub records: Vec<IterationRecord>,
    pub correct_rate: f64,
    pub final_accuracy: f64,
    pub final_f1: f64,
    pub mean_uncertainty: f64,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
    pub ledger: FatigueLedger,
}

impl ExperimentResult {
    /// Recomputes the derived metrics from `records`.
    pub fn refresh_metrics(&mut self) {
        let n = self.records.len().max(1) as f64;
        self.correct_rate = self.records.iter().filter(|r| r.correct).count() as f64 / n;
        self.mean_uncertainty = self.records.iter().map(|r| r.uncertainty).sum::<f64>() / n;
    }
}

fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: ts is a valid, writable timespec for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

fn day_moods(annotators: &[Annotator], sim: &SimParams, seed: u64, day: u32) -> Vec<MoodDay> {
    annotators
        .iter()
        .map(|a| {
            let mut r = rng::stream(seed, Stream::Mood, &[u64::from(a.id), u64::from(day)]);
            mood_trajectory(a, &sim.mood_shapes, &mut r)
        })
        .collect()
}

fn views_for(
    mode: TestMode,
    annotators: &[Annotator],
    moods: &[MoodDay],
    ledger: &FatigueLedger,
    clock: &SimClock,
) -> Vec<AnnotatorView> {
    annotators
        .iter()
        .zip(moods)
        .map(|(a, mood)| {
            // the baseline scores from the same accuracies the simulation labels with
            let (label_accuracy, overall_accuracy) = if mode == TestMode::Oracle {
                (a.base_label_accuracy.clone(), a.base_overall_accuracy)
            } else {
                (
                    (0..a.n_labels()).map(|l| a.label_estimate(l)).collect(),
                    a.overall_estimate(),
                )
            };
            AnnotatorView {
                annotator_id: a.id,
                label_accuracy,
                overall_accuracy,
                current_mood: mood.period(clock.period),
                avg_mood: a.avg_mood,
                fatigue_count: ledger.window_count(a.id, clock.day, clock.period),
            }
        })
        .collect()
}

fn evaluate_probs(data: &Dataset, rows: &[usize], probs: &[Option<ProbVector>]) -> Evaluation {
    let predicted: Vec<u32> = rows
        .iter()
        .map(|&r| learner::most_likely(probs[r].as_ref().expect("evaluated before pool extraction")))
        .collect();
    let truth: Vec<u32> = rows.iter().map(|&r| data.label(r)).collect();
    learner::metrics::evaluation(&truth, &predicted, data.n_classes())
}

/// Prepares a batch for a dataset: keeps the dataset's labels and checks ids.
pub fn prepare_batch(batch: &[Annotator], n_classes: usize) -> Result<Vec<Annotator>> {
    if batch.is_empty() {
        return Err(Error::NoAnnotators("an experiment"));
    }
    let mut out = batch.to_vec();
    for a in out.iter_mut() {
        a.restrict_labels(n_classes)?;
        a.validate()?;
    }
    let mut ids: Vec<u32> = out.iter().map(|a| a.id).collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() != out.len() {
        return Err(Error::Batch("duplicate annotator ids".into()));
    }
    Ok(out)
}

/// Runs one active-learning experiment for one selection mode.
pub fn run_experiment(
    settings: &RunSettings,
    data: &Dataset,
    batch: &[Annotator],
    batch_id: u32,
    mode: TestMode,
    seed: u64,
) -> Result<ExperimentResult> {
    settings.validate()?;
    let wall_start = Instant::now();
    let cpu_start = thread_cpu_seconds();
    let sim = &settings.sim;

    let mut annotators = prepare_batch(batch, data.n_classes())?;
    let all_rows: Vec<usize> = (0..data.n_rows()).collect();
    let (eval_rows, candidates) = match settings.eval_split {
        EvalSplit::Full => (all_rows.clone(), all_rows.clone()),
        EvalSplit::Holdout { fraction } => {
            stratified_split(data, &all_rows, fraction, &mut rng::stream(seed, Stream::Holdout, &[]))
        }
    };
    let (seed_rows, mut pool) = build_seed_set(
        data,
        &candidates,
        settings.seed_set,
        &mut rng::stream(seed, Stream::SeedSet, &[]),
    )?;
    let seed_size = seed_rows.len();
    let mut training = TrainingSet::ground_truth(data, &seed_rows);

    let mut clock = SimClock::default();
    let mut ledger = FatigueLedger::new();
    let mut stats = UncertaintyStats::new();
    let mut moods = day_moods(&annotators, sim, seed, 0);
    let mut day_obs: Vec<Vec<Observation>> = vec![Vec::new(); annotators.len()];
    let mut model = RandomForest::new(settings.forest.clone());
    let mut records = Vec::with_capacity(settings.max_annotations);
    let mut stop_reason = StopReason::MaxAnnotations;

    for iter in 0..settings.max_annotations {
        if pool.is_empty() {
            stop_reason = StopReason::PoolExhausted;
            break;
        }
        model.fit(data, &training, rng::derive_seed(seed, Stream::Forest, &[iter as u64]))?;
        // evaluation scores the model that picked this query, before its label is added
        let (scores, eval) = if iter % settings.eval_every == 0 {
            let mut probs: Vec<Option<ProbVector>> = model.predict_rows(data, &all_rows)?.into_iter().map(Some).collect();
            let eval = evaluate_probs(data, &eval_rows, &probs);
            let pool_probs = pool.iter().map(|&r| probs[r].take().expect("pool rows are distinct")).collect();
            (learner::with_entropy(pool_probs), Some(eval))
        } else {
            (learner::score_pool(&model, data, &pool)?, None)
        };
        let (count, threshold) = match settings.threshold_source {
            ThresholdSource::Queried => (stats.count, stats.threshold()),
            ThresholdSource::Pool => {
                let s = UncertaintyStats::from_values(&scores.iter().map(|(_, h)| *h).collect::<Vec<_>>());
                (s.count.max(THRESHOLD_WARMUP), s.threshold())
            }
        };
        let pool_pos = learner::argmax_entropy(&scores).expect("pool is non-empty");
        let ctx = learner::query_from_scores(&pool, scores)?;

        let views = views_for(mode, &annotators, &moods, &ledger, &clock);
        let ranking = match mode {
            TestMode::Oracle => selector::recommend_optimal(&ctx, &views, sim)?,
            _ => selector::recommend_rs_with_threshold(&ctx, &views, mode, sim, count, threshold)?,
        };
        let chosen_id = ranking[0].annotator_id;
        let idx = annotators
            .iter()
            .position(|a| a.id == chosen_id)
            .expect("ranked id comes from the batch");

        let row = ctx.instance_index;
        let true_label = data.label(row);
        let window = ledger.window_count(chosen_id, clock.day, clock.period);
        let outcome = simulate_label(
            &annotators[idx],
            true_label,
            moods[idx].period(clock.period),
            fatigue_level(window, sim),
            sim,
            &mut rng::stream(seed, Stream::Label, &[iter as u64]),
        )?;

        training.push(row, outcome.given);
        pool.remove(pool_pos);
        ledger.record(chosen_id, clock.day, clock.period);
        stats.push(ctx.uncertainty);
        day_obs[idx].push(Observation {
            label: true_label,
            correct: outcome.correct,
        });

        records.push(IterationRecord {
            iter,
            instance: row,
            uncertainty: ctx.uncertainty,
            annotator_id: chosen_id,
            given_label: outcome.given,
            true_label,
            correct: outcome.correct,
            accuracy: eval.map(|e| e.accuracy),
            f1: eval.map(|e| e.macro_f1),
        });

        let (next, events) = advance_clock(clock, sim);
        clock = next;
        if events.day_end {
            for (a, obs) in annotators.iter_mut().zip(day_obs.iter_mut()) {
                update_history(a, obs);
                obs.clear();
            }
            moods = day_moods(&annotators, sim, seed, clock.day);
        }

        if eval.is_some_and(|e| e.accuracy >= settings.stop_accuracy) {
            stop_reason = StopReason::TargetAccuracy;
            break;
        }
    }

    model.fit(data, &training, rng::derive_seed(seed, Stream::Forest, &[records.len() as u64]))?;
    let final_eval = learner::evaluate(&model, data, &eval_rows)?;

    let mut result = ExperimentResult {
        batch_id,
        seed,
        mode,
        config_fingerprint: settings.fingerprint(data),
        seed_size,
        stop_reason,
        records,
        correct_rate: 0.0,
        final_accuracy: final_eval.accuracy,
        final_f1: final_eval.macro_f1,
        mean_uncertainty: 0.0,
        wall_seconds: wall_start.elapsed().as_secs_f64(),
        cpu_seconds: thread_cpu_seconds() - cpu_start,
        ledger,
    };
    result.refresh_metrics();
    Ok(result)
}
