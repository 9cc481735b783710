//! Ground-truth annotator behaviour: mood over the day, fatigue from work
//! done, the resulting accuracy, and the labels an annotator actually gives.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{Annotator, Chronotype};

pub const MIN_MOOD: u8 = 1;
pub const MAX_MOOD: u8 = 10;
pub const PERIODS_PER_DAY: u32 = 3;

/// Offsets that shape one chronotype's day relative to its first-period mood.
///
/// Period 2 mood is `m1 + second_offset + second_jitter * j2` and period 3 is
/// `m1 + third_offset + third_jitter * j3`, with `j2, j3` independent draws
/// from {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoodShape {
    pub second_offset: i8,
    pub second_jitter: i8,
    pub third_offset: i8,
    pub third_jitter: i8,
}

impl MoodShape {
    const fn new(a2: i8, s2: i8, a3: i8, s3: i8) -> Self {
        MoodShape {
            second_offset: a2,
            second_jitter: s2,
            third_offset: a3,
            third_jitter: s3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoodShapes {
    pub lion: MoodShape,
    pub dolphin: MoodShape,
    pub bear: MoodShape,
    pub wolf: MoodShape,
}

impl Default for MoodShapes {
    fn default() -> Self {
        MoodShapes {
            // (m1, m1+j, m1-1-j)
            lion: MoodShape::new(0, 1, -1, -1),
            // (m1, m1+j, m1+1+j)
            dolphin: MoodShape::new(0, 1, 1, 1),
            // (m1, m1+1+j, m1+1)
            bear: MoodShape::new(1, 1, 1, 0),
            // (m1, m1+1, m1+1+j)
            wolf: MoodShape::new(1, 0, 1, 1),
        }
    }
}

impl MoodShapes {
    pub fn get(&self, chronotype: Chronotype) -> MoodShape {
        match chronotype {
            Chronotype::Lion => self.lion,
            Chronotype::Dolphin => self.dolphin,
            Chronotype::Bear => self.bear,
            Chronotype::Wolf => self.wolf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    /// Relative accuracy change per mood unit away from the annotator's average.
    pub mood_unit_effect: f64,
    /// Accuracy deducted per fatigue level.
    pub fatigue_penalty: f64,
    pub fatigue_start: u32,
    pub fatigue_step: u32,
    pub period_length: u32,
    pub periods_per_day: u32,
    pub mood_shapes: MoodShapes,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            mood_unit_effect: 0.06,
            fatigue_penalty: 0.02,
            fatigue_start: 50,
            fatigue_step: 20,
            period_length: 204,
            periods_per_day: PERIODS_PER_DAY,
            mood_shapes: MoodShapes::default(),
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.mood_unit_effect > 0.0 && self.mood_unit_effect.is_finite()) {
            return err("mood_unit_effect must be positive");
        }
        if !(self.fatigue_penalty > 0.0 && self.fatigue_penalty <= 1.0) {
            return err("fatigue_penalty must be in (0, 1]");
        }
        if self.fatigue_start == 0 || self.fatigue_step == 0 {
            return err("fatigue_start and fatigue_step must be at least 1");
        }
        if self.period_length == 0 {
            return err("period_length must be at least 1");
        }
        if self.periods_per_day != PERIODS_PER_DAY {
            return err("periods_per_day must be 3 (mood trajectories cover three periods)");
        }
        Ok(())
    }

    pub fn day_length(&self) -> u32 {
        self.period_length * self.periods_per_day
    }
}

/// Fatigue level after `n` annotations in the current fatigue window.
pub fn fatigue_level(n: u32, params: &SimParams) -> u32 {
    if n < params.fatigue_start {
        0
    } else {
        1 + (n - params.fatigue_start) / params.fatigue_step
    }
}

/// One ledger row as it appears in exported results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub annotator_id: u32,
    pub day: u32,
    pub period: u32,
    pub count: u32,
}

/// Annotation counts per (annotator, day, period).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<LedgerEntry>", into = "Vec<LedgerEntry>")]
pub struct FatigueLedger {
    counts: BTreeMap<(u32, u32, u32), u32>,
}

impl FatigueLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, annotator: u32, day: u32, period: u32) {
        *self.counts.entry((annotator, day, period)).or_insert(0) += 1;
    }

    pub fn count(&self, annotator: u32, day: u32, period: u32) -> u32 {
        self.counts.get(&(annotator, day, period)).copied().unwrap_or(0)
    }

    /// Annotations in the current period plus the previous period of the
    /// same day.
    pub fn window_count(&self, annotator: u32, day: u32, period: u32) -> u32 {
        let current = self.count(annotator, day, period);
        if period == 0 {
            current
        } else {
            current + self.count(annotator, day, period - 1)
        }
    }

    pub fn annotator_total(&self, annotator: u32) -> u32 {
        self.counts
            .iter()
            .filter(|((a, _, _), _)| *a == annotator)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().map(|&c| u64::from(c)).sum()
    }

    /// Rows in (annotator, day, period) order.
    pub fn entries(&self) -> Vec<LedgerEntry> {
        self.counts
            .iter()
            .map(|(&(annotator_id, day, period), &count)| LedgerEntry {
                annotator_id,
                day,
                period,
                count,
            })
            .collect()
    }
}

impl From<Vec<LedgerEntry>> for FatigueLedger {
    fn from(entries: Vec<LedgerEntry>) -> Self {
        let mut ledger = FatigueLedger::new();
        for e in entries {
            *ledger.counts.entry((e.annotator_id, e.day, e.period)).or_insert(0) += e.count;
        }
        ledger
    }
}

impl From<FatigueLedger> for Vec<LedgerEntry> {
    fn from(ledger: FatigueLedger) -> Self {
        ledger.entries()
    }
}

/// Moods for the three periods of one day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoodDay(pub [u8; 3]);

impl MoodDay {
    pub fn period(&self, period: u32) -> u8 {
        self.0[period as usize]
    }
}

fn clamp_mood(m: i32) -> u8 {
    m.clamp(i32::from(MIN_MOOD), i32::from(MAX_MOOD)) as u8
}

/// Upper bound of the first-period mood draw.
pub fn first_period_ceiling(annotator: &Annotator) -> u8 {
    match annotator.chronotype {
        Chronotype::Lion => (annotator.avg_mood + 1).min(MAX_MOOD),
        _ => annotator.avg_mood,
    }
}

/// Builds a day from its first-period mood and the two jitter draws.
pub fn mood_day_from_draws(shape: MoodShape, first: u8, j2: bool, j3: bool) -> MoodDay {
    let m1 = i32::from(first);
    let m2 = m1 + i32::from(shape.second_offset) + i32::from(shape.second_jitter) * i32::from(j2);
    let m3 = m1 + i32::from(shape.third_offset) + i32::from(shape.third_jitter) * i32::from(j3);
    MoodDay([clamp_mood(m1), clamp_mood(m2), clamp_mood(m3)])
}

pub fn mood_trajectory<R: Rng + ?Sized>(annotator: &Annotator, shapes: &MoodShapes, rng: &mut R) -> MoodDay {
    let first = rng.random_range(MIN_MOOD..=first_period_ceiling(annotator));
    let j2 = rng.random_bool(0.5);
    let j3 = rng.random_bool(0.5);
    mood_day_from_draws(shapes.get(annotator.chronotype), first, j2, j3)
}

/// Accuracy after the mood adjustment (relative) and fatigue deduction
/// (absolute), clamped to [0, 1].
pub fn effective_accuracy(base: f64, mood: u8, avg_mood: u8, fatigue_lvl: u32, params: &SimParams) -> f64 {
    let delta = f64::from(mood) - f64::from(avg_mood);
    let acc = base * (1.0 + params.mood_unit_effect * delta);
    let acc = acc - params.fatigue_penalty * f64::from(fatigue_lvl);
    acc.clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelOutcome {
    pub given: u32,
    pub correct: bool,
}

/// Resolves a labeling attempt from two uniform draws in [0, 1): the first
/// decides correctness against `accuracy`, the second picks among the wrong
/// labels.
pub fn label_from_draws(accuracy: f64, true_label: u32, n_labels: usize, u_correct: f64, u_wrong: f64) -> Result<LabelOutcome> {
    if n_labels < 2 {
        return Err(Error::Dataset("label set needs at least two labels".into()));
    }
    if u_correct < accuracy {
        return Ok(LabelOutcome {
            given: true_label,
            correct: true,
        });
    }
    let others = n_labels - 1;
    let k = ((u_wrong * others as f64) as usize).min(others - 1);
    let given = if k >= true_label as usize { k + 1 } else { k } as u32;
    Ok(LabelOutcome {
        given,
        correct: false,
    })
}

pub fn simulate_label<R: Rng + ?Sized>(
    annotator: &Annotator,
    true_label: u32,
    mood: u8,
    fatigue_lvl: u32,
    params: &SimParams,
    rng: &mut R,
) -> Result<LabelOutcome> {
    let base = *annotator
        .base_label_accuracy
        .get(true_label as usize)
        .ok_or_else(|| Error::Dataset(format!("label {true_label} outside annotator's label set")))?;
    let p = effective_accuracy(base, mood, annotator.avg_mood, fatigue_lvl, params);
    let u_correct = rng.random::<f64>();
    let u_wrong = rng.random::<f64>();
    label_from_draws(p, true_label, annotator.n_labels(), u_correct, u_wrong)
}

/// One labeled instance, keyed by its true label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub label: u32,
    pub correct: bool,
}

/// Folds one day's observations into the annotator's history. Ground-truth
/// accuracies are left alone.
pub fn update_history(annotator: &mut Annotator, day: &[Observation]) {
    for obs in day {
        let h = &mut annotator.history[obs.label as usize];
        h.total += 1;
        h.correct += u32::from(obs.correct);
    }
}
