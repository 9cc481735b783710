//! Synthetic annotator populations.
//!
//! A batch is generated from a [`BatchConfig`] alone: age group and sex come
//! from the batch's own probabilities, chronotype from a per-age-group table,
//! and accuracies from normal draws clamped to the unit interval. Each
//! annotator starts with a pseudo-history of [`PSEUDO_HISTORY`] annotations
//! per label.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Stream};

/// Number of past annotations per label an annotator is assumed to have.
pub const PSEUDO_HISTORY: u32 = 100;

pub const MEAN_OVERALL_ACCURACY: f64 = 0.75;
pub const SD_OVERALL_ACCURACY: f64 = 0.07;
pub const SD_LABEL_ACCURACY: f64 = 0.06;

pub const MIN_AVG_MOOD: u8 = 3;
pub const MAX_AVG_MOOD: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Chronotype {
    Bear,
    Dolphin,
    Wolf,
    Lion,
}

impl Chronotype {
    /// Category order used when sampling; Bear is the first category.
    pub const ALL: [Chronotype; 4] = [
        Chronotype::Bear,
        Chronotype::Dolphin,
        Chronotype::Wolf,
        Chronotype::Lion,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgeGroup {
    #[serde(rename = "25-37")]
    Age25To37,
    #[serde(rename = "38-45")]
    Age38To45,
    #[serde(rename = "46-55")]
    Age46To55,
    #[serde(rename = "56-65")]
    Age56To65,
}

impl AgeGroup {
    pub const ALL: [AgeGroup; 4] = [
        AgeGroup::Age25To37,
        AgeGroup::Age38To45,
        AgeGroup::Age46To55,
        AgeGroup::Age56To65,
    ];

    /// Inclusive age bounds.
    pub fn bounds(self) -> (u8, u8) {
        match self {
            AgeGroup::Age25To37 => (25, 37),
            AgeGroup::Age38To45 => (38, 45),
            AgeGroup::Age46To55 => (46, 55),
            AgeGroup::Age56To65 => (56, 65),
        }
    }

    /// Chronotype probabilities in [`Chronotype::ALL`] order.
    pub fn chronotype_probs(self) -> [f64; 4] {
        match self {
            AgeGroup::Age25To37 => [0.50, 0.20, 0.25, 0.05],
            AgeGroup::Age38To45 => [0.50, 0.10, 0.25, 0.15],
            AgeGroup::Age46To55 | AgeGroup::Age56To65 => [0.50, 0.00, 0.15, 0.35],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelHistory {
    pub correct: u32,
    pub total: u32,
}

impl LabelHistory {
    pub fn estimate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            f64::from(self.correct) / f64::from(self.total)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotator {
    pub id: u32,
    pub age_group: AgeGroup,
    pub sex: Sex,
    pub chronotype: Chronotype,
    pub avg_mood: u8,
    pub base_overall_accuracy: f64,
    /// Ground-truth accuracy per label, indexed by label.
    pub base_label_accuracy: Vec<f64>,
    /// Observed (correct, total) counts per label, indexed by label.
    pub history: Vec<LabelHistory>,
}

impl Annotator {
    pub fn n_labels(&self) -> usize {
        self.base_label_accuracy.len()
    }

    pub fn label_estimate(&self, label: usize) -> f64 {
        self.history[label].estimate()
    }

    /// Count-weighted mean of the per-label estimates.
    pub fn overall_estimate(&self) -> f64 {
        let (c, t) = self.history.iter().fold((0u64, 0u64), |(c, t), h| {
            (c + u64::from(h.correct), t + u64::from(h.total))
        });
        if t == 0 {
            0.0
        } else {
            c as f64 / t as f64
        }
    }

    /// Keeps only the first `n_labels` labels, for datasets with fewer
    /// classes than the batch was generated for.
    pub fn restrict_labels(&mut self, n_labels: usize) -> Result<()> {
        if n_labels > self.n_labels() {
            return Err(Error::Batch(format!(
                "annotator {} covers {} labels, dataset needs {}",
                self.id,
                self.n_labels(),
                n_labels
            )));
        }
        self.base_label_accuracy.truncate(n_labels);
        self.history.truncate(n_labels);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Batch(format!("annotator {}: {msg}", self.id)));
        if !(MIN_AVG_MOOD..=MAX_AVG_MOOD).contains(&self.avg_mood) {
            return bad("avg_mood outside 3..=7");
        }
        if !(0.0..=1.0).contains(&self.base_overall_accuracy) {
            return bad("base_overall_accuracy outside [0,1]");
        }
        if self.base_label_accuracy.len() != self.history.len() {
            return bad("label accuracy and history lengths differ");
        }
        if self.base_label_accuracy.len() < 2 {
            return bad("fewer than two labels");
        }
        if self.base_label_accuracy.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return bad("label accuracy outside [0,1]");
        }
        if self
            .history
            .iter()
            .any(|h| h.correct > h.total || h.total < PSEUDO_HISTORY)
        {
            return bad("history counts inconsistent");
        }
        Ok(())
    }
}

fn default_age_probs() -> [f64; 4] {
    [0.25; 4]
}

fn default_sex_probs() -> [f64; 2] {
    [0.5, 0.5]
}

fn default_n_annotators() -> usize {
    30
}

fn default_n_labels() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchConfig {
    pub batch_id: u32,
    #[serde(default = "default_age_probs")]
    pub age_group_probs: [f64; 4],
    /// Probabilities for F then M.
    #[serde(default = "default_sex_probs")]
    pub sex_probs: [f64; 2],
    #[serde(default = "default_n_annotators")]
    pub n_annotators: usize,
    /// Labels per annotator; must cover the largest dataset the batch is
    /// used with.
    #[serde(default = "default_n_labels")]
    pub n_labels: usize,
    pub rng_seed: u64,
}

impl BatchConfig {
    pub fn new(batch_id: u32, rng_seed: u64) -> Self {
        BatchConfig {
            batch_id,
            age_group_probs: default_age_probs(),
            sex_probs: default_sex_probs(),
            n_annotators: default_n_annotators(),
            n_labels: default_n_labels(),
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probs("age_group_probs", &self.age_group_probs)?;
        check_probs("sex_probs", &self.sex_probs)?;
        if self.n_annotators == 0 {
            return Err(Error::Config("n_annotators must be at least 1".into()));
        }
        if self.n_labels < 2 {
            return Err(Error::Config("n_labels must be at least 2".into()));
        }
        Ok(())
    }
}

fn check_probs(name: &str, probs: &[f64]) -> Result<()> {
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::Config(format!("{name} has a negative or non-finite entry")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!("{name} sums to {sum}, expected 1")));
    }
    Ok(())
}

/// Index of the category that quantile `q` in [0,1) falls into.
pub(crate) fn categorical_index(probs: &[f64], q: f64) -> usize {
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if q < acc && *p > 0.0 {
            return i;
        }
    }
    // q landed in the rounding gap above the cumulative sum
    probs.iter().rposition(|p| *p > 0.0).unwrap_or(0)
}

pub fn chronotype_at_quantile(age_group: AgeGroup, q: f64) -> Chronotype {
    Chronotype::ALL[categorical_index(&age_group.chronotype_probs(), q)]
}

pub fn sample_chronotype<R: Rng + ?Sized>(age_group: AgeGroup, rng: &mut R) -> Chronotype {
    chronotype_at_quantile(age_group, rng.random::<f64>())
}

pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Pseudo-history for a label with the given base accuracy.
pub fn initial_history(base: f64) -> LabelHistory {
    LabelHistory {
        correct: (f64::from(PSEUDO_HISTORY) * base).round() as u32,
        total: PSEUDO_HISTORY,
    }
}

pub fn generate_annotator<R: Rng + ?Sized>(id: u32, config: &BatchConfig, rng: &mut R) -> Annotator {
    let age_group = AgeGroup::ALL[categorical_index(&config.age_group_probs, rng.random())];
    let sex = [Sex::F, Sex::M][categorical_index(&config.sex_probs, rng.random())];
    let chronotype = sample_chronotype(age_group, rng);
    let avg_mood = rng.random_range(MIN_AVG_MOOD..=MAX_AVG_MOOD);

    let overall = Normal::new(MEAN_OVERALL_ACCURACY, SD_OVERALL_ACCURACY).expect("valid sd");
    let base_overall_accuracy = clamp_unit(overall.sample(rng));
    let per_label = Normal::new(base_overall_accuracy, SD_LABEL_ACCURACY).expect("valid sd");
    let base_label_accuracy: Vec<f64> = (0..config.n_labels)
        .map(|_| clamp_unit(per_label.sample(rng)))
        .collect();
    let history = base_label_accuracy.iter().map(|&a| initial_history(a)).collect();

    Annotator {
        id,
        age_group,
        sex,
        chronotype,
        avg_mood,
        base_overall_accuracy,
        base_label_accuracy,
        history,
    }
}

pub fn generate_batch(config: &BatchConfig) -> Result<Vec<Annotator>> {
    config.validate()?;
    let mut rng = rng::stream(
        config.rng_seed,
        Stream::Population,
        &[u64::from(config.batch_id)],
    );
    Ok((0..config.n_annotators)
        .map(|i| generate_annotator(i as u32, config, &mut rng))
        .collect())
}
