//! Query-annotator pairing.
//!
//! [`recommend_rs`] is the knowledge-based recommender used by tests 1-3: it
//! blends each annotator's predicted overall accuracy with their predicted
//! accuracy on the labels the model is torn between, weighted by the model's
//! probabilities. [`recommend_optimal`] is the test 4 baseline, scored from
//! the same quantities the labeling simulation uses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::behavior::{fatigue_level, SimParams};
use crate::error::{Error, Result};
use crate::learner::QueryContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TestMode {
    /// Past accuracy only.
    #[serde(rename = "test1")]
    AccuracyOnly,
    /// Past accuracy and current mood.
    #[serde(rename = "test2")]
    AccuracyMood,
    /// Past accuracy, current mood and fatigue.
    #[serde(rename = "test3")]
    AccuracyMoodFatigue,
    /// Optimization baseline.
    #[serde(rename = "test4")]
    Oracle,
}

impl TestMode {
    pub const ALL: [TestMode; 4] = [
        TestMode::AccuracyOnly,
        TestMode::AccuracyMood,
        TestMode::AccuracyMoodFatigue,
        TestMode::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestMode::AccuracyOnly => "test1",
            TestMode::AccuracyMood => "test2",
            TestMode::AccuracyMoodFatigue => "test3",
            TestMode::Oracle => "test4",
        }
    }

    pub fn uses_mood(self) -> bool {
        !matches!(self, TestMode::AccuracyOnly)
    }

    pub fn uses_fatigue(self) -> bool {
        matches!(self, TestMode::AccuracyMoodFatigue | TestMode::Oracle)
    }
}

impl fmt::Display for TestMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TestMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TestMode::ALL
            .into_iter()
            .find(|m| m.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown test mode `{s}`")))
    }
}

/// Running mean and squared-deviation sum over queried uncertainties.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyStats {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

/// Queries needed before the high-uncertainty branch can fire.
pub const THRESHOLD_WARMUP: u64 = 10;

impl UncertaintyStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, u: f64) {
        self.count += 1;
        let delta = u - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (u - self.mean);
    }

    /// Population variance, m2 / count.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / self.count as f64
        }
    }

    pub fn sample_variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Mean plus two standard deviations.
    pub fn threshold(&self) -> f64 {
        self.mean + 2.0 * self.variance().sqrt()
    }

    pub fn from_values(values: &[f64]) -> Self {
        let mut s = Self::new();
        values.iter().for_each(|&v| s.push(v));
        s
    }
}

pub fn update_uncertainty_stats(mut stats: UncertaintyStats, u: f64) -> UncertaintyStats {
    stats.push(u);
    stats
}

/// What the selector knows about one annotator at query time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorView {
    pub annotator_id: u32,
    pub label_accuracy: Vec<f64>,
    pub overall_accuracy: f64,
    pub current_mood: u8,
    pub avg_mood: u8,
    /// Annotations in the current fatigue window.
    pub fatigue_count: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredAnnotator {
    pub annotator_id: u32,
    pub score: f64,
}

fn mood_adjusted(estimate: f64, view: &AnnotatorView, params: &SimParams) -> f64 {
    let delta = f64::from(view.current_mood) - f64::from(view.avg_mood);
    (estimate * (1.0 + params.mood_unit_effect * delta)).clamp(0.0, 1.0)
}

fn fatigue_adjusted(acc: f64, view: &AnnotatorView, params: &SimParams) -> f64 {
    let lvl = fatigue_level(view.fatigue_count, params);
    (acc - params.fatigue_penalty * f64::from(lvl)).clamp(0.0, 1.0)
}

/// The recommender's accuracy prediction for one annotator, on `label` or
/// overall when `label` is `None`.
pub fn predicted_accuracy(view: &AnnotatorView, mode: TestMode, params: &SimParams, label: Option<usize>) -> Result<f64> {
    let estimate = match label {
        Some(l) => *view
            .label_accuracy
            .get(l)
            .ok_or_else(|| Error::Dataset(format!("label {l} missing from annotator view")))?,
        None => view.overall_accuracy,
    };
    match mode {
        TestMode::AccuracyOnly => Ok(estimate),
        TestMode::AccuracyMood => Ok(mood_adjusted(estimate, view, params)),
        TestMode::AccuracyMoodFatigue => Ok(fatigue_adjusted(mood_adjusted(estimate, view, params), view, params)),
        TestMode::Oracle => Err(Error::UnsupportedMode(mode.to_string())),
    }
}

/// Overall vs. per-label weights `(w, w_l)` for a query.
pub fn weight_branch(u: f64, stats: &UncertaintyStats, t_size: usize, num_labels: usize) -> (f64, f64) {
    weight_branch_with_threshold(u, stats.count, stats.threshold(), t_size, num_labels)
}

pub(crate) fn weight_branch_with_threshold(u: f64, count: u64, threshold: f64, t_size: usize, num_labels: usize) -> (f64, f64) {
    if count >= THRESHOLD_WARMUP && u > threshold {
        (0.8, 0.2)
    } else if t_size as f64 > num_labels as f64 / 2.0 - 1.0 {
        (0.3, 0.7)
    } else {
        (0.5, 0.5)
    }
}

/// Sorts by descending score, lowest id first among equal scores.
pub fn rank(mut scored: Vec<ScoredAnnotator>) -> Vec<ScoredAnnotator> {
    scored.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.annotator_id.cmp(&b.annotator_id))
    });
    scored
}

/// Knowledge-based recommender ranking for tests 1-3.
pub fn recommend_rs(
    ctx: &QueryContext,
    views: &[AnnotatorView],
    mode: TestMode,
    params: &SimParams,
    stats: &UncertaintyStats,
) -> Result<Vec<ScoredAnnotator>> {
    recommend_rs_with_threshold(ctx, views, mode, params, stats.count, stats.threshold())
}

/// [`recommend_rs`] with an explicit high-uncertainty threshold, for callers
/// that derive it from something other than the queried-instance history.
pub fn recommend_rs_with_threshold(
    ctx: &QueryContext,
    views: &[AnnotatorView],
    mode: TestMode,
    params: &SimParams,
    count: u64,
    threshold: f64,
) -> Result<Vec<ScoredAnnotator>> {
    if views.is_empty() {
        return Err(Error::NoAnnotators("recommend_rs"));
    }
    if mode == TestMode::Oracle {
        return Err(Error::UnsupportedMode(mode.to_string()));
    }
    let (w, w_l) = weight_branch_with_threshold(
        ctx.uncertainty,
        count,
        threshold,
        ctx.query_type_labels.len(),
        ctx.probs.len(),
    );
    let scored = views
        .iter()
        .map(|view| {
            let ac = predicted_accuracy(view, mode, params, None)?;
            let mut score = 0.0;
            for &i in &ctx.query_type_labels {
                let ac_i = predicted_accuracy(view, mode, params, Some(i))?;
                score += (w * ac + w_l * ac_i) * ctx.probs[i];
            }
            Ok(ScoredAnnotator {
                annotator_id: view.annotator_id,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank(scored))
}

/// Weights `(highest, second, third, mean)` for the optimization baseline.
/// `top` must hold three values sorted descending.
pub fn optimal_weights(t_size: usize, top: &[f64; 3]) -> [f64; 4] {
    let close01 = top[0] - top[1] < 0.04;
    let close12 = top[1] - top[2] < 0.04;
    if t_size > 1 && close01 && !close12 {
        [0.3, 0.3, 0.0, 0.4]
    } else if t_size > 1 && close01 && close12 {
        [0.3, 0.2, 0.2, 0.3]
    } else {
        [0.5, 0.0, 0.0, 0.5]
    }
}

pub fn optimal_score(t_size: usize, top: &[f64; 3], mean_accuracy: f64) -> f64 {
    let w = optimal_weights(t_size, top);
    w[0] * top[0] + w[1] * top[1] + w[2] * top[2] + w[3] * mean_accuracy
}

/// Optimization-baseline ranking (test 4).
pub fn recommend_optimal(ctx: &QueryContext, views: &[AnnotatorView], params: &SimParams) -> Result<Vec<ScoredAnnotator>> {
    if views.is_empty() {
        return Err(Error::NoAnnotators("recommend_optimal"));
    }
    let t = &ctx.query_type_labels;
    let scored = views
        .iter()
        .map(|view| {
            let mut labels = t
                .iter()
                .map(|&l| {
                    view.label_accuracy
                        .get(l)
                        .map(|&a| mood_adjusted(a, view, params))
                        .ok_or_else(|| Error::Dataset(format!("label {l} missing from annotator view")))
                })
                .collect::<Result<Vec<f64>>>()?;
            labels.sort_by(|a, b| b.total_cmp(a));
            labels.resize(labels.len().max(3), 0.0);
            let top = [
                fatigue_adjusted(labels[0], view, params),
                fatigue_adjusted(labels[1], view, params),
                fatigue_adjusted(labels[2], view, params),
            ];
            let mean = fatigue_adjusted(mood_adjusted(view.overall_accuracy, view, params), view, params);
            Ok(ScoredAnnotator {
                annotator_id: view.annotator_id,
                score: optimal_score(t.len(), &top, mean),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rank(scored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::ProbVector;

    fn view(id: u32, overall: f64, labels: Vec<f64>) -> AnnotatorView {
        AnnotatorView {
            annotator_id: id,
            label_accuracy: labels,
            overall_accuracy: overall,
            current_mood: 5,
            avg_mood: 5,
            fatigue_count: 0,
        }
    }

    fn ctx(probs: Vec<f64>) -> QueryContext {
        QueryContext::from_probs(0, ProbVector::new(probs).unwrap())
    }

    #[test]
    fn stats_examples() {
        let s = update_uncertainty_stats(UncertaintyStats::new(), 1.0);
        assert_eq!((s.count, s.mean), (1, 1.0));
        let s = UncertaintyStats::from_values(&[1.0, 2.0, 3.0]);
        assert!((s.mean - 2.0).abs() < 1e-12);
        assert!((s.m2 - 2.0).abs() < 1e-12);
        assert!((s.sample_variance() - 1.0).abs() < 1e-12);
        assert!((s.variance() - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn predicted_accuracy_examples() {
        let p = SimParams::default();
        let mut v = view(0, 0.82, vec![0.82, 0.5]);
        v.current_mood = 9;
        v.fatigue_count = 300;
        assert_eq!(predicted_accuracy(&v, TestMode::AccuracyOnly, &p, None).unwrap(), 0.82);

        let mut v = view(0, 0.80, vec![0.80]);
        v.current_mood = 7;
        let t2 = predicted_accuracy(&v, TestMode::AccuracyMood, &p, None).unwrap();
        assert!((t2 - 0.896).abs() < 1e-12);
        v.fatigue_count = 70;
        let t3 = predicted_accuracy(&v, TestMode::AccuracyMoodFatigue, &p, Some(0)).unwrap();
        assert!((t3 - 0.856).abs() < 1e-12);

        assert!(predicted_accuracy(&v, TestMode::Oracle, &p, None).is_err());
    }

    #[test]
    fn weight_branch_examples() {
        let mut stats = UncertaintyStats::from_values(&[0.1, 0.11, 0.09, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1]);
        assert_eq!(weight_branch(5.0, &stats, 1, 10), (0.8, 0.2));
        assert_eq!(weight_branch(0.0, &stats, 2, 3), (0.3, 0.7));
        assert_eq!(weight_branch(0.0, &stats, 4, 10), (0.5, 0.5));
        assert_eq!(weight_branch(0.0, &stats, 5, 10), (0.3, 0.7));
        // before warm-up the first branch is off
        stats = UncertaintyStats::from_values(&[0.1; 9]);
        assert_eq!(weight_branch(5.0, &stats, 4, 10), (0.5, 0.5));
    }

    #[test]
    fn rs_hand_case() {
        let c = ctx(vec![0.45, 0.35, 0.20]);
        assert_eq!(c.query_type_labels, vec![0, 1]);
        let v = view(0, 0.80, vec![0.90, 0.70, 0.10]);
        let ranked = recommend_rs(&c, &[v], TestMode::AccuracyOnly, &SimParams::default(), &UncertaintyStats::new()).unwrap();
        assert!((ranked[0].score - 0.6470).abs() < 1e-9);
    }

    #[test]
    fn rs_single_and_empty() {
        let c = ctx(vec![0.45, 0.35, 0.20]);
        let p = SimParams::default();
        let s = UncertaintyStats::new();
        let r = recommend_rs(&c, &[view(7, 0.1, vec![0.1; 3])], TestMode::AccuracyMood, &p, &s).unwrap();
        assert_eq!(r[0].annotator_id, 7);
        assert!(recommend_rs(&c, &[], TestMode::AccuracyMood, &p, &s).is_err());
        assert!(recommend_rs(&c, &[view(1, 0.5, vec![0.5; 3])], TestMode::Oracle, &p, &s).is_err());
        assert!(recommend_optimal(&c, &[], &p).is_err());
    }

    #[test]
    fn ties_broken_by_id() {
        let c = ctx(vec![0.45, 0.35, 0.20]);
        let views = vec![view(4, 0.8, vec![0.8; 3]), view(2, 0.8, vec![0.8; 3]), view(9, 0.9, vec![0.9; 3])];
        let r = recommend_rs(&c, &views, TestMode::AccuracyOnly, &SimParams::default(), &UncertaintyStats::new()).unwrap();
        let ids: Vec<u32> = r.iter().map(|s| s.annotator_id).collect();
        assert_eq!(ids, vec![9, 2, 4]);
    }

    #[test]
    fn optimal_branch_examples() {
        assert!((optimal_score(2, &[0.90, 0.88, 0.50], 0.80) - 0.854).abs() < 1e-9);
        assert!((optimal_score(3, &[0.90, 0.89, 0.88], 0.80) - 0.864).abs() < 1e-9);
        assert!((optimal_score(1, &[0.90, 0.0, 0.0], 0.80) - 0.85).abs() < 1e-9);
        // a wide first gap falls through to the default weights
        assert_eq!(optimal_weights(3, &[0.95, 0.85, 0.84]), [0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn optimal_pads_and_sorts() {
        // t = {0, 1}; per-label accuracies 0.88 and 0.90 sort to [0.90, 0.88, 0]
        let c = ctx(vec![0.40, 0.45, 0.15]);
        let v = view(0, 0.80, vec![0.88, 0.90, 0.2]);
        let r = recommend_optimal(&c, &[v], &SimParams::default()).unwrap();
        let expected = 0.3 * 0.90 + 0.3 * 0.88 + 0.4 * 0.80;
        assert!((r[0].score - expected).abs() < 1e-12);
    }

    #[test]
    fn optimal_applies_mood_and_fatigue() {
        let c = ctx(vec![0.9, 0.1]);
        let mut v = view(0, 0.80, vec![0.80, 0.5]);
        v.current_mood = 6;
        v.fatigue_count = 50;
        let p = SimParams::default();
        let r = recommend_optimal(&c, &[v], &p).unwrap();
        let adj = 0.80 * 1.06 - 0.02;
        assert!((r[0].score - (0.5 * adj + 0.5 * adj)).abs() < 1e-12);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("test3".parse::<TestMode>().unwrap(), TestMode::AccuracyMoodFatigue);
        assert!("test5".parse::<TestMode>().is_err());
        assert_eq!(serde_json::to_string(&TestMode::Oracle).unwrap(), "\"test4\"");
    }
}
