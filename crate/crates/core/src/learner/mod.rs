//! Pool-based active learner: classifier, uncertainty, query selection and
//! evaluation.

pub mod dataset;
pub mod forest;
pub mod metrics;
pub mod uncertainty;

use serde::{Deserialize, Serialize};

pub use dataset::Dataset;
pub use forest::{ForestParams, MaxFeatures, RandomForest};
pub use metrics::Evaluation;
pub use uncertainty::{
    entropy, least_confidence, margin_confidence, query_type, ratio_confidence, ProbVector,
    RatioConfidence,
};

use crate::error::{Error, Result};

/// Labeled rows of a dataset. The labels are the ones the learner was given,
/// which may disagree with the dataset's ground truth.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingSet {
    pub rows: Vec<usize>,
    pub labels: Vec<u32>,
}

impl TrainingSet {
    pub fn push(&mut self, row: usize, label: u32) {
        self.rows.push(row);
        self.labels.push(label);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Training set that uses the dataset's own labels for `rows`.
    pub fn ground_truth(data: &Dataset, rows: &[usize]) -> Self {
        TrainingSet {
            rows: rows.to_vec(),
            labels: rows.iter().map(|&r| data.label(r)).collect(),
        }
    }
}

/// A probabilistic classifier over rows of a [`Dataset`].
pub trait Classifier {
    /// Fits on `training`. The same `seed` and inputs must reproduce the same
    /// model.
    fn fit(&mut self, data: &Dataset, training: &TrainingSet, seed: u64) -> Result<()>;

    fn predict_proba(&self, instance: &[f64]) -> Result<ProbVector>;

    /// Distributions for several dataset rows, equal to calling
    /// `predict_proba` on each.
    fn predict_rows(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<ProbVector>> {
        rows.iter().map(|&r| self.predict_proba(data.row(r))).collect()
    }

    fn n_classes(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryContext {
    pub instance_index: usize,
    pub probs: ProbVector,
    /// Entropy of `probs`, in bits.
    pub uncertainty: f64,
    pub query_type_labels: Vec<usize>,
}

impl QueryContext {
    pub fn from_probs(instance_index: usize, probs: ProbVector) -> Self {
        let uncertainty = entropy(&probs);
        let query_type_labels = query_type(&probs);
        QueryContext {
            instance_index,
            probs,
            uncertainty,
            query_type_labels,
        }
    }
}

/// Predicted distribution and entropy for every pool row, in pool order.
pub fn score_pool<M: Classifier + ?Sized>(model: &M, data: &Dataset, pool: &[usize]) -> Result<Vec<(ProbVector, f64)>> {
    Ok(with_entropy(model.predict_rows(data, pool)?))
}

pub fn with_entropy(probs: Vec<ProbVector>) -> Vec<(ProbVector, f64)> {
    probs
        .into_iter()
        .map(|p| {
            let h = entropy(&p);
            (p, h)
        })
        .collect()
}

/// Index into `scores` of the highest entropy; the first one wins ties.
pub fn argmax_entropy(scores: &[(ProbVector, f64)]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, (_, h)) in scores.iter().enumerate() {
        if best.is_none_or(|b| *h > scores[b].1) {
            best = Some(i);
        }
    }
    best
}

/// Picks the most uncertain pool row. `pool` must be sorted ascending so
/// ties go to the lowest instance index.
pub fn select_query<M: Classifier + ?Sized>(model: &M, data: &Dataset, pool: &[usize]) -> Result<QueryContext> {
    let scores = score_pool(model, data, pool)?;
    query_from_scores(pool, scores)
}

pub(crate) fn query_from_scores(pool: &[usize], mut scores: Vec<(ProbVector, f64)>) -> Result<QueryContext> {
    let best = argmax_entropy(&scores).ok_or_else(|| Error::Dataset("empty pool".into()))?;
    let (probs, _) = scores.swap_remove(best);
    Ok(QueryContext::from_probs(pool[best], probs))
}

pub fn predict<M: Classifier + ?Sized>(model: &M, instance: &[f64]) -> Result<u32> {
    Ok(most_likely(&model.predict_proba(instance)?))
}

/// Most probable class; the lowest index wins ties.
pub fn most_likely(p: &[f64]) -> u32 {
    let mut best = 0;
    for i in 1..p.len() {
        if p[i] > p[best] {
            best = i;
        }
    }
    best as u32
}

/// Accuracy and macro-F1 of the model against the dataset's ground truth on
/// `rows`.
pub fn evaluate<M: Classifier + ?Sized>(model: &M, data: &Dataset, rows: &[usize]) -> Result<Evaluation> {
    let probs = model.predict_rows(data, rows)?;
    let predicted: Vec<u32> = probs.iter().map(|p| most_likely(p)).collect();
    let truth: Vec<u32> = rows.iter().map(|&r| data.label(r)).collect();
    Ok(metrics::evaluation(&truth, &predicted, data.n_classes()))
}
