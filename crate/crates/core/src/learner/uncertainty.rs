//! Confidence and uncertainty measures over a predicted class distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A class probability distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Dataset("empty probability vector".into()));
        }
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Dataset("probability outside [0,1]".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Dataset(format!("probabilities sum to {sum}")));
        }
        Ok(ProbVector(probs))
    }

    /// Scales non-negative weights to sum to one. All-zero input becomes uniform.
    pub fn normalized(mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        if sum > 0.0 {
            weights.iter_mut().for_each(|w| *w /= sum);
        } else {
            let n = weights.len() as f64;
            weights.iter_mut().for_each(|w| *w = 1.0 / n);
        }
        ProbVector(weights)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Deref for ProbVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

fn top_two(p: &[f64]) -> (f64, f64) {
    let mut first = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for &x in p {
        if x > first {
            second = first;
            first = x;
        } else if x > second {
            second = x;
        }
    }
    (first, second.max(0.0))
}

pub fn least_confidence(p: &[f64]) -> f64 {
    1.0 - p.iter().copied().fold(0.0, f64::max)
}

pub fn margin_confidence(p: &[f64]) -> f64 {
    let (a, b) = top_two(p);
    a - b
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioConfidence {
    Finite(f64),
    /// Runner-up probability is zero: the prediction is certain.
    Unbounded,
}

impl RatioConfidence {
    pub fn value(self) -> f64 {
        match self {
            RatioConfidence::Finite(r) => r,
            RatioConfidence::Unbounded => f64::INFINITY,
        }
    }
}

pub fn ratio_confidence(p: &[f64]) -> RatioConfidence {
    let (a, b) = top_two(p);
    if b == 0.0 {
        RatioConfidence::Unbounded
    } else {
        RatioConfidence::Finite(a / b)
    }
}

/// Shannon entropy in bits, with 0 log 0 = 0.
pub fn entropy(p: &[f64]) -> f64 {
    let h: f64 = p
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}

/// Labels whose probability exceeds 1/C, most probable first. An exactly
/// uniform vector yields the single lowest-index argmax instead of nothing.
pub fn query_type(p: &[f64]) -> Vec<usize> {
    let threshold = 1.0 / p.len() as f64;
    let mut labels: Vec<usize> = (0..p.len()).filter(|&i| p[i] > threshold).collect();
    labels.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    if labels.is_empty() {
        let mut best = 0;
        for i in 1..p.len() {
            if p[i] > p[best] {
                best = i;
            }
        }
        labels.push(best);
    }
    labels
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: [f64; 3] = [0.45, 0.35, 0.20];

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn least_confidence_examples() {
        assert!(close(least_confidence(&[1.0, 0.0, 0.0]), 0.0));
        assert!(close(least_confidence(&[0.9, 0.1]), 0.1));
        assert!(close(least_confidence(&WORKED), 0.55));
    }

    #[test]
    fn margin_examples() {
        assert!(close(margin_confidence(&[0.5, 0.5]), 0.0));
        assert!(close(margin_confidence(&WORKED), 0.10));
        assert!(close(margin_confidence(&[1.0, 0.0]), 1.0));
        assert!(close(margin_confidence(&[0.2, 0.7, 0.1]), 0.5));
    }

    #[test]
    fn ratio_examples() {
        assert!(close(ratio_confidence(&[0.6, 0.3, 0.1]).value(), 2.0));
        assert!(close(ratio_confidence(&[0.5, 0.5]).value(), 1.0));
        assert_eq!(ratio_confidence(&[1.0, 0.0]), RatioConfidence::Unbounded);
        assert_eq!(ratio_confidence(&[0.0, 1.0, 0.0]).value(), f64::INFINITY);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&[1.0, 0.0, 0.0]), 0.0);
        assert!(close(entropy(&[0.5, 0.5]), 1.0));
        assert!((entropy(&[0.1; 10]) - 10f64.log2()).abs() < 1e-9);
    }

    #[test]
    fn query_type_examples() {
        assert_eq!(query_type(&WORKED), vec![0, 1]);
        assert_eq!(query_type(&[0.2, 0.35, 0.45]), vec![2, 1]);
        assert_eq!(query_type(&[1.0, 0.0, 0.0]), vec![0]);
        let third = 1.0 / 3.0;
        assert_eq!(query_type(&[third, third, third]), vec![0]);
        assert_eq!(query_type(&[0.5, 0.5]), vec![0]);
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.5]).is_ok());
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.2, -0.2]).is_err());
        let n = ProbVector::normalized(vec![0.0, 0.0]);
        assert_eq!(n.as_slice(), &[0.5, 0.5]);
        let n = ProbVector::normalized(vec![1.0, 3.0]);
        assert_eq!(n.as_slice(), &[0.25, 0.75]);
    }
}
