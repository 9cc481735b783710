use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    pub macro_f1: f64,
}

/// Row = true class, column = predicted class.
pub fn confusion_matrix(truth: &[u32], predicted: &[u32], n_classes: usize) -> Vec<Vec<u64>> {
    let mut m = vec![vec![0u64; n_classes]; n_classes];
    for (&t, &p) in truth.iter().zip(predicted) {
        m[t as usize][p as usize] += 1;
    }
    m
}

pub fn accuracy(truth: &[u32], predicted: &[u32]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = truth.iter().zip(predicted).filter(|(t, p)| t == p).count();
    hits as f64 / truth.len() as f64
}

/// Unweighted mean of per-class F1 over the classes that occur in either
/// the truth or the predictions. A class with precision + recall = 0 scores 0.
pub fn macro_f1(truth: &[u32], predicted: &[u32], n_classes: usize) -> f64 {
    let m = confusion_matrix(truth, predicted, n_classes);
    let mut sum = 0.0;
    let mut present = 0usize;
    for k in 0..n_classes {
        let tp = m[k][k] as f64;
        let actual: u64 = m[k].iter().sum();
        let predicted_k: u64 = m.iter().map(|row| row[k]).sum();
        if actual == 0 && predicted_k == 0 {
            continue;
        }
        present += 1;
        let precision = if predicted_k > 0 { tp / predicted_k as f64 } else { 0.0 };
        let recall = if actual > 0 { tp / actual as f64 } else { 0.0 };
        if precision + recall > 0.0 {
            sum += 2.0 * precision * recall / (precision + recall);
        }
    }
    if present == 0 {
        0.0
    } else {
        sum / present as f64
    }
}

pub fn evaluation(truth: &[u32], predicted: &[u32], n_classes: usize) -> Evaluation {
    Evaluation {
        accuracy: accuracy(truth, predicted),
        macro_f1: macro_f1(truth, predicted, n_classes),
    }
}
