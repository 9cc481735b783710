use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense numeric dataset with integer class labels in `0..n_classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<u32>,
    n_classes: usize,
    pub feature_names: Vec<String>,
    /// Original label text for each class index.
    pub label_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row-major features. Label names default to the
    /// class index when `label_names` is empty.
    pub fn new(
        features: Vec<f64>,
        n_features: usize,
        labels: Vec<u32>,
        n_classes: usize,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Dataset("no rows".into()));
        }
        if n_features == 0 || features.len() != labels.len() * n_features {
            return Err(Error::Dataset(format!(
                "feature matrix has {} values, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if n_classes < 2 {
            return Err(Error::SingleClass);
        }
        if let Some(bad) = labels.iter().find(|&&l| l as usize >= n_classes) {
            return Err(Error::Dataset(format!("label {bad} not below class count {n_classes}")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Dataset("non-finite feature value".into()));
        }
        let feature_names = if feature_names.is_empty() {
            (0..n_features).map(|i| format!("f{i}")).collect()
        } else {
            feature_names
        };
        let label_names = if label_names.is_empty() {
            (0..n_classes).map(|i| i.to_string()).collect()
        } else {
            label_names
        };
        if feature_names.len() != n_features || label_names.len() != n_classes {
            return Err(Error::Dataset("name list length mismatch".into()));
        }
        Ok(Dataset {
            features,
            n_features,
            labels,
            n_classes,
            feature_names,
            label_names,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// New dataset holding only `rows`, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(rows.len() * self.n_features);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            features.extend_from_slice(self.row(r));
            labels.push(self.labels[r]);
        }
        Dataset::new(
            features,
            self.n_features,
            labels,
            self.n_classes,
            self.feature_names.clone(),
            self.label_names.clone(),
        )
    }
}
