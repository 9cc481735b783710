use std::collections::HashMap;

use super::{apply_subsample, require_file, DatasetKind, DatasetSpec, LoadedDataset};
use crate::error::{Error, Result};
use crate::learner::Dataset;

const MISSING: [&str; 6] = ["", "na", "n/a", "nan", "null", "?"];

fn is_missing(field: &str) -> bool {
    MISSING.iter().any(|m| field.eq_ignore_ascii_case(m))
}

/// Dense ids in first-appearance order.
#[derive(Default)]
struct Interner {
    ids: HashMap<String, usize>,
    names: Vec<String>,
}

impl Interner {
    fn id(&mut self, value: &str) -> usize {
        if let Some(&i) = self.ids.get(value) {
            return i;
        }
        let i = self.names.len();
        self.ids.insert(value.to_string(), i);
        self.names.push(value.to_string());
        i
    }
}

enum Column {
    Numeric { name: String, index: usize },
    Categorical { name: String, index: usize, levels: Interner },
}

/// Loads a headed CSV file. Categorical columns are one-hot encoded with
/// levels in first-appearance order, rows with a missing value in any used
/// column are dropped, and labels are numbered in first-appearance order.
pub fn load_csv_dataset(spec: &DatasetSpec) -> Result<LoadedDataset> {
    if spec.kind != DatasetKind::CsvTabular {
        return Err(Error::Config("not a csv dataset spec".into()));
    }
    spec.validate()?;
    let path = spec.path.as_deref().expect("validated");
    let label_name = spec.label_column.as_deref().expect("validated");
    require_file(path)?;

    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let position = |name: &str| headers.iter().position(|h| h == name);
    let label_index = position(label_name).ok_or_else(|| Error::MissingLabelColumn(label_name.to_string()))?;

    let feature_names: Vec<String> = match &spec.feature_columns {
        Some(cols) => cols.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != label_index)
            .map(|(_, h)| h.clone())
            .collect(),
    };
    for c in &spec.categorical_columns {
        if !feature_names.contains(c) {
            return Err(Error::Config(format!("categorical column `{c}` is not a feature column")));
        }
    }
    let mut columns = Vec::with_capacity(feature_names.len());
    for name in feature_names {
        let index = position(&name).ok_or_else(|| Error::Config(format!("column `{name}` not present in header")))?;
        if index == label_index {
            return Err(Error::Config(format!("label column `{name}` listed as a feature")));
        }
        columns.push(if spec.categorical_columns.contains(&name) {
            Column::Categorical {
                name,
                index,
                levels: Interner::default(),
            }
        } else {
            Column::Numeric { name, index }
        });
    }

    let mut source_rows = 0;
    let mut dropped_rows = 0;
    let mut labels_seen = Interner::default();
    let mut labels = Vec::new();
    // numeric values, or level ids for categorical columns
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        source_rows += 1;
        let used = std::iter::once(label_index).chain(columns.iter().map(|c| match c {
            Column::Numeric { index, .. } | Column::Categorical { index, .. } => *index,
        }));
        if used.into_iter().any(|i| is_missing(&record[i])) {
            dropped_rows += 1;
            continue;
        }
        let mut row = Vec::with_capacity(columns.len());
        for col in columns.iter_mut() {
            match col {
                Column::Numeric { name, index } => {
                    let field = &record[*index];
                    let v: f64 = field.parse().map_err(|_| {
                        Error::Dataset(format!(
                            "line {}: column `{name}` value `{field}` is not numeric; list it as categorical",
                            line + 2
                        ))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Dataset(format!("line {}: column `{name}` is not finite", line + 2)));
                    }
                    row.push(v);
                }
                Column::Categorical { index, levels, .. } => row.push(levels.id(&record[*index]) as f64),
            }
        }
        raw.push(row);
        labels.push(labels_seen.id(&record[label_index]) as u32);
    }

    if labels.is_empty() {
        return Err(Error::Dataset(format!("{} has no complete rows", path.display())));
    }
    if labels_seen.names.len() < 2 {
        return Err(Error::SingleClass);
    }

    let mut names = Vec::new();
    for col in &columns {
        match col {
            Column::Numeric { name, .. } => names.push(name.clone()),
            Column::Categorical { name, levels, .. } => {
                names.extend(levels.names.iter().map(|l| format!("{name}={l}")));
            }
        }
    }
    let mut features = Vec::with_capacity(labels.len() * names.len());
    for row in &raw {
        for (v, col) in row.iter().zip(&columns) {
            match col {
                Column::Numeric { .. } => features.push(*v),
                Column::Categorical { levels, .. } => {
                    let hot = *v as usize;
                    features.extend((0..levels.names.len()).map(|k| if k == hot { 1.0 } else { 0.0 }));
                }
            }
        }
    }
    let n_features = names.len();
    let data = Dataset::new(
        features,
        n_features,
        labels,
        labels_seen.names.len(),
        names,
        labels_seen.names,
    )?;
    Ok(LoadedDataset {
        data: apply_subsample(data, spec.subsample)?,
        source_rows,
        dropped_rows,
    })
}
