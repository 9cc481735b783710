use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::Dataset;
use crate::rng::SimRng;

/// Size of the initial ground-truth-labeled set: `max(min_size, per_class * C)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSetPolicy {
    pub min_size: usize,
    pub per_class: usize,
}

impl Default for SeedSetPolicy {
    fn default() -> Self {
        SeedSetPolicy {
            min_size: 10,
            per_class: 2,
        }
    }
}

impl SeedSetPolicy {
    pub fn size(&self, n_classes: usize) -> usize {
        self.min_size.max(self.per_class * n_classes)
    }
}

fn rows_by_class(data: &Dataset, rows: &[usize]) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); data.n_classes()];
    for &r in rows {
        by_class[data.label(r) as usize].push(r);
    }
    by_class
}

/// Splits `total` slots across classes proportionally to `available`, by
/// largest remainder (lowest class wins ties), never exceeding availability.
pub(crate) fn proportional(total: usize, available: &[usize]) -> Vec<usize> {
    let sum: usize = available.iter().sum();
    let mut take = vec![0; available.len()];
    if sum == 0 || total == 0 {
        return take;
    }
    let total = total.min(sum);
    let mut rem: Vec<(f64, usize)> = Vec::new();
    for (k, &a) in available.iter().enumerate() {
        let exact = total as f64 * a as f64 / sum as f64;
        take[k] = (exact.floor() as usize).min(a);
        rem.push((exact - exact.floor(), k));
    }
    rem.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut left = total - take.iter().sum::<usize>();
    while left > 0 {
        let mut progressed = false;
        for &(_, k) in &rem {
            if left == 0 {
                break;
            }
            if take[k] < available[k] {
                take[k] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    take
}

/// Stratified split of `candidates` into (seed, pool), both sorted ascending.
pub fn build_seed_set(data: &Dataset, candidates: &[usize], policy: SeedSetPolicy, rng: &mut SimRng) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut by_class = rows_by_class(data, candidates);
    if let Some(k) = by_class.iter().position(|rows| rows.is_empty()) {
        return Err(Error::EmptyClass(k));
    }
    let size = policy.size(data.n_classes());
    if size >= candidates.len() {
        return Err(Error::Dataset(format!(
            "{} rows cannot hold a seed set of {size} and a non-empty pool",
            candidates.len()
        )));
    }
    for rows in by_class.iter_mut() {
        rows.shuffle(rng);
    }
    let guaranteed: Vec<usize> = by_class
        .iter()
        .map(|rows| rows.len().min(policy.per_class))
        .collect();
    let remaining = size.saturating_sub(guaranteed.iter().sum());
    let leftover: Vec<usize> = by_class
        .iter()
        .zip(&guaranteed)
        .map(|(rows, g)| rows.len() - g)
        .collect();
    let extra = proportional(remaining, &leftover);

    let mut seed = Vec::with_capacity(size);
    for (k, rows) in by_class.iter().enumerate() {
        seed.extend_from_slice(&rows[..guaranteed[k] + extra[k]]);
    }
    seed.sort_unstable();
    let mut pool: Vec<usize> = candidates
        .iter()
        .copied()
        .filter(|r| seed.binary_search(r).is_err())
        .collect();
    pool.sort_unstable();
    Ok((seed, pool))
}

/// Stratified sample of about `fraction` of `rows` (at least one per class
/// when the class has two or more rows). Returns (sample, rest), sorted.
pub fn stratified_split(data: &Dataset, rows: &[usize], fraction: f64, rng: &mut SimRng) -> (Vec<usize>, Vec<usize>) {
    let mut picked = Vec::new();
    for mut class_rows in rows_by_class(data, rows) {
        class_rows.shuffle(rng);
        let mut k = (class_rows.len() as f64 * fraction).round() as usize;
        if class_rows.len() >= 2 {
            k = k.clamp(1, class_rows.len() - 1);
        } else {
            k = 0;
        }
        picked.extend_from_slice(&class_rows[..k]);
    }
    picked.sort_unstable();
    let rest = rows
        .iter()
        .copied()
        .filter(|r| picked.binary_search(r).is_err())
        .collect();
    (picked, rest)
}
