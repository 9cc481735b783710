//! Bagged randomized decision trees.
//!
//! Splits are searched over per-feature histograms: every fit bins each
//! feature of the training rows into at most `max_bins` quantile buckets. A
//! chosen split "bin <= b" is stored as a raw threshold halfway between the
//! node's largest value on the left and smallest on the right, so prediction
//! works on unbinned rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Classifier, TrainingSet};
use crate::error::{Error, Result};
use crate::learner::dataset::Dataset;
use crate::learner::uncertainty::ProbVector;
use crate::rng::{self, SimRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    All,
    #[serde(untagged)]
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::All => n_features,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub max_bins: usize,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 50,
            max_depth: 12,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
            max_bins: 255,
            min_samples_split: 2,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be at least 1".into()));
        }
        if !(2..=256).contains(&self.max_bins) {
            return Err(Error::Config("max_bins must be in 2..=256".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be at least 2".into()));
        }
        if let MaxFeatures::Count(0) = self.max_features {
            return Err(Error::Config("max_features must be at least 1".into()));
        }
        Ok(())
    }
}

const LEAF: u32 = u32::MAX;

/// A split sends `x[feature] <= threshold` to child `index` and the rest to
/// `index + 1`. A leaf (`feature == LEAF`) keeps its class distribution at
/// `leaf_probs[index..index + C]`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    feature: u32,
    index: u32,
    threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
    leaf_probs: Vec<f64>,
}

impl Tree {
    fn leaf_for(&self, x: &[f64]) -> usize {
        let mut node = self.nodes[0];
        while node.feature != LEAF {
            let right = x[node.feature as usize] > node.threshold;
            node = self.nodes[node.index as usize + usize::from(right)];
        }
        node.index as usize
    }
}

/// Cut points for one feature column: bin(x) = number of cuts strictly
/// below x. Each cut lies halfway between two neighbouring distinct values.
fn cut_points(values: &mut [f64], max_bins: usize) -> Vec<f64> {
    values.sort_by(f64::total_cmp);
    let mut distinct: Vec<f64> = Vec::new();
    for &v in values.iter() {
        if distinct.last() != Some(&v) {
            distinct.push(v);
        }
    }
    let uppers: Vec<usize> = if distinct.len() <= max_bins {
        (1..distinct.len()).collect()
    } else {
        let n = values.len();
        let mut ups: Vec<usize> = Vec::with_capacity(max_bins - 1);
        for q in 1..max_bins {
            let v = values[(q * n / max_bins).min(n - 1)];
            let up = distinct.partition_point(|&d| d <= v);
            if up < distinct.len() && ups.last() != Some(&up) {
                ups.push(up);
            }
        }
        ups
    };
    uppers
        .into_iter()
        .map(|up| midpoint(distinct[up - 1], distinct[up]))
        .collect()
}

/// A value `m` with `a <= m < b`, halfway when representable.
fn midpoint(a: f64, b: f64) -> f64 {
    let mid = a + (b - a) / 2.0;
    if mid < b {
        mid
    } else {
        a
    }
}

fn bin_of(cuts: &[f64], x: f64) -> u8 {
    cuts.partition_point(|&c| c < x) as u8
}

/// Nodes with at most this many distinct rows sort their rows instead of
/// filling a histogram.
const SMALL_NODE: usize = 64;

/// Bits needed to hold a class index.
fn class_bits(n_classes: usize) -> u32 {
    usize::BITS - (n_classes.max(2) - 1).leading_zeros()
}

/// Column-major binned view of the training rows.
struct Binned {
    n_rows: usize,
    bins: Vec<u8>,
    /// `bin << class_bits | label` per feature and row: the histogram slot a
    /// row lands in.
    codes: Vec<u16>,
    class_bits: u32,
    cuts: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Binned {
    fn build(data: &Dataset, training: &TrainingSet, max_bins: usize) -> Self {
        let rows = &training.rows;
        let n = rows.len();
        let d = data.n_features();
        let class_bits = class_bits(data.n_classes());
        let mut bins = vec![0u8; n * d];
        let mut codes = vec![0u16; n * d];
        let mut values = vec![0.0; n * d];
        let mut cuts = Vec::with_capacity(d);
        let mut column = vec![0.0; n];
        for f in 0..d {
            for (i, &r) in rows.iter().enumerate() {
                column[i] = data.row(r)[f];
                values[f * n + i] = column[i];
            }
            let cut = cut_points(&mut column, max_bins);
            for (i, &r) in rows.iter().enumerate() {
                let b = bin_of(&cut, data.row(r)[f]);
                bins[f * n + i] = b;
                codes[f * n + i] = (u16::from(b) << class_bits) | training.labels[i] as u16;
            }
            cuts.push(cut);
        }
        Binned {
            n_rows: n,
            bins,
            codes,
            class_bits,
            cuts,
            values,
        }
    }

    fn bin(&self, feature: usize, sample: u32) -> usize {
        self.bins[feature * self.n_rows + sample as usize] as usize
    }

    fn value(&self, feature: usize, sample: u32) -> f64 {
        self.values[feature * self.n_rows + sample as usize]
    }

    fn codes(&self, feature: usize) -> &[u16] {
        &self.codes[feature * self.n_rows..(feature + 1) * self.n_rows]
    }
}

struct TreeBuilder<'a> {
    binned: &'a Binned,
    labels: &'a [u32],
    n_classes: usize,
    params: &'a ForestParams,
    mtry: usize,
    /// Feature order; the first `mtry` entries are the candidates at a node.
    features: Vec<usize>,
    /// Bootstrap multiplicity of each training row.
    weight: Vec<f64>,
    hist: Vec<f64>,
    /// Per-bin totals of `hist`, so empty bins are skipped without a class scan.
    bin_totals: Vec<f64>,
    left: Vec<f64>,
    /// `code << 32 | sample` sort keys for small nodes.
    keys: Vec<u64>,
    /// Class totals of the node at each (depth, side).
    totals: Vec<f64>,
    nodes: Vec<Node>,
    leaf_probs: Vec<f64>,
}

impl TreeBuilder<'_> {
    fn leaf(&mut self, slot: usize, counts: &[f64]) {
        let total: f64 = counts.iter().sum();
        self.nodes[slot] = Node {
            feature: LEAF,
            index: self.leaf_probs.len() as u32,
            threshold: 0.0,
        };
        self.leaf_probs.extend(counts.iter().map(|c| c / total));
    }

    /// Best (score, bin) split of one feature, where score is the children's
    /// summed c^2/n. Counts are integral, so the running sums are exact.
    fn best_bin(&mut self, f: usize, samples: &[u32], counts: &[f64], n: f64, parent_sq: f64) -> Option<(f64, usize)> {
        if samples.len() <= SMALL_NODE {
            self.best_bin_small(f, samples, counts, n, parent_sq)
        } else {
            self.best_bin_dense(f, samples, counts, n, parent_sq)
        }
    }

    fn best_bin_small(&mut self, f: usize, samples: &[u32], counts: &[f64], n: f64, parent_sq: f64) -> Option<(f64, usize)> {
        let shift = self.binned.class_bits;
        let mask = (1usize << shift) - 1;
        let codes = self.binned.codes(f);
        self.keys.clear();
        self.keys
            .extend(samples.iter().map(|&s| (u64::from(codes[s as usize]) << 32) | u64::from(s)));
        self.keys.sort_unstable();
        let hi_bin = (self.keys[self.keys.len() - 1] >> 32) as usize >> shift;
        self.left.fill(0.0);
        let (mut l2, mut r2, mut n_left) = (0.0, parent_sq, 0.0);
        let mut best: Option<(f64, usize)> = None;
        let m = self.keys.len();
        for i in 0..m {
            let code = (self.keys[i] >> 32) as usize;
            let (b, k) = (code >> shift, code & mask);
            let h = self.weight[self.keys[i] as u32 as usize];
            let l = self.left[k];
            l2 += h * (2.0 * l + h);
            r2 += h * (h - 2.0 * (counts[k] - l));
            self.left[k] = l + h;
            n_left += h;
            let closes_bin = i + 1 == m || (self.keys[i + 1] >> 32) as usize >> shift != b;
            if closes_bin && b < hi_bin {
                let score = l2 / n_left + r2 / (n - n_left);
                if best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, b));
                }
            }
        }
        best
    }

    fn best_bin_dense(&mut self, f: usize, samples: &[u32], counts: &[f64], n: f64, parent_sq: f64) -> Option<(f64, usize)> {
        let shift = self.binned.class_bits;
        let codes = self.binned.codes(f);
        let (mut lo, mut hi) = (usize::MAX, 0);
        for &s in samples {
            let code = codes[s as usize] as usize;
            let w = self.weight[s as usize];
            self.hist[code] += w;
            self.bin_totals[code >> shift] += w;
            lo = lo.min(code);
            hi = hi.max(code);
        }
        let (lo_bin, hi_bin) = (lo >> shift, hi >> shift);
        self.left.fill(0.0);
        let (mut l2, mut r2, mut n_left) = (0.0, parent_sq, 0.0);
        let mut best: Option<(f64, usize)> = None;
        // splitting at hi_bin would leave the right side empty
        for b in lo_bin..hi_bin {
            if self.bin_totals[b] == 0.0 {
                continue;
            }
            let row = b << shift;
            for k in 0..self.n_classes {
                let h = self.hist[row | k];
                if h == 0.0 {
                    continue;
                }
                let l = self.left[k];
                l2 += h * (2.0 * l + h);
                r2 += h * (h - 2.0 * (counts[k] - l));
                self.left[k] = l + h;
                n_left += h;
            }
            let score = l2 / n_left + r2 / (n - n_left);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, b));
            }
        }
        if samples.len() < hi - lo {
            for &s in samples {
                let code = codes[s as usize] as usize;
                self.hist[code] = 0.0;
                self.bin_totals[code >> shift] = 0.0;
            }
        } else {
            self.hist[lo..=hi].fill(0.0);
            self.bin_totals[lo_bin..=hi_bin].fill(0.0);
        }
        best
    }

    /// Grows the subtree for `samples` into the reserved node `slot`.
    fn build(&mut self, slot: usize, samples: &mut [u32], depth: usize, side: usize, rng: &mut SimRng) {
        let c = self.n_classes;
        let at = (2 * depth + side) * c;
        let counts = self.totals[at..at + c].to_vec();
        let n: f64 = counts.iter().sum();
        let pure = counts.iter().filter(|&&x| x > 0.0).count() <= 1;
        if pure || depth >= self.params.max_depth || n < self.params.min_samples_split as f64 {
            return self.leaf(slot, &counts);
        }

        // Gini gain is positive iff the children's sum of c^2/n beats the parent's.
        let parent_sq: f64 = counts.iter().map(|x| x * x).sum();
        let parent = parent_sq / n;
        let mut best: Option<(f64, usize, usize)> = None;
        let d = self.features.len();
        for i in 0..self.mtry {
            let j = rng.random_range(i..d);
            self.features.swap(i, j);
            let f = self.features[i];
            if self.binned.cuts[f].is_empty() {
                continue;
            }
            if let Some((score, b)) = self.best_bin(f, samples, &counts, n, parent_sq) {
                if score > parent + 1e-12 && best.is_none_or(|(s, _, _)| score > s) {
                    best = Some((score, f, b));
                }
            }
        }

        let Some((_, feature, split_bin)) = best else {
            return self.leaf(slot, &counts);
        };
        let child = 2 * (depth + 1) * c;
        self.totals[child..child + c].fill(0.0);
        let (mut left_max, mut right_min) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut lo = 0;
        for i in 0..samples.len() {
            let s = samples[i];
            let v = self.binned.value(feature, s);
            if self.binned.bin(feature, s) <= split_bin {
                self.totals[child + self.labels[s as usize] as usize] += self.weight[s as usize];
                samples.swap(i, lo);
                lo += 1;
                left_max = left_max.max(v);
            } else {
                right_min = right_min.min(v);
            }
        }
        for k in 0..c {
            self.totals[child + c + k] = counts[k] - self.totals[child + k];
        }
        let first = self.nodes.len();
        self.nodes.push(PLACEHOLDER);
        self.nodes.push(PLACEHOLDER);
        self.nodes[slot] = Node {
            feature: feature as u32,
            index: first as u32,
            threshold: midpoint(left_max, right_min),
        };
        let (l, r) = samples.split_at_mut(lo);
        self.build(first, l, depth + 1, 0, rng);
        self.build(first + 1, r, depth + 1, 1, rng);
    }
}

const PLACEHOLDER: Node = Node {
    feature: LEAF,
    index: 0,
    threshold: 0.0,
};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    params: ForestParams,
    n_classes: usize,
    trees: Vec<Tree>,
}

impl RandomForest {
    pub fn new(params: ForestParams) -> Self {
        RandomForest {
            params,
            n_classes: 0,
            trees: Vec::new(),
        }
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    pub fn is_fitted(&self) -> bool {
        !self.trees.is_empty()
    }
}

impl Classifier for RandomForest {
    fn fit(&mut self, data: &Dataset, training: &TrainingSet, seed: u64) -> Result<()> {
        self.params.validate()?;
        if training.is_empty() {
            return Err(Error::Dataset("empty training set".into()));
        }
        let binned = Binned::build(data, training, self.params.max_bins);
        let n = training.len();
        let n_classes = data.n_classes();
        let mtry = self.params.max_features.resolve(data.n_features());
        let trees = (0..self.params.n_trees)
            .map(|t| {
                let mut rng = rng::stream(seed, Stream::Forest, &[t as u64]);
                let mut weight = vec![0.0; n];
                if self.params.bootstrap {
                    for _ in 0..n {
                        weight[rng.random_range(0..n)] += 1.0;
                    }
                } else {
                    weight.fill(1.0);
                }
                let mut samples: Vec<u32> = (0..n as u32).filter(|&s| weight[s as usize] > 0.0).collect();
                let mut builder = TreeBuilder {
                    binned: &binned,
                    labels: &training.labels,
                    n_classes,
                    params: &self.params,
                    mtry,
                    features: (0..data.n_features()).collect(),
                    weight,
                    hist: vec![0.0; (self.params.max_bins + 1) << binned.class_bits],
                    bin_totals: vec![0.0; self.params.max_bins + 1],
                    left: vec![0.0; n_classes],
                    keys: Vec::new(),
                    totals: vec![0.0; 2 * (self.params.max_depth + 2) * n_classes],
                    nodes: vec![PLACEHOLDER],
                    leaf_probs: Vec::new(),
                };
                for &s in &samples {
                    builder.totals[training.labels[s as usize] as usize] += builder.weight[s as usize];
                }
                builder.build(0, &mut samples, 0, 0, &mut rng);
                Tree {
                    nodes: builder.nodes,
                    leaf_probs: builder.leaf_probs,
                }
            })
            .collect();
        self.trees = trees;
        self.n_classes = n_classes;
        Ok(())
    }

    fn predict_proba(&self, instance: &[f64]) -> Result<ProbVector> {
        if !self.is_fitted() {
            return Err(Error::NotFitted);
        }
        let c = self.n_classes;
        let mut acc = vec![0.0; c];
        for tree in &self.trees {
            let off = tree.leaf_for(instance);
            for (a, p) in acc.iter_mut().zip(&tree.leaf_probs[off..off + c]) {
                *a += p;
            }
        }
        Ok(ProbVector::normalized(acc))
    }

    fn predict_rows(&self, data: &Dataset, rows: &[usize]) -> Result<Vec<ProbVector>> {
        if !self.is_fitted() {
            return Err(Error::NotFitted);
        }
        let c = self.n_classes;
        let mut acc = vec![0.0; rows.len() * c];
        // tree-major order keeps one tree hot in cache; per-row sums still
        // add trees in the same order as predict_proba
        for tree in &self.trees {
            for (i, &r) in rows.iter().enumerate() {
                let off = tree.leaf_for(data.row(r));
                for (a, p) in acc[i * c..(i + 1) * c].iter_mut().zip(&tree.leaf_probs[off..off + c]) {
                    *a += p;
                }
            }
        }
        Ok(acc.chunks(c).map(|p| ProbVector::normalized(p.to_vec())).collect())
    }

    fn n_classes(&self) -> usize {
        self.n_classes
    }
}
