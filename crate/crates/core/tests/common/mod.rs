//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use annosel::behavior::SimParams;
use annosel::selector::{AnnotatorView, ScoredAnnotator, TestMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Labels above 1/C by descending probability, falling back to the first
/// argmax.
pub fn reference_query_type(p: &[f64]) -> Vec<usize> {
    let c = p.len() as f64;
    let mut t: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 1.0 / c).collect();
    // insertion sort keeps equal probabilities in index order
    for i in 1..t.len() {
        let mut j = i;
        while j > 0 && p[t[j - 1]] < p[t[j]] {
            t.swap(j - 1, j);
            j -= 1;
        }
    }
    if t.is_empty() {
        let mut best = 0;
        for i in 0..p.len() {
            if p[i] > p[best] {
                best = i;
            }
        }
        t.push(best);
    }
    t
}

pub fn reference_fatigue_level(n: u32, sim: &SimParams) -> u32 {
    let mut level = 0;
    let mut next = sim.fatigue_start;
    while n >= next {
        level += 1;
        next += sim.fatigue_step;
    }
    level
}

fn clamp01(x: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x > 1.0 {
        1.0
    } else {
        x
    }
}

fn reference_estimate(est: f64, v: &AnnotatorView, mode: TestMode, sim: &SimParams) -> f64 {
    let moody = clamp01(est * (1.0 + sim.mood_unit_effect * (v.current_mood as f64 - v.avg_mood as f64)));
    match mode {
        TestMode::AccuracyOnly => est,
        TestMode::AccuracyMood => moody,
        _ => clamp01(moody - sim.fatigue_penalty * reference_fatigue_level(v.fatigue_count, sim) as f64),
    }
}

/// Sort by score descending, then id ascending, by repeated selection.
fn reference_rank(mut pending: Vec<(u32, f64)>) -> Vec<ScoredAnnotator> {
    let mut out = Vec::new();
    while !pending.is_empty() {
        let mut best = 0;
        for i in 1..pending.len() {
            let (id, s) = pending[i];
            let (bid, bs) = pending[best];
            if s > bs || (s == bs && id < bid) {
                best = i;
            }
        }
        let (annotator_id, score) = pending.remove(best);
        out.push(ScoredAnnotator { annotator_id, score });
    }
    out
}

/// Knowledge-based ranking computed straight from the scoring formula.
pub fn reference_rs(
    p: &[f64],
    u: f64,
    views: &[AnnotatorView],
    mode: TestMode,
    sim: &SimParams,
    count: u64,
    threshold: f64,
) -> Vec<ScoredAnnotator> {
    let t = reference_query_type(p);
    let c = p.len() as f64;
    let (w, wl) = if count >= 10 && u > threshold {
        (0.8, 0.2)
    } else if (t.len() as f64) > c / 2.0 - 1.0 {
        (0.3, 0.7)
    } else {
        (0.5, 0.5)
    };
    let scored = views
        .iter()
        .map(|v| {
            let ac = reference_estimate(v.overall_accuracy, v, mode, sim);
            let mut score = 0.0;
            for &i in &t {
                let ac_i = reference_estimate(v.label_accuracy[i], v, mode, sim);
                score += (w * ac + wl * ac_i) * p[i];
            }
            (v.annotator_id, score)
        })
        .collect();
    reference_rank(scored)
}

/// Optimization-baseline ranking computed straight from its formula.
pub fn reference_optimal(p: &[f64], views: &[AnnotatorView], sim: &SimParams) -> Vec<ScoredAnnotator> {
    let t = reference_query_type(p);
    let scored = views
        .iter()
        .map(|v| {
            let mut a: Vec<f64> = t
                .iter()
                .map(|&i| reference_estimate(v.label_accuracy[i], v, TestMode::AccuracyMood, sim))
                .collect();
            a.sort_by(|x, y| y.partial_cmp(x).unwrap());
            while a.len() < 3 {
                a.push(0.0);
            }
            let fl = sim.fatigue_penalty * reference_fatigue_level(v.fatigue_count, sim) as f64;
            let a: Vec<f64> = a.iter().map(|x| clamp01(x - fl)).collect();
            let mean = clamp01(reference_estimate(v.overall_accuracy, v, TestMode::AccuracyMood, sim) - fl);
            let g01 = a[0] - a[1];
            let g12 = a[1] - a[2];
            let w = if t.len() > 1 && g01 < 0.04 && g12 >= 0.04 {
                [0.3, 0.3, 0.0, 0.4]
            } else if t.len() > 1 && g01 < 0.04 {
                [0.3, 0.2, 0.2, 0.3]
            } else {
                [0.5, 0.0, 0.0, 0.5]
            };
            (v.annotator_id, w[0] * a[0] + w[1] * a[1] + w[2] * a[2] + w[3] * mean)
        })
        .collect();
    reference_rank(scored)
}

pub fn random_probs(rng: &mut impl Rng, c: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..c).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

pub fn random_view(rng: &mut impl Rng, id: u32, c: usize) -> AnnotatorView {
    // coarse grids make exact ties and gap-boundary cases common
    let grid = |rng: &mut dyn rand::RngCore| f64::from(rng.random_range(40..=100u32)) / 100.0;
    AnnotatorView {
        annotator_id: id,
        label_accuracy: (0..c).map(|_| grid(rng)).collect(),
        overall_accuracy: grid(rng),
        current_mood: rng.random_range(1..=10),
        avg_mood: rng.random_range(3..=7),
        fatigue_count: rng.random_range(0..150),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
