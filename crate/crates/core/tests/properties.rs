mod common;

use annosel::behavior::{
    effective_accuracy, fatigue_level, mood_trajectory, update_history, FatigueLedger, MoodShapes, Observation,
    SimParams,
};
use annosel::dataio::moving_average;
use annosel::learner::{entropy, query_type, ProbVector, QueryContext};
use annosel::population::{generate_batch, Annotator, BatchConfig, Chronotype, PSEUDO_HISTORY};
use annosel::selector::{
    optimal_weights, recommend_optimal, recommend_rs, recommend_rs_with_threshold, AnnotatorView, TestMode,
    UncertaintyStats,
};
use common::{random_probs, random_view, reference_optimal, reference_rs, rng};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn views(seed: u64, n: usize, c: usize) -> Vec<AnnotatorView> {
    let mut r = rng(seed);
    (0..n as u32).map(|id| random_view(&mut r, id, c)).collect()
}

fn ctx(seed: u64, c: usize) -> QueryContext {
    QueryContext::from_probs(0, ProbVector::new(random_probs(&mut rng(seed), c)).unwrap())
}

fn warm_stats(seed: u64) -> UncertaintyStats {
    let mut r = rng(seed);
    let values: Vec<f64> = (0..20).map(|_| r.random::<f64>() * 2.0).collect();
    UncertaintyStats::from_values(&values)
}

fn sim(penalty_high: bool) -> SimParams {
    SimParams {
        fatigue_penalty: if penalty_high { 0.04 } else { 0.02 },
        ..SimParams::default()
    }
}

proptest! {
    #[test]
    fn entropy_bounded_by_log_c(w in prop::collection::vec(0.0f64..10.0, 2..12)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let p = ProbVector::normalized(w);
        let h = entropy(&p);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (p.len() as f64).log2() + 1e-9);
    }

    #[test]
    fn normalized_sums_to_one(w in prop::collection::vec(0.0f64..10.0, 2..12)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-6);
        let p = ProbVector::normalized(w);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn query_type_nonempty_and_above_uniform(seed in any::<u64>(), c in 2usize..11) {
        let p = random_probs(&mut rng(seed), c);
        let t = query_type(&p);
        prop_assert!(!t.is_empty());
        if t.len() > 1 || p[t[0]] > 1.0 / c as f64 {
            prop_assert!(t.iter().all(|&i| p[i] > 1.0 / c as f64));
        }
        prop_assert!(t.windows(2).all(|w| p[w[0]] >= p[w[1]]));
    }

    #[test]
    fn rs_matches_reference(seed in any::<u64>(), n in 1usize..=10, c in 2usize..=8, mode in 0usize..3) {
        let mode = TestMode::ALL[mode];
        let vs = views(seed, n, c);
        let q = ctx(seed ^ 1, c);
        let stats = warm_stats(seed ^ 2);
        let sim = sim(seed % 2 == 0);
        let got = recommend_rs(&q, &vs, mode, &sim, &stats).unwrap();
        let want = reference_rs(&q.probs, q.uncertainty, &vs, mode, &sim, stats.count, stats.threshold());
        prop_assert_eq!(got, want);
    }

    #[test]
    fn optimal_matches_reference(seed in any::<u64>(), n in 1usize..=10, c in 2usize..=8) {
        let vs = views(seed, n, c);
        let q = ctx(seed ^ 1, c);
        let sim = sim(seed % 2 == 1);
        prop_assert_eq!(recommend_optimal(&q, &vs, &sim).unwrap(), reference_optimal(&q.probs, &vs, &sim));
    }

    #[test]
    fn rankings_ignore_input_order(seed in any::<u64>(), n in 1usize..=10, c in 2usize..=6) {
        let vs = views(seed, n, c);
        let mut shuffled = vs.clone();
        shuffled.shuffle(&mut rng(seed ^ 7));
        let q = ctx(seed ^ 3, c);
        let stats = warm_stats(seed);
        let sim = SimParams::default();
        for mode in [TestMode::AccuracyOnly, TestMode::AccuracyMood, TestMode::AccuracyMoodFatigue] {
            prop_assert_eq!(
                recommend_rs(&q, &vs, mode, &sim, &stats).unwrap(),
                recommend_rs(&q, &shuffled, mode, &sim, &stats).unwrap()
            );
        }
        prop_assert_eq!(recommend_optimal(&q, &vs, &sim).unwrap(), recommend_optimal(&q, &shuffled, &sim).unwrap());
    }

    #[test]
    fn test1_blind_to_mood_and_fatigue(seed in any::<u64>(), n in 1usize..=10, c in 2usize..=6) {
        let vs = views(seed, n, c);
        let mut r = rng(seed ^ 11);
        let perturbed: Vec<AnnotatorView> = vs
            .iter()
            .map(|v| AnnotatorView {
                current_mood: r.random_range(1..=10),
                avg_mood: r.random_range(3..=7),
                fatigue_count: r.random_range(0..500),
                ..v.clone()
            })
            .collect();
        let q = ctx(seed ^ 5, c);
        let stats = warm_stats(seed);
        let sim = SimParams::default();
        let a = recommend_rs(&q, &vs, TestMode::AccuracyOnly, &sim, &stats).unwrap();
        let b = recommend_rs(&q, &perturbed, TestMode::AccuracyOnly, &sim, &stats).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn test2_blind_to_fatigue(seed in any::<u64>(), n in 1usize..=10, c in 2usize..=6) {
        let vs = views(seed, n, c);
        let mut r = rng(seed ^ 13);
        let perturbed: Vec<AnnotatorView> = vs
            .iter()
            .map(|v| AnnotatorView { fatigue_count: r.random_range(0..500), ..v.clone() })
            .collect();
        let q = ctx(seed ^ 5, c);
        let stats = warm_stats(seed);
        let sim = SimParams::default();
        let a = recommend_rs(&q, &vs, TestMode::AccuracyMood, &sim, &stats).unwrap();
        let b = recommend_rs(&q, &perturbed, TestMode::AccuracyMood, &sim, &stats).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn scaling_estimates_keeps_test1_winner(seed in any::<u64>(), n in 2usize..=10, c in 2usize..=6, k in 0.05f64..=1.0) {
        let vs = views(seed, n, c);
        let scaled: Vec<AnnotatorView> = vs
            .iter()
            .map(|v| AnnotatorView {
                overall_accuracy: v.overall_accuracy * k,
                label_accuracy: v.label_accuracy.iter().map(|a| a * k).collect(),
                ..v.clone()
            })
            .collect();
        let q = ctx(seed ^ 9, c);
        let sim = SimParams::default();
        // a fixed count/threshold pins the weight branch
        let a = recommend_rs_with_threshold(&q, &vs, TestMode::AccuracyOnly, &sim, 0, 0.0).unwrap();
        let b = recommend_rs_with_threshold(&q, &scaled, TestMode::AccuracyOnly, &sim, 0, 0.0).unwrap();
        let winner = a.iter().find(|s| s.annotator_id == b[0].annotator_id).unwrap();
        prop_assert!((winner.score - a[0].score).abs() <= 1e-12 * a[0].score.max(1.0));
    }

    #[test]
    fn optimal_branches_exclusive(t in 1usize..6, a0 in 0.0f64..1.0, d1 in 0.0f64..0.1, d2 in 0.0f64..0.1) {
        let top = [a0, (a0 - d1).max(0.0), (a0 - d1 - d2).max(0.0)];
        let w = optimal_weights(t, &top);
        let close01 = top[0] - top[1] < 0.04;
        let close12 = top[1] - top[2] < 0.04;
        let a = t > 1 && close01 && !close12;
        let b = t > 1 && close01 && close12;
        prop_assert_eq!(u8::from(a) + u8::from(b) + u8::from(!a && !b), 1);
        let expected = if a { [0.3, 0.3, 0.0, 0.4] } else if b { [0.3, 0.2, 0.2, 0.3] } else { [0.5, 0.0, 0.0, 0.5] };
        prop_assert_eq!(w, expected);
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn welford_matches_batch(values in prop::collection::vec(0.0f64..4.0, 1..400)) {
        let s = UncertaintyStats::from_values(&values);
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let m2: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        prop_assert!((s.mean - mean).abs() < 1e-9);
        prop_assert!((s.m2 - m2).abs() < 1e-9 * m2.max(1.0));
        prop_assert_eq!(s.count, values.len() as u64);
    }

    #[test]
    fn fatigue_level_monotone_and_periodic(n in 0u32..5000, start in 1u32..100, step in 1u32..50) {
        let p = SimParams { fatigue_start: start, fatigue_step: step, ..SimParams::default() };
        prop_assert!(fatigue_level(n + 1, &p) >= fatigue_level(n, &p));
        if n >= start {
            prop_assert_eq!(fatigue_level(n + step, &p), fatigue_level(n, &p) + 1);
        }
        prop_assert_eq!(fatigue_level(n, &p), common::reference_fatigue_level(n, &p));
    }

    #[test]
    fn effective_accuracy_shape(base in 0.0f64..=1.0, mood in 1u8..10, avg in 3u8..=7, lvl in 0u32..10) {
        let p = sim(true);
        let here = effective_accuracy(base, mood, avg, lvl, &p);
        prop_assert!((0.0..=1.0).contains(&here));
        prop_assert!(effective_accuracy(base, mood, avg, lvl + 1, &p) <= here);
        let up = effective_accuracy(base, mood + 1, avg, lvl, &p);
        prop_assert!(up >= here);
        if base > 0.0 && here > 0.0 && up < 1.0 {
            prop_assert!(up > here);
        }
    }

    #[test]
    fn moods_stay_in_range_and_keep_shape(seed in any::<u64>(), avg in 3u8..=7, kind in 0usize..4) {
        let chronotype = Chronotype::ALL[kind];
        let mut a = generate_batch(&BatchConfig { n_annotators: 1, ..BatchConfig::new(0, seed) }).unwrap().remove(0);
        a.chronotype = chronotype;
        a.avg_mood = avg;
        let mut r = rng(seed);
        for _ in 0..50 {
            let [m1, m2, m3] = mood_trajectory(&a, &MoodShapes::default(), &mut r).0;
            prop_assert!([m1, m2, m3].iter().all(|m| (1..=10).contains(m)));
            match chronotype {
                Chronotype::Lion => prop_assert!(m2 >= m3),
                Chronotype::Dolphin => prop_assert!(m3 >= m1),
                _ => prop_assert!(m2.min(m3) >= m1.min(10)),
            }
        }
    }

    #[test]
    fn history_estimates_stay_valid(seed in any::<u64>(), obs in prop::collection::vec((0u32..4, any::<bool>()), 0..300)) {
        let mut a: Annotator = generate_batch(&BatchConfig { n_annotators: 1, n_labels: 4, ..BatchConfig::new(0, seed) })
            .unwrap()
            .remove(0);
        let base = a.base_label_accuracy.clone();
        let day: Vec<Observation> = obs.iter().map(|&(label, correct)| Observation { label, correct }).collect();
        update_history(&mut a, &day);
        prop_assert_eq!(&a.base_label_accuracy, &base);
        for (l, h) in a.history.iter().enumerate() {
            prop_assert!(h.total >= PSEUDO_HISTORY);
            prop_assert!((0.0..=1.0).contains(&a.label_estimate(l)));
            let added = obs.iter().filter(|o| o.0 as usize == l).count() as u32;
            prop_assert_eq!(h.total, PSEUDO_HISTORY + added);
        }
        prop_assert!((0.0..=1.0).contains(&a.overall_estimate()));
    }

    #[test]
    fn batches_are_pure_and_valid(seed in any::<u64>(), n in 1usize..40) {
        let cfg = BatchConfig { n_annotators: n, ..BatchConfig::new(1, seed) };
        let a = generate_batch(&cfg).unwrap();
        prop_assert_eq!(&a, &generate_batch(&cfg).unwrap());
        prop_assert_eq!(a.len(), n);
        for (i, x) in a.iter().enumerate() {
            prop_assert_eq!(x.id, i as u32);
            prop_assert!((3..=7).contains(&x.avg_mood));
            prop_assert!((0.0..=1.0).contains(&x.base_overall_accuracy));
            prop_assert!(x.base_label_accuracy.iter().all(|v| (0.0..=1.0).contains(v)));
            prop_assert!(x.history.iter().all(|h| h.total == PSEUDO_HISTORY && h.correct <= h.total));
        }
    }

    #[test]
    fn ledger_window_stays_within_day(events in prop::collection::vec((0u32..3, 0u32..3, 0u32..3), 0..200)) {
        let mut ledger = FatigueLedger::new();
        for &(a, d, p) in &events {
            ledger.record(a, d, p);
        }
        for a in 0..3 {
            for d in 0..3 {
                for p in 0..3u32 {
                    let want = events
                        .iter()
                        .filter(|e| e.0 == a && e.1 == d && (e.2 == p || (p > 0 && e.2 == p - 1)))
                        .count() as u32;
                    prop_assert_eq!(ledger.window_count(a, d, p), want);
                }
            }
        }
        prop_assert_eq!(ledger.total(), events.len() as u64);
    }

    #[test]
    fn moving_average_of_constant(v in -5.0f64..5.0, len in 1usize..100, window in 1usize..40) {
        let s = moving_average(&vec![v; len], window);
        prop_assert_eq!(s, vec![v; len]);
    }
}
