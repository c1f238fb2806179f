use dsfusion_core::boe::{build_boe, ConfusionMatrix, ScoreMatrix, WeightScheme, WeightVector};
use dsfusion_core::fusion::{credibility_degree, fuse, support_degree, PipelineConfig};
use dsfusion_core::mass::{combine_many, FocalSet, Frame, MassFunction};
use dsfusion_core::metrics::{
    bjs_divergence, deng_entropy, disagreement, evidence_distance, shannon_entropy,
    DisagreementConfig, DistanceWeighting,
};
use dsfusion_core::Error;
use proptest::prelude::*;

/// Random mass function: frame of `2..=3` elements, up to 4 focal sets.
fn arb_bba_on(size: usize) -> impl Strategy<Value = MassFunction> {
    let max_bits = (1u64 << size) - 1;
    prop::collection::vec((1..=max_bits, 0.01f64..1.0), 1..=4).prop_map(move |pairs| {
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        let frame = Frame::indexed(size).unwrap();
        MassFunction::new(
            frame,
            pairs.into_iter().map(|(b, w)| (FocalSet::from_bits(b), w / total)),
        )
        .unwrap()
    })
}

fn arb_pair() -> impl Strategy<Value = (MassFunction, MassFunction)> {
    (2usize..=3).prop_flat_map(|n| (arb_bba_on(n), arb_bba_on(n)))
}

fn arb_triple() -> impl Strategy<Value = (MassFunction, MassFunction, MassFunction)> {
    (2usize..=3).prop_flat_map(|n| (arb_bba_on(n), arb_bba_on(n), arb_bba_on(n)))
}

/// Dense Dempster oracle: masses indexed by bitmask, every pair enumerated.
fn oracle_combine(a: &MassFunction, b: &MassFunction) -> Option<Vec<f64>> {
    let n = 1usize << a.frame().len();
    let dense = |m: &MassFunction| -> Vec<f64> {
        (0..n).map(|bits| m.mass(FocalSet::from_bits(bits as u64))).collect()
    };
    let (da, db) = (dense(a), dense(b));
    let mut out = vec![0.0; n];
    let mut k = 0.0;
    for x in 1..n {
        for y in 1..n {
            let p = da[x] * db[y];
            if x & y == 0 {
                k += p;
            } else {
                out[x & y] += p;
            }
        }
    }
    if k >= 1.0 - 1e-12 {
        return None;
    }
    Some(out.into_iter().map(|v| v / (1.0 - k)).collect())
}

fn max_diff(a: &MassFunction, b: &MassFunction) -> f64 {
    let n = 1u64 << a.frame().len();
    (1..n)
        .map(|bits| (a.mass(FocalSet::from_bits(bits)) - b.mass(FocalSet::from_bits(bits))).abs())
        .fold(0.0, f64::max)
}

/// BJS through its two-sum form.
fn bjs_two_sum(a: &MassFunction, b: &MassFunction, base: f64) -> f64 {
    let n = 1u64 << a.frame().len();
    let mut acc = 0.0;
    for bits in 1..n {
        let s = FocalSet::from_bits(bits);
        let (x, y) = (a.mass(s), b.mass(s));
        if x > 0.0 {
            acc += x * (2.0 * x / (x + y)).ln();
        }
        if y > 0.0 {
            acc += y * (2.0 * y / (x + y)).ln();
        }
    }
    0.5 * acc / base.ln()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn combine_matches_oracle((a, b) in arb_pair()) {
        match (a.combine(&b), oracle_combine(&a, &b)) {
            (Ok(m), Some(dense)) => {
                for (bits, want) in dense.iter().enumerate().skip(1) {
                    let got = m.mass(FocalSet::from_bits(bits as u64));
                    prop_assert!((got - want).abs() < 1e-9, "{bits}: {got} vs {want}");
                }
                prop_assert!((m.sum() - 1.0).abs() < 1e-9);
            }
            (Err(Error::TotalConflict { .. }), None) => {}
            (got, want) => prop_assert!(false, "{got:?} vs {want:?}"),
        }
    }

    #[test]
    fn combine_is_commutative((a, b) in arb_pair()) {
        prop_assert_eq!(a.combine(&b), b.combine(&a));
    }

    #[test]
    fn combine_is_associative((a, b, c) in arb_triple()) {
        let left = a.combine(&b).and_then(|ab| ab.combine(&c));
        let right = b.combine(&c).and_then(|bc| a.combine(&bc));
        if let (Ok(l), Ok(r)) = (&left, &right) {
            prop_assert!(max_diff(l, r) < 1e-9);
        }
    }

    #[test]
    fn vacuous_is_identity(a in (2usize..=3).prop_flat_map(arb_bba_on)) {
        let v = MassFunction::vacuous(a.frame().clone());
        prop_assert!(max_diff(&a.combine(&v).unwrap(), &a) < 1e-12);
    }

    #[test]
    fn combine_many_order_independent((a, b, c) in arb_triple()) {
        let x = combine_many(&[a.clone(), b.clone(), c.clone()]);
        let y = combine_many(&[c, a, b]);
        if let (Ok(x), Ok(y)) = (x, y) {
            prop_assert!(max_diff(&x, &y) < 1e-9);
        }
    }

    #[test]
    fn belief_plausibility_bounds(a in (2usize..=3).prop_flat_map(arb_bba_on)) {
        let frame = a.frame().clone();
        for bits in 1..(1u64 << frame.len()) {
            let s = FocalSet::from_bits(bits);
            let bel = a.belief(s).unwrap();
            let pl = a.plausibility(s).unwrap();
            prop_assert!(bel <= pl + 1e-15);
            let bel_c = a.belief(frame.complement(s)).unwrap();
            prop_assert!((pl - (1.0 - bel_c)).abs() < 1e-12);
            for sup in 1..(1u64 << frame.len()) {
                let t = FocalSet::from_bits(sup);
                if s.is_subset_of(t) {
                    prop_assert!(bel <= a.belief(t).unwrap() + 1e-15);
                }
            }
        }
    }

    #[test]
    fn deng_equals_shannon_on_singletons(
        w in prop::collection::vec(0.0f64..1.0, 2..=6),
        base in prop_oneof![Just(2.0), Just(10.0), Just(std::f64::consts::E)],
    ) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 0.0);
        let frame = Frame::indexed(w.len()).unwrap();
        let m = MassFunction::new(
            frame,
            w.iter().enumerate().map(|(k, v)| (FocalSet::singleton(k), v / total)),
        ).unwrap();
        let d = deng_entropy(&m, base).unwrap();
        let h = shannon_entropy(&m, base).unwrap();
        prop_assert!((d - h).abs() < 1e-12);
    }

    #[test]
    fn bjs_symmetric_and_two_forms_agree((a, b) in arb_pair()) {
        let ab = bjs_divergence(&a, &b, 2.0).unwrap();
        let ba = bjs_divergence(&b, &a, 2.0).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - bjs_two_sum(&a, &b, 2.0)).abs() < 1e-9);
        prop_assert_eq!(bjs_divergence(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_is_symmetric((a, b) in arb_pair()) {
        for w in [DistanceWeighting::Identity, DistanceWeighting::Jaccard] {
            let ab = evidence_distance(&a, &b, w).unwrap();
            let ba = evidence_distance(&b, &a, w).unwrap();
            prop_assert!((ab - ba).abs() < 1e-15);
            prop_assert!(ab.is_finite() && ab >= 0.0);
            prop_assert_eq!(evidence_distance(&a, &a, w).unwrap(), 0.0);
        }
    }

    #[test]
    fn jaccard_form_is_psd(diff in prop::collection::vec(-1.0f64..1.0, 7)) {
        // every non-empty subset of a 3-element frame
        let sets: Vec<FocalSet> = (1u64..8).map(FocalSet::from_bits).collect();
        let mut q = 0.0;
        for (i, a) in sets.iter().enumerate() {
            for (j, b) in sets.iter().enumerate() {
                q += diff[i] * a.jaccard(*b) * diff[j];
            }
        }
        prop_assert!(q >= -1e-12);
    }

    #[test]
    fn disagreement_in_unit_interval(
        ms in (2usize..=3).prop_flat_map(|n| prop::collection::vec(arb_bba_on(n), 2..=5)),
        sigma in 0.05f64..5.0,
    ) {
        let cfg = DisagreementConfig::new(sigma).unwrap();
        for w in [DistanceWeighting::Identity, DistanceWeighting::Jaccard] {
            let d = disagreement(&ms, &cfg, w).unwrap();
            for (x, sw_q) in d.degrees.iter().zip(&d.scatter_without) {
                prop_assert!(*x > 0.0 && *x < 1.0);
                // ordering of the degree follows the ordering of SW - SW_q
                if (d.scatter - sw_q).abs() > 1e-9 {
                    prop_assert_eq!(*x > 0.5, d.scatter > *sw_q);
                }
            }
        }
    }

    #[test]
    fn boe_masses_bounded_and_monotone(
        rows in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 3), 1..8),
        w in prop::collection::vec(0.0f64..=1.0, 3),
        bump in 0.0f64..1.0,
    ) {
        let classes: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let scores = ScoreMatrix::new("c", classes, rows).unwrap();
        let weights = WeightVector::new(WeightScheme::W2, w.clone()).unwrap();
        let boe = build_boe(&scores, &weights).unwrap();
        let higher: Vec<f64> = w.iter().map(|v| v + (1.0 - v) * bump).collect();
        let boe_hi = build_boe(&scores, &WeightVector::new(WeightScheme::W2, higher).unwrap()).unwrap();
        let plain = build_boe(&scores, &WeightVector::ones(3)).unwrap();
        for i in 0..scores.n_samples() {
            let m = &boe.per_sample[i];
            prop_assert!((m.sum() - 1.0).abs() < 1e-9);
            for k in 0..3 {
                let s = FocalSet::singleton(k);
                prop_assert!(m.mass(s) <= scores.row(i)[k] + 1e-15);
                prop_assert!(m.mass(s) <= boe_hi.per_sample[i].mass(s) + 1e-15);
                prop_assert!((plain.per_sample[i].mass(s) - scores.row(i)[k]).abs() < 1e-15);
            }
            prop_assert!(plain.per_sample[i].ignorance() < 1e-9);
        }
    }

    #[test]
    fn confusion_metrics_match_recount(
        pairs in prop::collection::vec((0usize..3, 0usize..3), 1..60),
    ) {
        let pred: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        let truth: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        let cm = ConfusionMatrix::from_predictions(3, &pred, &truth).unwrap();
        let correct = pairs.iter().filter(|(p, t)| p == t).count();
        prop_assert_eq!(cm.accuracy(), correct as f64 / pairs.len() as f64);
        let pre = cm.precision();
        let rec = cm.recall();
        for k in 0..3 {
            let hits = pairs.iter().filter(|(p, t)| *p == k && *t == k).count() as f64;
            let true_k = pairs.iter().filter(|(_, t)| *t == k).count() as f64;
            let pred_k = pairs.iter().filter(|(p, _)| *p == k).count() as f64;
            let want_pre = if true_k > 0.0 { hits / true_k } else { 0.0 };
            let want_rec = if pred_k > 0.0 { hits / pred_k } else { 0.0 };
            prop_assert_eq!(pre[k], want_pre);
            prop_assert_eq!(rec[k], want_rec);
        }
    }

    #[test]
    fn fusion_is_permutation_invariant(
        ms in prop::collection::vec(arb_bba_on(3), 2..=5),
        seed in any::<u64>(),
    ) {
        let cfg = PipelineConfig::default();
        let mut shuffled = ms.clone();
        // deterministic Fisher-Yates from the seed
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state % (i as u64 + 1)) as usize);
        }
        match (fuse(&ms, &cfg), fuse(&shuffled, &cfg)) {
            (Ok(a), Ok(b)) => prop_assert!(max_diff(&a.fused, &b.fused) < 1e-9),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn credibility_ignores_support_scale(
        ms in prop::collection::vec(arb_bba_on(2), 2..=5),
        scale in 0.01f64..100.0,
    ) {
        let cfg = PipelineConfig::default();
        let sd = support_degree(&ms, &cfg).unwrap();
        prop_assert!((sd.normalized.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let scaled: Vec<f64> = sd.normalized.iter().map(|v| v * scale).collect();
        let a = credibility_degree(&ms, &sd.normalized, &cfg).unwrap();
        let b = credibility_degree(&ms, &scaled, &cfg).unwrap();
        for (x, y) in a.normalized.iter().zip(&b.normalized) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn averaged_evidence_is_a_mass_function(ms in prop::collection::vec(arb_bba_on(3), 2..=5)) {
        let r = fuse(&ms, &PipelineConfig::default());
        if let Ok(r) = r {
            let d = r.diagnostics.unwrap();
            let total: f64 = d.weighted.iter().flatten().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!((r.fused.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_evidences_fuse_to_self_combination(m in arb_bba_on(3), n in 2usize..=5) {
        let ms = vec![m.clone(); n];
        let r = fuse(&ms, &PipelineConfig::default());
        let expected = combine_many(&ms);
        match (r, expected) {
            (Ok(r), Ok(e)) => {
                let d = r.diagnostics.unwrap();
                for c in &d.credibility_norm {
                    prop_assert!((c - 1.0 / n as f64).abs() < 1e-12);
                }
                prop_assert!(max_diff(&r.fused, &e) < 1e-9);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}
