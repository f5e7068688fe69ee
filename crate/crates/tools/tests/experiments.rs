use conjunction_core::encounter::ConjunctionState;
use conjunction_core::inference::assess;
use conjunction_core::{SymMat2, Vec2};
use conjunction_tools::experiments::{
    generate_corpus, roc_curve, roc_experiment, rotation_sensitivity, synth_hit, synth_miss, synthesize_cases,
    zero_miss_experiment, BaseEvent, Label, ScoreKind,
};

fn base() -> BaseEvent {
    BaseEvent {
        id: "e".into(),
        xi_orig: Vec2::new(3000.0, -1200.0),
        cov: SymMat2::from_axes(400.0, 90.0, 0.7),
        hbr: 15.0,
    }
}

#[test]
fn hit_predictions_centred_on_zero() {
    let b = base();
    let n = 10_000;
    let (mut s1, mut s2) = (0.0, 0.0);
    for seed in 0..n {
        let c = synth_hit(&b, seed).unwrap();
        assert_eq!(c.label, Label::Hit);
        assert_eq!(c.truth.xi, Vec2::ZERO);
        s1 += c.state.x.x;
        s2 += c.state.x.y;
    }
    let nf = n as f64;
    assert!((s1 / nf).abs() < 3.0 * (b.cov.d11 / nf).sqrt());
    assert!((s2 / nf).abs() < 3.0 * (b.cov.d22 / nf).sqrt());
    assert_eq!(synth_hit(&b, 5).unwrap(), synth_hit(&b, 5).unwrap());
}

#[test]
fn miss_truth_always_outside() {
    let corpus = generate_corpus(500, 3);
    for s in [1.0, 0.1, 1e-3, 1e-6] {
        for (i, b) in corpus.iter().enumerate() {
            let c = synth_miss(b, s, i as u64).unwrap();
            assert_eq!(c.label, Label::Miss);
            assert!(c.truth.xi.norm() > b.hbr);
        }
    }
    let b = base();
    assert_eq!(synth_miss(&b, 1.0, 0).unwrap().truth.xi, b.xi_orig);
}

#[test]
fn synthesis_balanced_and_reproducible() {
    let corpus = generate_corpus(300, 9);
    let cases = synthesize_cases(&corpus, 0.01, 4).unwrap();
    assert_eq!(cases.len(), 600);
    for pair in cases.chunks(2) {
        assert_eq!(pair[0].label, Label::Hit);
        assert_eq!(pair[1].label, Label::Miss);
    }
    assert_eq!(cases, synthesize_cases(&corpus, 0.01, 4).unwrap());
    assert_ne!(cases, synthesize_cases(&corpus, 0.01, 5).unwrap());
}

#[test]
fn corpus_within_documented_ranges() {
    for b in generate_corpus(2000, 11) {
        let d = b.xi_orig.norm();
        assert!((100.0 * (1.0 - 1e-12)..=50_000.0 * (1.0 + 1e-12)).contains(&d));
        assert!((5.0..=30.0).contains(&b.hbr));
        let tr = b.cov.trace();
        let det = b.cov.det();
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        let (l1, l2) = (0.5 * tr - disc, 0.5 * tr + disc);
        assert!(l1.sqrt() >= 50.0 * (1.0 - 1e-9) && l2.sqrt() <= 5000.0 * (1.0 + 1e-9));
    }
}

#[test]
fn roc_curves_monotone() {
    let corpus = generate_corpus(400, 2);
    for curve in roc_experiment(&corpus, 0.01, 2, 2).unwrap() {
        for w in curve.points.windows(2) {
            assert!(w[0].threshold <= w[1].threshold);
            assert!(w[0].mdr <= w[1].mdr, "{:?}", curve.kind);
            assert!(w[0].far >= w[1].far, "{:?}", curve.kind);
        }
        let first = curve.points.first().unwrap();
        assert_eq!((first.mdr, first.far), (0.0, 1.0));
        if curve.kind == ScoreKind::PcHat {
            let last = curve.points.last().unwrap();
            assert_eq!((last.mdr, last.far), (1.0, 0.0));
        }
    }
}

#[test]
fn roc_curve_with_custom_score_matches_experiment() {
    let corpus = generate_corpus(200, 6);
    let cases = synthesize_cases(&corpus, 0.05, 6).unwrap();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let direct = roc_curve(&cases, |st: &ConjunctionState| Ok(assess(st, 0.01, 2)?.p_obs), &grid).unwrap();
    let via = roc_experiment(&corpus, 0.05, 6, 2).unwrap();
    let p_obs = via.iter().find(|c| c.kind == ScoreKind::PObs).unwrap();
    for p in &direct {
        let q = p_obs.points.iter().find(|q| q.threshold == p.threshold).unwrap();
        assert_eq!((p.mdr, p.far), (q.mdr, q.far));
    }
}

#[test]
fn separation_makes_problem_harder() {
    let corpus = generate_corpus(1000, 1);
    let mut prev = [f64::INFINITY; 3];
    for s in [0.1, 0.05, 0.01, 0.001] {
        let curves = roc_experiment(&corpus, s, 1, 2).unwrap();
        for (j, c) in curves.iter().enumerate() {
            assert!(c.auc <= prev[j] + 1e-12, "{:?} at s = {s}: {} after {}", c.kind, c.auc, prev[j]);
            prev[j] = c.auc;
        }
    }
}

#[test]
fn rotation_isotropic_constant_and_half_turn_periodic() {
    let iso = ConjunctionState::new(Vec2::new(250.0, 40.0), SymMat2::isotropic(120.0), 10.0).unwrap();
    let angles: Vec<f64> = (0..12).map(|i| i as f64 * 0.5).collect();
    let rows = rotation_sensitivity(&iso, &angles, 0.01, 2).unwrap();
    for r in &rows[1..] {
        assert!((r.pc_hat / rows[0].pc_hat - 1.0).abs() < 1e-9);
        assert!((r.p_obs / rows[0].p_obs - 1.0).abs() < 1e-9);
    }

    let st = ConjunctionState::new(Vec2::new(600.0, -150.0), SymMat2::from_axes(900.0, 60.0, 0.2), 12.0).unwrap();
    let rows = rotation_sensitivity(&st, &[0.0, std::f64::consts::PI], 0.01, 2).unwrap();
    for (a, b) in [(rows[0].pc_hat, rows[1].pc_hat), (rows[0].p_obs, rows[1].p_obs), (rows[0].ci_upper, rows[1].ci_upper)] {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{a} vs {b}");
    }
}

#[test]
fn rotation_sensitivity_comparable_for_elongated_covariance() {
    let step = 5f64.to_radians();
    for orientation in [0.3, 0.36, 0.5] {
        let cov = SymMat2::from_axes(2000.0, 20.0, orientation);
        let st = ConjunctionState::new(Vec2::new(800.0, 300.0), cov, 10.0).unwrap();
        let rows = rotation_sensitivity(&st, &[-step, 0.0, step], 0.01, 2).unwrap();
        assert!(rows[0].rel_change_pc_hat.is_nan());
        for r in &rows[1..] {
            let ratio = r.rel_change_pc_hat / r.rel_change_p_obs;
            assert!(ratio > 0.1 && ratio < 10.0, "orientation {orientation}, angle {}: {ratio}", r.angle);
        }
    }
}

#[test]
fn zero_miss_is_reproducible_and_seed_sensitive() {
    let a = zero_miss_experiment(100.0, 10.0, 5000, 1).unwrap();
    assert_eq!(a, zero_miss_experiment(100.0, 10.0, 5000, 1).unwrap());
    assert_ne!(a, zero_miss_experiment(100.0, 10.0, 5000, 2).unwrap());
    assert!(zero_miss_experiment(0.0, 10.0, 10, 1).is_err());
    assert!(zero_miss_experiment(100.0, 10.0, 0, 1).is_err());
}
