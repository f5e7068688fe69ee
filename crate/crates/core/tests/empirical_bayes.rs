use conjunction_core::encounter::ConjunctionState;
use conjunction_core::numerics::{rng_stream, RngStream};
use conjunction_core::priors::{eb_fit, truncated_evidence, untruncated_evidence, ConjunctionSample, ScreeningEllipse, DEFAULT_D_FLOOR};
use conjunction_core::{SymMat2, Vec2};
use rand_distr::{Distribution, Gamma};

const A_TRUE: f64 = 2.0;
const B_TRUE: f64 = 5e-7;

fn generate(n: usize, seed: u64) -> Vec<ConjunctionSample> {
    let mut rng: RngStream = rng_stream(seed, 0);
    let gamma = Gamma::new(A_TRUE, 1.0 / B_TRUE).unwrap();
    (0..n)
        .map(|_| {
            let phi: f64 = gamma.sample(&mut rng);
            let lambda = rng.uniform_in(0.0, std::f64::consts::TAU);
            let d1 = rng.log_uniform_in(200.0, 2000.0);
            let d2 = rng.log_uniform_in(200.0, 2000.0);
            let psi = phi.sqrt();
            ConjunctionSample {
                x1: psi * lambda.cos() + d1 * rng.normal(),
                x2: psi * lambda.sin() + d2 * rng.normal(),
                d1,
                d2,
            }
        })
        .collect()
}

#[test]
fn recovers_generating_prior() {
    let samples = generate(100_000, 17);
    let fit = eb_fit(&samples, DEFAULT_D_FLOOR).unwrap();
    assert_eq!(fit.n_used, 100_000);
    assert_eq!(fit.n_excluded, 0);
    assert!((fit.prior.a / A_TRUE - 1.0).abs() < 0.10, "a = {}", fit.prior.a);
    assert!((fit.prior.b / B_TRUE - 1.0).abs() < 0.10, "b = {}", fit.prior.b);
}

#[test]
fn scale_equivariance_and_order_invariance() {
    let samples = generate(100_000, 18);
    let base = eb_fit(&samples, DEFAULT_D_FLOOR).unwrap().prior;
    for c in [0.25, 3.0, 1000.0] {
        let scaled: Vec<_> = samples
            .iter()
            .map(|s| ConjunctionSample { x1: s.x1 * c, x2: s.x2 * c, d1: s.d1 * c, d2: s.d2 * c })
            .collect();
        let fit = eb_fit(&scaled, 0.0).unwrap().prior;
        assert!((fit.a / base.a - 1.0).abs() < 0.02);
        assert!((fit.b * c * c / base.b - 1.0).abs() < 0.02);
    }
    let mut reversed = samples.clone();
    reversed.reverse();
    let r = eb_fit(&reversed, DEFAULT_D_FLOOR).unwrap().prior;
    assert!((r.a / base.a - 1.0).abs() < 1e-10);
    assert!((r.b / base.b - 1.0).abs() < 1e-10);
}

#[test]
fn evidence_ratio_tends_to_one_as_covariance_shrinks() {
    let slice = ScreeningEllipse::new(10_000.0, 4_000.0, 0.2, Vec2::ZERO).unwrap();
    let base = untruncated_evidence(&slice).unwrap();
    let x = Vec2::new(6_000.0, 1_500.0);
    let mut prev_gap = f64::INFINITY;
    for sd in [3000.0, 1500.0, 800.0, 400.0, 200.0] {
        let st = ConjunctionState::new(x, SymMat2::from_axes(sd, 0.4 * sd, 1.0), 10.0).unwrap();
        let gap = 1.0 - truncated_evidence(&st, &slice, 1e-11).unwrap() / base;
        assert!(gap >= -1e-9 && gap <= prev_gap + 1e-9, "sd {sd}: {gap}");
        prev_gap = gap;
    }
    assert!(prev_gap < 1e-6);
}
