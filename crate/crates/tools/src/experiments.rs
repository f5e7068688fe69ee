//! Monte Carlo and ROC harnesses.
//!
//! Every random draw comes from a stream keyed by the master seed and the
//! index of the trial or case, so results do not depend on how the work is
//! split across threads.

use conjunction_core::encounter::{ConjunctionState, TrueState};
use conjunction_core::inference::{assess, ml_ci_pval, p_obs_lr, DEFAULT_ALPHA};
use conjunction_core::numerics::{rng_stream, RngStream};
use conjunction_core::pc::pc_hat;
use conjunction_core::{Error, Result, SymMat2, Vec2};
use rayon::prelude::*;

/// `pc_hat` level below which a conjunction is traditionally dismissed.
pub const PC_DISMISS_THRESHOLD: f64 = 1e-4;
/// Events in a desk-scale ROC run.
pub const DEFAULT_ROC_EVENTS: usize = 2000;
/// Size of the uniform threshold grid used for significance scores.
pub const P_OBS_GRID_POINTS: usize = 1001;
/// Relative distance by which clamped Miss truths sit outside the disk.
pub const MISS_CLAMP_EPS: f64 = 1e-9;

const TAG_CORPUS: u64 = 1;
const TAG_CASE: u64 = 2;
const TAG_ZERO_MISS: u64 = 3;
const TAG_MDR: u64 = 4;

fn stream(seed: u64, tag: u64, index: u64) -> RngStream {
    rng_stream(seed, (tag << 48) | index)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSummary {
    pub n: usize,
    pub alpha: f64,
    pub ndof: u32,
    /// Fraction of trials dismissed by the ellipse-touch `p_obs < alpha`.
    pub empirical_mdr: f64,
    /// Same with the likelihood-ratio significance probability.
    pub empirical_mdr_lr: f64,
    pub miss_gt_hbr_frac: f64,
    pub pc_below_1e4_frac: f64,
}

#[derive(Default, Clone, Copy)]
struct Counts {
    dismissed: usize,
    dismissed_lr: usize,
    outside: usize,
    pc_small: usize,
}

impl Counts {
    fn merge(self, o: Counts) -> Counts {
        Counts {
            dismissed: self.dismissed + o.dismissed,
            dismissed_lr: self.dismissed_lr + o.dismissed_lr,
            outside: self.outside + o.outside,
            pc_small: self.pc_small + o.pc_small,
        }
    }
}

fn count_trial(st: &ConjunctionState, alpha: f64, ndof: u32) -> Result<Counts> {
    let p = ml_ci_pval(st, DEFAULT_ALPHA, ndof)?.p_obs;
    let p_lr = p_obs_lr(st, ndof)?;
    Ok(Counts {
        dismissed: usize::from(p < alpha),
        dismissed_lr: usize::from(p_lr < alpha),
        outside: usize::from(st.x.norm() > st.hbr),
        pc_small: usize::from(pc_hat(st)? < PC_DISMISS_THRESHOLD),
    })
}

fn summarize(n: usize, alpha: f64, ndof: u32, c: Counts) -> McSummary {
    let f = |k: usize| k as f64 / n as f64;
    McSummary {
        n,
        alpha,
        ndof,
        empirical_mdr: f(c.dismissed),
        empirical_mdr_lr: f(c.dismissed_lr),
        miss_gt_hbr_frac: f(c.outside),
        pc_below_1e4_frac: f(c.pc_small),
    }
}

fn check_common(alpha: f64, ndof: u32, n: usize) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument {
            name: "alpha",
            reason: "must lie in [0, 1)",
        });
    }
    if !matches!(ndof, 1 | 2) {
        return Err(Error::UnsupportedDof(ndof));
    }
    if n == 0 {
        return Err(Error::InvalidArgument {
            name: "n",
            reason: "must be positive",
        });
    }
    Ok(())
}

/// Predictions scattered about a zero true miss: how often the prediction
/// lands outside the hard-body disk and how often `pc_hat` falls below
/// 1e−4. `empirical_mdr` uses `p_obs < 1e−4` with two degrees of freedom.
pub fn zero_miss_experiment(sigma: f64, hbr: f64, n: usize, seed: u64) -> Result<McSummary> {
    zero_miss_experiment_with(sigma, hbr, n, seed, PC_DISMISS_THRESHOLD, 2)
}

pub fn zero_miss_experiment_with(sigma: f64, hbr: f64, n: usize, seed: u64, alpha: f64, ndof: u32) -> Result<McSummary> {
    check_common(alpha, ndof, n)?;
    if !(sigma > 0.0 && hbr > 0.0) || !sigma.is_finite() || !hbr.is_finite() {
        return Err(Error::InvalidArgument {
            name: "sigma, hbr",
            reason: "must be positive and finite",
        });
    }
    let cov = SymMat2::isotropic(sigma);
    let counts = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, TAG_ZERO_MISS, i as u64);
            let x = Vec2::new(sigma * rng.normal(), sigma * rng.normal());
            count_trial(&ConjunctionState::new(x, cov, hbr)?, alpha, ndof)
        })
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
    Ok(summarize(n, alpha, ndof, counts))
}

/// Missed-detection rate with the truth at distance `psi0` (normally on the
/// hard-body circle) at a uniformly random clock angle: the fraction of
/// predictions dismissed by `p_obs < alpha`.
pub fn mdr_dof_experiment(psi0: f64, cov: SymMat2, hbr: f64, alpha: f64, ndof: u32, n: usize, seed: u64) -> Result<McSummary> {
    check_common(alpha, ndof, n)?;
    if !(psi0 >= 0.0 && hbr >= 0.0) || !psi0.is_finite() || !hbr.is_finite() {
        return Err(Error::InvalidArgument {
            name: "psi0, hbr",
            reason: "must be non-negative and finite",
        });
    }
    let chol = cov.cholesky()?;
    let counts = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, TAG_MDR, i as u64);
            let xi = Vec2::from_polar(psi0, rng.uniform_in(0.0, core::f64::consts::TAU));
            let x = rng.gaussian2_chol(xi, chol);
            count_trial(&ConjunctionState::new(x, cov, hbr)?, alpha, ndof)
        })
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
    Ok(summarize(n, alpha, ndof, counts))
}

/// An "original" event from which one Hit and one Miss case are built.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseEvent {
    pub id: String,
    pub xi_orig: Vec2,
    pub cov: SymMat2,
    pub hbr: f64,
}

impl BaseEvent {
    /// Use a recorded prediction as the original relative position.
    pub fn from_state(id: impl Into<String>, state: &ConjunctionState) -> Self {
        Self {
            id: id.into(),
            xi_orig: state.x,
            cov: state.cov,
            hbr: state.hbr,
        }
    }
}

/// Synthetic original events: direction uniform, miss distance
/// log-uniform in [0.1, 50] km, covariance standard deviations
/// log-uniform in [0.05, 5] km at a random orientation, hard-body radius
/// uniform in [5, 30] m.
pub fn generate_corpus(n: usize, seed: u64) -> Vec<BaseEvent> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, TAG_CORPUS, i as u64);
            let dir = rng.uniform_in(0.0, core::f64::consts::TAU);
            let dist = rng.log_uniform_in(100.0, 50_000.0);
            let sd_a = rng.log_uniform_in(50.0, 5_000.0);
            let sd_b = rng.log_uniform_in(50.0, 5_000.0);
            let angle = rng.uniform_in(0.0, core::f64::consts::PI);
            let hbr = rng.uniform_in(5.0, 30.0);
            BaseEvent {
                id: format!("synthetic-{i}"),
                xi_orig: Vec2::from_polar(dist, dir),
                cov: SymMat2::from_axes(sd_a.max(sd_b), sd_a.min(sd_b), angle),
                hbr,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Hit,
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledCase {
    pub state: ConjunctionState,
    pub truth: TrueState,
    pub label: Label,
}

/// Hit case: the truth at the origin, the prediction drawn from the event
/// covariance.
pub fn synth_hit(base: &BaseEvent, seed: u64) -> Result<LabeledCase> {
    let mut rng = rng_stream(seed, 0);
    let x = rng.gaussian2(Vec2::ZERO, &base.cov)?;
    Ok(LabeledCase {
        state: ConjunctionState::new(x, base.cov, base.hbr)?,
        truth: TrueState { xi: Vec2::ZERO },
        label: Label::Hit,
    })
}

/// Miss truth: `s·ξ_orig` rescaled by `max(1, hbr/‖s·ξ_orig‖)`, pushed
/// strictly outside the disk if it lands on the boundary.
pub fn miss_truth(base: &BaseEvent, s: f64) -> Result<Vec2> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::InvalidArgument {
            name: "s",
            reason: "must lie in (0, 1]",
        });
    }
    let norm = base.xi_orig.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument {
            name: "xi_orig",
            reason: "original relative position is zero",
        });
    }
    let mut xi = base.xi_orig * s;
    xi = xi * (base.hbr / xi.norm()).max(1.0);
    if xi.norm() <= base.hbr {
        xi = base.xi_orig * (base.hbr * (1.0 + MISS_CLAMP_EPS) / norm);
    }
    Ok(xi)
}

/// Miss case: the truth from [`miss_truth`], the prediction drawn about it.
pub fn synth_miss(base: &BaseEvent, s: f64, seed: u64) -> Result<LabeledCase> {
    let xi = miss_truth(base, s)?;
    let mut rng = rng_stream(seed, 0);
    let x = rng.gaussian2(xi, &base.cov)?;
    Ok(LabeledCase {
        state: ConjunctionState::new(x, base.cov, base.hbr)?,
        truth: TrueState { xi },
        label: Label::Miss,
    })
}

fn case_seed(master: u64, index: u64) -> u64 {
    stream(master, TAG_CASE, index).next_seed()
}

/// One Hit and one Miss case per event, in event order.
pub fn synthesize_cases(bases: &[BaseEvent], s: f64, seed: u64) -> Result<Vec<LabeledCase>> {
    let pairs: Vec<[LabeledCase; 2]> = bases
        .par_iter()
        .enumerate()
        .map(|(i, b)| {
            let i = i as u64;
            Ok([synth_hit(b, case_seed(seed, 2 * i))?, synth_miss(b, s, case_seed(seed, 2 * i + 1))?])
        })
        .collect::<Result<_>>()?;
    Ok(pairs.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    /// Fraction of Hits classified Miss.
    pub mdr: f64,
    /// Fraction of Misses classified Hit.
    pub far: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    PcHat,
    PObs,
    PObsLr,
}

impl ScoreKind {
    pub const ALL: [ScoreKind; 3] = [ScoreKind::PcHat, ScoreKind::PObs, ScoreKind::PObsLr];

    pub fn name(self) -> &'static str {
        match self {
            ScoreKind::PcHat => "pc_hat",
            ScoreKind::PObs => "p_obs",
            ScoreKind::PObsLr => "p_obs_lr",
        }
    }

    pub fn evaluate(self, state: &ConjunctionState, ndof: u32) -> Result<f64> {
        match self {
            ScoreKind::PcHat => pc_hat(state),
            ScoreKind::PObs => Ok(ml_ci_pval(state, DEFAULT_ALPHA, ndof)?.p_obs),
            ScoreKind::PObsLr => p_obs_lr(state, ndof),
        }
    }

    /// Observed values for `pc_hat`, a uniform grid on [0, 1] otherwise.
    pub fn thresholds(self, scores: &[f64]) -> Vec<f64> {
        match self {
            ScoreKind::PcHat => observed_thresholds(scores),
            _ => uniform_grid(P_OBS_GRID_POINTS),
        }
    }
}

pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Zero, every distinct observed score, and one threshold above them all.
pub fn observed_thresholds(scores: &[f64]) -> Vec<f64> {
    let mut t: Vec<f64> = scores.to_vec();
    t.push(0.0);
    t.sort_unstable_by(f64::total_cmp);
    t.dedup();
    let top = *t.last().expect("non-empty");
    t.push(if top < 1.0 { 1.0 } else { f64::INFINITY });
    t
}

fn class_scores(cases: &[LabeledCase], scores: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut hits = Vec::new();
    let mut misses = Vec::new();
    for (c, &s) in cases.iter().zip(scores) {
        match c.label {
            Label::Hit => hits.push(s),
            Label::Miss => misses.push(s),
        }
    }
    if hits.is_empty() || misses.is_empty() {
        return Err(Error::InvalidArgument {
            name: "cases",
            reason: "need at least one Hit and one Miss",
        });
    }
    hits.sort_unstable_by(f64::total_cmp);
    misses.sort_unstable_by(f64::total_cmp);
    Ok((hits, misses))
}

/// ROC points for pre-computed scores; a case is classified Miss when its
/// score is below the threshold.
pub fn roc_from_scores(cases: &[LabeledCase], scores: &[f64], thresholds: &[f64]) -> Result<Vec<RocPoint>> {
    let (hits, misses) = class_scores(cases, scores)?;
    let mut t: Vec<f64> = thresholds.to_vec();
    t.sort_unstable_by(f64::total_cmp);
    Ok(t.into_iter()
        .map(|threshold| {
            let hits_below = hits.partition_point(|&s| s < threshold);
            let misses_below = misses.partition_point(|&s| s < threshold);
            RocPoint {
                threshold,
                mdr: hits_below as f64 / hits.len() as f64,
                far: (misses.len() - misses_below) as f64 / misses.len() as f64,
            }
        })
        .collect())
}

pub fn roc_curve<F>(cases: &[LabeledCase], score: F, thresholds: &[f64]) -> Result<Vec<RocPoint>>
where
    F: Fn(&ConjunctionState) -> Result<f64> + Sync,
{
    let scores: Vec<f64> = cases.par_iter().map(|c| score(&c.state)).collect::<Result<_>>()?;
    roc_from_scores(cases, &scores, thresholds)
}

// Best detection rate 1 − far reachable with mdr ≤ m, as a step function.
struct Envelope {
    mdr: Vec<f64>,
    best: Vec<f64>,
}

impl Envelope {
    fn new(curve: &[RocPoint]) -> Self {
        let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.mdr, 1.0 - p.far)).collect();
        pts.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = Vec::with_capacity(pts.len());
        let mut run = 0.0_f64;
        for &(_, d) in &pts {
            run = run.max(d);
            best.push(run);
        }
        Self {
            mdr: pts.into_iter().map(|p| p.0).collect(),
            best,
        }
    }

    fn at(&self, m: f64) -> f64 {
        match self.mdr.partition_point(|&x| x <= m) {
            0 => 0.0,
            k => self.best[k - 1],
        }
    }
}

/// Area under the (mdr, 1 − far) step envelope.
pub fn roc_auc(curve: &[RocPoint]) -> f64 {
    let env = Envelope::new(curve);
    let mut xs: Vec<f64> = curve.iter().map(|p| p.mdr).chain([0.0, 1.0]).collect();
    xs.sort_unstable_by(f64::total_cmp);
    xs.dedup();
    xs.windows(2).map(|w| (w[1] - w[0]) * env.at(w[0])).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dominance {
    pub dominates: bool,
    /// Largest amount by which `b` exceeds `a`.
    pub max_violation: f64,
    /// Missed-detection rate at which the largest violation occurs.
    pub worst_mdr: f64,
}

/// Whether curve `a` lies on or above curve `b`, comparing the
/// (mdr → 1 − far) step envelopes at every mdr value of either curve.
pub fn dominance_check(a: &[RocPoint], b: &[RocPoint], slack: f64) -> Dominance {
    let (ea, eb) = (Envelope::new(a), Envelope::new(b));
    let (max_violation, worst_mdr) = a
        .iter()
        .chain(b)
        .map(|p| (eb.at(p.mdr) - ea.at(p.mdr), p.mdr))
        .fold((0.0, 0.0), |acc, v| if v.0 > acc.0 { v } else { acc });
    Dominance {
        dominates: max_violation <= slack,
        max_violation,
        worst_mdr,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCurve {
    pub kind: ScoreKind,
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// Balanced Hit/Miss synthesis at shrinkage `s` and the ROC curve of every
/// score.
pub fn roc_experiment(bases: &[BaseEvent], s: f64, seed: u64, ndof: u32) -> Result<Vec<ScoredCurve>> {
    let cases = synthesize_cases(bases, s, seed)?;
    let all: Vec<[f64; 3]> = cases
        .par_iter()
        .map(|c| {
            let a = assess(&c.state, DEFAULT_ALPHA, ndof)?;
            Ok([a.pc_hat, a.p_obs, a.p_obs_lr])
        })
        .collect::<Result<_>>()?;
    ScoreKind::ALL
        .iter()
        .enumerate()
        .map(|(j, &kind)| {
            let scores: Vec<f64> = all.iter().map(|r| r[j]).collect();
            let points = roc_from_scores(&cases, &scores, &kind.thresholds(&scores))?;
            Ok(ScoredCurve {
                kind,
                auc: roc_auc(&points),
                points,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationRow {
    pub angle: f64,
    pub pc_hat: f64,
    pub p_obs: f64,
    pub p_obs_lr: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Relative change from the previous angle; NaN on the first row.
    pub rel_change_pc_hat: f64,
    pub rel_change_p_obs: f64,
}

fn rel_change(prev: f64, cur: f64) -> f64 {
    if prev == cur {
        0.0
    } else {
        (cur - prev).abs() / prev.abs()
    }
}

/// Metrics with the covariance rotated by each angle about the origin of
/// the plane while the prediction stays fixed.
pub fn rotation_sensitivity(state: &ConjunctionState, angles: &[f64], alpha: f64, ndof: u32) -> Result<Vec<RotationRow>> {
    state.validate()?;
    let rows: Vec<RotationRow> = angles
        .par_iter()
        .map(|&angle| {
            let st = state.with_cov_rotated(angle);
            let a = assess(&st, alpha, ndof)?;
            Ok(RotationRow {
                angle,
                pc_hat: a.pc_hat,
                p_obs: a.p_obs,
                p_obs_lr: a.p_obs_lr,
                ci_lower: a.ci.lower,
                ci_upper: a.ci.upper,
                rel_change_pc_hat: f64::NAN,
                rel_change_p_obs: f64::NAN,
            })
        })
        .collect::<Result<_>>()?;
    let mut out = rows.clone();
    for i in 1..out.len() {
        out[i].rel_change_pc_hat = rel_change(rows[i - 1].pc_hat, rows[i].pc_hat);
        out[i].rel_change_p_obs = rel_change(rows[i - 1].p_obs, rows[i].p_obs);
    }
    Ok(out)
}
