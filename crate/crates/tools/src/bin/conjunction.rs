use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use conjunction_core::encounter::{project_to_encounter_plane, ConjunctionState};
use conjunction_core::inference::{assess, DEFAULT_ALPHA, DEFAULT_NDOF};
use conjunction_core::pc::{dilution_curve, log_grid};
use conjunction_core::priors::{
    eb_fit, gamma_psi_moments, prior_hit_probability, slice_mass, untruncated_evidence, ConjunctionSample,
    ScreeningEllipse,
};
use conjunction_core::numerics::DEFAULT_DISK_REL_TOL;
use conjunction_core::{SymMat2, Vec2};
use conjunction_tools::experiments::{
    dominance_check, generate_corpus, mdr_dof_experiment, roc_experiment, rotation_sensitivity,
    zero_miss_experiment_with, BaseEvent, McSummary, ScoreKind, DEFAULT_ROC_EVENTS,
};
use conjunction_tools::kvn::{parse_cdm_kvn, ParseMode};
use conjunction_tools::output::{Cell, Format, Table};
use conjunction_tools::samples::read_samples;
use conjunction_tools::{ToolError, ToolResult};

#[derive(Parser)]
#[command(name = "conjunction", version, about = "Conjunction assessment: collision probability, miss-distance inference and experiments")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output table format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: FormatArg,
    /// Output file (default stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed for simulations.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Significance level.
    #[arg(long, global = true, default_value_t = DEFAULT_ALPHA, value_parser = parse_alpha)]
    alpha: f64,
    /// Chi-square degrees of freedom (1 or 2).
    #[arg(long, global = true, default_value_t = DEFAULT_NDOF, value_parser = clap::value_parser!(u32).range(1..=2))]
    ndof: u32,
    /// Worker threads for experiments (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err("alpha must lie in (0, 1)".into())
    }
}

/// A conjunction given inline or as a KVN file.
#[derive(Args)]
struct StateSource {
    /// KVN conjunction data message file.
    #[arg(long, conflicts_with_all = ["x1", "x2", "cov", "hbr"])]
    input: Option<PathBuf>,
    /// Skip malformed KVN blocks instead of failing.
    #[arg(long, requires = "input")]
    lenient: bool,
    /// Encounter-plane miss component along the first axis (m).
    #[arg(long, allow_hyphen_values = true)]
    x1: Option<f64>,
    /// Encounter-plane miss component along the second axis (m).
    #[arg(long, allow_hyphen_values = true)]
    x2: Option<f64>,
    /// Covariance entries `d11,d12,d22` (m²).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_sym)]
    cov: Option<SymMat2>,
    /// Hard-body radius (m).
    #[arg(long)]
    hbr: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Collision probability, significance probabilities and confidence interval.
    Assess {
        #[command(flatten)]
        src: StateSource,
    },
    /// pc_hat and p_obs while the covariance is scaled.
    Dilution {
        #[command(flatten)]
        src: StateSource,
        #[arg(long, default_value_t = 0.01)]
        scale_min: f64,
        #[arg(long, default_value_t = 100.0)]
        scale_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Hit/Miss synthesis and ROC curves of every score.
    Roc {
        /// KVN file of original events (default: synthetic corpus).
        #[arg(long)]
        input: Option<PathBuf>,
        /// Synthetic events when no input is given.
        #[arg(long, default_value_t = DEFAULT_ROC_EVENTS)]
        events: usize,
        /// Separation parameters.
        #[arg(long, value_delimiter = ',', default_value = "0.001")]
        s: Vec<f64>,
        /// Emit one row of areas and dominance per separation instead of curves.
        #[arg(long)]
        summary: bool,
    },
    /// Predictions about a zero true miss.
    McZeroMiss {
        #[arg(long, default_value_t = 100.0)]
        sigma: f64,
        #[arg(long, default_value_t = 10.0)]
        hbr: f64,
        #[arg(long, default_value_t = 10_000)]
        n: usize,
    },
    /// Missed-detection rate with the truth on the hard-body circle.
    McMdr {
        /// True miss distance (default: the hard-body radius).
        #[arg(long)]
        psi0: Option<f64>,
        /// Isotropic standard deviation (m).
        #[arg(long, default_value_t = 1000.0, conflicts_with = "cov")]
        sigma: f64,
        /// Covariance entries `d11,d12,d22` (m²).
        #[arg(long, allow_hyphen_values = true, value_parser = parse_sym)]
        cov: Option<SymMat2>,
        #[arg(long, default_value_t = 10.0)]
        hbr: f64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Empirical-Bayes gamma prior from a sample CSV.
    PriorFit {
        /// CSV with header `event_id,x1_m,x2_m,d1_m,d2_m`.
        #[arg(long)]
        input: PathBuf,
        /// Samples with d1 or d2 below this are excluded (m).
        #[arg(long, default_value_t = conjunction_core::priors::DEFAULT_D_FLOOR)]
        d_floor: f64,
    },
    /// Evidence under the uniform prior over a screening ellipse.
    Evidence {
        #[command(flatten)]
        src: StateSource,
        #[arg(long)]
        semi_a: f64,
        #[arg(long)]
        semi_b: f64,
        /// Rotation of the first semi-axis (rad).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        rotation: f64,
        /// Ellipse centre `c1,c2` (m).
        #[arg(long, default_value = "0,0", allow_hyphen_values = true, value_parser = parse_pair)]
        center: Vec2,
    },
    /// Metrics as the covariance is rotated with the prediction fixed.
    RotSens {
        #[command(flatten)]
        src: StateSource,
        /// Explicit angles in degrees.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        angles: Option<Vec<f64>>,
        #[arg(long, default_value_t = 5.0)]
        step_deg: f64,
        #[arg(long, default_value_t = 180.0)]
        max_deg: f64,
    },
}

fn parse_list(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {}", v.len()));
    }
    Ok(v)
}

fn parse_sym(s: &str) -> Result<SymMat2, String> {
    let v = parse_list(s, 3)?;
    Ok(SymMat2::new(v[0], v[1], v[2]))
}

fn parse_pair(s: &str) -> Result<Vec2, String> {
    let v = parse_list(s, 2)?;
    Ok(Vec2::new(v[0], v[1]))
}

fn load_states(src: &StateSource) -> ToolResult<Vec<(String, ConjunctionState)>> {
    if let Some(path) = &src.input {
        let text = fs::read_to_string(path).map_err(|e| ToolError::Input(format!("{}: {e}", path.display())))?;
        let mode = if src.lenient { ParseMode::Lenient } else { ParseMode::Strict };
        let parsed = parse_cdm_kvn(&text, mode)?;
        for d in &parsed.diagnostics {
            eprintln!("skipped block: {d}");
        }
        return parsed
            .records
            .iter()
            .map(|r| {
                project_to_encounter_plane(r)
                    .map(|st| (r.event_id.clone(), st))
                    .map_err(|e| ToolError::core(format!("record {}", r.event_id), e))
            })
            .collect();
    }
    match (src.x1, src.x2, src.cov, src.hbr) {
        (Some(x1), Some(x2), Some(cov), Some(hbr)) => {
            let st = ConjunctionState::new(Vec2::new(x1, x2), cov, hbr)
                .map_err(|e| ToolError::core("inline state", e))?;
            Ok(vec![("inline".to_owned(), st)])
        }
        _ => Err(ToolError::Input("give --input FILE or all of --x1, --x2, --cov, --hbr".into())),
    }
}

fn summary_row(t: &mut Table, s: &McSummary) {
    t.push(vec![
        s.n.into(),
        s.alpha.into(),
        s.ndof.into(),
        s.empirical_mdr.into(),
        s.empirical_mdr_lr.into(),
        s.miss_gt_hbr_frac.into(),
        s.pc_below_1e4_frac.into(),
    ]);
}

const MC_COLUMNS: [&str; 7] = [
    "n",
    "alpha",
    "ndof",
    "empirical_mdr",
    "empirical_mdr_lr",
    "miss_gt_hbr_frac",
    "pc_below_1e4_frac",
];

fn run(c: &Common, command: Command) -> ToolResult<Table> {
    match command {
        Command::Assess { src } => {
            let mut t = Table::new(&[
                "event_id",
                "pc_hat",
                "p_obs",
                "p_obs_lr",
                "ci_lower",
                "ci_upper",
                "ci_level",
                "z_lower",
                "z_upper",
                "z_p",
                "w_stat",
                "conditioned",
            ]);
            for (id, st) in load_states(&src)? {
                let a = assess(&st, c.alpha, c.ndof).map_err(|e| ToolError::core(format!("record {id}"), e))?;
                t.push(vec![
                    id.into(),
                    a.pc_hat.into(),
                    a.p_obs.into(),
                    a.p_obs_lr.into(),
                    a.ci.lower.into(),
                    a.ci.upper.into(),
                    a.ci.level.into(),
                    a.z_bounds.0.into(),
                    a.z_bounds.1.into(),
                    a.z_p.into(),
                    a.w_stat.into(),
                    a.conditioned.into(),
                ]);
            }
            Ok(t)
        }
        Command::Dilution { src, scale_min, scale_max, points } => {
            if !(scale_min > 0.0 && scale_max > scale_min) || points < 2 {
                return Err(ToolError::Input("need 0 < scale-min < scale-max and at least two points".into()));
            }
            let scales = log_grid(scale_min, scale_max, points);
            let mut t = Table::new(&["event_id", "scale", "pc_hat", "p_obs", "p_obs_lr"]);
            for (id, st) in load_states(&src)? {
                let curve = dilution_curve(&st, &scales, c.ndof).map_err(|e| ToolError::core(format!("record {id}"), e))?;
                for p in curve {
                    t.push(vec![id.clone().into(), p.scale.into(), p.pc_hat.into(), p.p_obs.into(), p.p_obs_lr.into()]);
                }
            }
            Ok(t)
        }
        Command::Roc { input, events, s, summary } => {
            let bases = match input {
                Some(path) => {
                    let src = StateSource { input: Some(path), lenient: false, x1: None, x2: None, cov: None, hbr: None };
                    load_states(&src)?.iter().map(|(id, st)| BaseEvent::from_state(id.clone(), st)).collect()
                }
                None => {
                    if events == 0 {
                        return Err(ToolError::Input("--events must be positive".into()));
                    }
                    generate_corpus(events, c.seed)
                }
            };
            let mut curves_t = Table::new(&["s", "score_name", "threshold", "mdr", "far"]);
            let mut summary_t = Table::new(&[
                "s",
                "events",
                "auc_pc_hat",
                "auc_p_obs",
                "auc_p_obs_lr",
                "p_obs_dominates_pc_hat",
                "max_violation",
                "worst_mdr",
            ]);
            for &sv in &s {
                let curves = roc_experiment(&bases, sv, c.seed, c.ndof)?;
                let get = |k: ScoreKind| curves.iter().find(|cv| cv.kind == k).expect("all scores present");
                let dom = dominance_check(&get(ScoreKind::PObs).points, &get(ScoreKind::PcHat).points, 0.02);
                eprintln!(
                    "s = {sv}: AUC pc_hat {:.4}, p_obs {:.4}, p_obs_lr {:.4}; p_obs dominance violation {:.4}",
                    get(ScoreKind::PcHat).auc,
                    get(ScoreKind::PObs).auc,
                    get(ScoreKind::PObsLr).auc,
                    dom.max_violation
                );
                summary_t.push(vec![
                    sv.into(),
                    bases.len().into(),
                    get(ScoreKind::PcHat).auc.into(),
                    get(ScoreKind::PObs).auc.into(),
                    get(ScoreKind::PObsLr).auc.into(),
                    dom.dominates.into(),
                    dom.max_violation.into(),
                    dom.worst_mdr.into(),
                ]);
                for cv in &curves {
                    for p in &cv.points {
                        curves_t.push(vec![sv.into(), cv.kind.name().into(), p.threshold.into(), p.mdr.into(), p.far.into()]);
                    }
                }
            }
            Ok(if summary { summary_t } else { curves_t })
        }
        Command::McZeroMiss { sigma, hbr, n } => {
            let s = zero_miss_experiment_with(sigma, hbr, n, c.seed, c.alpha, c.ndof)?;
            let mut t = Table::new(&MC_COLUMNS);
            summary_row(&mut t, &s);
            Ok(t)
        }
        Command::McMdr { psi0, sigma, cov, hbr, n } => {
            let cov = cov.unwrap_or_else(|| SymMat2::isotropic(sigma));
            let s = mdr_dof_experiment(psi0.unwrap_or(hbr), cov, hbr, c.alpha, c.ndof, n, c.seed)?;
            let mut t = Table::new(&MC_COLUMNS);
            summary_row(&mut t, &s);
            Ok(t)
        }
        Command::PriorFit { input, d_floor } => {
            let file = fs::File::open(&input).map_err(|e| ToolError::Input(format!("{}: {e}", input.display())))?;
            let rows = read_samples(file)?;
            let samples: Vec<ConjunctionSample> = rows.iter().map(|r| r.sample).collect();
            let fit = eb_fit(&samples, d_floor).map_err(|e| ToolError::core("prior fit", e))?;
            let (psi_mean, psi_sd) = gamma_psi_moments(&fit.prior)?;
            let mut t = Table::new(&[
                "a",
                "b_per_km2",
                "b_per_m2",
                "n_used",
                "n_excluded",
                "mean_t",
                "mean_t2",
                "mean_phi_m2",
                "mean_phi_sq_m4",
                "psi_mean_m",
                "psi_sd_m",
            ]);
            t.push(vec![
                fit.prior.a.into(),
                fit.prior.b_per_km2().into(),
                fit.prior.b.into(),
                fit.n_used.into(),
                fit.n_excluded.into(),
                fit.mean_t.into(),
                fit.mean_t2.into(),
                fit.mean_phi.into(),
                fit.mean_phi_sq.into(),
                psi_mean.into(),
                psi_sd.into(),
            ]);
            Ok(t)
        }
        Command::Evidence { src, semi_a, semi_b, rotation, center } => {
            let slice = ScreeningEllipse::new(semi_a, semi_b, rotation, center)
                .map_err(|e| ToolError::core("screening ellipse", e))?;
            let base = untruncated_evidence(&slice)?;
            let mut t = Table::new(&[
                "event_id",
                "truncated_evidence",
                "untruncated_evidence",
                "ratio",
                "prior_hit_probability",
            ]);
            for (id, st) in load_states(&src)? {
                let mass = slice_mass(&st, &slice, DEFAULT_DISK_REL_TOL).map_err(|e| ToolError::core(format!("record {id}"), e))?;
                let prior = prior_hit_probability(st.hbr, &slice).map_err(|e| ToolError::core(format!("record {id}"), e))?;
                t.push(vec![id.into(), (mass / slice.area()).into(), base.into(), mass.into(), prior.into()]);
            }
            Ok(t)
        }
        Command::RotSens { src, angles, step_deg, max_deg } => {
            let degrees = match angles {
                Some(a) => a,
                None => {
                    if !(step_deg > 0.0 && max_deg >= 0.0) {
                        return Err(ToolError::Input("need step-deg > 0 and max-deg ≥ 0".into()));
                    }
                    let n = (max_deg / step_deg + 1e-9).floor() as usize;
                    (0..=n).map(|i| i as f64 * step_deg).collect()
                }
            };
            let radians: Vec<f64> = degrees.iter().map(|d| d.to_radians()).collect();
            let mut t = Table::new(&[
                "event_id",
                "angle_deg",
                "pc_hat",
                "p_obs",
                "p_obs_lr",
                "ci_lower",
                "ci_upper",
                "rel_change_pc_hat",
                "rel_change_p_obs",
            ]);
            for (id, st) in load_states(&src)? {
                let rows = rotation_sensitivity(&st, &radians, c.alpha, c.ndof).map_err(|e| ToolError::core(format!("record {id}"), e))?;
                for (r, deg) in rows.iter().zip(&degrees) {
                    t.push(vec![
                        id.clone().into(),
                        (*deg).into(),
                        r.pc_hat.into(),
                        r.p_obs.into(),
                        r.p_obs_lr.into(),
                        r.ci_lower.into(),
                        r.ci_upper.into(),
                        Cell::Float(r.rel_change_pc_hat),
                        Cell::Float(r.rel_change_p_obs),
                    ]);
                }
            }
            Ok(t)
        }
    }
}

fn emit(table: &Table, common: &Common) -> ToolResult<()> {
    let format = match common.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match &common.out {
        Some(path) => {
            let mut buf = Vec::new();
            table.write(&mut buf, format)?;
            fs::write(path, buf)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            table.write(&mut lock, format)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let Cli { common, command } = cli;
    match run(&common, command).and_then(|t| emit(&t, &common)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
