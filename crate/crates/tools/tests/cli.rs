use std::path::PathBuf;
use std::process::{Command, Output};

use conjunction_core::encounter::ConjunctionState;
use conjunction_core::inference::assess;
use conjunction_core::priors::{eb_fit, ConjunctionSample, DEFAULT_D_FLOOR};
use conjunction_core::{SymMat2, Vec2};
use conjunction_tools::samples::{write_samples, SampleRow};

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_str().unwrap().to_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conjunction")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

// Rows of a CSV table as (header, values).
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_owned).collect()).collect();
    (header, rows)
}

fn column(header: &[String], row: &[String], name: &str) -> f64 {
    let i = header.iter().position(|h| h == name).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn assess_inline_matches_library() {
    let out = stdout(&run(&["assess", "--x1", "300", "--x2", "0", "--cov", "10000,0,10000", "--hbr", "10"]));
    let (h, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    let st = ConjunctionState::new(Vec2::new(300.0, 0.0), SymMat2::isotropic(100.0), 10.0).unwrap();
    let a = assess(&st, 0.01, 2).unwrap();
    for (name, v) in [
        ("pc_hat", a.pc_hat),
        ("p_obs", a.p_obs),
        ("p_obs_lr", a.p_obs_lr),
        ("ci_lower", a.ci.lower),
        ("ci_upper", a.ci.upper),
        ("z_p", a.z_p),
        ("w_stat", a.w_stat),
    ] {
        assert_eq!(column(&h, &rows[0], name), v, "{name}");
    }
}

#[test]
fn assess_respects_alpha_and_ndof() {
    let out = stdout(&run(&[
        "assess", "--x1", "-420", "--x2", "130", "--cov", "40000,-9000,12000", "--hbr", "12", "--alpha", "0.05",
        "--ndof", "1",
    ]));
    let (h, rows) = csv_rows(&out);
    let st = ConjunctionState::new(Vec2::new(-420.0, 130.0), SymMat2::new(40000.0, -9000.0, 12000.0), 12.0).unwrap();
    let a = assess(&st, 0.05, 1).unwrap();
    assert_eq!(column(&h, &rows[0], "ci_upper"), a.ci.upper);
    assert_eq!(column(&h, &rows[0], "p_obs_lr"), a.p_obs_lr);
    assert_eq!(column(&h, &rows[0], "ci_level"), 0.95);
}

#[test]
fn assess_kvn_file() {
    let out = stdout(&run(&["assess", "--input", &fixture("single.kvn")]));
    let (h, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][0], "EV-0001");
    let pc = column(&h, &rows[0], "pc_hat");
    assert!(pc > 0.0 && pc < 1.0);
}

#[test]
fn strict_and_lenient_parsing() {
    let strict = run(&["assess", "--input", &fixture("three_blocks_one_bad.kvn")]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("REL_VELOCITY_X"));

    let lenient = run(&["assess", "--input", &fixture("three_blocks_one_bad.kvn"), "--lenient"]);
    let text = stdout(&lenient);
    let (_, rows) = csv_rows(&text);
    let ids: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(ids, ["EV-A", "EV-C"]);
    assert!(String::from_utf8_lossy(&lenient.stderr).contains("line 18"));
}

#[test]
fn non_pd_covariance_exits_3_naming_record() {
    let out = run(&["assess", "--input", &fixture("non_pd.kvn")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("EV-FLAT"));

    let inline = run(&["assess", "--x1", "1", "--x2", "0", "--cov", "1,2,1", "--hbr", "1"]);
    assert_eq!(inline.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["frobnicate"],
        vec!["assess", "--x1", "1", "--bogus"],
        vec!["assess", "--x1", "1", "--x2", "0", "--cov", "1,0", "--hbr", "1"],
        vec!["mc-zero-miss", "--alpha", "1.5"],
        vec!["mc-zero-miss", "--ndof", "3"],
        vec!["assess", "--input", "/nonexistent/file.kvn"],
        vec!["assess", "--x1", "1", "--x2", "0", "--hbr", "1"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn mc_zero_miss_reports_fraction_outside() {
    let out = stdout(&run(&["mc-zero-miss", "--sigma", "100", "--hbr", "10", "--n", "10000", "--seed", "1"]));
    let (h, rows) = csv_rows(&out);
    let frac = column(&h, &rows[0], "miss_gt_hbr_frac");
    assert!((frac - 0.995).abs() < 0.003, "{frac}");
}

#[test]
fn json_mirrors_csv() {
    let args = ["rot-sens", "--x1", "500", "--x2", "100", "--cov", "90000,20000,10000", "--hbr", "10", "--step-deg", "45"];
    let csv = stdout(&run(&args));
    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&run(&json_args))).unwrap();
    let (h, rows) = csv_rows(&csv);
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), rows.len());
    assert_eq!(rows.len(), 5);
    let keys: Vec<&String> = arr[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, h.iter().collect::<Vec<_>>());
    assert_eq!(arr[0]["rel_change_pc_hat"], "nan");
    for (row, obj) in rows.iter().zip(arr) {
        let pc: f64 = row[h.iter().position(|c| c == "pc_hat").unwrap()].parse().unwrap();
        assert_eq!(obj["pc_hat"].as_f64().unwrap(), pc);
    }
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dilution.csv");
    let out = run(&[
        "dilution", "--x1", "400", "--x2", "0", "--cov", "2500,0,900", "--hbr", "10", "--points", "7", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let (h, rows) = csv_rows(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(rows.len(), 7);
    assert_eq!(column(&h, &rows[0], "scale"), 0.01);
    assert_eq!(column(&h, &rows[6], "scale"), 100.0);
}

#[test]
fn prior_fit_matches_library() {
    let samples: Vec<SampleRow> = (0..300)
        .map(|i| {
            let t = i as f64;
            SampleRow {
                event_id: format!("S{i}"),
                sample: ConjunctionSample {
                    x1: 800.0 * (0.37 * t).sin() + 50.0 * (t * 1.3).cos(),
                    x2: 600.0 * (0.11 * t).cos(),
                    d1: 100.0 + (t * 7.0) % 400.0,
                    d2: 150.0 + (t * 13.0) % 300.0,
                },
            }
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let mut buf = Vec::new();
    write_samples(&mut buf, &samples).unwrap();
    std::fs::write(&path, buf).unwrap();

    let out = run(&["prior-fit", "--input", path.to_str().unwrap()]);
    let fit = eb_fit(&samples.iter().map(|r| r.sample).collect::<Vec<_>>(), DEFAULT_D_FLOOR).unwrap();
    let (h, rows) = csv_rows(&stdout(&out));
    assert_eq!(column(&h, &rows[0], "a"), fit.prior.a);
    assert_eq!(column(&h, &rows[0], "n_used"), 300.0);
}

#[test]
fn prior_fit_infeasible_moments_exit_3() {
    let rows: Vec<SampleRow> = (0..50)
        .map(|i| SampleRow {
            event_id: format!("Z{i}"),
            sample: ConjunctionSample { x1: 0.0, x2: 0.0, d1: 100.0, d2: 100.0 },
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.csv");
    let mut buf = Vec::new();
    write_samples(&mut buf, &rows).unwrap();
    std::fs::write(&path, buf).unwrap();
    let out = run(&["prior-fit", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn evidence_ratio_near_one_for_small_cov() {
    let out = stdout(&run(&[
        "evidence", "--x1", "100", "--x2", "50", "--cov", "10000,0,2500", "--hbr", "10", "--semi-a", "5000",
        "--semi-b", "2000", "--center=-100,20",
    ]));
    let (h, rows) = csv_rows(&out);
    assert!((column(&h, &rows[0], "ratio") - 1.0).abs() < 1e-6);
    assert!(column(&h, &rows[0], "prior_hit_probability") > 0.0);
}

#[test]
fn roc_curve_and_summary() {
    let curve = stdout(&run(&["roc", "--events", "100", "--s", "0.1"]));
    let (h, rows) = csv_rows(&curve);
    assert_eq!(&h[..5], ["s", "score_name", "threshold", "mdr", "far"]);
    for name in ["pc_hat", "p_obs", "p_obs_lr"] {
        assert!(rows.iter().any(|r| r[1] == name));
    }
    let summary = stdout(&run(&["roc", "--events", "100", "--s", "0.1,0.01", "--summary"]));
    let (h, rows) = csv_rows(&summary);
    assert_eq!(rows.len(), 2);
    assert!(h.iter().any(|c| c == "worst_mdr"));
}
