use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn autopr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autopr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn autopr")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const MODEL_1D: &str = r#"
[model]
n_measurements = 20
noise_mean = [0.0]
noise_cov = [[1.0]]

[prior]
kind = "truncated-gaussian-diagonal"
mean = [0.0]
scale = [4.0]
"#;

fn write_config(dir: &Path, head: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, format!("{head}\n{MODEL_1D}")).unwrap();
    path
}

fn summary(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn run_representative_case_writes_all_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = autopr(
        &[
            "run",
            "--config",
            config_path("theta05.toml").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["summary.json", "dead_points.csv", "posterior_equal_weights.csv"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let s = summary(&out);
    assert_eq!(s["termination"], "converged");
    let log_z = s["log_z"].as_f64().unwrap();
    let oracle = s["oracle_log_z"].as_f64().unwrap();
    assert!((log_z - oracle).abs() < 1.0, "{log_z} vs {oracle}");
    assert!(s["beta_plus"].as_f64().unwrap() > 0.9);
    assert_eq!(s["config"]["mode"], "autopr");

    let dead = fs::read_to_string(out.join("dead_points.csv")).unwrap();
    assert!(dead.starts_with("iteration,log_like,log_weight,beta,theta_1\n"));
    let eq = fs::read_to_string(out.join("posterior_equal_weights.csv")).unwrap();
    assert!(eq.starts_with("beta,theta_1\n"));
    assert!(eq.lines().count() > 100);
}

#[test]
fn flags_override_config_and_are_echoed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "theta_star = [5.0]\nmode = \"autopr\"");
    let o = autopr(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "o",
            "--seed",
            "7",
            "--nlive",
            "60",
            "--efr",
            "0.5",
            "--tol",
            "0.1",
            "--mode",
            "standard",
            "--beta-bounds",
            "percentile",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let s = summary(&tmp.path().join("o"));
    let c = &s["config"];
    assert_eq!(c["seed"], 7);
    assert_eq!(c["sampler"]["n_live"], 60);
    assert_eq!(c["sampler"]["efr"], 0.5);
    assert_eq!(c["sampler"]["tol"], 0.1);
    assert_eq!(c["mode"], "standard");
    assert!(c["beta_bounds"].get("percentile").is_some());
    assert_eq!(s["n_live"], 60);
    assert!(s["beta_plus"].is_null());
}

#[test]
fn same_seed_gives_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "theta_star = [5.0]");
    for out in ["a", "b"] {
        let o = autopr(
            &["run", "--config", cfg.to_str().unwrap(), "--out", out, "--seed", "3"],
            tmp.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["summary.json", "dead_points.csv", "posterior_equal_weights.csv"] {
        let a = fs::read(tmp.path().join("a").join(f)).unwrap();
        let b = fs::read(tmp.path().join("b").join(f)).unwrap();
        if f == "summary.json" {
            // only the echoed output directory differs
            let strip = |v: Vec<u8>| {
                String::from_utf8(v)
                    .unwrap()
                    .replace("\"out\": \"a\"", "")
                    .replace("\"out\": \"b\"", "")
            };
            assert_eq!(strip(a), strip(b));
        } else {
            assert_eq!(a, b, "{f}");
        }
    }
}

#[test]
fn unknown_config_key_is_named_and_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "theta_star = [5.0]\nn_livepoints = 50");
    let o = autopr(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("n_livepoints"), "{}", stderr(&o));
}

#[test]
fn invalid_values_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "theta_star = [5.0, 1.0]");
    let o = autopr(&["run", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "theta_star = [5.0]");
    let o = autopr(&["run", "--config", cfg.to_str().unwrap(), "--efr", "1.5"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));

    let o = autopr(&["run", "--config", "does-not-exist.toml"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unrepresentative_standard_run_reports_termination() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "theta_star = [50.0]\nmode = \"standard\"");
    let o = autopr(&["run", "--config", cfg.to_str().unwrap(), "--out", "o"], tmp.path());
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 2, "exit {code}: {}", stderr(&o));
    let s = summary(&tmp.path().join("o"));
    let expected = if code == 0 { "converged" } else { "stalled" };
    assert_eq!(s["termination"], expected);
    if code == 2 {
        assert!(s["stall_reason"].is_string());
    }
}

#[test]
fn sweep_rejects_empty_case_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sweep.toml");
    fs::write(&cfg, "cases = []\n").unwrap();
    let o = autopr(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no cases"), "{}", stderr(&o));
}

#[test]
fn sweep_runs_and_resumes_from_records() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config_path("sweep_example.toml");
    let args = [
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        "sw",
        "--reps",
        "2",
        "--workers",
        "2",
    ];
    let o = autopr(&args, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("sw");
    let stats = fs::read_to_string(out.join("case_stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 1 + 4, "{stats}");
    let records: Vec<_> = fs::read_dir(out.join("records/far")).unwrap().collect();
    assert_eq!(records.len(), 4);

    let before = fs::read(out.join("repetitions.csv")).unwrap();
    let o = autopr(&args, tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(before, fs::read(out.join("repetitions.csv")).unwrap());
}

#[test]
fn replicate_rejects_unknown_suite() {
    let tmp = tempfile::tempdir().unwrap();
    let o = autopr(&["replicate", "trivariate"], tmp.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("trivariate"));
}

#[test]
fn replicate_univariate_writes_table_with_ten_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = autopr(&["replicate", "univariate", "--out", "uni", "--reps", "1"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = fs::read_to_string(tmp.path().join("uni/table1.csv")).unwrap();
    assert_eq!(table.lines().count(), 11);
    for f in ["fig4_rmse.csv", "fig4_nlike.csv", "univariate_table.md"] {
        assert!(tmp.path().join("uni").join(f).is_file(), "{f} missing");
    }
}

#[test]
fn prior_curve_defaults_and_edge_cases() {
    let tmp = tempfile::tempdir().unwrap();
    let o = autopr(&["prior-curve", "--out", "pc.csv", "--points", "201"], tmp.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(tmp.path().join("pc.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,theta,density"));
    let rows: Vec<[f64; 3]> = lines
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            [v[0], v[1], v[2]]
        })
        .collect();
    assert_eq!(rows.len(), 5 * 201);
    // peak density falls as β decreases
    let peaks: Vec<f64> = rows
        .chunks(201)
        .map(|c| c.iter().map(|r| r[2]).fold(0.0, f64::max))
        .collect();
    assert!(peaks.windows(2).all(|w| w[0] > w[1]), "{peaks:?}");

    let o = autopr(
        &["prior-curve", "--out", "one.csv", "--points", "1", "--betas", "1,0.5"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(tmp.path().join("one.csv")).unwrap().lines().count(),
        3
    );

    let prior = tmp.path().join("prior.toml");
    fs::write(
        &prior,
        "[prior]\nkind = \"gaussian-full-covariance\"\nmean = [0.0]\ncovariance = [[4.0]]\n",
    )
    .unwrap();
    let o = autopr(
        &["prior-curve", "--config", prior.to_str().unwrap(), "--out", "u.csv"],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(1), "unbounded prior needs a range");
    let o = autopr(
        &[
            "prior-curve",
            "--config",
            prior.to_str().unwrap(),
            "--out",
            "u.csv",
            "--range",
            "-10,10",
            "--betas",
            "1,0.5",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
}
