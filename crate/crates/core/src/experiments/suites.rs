//! The three benchmark studies and their table files.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{mean, Case, CaseStats, SweepOutcome, SweepSpec};
use crate::error::{Error, Result};
use crate::models::GaussianMeasurementModel;
use crate::output::{atomic_write, write_csv, write_json, Cell};
use crate::priors::PriorSpec;
use crate::repartition::{BetaBoundsMethod, Mode};
use crate::sampler::SamplerConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Univariate,
    Bivariate,
    Highdim,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "univariate" => Ok(Suite::Univariate),
            "bivariate" => Ok(Suite::Bivariate),
            "highdim" => Ok(Suite::Highdim),
            other => Err(Error::invalid(format!(
                "unknown suite `{other}` (expected univariate, bivariate or highdim)"
            ))),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Univariate => "univariate",
            Suite::Bivariate => "bivariate",
            Suite::Highdim => "highdim",
        }
    }

    pub fn spec(self, base_seed: u64, repetitions: usize) -> Result<SweepSpec> {
        match self {
            Suite::Univariate => univariate_suite(base_seed, repetitions),
            Suite::Bivariate => bivariate_suite(base_seed, repetitions),
            Suite::Highdim => highdim_suite(base_seed, repetitions),
        }
    }
}

fn tags(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|&(k, v)| (k.to_string(), v)).collect()
}

fn sweep(cases: Vec<Case>) -> SweepSpec {
    SweepSpec {
        cases,
        sampler: SamplerConfig::default(),
        beta_bounds: BetaBoundsMethod::default(),
    }
}

/// θ* ∈ {5, 10, …, 50}; σ_π = 4 on [-50, 50]; 20 unit-variance measurements.
pub fn univariate_suite(base_seed: u64, repetitions: usize) -> Result<SweepSpec> {
    let model = GaussianMeasurementModel::isotropic(1, 20, 1.0)?;
    let prior = PriorSpec::symmetric(1, 0.0, 4.0)?.config();
    let cases = (1..=10)
        .map(|i| {
            let theta = 5.0 * i as f64;
            Case {
                name: format!("theta{theta:02}"),
                model: model.clone(),
                prior: prior.clone(),
                theta_star: vec![theta],
                modes: vec![Mode::Standard, Mode::AutoPr],
                repetitions,
                base_seed,
                beta_range: None,
                tags: tags(&[("theta_star", theta)]),
            }
        })
        .collect();
    Ok(sweep(cases))
}

/// θ* = (40, 40), one identity-noise measurement, auto mode only.
/// Three truncated diagonal priors and seven unbounded correlated ones.
pub fn bivariate_suite(base_seed: u64, repetitions: usize) -> Result<SweepSpec> {
    let model = GaussianMeasurementModel::isotropic(2, 1, 1.0)?;
    let mut cases = Vec::new();
    for (s1, s2) in [(4.0, 4.0), (2.0, 4.0), (2.0, 2.0)] {
        let prior = PriorSpec::truncated_gaussian(vec![0.0; 2], vec![s1, s2], vec![-50.0; 2], vec![50.0; 2])?;
        cases.push(Case {
            name: format!("sigma{s1}x{s2}"),
            model: model.clone(),
            prior: prior.config(),
            theta_star: vec![40.0, 40.0],
            modes: vec![Mode::AutoPr],
            repetitions,
            base_seed,
            beta_range: None,
            tags: tags(&[("sigma_1", s1), ("sigma_2", s2)]),
        });
    }
    for rho in [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75] {
        let prior = PriorSpec::correlated_2d((4.0, 4.0), rho)?;
        cases.push(Case {
            name: format!("rho{rho:+.2}"),
            model: model.clone(),
            prior: prior.config(),
            theta_star: vec![40.0, 40.0],
            modes: vec![Mode::AutoPr],
            repetitions,
            base_seed,
            beta_range: Some((prior.beta_min(), 1.0)),
            tags: tags(&[("rho", rho)]),
        });
    }
    Ok(sweep(cases))
}

/// K = 3..10, θ* = 40 and σ_π = 4 in every dimension, one measurement.
pub fn highdim_suite(base_seed: u64, repetitions: usize) -> Result<SweepSpec> {
    let cases = (3..=10)
        .map(|k| {
            Ok(Case {
                name: format!("dim{k:02}"),
                model: GaussianMeasurementModel::isotropic(k, 1, 1.0)?,
                prior: PriorSpec::symmetric(k, 0.0, 4.0)?.config(),
                theta_star: vec![40.0; k],
                modes: vec![Mode::AutoPr],
                repetitions,
                base_seed,
                beta_range: None,
                tags: tags(&[("dim", k as f64)]),
            })
        })
        .collect::<Result<_>>()?;
    Ok(sweep(cases))
}

fn mode_tag(mode: Mode) -> String {
    mode.label().replace([':', '-', '.'], "_")
}

fn beta_minus_mean(s: &CaseStats) -> f64 {
    mean(&s.beta_minus.iter().flatten().copied().collect::<Vec<_>>())
}

fn max_abs_corr(s: &CaseStats) -> f64 {
    s.beta_theta_correlation
        .iter()
        .fold(f64::NAN, |m, c| if m.is_nan() { c.abs() } else { m.max(c.abs()) })
}

/// Columns shared by every per-mode block of the wide tables.
fn mode_columns(prefix: &str, s: Option<&CaseStats>) -> Vec<(String, Cell)> {
    let nan = f64::NAN;
    let auto = s.is_some_and(|s| s.mode.is_auto());
    let mut cols = vec![
        ("log_z_mean", s.map_or(nan, |s| s.log_z_mean).into()),
        ("log_z_sd", s.map_or(nan, |s| s.log_z_sd).into()),
        (
            "log_z_as_terminated_mean",
            s.map_or(nan, |s| s.log_z_as_terminated_mean).into(),
        ),
        ("log_z_error_mean", s.map_or(nan, |s| s.log_z_error_mean).into()),
        ("log_z_error_sd", s.map_or(nan, |s| s.log_z_error_sd).into()),
        ("rmse", s.map_or(nan, |s| s.rmse).into()),
        ("rmse_vs_posterior", s.map_or(nan, |s| s.rmse_vs_posterior).into()),
        ("n_like_mean", s.map_or(nan, |s| s.n_like_mean).into()),
        ("failures", Cell::from(s.map_or(0, |s| s.failures))),
    ];
    if auto {
        let s = s.expect("auto stats");
        cols.push(("beta_minus_mean", beta_minus_mean(s).into()));
        cols.push(("beta_plus_mean", s.beta_plus_mean.into()));
        cols.push(("beta_plus_sd", s.beta_plus_sd.into()));
        cols.push(("max_abs_beta_theta_corr", max_abs_corr(s).into()));
    }
    cols.into_iter().map(|(k, v)| (format!("{prefix}_{k}"), v)).collect()
}

/// One row per case: its tags, the oracle, then a column block per mode.
fn wide_table(outcome: &SweepOutcome, cases: &[&Case]) -> (Vec<String>, Vec<Vec<Cell>>) {
    let tag_keys: BTreeSet<&String> = cases.iter().flat_map(|c| c.tags.keys()).collect();
    let modes: Vec<Mode> = {
        let mut seen = Vec::new();
        for c in cases {
            for &m in &c.modes {
                if !seen.contains(&m) {
                    seen.push(m);
                }
            }
        }
        seen
    };
    let mut header: Vec<String> = vec!["case".into()];
    header.extend(tag_keys.iter().map(|k| k.to_string()));
    header.push("oracle_log_z_mean".into());
    header.push("repetitions".into());
    // the column block of a mode is taken from any case that ran it
    let templates: Vec<Option<&CaseStats>> = modes
        .iter()
        .map(|&m| cases.iter().find_map(|c| outcome.stats_for(&c.name, m)))
        .collect();
    for (&m, t) in modes.iter().zip(&templates) {
        header.extend(mode_columns(&mode_tag(m), *t).into_iter().map(|(k, _)| k));
    }
    let mut rows = Vec::new();
    for case in cases {
        let mut row: Vec<Cell> = vec![case.name.clone().into()];
        row.extend(
            tag_keys
                .iter()
                .map(|k| Cell::from(case.tags.get(*k).copied().unwrap_or(f64::NAN))),
        );
        let any = modes.iter().find_map(|&m| outcome.stats_for(&case.name, m));
        row.push(any.map_or(f64::NAN, |s| s.oracle_log_z_mean).into());
        row.push(Cell::from(case.repetitions));
        for (&m, t) in modes.iter().zip(&templates) {
            let cols = match outcome.stats_for(&case.name, m) {
                Some(s) => mode_columns(&mode_tag(m), Some(s)),
                None => mode_columns(&mode_tag(m), *t)
                    .into_iter()
                    .map(|(k, _)| (k, Cell::Float(f64::NAN)))
                    .collect(),
            };
            row.extend(cols.into_iter().map(|(_, v)| v));
        }
        rows.push(row);
    }
    (header, rows)
}

fn render_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) if x.is_nan() => "n/a".into(),
        Cell::Float(x) if x.abs() >= 1000.0 => format!("{x:.0}"),
        Cell::Float(x) => format!("{x:.4}"),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => s.clone(),
    }
}

fn markdown_table(title: &str, header: &[String], rows: &[Vec<Cell>]) -> String {
    let mut md = format!("### {title}\n\n| {} |\n|", header.join(" | "));
    md.push_str(&"---|".repeat(header.len()));
    md.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(render_cell).collect();
        let _ = writeln!(md, "| {} |", cells.join(" | "));
    }
    md.push('\n');
    md
}

fn write_table(dir: &Path, file: &str, header: &[String], rows: &[Vec<Cell>], files: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(file);
    write_csv(&path, header, rows)?;
    files.push(path);
    Ok(())
}

fn write_long_tables(dir: &Path, outcome: &SweepOutcome, files: &mut Vec<PathBuf>) -> Result<()> {
    let header = [
        "case",
        "mode",
        "repetition",
        "seed",
        "termination",
        "failed",
        "oracle_log_z",
        "log_z",
        "log_z_raw",
        "log_z_error",
        "n_like",
        "n_iter",
        "beta_minus",
        "beta_plus",
        "rmse",
    ];
    let rows: Vec<Vec<Cell>> = outcome
        .records
        .iter()
        .map(|r| {
            let sq: Vec<f64> = r.squared_errors().collect();
            vec![
                r.case.clone().into(),
                r.mode.label().into(),
                r.repetition.into(),
                Cell::Int(r.seed as i64),
                serde_json::to_value(r.termination)
                    .ok()
                    .and_then(|v| v.as_str().map(String::from))
                    .unwrap_or_default()
                    .into(),
                Cell::Int(i64::from(r.failed)),
                r.oracle_log_z.into(),
                r.log_z.into(),
                r.log_z_raw.into(),
                r.log_z_error.into(),
                r.n_like.into(),
                r.n_iter.into(),
                r.beta_minus.unwrap_or(f64::NAN).into(),
                r.beta_plus.unwrap_or(f64::NAN).into(),
                mean(&sq).sqrt().into(),
            ]
        })
        .collect();
    write_table(dir, "repetitions.csv", &header.map(String::from), &rows, files)
}

#[derive(Serialize)]
struct SuiteSummary<'a> {
    suite: &'a str,
    sampler: &'a SamplerConfig,
    beta_bounds: BetaBoundsMethod,
    cases: &'a [CaseStats],
    files: Vec<String>,
}

/// Writes the tables for a finished sweep into `dir` and returns the paths.
///
/// Named suites produce their table layouts (`table1.csv`, `fig4_*.csv`,
/// `table2.csv`/`table3.csv`, `highdim_stats.csv`); every sweep also gets
/// `case_stats.csv`, `repetitions.csv`, a markdown summary and
/// `suite_summary.json`.
pub fn write_sweep_outputs(
    dir: &Path,
    suite: Option<Suite>,
    spec: &SweepSpec,
    outcome: &SweepOutcome,
) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    let mut md = String::new();
    let all: Vec<&Case> = spec.cases.iter().collect();
    match suite {
        Some(Suite::Univariate) => {
            let (header, rows) = wide_table(outcome, &all);
            md.push_str(&markdown_table("Univariate sweep", &header, &rows));
            write_table(dir, "table1.csv", &header, &rows, &mut files)?;
            for (file, pick) in [("fig4_rmse.csv", 0usize), ("fig4_nlike.csv", 1)] {
                let modes = [Mode::Standard, Mode::AutoPr];
                let mut header = vec!["theta_star".to_string()];
                for m in modes {
                    let t = mode_tag(m);
                    if pick == 0 {
                        header.extend([
                            format!("{t}_rmse"),
                            format!("{t}_log10_rmse"),
                            format!("{t}_rmse_as_terminated"),
                        ]);
                    } else {
                        header.extend([
                            format!("{t}_n_like_mean"),
                            format!("{t}_n_like_min"),
                            format!("{t}_n_like_max"),
                            format!("{t}_n_like_as_terminated_mean"),
                        ]);
                    }
                }
                let rows: Vec<Vec<Cell>> = spec
                    .cases
                    .iter()
                    .map(|c| {
                        let mut row = vec![Cell::from(c.tags.get("theta_star").copied().unwrap_or(f64::NAN))];
                        for m in modes {
                            let s = outcome.stats_for(&c.name, m);
                            let f = |g: &dyn Fn(&CaseStats) -> f64| Cell::from(s.map_or(f64::NAN, g));
                            if pick == 0 {
                                row.extend([f(&|s| s.rmse), f(&|s| s.rmse.log10()), f(&|s| s.rmse_as_terminated)]);
                            } else {
                                row.extend([
                                    f(&|s| s.n_like_mean),
                                    f(&|s| s.n_like_min as f64),
                                    f(&|s| s.n_like_max as f64),
                                    f(&|s| s.n_like_as_terminated_mean),
                                ]);
                            }
                        }
                        row
                    })
                    .collect();
                write_table(dir, file, &header, &rows, &mut files)?;
            }
        }
        Some(Suite::Bivariate) => {
            let (uncorr, corr): (Vec<&Case>, Vec<&Case>) = all.iter().partition(|c| !c.tags.contains_key("rho"));
            let (header, rows) = wide_table(outcome, &uncorr);
            md.push_str(&markdown_table("Bivariate, uncorrelated priors", &header, &rows));
            write_table(dir, "table2.csv", &header, &rows, &mut files)?;
            let (header, rows) = wide_table(outcome, &corr);
            md.push_str(&markdown_table("Bivariate, correlated priors", &header, &rows));
            write_table(dir, "table3.csv", &header, &rows, &mut files)?;
        }
        Some(Suite::Highdim) => {
            let header: Vec<String> = [
                "dim",
                "repetitions",
                "failures",
                "beta_plus_mean",
                "beta_plus_sd",
                "rmse",
                "rmse_vs_posterior",
                "log_z_error_min",
                "log_z_error_q25",
                "log_z_error_median",
                "log_z_error_q75",
                "log_z_error_max",
                "abs_log_z_error_median",
                "n_like_mean",
                "n_like_min",
                "n_like_q25",
                "n_like_median",
                "n_like_q75",
                "n_like_max",
                "max_abs_beta_theta_corr",
            ]
            .map(String::from)
            .to_vec();
            let rows: Vec<Vec<Cell>> = spec
                .cases
                .iter()
                .filter_map(|c| outcome.stats_for(&c.name, Mode::AutoPr).map(|s| (c, s)))
                .map(|(c, s)| {
                    let e = s.log_z_error_quartiles;
                    let n = s.n_like_quartiles;
                    vec![
                        Cell::from(c.model.dim()),
                        s.repetitions.into(),
                        s.failures.into(),
                        s.beta_plus_mean.into(),
                        s.beta_plus_sd.into(),
                        s.rmse.into(),
                        s.rmse_vs_posterior.into(),
                        e[0].into(),
                        e[1].into(),
                        e[2].into(),
                        e[3].into(),
                        e[4].into(),
                        s.abs_log_z_error_median.into(),
                        s.n_like_mean.into(),
                        n[0].into(),
                        n[1].into(),
                        n[2].into(),
                        n[3].into(),
                        n[4].into(),
                        max_abs_corr(s).into(),
                    ]
                })
                .collect();
            md.push_str(&markdown_table("High-dimensional suite", &header, &rows));
            write_table(dir, "highdim_stats.csv", &header, &rows, &mut files)?;
        }
        None => {
            let (header, rows) = wide_table(outcome, &all);
            md.push_str(&markdown_table("Sweep", &header, &rows));
        }
    }

    let tag_keys: BTreeSet<&String> = spec.cases.iter().flat_map(|c| c.tags.keys()).collect();
    let mut header: Vec<String> = vec!["case".into(), "mode".into()];
    header.extend(tag_keys.iter().map(|k| k.to_string()));
    header.extend(
        [
            "repetitions",
            "failures",
            "oracle_log_z_mean",
            "log_z_mean",
            "log_z_sd",
            "log_z_as_terminated_mean",
            "log_z_error_mean",
            "log_z_error_sd",
            "abs_log_z_error_median",
            "rmse",
            "rmse_as_terminated",
            "rmse_vs_posterior",
            "posterior_sd_mean",
            "n_like_mean",
            "n_like_min",
            "n_like_max",
            "beta_plus_mean",
            "beta_plus_sd",
            "max_abs_beta_theta_corr",
            "oracle_consistency",
        ]
        .map(String::from),
    );
    let rows: Vec<Vec<Cell>> = outcome
        .stats
        .iter()
        .map(|s| {
            let mut row = vec![Cell::from(s.case.clone()), s.mode.label().into()];
            row.extend(
                tag_keys
                    .iter()
                    .map(|k| Cell::from(s.tags.get(*k).copied().unwrap_or(f64::NAN))),
            );
            row.extend([
                s.repetitions.into(),
                s.failures.into(),
                s.oracle_log_z_mean.into(),
                s.log_z_mean.into(),
                s.log_z_sd.into(),
                s.log_z_as_terminated_mean.into(),
                s.log_z_error_mean.into(),
                s.log_z_error_sd.into(),
                s.abs_log_z_error_median.into(),
                s.rmse.into(),
                s.rmse_as_terminated.into(),
                s.rmse_vs_posterior.into(),
                s.posterior_sd_mean.into(),
                s.n_like_mean.into(),
                s.n_like_min.into(),
                s.n_like_max.into(),
                s.beta_plus_mean.into(),
                s.beta_plus_sd.into(),
                max_abs_corr(s).into(),
                s.oracle_consistency.into(),
            ]);
            row
        })
        .collect();
    write_table(dir, "case_stats.csv", &header, &rows, &mut files)?;
    write_long_tables(dir, outcome, &mut files)?;

    let name = suite.map_or("sweep", Suite::name);
    let md_path = dir.join(format!("{name}_table.md"));
    atomic_write(&md_path, md.as_bytes())?;
    files.push(md_path);

    let summary_path = dir.join("suite_summary.json");
    let mut names: Vec<String> = files
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    names.push("suite_summary.json".into());
    write_json(
        &summary_path,
        &SuiteSummary {
            suite: name,
            sampler: &spec.sampler,
            beta_bounds: spec.beta_bounds,
            cases: &outcome.stats,
            files: names,
        },
    )?;
    files.push(summary_path);
    Ok(files)
}
