use std::path::{Path, PathBuf};
use std::sync::Arc;

use autopr::experiments::{analyze_run, run_sweep, sampler_seed, write_sweep_outputs, RunOptions, Suite, SweepSpec};
use autopr::output::{write_csv, write_json, Cell};
use autopr::sampler::{self, SamplerConfig, Termination};
use autopr::{Error, InferenceProblem, PriorSpec, RunResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{self, PriorFile, RunConfig};
use crate::{BatchArgs, CliError, RunArgs};

#[derive(Serialize)]
struct RunSummary<'a> {
    termination: Termination,
    stall_reason: Option<&'a str>,
    /// Evidence of the sampled (possibly repartitioned) problem.
    log_z_raw: f64,
    /// β-corrected in auto mode; equal to `log_z_raw` otherwise. Null when
    /// the β bounds are degenerate.
    log_z: Option<f64>,
    log_z_error: f64,
    information: f64,
    n_like: usize,
    n_iter: usize,
    n_live: usize,
    effective_sample_size: f64,
    beta_minus: Option<f64>,
    beta_plus: Option<f64>,
    analysis_error: Option<String>,
    param_names: &'a [String],
    theta_hat: Vec<f64>,
    oracle_log_z: Option<f64>,
    analytic_posterior_mean: Option<Vec<f64>>,
    analytic_posterior_sd: Option<Vec<f64>>,
    sampler_seed: u64,
    config: &'a RunConfig,
}

fn apply_run_overrides(cfg: &mut RunConfig, args: &RunArgs) {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.nlive {
        cfg.sampler.n_live = n;
    }
    if let Some(efr) = args.efr {
        cfg.sampler.efr = efr;
    }
    if let Some(tol) = args.tol {
        cfg.sampler.tol = tol;
    }
    if let Some(mode) = args.mode {
        cfg.mode = mode;
    }
    if let Some(b) = args.beta_bounds {
        cfg.beta_bounds = b.into();
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    cfg.out.get_or_insert_with(|| PathBuf::from("run_out"));
}

fn build_problem(
    cfg: &RunConfig,
    prior: &PriorSpec,
    likelihood: Arc<dyn autopr::LogLikelihood>,
) -> Result<InferenceProblem, CliError> {
    cfg.model.validate()?;
    let k = cfg.model.dim();
    if prior.dim() != k || cfg.theta_star.len() != k {
        return Err(CliError::Config(format!(
            "model has {k} dimensions but the prior has {} and theta_star {}",
            prior.dim(),
            cfg.theta_star.len()
        )));
    }
    cfg.sampler.validate()?;
    let problem = InferenceProblem::new(prior.clone(), likelihood, cfg.mode)?;
    Ok(match cfg.beta_range {
        Some((lo, hi)) if cfg.mode.is_auto() => problem.with_beta_range(lo, hi)?,
        Some(_) => return Err(CliError::Config("beta_range only applies to autopr mode".into())),
        None => problem,
    })
}

/// Same stream as the analysis uses, for runs whose β bounds failed.
fn fallback_samples(result: &RunResult, seed: u64) -> autopr::Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    result.equal_weight_samples((result.effective_sample_size().ceil() as usize).max(2), &mut rng)
}

pub fn run(args: RunArgs) -> Result<(), CliError> {
    let mut cfg: RunConfig = config::load(&args.config)?;
    config::reject_sampler_seed(&cfg.sampler)?;
    apply_run_overrides(&mut cfg, &args);
    let out = cfg.out.clone().expect("output directory set");

    let prior = cfg.prior.build()?;
    let data = cfg.model.simulate_dataset(&cfg.theta_star, cfg.seed)?;
    let problem = build_problem(&cfg, &prior, Arc::new(cfg.model.likelihood(&data)?))?;
    let sampler_config = SamplerConfig {
        seed: sampler_seed(cfg.seed),
        ..cfg.sampler.clone()
    };

    let (result, stall) = match sampler::run(&problem, &sampler_config) {
        Ok(r) => (r, None),
        Err(Error::Stalled { partial, reason, .. }) => (*partial, Some(reason)),
        Err(e) => return Err(e.into()),
    };
    let analysis = analyze_run(&result, cfg.beta_bounds, sampler_config.seed);
    let posterior = cfg.model.analytic_posterior(&data, &prior).ok();
    let oracle = cfg.model.oracle_log_evidence(&data, &prior).ok();
    let offset = usize::from(cfg.mode.is_auto());

    if cfg.emit.dead_points {
        result.write_dead_points(&out.join("dead_points.csv"))?;
    }
    if cfg.emit.equal_weights {
        let samples = match &analysis {
            Ok(a) => a.samples.clone(),
            Err(_) => fallback_samples(&result, sampler_config.seed)?,
        };
        let rows: Vec<Vec<Cell>> = samples
            .iter()
            .map(|s| s.iter().map(|&x| Cell::from(x)).collect())
            .collect();
        write_csv(&out.join("posterior_equal_weights.csv"), &result.param_names, &rows)?;
    }
    if cfg.emit.dataset {
        data.write(&out, "data", &cfg.model)?;
    }

    let bounds = analysis.as_ref().ok().and_then(|a| a.bounds);
    let summary = RunSummary {
        termination: result.termination,
        stall_reason: stall.as_deref(),
        log_z_raw: result.log_z,
        log_z: analysis.as_ref().ok().map(|a| a.log_z),
        log_z_error: result.log_z_error,
        information: result.information,
        n_like: result.n_like,
        n_iter: result.n_iter,
        n_live: result.n_live,
        effective_sample_size: result.effective_sample_size(),
        beta_minus: bounds.map(|b| b.beta_minus),
        beta_plus: bounds.map(|b| b.beta_plus),
        analysis_error: analysis.as_ref().err().map(ToString::to_string),
        param_names: &result.param_names,
        theta_hat: result.posterior_mean()[offset..].to_vec(),
        oracle_log_z: oracle,
        analytic_posterior_mean: posterior.as_ref().map(|p| p.mean.clone()),
        analytic_posterior_sd: posterior
            .as_ref()
            .map(|p| (0..p.mean.len()).map(|k| p.cov[(k, k)].sqrt()).collect()),
        sampler_seed: sampler_config.seed,
        config: &cfg,
    };
    write_json(&out.join("summary.json"), &summary)?;

    match (&stall, summary.log_z) {
        (Some(reason), _) => Err(CliError::Stalled(format!(
            "{reason}; partial results in {}",
            out.display()
        ))),
        (None, Some(log_z)) => {
            println!(
                "log Z = {log_z:.4} ± {:.4} ({} likelihood calls, {} iterations) -> {}",
                result.log_z_error,
                result.n_like,
                result.n_iter,
                out.display()
            );
            Ok(())
        }
        (None, None) => Err(CliError::Runtime(format!(
            "{}; raw results in {}",
            summary.analysis_error.unwrap_or_default(),
            out.display()
        ))),
    }
}

fn apply_batch_overrides(spec: &mut SweepSpec, batch: &BatchArgs) {
    for case in &mut spec.cases {
        if let Some(seed) = batch.seed {
            case.base_seed = seed;
        }
        if let Some(reps) = batch.reps {
            case.repetitions = reps;
        }
    }
    if let Some(b) = batch.beta_bounds {
        spec.beta_bounds = b.into();
    }
}

fn execute(spec: &SweepSpec, suite: Option<Suite>, out: &Path, workers: usize) -> Result<(), CliError> {
    spec.validate()?;
    let options = RunOptions {
        workers,
        records_dir: Some(out.join("records")),
    };
    let outcome = run_sweep(spec, &options)?;
    let files = write_sweep_outputs(out, suite, spec, &outcome)?;
    let failures: usize = outcome.stats.iter().map(|s| s.failures).sum();
    let runs = outcome.records.len();
    println!(
        "{runs} runs, {failures} failed; wrote {} files to {}",
        files.len(),
        out.display()
    );
    Ok(())
}

pub fn sweep(config_path: &Path, batch: BatchArgs) -> Result<(), CliError> {
    let mut spec = config::load_sweep(config_path)?;
    apply_batch_overrides(&mut spec, &batch);
    let out = batch.out.clone().unwrap_or_else(|| PathBuf::from("sweep_out"));
    execute(&spec, None, &out, batch.workers)
}

pub fn replicate(suite: Suite, batch: BatchArgs) -> Result<(), CliError> {
    let mut spec = suite.spec(batch.seed.unwrap_or(0), batch.reps.unwrap_or(10))?;
    apply_batch_overrides(&mut spec, &batch);
    let out = batch
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("results").join(suite.name()));
    execute(&spec, Some(suite), &out, batch.workers)
}

pub fn prior_curve(
    config_path: Option<&Path>,
    betas: &[f64],
    range: Option<&[f64]>,
    points: usize,
    out: &Path,
) -> Result<(), CliError> {
    let prior = match config_path {
        Some(path) => config::load::<PriorFile>(path)?.prior.build()?,
        None => PriorSpec::symmetric(1, 0.0, 4.0)?,
    };
    if prior.dim() != 1 {
        return Err(CliError::Config("prior-curve needs a one-dimensional prior".into()));
    }
    let (lo, hi) = match range {
        Some(&[lo, hi]) => (lo, hi),
        Some(_) => return Err(CliError::Config("--range takes two values".into())),
        None if prior.is_bounded() => (prior.lower()[0], prior.upper()[0]),
        None => return Err(CliError::Config("unbounded prior: pass --range lo,hi".into())),
    };
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(CliError::Config(format!("bad grid range [{lo}, {hi}]")));
    }
    let grid: Vec<f64> = match points {
        0 => return Err(CliError::Config("--points must be at least 1".into())),
        1 => vec![0.5 * (lo + hi)],
        n => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    };
    let rows: Vec<Vec<Cell>> = prior
        .emit_prior_evolution(betas, &grid)?
        .into_iter()
        .map(|r| vec![r.beta.into(), r.theta.into(), r.density.into()])
        .collect();
    write_csv(out, &["beta", "theta", "density"], &rows)?;
    println!("{} rows -> {}", rows.len(), out.display());
    Ok(())
}
