//! Running every solver of a config and persisting the results.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::{Arc, OnceLock};
use std::time::Instant;

use abba_core::gk::run_gk;
use abba_core::gmres::run_gmres;
use abba_core::solver::GroundTruth;
use abba_core::{SolveResult, SolverConfig};

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{write_csv, write_pgm, Manifest, RecordSummary};
use crate::problem::Problem;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "ABBA_OUT_DIR";

#[derive(Debug)]
pub enum ExperimentError {
    /// Bad configuration or unbuildable problem (exit status 2).
    Config(String),
    /// A solver failed (exit status 1).
    Solver { name: String, message: String },
    /// Writing results failed (exit status 1).
    Output(anyhow::Error),
}

impl ExperimentError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Config(m) => write!(f, "configuration error: {m}"),
            ExperimentError::Solver { name, message } => {
                write!(f, "solver '{name}' failed: {message}")
            }
            ExperimentError::Output(e) => write!(f, "output error: {e:#}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<ConfigError> for ExperimentError {
    fn from(e: ConfigError) -> Self {
        ExperimentError::Config(e.0)
    }
}

fn monotonic_seconds() -> f64 {
    static START: OnceLock<Instant> = OnceLock::new();
    START.get_or_init(Instant::now).elapsed().as_secs_f64()
}

/// Runs one solver configuration against a problem, picking the solver family
/// from the method.
pub fn solve(problem: &Problem, cfg: &SolverConfig) -> abba_core::Result<SolveResult> {
    if cfg.method.is_gmres() {
        run_gmres(&problem.forward, &problem.back, &problem.b, cfg)
    } else {
        run_gk(&problem.forward, &problem.back, &problem.b, cfg)
    }
}

/// Outcome of one solver within an experiment.
#[derive(Debug)]
pub struct RunOutput {
    pub name: String,
    pub manifest_path: PathBuf,
    pub csv_path: PathBuf,
    pub manifest: Manifest,
}

/// Output directory: `--out`, else the config's `output_dir` (relative to
/// the config file), else `$ABBA_OUT_DIR`, else `abba-out`.
pub fn resolve_out_dir(
    cli: Option<&Path>,
    cfg: &ExperimentConfig,
    config_path: Option<&Path>,
) -> PathBuf {
    if let Some(p) = cli {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output_dir {
        let base = config_path.and_then(Path::parent).unwrap_or(Path::new(""));
        return base.join(p);
    }
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("abba-out"))
}

/// Builds the problem, runs every solver and writes CSV, manifest and images
/// for each into `out_dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out_dir: &Path,
) -> Result<Vec<RunOutput>, ExperimentError> {
    cfg.check()?;
    let kind = cfg.problem.resolve()?;
    let problem = Problem::build(&kind, cfg.problem.matched, cfg.seed)
        .map_err(|e| ExperimentError::Config(format!("problem: {e}")))?;
    let truth = Arc::new(GroundTruth {
        x: problem.x_true.clone(),
        grid: problem.grid,
    });
    let labels = cfg.labels();

    let mut configs = Vec::with_capacity(cfg.solvers.len());
    for (i, (spec, label)) in cfg.solvers.iter().zip(&labels).enumerate() {
        let mut sc = spec
            .to_config(problem.noise_norm)
            .map_err(|e| ExperimentError::Config(format!("solver[{i}] ({label}): {e}")))?;
        if cfg.track_metrics {
            sc = sc.with_truth(truth.clone());
        }
        if cfg.image_export_stride > 0 && problem.grid.is_some() {
            sc = sc.keeping_iterates();
        }
        if cfg.record_timing {
            sc.clock = Some(monotonic_seconds);
        }
        configs.push(sc);
    }

    let results: Vec<abba_core::Result<SolveResult>> = if cfg.parallel && configs.len() > 1 {
        std::thread::scope(|s| {
            let handles: Vec<_> = configs
                .iter()
                .map(|c| s.spawn(|| solve(&problem, c)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("solver thread panicked"))
                .collect()
        })
    } else {
        configs.iter().map(|c| solve(&problem, c)).collect()
    };

    std::fs::create_dir_all(out_dir).map_err(|e| {
        ExperimentError::Output(anyhow::anyhow!("creating {}: {e}", out_dir.display()))
    })?;
    let mut outputs = Vec::with_capacity(results.len());
    for (i, result) in results.into_iter().enumerate() {
        let name = labels[i].clone();
        let result = result.map_err(|e| ExperimentError::Solver {
            name: name.clone(),
            message: e.to_string(),
        })?;
        let out = persist(cfg, &problem, i, &name, &configs[i], &result, out_dir)
            .map_err(ExperimentError::Output)?;
        outputs.push(out);
    }
    Ok(outputs)
}

fn persist(
    cfg: &ExperimentConfig,
    problem: &Problem,
    index: usize,
    name: &str,
    sc: &SolverConfig,
    result: &SolveResult,
    out_dir: &Path,
) -> anyhow::Result<RunOutput> {
    let csv_name = format!("{name}.csv");
    let csv_path = out_dir.join(&csv_name);
    write_csv(&csv_path, &result.records, cfg.record_timing)?;

    let mut images = Vec::new();
    if let Some(grid) = problem.grid {
        let (lo, hi) = problem
            .x_true
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
                (l.min(v), h.max(v))
            });
        let stride = cfg.image_export_stride;
        if stride > 0 {
            let stepped = result.records.iter().filter(|r| r.k > 0);
            for (rec, x) in stepped.zip(&result.iterates) {
                if rec.k % stride == 0 {
                    let file = format!("{name}_k{:04}.pgm", rec.k);
                    write_pgm(&out_dir.join(&file), x, grid.nx, grid.ny, lo, hi)?;
                    images.push(file);
                }
            }
        }
        let file = format!("{name}_final.pgm");
        write_pgm(&out_dir.join(&file), &result.x, grid.nx, grid.ny, lo, hi)?;
        images.push(file);
    }

    let mut warnings = result.warnings.clone();
    if !sc.method.is_gmres() && !problem.matched {
        warnings.push(format!(
            "{} assumes B = Aᵀ but the problem uses an unmatched backprojector",
            sc.method
        ));
    }
    let manifest = Manifest {
        name: name.to_string(),
        method: sc.method.name().to_string(),
        seed: cfg.seed,
        problem: cfg.problem.clone(),
        solver: cfg.solvers[index].clone(),
        noise_norm: problem.noise_norm,
        iterations: result.records.iter().filter(|r| r.k > 0).count(),
        cycles: result.cycles,
        stop_reason: result.stop_reason.name().to_string(),
        min_rre: result.min_rre().map(RecordSummary::from),
        final_record: RecordSummary::from(result.final_record()),
        lambda_fallbacks: result.records.iter().filter(|r| r.lambda_fallback).count(),
        csv: csv_name,
        images,
        warnings,
    };
    let manifest_path = out_dir.join(format!("{name}.json"));
    manifest.write(&manifest_path)?;
    Ok(RunOutput {
        name: name.to_string(),
        manifest_path,
        csv_path,
        manifest,
    })
}
