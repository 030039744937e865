use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abba_cli::compare::{render_table, RunSummary};
use abba_cli::config::ExperimentConfig;
use abba_cli::experiment::{resolve_out_dir, run_experiment};
use abba_cli::output::export_image;
use abba_core::ct::{build_test_problem, shepp_logan, ImageGrid, TestProblem};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "abba",
    version,
    about = "Hybrid AB-/BA-GMRES experiments for CT with unmatched projectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every solver of a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and $ABBA_OUT_DIR).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Summarize finished runs from their manifests.
    Compare {
        #[arg(required = true, num_args = 2..)]
        manifests: Vec<PathBuf>,
    },
    /// Export a phantom (and optionally its noisy sinogram) as 16-bit PGM,
    /// or as raw row-major CSV when the file name ends in `.csv`.
    Phantom {
        /// `shepp-logan`, or a preset: tp1-like, tp2, tp3-desk.
        name: String,
        #[arg(long)]
        out: PathBuf,
        /// Image size for `shepp-logan`.
        #[arg(long, default_value_t = 128)]
        size: usize,
        /// Also write the noisy sinogram (presets only), views as rows.
        #[arg(long)]
        sinogram: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("abba: {msg}");
    ExitCode::from(code)
}

fn run(config: &Path, out: Option<&Path>, seed: Option<u64>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(config) {
        Ok(c) => c,
        Err(e) => return fail(2, e),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dir = resolve_out_dir(out, &cfg, Some(config));
    match run_experiment(&cfg, &dir) {
        Ok(outputs) => {
            for o in outputs {
                let m = &o.manifest;
                let rre = m
                    .final_record
                    .rre
                    .map(|e| format!(" final RRE {e:.4}"))
                    .unwrap_or_default();
                println!(
                    "{}: {} iterations, stop {}{rre} -> {}",
                    o.name,
                    m.iterations,
                    m.stop_reason,
                    o.manifest_path.display()
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.exit_code() as u8, e),
    }
}

fn compare(manifests: &[PathBuf]) -> ExitCode {
    let mut runs = Vec::new();
    for m in manifests {
        match RunSummary::load(m) {
            Ok(r) => runs.push(r),
            Err(e) => return fail(2, format!("{e:#}")),
        }
    }
    print!("{}", render_table(&runs));
    ExitCode::SUCCESS
}

fn phantom(name: &str, out: &Path, size: usize, sinogram: Option<&Path>, seed: u64) -> ExitCode {
    let result = if name == "shepp-logan" {
        if sinogram.is_some() {
            return fail(2, "--sinogram needs a preset problem name");
        }
        let grid = match ImageGrid::square(size) {
            Ok(g) => g,
            Err(e) => return fail(2, e),
        };
        let x = shepp_logan(&grid).expect("square grid");
        export_image(out, &x, size, size)
    } else {
        let preset: TestProblem = match name.parse() {
            Ok(p) => p,
            Err(e) => return fail(2, e),
        };
        let p = match build_test_problem(preset, false, seed) {
            Ok(p) => p,
            Err(e) => return fail(1, e),
        };
        export_image(out, &p.x_true, p.grid.nx, p.grid.ny).and_then(|_| match sinogram {
            Some(path) => export_image(
                path,
                &p.b_noisy,
                p.geometry.det_count(),
                p.geometry.angles().len(),
            ),
            None => Ok(()),
        })
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, format!("{e:#}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, seed } => run(&config, out.as_deref(), seed),
        Command::Compare { manifests } => compare(&manifests),
        Command::Phantom {
            name,
            out,
            size,
            sinogram,
            seed,
        } => phantom(&name, &out, size, sinogram.as_deref(), seed),
    }
}
