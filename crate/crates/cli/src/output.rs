//! Files written per solver: iteration CSV, PGM images, JSON manifest.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use abba_core::IterationRecord;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{ProblemSpec, SolverSpec};

pub const CSV_HEADER: [&str; 9] = [
    "k",
    "lambda",
    "data_residual",
    "ba_residual",
    "proj_residual",
    "sol_norm",
    "rre",
    "ssim",
    "elapsed_s",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV row per record. `elapsed_s` stays empty unless `timing` is set so
/// that reruns are byte-identical.
pub fn write_csv(path: &Path, records: &[IterationRecord], timing: bool) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.lambda.to_string(),
            r.data_residual.to_string(),
            opt(r.ba_residual),
            r.proj_residual.to_string(),
            r.solution_norm.to_string(),
            opt(r.rre),
            opt(r.ssim),
            if timing {
                r.elapsed.to_string()
            } else {
                String::new()
            },
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A parsed CSV row; empty cells become `None`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub k: usize,
    pub lambda: f64,
    pub data_residual: f64,
    pub ba_residual: Option<f64>,
    pub proj_residual: f64,
    pub sol_norm: f64,
    pub rre: Option<f64>,
    pub ssim: Option<f64>,
    pub elapsed_s: Option<f64>,
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let rows = r
        .deserialize()
        .collect::<Result<Vec<CsvRow>, _>>()
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(rows)
}

/// Binary 16-bit PGM; values are mapped linearly from `[lo, hi]` and clipped.
pub fn write_pgm(
    path: &Path,
    image: &[f64],
    width: usize,
    height: usize,
    lo: f64,
    hi: f64,
) -> Result<()> {
    assert_eq!(image.len(), width * height);
    let mut w = BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    write!(w, "P5\n{width} {height}\n65535\n")?;
    let span = hi - lo;
    for &v in image {
        let t = if span > 0.0 {
            ((v - lo) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        w.write_all(&((t * 65535.0).round() as u16).to_be_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Header and samples of a 16-bit PGM written by [`write_pgm`].
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        anyhow::ensure!(pos > start, "truncated PGM header");
        fields.push(std::str::from_utf8(&bytes[start..pos])?.to_string());
    }
    anyhow::ensure!(
        fields[0] == "P5" && fields[3] == "65535",
        "not a 16-bit binary PGM"
    );
    let (w, h): (usize, usize) = (fields[1].parse()?, fields[2].parse()?);
    let data = &bytes[pos + 1..];
    anyhow::ensure!(
        data.len() == 2 * w * h,
        "PGM payload has {} bytes, expected {}",
        data.len(),
        2 * w * h
    );
    Ok((
        w,
        h,
        data.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect(),
    ))
}

/// Row-major plain CSV, `width` values per line.
pub fn write_raw_csv(path: &Path, image: &[f64], width: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    for row in image.chunks(width) {
        w.write_record(row.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `image` as raw CSV when `path` ends in `.csv`, else as 16-bit PGM
/// over its own value range.
pub fn export_image(path: &Path, image: &[f64], width: usize, height: usize) -> Result<()> {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        return write_raw_csv(path, image, width);
    }
    let (lo, hi) = image
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| {
            (l.min(x), h.max(x))
        });
    write_pgm(path, image, width, height, lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordSummary {
    pub k: usize,
    pub lambda: f64,
    pub data_residual: f64,
    pub rre: Option<f64>,
    pub ssim: Option<f64>,
}

impl From<&IterationRecord> for RecordSummary {
    fn from(r: &IterationRecord) -> Self {
        Self {
            k: r.k,
            lambda: r.lambda,
            data_residual: r.data_residual,
            rre: r.rre,
            ssim: r.ssim,
        }
    }
}

/// Per-solver run manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub method: String,
    pub seed: u64,
    pub problem: ProblemSpec,
    pub solver: SolverSpec,
    pub noise_norm: f64,
    pub iterations: usize,
    pub cycles: usize,
    pub stop_reason: String,
    /// Record with the smallest RRE, when RRE was tracked.
    pub min_rre: Option<RecordSummary>,
    #[serde(rename = "final")]
    pub final_record: RecordSummary,
    pub lambda_fallbacks: usize,
    /// CSV path relative to the manifest.
    pub csv: String,
    pub images: Vec<String>,
    pub warnings: Vec<String>,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}
