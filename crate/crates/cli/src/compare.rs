//! Side-by-side summary of finished runs.

use std::fmt::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::output::{read_csv, CsvRow, Manifest};

/// Figures of merit of one run, computed from its CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub name: String,
    pub method: String,
    pub iterations: usize,
    pub stop_reason: String,
    pub min_rre: Option<f64>,
    pub min_rre_k: Option<usize>,
    pub final_rre: Option<f64>,
    pub max_ssim: Option<f64>,
    /// First iteration whose RRE is within 5 % of the minimum.
    pub k_within_5pct: Option<usize>,
}

impl RunSummary {
    pub fn from_rows(manifest: &Manifest, rows: &[CsvRow]) -> Self {
        let with_rre: Vec<(usize, f64)> = rows
            .iter()
            .filter_map(|r| r.rre.map(|e| (r.k, e)))
            .collect();
        let min = with_rre.iter().copied().min_by(|a, b| a.1.total_cmp(&b.1));
        let k_within = min.and_then(|(_, m)| {
            with_rre
                .iter()
                .find(|(_, e)| *e <= 1.05 * m)
                .map(|(k, _)| *k)
        });
        Self {
            name: manifest.name.clone(),
            method: manifest.method.clone(),
            iterations: rows.iter().filter(|r| r.k > 0).count(),
            stop_reason: manifest.stop_reason.clone(),
            min_rre: min.map(|m| m.1),
            min_rre_k: min.map(|m| m.0),
            final_rre: rows.last().and_then(|r| r.rre),
            max_ssim: rows.iter().filter_map(|r| r.ssim).max_by(f64::total_cmp),
            k_within_5pct: k_within,
        }
    }

    /// `final RRE / min RRE`.
    pub fn semiconvergence_ratio(&self) -> Option<f64> {
        Some(self.final_rre? / self.min_rre?)
    }

    pub fn load(manifest_path: &Path) -> Result<Self> {
        let manifest = Manifest::read(manifest_path)?;
        let csv = manifest_path
            .parent()
            .unwrap_or(Path::new(""))
            .join(&manifest.csv);
        let rows = read_csv(&csv)
            .with_context(|| format!("CSV referenced by {}", manifest_path.display()))?;
        Ok(Self::from_rows(&manifest, &rows))
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "-".into())
}

fn cell_k(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "-".into())
}

/// Aligned plain-text table, one column per run.
pub fn render_table(runs: &[RunSummary]) -> String {
    let rows: Vec<(&str, Vec<String>)> = vec![
        ("run", runs.iter().map(|r| r.name.clone()).collect()),
        ("method", runs.iter().map(|r| r.method.clone()).collect()),
        (
            "iterations",
            runs.iter().map(|r| r.iterations.to_string()).collect(),
        ),
        (
            "stop reason",
            runs.iter().map(|r| r.stop_reason.clone()).collect(),
        ),
        ("min RRE", runs.iter().map(|r| cell(r.min_rre)).collect()),
        (
            "k at min RRE",
            runs.iter().map(|r| cell_k(r.min_rre_k)).collect(),
        ),
        (
            "final RRE",
            runs.iter().map(|r| cell(r.final_rre)).collect(),
        ),
        (
            "final/min RRE",
            runs.iter()
                .map(|r| cell(r.semiconvergence_ratio()))
                .collect(),
        ),
        (
            "k within 5% of min",
            runs.iter().map(|r| cell_k(r.k_within_5pct)).collect(),
        ),
        ("max SSIM", runs.iter().map(|r| cell(r.max_ssim)).collect()),
    ];
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let col_w: Vec<usize> = (0..runs.len())
        .map(|c| {
            rows.iter()
                .map(|(_, v)| v[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (label, values) in &rows {
        let _ = write!(out, "{label:<label_w$}");
        for (v, w) in values.iter().zip(&col_w) {
            let _ = write!(out, "  {v:>w$}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: usize, rre: f64) -> CsvRow {
        CsvRow {
            k,
            lambda: 0.0,
            data_residual: 1.0,
            ba_residual: None,
            proj_residual: 1.0,
            sol_norm: 1.0,
            rre: Some(rre),
            ssim: Some(1.0 - rre),
            elapsed_s: None,
        }
    }

    #[test]
    fn summary_figures() {
        let rows = [row(1, 0.9), row(2, 0.52), row(3, 0.5), row(4, 0.6)];
        let m: Manifest = serde_json::from_value(serde_json::json!({
            "name": "ab", "method": "ab", "seed": 1, "problem": {"preset": "tp2", "matched": false},
            "solver": {"method": "ab", "max_iter": 4, "stopping": "none", "ncp_window": 0, "restart": 0, "reorthogonalize": true},
            "noise_norm": 1.0, "iterations": 4, "cycles": 1, "stop_reason": "maxIter", "min_rre": null,
            "final": {"k": 4, "lambda": 0.0, "data_residual": 1.0, "rre": 0.6, "ssim": 0.4},
            "lambda_fallbacks": 0, "csv": "ab.csv", "images": [], "warnings": []
        }))
        .unwrap();
        let s = RunSummary::from_rows(&m, &rows);
        assert_eq!(
            (s.min_rre, s.min_rre_k, s.final_rre, s.k_within_5pct),
            (Some(0.5), Some(3), Some(0.6), Some(2))
        );
        assert!((s.semiconvergence_ratio().unwrap() - 1.2).abs() < 1e-15);
        assert_eq!(s.max_ssim, Some(0.5));
        let table = render_table(&[s.clone(), s]);
        assert_eq!(table.lines().count(), 10);
        assert!(table
            .lines()
            .nth(4)
            .unwrap()
            .ends_with("0.500000  0.500000"));
    }
}
