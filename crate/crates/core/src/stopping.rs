//! Stopping rules evaluated once per iteration on the data-space residual
//! `b − A x_k`.

use alloc::vec::Vec;

#[cfg(not(any(feature = "std", test)))]
use num_traits::Float;

use crate::{Error, Result};

pub const DEFAULT_DP_TAU: f64 = 1.01;
pub const DEFAULT_RNS_EPSILON: f64 = 1e-4;
pub const DEFAULT_NCP_THRESHOLD: f64 = 0.05;

/// Discrepancy principle: stop once `‖b − A x_k‖₂ ≤ τ‖e‖₂`.
pub fn dp_should_stop(residual_norm: f64, noise_norm: f64, tau: f64) -> bool {
    residual_norm <= tau * noise_norm
}

/// Residual-norm stagnation: the relative change of the last two norms is below `ε`.
pub fn rns_should_stop(history: &[f64], epsilon: f64) -> bool {
    let [.., prev, last] = history else {
        return false;
    };
    if *prev == 0.0 {
        return true;
    }
    ((prev - last).abs() / prev) < epsilon
}

/// Power spectrum `|DFT(r)_j|²` for `j = 1..=⌊len/2⌋` (DC excluded).
pub fn periodogram(signal: &[f64]) -> Vec<f64> {
    #[cfg(feature = "std")]
    {
        periodogram_fft(signal)
    }
    #[cfg(not(feature = "std"))]
    {
        periodogram_dft(signal)
    }
}

/// Direct `O(n²)` evaluation of [`periodogram`].
pub fn periodogram_dft(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let q = n / 2;
    let mut out = Vec::with_capacity(q);
    for j in 1..=q {
        let (mut re, mut im) = (0.0, 0.0);
        for (t, &v) in signal.iter().enumerate() {
            // Reduce the phase index first to keep the angle small.
            let phase = ((j * t) % n) as f64 * core::f64::consts::TAU / n as f64;
            re += v * phase.cos();
            im -= v * phase.sin();
        }
        out.push(re * re + im * im);
    }
    out
}

#[cfg(feature = "std")]
pub fn periodogram_fft(signal: &[f64]) -> Vec<f64> {
    use rustfft::num_complex::Complex;
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v, 0.0)).collect();
    rustfft::FftPlanner::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    buf[1..=n / 2].iter().map(|c| c.norm_sqr()).collect()
}

/// Kolmogorov–Smirnov distance between the normalized cumulative periodogram
/// of `residual` and the white-noise diagonal.
///
/// With `window > 0` the residual is cut into consecutive segments of that
/// length (a trailing partial segment is dropped) and their periodograms are
/// averaged; `window == detector count` gives per-view spectra. `window == 0`
/// uses the whole flattened residual. Returns 0 for a zero residual.
pub fn ncp_distance(residual: &[f64], window: usize) -> Result<f64> {
    let seg = if window == 0 { residual.len() } else { window };
    if seg < 8 || residual.len() < seg {
        return Err(Error::InvalidConfig(
            "periodogram needs segments of at least 8 samples".into(),
        ));
    }
    let mut power: Vec<f64> = alloc::vec![0.0; seg / 2];
    for chunk in residual.chunks_exact(seg) {
        for (acc, p) in power.iter_mut().zip(periodogram(chunk)) {
            *acc += p;
        }
    }
    let total: f64 = power.iter().sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    let q = power.len() as f64;
    let mut cum = 0.0;
    let mut worst = 0.0f64;
    for (j, p) in power.iter().enumerate() {
        cum += p;
        worst = worst.max((cum / total - (j + 1) as f64 / q).abs());
    }
    Ok(worst)
}

/// Normalized cumulative periodogram rule: stop once the residual looks white.
pub fn ncp_should_stop(residual: &[f64], threshold: f64, window: usize) -> Result<bool> {
    Ok(ncp_distance(residual, window)? <= threshold)
}

/// Stopping rule with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule {
    None,
    /// Discrepancy principle with safety factor `tau ≥ 1` and known `‖e‖₂`.
    Dp {
        tau: f64,
        noise_norm: f64,
    },
    /// Cumulative periodogram whiteness test.
    Ncp {
        threshold: f64,
        window: usize,
    },
    /// Residual norm stagnation.
    Rns {
        epsilon: f64,
    },
}

impl StoppingRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StoppingRule::None => Ok(()),
            StoppingRule::Dp { tau, noise_norm } => {
                if !(tau >= 1.0 && tau.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "discrepancy principle needs tau >= 1".into(),
                    ));
                }
                if !(noise_norm >= 0.0 && noise_norm.is_finite()) {
                    return Err(Error::InvalidConfig(
                        "discrepancy principle needs a nonnegative noise norm".into(),
                    ));
                }
                Ok(())
            }
            StoppingRule::Ncp { threshold, .. } => {
                if !(threshold > 0.0 && threshold < 1.0) {
                    return Err(Error::InvalidConfig(
                        "NCP threshold must lie in (0, 1)".into(),
                    ));
                }
                Ok(())
            }
            StoppingRule::Rns { epsilon } => {
                if !(epsilon > 0.0) {
                    return Err(Error::InvalidConfig(
                        "RNS tolerance must be positive".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    pub fn needs_residual_vector(&self) -> bool {
        matches!(self, StoppingRule::Ncp { .. })
    }
}

/// Per-run state: the rule plus the append-only residual-norm history.
#[derive(Debug, Clone)]
pub struct StoppingState {
    rule: StoppingRule,
    history: Vec<f64>,
}

impl StoppingState {
    pub fn new(rule: StoppingRule) -> Result<Self> {
        rule.validate()?;
        Ok(Self {
            rule,
            history: Vec::new(),
        })
    }

    pub fn rule(&self) -> StoppingRule {
        self.rule
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Records this iteration's residual and reports whether to stop.
    /// `residual` is only read by the NCP rule.
    pub fn update(&mut self, residual_norm: f64, residual: Option<&[f64]>) -> Result<bool> {
        self.history.push(residual_norm);
        match self.rule {
            StoppingRule::None => Ok(false),
            StoppingRule::Dp { tau, noise_norm } => {
                Ok(dp_should_stop(residual_norm, noise_norm, tau))
            }
            StoppingRule::Rns { epsilon } => Ok(rns_should_stop(&self.history, epsilon)),
            StoppingRule::Ncp { threshold, window } => {
                let r = residual.ok_or(Error::InvalidConfig(
                    "NCP rule needs the residual vector".into(),
                ))?;
                ncp_should_stop(r, threshold, window)
            }
        }
    }
}
