//! Instantaneous and ergodic capacity of effective channels.

use faer::MatRef;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{effective_channel_with, ChannelModel, ChannelOptions, EffectiveChannel, PathSet};
use crate::error::{Error, Result};
use crate::linalg;
use crate::pulse::DiscretePulse;

/// Per-realisation scaling applied before the capacity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// Physical channel, as used for covariance validation.
    #[default]
    None,
    /// `||H||_F^2 = 1`.
    UnitFrobenius,
    /// `||H||_F^2 = MN`, i.e. unit average gain per DD symbol.
    UnitAverageGain,
}

impl Normalization {
    /// Applies the normalisation in place. A zero channel is left as is.
    pub fn apply(&self, h: &mut EffectiveChannel) {
        let target = match self {
            Normalization::None => return,
            Normalization::UnitFrobenius => 1.0,
            Normalization::UnitAverageGain => h.grid.size() as f64,
        };
        let f = h.frobenius_sqr();
        if f > 0.0 {
            h.scale((target / f).sqrt());
        }
    }
}

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

fn check_finite(h: &EffectiveChannel) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFiniteChannel)
    }
}

/// `log2 det(I + (snr/MN) H H^H)` with linear `snr`.
pub fn instantaneous_capacity(h: &EffectiveChannel, snr: f64) -> Result<f64> {
    check_finite(h)?;
    let g = linalg::gram(h.h.as_ref());
    linalg::log2_det_identity_plus(g.as_ref(), snr / h.h.nrows() as f64)
}

/// Eigenvalues of `H H^H` (squared singular values of `H`), clamped at 0.
pub fn gram_eigenvalues(h: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    let g = linalg::gram(h);
    Ok(linalg::hermitian_eigenvalues(g.as_ref())?.into_iter().map(|v| v.max(0.0)).collect())
}

/// `sum_i log2(1 + (snr/MN) lambda_i)` for each linear SNR.
pub fn capacity_from_eigenvalues(eig: &[f64], mn: usize, snrs: &[f64]) -> Vec<f64> {
    snrs.iter()
        .map(|&snr| {
            let c = snr / mn as f64;
            eig.iter().map(|&l| (c * l).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
        })
        .collect()
}

/// Capacity of one channel at several SNRs from a single eigendecomposition.
pub fn capacity_curve(h: &EffectiveChannel, snrs: &[f64]) -> Result<Vec<f64>> {
    check_finite(h)?;
    let eig = gram_eigenvalues(h.h.as_ref())?;
    Ok(capacity_from_eigenvalues(&eig, h.h.nrows(), snrs))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityConfig {
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub normalization: Normalization,
    pub seed: u64,
    #[serde(default)]
    pub channel: ChannelOptions,
}

impl CapacityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::Config("realizations must be at least 1".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db must be a non-empty list of finite values".into()));
        }
        Ok(())
    }
}

/// Mean and standard error of the capacity at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub snr_db: f64,
    pub mean: f64,
    pub stderr: f64,
    pub realizations: usize,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// Mean and standard error of `samples`.
pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let n = samples.len();
    let mut s = CompensatedSum::default();
    samples.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut v = CompensatedSum::default();
    samples.iter().for_each(|&x| v.add((x - mean) * (x - mean)));
    let var = v.value() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Capacity samples `[realisation][snr]` for a fixed list of path sets.
pub fn capacity_samples(
    realizations: &[PathSet],
    pulse: &DiscretePulse,
    snr_db: &[f64],
    normalization: Normalization,
    opts: ChannelOptions,
) -> Result<Vec<Vec<f64>>> {
    let snrs: Vec<f64> = snr_db.iter().map(|&d| db_to_linear(d)).collect();
    realizations
        .par_iter()
        .map(|paths| {
            let mut h = effective_channel_with(paths, pulse, opts)?;
            normalization.apply(&mut h);
            capacity_curve(&h, &snrs)
        })
        .collect()
}

/// Reduces `[realisation][snr]` samples to per-SNR estimates.
pub fn summarize(samples: &[Vec<f64>], snr_db: &[f64]) -> Vec<CapacityEstimate> {
    snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr)| {
            let col: Vec<f64> = samples.iter().map(|row| row[i]).collect();
            let (mean, stderr) = mean_stderr(&col);
            CapacityEstimate { snr_db: snr, mean, stderr, realizations: col.len() }
        })
        .collect()
}

/// Draws the realisations used by [`ergodic_capacity`].
pub fn draw_realizations(model: &ChannelModel, seed: u64, count: usize) -> Result<Vec<PathSet>> {
    model.validate()?;
    (0..count as u64).into_par_iter().map(|i| model.sample(seed, i)).collect()
}

/// Monte Carlo ergodic capacity of `pulse` over `model`.
///
/// Realisation `i` is drawn from stream `(config.seed, i)`, so every pulse
/// evaluated with the same config sees the same channels.
pub fn ergodic_capacity(
    config: &CapacityConfig,
    model: &ChannelModel,
    pulse: &DiscretePulse,
) -> Result<Vec<CapacityEstimate>> {
    config.validate()?;
    let reals = draw_realizations(model, config.seed, config.realizations)?;
    let samples = capacity_samples(&reals, pulse, &config.snr_db, config.normalization, config.channel)?;
    Ok(summarize(&samples, &config.snr_db))
}
