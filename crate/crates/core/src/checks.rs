//! Oracle checks shared by the `validate` subcommand and the test suites.

use faer::MatRef;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::covariance::CovarianceModel;
use crate::error::Result;
use crate::grid::GridSpec;
use crate::pulse::{sample_pulse, PulseKind, PulseParams};
use crate::rng;
use crate::sensing::{fim_closed_form, fim_discrete_impl, DerivativeMethod};
use crate::sweep::{AxisScale, SweepGridSpec};

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

/// `||a - b||_F / ||b||_F`.
pub fn frobenius_rel_error(a: MatRef<'_, Complex64>, b: MatRef<'_, Complex64>) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            num += (a[(i, j)] - b[(i, j)]).norm_sqr();
            den += b[(i, j)].norm_sqr();
        }
    }
    (num / den).sqrt()
}

/// Uniform draws inside the sweep box, uniform in `log10 gamma` on a log
/// axis.
pub fn random_sweep_params(spec: &SweepGridSpec, count: usize, seed: u64) -> Vec<PulseParams> {
    let mut r = rng::stream(seed, 0);
    let mut draw = |axis: &crate::sweep::Axis| {
        let u: f64 = r.random();
        match axis.scale {
            AxisScale::Linear => axis.min + u * (axis.max - axis.min),
            AxisScale::Log => 10f64.powf(axis.min.log10() + u * (axis.max.log10() - axis.min.log10())),
        }
    };
    (0..count)
        .map(|_| {
            let gamma = draw(&spec.gamma);
            let alpha_c = draw(&spec.alpha_c);
            let beta_c = draw(&spec.beta_c);
            PulseParams { gamma, alpha_c, beta_c }
        })
        .collect()
}

/// Relative deviation of the discrete FIM entries `(tt, nn, tn)` from the
/// closed form. The cross term is measured against `|I_tn|`, or against
/// `sqrt(I_tt I_nn)` when the closed form vanishes.
pub fn fim_relative_errors(p: &PulseParams, g: &GridSpec) -> Result<[f64; 3]> {
    let pulse = sample_pulse(PulseKind::Tgp(*p), g)?;
    let d = fim_discrete_impl(&pulse, 1.0, DerivativeMethod::Analytic, false)?.fim;
    let c = fim_closed_form(p, g, 1.0);
    let cross_scale = if c.i_tn != 0.0 { c.i_tn.abs() } else { (c.i_tt * c.i_nn).sqrt() };
    Ok([(d.i_tt - c.i_tt).abs() / c.i_tt, (d.i_nn - c.i_nn).abs() / c.i_nn, (d.i_tn - c.i_tn).abs() / cross_scale])
}

/// Closed-form against discrete FIM for `count` random sweep points.
pub fn fim_oracle(spec: &SweepGridSpec, g: &GridSpec, count: usize, seed: u64, tol: f64) -> Result<CheckOutcome> {
    let params = random_sweep_params(spec, count, seed);
    let errs: Vec<[f64; 3]> = params.par_iter().map(|p| fim_relative_errors(p, g)).collect::<Result<_>>()?;
    let worst = errs.iter().map(|e| e[0].max(e[1]).max(e[2])).collect::<Vec<_>>();
    let (imax, max) = worst.iter().copied().enumerate().fold((0, 0.0), |a, (i, v)| if v > a.1 { (i, v) } else { a });
    let within = worst.iter().filter(|&&v| v <= tol).count();
    let p = params[imax];
    Ok(CheckOutcome {
        name: format!("closed-form vs discrete FIM on {}x{}", g.m, g.n),
        passed: within == count,
        detail: format!(
            "{within}/{count} points within {tol:.1e}; worst {max:.3e} at (gamma={:.4}, alpha_c={:.3}, beta_c={:.3})",
            p.gamma, p.alpha_c, p.beta_c
        ),
    })
}

/// Closed-form covariance against a Monte Carlo estimate.
pub fn covariance_oracle(model: &CovarianceModel, samples: usize, seed: u64, tol: f64) -> Result<CheckOutcome> {
    let r = model.matrix();
    let mc = model.monte_carlo(samples, seed)?;
    let err = frobenius_rel_error(r.as_ref(), mc.as_ref());
    Ok(CheckOutcome {
        name: format!("closed-form vs Monte Carlo covariance ({samples} draws)"),
        passed: err <= tol,
        detail: format!("Frobenius relative error {err:.3e} (limit {tol:.1e})"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_points_stay_in_the_box() {
        let spec = SweepGridSpec::default();
        let pts = random_sweep_params(&spec, 200, 1);
        assert!(pts.iter().all(|p| (0.01..=100.0).contains(&p.gamma)
            && (0.0..=50.0).contains(&p.alpha_c)
            && (0.0..=10.0).contains(&p.beta_c)));
        assert_eq!(pts, random_sweep_params(&spec, 200, 1));
        assert!(pts.iter().any(|p| p.gamma < 0.1) && pts.iter().any(|p| p.gamma > 10.0));
    }

    #[test]
    fn frobenius_error_of_identical_is_zero() {
        let a = faer::Mat::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64 + 1.0));
        assert_eq!(frobenius_rel_error(a.as_ref(), a.as_ref()), 0.0);
    }
}
