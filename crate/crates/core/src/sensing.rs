//! Fisher information and Cramér-Rao bounds for joint delay-Doppler
//! estimation of a single target.
//!
//! The intrinsic FIM of a unit-energy pulse is built from the auxiliary
//! functions
//!
//! ```text
//! A(tau, nu) = -dx/dtau + j 2 pi nu x,    B(tau, nu) = -dx/dnu - j 2 pi tau x
//! ```
//!
//! as `I_tt = int |A|^2`, `I_nn = int |B|^2`, `I_tn = int Re(A* B)`. The full
//! FIM is `K_FIM` times the intrinsic one, with `K_FIM = 2 E_s |h_T|^2 / N_0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{check_unit_energy, UNIT_ENERGY_TOL};
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::pulse::{tgp_log_gradient, DiscretePulse, PulseKind, PulseParams};

/// Boundary-ring energy above which the discrete FIM warns about
/// truncation bias.
pub const BOUNDARY_ENERGY_WARN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FimMethod {
    ClosedForm,
    DiscreteNumeric,
}

impl FimMethod {
    pub fn label(&self) -> &'static str {
        match self {
            FimMethod::ClosedForm => "closed_form",
            FimMethod::DiscreteNumeric => "discrete",
        }
    }
}

/// How the pulse derivatives are obtained for the discrete FIM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMethod {
    /// Analytic gradient for Gaussian pulses, fine-step differences otherwise.
    #[default]
    Auto,
    /// Exact gradient of the continuous TGP (Gaussian pulses only).
    Analytic,
    /// Central differences of the continuous pulse with a step of 1/64 of
    /// the finer of the grid spacing and the inverse bandwidth, checked by
    /// Richardson extrapolation.
    FineStep,
    /// Second-order differences of the sampled matrix itself (one-sided on
    /// the border).
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FimResult {
    /// Intrinsic delay curvature, s^-2.
    pub i_tt: f64,
    /// Intrinsic Doppler curvature, Hz^-2.
    pub i_nn: f64,
    /// Intrinsic cross curvature.
    pub i_tn: f64,
    pub k_fim: f64,
    pub method: FimMethod,
}

/// Bounds derived from a FIM.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrlbResult {
    /// s^2.
    pub crlb_tau: f64,
    /// Hz^2.
    pub crlb_nu: f64,
    pub rho2: f64,
    /// Determinant of the full FIM.
    pub q_det: f64,
    pub d_poly: f64,
}

impl FimResult {
    /// Full 2x2 FIM `K_FIM * I0`.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let k = self.k_fim;
        [[k * self.i_tt, k * self.i_tn], [k * self.i_tn, k * self.i_nn]]
    }

    pub fn rho2(&self) -> f64 {
        self.i_tn * self.i_tn / (self.i_tt * self.i_nn)
    }

    /// Inverts the FIM. `g` supplies the `B^2 T^2` scaling of `D_poly`.
    pub fn crlb(&self, g: &GridSpec) -> CrlbResult {
        let det0 = self.i_tt * self.i_nn - self.i_tn * self.i_tn;
        let k = self.k_fim;
        CrlbResult {
            crlb_tau: self.i_nn / (k * det0),
            crlb_nu: self.i_tt / (k * det0),
            rho2: self.rho2(),
            q_det: k * k * det0,
            d_poly: 64.0 * g.bt() * g.bt() * det0 / (PI * PI),
        }
    }

    /// Same intrinsic FIM at another `K_FIM`.
    pub fn with_k(&self, k_fim: f64) -> Self {
        Self { k_fim, ..*self }
    }
}

/// `K_FIM = 2 * 10^(snr_db/10) * |h_T|^2`.
pub fn snr_to_kfim(snr_db: f64, h_t: Complex64) -> f64 {
    2.0 * 10f64.powf(snr_db / 10.0) * h_t.norm_sqr()
}

/// Closed-form intrinsic FIM of the unit-energy TGP.
pub fn fim_closed_form(p: &PulseParams, g: &GridSpec, k_fim: f64) -> FimResult {
    let bt2 = g.bt() * g.bt();
    let ag2 = p.alpha_c * p.alpha_c * p.gamma * p.gamma;
    let i_tt = PI / (8.0 * p.gamma * g.t * g.t) * (4.0 * (4.0 + ag2) + bt2 * (p.beta_c - 2.0).powi(2));
    let i_nn = PI * p.gamma / (8.0 * g.b * g.b) * (16.0 + bt2 * (p.beta_c + 2.0).powi(2));
    let i_tn = PI / 4.0 * p.alpha_c * p.gamma * (2.0 + p.beta_c);
    FimResult { i_tt, i_nn, i_tn, k_fim, method: FimMethod::ClosedForm }
}

/// `B_T^4 (beta^2 - 4)^2 + 32 B_T^2 (beta^2 + 4) + 64 (4 + alpha_gamma^2)`.
pub fn d_poly(p: &PulseParams, g: &GridSpec) -> f64 {
    let bt2 = g.bt() * g.bt();
    let b2 = p.beta_c * p.beta_c;
    let ag2 = (p.alpha_c * p.gamma).powi(2);
    bt2 * bt2 * (b2 - 4.0).powi(2) + 32.0 * bt2 * (b2 + 4.0) + 64.0 * (4.0 + ag2)
}

/// Closed-form CRLBs written over `D_poly`, which avoids the cancellation in
/// `I_tt I_nn - I_tn^2`.
pub fn crlb_closed_form(p: &PulseParams, g: &GridSpec, k_fim: f64) -> CrlbResult {
    let bt2 = g.bt() * g.bt();
    let ag2 = (p.alpha_c * p.gamma).powi(2);
    let d = d_poly(p, g);
    let bp = 16.0 + bt2 * (p.beta_c + 2.0).powi(2);
    let bm = 16.0 + bt2 * (p.beta_c - 2.0).powi(2) + 4.0 * ag2;
    CrlbResult {
        crlb_tau: 8.0 * g.t * g.t * p.gamma * bp / (k_fim * PI * d),
        crlb_nu: 8.0 * g.b * g.b * bm / (k_fim * PI * p.gamma * d),
        rho2: 4.0 * bt2 * (2.0 + p.beta_c).powi(2) * ag2 / (bp * bm),
        q_det: PI * PI * k_fim * k_fim / (64.0 * bt2) * d,
        d_poly: d,
    }
}

/// Discrete FIM together with diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteFim {
    pub fim: FimResult,
    pub derivative: DerivativeMethod,
    /// Energy in the outermost ring of samples.
    pub boundary_energy: f64,
    /// Largest relative change of a FIM entry between step `h` and the
    /// Richardson-extrapolated derivative (fine-step method only).
    pub richardson_defect: Option<f64>,
}

/// Numerical intrinsic FIM of a sampled pulse.
pub fn fim_discrete(pulse: &DiscretePulse, k_fim: f64) -> Result<FimResult> {
    Ok(fim_discrete_with(pulse, k_fim, DerivativeMethod::Auto)?.fim)
}

pub fn fim_discrete_with(pulse: &DiscretePulse, k_fim: f64, method: DerivativeMethod) -> Result<DiscreteFim> {
    fim_discrete_impl(pulse, k_fim, method, true)
}

/// Callers that evaluate many pulses report truncation in aggregate.
pub(crate) fn fim_discrete_impl(
    pulse: &DiscretePulse,
    k_fim: f64,
    method: DerivativeMethod,
    warn: bool,
) -> Result<DiscreteFim> {
    check_unit_energy(pulse)?;
    let g = pulse.grid;
    let boundary_energy = pulse.boundary_energy();
    if warn && boundary_energy > BOUNDARY_ENERGY_WARN {
        log::warn!(
            "{} pulse keeps {boundary_energy:.2e} of its energy on the grid boundary; the discrete FIM is biased by truncation",
            pulse.kind.label()
        );
    }
    let gaussian = pulse.kind.gaussian_params();
    let method = match (method, gaussian) {
        (DerivativeMethod::Auto, Some(_)) => DerivativeMethod::Analytic,
        (DerivativeMethod::Auto, None) => DerivativeMethod::FineStep,
        (DerivativeMethod::Analytic, None) => {
            return Err(Error::InvalidPulse(format!(
                "analytic derivatives need a Gaussian pulse, got {}",
                pulse.kind.label()
            )))
        }
        (m, _) => m,
    };
    // continuous normalisation: sum |x_c|^2 d_tau d_nu = 1
    let cell = g.d_tau() * g.d_nu();
    let xc = cell.sqrt().recip();
    let (entries, richardson_defect) = match method {
        DerivativeMethod::Analytic => {
            let p = gaussian.expect("checked above");
            (
                accumulate(
                    &g,
                    |tau, nu, i, j| {
                        let x = pulse.at(i, j) * xc;
                        let (dt, dn) = tgp_log_gradient(tau, nu, &p, &g);
                        (dt * x, dn * x)
                    },
                    pulse,
                    xc,
                ),
                None,
            )
        }
        DerivativeMethod::FineStep => {
            let ht = g.d_tau().min(1.0 / g.b) / 64.0;
            let hn = g.d_nu().min(1.0 / g.t) / 64.0;
            let s = pulse.scale() * xc;
            let f = |tau: f64, nu: f64| pulse.kind.evaluate(tau, nu, &g) * s;
            let central = |tau: f64, nu: f64, ht: f64, hn: f64| {
                ((f(tau + ht, nu) - f(tau - ht, nu)) / (2.0 * ht), (f(tau, nu + hn) - f(tau, nu - hn)) / (2.0 * hn))
            };
            let coarse = accumulate(&g, |tau, nu, _, _| central(tau, nu, ht, hn), pulse, xc);
            let extrapolated = accumulate(
                &g,
                |tau, nu, _, _| {
                    let (a1, b1) = central(tau, nu, ht, hn);
                    let (a2, b2) = central(tau, nu, ht / 2.0, hn / 2.0);
                    ((a2 * 4.0 - a1) / 3.0, (b2 * 4.0 - b1) / 3.0)
                },
                pulse,
                xc,
            );
            let scale = (coarse.0 * coarse.1).sqrt();
            let defect = [
                (coarse.0 - extrapolated.0).abs() / coarse.0.abs(),
                (coarse.1 - extrapolated.1).abs() / coarse.1.abs(),
                (coarse.2 - extrapolated.2).abs() / scale,
            ]
            .into_iter()
            .fold(0.0, f64::max);
            if warn && defect > 1e-4 {
                log::warn!("fine-step FIM changes by {defect:.2e} under Richardson extrapolation");
            }
            (coarse, Some(defect))
        }
        DerivativeMethod::Grid => {
            let (m, n) = (g.m, g.n);
            let at = |i: usize, j: usize| pulse.at(i, j) * xc;
            let diff = |lo: Complex64, hi: Complex64, span: f64| (hi - lo) / span;
            (
                accumulate(
                    &g,
                    |_, _, i, j| {
                        let dt = if i == 0 {
                            diff(at(0, j), at(1, j), g.d_tau())
                        } else if i == m - 1 {
                            diff(at(m - 2, j), at(m - 1, j), g.d_tau())
                        } else {
                            diff(at(i - 1, j), at(i + 1, j), 2.0 * g.d_tau())
                        };
                        let dn = if j == 0 {
                            diff(at(i, 0), at(i, 1), g.d_nu())
                        } else if j == n - 1 {
                            diff(at(i, n - 2), at(i, n - 1), g.d_nu())
                        } else {
                            diff(at(i, j - 1), at(i, j + 1), 2.0 * g.d_nu())
                        };
                        (dt, dn)
                    },
                    pulse,
                    xc,
                ),
                None,
            )
        }
        DerivativeMethod::Auto => unreachable!("resolved above"),
    };
    let (i_tt, i_nn, i_tn) = entries;
    Ok(DiscreteFim {
        fim: FimResult { i_tt, i_nn, i_tn, k_fim, method: FimMethod::DiscreteNumeric },
        derivative: method,
        boundary_energy,
        richardson_defect,
    })
}

/// Sums `|A|^2`, `|B|^2`, `Re(A* B)` over the grid times the cell area.
/// `grad(tau, nu, i, j)` returns `(dx/dtau, dx/dnu)` of the continuously
/// normalised pulse at storage position `(i, j)`.
fn accumulate<F>(g: &GridSpec, grad: F, pulse: &DiscretePulse, xc: f64) -> (f64, f64, f64)
where
    F: Fn(f64, f64, usize, usize) -> (Complex64, Complex64),
{
    let (mut tt, mut nn, mut tn) = (0.0, 0.0, 0.0);
    for i in 0..g.m {
        let tau = g.delay_at(i);
        let (mut rt, mut rn, mut rc) = (0.0, 0.0, 0.0);
        for j in 0..g.n {
            let nu = g.doppler_at(j);
            let x = pulse.at(i, j) * xc;
            let (dt, dn) = grad(tau, nu, i, j);
            let a = -dt + Complex64::new(0.0, 2.0 * PI * nu) * x;
            let b = -dn - Complex64::new(0.0, 2.0 * PI * tau) * x;
            rt += a.norm_sqr();
            rn += b.norm_sqr();
            rc += (a.conj() * b).re;
        }
        tt += rt;
        nn += rn;
        tn += rc;
    }
    let cell = g.d_tau() * g.d_nu();
    (tt * cell, nn * cell, tn * cell)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AfCut {
    ZeroDoppler,
    ZeroDelay,
    Full,
}

/// Sampled ambiguity function at integer lags.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbiguityFunction {
    pub cut: AfCut,
    /// Delay lags (s).
    pub tau: Vec<f64>,
    /// Doppler lags (Hz).
    pub nu: Vec<f64>,
    /// Row-major over `(tau, nu)`.
    pub values: Vec<Complex64>,
}

/// `AF(tau, nu) = sum x[u, v] x*[u - tau, v - nu] exp(j 2 pi (nu u - tau v)) d_tau d_nu`
/// with the continuously normalised pulse and zero padding outside the
/// grid. Lags run over the same centred index range as the grid. The full
/// surface costs `O((MN)^2)`.
pub fn ambiguity_function(pulse: &DiscretePulse, cut: AfCut) -> Result<AmbiguityFunction> {
    if (pulse.energy() - 1.0).abs() > UNIT_ENERGY_TOL {
        return Err(Error::NotUnitEnergy { energy: pulse.energy() });
    }
    let g = pulse.grid;
    let lags_k: Vec<i64> = match cut {
        AfCut::ZeroDelay => vec![0],
        _ => (0..g.m).map(|i| g.delay_index(i)).collect(),
    };
    let lags_l: Vec<i64> = match cut {
        AfCut::ZeroDoppler => vec![0],
        _ => (0..g.n).map(|j| g.doppler_index(j)).collect(),
    };
    // phase unit: d_tau d_nu = BT/(MN)
    let w = 2.0 * PI * g.d_tau() * g.d_nu();
    let mut values = Vec::with_capacity(lags_k.len() * lags_l.len());
    for &k in &lags_k {
        for &l in &lags_l {
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..g.m {
                let u = g.delay_index(i);
                for j in 0..g.n {
                    let v = g.doppler_index(j);
                    let y = pulse.at_index(u - k, v - l);
                    if y.re == 0.0 && y.im == 0.0 {
                        continue;
                    }
                    let phase = w * (l * u - k * v) as f64;
                    s += pulse.at(i, j) * y.conj() * Complex64::from_polar(1.0, phase);
                }
            }
            values.push(s);
        }
    }
    Ok(AmbiguityFunction {
        cut,
        tau: lags_k.iter().map(|&k| k as f64 * g.d_tau()).collect(),
        nu: lags_l.iter().map(|&l| l as f64 * g.d_nu()).collect(),
        values,
    })
}

/// Closed-form CRLB for Gaussian pulses, discrete FIM otherwise.
pub fn crlb_for_kind(kind: PulseKind, g: &GridSpec, k_fim: f64, method: FimMethod) -> Result<CrlbResult> {
    match (method, kind.gaussian_params()) {
        (FimMethod::ClosedForm, Some(p)) => Ok(crlb_closed_form(&p, g, k_fim)),
        (FimMethod::ClosedForm, None) => {
            Err(Error::InvalidPulse(format!("no closed-form FIM for the {} pulse", kind.label())))
        }
        (FimMethod::DiscreteNumeric, _) => {
            let pulse = crate::pulse::sample_pulse(kind, g)?;
            Ok(fim_discrete(&pulse, k_fim)?.crlb(g))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::sample_pulse;

    #[test]
    fn closed_form_unit_frame() {
        let g = GridSpec::new(2, 2, 1.0, 1.0).unwrap();
        let f = fim_closed_form(&PulseParams::SGP, &g, 1.0);
        // (pi/8)(16 + 4) on both axes
        assert!((f.i_tt - 2.5 * PI).abs() < 1e-14);
        assert!((f.i_nn - 2.5 * PI).abs() < 1e-14);
        assert_eq!(f.i_tn, 0.0);
    }

    #[test]
    fn closed_form_crlb_matches_inversion() {
        let g = GridSpec::sensing_default();
        for &(gm, a, b) in &[(1.0, 0.0, 0.0), (0.3, 12.0, -1.0), (7.0, 40.0, 6.5), (0.01, 50.0, 10.0)] {
            let p = PulseParams::new(gm, a, b).unwrap();
            let c = crlb_closed_form(&p, &g, 200.0);
            let f = fim_closed_form(&p, &g, 200.0);
            let inv = f.crlb(&g);
            assert!((c.crlb_tau / inv.crlb_tau - 1.0).abs() < 1e-12);
            assert!((c.crlb_nu / inv.crlb_nu - 1.0).abs() < 1e-12);
            assert!((c.rho2 - inv.rho2).abs() < 1e-12);
            let m = f.matrix();
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            assert!((c.q_det / det - 1.0).abs() < 1e-12);
            assert!((c.d_poly / inv.d_poly - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn kfim_mapping() {
        let one = Complex64::new(1.0, 0.0);
        assert_eq!(snr_to_kfim(0.0, one), 2.0);
        assert!((snr_to_kfim(20.0, one) - 200.0).abs() < 1e-12);
        assert!((snr_to_kfim(0.0, Complex64::new(0.0, 2.0)) - 8.0).abs() < 1e-15);
    }

    #[test]
    fn analytic_and_fine_step_derivatives_agree() {
        let g = GridSpec::new(64, 64, 1.12e-3, 28e3).unwrap();
        let pulse = sample_pulse(PulseKind::Tgp(PulseParams::new(0.2, 3.0, 1.5).unwrap()), &g).unwrap();
        let a = fim_discrete_with(&pulse, 1.0, DerivativeMethod::Analytic).unwrap();
        let f = fim_discrete_with(&pulse, 1.0, DerivativeMethod::FineStep).unwrap();
        // the Richardson defect estimates the O(h^2) error of the coarse step
        let defect = f.richardson_defect.unwrap();
        assert!(defect < 1e-3);
        let (x, y) = (a.fim, f.fim);
        assert!((x.i_tt / y.i_tt - 1.0).abs() < 2.0 * defect);
        assert!((x.i_nn / y.i_nn - 1.0).abs() < 2.0 * defect);
        assert!((x.i_tn - y.i_tn).abs() < 2.0 * defect * (x.i_tt * x.i_nn).sqrt());
    }

    #[test]
    fn analytic_requires_gaussian() {
        let g = GridSpec::covariance_default();
        let pulse = sample_pulse(PulseKind::Sinc, &g).unwrap();
        assert!(fim_discrete_with(&pulse, 1.0, DerivativeMethod::Analytic).is_err());
        let d = fim_discrete_with(&pulse, 1.0, DerivativeMethod::Auto).unwrap();
        assert_eq!(d.derivative, DerivativeMethod::FineStep);
    }

    #[test]
    fn sgp_zero_doppler_cut_is_gaussian() {
        let g = GridSpec::new(128, 128, 1.12e-3, 28e3).unwrap();
        let pulse = sample_pulse(PulseKind::Sgp, &g).unwrap();
        let af = ambiguity_function(&pulse, AfCut::ZeroDoppler).unwrap();
        // separable oracle: delay autocorrelation times the Fourier sum of
        // the squared Doppler envelope
        let xt: Vec<f64> = (0..g.m).map(|i| (-2.0 * PI * (g.delay_at(i) / g.t).powi(2)).exp()).collect();
        let xn: Vec<f64> = (0..g.n).map(|j| (-2.0 * PI * (g.doppler_at(j) / g.b).powi(2)).exp()).collect();
        let et: f64 = xt.iter().map(|v| v * v).sum();
        let en: f64 = xn.iter().map(|v| v * v).sum();
        for (idx, (tau, v)) in af.tau.iter().zip(&af.values).enumerate() {
            let k = g.delay_index(idx);
            let acf: f64 = (0..g.m as i64)
                .filter(|&i| i - k >= 0 && i - k < g.m as i64)
                .map(|i| xt[i as usize] * xt[(i - k) as usize])
                .sum();
            let dft: Complex64 =
                (0..g.n).map(|j| Complex64::from_polar(xn[j] * xn[j], -2.0 * PI * tau * g.doppler_at(j))).sum();
            let want = dft * (acf / (et * en));
            assert!((v - want).norm() < 1e-12, "tau={tau}: {v} vs {want}");
        }
        // near the origin the cut follows the continuous Gaussian
        // exp(-pi tau^2 (1/T^2 + B^2/4)); the truncated Doppler envelope
        // widens it by a few percent within three lags
        let c = PI * (1.0 / (g.t * g.t) + g.b * g.b / 4.0);
        for k in 1..3 {
            let i = g.m / 2 + k;
            let want = (-c * af.tau[i].powi(2)).exp();
            assert!((af.values[i].norm() / want - 1.0).abs() < 0.02);
            assert!(af.values[i].norm() < af.values[i - 1].norm());
        }
    }

    #[test]
    fn ambiguity_peak_is_unity() {
        let g = GridSpec::new(16, 16, 1.12e-3, 28e3).unwrap();
        for kind in [
            PulseKind::Sgp,
            PulseKind::Sinc,
            PulseKind::rrc_default(),
            PulseKind::Tgp(PulseParams::new(3.0, 20.0, 4.0).unwrap()),
        ] {
            let pulse = sample_pulse(kind, &g).unwrap();
            let af = ambiguity_function(&pulse, AfCut::Full).unwrap();
            let origin = af.values[(g.m / 2) * g.n + g.n / 2];
            assert!((origin - Complex64::new(1.0, 0.0)).norm() < 1e-12);
            assert!(af.values.iter().all(|v| v.norm() <= 1.0 + 1e-12));
        }
    }
}
