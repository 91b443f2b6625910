//! Delay-Doppler pulse shapes.
//!
//! The tunable Gaussian pulse (TGP) is a real Gaussian envelope
//!
//! ```text
//! exp(-pi * (2 tau^2 / (gamma T^2) + 2 gamma nu^2 / B^2))
//! ```
//!
//! multiplied by the phase-warping factor
//! `exp(j pi (alpha_c tau^2 / T^2 + beta_c tau nu))`. `gamma` sets the
//! delay/Doppler aspect ratio, `alpha_c` the chirp rate and `beta_c` the
//! bilinear shear. The standard Gaussian pulse (SGP) is the TGP at
//! `(1, 0, 0)`. Root-raised-cosine and sinc pulses are provided as fixed
//! benchmarks.
//!
//! Sampled pulses live on an origin-centred grid `m in -M/2..M/2`,
//! `n in -N/2..N/2` and are always normalised so that the sample energy is 1.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Tuning knobs of the tunable Gaussian pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseParams {
    /// Aspect ratio, strictly positive.
    pub gamma: f64,
    /// Chirp rate.
    pub alpha_c: f64,
    /// Phase coupling (bilinear shear).
    pub beta_c: f64,
}

impl PulseParams {
    pub fn new(gamma: f64, alpha_c: f64, beta_c: f64) -> Result<Self> {
        let p = Self { gamma, alpha_c, beta_c };
        p.validate()?;
        Ok(p)
    }

    /// Parameters that reduce the TGP to the standard Gaussian pulse.
    pub const SGP: PulseParams = PulseParams { gamma: 1.0, alpha_c: 0.0, beta_c: 0.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::InvalidPulse(format!("gamma must be positive and finite, got {}", self.gamma)));
        }
        if !self.alpha_c.is_finite() || !self.beta_c.is_finite() {
            return Err(Error::InvalidPulse(format!(
                "alpha_c and beta_c must be finite, got ({}, {})",
                self.alpha_c, self.beta_c
            )));
        }
        Ok(())
    }
}

/// Pulse family together with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseKind {
    Tgp(PulseParams),
    Sgp,
    Rrc { beta_tau: f64, beta_nu: f64 },
    Sinc,
}

/// Default RRC roll-off used for benchmarking.
pub const DEFAULT_RRC_ROLLOFF: f64 = 0.6;

impl PulseKind {
    /// RRC benchmark with the default roll-off on both axes.
    pub fn rrc_default() -> Self {
        PulseKind::Rrc { beta_tau: DEFAULT_RRC_ROLLOFF, beta_nu: DEFAULT_RRC_ROLLOFF }
    }

    /// Short lowercase label used in file outputs.
    pub fn label(&self) -> &'static str {
        match self {
            PulseKind::Tgp(_) => "tgp",
            PulseKind::Sgp => "sgp",
            PulseKind::Rrc { .. } => "rrc",
            PulseKind::Sinc => "sinc",
        }
    }

    /// TGP parameters if this is a Gaussian pulse (SGP maps to `(1, 0, 0)`).
    pub fn gaussian_params(&self) -> Option<PulseParams> {
        match self {
            PulseKind::Tgp(p) => Some(*p),
            PulseKind::Sgp => Some(PulseParams::SGP),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PulseKind::Tgp(p) => p.validate(),
            PulseKind::Sgp | PulseKind::Sinc => Ok(()),
            PulseKind::Rrc { beta_tau, beta_nu } => {
                for b in [beta_tau, beta_nu] {
                    if !(0.0..=1.0).contains(b) {
                        return Err(Error::InvalidPulse(format!("RRC roll-off must lie in [0, 1], got {b}")));
                    }
                }
                Ok(())
            }
        }
    }

    /// Unnormalised continuous pulse value at delay `tau` (s) and Doppler
    /// `nu` (Hz).
    ///
    /// The benchmark pulses use the dimensionless arguments `tau/T`, `nu*T`
    /// (RRC) and `tau*B`, `nu*T` (sinc), which coincide with `m/M`,
    /// `n*BT/N` and `m*BT/M` on the grid.
    pub fn evaluate(&self, tau: f64, nu: f64, grid: &GridSpec) -> Complex64 {
        match self {
            PulseKind::Tgp(p) => tgp_continuous(tau, nu, p, grid),
            PulseKind::Sgp => tgp_continuous(tau, nu, &PulseParams::SGP, grid),
            PulseKind::Rrc { beta_tau, beta_nu } => {
                Complex64::new(rrc(tau / grid.t, *beta_tau) * rrc(nu * grid.t, *beta_nu), 0.0)
            }
            PulseKind::Sinc => Complex64::new(sinc(tau * grid.b) * sinc(nu * grid.t), 0.0),
        }
    }
}

/// Continuous TGP value (unnormalised; equals 1 at the origin).
#[inline]
pub fn tgp_continuous(tau: f64, nu: f64, p: &PulseParams, g: &GridSpec) -> Complex64 {
    let (t2, b2) = (g.t * g.t, g.b * g.b);
    let envelope = -PI * (2.0 * tau * tau / (p.gamma * t2) + 2.0 * p.gamma * nu * nu / b2);
    let phase = PI * (p.alpha_c * tau * tau / t2 + p.beta_c * tau * nu);
    Complex64::from_polar(envelope.exp(), phase)
}

/// Logarithmic derivatives `(d/dtau, d/dnu) ln x` of the TGP; multiply by
/// `x` for the gradient.
#[inline]
pub fn tgp_log_gradient(tau: f64, nu: f64, p: &PulseParams, g: &GridSpec) -> (Complex64, Complex64) {
    let (t2, b2) = (g.t * g.t, g.b * g.b);
    let d_tau = Complex64::new(-4.0 * PI * tau / (p.gamma * t2), PI * (2.0 * p.alpha_c * tau / t2 + p.beta_c * nu));
    let d_nu = Complex64::new(-4.0 * PI * p.gamma * nu / b2, PI * p.beta_c * tau);
    (d_tau, d_nu)
}

/// Normalised sinc, `sin(pi x) / (pi x)`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

// Half-width (in units of t) of the neighbourhood around t = 1/(4 beta)
// where the closed-form RRC expression is replaced by a quadratic through
// the limit value.
const RRC_SINGULAR_HALF_WIDTH: f64 = 1e-4;

/// Root-raised-cosine impulse response with unit symbol period.
///
/// Both removable singularities (`t = 0` and `|t| = 1/(4 beta)`) use their
/// limit values; `beta = 0` degenerates to `sinc`.
pub fn rrc(t: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return sinc(t);
    }
    if t == 0.0 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let ts = 1.0 / (4.0 * beta);
    let dist = t.abs() - ts;
    if dist.abs() < RRC_SINGULAR_HALF_WIDTH {
        // quadratic through the two flanking direct evaluations and the limit
        let h = RRC_SINGULAR_HALF_WIDTH;
        let sign = t.signum();
        let lo = rrc_direct(sign * (ts - h), beta);
        let hi = rrc_direct(sign * (ts + h), beta);
        let mid = rrc_singular_limit(beta);
        let s = dist / h;
        return mid + 0.5 * s * (hi - lo) + 0.5 * s * s * (hi - 2.0 * mid + lo);
    }
    rrc_direct(t, beta)
}

#[inline]
fn rrc_direct(t: f64, beta: f64) -> f64 {
    let num = (PI * t * (1.0 - beta)).sin() + 4.0 * beta * t * (PI * t * (1.0 + beta)).cos();
    let q = 4.0 * beta * t;
    num / (PI * t * (1.0 - q * q))
}

#[inline]
fn rrc_singular_limit(beta: f64) -> f64 {
    let a = PI / (4.0 * beta);
    beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos())
}

/// A unit-energy pulse sampled on an origin-centred grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePulse {
    pub grid: GridSpec,
    pub kind: PulseKind,
    /// Row-major `M x N` samples; row `i` is delay index `i - M/2`,
    /// column `j` is Doppler index `j - N/2`.
    samples: Vec<Complex64>,
}

impl DiscretePulse {
    #[inline]
    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Sample at storage position `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[i * self.grid.n + j]
    }

    /// Sample at signed indices `(m, n)`; zero outside the grid.
    #[inline]
    pub fn at_index(&self, m: i64, n: i64) -> Complex64 {
        let i = m + (self.grid.m / 2) as i64;
        let j = n + (self.grid.n / 2) as i64;
        if i < 0 || j < 0 || i >= self.grid.m as i64 || j >= self.grid.n as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.at(i as usize, j as usize)
        }
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|x| x.norm_sqr()).sum()
    }

    /// Factor mapping the continuous pulse onto this normalised pulse.
    ///
    /// Recovered from the origin sample, so the normalisation only lives in
    /// the sampled matrix.
    pub fn scale(&self) -> f64 {
        let peak = self.kind.evaluate(0.0, 0.0, &self.grid).re;
        self.at(self.grid.m / 2, self.grid.n / 2).re / peak
    }

    /// Normalised pulse evaluated at an arbitrary continuous displacement.
    #[inline]
    pub fn spreading(&self, tau: f64, nu: f64) -> Complex64 {
        self.kind.evaluate(tau, nu, &self.grid) * self.scale()
    }

    /// Energy in the outermost ring of samples.
    pub fn boundary_energy(&self) -> f64 {
        let (m, n) = (self.grid.m, self.grid.n);
        let mut e = 0.0;
        for i in 0..m {
            for j in 0..n {
                if i == 0 || j == 0 || i == m - 1 || j == n - 1 {
                    e += self.at(i, j).norm_sqr();
                }
            }
        }
        e
    }
}

/// Samples `kind` on `grid` and normalises to unit energy.
pub fn sample_pulse(kind: PulseKind, grid: &GridSpec) -> Result<DiscretePulse> {
    grid.validate()?;
    kind.validate()?;
    let mut samples = Vec::with_capacity(grid.size());
    match kind.gaussian_params() {
        Some(p) => sample_tgp_into(&p, grid, &mut samples),
        None => {
            for i in 0..grid.m {
                let tau = grid.delay_at(i);
                samples.extend((0..grid.n).map(|j| kind.evaluate(tau, grid.doppler_at(j), grid)));
            }
        }
    }
    if let Some(k) = samples.iter().position(|x| !(x.re.is_finite() && x.im.is_finite())) {
        return Err(Error::NonFiniteSample { m: grid.delay_index(k / grid.n), n: grid.doppler_index(k % grid.n) });
    }
    let energy: f64 = samples.iter().map(|x| x.norm_sqr()).sum();
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidPulse(format!("sampled energy {energy} cannot be normalised")));
    }
    let c = energy.sqrt().recip();
    for x in &mut samples {
        *x *= c;
    }
    Ok(DiscretePulse { grid: *grid, kind, samples })
}

/// Unnormalised TGP samples from separable delay and Doppler factors; only
/// the bilinear phase is evaluated per sample.
fn sample_tgp_into(p: &PulseParams, g: &GridSpec, out: &mut Vec<Complex64>) {
    let (t2, b2) = (g.t * g.t, g.b * g.b);
    let row: Vec<Complex64> = (0..g.m)
        .map(|i| {
            let tau = g.delay_at(i);
            Complex64::from_polar((-2.0 * PI * tau * tau / (p.gamma * t2)).exp(), PI * p.alpha_c * tau * tau / t2)
        })
        .collect();
    let col: Vec<f64> = (0..g.n)
        .map(|j| {
            let nu = g.doppler_at(j);
            (-2.0 * PI * p.gamma * nu * nu / b2).exp()
        })
        .collect();
    for (i, r) in row.iter().enumerate() {
        let tau = g.delay_at(i);
        for (j, c) in col.iter().enumerate() {
            let shear = Complex64::from_polar(*c, PI * p.beta_c * tau * g.doppler_at(j));
            out.push(r * shear);
        }
    }
}

/// Sample energy `sum |x[m, n]|^2` of the unnormalised TGP.
///
/// Depends on `gamma` only and is computed from the envelope alone, so it is
/// bit-identical for every `(alpha_c, beta_c)`.
pub fn tgp_sample_energy(gamma: f64, g: &GridSpec) -> f64 {
    let (t2, b2) = (g.t * g.t, g.b * g.b);
    let mut e = 0.0;
    for i in 0..g.m {
        let tau = g.delay_at(i);
        for j in 0..g.n {
            let nu = g.doppler_at(j);
            e += (-4.0 * PI * (tau * tau / (gamma * t2) + gamma * nu * nu / b2)).exp();
        }
    }
    e
}

/// Largest `beta_c` that tolerates `k_alias` integer phase wraps between
/// neighbouring samples: `(K+1) * 2 min(M, N) / (BT)`.
pub fn beta_c_limit(k_alias: u32, g: &GridSpec) -> f64 {
    (k_alias as f64 + 1.0) * 2.0 * g.m.min(g.n) as f64 / g.bt()
}

/// Second-order energy moments of a pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMoments {
    /// Delay variance in s^2.
    pub var_tau: f64,
    /// Doppler variance in Hz^2.
    pub var_nu: f64,
    /// Mixed moment `E[tau nu]` in s*Hz.
    pub mixed: f64,
}

impl EnergyMoments {
    /// Closed-form moments of the (untruncated) TGP energy density
    /// `|x|^2 ~ exp(-4 pi tau^2/(gamma T^2) - 4 pi gamma nu^2/B^2)`.
    pub fn tgp(p: &PulseParams, g: &GridSpec) -> Self {
        Self { var_tau: p.gamma * g.t * g.t / (8.0 * PI), var_nu: g.b * g.b / (8.0 * PI * p.gamma), mixed: 0.0 }
    }
}

/// Energy moments of a sampled pulse about the origin.
pub fn energy_moments(pulse: &DiscretePulse) -> EnergyMoments {
    let g = &pulse.grid;
    let (mut e, mut tt, mut nn, mut tn) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..g.m {
        let tau = g.delay_at(i);
        for j in 0..g.n {
            let nu = g.doppler_at(j);
            let w = pulse.at(i, j).norm_sqr();
            e += w;
            tt += w * tau * tau;
            nn += w * nu * nu;
            tn += w * tau * nu;
        }
    }
    EnergyMoments { var_tau: tt / e, var_nu: nn / e, mixed: tn / e }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_comm() -> GridSpec {
        GridSpec::communication_default()
    }

    #[test]
    fn tgp_origin_is_one() {
        let g = table2_comm();
        for p in [PulseParams::SGP, PulseParams::new(0.3, 7.0, -2.5).unwrap()] {
            let x = tgp_continuous(0.0, 0.0, &p, &g);
            assert_eq!(x, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn phase_factor_is_unimodular() {
        let g = table2_comm();
        let base = PulseParams::new(2.5, 0.0, 0.0).unwrap();
        let warped = PulseParams::new(2.5, 13.0, -4.0).unwrap();
        for &(tau, nu) in &[(1e-4, 300.0), (-3e-4, 5e3), (4.4e-4, -1.2e4)] {
            let a = tgp_continuous(tau, nu, &base, &g).norm();
            let b = tgp_continuous(tau, nu, &warped, &g).norm();
            assert!((a - b).abs() <= 1e-15 * a.max(1e-300));
        }
    }

    #[test]
    fn sgp_is_neutral_tgp() {
        let g = table2_comm();
        let sgp = sample_pulse(PulseKind::Sgp, &g).unwrap();
        let tgp = sample_pulse(PulseKind::Tgp(PulseParams::SGP), &g).unwrap();
        assert_eq!(sgp.samples(), tgp.samples());
    }

    #[test]
    fn sinc_peak_and_first_neighbour() {
        let g = table2_comm();
        let p = sample_pulse(PulseKind::Sinc, &g).unwrap();
        let c = p.at_index(0, 0).re;
        let expect = c * sinc(g.bt() / g.m as f64);
        assert!((p.at_index(1, 0).re - expect).abs() < 1e-15);
    }

    #[test]
    fn warped_tgp_shares_sgp_magnitudes() {
        let g = table2_comm();
        let sgp = sample_pulse(PulseKind::Sgp, &g).unwrap();
        let tgp = sample_pulse(PulseKind::Tgp(PulseParams::new(1.0, 5.0, 5.0).unwrap()), &g).unwrap();
        for (a, b) in sgp.samples().iter().zip(tgp.samples()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
    }

    #[test]
    fn every_kind_has_unit_energy() {
        let g = table2_comm();
        for kind in [
            PulseKind::Sgp,
            PulseKind::Sinc,
            PulseKind::rrc_default(),
            PulseKind::Rrc { beta_tau: 0.0, beta_nu: 1.0 },
            PulseKind::Tgp(PulseParams::new(0.01, 50.0, 10.0).unwrap()),
            PulseKind::Tgp(PulseParams::new(100.0, 0.0, 3.0).unwrap()),
        ] {
            let p = sample_pulse(kind, &g).unwrap();
            assert!((p.energy() - 1.0).abs() < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn spreading_matches_samples_on_grid() {
        let g = table2_comm();
        let kind = PulseKind::Tgp(PulseParams::new(0.5, 3.0, 2.0).unwrap());
        let p = sample_pulse(kind, &g).unwrap();
        for (i, j) in [(0, 0), (3, 11), (8, 8), (15, 2)] {
            let s = p.spreading(g.delay_at(i), g.doppler_at(j));
            assert!((s - p.at(i, j)).norm() < 1e-15);
        }
        // strong chirp and shear on the sensing grid, every sample
        let g = GridSpec::sensing_default();
        let p = sample_pulse(PulseKind::Tgp(PulseParams::new(0.04, 50.0, 10.0).unwrap()), &g).unwrap();
        let peak = p.at(g.m / 2, g.n / 2).norm();
        for i in 0..g.m {
            for j in 0..g.n {
                let s = p.spreading(g.delay_at(i), g.doppler_at(j));
                assert!((s - p.at(i, j)).norm() <= 1e-13 * peak, "({i}, {j})");
            }
        }
    }

    #[test]
    fn rrc_limits_are_continuous() {
        for beta in [0.25, 0.6, 1.0] {
            let ts = 1.0 / (4.0 * beta);
            for d in [1e-3, 2e-4, 1.01e-4] {
                let l = rrc_direct(ts - d, beta);
                let r = rrc_direct(ts + d, beta);
                let mid = rrc(ts, beta);
                assert!((mid - 0.5 * (l + r)).abs() < 2e-3 * d.max(1e-4) * 10.0);
            }
            // inside the patched window the interpolant stays close to the
            // direct evaluation where the latter is still well-conditioned
            let t = ts + 0.5e-4;
            assert!((rrc(t, beta) - rrc_direct(t, beta)).abs() < 1e-9);
            assert!((rrc(1e-12, beta) - rrc(0.0, beta)).abs() < 1e-9);
        }
        assert_eq!(rrc(0.3, 0.0), sinc(0.3));
        // symmetric
        assert_eq!(rrc(-0.37, 0.6), rrc(0.37, 0.6));
    }

    #[test]
    fn rejects_bad_rolloff_and_gamma() {
        let g = table2_comm();
        assert!(sample_pulse(PulseKind::Rrc { beta_tau: 1.2, beta_nu: 0.5 }, &g).is_err());
        assert!(PulseParams::new(0.0, 0.0, 0.0).is_err());
        assert!(PulseParams::new(1.0, f64::INFINITY, 0.0).is_err());
        let bad = PulseKind::Tgp(PulseParams { gamma: -1.0, alpha_c: 0.0, beta_c: 0.0 });
        assert!(sample_pulse(bad, &g).is_err());
    }

    #[test]
    fn beta_limit_values() {
        let g = table2_comm();
        assert!((beta_c_limit(0, &g) - 1.0204).abs() < 1e-3);
        assert!((beta_c_limit(9, &g) - 10.204).abs() < 1e-2);
        let g2 = GridSpec::new(32, 32, g.t, g.b).unwrap();
        assert!((beta_c_limit(3, &g2) - 2.0 * beta_c_limit(3, &g)).abs() < 1e-12);
    }

    #[test]
    fn continuous_tgp_energy_is_bt_over_four() {
        // midpoint rule over +-8 standard deviations
        let g = table2_comm();
        for gamma in [0.05, 1.0, 20.0] {
            let p = PulseParams::new(gamma, 7.0, 3.0).unwrap();
            let (st, sn) = (8.0 * (gamma / 8.0 / PI).sqrt() * g.t, 8.0 * (1.0 / (8.0 * PI * gamma)).sqrt() * g.b);
            let k = 600;
            let (ht, hn) = (2.0 * st / k as f64, 2.0 * sn / k as f64);
            let mut e = 0.0;
            for i in 0..k {
                let tau = -st + (i as f64 + 0.5) * ht;
                for j in 0..k {
                    let nu = -sn + (j as f64 + 0.5) * hn;
                    e += tgp_continuous(tau, nu, &p, &g).norm_sqr();
                }
            }
            e *= ht * hn;
            assert!((e / (g.bt() / 4.0) - 1.0).abs() < 1e-9, "gamma={gamma}: {e}");
        }
    }

    #[test]
    fn envelope_energy_matches_samples() {
        let g = table2_comm();
        for gamma in [0.01, 1.0, 100.0] {
            let raw: f64 = (0..g.m)
                .flat_map(|i| (0..g.n).map(move |j| (i, j)))
                .map(|(i, j)| {
                    let p = PulseParams::new(gamma, 0.0, 0.0).unwrap();
                    tgp_continuous(g.delay_at(i), g.doppler_at(j), &p, &g).norm_sqr()
                })
                .sum();
            assert!((tgp_sample_energy(gamma, &g) / raw - 1.0).abs() < 1e-14);
        }
    }
}
