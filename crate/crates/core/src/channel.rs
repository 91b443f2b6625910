//! Multipath channels and the effective delay-Doppler channel matrix.
//!
//! A path with gain `h`, delay `tau` and Doppler `nu` maps the transmit
//! symbol at grid position `q = (m, n)` onto receive position `p = (k, l)`
//! with weight
//!
//! ```text
//! h * x((k - m) d_tau - tau, (l - n) d_nu - nu) * exp(j 2 pi (n nu / B - m tau / T))
//! ```
//!
//! where `x` is the unit-energy pulse evaluated at the continuous
//! displacement and both displacements are wrapped into the principal cell
//! `[-T/2, T/2) x [-B/2, B/2)`. Flattening is delay-major, `p = k N + l`,
//! with `k, l, m, n` the zero-based storage indices.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{wrap_centered, GridSpec};
use crate::pulse::{DiscretePulse, PulseKind};
use crate::rng;

/// Tolerance on `sum |x|^2 = 1` when a pulse enters a channel model.
pub const UNIT_ENERGY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub gain: Complex64,
    /// Delay in seconds.
    pub tau: f64,
    /// Doppler shift in hertz.
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PathSet {
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn new(paths: Vec<Path>) -> Self {
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Checks every path against the principal cell `0 <= tau < T`,
    /// `|nu| < B/2`.
    pub fn validate(&self, g: &GridSpec) -> Result<()> {
        for (index, p) in self.paths.iter().enumerate() {
            let reason = if !(p.tau.is_finite() && p.nu.is_finite()) {
                Some("non-finite delay or Doppler".to_string())
            } else if !(p.gain.re.is_finite() && p.gain.im.is_finite()) {
                Some("non-finite gain".to_string())
            } else if p.tau < 0.0 || p.tau >= g.t {
                Some(format!("delay {} s not in [0, T={})", p.tau, g.t))
            } else if p.nu.abs() >= g.b / 2.0 {
                Some(format!("|Doppler| {} Hz not below B/2={}", p.nu.abs(), g.b / 2.0))
            } else {
                None
            };
            if let Some(reason) = reason {
                return Err(Error::PathOutOfCell { index, reason });
            }
        }
        Ok(())
    }
}

/// Circularly-symmetric complex Gaussian with `E|h|^2 = var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Wide-sense stationary uncorrelated-scattering model with uniform delay
/// and Doppler profiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WssusStats {
    /// Number of paths.
    pub paths: usize,
    /// Per-path gain variance.
    pub sigma_h2: f64,
    /// Delays are uniform on `[0, tau_max]`.
    pub tau_max: f64,
    /// Dopplers are uniform on `[-nu_max, nu_max]`.
    pub nu_max: f64,
}

impl WssusStats {
    /// 8 paths spread over 5 delay bins and +-2 Doppler bins with unit total
    /// power.
    pub fn covariance_default(g: &GridSpec) -> Self {
        Self { paths: 8, sigma_h2: 1.0 / 8.0, tau_max: 5.0 * g.d_tau(), nu_max: 2.0 * g.d_nu() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::InvalidChannel("at least one path is required".into()));
        }
        for (name, v) in [("sigma_h2", self.sigma_h2), ("tau_max", self.tau_max), ("nu_max", self.nu_max)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidChannel(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn sample(&self, seed: u64, index: u64) -> Result<PathSet> {
        sample_wssus(self.paths, self.sigma_h2, self.tau_max, self.nu_max, &mut rng::stream(seed, index))
    }
}

/// Draws `p` i.i.d. WSSUS paths.
pub fn sample_wssus<R: Rng + ?Sized>(
    p: usize,
    sigma_h2: f64,
    tau_max: f64,
    nu_max: f64,
    rng: &mut R,
) -> Result<PathSet> {
    WssusStats { paths: p, sigma_h2, tau_max, nu_max }.validate()?;
    let delay = Uniform::new_inclusive(0.0, tau_max).expect("validated bounds");
    let doppler = Uniform::new_inclusive(-nu_max, nu_max).expect("validated bounds");
    let paths = (0..p)
        .map(|_| {
            let tau = delay.sample(rng);
            let nu = doppler.sample(rng);
            Path { gain: complex_gaussian(rng, sigma_h2), tau, nu }
        })
        .collect();
    Ok(PathSet { paths })
}

/// Vehicular-A tap delays in seconds.
pub const VEH_A_DELAYS: [f64; 6] = [0.0, 310e-9, 710e-9, 1090e-9, 1730e-9, 2510e-9];
/// Vehicular-A average tap powers in dB.
pub const VEH_A_POWERS_DB: [f64; 6] = [0.0, -1.0, -9.0, -10.0, -15.0, -20.0];
/// Default maximum Doppler of the Veh-A benchmark.
pub const VEH_A_NU_MAX: f64 = 815.0;

/// Veh-A tap powers normalised to unit sum.
pub fn veh_a_powers() -> [f64; 6] {
    let lin = VEH_A_POWERS_DB.map(|db| 10f64.powf(db / 10.0));
    let total: f64 = lin.iter().sum();
    lin.map(|p| p / total)
}

/// Draws a six-path Veh-A realisation with Jakes-style Dopplers
/// `nu_max cos(theta)`, `theta ~ U[0, 2 pi)`, and Rayleigh tap gains.
pub fn sample_veh_a<R: Rng + ?Sized>(nu_max: f64, rng: &mut R) -> Result<PathSet> {
    if !(nu_max.is_finite() && nu_max > 0.0) {
        return Err(Error::InvalidChannel(format!("nu_max must be positive, got {nu_max}")));
    }
    let angle = Uniform::new(0.0, 2.0 * PI).expect("valid range");
    let paths = VEH_A_DELAYS
        .iter()
        .zip(veh_a_powers())
        .map(|(&tau, power)| {
            let nu = nu_max * angle.sample(rng).cos();
            Path { gain: complex_gaussian(rng, power), tau, nu }
        })
        .collect();
    Ok(PathSet { paths })
}

/// Statistical channel model used to draw realisations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelModel {
    Wssus(WssusStats),
    VehA { nu_max: f64 },
}

impl ChannelModel {
    pub fn veh_a_default() -> Self {
        ChannelModel::VehA { nu_max: VEH_A_NU_MAX }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ChannelModel::Wssus(s) => s.validate(),
            ChannelModel::VehA { nu_max } if nu_max.is_finite() && *nu_max > 0.0 => Ok(()),
            ChannelModel::VehA { nu_max } => {
                Err(Error::InvalidChannel(format!("nu_max must be positive, got {nu_max}")))
            }
        }
    }

    /// Realisation number `index` under master seed `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> Result<PathSet> {
        let mut r = rng::stream(seed, index);
        match self {
            ChannelModel::Wssus(s) => sample_wssus(s.paths, s.sigma_h2, s.tau_max, s.nu_max, &mut r),
            ChannelModel::VehA { nu_max } => sample_veh_a(*nu_max, &mut r),
        }
    }
}

/// Which grid index carries the Doppler part of the phase twist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistConvention {
    /// `exp(j 2 pi (n nu / B - m tau / T))`, transmit Doppler index `n`.
    #[default]
    Transmit,
    /// `exp(j 2 pi (l nu / B - m tau / T))`, receive Doppler index `l`.
    Receive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelOptions {
    pub twist: TwistConvention,
    /// Wrap displacements into the principal cell (circular model).
    pub wrap: bool,
}

impl Default for ChannelOptions {
    fn default() -> Self {
        Self { twist: TwistConvention::Transmit, wrap: true }
    }
}

/// `MN x MN` matrix mapping transmitted to received DD symbols.
#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    pub grid: GridSpec,
    pub kind: PulseKind,
    pub h: Mat<Complex64>,
}

impl EffectiveChannel {
    #[inline]
    pub fn entry(&self, p: usize, q: usize) -> Complex64 {
        self.h[(p, q)]
    }

    pub fn frobenius_sqr(&self) -> f64 {
        let mut s = 0.0;
        for q in 0..self.h.ncols() {
            for v in self.h.col(q).iter() {
                s += v.norm_sqr();
            }
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        (0..self.h.ncols()).all(|q| self.h.col(q).iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    pub fn scale(&mut self, c: f64) {
        for q in 0..self.h.ncols() {
            for v in self.h.col_mut(q).iter_mut() {
                *v *= c;
            }
        }
    }
}

pub(crate) fn check_unit_energy(pulse: &DiscretePulse) -> Result<()> {
    let energy = pulse.energy();
    if (energy - 1.0).abs() > UNIT_ENERGY_TOL {
        return Err(Error::NotUnitEnergy { energy });
    }
    Ok(())
}

/// Per-path spreading values indexed by the signed grid differences
/// `dk = k - m in -(M-1)..M`, `dl = l - n in -(N-1)..N`.
pub(crate) struct DisplacementTable {
    rows: usize,
    cols: usize,
    m: usize,
    n: usize,
    values: Vec<Complex64>,
}

impl DisplacementTable {
    pub(crate) fn new(pulse: &DiscretePulse, tau: f64, nu: f64, wrap: bool) -> Self {
        let g = &pulse.grid;
        let (rows, cols) = (2 * g.m - 1, 2 * g.n - 1);
        let scale = pulse.scale();
        // displacements are formed and wrapped in bin units so that on-grid
        // paths land exactly on sample positions
        let (u0, v0) = (tau / g.d_tau(), nu / g.d_nu());
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let mut u = r as f64 - (g.m - 1) as f64 - u0;
            if wrap {
                u = wrap_centered(u, g.m as f64);
            }
            for c in 0..cols {
                let mut v = c as f64 - (g.n - 1) as f64 - v0;
                if wrap {
                    v = wrap_centered(v, g.n as f64);
                }
                values.push(pulse.kind.evaluate(u * g.d_tau(), v * g.d_nu(), g) * scale);
            }
        }
        Self { rows, cols, m: g.m, n: g.n, values }
    }

    /// Value for receive `(k, l)` and transmit `(m, n)` storage indices.
    #[inline]
    pub(crate) fn get(&self, k: usize, l: usize, m: usize, n: usize) -> Complex64 {
        debug_assert!(self.rows == 2 * self.m - 1 && self.cols == 2 * self.n - 1);
        self.values[(k + self.m - 1 - m) * self.cols + (l + self.n - 1 - n)]
    }
}

/// Builds the effective channel of `paths` under `pulse`.
pub fn effective_channel(paths: &PathSet, pulse: &DiscretePulse) -> Result<EffectiveChannel> {
    effective_channel_with(paths, pulse, ChannelOptions::default())
}

pub fn effective_channel_with(
    paths: &PathSet,
    pulse: &DiscretePulse,
    opts: ChannelOptions,
) -> Result<EffectiveChannel> {
    let g = pulse.grid;
    if paths.is_empty() {
        return Err(Error::InvalidChannel("path set is empty".into()));
    }
    check_unit_energy(pulse)?;
    paths.validate(&g)?;
    let size = g.size();
    let mut h = Mat::<Complex64>::zeros(size, size);
    for path in &paths.paths {
        let table = DisplacementTable::new(pulse, path.tau, path.nu, opts.wrap);
        let delay: Vec<Complex64> =
            (0..g.m).map(|m| Complex64::from_polar(1.0, -2.0 * PI * m as f64 * path.tau / g.t)).collect();
        let doppler: Vec<Complex64> =
            (0..g.n).map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 * path.nu / g.b)).collect();
        for q in 0..size {
            let (m, n) = g.unflat(q);
            let mut col = h.col_mut(q);
            match opts.twist {
                TwistConvention::Transmit => {
                    let w = path.gain * delay[m] * doppler[n];
                    for p in 0..size {
                        let (k, l) = g.unflat(p);
                        col[p] += w * table.get(k, l, m, n);
                    }
                }
                TwistConvention::Receive => {
                    let w = path.gain * delay[m];
                    for p in 0..size {
                        let (k, l) = g.unflat(p);
                        col[p] += w * doppler[l] * table.get(k, l, m, n);
                    }
                }
            }
        }
    }
    Ok(EffectiveChannel { grid: g, kind: pulse.kind, h })
}

/// A point target seen by the sensing receiver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub gain: Complex64,
    pub tau: f64,
    pub nu: f64,
}

/// Noise-free echo of a point target plus the noise statistics.
#[derive(Debug, Clone)]
pub struct SensingEcho {
    pub target: Target,
    pub grid: GridSpec,
    /// Mean echo on the grid (row-major like [`DiscretePulse`]), expressed
    /// with the continuous normalisation `sum |mu|^2 d_tau d_nu = |h_T|^2`.
    pub mu: Vec<Complex64>,
    /// DD-plane noise power spectral density.
    pub n0: f64,
}

impl SensingEcho {
    /// Per-sample noise variance `N_0 / (d_tau d_nu)`.
    pub fn sigma_n2(&self) -> f64 {
        self.n0 / (self.grid.d_tau() * self.grid.d_nu())
    }

    /// One noisy observation `mu + w`, `w ~ CN(0, sigma_n2)`.
    pub fn observe<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Complex64> {
        let var = self.sigma_n2();
        self.mu.iter().map(|m| m + complex_gaussian(rng, var)).collect()
    }
}

/// Samples `h_T x(tau - tau_T, nu - nu_T) exp(j 2 pi (nu tau_T - nu_T tau))`
/// at the grid points, outside the grid the pulse is taken as zero.
pub fn mean_echo(target: Target, pulse: &DiscretePulse, n0: f64) -> Result<SensingEcho> {
    check_unit_energy(pulse)?;
    let g = pulse.grid;
    PathSet::new(vec![Path { gain: target.gain, tau: target.tau, nu: target.nu }]).validate(&g)?;
    let c = (g.d_tau() * g.d_nu()).sqrt().recip();
    let mut mu = Vec::with_capacity(g.size());
    for i in 0..g.m {
        let tau = g.delay_at(i);
        for j in 0..g.n {
            let nu = g.doppler_at(j);
            let phase = 2.0 * PI * (nu * target.tau - target.nu * tau);
            let x = pulse.spreading(tau - target.tau, nu - target.nu);
            mu.push(target.gain * x * Complex64::from_polar(c, phase));
        }
    }
    Ok(SensingEcho { target, grid: g, mu, n0 })
}
