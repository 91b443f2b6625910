//! Closed-form second-order statistics of the effective channel under WSSUS
//! scattering with a TGP pulse.
//!
//! For a single path the product `x(D1) x*(D2)` of two TGP values at
//! displacements `D_i = (c_i - tau, e_i - nu)` has an exponent that is
//! quadratic and separable in `(tau, nu)`:
//!
//! ```text
//! A_tau tau^2 + B_tau tau + A_nu nu^2 + B_nu nu + C_0
//! ```
//!
//! so `E[H_pq H*_p'q]` is a product of two truncated Gaussian integrals over
//! the uniform delay and Doppler supports. When displacements are wrapped
//! into the principal cell the supports are split where a displacement
//! crosses the cell edge, and each piece uses the shifted `c_i`, `e_i`.

use std::f64::consts::PI;

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{effective_channel_with, sample_wssus, ChannelOptions, TwistConvention, WssusStats};
use crate::error::{Error, Result};
use crate::grid::{wrap_centered, GridSpec};
use crate::linalg;
use crate::pulse::{sample_pulse, tgp_sample_energy, PulseKind, PulseParams};
use crate::rng;
use crate::special::{gaussian_integral, gaussian_integral_real};

/// Coefficients of the separable quadratic exponent for one displacement
/// pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadCoeffs {
    /// `-4 pi / (gamma T^2)`.
    pub a_tau: f64,
    pub b_tau: Complex64,
    /// `-4 pi gamma / B^2`.
    pub a_nu: f64,
    pub b_nu: Complex64,
    /// Constant term collected with the delay integral (delay constant plus
    /// the purely imaginary cross constant).
    pub c_tau: Complex64,
    /// Constant term collected with the Doppler integral.
    pub c_nu: Complex64,
    /// Displacements `(c1, c2)` in seconds and `(e1, e2)` in hertz.
    pub d: (f64, f64, f64, f64),
}

impl QuadCoeffs {
    /// `twist_dl` is the receive-index difference `l - l'` when the twist
    /// carries the receive Doppler index, else 0.
    pub fn new(p: &PulseParams, g: &GridSpec, c1: f64, c2: f64, e1: f64, e2: f64, twist_dl: f64) -> Self {
        let (t2, b2) = (g.t * g.t, g.b * g.b);
        let (gamma, alpha, beta) = (p.gamma, p.alpha_c, p.beta_c);
        let a_tau = -4.0 * PI / (gamma * t2);
        let a_nu = -4.0 * PI * gamma / b2;
        let b_tau = Complex64::new(
            4.0 * PI * (c1 + c2) / (gamma * t2),
            -PI * (2.0 * alpha * (c1 - c2) / t2 + beta * (e1 - e2)),
        );
        let b_nu =
            Complex64::new(4.0 * PI * gamma * (e1 + e2) / b2, -PI * beta * (c1 - c2) + 2.0 * PI * twist_dl / g.b);
        let c_tau = Complex64::new(
            -2.0 * PI * (c1 * c1 + c2 * c2) / (gamma * t2),
            PI * alpha * (c1 * c1 - c2 * c2) / t2 + PI * beta * (c1 * e1 - c2 * e2),
        );
        let c_nu = Complex64::new(-2.0 * PI * gamma * (e1 * e1 + e2 * e2) / b2, 0.0);
        Self { a_tau, b_tau, a_nu, b_nu, c_tau, c_nu, d: (c1, c2, e1, e2) }
    }

    /// Full constant `C_0`.
    pub fn c0(&self) -> Complex64 {
        self.c_tau + self.c_nu
    }

    /// `int exp(quadratic) dtau dnu` over `[t_lo, t_hi] x [n_lo, n_hi]`.
    pub fn integrate(&self, t_lo: f64, t_hi: f64, n_lo: f64, n_hi: f64) -> Complex64 {
        let i_tau = gaussian_integral(-self.a_tau, self.b_tau, self.c_tau, t_lo, t_hi);
        let i_nu = gaussian_integral(-self.a_nu, self.b_nu, self.c_nu, n_lo, n_hi);
        i_tau * i_nu
    }
}

/// A support interval on which both wrapped displacements keep a fixed
/// periodic image: `(lo, hi, shift1, shift2)`, shifts in units of the
/// period.
type Piece = (f64, f64, f64, f64);

/// Splits `[lo, hi]` where `c1 - t` or `c2 - t` crosses the edge of
/// `[-period/2, period/2)`.
fn wrap_pieces(c1: f64, c2: f64, lo: f64, hi: f64, period: f64) -> Vec<Piece> {
    let mut cuts = vec![lo, hi];
    for c in [c1, c2] {
        // c - t = period/2 + j period
        let base = c - 0.5 * period;
        let j_lo = ((base - hi) / period).ceil() as i64;
        let j_hi = ((base - lo) / period).floor() as i64;
        for j in j_lo..=j_hi {
            let t = base - j as f64 * period;
            if t > lo && t < hi {
                cuts.push(t);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            let shift = |c: f64| ((wrap_centered(c - mid, period) - (c - mid)) / period).round();
            (w[0], w[1], shift(c1), shift(c2))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceOptions {
    /// Evaluate the spreading term at the wrapped displacement, matching
    /// the circular effective channel. When false the Gaussian lives on the
    /// infinite plane.
    pub wrap: bool,
    pub twist: TwistConvention,
}

impl Default for CovarianceOptions {
    fn default() -> Self {
        Self { wrap: true, twist: TwistConvention::Transmit }
    }
}

impl From<CovarianceOptions> for ChannelOptions {
    fn from(o: CovarianceOptions) -> Self {
        ChannelOptions { twist: o.twist, wrap: o.wrap }
    }
}

/// Average channel covariance of the TGP effective channel under WSSUS
/// scattering.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    pub grid: GridSpec,
    pub params: PulseParams,
    pub stats: WssusStats,
    pub opts: CovarianceOptions,
    /// `|C|^2`, the squared discrete normalisation of the pulse.
    c2: f64,
}

impl CovarianceModel {
    pub fn new(grid: GridSpec, params: PulseParams, stats: WssusStats, opts: CovarianceOptions) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        stats.validate()?;
        if stats.tau_max >= grid.t || stats.nu_max >= grid.b / 2.0 {
            return Err(Error::InvalidChannel(format!(
                "scattering support ({} s, {} Hz) exceeds the principal cell",
                stats.tau_max, stats.nu_max
            )));
        }
        let c2 = tgp_sample_energy(params.gamma, &grid).recip();
        Ok(Self { grid, params, stats, opts, c2 })
    }

    fn density(&self) -> f64 {
        self.stats.sigma_h2 * self.c2 / (2.0 * self.stats.tau_max * self.stats.nu_max)
    }

    fn delay_pieces(&self, c1: f64, c2: f64) -> Vec<Piece> {
        if self.opts.wrap {
            wrap_pieces(c1, c2, 0.0, self.stats.tau_max, self.grid.t)
        } else {
            vec![(0.0, self.stats.tau_max, 0.0, 0.0)]
        }
    }

    fn doppler_pieces(&self, e1: f64, e2: f64) -> Vec<Piece> {
        if self.opts.wrap {
            wrap_pieces(e1, e2, -self.stats.nu_max, self.stats.nu_max, self.grid.b)
        } else {
            vec![(-self.stats.nu_max, self.stats.nu_max, 0.0, 0.0)]
        }
    }

    /// Single-path `E[x(D1) x*(D2) twist]` for signed bin differences
    /// `dk_i = k_i - m`, `dl_i = l_i - n`, including the density prefactor.
    fn pair_by_offsets(&self, dk1: i64, dk2: i64, dl1: i64, dl2: i64) -> Complex64 {
        let g = &self.grid;
        let (c1, c2) = (dk1 as f64 * g.d_tau(), dk2 as f64 * g.d_tau());
        let (e1, e2) = (dl1 as f64 * g.d_nu(), dl2 as f64 * g.d_nu());
        let twist_dl = match self.opts.twist {
            TwistConvention::Transmit => 0.0,
            TwistConvention::Receive => (dl1 - dl2) as f64,
        };
        let mut sum = Complex64::new(0.0, 0.0);
        for &(t_lo, t_hi, s1, s2) in &self.delay_pieces(c1, c2) {
            let (c1s, c2s) = (c1 + s1 * g.t, c2 + s2 * g.t);
            for &(n_lo, n_hi, r1, r2) in &self.doppler_pieces(e1, e2) {
                let (e1s, e2s) = (e1 + r1 * g.b, e2 + r2 * g.b);
                let q = QuadCoeffs::new(&self.params, g, c1s, c2s, e1s, e2s, twist_dl);
                sum += q.integrate(t_lo, t_hi, n_lo, n_hi);
            }
        }
        sum * self.density()
    }

    /// Single-path `E[H_pq H*_p'q]`.
    pub fn covariance_offdiag(&self, p: usize, p2: usize, q: usize) -> Complex64 {
        let g = &self.grid;
        let ((k, l), (k2, l2), (m, n)) = (g.unflat(p), g.unflat(p2), g.unflat(q));
        let d = |a: usize, b: usize| a as i64 - b as i64;
        self.pair_by_offsets(d(k, m), d(k2, m), d(l, n), d(l2, n))
    }

    /// `[R_H]_{p,p}`, evaluated with real Gaussians only; the phase-warping
    /// parameters do not enter.
    pub fn covariance_diag(&self, p: usize) -> f64 {
        let g = &self.grid;
        let (k, l) = g.unflat(p);
        let gamma = self.params.gamma;
        let (t2, b2) = (g.t * g.t, g.b * g.b);
        let (a_tau, a_nu) = (4.0 * PI / (gamma * t2), 4.0 * PI * gamma / b2);
        let delay = |c: f64| -> f64 {
            self.delay_pieces(c, c)
                .iter()
                .map(|&(lo, hi, s, _)| {
                    let c = c + s * g.t;
                    gaussian_integral_real(a_tau, 2.0 * a_tau * c, -a_tau * c * c, lo, hi)
                })
                .sum()
        };
        let doppler = |e: f64| -> f64 {
            self.doppler_pieces(e, e)
                .iter()
                .map(|&(lo, hi, s, _)| {
                    let e = e + s * g.b;
                    gaussian_integral_real(a_nu, 2.0 * a_nu * e, -a_nu * e * e, lo, hi)
                })
                .sum()
        };
        let i_tau: Vec<f64> = (0..g.m).map(|m| delay((k as f64 - m as f64) * g.d_tau())).collect();
        let i_nu: Vec<f64> = (0..g.n).map(|n| doppler((l as f64 - n as f64) * g.d_nu())).collect();
        let s: f64 = i_tau.iter().sum::<f64>() * i_nu.iter().sum::<f64>();
        self.stats.paths as f64 * self.density() * s
    }

    /// `[R_H]_{p,p'} = P sum_q E[H_pq H*_p'q]`.
    pub fn entry(&self, p: usize, p2: usize) -> Complex64 {
        if p == p2 {
            return Complex64::new(self.covariance_diag(p), 0.0);
        }
        let s: Complex64 = (0..self.grid.size()).map(|q| self.covariance_offdiag(p, p2, q)).sum();
        s * self.stats.paths as f64
    }

    /// Assembles the full `MN x MN` covariance.
    pub fn matrix(&self) -> Mat<Complex64> {
        let g = self.grid;
        let (rk, rl) = (2 * g.m - 1, 2 * g.n - 1);
        let (om, on) = (g.m as i64 - 1, g.n as i64 - 1);
        // table over all signed offset quadruples (dk1, dk2, dl1, dl2)
        let table: Vec<Complex64> = (0..rk * rk)
            .into_par_iter()
            .flat_map_iter(|ab| {
                let (dk1, dk2) = ((ab / rk) as i64 - om, (ab % rk) as i64 - om);
                (0..rl * rl).map(move |cd| {
                    let (dl1, dl2) = ((cd / rl) as i64 - on, (cd % rl) as i64 - on);
                    self.pair_by_offsets(dk1, dk2, dl1, dl2)
                })
            })
            .collect();
        let at = |dk1: usize, dk2: usize, dl1: usize, dl2: usize| table[((dk1 * rk + dk2) * rl + dl1) * rl + dl2];
        let size = g.size();
        let paths = self.stats.paths as f64;
        let upper: Vec<Vec<Complex64>> = (0..size)
            .into_par_iter()
            .map(|p| {
                let (k, l) = g.unflat(p);
                ((p + 1)..size)
                    .map(|p2| {
                        let (k2, l2) = g.unflat(p2);
                        let mut s = Complex64::new(0.0, 0.0);
                        for m in 0..g.m {
                            let (i1, i2) = (k + g.m - 1 - m, k2 + g.m - 1 - m);
                            for n in 0..g.n {
                                s += at(i1, i2, l + g.n - 1 - n, l2 + g.n - 1 - n);
                            }
                        }
                        s * paths
                    })
                    .collect()
            })
            .collect();
        let diag: Vec<f64> = (0..size).into_par_iter().map(|p| self.covariance_diag(p)).collect();
        let mut r = Mat::<Complex64>::zeros(size, size);
        for (p, row) in upper.iter().enumerate() {
            r[(p, p)] = Complex64::new(diag[p], 0.0);
            for (j, v) in row.iter().enumerate() {
                let p2 = p + 1 + j;
                r[(p, p2)] = *v;
                r[(p2, p)] = v.conj();
            }
        }
        r
    }

    /// Brute-force estimate `P E[H_1 H_1^H]` from `samples` single-path
    /// draws built with the same channel constructor used for simulation.
    pub fn monte_carlo(&self, samples: usize, seed: u64) -> Result<Mat<Complex64>> {
        const BATCH: usize = 32;
        let g = self.grid;
        let pulse = sample_pulse(PulseKind::Tgp(self.params), &g)?;
        let opts: ChannelOptions = self.opts.into();
        let size = g.size();
        let batches = samples.div_ceil(BATCH);
        let partial: Vec<Result<Mat<Complex64>>> = (0..batches)
            .into_par_iter()
            .map(|b| {
                let start = b * BATCH;
                let count = BATCH.min(samples - start);
                let mut x = Mat::<Complex64>::zeros(size, size * count);
                for s in 0..count {
                    let mut r = rng::stream(seed, (start + s) as u64);
                    let path = sample_wssus(1, self.stats.sigma_h2, self.stats.tau_max, self.stats.nu_max, &mut r)?;
                    let h = effective_channel_with(&path, &pulse, opts)?;
                    x.subcols_mut(s * size, size).copy_from(h.h.as_ref());
                }
                let mut acc = Mat::<Complex64>::zeros(size, size);
                linalg::gram_accumulate(&mut acc, x.as_ref(), 1.0);
                Ok(acc)
            })
            .collect();
        let mut total = Mat::<Complex64>::zeros(size, size);
        for acc in partial {
            total += acc?;
        }
        let scale = self.stats.paths as f64 / samples as f64;
        Ok(Mat::from_fn(size, size, |i, j| total[(i, j)] * scale))
    }
}

/// `log2 det(I + (snr/MN) R_H)`.
pub fn jensen_capacity(r: faer::MatRef<'_, Complex64>, snr: f64, mn: usize) -> Result<f64> {
    linalg::psd_eigenvalues(r)?;
    linalg::log2_det_identity_plus(r, snr / mn as f64)
}

/// Interference power ratio `sum_{j != k} |R_jk|^2 / sum_j |R_jj|^2`.
pub fn ipr(r: faer::MatRef<'_, Complex64>) -> f64 {
    let (mut off, mut diag) = (0.0, 0.0);
    for j in 0..r.ncols() {
        for i in 0..r.nrows() {
            let v = r[(i, j)].norm_sqr();
            if i == j {
                diag += v;
            } else {
                off += v;
            }
        }
    }
    off / diag
}

/// Magnitude version of [`ipr`], `sum_{j != k} |R_jk| / sum_j |R_jj|`.
pub fn ipr_magnitude(r: faer::MatRef<'_, Complex64>) -> f64 {
    let (mut off, mut diag) = (0.0, 0.0);
    for j in 0..r.ncols() {
        for i in 0..r.nrows() {
            let v = r[(i, j)].norm();
            if i == j {
                diag += v;
            } else {
                off += v;
            }
        }
    }
    off / diag
}

/// `lambda_max / lambda_min`, or `+inf` when the smallest eigenvalue is not
/// resolvably positive.
pub fn condition_number(r: faer::MatRef<'_, Complex64>) -> Result<f64> {
    linalg::check_hermitian(r)?;
    let ev = linalg::hermitian_eigenvalues(r)?;
    let (min, max) = (ev[0], ev[ev.len() - 1]);
    let floor = r.nrows() as f64 * f64::EPSILON * max.abs();
    if min <= floor {
        Ok(f64::INFINITY)
    } else {
        Ok(max / min)
    }
}

/// Summary metrics of a covariance model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub ipr: f64,
    pub ipr_magnitude: f64,
    pub condition_number: f64,
    pub jensen_capacity_bits: f64,
    pub snr_db: f64,
    pub grid: GridSpec,
    pub params: PulseParams,
    pub channel_stats: WssusStats,
    pub options: CovarianceOptions,
}

impl CovarianceModel {
    pub fn report(&self, snr_db: f64) -> Result<CovarianceReport> {
        let r = self.matrix();
        let snr = 10f64.powf(snr_db / 10.0);
        Ok(CovarianceReport {
            ipr: ipr(r.as_ref()),
            ipr_magnitude: ipr_magnitude(r.as_ref()),
            condition_number: condition_number(r.as_ref())?,
            jensen_capacity_bits: jensen_capacity(r.as_ref(), snr, self.grid.size())?,
            snr_db,
            grid: self.grid,
            params: self.params,
            channel_stats: self.stats,
            options: self.opts,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(alpha: f64, beta: f64, opts: CovarianceOptions) -> CovarianceModel {
        let g = GridSpec::covariance_default();
        CovarianceModel::new(g, PulseParams::new(0.8, alpha, beta).unwrap(), WssusStats::covariance_default(&g), opts)
            .unwrap()
    }

    #[test]
    fn pieces_cover_interval() {
        let ps = wrap_pieces(0.45, -0.2, 0.0, 0.9, 1.0);
        assert_eq!(ps.first().unwrap().0, 0.0);
        assert_eq!(ps.last().unwrap().1, 0.9);
        for w in ps.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        // c1 - t leaves [-0.5, 0.5) through the bottom edge at t = 0.95 (not
        // reached) and c2 - t at t = 0.3
        assert_eq!(ps.len(), 2);
        assert_eq!((ps[0].2, ps[0].3), (0.0, 0.0));
        assert_eq!((ps[1].2, ps[1].3), (0.0, 1.0));
        assert_eq!(wrap_pieces(0.0, 0.0, -0.2, 0.2, 1.0), vec![(-0.2, 0.2, 0.0, 0.0)]);
    }

    #[test]
    fn diagonal_matches_complex_path() {
        for wrap in [true, false] {
            let m = model(5.0, 5.0, CovarianceOptions { wrap, ..Default::default() });
            for p in [0, 9, 36, 63] {
                let d = m.covariance_diag(p);
                let s: Complex64 = (0..64).map(|q| m.covariance_offdiag(p, p, q)).sum::<Complex64>() * 8.0;
                assert!((s.re / d - 1.0).abs() < 1e-12, "{} vs {d}", s.re);
                assert!(s.im.abs() < 1e-12 * d);
            }
        }
    }

    #[test]
    fn diagonal_ignores_phase_warping() {
        let a = model(0.0, 0.0, Default::default());
        let b = model(5.0, 5.0, Default::default());
        for p in 0..64 {
            assert_eq!(a.covariance_diag(p).to_bits(), b.covariance_diag(p).to_bits());
            assert!(a.covariance_diag(p) > 0.0);
        }
    }

    #[test]
    fn matrix_is_hermitian_psd() {
        for opts in [
            CovarianceOptions::default(),
            CovarianceOptions { wrap: false, twist: TwistConvention::Transmit },
            CovarianceOptions { wrap: true, twist: TwistConvention::Receive },
        ] {
            let m = model(3.0, 2.0, opts);
            let r = m.matrix();
            assert_eq!(linalg::hermitian_defect(r.as_ref()), 0.0);
            linalg::psd_eigenvalues(r.as_ref()).unwrap();
            let (p, p2) = (10, 37);
            assert!((r[(p, p2)] - m.entry(p, p2)).norm() < 1e-13 * r[(p, p)].re);
        }
    }

    #[test]
    fn transmit_twist_wrapped_model_is_block_circulant() {
        let m = model(2.0, 4.0, Default::default());
        let g = m.grid;
        let r = m.matrix();
        let scale = r[(0, 0)].re;
        for p in 0..g.size() {
            for p2 in 0..g.size() {
                let ((k, l), (k2, l2)) = (g.unflat(p), g.unflat(p2));
                let s = g.flat((k + 3) % g.m, (l + 5) % g.n);
                let s2 = g.flat((k2 + 3) % g.m, (l2 + 5) % g.n);
                assert!((r[(p, p2)] - r[(s, s2)]).norm() < 1e-12 * scale);
            }
        }
    }

    #[test]
    fn metric_identities() {
        let i4 = Mat::<Complex64>::identity(4, 4);
        assert_eq!(ipr(i4.as_ref()), 0.0);
        assert_eq!(condition_number(i4.as_ref()).unwrap(), 1.0);
        assert!((jensen_capacity(i4.as_ref(), 4.0, 4).unwrap() - 4.0).abs() < 1e-14);
        let z = Mat::<Complex64>::zeros(4, 4);
        assert_eq!(jensen_capacity(z.as_ref(), 4.0, 4).unwrap(), 0.0);
        let ones = Mat::from_fn(2, 2, |_, _| Complex64::new(1.0, 0.0));
        assert_eq!(ipr(ones.as_ref()), 1.0);
        assert_eq!(ipr_magnitude(ones.as_ref()), 1.0);
        assert_eq!(condition_number(ones.as_ref()).unwrap(), f64::INFINITY);
        let neg = Mat::from_fn(2, 2, |i, j| Complex64::new(if i == j { 1.0 } else { 3.0 }, 0.0));
        assert!(jensen_capacity(neg.as_ref(), 1.0, 2).is_err());
    }
}
