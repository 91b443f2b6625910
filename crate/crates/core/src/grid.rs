//! Delay-Doppler grid geometry.
//!
//! The delay axis spans the frame duration `T` in `M` bins and the Doppler
//! axis spans the bandwidth `B` in `N` bins, so `d_tau = T/M` and
//! `d_nu = B/N`. Note that this is the reverse of the usual OTFS convention
//! where the delay resolution is `1/B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Delay bins.
    pub m: usize,
    /// Doppler bins.
    pub n: usize,
    /// Frame duration in seconds.
    pub t: f64,
    /// Bandwidth in hertz.
    pub b: f64,
}

impl GridSpec {
    /// Builds a grid, requiring even `M, N >= 2` and positive `T, B`.
    pub fn new(m: usize, n: usize, t: f64, b: f64) -> Result<Self> {
        let g = Self { m, n, t, b };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 || self.n < 2 {
            return Err(Error::InvalidGrid(format!("M and N must be at least 2 (got {}x{})", self.m, self.n)));
        }
        if !self.m.is_multiple_of(2) || !self.n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "origin-centred indexing needs even M and N (got {}x{})",
                self.m, self.n
            )));
        }
        if !(self.t.is_finite() && self.t > 0.0) || !(self.b.is_finite() && self.b > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "T and B must be positive and finite (got T={}, B={})",
                self.t, self.b
            )));
        }
        Ok(())
    }

    /// 8x8 covariance-analysis grid (T = 1.12 ms, B = 28 kHz).
    pub fn covariance_default() -> Self {
        Self { m: 8, n: 8, t: 1.12e-3, b: 28e3 }
    }

    /// 16x16 grid used for capacity benchmarking.
    pub fn communication_default() -> Self {
        Self { m: 16, n: 16, t: 1.12e-3, b: 28e3 }
    }

    /// 256x256 grid used for the discrete Fisher information.
    pub fn sensing_default() -> Self {
        Self { m: 256, n: 256, t: 1.12e-3, b: 28e3 }
    }

    #[inline]
    pub fn d_tau(&self) -> f64 {
        self.t / self.m as f64
    }

    #[inline]
    pub fn d_nu(&self) -> f64 {
        self.b / self.n as f64
    }

    #[inline]
    pub fn bt(&self) -> f64 {
        self.b * self.t
    }

    /// Number of grid cells, `M*N`.
    #[inline]
    pub fn size(&self) -> usize {
        self.m * self.n
    }

    /// Signed delay index of storage row `i`, in `-M/2..M/2`.
    #[inline]
    pub fn delay_index(&self, i: usize) -> i64 {
        i as i64 - (self.m / 2) as i64
    }

    /// Signed Doppler index of storage column `j`, in `-N/2..N/2`.
    #[inline]
    pub fn doppler_index(&self, j: usize) -> i64 {
        j as i64 - (self.n / 2) as i64
    }

    /// Delay (seconds) at storage row `i` of an origin-centred grid.
    #[inline]
    pub fn delay_at(&self, i: usize) -> f64 {
        self.delay_index(i) as f64 * self.d_tau()
    }

    /// Doppler (hertz) at storage column `j` of an origin-centred grid.
    #[inline]
    pub fn doppler_at(&self, j: usize) -> f64 {
        self.doppler_index(j) as f64 * self.d_nu()
    }

    /// Flattened index `p = k*N + l` (delay-major).
    #[inline]
    pub fn flat(&self, k: usize, l: usize) -> usize {
        k * self.n + l
    }

    /// Inverse of [`GridSpec::flat`].
    #[inline]
    pub fn unflat(&self, p: usize) -> (usize, usize) {
        (p / self.n, p % self.n)
    }

    /// Wraps a delay displacement into `[-T/2, T/2)`.
    #[inline]
    pub fn wrap_delay(&self, x: f64) -> f64 {
        wrap_centered(x, self.t)
    }

    /// Wraps a Doppler displacement into `[-B/2, B/2)`.
    #[inline]
    pub fn wrap_doppler(&self, x: f64) -> f64 {
        wrap_centered(x, self.b)
    }
}

/// Maps `x` into `[-period/2, period/2)`.
#[inline]
pub(crate) fn wrap_centered(x: f64, period: f64) -> f64 {
    let half = 0.5 * period;
    let mut y = (x + half).rem_euclid(period) - half;
    // rem_euclid can round up to `period` for tiny negative inputs
    if y >= half {
        y -= period;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolutions_are_derived() {
        let g = GridSpec::communication_default();
        assert_eq!(g.d_tau() * g.m as f64, g.t);
        assert!((g.d_nu() * g.n as f64 - g.b).abs() < 1e-9);
        assert!((g.bt() - 31.36).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(GridSpec::new(1, 8, 1.0, 1.0).is_err());
        assert!(GridSpec::new(7, 8, 1.0, 1.0).is_err());
        assert!(GridSpec::new(8, 8, 0.0, 1.0).is_err());
        assert!(GridSpec::new(8, 8, 1.0, f64::NAN).is_err());
        assert!(GridSpec::new(8, 8, 1.0, 1.0).is_ok());
    }

    #[test]
    fn centred_indices() {
        let g = GridSpec::new(4, 6, 1.0, 1.0).unwrap();
        assert_eq!(g.delay_index(0), -2);
        assert_eq!(g.delay_index(3), 1);
        assert_eq!(g.doppler_index(0), -3);
        assert_eq!(g.doppler_index(5), 2);
        assert_eq!(g.unflat(g.flat(3, 5)), (3, 5));
    }

    #[test]
    fn wrapping_is_half_open() {
        assert_eq!(wrap_centered(0.5, 1.0), -0.5);
        assert_eq!(wrap_centered(-0.5, 1.0), -0.5);
        assert!((wrap_centered(0.7, 1.0) + 0.3).abs() < 1e-15);
        assert!((wrap_centered(-1.2, 1.0) + 0.2).abs() < 1e-15);
        assert_eq!(wrap_centered(0.25, 1.0), 0.25);
    }
}
