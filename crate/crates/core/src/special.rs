//! Error functions and truncated Gaussian integrals.
//!
//! The covariance closed forms reduce to integrals of `exp(-a t^2 + b t + c)`
//! over finite intervals with complex `b`, `c`. Writing them as differences
//! of `erf` values overflows quickly (`exp(z^2)` grows like `e^(Im z)^2`), so
//! [`gaussian_integral`] works with the Faddeeva function `w(z)` in the upper
//! half-plane and only ever exponentiates non-positive real parts.

use std::f64::consts::PI;

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `|Re z|` and `|Im z|` accepted by [`complex_erf`].
pub const ERF_GUARD: f64 = 30.0;

/// Complex error function on the guarded square `|Re z|, |Im z| <= 30`.
///
/// Fails outside the square, and inside it wherever `erf` itself is not
/// representable (near the imaginary axis `erf(iy) ~ e^(y^2)`).
pub fn complex_erf(z: Complex64) -> Result<Complex64> {
    if !(z.re.abs() <= ERF_GUARD && z.im.abs() <= ERF_GUARD) {
        return Err(Error::ErfRange { re: z.re, im: z.im });
    }
    let v = z.erf();
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::ErfRange { re: z.re, im: z.im })
    }
}

/// Faddeeva function `w(z) = exp(-z^2) erfc(-i z)`.
#[inline]
pub fn faddeeva(z: Complex64) -> Complex64 {
    z.w()
}

#[inline]
pub fn erf(x: f64) -> f64 {
    RealErrorFunctions::erf(x)
}

#[inline]
pub fn erfc(x: f64) -> f64 {
    RealErrorFunctions::erfc(x)
}

/// `integral_lo^hi exp(-a t^2 + b t + c) dt` for real `a > 0`.
///
/// Accurate whenever the integrand modulus stays bounded on the real line,
/// which holds for every covariance term (the integrand is a product of
/// unit-peak Gaussians and phases).
pub fn gaussian_integral(a: f64, b: Complex64, c: Complex64, lo: f64, hi: f64) -> Complex64 {
    debug_assert!(a > 0.0 && lo <= hi);
    if lo == hi {
        return Complex64::new(0.0, 0.0);
    }
    let sa = a.sqrt();
    let t0 = b / (2.0 * a);
    let k = b * b / (4.0 * a) + c;
    let exponent = |t: f64| -a * t * t + b * t + c;

    // s * exp(K) * erf(z) = exp(K) - exp(E) w(i s z), with s = sign(Re z)
    // and E the integrand exponent at the endpoint.
    let tail = |t: f64| -> (f64, Complex64) {
        let z = (t - t0) * sa;
        let s = if z.re >= 0.0 { 1.0 } else { -1.0 };
        let w = faddeeva(Complex64::new(0.0, s) * z);
        (s, exponent(t).exp() * w)
    };
    let (s_hi, e_hi) = tail(hi);
    let (s_lo, e_lo) = tail(lo);
    // erf(z_hi) - erf(z_lo), scaled by exp(K)
    let diff = if s_hi == s_lo {
        (e_lo - e_hi) * s_hi
    } else {
        // s_hi = +1, s_lo = -1: the centre lies inside the interval
        k.exp() * 2.0 - e_hi - e_lo
    };
    diff * (PI.sqrt() / (2.0 * sa))
}

/// Real-coefficient version of [`gaussian_integral`].
///
/// Uses complementary error functions on the tails so small integrals far
/// from the centre keep their relative accuracy.
pub fn gaussian_integral_real(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(a > 0.0 && lo <= hi);
    if lo == hi {
        return 0.0;
    }
    let sa = a.sqrt();
    let t0 = b / (2.0 * a);
    let k = b * b / (4.0 * a) + c;
    let (z_lo, z_hi) = (sa * (lo - t0), sa * (hi - t0));
    let scale = PI.sqrt() / (2.0 * sa);
    if z_lo >= 0.0 {
        // exp(K) erfc(z) = exp(E) erfcx(z) keeps the tails finite
        let e = |t: f64, z: f64| (-a * t * t + b * t + c).exp() * z.erfcx();
        scale * (e(lo, z_lo) - e(hi, z_hi))
    } else if z_hi <= 0.0 {
        let e = |t: f64, z: f64| (-a * t * t + b * t + c).exp() * (-z).erfcx();
        scale * (e(hi, z_hi) - e(lo, z_lo))
    } else {
        scale * k.exp() * (erf(z_hi) - erf(z_lo))
    }
}

#[cfg(test)]
#[allow(clippy::excessive_precision, clippy::type_complexity)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // 40-digit reference values
    const ERF_ORACLE: &[((f64, f64), (f64, f64))] = &[
        ((1.0, 0.0), (0.84270079294971487, 0.0)),
        ((0.0, 1.0), (0.0, 1.6504257587975429)),
        ((0.5, -0.25), (0.54868936055376218, -0.22199095428837335)),
        ((-2.5, 1.5), (-1.0004844145745747, 0.0034035003087279405)),
        ((3.0, 4.0), (-120.18699139507944, -27.750337293623902)),
        ((1e-06, 2e-06), (1.1283791670996499e-6, 2.2567583341917773e-6)),
        ((6.0, -0.1), (0.99999999999999999, -2.0381364935859382e-17)),
    ];

    #[test]
    fn erf_matches_oracle() {
        assert_eq!(complex_erf(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        for &((x, y), (re, im)) in ERF_ORACLE {
            let got = complex_erf(c(x, y)).unwrap();
            assert!(rel(got, c(re, im)) < 1e-12, "erf({x}+{y}i) = {got}");
        }
    }

    #[test]
    fn erf_range_guard() {
        assert!(matches!(complex_erf(c(31.0, 0.0)), Err(Error::ErfRange { .. })));
        assert!(matches!(complex_erf(c(0.0, -30.5)), Err(Error::ErfRange { .. })));
        assert!(complex_erf(c(f64::NAN, 0.0)).is_err());
        // inside the square but erf(27i) overflows
        assert!(complex_erf(c(0.05, 27.0)).is_err());
        assert!(complex_erf(c(29.0, 29.0)).is_ok());
    }

    #[test]
    fn erf_is_odd_and_conjugate_symmetric() {
        for z in [c(0.3, 0.7), c(-1.2, 2.2), c(4.0, -0.5)] {
            let e = complex_erf(z).unwrap();
            assert!(rel(complex_erf(-z).unwrap(), -e) < 1e-15);
            assert!(rel(complex_erf(z.conj()).unwrap(), e.conj()) < 1e-15);
        }
    }

    // (a, b, c, lo, hi, value) with values from adaptive arbitrary-precision
    // quadrature
    const INTEGRAL_ORACLE: &[(f64, (f64, f64), (f64, f64), f64, f64, (f64, f64))] = &[
        (3.0, (1.0, 2.0), (-0.5, 0.3), -1.0, 2.0, (0.39013993140227459, 0.28739781837023739)),
        (50.0, (40.0, -30.0), (-8.0, 1.0), 0.0, 1.0, (1.2567257860330349e-5, 0.0027779731814693498)),
        (1.0, (0.0, 25.0), (0.0, 0.0), -4.0, 4.0, (-6.4136892700568195e-9, -8.8835853919077653e-49)),
        (400.0, (-200.0, 5.0), (-25.0, 0.0), 0.0, 0.3, (6.8088080731339193e-14, 1.640103023384716e-15)),
        (2.0, (1.0, 0.0), (-0.125, 0.0), 2.0, 3.0, (0.00029153351361880845, 0.0)),
    ];

    #[test]
    fn gaussian_integral_matches_quadrature() {
        for &(a, (br, bi), (cr, ci), lo, hi, (vr, vi)) in INTEGRAL_ORACLE {
            let got = gaussian_integral(a, c(br, bi), c(cr, ci), lo, hi);
            assert!(rel(got, c(vr, vi)) < 1e-11, "a={a} got {got} want {vr}+{vi}i");
        }
    }

    #[test]
    fn real_integral_agrees_with_complex_path() {
        for &(a, b, cc, lo, hi) in &[
            (2.0, 1.0, -0.125, 2.0, 3.0),
            (2.0, 1.0, -0.125, -3.0, 3.0),
            (7.0, -3.0, -1.0, -5.0, -1.0),
            (1e4, 50.0, -0.0625, 0.0, 0.01),
        ] {
            let r = gaussian_integral_real(a, b, cc, lo, hi);
            let z = gaussian_integral(a, c(b, 0.0), c(cc, 0.0), lo, hi);
            assert!((r - z.re).abs() <= 1e-13 * r.abs(), "{r} vs {z}");
            assert!(z.im.abs() <= 1e-15 * r.abs());
        }
        assert_eq!(gaussian_integral_real(1.0, 0.0, 0.0, 0.5, 0.5), 0.0);
    }

    #[test]
    fn full_line_limit() {
        // integral over a wide interval approaches sqrt(pi/a) exp(b^2/(4a) + c)
        let (a, b) = (3.0, c(0.4, -1.1));
        let got = gaussian_integral(a, b, c(0.0, 0.0), -20.0, 20.0);
        let want = (PI / a).sqrt() * (b * b / (4.0 * a)).exp();
        assert!(rel(got, want) < 1e-14);
    }
}
