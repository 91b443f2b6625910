//! Hermitian matrix helpers on top of `faer`.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for Hermitian symmetry checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL * lambda_max` count as non-negative.
pub const PSD_TOL: f64 = 1e-10;

/// `max |A - A^H| / max |A|`.
pub fn hermitian_defect(a: MatRef<'_, Complex64>) -> f64 {
    let n = a.nrows();
    let (mut defect, mut scale) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(a[(i, j)].norm());
            defect = defect.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        defect / scale
    }
}

pub fn check_hermitian(a: MatRef<'_, Complex64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::Linalg(format!("matrix is {}x{}, expected square", a.nrows(), a.ncols())));
    }
    let d = hermitian_defect(a);
    if d.is_nan() || d > HERMITIAN_TOL {
        return Err(Error::NotPsd(format!("Hermitian defect {d:.3e}")));
    }
    Ok(())
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    let mut ev = a
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Linalg(format!("eigenvalue solver failed: {e:?}")))?;
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Eigenvalues of a Hermitian PSD matrix, rejecting negative eigenvalues
/// beyond round-off.
pub fn psd_eigenvalues(a: MatRef<'_, Complex64>) -> Result<Vec<f64>> {
    check_hermitian(a)?;
    let ev = hermitian_eigenvalues(a)?;
    let max = ev.last().copied().unwrap_or(0.0).max(0.0);
    if let Some(&min) = ev.first() {
        if min < -PSD_TOL * max || (max == 0.0 && min < 0.0) {
            return Err(Error::NotPsd(format!("eigenvalue {min:.3e} with lambda_max {max:.3e}")));
        }
    }
    Ok(ev)
}

/// `log2 det(I + c A)` for Hermitian PSD `A` and `c >= 0`.
///
/// Cholesky first; if round-off makes the factorisation fail the
/// eigenvalues are used instead.
pub fn log2_det_identity_plus(a: MatRef<'_, Complex64>, c: f64) -> Result<f64> {
    let n = a.nrows();
    let mut g = Mat::<Complex64>::from_fn(n, n, |i, j| a[(i, j)] * c);
    for i in 0..n {
        g[(i, i)] += Complex64::new(1.0, 0.0);
    }
    match g.llt(Side::Lower) {
        Ok(llt) => {
            let l = llt.L();
            let mut s = 0.0;
            for i in 0..n {
                s += l[(i, i)].re.ln();
            }
            Ok(2.0 * s / std::f64::consts::LN_2)
        }
        Err(_) => {
            let ev = hermitian_eigenvalues(g.as_ref())?;
            if ev.first().is_some_and(|&v| v <= 0.0) {
                return Err(Error::NotPsd("I + cA is not positive definite".into()));
            }
            Ok(ev.iter().map(|v| v.log2()).sum())
        }
    }
}

/// `G += alpha * X X^H`.
pub fn gram_accumulate(g: &mut Mat<Complex64>, x: MatRef<'_, Complex64>, alpha: f64) {
    matmul(g.as_mut(), Accum::Add, x, x.adjoint(), Complex64::new(alpha, 0.0), Par::Seq);
}

/// `H H^H`.
pub fn gram(h: MatRef<'_, Complex64>) -> Mat<Complex64> {
    let mut g = Mat::<Complex64>::zeros(h.nrows(), h.nrows());
    matmul(g.as_mut(), Accum::Replace, h, h.adjoint(), Complex64::new(1.0, 0.0), Par::Seq);
    g
}
