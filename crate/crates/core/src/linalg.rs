//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// `Zᵀ diag(w) Z`.
pub fn weighted_gram(z: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    weighted_cross(z, w, z)
}

/// `Aᵀ diag(w) B` for two matrices sharing their row count.
pub fn weighted_cross(a: &DMatrix<f64>, w: &[f64], b: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, pa) = a.shape();
    let pb = b.ncols();
    debug_assert_eq!(n, b.nrows());
    debug_assert_eq!(n, w.len());
    let mut out = DMatrix::zeros(pa, pb);
    for j in 0..pa {
        let aj = a.column(j);
        for k in 0..pb {
            let bk = b.column(k);
            let mut s = 0.0;
            for i in 0..n {
                s += aj[i] * w[i] * bk[i];
            }
            out[(j, k)] = s;
        }
    }
    out
}

/// `Zᵀ w`.
pub fn weighted_sum(z: &DMatrix<f64>, w: &[f64]) -> DVector<f64> {
    z.tr_mul(&DVector::from_column_slice(w))
}

/// Replaces `m` with `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let p = m.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Inverse of a symmetric positive-definite matrix, symmetrized.
pub fn spd_inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = m.clone().cholesky().ok_or(Error::SingularHessian)?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::SingularHessian)
    }
}

/// General inverse via LU, used when positive definiteness is not guaranteed.
pub fn inverse(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let inv = m.clone().try_inverse().ok_or(Error::SingularHessian)?;
    if inv.iter().all(|v| v.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::SingularHessian)
    }
}

/// `gᵀ Σ g`.
pub fn quad_form(g: &DVector<f64>, sigma: &DMatrix<f64>) -> f64 {
    (g.transpose() * sigma * g)[(0, 0)]
}

/// Block-diagonal matrix from square blocks.
pub fn block_diag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(dim, dim);
    let mut at = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((at, at), (k, k)).copy_from(*b);
        at += k;
    }
    out
}

pub fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}
