//! Hermitian eigendecomposition via cyclic Jacobi with complex rotations.
//!
//! Dimensions in this crate stay at or below ~125, where Jacobi is simple,
//! accurate to machine precision and has no external linking requirements.

use super::{C64, Operator};
use crate::{Error, Result};
use ndarray::Array2;

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues ascending and the
/// k-th column of the eigenvector matrix matching the k-th eigenvalue.
pub fn eigh(a: &Operator) -> Result<(Vec<f64>, Operator)> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimMismatch("eigh requires a square matrix".into()));
    }
    let mut m = a.clone();
    let mut v: Operator = Array2::from_diag_elem(n, C64::new(1.0, 0.0));

    let norm: f64 = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
    let tol = 1e-15 * norm;

    let off = |m: &Operator| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[[i, j]].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&m) > tol {
        sweeps += 1;
        if sweeps > 60 {
            return Err(Error::NonConvergence(format!(
                "Jacobi eigensolver did not converge (off-diagonal {:.3e})",
                off(&m)
            )));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.norm() <= tol / (n as f64) {
                    continue;
                }
                // Unitary 2x2 rotation diagonalizing the (p,q) block of the
                // Hermitian matrix: G = [[c, -s e^{i phi}], [s e^{-i phi}, c]].
                let phi = apq.arg();
                let app = m[[p, p]].re;
                let aqq = m[[q, q]].re;
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                let eip = C64::from_polar(1.0, phi);
                let g_pp = C64::new(cth, 0.0);
                let g_pq = -eip * sth;
                let g_qp = eip.conj() * sth;
                let g_qq = C64::new(cth, 0.0);

                // m <- G^dag m G, applied as row then column updates.
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = g_pp.conj() * mpk + g_qp.conj() * mqk;
                    m[[q, k]] = g_pq.conj() * mpk + g_qq.conj() * mqk;
                }
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = mkp * g_pp + mkq * g_qp;
                    m[[k, q]] = mkp * g_pq + mkq * g_qq;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = vkp * g_pp + vkq * g_qp;
                    v[[k, q]] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..n).map(|i| (m[[i, i]].re, i)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let vals: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vecs: Operator = Array2::zeros((n, n));
    for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
        for k in 0..n {
            vecs[[k, new_col]] = v[[k, old_col]];
        }
    }
    Ok((vals, vecs))
}
