//! Elementary operator algebra on dense complex matrices.

use super::{C64, Operator};
use crate::{Error, Result};
use ndarray::Array2;

pub fn identity(dim: usize) -> Operator {
    Array2::from_diag_elem(dim, C64::new(1.0, 0.0))
}

pub fn adjoint(a: &Operator) -> Operator {
    let mut out = Array2::zeros((a.ncols(), a.nrows()));
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            out[[j, i]] = a[[i, j]].conj();
        }
    }
    out
}

pub fn trace(a: &Operator) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[[i, i]]).sum()
}

pub fn matmul(a: &Operator, b: &Operator) -> Operator {
    a.dot(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a.dot(b) - b.dot(a)
}

/// Kronecker product with `a` on the most-significant (left) factor.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Kronecker product of two square operators.
pub fn tensor_product(a: &Operator, b: &Operator) -> Result<Operator> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() {
        return Err(Error::DimMismatch("tensor_product requires square factors".into()));
    }
    Ok(kron(a, b))
}

/// Trace out all subsystems except those in `keep` (given in layout order).
///
/// `dims` are the per-subsystem dimensions; the result keeps the relative
/// order of the retained subsystems.
pub fn partial_trace(rho: &Operator, dims: &[usize], keep: &[usize]) -> Result<Operator> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(Error::DimMismatch(format!(
            "operator dim {} does not match layout dim {}",
            rho.nrows(),
            total
        )));
    }
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::InvalidArgument(format!(
                "keep index {k} out of range for {} subsystems",
                dims.len()
            )));
        }
    }
    let n = dims.len();
    let kept: Vec<usize> = keep.to_vec();
    let traced: Vec<usize> = (0..n).filter(|i| !kept.contains(i)).collect();
    let kept_dim: usize = kept.iter().map(|&i| dims[i]).product();
    let traced_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // Index helpers: decompose a flat index into per-subsystem digits.
    let decompose = |mut idx: usize, order: &[usize]| -> Vec<usize> {
        let mut digits = vec![0usize; order.len()];
        for (slot, &sub) in order.iter().enumerate().rev() {
            digits[slot] = idx % dims[sub];
            idx /= dims[sub];
        }
        digits
    };
    let _ = decompose;

    // Precompute strides of each subsystem in the full flat index.
    let mut strides = vec![0usize; n];
    let mut acc = 1usize;
    for i in (0..n).rev() {
        strides[i] = acc;
        acc *= dims[i];
    }

    let flat = |digits_kept: &[usize], digits_traced: &[usize]| -> usize {
        let mut idx = 0usize;
        for (slot, &sub) in kept.iter().enumerate() {
            idx += digits_kept[slot] * strides[sub];
        }
        for (slot, &sub) in traced.iter().enumerate() {
            idx += digits_traced[slot] * strides[sub];
        }
        idx
    };

    let unrank = |mut r: usize, order: &[usize]| -> Vec<usize> {
        let mut digits = vec![0usize; order.len()];
        for (slot, &sub) in order.iter().enumerate().rev() {
            digits[slot] = r % dims[sub];
            r /= dims[sub];
        }
        digits
    };

    let mut out: Operator = Array2::zeros((kept_dim, kept_dim));
    for i in 0..kept_dim {
        let di = unrank(i, &kept);
        for j in 0..kept_dim {
            let dj = unrank(j, &kept);
            let mut s = C64::new(0.0, 0.0);
            for t in 0..traced_dim {
                let dt = unrank(t, &traced);
                s += rho[[flat(&di, &dt), flat(&dj, &dt)]];
            }
            out[[i, j]] = s;
        }
    }
    Ok(out)
}

/// Tr(rho * obs) for Hermitian `obs`; returns the real part and checks the
/// imaginary part stays below 1e-9 relative to scale.
pub fn expectation(rho: &Operator, obs: &Operator) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimMismatch(format!(
            "expectation: rho {}x{} vs obs {}x{}",
            rho.nrows(),
            rho.ncols(),
            obs.nrows(),
            obs.ncols()
        )));
    }
    let mut val = C64::new(0.0, 0.0);
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            val += rho[[i, j]] * obs[[j, i]];
        }
    }
    let scale = val.norm().max(1.0);
    if val.im.abs() > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!(
            "expectation has non-negligible imaginary part {:.3e}",
            val.im
        )));
    }
    Ok(val.re)
}

/// Symmetrize: rho <- (rho + rho^dag)/2. Suppresses Hermiticity drift from
/// repeated propagation.
pub fn hermitize(a: &Operator) -> Operator {
    let ad = adjoint(a);
    (a + &ad) * C64::new(0.5, 0.0)
}

pub fn is_hermitian(a: &Operator, tol: f64) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    for i in 0..a.nrows() {
        for j in i..a.ncols() {
            if (a[[i, j]] - a[[j, i]].conj()).norm() > tol {
                return false;
            }
        }
    }
    true
}

pub fn frobenius_distance(a: &Operator, b: &Operator) -> f64 {
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        s += (x - y).norm_sqr();
    }
    s.sqrt()
}
