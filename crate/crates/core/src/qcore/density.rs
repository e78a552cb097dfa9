//! Density matrices and the Frobenius-nearest PSD projection.

use super::{c, eigh, hermitize, is_hermitian, trace, Operator};
use crate::{Error, Result};
use ndarray::Array2;

/// Complex square matrix carrying a quantum state.
///
/// Conditional protocol branches are stored unnormalized, with trace equal
/// to the branch probability; `normalized` records which contract applies.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    mat: Operator,
    normalized: bool,
}

impl DensityMatrix {
    /// Validated normalized state: Hermitian within 1e-10, eigenvalues
    /// >= -1e-9, trace 1 +- 1e-9.
    pub fn new(mat: Operator) -> Result<Self> {
        Self::with_normalization(mat, true)
    }

    /// Validated unnormalized branch (trace = branch probability).
    pub fn branch(mat: Operator) -> Result<Self> {
        Self::with_normalization(mat, false)
    }

    pub fn with_normalization(mat: Operator, normalized: bool) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch("density matrix must be square".into()));
        }
        if !mat.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
            return Err(Error::Invariant {
                field: "DensityMatrix.entries".into(),
                msg: "non-finite entry".into(),
            });
        }
        if !is_hermitian(&mat, 1e-10) {
            return Err(Error::Invariant {
                field: "DensityMatrix.hermitian".into(),
                msg: "asymmetry exceeds 1e-10".into(),
            });
        }
        let (vals, _) = eigh(&mat)?;
        if vals.iter().any(|&v| v < -1e-9) {
            return Err(Error::Invariant {
                field: "DensityMatrix.psd".into(),
                msg: format!("eigenvalue {:.3e} below -1e-9", vals[0]),
            });
        }
        let tr = trace(&mat).re;
        if normalized && (tr - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant {
                field: "DensityMatrix.trace".into(),
                msg: format!("trace {tr} differs from 1 by more than 1e-9"),
            });
        }
        Ok(Self { mat, normalized })
    }

    /// Build without eigenvalue/trace validation; used on hot paths where
    /// the caller guarantees the invariants (checked in tests).
    pub fn from_parts_unchecked(mat: Operator, normalized: bool) -> Self {
        Self { mat, normalized }
    }

    pub fn matrix(&self) -> &Operator {
        &self.mat
    }

    pub fn into_matrix(self) -> Operator {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn trace(&self) -> f64 {
        trace(&self.mat).re
    }

    /// Normalize the branch to unit trace.
    pub fn normalize(&self) -> Result<DensityMatrix> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::InvalidArgument(format!("cannot normalize trace {tr}")));
        }
        Ok(DensityMatrix {
            mat: &self.mat * c(1.0 / tr),
            normalized: true,
        })
    }
}

/// Outcome of [`nearest_density`].
#[derive(Debug, Clone)]
pub struct NearestDensityOutcome {
    pub state: DensityMatrix,
    /// Set when the symmetrized input spectrum was entirely non-positive and
    /// the maximally mixed state was substituted.
    pub degenerate_input: bool,
}

/// Frobenius-nearest density matrix to an arbitrary operator.
///
/// The input is symmetrized, then its spectrum is projected onto the
/// probability simplex (uniform shift followed by clipping), which minimizes
/// the Frobenius distance over {PSD, trace 1}.
pub fn nearest_density(op: &Operator) -> Result<NearestDensityOutcome> {
    if op.nrows() != op.ncols() {
        return Err(Error::DimMismatch("nearest_density requires a square input".into()));
    }
    let h = hermitize(op);
    let n = h.nrows();
    let (vals, vecs) = eigh(&h)?;
    if vals.iter().all(|&v| v <= 0.0) {
        let mixed = Array2::from_diag_elem(n, c(1.0 / n as f64));
        return Ok(NearestDensityOutcome {
            state: DensityMatrix::new(mixed)?,
            degenerate_input: true,
        });
    }

    // Simplex projection by bisection on the shift theta with
    // sum_i max(lambda_i - theta, 0) = 1.
    let mut lo = vals.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mass = |theta: f64| -> f64 { vals.iter().map(|&v| (v - theta).max(0.0)).sum() };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    let clipped: Vec<f64> = vals.iter().map(|&v| (v - theta).max(0.0)).collect();
    let total: f64 = clipped.iter().sum();

    let mut out: Operator = Array2::zeros((n, n));
    for (k, &w) in clipped.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let w = w / total;
        for i in 0..n {
            for j in 0..n {
                out[[i, j]] += vecs[[i, k]] * vecs[[j, k]].conj() * c(w);
            }
        }
    }
    let out = hermitize(&out);
    Ok(NearestDensityOutcome {
        state: DensityMatrix::new(out)?,
        degenerate_input: false,
    })
}
