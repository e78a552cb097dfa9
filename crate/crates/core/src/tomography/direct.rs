//! Direct single-qubit reconstruction from corrected Pauli expectations.

use super::counts::ReadoutMatrix;
use crate::qcore::{c, nearest_density, C64, DensityMatrix, Operator};
use crate::{Error, Result};
use ndarray::Array2;

/// rho = (I + <X> X + <Y> Y + <Z> Z)/2, projected onto the Bloch ball via
/// the nearest-density projection when the Bloch norm exceeds one.
pub fn direct_single_qubit(x: f64, y: f64, z: f64) -> Result<DensityMatrix> {
    for (name, v) in [("x", x), ("y", y), ("z", z)] {
        if !(-1.0..=1.0).contains(&v) {
            return Err(Error::InvalidArgument(format!(
                "expectation <{name}> = {v} out of [-1, 1]"
            )));
        }
    }
    let mut m: Operator = Array2::zeros((2, 2));
    m[[0, 0]] = c(0.5 * (1.0 + z));
    m[[1, 1]] = c(0.5 * (1.0 - z));
    m[[0, 1]] = C64::new(0.5 * x, -0.5 * y);
    m[[1, 0]] = C64::new(0.5 * x, 0.5 * y);
    let norm = (x * x + y * y + z * z).sqrt();
    if norm > 1.0 {
        return Ok(nearest_density(&m)?.state);
    }
    DensityMatrix::new(m)
}

/// Invert the single-qubit readout matrix on measured (N0, N1) counts and
/// return the corrected expectation 2 n0 - 1.
pub fn corrected_expectation(n0: u64, n1: u64, readout: &ReadoutMatrix) -> Result<f64> {
    if readout.dim != 2 {
        return Err(Error::DimMismatch("single-qubit readout must be 2x2".into()));
    }
    let total = (n0 + n1) as f64;
    if total == 0.0 {
        return Err(Error::InvalidArgument("empty record".into()));
    }
    let p0 = n0 as f64 / total;
    let p1 = n1 as f64 / total;
    let det = readout.get(0, 0) * readout.get(1, 1) - readout.get(0, 1) * readout.get(1, 0);
    if det.abs() < 1e-12 {
        return Err(Error::InvalidArgument("singular readout matrix".into()));
    }
    let n0c = (readout.get(1, 1) * p0 - readout.get(0, 1) * p1) / det;
    Ok((2.0 * n0c - 1.0).clamp(-1.0, 1.0))
}
