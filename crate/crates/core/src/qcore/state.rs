//! Pure states and pure-state fidelity.

use super::{C64, DensityMatrix, Operator};
use crate::{Error, Result};
use ndarray::{Array1, Array2};

/// Normalized complex amplitude vector.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: Array1<C64>,
}

impl PureState {
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let v = Array1::from_vec(amps);
        let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Invariant {
                field: "PureState.amps".into(),
                msg: format!("norm {norm} differs from 1 by more than 1e-10"),
            });
        }
        Ok(Self { amps: v })
    }

    /// Normalize an arbitrary non-zero amplitude vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            amps: Array1::from_vec(amps) / C64::new(norm, 0.0),
        })
    }

    /// Computational basis state |index> in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self {
            amps: Array1::from_vec(amps),
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    /// |psi><psi| as an operator.
    pub fn projector(&self) -> Operator {
        let d = self.dim();
        let mut out = Array2::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                out[[i, j]] = self.amps[i] * self.amps[j].conj();
            }
        }
        out
    }
}

/// <psi| rho |psi> for a normalized density matrix, clamped to [0, 1].
pub fn state_fidelity(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    let m = rho.matrix();
    if m.nrows() != psi.dim() {
        return Err(Error::DimMismatch(format!(
            "state_fidelity: rho dim {} vs psi dim {}",
            m.nrows(),
            psi.dim()
        )));
    }
    let mut val = C64::new(0.0, 0.0);
    for i in 0..psi.dim() {
        for j in 0..psi.dim() {
            val += psi.amps[i].conj() * m[[i, j]] * psi.amps[j];
        }
    }
    if val.im.abs() > 1e-10 * val.norm().max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "fidelity has imaginary part {:.3e}",
            val.im
        )));
    }
    Ok(val.re.clamp(0.0, 1.0))
}
