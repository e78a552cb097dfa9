//! Synthetic measurement records: multinomial draws from readout-corrected
//! populations.

use super::counts::{BasisRecord, CountTable, PauliAxis, ReadoutMatrix};
use super::mle::predicted_populations;
use crate::node::trial_rng;
use crate::qcore::DensityMatrix;
use crate::{Error, Result};
use rand::Rng;

/// Draw `shots` multinomial samples per basis from p = R (rotated
/// populations of rho).
pub fn simulate_counts(
    rho: &DensityMatrix,
    bases: &[(Option<String>, Vec<PauliAxis>)],
    readout: &ReadoutMatrix,
    shots: u64,
    seed: u64,
) -> Result<CountTable> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be positive".into()));
    }
    readout.validate(0.05)?;
    let qubits = bases
        .first()
        .map(|(_, b)| b.len())
        .ok_or_else(|| Error::InvalidArgument("no measurement bases given".into()))?;
    let mut rng = trial_rng(seed, 0);
    let mut records = Vec::with_capacity(bases.len());
    for (label, basis) in bases {
        let p = predicted_populations(rho, basis, readout)?;
        let total: f64 = p.iter().sum();
        let mut cdf = Vec::with_capacity(p.len());
        let mut acc = 0.0;
        for v in &p {
            acc += v.max(0.0);
            cdf.push(acc);
        }
        let mut counts = vec![0u64; p.len()];
        for _ in 0..shots {
            let x: f64 = rng.random::<f64>() * total.max(acc);
            let idx = cdf.iter().position(|&cv| x <= cv).unwrap_or(p.len() - 1);
            counts[idx] += 1;
        }
        records.push(BasisRecord {
            label: label.clone(),
            basis: basis.clone(),
            counts,
        });
    }
    Ok(CountTable { qubits, records })
}

/// The 3^q cardinal Pauli bases in lexicographic X<Y<Z order.
pub fn all_bases(qubits: usize) -> Vec<(Option<String>, Vec<PauliAxis>)> {
    let axes = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    let total = 3usize.pow(qubits as u32);
    (0..total)
        .map(|mut idx| {
            let mut basis = vec![PauliAxis::Z; qubits];
            for slot in (0..qubits).rev() {
                basis[slot] = axes[idx % 3];
                idx /= 3;
            }
            (None, basis)
        })
        .collect()
}
