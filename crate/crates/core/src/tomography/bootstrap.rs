//! Bootstrap error bars: resample synthetic count sets from the estimate,
//! refit each, and report the spread of requested observables.

use super::counts::{CountTable, ReadoutMatrix};
use super::mle::{mle_reconstruct_from, MleOptions};
use super::simulate::simulate_counts;
use crate::qcore::DensityMatrix;
use crate::{Error, Result};
use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct BootstrapReport {
    /// Standard deviation per requested observable.
    pub std_devs: Vec<f64>,
    /// Mean per observable across resamples.
    pub means: Vec<f64>,
    pub reps: usize,
}

/// Generate `reps` simulated count sets shaped like `counts` from the
/// fitted state, refit each one (warm-started at the estimate) and return
/// the standard deviation of every observable.
pub fn bootstrap_errors(
    estimate: &DensityMatrix,
    counts: &CountTable,
    readout: &ReadoutMatrix,
    reps: usize,
    seed: u64,
    observables: &[&(dyn Fn(&DensityMatrix) -> f64 + Sync)],
) -> Result<BootstrapReport> {
    if reps < 2 {
        return Err(Error::InvalidArgument("bootstrap needs reps >= 2".into()));
    }
    let bases: Vec<(Option<String>, Vec<super::counts::PauliAxis>)> = counts
        .records
        .iter()
        .map(|r| (r.label.clone(), r.basis.clone()))
        .collect();
    let shots: Vec<u64> = counts.records.iter().map(|r| r.total()).collect();
    let options = MleOptions {
        cross_check: false,
        max_iter: 1500,
        tol: 1e-8,
    };

    let samples: Result<Vec<Vec<f64>>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            // Resample with per-record shot counts matching the data.
            let mut table = CountTable {
                qubits: counts.qubits,
                records: Vec::with_capacity(bases.len()),
            };
            for (i, (label, basis)) in bases.iter().enumerate() {
                let single = simulate_counts(
                    estimate,
                    &[(label.clone(), basis.clone())],
                    readout,
                    shots[i].max(1),
                    seed ^ (rep.wrapping_mul(0x9e37_79b9_7f4a_7c15)).wrapping_add(i as u64),
                )?;
                table.records.extend(single.records);
            }
            let fit = mle_reconstruct_from(&table, readout, &options, Some(estimate.matrix()))?;
            Ok(observables.iter().map(|f| f(&fit.rho)).collect())
        })
        .collect();
    let samples = samples?;

    let n_obs = observables.len();
    let mut means = vec![0.0; n_obs];
    for row in &samples {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in means.iter_mut() {
        *m /= reps as f64;
    }
    let mut std_devs = vec![0.0; n_obs];
    for row in &samples {
        for ((s, v), m) in std_devs.iter_mut().zip(row).zip(&means) {
            *s += (v - m) * (v - m);
        }
    }
    for s in std_devs.iter_mut() {
        *s = (*s / (reps as f64 - 1.0)).sqrt();
    }
    Ok(BootstrapReport {
        std_devs,
        means,
        reps,
    })
}
