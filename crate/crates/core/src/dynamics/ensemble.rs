//! Heralded-ensemble containers and deterministic reductions.

use crate::qcore::{c, Operator};
use ndarray::Array2;
use serde::Serialize;

/// Identifies one conditional branch by its detection-time bin(s).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BranchKey {
    pub t0_bin: usize,
    pub t1_bin: Option<usize>,
}

/// Mean and standard error of a per-trial scalar.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalarStat {
    pub mean: f64,
    pub std_err: f64,
}

impl ScalarStat {
    pub fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = if samples.len() > 1 {
            samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_err: (var / n).sqrt(),
        }
    }
}

/// One trial's conditional branches (unnormalized; trace = probability).
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub branches: Vec<Operator>,
    pub noise_branches: Vec<Operator>,
    pub no_click_trace: f64,
}

/// Monte Carlo mean of the conditional branch set.
#[derive(Debug, Clone)]
pub struct HeraldedEnsemble {
    /// Per-subsystem dimensions of the branch matrices.
    pub dims: Vec<usize>,
    /// Jump-time bin width (us).
    pub dt: f64,
    /// Heralding window duration(s) (us).
    pub windows: Vec<f64>,
    /// Acceptance parameter: tau_A for one window, the two-sided width W
    /// for two windows (us).
    pub accept: f64,
    pub trials: usize,
    pub keys: Vec<BranchKey>,
    /// Mean ion-photon branches, aligned with `keys`.
    pub branches: Vec<Operator>,
    /// Mean noise-count branches, aligned with `keys` (empty if the noise
    /// rate is zero).
    pub noise_branches: Vec<Operator>,
    /// Mean trace of the fully evolved no-click state.
    pub no_click_trace: f64,
    /// Per-trial observable samples, one inner vector per observable.
    pub observable_samples: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

impl HeraldedEnsemble {
    /// Total heralding probability: branch traces plus noise weights.
    pub fn success_probability(&self) -> f64 {
        let sig: f64 = self.branches.iter().map(|b| trace_re(b)).sum();
        let noise: f64 = self.noise_branches.iter().map(|b| trace_re(b)).sum();
        sig + noise
    }

    /// Unnormalized accepted state: sum of all branches and noise branches.
    pub fn accepted_state(&self) -> Operator {
        let d: usize = self.dims.iter().product();
        let mut acc: Operator = Array2::zeros((d, d));
        for b in &self.branches {
            acc = acc + b;
        }
        for b in &self.noise_branches {
            acc = acc + b;
        }
        acc
    }

    /// Unnormalized state restricted to branches with t0 below `tau_a`
    /// (bin-center convention), for window re-slicing.
    pub fn accepted_state_upto(&self, tau_a: f64) -> Operator {
        let d: usize = self.dims.iter().product();
        let mut acc: Operator = Array2::zeros((d, d));
        for (key, b) in self.keys.iter().zip(&self.branches) {
            if self.bin_center(key.t0_bin) < tau_a {
                acc = acc + b;
            }
        }
        for (key, b) in self.keys.iter().zip(&self.noise_branches) {
            if self.bin_center(key.t0_bin) < tau_a {
                acc = acc + b;
            }
        }
        acc
    }

    pub fn bin_center(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * self.dt
    }

    pub fn observable_stat(&self, index: usize) -> Option<ScalarStat> {
        self.observable_samples
            .get(index)
            .map(|s| ScalarStat::from_samples(s))
    }
}

pub(crate) fn trace_re(m: &Operator) -> f64 {
    (0..m.nrows()).map(|i| m[[i, i]].re).sum()
}

/// Pairwise-tree sum of equally shaped operator sets; deterministic for a
/// fixed partition regardless of thread count.
pub(crate) fn tree_merge(mut parts: Vec<Vec<Operator>>) -> Vec<Operator> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut iter = parts.into_iter();
        while let Some(a) = iter.next() {
            if let Some(b) = iter.next() {
                let merged: Vec<Operator> =
                    a.into_iter().zip(b).map(|(x, y)| x + y).collect();
                next.push(merged);
            } else {
                next.push(a);
            }
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

pub(crate) fn scale_set(set: &mut [Operator], factor: f64) {
    for m in set.iter_mut() {
        *m = &*m * c(factor);
    }
}
