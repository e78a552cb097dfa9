//! Heralding-rate arithmetic and the attempt-time / efficiency budgets.

use crate::{Error, Result};
use serde::Serialize;

/// Single-photon heralding rate (1/us):
/// R = R_exp * sum_i alpha_i p_det_i (1 - exp(-tau_a / T1o_i)).
pub fn heralding_rate(
    alphas: &[f64],
    p_dets: &[f64],
    t1_opts: &[f64],
    tau_a: f64,
    rep_rate: f64,
) -> Result<f64> {
    if alphas.len() != p_dets.len() || alphas.len() != t1_opts.len() {
        return Err(Error::DimMismatch("heralding_rate: per-ion arrays differ in length".into()));
    }
    let mut success = 0.0;
    for ((&a, &p), &t1) in alphas.iter().zip(p_dets).zip(t1_opts) {
        success += a * p * (1.0 - (-tau_a / t1).exp());
    }
    Ok(rep_rate * success)
}

/// Attempt-time and efficiency-chain budget.
#[derive(Debug, Clone, Serialize)]
pub struct RateBudget {
    /// Step name and duration (us) per entanglement attempt.
    pub steps: Vec<(String, f64)>,
    /// Total attempt duration (us).
    pub attempt_time: f64,
    /// Repetition rate 1/attempt_time (1/us).
    pub repetition_rate: f64,
    /// Efficiency-chain factor names and values.
    pub chain: Vec<(String, f64)>,
    /// Product of the chain factors.
    pub chain_product: f64,
}

pub fn rate_budget(steps: &[(&str, f64)], chain: &[(&str, f64)]) -> Result<RateBudget> {
    if steps.is_empty() {
        return Err(Error::InvalidArgument("rate_budget needs at least one step".into()));
    }
    let attempt_time: f64 = steps.iter().map(|(_, d)| d).sum();
    if attempt_time <= 0.0 {
        return Err(Error::InvalidArgument("attempt time must be positive".into()));
    }
    let chain_product = chain.iter().map(|(_, f)| f).product();
    Ok(RateBudget {
        steps: steps.iter().map(|(n, d)| (n.to_string(), *d)).collect(),
        attempt_time,
        repetition_rate: 1.0 / attempt_time,
        chain: chain.iter().map(|(n, f)| (n.to_string(), *f)).collect(),
        chain_product,
    })
}

/// The tabulated attempt-time budget for the bipartite experiment.
pub fn paper_attempt_steps() -> Vec<(&'static str, f64)> {
    vec![
        ("empty_aux", 24.0),
        ("qubit_init", 33.0),
        ("path_phase_measurement", 14.0),
        ("heralding_sequence", 10.0),
    ]
}

/// The tabulated Device-1 detection-efficiency chain.
pub fn paper_device1_chain() -> Vec<(&'static str, f64)> {
    vec![
        ("cavity_waveguide", 0.117),
        ("chip_fibre", 0.27),
        ("optical_setup", 0.66),
        ("snspd", 0.85),
    ]
}
