//! Weak-superposition amplitude optimization: a population-balancing ratio
//! followed by a fidelity sweep over the grid.

use super::bell::{single_photon_bell, BellConfig, BellStage};
use crate::Result;
use serde::Serialize;

/// Per-ion |1> amplitudes and their ratio.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaSettings {
    pub alpha: Vec<f64>,
    /// xi = alpha_1 / alpha_2.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizerReport {
    pub settings: AlphaSettings,
    pub fidelity: f64,
    /// Optimum landed on a grid edge (degenerate optimum, e.g. with the
    /// noise-count rate at zero the fidelity is monotone in alpha).
    pub boundary: bool,
    pub evaluations: usize,
}

/// Population-balancing ratio xi = alpha1/alpha2 equating the integrated
/// |10> and |01> branch weights over the window:
/// xi = p2 (1 - e^{-tau_A/T1o2}) / (p1 (1 - e^{-tau_A/T1o1})).
pub fn balance_ratio(cfg: &BellConfig, window: f64) -> f64 {
    let k1 = cfg.ions[0].p_det
        * cfg.p_det_scale[0]
        * (1.0 - (-window / cfg.ions[0].t1_opt).exp());
    let k2 = cfg.ions[1].p_det
        * cfg.p_det_scale[1]
        * (1.0 - (-window / cfg.ions[1].t1_opt).exp());
    k2 / k1
}

/// Fixed sweep grid for alpha_2.
pub fn alpha_grid() -> Vec<f64> {
    (1..=150).map(|i| 0.002 * i as f64).collect()
}

/// Choose (alpha1, alpha2): the ratio from population balance, alpha2 from
/// a coarse-to-fine fidelity sweep with ties broken toward larger alpha.
pub fn optimize_alphas(
    cfg: &BellConfig,
    window: f64,
    grid: Option<&[f64]>,
) -> Result<OptimizerReport> {
    let xi = balance_ratio(cfg, window);
    let default_grid = alpha_grid();
    let grid: &[f64] = grid.unwrap_or(&default_grid);

    let mut evaluations = 0usize;
    let mut evaluate = |alpha2: f64| -> Result<f64> {
        let mut trial_cfg = cfg.clone();
        trial_cfg.accept = window;
        trial_cfg.alphas = [(xi * alpha2).min(1.0), alpha2];
        evaluations += 1;
        Ok(single_photon_bell(&trial_cfg, BellStage::Compensated)?
            .fidelity
            .mean)
    };

    // Coarse pass over every 5th grid point, then refine around the best.
    let coarse: Vec<usize> = (0..grid.len()).step_by(5).collect();
    let mut best_idx = coarse[0];
    let mut best_f = f64::NEG_INFINITY;
    for &i in &coarse {
        let f = evaluate(grid[i])?;
        if f >= best_f {
            best_f = f;
            best_idx = i;
        }
    }
    let lo = best_idx.saturating_sub(5);
    let hi = (best_idx + 5).min(grid.len() - 1);
    for i in lo..=hi {
        if coarse.contains(&i) {
            continue;
        }
        let f = evaluate(grid[i])?;
        if f >= best_f {
            best_f = f;
            best_idx = i;
        }
    }

    let alpha2 = grid[best_idx];
    let boundary = best_idx == 0 || best_idx == grid.len() - 1;
    Ok(OptimizerReport {
        settings: AlphaSettings {
            alpha: vec![(xi * alpha2).min(1.0), alpha2],
            ratio: xi,
        },
        fidelity: best_f,
        boundary,
        evaluations,
    })
}
