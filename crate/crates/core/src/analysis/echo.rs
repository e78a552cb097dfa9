//! Delayed-echo spectral-diffusion model and the correlation-time fit.

use super::lm::{levenberg_marquardt, LmProblem};
use crate::{Error, Result};

/// C(tau, T_W) = exp(-tau/T1o) exp(-T_W/T2s)
///             * exp(-(2 tau^2/T2o*^2) (1 - exp(-T_W/tau_c))).
pub fn delayed_echo_model(
    wait: f64,
    tau: f64,
    t1_opt: f64,
    t2_spin: f64,
    t2_opt_star: f64,
    tau_c: f64,
) -> f64 {
    let b = 2.0 * tau * tau / (t2_opt_star * t2_opt_star);
    (-tau / t1_opt).exp()
        * (-wait / t2_spin).exp()
        * (-b * (1.0 - (-wait / tau_c).exp())).exp()
}

/// T2,o* implied by a fitted decay amplitude b at probe delay tau:
/// b = 2 tau^2 / T2,o*^2  =>  T2,o* = tau sqrt(2/b).
pub fn t2o_star_from_b(tau: f64, b: f64) -> f64 {
    tau * (2.0 / b).sqrt()
}

/// Fit of log(C) = a - b (1 - exp(-T_W/tau_c)) - T_W/T2s with fixed T2s.
#[derive(Debug, Clone)]
pub struct EchoFit {
    pub a: f64,
    pub b: f64,
    pub tau_c: f64,
    /// Residual standard deviation of log(C).
    pub residual_std: f64,
}

struct EchoProblem<'d> {
    wait: &'d [f64],
    log_c: &'d [f64],
    t2_spin: f64,
}

impl LmProblem for EchoProblem<'_> {
    fn residuals(&self, p: &[f64]) -> Vec<f64> {
        let (a, b, tau_c) = (p[0], p[1], p[2].abs().max(1e-9));
        self.wait
            .iter()
            .zip(self.log_c)
            .map(|(&w, &y)| a - b * (1.0 - (-w / tau_c).exp()) - w / self.t2_spin - y)
            .collect()
    }

    fn jacobian(&self, p: &[f64]) -> Vec<f64> {
        let (_, b, tau_c) = (p[0], p[1], p[2].abs().max(1e-9));
        let mut jac = Vec::with_capacity(self.wait.len() * 3);
        for &w in self.wait {
            let e = (-w / tau_c).exp();
            jac.push(1.0);
            jac.push(-(1.0 - e));
            jac.push(-b * e * w / (tau_c * tau_c));
        }
        jac
    }
}

/// Nonlinear least squares over (a, b, tau_c); the initial tau_c guess is
/// taken from the half-decay point of the diffusion contribution.
pub fn fit_correlation_time(wait: &[f64], coherence: &[f64], t2_spin: f64) -> Result<EchoFit> {
    if wait.len() != coherence.len() || wait.len() < 4 {
        return Err(Error::InvalidArgument(
            "fit needs matching wait/coherence arrays with at least 4 points".into(),
        ));
    }
    if coherence.iter().any(|&c| c <= 0.0) {
        return Err(Error::InvalidArgument("coherence values must be positive".into()));
    }
    let log_c: Vec<f64> = coherence.iter().map(|c| c.ln()).collect();

    // Spin-corrected log-coherence decays from a to a-b; seed tau_c where
    // it has fallen halfway.
    let corrected: Vec<f64> = wait
        .iter()
        .zip(&log_c)
        .map(|(&w, &y)| y + w / t2_spin)
        .collect();
    let a0 = corrected.first().copied().unwrap();
    let floor = corrected.last().copied().unwrap();
    let b0 = (a0 - floor).max(1e-3);
    let half = a0 - 0.5 * b0;
    let tau0 = wait
        .iter()
        .zip(&corrected)
        .find(|(_, &y)| y < half)
        .map(|(&w, _)| w / std::f64::consts::LN_2)
        .unwrap_or(wait[wait.len() / 2]);

    let problem = EchoProblem {
        wait,
        log_c: &log_c,
        t2_spin,
    };
    let out = levenberg_marquardt(&problem, &[a0, b0, tau0], 200)?;
    if !out.converged {
        return Err(Error::NonConvergence("delayed-echo fit".into()));
    }
    let res = problem.residuals(&out.params);
    let dof = (res.len() as f64 - 3.0).max(1.0);
    Ok(EchoFit {
        a: out.params[0],
        b: out.params[1],
        tau_c: out.params[2].abs(),
        residual_std: (res.iter().map(|r| r * r).sum::<f64>() / dof).sqrt(),
    })
}
