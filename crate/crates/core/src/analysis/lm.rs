//! Small dense Levenberg-Marquardt solver with analytic Jacobians.
//!
//! Reproducibility matters more than generality here: fixed damping
//! schedule, no heuristics beyond the standard gain-ratio update.

use crate::{Error, Result};

/// Residual model: r(p) with analytic Jacobian dr_i/dp_j.
pub trait LmProblem {
    fn residuals(&self, params: &[f64]) -> Vec<f64>;
    /// Row-major Jacobian, len = residuals.len() * params.len().
    fn jacobian(&self, params: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn cost_of(res: &[f64]) -> f64 {
    0.5 * res.iter().map(|r| r * r).sum::<f64>()
}

/// Minimize 0.5 * |r(p)|^2 starting from `initial`.
pub fn levenberg_marquardt<P: LmProblem>(
    problem: &P,
    initial: &[f64],
    max_iter: usize,
) -> Result<LmOutcome> {
    let n = initial.len();
    let mut params = initial.to_vec();
    let mut res = problem.residuals(&params);
    let m = res.len();
    if m < n {
        return Err(Error::InvalidArgument(format!(
            "underdetermined fit: {m} residuals for {n} parameters"
        )));
    }
    let mut cost = cost_of(&res);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let jac = problem.jacobian(&params);
        // Normal equations (J^T J + lambda diag(J^T J)) dp = -J^T r.
        let mut jtj = vec![0.0; n * n];
        let mut jtr = vec![0.0; n];
        for i in 0..m {
            for a in 0..n {
                let jia = jac[i * n + a];
                jtr[a] += jia * res[i];
                for b in a..n {
                    jtj[a * n + b] += jia * jac[i * n + b];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                jtj[a * n + b] = jtj[b * n + a];
            }
        }

        let mut step_taken = false;
        for _ in 0..25 {
            let mut aug = jtj.clone();
            for a in 0..n {
                let d = jtj[a * n + a].max(1e-12);
                aug[a * n + a] += lambda * d;
            }
            let rhs: Vec<f64> = jtr.iter().map(|v| -v).collect();
            let Some(dp) = solve_sym(&aug, &rhs, n) else {
                lambda *= 10.0;
                continue;
            };
            let trial: Vec<f64> = params.iter().zip(&dp).map(|(p, d)| p + d).collect();
            let trial_res = problem.residuals(&trial);
            let trial_cost = cost_of(&trial_res);
            if trial_cost < cost {
                let rel = (cost - trial_cost) / cost.max(1e-300);
                let step_norm: f64 = dp.iter().map(|d| d * d).sum::<f64>().sqrt();
                params = trial;
                res = trial_res;
                cost = trial_cost;
                lambda = (lambda * 0.3).max(1e-12);
                step_taken = true;
                if rel < 1e-12 || step_norm < 1e-14 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !step_taken {
            converged = true; // no descent direction left at any damping
            break;
        }
        if converged {
            break;
        }
    }

    Ok(LmOutcome {
        params,
        cost,
        iterations,
        converged,
    })
}

/// Gaussian elimination for the small symmetric positive system.
fn solve_sym(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    for k in 0..n {
        let mut piv = k;
        let mut best = m[k * n + k].abs();
        for i in (k + 1)..n {
            if m[i * n + k].abs() > best {
                best = m[i * n + k].abs();
                piv = i;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != k {
            for j in 0..n {
                m.swap(k * n + j, piv * n + j);
            }
            x.swap(k, piv);
        }
        let d = m[k * n + k];
        for i in (k + 1)..n {
            let f = m[i * n + k] / d;
            for j in k..n {
                m[i * n + j] -= f * m[k * n + j];
            }
            x[i] -= f * x[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in (k + 1)..n {
            s -= m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    Some(x)
}
