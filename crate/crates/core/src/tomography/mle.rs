//! Maximum-likelihood density-matrix reconstruction under the
//! Gaussian-approximated multinomial likelihood with readout correction.
//!
//! Primary optimizer: rho = T^dag T / Tr(T^dag T) with lower-triangular T
//! and gradient ascent with backtracking. Cross-check: a diluted
//! fixed-point iteration on the same objective. Two in-house methods
//! agreeing bounds the solver risk.

use super::counts::{CountTable, PauliAxis, ReadoutMatrix};
use crate::qcore::{c, adjoint, kron, C64, DensityMatrix, Operator};
use crate::{Error, Result};
use ndarray::Array2;

/// Basis-rotation unitary for one qubit: measuring X means rotating by
/// -pi/2 about Y before a Z-basis readout; Y means +pi/2 about X.
fn axis_unitary(axis: PauliAxis) -> Operator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut u: Operator = Array2::zeros((2, 2));
    match axis {
        PauliAxis::X => {
            // exp(+i pi sigma_y / 4)
            u[[0, 0]] = c(s);
            u[[0, 1]] = c(s);
            u[[1, 0]] = c(-s);
            u[[1, 1]] = c(s);
        }
        PauliAxis::Y => {
            // exp(-i pi sigma_x / 4)
            u[[0, 0]] = c(s);
            u[[0, 1]] = C64::new(0.0, -s);
            u[[1, 0]] = C64::new(0.0, -s);
            u[[1, 1]] = c(s);
        }
        PauliAxis::Z => {
            u[[0, 0]] = c(1.0);
            u[[1, 1]] = c(1.0);
        }
    }
    u
}

fn basis_unitary(basis: &[PauliAxis]) -> Operator {
    let mut u: Operator = Array2::from_elem((1, 1), c(1.0));
    for &axis in basis {
        u = kron(&u, &axis_unitary(axis));
    }
    u
}

/// Ideal populations of the rotated state: n_a = <a| U^dag rho U |a>.
fn ideal_populations(rho: &Operator, u: &Operator) -> Vec<f64> {
    let d = rho.nrows();
    let rotated = adjoint(u).dot(rho).dot(u);
    (0..d).map(|a| rotated[[a, a]].re).collect()
}

/// Readout-corrected predicted populations p = R (basis-rotated n).
pub fn predicted_populations(
    rho: &DensityMatrix,
    basis: &[PauliAxis],
    readout: &ReadoutMatrix,
) -> Result<Vec<f64>> {
    let d = rho.dim();
    if readout.dim != d || (1 << basis.len()) != d {
        return Err(Error::DimMismatch(
            "predicted_populations: basis/readout dimensions differ from rho".into(),
        ));
    }
    let u = basis_unitary(basis);
    Ok(readout.apply(&ideal_populations(rho.matrix(), &u)))
}

/// Clamped measured frequency, hedging the vanishing denominators at 0/1.
fn clamped_frequency(count: u64, total: u64) -> f64 {
    let n = total as f64;
    let raw = count as f64 / n;
    raw.clamp(1.0 / (2.0 * n), 1.0 - 1.0 / (2.0 * n))
}

/// Gaussian log-likelihood:
/// sum over bases and outcomes of -(n~ - p)^2 N / (2 n~ (1 - n~)).
pub fn log_likelihood(
    counts: &CountTable,
    readout: &ReadoutMatrix,
    rho: &Operator,
) -> f64 {
    let mut ll = 0.0;
    for rec in &counts.records {
        let total = rec.total();
        if total == 0 {
            continue;
        }
        let u = basis_unitary(&rec.basis);
        let p = readout.apply(&ideal_populations(rho, &u));
        for (a, &count) in rec.counts.iter().enumerate() {
            let f = clamped_frequency(count, total);
            let diff = f - p[a];
            ll -= diff * diff * (total as f64) / (2.0 * f * (1.0 - f));
        }
    }
    ll
}

/// Gradient dL/drho as a Hermitian matrix.
fn likelihood_gradient(counts: &CountTable, readout: &ReadoutMatrix, rho: &Operator) -> Operator {
    let d = rho.nrows();
    let mut grad: Operator = Array2::zeros((d, d));
    for rec in &counts.records {
        let total = rec.total();
        if total == 0 {
            continue;
        }
        let u = basis_unitary(&rec.basis);
        let p = readout.apply(&ideal_populations(rho, &u));
        // c_b = sum_a w_a R[a][b] with w_a = (n~_a - p_a) N / (n~_a (1-n~_a)).
        let mut coeff = vec![0.0; d];
        for (a, &count) in rec.counts.iter().enumerate() {
            let f = clamped_frequency(count, total);
            let w = (f - p[a]) * (total as f64) / (f * (1.0 - f));
            for (b, slot) in coeff.iter_mut().enumerate() {
                *slot += w * readout.get(a, b);
            }
        }
        // grad += U diag(coeff) U^dag.
        for r in 0..d {
            for s in 0..d {
                let mut v = C64::new(0.0, 0.0);
                for (b, &cb) in coeff.iter().enumerate() {
                    v += u[[r, b]] * c(cb) * u[[s, b]].conj();
                }
                grad[[r, s]] += v;
            }
        }
    }
    grad
}

#[derive(Debug, Clone)]
pub struct TomographyEstimate {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood gap to the independent fixed-point solution, when
    /// the cross-check ran.
    pub cross_check_gap: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    pub max_iter: usize,
    /// Converged when the log-likelihood changes less than this over the
    /// trailing 10 iterations.
    pub tol: f64,
    pub cross_check: bool,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            max_iter: 4000,
            tol: 1e-9,
            cross_check: true,
        }
    }
}

fn rho_from_t(t: &Operator) -> Operator {
    let td = adjoint(t);
    let raw = td.dot(t);
    let tr: f64 = (0..raw.nrows()).map(|i| raw[[i, i]].re).sum();
    raw * c(1.0 / tr.max(1e-300))
}

/// Lower-triangular Cholesky-style seed from a PSD-projected estimate.
fn seed_t(counts: &CountTable, readout: &ReadoutMatrix, init: Option<&Operator>) -> Operator {
    let d = 1usize << counts.qubits;
    let base: Operator = match init {
        Some(m) => m.clone(),
        None => Array2::from_diag_elem(d, c(1.0 / d as f64)),
    };
    let _ = readout;
    // rho + eps I keeps the Cholesky well posed at rank deficiency.
    let eps = 1e-4;
    let mut m = base;
    for i in 0..d {
        m[[i, i]] += c(eps);
    }
    let tr: f64 = (0..d).map(|i| m[[i, i]].re).sum();
    m = m * c(1.0 / tr);
    cholesky_lower(&m).unwrap_or_else(|| Array2::from_diag_elem(d, c((1.0 / d as f64).sqrt())))
}

/// Lower-triangular T with T^dag T = m, via a Cholesky factorization in
/// reversed index order.
fn cholesky_lower(m: &Operator) -> Option<Operator> {
    let d = m.nrows();
    let rev = |k: usize| d - 1 - k;
    let mut rm: Operator = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            rm[[i, j]] = m[[rev(i), rev(j)]];
        }
    }
    // rm = L L^dag with L lower.
    let mut l: Operator = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..=i {
            let mut sum = rm[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]].conj();
            }
            if i == j {
                if sum.re <= 0.0 {
                    return None;
                }
                l[[i, j]] = c(sum.re.sqrt());
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    // Undo the reversal: U = R L R is upper with U U^dag = m, so
    // T = U^dag is the lower factor with T^dag T = m.
    let mut u: Operator = Array2::zeros((d, d));
    for i in 0..d {
        for j in 0..d {
            u[[i, j]] = l[[rev(i), rev(j)]];
        }
    }
    Some(adjoint(&u))
}

/// Maximize the Gaussian log-likelihood over density matrices.
pub fn mle_reconstruct(
    counts: &CountTable,
    readout: &ReadoutMatrix,
    options: &MleOptions,
) -> Result<TomographyEstimate> {
    mle_reconstruct_from(counts, readout, options, None)
}

/// Variant with a warm-start state (bootstrap refits).
pub fn mle_reconstruct_from(
    counts: &CountTable,
    readout: &ReadoutMatrix,
    options: &MleOptions,
    init: Option<&Operator>,
) -> Result<TomographyEstimate> {
    counts.validate_complete()?;
    readout.validate(0.05)?;
    let d = 1usize << counts.qubits;

    let mut t = seed_t(counts, readout, init);
    let mut rho = rho_from_t(&t);
    let mut ll = log_likelihood(counts, readout, &rho);
    let mut step = 1.0 / (counts.records.iter().map(|r| r.total()).sum::<u64>() as f64);
    let mut history = std::collections::VecDeque::with_capacity(11);
    history.push_back(ll);
    let mut converged = false;
    let mut iterations = 0;

    for it in 0..options.max_iter {
        iterations = it + 1;
        let grad_rho = likelihood_gradient(counts, readout, &rho);
        // Wirtinger gradient through rho = T^dag T / tr: dL/dT = 2 T Gt
        // with Gt = (G - Tr(G rho) I) / tr(T^dag T), masked lower-tri.
        let tr_raw: f64 = {
            let td = adjoint(&t);
            let raw = td.dot(&t);
            (0..d).map(|i| raw[[i, i]].re).sum()
        };
        let mut trace_g_rho = 0.0;
        for i in 0..d {
            for j in 0..d {
                trace_g_rho += (grad_rho[[i, j]] * rho[[j, i]]).re;
            }
        }
        let mut gt = grad_rho.clone();
        for i in 0..d {
            gt[[i, i]] -= c(trace_g_rho);
        }
        let gt = gt * c(1.0 / tr_raw);
        let mut grad_t = t.dot(&gt) * c(2.0);
        for i in 0..d {
            for j in (i + 1)..d {
                grad_t[[i, j]] = C64::new(0.0, 0.0);
            }
        }

        let mut improved = false;
        for _ in 0..40 {
            let trial_t = &t + &(&grad_t * c(step));
            let trial_rho = rho_from_t(&trial_t);
            let trial_ll = log_likelihood(counts, readout, &trial_rho);
            if trial_ll > ll {
                t = trial_t;
                rho = trial_rho;
                ll = trial_ll;
                step *= 1.6;
                improved = true;
                break;
            }
            step *= 0.4;
            if step < 1e-18 {
                break;
            }
        }
        history.push_back(ll);
        if history.len() > 11 {
            history.pop_front();
        }
        if history.len() == 11 && (ll - history.front().unwrap()).abs() < options.tol {
            converged = true;
            break;
        }
        if !improved {
            converged = true;
            break;
        }
    }

    let mut cross_check_gap = None;
    if options.cross_check {
        let (fp_rho, fp_ll) = diluted_fixed_point(counts, readout, &rho, 2000);
        cross_check_gap = Some(ll - fp_ll);
        if fp_ll > ll + 1e-7 {
            // The independent route found a better optimum; take it.
            rho = fp_rho;
            ll = fp_ll;
        }
    }

    let rho = crate::qcore::hermitize(&rho);
    Ok(TomographyEstimate {
        rho: DensityMatrix::new(rho).map_err(|e| {
            Error::NonConvergence(format!("MLE produced an invalid state: {e}"))
        })?,
        log_likelihood: ll,
        iterations,
        converged,
        cross_check_gap,
    })
}

/// Independent cross-check: diluted positive fixed-point iteration
/// rho <- N[(I + eps Gt) rho (I + eps Gt)] on the same objective.
pub fn diluted_fixed_point(
    counts: &CountTable,
    readout: &ReadoutMatrix,
    start: &Operator,
    max_iter: usize,
) -> (Operator, f64) {
    let d = start.nrows();
    let mut rho = start.clone();
    let mut ll = log_likelihood(counts, readout, &rho);
    let mut eps = 1e-6;
    for _ in 0..max_iter {
        let grad = likelihood_gradient(counts, readout, &rho);
        let mut trace_g_rho = 0.0;
        for i in 0..d {
            for j in 0..d {
                trace_g_rho += (grad[[i, j]] * rho[[j, i]]).re;
            }
        }
        let mut gt = grad.clone();
        for i in 0..d {
            gt[[i, i]] -= c(trace_g_rho);
        }
        let eye: Operator = Array2::from_diag_elem(d, c(1.0));
        let mut improved = false;
        for _ in 0..30 {
            let m = &eye + &(&gt * c(eps));
            let trial = m.dot(&rho).dot(&adjoint(&m));
            let tr: f64 = (0..d).map(|i| trial[[i, i]].re).sum();
            let trial = trial * c(1.0 / tr.max(1e-300));
            let trial_ll = log_likelihood(counts, readout, &trial);
            if trial_ll > ll {
                rho = trial;
                ll = trial_ll;
                eps *= 1.5;
                improved = true;
                break;
            }
            eps *= 0.4;
            if eps < 1e-18 {
                break;
            }
        }
        if !improved {
            break;
        }
    }
    (rho, ll)
}
