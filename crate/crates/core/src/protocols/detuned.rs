//! Qubit population after detuned square-pulse sequences: the mechanism
//! behind the multiplexed-rate inflation under shared microwave drives.

use crate::qcore::{c, expm, C64, Operator};
use ndarray::Array2;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetunedSequence {
    /// A single weak pulse of area 2 asin(sqrt(alpha)).
    WeakPulse,
    /// The weak pulse followed by two dynamical decoupling periods
    /// (tau_s, pi, tau_s) with X/Y pulse phases.
    WeakPulseTwoDd,
}

fn pulse(rabi: f64, detuning: f64, axis_phase: f64, duration: f64) -> Operator {
    let mut h: Operator = Array2::zeros((2, 2));
    h[[1, 1]] = c(detuning);
    let e = C64::from_polar(0.5 * rabi, axis_phase);
    h[[1, 0]] = e;
    h[[0, 1]] = e.conj();
    expm(&(&h * C64::new(0.0, -duration)))
}

fn free(detuning: f64, duration: f64) -> Operator {
    let mut u: Operator = Array2::zeros((2, 2));
    u[[0, 0]] = c(1.0);
    u[[1, 1]] = C64::from_polar(1.0, -detuning * duration);
    u
}

/// P(|1>) after the sequence, starting from |0>.
///
/// `detuning` is the microwave drive offset from the qubit transition
/// (rad/us), `rabi` the square-pulse Rabi frequency (rad/us), `tau_s` half
/// the decoupling inter-pulse spacing (us).
pub fn detuned_qubit_population(
    detuning: f64,
    sequence: DetunedSequence,
    alpha: f64,
    rabi: f64,
    tau_s: f64,
) -> f64 {
    let weak_area = 2.0 * alpha.sqrt().asin();
    let mut psi = [c(1.0), c(0.0)];
    let apply = |u: &Operator, psi: &mut [C64; 2]| {
        let a = u[[0, 0]] * psi[0] + u[[0, 1]] * psi[1];
        let b = u[[1, 0]] * psi[0] + u[[1, 1]] * psi[1];
        *psi = [a, b];
    };

    apply(
        &pulse(rabi, detuning, 0.5 * PI, weak_area / rabi),
        &mut psi,
    );
    if sequence == DetunedSequence::WeakPulseTwoDd {
        for (i, axis) in [0.0, 0.5 * PI].into_iter().enumerate() {
            let _ = i;
            apply(&free(detuning, tau_s), &mut psi);
            apply(&pulse(rabi, detuning, axis, PI / rabi), &mut psi);
            apply(&free(detuning, tau_s), &mut psi);
        }
    }
    psi[1].norm_sqr()
}
