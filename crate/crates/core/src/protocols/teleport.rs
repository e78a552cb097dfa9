//! Probabilistic state teleportation from the second ion to the first,
//! built on the two-photon heralding scheme: herald, rephase, compensate,
//! measure the sender in X and apply the conditional Pauli-Z.

use super::support::{qubit_block, weak_preparation};
use super::two_photon::{two_photon_timeline, TwoPhotonConfig};
use crate::dynamics::{herald_ensemble, GateOp, HeraldParams, IonGate, PhaseExpr, Segment};
use crate::qcore::{c, C64, DensityMatrix, Operator, PureState};
use crate::Result;
use ndarray::Array2;
use std::f64::consts::PI;

/// Target Bloch angles plus the shared two-photon machinery settings.
#[derive(Debug, Clone)]
pub struct TeleportConfig {
    pub base: TwoPhotonConfig,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone)]
pub struct TeleportOutcome {
    /// Received single-qubit state on the first ion (normalized).
    pub state: DensityMatrix,
    pub fidelity: f64,
    pub success_probability: f64,
}

/// Prepare |psi_T> = cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> on the
/// sender (ion index 1) and (|0>+|1>)/sqrt(2) on the receiver (ion 0).
fn teleport_prep(cfg: &TeleportConfig) -> Vec<Segment> {
    let toggles = &cfg.base.noise.toggles;
    let mut prep = weak_preparation(&[0.5], &cfg.base.laser, toggles, false);
    // Sender rotation: Y(theta) then Z(phi).
    prep.push(Segment::Unitary {
        gates: vec![IonGate {
            ion: 1,
            op: GateOp::QubitRotation {
                axis_phase: 0.5 * PI,
                angle: cfg.theta,
            },
        }],
        nominal_duration: if toggles.qubit_gate_error {
            cfg.theta.abs() / cfg.base.laser.rabi_qubit
        } else {
            0.0
        },
    });
    prep.push(Segment::Unitary {
        gates: vec![IonGate {
            ion: 1,
            op: GateOp::ZPhase {
                angle: PhaseExpr::Const(-cfg.phi),
            },
        }],
        nominal_duration: 0.0,
    });
    prep
}

/// Run the teleportation protocol and reconstruct the received state.
pub fn teleport(cfg: &TeleportConfig) -> Result<TeleportOutcome> {
    cfg.base.validate()?;
    let engine = super::support::engine_config_scaled(
        &cfg.base.ions,
        &cfg.base.noise,
        &cfg.base.p_det_scale,
    );
    // The receiver (ion 0) takes the compensation Z.
    let timeline = two_photon_timeline(&cfg.base, teleport_prep(cfg), 0, 1.0);
    let params = HeraldParams {
        dt: cfg.base.dt,
        accept: cfg.base.accept,
        trials: cfg.base.trials,
        seed: cfg.base.seed,
        se_tolerance: None,
    };
    let ensemble = herald_ensemble(&engine, &timeline, &params, |_| Vec::new())?;

    let dims = engine.dims();
    let accepted = ensemble.accepted_state();
    let success = crate::qcore::trace(&accepted).re;
    let two_qubit = qubit_block(&accepted, &dims);

    // Sender X-basis readout with the conditional Pauli-Z on the receiver.
    let rho1 = readout_and_correct(&two_qubit);
    let tr = crate::qcore::trace(&rho1).re;
    let rho1 = &rho1 * c(1.0 / tr.max(1e-300));
    let target = PureState::new(vec![
        c((0.5 * cfg.theta).cos()),
        C64::from_polar((0.5 * cfg.theta).sin(), cfg.phi),
    ])?;
    let state = DensityMatrix::from_parts_unchecked(crate::qcore::hermitize(&rho1), true);
    let fidelity = crate::qcore::state_fidelity(&state, &target)?;
    Ok(TeleportOutcome {
        state,
        fidelity,
        success_probability: success,
    })
}

/// Project the sender (second qubit) onto |+X>/|-X>, apply Z on the
/// receiver for the |-X> outcome, and trace the sender out.
fn readout_and_correct(two_qubit: &Operator) -> Operator {
    let mut rho1: Operator = Array2::zeros((2, 2));
    for (sign, correct) in [(1.0f64, false), (-1.0f64, true)] {
        // <x_s| rho |x_s> on the sender index: rho1[a,b] =
        // sum_{s,s'} x_s* x_s' rho[(a s),(b s')] / 2 with x = (1, sign).
        let amp = [c(1.0 / 2f64.sqrt()), c(sign / 2f64.sqrt())];
        let mut proj: Operator = Array2::zeros((2, 2));
        for a in 0..2 {
            for b in 0..2 {
                let mut v = C64::new(0.0, 0.0);
                for s in 0..2 {
                    for s2 in 0..2 {
                        v += amp[s].conj() * two_qubit[[a * 2 + s, b * 2 + s2]] * amp[s2];
                    }
                }
                proj[[a, b]] = v;
            }
        }
        if correct {
            // Pauli-Z on the receiver.
            proj[[0, 1]] = -proj[[0, 1]];
            proj[[1, 0]] = -proj[[1, 0]];
        }
        rho1 = rho1 + proj;
    }
    rho1
}

/// Teleport the six cardinal Bloch states; returns (label, outcome) pairs.
pub fn teleport_cardinal_states(base: &TwoPhotonConfig) -> Result<Vec<(String, TeleportOutcome)>> {
    let cardinals: [(&str, f64, f64); 6] = [
        ("+X", 0.5 * PI, 0.0),
        ("-X", 0.5 * PI, PI),
        ("+Y", 0.5 * PI, 0.5 * PI),
        ("-Y", 0.5 * PI, 1.5 * PI),
        ("0", 0.0, 0.0),
        ("1", PI, 0.0),
    ];
    let mut out = Vec::new();
    for (i, (label, theta, phi)) in cardinals.into_iter().enumerate() {
        let mut cfg = TeleportConfig {
            base: base.clone(),
            theta,
            phi,
        };
        cfg.base.seed = base.seed.wrapping_add(i as u64);
        out.push((label.to_string(), teleport(&cfg)?));
    }
    Ok(out)
}
