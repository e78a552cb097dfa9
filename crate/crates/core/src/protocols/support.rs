//! Shared machinery for the protocol builders: engine-config assembly from
//! measured parameters, qubit-subspace observables and timeline snippets.

use crate::dynamics::{
    DetectionMode, EngineConfig, EngineIon, GateOp, IonDrive, IonGate, Segment, SegmentClass,
    TimeExpr,
};
use crate::node::{ErrorToggles, IonParameters, LaserSettings, NoiseEnvironment};
use crate::qcore::{c, C64, Level, Operator};
use ndarray::Array2;
use std::f64::consts::PI;

/// Default per-ion level scheme: |aux> is analytic elsewhere, |1e> is
/// needed for the E decay and f_e pulses.
pub fn default_levels() -> Vec<Level> {
    vec![Level::Zero, Level::One, Level::E, Level::OneE]
}

/// Assemble the engine ion list, applying the error toggles that act on
/// parameters (initialization, lifetime mismatch, spin channels).
pub fn engine_ions(
    ions: &[IonParameters],
    noise: &NoiseEnvironment,
    p_det_scale: &[f64],
) -> Vec<EngineIon> {
    let toggles = &noise.toggles;
    let mean_t1 = ions.iter().map(|i| i.t1_opt).sum::<f64>() / ions.len() as f64;
    ions.iter()
        .enumerate()
        .map(|(idx, ion)| {
            let t1_opt = if toggles.lifetime_mismatch {
                ion.t1_opt
            } else {
                mean_t1
            };
            EngineIon {
                levels: default_levels(),
                t1_opt,
                p_det: ion.p_det * p_det_scale.get(idx).copied().unwrap_or(1.0),
                gamma_star: ion.gamma_star,
                sigma_q: std::f64::consts::SQRT_2 / noise.t2_spin_star,
                optical_offset: ion.optical_offset,
                qubit_offset: ion.qubit_offset,
                t1_spin: ion.t1_spin,
                gamma_spin_deph: ion.spin_dephasing_rate(),
                init_error: if toggles.init_error {
                    1.0 - ion.init_fidelity
                } else {
                    0.0
                },
                optical_dephasing: 0.0,
            }
        })
        .collect()
}

/// Engine configuration for a set of participating ions.
pub fn engine_config(ions: &[IonParameters], noise: &NoiseEnvironment) -> EngineConfig {
    engine_config_scaled(ions, noise, &vec![1.0; ions.len()])
}

pub fn engine_config_scaled(
    ions: &[IonParameters],
    noise: &NoiseEnvironment,
    p_det_scale: &[f64],
) -> EngineConfig {
    let toggles = &noise.toggles;
    let noise_rate = if toggles.noise_counts {
        ions.iter().map(|i| i.noise_rate).sum::<f64>() + noise.dark_rate
    } else {
        0.0
    };
    EngineConfig {
        ions: engine_ions(ions, noise, p_det_scale),
        spin_noise: toggles.qubit_t1t2,
        rephasing_optical_decay: toggles.undetected_rephasing_emission,
        noise_rate,
        sigma_phi: if toggles.path_phase { noise.sigma_phi } else { 0.0 },
        path_phase_stabilized: noise.path_phase_stabilized,
    }
}

/// Weak Y rotation preparing |1> population alpha.
///
/// In drive mode (co-located ions under a shared microwave frequency) each
/// ion gets a finite square pulse whose detuning error is physical; pulses
/// run sequentially because the areas differ.
pub fn weak_preparation(
    alphas: &[f64],
    laser: &LaserSettings,
    toggles: &ErrorToggles,
    drive_mode: bool,
) -> Vec<Segment> {
    if drive_mode && toggles.qubit_gate_error {
        return alphas
            .iter()
            .enumerate()
            .map(|(ion, &a)| Segment::Drive {
                drives: vec![IonDrive {
                    ion,
                    rabi: laser.rabi_qubit,
                    axis_phase: 0.5 * PI,
                    optical: false,
                    extra_detuning: 0.0,
                }],
                duration: 2.0 * a.sqrt().asin() / laser.rabi_qubit,
            })
            .collect();
    }
    let gates: Vec<IonGate> = alphas
        .iter()
        .enumerate()
        .map(|(ion, &a)| IonGate {
            ion,
            op: GateOp::QubitRotation {
                axis_phase: 0.5 * PI,
                angle: 2.0 * a.sqrt().asin(),
            },
        })
        .collect();
    let max_angle = alphas
        .iter()
        .map(|&a| 2.0 * a.sqrt().asin())
        .fold(0.0f64, f64::max);
    vec![Segment::Unitary {
        gates,
        nominal_duration: if toggles.qubit_gate_error {
            max_angle / laser.rabi_qubit
        } else {
            0.0
        },
    }]
}

/// Optical pi pulse on the listed ions: finite detuned drive when optical
/// gate errors are on, ideal instantaneous swap otherwise.
pub fn optical_pi(ions: &[usize], rabi: f64, toggles: &ErrorToggles) -> Segment {
    if toggles.optical_gate_error {
        Segment::Drive {
            drives: ions
                .iter()
                .map(|&ion| IonDrive {
                    ion,
                    rabi,
                    axis_phase: 0.0,
                    optical: true,
                    extra_detuning: 0.0,
                })
                .collect(),
            duration: PI / rabi,
        }
    } else {
        Segment::Unitary {
            gates: ions
                .iter()
                .map(|&ion| IonGate {
                    ion,
                    op: GateOp::OpticalPi,
                })
                .collect(),
            nominal_duration: 0.0,
        }
    }
}

/// Global qubit pi pulse with synchronized excited-state pi pulses, so
/// excited population decays to the matching ground state.
///
/// Drive mode turns the qubit rotation into a finite square pulse (the
/// per-ion detuning relative to the shared drive is carried by the ion's
/// qubit offset); the f_e pulse stays instantaneous.
pub fn qubit_pi_with_fe(
    ions: &[usize],
    axis_phase: f64,
    laser: &LaserSettings,
    toggles: &ErrorToggles,
    drive_mode: bool,
) -> Vec<Segment> {
    if drive_mode && toggles.qubit_gate_error {
        let mut segments = vec![Segment::Drive {
            drives: ions
                .iter()
                .map(|&ion| IonDrive {
                    ion,
                    rabi: laser.rabi_qubit,
                    axis_phase,
                    optical: false,
                    extra_detuning: 0.0,
                })
                .collect(),
            duration: PI / laser.rabi_qubit,
        }];
        segments.push(Segment::Unitary {
            gates: ions
                .iter()
                .map(|&ion| IonGate {
                    ion,
                    op: GateOp::FePi,
                })
                .collect(),
            nominal_duration: 0.0,
        });
        return segments;
    }
    let mut gates = Vec::new();
    for &ion in ions {
        gates.push(IonGate {
            ion,
            op: GateOp::QubitRotation {
                axis_phase,
                angle: PI,
            },
        });
        gates.push(IonGate {
            ion,
            op: GateOp::FePi,
        });
    }
    vec![Segment::Unitary {
        gates,
        nominal_duration: if toggles.qubit_gate_error {
            PI / laser.rabi_qubit
        } else {
            0.0
        },
    }]
}

/// Dynamical decoupling block: `periods` repetitions of
/// (tau_s, pi pulse, tau_s), giving inter-pulse spacing 2 tau_s. Pulse
/// axes alternate X/Y.
pub fn dd_block(
    ions: &[usize],
    periods: usize,
    tau_s: f64,
    laser: &LaserSettings,
    toggles: &ErrorToggles,
    drive_mode: bool,
) -> Vec<Segment> {
    let mut segments = Vec::new();
    for p in 0..periods {
        segments.push(Segment::Wait {
            duration: TimeExpr::Const(tau_s),
            class: SegmentClass::Generic,
        });
        let axis = if p % 2 == 0 { 0.0 } else { 0.5 * PI };
        segments.extend(qubit_pi_with_fe(ions, axis, laser, toggles, drive_mode));
        segments.push(Segment::Wait {
            duration: TimeExpr::Const(tau_s),
            class: SegmentClass::Generic,
        });
    }
    segments
}

/// Single-mode detection: reference arm `ions[0]`, other arms carry the
/// drive-frequency slope relative to it plus the path phase when they sit
/// in the other device.
pub fn single_mode_detection(
    ions_with_slope: &[(usize, f64, bool)],
) -> Vec<DetectionMode> {
    vec![DetectionMode {
        arms: ions_with_slope
            .iter()
            .map(|&(ion, slope, path)| crate::dynamics::ArmSpec {
                ion,
                weight: 1.0,
                drive_offset_slope: slope,
                path_phase: path,
                static_phase: 0.0,
            })
            .collect(),
        weight: 1.0,
        z_correction: None,
    }]
}

/// Project onto the two-level qubit subspace of every ion, mapping full
/// basis indices whose digits are all in {0,1} onto qubit bitstrings.
pub fn qubit_block(rho: &Operator, dims: &[usize]) -> Operator {
    let n = dims.len();
    let q = 1usize << n;
    let total: usize = dims.iter().product();

    let mut map: Vec<Option<usize>> = vec![None; total];
    for flat in 0..total {
        let mut acc = flat;
        let mut digits = Vec::with_capacity(n);
        for &d in dims.iter().rev() {
            digits.push(acc % d);
            acc /= d;
        }
        digits.reverse();
        let mut qidx = 0usize;
        let mut ok = true;
        for &digit in &digits {
            if digit > 1 {
                ok = false;
                break;
            }
            qidx = (qidx << 1) | digit;
        }
        if ok {
            map[flat] = Some(qidx);
        }
    }

    let mut out: Operator = Array2::zeros((q, q));
    for r in 0..total {
        let Some(qr) = map[r] else { continue };
        for col in 0..total {
            let Some(qc) = map[col] else { continue };
            out[[qr, qc]] = rho[[r, col]];
        }
    }
    out
}

/// n-qubit Pauli string as a 2^n operator; `axes` entries are 'X','Y','Z'
/// or 'I'.
pub fn pauli_string(axes: &[char]) -> Operator {
    let mut out: Operator = Array2::from_elem((1, 1), c(1.0));
    for &ax in axes {
        let single = match ax {
            'X' => pauli_x(),
            'Y' => pauli_y(),
            'Z' => pauli_z(),
            _ => Array2::from_diag_elem(2, c(1.0)),
        };
        out = crate::qcore::kron(&out, &single);
    }
    out
}

pub fn pauli_x() -> Operator {
    let mut m = Array2::zeros((2, 2));
    m[[0, 1]] = c(1.0);
    m[[1, 0]] = c(1.0);
    m
}

pub fn pauli_y() -> Operator {
    let mut m = Array2::zeros((2, 2));
    m[[0, 1]] = C64::new(0.0, -1.0);
    m[[1, 0]] = C64::new(0.0, 1.0);
    m
}

pub fn pauli_z() -> Operator {
    let mut m = Array2::zeros((2, 2));
    m[[0, 0]] = c(1.0);
    m[[1, 1]] = c(-1.0);
    m
}

/// Tr(rho_q P)/Tr(rho_q) for a Pauli string on the qubit block.
pub fn qubit_parity(rho: &Operator, dims: &[usize], axes: &[char]) -> f64 {
    let block = qubit_block(rho, dims);
    let tr: f64 = (0..block.nrows()).map(|i| block[[i, i]].re).sum();
    if tr <= 0.0 {
        return 0.0;
    }
    let p = pauli_string(axes);
    let mut val = C64::new(0.0, 0.0);
    for i in 0..block.nrows() {
        for j in 0..block.ncols() {
            val += block[[i, j]] * p[[j, i]];
        }
    }
    val.re / tr
}

/// <target| rho_q |target> / Tr(rho_q): post-selected fidelity on the
/// qubit manifold.
pub fn qubit_fidelity(rho: &Operator, dims: &[usize], target: &[C64]) -> f64 {
    let block = qubit_block(rho, dims);
    let tr: f64 = (0..block.nrows()).map(|i| block[[i, i]].re).sum();
    if tr <= 0.0 {
        return 0.0;
    }
    let mut val = C64::new(0.0, 0.0);
    for i in 0..target.len() {
        for j in 0..target.len() {
            val += target[i].conj() * block[[i, j]] * target[j];
        }
    }
    (val.re / tr).clamp(0.0, 1.0)
}

/// |psi+> = (|01> + |10>)/sqrt(2) amplitudes on two qubits.
pub fn psi_plus() -> Vec<C64> {
    let s = c(1.0 / 2f64.sqrt());
    vec![c(0.0), s, s, c(0.0)]
}

/// |W> = (|100> + |010> + |001>)/sqrt(3) amplitudes on three qubits.
pub fn w_state() -> Vec<C64> {
    let s = c(1.0 / 3f64.sqrt());
    vec![c(0.0), s, s, c(0.0), s, c(0.0), c(0.0), c(0.0)]
}
