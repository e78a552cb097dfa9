//! Tripartite W-state heralding on three distinguishable ions, with the
//! AC-Stark and drive-phase compensation of the two residual stochastic
//! phases.

use super::result::{FidelityPoint, ProtocolResult, StageCurve};
use super::support::{
    dd_block, engine_config_scaled, optical_pi, qubit_fidelity, qubit_parity, qubit_pi_with_fe,
    w_state, weak_preparation,
};
use crate::dynamics::{
    herald_ensemble, ArmSpec, DetectionMode, GateOp, HeraldParams, IonGate, PhaseExpr,
    ProtocolTimeline, ScalarStat, Segment, SegmentClass, TailCase, TailCondition, TimeExpr,
    WindowSpec,
};
use crate::node::{paper_parameter_fixture, IonParameters, LaserSettings, NoiseEnvironment};
use crate::units::{hz, mhz_ang, ns_to_us};
use crate::{Error, Result};
use std::f64::consts::PI;

/// Three-ion W-state experiment configuration. Ion order: (1, 2, 3) with
/// ions 1 and 3 co-located in the first device.
#[derive(Debug, Clone)]
pub struct WStateConfig {
    pub ions: [IonParameters; 3],
    pub laser: LaserSettings,
    pub noise: NoiseEnvironment,
    pub alphas: [f64; 3],
    pub p_det_scale: [f64; 3],
    /// AC-Stark tone detunings from ions 1 and 3 (rad/us).
    pub ac_detuning_ion1: f64,
    pub ac_detuning_ion3: f64,
    pub tau_h: f64,
    pub tau_s: f64,
    pub dt: f64,
    pub accept: f64,
    pub trials: usize,
    pub seed: u64,
    pub rep_rate: f64,
    /// Finite detuned microwave pulses for the co-located ions.
    pub qubit_drive_mode: bool,
}

impl WStateConfig {
    pub fn paper_default() -> Result<Self> {
        let mut ion1 = paper_parameter_fixture("ion1")?;
        let ion2 = paper_parameter_fixture("ion2")?;
        let mut ion3 = paper_parameter_fixture("ion3")?;
        // Global microwave drive sits between the co-located qubits.
        ion1.qubit_offset = mhz_ang(0.565);
        ion3.qubit_offset = -mhz_ang(0.565);
        Ok(Self {
            ions: [ion1, ion2, ion3],
            laser: LaserSettings::paper_defaults(vec![0.0, mhz_ang(34.0), -mhz_ang(475.0)]),
            noise: NoiseEnvironment {
                dark_rate: hz(6.3),
                ..NoiseEnvironment::default()
            },
            alphas: [0.079, 0.078, 0.079],
            p_det_scale: [1.0, 1.0, 1.0],
            ac_detuning_ion1: -mhz_ang(50.0),
            ac_detuning_ion3: mhz_ang(425.0),
            tau_h: 2.9,
            tau_s: 2.9,
            dt: ns_to_us(10.0),
            accept: ns_to_us(300.0),
            trials: 300,
            seed: 20240903,
            rep_rate: hz(12.3e3),
            qubit_drive_mode: true,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.accept > self.tau_h + 1e-12 {
            return Err(Error::InvalidArgument(
                "acceptance window exceeds the heralding window".into(),
            ));
        }
        if self.ac_detuning_ion1 == self.ac_detuning_ion3 {
            return Err(Error::InvalidArgument(
                "AC-Stark detunings must differ between the co-located ions".into(),
            ));
        }
        self.noise.validate()
    }
}

/// Two-detector (polarizing beamsplitter) detection with the conditional Z
/// correction on the remote ion for the minus port.
fn two_detector_modes(drive12: f64, drive13: f64) -> Vec<DetectionMode> {
    let arms_plus = vec![
        ArmSpec {
            ion: 0,
            weight: 1.0,
            drive_offset_slope: 0.0,
            path_phase: false,
            static_phase: 0.0,
        },
        ArmSpec {
            ion: 1,
            weight: 1.0,
            drive_offset_slope: drive12,
            path_phase: true,
            static_phase: 0.0,
        },
        ArmSpec {
            ion: 2,
            weight: 1.0,
            drive_offset_slope: drive13,
            path_phase: false,
            static_phase: 0.0,
        },
    ];
    let mut arms_minus = arms_plus.clone();
    arms_minus[1].static_phase = PI;
    vec![
        DetectionMode {
            arms: arms_plus,
            weight: 0.5,
            z_correction: None,
        },
        DetectionMode {
            arms: arms_minus,
            weight: 0.5,
            z_correction: Some((1, PI)),
        },
    ]
}

pub fn wstate_timeline(cfg: &WStateConfig, compensated: bool) -> ProtocolTimeline {
    let toggles = &cfg.noise.toggles;
    let ions = [0usize, 1, 2];
    let d12 = cfg.laser.drive_diff(0, 1);
    let d13 = cfg.laser.drive_diff(0, 2);
    let drive_mode = cfg.qubit_drive_mode;

    let mut segments = weak_preparation(&cfg.alphas, &cfg.laser, toggles, drive_mode);
    segments.push(optical_pi(&ions, cfg.laser.rabi_herald, toggles));
    segments.push(Segment::Window { index: 0 });

    let mut tail: Vec<Segment> = Vec::new();
    if compensated {
        tail.extend(dd_block(&ions, 2, cfg.tau_s, &cfg.laser, toggles, drive_mode));
        tail.extend(qubit_pi_with_fe(&ions, 0.0, &cfg.laser, toggles, drive_mode));
        tail.push(Segment::Wait {
            duration: TimeExpr::Linear {
                base: cfg.tau_h,
                t0_coeff: -1.0,
                t1_coeff: 0.0,
            },
            class: SegmentClass::Generic,
        });
        tail.push(optical_pi(&ions, cfg.laser.rabi_rephase, toggles));
        tail.push(Segment::Wait {
            duration: TimeExpr::Linear {
                base: 0.0,
                t0_coeff: 1.0,
                t1_coeff: 0.0,
            },
            class: SegmentClass::RephasingWait,
        });
        tail.push(optical_pi(&ions, cfg.laser.rabi_rephase, toggles));
        tail.extend(dd_block(&ions, 3, cfg.tau_s, &cfg.laser, toggles, drive_mode));

        // Differential AC-Stark rotation fixes the 1<->3 phase; the shared
        // tone also rotates ion 1 relative to ion 2 by the detuning ratio.
        let ratio = cfg.ac_detuning_ion3 / (cfg.ac_detuning_ion1 - cfg.ac_detuning_ion3);
        let phi1_coeff = -d13 * ratio;
        let phi3_coeff = phi1_coeff - d13;
        let phi2_coeff = phi1_coeff - d12;
        tail.push(Segment::Unitary {
            gates: vec![
                IonGate {
                    ion: 0,
                    op: GateOp::ZPhase {
                        angle: PhaseExpr::Linear {
                            base: 0.0,
                            t0_coeff: phi1_coeff,
                            t1_coeff: 0.0,
                        },
                    },
                },
                IonGate {
                    ion: 2,
                    op: GateOp::ZPhase {
                        angle: PhaseExpr::Linear {
                            base: 0.0,
                            t0_coeff: phi3_coeff,
                            t1_coeff: 0.0,
                        },
                    },
                },
                IonGate {
                    ion: 1,
                    op: GateOp::ZPhase {
                        angle: PhaseExpr::Linear {
                            base: 0.0,
                            t0_coeff: phi2_coeff,
                            t1_coeff: 0.0,
                        },
                    },
                },
            ],
            nominal_duration: 0.0,
        });
    }

    ProtocolTimeline {
        segments,
        windows: vec![WindowSpec { duration: cfg.tau_h }],
        detection: two_detector_modes(d12, d13),
        tail: vec![TailCase {
            condition: TailCondition::Always,
            segments: tail,
        }],
    }
}

/// Run the W-state protocol at the configured acceptance window.
pub fn w_state_protocol(cfg: &WStateConfig) -> Result<ProtocolResult> {
    cfg.validate()?;
    let engine = engine_config_scaled(&cfg.ions, &cfg.noise, &cfg.p_det_scale);
    let timeline = wstate_timeline(cfg, true);
    let params = HeraldParams {
        dt: cfg.dt,
        accept: cfg.accept,
        trials: cfg.trials,
        seed: cfg.seed,
        se_tolerance: None,
    };

    let dims = engine.dims();
    let d = engine.dim();
    let target = w_state();
    let obs_dims = dims.clone();
    let obs_target = target.clone();
    let observer = move |trial: &crate::dynamics::TrialResult| -> Vec<f64> {
        let mut acc: crate::qcore::Operator = ndarray::Array2::zeros((d, d));
        for b in trial.branches.iter().chain(trial.noise_branches.iter()) {
            acc = acc + b;
        }
        vec![qubit_fidelity(&acc, &obs_dims, &obs_target)]
    };
    let ensemble = herald_ensemble(&engine, &timeline, &params, observer)?;

    let mut curve = StageCurve {
        stage: 3,
        t0: Vec::new(),
        xx: Vec::new(),
        yy: Vec::new(),
        zz: Vec::new(),
        weight: Vec::new(),
    };
    for (i, key) in ensemble.keys.iter().enumerate() {
        let mut branch = ensemble.branches[i].clone();
        if let Some(noise) = ensemble.noise_branches.get(i) {
            branch = branch + noise;
        }
        curve.t0.push(ensemble.bin_center(key.t0_bin));
        curve.xx.push(qubit_parity(&branch, &dims, &['X', 'X', 'I']));
        curve.yy.push(qubit_parity(&branch, &dims, &['Y', 'Y', 'I']));
        curve.zz.push(qubit_parity(&branch, &dims, &['Z', 'Z', 'I']));
        curve.weight.push(crate::qcore::trace(&branch).re);
    }

    let acc = ensemble.accepted_state();
    let success = crate::qcore::trace(&acc).re;
    let fidelity_mean = qubit_fidelity(&acc, &dims, &target);
    let se = ensemble
        .observable_stat(0)
        .map(|s| s.std_err)
        .unwrap_or(0.0);
    let window_table = vec![FidelityPoint {
        window: cfg.accept,
        fidelity: fidelity_mean,
        success_probability: success,
        rate_hz: cfg.rep_rate * success * 1e6,
    }];

    let result = ProtocolResult {
        ensemble,
        stages: vec![curve],
        window_table,
        fidelity: ScalarStat {
            mean: fidelity_mean,
            std_err: se,
        },
        success_probability: success,
        rate_hz: cfg.rep_rate * success * 1e6,
        target: "w_state".into(),
    };
    result.validate()?;
    Ok(result)
}

/// Pre-rephasing two-body coherences: run the heralded stage on a fine
/// grid and locate the spectral peak of each pairwise X-parity oscillation.
///
/// Returns peak frequencies (rad/us) for the (2,3), (1,3) and (1,2) pairs.
pub fn wstate_precompensation_spectrum(
    cfg: &WStateConfig,
    fine_dt: f64,
    span: f64,
) -> Result<[f64; 3]> {
    let mut probe = cfg.clone();
    probe.dt = fine_dt;
    probe.accept = span;
    let engine = engine_config_scaled(&probe.ions, &probe.noise, &probe.p_det_scale);
    let timeline = wstate_timeline(&probe, false);
    let params = HeraldParams {
        dt: probe.dt,
        accept: probe.accept,
        trials: probe.trials,
        seed: probe.seed,
        se_tolerance: None,
    };
    let ensemble = herald_ensemble(&engine, &timeline, &params, |_| Vec::new())?;
    let dims = engine.dims();

    let pairs: [[char; 3]; 3] = [['I', 'X', 'X'], ['X', 'I', 'X'], ['X', 'X', 'I']];
    let mut peaks = [0.0f64; 3];
    for (slot, axes) in pairs.iter().enumerate() {
        let mut t = Vec::new();
        let mut v = Vec::new();
        for (i, key) in ensemble.keys.iter().enumerate() {
            let branch = &ensemble.branches[i];
            t.push(ensemble.bin_center(key.t0_bin));
            v.push(qubit_parity(branch, &dims, axes));
        }
        peaks[slot] = spectral_peak(&t, &v);
    }
    Ok(peaks)
}

/// Coarse-to-fine search of |sum v(t) e^{-i w t}| over w.
fn spectral_peak(t: &[f64], v: &[f64]) -> f64 {
    let power = |w: f64| -> f64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for (&ti, &vi) in t.iter().zip(v) {
            re += vi * (w * ti).cos();
            im += vi * (w * ti).sin();
        }
        re * re + im * im
    };
    let mut best_w = 0.0;
    let mut best_p = f64::NEG_INFINITY;
    let wmax = mhz_ang(600.0);
    let coarse = 6000;
    for i in 1..coarse {
        let w = wmax * i as f64 / coarse as f64;
        let p = power(w);
        if p > best_p {
            best_p = p;
            best_w = w;
        }
    }
    let dw = wmax / coarse as f64;
    let mut lo = best_w - dw;
    let mut hi = best_w + dw;
    for _ in 0..40 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if power(m1) < power(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    0.5 * (lo + hi)
}
