//! Two-photon (Barrett-Kok style) heralding: one click in each of two
//! excitation rounds carves both |00> and |11> and erases the optical
//! path phase.

use super::result::{FidelityPoint, ProtocolResult, StageCurve};
use super::support::{
    engine_config_scaled, optical_pi, psi_plus, qubit_fidelity, qubit_pi_with_fe,
    single_mode_detection, weak_preparation,
};
use crate::dynamics::{
    herald_ensemble, GateOp, HeraldParams, IonGate, PhaseExpr, ProtocolTimeline, ScalarStat,
    Segment, SegmentClass, TailCase, TailCondition, TimeExpr, WindowSpec,
};
use crate::node::{paper_parameter_fixture, IonParameters, LaserSettings, NoiseEnvironment};
use crate::units::{hz, mhz_ang, ns_to_us};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct TwoPhotonConfig {
    pub ions: [IonParameters; 2],
    pub laser: LaserSettings,
    pub noise: NoiseEnvironment,
    pub p_det_scale: [f64; 2],
    pub tau_h: f64,
    pub tau_s: f64,
    pub dt: f64,
    /// Two-sided acceptance width W: keep |t0 - t1| < W/2 (us).
    pub accept: f64,
    pub trials: usize,
    pub seed: u64,
    pub rep_rate: f64,
}

impl TwoPhotonConfig {
    pub fn paper_default() -> Result<Self> {
        Ok(Self {
            ions: [
                paper_parameter_fixture("ion1")?,
                paper_parameter_fixture("ion2")?,
            ],
            laser: LaserSettings::paper_defaults(vec![0.0, mhz_ang(31.0)]),
            noise: NoiseEnvironment::default(),
            p_det_scale: [1.0, 1.0],
            tau_h: 2.9,
            tau_s: 2.9,
            dt: ns_to_us(25.0),
            accept: ns_to_us(600.0),
            trials: 60,
            seed: 20240902,
            rep_rate: hz(11.1e3),
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.accept > 2.0 * self.tau_h {
            return Err(Error::InvalidArgument(format!(
                "two-sided window {} us exceeds twice the heralding window",
                self.accept
            )));
        }
        self.noise.validate()
    }
}

/// Build the two-round timeline. `prep` supplies the per-ion preparation
/// segments; `z_ion`/`z_sign` select which qubit receives the
/// +-drive-difference phase correction.
pub fn two_photon_timeline(
    cfg: &TwoPhotonConfig,
    prep: Vec<Segment>,
    z_ion: usize,
    z_sign: f64,
) -> ProtocolTimeline {
    let toggles = &cfg.noise.toggles;
    let ions = [0usize, 1usize];
    let dd = cfg.laser.drive_diff(0, 1);
    let tau_s = cfg.tau_s;

    let mut segments = prep;
    segments.push(optical_pi(&ions, cfg.laser.rabi_herald, toggles));
    segments.push(Segment::Window { index: 0 });
    // Between the rounds: qubit pi swaps the carved component; re-excite.
    segments.extend(qubit_pi_with_fe(&ions, 0.0, &cfg.laser, toggles, false));
    segments.push(optical_pi(&ions, cfg.laser.rabi_herald, toggles));
    segments.push(Segment::Window { index: 1 });

    let wait = |expr: TimeExpr| Segment::Wait {
        duration: expr,
        class: SegmentClass::Generic,
    };
    let wait_c = |v: f64| wait(TimeExpr::Const(v));

    // Five decoupling pulses with 2 tau_s spacing; the rephasing insert
    // lands after the second pulse when t1 < t0 and after the third when
    // t1 >= t0.
    let mut tail_early: Vec<Segment> = Vec::new(); // t1 < t0
    let mut tail_late: Vec<Segment> = Vec::new(); // t1 >= t0

    let pulse = |axis: f64| qubit_pi_with_fe(&ions, axis, &cfg.laser, toggles, false);

    for tail in [&mut tail_early, &mut tail_late] {
        tail.push(wait_c(tau_s));
        tail.extend(pulse(0.0));
        tail.push(wait_c(2.0 * tau_s));
        tail.extend(pulse(0.5 * std::f64::consts::PI));
    }

    // t1 < t0: spin rephase tau_h - t0 + t1, optical rephase t0 - t1.
    tail_early.push(wait(TimeExpr::Linear {
        base: cfg.tau_h,
        t0_coeff: -1.0,
        t1_coeff: 1.0,
    }));
    tail_early.push(optical_pi(&ions, cfg.laser.rabi_rephase, toggles));
    tail_early.push(Segment::Wait {
        duration: TimeExpr::Linear {
            base: 0.0,
            t0_coeff: 1.0,
            t1_coeff: -1.0,
        },
        class: SegmentClass::RephasingWait,
    });
    tail_early.push(optical_pi(&ions, cfg.laser.rabi_rephase, toggles));
    tail_early.push(wait_c(2.0 * tau_s));
    tail_early.extend(pulse(0.0));
    tail_early.push(wait_c(2.0 * tau_s));
    tail_early.extend(pulse(0.5 * std::f64::consts::PI));
    tail_early.push(wait_c(2.0 * tau_s));
    tail_early.extend(pulse(0.0));
    tail_early.push(wait_c(tau_s));

    // t1 >= t0: one more decoupling period first, insert after pulse 3.
    tail_late.push(wait_c(2.0 * tau_s));
    tail_late.extend(pulse(0.0));
    tail_late.push(wait(TimeExpr::Linear {
        base: cfg.tau_h,
        t0_coeff: 1.0,
        t1_coeff: -1.0,
    }));
    tail_late.push(optical_pi(&ions, cfg.laser.rabi_rephase, toggles));
    tail_late.push(Segment::Wait {
        duration: TimeExpr::Linear {
            base: 0.0,
            t0_coeff: -1.0,
            t1_coeff: 1.0,
        },
        class: SegmentClass::RephasingWait,
    });
    tail_late.push(optical_pi(&ions, cfg.laser.rabi_rephase, toggles));
    tail_late.push(wait_c(2.0 * tau_s));
    tail_late.extend(pulse(0.5 * std::f64::consts::PI));
    tail_late.push(wait_c(2.0 * tau_s));
    tail_late.extend(pulse(0.0));
    tail_late.push(wait_c(tau_s));

    // Conditional Z by the drive-difference phase of (t0 - t1).
    for tail in [&mut tail_early, &mut tail_late] {
        tail.push(Segment::Unitary {
            gates: vec![IonGate {
                ion: z_ion,
                op: GateOp::ZPhase {
                    angle: PhaseExpr::Linear {
                        base: 0.0,
                        t0_coeff: z_sign * dd,
                        t1_coeff: -z_sign * dd,
                    },
                },
            }],
            nominal_duration: 0.0,
        });
    }

    ProtocolTimeline {
        segments,
        windows: vec![
            WindowSpec { duration: cfg.tau_h },
            WindowSpec { duration: cfg.tau_h },
        ],
        detection: single_mode_detection(&[(0, 0.0, false), (1, dd, true)]),
        tail: vec![
            TailCase {
                condition: TailCondition::T1LessThanT0,
                segments: tail_early,
            },
            TailCase {
                condition: TailCondition::T1AtLeastT0,
                segments: tail_late,
            },
        ],
    }
}

/// Run the two-photon Bell protocol at the configured two-sided window.
pub fn two_photon_bell(cfg: &TwoPhotonConfig) -> Result<ProtocolResult> {
    cfg.validate()?;
    let engine = engine_config_scaled(&cfg.ions, &cfg.noise, &cfg.p_det_scale);
    let prep = weak_preparation(&[0.5, 0.5], &cfg.laser, &cfg.noise.toggles, false);
    let timeline = two_photon_timeline(cfg, prep, 1, -1.0);
    let params = HeraldParams {
        dt: cfg.dt,
        accept: cfg.accept,
        trials: cfg.trials,
        seed: cfg.seed,
        se_tolerance: None,
    };

    let dims = engine.dims();
    let d = engine.dim();
    let target = psi_plus();
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

    // Fidelity/success at sub-windows |t0-t1| < w/2 re-sliced from the run.
    let mut window_table = Vec::new();
    for w in [0.2, 0.6, 1.0, 1.6] {
        if w > cfg.accept + 1e-12 {
            continue;
        }
        let mut acc: crate::qcore::Operator = ndarray::Array2::zeros((d, d));
        for (key, b) in ensemble.keys.iter().zip(&ensemble.branches) {
            let diff = (key.t0_bin as f64 - key.t1_bin.unwrap() as f64).abs() * cfg.dt;
            if diff < 0.5 * w - 1e-12 {
                acc = acc + b;
            }
        }
        for (key, b) in ensemble.keys.iter().zip(&ensemble.noise_branches) {
            let diff = (key.t0_bin as f64 - key.t1_bin.unwrap() as f64).abs() * cfg.dt;
            if diff < 0.5 * w - 1e-12 {
                acc = acc + b;
            }
        }
        let success = crate::qcore::trace(&acc).re;
        window_table.push(FidelityPoint {
            window: w,
            fidelity: qubit_fidelity(&acc, &dims, &target),
            success_probability: success,
            rate_hz: cfg.rep_rate * success * 1e6,
        });
    }

    let acc = ensemble.accepted_state();
    let success = crate::qcore::trace(&acc).re;
    let fidelity_mean = qubit_fidelity(&acc, &dims, &target);
    let se = ensemble
        .observable_stat(0)
        .map(|s| s.std_err)
        .unwrap_or(0.0);
    let result = ProtocolResult {
        ensemble,
        stages: Vec::<StageCurve>::new(),
        window_table,
        fidelity: ScalarStat {
            mean: fidelity_mean,
            std_err: se,
        },
        success_probability: success,
        rate_hz: cfg.rep_rate * success * 1e6,
        target: "psi_plus".into(),
    };
    result.validate()?;
    Ok(result)
}
