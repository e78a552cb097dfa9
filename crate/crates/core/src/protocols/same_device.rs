//! Heralded entanglement of two ions in the same cavity, with the
//! differential AC-Stark shift providing the per-branch Z correction under
//! global microwave control.

use super::result::{FidelityPoint, ProtocolResult, StageCurve};
use super::support::{
    dd_block, engine_config_scaled, optical_pi, psi_plus, qubit_fidelity, qubit_pi_with_fe,
    single_mode_detection, weak_preparation,
};
use crate::dynamics::{
    herald_ensemble, GateOp, HeraldParams, IonGate, PhaseExpr, ProtocolTimeline, ScalarStat,
    Segment, SegmentClass, TailCase, TailCondition, TimeExpr, WindowSpec,
};
use crate::node::{paper_parameter_fixture, IonParameters, LaserSettings, NoiseEnvironment};
use crate::units::{hz, mhz_ang, ns_to_us, TWO_PI};
use crate::{Error, Result};

/// Same-device pair configuration (ions 1 and 3 of the first device).
#[derive(Debug, Clone)]
pub struct SameDeviceConfig {
    pub ions: [IonParameters; 2],
    pub laser: LaserSettings,
    pub noise: NoiseEnvironment,
    pub alphas: [f64; 2],
    pub p_det_scale: [f64; 2],
    /// AC-Stark tone detunings from the two ions (rad/us).
    pub ac_detuning: [f64; 2],
    /// Largest usable AC-Stark Rabi frequency (rad/us).
    pub ac_rabi_ceiling: f64,
    /// Number of decoupling periods carrying the AC tone (16 in the 32
    /// pulse XY-8 block).
    pub ac_periods: usize,
    pub tau_h: f64,
    pub tau_s: f64,
    pub dt: f64,
    pub accept: f64,
    pub trials: usize,
    pub seed: u64,
    pub rep_rate: f64,
    pub qubit_drive_mode: bool,
}

impl SameDeviceConfig {
    pub fn paper_default() -> Result<Self> {
        let mut ion1 = paper_parameter_fixture("ion1")?;
        let mut ion3 = paper_parameter_fixture("ion3")?;
        ion1.qubit_offset = mhz_ang(0.565);
        ion3.qubit_offset = -mhz_ang(0.565);
        Ok(Self {
            ions: [ion1, ion3],
            laser: LaserSettings::paper_defaults(vec![0.0, -mhz_ang(475.0)]),
            noise: NoiseEnvironment {
                // Single-detector setup; no path between the co-located
                // ions, so path-phase stabilization is not used.
                dark_rate: hz(8.0),
                sigma_phi: 0.0,
                ..NoiseEnvironment::default()
            },
            alphas: [0.07, 0.07],
            p_det_scale: [1.0, 1.0],
            ac_detuning: [-mhz_ang(50.0), mhz_ang(425.0)],
            ac_rabi_ceiling: mhz_ang(5.0),
            ac_periods: 16,
            tau_h: 2.9,
            tau_s: 2.9,
            dt: ns_to_us(10.0),
            accept: ns_to_us(500.0),
            trials: 300,
            seed: 20240904,
            rep_rate: hz(12.3e3),
            qubit_drive_mode: true,
        })
    }

    pub fn drive_diff(&self) -> f64 {
        self.laser.drive_diff(0, 1)
    }
}

/// Perturbative AC-Stark differential phase over the decoupling block:
/// with 16 tone periods this is the 8 Omega^2 tau_s (1/D3 - 1/D1) form,
/// from per-ion qubit phase rates Omega^2/(4 Delta).
pub fn ac_stark_phase_formula(
    rabi: f64,
    tau_s: f64,
    detunings: [f64; 2],
    periods: usize,
) -> f64 {
    let per_time = rabi * rabi / 4.0;
    periods as f64 * 2.0 * tau_s * per_time * (1.0 / detunings[1] - 1.0 / detunings[0])
}

/// Dressed-state (all-orders) version of the same phase; the per-ion rate
/// is the exact light shift of the |1> branch.
pub fn ac_stark_phase_exact(rabi: f64, tau_s: f64, detunings: [f64; 2], periods: usize) -> f64 {
    let rate = |delta: f64| -> f64 {
        (delta.signum() * (delta * delta + rabi * rabi).sqrt() - delta) / 2.0
    };
    periods as f64 * 2.0 * tau_s * (rate(detunings[1]) - rate(detunings[0]))
}

/// Required Omega^2 for a target differential phase; errors out past the
/// configured ceiling.
pub fn ac_required_rabi_sq(cfg: &SameDeviceConfig, phi_ac: f64) -> Result<f64> {
    let slope =
        cfg.ac_periods as f64 * 2.0 * cfg.tau_s * 0.25
            * (1.0 / cfg.ac_detuning[1] - 1.0 / cfg.ac_detuning[0]);
    let omega_sq = phi_ac / slope;
    if omega_sq < 0.0 {
        return Err(Error::InvalidArgument(
            "required AC-Stark phase has the wrong sign for these detunings".into(),
        ));
    }
    if omega_sq > cfg.ac_rabi_ceiling * cfg.ac_rabi_ceiling {
        return Err(Error::InvalidArgument(format!(
            "AC-Stark phase {phi_ac:.3} rad needs Omega = 2pi x {:.2} MHz, above the ceiling",
            omega_sq.sqrt() / TWO_PI
        )));
    }
    Ok(omega_sq)
}

pub fn same_device_timeline(cfg: &SameDeviceConfig) -> ProtocolTimeline {
    let toggles = &cfg.noise.toggles;
    let ions = [0usize, 1];
    let dd = cfg.drive_diff();
    let drive_mode = cfg.qubit_drive_mode;

    let mut segments = weak_preparation(&cfg.alphas, &cfg.laser, toggles, drive_mode);
    segments.push(optical_pi(&ions, cfg.laser.rabi_herald, toggles));
    segments.push(Segment::Window { index: 0 });

    let mut tail: Vec<Segment> = Vec::new();
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

    // Per-branch AC-Stark correction Phi_AC = -dd * t0 split into the two
    // per-ion phases the shared tone produces. The phases are applied
    // unmodded; only their difference is physical for this pair.
    let ratio = cfg.ac_detuning[1] / (cfg.ac_detuning[0] - cfg.ac_detuning[1]);
    let phi1_coeff = -dd * ratio;
    let phi3_coeff = phi1_coeff - dd;
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
                ion: 1,
                op: GateOp::ZPhase {
                    angle: PhaseExpr::Linear {
                        base: 0.0,
                        t0_coeff: phi3_coeff,
                        t1_coeff: 0.0,
                    },
                },
            },
        ],
        nominal_duration: 0.0,
    });

    ProtocolTimeline {
        segments,
        windows: vec![WindowSpec { duration: cfg.tau_h }],
        detection: single_mode_detection(&[(0, 0.0, false), (1, dd, false)]),
        tail: vec![TailCase {
            condition: TailCondition::Always,
            segments: tail,
        }],
    }
}

/// Run the same-device protocol.
pub fn same_device_bell(cfg: &SameDeviceConfig) -> Result<ProtocolResult> {
    cfg.noise.validate()?;
    // Every branch's wrapped correction must be reachable at the ceiling.
    let worst = TWO_PI;
    ac_required_rabi_sq(cfg, worst)?;

    let engine = engine_config_scaled(&cfg.ions, &cfg.noise, &cfg.p_det_scale);
    let timeline = same_device_timeline(cfg);
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
