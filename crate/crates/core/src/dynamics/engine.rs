//! Trial propagation, jump branching and Monte Carlo averaging.

use super::ensemble::{scale_set, trace_re, tree_merge, BranchKey, HeraldedEnsemble, TrialResult};
use super::liouville::{
    apply_ion_superop, build_ion_liouvillian, DecayContext, DriveTerm, IonOps,
};
use super::liouville::IonRates;
use super::segment::{
    DetectionMode, GateOp, PhaseExpr, ProtocolTimeline, Segment, SegmentClass, TimeExpr,
};
use crate::node::trial_rng;
use crate::qcore::{c, expm, kron, C64, Level, Operator};
use crate::units::TWO_PI;
use crate::{Error, Result};
use ndarray::Array2;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;

/// Per-ion physical inputs in engine units (us, rad/us, 1/us).
#[derive(Debug, Clone)]
pub struct EngineIon {
    pub levels: Vec<Level>,
    /// Optical lifetime T1,o (us); total enhanced A decay rate is 1/T1,o.
    pub t1_opt: f64,
    /// Detected fraction of the A decay.
    pub p_det: f64,
    /// Quasi-static optical linewidth (rad/us, std).
    pub gamma_star: f64,
    /// Quasi-static qubit detuning spread (rad/us, std).
    pub sigma_q: f64,
    /// Mean optical detuning of the ion relative to its drive (rad/us).
    pub optical_offset: f64,
    /// Mean qubit detuning relative to its microwave drive (rad/us).
    pub qubit_offset: f64,
    /// Spin relaxation time T1,s (us).
    pub t1_spin: f64,
    /// Pure spin dephasing rate (1/us).
    pub gamma_spin_deph: f64,
    /// Initialization error 1 - F_init (population left in |1>).
    pub init_error: f64,
    /// Optional Markovian optical dephasing (1/us); zero by default.
    pub optical_dephasing: f64,
}

impl EngineIon {
    fn rates(&self) -> IonRates {
        IonRates {
            gamma_total: 1.0 / self.t1_opt,
            p_det: self.p_det,
            gamma_e: 1.0 / self.t1_opt,
            gamma_spin_relax: 1.0 / self.t1_spin,
            gamma_spin_deph: self.gamma_spin_deph,
            optical_dephasing: self.optical_dephasing,
        }
    }
}

/// Engine-level configuration: the ions plus the noise environment pieces
/// the propagator needs. Error toggles that act on the timeline (gate
/// modes, initialization) are resolved by the protocol builders.
#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub ions: Vec<EngineIon>,
    /// Include spin relaxation/dephasing channels.
    pub spin_noise: bool,
    /// Include optical decay during the rephasing wait (the undetected
    /// rephasing-emission error source).
    pub rephasing_optical_decay: bool,
    /// Total noise count rate (1/us); zero disables the noise branch.
    pub noise_rate: f64,
    /// Path-phase jitter std (rad); zero pins the path phase to 0.
    pub sigma_phi: f64,
    /// Stabilized: Gaussian(0, sigma_phi); otherwise uniform [0, 2pi).
    pub path_phase_stabilized: bool,
}

impl EngineConfig {
    pub fn dims(&self) -> Vec<usize> {
        self.ions.iter().map(|i| i.levels.len()).collect()
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }
}

/// Runtime heralding parameters.
#[derive(Debug, Clone, Copy)]
pub struct HeraldParams {
    /// Jump-time bin width (us); must divide the window duration.
    pub dt: f64,
    /// Acceptance: tau_A for single-window, two-sided width W for
    /// two-window timelines (us).
    pub accept: f64,
    pub trials: usize,
    pub seed: u64,
    /// Warn when the first observable's standard error exceeds this.
    pub se_tolerance: Option<f64>,
}

/// Quasi-static draws for one trial.
#[derive(Debug, Clone)]
pub struct TrialDraws {
    /// (optical detuning, qubit detuning) per ion (rad/us).
    pub detunings: Vec<(f64, f64)>,
    /// Optical path phase difference (rad).
    pub delta_phi: f64,
}

impl TrialDraws {
    pub fn zero(n_ions: usize) -> Self {
        Self {
            detunings: vec![(0.0, 0.0); n_ions],
            delta_phi: 0.0,
        }
    }
}

fn sample_draws(config: &EngineConfig, rng: &mut ChaCha8Rng) -> TrialDraws {
    let mut detunings = Vec::with_capacity(config.ions.len());
    for ion in &config.ions {
        let opt = sample_normal(ion.optical_offset, ion.gamma_star, rng);
        let qub = sample_normal(ion.qubit_offset, ion.sigma_q, rng);
        detunings.push((opt, qub));
    }
    let delta_phi = if config.sigma_phi == 0.0 {
        0.0
    } else if config.path_phase_stabilized {
        sample_normal(0.0, config.sigma_phi, rng)
    } else {
        Uniform::new(0.0, TWO_PI).unwrap().sample(rng)
    };
    TrialDraws {
        detunings,
        delta_phi,
    }
}

fn sample_normal(mean: f64, std: f64, rng: &mut ChaCha8Rng) -> f64 {
    if std == 0.0 {
        mean
    } else {
        Normal::new(mean, std).unwrap().sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum GenKind {
    Window,
    Free,
    RephaseWait,
}

/// Per-trial propagator workspace: per-ion Liouvillians for the generator
/// kinds plus binary power tables at half-bin resolution.
struct TrialProp<'a> {
    config: &'a EngineConfig,
    dims: Vec<usize>,
    ops: Vec<IonOps>,
    draws: TrialDraws,
    half_dt: f64,
    /// [kind][ion] Liouvillian.
    gens: Vec<Vec<Operator>>,
    /// [kind][ion][j] = expm(L half_dt)^(2^j).
    pows: Vec<Vec<Vec<Operator>>>,
}

const KINDS: [GenKind; 3] = [GenKind::Window, GenKind::Free, GenKind::RephaseWait];

fn kind_index(kind: GenKind) -> usize {
    match kind {
        GenKind::Window => 0,
        GenKind::Free => 1,
        GenKind::RephaseWait => 2,
    }
}

impl<'a> TrialProp<'a> {
    fn new(config: &'a EngineConfig, draws: TrialDraws, dt: f64, max_halfbins: usize) -> Self {
        let dims = config.dims();
        let ops: Vec<IonOps> = config
            .ions
            .iter()
            .map(|ion| IonOps::new(ion.levels.clone()))
            .collect();
        let half_dt = 0.5 * dt;

        let mut gens = Vec::with_capacity(KINDS.len());
        for kind in KINDS {
            let ctx = match kind {
                GenKind::Window => DecayContext {
                    detected_conditioning: true,
                    optical_decay: true,
                    spin_noise: config.spin_noise,
                },
                GenKind::Free => DecayContext {
                    detected_conditioning: false,
                    optical_decay: true,
                    spin_noise: config.spin_noise,
                },
                GenKind::RephaseWait => DecayContext {
                    detected_conditioning: false,
                    optical_decay: config.rephasing_optical_decay,
                    spin_noise: config.spin_noise,
                },
            };
            let per_ion: Vec<Operator> = config
                .ions
                .iter()
                .enumerate()
                .map(|(i, ion)| {
                    build_ion_liouvillian(
                        &ops[i],
                        &ion.rates(),
                        draws.detunings[i].0,
                        draws.detunings[i].1,
                        None,
                        ctx,
                    )
                })
                .collect();
            gens.push(per_ion);
        }

        let levels = (max_halfbins.max(1) as f64).log2().ceil() as usize + 1;
        let mut pows = Vec::with_capacity(KINDS.len());
        for kind_gens in &gens {
            let per_ion: Vec<Vec<Operator>> = kind_gens
                .iter()
                .map(|l| {
                    let base = expm(&(l * c(half_dt)));
                    let mut table = Vec::with_capacity(levels);
                    table.push(base);
                    for j in 1..levels {
                        let prev = &table[j - 1];
                        table.push(prev.dot(prev));
                    }
                    table
                })
                .collect();
            pows.push(per_ion);
        }

        Self {
            config,
            dims,
            ops,
            draws,
            half_dt,
            gens,
            pows,
        }
    }

    fn n_ions(&self) -> usize {
        self.config.ions.len()
    }

    /// Per-ion propagator for `halfbins` half-bin steps of `kind`.
    fn power(&self, kind: GenKind, ion: usize, halfbins: usize) -> Operator {
        let table = &self.pows[kind_index(kind)][ion];
        let d2 = self.dims[ion] * self.dims[ion];
        let mut acc: Option<Operator> = None;
        let mut m = halfbins;
        let mut j = 0;
        while m > 0 {
            if m & 1 == 1 {
                acc = Some(match acc {
                    None => table[j].clone(),
                    Some(a) => table[j].dot(&a),
                });
            }
            m >>= 1;
            j += 1;
        }
        acc.unwrap_or_else(|| Array2::from_diag_elem(d2, c(1.0)))
    }

    /// Direct per-ion propagator for an arbitrary duration of `kind`.
    fn direct(&self, kind: GenKind, ion: usize, duration: f64) -> Operator {
        expm(&(&self.gens[kind_index(kind)][ion] * c(duration)))
    }

    /// Per-ion propagator for a duration, using the power table when the
    /// duration is a half-bin multiple.
    fn wait_superop(&self, kind: GenKind, ion: usize, duration: f64) -> Operator {
        let m = duration / self.half_dt;
        let mr = m.round();
        if (m - mr).abs() < 1e-9 && mr >= 0.0 {
            self.power(kind, ion, mr as usize)
        } else {
            self.direct(kind, ion, duration)
        }
    }

    /// Superoperator of an instantaneous unitary on one ion.
    fn unitary_superop(&self, u: &Operator) -> Operator {
        let ubar = u.mapv(|x| x.conj());
        kron(u, &ubar)
    }

    fn gate_unitary(&self, ion: usize, op: GateOp, t0: f64, t1: f64) -> Operator {
        let ops = &self.ops[ion];
        let d = ops.dim();
        let mut u: Operator = Array2::from_diag_elem(d, c(1.0));
        match op {
            GateOp::QubitRotation { axis_phase, angle } => {
                let (i0, i1) = (
                    ops.index(Level::Zero).expect("qubit level 0"),
                    ops.index(Level::One).expect("qubit level 1"),
                );
                let half = 0.5 * angle;
                let e = C64::from_polar(1.0, axis_phase);
                u[[i0, i0]] = c(half.cos());
                u[[i1, i1]] = c(half.cos());
                u[[i0, i1]] = -C64::i() * half.sin() * e.conj();
                u[[i1, i0]] = -C64::i() * half.sin() * e;
            }
            GateOp::OpticalPi => {
                if let (Some(i1), Some(ie)) = (ops.index(Level::One), ops.index(Level::E)) {
                    u[[i1, i1]] = c(0.0);
                    u[[ie, ie]] = c(0.0);
                    u[[i1, ie]] = -C64::i();
                    u[[ie, i1]] = -C64::i();
                }
            }
            GateOp::FePi => {
                if let (Some(ie), Some(i1e)) = (ops.index(Level::E), ops.index(Level::OneE)) {
                    u[[ie, ie]] = c(0.0);
                    u[[i1e, i1e]] = c(0.0);
                    u[[ie, i1e]] = -C64::i();
                    u[[i1e, ie]] = -C64::i();
                }
            }
            GateOp::ZPhase { angle } => {
                let phi = angle.eval(t0, t1);
                if let Some(i1) = ops.index(Level::One) {
                    u[[i1, i1]] = C64::from_polar(1.0, -phi);
                }
            }
        }
        u
    }

    /// Per-ion drive propagator over a square pulse.
    fn drive_superop(&self, ion: usize, drive: DriveTerm, extra_detuning: f64, duration: f64) -> Operator {
        let ion_cfg = &self.config.ions[ion];
        let ctx = DecayContext {
            detected_conditioning: false,
            optical_decay: true,
            spin_noise: self.config.spin_noise,
        };
        let l = build_ion_liouvillian(
            &self.ops[ion],
            &ion_cfg.rates(),
            self.draws.detunings[ion].0 + if matches!(drive, DriveTerm::Optical { .. }) { extra_detuning } else { 0.0 },
            self.draws.detunings[ion].1 + if matches!(drive, DriveTerm::Qubit { .. }) { extra_detuning } else { 0.0 },
            Some(drive),
            ctx,
        );
        expm(&(&l * c(duration)))
    }
}

/// A compiled tail operation: fixed per-ion chains are pre-composed; the
/// branch-dependent pieces stay symbolic.
enum TailOp {
    Fixed(Vec<Option<Operator>>),
    Wait { expr: TimeExpr, kind: GenKind },
    ZPhase { ion: usize, expr: PhaseExpr },
}

fn fold_into(chain: &mut Vec<Option<Operator>>, ion: usize, superop: Operator) {
    chain[ion] = Some(match chain[ion].take() {
        None => superop,
        Some(prev) => superop.dot(&prev),
    });
}

/// Compile a segment list into tail ops (fixed chains + symbolic waits).
fn compile_segments(prop: &TrialProp<'_>, segments: &[Segment]) -> Result<Vec<TailOp>> {
    let n = prop.n_ions();
    let mut out = Vec::new();
    let mut current: Vec<Option<Operator>> = vec![None; n];

    let flush = |current: &mut Vec<Option<Operator>>, out: &mut Vec<TailOp>| {
        if current.iter().any(|c| c.is_some()) {
            out.push(TailOp::Fixed(std::mem::replace(current, vec![None; n])));
        }
    };

    for seg in segments {
        match seg {
            Segment::Unitary {
                gates,
                nominal_duration,
            } => {
                let mut deferred_z: Vec<(usize, PhaseExpr)> = Vec::new();
                for gate in gates {
                    match gate.op {
                        GateOp::ZPhase { angle } if matches!(angle, PhaseExpr::Linear { .. }) => {
                            deferred_z.push((gate.ion, angle));
                        }
                        _ => {
                            let u = prop.gate_unitary(gate.ion, gate.op, 0.0, 0.0);
                            fold_into(&mut current, gate.ion, prop.unitary_superop(&u));
                        }
                    }
                }
                if *nominal_duration > 0.0 {
                    for ion in 0..n {
                        let w = prop.wait_superop(GenKind::Free, ion, *nominal_duration);
                        fold_into(&mut current, ion, w);
                    }
                }
                for (ion, expr) in deferred_z {
                    flush(&mut current, &mut out);
                    out.push(TailOp::ZPhase { ion, expr });
                }
            }
            Segment::Drive { drives, duration } => {
                let mut driven = vec![false; n];
                for d in drives {
                    let term = if d.optical {
                        DriveTerm::Optical { rabi: d.rabi }
                    } else {
                        DriveTerm::Qubit {
                            rabi: d.rabi,
                            axis_phase: d.axis_phase,
                        }
                    };
                    let sup = prop.drive_superop(d.ion, term, d.extra_detuning, *duration);
                    fold_into(&mut current, d.ion, sup);
                    driven[d.ion] = true;
                }
                for ion in 0..n {
                    if !driven[ion] {
                        let w = prop.wait_superop(GenKind::Free, ion, *duration);
                        fold_into(&mut current, ion, w);
                    }
                }
            }
            Segment::Wait { duration, class } => {
                let kind = match class {
                    SegmentClass::Generic => GenKind::Free,
                    SegmentClass::RephasingWait => GenKind::RephaseWait,
                };
                match duration {
                    TimeExpr::Const(v) => {
                        for ion in 0..n {
                            let w = prop.wait_superop(kind, ion, *v);
                            fold_into(&mut current, ion, w);
                        }
                    }
                    expr @ TimeExpr::Linear { .. } => {
                        flush(&mut current, &mut out);
                        out.push(TailOp::Wait { expr: *expr, kind });
                    }
                }
            }
            Segment::Window { .. } => {
                return Err(Error::InvalidArgument(
                    "heralding windows cannot appear inside a compiled chain".into(),
                ));
            }
        }
    }
    flush(&mut current, &mut out);
    Ok(out)
}

fn apply_chain(prop: &TrialProp<'_>, rho: &Operator, chain: &[Option<Operator>]) -> Operator {
    let mut out = rho.clone();
    for (ion, sup) in chain.iter().enumerate() {
        if let Some(u) = sup {
            out = apply_ion_superop(&out, ion, u, &prop.dims);
        }
    }
    out
}

fn apply_tail(
    prop: &TrialProp<'_>,
    rho: &Operator,
    ops: &[TailOp],
    t0: f64,
    t1: f64,
) -> Result<Operator> {
    let mut out = rho.clone();
    for op in ops {
        match op {
            TailOp::Fixed(chain) => out = apply_chain(prop, &out, chain),
            TailOp::Wait { expr, kind } => {
                let dur = expr.eval(t0, t1);
                if dur < -1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "negative segment duration {dur} us after feedforward substitution"
                    )));
                }
                let dur = dur.max(0.0);
                for ion in 0..prop.n_ions() {
                    let w = prop.wait_superop(*kind, ion, dur);
                    out = apply_ion_superop(&out, ion, &w, &prop.dims);
                }
            }
            TailOp::ZPhase { ion, expr } => {
                let phi = expr.eval(t0, t1);
                out = apply_z_phase(prop, &out, *ion, phi);
            }
        }
    }
    Ok(out)
}

fn apply_z_phase(prop: &TrialProp<'_>, rho: &Operator, ion: usize, angle: f64) -> Operator {
    // Diagonal unitary exp(-i angle) on |1>_ion.
    let d = prop.dims.iter().product::<usize>();
    let one_idx = prop.ops[ion].index(Level::One).expect("qubit level 1");
    let dr: usize = prop.dims[ion + 1..].iter().product();
    let phase = C64::from_polar(1.0, -angle);
    let digit = |flat: usize| -> usize { (flat / dr) % prop.dims[ion] };
    let mut out = rho.clone();
    for r in 0..d {
        for cidx in 0..d {
            let mut f = C64::new(1.0, 0.0);
            if digit(r) == one_idx {
                f *= phase;
            }
            if digit(cidx) == one_idx {
                f *= phase.conj();
            }
            if f != C64::new(1.0, 0.0) {
                out[[r, cidx]] *= f;
            }
        }
    }
    out
}

/// sigma^-_i rho sigma^+_j embedded in the joint space.
fn lower_sandwich(prop: &TrialProp<'_>, rho: &Operator, ion_i: usize, ion_j: usize) -> Operator {
    let d: usize = prop.dims.iter().product();
    let mut out: Operator = Array2::zeros((d, d));
    let (one_i, e_i) = (
        prop.ops[ion_i].index(Level::One).expect("level 1"),
        prop.ops[ion_i].index(Level::E).expect("level e"),
    );
    let (one_j, e_j) = (
        prop.ops[ion_j].index(Level::One).expect("level 1"),
        prop.ops[ion_j].index(Level::E).expect("level e"),
    );
    let dr_i: usize = prop.dims[ion_i + 1..].iter().product();
    let dr_j: usize = prop.dims[ion_j + 1..].iter().product();
    let di = prop.dims[ion_i];
    let dj = prop.dims[ion_j];
    for r in 0..d {
        if (r / dr_i) % di != one_i {
            continue;
        }
        let r_src = r + (e_i - one_i) * dr_i;
        for cidx in 0..d {
            if (cidx / dr_j) % dj != one_j {
                continue;
            }
            let c_src = cidx + (e_j - one_j) * dr_j;
            out[[r, cidx]] = rho[[r_src, c_src]];
        }
    }
    out
}

/// Apply the combined jump of one detection mode at bin-center time `t0`
/// within its window; returns the unnormalized post-jump state.
fn apply_jump(
    prop: &TrialProp<'_>,
    rho: &Operator,
    mode: &DetectionMode,
    t0: f64,
    dt: f64,
) -> Operator {
    let d: usize = prop.dims.iter().product();
    let mut coeffs = Vec::with_capacity(mode.arms.len());
    for arm in &mode.arms {
        let gamma_det =
            prop.config.ions[arm.ion].p_det / prop.config.ions[arm.ion].t1_opt;
        let amp = arm.weight * (gamma_det * dt).sqrt();
        let mut phase = -(arm.drive_offset_slope * t0 + arm.static_phase);
        if arm.path_phase {
            phase -= prop.draws.delta_phi;
        }
        coeffs.push((arm.ion, C64::from_polar(amp, phase)));
    }
    let mut out: Operator = Array2::zeros((d, d));
    for &(ion_i, ci) in &coeffs {
        for &(ion_j, cj) in &coeffs {
            let term = lower_sandwich(prop, rho, ion_i, ion_j);
            out = out + term * (ci * cj.conj());
        }
    }
    let mut out = out * c(mode.weight);
    if let Some((ion, angle)) = mode.z_correction {
        out = apply_z_phase(prop, &out, ion, angle);
    }
    out
}

/// Branch keys for a timeline at the given binning.
pub fn branch_keys(timeline: &ProtocolTimeline, params: &HeraldParams) -> Result<Vec<BranchKey>> {
    let n0 = window_bins(timeline.windows[0].duration, params.dt)?;
    match timeline.window_count() {
        1 => {
            let n_accept = ((params.accept / params.dt).round() as usize).min(n0);
            Ok((0..n_accept)
                .map(|k| BranchKey {
                    t0_bin: k,
                    t1_bin: None,
                })
                .collect())
        }
        2 => {
            let n1 = window_bins(timeline.windows[1].duration, params.dt)?;
            let mut keys = Vec::new();
            for k0 in 0..n0 {
                for k1 in 0..n1 {
                    let diff = (k0 as f64 - k1 as f64).abs() * params.dt;
                    if diff < 0.5 * params.accept - 1e-12 {
                        keys.push(BranchKey {
                            t0_bin: k0,
                            t1_bin: Some(k1),
                        });
                    }
                }
            }
            Ok(keys)
        }
        other => Err(Error::InvalidArgument(format!("{other} windows unsupported"))),
    }
}

fn window_bins(duration: f64, dt: f64) -> Result<usize> {
    let n = duration / dt;
    let nr = n.round();
    if (n - nr).abs() > 1e-6 || nr < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "bin width {dt} us does not divide the window {duration} us"
        )));
    }
    Ok(nr as usize)
}

/// Initial state: each ion in |0> with `init_error` population in |1>.
fn initial_state(config: &EngineConfig) -> Operator {
    let mut rho: Operator = Array2::from_elem((1, 1), c(1.0));
    for ion in &config.ions {
        let d = ion.levels.len();
        let mut single: Operator = Array2::zeros((d, d));
        single[[0, 0]] = c(1.0 - ion.init_error);
        single[[1, 1]] = c(ion.init_error);
        rho = kron(&rho, &single);
    }
    rho
}

/// Deterministic single-trial propagation with explicit draws.
pub fn run_trial(
    config: &EngineConfig,
    timeline: &ProtocolTimeline,
    params: &HeraldParams,
    draws: TrialDraws,
) -> Result<TrialResult> {
    timeline.validate()?;
    let keys = branch_keys(timeline, params)?;
    run_trial_with_keys(config, timeline, params, draws, &keys)
}

fn run_trial_with_keys(
    config: &EngineConfig,
    timeline: &ProtocolTimeline,
    params: &HeraldParams,
    draws: TrialDraws,
    keys: &[BranchKey],
) -> Result<TrialResult> {
    let n_windows = timeline.window_count();
    let n_bins: Vec<usize> = timeline
        .windows
        .iter()
        .map(|w| window_bins(w.duration, params.dt))
        .collect::<Result<_>>()?;
    let max_halfbins = n_bins.iter().map(|&n| 2 * n).max().unwrap_or(2);
    let prop = TrialProp::new(config, draws, params.dt, max_halfbins);

    // Split the segment list at the windows.
    let mut sections: Vec<Vec<Segment>> = vec![Vec::new()];
    for seg in &timeline.segments {
        if matches!(seg, Segment::Window { .. }) {
            sections.push(Vec::new());
        } else {
            sections.last_mut().unwrap().push(seg.clone());
        }
    }
    if sections.len() != n_windows + 1 {
        return Err(Error::InvalidArgument("window markers out of joint".into()));
    }

    let pre_ops = compile_segments(&prop, &sections[0])?;
    let between_ops = if n_windows == 2 {
        Some(compile_segments(&prop, &sections[1])?)
    } else {
        None
    };
    let post_ops = compile_segments(&prop, sections.last().unwrap())?;
    let mut tails: Vec<(super::segment::TailCondition, Vec<TailOp>)> = Vec::new();
    for case in &timeline.tail {
        tails.push((case.condition, compile_segments(&prop, &case.segments)?));
    }
    let tail_for = |t0: f64, t1: Option<f64>| -> &Vec<TailOp> {
        for (cond, ops) in &tails {
            let hit = match cond {
                super::segment::TailCondition::Always => true,
                super::segment::TailCondition::T1LessThanT0 => {
                    t1.map(|t1| t1 < t0).unwrap_or(false)
                }
                super::segment::TailCondition::T1AtLeastT0 => {
                    t1.map(|t1| t1 >= t0).unwrap_or(false)
                }
            };
            if hit {
                return ops;
            }
        }
        &tails.last().expect("non-empty tail").1
    };

    let rho0 = initial_state(config);
    let mut rho = apply_tail(&prop, &rho0, &pre_ops, 0.0, 0.0)?;

    let win_half: Vec<Operator> = (0..prop.n_ions())
        .map(|ion| prop.pows[kind_index(GenKind::Window)][ion][0].clone())
        .collect();
    let step_half = |rho: &Operator| -> Operator {
        let mut out = rho.clone();
        for (ion, u) in win_half.iter().enumerate() {
            out = apply_ion_superop(&out, ion, u, &prop.dims);
        }
        out
    };
    let finish_window = |rho: &Operator, halfbins: usize| -> Operator {
        let mut out = rho.clone();
        for ion in 0..prop.n_ions() {
            let u = prop.power(GenKind::Window, ion, halfbins);
            out = apply_ion_superop(&out, ion, &u, &prop.dims);
        }
        out
    };

    let d: usize = prop.dims.iter().product();
    let zero = || -> Operator { Array2::zeros((d, d)) };
    let mut branches: Vec<Operator> = vec![zero(); keys.len()];
    let mut noise_branches: Vec<Operator> = if config.noise_rate > 0.0 {
        vec![zero(); keys.len()]
    } else {
        Vec::new()
    };

    if n_windows == 1 {
        let n = n_bins[0];
        let tau_h = timeline.windows[0].duration;
        // Step through the window recording jump branches at bin centers.
        let mut centers: Vec<Operator> = Vec::with_capacity(n);
        for _ in 0..n {
            let center = step_half(&rho);
            rho = step_half(&center);
            centers.push(center);
        }
        let noclick_end = rho.clone();

        for (slot, key) in keys.iter().enumerate() {
            let k = key.t0_bin;
            let t0 = (k as f64 + 0.5) * params.dt;
            let mut jumped = zero();
            for mode in &timeline.detection {
                jumped = jumped + apply_jump(&prop, &centers[k], mode, t0, params.dt);
            }
            // Remaining window under no-click conditioning.
            let remaining = 2 * (n - k) - 1;
            let mut state = finish_window(&jumped, remaining);
            state = apply_tail(&prop, &state, &post_ops, t0, 0.0)?;
            state = apply_tail(&prop, &state, tail_for(t0, None), t0, 0.0)?;
            branches[slot] = state;

            if config.noise_rate > 0.0 {
                let mut nstate = apply_tail(&prop, &noclick_end, &post_ops, t0, 0.0)?;
                nstate = apply_tail(&prop, &nstate, tail_for(t0, None), t0, 0.0)?;
                noise_branches[slot] = nstate * c(config.noise_rate * params.dt);
            }
            let _ = tau_h;
        }

        // The no-click state also traverses the remaining timeline; its
        // trace is unchanged there, so record it at the window end.
        let no_click_trace = trace_re(&noclick_end);
        Ok(TrialResult {
            branches,
            noise_branches,
            no_click_trace,
        })
    } else {
        if timeline.detection.len() != 1 {
            return Err(Error::InvalidArgument(
                "two-window timelines support a single detection mode".into(),
            ));
        }
        let mode = &timeline.detection[0];
        let between = between_ops.as_ref().unwrap();
        let (n0, n1) = (n_bins[0], n_bins[1]);

        // Window 1 bin-center states.
        let mut centers0: Vec<Operator> = Vec::with_capacity(n0);
        for _ in 0..n0 {
            let center = step_half(&rho);
            rho = step_half(&center);
            centers0.push(center);
        }
        let noclick_w1 = rho.clone();

        // Fast lookup from (k0, k1) to branch slot.
        use std::collections::HashMap;
        let mut slot_of: HashMap<(usize, usize), usize> = HashMap::new();
        for (slot, key) in keys.iter().enumerate() {
            slot_of.insert((key.t0_bin, key.t1_bin.unwrap()), slot);
        }
        let k1_range = |k0: usize| -> (usize, usize) {
            let w_bins = (0.5 * params.accept / params.dt).ceil() as usize;
            let lo = k0.saturating_sub(w_bins);
            let hi = (k0 + w_bins + 1).min(n1);
            (lo, hi)
        };

        let noise_scale = c(config.noise_rate * params.dt);

        // Signal branches: jump in both windows. Plus ion-then-noise.
        for k0 in 0..n0 {
            let t0 = (k0 as f64 + 0.5) * params.dt;
            let jumped = apply_jump(&prop, &centers0[k0], mode, t0, params.dt);
            if trace_re(&jumped).abs() < 1e-300 {
                continue;
            }
            let survived = finish_window(&jumped, 2 * (n0 - k0) - 1);
            let mut state = apply_tail(&prop, &survived, between, t0, 0.0)?;
            let (lo, hi) = k1_range(k0);
            let mut k1 = 0usize;
            while k1 < hi {
                let center = step_half(&state);
                if k1 >= lo {
                    let t1 = (k1 as f64 + 0.5) * params.dt;
                    if let Some(&slot) = slot_of.get(&(k0, k1)) {
                        let jumped2 = apply_jump(&prop, &center, mode, t1, params.dt);
                        let survived2 = finish_window(&jumped2, 2 * (n1 - k1) - 1);
                        let mut out = apply_tail(&prop, &survived2, &post_ops, t0, t1)?;
                        out = apply_tail(&prop, &out, tail_for(t0, Some(t1)), t0, t1)?;
                        branches[slot] = out;
                    }
                }
                state = step_half(&center);
                k1 += 1;
            }
            if config.noise_rate > 0.0 {
                // Ion photon in round 1, noise count at t1 in round 2: the
                // round-2 no-click state, weighted R dt.
                let noclick_w2 = finish_window(&state, 2 * (n1 - hi));
                for k1 in 0..n1 {
                    let t1 = (k1 as f64 + 0.5) * params.dt;
                    if let Some(&slot) = slot_of.get(&(k0, k1)) {
                        let mut out = apply_tail(&prop, &noclick_w2, &post_ops, t0, t1)?;
                        out = apply_tail(&prop, &out, tail_for(t0, Some(t1)), t0, t1)?;
                        noise_branches[slot] = &noise_branches[slot] + &(out * noise_scale);
                    }
                }
            }
        }

        // Noise count in round 1, ion photon in round 2.
        if config.noise_rate > 0.0 {
            let mut state = apply_tail(&prop, &noclick_w1, between, 0.0, 0.0)?;
            let mut centers1: Vec<Operator> = Vec::with_capacity(n1);
            for _ in 0..n1 {
                let center = step_half(&state);
                state = step_half(&center);
                centers1.push(center);
            }
            for (slot, key) in keys.iter().enumerate() {
                let (k0, k1) = (key.t0_bin, key.t1_bin.unwrap());
                let t0 = (k0 as f64 + 0.5) * params.dt;
                let t1 = (k1 as f64 + 0.5) * params.dt;
                let jumped2 = apply_jump(&prop, &centers1[k1], mode, t1, params.dt);
                let survived2 = finish_window(&jumped2, 2 * (n1 - k1) - 1);
                let mut out = apply_tail(&prop, &survived2, &post_ops, t0, t1)?;
                out = apply_tail(&prop, &out, tail_for(t0, Some(t1)), t0, t1)?;
                noise_branches[slot] = &noise_branches[slot] + &(out * noise_scale);
            }
            // Double noise counts are O((R dt)^2) and are neglected.
        }

        let no_click_trace = trace_re(&noclick_w1);
        Ok(TrialResult {
            branches,
            noise_branches,
            no_click_trace,
        })
    }
}

/// Monte Carlo ensemble over quasi-static draws.
///
/// Trials run under a parallel-map contract with per-trial RNG streams and
/// a fixed-partition pairwise-tree reduction, so results are bit-identical
/// for a given seed regardless of worker count.
pub fn herald_ensemble<F>(
    config: &EngineConfig,
    timeline: &ProtocolTimeline,
    params: &HeraldParams,
    observer: F,
) -> Result<HeraldedEnsemble>
where
    F: Fn(&TrialResult) -> Vec<f64> + Sync,
{
    timeline.validate()?;
    if params.trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let keys = branch_keys(timeline, params)?;

    const CHUNKS: usize = 16;
    let trials = params.trials;
    let chunk_bounds: Vec<(usize, usize)> = (0..CHUNKS)
        .map(|ci| {
            let lo = ci * trials / CHUNKS;
            let hi = (ci + 1) * trials / CHUNKS;
            (lo, hi)
        })
        .filter(|(lo, hi)| hi > lo)
        .collect();

    struct ChunkAccum {
        branches: Vec<Operator>,
        noise: Vec<Operator>,
        noclick: f64,
        observables: Vec<(usize, Vec<f64>)>,
        error: Option<String>,
    }

    let d = config.dim();
    let chunk_results: Vec<ChunkAccum> = chunk_bounds
        .par_iter()
        .map(|&(lo, hi)| {
            let zero = || -> Operator { Array2::zeros((d, d)) };
            let mut acc = ChunkAccum {
                branches: vec![zero(); keys.len()],
                noise: vec![zero(); keys.len()],
                noclick: 0.0,
                observables: Vec::with_capacity(hi - lo),
                error: None,
            };
            for trial in lo..hi {
                let mut rng = trial_rng(params.seed, trial as u64);
                let draws = sample_draws(config, &mut rng);
                match run_trial_with_keys(config, timeline, params, draws, &keys) {
                    Ok(res) => {
                        for (a, b) in acc.branches.iter_mut().zip(&res.branches) {
                            *a = &*a + b;
                        }
                        if !res.noise_branches.is_empty() {
                            for (a, b) in acc.noise.iter_mut().zip(&res.noise_branches) {
                                *a = &*a + b;
                            }
                        }
                        acc.noclick += res.no_click_trace;
                        acc.observables.push((trial, observer(&res)));
                    }
                    Err(e) => {
                        acc.error.get_or_insert(e.to_string());
                        break;
                    }
                }
            }
            acc
        })
        .collect();

    for chunk in &chunk_results {
        if let Some(e) = &chunk.error {
            return Err(Error::InvalidArgument(format!("trial failed: {e}")));
        }
    }

    let mut branch_parts = Vec::new();
    let mut noise_parts = Vec::new();
    let mut noclick = 0.0;
    let mut obs: Vec<(usize, Vec<f64>)> = Vec::with_capacity(trials);
    for chunk in chunk_results {
        branch_parts.push(chunk.branches);
        noise_parts.push(chunk.noise);
        noclick += chunk.noclick;
        obs.extend(chunk.observables);
    }
    obs.sort_by_key(|(t, _)| *t);

    let mut branches = tree_merge(branch_parts);
    let mut noise = tree_merge(noise_parts);
    let inv = 1.0 / trials as f64;
    scale_set(&mut branches, inv);
    scale_set(&mut noise, inv);
    if config.noise_rate == 0.0 {
        noise.clear();
    }

    let n_obs = obs.first().map(|(_, v)| v.len()).unwrap_or(0);
    let mut observable_samples: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); n_obs];
    for (_, vals) in &obs {
        for (i, v) in vals.iter().enumerate() {
            observable_samples[i].push(*v);
        }
    }

    let mut warnings = Vec::new();
    if let (Some(tol), Some(first)) = (params.se_tolerance, observable_samples.first()) {
        let stat = super::ensemble::ScalarStat::from_samples(first);
        if stat.std_err > tol {
            warnings.push(format!(
                "standard error {:.3e} of the first observable exceeds the requested tolerance {:.3e}; increase trials",
                stat.std_err, tol
            ));
        }
    }

    Ok(HeraldedEnsemble {
        dims: config.dims(),
        dt: params.dt,
        windows: timeline.windows.iter().map(|w| w.duration).collect(),
        accept: params.accept,
        trials,
        keys,
        branches,
        noise_branches: noise,
        no_click_trace: noclick * inv,
        observable_samples,
        warnings,
    })
}

/// Average an arbitrary per-trial evaluator; thin wrapper kept for callers
/// that build their own branch sets.
pub fn monte_carlo_average<F>(
    config: &EngineConfig,
    timeline: &ProtocolTimeline,
    params: &HeraldParams,
    observer: F,
) -> Result<HeraldedEnsemble>
where
    F: Fn(&TrialResult) -> Vec<f64> + Sync,
{
    herald_ensemble(config, timeline, params, observer)
}
