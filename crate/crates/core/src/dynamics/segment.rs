//! Declarative protocol timelines: ordered segments, feedforward time
//! expressions and detection-mode specifications.

use serde::Serialize;

/// Duration (us) possibly depending on the detected times t0 / t1.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum TimeExpr {
    Const(f64),
    /// base + t0_coeff * t0 + t1_coeff * t1.
    Linear {
        base: f64,
        t0_coeff: f64,
        t1_coeff: f64,
    },
}

impl TimeExpr {
    pub fn eval(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            TimeExpr::Const(v) => v,
            TimeExpr::Linear {
                base,
                t0_coeff,
                t1_coeff,
            } => base + t0_coeff * t0 + t1_coeff * t1,
        }
    }
}

/// Phase angle (rad) possibly depending on the detected times.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum PhaseExpr {
    Const(f64),
    /// base + t0_coeff * t0 + t1_coeff * t1 (coefficients in rad/us).
    Linear {
        base: f64,
        t0_coeff: f64,
        t1_coeff: f64,
    },
}

impl PhaseExpr {
    pub fn eval(&self, t0: f64, t1: f64) -> f64 {
        match *self {
            PhaseExpr::Const(v) => v,
            PhaseExpr::Linear {
                base,
                t0_coeff,
                t1_coeff,
            } => base + t0_coeff * t0 + t1_coeff * t1,
        }
    }
}

/// Instantaneous single-ion operations.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum GateOp {
    /// Rotation in the qubit {|0>,|1>} subspace about the in-plane axis at
    /// `axis_phase` by `angle`.
    QubitRotation { axis_phase: f64, angle: f64 },
    /// Ideal |1> <-> |e> population swap (instantaneous optical pi).
    OpticalPi,
    /// Ideal |e> <-> |1e> swap (excited-state spin pi).
    FePi,
    /// Phase exp(-i angle) on |1> (qubit Z rotation by `angle`).
    ZPhase { angle: PhaseExpr },
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IonGate {
    pub ion: usize,
    pub op: GateOp,
}

/// Finite-duration coherent drive on one ion.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IonDrive {
    pub ion: usize,
    /// Rabi frequency (rad/us).
    pub rabi: f64,
    /// In-plane axis for qubit drives (ignored for optical).
    pub axis_phase: f64,
    pub optical: bool,
    /// Extra static detuning of the drive relative to the ion's frame
    /// (rad/us), e.g. for deliberately off-resonant microwave pulses.
    pub extra_detuning: f64,
}

/// Segment classes that interact with the error toggles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentClass {
    Generic,
    /// The optical-rephasing wait where population sits in |e>; undetected
    /// emission here is the toggleable coherence killer.
    RephasingWait,
}

#[derive(Debug, Clone, Serialize)]
pub enum Segment {
    /// Instantaneous gates; when `nominal_duration` > 0 and qubit gate
    /// errors are enabled, free decay over that duration is attached.
    Unitary {
        gates: Vec<IonGate>,
        nominal_duration: f64,
    },
    /// Simultaneous square drive pulses.
    Drive {
        drives: Vec<IonDrive>,
        duration: f64,
    },
    Wait {
        duration: TimeExpr,
        class: SegmentClass,
    },
    /// Heralding window; index into the timeline's window list.
    Window { index: usize },
}

/// One arm of a detection mode: which ion feeds the detector and with what
/// time-dependent phase.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ArmSpec {
    pub ion: usize,
    /// Relative amplitude (1 for equal arms).
    pub weight: f64,
    /// Drive-frequency offset of this arm relative to the reference arm
    /// (rad/us); the jump amplitude carries exp(-i slope t0).
    pub drive_offset_slope: f64,
    /// Whether this arm picks up the optical path phase difference.
    pub path_phase: bool,
    /// Extra static sign/phase of the arm (rad), e.g. the minus port of a
    /// two-detector setup.
    pub static_phase: f64,
}

/// A detection mode: a coherent combination of emitter arms, plus the
/// conditional single-qubit correction applied when this mode fires.
#[derive(Debug, Clone, Serialize)]
pub struct DetectionMode {
    pub arms: Vec<ArmSpec>,
    /// Relative probability weight of the mode (modes are summed).
    pub weight: f64,
    /// Conditional Z correction (ion, angle) applied right after the jump.
    pub z_correction: Option<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct WindowSpec {
    /// Heralding window duration tau_h (us).
    pub duration: f64,
}

/// Condition selecting a tail variant for multi-window protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailCondition {
    Always,
    /// Second detection earlier within its window than the first (t1 < t0).
    T1LessThanT0,
    /// t1 >= t0.
    T1AtLeastT0,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCase {
    pub condition: TailCondition,
    pub segments: Vec<Segment>,
}

/// Ordered segments describing one experiment on a fixed ion set.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolTimeline {
    /// Segments in order; `Segment::Window { index }` marks heralding
    /// windows referencing `windows`.
    pub segments: Vec<Segment>,
    pub windows: Vec<WindowSpec>,
    /// Detection modes shared by all windows.
    pub detection: Vec<DetectionMode>,
    /// Case-split tail applied after the final segment, with feedforward
    /// expressions evaluated per branch.
    pub tail: Vec<TailCase>,
}

impl ProtocolTimeline {
    pub fn window_count(&self) -> usize {
        self.windows.len()
    }

    /// Validate structural invariants: window indices exist and appear in
    /// order, tail conditions cover every branch.
    pub fn validate(&self) -> crate::Result<()> {
        let mut seen = 0usize;
        for seg in &self.segments {
            if let Segment::Window { index } = seg {
                if *index != seen {
                    return Err(crate::Error::Invariant {
                        field: "ProtocolTimeline.segments".into(),
                        msg: "heralding windows must appear in declaration order".into(),
                    });
                }
                seen += 1;
            }
        }
        if seen != self.windows.len() {
            return Err(crate::Error::Invariant {
                field: "ProtocolTimeline.windows".into(),
                msg: format!("{} windows declared, {} placed", self.windows.len(), seen),
            });
        }
        if self.windows.is_empty() || self.windows.len() > 2 {
            return Err(crate::Error::InvalidArgument(
                "timelines support exactly one or two heralding windows".into(),
            ));
        }
        if self.tail.is_empty() {
            return Err(crate::Error::InvalidArgument("timeline tail must not be empty".into()));
        }
        Ok(())
    }

    pub fn tail_for(&self, t0: f64, t1: Option<f64>) -> &[Segment] {
        for case in &self.tail {
            let hit = match case.condition {
                TailCondition::Always => true,
                TailCondition::T1LessThanT0 => t1.map(|t1| t1 < t0).unwrap_or(false),
                TailCondition::T1AtLeastT0 => t1.map(|t1| t1 >= t0).unwrap_or(false),
            };
            if hit {
                return &case.segments;
            }
        }
        &[]
    }
}
