//! Conditional stochastic master-equation engine.
//!
//! No-jump evolution conditioned on the absence of a detector click,
//! photon-detection quantum jumps on a discrete time grid, a noise-count
//! branch, and Monte Carlo ensemble averaging over quasi-static
//! transition-frequency draws.
//!
//! Every generator in a protocol timeline acts on one ion at a time (the
//! ions only meet in the jump operator), so segment propagators factorize
//! into per-ion superoperator exponentials applied as tensor contractions.
//! That keeps a 300-trial, 290-branch ensemble at desk scale.

mod engine;
mod ensemble;
mod liouville;
mod segment;

pub use engine::{
    branch_keys, herald_ensemble, monte_carlo_average, run_trial, EngineConfig, EngineIon,
    HeraldParams, TrialDraws,
};
pub use ensemble::{BranchKey, HeraldedEnsemble, ScalarStat, TrialResult};
pub use liouville::{
    apply_ion_superop, build_ion_liouvillian, DecayContext, DriveTerm, IonOps, IonRates,
};
pub use segment::{
    ArmSpec, DetectionMode, GateOp, IonDrive, IonGate, PhaseExpr, ProtocolTimeline, Segment,
    SegmentClass, TailCase, TailCondition, TimeExpr, WindowSpec,
};
