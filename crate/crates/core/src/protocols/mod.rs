//! The experiments of the artifact expressed as protocol timelines with
//! their feedforward laws and stage-resolved outputs.

mod alphas;
mod bell;
mod detuned;
mod multiplexed;
mod result;
mod same_device;
pub mod support;
mod teleport;
mod two_photon;
mod wstate;

pub use alphas::{alpha_grid, balance_ratio, optimize_alphas, AlphaSettings, OptimizerReport};
pub use bell::{
    bell_error_budget, bell_fidelity_with_toggles, bell_timeline, single_photon_bell, BellConfig,
    BellStage,
};
pub use detuned::{detuned_qubit_population, DetunedSequence};
pub use multiplexed::{multiplexed_pairs, MultiplexedConfig, MultiplexedResult, PairConfig};
pub use result::{FidelityPoint, ProtocolResult, StageCurve};
pub use same_device::{
    ac_required_rabi_sq, ac_stark_phase_exact, ac_stark_phase_formula, same_device_bell,
    same_device_timeline, SameDeviceConfig,
};
pub use teleport::{teleport, teleport_cardinal_states, TeleportConfig, TeleportOutcome};
pub use two_photon::{two_photon_bell, two_photon_timeline, TwoPhotonConfig};
pub use wstate::{
    w_state_protocol, wstate_precompensation_spectrum, wstate_timeline, WStateConfig,
};
