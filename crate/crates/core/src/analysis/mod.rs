//! Closed-form models, fitters and budget calculators: coherence envelopes
//! for the heralding variants, Hong-Ou-Mandel interference, spectral
//! diffusion fits, rate and error budgets, and repeater timing.

mod aux;
mod budget;
mod echo;
mod envelopes;
mod hom;
mod lm;
mod rates;
mod repeater;
mod special;

pub use aux::{aux_accumulated_population, aux_fidelity_bound, aux_population};
pub use budget::{dominant_removed_fidelity, error_budget, ErrorBudgetRow, ErrorSource};
pub use echo::{delayed_echo_model, fit_correlation_time, t2o_star_from_b, EchoFit};
pub use envelopes::{
    long_range_coherence, phase_noise_fidelity_bound, precompensated_envelope,
    ramsey_envelope, ramsey_gaussian_timescale, rephased_envelope, window_averaged_erf_form,
    CoherenceCurve, CoherenceModel, EnvelopeParams, LongRangeCoherence,
};
pub use hom::{hom_coincidence, hom_model, hom_visibility, HomParams, HomResult};
pub use lm::{levenberg_marquardt, LmOutcome, LmProblem};
pub use rates::{
    heralding_rate, paper_attempt_steps, paper_device1_chain, rate_budget, RateBudget,
};
pub use repeater::{repeater_time, RepeaterConfig, RepeaterScheme};
pub use special::{erf, erfc, erfcx};
