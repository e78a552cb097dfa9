//! Error-budget ablations: fidelity with one source removed and with one
//! source exclusively present.

use crate::node::ErrorToggles;
use crate::Result;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ErrorSource {
    UndetectedRephasingEmission,
    NoiseCounts,
    OpticalGateErrors,
    QubitInitialization,
    QubitGateErrors,
    LifetimeMismatch,
    QubitT1T2,
    PathPhase,
}

impl ErrorSource {
    pub const ALL: [ErrorSource; 8] = [
        ErrorSource::UndetectedRephasingEmission,
        ErrorSource::NoiseCounts,
        ErrorSource::OpticalGateErrors,
        ErrorSource::QubitInitialization,
        ErrorSource::QubitGateErrors,
        ErrorSource::LifetimeMismatch,
        ErrorSource::QubitT1T2,
        ErrorSource::PathPhase,
    ];

    /// The three dominant sources identified by the fidelity analysis.
    pub const DOMINANT: [ErrorSource; 3] = [
        ErrorSource::UndetectedRephasingEmission,
        ErrorSource::NoiseCounts,
        ErrorSource::OpticalGateErrors,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ErrorSource::UndetectedRephasingEmission => "undetected_rephasing_emission",
            ErrorSource::NoiseCounts => "noise_counts",
            ErrorSource::OpticalGateErrors => "optical_gate_errors",
            ErrorSource::QubitInitialization => "qubit_initialization",
            ErrorSource::QubitGateErrors => "qubit_gate_errors",
            ErrorSource::LifetimeMismatch => "lifetime_mismatch",
            ErrorSource::QubitT1T2 => "qubit_t1_t2",
            ErrorSource::PathPhase => "path_phase",
        }
    }

    pub fn set(&self, toggles: &mut ErrorToggles, on: bool) {
        match self {
            ErrorSource::UndetectedRephasingEmission => {
                toggles.undetected_rephasing_emission = on
            }
            ErrorSource::NoiseCounts => toggles.noise_counts = on,
            ErrorSource::OpticalGateErrors => toggles.optical_gate_error = on,
            ErrorSource::QubitInitialization => toggles.init_error = on,
            ErrorSource::QubitGateErrors => toggles.qubit_gate_error = on,
            ErrorSource::LifetimeMismatch => toggles.lifetime_mismatch = on,
            ErrorSource::QubitT1T2 => toggles.qubit_t1t2 = on,
            ErrorSource::PathPhase => toggles.path_phase = on,
        }
    }
}

/// One ablation row.
#[derive(Debug, Clone, Serialize)]
pub struct ErrorBudgetRow {
    pub source: String,
    pub fidelity_removed: f64,
    pub fidelity_exclusive: f64,
}

/// Run the ablation table over an arbitrary fidelity evaluator.
///
/// `evaluate(toggles, reoptimize_alphas)` simulates the protocol with the
/// given error sources enabled. Removed rows keep the baseline drive
/// amplitudes (their optimum is degenerate once noise counts vanish);
/// exclusive rows re-optimize because the noise/double-excitation balance
/// shifts.
pub fn error_budget<F>(mut evaluate: F) -> Result<Vec<ErrorBudgetRow>>
where
    F: FnMut(ErrorToggles, bool) -> Result<f64>,
{
    let mut rows = Vec::new();
    for source in ErrorSource::ALL {
        let mut removed = ErrorToggles::default();
        source.set(&mut removed, false);
        let f_removed = evaluate(removed, false)?;

        let mut exclusive = ErrorToggles::all_off();
        source.set(&mut exclusive, true);
        let f_exclusive = evaluate(exclusive, true)?;

        rows.push(ErrorBudgetRow {
            source: source.label().to_string(),
            fidelity_removed: f_removed,
            fidelity_exclusive: f_exclusive,
        });
    }
    Ok(rows)
}

/// Fidelity with the three dominant sources removed.
pub fn dominant_removed_fidelity<F>(mut evaluate: F) -> Result<f64>
where
    F: FnMut(ErrorToggles, bool) -> Result<f64>,
{
    let mut toggles = ErrorToggles::default();
    for source in ErrorSource::DOMINANT {
        source.set(&mut toggles, false);
    }
    evaluate(toggles, false)
}
