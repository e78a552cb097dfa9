//! Protocol outputs: stage-resolved parity curves, fidelity/rate tables
//! and the heralded ensemble they derive from.

use crate::dynamics::{HeraldedEnsemble, ScalarStat};
use crate::{Error, Result};
use serde::Serialize;

/// Parity expectation values correlated with the photon detection time.
#[derive(Debug, Clone, Serialize)]
pub struct StageCurve {
    /// Protocol stage: 1 = heralded, 2 = rephased, 3 = phase-compensated.
    pub stage: u8,
    /// Bin-center detection times (us).
    pub t0: Vec<f64>,
    pub xx: Vec<f64>,
    pub yy: Vec<f64>,
    pub zz: Vec<f64>,
    /// Branch weight (detection probability) per bin.
    pub weight: Vec<f64>,
}

/// One acceptance-window point of the fidelity/rate trade-off.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FidelityPoint {
    /// Window size (us).
    pub window: f64,
    pub fidelity: f64,
    pub success_probability: f64,
    /// Heralding rate (Hz).
    pub rate_hz: f64,
}

/// Result of one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub ensemble: HeraldedEnsemble,
    pub stages: Vec<StageCurve>,
    pub window_table: Vec<FidelityPoint>,
    /// Fidelity at the configured acceptance window, with Monte Carlo
    /// standard error.
    pub fidelity: ScalarStat,
    pub success_probability: f64,
    /// Heralding rate at the configured window (Hz).
    pub rate_hz: f64,
    /// Human-readable target state label.
    pub target: String,
}

impl ProtocolResult {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.fidelity.mean) {
            return Err(Error::Invariant {
                field: "ProtocolResult.fidelity".into(),
                msg: format!("{} out of [0,1]", self.fidelity.mean),
            });
        }
        if self.rate_hz < 0.0 {
            return Err(Error::Invariant {
                field: "ProtocolResult.rate_hz".into(),
                msg: "negative rate".into(),
            });
        }
        let mut prev = f64::NEG_INFINITY;
        for point in &self.window_table {
            if point.rate_hz + 1e-12 < prev {
                return Err(Error::Invariant {
                    field: "ProtocolResult.window_table".into(),
                    msg: "rate must be monotone in the window size".into(),
                });
            }
            prev = point.rate_hz;
        }
        Ok(())
    }
}
