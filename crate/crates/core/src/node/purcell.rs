//! Purcell-rate arithmetic for a cavity-coupled emitter.

use super::CavityParameters;
use crate::Result;

/// Derived cavity-QED rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurcellRates {
    /// Cavity-enhanced decay rate 4 g^2 / kappa (1/us).
    pub gamma_cav: f64,
    /// Purcell enhancement factor 4 g^2 / (kappa Gamma).
    pub purcell_factor: f64,
    /// Total enhanced lifetime 1 / (gamma_cav + Gamma) (us).
    pub enhanced_lifetime: f64,
}

pub fn purcell_rates(cav: &CavityParameters) -> Result<PurcellRates> {
    cav.validate()?;
    let gamma_cav = 4.0 * cav.g * cav.g / cav.kappa;
    Ok(PurcellRates {
        gamma_cav,
        purcell_factor: gamma_cav / cav.gamma_free,
        enhanced_lifetime: 1.0 / (gamma_cav + cav.gamma_free),
    })
}
