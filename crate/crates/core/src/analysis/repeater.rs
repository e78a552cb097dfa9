//! Multiplexed repeater-chain timing for the two proposed schemes.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepeaterScheme {
    /// Alternating-link establishment; memory holds for the full build-up.
    One,
    /// Parallel inter-node links plus probabilistic intra-node connection.
    Two,
}

/// Chain geometry and success parameters.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RepeaterConfig {
    /// End-to-end length L (km).
    pub total_length_km: f64,
    /// Number of halvings n; the chain has 2^n elementary links.
    pub halvings: u32,
    /// Multiplexing width N (ions per node).
    pub multiplex_width: u32,
    /// Entanglement success probability per inter-node attempt.
    pub p_link: f64,
    /// Time per intra-node entanglement attempt (us). Scheme 2 only.
    pub tau_intra_us: f64,
    /// Intra-node entanglement success probability. Scheme 2 only.
    pub p_intra: f64,
    /// Speed of light in fibre (km/ms).
    pub light_speed_km_per_ms: f64,
}

impl RepeaterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.total_length_km <= 0.0
            || self.multiplex_width == 0
            || self.tau_intra_us < 0.0
            || self.light_speed_km_per_ms <= 0.0
        {
            return Err(Error::Invariant {
                field: "RepeaterConfig".into(),
                msg: "lengths, widths and speeds must be positive".into(),
            });
        }
        for (name, p) in [("p_link", self.p_link), ("p_intra", self.p_intra)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Invariant {
                    field: format!("RepeaterConfig.{name}"),
                    msg: format!("probability out of (0,1]: {p}"),
                });
            }
        }
        Ok(())
    }
}

/// Average time (ms) to establish an end-to-end entanglement link.
///
/// Scheme 1: 2L / (c 2^n N p_link). Scheme 2 adds tau_int / p_int for the
/// intra-node connection step.
pub fn repeater_time(config: &RepeaterConfig, scheme: RepeaterScheme) -> Result<f64> {
    config.validate()?;
    let links = (1u64 << config.halvings) as f64;
    let base = 2.0 * config.total_length_km
        / (config.light_speed_km_per_ms * links * config.multiplex_width as f64 * config.p_link);
    Ok(match scheme {
        RepeaterScheme::One => base,
        RepeaterScheme::Two => base + (config.tau_intra_us * 1e-3) / config.p_intra,
    })
}
