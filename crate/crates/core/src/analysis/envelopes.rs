//! Ensemble-averaged entangled-state coherence for the three heralding
//! variants, the long-range spectral-diffusion limit, and the path-phase
//! fidelity bound.

use super::special::{erf, erfcx};
use serde::Serialize;

/// Which closed-form model produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoherenceModel {
    Ramsey,
    Precompensated,
    Rephased,
    Hom,
    DelayedEcho,
    LongRange,
}

/// Tabulated real coherence values on a time grid.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceCurve {
    pub model: CoherenceModel,
    /// us
    pub time: Vec<f64>,
    /// dimensionless, |value| <= 1
    pub value: Vec<f64>,
}

/// Pairwise inputs for the coherence envelopes (internal units).
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeParams {
    /// Mean optical frequency difference <dw12> (rad/us).
    pub mean_optical_diff: f64,
    /// Static drive-frequency difference dw~12 (rad/us).
    pub drive_diff: f64,
    /// Optical linewidths (rad/us).
    pub gamma_star: [f64; 2],
    /// Optical lifetimes (us).
    pub t1_opt: [f64; 2],
    /// Qubit Ramsey coherence times (us).
    pub t2_spin_star: [f64; 2],
    /// Heralding window duration (us).
    pub tau_h: f64,
}

impl EnvelopeParams {
    fn gamma_sq_sum(&self) -> f64 {
        self.gamma_star[0].powi(2) + self.gamma_star[1].powi(2)
    }

    fn spin_factor(&self, duration: f64) -> f64 {
        let inv = self.t2_spin_star[0].powi(-2) + self.t2_spin_star[1].powi(-2);
        (-duration * duration * inv).exp()
    }

    /// Combined half-lifetime decay rate 1/(2 T1o1) + 1/(2 T1o2) (1/us).
    pub fn rephased_rate(&self) -> f64 {
        0.5 / self.t1_opt[0] + 0.5 / self.t1_opt[1]
    }
}

/// Ramsey heralding coherence:
/// cos(<dw12> t0) exp(-t0^2 (g1*^2+g2*^2)/2) exp(-tau_h^2 (T2s*^-2 sum)).
pub fn ramsey_envelope(t0: f64, params: &EnvelopeParams) -> f64 {
    (params.mean_optical_diff * t0).cos()
        * (-0.5 * t0 * t0 * params.gamma_sq_sum()).exp()
        * params.spin_factor(params.tau_h)
}

/// Precompensated heralding coherence, maximal at t0 = tau0. The phase
/// offset (mean_diff - drive_diff) * tau0 vanishes when the drives match
/// the static ion frequency difference.
pub fn precompensated_envelope(t0: f64, tau0: f64, params: &EnvelopeParams) -> f64 {
    let phi = (params.mean_optical_diff - params.drive_diff) * tau0;
    (params.mean_optical_diff * t0 - phi).cos()
        * (-0.5 * (t0 - tau0).powi(2) * params.gamma_sq_sum()).exp()
        * params.spin_factor(params.tau_h - tau0)
}

/// Dynamically rephased coherence: lifetime-limited exponential envelope
/// oscillating at the static drive difference.
pub fn rephased_envelope(t0: f64, params: &EnvelopeParams) -> f64 {
    (params.drive_diff * t0).cos() * (-t0 * params.rephased_rate()).exp()
}

/// Window-averaged coherence after a heralding-to-rephasing delay L/c over
/// which the optical frequencies partially decorrelate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LongRangeCoherence {
    /// Window-averaged coherence including lifetime decay.
    pub coherence: f64,
    /// The same average with no spectral diffusion (L = 0 limit).
    pub lifetime_baseline: f64,
    /// coherence / lifetime_baseline: the multiplicative penalty caused by
    /// spectral diffusion alone.
    pub diffusion_factor: f64,
    /// Effective diffusion width Gamma (rad/us).
    pub gamma_eff: f64,
}

/// Evaluate the long-range erf closed form.
///
/// `link_length_km` and `light_speed_km_per_ms` set the heralding-to-
/// rephasing delay L/c; `tau_c` is the spectral-diffusion correlation time
/// (us); `tau_a` the acceptance window (us). Computed with scaled-
/// complementary error functions so small Gamma never overflows, with a
/// series fallback at Gamma*tau_a below 1e-8.
pub fn long_range_coherence(
    link_length_km: f64,
    light_speed_km_per_ms: f64,
    tau_c: f64,
    gamma_star: [f64; 2],
    t1_opt: [f64; 2],
    tau_a: f64,
) -> LongRangeCoherence {
    let delay = if link_length_km.is_infinite() {
        f64::INFINITY
    } else {
        link_length_km / light_speed_km_per_ms * 1e3
    };
    let decorrelated = if delay.is_infinite() {
        1.0
    } else {
        1.0 - (-delay / tau_c).exp()
    };
    let gamma_sq = (gamma_star[0].powi(2) + gamma_star[1].powi(2)) * decorrelated;
    let gamma = gamma_sq.sqrt();
    let mean_rate = 0.5 / t1_opt[0] + 0.5 / t1_opt[1];
    let tbar = 1.0 / mean_rate;

    let lifetime_baseline = (tbar / tau_a) * (1.0 - (-tau_a / tbar).exp());
    let coherence = window_averaged(gamma, tbar, tau_a);
    LongRangeCoherence {
        coherence,
        lifetime_baseline,
        diffusion_factor: coherence / lifetime_baseline,
        gamma_eff: gamma,
    }
}

/// (1/tau_a) Int_0^tau_a exp(-G^2 t^2) exp(-t/Tbar) dt.
fn window_averaged(gamma: f64, tbar: f64, tau_a: f64) -> f64 {
    let x = gamma * tau_a;
    if x < 1e-8 {
        return series_fallback(gamma, tbar, tau_a);
    }
    let delta = 1.0 / (2.0 * gamma * tbar);
    // exp(delta^2) [erf(x+delta) - erf(delta)]
    //   = erfcx(delta) - exp(-x(x+2 delta)) erfcx(x+delta).
    let bracket = erfcx(delta) - (-x * (x + 2.0 * delta)).exp() * erfcx(x + delta);
    (std::f64::consts::PI.sqrt() / (2.0 * x)) * bracket
}

/// Series in Gamma^2: expand exp(-G^2 t^2) and integrate the exponential
/// moments analytically via the recursion M_k = Int t^k e^{-t/T} dt.
fn series_fallback(gamma: f64, tbar: f64, tau_a: f64) -> f64 {
    let e = (-tau_a / tbar).exp();
    // M_k = Int_0^tau_a t^k exp(-t/tbar) dt, k even up to 8.
    let mut moments = [0.0f64; 9];
    moments[0] = tbar * (1.0 - e);
    for k in 1..=8 {
        moments[k] = -tau_a.powi(k as i32) * tbar * e + (k as f64) * tbar * moments[k - 1];
    }
    let g2 = gamma * gamma;
    let mut sum = 0.0;
    let mut coeff = 1.0;
    for k in 0..=4 {
        sum += coeff * moments[2 * k];
        coeff *= -g2 / ((k + 1) as f64);
    }
    sum / tau_a
}

/// Upper bound on Bell fidelity from Gaussian path-phase jitter:
/// F_max = (1 + exp(-sigma^2/2)) / 2.
pub fn phase_noise_fidelity_bound(sigma_phi: f64) -> f64 {
    0.5 * (1.0 + (-0.5 * sigma_phi * sigma_phi).exp())
}

/// 1/e timescale of the Ramsey Gaussian factor, sqrt(2/(g1*^2+g2*^2)) (us).
pub fn ramsey_gaussian_timescale(gamma_star: [f64; 2]) -> f64 {
    (2.0 / (gamma_star[0].powi(2) + gamma_star[1].powi(2))).sqrt()
}

/// Direct erf evaluation of the window average, for cross-checking the
/// scaled-complementary form where exp(delta^2) stays representable.
pub fn window_averaged_erf_form(gamma: f64, tbar: f64, tau_a: f64) -> f64 {
    let x = gamma * tau_a;
    let delta = 1.0 / (2.0 * gamma * tbar);
    (std::f64::consts::PI.sqrt() / (2.0 * x))
        * (delta * delta).exp()
        * (erf(x + delta) - erf(delta))
}
