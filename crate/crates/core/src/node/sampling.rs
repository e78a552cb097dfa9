//! Quasi-static (shot-to-shot) transition-frequency sampling.
//!
//! Transition frequencies decorrelate on millisecond timescales, far longer
//! than one heralding attempt, so each Monte Carlo trial draws one static
//! offset per transition. RNG streams are split per trial from a root seed
//! so trials are independent and the ensemble is reproducible under any
//! parallel schedule.

use super::IonParameters;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// One trial's static frequency offsets for a single ion (rad/us).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiStaticDraw {
    pub optical_detuning: f64,
    pub qubit_detuning: f64,
}

/// Counter-based per-trial stream derived from a root seed.
pub fn trial_rng(root_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
    rng.set_stream(trial);
    rng
}

/// Draw optical ~ N(mean offset, gamma*) and qubit ~ N(mean offset, sigma_q)
/// with sigma_q = sqrt(2)/T2,s*.
pub fn sample_quasi_static(
    params: &IonParameters,
    t2_spin_star: f64,
    rng: &mut ChaCha8Rng,
) -> QuasiStaticDraw {
    let opt = gaussian(params.optical_offset, params.gamma_star, rng);
    let sigma_q = std::f64::consts::SQRT_2 / t2_spin_star;
    let qub = gaussian(params.qubit_offset, sigma_q, rng);
    QuasiStaticDraw {
        optical_detuning: opt,
        qubit_detuning: qub,
    }
}

fn gaussian(mean: f64, std: f64, rng: &mut ChaCha8Rng) -> f64 {
    if std == 0.0 {
        return mean;
    }
    Normal::new(mean, std).expect("finite std").sample(rng)
}
