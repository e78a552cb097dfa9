//! Auxiliary-state population estimate and the post-selection fidelity
//! bound it implies.

/// P_aux from the initialized/thermalized photon-count ratio and the
/// Boltzmann weights of the two aux levels:
/// P_aux = 1 - (N_init/N_therm) (b0 + b1) / (2 + b0 + b1),
/// with b_k = exp(-hbar w_k / k_B T).
///
/// `omega_0_aux` and `omega_1_aux` are the |0>/<->|aux> and |1><->|aux>
/// transition frequencies (rad/us); `temperature_k` in kelvin.
pub fn aux_population(
    n_init: f64,
    n_therm: f64,
    omega_0_aux: f64,
    omega_1_aux: f64,
    temperature_k: f64,
) -> f64 {
    // hbar/k_B in kelvin per (rad/us): 7.6382e-12 K s = 7.6382e-6 K us.
    const HBAR_OVER_KB_K_US: f64 = 7.638_232_6e-6;
    let b0 = (-HBAR_OVER_KB_K_US * omega_0_aux / temperature_k).exp();
    let b1 = (-HBAR_OVER_KB_K_US * omega_1_aux / temperature_k).exp();
    1.0 - (n_init / n_therm) * (b0 + b1) / (2.0 + b0 + b1)
}

/// Linear shelving accumulation over a re-initialization cycle: starting
/// from `p0`, each attempt shelves `p_shelve` more population, and aux is
/// only emptied every `attempts_per_cycle` attempts. Averaged over the
/// cycle the extra population is p_shelve * (attempts_per_cycle + 1) / 2.
pub fn aux_accumulated_population(p0: f64, p_shelve: f64, attempts_per_cycle: u32) -> f64 {
    let mean_attempts = (attempts_per_cycle as f64 + 1.0) / 2.0;
    p0 + p_shelve * mean_attempts
}

/// Non-post-selected heralded fidelity bound: F_herald = (1 - P_aux) F.
pub fn aux_fidelity_bound(p_aux: f64, measured_fidelity: f64) -> f64 {
    (1.0 - p_aux) * measured_fidelity
}
