//! Measurement simulation, readout-error correction, maximum-likelihood
//! reconstruction and bootstrap error bars.

mod bootstrap;
mod counts;
mod direct;
mod fixtures;
mod mle;
mod simulate;

pub use bootstrap::{bootstrap_errors, BootstrapReport};
pub use counts::{BasisRecord, CountTable, PauliAxis, ReadoutMatrix};
pub use direct::{corrected_expectation, direct_single_qubit};
pub use fixtures::{
    dataset_text, golden_dataset, golden_dataset_ids, parse_density_matrices, GoldenDataset,
    TELEPORT_STATE_LABELS,
};
pub use mle::{
    diluted_fixed_point, log_likelihood, mle_reconstruct, mle_reconstruct_from,
    predicted_populations, MleOptions, TomographyEstimate,
};
pub use simulate::{all_bases, simulate_counts};
