//! Dense complex linear algebra and quantum-state primitives for
//! Hilbert-space dimensions up to ~125 (three emitters x up to 5 levels).

mod density;
mod eig;
mod expm;
mod layout;
mod ops;
mod state;

pub use density::{nearest_density, DensityMatrix, NearestDensityOutcome};
pub use eig::eigh;
pub use expm::expm;
pub use layout::{HilbertLayout, Level};
pub use ops::{
    adjoint, commutator, expectation, frobenius_distance, hermitize, identity, is_hermitian,
    kron, matmul, partial_trace, tensor_product, trace,
};
pub use state::{state_fidelity, PureState};

use num_complex::Complex64;

/// Complex scalar used for all operators and states.
pub type C64 = Complex64;

/// Dense square complex operator in row-major layout.
pub type Operator = ndarray::Array2<C64>;

pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
