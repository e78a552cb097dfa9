//! Parameter model of emitters, cavities and noise environments, plus the
//! derived cavity-QED rates and quasi-static noise sampling.

mod params;
mod purcell;
mod sampling;

pub use params::{
    load_ion_toml, paper_cavity_fixture, paper_parameter_fixture, CavityParameters,
    ErrorToggles, IonParameters, LaserSettings, NoiseEnvironment, ION_FIXTURE_IDS,
};
pub use purcell::{purcell_rates, PurcellRates};
pub use sampling::{sample_quasi_static, trial_rng, QuasiStaticDraw};
