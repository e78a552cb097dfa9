//! Experiment configuration files: flat TOML with explicit unit suffixes.

use crate::node::{
    paper_parameter_fixture, ErrorToggles, IonParameters, LaserSettings, NoiseEnvironment,
};
use crate::units::{hz, mhz_ang, ns_to_us};
use crate::{Error, Result};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    /// "protocol" or "analysis".
    pub kind: String,
    pub name: String,
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<String>,
    #[serde(default)]
    pub run: RunSection,
    pub ions: IonsSection,
    #[serde(default)]
    pub lasers: LaserSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub sweep: Option<toml::Table>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_window_us")]
    pub window_us: f64,
    #[serde(default = "default_accept_ns")]
    pub accept_ns: f64,
    #[serde(default = "default_bin_ns")]
    pub bin_ns: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_stage")]
    pub stage: u8,
    #[serde(default = "default_tau_s_us")]
    pub tau_s_us: f64,
    #[serde(default = "default_rep_rate_khz")]
    pub rep_rate_khz: f64,
}

fn default_window_us() -> f64 {
    2.9
}
fn default_accept_ns() -> f64 {
    500.0
}
fn default_bin_ns() -> f64 {
    10.0
}
fn default_trials() -> usize {
    300
}
fn default_stage() -> u8 {
    3
}
fn default_tau_s_us() -> f64 {
    2.9
}
fn default_rep_rate_khz() -> f64 {
    12.3
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            window_us: default_window_us(),
            accept_ns: default_accept_ns(),
            bin_ns: default_bin_ns(),
            trials: default_trials(),
            stage: default_stage(),
            tau_s_us: default_tau_s_us(),
            rep_rate_khz: default_rep_rate_khz(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IonsSection {
    /// Fixture ids in protocol order.
    pub ids: Vec<String>,
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub p_det_scale: Option<Vec<f64>>,
    /// Optical drive offsets per ion relative to the first (2pi x MHz).
    pub drive_offsets_mhz_ang: Vec<f64>,
    /// Qubit drive detunings per ion (2pi x MHz); nonzero under shared
    /// microwave drives.
    #[serde(default)]
    pub qubit_offsets_mhz_ang: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserSection {
    #[serde(default = "default_rabi_herald")]
    pub rabi_herald_mhz_ang: f64,
    #[serde(default = "default_rabi_rephase")]
    pub rabi_rephase_mhz_ang: f64,
    #[serde(default = "default_rabi_readout")]
    pub rabi_readout_mhz_ang: f64,
    #[serde(default = "default_rabi_qubit")]
    pub rabi_qubit_mhz_ang: f64,
}

fn default_rabi_herald() -> f64 {
    2.5
}
fn default_rabi_rephase() -> f64 {
    10.0
}
fn default_rabi_readout() -> f64 {
    3.5
}
fn default_rabi_qubit() -> f64 {
    5.0
}

impl Default for LaserSection {
    fn default() -> Self {
        Self {
            rabi_herald_mhz_ang: default_rabi_herald(),
            rabi_rephase_mhz_ang: default_rabi_rephase(),
            rabi_readout_mhz_ang: default_rabi_readout(),
            rabi_qubit_mhz_ang: default_rabi_qubit(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    #[serde(default = "default_dark_rate_hz")]
    pub dark_rate_hz: f64,
    #[serde(default = "default_sigma_phi_2pi")]
    pub sigma_phi_2pi: f64,
    #[serde(default = "default_true")]
    pub path_phase_stabilized: bool,
    #[serde(default = "default_t2_spin_star_us")]
    pub t2_spin_star_us: f64,
    #[serde(default)]
    pub extra_noise_rate_hz: f64,
    #[serde(default)]
    pub toggles: TogglesSection,
}

fn default_dark_rate_hz() -> f64 {
    8.0
}
fn default_sigma_phi_2pi() -> f64 {
    0.037
}
fn default_t2_spin_star_us() -> f64 {
    30.0
}
fn default_true() -> bool {
    true
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            dark_rate_hz: default_dark_rate_hz(),
            sigma_phi_2pi: default_sigma_phi_2pi(),
            path_phase_stabilized: true,
            t2_spin_star_us: default_t2_spin_star_us(),
            extra_noise_rate_hz: 0.0,
            toggles: TogglesSection::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TogglesSection {
    #[serde(default = "default_true")]
    pub undetected_rephasing_emission: bool,
    #[serde(default = "default_true")]
    pub noise_counts: bool,
    #[serde(default = "default_true")]
    pub optical_gate_error: bool,
    #[serde(default = "default_true")]
    pub init_error: bool,
    #[serde(default = "default_true")]
    pub qubit_gate_error: bool,
    #[serde(default = "default_true")]
    pub lifetime_mismatch: bool,
    #[serde(default = "default_true")]
    pub qubit_t1t2: bool,
    #[serde(default = "default_true")]
    pub path_phase: bool,
}

impl Default for TogglesSection {
    fn default() -> Self {
        Self {
            undetected_rephasing_emission: true,
            noise_counts: true,
            optical_gate_error: true,
            init_error: true,
            qubit_gate_error: true,
            lifetime_mismatch: true,
            qubit_t1t2: true,
            path_phase: true,
        }
    }
}

impl TogglesSection {
    pub fn to_toggles(&self) -> ErrorToggles {
        ErrorToggles {
            undetected_rephasing_emission: self.undetected_rephasing_emission,
            noise_counts: self.noise_counts,
            optical_gate_error: self.optical_gate_error,
            init_error: self.init_error,
            qubit_gate_error: self.qubit_gate_error,
            lifetime_mismatch: self.lifetime_mismatch,
            qubit_t1t2: self.qubit_t1t2,
            path_phase: self.path_phase,
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Invariant {
                field: "schema".into(),
                msg: format!("unsupported schema {}", self.schema),
            });
        }
        if self.kind != "protocol" && self.kind != "analysis" {
            return Err(Error::Invariant {
                field: "kind".into(),
                msg: format!("must be `protocol` or `analysis`, got `{}`", self.kind),
            });
        }
        let n = self.ions.ids.len();
        if self.ions.alphas.len() != n {
            return Err(Error::Invariant {
                field: "ions.alphas".into(),
                msg: format!("{} entries for {n} ions", self.ions.alphas.len()),
            });
        }
        for (i, &a) in self.ions.alphas.iter().enumerate() {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::Invariant {
                    field: format!("ions.alphas[{i}]"),
                    msg: format!("alpha {a} out of [0,1]"),
                });
            }
        }
        if self.ions.drive_offsets_mhz_ang.len() != n {
            return Err(Error::Invariant {
                field: "ions.drive_offsets_mhz_ang".into(),
                msg: format!("{} entries for {n} ions", self.ions.drive_offsets_mhz_ang.len()),
            });
        }
        if let Some(scales) = &self.ions.p_det_scale {
            if scales.len() != n {
                return Err(Error::Invariant {
                    field: "ions.p_det_scale".into(),
                    msg: format!("{} entries for {n} ions", scales.len()),
                });
            }
        }
        if self.run.accept_ns > self.run.window_us * 1e3 + 1e-9 && self.ions.ids.len() < 3 {
            // Two-photon windows are two-sided; validated by the protocol.
        }
        if self.run.bin_ns <= 0.0 || self.run.trials == 0 {
            return Err(Error::Invariant {
                field: "run".into(),
                msg: "bin width and trials must be positive".into(),
            });
        }
        for (i, id) in self.ions.ids.iter().enumerate() {
            paper_parameter_fixture(id).map_err(|_| Error::Invariant {
                field: format!("ions.ids[{i}]"),
                msg: format!("unknown ion fixture `{id}`"),
            })?;
        }
        Ok(())
    }

    pub fn ion_parameters(&self) -> Result<Vec<IonParameters>> {
        let qubit_offsets = self
            .ions
            .qubit_offsets_mhz_ang
            .clone()
            .unwrap_or_else(|| vec![0.0; self.ions.ids.len()]);
        self.ions
            .ids
            .iter()
            .zip(qubit_offsets)
            .map(|(id, qoff)| {
                let mut ion = paper_parameter_fixture(id)?;
                ion.qubit_offset = mhz_ang(qoff);
                Ok(ion)
            })
            .collect()
    }

    pub fn laser_settings(&self) -> LaserSettings {
        LaserSettings {
            drive_offsets: self
                .ions
                .drive_offsets_mhz_ang
                .iter()
                .map(|&f| mhz_ang(f))
                .collect(),
            rabi_herald: mhz_ang(self.lasers.rabi_herald_mhz_ang),
            rabi_rephase: mhz_ang(self.lasers.rabi_rephase_mhz_ang),
            rabi_readout: mhz_ang(self.lasers.rabi_readout_mhz_ang),
            rabi_qubit: mhz_ang(self.lasers.rabi_qubit_mhz_ang),
        }
    }

    pub fn noise_environment(&self) -> NoiseEnvironment {
        NoiseEnvironment {
            dark_rate: hz(self.noise.dark_rate_hz + self.noise.extra_noise_rate_hz),
            sigma_phi: self.noise.sigma_phi_2pi * crate::units::TWO_PI,
            path_phase_stabilized: self.noise.path_phase_stabilized,
            t2_spin_star: self.noise.t2_spin_star_us,
            toggles: self.noise.toggles.to_toggles(),
        }
    }

    pub fn p_det_scale(&self) -> Vec<f64> {
        self.ions
            .p_det_scale
            .clone()
            .unwrap_or_else(|| vec![1.0; self.ions.ids.len()])
    }

    pub fn accept_us(&self) -> f64 {
        ns_to_us(self.run.accept_ns)
    }

    pub fn bin_us(&self) -> f64 {
        ns_to_us(self.run.bin_ns)
    }

    pub fn rep_rate(&self) -> f64 {
        hz(self.run.rep_rate_khz * 1e3)
    }
}
