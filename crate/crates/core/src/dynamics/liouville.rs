//! Per-ion Liouvillian superoperators and tensor application to the joint
//! density matrix.
//!
//! Row-major vectorization: vec(A rho B) = (A kron B^T) vec(rho), so a
//! superoperator on one ion is a (d^2 x d^2) matrix acting on that ion's
//! (ket, bra) index pair.

use crate::qcore::{c, kron, C64, Level, Operator};
use ndarray::Array2;

/// Basis operators for one ion's level set.
#[derive(Debug, Clone)]
pub struct IonOps {
    pub levels: Vec<Level>,
}

impl IonOps {
    pub fn new(levels: Vec<Level>) -> Self {
        Self { levels }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn index(&self, level: Level) -> Option<usize> {
        self.levels.iter().position(|&l| l == level)
    }

    pub fn projector(&self, level: Level) -> Operator {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        if let Some(i) = self.index(level) {
            m[[i, i]] = c(1.0);
        }
        m
    }

    /// |to><from| if both levels exist, else zero.
    pub fn transfer(&self, to: Level, from: Level) -> Operator {
        let d = self.dim();
        let mut m = Array2::zeros((d, d));
        if let (Some(i), Some(j)) = (self.index(to), self.index(from)) {
            m[[i, j]] = c(1.0);
        }
        m
    }

    /// sigma^- = |1><e|.
    pub fn lower(&self) -> Operator {
        self.transfer(Level::One, Level::E)
    }
}

/// Coherent drive on one transition, in the rotating frame of its drive.
#[derive(Debug, Clone, Copy)]
pub enum DriveTerm {
    /// A-transition drive |1><->|e> with Rabi frequency (rad/us).
    Optical { rabi: f64 },
    /// Qubit drive |0><->|1> about the in-plane axis at `axis_phase`.
    Qubit { rabi: f64, axis_phase: f64 },
    /// Excited-state spin drive |e><->|1e>.
    ExcitedSpin { rabi: f64 },
}

/// Which decay channels are active for a segment.
#[derive(Debug, Clone, Copy)]
pub struct DecayContext {
    /// Inside a heralding window: the detected fraction of the A decay
    /// conditions the no-click state (anticommutator, no refill).
    pub detected_conditioning: bool,
    /// A- and E-transition decay active at all.
    pub optical_decay: bool,
    /// Spin relaxation and dephasing active.
    pub spin_noise: bool,
}

/// Rates and static offsets for one ion as the engine consumes them.
#[derive(Debug, Clone)]
pub struct IonRates {
    /// Total enhanced A decay rate 1/T1,o (1/us).
    pub gamma_total: f64,
    /// Detected fraction of the A decay.
    pub p_det: f64,
    /// E-transition decay rate |1e> -> |0> (1/us).
    pub gamma_e: f64,
    /// Spin relaxation rate 1/T1,s (1/us).
    pub gamma_spin_relax: f64,
    /// Pure spin dephasing rate (1/us).
    pub gamma_spin_deph: f64,
    /// Optical pure dephasing rate (1/us); zero by default.
    pub optical_dephasing: f64,
}

/// Assemble the (d^2 x d^2) Liouvillian for one ion.
///
/// `optical_detuning`/`qubit_detuning` are the trial's static offsets of
/// the transition relative to its drive (rad/us); excited-state amplitudes
/// rotate as exp(-i * detuning * t).
pub fn build_ion_liouvillian(
    ops: &IonOps,
    rates: &IonRates,
    optical_detuning: f64,
    qubit_detuning: f64,
    drive: Option<DriveTerm>,
    ctx: DecayContext,
) -> Operator {
    let d = ops.dim();
    let eye: Operator = Array2::from_diag_elem(d, c(1.0));

    // Hamiltonian in the per-ion drive frame.
    let mut h: Operator = Array2::zeros((d, d));
    h = h + ops.projector(Level::E) * c(optical_detuning)
        + ops.projector(Level::OneE) * c(optical_detuning)
        + ops.projector(Level::One) * c(qubit_detuning);
    if let Some(term) = drive {
        match term {
            DriveTerm::Optical { rabi } => {
                let sp = ops.transfer(Level::E, Level::One);
                let sm = ops.transfer(Level::One, Level::E);
                h = h + (sp + sm) * c(0.5 * rabi);
            }
            DriveTerm::Qubit { rabi, axis_phase } => {
                let up = ops.transfer(Level::One, Level::Zero);
                let dn = ops.transfer(Level::Zero, Level::One);
                let e = C64::from_polar(0.5 * rabi, axis_phase);
                h = h + up * e + dn * e.conj();
            }
            DriveTerm::ExcitedSpin { rabi } => {
                let up = ops.transfer(Level::OneE, Level::E);
                let dn = ops.transfer(Level::E, Level::OneE);
                h = h + (up + dn) * c(0.5 * rabi);
            }
        }
    }

    let ht = h.t().to_owned();
    let mut lv = kron(&h, &eye) * C64::new(0.0, -1.0) + kron(&eye, &ht) * C64::new(0.0, 1.0);

    let mut add_dissipator = |cop: &Operator, rate: f64| {
        if rate <= 0.0 {
            return;
        }
        let cconj = cop.mapv(|x| x.conj());
        let cdc = crate::qcore::adjoint(cop).dot(cop);
        let cdct = cdc.t().to_owned();
        lv = &lv
            + &(kron(cop, &cconj) * c(rate)
                - (kron(&cdc, &eye) + kron(&eye, &cdct)) * c(0.5 * rate));
    };

    if ctx.optical_decay {
        // Undetected A decay refills |1>; the detected fraction only
        // appears as the no-click anticommutator below.
        let undetected = if ctx.detected_conditioning {
            rates.gamma_total * (1.0 - rates.p_det)
        } else {
            rates.gamma_total
        };
        add_dissipator(&ops.lower(), undetected);
        add_dissipator(&ops.transfer(Level::Zero, Level::OneE), rates.gamma_e);
    }
    if ctx.spin_noise {
        add_dissipator(&ops.transfer(Level::Zero, Level::One), 0.5 * rates.gamma_spin_relax);
        add_dissipator(&ops.transfer(Level::One, Level::Zero), 0.5 * rates.gamma_spin_relax);
        let sz = ops.projector(Level::Zero) - ops.projector(Level::One);
        add_dissipator(&sz, 0.5 * rates.gamma_spin_deph);
    }
    if rates.optical_dephasing > 0.0 {
        let dz = ops.projector(Level::E) + ops.projector(Level::OneE)
            - ops.projector(Level::Zero)
            - ops.projector(Level::One);
        add_dissipator(&dz, 0.5 * rates.optical_dephasing);
    }

    if ctx.detected_conditioning && ctx.optical_decay {
        // -(Gamma_det/2) {P_e, rho}: no-click conditioning on the detected
        // channel, with no refill term.
        let gdet = rates.gamma_total * rates.p_det;
        let pe = ops.projector(Level::E);
        let pet = pe.t().to_owned();
        lv = &lv - &((kron(&pe, &eye) + kron(&eye, &pet)) * c(0.5 * gdet));
    }

    lv
}

/// Apply a (d^2 x d^2) superoperator on `ion` to the joint density matrix.
pub fn apply_ion_superop(rho: &Operator, ion: usize, u: &Operator, dims: &[usize]) -> Operator {
    let d = dims[ion];
    let dl: usize = dims[..ion].iter().product();
    let dr: usize = dims[ion + 1..].iter().product();
    let total: usize = dl * d * dr;
    debug_assert_eq!(rho.nrows(), total);

    let mut out: Operator = Array2::zeros((total, total));
    let mut scratch = vec![C64::new(0.0, 0.0); d * d];
    let mut result = vec![C64::new(0.0, 0.0); d * d];

    for l in 0..dl {
        for r in 0..dr {
            for l2 in 0..dl {
                for r2 in 0..dr {
                    // Gather the ion's (ket, bra) block at fixed bystander
                    // indices.
                    for a in 0..d {
                        let row = (l * d + a) * dr + r;
                        for b in 0..d {
                            let col = (l2 * d + b) * dr + r2;
                            scratch[a * d + b] = rho[[row, col]];
                        }
                    }
                    for (idx, slot) in result.iter_mut().enumerate() {
                        let mut s = C64::new(0.0, 0.0);
                        for (jdx, &v) in scratch.iter().enumerate() {
                            s += u[[idx, jdx]] * v;
                        }
                        *slot = s;
                    }
                    for a in 0..d {
                        let row = (l * d + a) * dr + r;
                        for b in 0..d {
                            let col = (l2 * d + b) * dr + r2;
                            out[[row, col]] = result[a * d + b];
                        }
                    }
                }
            }
        }
    }
    out
}
