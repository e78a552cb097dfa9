//! Hilbert-space layout: ordered level lists per subsystem.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Single-ion energy levels in canonical order.
///
/// The fixed ordering (0, 1, e, 1e, aux) pins down operator indices across
/// the whole crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    /// Qubit ground state |0>.
    Zero,
    /// Qubit state |1>.
    One,
    /// Optically excited state |e>.
    E,
    /// Excited hyperfine state |1e>.
    OneE,
    /// Auxiliary ground states outside the qubit manifold.
    Aux,
}

impl Level {
    pub fn canonical_rank(self) -> usize {
        match self {
            Level::Zero => 0,
            Level::One => 1,
            Level::E => 2,
            Level::OneE => 3,
            Level::Aux => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::Zero => "0",
            Level::One => "1",
            Level::E => "e",
            Level::OneE => "1e",
            Level::Aux => "aux",
        }
    }
}

/// Ordered level lists per subsystem; total dimension is the product of the
/// per-subsystem dimensions, with the first subsystem most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    subsystems: Vec<Vec<Level>>,
}

impl HilbertLayout {
    pub fn new(subsystems: Vec<Vec<Level>>) -> Result<Self> {
        for (i, levels) in subsystems.iter().enumerate() {
            if levels.is_empty() {
                return Err(Error::InvalidArgument(format!("subsystem {i} has no levels")));
            }
            let mut seen = Vec::new();
            for &l in levels {
                if seen.contains(&l) {
                    return Err(Error::InvalidArgument(format!(
                        "subsystem {i} lists level {} twice",
                        l.label()
                    )));
                }
                seen.push(l);
            }
            let mut ranks: Vec<usize> = levels.iter().map(|l| l.canonical_rank()).collect();
            let sorted = {
                let mut r = ranks.clone();
                r.sort_unstable();
                r
            };
            if ranks != sorted {
                ranks.sort_unstable();
                return Err(Error::InvalidArgument(format!(
                    "subsystem {i} levels must follow the canonical order (0, 1, e, 1e, aux)"
                )));
            }
        }
        Ok(Self { subsystems })
    }

    /// Identical level set on every one of `n` subsystems.
    pub fn uniform(n: usize, levels: &[Level]) -> Result<Self> {
        Self::new(vec![levels.to_vec(); n])
    }

    pub fn num_subsystems(&self) -> usize {
        self.subsystems.len()
    }

    pub fn levels(&self, subsystem: usize) -> &[Level] {
        &self.subsystems[subsystem]
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.len()).collect()
    }

    pub fn dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.len()).product()
    }

    /// Index of `level` within `subsystem`, if present.
    pub fn level_index(&self, subsystem: usize, level: Level) -> Option<usize> {
        self.subsystems[subsystem].iter().position(|&l| l == level)
    }

    /// Flat basis index from per-subsystem level indices.
    pub fn flat_index(&self, per_subsystem: &[usize]) -> usize {
        let mut idx = 0;
        for (digits, levels) in per_subsystem.iter().zip(&self.subsystems) {
            idx = idx * levels.len() + digits;
        }
        idx
    }
}
