//! Tomography measurement records and the readout confusion matrix, with
//! their plain-text file formats.

use crate::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub fn from_char(ch: char) -> Result<Self> {
        match ch {
            'X' => Ok(PauliAxis::X),
            'Y' => Ok(PauliAxis::Y),
            'Z' => Ok(PauliAxis::Z),
            other => Err(Error::Parse(format!("unknown Pauli axis `{other}`"))),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }
}

/// One measurement basis and its outcome counts, indexed by bitstring.
#[derive(Debug, Clone, Serialize)]
pub struct BasisRecord {
    /// Optional record label (e.g. the teleported target state).
    pub label: Option<String>,
    pub basis: Vec<PauliAxis>,
    pub counts: Vec<u64>,
}

impl BasisRecord {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// A set of basis records over a fixed qubit count.
#[derive(Debug, Clone, Serialize)]
pub struct CountTable {
    pub qubits: usize,
    pub records: Vec<BasisRecord>,
}

impl CountTable {
    pub fn outcomes(&self) -> usize {
        1usize << self.qubits
    }

    /// Full tomography requires every one of the 3^q Pauli bases.
    pub fn validate_complete(&self) -> Result<()> {
        let expected = 3usize.pow(self.qubits as u32);
        let mut seen = std::collections::HashSet::new();
        for rec in &self.records {
            if rec.basis.len() != self.qubits {
                return Err(Error::Invariant {
                    field: "CountTable.records.basis".into(),
                    msg: "basis length does not match qubit count".into(),
                });
            }
            if rec.counts.len() != self.outcomes() {
                return Err(Error::Invariant {
                    field: "CountTable.records.counts".into(),
                    msg: "count vector length does not match outcome count".into(),
                });
            }
            seen.insert(rec.basis.iter().map(|a| a.to_char()).collect::<String>());
        }
        if seen.len() != expected {
            return Err(Error::Invariant {
                field: "CountTable.records".into(),
                msg: format!("{} distinct bases present, {expected} required", seen.len()),
            });
        }
        Ok(())
    }

    /// Parse the plain-text format: comment lines start with `#`, a header
    /// `outcomes: <bitstrings>` pins the outcome order, then one record
    /// per line: `[label:]BASIS counts...`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut outcome_bits: Option<usize> = None;
        let mut records = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("outcomes:") {
                let outcomes: Vec<&str> = rest.split_whitespace().collect();
                let bits = outcomes
                    .first()
                    .map(|s| s.len())
                    .ok_or_else(|| Error::Parse("empty outcomes header".into()))?;
                if outcomes.len() != (1 << bits) {
                    return Err(Error::Parse(format!(
                        "line {}: expected {} outcomes, found {}",
                        lineno + 1,
                        1 << bits,
                        outcomes.len()
                    )));
                }
                for (i, o) in outcomes.iter().enumerate() {
                    let expected: String = (0..bits)
                        .rev()
                        .map(|b| if (i >> b) & 1 == 1 { '1' } else { '0' })
                        .collect();
                    if *o != expected {
                        return Err(Error::Parse(format!(
                            "outcome order must be ascending bitstrings, found `{o}`"
                        )));
                    }
                }
                outcome_bits = Some(bits);
                continue;
            }
            let bits = outcome_bits
                .ok_or_else(|| Error::Parse("record before outcomes header".into()))?;
            let mut parts = line.split_whitespace();
            let head = parts
                .next()
                .ok_or_else(|| Error::Parse(format!("line {}: empty record", lineno + 1)))?;
            let (label, basis_str) = match head.rsplit_once(':') {
                Some((label, basis)) => (Some(label.to_string()), basis),
                None => (None, head),
            };
            let basis: Vec<PauliAxis> = basis_str
                .chars()
                .map(PauliAxis::from_char)
                .collect::<Result<_>>()?;
            if basis.len() != bits {
                return Err(Error::Parse(format!(
                    "line {}: basis `{basis_str}` does not match {bits}-qubit outcomes",
                    lineno + 1
                )));
            }
            let counts: Vec<u64> = parts
                .map(|tok| {
                    tok.parse::<u64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad count `{tok}`", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if counts.len() != (1 << bits) {
                return Err(Error::Parse(format!(
                    "line {}: expected {} counts, found {}",
                    lineno + 1,
                    1 << bits,
                    counts.len()
                )));
            }
            records.push(BasisRecord {
                label,
                basis,
                counts,
            });
        }
        let bits =
            outcome_bits.ok_or_else(|| Error::Parse("missing outcomes header".into()))?;
        Ok(Self {
            qubits: bits,
            records,
        })
    }

    /// Serialize back to the text format (round-trips `parse`).
    pub fn render(&self) -> String {
        let mut out = String::from("# heraldlab count table v1\n");
        out.push_str(
            "# Basis X: measured after a -pi/2 rotation about Y; Y: after +pi/2 about X.\n",
        );
        out.push_str("outcomes:");
        for i in 0..self.outcomes() {
            out.push(' ');
            for b in (0..self.qubits).rev() {
                out.push(if (i >> b) & 1 == 1 { '1' } else { '0' });
            }
        }
        out.push('\n');
        for rec in &self.records {
            if let Some(label) = &rec.label {
                out.push_str(label);
                out.push(':');
            }
            for a in &rec.basis {
                out.push(a.to_char());
            }
            for c in &rec.counts {
                out.push(' ');
                out.push_str(&c.to_string());
            }
            out.push('\n');
        }
        out
    }
}

/// Readout confusion matrix R[a][b] = P(measure a | prepared b).
#[derive(Debug, Clone, Serialize)]
pub struct ReadoutMatrix {
    pub dim: usize,
    /// Row-major entries.
    pub entries: Vec<f64>,
}

impl ReadoutMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.entries[a * self.dim + b]
    }

    /// Column sums must stay within `tol` of one.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Invariant {
                field: "ReadoutMatrix.entries".into(),
                msg: "entry count does not match dimension".into(),
            });
        }
        for v in &self.entries {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::Invariant {
                    field: "ReadoutMatrix.entries".into(),
                    msg: format!("entry {v} out of [0,1]"),
                });
            }
        }
        for b in 0..self.dim {
            let sum: f64 = (0..self.dim).map(|a| self.get(a, b)).sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::Invariant {
                    field: "ReadoutMatrix.column_sums".into(),
                    msg: format!("column {b} sums to {sum}, outside 1 +- {tol}"),
                });
            }
        }
        Ok(())
    }

    /// p = R n.
    pub fn apply(&self, populations: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| {
                (0..self.dim)
                    .map(|b| self.get(a, b) * populations[b])
                    .sum()
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| Error::Parse(format!("line {}: bad entry `{tok}`", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Parse("readout matrix must be square".into()));
        }
        Ok(Self {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn render(&self) -> String {
        let mut out = String::from("# heraldlab readout matrix v1\n");
        out.push_str("# R[a][b] = P(measured a | prepared b); ascending bitstring order.\n");
        for a in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|b| format!("{:.3}", self.get(a, b)))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}
