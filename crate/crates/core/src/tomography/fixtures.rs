//! The raw count tables, readout matrices and published reconstructions
//! shipped with the crate, transcribed verbatim.

use super::counts::{CountTable, ReadoutMatrix};
use crate::qcore::{C64, Operator};
use crate::{Error, Result};
use ndarray::Array2;

/// One complete tomography dataset.
#[derive(Debug, Clone)]
pub struct GoldenDataset {
    pub id: &'static str,
    pub counts: CountTable,
    pub readout: ReadoutMatrix,
    /// Published reconstructions: (label, matrix).
    pub golden: Vec<(String, Operator)>,
}

pub const TELEPORT_STATE_LABELS: [&str; 6] = ["+X", "-X", "+Y", "-Y", "0", "1"];

pub fn golden_dataset_ids() -> [&'static str; 5] {
    [
        "single_photon",
        "two_photon",
        "w_state",
        "same_device",
        "teleportation",
    ]
}

macro_rules! dataset_files {
    ($name:literal) => {
        (
            include_str!(concat!("../../fixtures/tomography/", $name, "_counts.txt")),
            include_str!(concat!("../../fixtures/tomography/", $name, "_readout.txt")),
            include_str!(concat!("../../fixtures/tomography/", $name, "_golden.txt")),
        )
    };
}

pub fn dataset_text(id: &str) -> Result<(&'static str, &'static str, &'static str)> {
    Ok(match id {
        "single_photon" => dataset_files!("single_photon"),
        "two_photon" => dataset_files!("two_photon"),
        "w_state" => dataset_files!("w_state"),
        "same_device" => dataset_files!("same_device"),
        "teleportation" => dataset_files!("teleportation"),
        other => return Err(Error::Unknown(format!("tomography dataset `{other}`"))),
    })
}

pub fn golden_dataset(id: &str) -> Result<GoldenDataset> {
    let (counts_text, readout_text, golden_text) = dataset_text(id)?;
    let counts = CountTable::parse(counts_text)?;
    let readout = ReadoutMatrix::parse(readout_text)?;
    let golden = parse_density_matrices(golden_text)?;
    let id_static = golden_dataset_ids()
        .into_iter()
        .find(|&g| g == id)
        .expect("validated above");
    Ok(GoldenDataset {
        id: id_static,
        counts,
        readout,
        golden,
    })
}

/// Parse the density-matrix text format: optional `state <label>` block
/// headers, then rows of re/im pairs.
pub fn parse_density_matrices(text: &str) -> Result<Vec<(String, Operator)>> {
    let mut out: Vec<(String, Vec<Vec<C64>>)> = Vec::new();
    let mut current: Option<(String, Vec<Vec<C64>>)> = None;
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(label) = line.strip_prefix("state ") {
            if let Some(block) = current.take() {
                out.push(block);
            }
            current = Some((label.trim().to_string(), Vec::new()));
            continue;
        }
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad matrix entry `{tok}`")))
            })
            .collect::<Result<_>>()?;
        if values.len() % 2 != 0 {
            return Err(Error::Parse("matrix rows must hold re/im pairs".into()));
        }
        let row: Vec<C64> = values
            .chunks(2)
            .map(|pair| C64::new(pair[0], pair[1]))
            .collect();
        match current.as_mut() {
            Some((_, rows)) => rows.push(row),
            None => {
                current = Some(("rho".to_string(), vec![row]));
            }
        }
    }
    if let Some(block) = current.take() {
        out.push(block);
    }

    let mut matrices = Vec::with_capacity(out.len());
    for (label, rows) in out {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Parse(format!("matrix `{label}` is not square")));
        }
        let mut m: Operator = Array2::zeros((d, d));
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[[i, j]] = *v;
            }
        }
        matrices.push((label, m));
    }
    Ok(matrices)
}
