//! File formats: matrices as CSV (one row per line) or JSON arrays of
//! arrays, symplectic spectra as JSON lists, CNF coefficient tables and
//! Eckart–Morse parameter files as JSON.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};
use crate::linalg::SymplecticSpectrum;
use crate::models::{CnfModel, EckartMorseParams};
use crate::report::format_float;

/// Parses matrix text. Input whose first non-blank character is `[` is read
/// as JSON; anything else as comma- or whitespace-separated rows, with blank
/// lines and `#` comments skipped.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>> {
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(text)?);
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .enumerate()
        .map(|(i, line)| {
            line.split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|e| Error::InvalidInput(format!("row {i}: cannot parse {s:?} as a number: {e}")))
                })
                .collect()
        })
        .collect()
}

pub fn read_matrix(path: &Path) -> Result<Vec<Vec<f64>>> {
    parse_matrix(&fs::read_to_string(path)?)
}

pub fn matrix_to_csv(rows: &[Vec<f64>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(","))
        .map(|l| l + "\n")
        .collect()
}

pub fn matrix_to_json(rows: &[Vec<f64>]) -> String {
    serde_json::to_string(rows).expect("matrix serialisation cannot fail")
}

pub fn spectrum_to_json(s: &SymplecticSpectrum) -> String {
    serde_json::to_string(s).expect("spectrum serialisation cannot fail")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Reads a CNF coefficient table `{"e0": …, "terms": [{"i", "j", "c"}, …]}`.
pub fn read_cnf_model(path: &Path) -> Result<CnfModel> {
    read_json(path)
}

/// Reads Eckart–Morse parameters; a missing `x0` selects the barrier-centred shift.
pub fn read_params(path: &Path) -> Result<EckartMorseParams> {
    read_json(path)
}
