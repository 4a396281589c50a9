//! JSON interchange: matrices as row-major arrays of `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::l2space::DiscreteMatrixMeasure;
use crate::linalg::CMat;
use crate::moments::MomentSequence;

/// A matrix entry; bare numbers are accepted as real shorthand on input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Pair([f64; 2]),
    Real(f64),
}

impl Entry {
    pub fn value(self) -> Complex64 {
        match self {
            Entry::Pair([re, im]) => Complex64::new(re, im),
            Entry::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixJson(pub Vec<Vec<Entry>>);

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        MatrixJson(
            (0..m.nrows())
                .map(|i| {
                    (0..m.ncols())
                        .map(|j| Entry::Pair([m[(i, j)].re, m[(i, j)].im]))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let rows = self.0.len();
        let cols = self.0.first().map_or(0, Vec::len);
        if self.0.iter().any(|r| r.len() != cols) {
            return Err(Error::Input("ragged matrix rows".into()));
        }
        Ok(CMat::from_fn(rows, cols, |i, j| self.0[i][j].value()))
    }

    fn to_square(&self, dim: usize, what: &str) -> Result<CMat> {
        let m = self.to_matrix()?;
        if m.shape() != (dim, dim) {
            return Err(Error::Input(format!(
                "{what} has shape {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentFile {
    pub dim: usize,
    pub order: usize,
    pub moments: Vec<MatrixJson>,
}

impl MomentFile {
    pub fn from_sequence(m: &MomentSequence) -> Self {
        MomentFile {
            dim: m.dim(),
            order: m.order(),
            moments: m.moments().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_sequence(&self, tol_herm: f64) -> Result<MomentSequence> {
        if self.moments.len() != self.order + 1 {
            return Err(Error::Input(format!(
                "order {} needs {} moments, file has {}",
                self.order,
                self.order + 1,
                self.moments.len()
            )));
        }
        let ms = self
            .moments
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_square(self.dim, &format!("S_{k}")))
            .collect::<Result<Vec<_>>>()?;
        MomentSequence::new(ms, tol_herm)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<MatrixJson>,
}

impl MeasureFile {
    pub fn from_measure(mu: &DiscreteMatrixMeasure) -> Self {
        MeasureFile {
            dim: mu.dim(),
            nodes: mu.nodes().to_vec(),
            weights: mu.weights().iter().map(MatrixJson::from_matrix).collect(),
        }
    }

    pub fn to_measure(&self) -> Result<DiscreteMatrixMeasure> {
        let ws = self
            .weights
            .iter()
            .enumerate()
            .map(|(k, m)| m.to_square(self.dim, &format!("W_{k}")))
            .collect::<Result<Vec<_>>>()?;
        DiscreteMatrixMeasure::new(self.nodes.clone(), ws)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_moments(path: &Path, tol_herm: f64) -> Result<MomentSequence> {
    read_json::<MomentFile>(path)?.to_sequence(tol_herm)
}

pub fn read_measure(path: &Path) -> Result<DiscreteMatrixMeasure> {
    read_json::<MeasureFile>(path)?.to_measure()
}
