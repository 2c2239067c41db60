//! JSON and CSV encodings of matrices, contexts, maps and frame samples.
//!
//! Matrices are `{"rows": r, "cols": c, "data": [[...], ...]}` with row-major nested
//! arrays. A complex entry is a two-element array `[re, im]`; a bare number is a
//! real entry. Numbers are written in shortest round-trip form, so a value read
//! back is bitwise the value written.

use std::fmt::Write as _;

use bornlab_core::csm::{Context, ContextMap, Projector};
use bornlab_core::gleason::FrameSample;
use bornlab_core::numerics::{ComplexMatrix, RealMatrix, C64};
use bornlab_core::stochastic::ProbabilityMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(String),
    #[error("{0}")]
    Shape(String),
    #[error("matrix has complex entries where real values are required")]
    NotReal,
    #[error(transparent)]
    Core(#[from] bornlab_core::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn to_complex(self) -> C64 {
        match self {
            Entry::Real(x) => C64::new(x, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<Entry>>,
}

impl MatrixJson {
    fn check_shape(&self) -> Result<(), FormatError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(FormatError::Shape(
                "matrix needs at least one row and column".into(),
            ));
        }
        if self.data.len() != self.rows {
            return Err(FormatError::Shape(format!(
                "\"rows\" is {} but data has {} rows",
                self.rows,
                self.data.len()
            )));
        }
        if let Some((i, row)) = self.data.iter().enumerate().find(|(_, r)| r.len() != self.cols) {
            return Err(FormatError::Shape(format!(
                "\"cols\" is {} but row {i} has {} entries",
                self.cols,
                row.len()
            )));
        }
        Ok(())
    }

    pub fn to_complex(&self) -> Result<ComplexMatrix, FormatError> {
        self.check_shape()?;
        let data = self.data.iter().flatten().map(|e| e.to_complex()).collect();
        Ok(ComplexMatrix::new(self.rows, self.cols, data)?)
    }

    /// Real matrix; entries written as `[re, 0]` are accepted, nonzero imaginary parts are not.
    pub fn to_real(&self) -> Result<RealMatrix, FormatError> {
        self.check_shape()?;
        let mut data = Vec::with_capacity(self.rows * self.cols);
        for e in self.data.iter().flatten() {
            match *e {
                Entry::Real(x) => data.push(x),
                Entry::Complex([re, 0.0]) => data.push(re),
                Entry::Complex(_) => return Err(FormatError::NotReal),
            }
        }
        Ok(RealMatrix::new(self.rows, self.cols, data)?)
    }

    pub fn from_complex(m: &ComplexMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| m.row(i).iter().map(|z| Entry::Complex([z.re, z.im])).collect())
                .collect(),
        }
    }

    pub fn from_real(m: &RealMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: (0..m.rows())
                .map(|i| m.row(i).iter().map(|&x| Entry::Real(x)).collect())
                .collect(),
        }
    }
}

pub fn parse_complex_matrix(text: &str) -> Result<ComplexMatrix, FormatError> {
    serde_json::from_str::<MatrixJson>(text)?.to_complex()
}

/// Matrix JSON, or the CSV table written by [`csv_table`] (any text not starting with `{`).
pub fn parse_probability_matrix(text: &str) -> Result<ProbabilityMatrix, FormatError> {
    let m = if text.trim_start().starts_with('{') {
        serde_json::from_str::<MatrixJson>(text)?.to_real()?
    } else {
        parse_csv(text)?
    };
    if m.rows() != m.cols() {
        return Err(FormatError::Shape(format!(
            "probability matrix must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(ProbabilityMatrix::new(m)?)
}

fn parse_csv(text: &str) -> Result<RealMatrix, FormatError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| FormatError::Csv(format!("line {}: {e}", i + 1)))?;
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || rows.iter().any(|r| r.len() != cols) {
        return Err(FormatError::Shape("CSV rows are empty or ragged".into()));
    }
    Ok(RealMatrix::new(rows.len(), cols, rows.concat())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextJson {
    pub dim: usize,
    pub label: String,
    pub projectors: Vec<MatrixJson>,
}

impl ContextJson {
    pub fn from_context(c: &Context) -> Self {
        Self {
            dim: c.dim(),
            label: c.label().to_string(),
            projectors: c
                .projectors()
                .iter()
                .map(|p| MatrixJson::from_complex(p.matrix()))
                .collect(),
        }
    }

    pub fn to_context(&self) -> Result<Context, FormatError> {
        if self.projectors.len() != self.dim {
            return Err(FormatError::Shape(format!(
                "\"dim\" is {} but {} projectors are listed",
                self.dim,
                self.projectors.len()
            )));
        }
        let matrices = self
            .projectors
            .iter()
            .map(MatrixJson::to_complex)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Context::from_matrices(matrices, self.label.clone())?)
    }
}

pub fn parse_context(text: &str) -> Result<Context, FormatError> {
    serde_json::from_str::<ContextJson>(text)?.to_context()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextMapJson {
    pub unitary: MatrixJson,
    pub source: String,
    pub target: String,
}

impl ContextMapJson {
    pub fn from_map(s: &ContextMap) -> Self {
        Self {
            unitary: MatrixJson::from_complex(s.unitary()),
            source: s.source().to_string(),
            target: s.target().to_string(),
        }
    }

    pub fn to_map(&self, tol: f64) -> Result<ContextMap, FormatError> {
        Ok(ContextMap::with_tol(
            self.unitary.to_complex()?,
            self.source.clone(),
            self.target.clone(),
            tol,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleJson {
    pub projector: MatrixJson,
    pub value: f64,
}

pub fn parse_samples(text: &str) -> Result<Vec<FrameSample>, FormatError> {
    let raw: Vec<SampleJson> = serde_json::from_str(text)?;
    raw.iter()
        .enumerate()
        .map(|(k, s)| {
            Ok(FrameSample {
                projector: Projector::new(s.projector.to_complex()?, k.to_string())?,
                value: s.value,
            })
        })
        .collect()
}

pub fn samples_to_json(samples: &[FrameSample]) -> Vec<SampleJson> {
    samples
        .iter()
        .map(|s| SampleJson {
            projector: MatrixJson::from_complex(s.projector.matrix()),
            value: s.value,
        })
        .collect()
}

/// One line per row, 17 significant digits per value.
pub fn csv_table(m: &RealMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let line: Vec<String> = m.row(i).iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}", line.join(",")).expect("writing to a String");
    }
    out
}
