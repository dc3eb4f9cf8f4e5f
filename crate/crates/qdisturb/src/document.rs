//! On-disk description of observables and instruments, and the certificate
//! files produced and checked by the command line.
//!
//! Documents are JSON with matrices as nested row-major arrays of
//! `[re, im]` pairs. Kraus operator lists carry a convention tag; lists
//! tagged `"heisenberg"` are adjointed on load so the in-memory instrument
//! always acts in the Schrödinger picture.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::disturbance::DisturbanceReport;
use crate::instruments::{Instrument, InstrumentError};
use crate::matrix::ComplexMatrix;
use crate::observables::{Observable, ObservableError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum DocumentError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("unsupported format version {version} (expected {FORMAT_VERSION})")]
    Version { version: u32 },
    #[error("{object} '{name}': matrix {index} is {rows}x{cols}, expected {dim}x{dim}")]
    MatrixShape {
        object: &'static str,
        name: String,
        index: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("{object} '{name}' has a ragged matrix at index {index}")]
    RaggedMatrix { object: &'static str, name: String, index: usize },
    #[error("no observable named '{name}' in the document")]
    UnknownObservable { name: String },
    #[error("no instrument named '{name}' in the document")]
    UnknownInstrument { name: String },
    #[error("observable '{name}': {source}")]
    Observable {
        name: String,
        #[source]
        source: ObservableError,
    },
    #[error("instrument '{name}': {source}")]
    Instrument {
        name: String,
        #[source]
        source: InstrumentError,
    },
}

/// Row-major matrix of [re, im] entries.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Schrodinger,
    Heisenberg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObservableEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    pub effects: Vec<MatrixData>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstrumentEntry {
    #[serde(default)]
    pub convention: Convention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    pub kraus: Vec<Vec<MatrixData>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Document {
    pub version: u32,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, ObservableEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub instruments: BTreeMap<String, InstrumentEntry>,
}

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m.at(i, j).re, m.at(i, j).im]).collect())
        .collect()
}

fn matrix_from_data(
    data: &MatrixData,
    object: &'static str,
    name: &str,
    index: usize,
    dim: usize,
) -> Result<ComplexMatrix, DocumentError> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if data.iter().any(|row| row.len() != cols) {
        return Err(DocumentError::RaggedMatrix { object, name: name.to_string(), index });
    }
    if rows != dim || cols != dim {
        return Err(DocumentError::MatrixShape {
            object,
            name: name.to_string(),
            index,
            rows,
            cols,
            dim,
        });
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        Complex64::new(data[i][j][0], data[i][j][1])
    }))
}

impl Document {
    pub fn new(dimension: usize) -> Self {
        Self {
            version: FORMAT_VERSION,
            dimension,
            observables: BTreeMap::new(),
            instruments: BTreeMap::new(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.version != FORMAT_VERSION {
            return Err(DocumentError::Version { version: doc.version });
        }
        Ok(doc)
    }

    pub fn load(path: &str) -> Result<Self, DocumentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DocumentError::Io { path: path.to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serialization cannot fail")
    }

    pub fn insert_observable(&mut self, name: &str, obs: &Observable) {
        self.observables.insert(
            name.to_string(),
            ObservableEntry {
                outcomes: Some(obs.outcomes().to_vec()),
                effects: obs.effects().iter().map(matrix_to_data).collect(),
            },
        );
    }

    pub fn insert_instrument(&mut self, name: &str, instrument: &Instrument, convention: Convention) {
        let kraus = (0..instrument.outcome_count())
            .map(|x| {
                instrument
                    .kraus(x)
                    .iter()
                    .map(|k| match convention {
                        Convention::Schrodinger => matrix_to_data(k),
                        Convention::Heisenberg => matrix_to_data(&k.adjoint()),
                    })
                    .collect()
            })
            .collect();
        self.instruments.insert(
            name.to_string(),
            InstrumentEntry {
                convention,
                outcomes: Some(instrument.outcomes().to_vec()),
                kraus,
            },
        );
    }

    /// Materializes a named observable (structural checks only; POVM
    /// validity is reported by `observables::validate`).
    pub fn observable(&self, name: &str) -> Result<Observable, DocumentError> {
        let entry = self
            .observables
            .get(name)
            .ok_or_else(|| DocumentError::UnknownObservable { name: name.to_string() })?;
        let mut effects = Vec::with_capacity(entry.effects.len());
        for (index, data) in entry.effects.iter().enumerate() {
            effects.push(matrix_from_data(data, "observable", name, index, self.dimension)?);
        }
        let outcomes = entry
            .outcomes
            .clone()
            .unwrap_or_else(|| (1..=effects.len()).map(|i| i.to_string()).collect());
        Observable::with_outcomes(outcomes, effects)
            .map_err(|source| DocumentError::Observable { name: name.to_string(), source })
    }

    /// Materializes a named instrument in the Schrödinger convention.
    pub fn instrument(&self, name: &str) -> Result<Instrument, DocumentError> {
        let entry = self
            .instruments
            .get(name)
            .ok_or_else(|| DocumentError::UnknownInstrument { name: name.to_string() })?;
        let mut kraus = Vec::with_capacity(entry.kraus.len());
        for (outcome, group) in entry.kraus.iter().enumerate() {
            let mut ops = Vec::with_capacity(group.len());
            for (index, data) in group.iter().enumerate() {
                let m = matrix_from_data(
                    data,
                    "instrument",
                    name,
                    outcome * 1000 + index,
                    self.dimension,
                )?;
                ops.push(match entry.convention {
                    Convention::Schrodinger => m,
                    Convention::Heisenberg => m.adjoint(),
                });
            }
            kraus.push(ops);
        }
        let outcomes = entry
            .outcomes
            .clone()
            .unwrap_or_else(|| (1..=kraus.len()).map(|i| i.to_string()).collect());
        Instrument::with_outcomes(outcomes, kraus)
            .map_err(|source| DocumentError::Instrument { name: name.to_string(), source })
    }
}

/// A disturbance run serialized for independent re-verification: the dual
/// operators, the optimal Choi matrices, and the claimed bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub version: u32,
    pub dimension: usize,
    pub observable_a: String,
    pub observable_b: String,
    pub value: f64,
    pub dual_bound: f64,
    pub h: Vec<MatrixData>,
    pub k: Vec<MatrixData>,
    pub choi: Vec<MatrixData>,
}

impl CertificateDocument {
    pub fn from_report(
        report: &DisturbanceReport,
        dimension: usize,
        name_a: &str,
        name_b: &str,
    ) -> Self {
        Self {
            version: FORMAT_VERSION,
            dimension,
            observable_a: name_a.to_string(),
            observable_b: name_b.to_string(),
            value: report.value,
            dual_bound: report.dual_bound,
            h: report.certificate.h.iter().map(matrix_to_data).collect(),
            k: report.certificate.k.iter().map(matrix_to_data).collect(),
            choi: report.choi_matrices.iter().map(matrix_to_data).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, DocumentError> {
        let doc: CertificateDocument =
            serde_json::from_str(text).map_err(|e| DocumentError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?;
        if doc.version != FORMAT_VERSION {
            return Err(DocumentError::Version { version: doc.version });
        }
        Ok(doc)
    }

    pub fn load(path: &str) -> Result<Self, DocumentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| DocumentError::Io { path: path.to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialization cannot fail")
    }

    pub fn h_matrices(&self) -> Result<Vec<ComplexMatrix>, DocumentError> {
        self.h
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_data(m, "certificate", "H", i, self.dimension))
            .collect()
    }

    pub fn k_matrices(&self) -> Result<Vec<ComplexMatrix>, DocumentError> {
        self.k
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_data(m, "certificate", "K", i, self.dimension))
            .collect()
    }

    pub fn choi_matrices(&self) -> Result<Vec<ComplexMatrix>, DocumentError> {
        let side = self.dimension * self.dimension;
        self.choi
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_data(m, "certificate", "choi", i, side))
            .collect()
    }
}
