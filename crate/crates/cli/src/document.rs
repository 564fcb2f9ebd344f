//! The scenario file format: a versioned JSON tree with complex numbers as
//! `[re, im]` pairs.
//!
//! Evolutions are either explicit unitary matrices or a Hamiltonian with a
//! time step; observables are either Hermitian matrices or an explicit
//! eigenbasis with eigenvalues (which also fixes the path-label order).
//! States must be normalized to within 1e-6 unless `auto_normalize` is set.

use std::fmt;

use serde::{Deserialize, Serialize};
use weakpath_core::hilbert::{propagator, Operator, StateVector, Unitary};
use weakpath_core::pathways::{
    spectral, MeasurementStep, Postselection, Scenario, ScenarioStep, SpectralDecomposition,
};
use weakpath_core::pointers::{PointerSpec, Profile};
use weakpath_core::Complex64;

pub const FORMAT_VERSION: u32 = 1;

/// How far a stored state may deviate from unit norm before it is rejected.
const NORM_SLACK: f64 = 1e-6;

#[derive(Debug)]
pub enum DocError {
    /// Malformed document: bad JSON, wrong shapes, unknown fields.
    Parse(String),
    /// Well-formed document violating a scenario invariant.
    Validation(String),
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocError::Parse(msg) => write!(f, "parse error: {msg}"),
            DocError::Validation(msg) => write!(f, "validation error: {msg}"),
        }
    }
}

impl std::error::Error for DocError {}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub version: u32,
    pub dim: usize,
    pub initial: Vec<[f64; 2]>,
    #[serde(default)]
    pub auto_normalize: bool,
    pub steps: Vec<StepDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_evolution: Option<EvolutionDocument>,
    pub postselect: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionDocument>,
    pub observable: ObservableDocument,
    pub pointer: PointerDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvolutionDocument {
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
    Hamiltonian { hamiltonian: Vec<Vec<[f64; 2]>>, dt: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservableDocument {
    Eigen { eigenbasis: Vec<Vec<[f64; 2]>>, eigenvalues: Vec<f64> },
    Matrix { matrix: Vec<Vec<[f64; 2]>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointerDocument {
    pub profile: String,
    #[serde(default)]
    pub width: f64,
}

fn complex(pair: &[f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn pair(z: &Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn state_from(
    pairs: &[[f64; 2]],
    dim: usize,
    auto_normalize: bool,
    field: &str,
) -> Result<StateVector, DocError> {
    if pairs.len() != dim {
        return Err(DocError::Parse(format!(
            "{field}: expected {dim} amplitudes, found {}",
            pairs.len()
        )));
    }
    let amps: Vec<Complex64> = pairs.iter().map(complex).collect();
    match StateVector::new(amps.clone()) {
        Ok(v) => Ok(v),
        Err(weakpath_core::Error::NotNormalized { norm }) => {
            if (norm - 1.0).abs() <= NORM_SLACK || auto_normalize {
                StateVector::normalized(amps)
                    .map_err(|e| DocError::Validation(format!("{field}: {e}")))
            } else {
                Err(DocError::Validation(format!(
                    "{field}: state norm {norm} deviates from 1 by more than {NORM_SLACK} \
                     (set auto_normalize to rescale)"
                )))
            }
        }
        Err(e) => Err(DocError::Validation(format!("{field}: {e}"))),
    }
}

fn matrix_from(rows: &[Vec<[f64; 2]>], dim: usize, field: &str) -> Result<Operator, DocError> {
    if rows.len() != dim {
        return Err(DocError::Parse(format!(
            "{field}: expected {dim} rows, found {}",
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(DocError::Parse(format!(
                "{field}: row {i} has {} columns, expected {dim}",
                row.len()
            )));
        }
    }
    let entries: Vec<Complex64> = rows.iter().flatten().map(complex).collect();
    Operator::new(dim, entries).map_err(|e| DocError::Validation(format!("{field}: {e}")))
}

fn unitary_from(
    doc: &Option<EvolutionDocument>,
    dim: usize,
    field: &str,
) -> Result<Unitary, DocError> {
    match doc {
        None => Ok(Unitary::identity(dim)),
        Some(EvolutionDocument::Matrix { matrix }) => {
            let op = matrix_from(matrix, dim, field)?;
            Unitary::new(op).map_err(|e| DocError::Validation(format!("{field}: {e}")))
        }
        Some(EvolutionDocument::Hamiltonian { hamiltonian, dt }) => {
            let op = matrix_from(hamiltonian, dim, field)?;
            propagator(&op, *dt).map_err(|e| DocError::Validation(format!("{field}: {e}")))
        }
    }
}

fn observable_from(
    doc: &ObservableDocument,
    dim: usize,
    auto_normalize: bool,
    field: &str,
) -> Result<SpectralDecomposition, DocError> {
    match doc {
        ObservableDocument::Matrix { matrix } => {
            let op = matrix_from(matrix, dim, field)?;
            spectral(&op, 1e-9).map_err(|e| DocError::Validation(format!("{field}: {e}")))
        }
        ObservableDocument::Eigen { eigenbasis, eigenvalues } => {
            if eigenbasis.len() != dim {
                return Err(DocError::Parse(format!(
                    "{field}.eigenbasis: expected {dim} vectors, found {}",
                    eigenbasis.len()
                )));
            }
            let vectors = eigenbasis
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    state_from(v, dim, auto_normalize, &format!("{field}.eigenbasis[{i}]"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            SpectralDecomposition::from_eigensystem(vectors, eigenvalues.clone(), 1e-9)
                .map_err(|e| DocError::Validation(format!("{field}: {e}")))
        }
    }
}

fn pointer_from(doc: &PointerDocument, field: &str) -> Result<PointerSpec, DocError> {
    match doc.profile.as_str() {
        "gaussian" => PointerSpec::gaussian(doc.width)
            .map_err(|e| DocError::Validation(format!("{field}: {e}"))),
        "rectangular" => PointerSpec::rectangular(doc.width)
            .map_err(|e| DocError::Validation(format!("{field}: {e}"))),
        "delta" => Ok(PointerSpec::delta()),
        other => Err(DocError::Parse(format!(
            "{field}.profile: unknown profile {other:?} (use gaussian, rectangular, or delta)"
        ))),
    }
}

/// Builds a validated scenario from a parsed document.
pub fn scenario_from_document(doc: &ScenarioDocument) -> Result<Scenario, DocError> {
    if doc.version != FORMAT_VERSION {
        return Err(DocError::Parse(format!(
            "unsupported document version {} (this tool reads version {FORMAT_VERSION})",
            doc.version
        )));
    }
    let dim = doc.dim;
    let initial = state_from(&doc.initial, dim, doc.auto_normalize, "initial")?;
    let mut steps = Vec::with_capacity(doc.steps.len());
    for (i, step) in doc.steps.iter().enumerate() {
        let evolution = unitary_from(&step.evolution, dim, &format!("steps[{i}].evolution"))?;
        let observable = observable_from(
            &step.observable,
            dim,
            doc.auto_normalize,
            &format!("steps[{i}].observable"),
        )?;
        let pointer = pointer_from(&step.pointer, &format!("steps[{i}].pointer"))?;
        steps.push(ScenarioStep { evolution, measurement: MeasurementStep { observable, pointer } });
    }
    let final_evolution = unitary_from(&doc.final_evolution, dim, "final_evolution")?;
    let postselect = state_from(&doc.postselect, dim, doc.auto_normalize, "postselect")?;
    Scenario::new(initial, steps, final_evolution, Postselection::State(postselect))
        .map_err(|e| DocError::Validation(e.to_string()))
}

/// Parses the JSON text of a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, DocError> {
    let doc: ScenarioDocument = serde_json::from_str(text).map_err(|e| {
        DocError::Parse(format!("line {}, column {}: {e}", e.line(), e.column()))
    })?;
    scenario_from_document(&doc)
}

/// Exports a scenario back into document form. Observables are written as
/// eigenbasis plus eigenvalues so the path-label order survives a round trip.
pub fn document_from_scenario(s: &Scenario) -> Result<ScenarioDocument, DocError> {
    let postselect = s
        .postselect_state()
        .map_err(|_| {
            DocError::Validation(
                "the document format stores a pure post-selected state".to_string(),
            )
        })?
        .amps()
        .iter()
        .map(pair)
        .collect();
    let matrix_of = |u: &Unitary| -> Vec<Vec<[f64; 2]>> {
        (0..u.dim())
            .map(|i| (0..u.dim()).map(|j| pair(&u.operator().get(i, j))).collect())
            .collect()
    };
    let steps = s
        .steps()
        .iter()
        .map(|step| StepDocument {
            evolution: Some(EvolutionDocument::Matrix { matrix: matrix_of(&step.evolution) }),
            observable: ObservableDocument::Eigen {
                eigenbasis: step
                    .measurement
                    .observable
                    .eigenvectors()
                    .iter()
                    .map(|v| v.amps().iter().map(pair).collect())
                    .collect(),
                eigenvalues: step.measurement.observable.eigenvalues().to_vec(),
            },
            pointer: PointerDocument {
                profile: match step.measurement.pointer.profile() {
                    Profile::Gaussian => "gaussian".to_string(),
                    Profile::Rectangular => "rectangular".to_string(),
                    Profile::Delta => "delta".to_string(),
                },
                width: step.measurement.pointer.width(),
            },
        })
        .collect();
    Ok(ScenarioDocument {
        version: FORMAT_VERSION,
        dim: s.dim(),
        initial: s.initial().amps().iter().map(pair).collect(),
        auto_normalize: false,
        steps,
        final_evolution: Some(EvolutionDocument::Matrix { matrix: matrix_of(s.final_evolution()) }),
        postselect,
    })
}

/// Canonical JSON used both for files and for fingerprinting.
pub fn canonical_json(doc: &ScenarioDocument) -> String {
    serde_json::to_string_pretty(doc).expect("document serialization cannot fail")
}
