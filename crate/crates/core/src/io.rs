//! JSON wire formats. Complex numbers are `[re, im]` pairs; matrices are
//! lists of rows.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coherence::{CoherenceReport, RoundTrip};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexVector};
use crate::states::StateSet;
use crate::synthesis::{DensityMatrix, KrausSet, TransformRecord};

/// Largest norm deviation accepted (and corrected) when loading states.
pub const LOAD_NORM_DEVIATION: f64 = 1e-6;

pub type Wire = [f64; 2];

pub fn to_wire(z: Complex64) -> Wire {
    [z.re, z.im]
}

pub fn from_wire(w: Wire) -> Complex64 {
    Complex64::new(w[0], w[1])
}

pub fn vector_to_wire(v: &ComplexVector) -> Vec<Wire> {
    v.iter().copied().map(to_wire).collect()
}

pub fn matrix_to_wire(m: &ComplexMatrix) -> Vec<Vec<Wire>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| to_wire(m[(i, j)])).collect())
        .collect()
}

pub fn matrix_from_wire(rows: &[Vec<Wire>]) -> Result<ComplexMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape("matrix rows have different lengths".into()));
    }
    Ok(ComplexMatrix::from_fn(nrows, ncols, |i, j| {
        from_wire(rows[i][j])
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSetFile {
    pub dimension: usize,
    pub states: Vec<Vec<Wire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl StateSetFile {
    pub fn from_set(s: &StateSet) -> Self {
        Self {
            dimension: s.dimension(),
            states: s.states().iter().map(vector_to_wire).collect(),
            labels: s.labels().map(<[String]>::to_vec),
        }
    }

    pub fn into_set(self) -> Result<StateSet> {
        let states = self
            .states
            .into_iter()
            .map(|v| ComplexVector::from_iterator(v.len(), v.into_iter().map(from_wire)))
            .collect();
        StateSet::normalized(self.dimension, states, self.labels, LOAD_NORM_DEVIATION)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Verification {
    pub completeness_residual: f64,
    pub fidelities: Vec<f64>,
}

impl Verification {
    pub fn from_records(completeness_residual: f64, records: &[TransformRecord]) -> Self {
        Self {
            completeness_residual,
            fidelities: records.iter().map(|r| r.fidelity).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrausFile {
    pub dimension: usize,
    pub operators: Vec<Vec<Vec<Wire>>>,
    #[serde(default)]
    pub c_factor: Option<Vec<Vec<Wire>>>,
    #[serde(default)]
    pub initial_fingerprint: Option<String>,
    #[serde(default)]
    pub final_fingerprint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
}

impl KrausFile {
    pub fn from_set(ks: &KrausSet, verification: Option<Verification>) -> Self {
        Self {
            dimension: ks.dimension,
            operators: ks.operators.iter().map(matrix_to_wire).collect(),
            c_factor: ks.c_factor.as_ref().map(matrix_to_wire),
            initial_fingerprint: ks.initial_fingerprint.clone(),
            final_fingerprint: ks.final_fingerprint.clone(),
            verification,
        }
    }

    pub fn into_set(self) -> Result<KrausSet> {
        let ops = self
            .operators
            .iter()
            .map(|m| matrix_from_wire(m))
            .collect::<Result<Vec<_>>>()?;
        let mut ks = KrausSet::new(self.dimension, ops)?;
        ks.c_factor = self.c_factor.as_deref().map(matrix_from_wire).transpose()?;
        ks.initial_fingerprint = self.initial_fingerprint;
        ks.final_fingerprint = self.final_fingerprint;
        Ok(ks)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityFile {
    pub dimension: usize,
    pub matrix: Vec<Vec<Wire>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purity: Option<f64>,
}

impl DensityFile {
    pub fn from_density(rho: &DensityMatrix, purity: Option<f64>) -> Self {
        Self {
            dimension: rho.dimension(),
            matrix: matrix_to_wire(rho.matrix()),
            purity,
        }
    }

    pub fn into_density(self, tol: f64) -> Result<DensityMatrix> {
        let m = matrix_from_wire(&self.matrix)?;
        if m.nrows() != self.dimension || m.ncols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: m.nrows(),
            });
        }
        DensityMatrix::new(m, tol)
    }
}

/// Input accepted by `apply`: a density matrix, a single state, or a state
/// set (one member selected by index).
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ApplyInput {
    Density(DensityFile),
    State { dimension: usize, state: Vec<Wire> },
    Set(StateSetFile),
}

impl ApplyInput {
    pub fn into_density(self, index: usize, tol: f64) -> Result<DensityMatrix> {
        match self {
            ApplyInput::Density(d) => d.into_density(tol),
            ApplyInput::State { dimension, state } => {
                let v = ComplexVector::from_iterator(state.len(), state.into_iter().map(from_wire));
                let set = StateSet::normalized(dimension, vec![v], None, LOAD_NORM_DEVIATION)?;
                DensityMatrix::pure(set.state(0))
            }
            ApplyInput::Set(f) => {
                let set = f.into_set()?;
                if index >= set.len() {
                    return Err(Error::Input(format!(
                        "state index {index} out of range for {} states",
                        set.len()
                    )));
                }
                DensityMatrix::pure(set.state(index))
            }
        }
    }
}

/// JSON view of a coherence round trip.
#[derive(Debug, Clone, Serialize)]
pub struct CoherenceFile {
    pub verdict: &'static str,
    pub support: Vec<usize>,
    pub coefficients: Vec<Wire>,
    pub purity: Option<f64>,
    pub is_pure: Option<bool>,
    pub output_state: Option<Vec<Wire>>,
    pub final_coefficients: Option<Vec<Wire>>,
    pub phases: Option<Vec<f64>>,
    pub unitary: Option<Vec<Vec<Wire>>>,
    pub m_eigenvalues: Option<Vec<f64>>,
    pub agree: bool,
    pub expansion_residual: f64,
    pub coefficient_law_residual: Option<f64>,
    pub notes: Vec<String>,
}

impl CoherenceFile {
    pub fn from_roundtrip(rt: &RoundTrip) -> Self {
        let p: &CoherenceReport = &rt.probe;
        let t: &CoherenceReport = &rt.relation;
        let wires = |v: &[Complex64]| v.iter().copied().map(to_wire).collect::<Vec<_>>();
        let mut notes = p.notes.clone();
        notes.extend(t.notes.iter().cloned());
        Self {
            verdict: t.verdict.as_str(),
            support: p.support.clone(),
            coefficients: wires(&p.coefficients),
            purity: p.output_purity,
            is_pure: p.is_pure,
            output_state: p.output_state.as_ref().map(vector_to_wire),
            final_coefficients: p.final_coefficients.as_deref().map(wires),
            phases: t.phases.clone(),
            unitary: t.extracted_unitary.as_ref().map(matrix_to_wire),
            m_eigenvalues: t.m_eigenvalues.clone(),
            agree: rt.agree,
            expansion_residual: rt.expansion_residual,
            coefficient_law_residual: rt.coefficient_law_residual,
            notes,
        }
    }
}

/// One amplitude of a sweep template: a constant, or
/// `const + cos * cos(theta) + sin * sin(theta)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TemplateAmplitude {
    Fixed(Wire),
    Trig {
        #[serde(default, rename = "const")]
        constant: Option<Wire>,
        #[serde(default)]
        cos: Option<Wire>,
        #[serde(default)]
        sin: Option<Wire>,
    },
}

impl TemplateAmplitude {
    pub fn eval(&self, theta: f64) -> Complex64 {
        match self {
            TemplateAmplitude::Fixed(w) => from_wire(*w),
            TemplateAmplitude::Trig { constant, cos, sin } => {
                let part = |w: &Option<Wire>| w.map_or(Complex64::new(0.0, 0.0), from_wire);
                part(constant) + part(cos) * theta.cos() + part(sin) * theta.sin()
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetTemplate {
    pub dimension: usize,
    pub states: Vec<Vec<TemplateAmplitude>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl SetTemplate {
    pub fn instantiate(&self, theta: f64) -> Result<StateSet> {
        let states = self
            .states
            .iter()
            .map(|v| ComplexVector::from_iterator(v.len(), v.iter().map(|a| a.eval(theta))))
            .collect();
        StateSet::normalized(
            self.dimension,
            states,
            self.labels.clone(),
            LOAD_NORM_DEVIATION,
        )
    }
}

/// A pair of state-set families sharing one angle.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTemplate {
    pub initial: SetTemplate,
    #[serde(rename = "final")]
    pub target: SetTemplate,
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Input(format!("malformed {what}: {e}")))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text, what)
}

pub fn load_state_set(path: &Path) -> Result<StateSet> {
    read_json::<StateSetFile>(path, "state set")?.into_set()
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("wire types always serialize");
    s.push('\n');
    s
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so the target is either absent or complete.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io_err = |e: std::io::Error| Error::Input(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}
