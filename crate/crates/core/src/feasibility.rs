//! The ratio matrix `M` and the feasibility verdict for deterministic
//! transformations `|psi1_j> -> |psi2_j>`.
//!
//! `M` has entries `mu_jj' = <psi1_j'|psi1_j> / <psi2_j'|psi2_j>`. A channel
//! exists only if `M` is positive semidefinite, and for linearly independent
//! initial states positivity is also enough. Entries whose denominator
//! vanishes are undefined: with a nonzero numerator the instance is
//! impossible outright, with a vanishing numerator the entry is free.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    hermitian_eig, psd_check_from_eig, ComplexMatrix, ComplexVector, EigenDecomposition,
    Tolerances, ONE, ZERO,
};
use crate::states::{gram, linear_independence, StateSet};

#[derive(Debug, Clone)]
pub struct MMatrix {
    /// `mu_jj'` where defined, zero elsewhere.
    pub entries: ComplexMatrix,
    pub defined: DMatrix<bool>,
    /// Pairs `j < j'` whose final overlap vanishes while the initial overlap
    /// does not.
    pub forced_infeasible: Vec<(usize, usize)>,
    pub initial_dimension: usize,
    pub final_dimension: usize,
}

impl MMatrix {
    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_defined(&self, j: usize, k: usize) -> bool {
        self.defined[(j, k)]
    }

    pub fn is_fully_defined(&self) -> bool {
        self.defined.iter().all(|&d| d)
    }

    /// Undefined pairs `j < j'` with vanishing numerator.
    pub fn free_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for j in 0..n {
            for k in (j + 1)..n {
                if !self.defined[(j, k)] && !self.forced_infeasible.contains(&(j, k)) {
                    out.push((j, k));
                }
            }
        }
        out
    }

    /// `M` with every free entry set to `fill` (and its conjugate mirrored).
    /// `None` if some undefined entry is forced infeasible.
    pub fn completed(&self, fill: Complex64) -> Option<ComplexMatrix> {
        if !self.forced_infeasible.is_empty() {
            return None;
        }
        let mut m = self.entries.clone();
        for (j, k) in self.free_pairs() {
            m[(j, k)] = fill;
            m[(k, j)] = fill.conj();
        }
        Some(m)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.diagonal().iter().sum()
    }
}

fn check_sizes(initial: &StateSet, target: &StateSet) -> Result<()> {
    if initial.len() != target.len() {
        return Err(Error::SizeMismatch {
            initial: initial.len(),
            target: target.len(),
        });
    }
    Ok(())
}

/// Builds `M` from the two Gram matrices.
///
/// Entries with `|<psi2_j'|psi2_j>| <= tol` are undefined. The diagonal is
/// exactly 1.
pub fn build_m(initial: &StateSet, target: &StateSet, tol: &Tolerances) -> Result<MMatrix> {
    check_sizes(initial, target)?;
    if initial.dimension() != target.dimension() {
        return Err(Error::DimensionError(format!(
            "initial states live in dimension {}, final states in {}",
            initial.dimension(),
            target.dimension()
        )));
    }
    let initial_rank = linear_independence(initial, tol.rank).rank;
    let final_rank = linear_independence(target, tol.rank).rank;
    if final_rank > initial_rank {
        return Err(Error::DimensionError(format!(
            "final states span {final_rank} dimensions, initial states only {initial_rank}"
        )));
    }

    let g1 = gram(initial);
    let g2 = gram(target);
    let n = initial.len();
    let mut entries = ComplexMatrix::zeros(n, n);
    let mut defined = DMatrix::from_element(n, n, true);
    let mut forced_infeasible = Vec::new();
    for j in 0..n {
        entries[(j, j)] = ONE;
        for k in (j + 1)..n {
            let num = g1[(j, k)];
            let den = g2[(j, k)];
            if den.norm() > tol.psd {
                let mu = num / den;
                entries[(j, k)] = mu;
                entries[(k, j)] = mu.conj();
            } else {
                defined[(j, k)] = false;
                defined[(k, j)] = false;
                if num.norm() > tol.psd {
                    forced_infeasible.push((j, k));
                }
            }
        }
    }
    Ok(MMatrix {
        entries,
        defined,
        forced_infeasible,
        initial_dimension: initial.dimension(),
        final_dimension: target.dimension(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Feasible,
    Infeasible,
    NecessaryOnly,
    Undetermined,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Feasible => "Feasible",
            Verdict::Infeasible => "Infeasible",
            Verdict::NecessaryOnly => "NecessaryOnly",
            Verdict::Undetermined => "Undetermined",
        }
    }
}

/// Overlap moduli for one pair `j < k` of states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairRecord {
    pub j: usize,
    pub k: usize,
    pub initial_overlap: f64,
    pub final_overlap: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Independence {
    pub initial: bool,
    pub initial_rank: usize,
    #[serde(rename = "final")]
    pub target: bool,
    pub final_rank: usize,
}

/// How free entries of `M` were filled before the PSD test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Completion {
    /// Every entry was defined.
    None,
    /// Free entries set to 1.
    Ones,
    /// Free entries set to 0.
    Zeros,
}

#[derive(Debug, Clone, Serialize)]
pub struct FeasibilityReport {
    pub verdict: Verdict,
    /// Smallest eigenvalue of the (completed) `M`; `None` when `M` cannot be
    /// evaluated.
    pub min_eigenvalue: Option<f64>,
    pub violating_pairs: Vec<PairRecord>,
    pub independence: Independence,
    pub completion: Completion,
    pub notes: Vec<String>,
}

/// Report plus the `M` that certified it, when one did.
#[derive(Debug, Clone)]
pub(crate) struct Assessment {
    pub report: FeasibilityReport,
    pub m: Option<ComplexMatrix>,
}

/// For each pair `j < k`: `|<psi1_k|psi1_j>|`, `|<psi2_k|psi2_j>|` and whether
/// the initial overlap exceeds the final one by more than `tol`.
pub fn distinguishability_audit(
    initial: &StateSet,
    target: &StateSet,
    tol: f64,
) -> Result<Vec<PairRecord>> {
    check_sizes(initial, target)?;
    let g1 = gram(initial);
    let g2 = gram(target);
    let n = initial.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 0..n {
        for k in (j + 1)..n {
            let a = g1[(j, k)].norm();
            let b = g2[(j, k)].norm();
            out.push(PairRecord {
                j,
                k,
                initial_overlap: a,
                final_overlap: b,
                violation: a > b + tol,
            });
        }
    }
    Ok(out)
}

/// The unit vector `(e_j - exp(-i theta) e_k) / sqrt2` with
/// `theta = arg mu_jk`.
pub fn witness_vector(m: &MMatrix, j: usize, k: usize) -> Result<ComplexVector> {
    let n = m.len();
    if j >= n || k >= n {
        return Err(Error::InvalidDimensions(format!(
            "pair ({j}, {k}) out of range for {n} states"
        )));
    }
    if j == k {
        return Err(Error::Input("witness needs two distinct indices".into()));
    }
    if !m.is_defined(j, k) {
        return Err(Error::UndefinedEntry(j, k));
    }
    let theta = m.entries[(j, k)].arg();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = ComplexVector::zeros(n);
    v[j] = Complex64::new(s, 0.0);
    v[k] = -Complex64::from_polar(s, -theta);
    Ok(v)
}

/// `<v, M v>` for the pair witness vector; equals `1 - |mu_jk|`, and a
/// negative value certifies that no channel exists.
pub fn witness_value(m: &MMatrix, j: usize, k: usize) -> Result<f64> {
    let v = witness_vector(m, j, k)?;
    Ok(v.dotc(&(&m.entries * &v)).re)
}

fn min_eig(eig: &EigenDecomposition) -> Option<f64> {
    eig.eigenvalues.last().copied()
}

pub(crate) fn assess(
    initial: &StateSet,
    target: &StateSet,
    tol: &Tolerances,
) -> Result<Assessment> {
    let m = build_m(initial, target, tol)?;
    let pairs = distinguishability_audit(initial, target, tol.psd)?;
    let li1 = linear_independence(initial, tol.rank);
    let li2 = linear_independence(target, tol.rank);
    let independence = Independence {
        initial: li1.independent,
        initial_rank: li1.rank,
        target: li2.independent,
        final_rank: li2.rank,
    };
    let violating_pairs: Vec<PairRecord> = pairs.into_iter().filter(|p| p.violation).collect();
    let mut notes = Vec::new();

    if li1.independent && initial.len() < initial.dimension() {
        notes.push(format!(
            "initial states span a {}-dimensional subspace of dimension {}; \
             the complement is handled by an extra projector",
            li1.rank,
            initial.dimension()
        ));
    }
    if !li1.independent {
        notes.push(format!(
            "initial states are linearly dependent (rank {} of {}); positivity is only necessary",
            li1.rank,
            initial.len()
        ));
    }

    let mut report = FeasibilityReport {
        verdict: Verdict::Infeasible,
        min_eigenvalue: None,
        violating_pairs,
        independence,
        completion: Completion::None,
        notes,
    };

    if !m.forced_infeasible.is_empty() {
        for &(j, k) in &m.forced_infeasible {
            report.notes.push(format!(
                "states {j} and {k}: final overlap vanishes but initial overlap does not"
            ));
        }
        return Ok(Assessment { report, m: None });
    }

    let candidates: Vec<(Completion, ComplexMatrix)> = if m.is_fully_defined() {
        vec![(Completion::None, m.entries.clone())]
    } else {
        vec![
            (
                Completion::Ones,
                m.completed(ONE).expect("no forced entries"),
            ),
            (
                Completion::Zeros,
                m.completed(ZERO).expect("no forced entries"),
            ),
        ]
    };

    let mut psd_candidate = None;
    let mut first_min = None;
    for (completion, cand) in candidates {
        let eig = hermitian_eig(&cand, tol.psd)?;
        let check = psd_check_from_eig(&eig, tol.psd);
        if first_min.is_none() {
            first_min = min_eig(&eig);
        }
        if check.is_psd {
            psd_candidate = Some((completion, cand, check.min_eigenvalue));
            break;
        }
    }

    if !report.violating_pairs.is_empty() {
        report.min_eigenvalue = if m.is_fully_defined() {
            first_min
        } else {
            None
        };
        report.notes.push(format!(
            "{} pair(s) would become more distinguishable",
            report.violating_pairs.len()
        ));
        return Ok(Assessment { report, m: None });
    }

    match psd_candidate {
        Some((completion, cand, min_eigenvalue)) => {
            report.min_eigenvalue = Some(min_eigenvalue);
            report.completion = completion;
            if completion != Completion::None {
                report.notes.push(format!(
                    "{} free entr(ies) with vanishing overlaps completed with {}",
                    m.free_pairs().len(),
                    if completion == Completion::Ones {
                        "1"
                    } else {
                        "0"
                    }
                ));
            }
            report.verdict = if li1.independent {
                Verdict::Feasible
            } else {
                Verdict::NecessaryOnly
            };
            Ok(Assessment {
                report,
                m: Some(cand),
            })
        }
        None if m.is_fully_defined() => {
            report.min_eigenvalue = first_min;
            report.notes.push("M has a negative eigenvalue".into());
            Ok(Assessment { report, m: None })
        }
        None => {
            report.verdict = Verdict::Undetermined;
            report.notes.push(
                "M has free entries and neither canonical completion is positive semidefinite"
                    .into(),
            );
            Ok(Assessment { report, m: None })
        }
    }
}

/// Decides whether a channel maps every initial state to its final state.
///
/// - `Feasible`: initial states independent and `M` positive semidefinite.
/// - `Infeasible`: `M` has a negative eigenvalue, a pair would become more
///   distinguishable, or a final overlap vanishes where the initial one
///   does not.
/// - `NecessaryOnly`: `M` positive semidefinite but initial states dependent.
/// - `Undetermined`: free entries whose canonical completions are not PSD.
pub fn feasibility_check(
    initial: &StateSet,
    target: &StateSet,
    tol: &Tolerances,
) -> Result<FeasibilityReport> {
    assess(initial, target, tol).map(|a| a.report)
}
