//! Purity of superpositions under a synthesized channel, and the unitary
//! relation it forces.
//!
//! If a channel maps independent states `|psi1_j>` to independent states
//! `|psi2_j>` and keeps a superposition `sum_j q_j |psi1_j>` pure, then `M`
//! restricted to the support of `q` has rank one with `M = n a a^dagger` and
//! `|a_j| = n^{-1/2}`, i.e. `mu_jj' = exp(i(phi_j - phi_j'))`. The two sets
//! are then related by a unitary up to per-state phases.

use std::collections::VecDeque;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feasibility::{assess, build_m, Verdict};
use crate::numerics::{
    complement_basis, fix_phase, frobenius, hermitian_eig, projector, ComplexMatrix, ComplexVector,
    Tolerances,
};
use crate::states::{dual_states_in_span, linear_independence, span_basis, superpose, StateSet};
use crate::synthesis::{apply_channel, synthesize, DensityMatrix, KrausSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoherenceVerdict {
    UnitaryRelated,
    Decohering,
}

impl CoherenceVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            CoherenceVerdict::UnitaryRelated => "UnitaryRelated",
            CoherenceVerdict::Decohering => "Decohering",
        }
    }
}

#[derive(Debug, Clone)]
pub struct CoherenceReport {
    /// Superposition coefficients `q` (empty for a pure set comparison).
    pub coefficients: Vec<Complex64>,
    pub support: Vec<usize>,
    /// `Tr(rho^2)` of the channel output, when a channel was applied.
    pub output_purity: Option<f64>,
    pub is_pure: Option<bool>,
    /// Leading eigenvector of the output, when pure.
    pub output_state: Option<ComplexVector>,
    /// `r_j` with `output_state = sum_j r_j |psi2_j>`, when the final set is
    /// independent.
    pub final_coefficients: Option<Vec<Complex64>>,
    pub extracted_unitary: Option<ComplexMatrix>,
    /// `phi_j` with `U |psi1_j> = exp(i phi_j) |psi2_j>`, indexed like `support`.
    pub phases: Option<Vec<f64>>,
    /// Eigenvalues of `M` restricted to the support, descending.
    pub m_eigenvalues: Option<Vec<f64>>,
    pub verdict: CoherenceVerdict,
    pub notes: Vec<String>,
}

impl CoherenceReport {
    fn empty(coefficients: Vec<Complex64>, support: Vec<usize>) -> Self {
        Self {
            coefficients,
            support,
            output_purity: None,
            is_pure: None,
            output_state: None,
            final_coefficients: None,
            extracted_unitary: None,
            phases: None,
            m_eigenvalues: None,
            verdict: CoherenceVerdict::Decohering,
            notes: Vec::new(),
        }
    }
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

fn check_fingerprints(ks: &KrausSet, initial: &StateSet, target: &StateSet) -> Result<()> {
    let ok = ks.initial_fingerprint.as_deref() == Some(initial.fingerprint().as_str())
        && ks.final_fingerprint.as_deref() == Some(target.fingerprint().as_str());
    if ok {
        Ok(())
    } else {
        Err(Error::FingerprintMismatch)
    }
}

/// Sends `sum_j q_j |psi1_j>` through `ks` and reports whether the output is
/// pure. `ks` must have been synthesized from `initial` and `target`.
pub fn coherence_probe(
    ks: &KrausSet,
    initial: &StateSet,
    target: &StateSet,
    q: &[Complex64],
    tol: &Tolerances,
) -> Result<CoherenceReport> {
    check_fingerprints(ks, initial, target)?;
    let sp = superpose(initial, q, 1e-12)?;
    if sp.support.len() < 2 {
        return Err(Error::SupportTooSmall(sp.support.len()));
    }
    let rho = apply_channel(ks, &DensityMatrix::pure(&sp.vector)?)?;
    let p = purity(&rho);
    let is_pure = 1.0 - p <= tol.purity;

    let mut report = CoherenceReport::empty(q.to_vec(), sp.support);
    report.output_purity = Some(p);
    report.is_pure = Some(is_pure);
    if is_pure {
        let eig = hermitian_eig(rho.matrix(), 1e-9)?;
        let top = eig.eigenvectors.column(0).into_owned();
        let top = &top * fix_phase(top.iter());
        if let Ok(duals) = dual_states_in_span(target, tol.rank) {
            report.final_coefficients = Some(duals.duals.iter().map(|d| d.dotc(&top)).collect());
        } else {
            report
                .notes
                .push("final states are dependent; expansion coefficients omitted".into());
        }
        report.output_state = Some(top);
        report.verdict = CoherenceVerdict::UnitaryRelated;
    }
    Ok(report)
}

/// Fills free entries of `M` (0/0 ratios) with the phases implied by the
/// defined entries, walking each connected component from its lowest index.
fn phase_completion(m: &crate::feasibility::MMatrix) -> ComplexMatrix {
    let n = m.len();
    let mut out = m.entries.clone();
    let mut phase: Vec<Option<f64>> = vec![None; n];
    for root in 0..n {
        if phase[root].is_some() {
            continue;
        }
        phase[root] = Some(0.0);
        let mut queue = VecDeque::from([root]);
        while let Some(j) = queue.pop_front() {
            let pj = phase[j].expect("queued nodes have phases");
            #[allow(clippy::needless_range_loop)]
            for k in 0..n {
                if k != j && phase[k].is_none() && m.is_defined(j, k) {
                    // mu_jk = exp(i(phi_j - phi_k))
                    phase[k] = Some(pj - m.entries[(j, k)].arg());
                    queue.push_back(k);
                }
            }
        }
    }
    for (j, k) in m.free_pairs() {
        let z = Complex64::from_polar(1.0, phase[j].unwrap() - phase[k].unwrap());
        out[(j, k)] = z;
        out[(k, j)] = z.conj();
    }
    out
}

fn wrap_angle(x: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut y = x.rem_euclid(two_pi);
    if y > std::f64::consts::PI {
        y -= two_pi;
    }
    y
}

/// Tests whether the states on `support` are related by a unitary up to
/// phases, and extracts it when they are.
pub fn unitary_relation_test(
    initial: &StateSet,
    target: &StateSet,
    support: &[usize],
    tol: &Tolerances,
) -> Result<CoherenceReport> {
    if support.len() < 2 {
        return Err(Error::SupportTooSmall(support.len()));
    }
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != support.len() {
        return Err(Error::Input("support contains repeated indices".into()));
    }
    if initial.len() != target.len() {
        return Err(Error::SizeMismatch {
            initial: initial.len(),
            target: target.len(),
        });
    }
    if initial.dimension() != target.dimension() {
        return Err(Error::DimensionMismatch {
            expected: initial.dimension(),
            got: target.dimension(),
        });
    }
    let s1 = initial.restrict(support)?;
    let s2 = target.restrict(support)?;
    for s in [&s1, &s2] {
        let li = linear_independence(s, tol.rank);
        if !li.independent {
            return Err(Error::NotIndependent {
                rank: li.rank,
                count: s.len(),
            });
        }
    }

    let n = support.len();
    let mut report = CoherenceReport::empty(Vec::new(), support.to_vec());
    let m = build_m(&s1, &s2, tol)?;
    if !m.forced_infeasible.is_empty() {
        report
            .notes
            .push("an overlap vanishes in one set but not the other".into());
        return Ok(report);
    }
    debug_assert_eq!(m.trace(), Complex64::new(n as f64, 0.0));
    let full = if m.is_fully_defined() {
        m.entries.clone()
    } else {
        report.notes.push(format!(
            "{} vanishing overlap pair(s) filled from neighbouring phases",
            m.free_pairs().len()
        ));
        phase_completion(&m)
    };

    let eig = hermitian_eig(&full, tol.psd)?;
    report.m_eigenvalues = Some(eig.eigenvalues.clone());
    let top = eig.max_eigenvalue();
    let rest = eig.eigenvalues[1..]
        .iter()
        .fold(0.0_f64, |acc, l| acc.max(l.abs()));
    let a = eig.eigenvectors.column(0).into_owned();
    let target_mod = (n as f64).powf(-0.5);
    let spread = a
        .iter()
        .map(|z| (z.norm() - target_mod).abs() / target_mod)
        .fold(0.0_f64, f64::max);

    let rank_one = top > 0.0 && rest / top <= tol.rank_gap;
    let top_ok = (top - n as f64).abs() <= tol.rank_gap * n as f64;
    let equal_moduli = spread <= tol.modulus_spread;
    if !(rank_one && top_ok && equal_moduli) {
        report.notes.push(format!(
            "M is not of the form n a a^dagger with |a_j| equal \
             (lambda2/lambda1 = {:.3e}, modulus spread = {:.3e})",
            rest / top.abs().max(f64::MIN_POSITIVE),
            spread
        ));
        return Ok(report);
    }

    let raw_phases: Vec<f64> = a.iter().map(|z| z.arg()).collect();
    let d = initial.dimension();
    let duals = dual_states_in_span(&s1, tol.rank)?;
    let mut u = ComplexMatrix::zeros(d, d);
    for ((psi2, dual), &phi) in s2.states().iter().zip(&duals.duals).zip(&raw_phases) {
        u += crate::numerics::outer(psi2, dual) * Complex64::from_polar(1.0, phi);
    }
    let comp1 = complement_basis(&span_basis(&s1, tol.rank));
    let comp2 = complement_basis(&span_basis(&s2, tol.rank));
    if comp1.ncols() != comp2.ncols() {
        return Err(Error::DimensionError(
            "initial and final spans have different dimensions".into(),
        ));
    }
    u += &comp2 * comp1.adjoint();

    let gauge = fix_phase(u.column(0).iter());
    u *= gauge;
    let phases: Vec<f64> = raw_phases
        .iter()
        .map(|p| wrap_angle(p + gauge.arg()))
        .collect();

    let unitarity = frobenius(&(u.adjoint() * &u - ComplexMatrix::identity(d, d)));
    let state_residual = (0..n)
        .map(|j| {
            let image = &u * s1.state(j);
            frobenius(&(projector(s2.state(j)) - projector(&image)))
        })
        .fold(0.0_f64, f64::max);
    if unitarity > tol.unitary || state_residual > tol.unitary {
        report.notes.push(format!(
            "extracted operator failed verification (unitarity {unitarity:.3e}, \
             state residual {state_residual:.3e})"
        ));
        return Ok(report);
    }
    report.extracted_unitary = Some(u);
    report.phases = Some(phases);
    report.verdict = CoherenceVerdict::UnitaryRelated;
    Ok(report)
}

/// Consistency record tying the purity probe to the unitary-relation test.
#[derive(Debug, Clone)]
pub struct RoundTrip {
    pub probe: CoherenceReport,
    pub relation: CoherenceReport,
    /// Probe purity and relation verdict agree.
    pub agree: bool,
    /// `Q` with `Q |psi2_j> = e_j`, built from the final-set duals (`N x D`).
    pub orthogonaliser: ComplexMatrix,
    /// `|| Q rho Q^dagger - [q_j conj(q_j') mu_jj'] ||_F`.
    pub expansion_residual: f64,
    /// `|| r r^dagger - [q_j conj(q_j') mu_jj'] ||_F`, when the output is pure.
    pub coefficient_law_residual: Option<f64>,
}

impl RoundTrip {
    pub fn verdict(&self) -> CoherenceVerdict {
        self.relation.verdict
    }
}

/// Runs the probe and the relation test on the same instance and checks that
/// they agree. The instance must be `Feasible` with an independent final set.
pub fn coherence_roundtrip(
    initial: &StateSet,
    target: &StateSet,
    q: &[Complex64],
    tol: &Tolerances,
) -> Result<RoundTrip> {
    let assessment = assess(initial, target, tol)?;
    if assessment.report.verdict != Verdict::Feasible {
        return Err(Error::NotFeasible(
            assessment.report.verdict.as_str().to_string(),
        ));
    }
    let li2 = linear_independence(target, tol.rank);
    if !li2.independent {
        return Err(Error::NotIndependent {
            rank: li2.rank,
            count: target.len(),
        });
    }
    let m = assessment.m.expect("feasible verdicts carry their M");
    let ks = synthesize(initial, target, tol)?;
    let probe = coherence_probe(&ks, initial, target, q, tol)?;
    let relation = unitary_relation_test(initial, target, &probe.support, tol)?;
    let agree = probe.is_pure == Some(relation.verdict == CoherenceVerdict::UnitaryRelated);

    let sp = superpose(initial, q, 1e-12)?;
    let qn: Vec<Complex64> = q.iter().map(|z| z / sp.norm).collect();
    let n = initial.len();
    let expected = ComplexMatrix::from_fn(n, n, |j, k| qn[j] * qn[k].conj() * m[(j, k)]);

    let duals = dual_states_in_span(target, tol.rank)?;
    let orthogonaliser = duals.as_matrix().adjoint();
    let rho = apply_channel(&ks, &DensityMatrix::pure(&sp.vector)?)?;
    let mapped = &orthogonaliser * rho.matrix() * orthogonaliser.adjoint();
    let expansion_residual = frobenius(&(mapped - &expected));

    let coefficient_law_residual = probe.final_coefficients.as_ref().map(|r| {
        let r = ComplexVector::from_column_slice(r);
        frobenius(&(projector(&r) - &expected))
    });

    Ok(RoundTrip {
        probe,
        relation,
        agree,
        orthogonaliser,
        expansion_residual,
        coefficient_law_residual,
    })
}
