//! Kraus operators for a feasible transformation, channel application and
//! Choi matrices.
//!
//! With `M = C C^dagger` and reciprocal states `|dual_j>` normalized so that
//! `<dual_j|psi1_j> = 1`, the operators
//!
//! ```text
//! A_k = sum_j c_jk |psi2_j><dual_j|
//! ```
//!
//! satisfy `A_k |psi1_j> = c_jk |psi2_j>` and `sum_k A_k^dagger A_k = 1` on
//! the span of the initial states. When the initial states do not span the
//! whole space, one more operator (the projector onto the orthogonal
//! complement) completes the identity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::feasibility::{assess, Verdict};
use crate::numerics::{
    complement_basis, frobenius, hermitian_eig, hermitian_residual, outer, projector, psd_factor,
    trace, ComplexMatrix, ComplexVector, Tolerances, ONE,
};
use crate::states::{dual_states_in_span, span_basis, StateSet};

/// Operators `A_k` of an operator-sum representation, all `D x D`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    pub dimension: usize,
    pub operators: Vec<ComplexMatrix>,
    /// The `N x K` factor with `M = C C^dagger`, when synthesized.
    pub c_factor: Option<ComplexMatrix>,
    pub initial_fingerprint: Option<String>,
    pub final_fingerprint: Option<String>,
}

impl KrausSet {
    pub fn new(dimension: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if dimension == 0 || operators.is_empty() {
            return Err(Error::InvalidDimensions(
                "a Kraus set needs D >= 1 and at least one operator".into(),
            ));
        }
        for (k, a) in operators.iter().enumerate() {
            if a.nrows() != dimension || a.ncols() != dimension {
                return Err(Error::InvalidDimensions(format!(
                    "operator {k} is {}x{}, expected {dimension}x{dimension}",
                    a.nrows(),
                    a.ncols()
                )));
            }
            if !crate::numerics::is_finite(a) {
                return Err(Error::NotFinite);
            }
        }
        Ok(Self {
            dimension,
            operators,
            c_factor: None,
            initial_fingerprint: None,
            final_fingerprint: None,
        })
    }

    pub fn identity(dimension: usize) -> Self {
        Self::new(
            dimension,
            vec![ComplexMatrix::identity(dimension, dimension)],
        )
        .expect("identity is a valid Kraus set")
    }

    /// Complete projective measurement in the computational basis, outcome
    /// discarded: `A_k = |k><k|`.
    pub fn basis_measurement(dimension: usize) -> Self {
        let ops = (0..dimension)
            .map(|k| {
                let mut a = ComplexMatrix::zeros(dimension, dimension);
                a[(k, k)] = ONE;
                a
            })
            .collect();
        Self::new(dimension, ops).expect("projectors are a valid Kraus set")
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// `sum_k A_k^dagger A_k`.
    pub fn completeness_sum(&self) -> ComplexMatrix {
        let mut sum = ComplexMatrix::zeros(self.dimension, self.dimension);
        for a in &self.operators {
            sum += a.adjoint() * a;
        }
        sum
    }

    /// Copy without operator `k`.
    pub fn without(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.operators.remove(k);
        out
    }
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity and unit trace within `tol`, and positivity
    /// within `100 * tol`.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::InvalidDimensions(format!(
                "density matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !crate::numerics::is_finite(&m) {
            return Err(Error::NotFinite);
        }
        let residual = hermitian_residual(&m);
        if residual > tol {
            return Err(Error::NotHermitian { residual });
        }
        let tr = trace(&m);
        if (tr - ONE).norm() > tol {
            return Err(Error::Input(format!("density matrix has trace {tr}")));
        }
        let eig = hermitian_eig(&m, 1.0)?;
        if eig.min_eigenvalue() < -100.0 * tol {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min_eigenvalue(),
            });
        }
        Ok(Self(m))
    }

    /// `|psi><psi|` for a vector renormalized to unit length.
    pub fn pure(psi: &ComplexVector) -> Result<Self> {
        let norm = psi.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::ZeroVector { norm });
        }
        Ok(Self(projector(&psi.unscale(norm))))
    }

    pub fn maximally_mixed(dimension: usize) -> Self {
        Self(ComplexMatrix::identity(dimension, dimension).unscale(dimension as f64))
    }

    pub(crate) fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn dimension(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// `<psi| rho |psi>` (real part).
    pub fn expectation(&self, psi: &ComplexVector) -> f64 {
        psi.dotc(&(&self.0 * psi)).re
    }
}

/// `D^2 x D^2` Choi matrix `sum_k |A_k>><<A_k|` with input index major:
/// row `a * D + i` holds `(A_k)_{i a}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    pub dimension: usize,
    pub matrix: ComplexMatrix,
}

impl ChoiMatrix {
    /// Trace over the output factor; the identity for trace-preserving maps.
    pub fn partial_trace_output(&self) -> ComplexMatrix {
        let d = self.dimension;
        ComplexMatrix::from_fn(d, d, |a, b| {
            (0..d).map(|i| self.matrix[(a * d + i, b * d + i)]).sum()
        })
    }

    pub fn distance(&self, other: &ChoiMatrix) -> f64 {
        frobenius(&(&self.matrix - &other.matrix))
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(hermitian_eig(&self.matrix, 1e-9)?.eigenvalues)
    }
}

/// Builds the Kraus set realizing `initial -> target`.
///
/// The instance must be `Feasible`; the number of operators equals the
/// numerical rank of `M`.
pub fn synthesize(initial: &StateSet, target: &StateSet, tol: &Tolerances) -> Result<KrausSet> {
    let assessment = assess(initial, target, tol)?;
    if assessment.report.verdict != Verdict::Feasible {
        let mut why = assessment.report.verdict.as_str().to_string();
        for n in &assessment.report.notes {
            why.push_str("; ");
            why.push_str(n);
        }
        return Err(Error::NotFeasible(why));
    }
    let m = assessment.m.expect("feasible verdicts carry their M");
    let c = psd_factor(&m, tol.psd, tol.rank)?;
    kraus_from_factor(initial, target, &c, tol)
}

/// Kraus operators `A_k = sum_j c_jk |psi2_j><dual_j|` for a given factor `C`
/// (`N x K`). No feasibility check is made; completeness holds exactly when
/// `C C^dagger` reproduces `M` on its defined entries.
pub fn kraus_from_factor(
    initial: &StateSet,
    target: &StateSet,
    c: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<KrausSet> {
    let n = initial.len();
    let d = initial.dimension();
    if target.len() != n {
        return Err(Error::SizeMismatch {
            initial: n,
            target: target.len(),
        });
    }
    if target.dimension() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: target.dimension(),
        });
    }
    if c.nrows() != n || c.ncols() == 0 {
        return Err(Error::InvalidDimensions(format!(
            "factor is {}x{}, expected {n} rows and at least one column",
            c.nrows(),
            c.ncols()
        )));
    }
    let duals = dual_states_in_span(initial, tol.rank)?;
    // Outside the initial span: an isometry T from the complement of the
    // initial span into the complement of the final span, weighted by the
    // first row of C. Since sum_k |c_0k|^2 = M_00 = 1 this contributes
    // T^dagger T to the completeness sum, and it transforms with C under
    // C -> C W, so the channel stays independent of the factor chosen.
    let outside = if n < d {
        let comp1 = complement_basis(&span_basis(initial, tol.rank));
        let comp2 = complement_basis(&span_basis(target, tol.rank));
        if comp2.ncols() < comp1.ncols() {
            return Err(Error::DimensionError(
                "final states span more dimensions than the initial states".into(),
            ));
        }
        Some(comp2.columns(0, comp1.ncols()) * comp1.adjoint())
    } else {
        None
    };
    let mut operators = Vec::with_capacity(c.ncols());
    for k in 0..c.ncols() {
        let mut a = match &outside {
            Some(t) => t * c[(0, k)],
            None => ComplexMatrix::zeros(d, d),
        };
        for j in 0..n {
            let cjk = c[(j, k)];
            if cjk != Complex64::new(0.0, 0.0) {
                a += outer(target.state(j), &duals.duals[j]) * cjk;
            }
        }
        operators.push(a);
    }
    let mut ks = KrausSet::new(d, operators)?;
    ks.c_factor = Some(c.clone());
    ks.initial_fingerprint = Some(initial.fingerprint());
    ks.final_fingerprint = Some(target.fingerprint());
    Ok(ks)
}

/// `||sum_k A_k^dagger A_k - I||_F`.
pub fn verify_completeness(ks: &KrausSet) -> f64 {
    let d = ks.dimension;
    frobenius(&(ks.completeness_sum() - ComplexMatrix::identity(d, d)))
}

/// `sum_k A_k rho A_k^dagger`, re-Hermitized as `(rho' + rho'^dagger) / 2`.
pub fn apply_channel(ks: &KrausSet, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dimension() != ks.dimension {
        return Err(Error::DimensionMismatch {
            expected: ks.dimension,
            got: rho.dimension(),
        });
    }
    let mut out = ComplexMatrix::zeros(ks.dimension, ks.dimension);
    for a in &ks.operators {
        out += a * rho.matrix() * a.adjoint();
    }
    let herm = (&out + out.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_matrix_unchecked(herm))
}

/// Per-state outcome of a channel on the initial set.
#[derive(Debug, Clone)]
pub struct TransformRecord {
    pub index: usize,
    /// `<psi2_j| L(|psi1_j><psi1_j|) |psi2_j>`.
    pub fidelity: f64,
    /// `c_jk = <psi2_j| A_k |psi1_j>`.
    pub coefficients: Vec<Complex64>,
    /// `sum_k |c_jk|^2`.
    pub total_probability: f64,
    pub unit_total: bool,
}

pub fn transform_report(
    ks: &KrausSet,
    initial: &StateSet,
    target: &StateSet,
) -> Result<Vec<TransformRecord>> {
    for s in [initial, target] {
        if s.dimension() != ks.dimension {
            return Err(Error::DimensionMismatch {
                expected: ks.dimension,
                got: s.dimension(),
            });
        }
    }
    if initial.len() != target.len() {
        return Err(Error::SizeMismatch {
            initial: initial.len(),
            target: target.len(),
        });
    }
    let mut out = Vec::with_capacity(initial.len());
    for j in 0..initial.len() {
        let psi1 = initial.state(j);
        let psi2 = target.state(j);
        let rho = apply_channel(ks, &DensityMatrix::pure(psi1)?)?;
        let coefficients: Vec<Complex64> = ks
            .operators
            .iter()
            .map(|a| psi2.dotc(&(a * psi1)))
            .collect();
        let total_probability = coefficients.iter().map(|z| z.norm_sqr()).sum::<f64>();
        out.push(TransformRecord {
            index: j,
            fidelity: rho.expectation(psi2),
            coefficients,
            total_probability,
            unit_total: (total_probability - 1.0).abs() <= 1e-9,
        });
    }
    Ok(out)
}

pub fn kraus_to_choi(ks: &KrausSet) -> ChoiMatrix {
    let d = ks.dimension;
    let mut j = ComplexMatrix::zeros(d * d, d * d);
    for a in &ks.operators {
        let v = ComplexVector::from_fn(d * d, |row, _| a[(row % d, row / d)]);
        j += projector(&v);
    }
    ChoiMatrix {
        dimension: d,
        matrix: j,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::feasibility_check;
    use crate::states::{random_state_set, RandomMode};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn vecr(xs: &[f64]) -> ComplexVector {
        ComplexVector::from_iterator(xs.len(), xs.iter().map(|&x| Complex64::new(x, 0.0)))
    }

    fn set(d: usize, vs: &[&[f64]]) -> StateSet {
        StateSet::new(d, vs.iter().map(|v| vecr(v).normalize()).collect(), None).unwrap()
    }

    fn zero_plus() -> StateSet {
        set(2, &[&[1.0, 0.0], &[1.0, 1.0]])
    }

    fn cos_family(cos: f64) -> StateSet {
        set(2, &[&[1.0, 0.0], &[cos, (1.0 - cos * cos).sqrt()]])
    }

    #[test]
    fn identity_instance_gives_single_identity_operator() {
        let tol = Tolerances::default();
        let basis = StateSet::standard_basis(3).unwrap();
        let ks = synthesize(&basis, &basis, &tol).unwrap();
        assert_eq!(ks.len(), 1);
        assert!(frobenius(&(&ks.operators[0] - ComplexMatrix::identity(3, 3))) < 1e-12);

        let s = random_state_set(3, 3, 1, &RandomMode::Independent).unwrap();
        let ks = synthesize(&s, &s, &tol).unwrap();
        assert_eq!(ks.len(), 1);
        assert!(frobenius(&(&ks.operators[0] - ComplexMatrix::identity(3, 3))) < 1e-10);
    }

    #[test]
    fn orthonormal_initial_gives_d_operators() {
        let tol = Tolerances::default();
        let basis = StateSet::standard_basis(3).unwrap();
        let target = random_state_set(3, 3, 9, &RandomMode::Generic).unwrap();
        let ks = synthesize(&basis, &target, &tol).unwrap();
        assert_eq!(ks.len(), 3);
        for k in 0..3 {
            let expected = outer(target.state(k), basis.state(k));
            assert!(frobenius(&(&ks.operators[k] - expected)) < 1e-12);
        }
    }

    #[test]
    fn cos_point_nine_round_trip() {
        let tol = Tolerances::default();
        let ks = synthesize(&zero_plus(), &cos_family(0.9), &tol).unwrap();
        assert_eq!(ks.len(), 2);
        assert!(verify_completeness(&ks) <= 1e-9);
        for r in transform_report(&ks, &zero_plus(), &cos_family(0.9)).unwrap() {
            assert!(r.fidelity >= 1.0 - 1e-9);
            assert!(r.unit_total);
        }
    }

    #[test]
    fn synthesize_rejects_infeasible() {
        let err = synthesize(&zero_plus(), &cos_family(0.5), &Tolerances::default()).unwrap_err();
        assert!(matches!(err, Error::NotFeasible(_)));
    }

    #[test]
    fn per_state_action_and_coefficients() {
        let tol = Tolerances::default();
        let initial = zero_plus();
        let target = cos_family(0.8);
        let ks = synthesize(&initial, &target, &tol).unwrap();
        let c = ks.c_factor.clone().unwrap();
        for j in 0..2 {
            for (k, a) in ks.operators.iter().enumerate() {
                let diff = a * initial.state(j) - target.state(j) * c[(j, k)];
                assert!(diff.norm() <= 1e-9);
            }
        }
        let m = crate::feasibility::build_m(&initial, &target, &tol).unwrap();
        assert!(frobenius(&(&c * c.adjoint() - &m.entries)) <= 1e-9);
    }

    #[test]
    fn completeness_examples() {
        let mut rng_u = {
            use rand::SeedableRng;
            rand_chacha::ChaCha8Rng::seed_from_u64(1)
        };
        let u = crate::states::random_unitary(&mut rng_u, 3);
        let ks = KrausSet::new(3, vec![u]).unwrap();
        assert!(verify_completeness(&ks) < 1e-12);

        let ks = synthesize(&zero_plus(), &cos_family(0.9), &Tolerances::default()).unwrap();
        assert!(verify_completeness(&ks.without(1)) > 1e-9);
    }

    #[test]
    fn apply_examples() {
        let rho = DensityMatrix::pure(&vecr(&[0.6, 0.8])).unwrap();
        let out = apply_channel(&KrausSet::identity(2), &rho).unwrap();
        assert!(frobenius(&(out.matrix() - rho.matrix())) < 1e-15);

        let plus = DensityMatrix::pure(&vecr(&[1.0, 1.0])).unwrap();
        let out = apply_channel(&KrausSet::basis_measurement(2), &plus).unwrap();
        assert!(frobenius(&(out.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);

        let initial = zero_plus();
        let target = cos_family(0.9);
        let ks = synthesize(&initial, &target, &Tolerances::default()).unwrap();
        for j in 0..2 {
            let out = apply_channel(&ks, &DensityMatrix::pure(initial.state(j)).unwrap()).unwrap();
            assert!(frobenius(&(out.matrix() - projector(target.state(j)))) <= 1e-9);
            DensityMatrix::new(out.into_matrix(), 1e-12).unwrap();
        }

        let wrong = DensityMatrix::maximally_mixed(3);
        assert!(matches!(
            apply_channel(&KrausSet::identity(2), &wrong),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 3
            })
        ));
    }

    #[test]
    fn report_examples() {
        let basis = StateSet::standard_basis(2).unwrap();
        let rec = transform_report(&KrausSet::identity(2), &basis, &basis).unwrap();
        for r in &rec {
            assert_eq!(r.coefficients, vec![ONE]);
        }
        let rec = transform_report(&KrausSet::basis_measurement(2), &basis, &basis).unwrap();
        for r in &rec {
            for (k, c) in r.coefficients.iter().enumerate() {
                let expected = if k == r.index { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c.re, expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn choi_examples() {
        let id = kraus_to_choi(&KrausSet::identity(2));
        let ev = id.eigenvalues().unwrap();
        assert_abs_diff_eq!(ev[0], 2.0, epsilon = 1e-12);
        for l in &ev[1..] {
            assert_abs_diff_eq!(*l, 0.0, epsilon = 1e-12);
        }
        assert!(frobenius(&(id.partial_trace_output() - ComplexMatrix::identity(2, 2))) < 1e-15);

        let meas = kraus_to_choi(&KrausSet::basis_measurement(2));
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = ONE;
        expected[(3, 3)] = ONE;
        assert_eq!(meas.matrix, expected);
    }

    #[test]
    fn gauge_invariance_of_choi() {
        use rand::SeedableRng;
        let tol = Tolerances::default();
        let initial = random_state_set(3, 3, 4, &RandomMode::Independent).unwrap();
        let ks = synthesize(&initial, &initial, &tol).unwrap();
        let base = kraus_to_choi(&ks);
        let c = ks.c_factor.clone().unwrap();
        // pad C with zero columns so a 3x3 unitary can mix them
        let mut padded = ComplexMatrix::zeros(3, 3);
        padded.columns_mut(0, c.ncols()).copy_from(&c);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let w = crate::states::random_unitary(&mut rng, 3);
            let other = kraus_from_factor(&initial, &initial, &(&padded * w), &tol).unwrap();
            assert!(kraus_to_choi(&other).distance(&base) <= 1e-9);
        }
    }

    #[test]
    fn non_spanning_initial_set() {
        let tol = Tolerances::default();
        let initial = random_state_set(4, 2, 6, &RandomMode::Independent).unwrap();
        let target = initial.clone();
        let r = feasibility_check(&initial, &target, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Feasible);
        let ks = synthesize(&initial, &target, &tol).unwrap();
        assert_eq!(ks.len(), 1);
        assert!(verify_completeness(&ks) <= 1e-9);
        for rec in transform_report(&ks, &initial, &target).unwrap() {
            assert!(rec.fidelity >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn non_spanning_gauge_invariance() {
        let tol = Tolerances::default();
        let initial = random_state_set(4, 2, 11, &RandomMode::Independent).unwrap();
        let target =
            random_state_set(4, 2, 12, &RandomMode::UnitaryImageOf(initial.clone())).unwrap();
        let ks = synthesize(&initial, &target, &tol).unwrap();
        assert!(verify_completeness(&ks) <= 1e-9);
        let c = ks.c_factor.clone().unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let k = c.ncols().max(2);
        let mut padded = ComplexMatrix::zeros(2, k);
        padded.columns_mut(0, c.ncols()).copy_from(&c);
        let w = crate::states::random_unitary(&mut rng, k);
        let rotated = kraus_from_factor(&initial, &target, &(&padded * w), &tol).unwrap();
        assert!(kraus_to_choi(&ks).distance(&kraus_to_choi(&rotated)) <= 1e-9);
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = ComplexMatrix::identity(2, 2);
        assert!(DensityMatrix::new(m.clone(), 1e-12).is_err());
        m[(1, 1)] = Complex64::new(0.0, 0.0);
        assert!(DensityMatrix::new(m.clone(), 1e-12).is_ok());
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(m.clone(), 1e-12),
            Err(Error::NotHermitian { .. })
        ));
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(m, 1e-12),
            Err(Error::NotPsd { .. })
        ));
    }
}
