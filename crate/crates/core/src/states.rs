//! Finite sets of pure states and the linear algebra around them: Gram
//! matrices, independence, reciprocal (dual) states and superpositions.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numerics::{
    frobenius, hermitian_eig, numerical_rank, orthonormal_basis, solve_linear, ComplexMatrix,
    ComplexVector, ONE, ZERO,
};

/// Largest deviation from unit norm accepted by [`StateSet::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Attempts made by [`RandomMode::Independent`] before giving up.
pub const MAX_REJECTIONS: usize = 1000;

/// `N` pure states in a `D`-dimensional complex space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSet {
    dimension: usize,
    states: Vec<ComplexVector>,
    labels: Option<Vec<String>>,
}

impl StateSet {
    /// Builds a state set, requiring every vector to have unit norm within
    /// [`NORM_TOL`].
    pub fn new(
        dimension: usize,
        states: Vec<ComplexVector>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        Self::validate_shape(dimension, &states, labels.as_deref())?;
        for (index, s) in states.iter().enumerate() {
            let norm = s.norm();
            if (norm - 1.0).abs() > NORM_TOL {
                return Err(Error::NotNormalized { index, norm });
            }
        }
        Ok(Self {
            dimension,
            states,
            labels,
        })
    }

    /// Builds a state set after rescaling each vector to unit norm. Vectors
    /// whose norm deviates from 1 by more than `max_deviation` are rejected.
    pub fn normalized(
        dimension: usize,
        states: Vec<ComplexVector>,
        labels: Option<Vec<String>>,
        max_deviation: f64,
    ) -> Result<Self> {
        Self::validate_shape(dimension, &states, labels.as_deref())?;
        let mut out = Vec::with_capacity(states.len());
        for (index, s) in states.into_iter().enumerate() {
            let norm = s.norm();
            if norm == 0.0 || (norm - 1.0).abs() > max_deviation {
                return Err(Error::NotNormalized { index, norm });
            }
            out.push(s.unscale(norm));
        }
        Ok(Self {
            dimension,
            states: out,
            labels,
        })
    }

    fn validate_shape(
        dimension: usize,
        states: &[ComplexVector],
        labels: Option<&[String]>,
    ) -> Result<()> {
        if dimension == 0 {
            return Err(Error::InvalidDimensions(
                "dimension must be at least 1".into(),
            ));
        }
        if states.is_empty() {
            return Err(Error::InvalidDimensions("state set is empty".into()));
        }
        for (j, s) in states.iter().enumerate() {
            if s.len() != dimension {
                return Err(Error::InvalidDimensions(format!(
                    "state {j} has {} amplitudes, expected {dimension}",
                    s.len()
                )));
            }
            if !s.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NotFinite);
            }
        }
        if let Some(labels) = labels {
            if labels.len() != states.len() {
                return Err(Error::InvalidDimensions(format!(
                    "{} labels for {} states",
                    labels.len(),
                    states.len()
                )));
            }
        }
        Ok(())
    }

    /// Computational basis `|0>, ..., |D-1>`.
    pub fn standard_basis(dimension: usize) -> Result<Self> {
        let states = (0..dimension)
            .map(|i| {
                let mut v = ComplexVector::zeros(dimension);
                v[i] = ONE;
                v
            })
            .collect();
        Self::new(dimension, states, None)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[ComplexVector] {
        &self.states
    }

    pub fn state(&self, j: usize) -> &ComplexVector {
        &self.states[j]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// `D x N` matrix whose columns are the states.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dimension, self.len());
        for (j, s) in self.states.iter().enumerate() {
            m.set_column(j, s);
        }
        m
    }

    /// Subset of the states at `indices`, in the given order.
    pub fn restrict(&self, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&j| j >= self.len()) {
            return Err(Error::InvalidDimensions(format!(
                "index {bad} out of range for {} states",
                self.len()
            )));
        }
        let states = indices.iter().map(|&j| self.states[j].clone()).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| indices.iter().map(|&j| l[j].clone()).collect());
        Self::new(self.dimension, states, labels)
    }

    /// Multiplies state `j` by `exp(i phases[j])`.
    pub fn with_phases(&self, phases: &[f64]) -> Result<Self> {
        if phases.len() != self.len() {
            return Err(Error::SizeMismatch {
                initial: self.len(),
                target: phases.len(),
            });
        }
        let states = self
            .states
            .iter()
            .zip(phases)
            .map(|(s, &p)| s * Complex64::from_polar(1.0, p))
            .collect();
        Ok(Self {
            dimension: self.dimension,
            states,
            labels: self.labels.clone(),
        })
    }

    /// Applies `u` to every state.
    pub fn transformed(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.nrows() != self.dimension || u.ncols() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: u.nrows(),
            });
        }
        let states = self.states.iter().map(|s| u * s).collect();
        Self::normalized(self.dimension, states, self.labels.clone(), 1e-9)
    }

    /// SHA-256 over the dimension and the bit patterns of all amplitudes.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dimension as u64).to_le_bytes());
        h.update((self.len() as u64).to_le_bytes());
        for s in &self.states {
            for z in s.iter() {
                h.update(z.re.to_le_bytes());
                h.update(z.im.to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// Gram matrix with entry `(j, j') = <psi_j'|psi_j>`.
pub fn gram(s: &StateSet) -> ComplexMatrix {
    let n = s.len();
    let mut g = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        g[(j, j)] = Complex64::new(s.states[j].norm_squared(), 0.0);
        for k in (j + 1)..n {
            let z = s.states[k].dotc(&s.states[j]);
            g[(j, k)] = z;
            g[(k, j)] = z.conj();
        }
    }
    g
}

#[derive(Debug, Clone)]
pub struct LinearIndependence {
    pub independent: bool,
    pub rank: usize,
    /// Orthonormal basis of the Gram null space. A null vector `v` encodes
    /// the dependency `sum_j conj(v_j) |psi_j> = 0`.
    pub null_vectors: Vec<ComplexVector>,
}

impl LinearIndependence {
    /// Coefficient vectors `q` with `sum_j q_j |psi_j> = 0`.
    pub fn dependencies(&self) -> Vec<ComplexVector> {
        self.null_vectors.iter().map(|v| v.conjugate()).collect()
    }
}

/// Numerical rank of the Gram matrix with eigenvalue cutoff `tol * lambda_max`.
pub fn linear_independence(s: &StateSet, tol: f64) -> LinearIndependence {
    let g = gram(s);
    let eig = hermitian_eig(&g, 1e-9).expect("Gram matrices are Hermitian and finite");
    let rank = numerical_rank(&eig, tol);
    let null_vectors = (rank..s.len())
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    LinearIndependence {
        independent: rank == s.len(),
        rank,
        null_vectors,
    }
}

/// Orthonormal basis (columns) of the span of the states: the leading
/// eigenvectors of `sum_j |psi_j><psi_j|`.
pub fn span_basis(s: &StateSet, tol: f64) -> ComplexMatrix {
    let psi = s.as_matrix();
    let frame = &psi * psi.adjoint();
    let eig = hermitian_eig(&frame, 1e-9).expect("frame operator is Hermitian and finite");
    let rank = numerical_rank(&eig, tol);
    eig.eigenvectors.columns(0, rank).into_owned()
}

/// Reciprocal states, normalized so that `<dual_j|psi_j'> = delta_jj'`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSet {
    pub dimension: usize,
    pub duals: Vec<ComplexVector>,
}

impl DualSet {
    /// `D x N` matrix whose columns are the duals.
    pub fn as_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dimension, self.duals.len());
        for (j, d) in self.duals.iter().enumerate() {
            m.set_column(j, d);
        }
        m
    }

    /// `||[<dual_j|psi_j'>] - I||_F`.
    pub fn biorthogonality_residual(&self, s: &StateSet) -> f64 {
        let overlaps = self.as_matrix().adjoint() * s.as_matrix();
        frobenius(&(overlaps - ComplexMatrix::identity(s.len(), s.len())))
    }

    /// `sum_j |psi_j><dual_j|`, the identity on the span of `s`.
    pub fn resolution(&self, s: &StateSet) -> ComplexMatrix {
        s.as_matrix() * self.as_matrix().adjoint()
    }
}

/// Dual states of an independent set that spans the whole space (`N = D`).
pub fn dual_states(s: &StateSet, tol: f64) -> Result<DualSet> {
    if s.len() != s.dimension() {
        return Err(Error::NotSpanning {
            count: s.len(),
            dimension: s.dimension(),
        });
    }
    dual_states_in_span(s, tol)
}

/// Dual states of an independent set, living in the span of the set. For
/// `N = D` this coincides with [`dual_states`].
pub fn dual_states_in_span(s: &StateSet, tol: f64) -> Result<DualSet> {
    let li = linear_independence(s, tol);
    if !li.independent {
        return Err(Error::NotIndependent {
            rank: li.rank,
            count: s.len(),
        });
    }
    let n = s.len();
    let psi = s.as_matrix();
    // Coordinates in an orthonormal basis of the span, then solve X^dagger Y = I.
    let (basis, coords) = if n == s.dimension() {
        (ComplexMatrix::identity(n, n), psi)
    } else {
        let basis = orthonormal_basis(&psi, 1e-12);
        if basis.ncols() != n {
            return Err(Error::NotIndependent {
                rank: basis.ncols(),
                count: n,
            });
        }
        let coords = basis.adjoint() * &psi;
        (basis, coords)
    };
    let y =
        solve_linear(&coords.adjoint(), &ComplexMatrix::identity(n, n)).map_err(|e| match e {
            Error::SingularMatrix { condition } => Error::IllConditioned { condition },
            other => other,
        })?;
    let full = basis * y;
    Ok(DualSet {
        dimension: s.dimension(),
        duals: (0..n).map(|j| full.column(j).into_owned()).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct Superposition {
    /// Unit vector proportional to `sum_j q_j |psi_j>`.
    pub vector: ComplexVector,
    /// Indices with `q_j != 0`.
    pub support: Vec<usize>,
    /// Norm of the unnormalized combination.
    pub norm: f64,
}

/// Normalized superposition `sum_j q_j |psi_j>`.
pub fn superpose(s: &StateSet, q: &[Complex64], tol: f64) -> Result<Superposition> {
    if q.len() != s.len() {
        return Err(Error::SizeMismatch {
            initial: s.len(),
            target: q.len(),
        });
    }
    let mut v = ComplexVector::zeros(s.dimension());
    for (state, &coeff) in s.states.iter().zip(q) {
        v.axpy(coeff, state, ONE);
    }
    let norm = v.norm();
    if norm.is_nan() || norm <= tol {
        return Err(Error::ZeroVector { norm });
    }
    let support = q
        .iter()
        .enumerate()
        .filter(|(_, z)| **z != ZERO)
        .map(|(j, _)| j)
        .collect();
    Ok(Superposition {
        vector: v.unscale(norm),
        support,
        norm,
    })
}

#[derive(Debug, Clone)]
pub enum RandomMode {
    /// Independent draws from the unitarily invariant measure on the sphere.
    Generic,
    /// Like `Generic`, redrawing until the Gram matrix has full rank.
    Independent,
    /// `{U |psi_j>}` for a seeded random unitary `U`.
    UnitaryImageOf(StateSet),
}

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> ComplexVector {
    ComplexVector::from_fn(d, |_, _| {
        Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
    })
}

fn random_unit_vector(rng: &mut ChaCha8Rng, d: usize) -> ComplexVector {
    loop {
        let v = gaussian_vector(rng, d);
        let n = v.norm();
        if n > 1e-8 {
            return v.unscale(n);
        }
    }
}

/// Random unitary from Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    loop {
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        let q = orthonormal_basis(&g, 1e-8);
        if q.ncols() == d {
            return q;
        }
    }
}

/// Seeded random state set. The generator is ChaCha8 seeded with
/// `seed_from_u64(seed)`, so output is reproducible across runs.
pub fn random_state_set(d: usize, n: usize, seed: u64, mode: &RandomMode) -> Result<StateSet> {
    if d == 0 || n == 0 {
        return Err(Error::InvalidDimensions(format!(
            "need D >= 1 and N >= 1, got D = {d}, N = {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        RandomMode::Generic => {
            let states = (0..n).map(|_| random_unit_vector(&mut rng, d)).collect();
            StateSet::normalized(d, states, None, 1e-9)
        }
        RandomMode::Independent => {
            if n > d {
                return Err(Error::InvalidDimensions(format!(
                    "{n} independent states do not fit in dimension {d}"
                )));
            }
            for _ in 0..MAX_REJECTIONS {
                let states = (0..n).map(|_| random_unit_vector(&mut rng, d)).collect();
                let set = StateSet::normalized(d, states, None, 1e-9)?;
                if linear_independence(&set, crate::numerics::DEFAULT_RANK_TOL).independent {
                    return Ok(set);
                }
            }
            Err(Error::InvalidDimensions(format!(
                "no independent set found after {MAX_REJECTIONS} draws"
            )))
        }
        RandomMode::UnitaryImageOf(base) => {
            if base.dimension() != d || base.len() != n {
                return Err(Error::InvalidDimensions(format!(
                    "base set is {}x{}, requested {d}x{n}",
                    base.dimension(),
                    base.len()
                )));
            }
            let u = random_unitary(&mut rng, d);
            base.transformed(&u)
        }
    }
}
