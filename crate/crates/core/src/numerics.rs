//! Dense complex-matrix kernels.
//!
//! Everything here works on small dense matrices (dimensions up to a few
//! dozen). The Hermitian eigensolver and the LU solve are nalgebra's; this
//! module adds the tolerance conventions the rest of the crate relies on:
//! spectral-scale PSD tests, rank-revealing PSD factorization, and
//! conditioned linear solves.

use nalgebra::{DMatrix, DVector, SymmetricEigen, LU};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Default relative tolerance for PSD decisions.
pub const DEFAULT_PSD_TOL: f64 = 1e-9;
/// Default relative cutoff below which eigenvalues count as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;
/// Default purity tolerance for deciding that a state is pure.
pub const DEFAULT_PURITY_TOL: f64 = 1e-9;
/// Largest accepted 1-norm condition estimate in [`solve_linear`].
pub const DEFAULT_CONDITION_CEILING: f64 = 1e12;

/// Tolerance bundle threaded through the pipelines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance for PSD tests and defined/undefined M entries.
    pub psd: f64,
    /// Relative eigenvalue cutoff for numerical rank.
    pub rank: f64,
    /// `1 - Tr(rho^2)` at or below this counts as pure.
    pub purity: f64,
    /// Largest allowed `|lambda_2| / lambda_1` for a rank-1 M.
    pub rank_gap: f64,
    /// Largest allowed relative spread of the top-eigenvector moduli.
    pub modulus_spread: f64,
    /// Residual bound for extracted unitaries.
    pub unitary: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            psd: DEFAULT_PSD_TOL,
            rank: DEFAULT_RANK_TOL,
            purity: DEFAULT_PURITY_TOL,
            rank_gap: 1e-6,
            modulus_spread: 1e-6,
            unitary: 1e-8,
        }
    }
}

impl Tolerances {
    /// Looser purity threshold used for randomized sweeps.
    pub fn randomized() -> Self {
        Self {
            purity: 1e-6,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Real eigenvalues, sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, column `i` belongs to `eigenvalues[i]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |acc, l| acc.max(l.abs()))
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (i, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(i).scale_mut(l);
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsdCheck {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `||H - H^dagger||_F`.
pub fn hermitian_residual(h: &ComplexMatrix) -> f64 {
    frobenius(&(h - h.adjoint()))
}

fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn ensure_hermitian(h: &ComplexMatrix, tol: f64) -> Result<()> {
    ensure_square(h, "Hermitian matrix")?;
    if !is_finite(h) {
        return Err(Error::NotFinite);
    }
    let residual = hermitian_residual(h);
    if residual > tol * frobenius(h) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in descending
/// order. The input is symmetrized as `(H + H^dagger)/2` after the Hermiticity
/// check, so the solver sees an exactly Hermitian matrix.
pub fn hermitian_eig(h: &ComplexMatrix, tol: f64) -> Result<EigenDecomposition> {
    ensure_hermitian(h, tol)?;
    let n = h.nrows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// PSD test at spectral scale: passes iff
/// `min_eigenvalue >= -tol * max(1, spectral_radius)`.
pub fn psd_check(h: &ComplexMatrix, tol: f64) -> Result<PsdCheck> {
    let eig = hermitian_eig(h, tol)?;
    Ok(psd_check_from_eig(&eig, tol))
}

pub fn psd_check_from_eig(eig: &EigenDecomposition, tol: f64) -> PsdCheck {
    let min_eigenvalue = eig.min_eigenvalue();
    let bound = -tol * eig.spectral_radius().max(1.0);
    PsdCheck {
        is_psd: min_eigenvalue >= bound,
        min_eigenvalue,
    }
}

/// Unit phase that, multiplied into `entries`, makes the largest-modulus entry
/// real and positive. Ties within a relative 1e-12 go to the lowest index.
pub fn fix_phase<'a, I>(entries: I) -> Complex64
where
    I: IntoIterator<Item = &'a Complex64>,
{
    let entries: Vec<Complex64> = entries.into_iter().copied().collect();
    let max = entries.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    if max == 0.0 {
        return ONE;
    }
    let pivot = entries
        .iter()
        .find(|z| z.norm() >= max * (1.0 - 1e-12))
        .copied()
        .unwrap_or(ONE);
    (pivot / pivot.norm()).conj()
}

/// Rank-revealing factorization `M = C C^dagger` of a Hermitian PSD matrix.
///
/// `C` has one column per eigenvalue above `rank_tol * lambda_max`; each
/// column is `sqrt(lambda_i) v_i` with the phase fixed so the largest-modulus
/// entry is real positive. Eigenvalues between `-psd_tol` and the rank cutoff
/// are dropped as zero.
pub fn psd_factor(m: &ComplexMatrix, psd_tol: f64, rank_tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m, psd_tol)?;
    let check = psd_check_from_eig(&eig, psd_tol);
    if !check.is_psd {
        return Err(Error::NotPsd {
            min_eigenvalue: check.min_eigenvalue,
        });
    }
    Ok(factor_from_eig(&eig, rank_tol))
}

pub(crate) fn factor_from_eig(eig: &EigenDecomposition, rank_tol: f64) -> ComplexMatrix {
    let n = eig.eigenvectors.nrows();
    let cutoff = rank_tol * eig.max_eigenvalue().max(0.0);
    let kept: Vec<usize> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cutoff && l > 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut c = ComplexMatrix::zeros(n, kept.len());
    for (col, &i) in kept.iter().enumerate() {
        let v = eig.eigenvectors.column(i);
        let phase = fix_phase(v.iter());
        let scale = eig.eigenvalues[i].sqrt();
        for r in 0..n {
            c[(r, col)] = v[r] * phase * scale;
        }
    }
    c
}

/// Numerical rank: eigenvalues strictly above `tol * lambda_max`.
pub fn numerical_rank(eig: &EigenDecomposition, tol: f64) -> usize {
    let cutoff = tol * eig.max_eigenvalue().max(0.0);
    eig.eigenvalues
        .iter()
        .filter(|&&l| l > cutoff && l > 0.0)
        .count()
}

fn one_norm(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solve `A X = B` for square `A`, rejecting matrices whose 1-norm condition
/// number exceeds [`DEFAULT_CONDITION_CEILING`].
pub fn solve_linear(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve_linear_with_ceiling(a, b, DEFAULT_CONDITION_CEILING)
}

pub fn solve_linear_with_ceiling(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    ceiling: f64,
) -> Result<ComplexMatrix> {
    ensure_square(a, "coefficient matrix")?;
    if a.nrows() != b.nrows() {
        return Err(Error::Shape(format!(
            "right-hand side has {} rows, expected {}",
            b.nrows(),
            a.nrows()
        )));
    }
    if !is_finite(a) || !is_finite(b) {
        return Err(Error::NotFinite);
    }
    let n = a.nrows();
    let lu = LU::new(a.clone());
    let inverse = lu.try_inverse().ok_or(Error::SingularMatrix {
        condition: f64::INFINITY,
    })?;
    let condition = one_norm(a) * one_norm(&inverse);
    if !condition.is_finite() || condition > ceiling {
        return Err(Error::SingularMatrix { condition });
    }
    let x = lu.solve(b).ok_or(Error::SingularMatrix { condition })?;
    debug_assert_eq!(x.nrows(), n);
    Ok(x)
}

/// Orthonormal basis for the column span of `columns` via modified
/// Gram-Schmidt with one reorthogonalization pass. Columns whose residual
/// norm falls to `tol` times their original norm or below are skipped.
pub fn orthonormal_basis(columns: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let d = columns.nrows();
    let mut basis: Vec<ComplexVector> = Vec::new();
    for j in 0..columns.ncols() {
        let original = columns.column(j).into_owned();
        let norm0 = original.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = original;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v.axpy(-proj, b, ONE);
            }
        }
        let norm = v.norm();
        if norm > tol * norm0 {
            basis.push(v.unscale(norm));
        }
    }
    let mut out = ComplexMatrix::zeros(d, basis.len());
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `basis`, built from the standard basis vectors in
/// index order.
pub fn complement_basis(basis: &ComplexMatrix) -> ComplexMatrix {
    let d = basis.nrows();
    let mut all = ComplexMatrix::zeros(d, basis.ncols() + d);
    all.columns_mut(0, basis.ncols()).copy_from(basis);
    for i in 0..d {
        all[(i, basis.ncols() + i)] = ONE;
    }
    let full = orthonormal_basis(&all, 1e-8);
    let extra = full.ncols().saturating_sub(basis.ncols());
    full.columns(basis.ncols(), extra).into_owned()
}

pub fn outer(u: &ComplexVector, v: &ComplexVector) -> ComplexMatrix {
    u * v.adjoint()
}

pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    outer(v, v)
}

pub fn trace(m: &ComplexMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}
