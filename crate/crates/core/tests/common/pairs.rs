//! Seeded instance generators for randomized suites.
//!
//! Feasible pairs come from an explicit dilation: pick final states `psi2_j`
//! and environment states `chi_j`, and take initial states with Gram matrix
//! `G2 o G_chi` (entrywise product). The isometry `psi1_j -> psi2_j (x) chi_j`
//! followed by discarding the environment is then a channel doing the job, and
//! `M = G_chi` is PSD by construction.

use std::f64::consts::PI;

use detmap::numerics::{ComplexMatrix, ComplexVector};
use detmap::states::{gram, random_state_set, random_unitary, RandomMode, StateSet};
use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sub-seeds so that the sets drawn for one trial are unrelated.
fn sub(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k)
}

/// States in `C^d` whose Gram matrix is `g` (positive definite, unit
/// diagonal), rotated by a random unitary.
pub fn realize_gram(g: &ComplexMatrix, d: usize, seed: u64) -> StateSet {
    let n = g.nrows();
    assert!(n <= d);
    // rows j of Psi^dagger Psi hold <psi_j|psi_k>, i.e. the transpose of g
    let l = Cholesky::new(g.transpose())
        .expect("Gram matrix is positive definite")
        .l();
    let mut psi = ComplexMatrix::zeros(d, n);
    psi.rows_mut(0, n).copy_from(&l.adjoint());
    let u = random_unitary(&mut rng(seed), d);
    let psi = u * psi;
    let states = (0..n).map(|j| psi.column(j).normalize()).collect();
    StateSet::new(d, states, None).unwrap()
}

/// Feasible pair of `n` independent states in dimension `d`, with
/// environment dimension `env`.
pub fn feasible_pair(d: usize, n: usize, env: usize, seed: u64) -> (StateSet, StateSet) {
    let target = random_state_set(d, n, sub(seed, 1), &RandomMode::Independent).unwrap();
    let chi = random_state_set(env, n, sub(seed, 2), &RandomMode::Generic).unwrap();
    let g = gram(&target).component_mul(&gram(&chi));
    (realize_gram(&g, d, sub(seed, 3)), target)
}

/// Like [`feasible_pair`], with `chi_j` equal for `j` in `same`.
pub fn feasible_pair_sharing(
    d: usize,
    n: usize,
    same: &[usize],
    seed: u64,
) -> (StateSet, StateSet) {
    let target = random_state_set(d, n, sub(seed, 1), &RandomMode::Independent).unwrap();
    let chi = random_state_set(n, n, sub(seed, 2), &RandomMode::Independent).unwrap();
    let shared = chi.state(same[0]).clone();
    let chis: Vec<ComplexVector> = (0..n)
        .map(|j| {
            if same.contains(&j) {
                shared.clone()
            } else {
                chi.state(j).clone()
            }
        })
        .collect();
    let chi = StateSet::new(n, chis, None).unwrap();
    let g = gram(&target).component_mul(&gram(&chi));
    (realize_gram(&g, d, sub(seed, 3)), target)
}

/// Independent `initial` and `U initial` with random per-state phases.
pub fn unitary_pair(d: usize, n: usize, seed: u64) -> (StateSet, StateSet) {
    let initial = random_state_set(d, n, sub(seed, 1), &RandomMode::Independent).unwrap();
    let mut r = rng(sub(seed, 2));
    let phases: Vec<f64> = (0..n).map(|_| r.random_range(-PI..PI)).collect();
    let image = random_state_set(
        d,
        n,
        sub(seed, 3),
        &RandomMode::UnitaryImageOf(initial.clone()),
    )
    .unwrap()
    .with_phases(&phases)
    .unwrap();
    (initial, image)
}

/// Two unrelated independent sets.
pub fn random_pair(d: usize, n: usize, seed: u64) -> (StateSet, StateSet) {
    (
        random_state_set(d, n, sub(seed, 1), &RandomMode::Independent).unwrap(),
        random_state_set(d, n, sub(seed, 2), &RandomMode::Independent).unwrap(),
    )
}

/// Coefficients of a complete superposition: moduli in `[0.2, 1]`, uniform
/// phases.
pub fn complete_coefficients(r: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::from_polar(r.random_range(0.2..1.0), r.random_range(-PI..PI)))
        .collect()
}

/// `(d, n)` with `2 <= n <= d <= max_d`.
pub fn sizes(r: &mut ChaCha8Rng, max_d: usize) -> (usize, usize) {
    let d = r.random_range(2..=max_d);
    let n = r.random_range(2..=d);
    (d, n)
}
