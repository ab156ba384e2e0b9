//! Seeded random matrices: Ginibre, Haar unitaries and random density operators.

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, ComplexVector};
use crate::scalar::{cabs, cr, Real};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// Complex Ginibre matrix with i.i.d. standard normal real and imaginary parts.
pub fn random_matrix<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| Complex::new(gaussian(rng), gaussian(rng)))
}

pub fn random_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector<T> {
    ComplexVector::from_fn(n, |_, _| Complex::new(gaussian(rng), gaussian(rng)))
}

/// Uniformly random unit vector.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVector<T> {
    let v = random_vector::<T, R>(n, rng);
    let norm = v.norm();
    v / cr(norm)
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix<T> {
    let g = random_matrix::<T, R>(n, n, rng);
    (&g + g.adjoint()) * cr(T::lit(0.5))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phase correction
/// that makes `R` have a positive diagonal.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix<T> {
    let qr = random_matrix::<T, R>(n, n, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let m = cabs(d);
        if m > T::zero() {
            let phase = d / cr(m);
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Random density operator of dimension `n` and rank `min(rank, n)`.
pub fn random_density<T: Real, R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    let g = random_matrix::<T, R>(n, rank.clamp(1, n), rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m / cr(tr)
}

/// Random pure state `|ψ⟩⟨ψ|`.
pub fn random_pure<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix<T> {
    let v = random_unit_vector::<T, R>(n, rng);
    &v * v.adjoint()
}
