//! Finite-dimensional `*`-subalgebras of `M_d(C)`: generation, commutant, center,
//! Artin–Wedderburn structure and multiplicative domains.

mod multiplicative;
mod wedderburn;

pub use multiplicative::{md_algebra, md_defect, md_member, LinearMapData};
pub use wedderburn::{
    minimal_central_projections, wedderburn_decompose, Block, WedderburnStructure, DEFAULT_SEED,
    MAX_PROBE_RETRIES,
};

use nalgebra::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{
    commutator, identity, matrix_unit, max_abs, nullspace, unvectorize, vectorize,
    ComplexMatrix, ComplexVector, ToleranceConfig,
};
use crate::scalar::{c, cr, Real};

/// Unital `*`-subalgebra of `M_d(C)` stored as a Hilbert–Schmidt orthonormal basis.
#[derive(Debug, Clone)]
pub struct MatrixAlgebra<T: Real> {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix<T>>,
}

impl<T: Real> MatrixAlgebra<T> {
    /// `M_d(C)` with the matrix-unit basis.
    pub fn full(d: usize) -> Self {
        let mut basis = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                basis.push(matrix_unit(d, i, j));
            }
        }
        Self {
            ambient_dim: d,
            basis,
        }
    }

    /// `C·I`.
    pub fn scalars(d: usize) -> Self {
        let s = cr(T::one() / T::lit(d as f64).sqrt());
        Self {
            ambient_dim: d,
            basis: vec![identity::<T>(d) * s],
        }
    }

    /// Orthonormalizes `elements` into a basis without checking closure.
    pub fn from_spanning_set(d: usize, elements: &[ComplexMatrix<T>], tol: &ToleranceConfig<T>) -> Result<Self> {
        let mut span = SpanBuilder::new(d, tol.rank_tol);
        for e in elements {
            span.add(e)?;
        }
        Ok(Self {
            ambient_dim: d,
            basis: span.into_basis(),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix<T>] {
        &self.basis
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim * self.ambient_dim
    }

    /// Hilbert–Schmidt distance from `x` to the span, relative to `max(1, ‖x‖₂)`.
    pub fn residual(&self, x: &ComplexMatrix<T>) -> T {
        let mut r = x.clone();
        for b in &self.basis {
            let coef = crate::linalg::hs_inner(b, &r);
            r -= b * coef;
        }
        r.norm() / x.norm().max(T::one())
    }

    pub fn contains(&self, x: &ComplexMatrix<T>, tol: &ToleranceConfig<T>) -> bool {
        self.residual(x) <= tol.eq_tol
    }

    /// Coordinates of `x` in the orthonormal basis.
    pub fn coordinates(&self, x: &ComplexMatrix<T>) -> Vec<Complex<T>> {
        self.basis
            .iter()
            .map(|b| crate::linalg::hs_inner(b, x))
            .collect()
    }

    /// Largest residual of `b†` over basis elements `b`.
    pub fn adjoint_closure_defect(&self) -> T {
        self.basis
            .iter()
            .map(|b| self.residual(&b.adjoint()))
            .fold(T::zero(), |a, r| a.max(r))
    }

    /// Largest residual of `b_i b_j` over basis pairs.
    pub fn product_closure_defect(&self) -> T {
        let mut worst = T::zero();
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.residual(&(a * b)));
            }
        }
        worst
    }

    /// Checks adjoint closure, product closure and unitality.
    pub fn is_valid(&self, tol: &ToleranceConfig<T>) -> bool {
        self.contains(&identity(self.ambient_dim), tol)
            && self.adjoint_closure_defect() <= tol.eq_tol
            && self.product_closure_defect() <= tol.eq_tol
    }

    /// `{Xᵀ : X ∈ 𝒜}` (computational basis).
    pub fn transpose(&self) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            basis: self.basis.iter().map(|b| b.transpose()).collect(),
        }
    }

    /// `U 𝒜 U†`.
    pub fn conjugate(&self, u: &ComplexMatrix<T>) -> Self {
        Self {
            ambient_dim: self.ambient_dim,
            basis: self.basis.iter().map(|b| u * b * u.adjoint()).collect(),
        }
    }

    /// Hermitian spanning set: real and imaginary parts of each basis element.
    pub(crate) fn hermitian_spanning_set(&self) -> Vec<ComplexMatrix<T>> {
        hermitian_parts(&self.basis)
    }

    /// Random Hermitian element `Σ g_k H_k` with standard normal `g_k`.
    pub fn random_hermitian_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix<T> {
        random_real_combination(&self.hermitian_spanning_set(), self.ambient_dim, rng)
    }

    /// Random element with complex Gaussian coordinates.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> ComplexMatrix<T> {
        let d = self.ambient_dim;
        self.basis.iter().fold(ComplexMatrix::zeros(d, d), |acc, b| {
            let g = c(
                T::lit(rng.sample::<f64, _>(StandardNormal)),
                T::lit(rng.sample::<f64, _>(StandardNormal)),
            );
            acc + b * g
        })
    }
}

pub(crate) fn hermitian_parts<T: Real>(elements: &[ComplexMatrix<T>]) -> Vec<ComplexMatrix<T>> {
    let half = cr(T::lit(0.5));
    let minus_half_i = c(T::zero(), T::lit(-0.5));
    let mut out = Vec::with_capacity(2 * elements.len());
    for b in elements {
        let re = (b + b.adjoint()) * half;
        let im = (b - b.adjoint()) * minus_half_i;
        out.push(re);
        out.push(im);
    }
    out
}

pub(crate) fn random_real_combination<T: Real, R: Rng + ?Sized>(
    elements: &[ComplexMatrix<T>],
    d: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    elements.iter().fold(ComplexMatrix::zeros(d, d), |acc, h| {
        acc + h * cr(T::lit(rng.sample::<f64, _>(StandardNormal)))
    })
}

/// Incremental Hilbert–Schmidt Gram–Schmidt with a relative residual cutoff.
pub(crate) struct SpanBuilder<T: Real> {
    d: usize,
    cutoff: T,
    scale: T,
    vectors: Vec<ComplexVector<T>>,
}

impl<T: Real> SpanBuilder<T> {
    pub(crate) fn new(d: usize, cutoff: T) -> Self {
        Self {
            d,
            cutoff,
            scale: T::zero(),
            vectors: Vec::new(),
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.vectors.len()
    }

    /// Adds `m` if it is not already in the span; returns whether it was added.
    pub(crate) fn add(&mut self, m: &ComplexMatrix<T>) -> Result<bool> {
        if m.shape() != (self.d, self.d) {
            return Err(Error::DimMismatch(format!(
                "algebra element must be {0}x{0}, got {1}x{2}",
                self.d,
                m.nrows(),
                m.ncols()
            )));
        }
        if self.vectors.len() == self.d * self.d {
            return Ok(false);
        }
        let v = vectorize(m);
        let norm = v.norm();
        // rounding noise of an exact zero must not be normalized into a new direction
        if !(norm > self.cutoff * self.scale) || norm == T::zero() {
            return Ok(false);
        }
        self.scale = self.scale.max(norm);
        let mut r = v / cr(norm);
        // two Gram–Schmidt passes keep the basis orthonormal to working precision
        for _ in 0..2 {
            for q in &self.vectors {
                let coef = q.dotc(&r);
                r -= q * coef;
            }
        }
        let res = r.norm();
        if res > self.cutoff {
            self.vectors.push(r / cr(res));
            Ok(true)
        } else {
            Ok(false)
        }
    }

    pub(crate) fn into_basis(self) -> Vec<ComplexMatrix<T>> {
        let d = self.d;
        self.vectors
            .iter()
            .map(|v| unvectorize(v, d, d))
            .collect()
    }

    pub(crate) fn basis(&self) -> Vec<ComplexMatrix<T>> {
        self.vectors
            .iter()
            .map(|v| unvectorize(v, self.d, self.d))
            .collect()
    }
}

/// Smallest unital `*`-subalgebra of `M_d(C)` containing `generators`.
///
/// Span saturation: start from `I`, the generators and their adjoints, then add
/// all adjoints and pairwise products until the dimension stops growing.
pub fn generate_algebra<T: Real>(
    generators: &[ComplexMatrix<T>],
    d: usize,
    tol: &ToleranceConfig<T>,
) -> Result<MatrixAlgebra<T>> {
    let mut span = SpanBuilder::new(d, tol.rank_tol);
    span.add(&identity(d))?;
    for g in generators {
        span.add(g)?;
        span.add(&g.adjoint())?;
    }
    loop {
        let before = span.len();
        if before == d * d {
            break;
        }
        let current = span.basis();
        for a in &current {
            span.add(&a.adjoint())?;
            for b in &current {
                span.add(&(a * b))?;
            }
        }
        if span.len() == before {
            break;
        }
    }
    Ok(MatrixAlgebra {
        ambient_dim: d,
        basis: span.into_basis(),
    })
}

/// Matrix of the linear map `vec(Y) ↦ vec(XY − YX)` (row-major vectorization).
fn commutator_map<T: Real>(x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let d = x.nrows();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let row = i * d + j;
            for l in 0..d {
                // (XY)_{ij} = Σ_l X_{il} Y_{lj}
                m[(row, l * d + j)] += x[(i, l)];
                // (YX)_{ij} = Σ_l Y_{il} X_{lj}
                m[(row, i * d + l)] -= x[(l, j)];
            }
        }
    }
    m
}

/// `{Y : XY = YX for all X ∈ 𝒜}` as the nullspace of the stacked commutator maps.
pub fn commutant<T: Real>(alg: &MatrixAlgebra<T>, tol: &ToleranceConfig<T>) -> MatrixAlgebra<T> {
    let d = alg.ambient_dim;
    let n = d * d;
    let mut stacked = ComplexMatrix::zeros(n * alg.dim(), n);
    for (k, x) in alg.basis.iter().enumerate() {
        stacked
            .view_mut((k * n, 0), (n, n))
            .copy_from(&commutator_map(x));
    }
    let basis = nullspace(&stacked, tol.rank_tol)
        .iter()
        .map(|v| unvectorize(v, d, d))
        .collect();
    MatrixAlgebra {
        ambient_dim: d,
        basis,
    }
}

/// `𝒜 ∩ 𝒜′`: elements of the span that commute with every basis element.
pub fn center<T: Real>(alg: &MatrixAlgebra<T>, tol: &ToleranceConfig<T>) -> MatrixAlgebra<T> {
    let d = alg.ambient_dim;
    let n = d * d;
    let k = alg.dim();
    let mut system = ComplexMatrix::zeros(n * k, k);
    for (j, a) in alg.basis.iter().enumerate() {
        for (i, b) in alg.basis.iter().enumerate() {
            let col = vectorize(&commutator(a, b));
            system.view_mut((j * n, i), (n, 1)).copy_from(&col);
        }
    }
    let basis = nullspace(&system, tol.rank_tol)
        .iter()
        .map(|coef| {
            alg.basis
                .iter()
                .zip(coef.iter())
                .fold(ComplexMatrix::zeros(d, d), |acc, (b, &ci)| acc + b * ci)
        })
        .collect();
    MatrixAlgebra {
        ambient_dim: d,
        basis,
    }
}

/// Largest commutator `‖[x, b]‖_max` over basis elements.
pub fn commutation_defect<T: Real>(alg: &MatrixAlgebra<T>, x: &ComplexMatrix<T>) -> T {
    alg.basis
        .iter()
        .map(|b| max_abs(&commutator(x, b)))
        .fold(T::zero(), |a, r| a.max(r))
}
