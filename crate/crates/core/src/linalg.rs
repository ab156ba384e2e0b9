//! Dense complex linear-algebra primitives.
//!
//! Tensor factors use the row-major composite index `i_a * d_b + i_b` throughout,
//! matching [`nalgebra::Matrix::kronecker`].

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::{cabs, cr, Real};

pub type ComplexMatrix<T> = DMatrix<Complex<T>>;
pub type ComplexVector<T> = DVector<Complex<T>>;

/// Numerical tolerances used by validators and decision procedures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig<T> {
    /// Entrywise / operator-norm equality tolerance.
    pub eq_tol: T,
    /// Cutoff below which singular values and eigenvalues count as zero.
    pub rank_tol: T,
    /// Allowed negative eigenvalue for positive semidefinite inputs.
    pub psd_tol: T,
}

impl<T: Real> Default for ToleranceConfig<T> {
    fn default() -> Self {
        Self {
            eq_tol: T::lit(T::EQ_TOL),
            rank_tol: T::lit(T::RANK_TOL),
            psd_tol: T::lit(T::PSD_TOL),
        }
    }
}

impl<T: Real> ToleranceConfig<T> {
    pub fn new(eq_tol: T, rank_tol: T, psd_tol: T) -> Result<Self> {
        let zero = T::zero();
        // `!(x >= 0)` also rejects NaN
        if !(eq_tol >= zero && rank_tol >= zero && psd_tol >= zero) {
            return Err(Error::InvalidStructure(
                "tolerances must be nonnegative".into(),
            ));
        }
        Ok(Self {
            eq_tol,
            rank_tol,
            psd_tol,
        })
    }

    pub fn with_eq_tol(mut self, eq_tol: T) -> Self {
        self.eq_tol = eq_tol;
        self
    }
}

/// Which tensor factor a partial trace removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Exponent accepted by [`psd_power`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsdExponent {
    Half,
    /// Pseudo-inverse square root: zero eigenvalues stay zero.
    NegHalf,
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEig<T: Real> {
    pub values: Vec<T>,
    /// Unitary whose columns are the eigenvectors, aligned with `values`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEig<T> {
    /// Reassembles `V diag(f(λ)) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &lambda) in self.values.iter().enumerate() {
            let s = cr(f(lambda));
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Columns of `vectors` whose eigenvalue satisfies `keep`.
    pub fn columns_where(&self, keep: impl Fn(T) -> bool) -> ComplexMatrix<T> {
        let idx: Vec<usize> = (0..self.values.len())
            .filter(|&j| keep(self.values[j]))
            .collect();
        self.vectors.select_columns(idx.iter())
    }
}

pub fn identity<T: Real>(n: usize) -> ComplexMatrix<T> {
    ComplexMatrix::identity(n, n)
}

pub fn zeros<T: Real>(rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::zeros(rows, cols)
}

/// Rank-one projector `|v⟩⟨v|` (no normalization is applied).
pub fn outer<T: Real>(v: &ComplexVector<T>) -> ComplexMatrix<T> {
    v * v.adjoint()
}

pub fn basis_vector<T: Real>(n: usize, i: usize) -> ComplexVector<T> {
    let mut v = ComplexVector::zeros(n);
    v[i] = Complex::new(T::one(), T::zero());
    v
}

/// `|i⟩⟨j|` in dimension `n`.
pub fn matrix_unit<T: Real>(n: usize, i: usize, j: usize) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = Complex::new(T::one(), T::zero());
    m
}

pub fn kron<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a.kronecker(b)
}

pub fn kron_vec<T: Real>(a: &ComplexVector<T>, b: &ComplexVector<T>) -> ComplexVector<T> {
    a.kronecker(b)
}

pub fn trace<T: Real>(m: &ComplexMatrix<T>) -> Complex<T> {
    m.trace()
}

pub fn is_finite<T: Real>(m: &ComplexMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Largest absolute entry.
pub fn max_abs<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(cabs(*z)))
}

/// Largest absolute entry of `m - m†`.
pub fn hermitian_defect<T: Real>(m: &ComplexMatrix<T>) -> T {
    if !m.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    max_abs(&(m - m.adjoint()))
}

/// `(m + m†) / 2`.
pub fn hermitian_part<T: Real>(m: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    (m + m.adjoint()) * cr(T::lit(0.5))
}

/// Operator (spectral) norm: the largest singular value.
pub fn op_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    let svd = SVD::new(m.clone(), false, false);
    svd.singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s))
}

/// `A·B − B·A`.
pub fn commutator<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    a * b - b * a
}

/// Hilbert–Schmidt inner product `Tr(a† b)`.
pub fn hs_inner<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| {
            acc + x.conj() * y
        })
}

/// Row-major vectorization `vec(m)[i * cols + j] = m[i, j]`.
pub fn vectorize<T: Real>(m: &ComplexMatrix<T>) -> ComplexVector<T> {
    let (r, c) = m.shape();
    ComplexVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

/// Inverse of [`vectorize`].
pub fn unvectorize<T: Real>(v: &ComplexVector<T>, rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Partial trace of an operator on `C^{d_a} ⊗ C^{d_b}`.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    d_a: usize,
    d_b: usize,
    over: Subsystem,
) -> Result<ComplexMatrix<T>> {
    let n = d_a * d_b;
    if m.shape() != (n, n) {
        return Err(Error::DimMismatch(format!(
            "partial trace expects {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let out = match over {
        Subsystem::A => ComplexMatrix::from_fn(d_b, d_b, |k, l| {
            (0..d_a).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
                acc + m[(i * d_b + k, i * d_b + l)]
            })
        }),
        Subsystem::B => ComplexMatrix::from_fn(d_a, d_a, |i, j| {
            (0..d_b).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + m[(i * d_b + k, j * d_b + k)]
            })
        }),
    };
    Ok(out)
}

/// Eigendecomposition of a Hermitian matrix.
///
/// The input is symmetrized before solving; degenerate eigenvectors are
/// orthonormal but otherwise solver-dependent.
pub fn hermitian_eig<T: Real>(
    m: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<HermitianEig<T>> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let scale = max_abs(m).max(T::one());
    let defect = hermitian_defect(m);
    if defect > tol.eq_tol * scale {
        return Err(Error::NotHermitian(defect.as_f64()));
    }
    Ok(hermitian_eig_unchecked(&hermitian_part(m)))
}

pub(crate) fn hermitian_eig_unchecked<T: Real>(m: &ComplexMatrix<T>) -> HermitianEig<T> {
    let n = m.nrows();
    if n == 0 {
        return HermitianEig {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = eig.eigenvectors.select_columns(order.iter());
    HermitianEig { values, vectors }
}

fn psd_eig<T: Real>(m: &ComplexMatrix<T>, tol: &ToleranceConfig<T>) -> Result<HermitianEig<T>> {
    let eig = hermitian_eig(m, tol)?;
    if let Some(&min) = eig.values.last() {
        if min < -tol.psd_tol {
            return Err(Error::NotPsd(min.as_f64()));
        }
    }
    Ok(eig)
}

/// Orthogonal projection onto the span of eigenvectors with eigenvalue above `rank_tol`.
pub fn support_projection<T: Real>(
    m: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ComplexMatrix<T>> {
    let basis = support_basis(m, tol)?;
    Ok(&basis * basis.adjoint())
}

/// Isometry (orthonormal columns) spanning the support of a PSD matrix.
pub fn support_basis<T: Real>(
    m: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ComplexMatrix<T>> {
    let eig = psd_eig(m, tol)?;
    Ok(eig.columns_where(|l| l > tol.rank_tol))
}

/// Numerical rank of a PSD matrix (eigenvalues above `rank_tol`).
pub fn psd_rank<T: Real>(m: &ComplexMatrix<T>, tol: &ToleranceConfig<T>) -> Result<usize> {
    let eig = psd_eig(m, tol)?;
    Ok(eig.values.iter().filter(|&&l| l > tol.rank_tol).count())
}

/// `m^{1/2}` or the support pseudo-inverse `m^{-1/2}` of a PSD matrix.
pub fn psd_power<T: Real>(
    m: &ComplexMatrix<T>,
    exponent: PsdExponent,
    tol: &ToleranceConfig<T>,
) -> Result<ComplexMatrix<T>> {
    let eig = psd_eig(m, tol)?;
    let cutoff = tol.rank_tol;
    Ok(match exponent {
        PsdExponent::Half => eig.reconstruct_with(|l| if l > cutoff { l.sqrt() } else { T::zero() }),
        PsdExponent::NegHalf => eig.reconstruct_with(|l| {
            if l > cutoff {
                T::one() / l.sqrt()
            } else {
                T::zero()
            }
        }),
    })
}

/// Swap unitary `F(|x⟩⊗|y⟩) = |y⟩⊗|x⟩` from `C^{d_a}⊗C^{d_b}` to `C^{d_b}⊗C^{d_a}`.
pub fn swap_unitary<T: Real>(d_a: usize, d_b: usize) -> ComplexMatrix<T> {
    let n = d_a * d_b;
    let mut f = ComplexMatrix::zeros(n, n);
    for x in 0..d_a {
        for y in 0..d_b {
            f[(y * d_a + x, x * d_b + y)] = Complex::new(T::one(), T::zero());
        }
    }
    f
}

/// Orthonormal basis of the right nullspace of `m`.
///
/// A singular value counts as zero when it is at most `tol * max(1, σ_max)`.
pub fn nullspace<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Vec<ComplexVector<T>> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    let square = if m.nrows() > n {
        m.clone().qr().r()
    } else {
        let mut padded = ComplexMatrix::zeros(n, n);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        padded
    };
    let svd = SVD::new(square, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let smax = svd
        .singular_values
        .iter()
        .fold(T::zero(), |acc, &s| acc.max(s));
    let cutoff = tol * smax.max(T::one());
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= cutoff)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Columns `v_i` stacked as a matrix.
pub fn columns_to_matrix<T: Real>(dim: usize, cols: &[ComplexVector<T>]) -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(dim, cols.len());
    for (j, v) in cols.iter().enumerate() {
        m.set_column(j, v);
    }
    m
}

/// Block-diagonal direct sum.
pub fn direct_sum<T: Real>(blocks: &[ComplexMatrix<T>]) -> ComplexMatrix<T> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), b.shape()).copy_from(b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Reorders tensor factors: output factor `k` is input factor `perm[k]`.
pub fn permute_subsystems<T: Real>(
    m: &ComplexMatrix<T>,
    dims: &[usize],
    perm: &[usize],
) -> Result<ComplexMatrix<T>> {
    let n: usize = dims.iter().product();
    if m.shape() != (n, n) || perm.len() != dims.len() {
        return Err(Error::DimMismatch("subsystem permutation".into()));
    }
    let mut seen = vec![false; dims.len()];
    for &p in perm {
        if p >= dims.len() || std::mem::replace(&mut seen[p], true) {
            return Err(Error::InvalidStructure(format!("bad permutation {perm:?}")));
        }
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    // index map: output composite index -> input composite index
    let map: Vec<usize> = (0..n)
        .map(|out_idx| {
            let mut digits = vec![0usize; dims.len()];
            let mut rem = out_idx;
            for k in (0..new_dims.len()).rev() {
                digits[perm[k]] = rem % new_dims[k];
                rem /= new_dims[k];
            }
            digits
                .iter()
                .zip(dims)
                .fold(0, |acc, (&digit, &d)| acc * d + digit)
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}
