use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{center, commutant, hermitian_parts, random_real_combination, MatrixAlgebra};
use crate::error::{Error, Result};
use crate::linalg::{
    direct_sum, hermitian_eig_unchecked, identity, kron, max_abs, partial_trace, vectorize,
    ComplexMatrix, ComplexVector, Subsystem, ToleranceConfig,
};
use crate::scalar::{cr, Real};

/// Seed for the probe elements when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x5eed_2a05;

/// Probe draws attempted before giving up with [`Error::DegenerateSplit`].
pub const MAX_PROBE_RETRIES: usize = 8;

/// Probe eigenvalues closer than this (relative) are considered ambiguous.
const CLUSTER_GAP: f64 = 1e-6;

/// One simple summand `M_n(C) ⊗ I_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    /// Size of the matrix factor.
    pub n: usize,
    /// Multiplicity.
    pub m: usize,
}

/// Unitary `W` with `W 𝒜 W† = ⊕_a M_{n_a}(C) ⊗ I_{m_a}`.
///
/// Row `offset_a + k·m_a + j` of `W` is the basis vector `|k⟩⊗|j⟩` of block `a`.
#[derive(Debug, Clone)]
pub struct WedderburnStructure<T: Real> {
    transform: ComplexMatrix<T>,
    blocks: Vec<Block>,
}

impl<T: Real> WedderburnStructure<T> {
    /// Accepts an explicit identification; checks unitarity and block dimensions.
    pub fn from_parts(transform: ComplexMatrix<T>, blocks: Vec<Block>, tol: &ToleranceConfig<T>) -> Result<Self> {
        let d: usize = blocks.iter().map(|b| b.n * b.m).sum();
        if blocks.is_empty() || blocks.iter().any(|b| b.n == 0 || b.m == 0) {
            return Err(Error::InvalidStructure("blocks must be nonempty with positive sizes".into()));
        }
        if transform.shape() != (d, d) {
            return Err(Error::DimMismatch(format!(
                "blocks cover dimension {d}, transform is {}x{}",
                transform.nrows(),
                transform.ncols()
            )));
        }
        let defect = max_abs(&(&transform * transform.adjoint() - identity::<T>(d)));
        if defect > tol.eq_tol {
            return Err(Error::InvalidStructure(format!(
                "transform is not unitary (defect {:.3e})",
                defect.as_f64()
            )));
        }
        Ok(Self { transform, blocks })
    }

    /// Standard structure `⊕ M_{n_a} ⊗ I_{m_a}` with `W = I`.
    pub fn standard(blocks: Vec<Block>, tol: &ToleranceConfig<T>) -> Result<Self> {
        let d = blocks.iter().map(|b| b.n * b.m).sum();
        Self::from_parts(identity(d), blocks, tol)
    }

    pub fn transform(&self) -> &ComplexMatrix<T> {
        &self.transform
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn r(&self) -> usize {
        self.blocks.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.transform.nrows()
    }

    /// `Σ n_a²`.
    pub fn algebra_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.n * b.n).sum()
    }

    /// `Σ m_a²`.
    pub fn commutant_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.m * b.m).sum()
    }

    /// `true` when the algebra is not all of `M_d(C)`.
    pub fn is_proper(&self) -> bool {
        self.r() > 1 || self.blocks[0].m > 1
    }

    pub fn offsets(&self) -> Vec<usize> {
        self.blocks
            .iter()
            .scan(0, |acc, b| {
                let o = *acc;
                *acc += b.n * b.m;
                Some(o)
            })
            .collect()
    }

    /// Columns of `W†` spanning block `a` (an isometry `C^{n_a m_a} → C^d`).
    pub fn block_isometry(&self, a: usize) -> ComplexMatrix<T> {
        let off = self.offsets()[a];
        let b = self.blocks[a];
        self.transform.rows(off, b.n * b.m).adjoint()
    }

    /// Minimal central projection `z_a = W† (0 ⊕ I ⊕ 0) W`.
    pub fn central_projection(&self, a: usize) -> ComplexMatrix<T> {
        let v = self.block_isometry(a);
        &v * v.adjoint()
    }

    pub fn central_projections(&self) -> Vec<ComplexMatrix<T>> {
        (0..self.r()).map(|a| self.central_projection(a)).collect()
    }

    /// `W† (⊕ X_a ⊗ I_{m_a}) W`.
    pub fn embed(&self, block_data: &[ComplexMatrix<T>]) -> Result<ComplexMatrix<T>> {
        if block_data.len() != self.r() {
            return Err(Error::DimMismatch(format!(
                "expected {} blocks, got {}",
                self.r(),
                block_data.len()
            )));
        }
        let parts = block_data
            .iter()
            .zip(&self.blocks)
            .map(|(x, b)| {
                if x.shape() != (b.n, b.n) {
                    Err(Error::DimMismatch(format!(
                        "block data must be {0}x{0}, got {1}x{2}",
                        b.n,
                        x.nrows(),
                        x.ncols()
                    )))
                } else {
                    Ok(kron(x, &identity(b.m)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.transform.adjoint() * direct_sum(&parts) * &self.transform)
    }

    /// Embeds `x` into block `a` and zero elsewhere.
    pub fn embed_block(&self, a: usize, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let data: Vec<ComplexMatrix<T>> = self
            .blocks
            .iter()
            .enumerate()
            .map(|(k, b)| {
                if k == a {
                    x.clone()
                } else {
                    ComplexMatrix::zeros(b.n, b.n)
                }
            })
            .collect();
        self.embed(&data)
    }

    /// Reads off `X_a = Tr_{m_a}(block_a(W x W†)) / m_a` for each block.
    pub fn extract(&self, x: &ComplexMatrix<T>) -> Vec<ComplexMatrix<T>> {
        let y = &self.transform * x * self.transform.adjoint();
        self.offsets()
            .iter()
            .zip(&self.blocks)
            .map(|(&off, b)| {
                let size = b.n * b.m;
                let block = y.view((off, off), (size, size)).into_owned();
                partial_trace(&block, b.n, b.m, Subsystem::B).expect("block dims")
                    * cr(T::one() / T::lit(b.m as f64))
            })
            .collect()
    }

    /// `‖W x W† − ⊕ X_a ⊗ I_{m_a}‖_max` for the best-fitting block data.
    pub fn block_form_defect(&self, x: &ComplexMatrix<T>) -> T {
        let data = self.extract(x);
        let rebuilt = self.embed(&data).expect("extracted shapes");
        max_abs(&(x - rebuilt))
    }
}

fn probe_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(attempt as u64)))
}

/// Groups a descending spectrum into clusters of numerically equal values.
///
/// Returns `None` when a gap falls between the tight tolerance and
/// [`CLUSTER_GAP`], i.e. when the split is ambiguous.
fn cluster_spectrum<T: Real>(values: &[T], tight: T) -> Option<Vec<std::ops::Range<usize>>> {
    let scale = values
        .iter()
        .fold(T::one(), |acc, v| acc.max(v.abs()));
    let gap = T::lit(CLUSTER_GAP) * scale;
    let tight = tight * scale;
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..values.len() {
        let diff = values[i - 1] - values[i];
        if diff > tight {
            if diff < gap {
                return None;
            }
            clusters.push(start..i);
            start = i;
        }
    }
    if !values.is_empty() {
        clusters.push(start..values.len());
    }
    Some(clusters)
}

/// Dimension of the span of a set of matrices.
fn span_rank<T: Real>(mats: &[ComplexMatrix<T>], tol: T) -> usize {
    if mats.is_empty() {
        return 0;
    }
    let n = mats[0].len();
    let mut m = ComplexMatrix::zeros(mats.len(), n);
    for (i, x) in mats.iter().enumerate() {
        m.row_mut(i).copy_from(&vectorize(x).transpose());
    }
    let svd = nalgebra::SVD::new(m, false, false);
    let smax = svd.singular_values.iter().fold(T::zero(), |a, &s| a.max(s));
    let cutoff = tol * smax.max(T::one());
    svd.singular_values.iter().filter(|&&s| s > cutoff).count()
}

/// Canonical orthonormal basis of the range of a projection `p` on `C^d`:
/// greedy pivoted Gram–Schmidt of `p|e_i⟩` over computational basis vectors.
fn canonical_range_basis<T: Real>(p: &ComplexMatrix<T>, rank: usize) -> Vec<ComplexVector<T>> {
    let d = p.nrows();
    let mut candidates: Vec<ComplexVector<T>> = (0..d).map(|i| p.column(i).into_owned()).collect();
    let mut basis: Vec<ComplexVector<T>> = Vec::with_capacity(rank);
    let mut used = vec![false; d];
    while basis.len() < rank {
        let mut best: Option<(usize, T)> = None;
        for (i, v) in candidates.iter().enumerate() {
            if used[i] {
                continue;
            }
            let nrm = v.norm();
            // prefer the lowest index unless another candidate is clearly larger
            if best.is_none_or(|(_, b)| nrm > b * T::lit(1.0 + 1e-8)) {
                best = Some((i, nrm));
            }
        }
        let Some((i, nrm)) = best else { break };
        used[i] = true;
        let q = &candidates[i] / cr(nrm);
        for (k, v) in candidates.iter_mut().enumerate() {
            if !used[k] {
                let coef = q.dotc(v);
                *v -= &q * coef;
            }
        }
        basis.push(q);
    }
    basis
}

struct CentralSplit<T: Real> {
    /// Per block: isometry onto the range of `z_a` and the block dimensions.
    ranges: Vec<(ComplexMatrix<T>, Block)>,
}

fn split_center<T: Real>(
    alg: &MatrixAlgebra<T>,
    comm: &MatrixAlgebra<T>,
    cent: &MatrixAlgebra<T>,
    tol: &ToleranceConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Result<Option<CentralSplit<T>>> {
    let d = alg.ambient_dim();
    let probe = random_real_combination(&hermitian_parts(cent.basis()), d, rng);
    let eig = hermitian_eig_unchecked(&probe);
    let Some(clusters) = cluster_spectrum(&eig.values, tol.rank_tol.max(T::lit(1e-10))) else {
        return Ok(None);
    };
    if clusters.len() != cent.dim() {
        return Ok(None);
    }
    let mut ranges = Vec::with_capacity(clusters.len());
    for cl in clusters {
        let v = eig.vectors.columns(cl.start, cl.len()).into_owned();
        let compress = |x: &ComplexMatrix<T>| v.adjoint() * x * &v;
        let block_alg: Vec<_> = alg.basis().iter().map(compress).collect();
        let block_comm: Vec<_> = comm.basis().iter().map(compress).collect();
        let n2 = span_rank(&block_alg, tol.rank_tol);
        let m2 = span_rank(&block_comm, tol.rank_tol);
        let n = (n2 as f64).sqrt().round() as usize;
        let m = (m2 as f64).sqrt().round() as usize;
        if n * n != n2 || m * m != m2 || n * m != cl.len() {
            return Err(Error::NumericalRankAmbiguity(format!(
                "block of size {} has algebra dimension {n2} and commutant dimension {m2}",
                cl.len()
            )));
        }
        ranges.push((v, Block { n, m }));
    }
    Ok(Some(CentralSplit { ranges }))
}

/// Orders blocks by `(n desc, m desc, diag(z_a) lexicographically descending)`.
fn sort_blocks<T: Real>(ranges: &mut [(ComplexMatrix<T>, Block)]) {
    let key = |v: &ComplexMatrix<T>| -> Vec<f64> {
        (0..v.nrows())
            .map(|i| v.row(i).iter().map(|z| z.norm_sqr().as_f64()).sum())
            .collect()
    };
    ranges.sort_by(|(va, ba), (vb, bb)| {
        bb.n.cmp(&ba.n).then(bb.m.cmp(&ba.m)).then_with(|| {
            let (ka, kb) = (key(va), key(vb));
            for (x, y) in ka.iter().zip(&kb) {
                if (x - y).abs() > 1e-9 {
                    return y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal);
                }
            }
            std::cmp::Ordering::Equal
        })
    });
}

/// Basis of one central block in which the algebra acts as `X ⊗ I_m`.
fn block_basis<T: Real>(
    v: &ComplexMatrix<T>,
    block: Block,
    comm: &MatrixAlgebra<T>,
    tol: &ToleranceConfig<T>,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<ComplexVector<T>>> {
    let Block { n, m } = block;
    let size = n * m;
    if m == 1 {
        let p = v * v.adjoint();
        return Some(canonical_range_basis(&p, size));
    }
    // restricted commutant ≅ I_n ⊗ M_m
    let restricted: Vec<ComplexMatrix<T>> =
        comm.basis().iter().map(|y| v.adjoint() * y * v).collect();
    let probe = random_real_combination(&hermitian_parts(&restricted), size, rng);
    let eig = hermitian_eig_unchecked(&probe);
    let clusters = cluster_spectrum(&eig.values, tol.rank_tol.max(T::lit(1e-10)))?;
    if clusters.len() != m || clusters.iter().any(|c| c.len() != n) {
        return None;
    }
    let spectral: Vec<ComplexMatrix<T>> = clusters
        .iter()
        .map(|cl| {
            let e = eig.vectors.columns(cl.start, cl.len());
            e * e.adjoint()
        })
        .collect();
    // canonical basis of the first multiplicity copy, expressed on C^d
    let p1_full = v * &spectral[0] * v.adjoint();
    let first: Vec<ComplexVector<T>> = canonical_range_basis(&p1_full, n)
        .into_iter()
        .map(|e| v.adjoint() * e)
        .collect();
    // intertwiners T_j = P_j Y P_1 between the copies
    let y = restricted.iter().fold(ComplexMatrix::zeros(size, size), |acc, b| {
        let g = crate::scalar::c(
            T::lit(rand::Rng::sample::<f64, _>(rng, rand_distr::StandardNormal)),
            T::lit(rand::Rng::sample::<f64, _>(rng, rand_distr::StandardNormal)),
        );
        acc + b * g
    });
    let y_scale = y.norm().max(T::one());
    let mut copies: Vec<Vec<ComplexVector<T>>> = vec![first.clone()];
    for p_j in spectral.iter().skip(1) {
        let t = p_j * &y * &spectral[0];
        let s2 = (t.adjoint() * &t).trace().re / T::lit(n as f64);
        if !(s2.sqrt() > T::lit(1e-6) * y_scale) {
            return None;
        }
        let inv = cr(T::one() / s2.sqrt());
        copies.push(first.iter().map(|e| (&t * e) * inv).collect());
    }
    let mut out = Vec::with_capacity(size);
    for k in 0..n {
        for copy in &copies {
            out.push(v * &copy[k]);
        }
    }
    Some(out)
}

/// Artin–Wedderburn decomposition of a unital `*`-subalgebra.
///
/// Probe elements are drawn from a ChaCha8 stream seeded with `seed`; on an
/// ambiguous probe spectrum the draw is repeated up to [`MAX_PROBE_RETRIES`] times.
pub fn wedderburn_decompose<T: Real>(
    alg: &MatrixAlgebra<T>,
    tol: &ToleranceConfig<T>,
    seed: u64,
) -> Result<WedderburnStructure<T>> {
    let d = alg.ambient_dim();
    if !alg.contains(&identity(d), tol) {
        return Err(Error::InvalidStructure("algebra is not unital".into()));
    }
    let comm = commutant(alg, tol);
    let cent = center(alg, tol);
    for attempt in 0..MAX_PROBE_RETRIES {
        let mut rng = probe_rng(seed, attempt);
        let Some(split) = split_center(alg, &comm, &cent, tol, &mut rng)? else {
            continue;
        };
        let mut ranges = split.ranges;
        sort_blocks(&mut ranges);
        let mut columns = Vec::with_capacity(d);
        let mut ok = true;
        for (v, block) in &ranges {
            match block_basis(v, *block, &comm, tol, &mut rng) {
                Some(cols) => columns.extend(cols),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        let b = crate::linalg::columns_to_matrix(d, &columns);
        let structure = WedderburnStructure {
            transform: b.adjoint(),
            blocks: ranges.iter().map(|(_, blk)| *blk).collect(),
        };
        let worst = alg
            .basis()
            .iter()
            .map(|x| structure.block_form_defect(x))
            .fold(T::zero(), |a, r| a.max(r));
        let unitary = max_abs(&(&b * b.adjoint() - identity::<T>(d)));
        if worst <= tol.eq_tol && unitary <= tol.eq_tol {
            return Ok(structure);
        }
    }
    Err(Error::DegenerateSplit(MAX_PROBE_RETRIES))
}

/// Minimal central projections `z_a`, in block order.
pub fn minimal_central_projections<T: Real>(
    alg: &MatrixAlgebra<T>,
    tol: &ToleranceConfig<T>,
    seed: u64,
) -> Result<Vec<ComplexMatrix<T>>> {
    Ok(wedderburn_decompose(alg, tol, seed)?.central_projections())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::generate_algebra;
    use crate::linalg::matrix_unit;
    use crate::objects::catalog::{qutrit_p, z_basis};
    use crate::random::{haar_unitary, random_matrix};
    use rand::Rng;

    type M = ComplexMatrix<f64>;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    /// `W† (⊕ M_{n_a} ⊗ I_{m_a}) W` built from matrix units.
    fn block_algebra(blocks: &[Block], w: &M) -> MatrixAlgebra<f64> {
        let s = WedderburnStructure::from_parts(w.clone(), blocks.to_vec(), &tol()).unwrap();
        let mut gens = Vec::new();
        for (a, b) in blocks.iter().enumerate() {
            for i in 0..b.n {
                for j in 0..b.n {
                    gens.push(s.embed_block(a, &matrix_unit(b.n, i, j)).unwrap());
                }
            }
        }
        generate_algebra(&gens, w.nrows(), &tol()).unwrap()
    }

    #[test]
    fn full_algebra_is_one_block_with_identity_transform() {
        for d in 1..=4 {
            let s = wedderburn_decompose(&MatrixAlgebra::<f64>::full(d), &tol(), DEFAULT_SEED).unwrap();
            assert_eq!(s.blocks(), &[Block { n: d, m: 1 }]);
            assert!(max_abs(&(s.transform() - identity::<f64>(d))) < 1e-12);
        }
    }

    #[test]
    fn tensor_factor_algebra() {
        let blocks = [Block { n: 2, m: 2 }];
        let alg = block_algebra(&blocks, &identity(4));
        let s = wedderburn_decompose(&alg, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(s.blocks(), &blocks);
        assert!(max_abs(&(s.central_projection(0) - identity::<f64>(4))) < 1e-12);
    }

    #[test]
    fn diagonal_algebra_projections() {
        let alg = generate_algebra(z_basis::<f64>().projections(), 2, &tol()).unwrap();
        let z = minimal_central_projections(&alg, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(z.len(), 2);
        // eigenprojection oracle
        assert!(max_abs(&(&z[0] - matrix_unit::<f64>(2, 0, 0))) < 1e-12);
        assert!(max_abs(&(&z[1] - matrix_unit::<f64>(2, 1, 1))) < 1e-12);
    }

    #[test]
    fn qutrit_p_algebra_blocks() {
        let alg = generate_algebra(qutrit_p::<f64>().projections(), 3, &tol()).unwrap();
        let s = wedderburn_decompose(&alg, &tol(), DEFAULT_SEED).unwrap();
        assert_eq!(s.blocks(), &[Block { n: 1, m: 2 }, Block { n: 1, m: 1 }]);
        // block projectors are P₀ (rank 2) and P₁ (rank 1)
        let p = qutrit_p::<f64>();
        assert!(max_abs(&(s.central_projection(0) - &p.projections()[0])) < 1e-12);
        assert!(max_abs(&(s.central_projection(1) - &p.projections()[1])) < 1e-12);
    }

    #[test]
    fn random_block_algebras_decompose() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..10 {
            let mut blocks = Vec::new();
            let mut d = 0;
            while d < 2 || (d < 7 && rng.random_bool(0.6)) {
                let b = Block {
                    n: rng.random_range(1..=2),
                    m: rng.random_range(1..=2),
                };
                if d + b.n * b.m > 8 {
                    break;
                }
                d += b.n * b.m;
                blocks.push(b);
            }
            let w = haar_unitary::<f64, _>(d, &mut rng);
            let alg = block_algebra(&blocks, &w);
            let s = wedderburn_decompose(&alg, &tol(), DEFAULT_SEED + trial).unwrap();
            let mut got = s.blocks().to_vec();
            let mut want = blocks.clone();
            got.sort_by_key(|b| (b.n, b.m));
            want.sort_by_key(|b| (b.n, b.m));
            assert_eq!(got, want, "trial {trial}");
            assert_eq!(s.algebra_dim(), alg.dim());
            assert_eq!(s.commutant_dim(), commutant(&alg, &tol()).dim());
            assert_eq!(s.r(), center(&alg, &tol()).dim());
            // round trip: embedded random block data lies in the algebra
            let data: Vec<M> = s
                .blocks()
                .iter()
                .map(|b| random_matrix(b.n, b.n, &mut rng))
                .collect();
            let x = s.embed(&data).unwrap();
            assert!(alg.contains(&x, &tol()));
            for b in alg.basis() {
                assert!(s.block_form_defect(b) < 1e-9);
            }
        }
    }

    #[test]
    fn decomposition_is_reproducible_for_a_seed() {
        let blocks = [Block { n: 1, m: 2 }, Block { n: 2, m: 1 }];
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let w = haar_unitary::<f64, _>(4, &mut rng);
        let alg = block_algebra(&blocks, &w);
        let a = wedderburn_decompose(&alg, &tol(), 7).unwrap();
        let b = wedderburn_decompose(&alg, &tol(), 7).unwrap();
        assert_eq!(a.transform(), b.transform());
        assert_eq!(a.blocks(), &[Block { n: 2, m: 1 }, Block { n: 1, m: 2 }]);
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        let bad = identity::<f64>(3) * cr(2.0);
        assert!(WedderburnStructure::from_parts(bad, vec![Block { n: 3, m: 1 }], &tol()).is_err());
        assert!(WedderburnStructure::<f64>::standard(vec![], &tol()).is_err());
        assert!(WedderburnStructure::from_parts(identity::<f64>(3), vec![Block { n: 2, m: 1 }], &tol()).is_err());
    }

    #[test]
    fn clustering_flags_ambiguous_gaps() {
        assert_eq!(cluster_spectrum(&[2.0, 2.0, 1.0], 1e-10).unwrap().len(), 2);
        assert!(cluster_spectrum(&[2.0, 2.0 - 1e-8, 1.0], 1e-10).is_none());
    }
}
