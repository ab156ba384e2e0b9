//! Explicit state families: the proper-subalgebra counterexample, the larger-memory
//! state, product extensions, and the entangled-ancilla and local-memory examples.
//! Also hosts the PVM sampler used to exercise `𝒜`-ZUS claims.

use nalgebra::Complex;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::algebra::{Block, MatrixAlgebra, WedderburnStructure};
use crate::error::{Error, Result};
use crate::linalg::{
    direct_sum, identity, kron, matrix_unit, outer, partial_trace, permute_subsystems,
    ComplexMatrix, ComplexVector, Subsystem, ToleranceConfig,
};
use crate::objects::{max_entangled_state, validate_pvm, validate_state, BipartiteState, Pvm};
use crate::random::haar_unitary;
use crate::scalar::{cr, Real};

/// Input of [`proper_subalgebra_zus`].
#[derive(Debug, Clone)]
pub struct ProperSubalgebraRecipe<T: Real> {
    pub structure: WedderburnStructure<T>,
    /// Zero-based block index `a₀`.
    pub chosen_block: usize,
    /// Unit vector in `C^{m_{a₀}}` on the `A` side.
    pub u_vector: ComplexVector<T>,
    /// Unit vector in `C^{m_{a₀}}` on the `B` side.
    pub v_vector: ComplexVector<T>,
}

/// The `*`-algebra `W†(⊕ M_{n_a} ⊗ I_{m_a})W` spanned by embedded matrix units.
pub fn structure_algebra<T: Real>(s: &WedderburnStructure<T>, tol: &ToleranceConfig<T>) -> Result<MatrixAlgebra<T>> {
    let mut units = Vec::with_capacity(s.algebra_dim());
    for (a, b) in s.blocks().iter().enumerate() {
        for i in 0..b.n {
            for j in 0..b.n {
                units.push(s.embed_block(a, &matrix_unit(b.n, i, j))?);
            }
        }
    }
    MatrixAlgebra::from_spanning_set(s.ambient_dim(), &units, tol)
}

/// Pure state `|ψ⟩ = |Φ_{n_{a₀}}⟩ ⊗ |u⟩ ⊗ |v⟩` placed in the `(a₀, a₀)` block.
///
/// `H_A` is identified with `⊕ C^{n_a}⊗C^{m_a}` through `W`; `H_B` through `W̄`,
/// so that `(W†⊗Wᵀ)|Φ_d⟩ = |Φ_d⟩`.
pub fn proper_subalgebra_zus<T: Real>(
    recipe: &ProperSubalgebraRecipe<T>,
    tol: &ToleranceConfig<T>,
) -> Result<BipartiteState<T>> {
    let s = &recipe.structure;
    if !s.is_proper() {
        return Err(Error::NotProper);
    }
    let a0 = recipe.chosen_block;
    if a0 >= s.r() {
        return Err(Error::BadBlock {
            index: a0,
            blocks: s.r(),
        });
    }
    let Block { n, m } = s.blocks()[a0];
    for (name, v) in [("u", &recipe.u_vector), ("v", &recipe.v_vector)] {
        if v.len() != m {
            return Err(Error::DimMismatch(format!(
                "{name} must have length m = {m}, got {}",
                v.len()
            )));
        }
        let norm = v.norm();
        if (norm - T::one()).abs() > tol.eq_tol {
            return Err(Error::InvalidStructure(format!(
                "{name} must be a unit vector, norm is {:.6}",
                norm.as_f64()
            )));
        }
    }
    let d = s.ambient_dim();
    let off = s.offsets()[a0];
    let amp = T::one() / T::lit(n as f64).sqrt();
    let mut coords = ComplexVector::zeros(d * d);
    for k in 0..n {
        for j in 0..m {
            for l in 0..m {
                let ia = off + k * m + j;
                let ib = off + k * m + l;
                coords[ia * d + ib] = recipe.u_vector[j] * recipe.v_vector[l] * cr(amp);
            }
        }
    }
    let w = s.transform();
    let psi = kron(&w.adjoint(), &w.transpose()) * coords;
    BipartiteState::from_pure(&psi, d, d)
}

/// Analytic `ρ_A` of [`proper_subalgebra_zus`]: `W†((1/n) I_n ⊗ |u⟩⟨u|)W` on block `a₀`.
pub fn proper_subalgebra_reduced_a<T: Real>(recipe: &ProperSubalgebraRecipe<T>) -> Result<ComplexMatrix<T>> {
    let s = &recipe.structure;
    let a0 = recipe.chosen_block;
    if a0 >= s.r() {
        return Err(Error::BadBlock {
            index: a0,
            blocks: s.r(),
        });
    }
    let Block { n, .. } = s.blocks()[a0];
    let local = kron(
        &(identity::<T>(n) * cr(T::one() / T::lit(n as f64))),
        &outer(&recipe.u_vector),
    );
    let parts: Vec<ComplexMatrix<T>> = s
        .blocks()
        .iter()
        .enumerate()
        .map(|(a, b)| {
            if a == a0 {
                local.clone()
            } else {
                ComplexMatrix::zeros(b.n * b.m, b.n * b.m)
            }
        })
        .collect();
    let w = s.transform();
    Ok(w.adjoint() * direct_sum(&parts) * w)
}

fn validate_density<T: Real>(m: &ComplexMatrix<T>, tol: &ToleranceConfig<T>) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::InvalidSigma(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    validate_state(m.clone(), 1, m.nrows(), tol)
        .map(|_| ())
        .map_err(|e| Error::InvalidSigma(e.to_string()))
}

/// `|Φ_d⟩⟨Φ_d|_{AB₁} ⊗ σ_{B₂}` on `C^d ⊗ (C^d ⊗ K)`.
pub fn larger_memory_zus<T: Real>(
    d: usize,
    sigma: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<BipartiteState<T>> {
    if d == 0 {
        return Err(Error::DimMismatch("d must be at least 1".into()));
    }
    validate_density(sigma, tol)?;
    let k = sigma.nrows();
    let rho = kron(max_entangled_state::<T>(d).rho(), sigma);
    Ok(BipartiteState::from_parts_unchecked(rho, d, d * k))
}

/// `ρ₀ ⊗ ω` with `ω` appended to Bob's memory.
pub fn product_extension_zus<T: Real>(
    rho0: &BipartiteState<T>,
    omega: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<BipartiteState<T>> {
    validate_density(omega, tol)?;
    let rho = kron(rho0.rho(), omega);
    Ok(BipartiteState::from_parts_unchecked(
        rho,
        rho0.d_a(),
        rho0.d_b() * omega.nrows(),
    ))
}

/// Which of the two block examples an entry realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AppendixCKind {
    /// `|Φ⁺⟩⟨Φ⁺|_{A₁B₁} ⊗ ω_{A₂B₂}` with `A = A₁A₂`, `B = B₁B₂`.
    EntangledAncilla,
    /// `|Φ⁺⟩⟨Φ⁺|_{AB₁} ⊗ σ_{B₂}`.
    LocalMemory,
}

/// A named example state together with the data of its expected conditional operators.
#[derive(Debug, Clone)]
pub struct AppendixCEntry<T: Real> {
    pub name: &'static str,
    pub kind: AppendixCKind,
    pub state: BipartiteState<T>,
    /// `τ = Tr_{A₂} ω` for the first example, `σ` for the second.
    pub memory: ComplexMatrix<T>,
}

impl<T: Real> AppendixCEntry<T> {
    /// Lifts `E ∈ M₂` on `A₁` to Alice's full space.
    pub fn lift(&self, e: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        match self.kind {
            AppendixCKind::EntangledAncilla => kron(e, &identity(2)),
            AppendixCKind::LocalMemory => e.clone(),
        }
    }

    /// `½ Eᵀ ⊗ memory`.
    pub fn expected_conditional(&self, e: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        kron(&(e.transpose() * cr(T::lit(0.5))), &self.memory)
    }

    /// The algebra `M₂ ⊗ I` (or `M₂`) the example is a ZUS for.
    pub fn algebra(&self) -> MatrixAlgebra<T> {
        let units: Vec<ComplexMatrix<T>> = (0..4).map(|k| self.lift(&matrix_unit(2, k / 2, k % 2))).collect();
        MatrixAlgebra::from_spanning_set(self.state.d_a(), &units, &ToleranceConfig::default())
            .expect("matrix units have the ambient size")
    }
}

/// Entangled-ancilla example: reorders `A₁B₁A₂B₂` to `A₁A₂B₁B₂`.
pub fn appendix_c_example1<T: Real>(
    omega: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<AppendixCEntry<T>> {
    if omega.shape() != (4, 4) {
        return Err(Error::InvalidSigma("ω must act on C²⊗C²".into()));
    }
    validate_density(omega, tol)?;
    let raw = kron(max_entangled_state::<T>(2).rho(), omega);
    let rho = permute_subsystems(&raw, &[2, 2, 2, 2], &[0, 2, 1, 3])?;
    let tau = partial_trace(omega, 2, 2, Subsystem::A)?;
    Ok(AppendixCEntry {
        name: "appendix-c-1",
        kind: AppendixCKind::EntangledAncilla,
        state: BipartiteState::from_parts_unchecked(rho, 4, 4),
        memory: tau,
    })
}

/// Local-memory example: the larger-memory state with `d = 2`.
pub fn appendix_c_example2<T: Real>(
    sigma: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<AppendixCEntry<T>> {
    if sigma.shape() != (2, 2) {
        return Err(Error::InvalidSigma("σ must act on C²".into()));
    }
    Ok(AppendixCEntry {
        name: "appendix-c-2",
        kind: AppendixCKind::LocalMemory,
        state: larger_memory_zus(2, sigma, tol)?,
        memory: sigma.clone(),
    })
}

pub fn appendix_c_catalog<T: Real>(
    omega: &ComplexMatrix<T>,
    sigma: &ComplexMatrix<T>,
    tol: &ToleranceConfig<T>,
) -> Result<Vec<AppendixCEntry<T>>> {
    Ok(vec![
        appendix_c_example1(omega, tol)?,
        appendix_c_example2(sigma, tol)?,
    ])
}

/// Unitary DFT matrix `F_{jk} = ω^{jk}/√n`.
fn dft<T: Real>(n: usize) -> ComplexMatrix<T> {
    let scale = T::one() / T::lit(n as f64).sqrt();
    ComplexMatrix::from_fn(n, n, |j, k| {
        let angle = T::two_pi() * T::lit(((j * k) % n) as f64) / T::lit(n as f64);
        Complex::new(angle.cos() * scale, angle.sin() * scale)
    })
}

/// One PVM inside `W†(⊕ M_{n_a} ⊗ I_{m_a})W`.
///
/// Sample 0 rotates every block by the DFT and keeps all rank-one patterns apart
/// (for `M₂` this is the `X` basis); sample 1 is the computational pattern.
/// Later samples use Haar unitaries per block and assign the block basis vectors
/// to a random number of outcomes, producing degenerate patterns.
pub fn sample_pvm_in_algebra<T: Real, R: Rng + ?Sized>(
    s: &WedderburnStructure<T>,
    sample_index: usize,
    rng: &mut R,
    tol: &ToleranceConfig<T>,
) -> Result<Pvm<T>> {
    let slots: Vec<(usize, usize)> = s
        .blocks()
        .iter()
        .enumerate()
        .flat_map(|(a, b)| (0..b.n).map(move |k| (a, k)))
        .collect();
    let unitaries: Vec<ComplexMatrix<T>> = s
        .blocks()
        .iter()
        .map(|b| match sample_index {
            0 => dft(b.n),
            1 => identity(b.n),
            _ => haar_unitary(b.n, rng),
        })
        .collect();
    let assignment: Vec<usize> = if sample_index < 2 {
        (0..slots.len()).collect()
    } else {
        let outcomes = rng.random_range(1..=slots.len());
        let mut labels: Vec<usize> = (0..slots.len()).map(|i| i % outcomes).collect();
        labels.shuffle(rng);
        labels
    };
    let outcomes = assignment.iter().max().map_or(0, |&m| m + 1);
    let mut projections = Vec::with_capacity(outcomes);
    for label in 0..outcomes {
        let data: Vec<ComplexMatrix<T>> = s
            .blocks()
            .iter()
            .enumerate()
            .map(|(a, b)| {
                let mut diag = ComplexMatrix::zeros(b.n, b.n);
                for (slot, &(sa, k)) in slots.iter().enumerate() {
                    if sa == a && assignment[slot] == label {
                        diag[(k, k)] = cr(T::one());
                    }
                }
                &unitaries[a] * diag * unitaries[a].adjoint()
            })
            .collect();
        projections.push(s.embed(&data)?);
    }
    validate_pvm(projections, None, &tol.with_eq_tol(tol.eq_tol.max(T::lit(1e-9))))
}

/// `count` PVMs from [`sample_pvm_in_algebra`] with a deterministic stream.
pub fn sample_pvms_in_algebra<T: Real>(
    s: &WedderburnStructure<T>,
    count: usize,
    seed: u64,
    tol: &ToleranceConfig<T>,
) -> Result<Vec<Pvm<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| sample_pvm_in_algebra(s, i, &mut rng, tol))
        .collect()
}
