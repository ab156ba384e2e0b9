//! `𝒜`-ZUS characterization through `φ = Φ|_{𝒜ᵀ}` and the block normal form
//! `Uφ(X)U† = ⊕ X_a ⊗ I_{K_a}`, `Uρ_BU† = ⊕ I_{n_a} ⊗ τ_a`.

use serde::Serialize;

use crate::algebra::{wedderburn_decompose, Block, MatrixAlgebra, WedderburnStructure};
use crate::constructions::sample_pvms_in_algebra;
use crate::cp_maps::{is_zus, LambdaMap};
use crate::error::{Error, Result};
use crate::linalg::{
    columns_to_matrix, direct_sum, hermitian_eig, identity, kron, max_abs, op_norm,
    partial_trace, support_basis, ComplexMatrix, ComplexVector, Subsystem, ToleranceConfig,
};
use crate::objects::{max_entangled_state, BipartiteState};
use crate::scalar::{cr, Real};

/// Values of `φ` on an orthonormal basis of `𝒜ᵀ`, compressed to `S`.
#[derive(Debug, Clone)]
pub struct RestrictedPhi<T: Real> {
    pub algebra: MatrixAlgebra<T>,
    pub values: Vec<ComplexMatrix<T>>,
    pub support_dim: usize,
}

impl<T: Real> RestrictedPhi<T> {
    /// `φ(x)` by linearity from the stored basis values.
    pub fn evaluate(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        self.algebra
            .coordinates(x)
            .into_iter()
            .zip(&self.values)
            .fold(ComplexMatrix::zeros(self.support_dim, self.support_dim), |acc, (c, v)| acc + v * c)
    }
}

fn check_algebra<T: Real>(lambda: &LambdaMap<T>, alg: &MatrixAlgebra<T>) -> Result<()> {
    if alg.ambient_dim() != lambda.d_a() {
        return Err(Error::DimMismatch(format!(
            "algebra acts on dimension {}, state has d_a = {}",
            alg.ambient_dim(),
            lambda.d_a()
        )));
    }
    Ok(())
}

pub fn restricted_phi<T: Real>(lambda: &LambdaMap<T>, alg: &MatrixAlgebra<T>) -> Result<RestrictedPhi<T>> {
    check_algebra(lambda, alg)?;
    let algebra = alg.transpose();
    let values = algebra
        .basis()
        .iter()
        .map(|b| lambda.phi_on_support(b))
        .collect::<Result<Vec<_>>>()?;
    Ok(RestrictedPhi {
        algebra,
        values,
        support_dim: lambda.support_dim(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AZusCheck<T> {
    pub is_azus: bool,
    /// Largest of `‖φ(ab) − φ(a)φ(b)‖`, `‖φ(a*) − φ(a)*‖` and `‖φ(I) − I_S‖`.
    pub hom_defect: T,
    /// Largest `‖[φ(a), ρ_B]‖` on `S`.
    pub commutant_defect: T,
}

/// Homomorphism-plus-commutation test of `φ` on a basis of `𝒜ᵀ`.
pub fn a_zus_check<T: Real>(
    lambda: &LambdaMap<T>,
    alg: &MatrixAlgebra<T>,
    tol: &ToleranceConfig<T>,
) -> Result<AZusCheck<T>> {
    let phi = restricted_phi(lambda, alg)?;
    let basis = phi.algebra.basis();
    let s = phi.support_dim;
    let mut hom = op_norm(&(lambda.phi_on_support(&identity(lambda.d_a()))? - identity::<T>(s)));
    for (a, pa) in basis.iter().zip(&phi.values) {
        hom = hom.max(op_norm(&(lambda.phi_on_support(&a.adjoint())? - pa.adjoint())));
        for (b, pb) in basis.iter().zip(&phi.values) {
            let pab = lambda.phi_on_support(&(a * b))?;
            hom = hom.max(op_norm(&(pab - pa * pb)));
        }
    }
    let v = lambda.support_basis();
    let rho_s = v.adjoint() * lambda.rho_b() * v;
    let comm = phi
        .values
        .iter()
        .map(|p| op_norm(&(p * &rho_s - &rho_s * p)))
        .fold(T::zero(), |a, b| a.max(b));
    Ok(AZusCheck {
        is_azus: hom < tol.eq_tol && comm < tol.eq_tol,
        hom_defect: hom,
        commutant_defect: comm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport<T> {
    pub agree: bool,
    pub algebraic: AZusCheck<T>,
    /// Every sampled PVM passed the direct ZUS test.
    pub sampled_pass: bool,
    pub samples: usize,
    /// Index of the first sampled PVM that failed, if any.
    pub first_failure: Option<usize>,
}

/// Cross-checks [`a_zus_check`] against direct ZUS tests on PVMs sampled from `alg`.
pub fn sampled_zus_equivalence<T: Real>(
    lambda: &LambdaMap<T>,
    alg: &MatrixAlgebra<T>,
    n_samples: usize,
    seed: u64,
    tol: &ToleranceConfig<T>,
) -> Result<EquivalenceReport<T>> {
    let algebraic = a_zus_check(lambda, alg, tol)?;
    let structure = wedderburn_decompose(alg, tol, seed)?;
    let pvms = sample_pvms_in_algebra(&structure, n_samples, seed, tol)?;
    let mut first_failure = None;
    for (i, pvm) in pvms.iter().enumerate() {
        if !is_zus(lambda, pvm, tol)?.pass {
            first_failure = Some(i);
            break;
        }
    }
    let sampled_pass = first_failure.is_none();
    Ok(EquivalenceReport {
        agree: sampled_pass == algebraic.is_azus,
        algebraic,
        sampled_pass,
        samples: n_samples,
        first_failure,
    })
}

/// One summand `C^{n} ⊗ K` of the normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormBlock<T: Real> {
    /// Index of the corresponding block of `𝒜ᵀ`'s Wedderburn structure.
    pub algebra_block: usize,
    pub n: usize,
    /// `dim K_a`.
    pub k: usize,
    /// Memory state `τ_a` on `K_a` (unnormalized; `Σ n_a Tr τ_a = 1`).
    pub tau: ComplexMatrix<T>,
}

impl<T: Real> NormalFormBlock<T> {
    pub fn tau_spectrum(&self, tol: &ToleranceConfig<T>) -> Result<Vec<T>> {
        Ok(hermitian_eig(&self.tau, tol)?.values)
    }
}

#[derive(Debug, Clone)]
pub struct NormalForm<T: Real> {
    /// Unitary `S → ⊕ C^{n_a} ⊗ K_a`; row `offset + i·k + j` is `|i⟩⊗|j⟩`.
    pub transform_u: ComplexMatrix<T>,
    /// Isometry `S → H_B`.
    pub support_isometry: ComplexMatrix<T>,
    /// Wedderburn structure of `𝒜ᵀ` the blocks refer to.
    pub structure: WedderburnStructure<T>,
    pub blocks: Vec<NormalFormBlock<T>>,
    /// Notes on blocks of `𝒜ᵀ` that act as zero on `S`.
    pub annotations: Vec<String>,
    /// `‖Uρ_SU† − ⊕ I_{n_a} ⊗ τ_a‖`.
    pub rho_b_defect: T,
    /// `max ‖Λ(X) − V U†(⊕ X_a ⊗ τ_a) U V†‖` over a basis of `𝒜ᵀ`.
    pub lambda_defect: T,
}

impl<T: Real> NormalForm<T> {
    pub fn support_dim(&self) -> usize {
        self.transform_u.nrows()
    }

    /// `⊕ X_a ⊗ τ_a` mapped back to `H_B`.
    pub fn reconstruct_lambda(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let data = self.structure.extract(x);
        let parts: Vec<ComplexMatrix<T>> = self
            .blocks
            .iter()
            .map(|b| kron(&data[b.algebra_block], &b.tau))
            .collect();
        let v = &self.support_isometry;
        let back = v * self.transform_u.adjoint();
        &back * direct_sum(&parts) * back.adjoint()
    }
}

/// Matrix-unit vectors `g_{ij} = φ(e_{i1}) f_j` spanning `φ(z_a)S`.
fn block_frame<T: Real>(
    lambda: &LambdaMap<T>,
    s: &WedderburnStructure<T>,
    a: usize,
    k: usize,
    tol: &ToleranceConfig<T>,
) -> Result<Vec<ComplexVector<T>>> {
    let Block { n, .. } = s.blocks()[a];
    let unit = |i: usize, j: usize| -> Result<ComplexMatrix<T>> {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(i, j)] = cr(T::one());
        lambda.phi_on_support(&s.embed_block(a, &e)?)
    };
    let p11 = unit(0, 0)?;
    let f = support_basis(&crate::linalg::hermitian_part(&p11), tol)?;
    if f.ncols() != k {
        return Err(Error::BlockStructureDefect(
            (T::lit(f.ncols() as f64) - T::lit(k as f64)).abs().as_f64(),
        ));
    }
    let mut frame = Vec::with_capacity(n * k);
    for i in 0..n {
        let ei1 = unit(i, 0)?;
        for j in 0..k {
            frame.push(&ei1 * f.column(j));
        }
    }
    Ok(frame)
}

/// Normal form of an `𝒜`-ZUS via the Wedderburn structure of `𝒜ᵀ`.
pub fn compute_normal_form<T: Real>(
    lambda: &LambdaMap<T>,
    alg: &MatrixAlgebra<T>,
    tol: &ToleranceConfig<T>,
    seed: u64,
) -> Result<NormalForm<T>> {
    let check = a_zus_check(lambda, alg, tol)?;
    if !check.is_azus {
        return Err(Error::NotAZus {
            hom_defect: check.hom_defect.as_f64(),
            commutant_defect: check.commutant_defect.as_f64(),
        });
    }
    let alg_t = alg.transpose();
    let structure = wedderburn_decompose(&alg_t, tol, seed)?;
    let s_dim = lambda.support_dim();

    let mut frame: Vec<ComplexVector<T>> = Vec::with_capacity(s_dim);
    let mut dims = Vec::new();
    let mut annotations = Vec::new();
    for a in 0..structure.r() {
        let Block { n, .. } = structure.blocks()[a];
        let q = lambda.phi_on_support(&structure.central_projection(a))?;
        let rank_f = q.trace().re;
        let rank = rank_f.round();
        if (rank_f - rank).abs() > T::lit(1e-6) {
            return Err(Error::BlockStructureDefect((rank_f - rank).abs().as_f64()));
        }
        let rank = rank.to_usize().unwrap_or(0);
        if rank == 0 {
            annotations.push(format!("block {a} (n = {n}) acts as zero on S; K_{a} omitted"));
            continue;
        }
        if rank % n != 0 {
            return Err(Error::BlockStructureDefect((rank % n) as f64));
        }
        let k = rank / n;
        frame.extend(block_frame(lambda, &structure, a, k, tol)?);
        dims.push((a, n, k));
    }
    if frame.len() != s_dim {
        return Err(Error::BlockStructureDefect((frame.len() as f64 - s_dim as f64).abs()));
    }
    let u = columns_to_matrix(s_dim, &frame).adjoint();
    let unitarity = max_abs(&(&u * u.adjoint() - identity::<T>(s_dim)));
    if unitarity > tol.eq_tol.max(T::lit(1e-8)) {
        return Err(Error::VerificationFailed(unitarity.as_f64()));
    }

    let v = lambda.support_basis().clone();
    let r = &u * v.adjoint() * lambda.rho_b() * &v * u.adjoint();
    let mut blocks = Vec::with_capacity(dims.len());
    let mut model = Vec::with_capacity(dims.len());
    let mut off = 0;
    for &(a, n, k) in &dims {
        let size = n * k;
        let block = r.view((off, off), (size, size)).into_owned();
        let tau = partial_trace(&block, n, k, Subsystem::A)? * cr(T::one() / T::lit(n as f64));
        model.push(kron(&identity(n), &tau));
        blocks.push(NormalFormBlock {
            algebra_block: a,
            n,
            k,
            tau,
        });
        off += size;
    }
    let rho_b_defect = op_norm(&(&r - direct_sum(&model)));
    if rho_b_defect > tol.eq_tol {
        return Err(Error::BlockStructureDefect(rho_b_defect.as_f64()));
    }

    let mut nf = NormalForm {
        transform_u: u,
        support_isometry: v,
        structure,
        blocks,
        annotations,
        rho_b_defect,
        lambda_defect: T::zero(),
    };
    let mut lambda_defect = T::zero();
    for x in alg_t.basis() {
        let err = op_norm(&(lambda.apply(x)? - nf.reconstruct_lambda(x)));
        lambda_defect = lambda_defect.max(err);
    }
    nf.lambda_defect = lambda_defect;
    Ok(nf)
}

/// Global form for the full algebra: `(I⊗u)ρ(I⊗u†) = |Φ_d⟩⟨Φ_d| ⊗ σ`.
#[derive(Debug, Clone)]
pub struct FullAlgebraForm<T: Real> {
    /// Co-isometry `H_B → C^d ⊗ K` (unitary when `ρ_B` is faithful).
    pub u: ComplexMatrix<T>,
    /// `σ = d·τ` on `K`.
    pub sigma: ComplexMatrix<T>,
    /// `(I⊗u†)(|Φ_d⟩⟨Φ_d| ⊗ σ)(I⊗u)` on `H_A ⊗ H_B`.
    pub reconstructed: BipartiteState<T>,
    /// `‖(I⊗u)ρ(I⊗u†) − |Φ_d⟩⟨Φ_d| ⊗ σ‖`.
    pub global_defect: T,
    pub normal_form: NormalForm<T>,
}

pub fn full_algebra_form<T: Real>(
    lambda: &LambdaMap<T>,
    tol: &ToleranceConfig<T>,
    seed: u64,
) -> Result<FullAlgebraForm<T>> {
    let d = lambda.d_a();
    let nf = compute_normal_form(lambda, &MatrixAlgebra::full(d), tol, seed)?;
    if nf.blocks.len() != 1 {
        return Err(Error::InvalidStructure(format!(
            "full algebra must give one block, got {}",
            nf.blocks.len()
        )));
    }
    let block = &nf.blocks[0];
    let sigma = &block.tau * cr(T::lit(d as f64));
    let k = block.k;
    let w = nf.structure.transform();
    let u = kron(&w.adjoint(), &identity(k)) * &nf.transform_u * nf.support_isometry.adjoint();
    let lift = kron(&identity(d), &u);
    let target = kron(max_entangled_state::<T>(d).rho(), &sigma);
    let rho = lambda.state().rho();
    let global_defect = op_norm(&(&lift * rho * lift.adjoint() - &target));
    let reconstructed = BipartiteState::from_parts_unchecked(lift.adjoint() * target * &lift, d, lambda.d_b());
    Ok(FullAlgebraForm {
        u,
        sigma,
        reconstructed,
        global_defect,
        normal_form: nf,
    })
}
