//! Numerical check of the equal-dimension rigidity theorems.

use serde::Serialize;

use crate::algebra::generate_algebra;
use crate::cp_maps::{is_common_zus, kraus_rank, LambdaMap};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, identity, op_norm, ComplexMatrix, ToleranceConfig};
use crate::objects::{BipartiteState, PvmFamily};
use crate::scalar::{cr, Real};

/// Tolerance used to call a state maximally entangled.
pub const MAX_ENTANGLED_TOL: f64 = 1e-8;

/// [`MAX_ENTANGLED_TOL`], floored at the precision's own equality tolerance.
pub fn max_entangled_tol<T: Real>() -> T {
    T::lit(MAX_ENTANGLED_TOL.max(T::EQ_TOL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub dims_equal: bool,
    pub common_zus: bool,
    pub algebra_full: bool,
}

impl Hypotheses {
    pub fn all(&self) -> bool {
        self.dims_equal && self.common_zus && self.algebra_full
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Conclusions<T> {
    pub purity: T,
    pub kraus_rank: usize,
    pub rho_a_maximally_mixed_defect: T,
    /// Present only when the state is pure within tolerance.
    pub schmidt_coeffs: Option<Vec<T>>,
    pub is_max_entangled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport<T> {
    pub hypotheses: Hypotheses,
    pub conclusions: Conclusions<T>,
    /// Dimension of the algebra generated by the family.
    pub algebra_dim: usize,
    /// Hypotheses hold but a conclusion fails.
    pub theorem_violation: bool,
}

/// `Tr ρ²`.
pub fn purity<T: Real>(state: &BipartiteState<T>) -> T {
    let rho = state.rho();
    // Tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
    rho.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im)
}

/// `‖ρ_A − I/d_a‖` in operator norm.
pub fn maximally_mixed_defect<T: Real>(state: &BipartiteState<T>) -> T {
    let d = state.d_a();
    let target = identity::<T>(d) * cr(T::one() / T::lit(d as f64));
    op_norm(&(state.reduced_a() - target))
}

/// Schmidt coefficients `s_j` (squared singular values), descending, of a pure state.
pub fn schmidt_coefficients<T: Real>(state: &BipartiteState<T>, tol: &ToleranceConfig<T>) -> Result<Vec<T>> {
    let p = purity(state);
    if p <= T::one() - tol.eq_tol {
        return Err(Error::NotPure(p.as_f64()));
    }
    let (d_a, d_b) = (state.d_a(), state.d_b());
    let eig = hermitian_eig(state.rho(), tol)?;
    let psi = eig.vectors.column(0);
    let m = ComplexMatrix::from_fn(d_a, d_b, |i, j| psi[i * d_b + j]);
    let mut s: Vec<T> = m
        .singular_values()
        .iter()
        .map(|&x| x * x)
        .collect();
    let total = s.iter().fold(T::zero(), |a, &b| a + b);
    for x in &mut s {
        *x /= total;
    }
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(s)
}

/// Evaluates the three hypotheses, then every conclusion, and flags a violation
/// if the hypotheses hold while purity or maximal entanglement fails.
pub fn verify_rigidity<T: Real>(
    state: &BipartiteState<T>,
    family: &PvmFamily<T>,
    tol: &ToleranceConfig<T>,
) -> Result<RigidityReport<T>> {
    if family.d_a() != state.d_a() {
        return Err(Error::DimMismatch(format!(
            "family acts on dimension {}, state has d_a = {}",
            family.d_a(),
            state.d_a()
        )));
    }
    let lambda = LambdaMap::new(state.clone(), tol)?;
    let common_zus = is_common_zus(&lambda, family, tol)?.pass;
    let algebra = generate_algebra(&family.projections(), state.d_a(), tol)?;
    let hypotheses = Hypotheses {
        dims_equal: state.d_a() == state.d_b(),
        common_zus,
        algebra_full: algebra.is_full(),
    };

    let p = purity(state);
    let defect = maximally_mixed_defect(state);
    let max_tol = max_entangled_tol::<T>();
    let pure = (p - T::one()).abs() <= max_tol;
    let conclusions = Conclusions {
        purity: p,
        kraus_rank: kraus_rank(&lambda, tol)?,
        rho_a_maximally_mixed_defect: defect,
        schmidt_coeffs: schmidt_coefficients(state, tol).ok(),
        is_max_entangled: pure && defect <= max_tol,
    };
    let theorem_violation = hypotheses.all() && !(pure && conclusions.is_max_entangled);
    Ok(RigidityReport {
        hypotheses,
        conclusions,
        algebra_dim: algebra.dim(),
        theorem_violation,
    })
}
