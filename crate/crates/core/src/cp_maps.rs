//! The completely positive map `Λ(X) = Tr_A[(Xᵀ⊗I)ρ]`, its unital normalization
//! `Φ`, conditional operators and the zero-uncertainty decision procedure.
//!
//! Two trace conventions appear side by side:
//!
//! * [`LambdaMap::apply`] evaluates `Λ(X) = Tr_A[(Xᵀ⊗I)ρ]` (transpose inside).
//!   For `|Φ_d⟩⟨Φ_d|` this gives `Λ(X) = X/d`.
//! * [`LambdaMap::trace_out_a`] evaluates `Tr_A[(X⊗I)ρ] = Λ(Xᵀ)` (no transpose).
//!   This is the conditional-operator / steering convention; for `|Φ_d⟩⟨Φ_d|`
//!   it gives `Xᵀ/d`.
//!
//! All transposes are taken in the computational basis of `H_A`.

use nalgebra::Complex;

use crate::algebra::LinearMapData;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, kron, matrix_unit, op_norm, psd_power, psd_rank, support_basis,
    ComplexMatrix, PsdExponent, ToleranceConfig,
};
use crate::objects::{BipartiteState, Pvm, PvmFamily};
use crate::scalar::Real;

/// `Λ` for a fixed state, with `ρ_B`, its support and `ρ_B^{-1/2}` cached.
#[derive(Debug, Clone)]
pub struct LambdaMap<T: Real> {
    state: BipartiteState<T>,
    rho_b: ComplexMatrix<T>,
    support: ComplexMatrix<T>,
    support_basis: ComplexMatrix<T>,
    rho_b_inv_sqrt: ComplexMatrix<T>,
    tol: ToleranceConfig<T>,
}

impl<T: Real> LambdaMap<T> {
    pub fn new(state: BipartiteState<T>, tol: &ToleranceConfig<T>) -> Result<Self> {
        let rho_b = state.reduced_b();
        let basis = support_basis(&rho_b, tol)?;
        let support = &basis * basis.adjoint();
        let rho_b_inv_sqrt = psd_power(&rho_b, PsdExponent::NegHalf, tol)?;
        Ok(Self {
            state,
            rho_b,
            support,
            support_basis: basis,
            rho_b_inv_sqrt,
            tol: *tol,
        })
    }

    pub fn state(&self) -> &BipartiteState<T> {
        &self.state
    }

    pub fn d_a(&self) -> usize {
        self.state.d_a()
    }

    pub fn d_b(&self) -> usize {
        self.state.d_b()
    }

    /// `ρ_B = Λ(I)`.
    pub fn rho_b(&self) -> &ComplexMatrix<T> {
        &self.rho_b
    }

    /// Projection onto `S = supp(ρ_B)`.
    pub fn support(&self) -> &ComplexMatrix<T> {
        &self.support
    }

    /// Isometry `H_S → H_B` whose columns span `S`.
    pub fn support_basis(&self) -> &ComplexMatrix<T> {
        &self.support_basis
    }

    pub fn support_dim(&self) -> usize {
        self.support_basis.ncols()
    }

    pub fn rho_b_inv_sqrt(&self) -> &ComplexMatrix<T> {
        &self.rho_b_inv_sqrt
    }

    pub fn tolerances(&self) -> &ToleranceConfig<T> {
        &self.tol
    }

    fn check_dim(&self, x: &ComplexMatrix<T>) -> Result<()> {
        let d = self.d_a();
        if x.shape() != (d, d) {
            return Err(Error::DimMismatch(format!(
                "operator on H_A must be {d}x{d}, got {}x{}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(())
    }

    /// `Λ(X) = Tr_A[(Xᵀ⊗I)ρ]`.
    pub fn apply(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_dim(x)?;
        Ok(self.contract(x, true))
    }

    /// `Tr_A[(X⊗I)ρ]`, i.e. `Λ(Xᵀ)`.
    pub fn trace_out_a(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_dim(x)?;
        Ok(self.contract(x, false))
    }

    /// `Φ(X) = ρ_B^{-1/2} Λ(X) ρ_B^{-1/2}` (pseudo-inverse on `S`).
    pub fn phi(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let l = self.apply(x)?;
        Ok(&self.rho_b_inv_sqrt * l * &self.rho_b_inv_sqrt)
    }

    /// `Φ(X)` compressed to `S`: `V† Φ(X) V` with `V` the support isometry.
    pub fn phi_on_support(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let p = self.phi(x)?;
        Ok(self.support_basis.adjoint() * p * &self.support_basis)
    }

    /// `Φ` compressed to `S`, tabulated on matrix units. Unital when `ρ_B` is faithful on `S`.
    pub fn phi_map(&self) -> Result<LinearMapData<T>> {
        LinearMapData::from_fn(self.d_a(), self.support_dim(), |x| self.phi_on_support(x))
    }

    fn contract(&self, x: &ComplexMatrix<T>, transpose: bool) -> ComplexMatrix<T> {
        let (d_a, d_b) = (self.d_a(), self.d_b());
        let rho = self.state.rho();
        let zero = Complex::new(T::zero(), T::zero());
        // out[k,l] = Σ_{i,j} M[i,j] ρ[(j,k),(i,l)] with M = Xᵀ or X
        ComplexMatrix::from_fn(d_b, d_b, |k, l| {
            let mut acc = zero;
            for i in 0..d_a {
                for j in 0..d_a {
                    let m = if transpose { x[(j, i)] } else { x[(i, j)] };
                    if m != zero {
                        acc += m * rho[(j * d_b + k, i * d_b + l)];
                    }
                }
            }
            acc
        })
    }
}

/// Conditional operators `Z_α = Tr_A[(P_α⊗I)ρ]` of one PVM, labels preserved.
#[derive(Debug, Clone)]
pub struct ConditionalAssemblage<T: Real> {
    pub labels: Vec<String>,
    pub operators: Vec<ComplexMatrix<T>>,
}

impl<T: Real> ConditionalAssemblage<T> {
    pub fn get(&self, label: &str) -> Option<&ComplexMatrix<T>> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.operators[i])
    }

    pub fn sum(&self) -> ComplexMatrix<T> {
        let n = self.operators.first().map_or(0, |z| z.nrows());
        self.operators
            .iter()
            .fold(ComplexMatrix::zeros(n, n), |acc, z| acc + z)
    }
}

pub fn conditional_operators<T: Real>(
    lambda: &LambdaMap<T>,
    pvm: &Pvm<T>,
) -> Result<ConditionalAssemblage<T>> {
    let operators = pvm
        .projections()
        .iter()
        .map(|p| lambda.trace_out_a(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionalAssemblage {
        labels: pvm.labels().to_vec(),
        operators,
    })
}

/// Outcome of a pairwise support-orthogonality test.
#[derive(Debug, Clone, PartialEq)]
pub struct ZusVerdict<T> {
    pub pass: bool,
    /// Largest normalized overlap `‖Z_α Z_β‖ / (‖Z_α‖ ‖Z_β‖)` over pairs.
    pub worst_overlap: T,
    /// Pair attaining `worst_overlap`, if there is at least one pair.
    pub worst_pair: Option<(String, String)>,
    /// Same as `worst_pair` when the verdict fails.
    pub failing_pair: Option<(String, String)>,
}

/// Normalized-overlap test shared by the ZUS and steering checks.
///
/// Operators with norm at most `tol.rank_tol` count as orthogonal to everything.
pub fn pairwise_orthogonality<T: Real>(
    labels: &[String],
    operators: &[ComplexMatrix<T>],
    tol: &ToleranceConfig<T>,
) -> ZusVerdict<T> {
    let norms: Vec<T> = operators.iter().map(op_norm).collect();
    let mut worst = T::zero();
    let mut worst_pair = None;
    for i in 0..operators.len() {
        for j in (i + 1)..operators.len() {
            let overlap = if norms[i] <= tol.rank_tol || norms[j] <= tol.rank_tol {
                T::zero()
            } else {
                op_norm(&(&operators[i] * &operators[j])) / (norms[i] * norms[j])
            };
            if worst_pair.is_none() || overlap > worst {
                worst = overlap;
                worst_pair = Some((labels[i].clone(), labels[j].clone()));
            }
        }
    }
    let pass = worst <= tol.eq_tol;
    ZusVerdict {
        pass,
        worst_overlap: worst,
        failing_pair: if pass { None } else { worst_pair.clone() },
        worst_pair,
    }
}

/// Decides whether `ρ` is a zero-uncertainty state for `pvm`.
pub fn is_zus<T: Real>(
    lambda: &LambdaMap<T>,
    pvm: &Pvm<T>,
    tol: &ToleranceConfig<T>,
) -> Result<ZusVerdict<T>> {
    let z = conditional_operators(lambda, pvm)?;
    Ok(pairwise_orthogonality(&z.labels, &z.operators, tol))
}

/// Per-member verdicts and their conjunction.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonZusVerdict<T> {
    pub pass: bool,
    pub members: Vec<ZusVerdict<T>>,
}

pub fn is_common_zus<T: Real>(
    lambda: &LambdaMap<T>,
    family: &PvmFamily<T>,
    tol: &ToleranceConfig<T>,
) -> Result<CommonZusVerdict<T>> {
    let members = family
        .pvms()
        .iter()
        .map(|p| is_zus(lambda, p, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(CommonZusVerdict {
        pass: members.iter().all(|m| m.pass),
        members,
    })
}

/// `R_Λ = Σ_{ij} Λ(E_ij) ⊗ E_ij` on `H_B ⊗ H_A`.
pub fn choi_operator<T: Real>(lambda: &LambdaMap<T>) -> ComplexMatrix<T> {
    let d_a = lambda.d_a();
    let d_b = lambda.d_b();
    let mut r = ComplexMatrix::zeros(d_a * d_b, d_a * d_b);
    for i in 0..d_a {
        for j in 0..d_a {
            let e = matrix_unit::<T>(d_a, i, j);
            let l = lambda.contract(&e, true);
            r += kron(&l, &e);
        }
    }
    r
}

/// Numerical rank of the Choi operator.
pub fn kraus_rank<T: Real>(lambda: &LambdaMap<T>, tol: &ToleranceConfig<T>) -> Result<usize> {
    psd_rank(&choi_operator(lambda), tol)
}

/// Spectrum of a Hermitian operator, descending; used by reports.
pub fn spectrum<T: Real>(m: &ComplexMatrix<T>, tol: &ToleranceConfig<T>) -> Result<Vec<T>> {
    Ok(hermitian_eig(m, tol)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, support_projection, swap_unitary, zeros};
    use crate::objects::catalog::*;
    use crate::objects::{max_entangled_state, validate_state};
    use crate::random::{haar_unitary, random_density, random_matrix};
    use crate::scalar::cr;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn lam(s: BipartiteState<f64>) -> LambdaMap<f64> {
        LambdaMap::new(s, &tol()).unwrap()
    }

    fn p0() -> M {
        matrix_unit(2, 0, 0)
    }

    fn plus() -> M {
        x_basis::<f64>().projections()[0].clone()
    }

    /// Independent route: explicit `(X⊗I)ρ` then index-sum partial trace.
    fn trace_out_a_oracle(rho: &M, x: &M, d_a: usize, d_b: usize) -> M {
        let prod = kron(x, &identity(d_b)) * rho;
        let mut out = zeros(d_b, d_b);
        for i in 0..d_a {
            for k in 0..d_b {
                for l in 0..d_b {
                    out[(k, l)] += prod[(i * d_b + k, i * d_b + l)];
                }
            }
        }
        out
    }

    #[test]
    fn lambda_examples() {
        let l = lam(bell());
        let v = l.apply(&p0()).unwrap();
        assert!(max_abs(&(v - p0() * cr(0.5))) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density::<f64, _>(6, 6, &mut rng);
        let s = validate_state(rho, 2, 3, &tol()).unwrap();
        let l = lam(s.clone());
        assert!(max_abs(&(l.apply(&identity(2)).unwrap() - s.reduced_b())) < 1e-15);
        let x = random_matrix::<f64, _>(2, 2, &mut rng);
        let oracle = trace_out_a_oracle(s.rho(), &x.transpose(), 2, 3);
        assert!(max_abs(&(l.apply(&x).unwrap() - oracle)) < 1e-12);
        assert!(l.apply(&identity(3)).is_err());
    }

    #[test]
    fn phi3_both_conventions() {
        let l = lam(qutrit_phi3());
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_matrix::<f64, _>(3, 3, &mut rng);
        // transpose-inside convention: Λ(X) = X/3
        assert!(max_abs(&(l.apply(&x).unwrap() - &x * cr(1.0 / 3.0))) < 1e-14);
        // conditional convention: Tr_A[(X⊗I)ρ] = Xᵀ/3
        assert!(max_abs(&(l.trace_out_a(&x).unwrap() - x.transpose() * cr(1.0 / 3.0))) < 1e-14);
    }

    #[test]
    fn phi_examples() {
        let l = lam(bell());
        assert!(max_abs(&(l.phi(&p0()).unwrap() - p0())) < 1e-14);
        assert!(max_abs(&(l.phi(&identity(2)).unwrap() - l.support())) < 1e-14);
        let l = lam(mix());
        assert!(max_abs(&(l.phi(&plus()).unwrap() - identity::<f64>(2) * cr(0.5))) < 1e-14);

        // rank-deficient ρ_B: Φ(I) is the support projection
        let l = lam(product_zero(2, 2));
        let p = l.phi(&identity(2)).unwrap();
        assert!(max_abs(&(p - p0())) < 1e-14);
    }

    #[test]
    fn conditional_operator_examples() {
        let z = conditional_operators(&lam(bell()), &z_basis()).unwrap();
        assert!(max_abs(&(&z.operators[0] - p0() * cr(0.5))) < 1e-15);
        assert!(max_abs(&(&z.operators[1] - matrix_unit::<f64>(2, 1, 1) * cr(0.5))) < 1e-15);

        let z = conditional_operators(&lam(mix()), &x_basis()).unwrap();
        for op in &z.operators {
            assert!(max_abs(&(op - identity::<f64>(2) * cr(0.25))) < 1e-15);
        }
        let l = lam(mix());
        let z = conditional_operators(&l, &trivial_pvm(2)).unwrap();
        assert_eq!(z.operators.len(), 1);
        assert!(max_abs(&(&z.operators[0] - l.rho_b())) < 1e-15);
    }

    #[test]
    fn zus_examples() {
        let v = is_zus(&lam(bell()), &z_basis(), &tol()).unwrap();
        assert!(v.pass);
        let v = is_zus(&lam(mix()), &x_basis(), &tol()).unwrap();
        assert!(!v.pass);
        assert_eq!(v.failing_pair, Some(("+".into(), "-".into())));
        assert!((v.worst_overlap - 1.0).abs() < 1e-12);
        assert!(is_zus(&lam(mix()), &trivial_pvm(2), &tol()).unwrap().pass);
    }

    #[test]
    fn common_zus_examples() {
        assert!(is_common_zus(&lam(bell()), &s1(), &tol()).unwrap().pass);
        assert!(is_common_zus(&lam(bell()), &s2(), &tol()).unwrap().pass);
        assert!(is_common_zus(&lam(mix()), &s2(), &tol()).unwrap().pass);
        let v = is_common_zus(&lam(mix()), &s1(), &tol()).unwrap();
        assert!(!v.pass);
        assert!(v.members[0].pass && !v.members[1].pass);
        let empty = PvmFamily::new(2, vec![]).unwrap();
        assert!(is_common_zus(&lam(bell()), &empty, &tol()).unwrap().pass);
    }

    #[test]
    fn zero_conditional_operator_is_orthogonal() {
        // |00⟩: outcome 1 of the Z basis has probability zero
        let v = is_zus(&lam(product_zero(2, 2)), &z_basis(), &tol()).unwrap();
        assert!(v.pass);
        assert_eq!(v.worst_overlap, 0.0);
    }

    #[test]
    fn zus_matches_support_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..40 {
            let d = 2 + trial % 2;
            let state = if trial % 3 == 0 {
                // local-unitary rotated maximally entangled state: ZUS for the rotated basis
                let u = haar_unitary::<f64, _>(d, &mut rng);
                let w = haar_unitary::<f64, _>(d, &mut rng);
                let uw = kron(&u, &w);
                let rho = &uw * max_entangled_state::<f64>(d).rho() * uw.adjoint();
                validate_state(rho, d, d, &tol()).unwrap()
            } else {
                let rank = 1 + trial % (d * d);
                validate_state(random_density(d * d, rank, &mut rng), d, d, &tol()).unwrap()
            };
            let u = haar_unitary::<f64, _>(d, &mut rng);
            let pvm = z_like(d).conjugate(&u);
            let l = lam(state);
            let verdict = is_zus(&l, &pvm, &tol()).unwrap();
            let z = conditional_operators(&l, &pvm).unwrap();
            let supports: Vec<M> = z
                .operators
                .iter()
                .map(|op| support_projection(op, &tol()).unwrap())
                .collect();
            let mut brute = true;
            for i in 0..supports.len() {
                for j in (i + 1)..supports.len() {
                    if max_abs(&(&supports[i] * &supports[j])) > 1e-6 {
                        brute = false;
                    }
                }
            }
            assert_eq!(verdict.pass, brute, "trial {trial}");
        }
    }

    fn z_like(d: usize) -> Pvm<f64> {
        Pvm::from_parts_unchecked(
            (0..d).map(|i| matrix_unit(d, i, i)).collect(),
            (0..d).map(|i| i.to_string()).collect(),
        )
    }

    #[test]
    fn zus_projection_identities() {
        // for ZUS (ρ, K): Λ(P) commutes with ρ_B, Λ(P)² = Λ(P)ρ_B, Φ(Pᵀ) is a projection
        let l = lam(bell());
        for pvm in s1::<f64>().pvms() {
            let mut sum = zeros::<f64>(2, 2);
            for p in pvm.projections() {
                let lp = l.apply(p).unwrap();
                assert!(max_abs(&(l.rho_b() * &lp - &lp * l.rho_b())) < 1e-12);
                assert!(max_abs(&(&lp * &lp - &lp * l.rho_b())) < 1e-12);
                let ph = l.phi(&p.transpose()).unwrap();
                assert!(max_abs(&(&ph * &ph - &ph)) < 1e-12);
                sum += ph;
            }
            assert!(max_abs(&(sum - l.support())) < 1e-12);
        }
    }

    #[test]
    fn choi_examples() {
        let l = lam(bell());
        let r = choi_operator(&l);
        let f = swap_unitary::<f64>(2, 2);
        assert!(max_abs(&(&r - bell::<f64>().rho())) < 1e-15);
        assert!(max_abs(&(&r - &f * bell::<f64>().rho() * f.adjoint())) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let ra = random_density::<f64, _>(2, 2, &mut rng);
        let rb = random_density::<f64, _>(3, 3, &mut rng);
        let s = validate_state(kron(&ra, &rb), 2, 3, &tol()).unwrap();
        assert!(max_abs(&(choi_operator(&lam(s)) - kron(&rb, &ra))) < 1e-12);
    }

    #[test]
    fn kraus_rank_examples() {
        assert_eq!(kraus_rank(&lam(bell()), &tol()).unwrap(), 1);
        assert_eq!(kraus_rank(&lam(mix()), &tol()).unwrap(), 2);
        let mixed = validate_state(identity::<f64>(4) * cr(0.25), 2, 2, &tol()).unwrap();
        assert_eq!(kraus_rank(&lam(mixed), &tol()).unwrap(), 4);
    }
}
