use super::MatrixAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{
    identity, matrix_unit, nullspace, op_norm, unvectorize, vectorize, ComplexMatrix,
    ToleranceConfig,
};
use crate::scalar::Real;

/// Linear map `M_{d_in}(C) → M_{d_out}(C)` stored by its images of the matrix units.
#[derive(Debug, Clone)]
pub struct LinearMapData<T: Real> {
    d_in: usize,
    d_out: usize,
    /// `images[i * d_in + j] = Φ(E_ij)`.
    images: Vec<ComplexMatrix<T>>,
}

impl<T: Real> LinearMapData<T> {
    pub fn from_fn(
        d_in: usize,
        d_out: usize,
        mut f: impl FnMut(&ComplexMatrix<T>) -> Result<ComplexMatrix<T>>,
    ) -> Result<Self> {
        let mut images = Vec::with_capacity(d_in * d_in);
        for i in 0..d_in {
            for j in 0..d_in {
                let img = f(&matrix_unit(d_in, i, j))?;
                if img.shape() != (d_out, d_out) {
                    return Err(Error::DimMismatch(format!(
                        "map image must be {d_out}x{d_out}, got {}x{}",
                        img.nrows(),
                        img.ncols()
                    )));
                }
                images.push(img);
            }
        }
        Ok(Self {
            d_in,
            d_out,
            images,
        })
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, d, |x| Ok(x.clone())).expect("square images")
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn image(&self, i: usize, j: usize) -> &ComplexMatrix<T> {
        &self.images[i * self.d_in + j]
    }

    pub fn apply(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let mut out = ComplexMatrix::zeros(self.d_out, self.d_out);
        for i in 0..self.d_in {
            for j in 0..self.d_in {
                let c = x[(i, j)];
                if c.re != T::zero() || c.im != T::zero() {
                    out += self.image(i, j) * c;
                }
            }
        }
        out
    }
}

/// Larger of the two Kadison–Schwarz defects
/// `‖Φ(x*x) − Φ(x)*Φ(x)‖` and `‖Φ(xx*) − Φ(x)Φ(x)*‖` (operator norm).
pub fn md_defect<T: Real>(phi: &LinearMapData<T>, x: &ComplexMatrix<T>) -> T {
    let px = phi.apply(x);
    let left = phi.apply(&(x.adjoint() * x)) - px.adjoint() * &px;
    let right = phi.apply(&(x * x.adjoint())) - &px * px.adjoint();
    op_norm(&left).max(op_norm(&right))
}

/// Whether `x` lies in the multiplicative domain of `phi`.
pub fn md_member<T: Real>(phi: &LinearMapData<T>, x: &ComplexMatrix<T>, tol: &ToleranceConfig<T>) -> bool {
    md_defect(phi, x) < tol.eq_tol
}

/// Multiplicative domain of a unital CP map.
///
/// Solves the bimodule conditions `Φ(aE_ij) = Φ(a)Φ(E_ij)` and
/// `Φ(E_ij a) = Φ(E_ij)Φ(a)` over all matrix units, then checks every basis
/// solution against [`md_member`].
pub fn md_algebra<T: Real>(phi: &LinearMapData<T>, tol: &ToleranceConfig<T>) -> Result<MatrixAlgebra<T>> {
    let d = phi.d_in;
    let s = phi.d_out;
    let unknowns = d * d;
    let block = s * s;
    let mut system = ComplexMatrix::zeros(2 * unknowns * block, unknowns);
    for i in 0..d {
        for j in 0..d {
            let constraint = i * d + j;
            let row_left = 2 * constraint * block;
            let row_right = row_left + block;
            let e_img = phi.image(i, j);
            for k in 0..d {
                for l in 0..d {
                    let col = k * d + l;
                    let a_img = phi.image(k, l);
                    // a = E_kl: Φ(E_kl E_ij) − Φ(E_kl)Φ(E_ij)
                    let mut left = -(a_img * e_img);
                    if l == i {
                        left += phi.image(k, j);
                    }
                    // Φ(E_ij E_kl) − Φ(E_ij)Φ(E_kl)
                    let mut right = -(e_img * a_img);
                    if j == k {
                        right += phi.image(i, l);
                    }
                    system
                        .view_mut((row_left, col), (block, 1))
                        .copy_from(&vectorize(&left));
                    system
                        .view_mut((row_right, col), (block, 1))
                        .copy_from(&vectorize(&right));
                }
            }
        }
    }
    let basis: Vec<ComplexMatrix<T>> = nullspace(&system, tol.rank_tol)
        .iter()
        .map(|v| unvectorize(v, d, d))
        .collect();
    for b in &basis {
        let defect = md_defect(phi, b);
        if defect >= tol.eq_tol {
            return Err(Error::VerificationFailed(defect.as_f64()));
        }
    }
    let alg = MatrixAlgebra::from_spanning_set(d, &basis, tol)?;
    if !alg.contains(&identity(d), tol) {
        return Err(Error::VerificationFailed(alg.residual(&identity(d)).as_f64()));
    }
    Ok(alg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp_maps::LambdaMap;
    use crate::objects::catalog::{bell, mix, s1, x_basis, z_basis};
    use crate::objects::BipartiteState;
    use crate::scalar::cr;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn phi_of(state: BipartiteState<f64>) -> LinearMapData<f64> {
        LambdaMap::new(state, &tol()).unwrap().phi_map().unwrap()
    }

    #[test]
    fn bell_projectors_are_in_md() {
        let phi = phi_of(bell());
        for p in s1::<f64>().projections() {
            assert!(md_member(&phi, &p.transpose(), &tol()));
        }
        assert!(md_member(&phi, &identity(2), &tol()));
    }

    #[test]
    fn mix_plus_projector_is_not_in_md() {
        let phi = phi_of(mix());
        let plus = x_basis::<f64>().projections()[0].clone();
        // Φ(|+⟩⟨+|) = I/2, so Φ(P*P) − Φ(P)*Φ(P) = I/2 − I/4
        assert!((md_defect(&phi, &plus) - 0.25).abs() < 1e-12);
        assert!(!md_member(&phi, &plus, &tol()));
        for p in z_basis::<f64>().projections() {
            assert!(md_member(&phi, p, &tol()));
        }
    }

    #[test]
    fn md_algebra_examples() {
        let bell_md = md_algebra(&phi_of(bell()), &tol()).unwrap();
        assert_eq!(bell_md.dim(), 4);
        let id = md_algebra(&LinearMapData::<f64>::identity(3), &tol()).unwrap();
        assert_eq!(id.dim(), 9);
        let mix_md = md_algebra(&phi_of(mix()), &tol()).unwrap();
        assert_eq!(mix_md.dim(), 2);
        assert!(mix_md.is_valid(&tol()));
        // brute-force sweep: every matrix unit is in MD exactly when it is diagonal
        let phi = phi_of(mix());
        for i in 0..2 {
            for j in 0..2 {
                let e = matrix_unit::<f64>(2, i, j);
                assert_eq!(md_member(&phi, &e, &tol()), i == j);
                assert_eq!(mix_md.contains(&e, &tol()), i == j);
            }
        }
    }

    #[test]
    fn non_cp_map_fails_verification_or_shrinks() {
        // transpose is positive but not CP; its bimodule solutions are only scalars
        let t = LinearMapData::<f64>::from_fn(2, 2, |x| Ok(x.transpose())).unwrap();
        let alg = md_algebra(&t, &tol()).unwrap();
        assert_eq!(alg.dim(), 1);
        // a non-unital map scaled by 2 violates the quadratic identity on I
        let scaled = LinearMapData::<f64>::from_fn(2, 2, |x| Ok(x * cr(2.0))).unwrap();
        assert!(!md_member(&scaled, &identity(2), &tol()));
    }
}
