//! Validated bipartite states, projection-valued measurements and measurement families.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_eig, identity, is_finite, max_abs, outer, partial_trace, ComplexMatrix,
    ComplexVector, Subsystem, ToleranceConfig,
};
use crate::scalar::{cr, Real};

/// Density operator on `C^{d_a} ⊗ C^{d_b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState<T: Real> {
    rho: ComplexMatrix<T>,
    d_a: usize,
    d_b: usize,
}

impl<T: Real> BipartiteState<T> {
    pub fn rho(&self) -> &ComplexMatrix<T> {
        &self.rho
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn into_rho(self) -> ComplexMatrix<T> {
        self.rho
    }

    /// `Tr_A ρ`.
    pub fn reduced_b(&self) -> ComplexMatrix<T> {
        partial_trace(&self.rho, self.d_a, self.d_b, Subsystem::A).expect("validated dims")
    }

    /// `Tr_B ρ`.
    pub fn reduced_a(&self) -> ComplexMatrix<T> {
        partial_trace(&self.rho, self.d_a, self.d_b, Subsystem::B).expect("validated dims")
    }

    /// Builds `|ψ⟩⟨ψ|` after normalizing `psi`.
    pub fn from_pure(psi: &ComplexVector<T>, d_a: usize, d_b: usize) -> Result<Self> {
        if psi.len() != d_a * d_b {
            return Err(Error::DimMismatch(format!(
                "state vector of length {} for dims {d_a}x{d_b}",
                psi.len()
            )));
        }
        let norm = psi.norm();
        if !(norm > T::zero()) {
            return Err(Error::TraceNotOne(0.0));
        }
        let v = psi / cr(norm);
        Ok(Self {
            rho: outer(&v),
            d_a,
            d_b,
        })
    }

    pub(crate) fn from_parts_unchecked(rho: ComplexMatrix<T>, d_a: usize, d_b: usize) -> Self {
        Self { rho, d_a, d_b }
    }
}

/// Checks that `rho` is a density operator on `C^{d_a} ⊗ C^{d_b}`.
pub fn validate_state<T: Real>(
    rho: ComplexMatrix<T>,
    d_a: usize,
    d_b: usize,
    tol: &ToleranceConfig<T>,
) -> Result<BipartiteState<T>> {
    let n = d_a * d_b;
    if n == 0 || rho.shape() != (n, n) {
        return Err(Error::DimMismatch(format!(
            "expected {n}x{n} for d_a={d_a}, d_b={d_b}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    if !is_finite(&rho) {
        return Err(Error::NonFinite);
    }
    let eig = hermitian_eig(&rho, tol)?;
    let tr = rho.trace().re;
    if (tr - T::one()).abs() > tol.eq_tol {
        return Err(Error::TraceNotOne(tr.as_f64()));
    }
    if let Some(&min) = eig.values.last() {
        if min < -tol.psd_tol {
            return Err(Error::NotPsd(min.as_f64()));
        }
    }
    Ok(BipartiteState { rho, d_a, d_b })
}

/// Projection-valued measurement with labelled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm<T: Real> {
    projections: Vec<ComplexMatrix<T>>,
    labels: Vec<String>,
}

impl<T: Real> Pvm<T> {
    pub fn projections(&self) -> &[ComplexMatrix<T>] {
        &self.projections
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.projections[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ComplexMatrix<T>)> {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.projections.iter())
    }

    /// Outcome-wise transpose in the computational basis; again a PVM.
    pub fn transpose(&self) -> Self {
        Self {
            projections: self.projections.iter().map(|p| p.transpose()).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Conjugates every projection by a unitary: `P ↦ U P U†`.
    pub fn conjugate(&self, u: &ComplexMatrix<T>) -> Self {
        Self {
            projections: self
                .projections
                .iter()
                .map(|p| u * p * u.adjoint())
                .collect(),
            labels: self.labels.clone(),
        }
    }

    pub(crate) fn from_parts_unchecked(
        projections: Vec<ComplexMatrix<T>>,
        labels: Vec<String>,
    ) -> Self {
        Self {
            projections,
            labels,
        }
    }
}

/// Validates a list of projections (with optional labels; default `"0"`, `"1"`, …).
pub fn validate_pvm<T: Real>(
    projections: Vec<ComplexMatrix<T>>,
    labels: Option<Vec<String>>,
    tol: &ToleranceConfig<T>,
) -> Result<Pvm<T>> {
    let Some(first) = projections.first() else {
        return Err(Error::EmptyPvm);
    };
    let d = first.nrows();
    if projections.iter().any(|p| p.shape() != (d, d)) || d == 0 {
        return Err(Error::DimMismatch(
            "projections must be square and of equal size".into(),
        ));
    }
    let labels = match labels {
        Some(l) if l.len() != projections.len() => {
            return Err(Error::LabelMismatch {
                labels: l.len(),
                projections: projections.len(),
            })
        }
        Some(l) => l,
        None => (0..projections.len()).map(|i| i.to_string()).collect(),
    };
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    for (p, label) in projections.iter().zip(&labels) {
        if !is_finite(p) {
            return Err(Error::NonFinite);
        }
        let defect = max_abs(&(p * p - p)).max(max_abs(&(p - p.adjoint())));
        if defect > tol.eq_tol {
            return Err(Error::NotProjection {
                label: label.clone(),
                defect: defect.as_f64(),
            });
        }
    }
    for i in 0..projections.len() {
        for j in (i + 1)..projections.len() {
            let overlap = max_abs(&(&projections[i] * &projections[j]));
            if overlap > tol.eq_tol {
                return Err(Error::NotOrthogonal {
                    first: labels[i].clone(),
                    second: labels[j].clone(),
                    overlap: overlap.as_f64(),
                });
            }
        }
    }
    let sum = projections
        .iter()
        .fold(ComplexMatrix::<T>::zeros(d, d), |acc, p| acc + p);
    let defect = max_abs(&(sum - identity::<T>(d)));
    if defect > tol.eq_tol {
        return Err(Error::NotComplete(defect.as_f64()));
    }
    Ok(Pvm {
        projections,
        labels,
    })
}

/// Family of PVMs acting on a common space of dimension `d_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct PvmFamily<T: Real> {
    pvms: Vec<Pvm<T>>,
    d_a: usize,
}

impl<T: Real> PvmFamily<T> {
    pub fn new(d_a: usize, pvms: Vec<Pvm<T>>) -> Result<Self> {
        if let Some(p) = pvms.iter().find(|p| p.dim() != d_a) {
            return Err(Error::DimMismatch(format!(
                "family member acts on dimension {}, expected {d_a}",
                p.dim()
            )));
        }
        Ok(Self { pvms, d_a })
    }

    pub fn pvms(&self) -> &[Pvm<T>] {
        &self.pvms
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    /// All projections of all members, in order.
    pub fn projections(&self) -> Vec<ComplexMatrix<T>> {
        self.pvms
            .iter()
            .flat_map(|p| p.projections().iter().cloned())
            .collect()
    }
}

/// `|Φ_d⟩ = d^{-1/2} Σ_j |j⟩⊗|j⟩`.
pub fn max_entangled_vector<T: Real>(d: usize) -> ComplexVector<T> {
    let amp = cr(T::one() / T::lit(d as f64).sqrt());
    let mut v = ComplexVector::zeros(d * d);
    for j in 0..d {
        v[j * d + j] = amp;
    }
    v
}

/// `|Φ_d⟩⟨Φ_d|` on `C^d ⊗ C^d`.
pub fn max_entangled_state<T: Real>(d: usize) -> BipartiteState<T> {
    BipartiteState {
        rho: outer(&max_entangled_vector::<T>(d)),
        d_a: d,
        d_b: d,
    }
}

/// The named states and measurements of the worked examples.
pub mod catalog {
    use super::*;
    use crate::linalg::{basis_vector, matrix_unit};

    fn ket<T: Real>(entries: &[(f64, f64)]) -> ComplexVector<T> {
        ComplexVector::from_iterator(
            entries.len(),
            entries.iter().map(|&(re, im)| Complex::new(T::lit(re), T::lit(im))),
        )
    }

    fn labelled<T: Real>(projections: Vec<ComplexMatrix<T>>, labels: &[&str]) -> Pvm<T> {
        Pvm::from_parts_unchecked(projections, labels.iter().map(|s| s.to_string()).collect())
    }

    /// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn bell<T: Real>() -> BipartiteState<T> {
        max_entangled_state(2)
    }

    /// `½(|00⟩⟨00| + |11⟩⟨11|)`.
    pub fn mix<T: Real>() -> BipartiteState<T> {
        let half = cr(T::lit(0.5));
        let rho = (matrix_unit::<T>(4, 0, 0) + matrix_unit::<T>(4, 3, 3)) * half;
        BipartiteState::from_parts_unchecked(rho, 2, 2)
    }

    /// Computational basis `{|0⟩⟨0|, |1⟩⟨1|}` with labels `0`, `1`.
    pub fn z_basis<T: Real>() -> Pvm<T> {
        labelled(
            vec![matrix_unit(2, 0, 0), matrix_unit(2, 1, 1)],
            &["0", "1"],
        )
    }

    /// `{|+⟩⟨+|, |−⟩⟨−|}` with labels `+`, `-`.
    pub fn x_basis<T: Real>() -> Pvm<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = ket::<T>(&[(s, 0.), (s, 0.)]);
        let minus = ket::<T>(&[(s, 0.), (-s, 0.)]);
        labelled(vec![outer(&plus), outer(&minus)], &["+", "-"])
    }

    /// Z and X bases.
    pub fn s1<T: Real>() -> PvmFamily<T> {
        PvmFamily {
            pvms: vec![z_basis(), x_basis()],
            d_a: 2,
        }
    }

    /// Z basis only.
    pub fn s2<T: Real>() -> PvmFamily<T> {
        PvmFamily {
            pvms: vec![z_basis()],
            d_a: 2,
        }
    }

    /// `|Φ₃⟩⟨Φ₃|` on `C³ ⊗ C³`.
    pub fn qutrit_phi3<T: Real>() -> BipartiteState<T> {
        max_entangled_state(3)
    }

    /// `P₀ = |0⟩⟨0| + |1⟩⟨1|`, `P₁ = |2⟩⟨2|`.
    pub fn qutrit_p<T: Real>() -> Pvm<T> {
        let p0 = matrix_unit::<T>(3, 0, 0) + matrix_unit::<T>(3, 1, 1);
        labelled(vec![p0, matrix_unit(3, 2, 2)], &["0", "1"])
    }

    /// `Q₁ = |v⟩⟨v|` with `|v⟩ = (|1⟩ + |2⟩)/√2`, `Q₀ = I − Q₁`.
    pub fn qutrit_q<T: Real>() -> Pvm<T> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = ket::<T>(&[(0., 0.), (s, 0.), (s, 0.)]);
        let q1 = outer(&v);
        let q0 = identity::<T>(3) - &q1;
        labelled(vec![q0, q1], &["0", "1"])
    }

    /// `{𝒫, 𝒬}` as a two-setting family.
    pub fn qutrit_family<T: Real>() -> PvmFamily<T> {
        PvmFamily {
            pvms: vec![qutrit_p(), qutrit_q()],
            d_a: 3,
        }
    }

    /// `|0…0⟩⟨0…0|` product state.
    pub fn product_zero<T: Real>(d_a: usize, d_b: usize) -> BipartiteState<T> {
        BipartiteState::from_parts_unchecked(outer(&basis_vector(d_a * d_b, 0)), d_a, d_b)
    }

    /// Single-outcome measurement `{I}`.
    pub fn trivial_pvm<T: Real>(d: usize) -> Pvm<T> {
        labelled(vec![identity(d)], &["I"])
    }

    /// Named states of the catalog.
    pub fn states<T: Real>() -> Vec<(&'static str, BipartiteState<T>)> {
        vec![
            ("bell", bell()),
            ("mix", mix()),
            ("qutrit_phi3", qutrit_phi3()),
        ]
    }

    /// Named measurement families of the catalog.
    pub fn families<T: Real>() -> Vec<(&'static str, PvmFamily<T>)> {
        vec![("S1", s1()), ("S2", s2()), ("qutrit_PQ", qutrit_family())]
    }
}
