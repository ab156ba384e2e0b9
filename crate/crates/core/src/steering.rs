//! Steering assemblages and zero-error decoding of Alice's outcome on Bob's side.

use crate::cp_maps::{conditional_operators, pairwise_orthogonality, LambdaMap, ZusVerdict};
use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, psd_rank, support_projection, ComplexMatrix, ToleranceConfig};
use crate::objects::{validate_pvm, BipartiteState, Pvm};
use crate::scalar::Real;

/// Label of the decoder outcome covering `S` minus the union of supports.
pub const DISCARD_LABEL: &str = "⊥";

/// `σ_{a|x}` for one setting `x`.
#[derive(Debug, Clone)]
pub struct Setting<T: Real> {
    pub label: String,
    pub outcomes: Vec<(String, ComplexMatrix<T>)>,
}

#[derive(Debug, Clone)]
pub struct Assemblage<T: Real> {
    pub settings: Vec<Setting<T>>,
    pub rho_b: ComplexMatrix<T>,
    support_isometry: ComplexMatrix<T>,
}

impl<T: Real> Assemblage<T> {
    pub fn setting(&self, label: &str) -> Result<&Setting<T>> {
        self.settings
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| Error::UnknownSetting(label.to_string()))
    }

    /// Isometry `S → H_B` onto the support of `ρ_B`.
    pub fn support_isometry(&self) -> &ComplexMatrix<T> {
        &self.support_isometry
    }

    /// Largest `‖Σ_a σ_{a|x} − ρ_B‖_max` over settings.
    pub fn no_signalling_defect(&self) -> T {
        self.settings
            .iter()
            .map(|s| {
                let sum = s
                    .outcomes
                    .iter()
                    .fold(ComplexMatrix::zeros(self.rho_b.nrows(), self.rho_b.ncols()), |acc, (_, m)| acc + m);
                max_abs(&(sum - &self.rho_b))
            })
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// `σ_{a|x} = Tr_A[(P_{x,a}⊗I)ρ]` for named settings.
pub fn assemblage<T: Real>(
    state: &BipartiteState<T>,
    settings: &[(String, Pvm<T>)],
    tol: &ToleranceConfig<T>,
) -> Result<Assemblage<T>> {
    let lambda = LambdaMap::new(state.clone(), tol)?;
    let settings = settings
        .iter()
        .map(|(label, pvm)| {
            let z = conditional_operators(&lambda, pvm)?;
            Ok(Setting {
                label: label.clone(),
                outcomes: z.labels.into_iter().zip(z.operators).collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assemblage {
        settings,
        rho_b: lambda.rho_b().clone(),
        support_isometry: lambda.support_basis().clone(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVerdict<T> {
    pub pass: bool,
    pub settings: Vec<(String, ZusVerdict<T>)>,
}

/// Per-setting perfect distinguishability with the ZUS overlap metric.
pub fn perfect_steering_check<T: Real>(asm: &Assemblage<T>, tol: &ToleranceConfig<T>) -> SteeringVerdict<T> {
    let settings: Vec<(String, ZusVerdict<T>)> = asm
        .settings
        .iter()
        .map(|s| {
            let (labels, ops): (Vec<String>, Vec<ComplexMatrix<T>>) = s.outcomes.iter().cloned().unzip();
            (s.label.clone(), pairwise_orthogonality(&labels, &ops, tol))
        })
        .collect();
    SteeringVerdict {
        pass: settings.iter().all(|(_, v)| v.pass),
        settings,
    }
}

/// Zero-error decoder for one setting, as a PVM on `S`.
#[derive(Debug, Clone)]
pub struct Decoder<T: Real> {
    pub setting: String,
    /// Outcome labels followed by [`DISCARD_LABEL`] when the remainder is nonzero.
    pub pvm: Pvm<T>,
    pub ranks: Vec<usize>,
    /// Largest `Tr(Q_⊥ σ_{a|x})`; zero on consistent data.
    pub discard_weight: T,
    /// Largest `|Tr(Q_a σ_{b|x}) − δ_ab Tr σ_{a|x}|`.
    pub decoding_defect: T,
}

pub fn bob_decoder<T: Real>(asm: &Assemblage<T>, setting: &str, tol: &ToleranceConfig<T>) -> Result<Decoder<T>> {
    let s = asm.setting(setting)?;
    let (labels, ops): (Vec<String>, Vec<ComplexMatrix<T>>) = s.outcomes.iter().cloned().unzip();
    let verdict = pairwise_orthogonality(&labels, &ops, tol);
    if !verdict.pass {
        let (a, b) = verdict.failing_pair.unwrap_or_default();
        return Err(Error::NotPerfect(format!(
            "setting {setting}: outcomes {a} and {b} overlap ({:.3e})",
            verdict.worst_overlap.as_f64()
        )));
    }
    let v = &asm.support_isometry;
    let dim = v.ncols();
    let compressed: Vec<ComplexMatrix<T>> = ops.iter().map(|m| v.adjoint() * m * v).collect();
    let mut projections = Vec::with_capacity(ops.len() + 1);
    let mut out_labels = Vec::with_capacity(ops.len() + 1);
    for (label, m) in labels.iter().zip(&compressed) {
        let p = support_projection(m, tol)?;
        // zero conditional operators contribute no outcome
        if max_abs(&p) > T::zero() {
            projections.push(p);
            out_labels.push(label.clone());
        }
    }
    let remainder = projections
        .iter()
        .fold(identity::<T>(dim), |acc, p| acc - p);
    let remainder_rank = psd_rank(&crate::linalg::hermitian_part(&remainder), tol).unwrap_or(0);
    let mut discard_weight = T::zero();
    if remainder_rank > 0 {
        for m in &compressed {
            discard_weight = discard_weight.max((&remainder * m).trace().re.abs());
        }
        projections.push(remainder);
        out_labels.push(DISCARD_LABEL.to_string());
    }
    let mut decoding_defect = T::zero();
    for (i, q) in projections.iter().enumerate().take(out_labels.len() - usize::from(remainder_rank > 0)) {
        let qi = labels.iter().position(|l| *l == out_labels[i]).expect("kept label");
        for (j, m) in compressed.iter().enumerate() {
            let want = if qi == j { m.trace().re } else { T::zero() };
            decoding_defect = decoding_defect.max(((q * m).trace().re - want).abs());
        }
    }
    let ranks = projections
        .iter()
        .map(|p| psd_rank(&crate::linalg::hermitian_part(p), tol))
        .collect::<Result<Vec<_>>>()?;
    let pvm = validate_pvm(projections, Some(out_labels), &tol.with_eq_tol(tol.eq_tol.max(T::lit(1e-8))))?;
    Ok(Decoder {
        setting: setting.to_string(),
        pvm,
        ranks,
        discard_weight,
        decoding_defect,
    })
}
