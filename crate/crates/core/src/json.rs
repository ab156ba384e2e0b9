//! Versioned problem-file schema. Complex numbers are `[re, im]` pairs and
//! matrices are arrays of rows.

use indexmap::IndexMap;
use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ToleranceConfig};
use crate::objects::{validate_pvm, validate_state, BipartiteState, Pvm, PvmFamily};

pub const SCHEMA_VERSION: &str = "zuslab/1";

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix<f64>) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix<f64>> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Schema("ragged matrix rows".into()));
    }
    Ok(ComplexMatrix::from_fn(n, cols, |i, j| {
        let [re, im] = rows[i][j];
        Complex::new(re, im)
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub d_a: usize,
    pub d_b: usize,
    pub rho: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvmJson {
    /// Setting name used in reports; defaults to `family[i]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub projections: Vec<JsonMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TolerancesJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psd_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    pub state: StateJson,
    #[serde(default)]
    pub pvm_families: IndexMap<String, Vec<PvmJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebra_generators: Option<Vec<JsonMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<TolerancesJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub metadata: serde_json::Value,
}

/// Validated contents of a [`ProblemFile`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub state: BipartiteState<f64>,
    pub families: IndexMap<String, PvmFamily<f64>>,
    /// Resolved setting name of every family member.
    pub setting_names: IndexMap<String, Vec<String>>,
    pub algebra_generators: Option<Vec<ComplexMatrix<f64>>>,
    pub tolerances: ToleranceConfig<f64>,
    pub seed: Option<u64>,
}

impl Problem {
    pub fn family(&self, name: &str) -> Result<&PvmFamily<f64>> {
        self.families
            .get(name)
            .ok_or_else(|| Error::Schema(format!("unknown family {name}")))
    }

    /// Named members of one family, or of every family in file order. When
    /// several families are combined each name is prefixed with `family.`.
    pub fn settings(&self, family: Option<&str>) -> Result<Vec<(String, Pvm<f64>)>> {
        let selected: Vec<&String> = match family {
            Some(f) => vec![self
                .families
                .get_key_value(f)
                .map(|(k, _)| k)
                .ok_or_else(|| Error::Schema(format!("unknown family {f}")))?],
            None => self.families.keys().collect(),
        };
        let qualify = selected.len() > 1;
        Ok(selected
            .into_iter()
            .flat_map(|f| {
                self.setting_names[f]
                    .iter()
                    .map(move |n| if qualify { format!("{f}.{n}") } else { n.clone() })
                    .zip(self.families[f].pvms().iter().cloned())
            })
            .collect())
    }

    /// The selected settings as one family.
    pub fn combined_family(&self, family: Option<&str>) -> Result<PvmFamily<f64>> {
        let pvms: Vec<Pvm<f64>> = self.settings(family)?.into_iter().map(|(_, p)| p).collect();
        if pvms.is_empty() {
            return Err(Error::Schema("no measurements selected".into()));
        }
        PvmFamily::new(self.state.d_a(), pvms)
    }

    /// Explicit generators, or else the projections of the selected settings.
    pub fn algebra_generators_or_projections(&self, family: Option<&str>) -> Result<Vec<ComplexMatrix<f64>>> {
        match &self.algebra_generators {
            Some(g) => Ok(g.clone()),
            None => Ok(self.combined_family(family)?.projections()),
        }
    }
}

pub fn pvm_to_json(p: &Pvm<f64>) -> PvmJson {
    PvmJson {
        name: None,
        projections: p.projections().iter().map(matrix_to_json).collect(),
        labels: Some(p.labels().to_vec()),
    }
}

impl ProblemFile {
    pub fn new(state: &BipartiteState<f64>) -> Self {
        Self {
            version: SCHEMA_VERSION.to_string(),
            state: StateJson {
                d_a: state.d_a(),
                d_b: state.d_b(),
                rho: matrix_to_json(state.rho()),
            },
            pvm_families: IndexMap::new(),
            algebra_generators: None,
            tolerances: None,
            seed: None,
            metadata: serde_json::Value::Null,
        }
    }

    pub fn with_family(mut self, name: &str, pvms: &[Pvm<f64>]) -> Self {
        self.pvm_families
            .insert(name.to_string(), pvms.iter().map(pvm_to_json).collect());
        self
    }

    pub fn with_named_family(mut self, name: &str, pvms: &[(&str, Pvm<f64>)]) -> Self {
        let members = pvms
            .iter()
            .map(|(n, p)| PvmJson {
                name: Some(n.to_string()),
                ..pvm_to_json(p)
            })
            .collect();
        self.pvm_families.insert(name.to_string(), members);
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Checks the version and runs every embedded object through its validator.
    pub fn validate(&self, overrides: Option<TolerancesJson>) -> Result<Problem> {
        if self.version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported version {:?}, expected {SCHEMA_VERSION:?}",
                self.version
            )));
        }
        let mut tol = ToleranceConfig::<f64>::default();
        for t in self.tolerances.iter().chain(overrides.iter()) {
            tol = ToleranceConfig::new(
                t.eq_tol.unwrap_or(tol.eq_tol),
                t.rank_tol.unwrap_or(tol.rank_tol),
                t.psd_tol.unwrap_or(tol.psd_tol),
            )?;
        }
        let rho = matrix_from_json(&self.state.rho)?;
        let state = validate_state(rho, self.state.d_a, self.state.d_b, &tol)?;
        let mut families = IndexMap::new();
        let mut setting_names = IndexMap::new();
        for (name, members) in &self.pvm_families {
            let mut seen = std::collections::HashSet::new();
            let names: Vec<String> = members
                .iter()
                .enumerate()
                .map(|(i, p)| p.name.clone().unwrap_or_else(|| i.to_string()))
                .collect();
            for n in &names {
                if !seen.insert(n.clone()) {
                    return Err(Error::Schema(format!("family {name}: duplicate setting name {n}")));
                }
            }
            setting_names.insert(name.clone(), names);
            let pvms = members
                .iter()
                .map(|p| {
                    let projections = p.projections.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                    validate_pvm(projections, p.labels.clone(), &tol)
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Schema(format!("family {name}: {e}")))?;
            let fam = PvmFamily::new(state.d_a(), pvms).map_err(|e| Error::Schema(format!("family {name}: {e}")))?;
            families.insert(name.clone(), fam);
        }
        let algebra_generators = self
            .algebra_generators
            .as_ref()
            .map(|gens| {
                gens.iter()
                    .map(|g| {
                        let m = matrix_from_json(g)?;
                        if m.shape() != (state.d_a(), state.d_a()) {
                            return Err(Error::DimMismatch(format!(
                                "algebra generator must be {0}x{0}",
                                state.d_a()
                            )));
                        }
                        Ok(m)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Problem {
            state,
            families,
            setting_names,
            algebra_generators,
            tolerances: tol,
            seed: self.seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objects::catalog::*;

    #[test]
    fn round_trip() {
        let file = ProblemFile::new(&bell()).with_family("S1", s1::<f64>().pvms());
        let text = file.to_json_string();
        let back = ProblemFile::parse(&text).unwrap();
        assert_eq!(back, file);
        let p = back.validate(None).unwrap();
        assert_eq!(p.state.rho(), bell::<f64>().rho());
        assert_eq!(p.family("S1").unwrap().pvms()[1].labels(), &["+", "-"]);
    }

    #[test]
    fn setting_names_resolve() {
        let file = ProblemFile::new(&bell())
            .with_family("S1", s1::<f64>().pvms())
            .with_named_family("S2", &[("Z", z_basis())]);
        let p = file.validate(None).unwrap();
        let names: Vec<String> = p.settings(None).unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["S1.0", "S1.1", "S2.Z"]);
        let names: Vec<String> = p.settings(Some("S1")).unwrap().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, ["0", "1"]);
        assert_eq!(p.settings(Some("S2")).unwrap().len(), 1);
        assert!(p.settings(Some("S3")).is_err());
        assert_eq!(p.combined_family(None).unwrap().pvms().len(), 3);
        let dup = ProblemFile::new(&bell()).with_named_family("a", &[("Z", z_basis()), ("Z", x_basis())]);
        assert!(matches!(dup.validate(None), Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ProblemFile::parse("{"), Err(Error::Schema(_))));
        let mut file = ProblemFile::new(&bell());
        file.version = "zuslab/0".into();
        assert!(matches!(file.validate(None), Err(Error::Schema(_))));
        let mut file = ProblemFile::new(&bell());
        file.state.rho[0][0] = [2.0, 0.0];
        assert!(matches!(file.validate(None), Err(Error::TraceNotOne(_))));
        let mut file = ProblemFile::new(&bell());
        file.state.rho[0].pop();
        assert!(file.validate(None).is_err());
    }

    #[test]
    fn tolerance_overrides_apply_in_order() {
        let mut file = ProblemFile::new(&bell());
        file.tolerances = Some(TolerancesJson { eq_tol: Some(1e-6), ..Default::default() });
        let p = file.validate(Some(TolerancesJson { rank_tol: Some(1e-7), ..Default::default() })).unwrap();
        assert_eq!(p.tolerances.eq_tol, 1e-6);
        assert_eq!(p.tolerances.rank_tol, 1e-7);
        assert!(file.validate(Some(TolerancesJson { eq_tol: Some(-1.0), ..Default::default() })).is_err());
    }
}
