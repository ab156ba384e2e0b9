//! `construct`: writes self-contained problem files for the example families.

use clap::{Args, ValueEnum};
use nalgebra::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};
use zuslab::constructions::{
    appendix_c_example1, appendix_c_example2, larger_memory_zus, product_extension_zus, proper_subalgebra_zus,
    sample_pvms_in_algebra, structure_algebra, ProperSubalgebraRecipe,
};
use zuslab::json::{matrix_to_json, ProblemFile};
use zuslab::linalg::{basis_vector, identity, matrix_unit, outer};
use zuslab::objects::catalog::{bell, mix, qutrit_p, qutrit_phi3, qutrit_q, x_basis, z_basis};
use zuslab::random::{haar_unitary, random_density};
use zuslab::{
    validate_pvm, BipartiteState64, Block, ComplexMatrix64, ComplexVector, Pvm64, Tolerances64, WedderburnStructure,
};

use crate::report::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    ProperSubalgebra,
    LargerMemory,
    ProductExtension,
    #[value(name = "appendix-c-1")]
    AppendixC1,
    #[value(name = "appendix-c-2")]
    AppendixC2,
    Bell,
    Mix,
    Qutrit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaKind {
    /// `I/k`.
    Mixed,
    /// `|0⟩⟨0|`.
    Pure,
    /// Full-rank random density operator.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    Bell,
    Mix,
    Qutrit,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    pub kind: Kind,
    /// Wedderburn blocks as `NxM` (matrix size x multiplicity), comma separated.
    #[arg(long)]
    pub blocks: Option<String>,
    /// One-based block carrying the state.
    #[arg(long)]
    pub block_index: Option<usize>,
    /// Conjugate the block structure by a seeded Haar unitary.
    #[arg(long)]
    pub random_basis: bool,
    /// Number of sampled measurements in the algebra.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Local dimension of the maximally entangled factor.
    #[arg(long)]
    pub d: Option<usize>,
    /// Dimension of the memory system.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub sigma: Option<SigmaKind>,
    /// Base state of a product extension.
    #[arg(long, value_enum)]
    pub base: Option<Base>,
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::new("InvalidParameter", msg)
}

impl ConstructArgs {
    fn reject_unused(&self, allowed: &[&str]) -> Result<(), Failure> {
        let given = [
            ("blocks", self.blocks.is_some()),
            ("block-index", self.block_index.is_some()),
            ("random-basis", self.random_basis),
            ("samples", self.samples.is_some()),
            ("d", self.d.is_some()),
            ("k", self.k.is_some()),
            ("sigma", self.sigma.is_some()),
            ("base", self.base.is_some()),
        ];
        for (name, set) in given {
            if set && !allowed.contains(&name) {
                let kind = self.kind.to_possible_value().expect("no skipped variants");
                return Err(invalid(format!("--{name} does not apply to {}", kind.get_name())));
            }
        }
        Ok(())
    }
}

pub fn parse_blocks(spec: &str) -> Result<Vec<Block>, Failure> {
    spec.split(',')
        .map(|part| {
            let (n, m) = part
                .trim()
                .split_once(['x', 'X'])
                .ok_or_else(|| invalid(format!("block {part:?} is not of the form NxM")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| v > 0)
                    .ok_or_else(|| invalid(format!("block {part:?} needs positive integers")))
            };
            Ok(Block { n: parse(n)?, m: parse(m)? })
        })
        .collect()
}

fn memory(kind: SigmaKind, k: usize, rng: &mut ChaCha8Rng) -> Result<ComplexMatrix64, Failure> {
    if k == 0 {
        return Err(invalid("--k must be at least 1"));
    }
    Ok(match kind {
        SigmaKind::Mixed => identity::<f64>(k) / Complex::new(k as f64, 0.0),
        SigmaKind::Pure => outer(&basis_vector::<f64>(k, 0)),
        SigmaKind::Random => random_density::<f64, _>(k, k, rng),
    })
}

fn sigma_name(kind: SigmaKind) -> &'static str {
    match kind {
        SigmaKind::Mixed => "mixed",
        SigmaKind::Pure => "pure",
        SigmaKind::Random => "random",
    }
}

/// Computational basis of `C^d` with labels `0..d`.
fn computational(d: usize, tol: &Tolerances64) -> Result<Pvm64, Failure> {
    let ps = (0..d).map(|i| matrix_unit::<f64>(d, i, i)).collect();
    Ok(validate_pvm(ps, Some((0..d).map(|i| i.to_string()).collect()), tol)?)
}

/// Fourier basis `|f_j⟩ = Σ_k ω^{jk}|k⟩/√d`.
fn fourier(d: usize, tol: &Tolerances64) -> Result<Pvm64, Failure> {
    let ps = (0..d)
        .map(|j| {
            let v = ComplexVector::from_fn(d, |k, _| {
                Complex::from_polar(1.0 / (d as f64).sqrt(), std::f64::consts::TAU * (j * k) as f64 / d as f64)
            });
            outer(&v)
        })
        .collect();
    Ok(validate_pvm(ps, Some((0..d).map(|i| i.to_string()).collect()), tol)?)
}

type Families = Vec<(&'static str, Vec<(&'static str, Pvm64)>)>;

fn qubit_families() -> Families {
    vec![
        ("S1", vec![("Z", z_basis()), ("X", x_basis())]),
        ("S2", vec![("Z", z_basis())]),
    ]
}

fn qutrit_families() -> Families {
    vec![("PQ", vec![("P", qutrit_p()), ("Q", qutrit_q())])]
}

fn file_for(state: &BipartiteState64, families: &Families) -> ProblemFile {
    families
        .iter()
        .fold(ProblemFile::new(state), |f, (name, pvms)| f.with_named_family(name, pvms))
}

/// Builds the problem file; `seed` drives every random choice.
pub fn build(args: &ConstructArgs, seed: u64) -> Result<ProblemFile, Failure> {
    let tol = Tolerances64::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Map::new();
    let kind_name = args.kind.to_possible_value().expect("no skipped variants").get_name().to_string();

    let mut file = match args.kind {
        Kind::Bell | Kind::Mix => {
            args.reject_unused(&[])?;
            let state = if args.kind == Kind::Bell { bell() } else { mix() };
            file_for(&state, &qubit_families())
        }
        Kind::Qutrit => {
            args.reject_unused(&[])?;
            file_for(&qutrit_phi3(), &qutrit_families())
        }
        Kind::ProperSubalgebra => {
            args.reject_unused(&["blocks", "block-index", "random-basis", "samples"])?;
            let spec = args.blocks.clone().unwrap_or_else(|| "2x2".to_string());
            let blocks = parse_blocks(&spec)?;
            let index = args.block_index.unwrap_or(1);
            if index == 0 {
                return Err(invalid("--block-index is one-based"));
            }
            let samples = args.samples.unwrap_or(4);
            let d: usize = blocks.iter().map(|b| b.n * b.m).sum();
            let structure = if args.random_basis {
                WedderburnStructure::from_parts(haar_unitary::<f64, _>(d, &mut rng), blocks.clone(), &tol)?
            } else {
                WedderburnStructure::standard(blocks.clone(), &tol)?
            };
            if structure.is_proper() && index > blocks.len() {
                return Err(Failure::new(
                    "BadBlock",
                    format!("--block-index {index} out of range for {} blocks", blocks.len()),
                ));
            }
            let m = blocks.get(index - 1).map_or(1, |b| b.m);
            let recipe = ProperSubalgebraRecipe {
                structure: structure.clone(),
                chosen_block: index - 1,
                u_vector: basis_vector(m, 0),
                v_vector: basis_vector(m, 0),
            };
            let state = proper_subalgebra_zus(&recipe, &tol)?;
            let pvms = sample_pvms_in_algebra(&structure, samples, seed, &tol)?;
            let names: Vec<String> = (0..samples).map(|i| format!("A{i}")).collect();
            let named: Vec<(&str, Pvm64)> = names.iter().map(String::as_str).zip(pvms).collect();
            let mut f = ProblemFile::new(&state).with_named_family("A", &named);
            let alg = structure_algebra(&structure, &tol)?;
            f.algebra_generators = Some(alg.basis().iter().map(matrix_to_json).collect());
            params.insert("blocks".into(), spec.into());
            params.insert("block_index".into(), index.into());
            params.insert("random_basis".into(), args.random_basis.into());
            params.insert("samples".into(), samples.into());
            f
        }
        Kind::LargerMemory => {
            args.reject_unused(&["d", "k", "sigma"])?;
            let d = args.d.unwrap_or(2);
            let k = args.k.unwrap_or(2);
            if d < 2 {
                return Err(invalid("--d must be at least 2"));
            }
            let kind = args.sigma.unwrap_or(SigmaKind::Mixed);
            let sigma = memory(kind, k, &mut rng)?;
            let state = larger_memory_zus(d, &sigma, &tol)?;
            let families: Families = vec![("S", vec![("Z", computational(d, &tol)?), ("F", fourier(d, &tol)?)])];
            params.insert("d".into(), d.into());
            params.insert("k".into(), k.into());
            params.insert("sigma".into(), sigma_name(kind).into());
            params.insert("memory".into(), json!(matrix_to_json(&sigma)));
            file_for(&state, &families)
        }
        Kind::ProductExtension => {
            args.reject_unused(&["base", "k", "sigma"])?;
            let base = args.base.unwrap_or(Base::Bell);
            let k = args.k.unwrap_or(2);
            let kind = args.sigma.unwrap_or(SigmaKind::Mixed);
            let omega = memory(kind, k, &mut rng)?;
            let (state, families, base_name) = match base {
                Base::Bell => (bell(), qubit_families(), "bell"),
                Base::Mix => (mix(), qubit_families(), "mix"),
                Base::Qutrit => (qutrit_phi3(), qutrit_families(), "qutrit"),
            };
            let state = product_extension_zus(&state, &omega, &tol)?;
            params.insert("base".into(), base_name.into());
            params.insert("k".into(), k.into());
            params.insert("sigma".into(), sigma_name(kind).into());
            params.insert("memory".into(), json!(matrix_to_json(&omega)));
            file_for(&state, &families)
        }
        Kind::AppendixC1 | Kind::AppendixC2 => {
            args.reject_unused(&["k", "sigma"])?;
            let first = args.kind == Kind::AppendixC1;
            let k = if first { 4 } else { 2 };
            if args.k.is_some_and(|given| given != k) {
                return Err(invalid(format!("{kind_name} needs --k {k}")));
            }
            let kind = args
                .sigma
                .unwrap_or(if first { SigmaKind::Pure } else { SigmaKind::Mixed });
            let omega = memory(kind, k, &mut rng)?;
            let entry = if first {
                appendix_c_example1(&omega, &tol)?
            } else {
                appendix_c_example2(&omega, &tol)?
            };
            let lift = |p: Pvm64| -> Result<Pvm64, Failure> {
                let ps = p.projections().iter().map(|e| entry.lift(e)).collect();
                Ok(validate_pvm(ps, Some(p.labels().to_vec()), &tol)?)
            };
            let families: Families = vec![("S1", vec![("Z", lift(z_basis())?), ("X", lift(x_basis())?)])];
            let mut f = file_for(&entry.state, &families);
            f.algebra_generators = Some(entry.algebra().basis().iter().map(matrix_to_json).collect());
            params.insert("sigma".into(), sigma_name(kind).into());
            params.insert("memory".into(), json!(matrix_to_json(&omega)));
            f
        }
    };
    file.seed = Some(seed);
    file.metadata = json!({
        "generator": "zuslab construct",
        "kind": kind_name,
        "params": Value::Object(params),
    });
    Ok(file)
}
