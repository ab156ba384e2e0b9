//! The four analysis subcommands.

use std::path::Path;

use serde_json::{json, Value};
use zuslab::cp_maps::spectrum;
use zuslab::json::{matrix_to_json, Problem, ProblemFile, TolerancesJson};
use zuslab::linalg::psd_rank;
use zuslab::steering::DISCARD_LABEL;
use zuslab::{
    a_zus_check, assemblage, bob_decoder, compute_normal_form, full_algebra_form, generate_algebra, is_zus,
    perfect_steering_check, verify_rigidity, wedderburn_decompose, Block, Error, LambdaMap, DEFAULT_SEED,
};

use crate::report::{fixed, list, sci, subscript, Failure, Report, EXIT_FAILS};

pub const SEED_ENV: &str = "ZUSLAB_SEED";

/// Options shared by every subcommand.
pub struct Common<'a> {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub family: Option<&'a str>,
}

/// Seed precedence: flag, then `ZUSLAB_SEED`, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: Option<u64>) -> Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(v) = std::env::var(SEED_ENV) {
        return v
            .trim()
            .parse()
            .map_err(|_| Failure::new("InvalidParameter", format!("{SEED_ENV}={v:?} is not an unsigned integer")));
    }
    Ok(fallback.unwrap_or(DEFAULT_SEED))
}

pub struct Loaded {
    pub problem: Problem,
    pub seed: u64,
}

pub fn load(path: &Path, c: &Common) -> Result<Loaded, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new("Io", format!("cannot read {}: {e}", path.display())))?;
    let file = ProblemFile::parse(&text)?;
    let overrides = c.tol.map(|t| TolerancesJson {
        eq_tol: Some(t),
        ..Default::default()
    });
    let problem = file.validate(overrides)?;
    let seed = match c.seed {
        Some(s) => s,
        None => match problem.seed {
            Some(s) => s,
            None => resolve_seed(None, None)?,
        },
    };
    Ok(Loaded { problem, seed })
}

fn pair(p: &Option<(String, String)>) -> Value {
    p.as_ref().map_or(Value::Null, |(a, b)| json!([a, b]))
}

fn blocks_text(blocks: &[Block]) -> String {
    blocks
        .iter()
        .map(|b| format!("M{}⊗I{}", subscript(b.n), subscript(b.m)))
        .collect::<Vec<_>>()
        .join(" ⊕ ")
}

fn blocks_json(blocks: &[Block]) -> Value {
    blocks.iter().map(|b| json!({ "n": b.n, "m": b.m })).collect()
}

fn header(r: &mut Report, p: &Problem, names: &[String]) {
    r.set("d_a", p.state.d_a());
    r.set("d_b", p.state.d_b());
    r.line(format!(
        "state: d_a = {}, d_b = {}; settings: {}",
        p.state.d_a(),
        p.state.d_b(),
        names.join(", ")
    ));
}

pub fn check_zus(path: &Path, c: &Common) -> Result<Report, Failure> {
    let Loaded { problem: p, .. } = load(path, c)?;
    let tol = p.tolerances;
    let settings = p.settings(c.family)?;
    if settings.is_empty() {
        return Err(Failure::new("Schema", "no measurements selected"));
    }
    let lambda = LambdaMap::new(p.state.clone(), &tol)?;
    let mut r = Report::new("check-zus");
    let names: Vec<String> = settings.iter().map(|(n, _)| n.clone()).collect();
    header(&mut r, &p, &names);
    let mut rows = Vec::new();
    let mut first_failure = None;
    for (name, pvm) in &settings {
        let v = is_zus(&lambda, pvm, &tol)?;
        rows.push(json!({
            "setting": name,
            "pass": v.pass,
            "worst_overlap": v.worst_overlap,
            "worst_pair": pair(&v.worst_pair),
            "failing_pair": pair(&v.failing_pair),
        }));
        let mut line = format!(
            "  {name:<10} {}  worst overlap {}",
            if v.pass { "pass" } else { "FAIL" },
            sci(v.worst_overlap)
        );
        if let Some((a, b)) = &v.failing_pair {
            line += &format!("  failing pair ({a},{b})");
            first_failure.get_or_insert((name.clone(), a.clone(), b.clone()));
        }
        r.line(line);
    }
    let common = first_failure.is_none();
    r.set("settings", rows);
    r.set("common_zus", common);
    r.line(format!("common ZUS: {}", if common { "yes" } else { "no" }));
    if let Some((s, a, b)) = first_failure {
        r.line(format!("setting {s} fails: outcomes ({a},{b}) are not perfectly distinguishable"));
        r.exit = EXIT_FAILS;
    }
    Ok(r)
}

pub fn analyze(path: &Path, c: &Common) -> Result<Report, Failure> {
    let Loaded { problem: p, seed } = load(path, c)?;
    let tol = p.tolerances;
    let settings = p.settings(c.family)?;
    let family = p.combined_family(c.family)?;
    let d = p.state.d_a();
    let mut r = Report::new("analyze");
    let names: Vec<String> = settings.iter().map(|(n, _)| n.clone()).collect();
    header(&mut r, &p, &names);
    r.set("seed", seed);

    let alg = generate_algebra(&family.projections(), d, &tol)?;
    let structure = wedderburn_decompose(&alg, &tol, seed)?;
    let rep = verify_rigidity(&p.state, &family, &tol)?;
    r.set(
        "algebra",
        json!({
            "dim": alg.dim(),
            "full": alg.is_full(),
            "blocks": blocks_json(structure.blocks()),
        }),
    );
    if alg.is_full() {
        r.line(format!("algebra: full M{}", subscript(d)));
    } else {
        r.line(format!("algebra: dim {} (proper)", alg.dim()));
    }
    r.line(format!("blocks: {}", blocks_text(structure.blocks())));

    let h = rep.hypotheses;
    let yn = |b: bool| if b { "yes" } else { "no" };
    r.set("rigidity", serde_json::to_value(&rep).expect("report serializes"));
    r.line(format!(
        "hypotheses: d_a = d_b {}; common ZUS {}; full algebra {}",
        yn(h.dims_equal),
        yn(h.common_zus),
        yn(h.algebra_full)
    ));
    let k = &rep.conclusions;
    let mut conclusions = format!(
        "conclusions: purity {}, Kraus rank {}, ‖ρ_A − I/d‖ = {}",
        fixed(k.purity),
        k.kraus_rank,
        sci(k.rho_a_maximally_mixed_defect)
    );
    if let Some(s) = &k.schmidt_coeffs {
        conclusions += &format!(", Schmidt ({})", list(s));
    }
    r.line(conclusions);
    if rep.theorem_violation {
        r.line("THEOREM VIOLATION: hypotheses hold but the state is not pure and maximally entangled");
        r.exit = EXIT_FAILS;
    } else if h.all() {
        r.line("rigid: pure, maximally entangled");
    } else {
        r.line("rigidity theorem silent");
    }

    let lambda = LambdaMap::new(p.state.clone(), &tol)?;
    let a_alg = match &p.algebra_generators {
        Some(g) => generate_algebra(g, d, &tol)?,
        None => alg.clone(),
    };
    let az = a_zus_check(&lambda, &a_alg, &tol)?;
    r.set(
        "a_zus",
        json!({
            "algebra_dim": a_alg.dim(),
            "source": if p.algebra_generators.is_some() { "algebra_generators" } else { "family" },
            "is_azus": az.is_azus,
            "hom_defect": az.hom_defect,
            "commutant_defect": az.commutant_defect,
        }),
    );
    r.line(format!(
        "𝒜-ZUS (dim {}): {} (hom defect {}, commutant defect {}); maximally entangled: {}",
        a_alg.dim(),
        yn(az.is_azus),
        sci(az.hom_defect),
        sci(az.commutant_defect),
        yn(k.is_max_entangled)
    ));

    let asm = assemblage(&p.state, &settings, &tol)?;
    let sv = perfect_steering_check(&asm, &tol);
    r.set("steering_pass", sv.pass);
    r.line(format!("steering verdict: {}", if sv.pass { "pass" } else { "fail" }));
    Ok(r)
}

pub fn normal_form(path: &Path, c: &Common, full_output: bool) -> Result<Report, Failure> {
    let Loaded { problem: p, seed } = load(path, c)?;
    let tol = p.tolerances;
    let d = p.state.d_a();
    let gens = p.algebra_generators_or_projections(c.family)?;
    let alg = generate_algebra(&gens, d, &tol)?;
    let lambda = LambdaMap::new(p.state.clone(), &tol)?;
    let mut r = Report::new("normal-form");
    r.set("d_a", d);
    r.set("d_b", p.state.d_b());
    r.set("seed", seed);
    r.set("algebra_dim", alg.dim());

    let check = a_zus_check(&lambda, &alg, &tol)?;
    r.set("a_zus", serde_json::to_value(check).expect("check serializes"));
    r.line(format!(
        "𝒜-ZUS (dim {}): {} (hom defect {}, commutant defect {})",
        alg.dim(),
        if check.is_azus { "yes" } else { "no" },
        sci(check.hom_defect),
        sci(check.commutant_defect)
    ));
    if !check.is_azus {
        let e = Error::NotAZus {
            hom_defect: check.hom_defect,
            commutant_defect: check.commutant_defect,
        };
        r.set("error", json!({ "kind": e.kind(), "message": e.to_string() }));
        r.line(format!("error [{}]: {e}", e.kind()));
        r.exit = EXIT_FAILS;
        return Ok(r);
    }

    let nf = compute_normal_form(&lambda, &alg, &tol, seed)?;
    r.line(format!("blocks of 𝒜ᵀ: {}", blocks_text(nf.structure.blocks())));
    r.line("block  n  dim K  τ spectrum".to_string());
    let mut rows = Vec::new();
    for (i, b) in nf.blocks.iter().enumerate() {
        let spec = b.tau_spectrum(&tol)?;
        r.line(format!("{:>5} {:>2} {:>6}  ({})", i + 1, b.n, b.k, list(&spec)));
        let mut row = json!({
            "algebra_block": b.algebra_block,
            "n": b.n,
            "k": b.k,
            "tau_spectrum": spec,
        });
        if full_output {
            row["tau"] = json!(matrix_to_json(&b.tau));
        }
        rows.push(row);
    }
    r.set("blocks", rows);
    for a in &nf.annotations {
        r.line(format!("note: {a}"));
    }
    r.set("annotations", nf.annotations.clone());
    r.set("rho_b_defect", nf.rho_b_defect);
    r.set("lambda_defect", nf.lambda_defect);
    r.line(format!("ρ_B block-form defect: {}", sci(nf.rho_b_defect)));
    r.line(format!("Λ-reconstruction defect: {}", sci(nf.lambda_defect)));
    if full_output {
        r.set("transform_u", matrix_to_json(&nf.transform_u));
        r.set("support_isometry", matrix_to_json(&nf.support_isometry));
    }

    if alg.is_full() {
        let ff = full_algebra_form(&lambda, &tol, seed)?;
        let sigma = spectrum(&ff.sigma, &tol)?;
        r.line(format!("σ spectrum: ({})", list(&sigma)));
        r.line(format!("global form defect: {}", sci(ff.global_defect)));
        let mut g = json!({ "sigma_spectrum": sigma, "global_defect": ff.global_defect });
        if full_output {
            g["sigma"] = json!(matrix_to_json(&ff.sigma));
            g["u"] = json!(matrix_to_json(&ff.u));
        }
        r.set("full_algebra_form", g);
    }
    Ok(r)
}

pub fn steering(path: &Path, c: &Common) -> Result<Report, Failure> {
    let Loaded { problem: p, .. } = load(path, c)?;
    let tol = p.tolerances;
    let settings = p.settings(c.family)?;
    if settings.is_empty() {
        return Err(Failure::new("Schema", "no measurements selected"));
    }
    let asm = assemblage(&p.state, &settings, &tol)?;
    let verdict = perfect_steering_check(&asm, &tol);
    let mut r = Report::new("steering");
    let names: Vec<String> = settings.iter().map(|(n, _)| n.clone()).collect();
    header(&mut r, &p, &names);

    r.line("setting    outcome  weight    rank".to_string());
    let mut table = Vec::new();
    for s in &asm.settings {
        for (label, sigma) in &s.outcomes {
            let weight = sigma.trace().re;
            let rank = psd_rank(&zuslab::linalg::hermitian_part(sigma), &tol)?;
            r.line(format!("{:<10} {:<8} {}  {}", s.label, label, fixed(weight), rank));
            table.push(json!({ "setting": s.label, "outcome": label, "weight": weight, "rank": rank }));
        }
    }
    r.set("assemblage", table);
    r.set("no_signalling_defect", asm.no_signalling_defect());

    let mut rows = Vec::new();
    for (name, v) in &verdict.settings {
        let mut row = json!({
            "setting": name,
            "pass": v.pass,
            "worst_overlap": v.worst_overlap,
            "failing_pair": pair(&v.failing_pair),
        });
        if v.pass {
            let dec = bob_decoder(&asm, name, &tol)?;
            let ranks = dec
                .pvm
                .labels()
                .iter()
                .zip(&dec.ranks)
                .map(|(l, k)| format!("{l}:{k}"))
                .collect::<Vec<_>>()
                .join(", ");
            r.line(format!(
                "{name}: perfectly distinguishable (worst overlap {}); decoder ranks ({ranks})",
                sci(v.worst_overlap)
            ));
            row["decoder"] = json!({
                "labels": dec.pvm.labels(),
                "ranks": dec.ranks,
                "discard": dec.pvm.labels().iter().any(|l| l == DISCARD_LABEL),
                "decoding_defect": dec.decoding_defect,
                "discard_weight": dec.discard_weight,
            });
        } else {
            let (a, b) = v.failing_pair.clone().unwrap_or_default();
            r.line(format!(
                "{name}: FAIL, outcomes ({a},{b}) overlap {}",
                sci(v.worst_overlap)
            ));
        }
        rows.push(row);
    }
    r.set("settings", rows);
    r.set("pass", verdict.pass);
    r.line(format!("steering: {}", if verdict.pass { "pass" } else { "fail" }));
    if !verdict.pass {
        r.exit = EXIT_FAILS;
    }
    Ok(r)
}
