//! Cross-module invariants on randomized inputs. Oracles are built here from
//! plain index arithmetic rather than the library's own helpers.

use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zuslab::constructions::{proper_subalgebra_zus, sample_pvms_in_algebra, structure_algebra, ProperSubalgebraRecipe};
use zuslab::cp_maps::conditional_operators;
use zuslab::random::{haar_unitary, random_density, random_unit_vector};
use zuslab::{
    a_zus_check, compute_normal_form, generate_algebra, is_zus, validate_state, wedderburn_decompose, Block,
    LambdaMap, Tolerances64, WedderburnStructure,
};

type M = DMatrix<Complex<f64>>;

fn tol() -> Tolerances64 {
    Tolerances64::default()
}

fn kron(a: &M, b: &M) -> M {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    M::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

fn eye(n: usize) -> M {
    M::identity(n, n)
}

fn max_abs(m: &M) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `Tr_A ρ` by explicit summation.
fn trace_a(rho: &M, d_a: usize, d_b: usize) -> M {
    M::from_fn(d_b, d_b, |i, j| (0..d_a).map(|k| rho[(k * d_b + i, k * d_b + j)]).sum())
}

fn random_blocks(rng: &mut ChaCha8Rng) -> Vec<Block> {
    use rand::Rng;
    let r = rng.random_range(1..=2);
    let mut blocks: Vec<Block> = (0..r)
        .map(|_| Block {
            n: rng.random_range(1..=2),
            m: rng.random_range(1..=2),
        })
        .collect();
    if blocks.len() == 1 && blocks[0].m == 1 {
        blocks[0].m = 2;
    }
    blocks
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conditional_operators_sum_to_rho_b(seed in 0u64..10_000, d_a in 2usize..4, d_b in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_density::<f64, _>(d_a * d_b, 1 + (seed as usize) % (d_a * d_b), &mut rng);
        let state = validate_state(rho.clone(), d_a, d_b, &tol()).unwrap();
        let lambda = LambdaMap::new(state, &tol()).unwrap();
        let u = haar_unitary::<f64, _>(d_a, &mut rng);
        let pvm = zuslab::validate_pvm(
            (0..d_a).map(|i| { let c = u.column(i).into_owned(); &c * c.adjoint() }).collect(),
            None,
            &tol(),
        ).unwrap();
        let z = conditional_operators(&lambda, &pvm).unwrap();
        let sum = z.operators.iter().fold(M::zeros(d_b, d_b), |acc, m| acc + m);
        prop_assert!(max_abs(&(sum - trace_a(&rho, d_a, d_b))) < 1e-12);
    }

    #[test]
    fn zus_verdict_is_invariant_under_local_unitaries(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 2;
        let fam = zuslab::objects::catalog::s1::<f64>();
        let rho = if seed % 2 == 0 {
            zuslab::objects::catalog::bell::<f64>().rho().clone()
        } else {
            zuslab::objects::catalog::mix::<f64>().rho().clone()
        };
        let ua = haar_unitary::<f64, _>(d, &mut rng);
        let vb = haar_unitary::<f64, _>(d, &mut rng);
        let g = kron(&ua, &vb);
        let moved = validate_state(&g * &rho * g.adjoint(), d, d, &tol()).unwrap();
        let base = LambdaMap::new(validate_state(rho, d, d, &tol()).unwrap(), &tol()).unwrap();
        let lambda = LambdaMap::new(moved, &tol()).unwrap();
        for p in fam.pvms() {
            let before = is_zus(&base, p, &tol()).unwrap().pass;
            let after = is_zus(&lambda, &p.conjugate(&ua), &tol()).unwrap().pass;
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn generated_algebra_dimension_is_conjugation_invariant(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = random_blocks(&mut rng);
        let s = WedderburnStructure::<f64>::standard(blocks.clone(), &tol()).unwrap();
        let alg = structure_algebra(&s, &tol()).unwrap();
        let d = s.ambient_dim();
        let u = haar_unitary::<f64, _>(d, &mut rng);
        let gens: Vec<M> = (0..3).map(|_| alg.random_hermitian_element(&mut rng)).collect();
        let moved: Vec<M> = gens.iter().map(|g| &u * g * u.adjoint()).collect();
        let a = generate_algebra(&gens, d, &tol()).unwrap();
        let b = generate_algebra(&moved, d, &tol()).unwrap();
        prop_assert_eq!(a.dim(), b.dim());
        prop_assert!(a.dim() <= alg.dim());
        prop_assert!(b.product_closure_defect() < 1e-8);
    }

    #[test]
    fn wedderburn_dimension_counts(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = random_blocks(&mut rng);
        let d: usize = blocks.iter().map(|b| b.n * b.m).sum();
        let s = WedderburnStructure::<f64>::from_parts(haar_unitary(d, &mut rng), blocks.clone(), &tol()).unwrap();
        let alg = structure_algebra(&s, &tol()).unwrap();
        let found = wedderburn_decompose(&alg, &tol(), seed).unwrap();
        let mut want: Vec<(usize, usize)> = blocks.iter().map(|b| (b.n, b.m)).collect();
        let mut got: Vec<(usize, usize)> = found.blocks().iter().map(|b| (b.n, b.m)).collect();
        want.sort();
        got.sort();
        prop_assert_eq!(got, want);
        prop_assert_eq!(found.blocks().iter().map(|b| b.n * b.n).sum::<usize>(), alg.dim());
        let w = found.transform();
        prop_assert!(max_abs(&(w * w.adjoint() - eye(d))) < 1e-9);
    }

    #[test]
    fn proper_subalgebra_states_are_azus_with_block_normal_form(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = random_blocks(&mut rng);
        let d: usize = blocks.iter().map(|b| b.n * b.m).sum();
        let s = WedderburnStructure::<f64>::from_parts(haar_unitary(d, &mut rng), blocks.clone(), &tol()).unwrap();
        let a0 = (seed as usize) % blocks.len();
        let m = blocks[a0].m;
        let recipe = ProperSubalgebraRecipe {
            structure: s.clone(),
            chosen_block: a0,
            u_vector: random_unit_vector(m, &mut rng),
            v_vector: random_unit_vector(m, &mut rng),
        };
        let state = proper_subalgebra_zus(&recipe, &tol()).unwrap();
        // oracle: pure state, so Tr ρ² = 1 and ρ_B has rank n_{a₀}
        let rho = state.rho();
        prop_assert!(((rho * rho).trace().re - 1.0).abs() < 1e-10);
        let lambda = LambdaMap::new(state.clone(), &tol()).unwrap();
        prop_assert_eq!(lambda.support_dim(), blocks[a0].n);
        let alg = structure_algebra(&s, &tol()).unwrap();
        prop_assert!(a_zus_check(&lambda, &alg, &tol()).unwrap().is_azus);
        for p in sample_pvms_in_algebra(&s, 5, seed, &tol()).unwrap() {
            prop_assert!(is_zus(&lambda, &p, &tol()).unwrap().pass);
        }
        let nf = compute_normal_form(&lambda, &alg, &tol(), seed).unwrap();
        prop_assert_eq!(nf.blocks.len(), 1);
        prop_assert_eq!((nf.blocks[0].n, nf.blocks[0].k), (blocks[a0].n, 1));
        prop_assert!(nf.lambda_defect < 1e-8 && nf.rho_b_defect < 1e-8);
        let total: f64 = nf.blocks.iter().map(|b| b.n as f64 * b.tau.trace().re).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
    }
}
