//! Zero-uncertainty states of bipartite quantum systems: decision procedures,
//! rigidity checks, explicit constructions and the Artin–Wedderburn normal form.
//!
//! Every routine is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the double-precision instantiation used by the command-line tool.
//!
//! ```
//! use zuslab::objects::catalog::{bell, s1};
//! use zuslab::{is_common_zus, verify_rigidity, LambdaMap, Tolerances64};
//!
//! let tol = Tolerances64::default();
//! let lambda = LambdaMap::new(bell(), &tol).unwrap();
//! assert!(is_common_zus(&lambda, &s1(), &tol).unwrap().pass);
//! let report = verify_rigidity(&bell(), &s1(), &tol).unwrap();
//! assert!(report.conclusions.is_max_entangled);
//! ```

// `!(x > y)` is deliberate: a NaN must fail the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod constructions;
pub mod cp_maps;
pub mod error;
pub mod json;
pub mod linalg;
pub mod normal_form;
pub mod objects;
pub mod random;
pub mod rigidity;
pub mod scalar;
pub mod steering;

pub use algebra::{
    center, commutant, generate_algebra, md_algebra, wedderburn_decompose, Block, MatrixAlgebra,
    WedderburnStructure, DEFAULT_SEED,
};
pub use cp_maps::{conditional_operators, is_common_zus, is_zus, LambdaMap, ZusVerdict};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector, ToleranceConfig};
pub use normal_form::{a_zus_check, compute_normal_form, full_algebra_form, NormalForm};
pub use objects::{validate_pvm, validate_state, BipartiteState, Pvm, PvmFamily};
pub use rigidity::{verify_rigidity, RigidityReport};
pub use scalar::Real;
pub use steering::{assemblage, bob_decoder, perfect_steering_check, Assemblage};

pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type BipartiteState64 = BipartiteState<f64>;
pub type BipartiteState32 = BipartiteState<f32>;
pub type Pvm64 = Pvm<f64>;
pub type PvmFamily64 = PvmFamily<f64>;
pub type LambdaMap64 = LambdaMap<f64>;
pub type MatrixAlgebra64 = MatrixAlgebra<f64>;
pub type WedderburnStructure64 = WedderburnStructure<f64>;
pub type NormalForm64 = NormalForm<f64>;
pub type Tolerances64 = ToleranceConfig<f64>;
pub type Tolerances32 = ToleranceConfig<f32>;
