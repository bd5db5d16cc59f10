pub mod checks;
pub mod error;
pub mod field;
pub mod field_integration;
pub mod integration;
pub mod matrix;
pub mod measure;
pub mod params;
pub mod sample;
pub mod serial;
pub mod sets;
pub mod value;

pub use error::{Error, Result};
pub use field::{FieldElem, Level, Window};
pub use params::GlobalParams;
pub use value::{Rational, ValueElem};
pub use matrix::{coset_compare, in_k, in_kij, Coset, ElementaryFactor, Index, Mat2, Relation};
pub use sets::{common_refinement, full_k, full_k_at, is_refinement, DDDSet, DDSet, DDSetOf, Shell};
pub use measure::MeasureContext;
pub use integration::{convolve_k, family_integral, integrate, integrate_over, translate_fn, CircleFamily, Side, SimpleFn};
pub use field_integration::{f_integrate, f_mu, factor_rhs, iterated_product_integral, lift_integral, lift_to_f, ECoset, EStepFn, FDDSet, FIdealCoset, FSimpleFn, FactorTrace};
pub use serial::Workspace;
