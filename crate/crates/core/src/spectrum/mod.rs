//! Product sets `Sⁿ` and the joint-spectrum approximants built from them.

mod enumerate;
mod estimate;
mod matrix_set;

pub use enumerate::{
    enumerate_products, plan, sampled_word, EnumerationMode, Product, ProductStream, DEFAULT_BUDGET,
};
pub use estimate::{
    cone_invariance_check, joint_spectrum_estimate, spectrum_level, LevelSummary, SpectrumEstimate,
};
pub use matrix_set::{load_matrix_set, normalize_rows, MatrixSet, MatrixSetJson};
