//! Linear algebra on SL(d,ℝ): normalization, Cartan and Jordan projections,
//! exterior powers and proximality.

mod exterior;
mod matrix;
mod projection;
mod proximal;

pub use exterior::{binomial, compound_matrix, exterior_power, k_subsets};

pub use matrix::{normalize_det, UnimodularMatrix, MAX_DIM};
pub use projection::{
    cartan_projection, cartan_projection_dense, jordan_projection, jordan_projection_dense,
    ChamberVector,
};
pub(crate) use projection::{eigen_moduli, singular_values, spectral_norm, spectral_radius};
pub use proximal::{matrix_proximality, proximality_report, ProximalityReport, RepProximality, EIGEN_GAP_TOL};
