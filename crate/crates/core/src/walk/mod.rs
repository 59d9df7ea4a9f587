//! Seeded Monte Carlo over μ-random walks `Yₙ = Xₙ ⋯ X₁`.

mod additivity;
mod ams;
mod config;
mod decay;
mod engine;
mod lyapunov;
mod mgf;
mod rate;

pub use additivity::{additivity_defect_stats, defect_of_pair, DefectStats, Histogram, HISTOGRAM_BIN, HISTOGRAM_BINS};
pub use ams::{ams_loxodromy_search, proximal_words, AmsReport, MAX_WORST_WORDS};
pub use config::{walker_rng, WalkConfig};
pub use decay::{decay_points, fit_decay, ldp_decay_fit, DecayFit, DecayPoint};
pub use engine::{run_walk, sample_final, sample_projections, walker_increments, Projection};
pub use lyapunov::{lyapunov_estimate, LyapunovEstimate};
pub use mgf::{legendre_transform, log_mgf_estimate, theta_grid, MgfEstimate};
pub use rate::{DEFAULT_RATE_CELLS, rate_function_estimate, GridSpec, RateGrid};
