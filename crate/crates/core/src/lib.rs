//! Numerical laboratory for the joint spectrum of a finite set of matrices
//! in SL(d,ℝ).
//!
//! The crate builds the normalized Cartan and Jordan projection clouds of
//! the product sets `Sⁿ`, brackets the joint spectral radius of `S` and of
//! its exterior powers, and runs seeded Monte Carlo experiments on random
//! matrix products (Lyapunov vectors, empirical rate functions,
//! log-moment-generating functions and their Legendre transforms).

pub mod error;
pub mod geometry;
pub mod jsr;
pub mod linalg;
pub mod real;
pub mod spectrum;
pub mod walk;

pub use error::{Error, Result};
