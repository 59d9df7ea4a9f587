use serde::{Deserialize, Serialize};

use super::config::WalkConfig;
use super::engine::{sample_final, Projection};
use crate::real::fmt_real;
use crate::error::{Error, Result};
use crate::geometry::hyperplane_basis;
use crate::linalg::ChamberVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MgfEstimate {
    pub thetas: Vec<Vec<f64>>,
    pub lambda_hat: Vec<f64>,
    pub n: usize,
    pub samples: usize,
}

/// Regular grid of dual vectors in the trace-zero hyperplane: coordinates
/// `−radius..=radius` in `per_axis` steps along each Helmert axis.
pub fn theta_grid(d: usize, radius: f64, per_axis: usize) -> Result<Vec<Vec<f64>>> {
    if d < 2 || per_axis < 2 || !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidConfig(
            "theta grid needs d >= 2, at least 2 points per axis and a positive radius".into(),
        ));
    }
    let basis = hyperplane_basis(d);
    let axes = d - 1;
    let total = per_axis.pow(axes as u32);
    let step = 2.0 * radius / (per_axis - 1) as f64;
    Ok((0..total)
        .map(|mut idx| {
            let mut theta = vec![0.0; d];
            for b in basis.iter().rev() {
                let t = -radius + (idx % per_axis) as f64 * step;
                idx /= per_axis;
                for (x, e) in theta.iter_mut().zip(b) {
                    *x += t * e;
                }
            }
            theta
        })
        .collect())
}

/// `lambda_hat(θ) = (1/n)·ln((1/N)·Σ exp(⟨θ, κ(Yₙ)⟩))` by max-shifted
/// log-sum-exp over the same walkers for every θ.
pub fn log_mgf_estimate(cfg: &WalkConfig, thetas: &[Vec<f64>]) -> Result<MgfEstimate> {
    let d = cfg.set.dim();
    for t in thetas {
        if t.len() != d {
            return Err(Error::DimMismatch {
                expected: d,
                found: t.len(),
            });
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("theta entries must be finite".into()));
        }
    }
    let finals = sample_final(cfg, Projection::Kappa)?;
    Ok(mgf_from_points(&finals, thetas, cfg.n))
}

pub(crate) fn mgf_from_points(points: &[ChamberVector], thetas: &[Vec<f64>], n: usize) -> MgfEstimate {
    let nf = n as f64;
    let log_count = (points.len() as f64).ln();
    let lambda_hat = thetas
        .iter()
        .map(|theta| {
            if theta.iter().all(|x| *x == 0.0) {
                return 0.0;
            }
            let vals: Vec<f64> = points.iter().map(|p| nf * p.dot(theta)).collect();
            let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let s: f64 = vals.iter().map(|v| (v - m).exp()).sum();
            (m + s.ln() - log_count) / nf
        })
        .collect();
    MgfEstimate {
        thetas: thetas.to_vec(),
        lambda_hat,
        n,
        samples: points.len(),
    }
}

impl MgfEstimate {
    /// Rows of `theta_1,…,theta_d,lambda_hat`.
    pub fn to_csv(&self) -> String {
        let d = self.thetas.first().map_or(0, Vec::len);
        let mut out = String::new();
        for i in 0..d {
            out.push_str(&format!("theta{},", i + 1));
        }
        out.push_str("lambda_hat\n");
        for (t, l) in self.thetas.iter().zip(&self.lambda_hat) {
            for v in t {
                out.push_str(&format!("{},", fmt_real(*v)));
            }
            out.push_str(&format!("{}\n", fmt_real(*l)));
        }
        out
    }
}

/// `max_θ (⟨θ, x⟩ − lambda_hat(θ))` over the estimate's grid. A finite
/// grid only bounds the true conjugate from below.
pub fn legendre_transform(m: &MgfEstimate, xs: &[ChamberVector]) -> Vec<f64> {
    xs.iter()
        .map(|x| {
            m.thetas
                .iter()
                .zip(&m.lambda_hat)
                .map(|(t, l)| x.dot(t) - l)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}
