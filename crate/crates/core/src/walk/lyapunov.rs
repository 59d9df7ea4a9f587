use serde::{Deserialize, Serialize};

use super::config::WalkConfig;
use super::engine::{sample_final, Projection};
use crate::error::Result;
use crate::linalg::ChamberVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub vec: ChamberVector,
    /// Per-coordinate standard error of the mean.
    pub stderr: Vec<f64>,
    pub n: usize,
    pub samples: usize,
}

/// Sample mean of `κ(Yₙ)/n`, re-centered onto the trace-zero hyperplane.
pub fn lyapunov_estimate(cfg: &WalkConfig) -> Result<LyapunovEstimate> {
    let finals = sample_final(cfg, Projection::Kappa)?;
    let (vec, stderr) = mean_and_stderr(&finals);
    Ok(LyapunovEstimate {
        vec: vec.centered(),
        stderr,
        n: cfg.n,
        samples: cfg.samples,
    })
}

pub(crate) fn mean_and_stderr(xs: &[ChamberVector]) -> (ChamberVector, Vec<f64>) {
    // shifted by the first sample, so identical samples give exactly zero spread
    let d = xs[0].dim();
    let pivot = xs[0].coords();
    let count = xs.len() as f64;
    let mut shift = vec![0.0; d];
    for x in xs {
        for ((m, v), p) in shift.iter_mut().zip(x.coords()).zip(pivot) {
            *m += v - p;
        }
    }
    shift.iter_mut().for_each(|m| *m /= count);
    let stderr = if xs.len() < 2 {
        vec![0.0; d]
    } else {
        let mut var = vec![0.0; d];
        for x in xs {
            for (((s, v), m), p) in var.iter_mut().zip(x.coords()).zip(&shift).zip(pivot) {
                *s += (v - p - m) * (v - p - m);
            }
        }
        var.iter()
            .map(|s| (s / (count - 1.0) / count).sqrt())
            .collect()
    };
    let mean = pivot.iter().zip(&shift).map(|(p, m)| p + m).collect();
    (ChamberVector::new(mean), stderr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::MatrixSet;

    #[test]
    fn deterministic_walk_has_zero_error() {
        let s = MatrixSet::from_rows(&[vec![vec![2.0, 0.0], vec![0.0, 0.5]]]).unwrap();
        let est = lyapunov_estimate(&WalkConfig::new(s, 30, 20, 1)).unwrap();
        assert!((est.vec.coords()[0] - 2f64.ln()).abs() < 1e-12);
        assert_eq!(est.stderr, vec![0.0, 0.0]);
    }

    #[test]
    fn duplicated_generator_is_a_point_mass() {
        let g = vec![vec![3.0, 1.0], vec![1.0, 1.0]];
        let single = MatrixSet::from_rows(&[g.clone()]).unwrap();
        let double = MatrixSet::from_rows(&[g.clone(), g])
            .unwrap()
            .with_weights(vec![0.5, 0.5])
            .unwrap();
        let a = lyapunov_estimate(&WalkConfig::new(single, 40, 4, 0)).unwrap();
        let b = lyapunov_estimate(&WalkConfig::new(double, 40, 4, 9)).unwrap();
        assert!((a.vec.coords()[0] - b.vec.coords()[0]).abs() < 1e-12);
        assert!(b.stderr[0] < 1e-12);
    }
}
