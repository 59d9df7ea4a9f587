use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::MAX_DIM;

/// Unit directions in the trace-zero hyperplane of ℝ^d, closed under
/// negation. Regenerated bit-for-bit from `(d, m, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    dim: usize,
    requested: usize,
    seed: u64,
    dirs: Vec<Vec<f64>>,
}

/// Default resolution `64·(d−1)`.
pub fn default_resolution(d: usize) -> usize {
    64 * (d.max(2) - 1)
}

/// Minimum resolution `2·(d−1)`.
pub fn min_resolution(d: usize) -> usize {
    2 * (d.max(2) - 1)
}

/// Orthonormal basis of `{x : Σxᵢ = 0}` (Helmert vectors).
pub fn hyperplane_basis(d: usize) -> Vec<Vec<f64>> {
    (1..d)
        .map(|j| {
            let norm = ((j * (j + 1)) as f64).sqrt();
            (0..d)
                .map(|i| match i.cmp(&j) {
                    std::cmp::Ordering::Less => 1.0 / norm,
                    std::cmp::Ordering::Equal => -(j as f64) / norm,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Unit vector along the projection of `e₁ + … + e_k` to the hyperplane.
/// Support values in this direction give `sup (z₁ + … + z_k)` up to the
/// factor returned alongside.
pub fn weight_direction(d: usize, k: usize) -> (Vec<f64>, f64) {
    let kf = k as f64 / d as f64;
    let v: Vec<f64> = (0..d).map(|i| if i < k { 1.0 - kf } else { -kf }).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (v.iter().map(|x| x / norm).collect(), norm)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform offset in [0, 1) derived from `(seed, salt)`.
fn unit_offset(seed: u64, salt: u64) -> f64 {
    (splitmix64(seed ^ splitmix64(salt)) >> 11) as f64 / (1u64 << 53) as f64
}

/// `count` low-discrepancy points on the unit sphere of ℝ^q.
fn sphere_points(q: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    match q {
        1 => vec![vec![1.0]; count],
        2 => {
            // half circle is enough: antipodes are added by the caller
            let off = unit_offset(seed, 0);
            (0..count)
                .map(|j| {
                    let t = PI * (j as f64 + off) / count as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect()
        }
        3 => {
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            let off = unit_offset(seed, 0);
            (0..count)
                .map(|j| {
                    let z = 1.0 - (2.0 * j as f64 + 1.0) / count as f64;
                    let rad = (1.0 - z * z).max(0.0).sqrt();
                    let phi = 2.0 * PI * (j as f64 / golden + off);
                    vec![rad * phi.cos(), rad * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            // Kronecker sequence on the torus, mapped to Gaussians by Box–Muller
            // and normalized.
            let pairs = q.div_ceil(2);
            let alphas: Vec<f64> = (0..2 * pairs)
                .map(|i| {
                    let p = [2u32, 3, 5, 7, 11, 13][i % 6] as f64;
                    p.sqrt().fract()
                })
                .collect();
            let offs: Vec<f64> = (0..2 * pairs).map(|i| unit_offset(seed, i as u64)).collect();
            (0..count)
                .map(|j| {
                    let mut v = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let u1 = ((j as f64 + 0.5) * alphas[2 * p] + offs[2 * p]).fract();
                        let u2 = ((j as f64 + 0.5) * alphas[2 * p + 1] + offs[2 * p + 1]).fract();
                        let rad = (-2.0 * (1.0 - u1).max(1e-300).ln()).sqrt();
                        v.push(rad * (2.0 * PI * u2).cos());
                        v.push(rad * (2.0 * PI * u2).sin());
                    }
                    v.truncate(q);
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
                    v.iter().map(|x| x / n).collect()
                })
                .collect()
        }
    }
}

/// Deterministic direction set.
///
/// The first `2(d−1)` directions are `±` the normalized fundamental weights
/// projected to the hyperplane, so support values along them are exact.
/// The remaining directions come in antipodal pairs from a low-discrepancy
/// sphere sample in the hyperplane, offset by `seed`. In rank one (`d = 2`)
/// the hyperplane is a line and the set is always the two directions
/// `±(1,−1)/√2`.
pub fn make_directions(d: usize, m: usize, seed: u64) -> Result<DirectionSet> {
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::BadResolution(format!(
            "dimension {d} outside 2..={MAX_DIM}"
        )));
    }
    if m < min_resolution(d) {
        return Err(Error::BadResolution(format!(
            "m = {m} below the minimum {} for d = {d}",
            min_resolution(d)
        )));
    }
    if d > 2 && m % 2 == 1 {
        return Err(Error::BadResolution(format!(
            "m = {m} must be even for a negation-closed set"
        )));
    }
    let mut dirs = Vec::with_capacity(m);
    for k in 1..d {
        let (w, _) = weight_direction(d, k);
        dirs.push(w.clone());
        dirs.push(w.iter().map(|x| -x).collect());
    }
    if d > 2 {
        let basis = hyperplane_basis(d);
        let extra = (m - dirs.len()) / 2;
        for s in sphere_points(d - 1, extra, seed) {
            let mut u = vec![0.0; d];
            for (c, b) in s.iter().zip(&basis) {
                for i in 0..d {
                    u[i] += c * b[i];
                }
            }
            // re-center and renormalize to clean up rounding
            let mean = u.iter().sum::<f64>() / d as f64;
            u.iter_mut().for_each(|x| *x -= mean);
            let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
            u.iter_mut().for_each(|x| *x /= n);
            dirs.push(u.iter().map(|x| -x).collect());
            dirs.push(u);
        }
    }
    Ok(DirectionSet {
        dim: d,
        requested: m,
        seed,
        dirs,
    })
}

impl DirectionSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of directions actually held (`|dirs|`).
    pub fn resolution(&self) -> usize {
        self.dirs.len()
    }

    /// The `m` that was asked for; equals [`resolution`](Self::resolution)
    /// except in rank one.
    pub fn requested(&self) -> usize {
        self.requested
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dirs(&self) -> &[Vec<f64>] {
        &self.dirs
    }

    /// Index of a stored direction parallel to `u` (unit or not), if any.
    pub fn find(&self, u: &[f64]) -> Option<usize> {
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n == 0.0 {
            return None;
        }
        self.dirs.iter().position(|v| {
            let c: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / n;
            c > 1.0 - 1e-12
        })
    }

    /// Largest angle (radians) from any unit vector of the hyperplane to
    /// its nearest direction, estimated on a dense probe sample. Bounds the
    /// outer-approximation error of support-function bodies: for a body
    /// of radius `R` the error is at most `R·(1/cos θ − 1)`.
    pub fn covering_angle(&self) -> f64 {
        if self.dim == 2 {
            return 0.0;
        }
        let basis = hyperplane_basis(self.dim);
        let probes = sphere_points(self.dim - 1, 4096, self.seed ^ 0xA5A5);
        let mut worst: f64 = 0.0;
        for s in probes {
            let mut u = vec![0.0; self.dim];
            for (c, b) in s.iter().zip(&basis) {
                for i in 0..self.dim {
                    u[i] += c * b[i];
                }
            }
            let best = self
                .dirs
                .iter()
                .map(|v| v.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>())
                .fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(best.clamp(-1.0, 1.0).acos());
        }
        worst
    }
}
