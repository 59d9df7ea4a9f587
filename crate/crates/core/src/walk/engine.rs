use nalgebra::DMatrix;
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;

use super::config::{walker_rng, WalkConfig};
use crate::error::{Error, Result};
use crate::linalg::{compound_matrix, eigen_moduli, singular_values, ChamberVector, MAX_DIM, k_subsets};
use crate::spectrum::MatrixSet;

const CAP: usize = MAX_DIM * MAX_DIM;

/// Which projection of `Y_m` a walk reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    Kappa,
    Lambda,
}

impl std::str::FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kappa" | "cartan" => Ok(Projection::Kappa),
            "lambda" | "jordan" => Ok(Projection::Lambda),
            other => Err(Error::InvalidConfig(format!("unknown projection {other:?}"))),
        }
    }
}

/// Step matrices flattened for the inner loop.
pub(crate) struct WalkKernel {
    d: usize,
    gens: Vec<[f64; CAP]>,
    signs: Vec<f64>,
    law: WeightedIndex<f64>,
}

/// Running product `Y = Q·D·U`: `Q` orthogonal, `D = diag(exp(logd))`,
/// `U` upper triangular with unit diagonal. `D` carries all the growth, so
/// nothing overflows however long the walk is.
#[derive(Clone)]
pub(crate) struct WalkState {
    d: usize,
    q: [f64; CAP],
    u: [f64; CAP],
    logd: [f64; MAX_DIM],
    sign: f64,
    steps: usize,
}

impl WalkKernel {
    pub(crate) fn new(set: &MatrixSet) -> Result<Self> {
        let d = set.dim();
        let gens = set
            .gens()
            .iter()
            .map(|g| {
                let e = g.unit_det_entries();
                let mut a = [0.0; CAP];
                for i in 0..d {
                    for j in 0..d {
                        a[i * d + j] = e[(i, j)];
                    }
                }
                a
            })
            .collect();
        let law = WeightedIndex::new(set.weights_or_uniform())
            .map_err(|e| Error::InvalidConfig(format!("step law: {e}")))?;
        Ok(WalkKernel {
            d,
            gens,
            signs: set.gens().iter().map(|g| g.det_sign()).collect(),
            law,
        })
    }

    pub(crate) fn dim(&self) -> usize {
        self.d
    }

    pub(crate) fn draw<R: rand::Rng>(&self, rng: &mut R) -> usize {
        self.law.sample(rng)
    }

    /// `Y ← X_g · Y`.
    pub(crate) fn step(&self, st: &mut WalkState, g: usize) {
        let d = self.d;
        let x = &self.gens[g];
        // W = X·Q
        let mut w = [0.0; CAP];
        for i in 0..d {
            for j in 0..d {
                let mut s = 0.0;
                for l in 0..d {
                    s += x[i * d + l] * st.q[l * d + j];
                }
                w[i * d + j] = s;
            }
        }
        // W = Q'·R by modified Gram–Schmidt with one reorthogonalization pass
        let mut r = [0.0; CAP];
        let mut q = [0.0; CAP];
        for j in 0..d {
            let mut v = [0.0; MAX_DIM];
            for i in 0..d {
                v[i] = w[i * d + j];
            }
            for _ in 0..2 {
                for i in 0..j {
                    let mut c = 0.0;
                    for l in 0..d {
                        c += q[l * d + i] * v[l];
                    }
                    r[i * d + j] += c;
                    for l in 0..d {
                        v[l] -= c * q[l * d + i];
                    }
                }
            }
            let norm = v[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
            r[j * d + j] = norm;
            for l in 0..d {
                q[l * d + j] = v[l] / norm;
            }
        }
        // Y' = Q'·R·D·U = Q'·D·(D⁻¹RD)·U
        let mut v = [0.0; CAP];
        for i in 0..d {
            for j in i..d {
                let mut s = 0.0;
                for l in i..=j {
                    let rt = if l == i {
                        r[i * d + i]
                    } else {
                        r[i * d + l] * (st.logd[l] - st.logd[i]).exp()
                    };
                    s += rt * st.u[l * d + j];
                }
                v[i * d + j] = s;
            }
        }
        for i in 0..d {
            let rii = r[i * d + i];
            st.logd[i] += rii.ln();
            for j in i..d {
                st.u[i * d + j] = v[i * d + j] / rii;
            }
        }
        st.q = q;
        st.sign *= self.signs[g];
        st.steps += 1;
    }
}

impl WalkState {
    pub(crate) fn new(d: usize) -> Self {
        let mut q = [0.0; CAP];
        let mut u = [0.0; CAP];
        for i in 0..d {
            q[i * d + i] = 1.0;
            u[i * d + i] = 1.0;
        }
        WalkState {
            d,
            q,
            u,
            logd: [0.0; MAX_DIM],
            sign: 1.0,
            steps: 0,
        }
    }

    fn check_finite(&self) -> Result<()> {
        let d = self.d;
        let ok = self.logd[..d].iter().all(|x| x.is_finite())
            && self.u[..d * d].iter().all(|x| x.is_finite())
            && self.q[..d * d].iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NumericalFailure(format!(
                "walk state lost finiteness at step {}",
                self.steps
            )))
        }
    }

    fn max_logd(&self) -> f64 {
        self.logd[..self.d].iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact `κ(Y)`: partial sums are `log σ₁(∧ᵏ(D·U))`, evaluated with
    /// the row grading factored out.
    pub(crate) fn cartan(&self) -> Result<ChamberVector> {
        self.check_finite()?;
        let d = self.d;
        if d == 2 {
            let m = self.max_logd();
            let a = (self.logd[0] - m).exp();
            let b = a * self.u[1];
            let e = (self.logd[1] - m).exp();
            let fro2 = a * a + b * b + e * e;
            let det = a * e;
            let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
            let s1 = m + 0.5 * ((fro2 + disc.sqrt()) / 2.0).ln();
            return Ok(ChamberVector::new(vec![s1, -s1]));
        }
        let u = DMatrix::from_fn(d, d, |i, j| self.u[i * d + j]);
        let mut partial = Vec::with_capacity(d);
        for k in 1..d {
            let subsets = k_subsets(d, k);
            let logs: Vec<f64> = subsets
                .iter()
                .map(|s| s.iter().map(|&i| self.logd[i]).sum())
                .collect();
            let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut c = compound_matrix(&u, k)?;
            for (row, l) in logs.iter().enumerate() {
                let f = (l - m).exp();
                c.row_mut(row).iter_mut().for_each(|x| *x *= f);
            }
            partial.push(m + singular_values(&c)?[0].ln());
        }
        Ok(chamber_from_partial_sums(&partial))
    }

    /// Exact `λ(Y)` from the similar matrix `D·U·Q`, rows graded down by
    /// the largest entry of `D`.
    pub(crate) fn jordan(&self) -> Result<ChamberVector> {
        self.check_finite()?;
        let d = self.d;
        let m = self.max_logd();
        let mut a = DMatrix::zeros(d, d);
        for i in 0..d {
            let f = (self.logd[i] - m).exp();
            for j in 0..d {
                let mut s = 0.0;
                for l in i..d {
                    s += self.u[i * d + l] * self.q[l * d + j];
                }
                a[(i, j)] = f * s;
            }
        }
        if d == 2 {
            let tr = a[(0, 0)] + a[(1, 1)];
            let det = self.sign * (self.logd[0] + self.logd[1] - 2.0 * m).exp();
            let disc = tr * tr - 4.0 * det;
            let top = if disc >= 0.0 {
                (tr.abs() + disc.sqrt()) / 2.0
            } else {
                det.abs().sqrt()
            };
            let l1 = m + top.ln();
            return Ok(ChamberVector::new(vec![l1, -l1]));
        }
        let moduli = eigen_moduli(&a)?;
        let mut coords: Vec<f64> = moduli[..d - 1].iter().map(|x| m + x.ln()).collect();
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "eigenvalue underflow at step {}",
                self.steps
            )));
        }
        let head: f64 = coords.iter().sum();
        coords.push(-head);
        Ok(ChamberVector::new(coords))
    }
}

fn chamber_from_partial_sums(partial: &[f64]) -> ChamberVector {
    let mut coords = Vec::with_capacity(partial.len() + 1);
    let mut prev = 0.0;
    for &s in partial {
        coords.push(s - prev);
        prev = s;
    }
    coords.push(-prev);
    ChamberVector::new(coords)
}

/// Runs one walker and hands `(checkpoint index, projection / m)` to `sink`.
pub(crate) fn drive_walker(
    kernel: &WalkKernel,
    cfg: &WalkConfig,
    checkpoints: &[usize],
    walker_id: u64,
    projection: Projection,
    mut sink: impl FnMut(usize, ChamberVector) -> Result<()>,
) -> Result<()> {
    let mut rng = walker_rng(cfg.seed, walker_id);
    let mut st = WalkState::new(kernel.dim());
    let mut next = 0;
    for step in 1..=cfg.n {
        let g = kernel.draw(&mut rng);
        kernel.step(&mut st, g);
        if next < checkpoints.len() && checkpoints[next] == step {
            let p = match projection {
                Projection::Kappa => st.cartan()?,
                Projection::Lambda => st.jordan()?,
            };
            sink(next, p.scaled(1.0 / step as f64))?;
            next += 1;
            if next == checkpoints.len() {
                break;
            }
        }
    }
    Ok(())
}

/// `κ(Y_m)/m` at each checkpoint for walker `walker_id`.
///
/// Increments are drawn from the step law on the walker's own stream, so
/// the result depends only on `(cfg.seed, walker_id)`.
pub fn run_walk(cfg: &WalkConfig, walker_id: u64) -> Result<Vec<ChamberVector>> {
    cfg.validate()?;
    let kernel = WalkKernel::new(&cfg.set)?;
    let cps = cfg.resolved_checkpoints();
    let mut out = Vec::with_capacity(cps.len());
    drive_walker(&kernel, cfg, &cps, walker_id, Projection::Kappa, |_, p| {
        out.push(p);
        Ok(())
    })?;
    Ok(out)
}

/// The generator indices walker `walker_id` draws, in order. Lets tests
/// rebuild `Yₙ` independently.
pub fn walker_increments(cfg: &WalkConfig, walker_id: u64) -> Result<Vec<usize>> {
    let kernel = WalkKernel::new(&cfg.set)?;
    let mut rng = walker_rng(cfg.seed, walker_id);
    Ok((0..cfg.n).map(|_| kernel.draw(&mut rng)).collect())
}

const WALKER_CHUNK: usize = 256;

/// Projection of `Y_m / m` at every checkpoint for every walker:
/// `result[walker][checkpoint]`.
pub fn sample_projections(cfg: &WalkConfig, projection: Projection) -> Result<Vec<Vec<ChamberVector>>> {
    cfg.validate()?;
    let kernel = WalkKernel::new(&cfg.set)?;
    let cps = cfg.resolved_checkpoints();
    let chunks = cfg.samples.div_ceil(WALKER_CHUNK);
    let parts: Vec<Vec<Vec<ChamberVector>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * WALKER_CHUNK;
            let hi = ((c + 1) * WALKER_CHUNK).min(cfg.samples);
            (lo..hi)
                .map(|w| {
                    let mut row = Vec::with_capacity(cps.len());
                    drive_walker(&kernel, cfg, &cps, w as u64, projection, |_, p| {
                        row.push(p);
                        Ok(())
                    })?;
                    Ok(row)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(parts.into_iter().flatten().collect())
}

/// Final-step projection `Yₙ / n` for every walker.
pub fn sample_final(cfg: &WalkConfig, projection: Projection) -> Result<Vec<ChamberVector>> {
    let single = WalkConfig {
        checkpoints: vec![cfg.n],
        ..cfg.clone()
    };
    Ok(sample_projections(&single, projection)?
        .into_iter()
        .map(|mut row| row.pop().expect("one checkpoint per walker"))
        .collect())
}
