use serde::{Deserialize, Serialize};

use super::config::WalkConfig;
use super::engine::{sample_projections, Projection};
use crate::real::fmt_real;
use crate::error::{Error, Result};
use crate::linalg::ChamberVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: usize,
    pub count: u64,
    pub phat: f64,
    /// `ln phat`; `None` when nothing exceeded the threshold.
    pub log_phat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; infinite with only two fitted points.
    #[serde(with = "crate::real::inf_scalar")]
    pub slope_stderr: f64,
    pub points: Vec<DecayPoint>,
    /// Some point had zero exceedances and was left out of the fit.
    pub dropped_zero: bool,
    pub eps: f64,
    pub samples: usize,
}

impl DecayFit {
    /// Rows of `n,count,log_phat,fitted`; empty points carry `-inf`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count,log_phat,fitted\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                p.n,
                p.count,
                fmt_real(p.log_phat.unwrap_or(f64::NEG_INFINITY)),
                p.log_phat.is_some()
            ));
        }
        out
    }
}

/// Empirical `P̂(‖κ(Yₙ)/n − lyap‖ > eps)` for each length in `n_list`,
/// all taken from one batch of walkers.
pub fn decay_points(
    cfg: &WalkConfig,
    lyap: &ChamberVector,
    eps: f64,
    n_list: &[usize],
) -> Result<Vec<DecayPoint>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig("eps must be positive".into()));
    }
    if n_list.len() < 3 || n_list.windows(2).any(|w| w[0] >= w[1]) || n_list[0] == 0 {
        return Err(Error::InvalidConfig(
            "n_list needs at least 3 strictly increasing positive lengths".into(),
        ));
    }
    if lyap.dim() != cfg.set.dim() {
        return Err(Error::DimMismatch {
            expected: cfg.set.dim(),
            found: lyap.dim(),
        });
    }
    let run = WalkConfig {
        n: *n_list.last().unwrap(),
        checkpoints: n_list.to_vec(),
        ..cfg.clone()
    };
    let rows = sample_projections(&run, Projection::Kappa)?;
    let samples = rows.len();
    Ok(n_list
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let count = rows
                .iter()
                .filter(|row| row[j].sub(lyap).norm() > eps)
                .count() as u64;
            let phat = count as f64 / samples as f64;
            DecayPoint {
                n,
                count,
                phat,
                log_phat: (count > 0).then(|| phat.ln()),
            }
        })
        .collect())
}

/// Least-squares line through the points with a nonzero count.
pub fn fit_decay(points: Vec<DecayPoint>, eps: f64, samples: usize) -> Result<DecayFit> {
    if points.iter().all(|p| p.count == 0) {
        return Err(Error::AllZeroCounts);
    }
    let fitted: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| p.log_phat.map(|y| (p.n as f64, y)))
        .collect();
    if fitted.len() < 2 {
        return Err(Error::InvalidConfig(
            "fewer than two lengths with nonzero exceedance counts".into(),
        ));
    }
    let (slope, intercept, slope_stderr) = least_squares(&fitted);
    Ok(DecayFit {
        slope,
        intercept,
        slope_stderr,
        dropped_zero: fitted.len() < points.len(),
        points,
        eps,
        samples,
    })
}

/// Least-squares line through `(n, ln P̂(‖κ(Yₙ)/n − lyap‖ > eps))` for the
/// lengths in `n_list`.
pub fn ldp_decay_fit(
    cfg: &WalkConfig,
    lyap: &ChamberVector,
    eps: f64,
    n_list: &[usize],
) -> Result<DecayFit> {
    let points = decay_points(cfg, lyap, eps, n_list)?;
    fit_decay(points, eps, cfg.samples)
}

/// Returns `(slope, intercept, stderr of slope)`.
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let se = if pts.len() > 2 {
        let ssr: f64 = pts
            .iter()
            .map(|p| (p.1 - intercept - slope * p.0).powi(2))
            .sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    (slope, intercept, se)
}
