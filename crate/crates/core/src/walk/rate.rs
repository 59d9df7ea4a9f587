use serde::{Deserialize, Serialize};

use super::config::WalkConfig;
use super::engine::{sample_final, Projection};
use crate::error::{Error, Result};
use crate::linalg::{cartan_projection, ChamberVector};
use crate::real::fmt_real;
use crate::spectrum::MatrixSet;

/// Axis-aligned box over the first `d − 1` chamber coordinates, split into
/// `cells[i]` equal bins along axis `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub cells: Vec<usize>,
}

impl GridSpec {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, cells: Vec<usize>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() || lo.len() != cells.len() {
            return Err(Error::InvalidConfig("grid axes disagree in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidConfig("grid box must satisfy lo < hi".into()));
        }
        if cells.iter().any(|&c| c == 0) {
            return Err(Error::InvalidConfig("grid needs at least one cell per axis".into()));
        }
        Ok(GridSpec { lo, hi, cells })
    }

    /// Cube `[−B, B]^{d−1}` with `B = (d − 1)·max_g κ₁(g)`, which contains
    /// every normalized projection of a product of generators.
    pub fn covering(set: &MatrixSet, cells_per_axis: usize) -> Result<Self> {
        let d = set.dim();
        let mut top: f64 = 0.0;
        for g in set.gens() {
            top = top.max(cartan_projection(g)?.coords()[0]);
        }
        let b = ((d - 1) as f64 * top).max(1e-9) * (1.0 + 1e-9);
        GridSpec::new(vec![-b; d - 1], vec![b; d - 1], vec![cells_per_axis; d - 1])
    }

    pub fn axes(&self) -> usize {
        self.cells.len()
    }

    pub fn total_cells(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.cells[axis] as f64
    }

    /// Flat row-major cell index of `x`, or `None` outside the box.
    pub fn cell_of(&self, x: &ChamberVector) -> Option<usize> {
        let mut idx = 0;
        for a in 0..self.axes() {
            let v = x.coords()[a];
            if v < self.lo[a] || v > self.hi[a] {
                return None;
            }
            let i = (((v - self.lo[a]) / self.width(a)) as usize).min(self.cells[a] - 1);
            idx = idx * self.cells[a] + i;
        }
        Some(idx)
    }

    fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.axes()];
        for a in (0..self.axes()).rev() {
            out[a] = idx % self.cells[a];
            idx /= self.cells[a];
        }
        out
    }

    /// Center of the cell as a full chamber vector (last coordinate fixed
    /// by the trace-zero constraint).
    pub fn cell_center(&self, idx: usize) -> ChamberVector {
        let mi = self.multi_index(idx);
        let mut coords: Vec<f64> = (0..self.axes())
            .map(|a| self.lo[a] + (mi[a] as f64 + 0.5) * self.width(a))
            .collect();
        let s: f64 = coords.iter().sum();
        coords.push(-s);
        ChamberVector::new(coords)
    }

    /// Lower corner and upper corner of the cell over the grid axes.
    pub fn cell_bounds(&self, idx: usize) -> (Vec<f64>, Vec<f64>) {
        let mi = self.multi_index(idx);
        let lo = (0..self.axes())
            .map(|a| self.lo[a] + mi[a] as f64 * self.width(a))
            .collect::<Vec<_>>();
        let hi = (0..self.axes()).map(|a| lo[a] + self.width(a)).collect();
        (lo, hi)
    }

    /// Flat index shifted by `delta` along each axis, if still in the grid.
    pub fn offset(&self, idx: usize, delta: &[isize]) -> Option<usize> {
        let mi = self.multi_index(idx);
        let mut out = 0;
        for a in 0..self.axes() {
            let j = mi[a] as isize + delta[a];
            if j < 0 || j >= self.cells[a] as isize {
                return None;
            }
            out = out * self.cells[a] + j as usize;
        }
        Some(out)
    }
}

/// Empirical rate function on a grid: `i_hat = −(1/n)·ln(count/samples)`,
/// `+∞` on empty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateGrid {
    pub spec: GridSpec,
    pub projection: Projection,
    pub counts: Vec<u64>,
    #[serde(with = "crate::real::inf_vec")]
    pub i_hat: Vec<f64>,
    pub n: usize,
    pub samples: usize,
    /// Samples that fell outside the box.
    pub outside: u64,
    /// `ln(samples)/n`, the largest value `i_hat` takes on a non-empty cell.
    pub noise_floor: f64,
    pub argmin: usize,
    #[serde(with = "crate::real::inf_scalar")]
    pub argmin_value: f64,
}

impl RateGrid {
    pub fn from_points(
        spec: GridSpec,
        projection: Projection,
        points: &[ChamberVector],
        n: usize,
    ) -> Result<RateGrid> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if points[0].dim() != spec.axes() + 1 {
            return Err(Error::DimMismatch {
                expected: spec.axes() + 1,
                found: points[0].dim(),
            });
        }
        let mut counts = vec![0u64; spec.total_cells()];
        let mut outside = 0;
        for p in points {
            match spec.cell_of(p) {
                Some(i) => counts[i] += 1,
                None => outside += 1,
            }
        }
        let samples = points.len();
        let nf = n as f64;
        let i_hat: Vec<f64> = counts
            .iter()
            .map(|&c| {
                if c == 0 {
                    f64::INFINITY
                } else {
                    -((c as f64) / samples as f64).ln() / nf
                }
            })
            .collect();
        // smallest rate; ties go to the lower index
        let mut argmin = 0;
        for (i, v) in i_hat.iter().enumerate() {
            if *v < i_hat[argmin] {
                argmin = i;
            }
        }
        Ok(RateGrid {
            argmin_value: i_hat[argmin],
            spec,
            projection,
            counts,
            i_hat,
            n,
            samples,
            outside,
            noise_floor: (samples as f64).ln() / nf,
            argmin,
        })
    }

    pub fn cell_of(&self, x: &ChamberVector) -> Option<usize> {
        self.spec.cell_of(x)
    }

    pub fn rate_at(&self, x: &ChamberVector) -> f64 {
        self.cell_of(x).map_or(f64::INFINITY, |i| self.i_hat[i])
    }

    /// Cells with a nonzero count whose every grid neighbour is also nonzero.
    pub fn interior_cells(&self) -> Vec<usize> {
        let axes = self.spec.axes();
        (0..self.counts.len())
            .filter(|&i| {
                self.counts[i] > 0
                    && (0..axes).all(|a| {
                        [-1isize, 1].iter().all(|&s| {
                            let mut delta = vec![0isize; axes];
                            delta[a] = s;
                            self.spec
                                .offset(i, &delta)
                                .is_some_and(|j| self.counts[j] > 0)
                        })
                    })
            })
            .collect()
    }

    /// Rows of `center_1,…,center_{d−1},count,i_hat`.
    pub fn to_csv(&self) -> String {
        let axes = self.spec.axes();
        let mut out = String::new();
        for a in 0..axes {
            out.push_str(&format!("x{},", a + 1));
        }
        out.push_str("count,i_hat\n");
        for (i, (&c, &r)) in self.counts.iter().zip(&self.i_hat).enumerate() {
            let center = self.spec.cell_center(i);
            for v in &center.coords()[..axes] {
                out.push_str(&format!("{},", fmt_real(*v)));
            }
            out.push_str(&format!("{},{}\n", c, fmt_real(r)));
        }
        out
    }
}

/// Default cells per axis for rate grids.
pub const DEFAULT_RATE_CELLS: usize = 64;

pub fn rate_function_estimate(
    cfg: &WalkConfig,
    grid: &GridSpec,
    projection: Projection,
) -> Result<RateGrid> {
    if grid.axes() + 1 != cfg.set.dim() {
        return Err(Error::DimMismatch {
            expected: cfg.set.dim() - 1,
            found: grid.axes(),
        });
    }
    let points = sample_final(cfg, projection)?;
    RateGrid::from_points(grid.clone(), projection, &points, cfg.n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fib() -> MatrixSet {
        MatrixSet::from_rows(&[
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        ])
        .unwrap()
    }

    #[test]
    fn grid_indexing_round_trips() {
        let g = GridSpec::new(vec![-1.0, 0.0], vec![1.0, 3.0], vec![4, 3]).unwrap();
        for i in 0..g.total_cells() {
            assert_eq!(g.cell_of(&g.cell_center(i)), Some(i));
        }
        assert_eq!(g.cell_of(&ChamberVector::new(vec![1.0, 3.0, -4.0])), Some(11));
        assert_eq!(g.cell_of(&ChamberVector::new(vec![1.1, 0.0, -1.1])), None);
        assert!(GridSpec::new(vec![0.0], vec![0.0], vec![2]).is_err());
    }

    #[test]
    fn estimator_identities() {
        let cfg = WalkConfig::new(fib(), 12, 3000, 4);
        let grid = GridSpec::covering(&cfg.set, 40).unwrap();
        let r = rate_function_estimate(&cfg, &grid, Projection::Kappa).unwrap();
        assert_eq!(r.outside, 0);
        assert_eq!(r.counts.iter().sum::<u64>(), 3000);
        let mass: f64 = r.i_hat.iter().map(|v| (-(r.n as f64) * v).exp()).sum();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(r.argmin_value >= 0.0 && r.argmin_value <= r.noise_floor);
        for (i, &c) in r.counts.iter().enumerate() {
            let (lo, _) = r.spec.cell_bounds(i);
            if lo[0] > 0.4812119 {
                assert_eq!(c, 0);
                assert_eq!(r.i_hat[i], f64::INFINITY);
            }
        }
    }

    #[test]
    fn csv_marks_empty_cells_inf() {
        let s = MatrixSet::from_rows(&[vec![vec![2.0, 0.0], vec![0.0, 0.5]]]).unwrap();
        let cfg = WalkConfig::new(s, 5, 10, 0);
        let grid = GridSpec::covering(&cfg.set, 4).unwrap();
        let r = rate_function_estimate(&cfg, &grid, Projection::Kappa).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("x1,count,i_hat\n"));
        assert_eq!(csv.matches(",inf\n").count(), 3);
        assert_eq!(r.argmin_value, 0.0);
    }
}
