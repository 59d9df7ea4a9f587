use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest supported matrix size. Exterior powers stay at most 20×20.
pub const MAX_DIM: usize = 6;

/// An element of SL(d,ℝ), or of its sign-twisted cousin when the input had
/// negative determinant.
///
/// The represented matrix is `exp(log_scale / d) · entries`. Inputs coming
/// from [`normalize_det`] have `|det entries| = 1` and `log_scale = log|det M|`.
/// Products are rebalanced after every multiplication by a power of two close
/// to their largest entry; in that case the removed scalar is folded into
/// `log_scale` and the tracked `log|det entries|` moves the other way, so
/// projections (which only see the projective class) are unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct UnimodularMatrix {
    entries: DMatrix<f64>,
    log_scale: f64,
    log_abs_det: f64,
    det_sign: f64,
}

/// Factors the positive scalar `|det M|^{1/d}` out of `m`.
pub fn normalize_det(m: DMatrix<f64>) -> Result<UnimodularMatrix> {
    if !m.is_square() {
        return Err(Error::DimMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let d = m.nrows();
    if !(2..=MAX_DIM).contains(&d) {
        return Err(Error::BadIndex(format!(
            "dimension {d} outside the supported range 2..={MAX_DIM}"
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularInput {
            index: None,
            reason: "non-finite entry".into(),
        });
    }
    let det = m.clone().lu().determinant();
    if !det.is_finite() || det.abs() < 1e-300 {
        return Err(Error::SingularInput {
            index: None,
            reason: format!("|det| = {:e}", det.abs()),
        });
    }
    let log_abs = det.abs().ln();
    let scalar = (log_abs / d as f64).exp();
    Ok(UnimodularMatrix {
        entries: m / scalar,
        log_scale: log_abs,
        log_abs_det: 0.0,
        det_sign: det.signum(),
    })
}

impl UnimodularMatrix {
    /// Builds and normalizes a `d×d` matrix from row-major data.
    pub fn from_row_slice(d: usize, data: &[f64]) -> Result<Self> {
        if data.len() != d * d {
            return Err(Error::DimMismatch {
                expected: d * d,
                found: data.len(),
            });
        }
        normalize_det(DMatrix::from_row_slice(d, d, data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        let mut data = Vec::with_capacity(d * d);
        for row in rows {
            if row.len() != d {
                return Err(Error::DimMismatch {
                    expected: d,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_slice(d, &data)
    }

    pub fn identity(d: usize) -> Result<Self> {
        normalize_det(DMatrix::identity(d, d))
    }

    /// Diagonal element with the given entries, normalized to `|det| = 1`.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let d = diag.len();
        normalize_det(DMatrix::from_fn(d, d, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    /// `log|det entries|`; zero for freshly normalized inputs.
    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    /// `+1` or `-1`: the sign of the determinant of the original input.
    pub fn det_sign(&self) -> f64 {
        self.det_sign
    }

    /// Entries rescaled so that `|det| = 1`. Only meaningful while that
    /// rescaling stays inside floating-point range.
    pub fn unit_det_entries(&self) -> DMatrix<f64> {
        let d = self.dim() as f64;
        &self.entries * (-self.log_abs_det / d).exp()
    }

    /// Product `self · other`, rebalanced so that the largest entry is
    /// within a factor of two of 1.
    pub fn mul(&self, other: &UnimodularMatrix) -> UnimodularMatrix {
        let mut out = UnimodularMatrix {
            entries: &self.entries * &other.entries,
            log_scale: self.log_scale + other.log_scale,
            log_abs_det: self.log_abs_det + other.log_abs_det,
            det_sign: self.det_sign * other.det_sign,
        };
        out.rebalance();
        out
    }

    /// Left-multiplies in place: `self ← other · self`.
    pub fn premul_assign(&mut self, other: &UnimodularMatrix) {
        self.entries = &other.entries * &self.entries;
        self.log_scale += other.log_scale;
        self.log_abs_det += other.log_abs_det;
        self.det_sign *= other.det_sign;
        self.rebalance();
    }

    pub fn pow(&self, n: u32) -> UnimodularMatrix {
        let mut acc = UnimodularMatrix {
            entries: DMatrix::identity(self.dim(), self.dim()),
            log_scale: 0.0,
            log_abs_det: 0.0,
            det_sign: 1.0,
        };
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn inverse(&self) -> Result<UnimodularMatrix> {
        let inv = self
            .entries
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::NumericalFailure("matrix inversion failed".into()))?;
        let mut out = UnimodularMatrix {
            entries: inv,
            log_scale: -self.log_scale,
            log_abs_det: -self.log_abs_det,
            det_sign: self.det_sign,
        };
        out.rebalance();
        Ok(out)
    }

    pub fn transpose(&self) -> UnimodularMatrix {
        UnimodularMatrix {
            entries: self.entries.transpose(),
            ..self.clone()
        }
    }

    /// Divides the entries by the power of two nearest their largest
    /// magnitude. Power-of-two scaling is exact, so repeated rebalancing
    /// introduces no rounding.
    fn rebalance(&mut self) {
        let max = self.entries.amax();
        if max == 0.0 || !max.is_finite() {
            return;
        }
        let k = max.log2().round() as i32;
        if k == 0 {
            return;
        }
        self.entries *= 2f64.powi(-k);
        let shift = self.dim() as f64 * k as f64 * std::f64::consts::LN_2;
        self.log_scale += shift;
        self.log_abs_det -= shift;
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }
}
