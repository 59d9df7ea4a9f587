use nalgebra::linalg::{Schur, SVD};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::matrix::UnimodularMatrix;
use crate::error::{Error, Result};

const SVD_MAX_ITER: usize = 10_000;

/// A point of the trace-zero hyperplane, typically in the closed Weyl
/// chamber `x₁ ≥ … ≥ x_d`, `Σxᵢ = 0`. Coordinates are natural logs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChamberVector {
    coords: Vec<f64>,
}

impl ChamberVector {
    pub fn new(coords: Vec<f64>) -> Self {
        ChamberVector { coords }
    }

    pub fn zeros(d: usize) -> Self {
        ChamberVector {
            coords: vec![0.0; d],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.coords.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, c: f64) -> ChamberVector {
        ChamberVector {
            coords: self.coords.iter().map(|x| x * c).collect(),
        }
    }

    pub fn sub(&self, other: &ChamberVector) -> ChamberVector {
        ChamberVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &ChamberVector) -> ChamberVector {
        ChamberVector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Sum of the first `k` coordinates: the value of the k-th fundamental
    /// weight.
    pub fn partial_sum(&self, k: usize) -> f64 {
        self.coords[..k].iter().sum()
    }

    /// Orthogonal projection onto the trace-zero hyperplane.
    pub fn centered(&self) -> ChamberVector {
        let mean = self.coords.iter().sum::<f64>() / self.coords.len() as f64;
        ChamberVector {
            coords: self.coords.iter().map(|x| x - mean).collect(),
        }
    }

    /// `(x_d, …, x₁)` negated: the image under `g ↦ g⁻¹`.
    pub fn opposite(&self) -> ChamberVector {
        ChamberVector {
            coords: self.coords.iter().rev().map(|x| -x).collect(),
        }
    }

    pub fn is_in_chamber(&self, tol: f64) -> bool {
        let sum: f64 = self.coords.iter().sum();
        sum.abs() <= tol.max(1e-9) && self.coords.windows(2).all(|w| w[0] >= w[1] - tol)
    }
}

/// Turns decreasing log-moduli of a matrix with known `log|det|` into a
/// chamber vector. The last coordinate is fixed by the trace-zero
/// constraint rather than taken from the smallest modulus, which is the
/// least accurate one.
fn chamber_from_log_moduli(mut logs: Vec<f64>, log_abs_det: f64) -> Result<ChamberVector> {
    let d = logs.len();
    logs.sort_by(|a, b| b.total_cmp(a));
    let shift = log_abs_det / d as f64;
    let mut coords = Vec::with_capacity(d);
    for &l in &logs[..d - 1] {
        if !l.is_finite() {
            return Err(Error::NumericalFailure(
                "a leading modulus vanished or overflowed".into(),
            ));
        }
        coords.push(l - shift);
    }
    let head: f64 = coords.iter().sum();
    coords.push(-head);
    Ok(ChamberVector { coords })
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("singular value iteration did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(sv)
}

/// Eigenvalue moduli, decreasing.
pub(crate) fn eigen_moduli(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SVD_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli)
}

/// Largest singular value.
pub(crate) fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    Ok(singular_values(m)?[0])
}

/// Largest eigenvalue modulus.
pub(crate) fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 1 {
        return Ok(m[(0, 0)].abs());
    }
    Ok(eigen_moduli(m)?[0])
}

/// Top singular value of a 2×2 matrix whose determinant is known to be `det`.
fn top_singular_2x2(m: &DMatrix<f64>, det: f64) -> f64 {
    let fro2 = m.iter().map(|x| x * x).sum::<f64>();
    let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
    ((fro2 + disc.sqrt()) / 2.0).sqrt()
}

/// Top eigenvalue modulus of a 2×2 matrix whose determinant is known to be `det`.
fn top_eigen_modulus_2x2(m: &DMatrix<f64>, det: f64) -> f64 {
    let tr = m[(0, 0)] + m[(1, 1)];
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        (tr.abs() + disc.sqrt()) / 2.0
    } else {
        det.abs().sqrt()
    }
}

fn rank_one_chamber(top: f64, log_abs_det: f64) -> Result<ChamberVector> {
    let c = top.ln() - log_abs_det / 2.0;
    if !c.is_finite() {
        return Err(Error::NumericalFailure("top modulus vanished or overflowed".into()));
    }
    Ok(ChamberVector { coords: vec![c, -c] })
}

/// Cartan projection κ(g): logarithms of the singular values, decreasing.
pub fn cartan_projection(g: &UnimodularMatrix) -> Result<ChamberVector> {
    if g.dim() == 2 {
        let det = g.det_sign() * g.log_abs_det().exp();
        return rank_one_chamber(top_singular_2x2(g.entries(), det), g.log_abs_det());
    }
    let logs = singular_values(g.entries())?.iter().map(|s| s.ln()).collect();
    chamber_from_log_moduli(logs, g.log_abs_det())
}

/// Jordan projection λ(g): logarithms of the eigenvalue moduli, decreasing.
pub fn jordan_projection(g: &UnimodularMatrix) -> Result<ChamberVector> {
    if g.dim() == 2 {
        let det = g.det_sign() * g.log_abs_det().exp();
        return rank_one_chamber(top_eigen_modulus_2x2(g.entries(), det), g.log_abs_det());
    }
    let logs = eigen_moduli(g.entries())?.iter().map(|s| s.ln()).collect();
    chamber_from_log_moduli(logs, g.log_abs_det())
}

/// Same as [`cartan_projection`] but always through the dense iterative
/// routine; used to cross-check the closed forms.
pub fn cartan_projection_dense(g: &UnimodularMatrix) -> Result<ChamberVector> {
    let logs = singular_values(g.entries())?.iter().map(|s| s.ln()).collect();
    chamber_from_log_moduli(logs, g.log_abs_det())
}

/// Same as [`jordan_projection`] but always through the Schur form.
pub fn jordan_projection_dense(g: &UnimodularMatrix) -> Result<ChamberVector> {
    let logs = eigen_moduli(g.entries())?.iter().map(|s| s.ln()).collect();
    chamber_from_log_moduli(logs, g.log_abs_det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> UnimodularMatrix {
        UnimodularMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn cartan_of_positive_diagonal() {
        let k = cartan_projection(&UnimodularMatrix::diagonal(&[2.0, 0.5]).unwrap()).unwrap();
        assert_abs_diff_eq!(k.coords()[0], 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(k.coords()[1], -(2f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn cartan_of_rotation_vanishes() {
        for &t in &[0.3, 1.0, 2.5, -4.0] {
            let (s, c) = f64::sin_cos(t);
            let k = cartan_projection(&m(&[&[c, -s], &[s, c]])).unwrap();
            assert_abs_diff_eq!(k.coords()[0], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(k.coords()[1], 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn cartan_of_shear_is_log_golden_ratio() {
        // MᵀM = [[1,1],[1,2]] has eigenvalues (3 ± √5)/2 = φ^{±2}
        let top = ((3.0 + 5f64.sqrt()) / 2.0).sqrt().ln();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(top, phi.ln(), epsilon = 1e-12);
        let k = cartan_projection(&m(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        assert_abs_diff_eq!(k.coords()[0], top, epsilon = 1e-12);
        assert_abs_diff_eq!(k.coords()[1], -top, epsilon = 1e-12);
        assert_abs_diff_eq!(k.coords()[0], 0.4812, epsilon = 1e-4);
    }

    #[test]
    fn jordan_of_unipotent_vanishes() {
        let l = jordan_projection(&m(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        assert_abs_diff_eq!(l.coords()[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l.coords()[1], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn jordan_of_diagonal() {
        let l = jordan_projection(&UnimodularMatrix::diagonal(&[3.0, 1.0 / 3.0]).unwrap()).unwrap();
        assert_abs_diff_eq!(l.coords()[0], 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(l.coords()[1], -(3f64.ln()), epsilon = 1e-12);
    }

    #[test]
    fn jordan_of_cat_map() {
        // characteristic polynomial x² − 3x + 1, roots (3 ± √5)/2
        let top = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        let l = jordan_projection(&m(&[&[2.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert_abs_diff_eq!(l.coords()[0], top, epsilon = 1e-12);
        assert_abs_diff_eq!(l.coords()[0], 0.9624, epsilon = 1e-4);
    }

    #[test]
    fn projections_ignore_rebalancing() {
        let g = m(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let p = g.pow(40);
        let k = cartan_projection(&p).unwrap();
        let l = jordan_projection(&p).unwrap();
        let top = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((k.coords()[0] - 40.0 * top).abs() < 1e-9 * 40.0);
        assert!((l.coords()[0] - 40.0 * top).abs() < 1e-9 * 40.0);
    }

    #[test]
    fn closed_forms_match_dense_routines() {
        let samples = [
            [[2.0, 1.0], [1.0, 1.0]],
            [[0.3, -4.0], [1.1, 0.7]],
            [[0.0, 1.0], [-1.0, 0.2]],
            [[5.0, 2.0], [3.0, -1.0]],
            [[1.0, 7.0], [0.0, 1.0]],
        ];
        for s in samples {
            let g = m(&[&s[0], &s[1]]);
            let (a, b) = (cartan_projection(&g).unwrap(), cartan_projection_dense(&g).unwrap());
            assert_abs_diff_eq!(a.coords()[0], b.coords()[0], epsilon = 1e-12);
            let (a, b) = (jordan_projection(&g).unwrap(), jordan_projection_dense(&g).unwrap());
            assert_abs_diff_eq!(a.coords()[0], b.coords()[0], epsilon = 1e-7);
        }
    }

    #[test]
    fn negative_determinant_uses_absolute_values() {
        let l = jordan_projection(&m(&[&[0.0, 2.0], &[2.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(l.coords()[0], 0.0, epsilon = 1e-12);
    }
}
