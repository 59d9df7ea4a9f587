use nalgebra::linalg::{Schur, SVD};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::exterior::raw_exterior_power;
use super::matrix::UnimodularMatrix;
use crate::error::{Error, Result};

/// Relative gap `(|μ₁| − |μ₂|)/|μ₁|` below which the top eigenvalue is not
/// considered unique in modulus.
pub const EIGEN_GAP_TOL: f64 = 1e-8;

/// Proximality data for one fundamental representation `∧ᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepProximality {
    pub k: usize,
    /// σ₂/σ₁ of `∧ᵏg`.
    pub sv_ratio: f64,
    /// |μ₂|/|μ₁| of `∧ᵏg`.
    pub eigen_gap: f64,
    /// Sine of the angle between the top eigenline and the sum of the other
    /// generalized eigenspaces; 0 when the spectrum is degenerate.
    pub top_evec_distance: f64,
    pub degenerate_spectrum: bool,
    pub eps_proximal: bool,
    pub r_eps_proximal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProximalityReport {
    pub per_rep: Vec<RepProximality>,
    pub loxodromic: bool,
}

/// Classifies a single square matrix (a representation image).
pub fn matrix_proximality(m: &DMatrix<f64>, r: f64, eps: f64) -> Result<RepProximality> {
    let scale = m.amax();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::NumericalFailure("matrix has no finite nonzero entry".into()));
    }
    let m = m / scale;
    let n = m.nrows();

    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("singular value iteration did not converge".into()))?;
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let sv_ratio = sv[1] / sv[0];

    let schur = Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let mut eig: Vec<_> = schur.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let (top, second) = (eig[0].norm(), eig[1].norm());
    let eigen_gap = second / top;
    let degenerate = top == 0.0 || (top - second) / top < EIGEN_GAP_TOL;

    let top_evec_distance = if degenerate {
        0.0
    } else {
        // A unique top modulus of a real matrix is a real eigenvalue. The
        // complementary invariant subspace is the range of (M − μ₁), whose
        // normal is the left eigenvector, so the sine of the angle is
        // |⟨right, left⟩| for unit eigenvectors.
        let mu = eig[0].re;
        let shifted = &m - DMatrix::identity(n, n) * mu;
        let svd = SVD::try_new(shifted, true, true, f64::EPSILON, 10_000).ok_or_else(|| {
            Error::NumericalFailure("eigenvector iteration did not converge".into())
        })?;
        let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
        let (min_idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        let right = v_t.row(min_idx).transpose();
        let left = u.column(min_idx);
        right.dot(&left).abs().min(1.0)
    };

    let eps_proximal = !degenerate && sv_ratio <= eps;
    Ok(RepProximality {
        k: 1,
        sv_ratio,
        eigen_gap,
        top_evec_distance,
        degenerate_spectrum: degenerate,
        eps_proximal,
        r_eps_proximal: eps_proximal && top_evec_distance >= r,
    })
}

/// (r, ε)-proximality of `g` in every fundamental representation
/// `∧ᵏ`, `k = 1..d−1`; loxodromic when all of them are (r, ε)-proximal.
pub fn proximality_report(g: &UnimodularMatrix, r: f64, eps: f64) -> Result<ProximalityReport> {
    if !(eps > 0.0) || !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "need eps > 0 and 0 < r <= 1, got r = {r}, eps = {eps}"
        )));
    }
    let mut per_rep = Vec::with_capacity(g.dim() - 1);
    for k in 1..g.dim() {
        let wedge = raw_exterior_power(g, k)?;
        let mut rep = matrix_proximality(&wedge, r, eps)?;
        rep.k = k;
        per_rep.push(rep);
    }
    let loxodromic = per_rep.iter().all(|p| p.r_eps_proximal);
    Ok(ProximalityReport {
        per_rep,
        loxodromic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn diagonal_is_proximal() {
        let g = UnimodularMatrix::diagonal(&[10.0, 0.1]).unwrap();
        let rep = proximality_report(&g, 1.0, 0.01).unwrap();
        let p = &rep.per_rep[0];
        assert_abs_diff_eq!(p.sv_ratio, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(p.eigen_gap, 0.01, epsilon = 1e-12);
        assert_abs_diff_eq!(p.top_evec_distance, 1.0, epsilon = 1e-12);
        assert!(p.eps_proximal && p.r_eps_proximal && rep.loxodromic);

        let tight = proximality_report(&g, 1.0, 0.009).unwrap();
        assert!(!tight.per_rep[0].eps_proximal);
    }

    #[test]
    fn rotation_is_never_proximal() {
        let (s, c) = f64::sin_cos(0.7);
        let g = UnimodularMatrix::from_rows(&[vec![c, -s], vec![s, c]]).unwrap();
        let rep = proximality_report(&g, 1e-6, 1e6).unwrap();
        assert_abs_diff_eq!(rep.per_rep[0].eigen_gap, 1.0, epsilon = 1e-12);
        assert!(rep.per_rep[0].degenerate_spectrum);
        assert!(!rep.per_rep[0].eps_proximal && !rep.loxodromic);
    }

    #[test]
    fn unipotent_is_not_proximal() {
        let g = UnimodularMatrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let rep = proximality_report(&g, 1e-6, 1e6).unwrap();
        assert!(!rep.per_rep[0].eps_proximal);
    }

    #[test]
    fn skewed_eigenvectors_shrink_the_distance() {
        // eigenvalues 4 and 1/4; top eigenvector e₁, other eigenvector close to e₁
        let g = UnimodularMatrix::from_rows(&[vec![4.0, 100.0], vec![0.0, 0.25]]).unwrap();
        let rep = proximality_report(&g, 0.5, 0.5).unwrap();
        let p = &rep.per_rep[0];
        // second eigenvector ∝ (100, 0.25 − 4); sine to e₁ is its normalized second entry
        let expect = 3.75 / (100f64.powi(2) + 3.75f64.powi(2)).sqrt();
        assert_abs_diff_eq!(p.top_evec_distance, expect, epsilon = 1e-9);
        assert!(p.eps_proximal && !p.r_eps_proximal);
    }

    #[test]
    fn three_dimensional_loxodromic() {
        let g = UnimodularMatrix::diagonal(&[8.0, 1.0, 0.125]).unwrap();
        let rep = proximality_report(&g, 0.9, 0.2).unwrap();
        assert_eq!(rep.per_rep.len(), 2);
        assert!(rep.loxodromic);
        let middle = UnimodularMatrix::diagonal(&[8.0, 8.0, 1.0 / 64.0]).unwrap();
        let rep = proximality_report(&middle, 0.9, 0.2).unwrap();
        assert!(!rep.per_rep[0].eps_proximal);
        assert!(rep.per_rep[1].eps_proximal);
        assert!(!rep.loxodromic);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = UnimodularMatrix::identity(2).unwrap();
        assert!(proximality_report(&g, 0.0, 0.1).is_err());
        assert!(proximality_report(&g, 0.5, 0.0).is_err());
    }
}
