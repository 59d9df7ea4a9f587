use nalgebra::DMatrix;

use super::matrix::UnimodularMatrix;
use crate::error::{Error, Result};

/// All `k`-element subsets of `0..d` in lexicographic order.
pub fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > d {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == d - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k.min(n - k)).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn minor(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let at = |i: usize, j: usize| m[(rows[i], cols[j])];
    match rows.len() {
        1 => at(0, 0),
        2 => at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0),
        3 => {
            at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1))
                - at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0))
                + at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0))
        }
        k => DMatrix::from_fn(k, k, at).lu().determinant(),
    }
}

/// k-th compound matrix of an arbitrary square matrix: entry `(I, J)` is the
/// minor on rows `I` and columns `J`, index sets in lexicographic order.
pub fn compound_matrix(m: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let d = m.nrows();
    if !m.is_square() {
        return Err(Error::DimMismatch {
            expected: d,
            found: m.ncols(),
        });
    }
    if k == 0 || k > d {
        return Err(Error::BadIndex(format!("exterior degree {k} not in 1..={d}")));
    }
    if k == 1 {
        return Ok(m.clone());
    }
    let subsets = k_subsets(d, k);
    let n = subsets.len();
    Ok(DMatrix::from_fn(n, n, |i, j| minor(m, &subsets[i], &subsets[j])))
}

/// `∧ᵏg` for the unit-determinant representative of `g`.
pub fn exterior_power(g: &UnimodularMatrix, k: usize) -> Result<DMatrix<f64>> {
    let d = g.dim();
    let c = compound_matrix(g.entries(), k)?;
    Ok(c * (-(k as f64) * g.log_abs_det() / d as f64).exp())
}

/// `∧ᵏ` of the stored (rebalanced) entries, with no determinant correction.
/// Ratios and normalized logs are what callers use from it.
pub(crate) fn raw_exterior_power(g: &UnimodularMatrix, k: usize) -> Result<DMatrix<f64>> {
    compound_matrix(g.entries(), k)
}
