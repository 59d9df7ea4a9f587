//! Joint spectral radius brackets by level-synchronous branch and bound,
//! and the highest-weight identity check against joint-spectrum data.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::weight_direction;
use crate::linalg::{exterior_power, spectral_norm, spectral_radius};
use crate::spectrum::{MatrixSet, SpectrumEstimate};

/// Default per-level node cap; the search stops at the last complete level
/// beyond it.
pub const DEFAULT_NODE_CAP: usize = 1 << 22;

/// Bracket state after one depth of the search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsrLevel {
    pub depth: usize,
    /// Products evaluated so far (all levels up to this one).
    pub explored: u64,
    /// Products kept for branching at this level.
    pub kept: usize,
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<usize>,
}

/// Bracket `lower ≤ log r(M) ≤ upper` in natural-log units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsrBounds {
    pub lower: f64,
    pub upper: f64,
    /// Deepest level completed.
    pub depth: usize,
    pub explored: u64,
    pub prune_delta: f64,
    /// Word whose product attains `lower` as `(1/len)·log ρ`.
    pub witness: Vec<usize>,
    pub levels: Vec<JsrLevel>,
}

impl JsrBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

#[derive(Clone)]
struct Node {
    word: Vec<usize>,
    mat: DMatrix<f64>,
    log_scale: f64,
    /// `min` over prefixes of `(1/j)·log‖prefix_j‖`.
    prefix_rate: f64,
}

struct Evaluated {
    node: Node,
    rho_rate: f64,
}

fn rebalance(mat: &mut DMatrix<f64>, log_scale: &mut f64) {
    let max = mat.amax();
    if max > 0.0 && max.is_finite() {
        let k = max.log2().round() as i32;
        if k != 0 {
            *mat *= 2f64.powi(-k);
            *log_scale += k as f64 * std::f64::consts::LN_2;
        }
    }
}

fn evaluate(node: Node) -> Result<Evaluated> {
    let len = node.word.len() as f64;
    let norm = spectral_norm(&node.mat)?;
    let rho = spectral_radius(&node.mat)?;
    let norm_rate = (norm.ln() + node.log_scale) / len;
    let rho_rate = if rho > 0.0 {
        (rho.ln() + node.log_scale) / len
    } else {
        f64::NEG_INFINITY
    };
    if norm_rate.is_nan() {
        return Err(Error::NumericalFailure(format!("norm of word {:?}", node.word)));
    }
    Ok(Evaluated {
        node: Node {
            prefix_rate: node.prefix_rate.min(norm_rate),
            ..node
        },
        rho_rate,
    })
}

fn validate(mats: &[DMatrix<f64>]) -> Result<usize> {
    let first = mats.first().ok_or(Error::EmptyInput)?;
    let n = first.nrows();
    for m in mats {
        if !m.is_square() || m.nrows() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: m.nrows().max(m.ncols()),
            });
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NumericalFailure("non-finite matrix entry".into()));
        }
    }
    Ok(n)
}

/// Brackets the joint spectral radius of `mats` (spectral norm, log units).
///
/// Level by level, every child of a kept product is evaluated. The lower
/// bound is the best `(1/ℓ)·log ρ(P)` seen so far. A product is pruned
/// once the smallest norm rate along its prefixes drops to
/// `lower + prune_delta` or below; every infinite word then splits into
/// blocks whose norm rate is at most `max(lower + prune_delta, largest
/// kept prefix rate)`, which is the upper bound of that level. Upper
/// bounds are kept as a running minimum.
pub fn jsr_bounds(mats: &[DMatrix<f64>], depth: usize, prune_delta: f64) -> Result<JsrBounds> {
    jsr_bounds_capped(mats, depth, prune_delta, DEFAULT_NODE_CAP)
}

pub fn jsr_bounds_capped(
    mats: &[DMatrix<f64>],
    depth: usize,
    prune_delta: f64,
    node_cap: usize,
) -> Result<JsrBounds> {
    validate(mats)?;
    if depth == 0 {
        return Err(Error::InvalidConfig("depth must be at least 1".into()));
    }
    if !(prune_delta >= 0.0) {
        return Err(Error::InvalidConfig(format!("prune_delta = {prune_delta} must be >= 0")));
    }

    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    let mut witness: Vec<usize> = Vec::new();
    let mut explored = 0u64;
    let mut levels = Vec::new();

    let mut candidates: Vec<Node> = mats
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let mut mat = m.clone();
            let mut log_scale = 0.0;
            rebalance(&mut mat, &mut log_scale);
            Node {
                word: vec![i],
                mat,
                log_scale,
                prefix_rate: f64::INFINITY,
            }
        })
        .collect();

    for level in 1..=depth {
        if candidates.len() > node_cap {
            break;
        }
        let evaluated: Vec<Evaluated> = candidates
            .into_par_iter()
            .map(evaluate)
            .collect::<Result<_>>()?;
        explored += evaluated.len() as u64;

        // candidates arrive in lexicographic order; strict improvement keeps
        // the smallest word among ties
        for e in &evaluated {
            if e.rho_rate > lower {
                lower = e.rho_rate;
                witness = e.node.word.clone();
            }
        }
        let threshold = lower + prune_delta;
        let kept: Vec<Node> = evaluated
            .into_iter()
            .map(|e| e.node)
            .filter(|n| n.prefix_rate > threshold)
            .collect();
        let level_upper = kept
            .iter()
            .map(|n| n.prefix_rate)
            .fold(threshold, f64::max);
        upper = upper.min(level_upper);

        levels.push(JsrLevel {
            depth: level,
            explored,
            kept: kept.len(),
            lower,
            upper,
            witness: witness.clone(),
        });

        if kept.is_empty() || level == depth {
            break;
        }
        candidates = kept
            .iter()
            .flat_map(|parent| {
                mats.iter().enumerate().map(move |(i, m)| {
                    let mut mat = &parent.mat * m;
                    let mut log_scale = parent.log_scale;
                    rebalance(&mut mat, &mut log_scale);
                    let mut word = parent.word.clone();
                    word.push(i);
                    Node {
                        word,
                        mat,
                        log_scale,
                        prefix_rate: parent.prefix_rate,
                    }
                })
            })
            .collect();
    }

    // levels that were never needed repeat the final bracket
    let last = levels.last().cloned().ok_or_else(|| {
        Error::InvalidConfig(format!("node cap {node_cap} below the generator count"))
    })?;
    Ok(JsrBounds {
        lower: last.lower,
        upper: last.upper,
        depth: last.depth,
        explored: last.explored,
        prune_delta,
        witness: last.witness,
        levels,
    })
}

/// Both sides of the highest-weight identity for `∧ᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BergerWangCheck {
    pub k: usize,
    /// `sup (z₁ + … + z_k)` over the κ-body.
    pub lhs: f64,
    /// Midpoint of the bracket on `log r(∧ᵏ S)`.
    pub rhs: f64,
    pub lower: f64,
    pub upper: f64,
    /// Distance from `lhs` to `[lower, upper]`; zero inside.
    pub gap: f64,
    /// Same supremum over the λ-body; never above `lhs` beyond rounding.
    pub lambda_lhs: f64,
}

/// Compares the k-th fundamental weight's maximum over a joint-spectrum
/// approximant with a joint-spectral-radius bracket of `∧ᵏ S`.
pub fn berger_wang_check(
    set: &MatrixSet,
    k: usize,
    depth: usize,
    prune_delta: f64,
    spectrum: &SpectrumEstimate,
) -> Result<BergerWangCheck> {
    let d = set.dim();
    if k == 0 || k >= d {
        return Err(Error::BadIndex(format!("weight index {k} not in 1..={}", d - 1)));
    }
    if spectrum.kappa_body.dim() != d {
        return Err(Error::DimMismatch {
            expected: d,
            found: spectrum.kappa_body.dim(),
        });
    }
    let (unit, norm) = weight_direction(d, k);
    let lhs = spectrum.kappa_body.support_value(&unit) * norm;
    let lambda_lhs = spectrum.lambda_body.support_value(&unit) * norm;

    let wedges = set
        .gens()
        .iter()
        .map(|g| exterior_power(g, k))
        .collect::<Result<Vec<_>>>()?;
    let bounds = jsr_bounds(&wedges, depth, prune_delta)?;
    let gap = if lhs < bounds.lower {
        bounds.lower - lhs
    } else if lhs > bounds.upper {
        lhs - bounds.upper
    } else {
        0.0
    };
    Ok(BergerWangCheck {
        k,
        lhs,
        rhs: bounds.midpoint(),
        lower: bounds.lower,
        upper: bounds.upper,
        gap,
        lambda_lhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m2(a: f64, b: f64, c: f64, d: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, b, c, d])
    }

    #[test]
    fn single_diagonal_is_exact() {
        let b = jsr_bounds(&[m2(2.0, 0.0, 0.0, 0.5)], 1, 0.0).unwrap();
        assert_abs_diff_eq!(b.lower, 2f64.ln(), epsilon = 1e-9);
        assert_abs_diff_eq!(b.upper, 2f64.ln(), epsilon = 1e-9);
        assert_eq!(b.witness, vec![0]);
    }

    #[test]
    fn rotation_is_exact() {
        let (s, c) = f64::sin_cos(0.9);
        let b = jsr_bounds(&[m2(c, -s, s, c)], 3, 0.0).unwrap();
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.upper, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fibonacci_pair_is_pinned_by_the_cat_map() {
        let pair = [m2(1.0, 1.0, 0.0, 1.0), m2(1.0, 0.0, 1.0, 1.0)];
        let log_phi = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        // ρ(AB) = ρ([[2,1],[1,1]]) = (3 + √5)/2 = φ²
        let rho_ab = (3.0 + 5f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(rho_ab.ln() / 2.0, log_phi, epsilon = 1e-15);

        let b = jsr_bounds(&pair, 2, 0.005).unwrap();
        assert!(b.lower >= log_phi - 1e-12);
        assert_eq!(b.witness, vec![0, 1]);

        let b = jsr_bounds(&pair, 16, 0.005).unwrap();
        assert!(b.upper - b.lower <= 0.02);
        assert!(b.lower <= log_phi + 1e-12 && log_phi <= b.upper);
    }

    #[test]
    fn scaling_shifts_both_bounds() {
        let pair = [m2(1.0, 1.0, 0.0, 1.0), m2(0.5, 0.0, 1.0, 2.0)];
        let base = jsr_bounds(&pair, 8, 0.01).unwrap();
        for c in [2.0, 0.25, -4.0] {
            let scaled: Vec<_> = pair.iter().map(|m| m * c).collect();
            let b = jsr_bounds(&scaled, 8, 0.01).unwrap();
            assert_abs_diff_eq!(b.lower, base.lower + f64::ln(f64::abs(c)), epsilon = 1e-9);
            assert_abs_diff_eq!(b.upper, base.upper + f64::ln(f64::abs(c)), epsilon = 1e-9);
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(jsr_bounds(&[], 3, 0.0).is_err());
        assert!(jsr_bounds(&[m2(1.0, 0.0, 0.0, 1.0)], 0, 0.0).is_err());
        assert!(jsr_bounds(&[m2(1.0, 0.0, 0.0, 1.0)], 2, -1.0).is_err());
        let bad = DMatrix::from_row_slice(3, 3, &[1.0; 9]);
        assert!(matches!(
            jsr_bounds(&[m2(1.0, 0.0, 0.0, 1.0), bad], 2, 0.0),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn node_cap_stops_early() {
        // all products are unipotent, so nothing beats the zero lower bound
        // and only words cancelling to the identity get pruned
        let pair = [m2(1.0, 3.0, 0.0, 1.0), m2(1.0, -3.0, 0.0, 1.0)];
        let b = jsr_bounds_capped(&pair, 12, 0.0, 8).unwrap();
        assert!(b.depth <= 4, "depth {}", b.depth);
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-12);
        assert!(b.lower <= b.upper);
    }
}
