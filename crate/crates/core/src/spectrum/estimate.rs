use std::sync::Arc;

use serde::Serialize;

use super::enumerate::{par_fold_products, EnumerationMode};
use super::matrix_set::MatrixSet;
use crate::error::{Error, Result};
use crate::geometry::{asymptotic_cone, hausdorff_distance, DirectionSet, SupportAccumulator, SupportBody};
use crate::linalg::{cartan_projection, jordan_projection};

/// Approximants of the joint spectrum at one word length.
#[derive(Debug, Clone)]
pub struct SpectrumEstimate {
    pub n: usize,
    /// Hull of `κ(g)/n` over the products `g` of length `n`.
    pub kappa_body: SupportBody,
    /// Hull of `λ(g)/n` over the same products.
    pub lambda_body: SupportBody,
    /// Hausdorff distance between the two bodies.
    pub d_kl: f64,
    /// Hausdorff distance of `kappa_body` to the previous level's;
    /// `+∞` at the first level.
    pub d_step: f64,
    pub product_count: u64,
    pub mode: EnumerationMode,
}

/// One row of the per-level diagnostics table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSummary {
    pub n: usize,
    pub product_count: u64,
    pub mode: EnumerationMode,
    pub d_kl: f64,
    #[serde(with = "crate::real::inf_scalar")]
    pub d_step: f64,
}

impl SpectrumEstimate {
    pub fn summary(&self) -> LevelSummary {
        LevelSummary {
            n: self.n,
            product_count: self.product_count,
            mode: self.mode,
            d_kl: self.d_kl,
            d_step: self.d_step,
        }
    }
}

struct LevelAcc {
    kappa: SupportAccumulator,
    lambda: SupportAccumulator,
}

fn with_word(e: Error, word: &[usize]) -> Error {
    match e {
        Error::NumericalFailure(msg) => Error::NumericalFailure(format!("{msg} (word {word:?})")),
        other => other,
    }
}

/// κ and λ bodies of the length-`n` products, without diagnostics.
pub fn spectrum_level(
    set: &MatrixSet,
    n: usize,
    dirset: &Arc<DirectionSet>,
    budget: u64,
    seed: u64,
) -> Result<(SupportBody, SupportBody, u64, EnumerationMode)> {
    if dirset.dim() != set.dim() {
        return Err(Error::DimMismatch {
            expected: set.dim(),
            found: dirset.dim(),
        });
    }
    let inv_n = 1.0 / n as f64;
    let (acc, mode, count) = par_fold_products(
        set,
        n,
        budget,
        seed,
        || LevelAcc {
            kappa: SupportAccumulator::new(dirset.clone()),
            lambda: SupportAccumulator::new(dirset.clone()),
        },
        |acc, key, word, g| {
            let k = cartan_projection(g).map_err(|e| with_word(e, word))?;
            let l = jordan_projection(g).map_err(|e| with_word(e, word))?;
            acc.kappa.push(key, &k.scaled(inv_n))?;
            acc.lambda.push(key, &l.scaled(inv_n))?;
            Ok(())
        },
        |a, b| {
            Ok(LevelAcc {
                kappa: a.kappa.merge(b.kappa)?,
                lambda: a.lambda.merge(b.lambda)?,
            })
        },
    )?;
    Ok((acc.kappa.finish()?, acc.lambda.finish()?, count, mode))
}

/// Joint-spectrum approximants for every word length `1..=n_max`.
///
/// The last entry is the best available approximant of `J(S)`. Zariski
/// density of the generated semigroup is assumed, not checked; a `d_kl`
/// that refuses to shrink is the visible symptom when it fails.
pub fn joint_spectrum_estimate(
    set: &MatrixSet,
    n_max: usize,
    dirset: &Arc<DirectionSet>,
    budget: u64,
    seed: u64,
) -> Result<Vec<SpectrumEstimate>> {
    if n_max == 0 {
        return Err(Error::InvalidConfig("n_max must be at least 1".into()));
    }
    let mut levels: Vec<SpectrumEstimate> = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let (kappa_body, lambda_body, product_count, mode) =
            spectrum_level(set, n, dirset, budget, seed)?;
        let d_kl = hausdorff_distance(&kappa_body, &lambda_body)?;
        let d_step = match levels.last() {
            Some(prev) => hausdorff_distance(&kappa_body, &prev.kappa_body)?,
            None => f64::INFINITY,
        };
        levels.push(SpectrumEstimate {
            n,
            kappa_body,
            lambda_body,
            d_kl,
            d_step,
            product_count,
            mode,
        });
    }
    Ok(levels)
}

/// Hausdorff distance between the cone traces of the level-`n` κ-bodies of
/// two generating sets. Sets generating the same semigroup span the same
/// limit cone, so this should shrink as `n` grows.
pub fn cone_invariance_check(
    set: &MatrixSet,
    set_prime: &MatrixSet,
    n: usize,
    dirset: &Arc<DirectionSet>,
    budget: u64,
    seed: u64,
) -> Result<f64> {
    let (k, _, _, _) = spectrum_level(set, n, dirset, budget, seed)?;
    let (kp, _, _, _) = spectrum_level(set_prime, n, dirset, budget, seed)?;
    hausdorff_distance(&asymptotic_cone(&k)?, &asymptotic_cone(&kp)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_directions;

    #[test]
    fn diagonal_generator_is_a_point() {
        let s = MatrixSet::from_rows(&[vec![vec![2.0, 0.0], vec![0.0, 0.5]]]).unwrap();
        let dirs = Arc::new(make_directions(2, 2, 0).unwrap());
        let levels = joint_spectrum_estimate(&s, 6, &dirs, 1000, 0).unwrap();
        let h = 2f64.sqrt() * 2f64.ln();
        for lvl in &levels {
            assert!((lvl.kappa_body.support_values()[0] - h).abs() < 1e-12);
            assert!((lvl.kappa_body.support_values()[1] + h).abs() < 1e-12);
            assert!(lvl.d_kl < 1e-12);
        }
        assert!(levels[0].d_step.is_infinite());
        assert!(levels[5].d_step < 1e-12);
    }

    #[test]
    fn unipotent_word_keeps_origin_in_lambda_body() {
        let s = MatrixSet::from_rows(&[
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        ])
        .unwrap();
        let dirs = Arc::new(make_directions(2, 2, 0).unwrap());
        for lvl in joint_spectrum_estimate(&s, 8, &dirs, 1 << 20, 0).unwrap() {
            // support along −(1,−1)/√2 is −min λ₁·√2, and Aⁿ has λ = 0
            assert!(lvl.lambda_body.support_values()[1].abs() < 1e-6);
            assert_eq!(lvl.mode, EnumerationMode::Exhaustive);
            assert_eq!(lvl.product_count, 1 << lvl.n);
        }
    }

    #[test]
    fn identical_sets_have_zero_cone_distance() {
        let s = MatrixSet::from_rows(&[
            vec![vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![vec![1.0, 0.0], vec![1.0, 1.0]],
        ])
        .unwrap();
        let dirs = Arc::new(make_directions(2, 2, 0).unwrap());
        assert_eq!(cone_invariance_check(&s, &s, 6, &dirs, 1000, 0).unwrap(), 0.0);
    }

    #[test]
    fn squares_span_the_same_ray() {
        let s = MatrixSet::from_rows(&[vec![vec![2.0, 1.0], vec![1.0, 1.0]]]).unwrap();
        let sq = s.from_words(&[vec![0, 0]]).unwrap();
        let dirs = Arc::new(make_directions(2, 2, 0).unwrap());
        assert!(cone_invariance_check(&s, &sq, 5, &dirs, 1000, 0).unwrap() < 1e-12);
    }

    #[test]
    fn dirset_dimension_must_match() {
        let s = MatrixSet::from_rows(&[vec![vec![2.0, 1.0], vec![1.0, 1.0]]]).unwrap();
        let dirs = Arc::new(make_directions(3, 8, 0).unwrap());
        assert!(matches!(
            joint_spectrum_estimate(&s, 2, &dirs, 100, 0),
            Err(Error::DimMismatch { .. })
        ));
    }
}
