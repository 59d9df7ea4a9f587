use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::proximality_report;
use crate::spectrum::{sampled_word, MatrixSet};

/// Upper bound on the number of failing words kept in a report.
pub const MAX_WORST_WORDS: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmsReport {
    pub word_len: usize,
    pub samples: usize,
    pub fixed: usize,
    pub fraction_fixed: f64,
    /// Sampled words `γ` for which no `γ·f` was loxodromic, in sample order.
    pub worst_words: Vec<Vec<usize>>,
}

/// For random words `γ` of length `word_len`, checks whether some `f ∈ F`
/// makes `γ·f` (r, ε)-loxodromic. Word `i` uses stream `i` under `seed`.
pub fn ams_loxodromy_search(
    set: &MatrixSet,
    f_set: &MatrixSet,
    word_len: usize,
    samples: usize,
    r: f64,
    eps: f64,
    seed: u64,
) -> Result<AmsReport> {
    if set.dim() != f_set.dim() {
        return Err(Error::DimMismatch {
            expected: set.dim(),
            found: f_set.dim(),
        });
    }
    if word_len == 0 || samples == 0 {
        return Err(Error::InvalidConfig("need word_len >= 1 and samples >= 1".into()));
    }
    let outcomes: Vec<(bool, Vec<usize>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let word = sampled_word(seed, i as u64, set.len(), word_len);
            let gamma = set.word_product(&word);
            for f in f_set.gens() {
                if proximality_report(&gamma.mul(f), r, eps)?.loxodromic {
                    return Ok((true, word));
                }
            }
            Ok((false, word))
        })
        .collect::<Result<_>>()?;
    let fixed = outcomes.iter().filter(|o| o.0).count();
    let worst_words = outcomes
        .into_iter()
        .filter(|o| !o.0)
        .map(|o| o.1)
        .take(MAX_WORST_WORDS)
        .collect();
    Ok(AmsReport {
        word_len,
        samples,
        fixed,
        fraction_fixed: fixed as f64 / samples as f64,
        worst_words,
    })
}

/// Every word of length `1..=max_len` over `set` whose product is
/// (r, ε)-loxodromic, shortest first and lexicographic within a length.
pub fn proximal_words(set: &MatrixSet, max_len: usize, r: f64, eps: f64) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let letters = set.len();
    for len in 1..=max_len {
        let total = letters.checked_pow(len as u32).filter(|t| *t <= 1 << 20).ok_or_else(|| {
            Error::InvalidConfig(format!("too many words of length {len}"))
        })?;
        for mut idx in 0..total {
            let mut word = vec![0; len];
            for slot in word.iter_mut().rev() {
                *slot = idx % letters;
                idx /= letters;
            }
            if proximality_report(&set.word_product(&word), r, eps)?.loxodromic {
                out.push(word);
            }
        }
    }
    Ok(out)
}
