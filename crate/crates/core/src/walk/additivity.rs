use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cartan_projection, proximality_report, UnimodularMatrix};
use crate::spectrum::{sampled_word, MatrixSet};

pub const HISTOGRAM_BIN: f64 = 0.1;
pub const HISTOGRAM_BINS: usize = 64;

/// Fixed-width histogram on `[0, bins·width)` plus an overflow count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub width: f64,
    pub counts: Vec<u64>,
    pub overflow: u64,
}

impl Histogram {
    pub fn new(width: f64, bins: usize) -> Self {
        Histogram {
            width,
            counts: vec![0; bins],
            overflow: 0,
        }
    }

    pub fn push(&mut self, x: f64) {
        let i = (x / self.width) as usize;
        match self.counts.get_mut(i) {
            Some(c) => *c += 1,
            None => self.overflow += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.overflow
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectStats {
    pub word_len: usize,
    pub pairs: usize,
    pub max_defect_all: f64,
    /// `None` when no sampled pair was loxodromic throughout.
    pub max_defect_lox: Option<f64>,
    pub lox_pairs: usize,
    pub histogram_all: Histogram,
    pub histogram_lox: Histogram,
}

/// `‖κ(gh) − κ(g) − κ(h)‖`.
pub fn defect_of_pair(g: &UnimodularMatrix, h: &UnimodularMatrix) -> Result<f64> {
    if g.dim() != h.dim() {
        return Err(Error::DimMismatch {
            expected: g.dim(),
            found: h.dim(),
        });
    }
    let kg = cartan_projection(g)?;
    let kh = cartan_projection(h)?;
    let kgh = cartan_projection(&g.mul(h))?;
    Ok(kgh.sub(&kg).sub(&kh).norm())
}

/// Defect statistics over `pair_samples` random pairs of words of length
/// `word_len`. Pair `i` uses word streams `2i` and `2i + 1`.
pub fn additivity_defect_stats(
    set: &MatrixSet,
    pair_samples: usize,
    word_len: usize,
    r: f64,
    eps: f64,
    seed: u64,
) -> Result<DefectStats> {
    if word_len == 0 || pair_samples == 0 {
        return Err(Error::InvalidConfig("need word_len >= 1 and at least one pair".into()));
    }
    let letters = set.len();
    let per_pair: Vec<(f64, bool)> = (0..pair_samples)
        .into_par_iter()
        .map(|i| {
            let g = set.word_product(&sampled_word(seed, 2 * i as u64, letters, word_len));
            let h = set.word_product(&sampled_word(seed, 2 * i as u64 + 1, letters, word_len));
            let defect = defect_of_pair(&g, &h)?;
            let lox = proximality_report(&g, r, eps)?.loxodromic
                && proximality_report(&h, r, eps)?.loxodromic
                && proximality_report(&g.mul(&h), r, eps)?.loxodromic;
            Ok((defect, lox))
        })
        .collect::<Result<_>>()?;
    let mut histogram_all = Histogram::new(HISTOGRAM_BIN, HISTOGRAM_BINS);
    let mut histogram_lox = Histogram::new(HISTOGRAM_BIN, HISTOGRAM_BINS);
    let mut max_all: f64 = 0.0;
    let mut max_lox: Option<f64> = None;
    for &(d, lox) in &per_pair {
        histogram_all.push(d);
        max_all = max_all.max(d);
        if lox {
            histogram_lox.push(d);
            max_lox = Some(max_lox.map_or(d, |m| m.max(d)));
        }
    }
    Ok(DefectStats {
        word_len,
        pairs: pair_samples,
        max_defect_all: max_all,
        max_defect_lox: max_lox,
        lox_pairs: histogram_lox.total() as usize,
        histogram_all,
        histogram_lox,
    })
}
