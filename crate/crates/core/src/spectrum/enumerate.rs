use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::matrix_set::MatrixSet;
use crate::error::{Error, Result};
use crate::linalg::UnimodularMatrix;

/// Default product budget per level.
pub const DEFAULT_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnumerationMode {
    /// Every word of length n.
    Exhaustive,
    /// `budget` uniformly random words of length n.
    Sampled,
}

impl std::fmt::Display for EnumerationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnumerationMode::Exhaustive => "exhaustive",
            EnumerationMode::Sampled => "sampled",
        })
    }
}

/// A product `g_{w₀} ⋯ g_{w_{n−1}}` together with its word.
#[derive(Debug, Clone)]
pub struct Product {
    pub word: Vec<usize>,
    pub matrix: UnimodularMatrix,
}

impl Product {
    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

/// `|S|^n` if it fits in a u64.
fn word_count(letters: usize, n: usize) -> Option<u64> {
    (letters as u64).checked_pow(u32::try_from(n).ok()?)
}

/// Exhaustive when `|S|ⁿ ≤ budget`, sampled otherwise. Returns the mode
/// and the number of products that will be produced.
pub fn plan(letters: usize, n: usize, budget: u64) -> Result<(EnumerationMode, u64)> {
    if n == 0 {
        return Err(Error::InvalidConfig("word length must be at least 1".into()));
    }
    if budget < letters as u64 {
        return Err(Error::InvalidConfig(format!(
            "budget {budget} smaller than the number of generators {letters}"
        )));
    }
    Ok(match word_count(letters, n) {
        Some(c) if c <= budget => (EnumerationMode::Exhaustive, c),
        _ => (EnumerationMode::Sampled, budget),
    })
}

/// The random word with sample index `index`. Each index owns the ChaCha
/// stream `index` under the master seed, so words do not depend on how
/// the work is split.
pub fn sampled_word(seed: u64, index: u64, letters: usize, n: usize) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..n).map(|_| rng.gen_range(0..letters)).collect()
}

/// Walks every word of a given length that starts with a fixed prefix, in
/// lexicographic order, reusing prefix products.
struct Odometer<'a> {
    set: &'a MatrixSet,
    word: Vec<usize>,
    fixed: usize,
    stack: Vec<UnimodularMatrix>,
    started: bool,
}

impl<'a> Odometer<'a> {
    fn new(set: &'a MatrixSet, n: usize, prefix: &[usize]) -> Self {
        let mut word = prefix.to_vec();
        word.resize(n, 0);
        let mut od = Odometer {
            set,
            word,
            fixed: prefix.len(),
            stack: Vec::with_capacity(n),
            started: false,
        };
        od.rebuild(0);
        od
    }

    fn rebuild(&mut self, from: usize) {
        self.stack.truncate(from);
        for i in from..self.word.len() {
            let g = &self.set.gens()[self.word[i]];
            let next = match self.stack.last() {
                Some(p) => p.mul(g),
                None => g.clone(),
            };
            self.stack.push(next);
        }
    }

    /// Advances to the next word; `false` once exhausted.
    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        let letters = self.set.len();
        let Some(i) = (self.fixed..self.word.len()).rev().find(|&i| self.word[i] + 1 < letters) else {
            return false;
        };
        self.word[i] += 1;
        self.word[i + 1..].iter_mut().for_each(|x| *x = 0);
        self.rebuild(i);
        true
    }

    fn product(&self) -> &UnimodularMatrix {
        self.stack.last().expect("words have positive length")
    }
}

/// Stream of the products of length `n`, exhaustive or sampled according
/// to the budget rule.
pub struct ProductStream<'a> {
    set: &'a MatrixSet,
    n: usize,
    mode: EnumerationMode,
    count: u64,
    seed: u64,
    next_index: u64,
    odometer: Option<Odometer<'a>>,
}

impl ProductStream<'_> {
    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    /// Total number of products the stream yields.
    pub fn total(&self) -> u64 {
        self.count
    }
}

impl Iterator for ProductStream<'_> {
    type Item = Product;

    fn next(&mut self) -> Option<Product> {
        if self.next_index >= self.count {
            return None;
        }
        self.next_index += 1;
        match self.mode {
            EnumerationMode::Exhaustive => {
                let od = self
                    .odometer
                    .get_or_insert_with(|| Odometer::new(self.set, self.n, &[]));
                if !od.advance() {
                    return None;
                }
                Some(Product {
                    word: od.word.clone(),
                    matrix: od.product().clone(),
                })
            }
            EnumerationMode::Sampled => {
                let word = sampled_word(self.seed, self.next_index - 1, self.set.len(), self.n);
                let matrix = self.set.word_product(&word);
                Some(Product { word, matrix })
            }
        }
    }
}

/// Products of length `n`: every word when `|S|ⁿ ≤ budget`, otherwise
/// `budget` seeded uniform words. Products are rebalanced at every step so
/// entries never overflow; the removed scale lives in `log_scale`.
pub fn enumerate_products(
    set: &MatrixSet,
    n: usize,
    budget: u64,
    seed: u64,
) -> Result<ProductStream<'_>> {
    let (mode, count) = plan(set.len(), n, budget)?;
    Ok(ProductStream {
        set,
        n,
        mode,
        count,
        seed,
        next_index: 0,
        odometer: None,
    })
}

const SAMPLE_CHUNK: u64 = 1024;
const MIN_CHUNKS: u64 = 256;

/// Parallel fold over the products of length `n`.
///
/// `visit` receives a key (lexicographic rank in exhaustive mode, sample
/// index in sampled mode), the word and the product. Partial results are
/// merged in key order, so the outcome does not depend on the thread count.
pub(crate) fn par_fold_products<A, I, V, M>(
    set: &MatrixSet,
    n: usize,
    budget: u64,
    seed: u64,
    init: I,
    visit: V,
    merge: M,
) -> Result<(A, EnumerationMode, u64)>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, u64, &[usize], &UnimodularMatrix) -> Result<()> + Sync,
    M: Fn(A, A) -> Result<A>,
{
    let (mode, count) = plan(set.len(), n, budget)?;
    let letters = set.len();
    let parts: Vec<A> = match mode {
        EnumerationMode::Exhaustive => {
            let mut p = 0;
            while p < n && word_count(letters, p).unwrap() < MIN_CHUNKS {
                p += 1;
            }
            let chunks = word_count(letters, p).unwrap();
            let tail = word_count(letters, n - p).unwrap();
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut prefix = vec![0; p];
                    let mut rest = c;
                    for slot in prefix.iter_mut().rev() {
                        *slot = (rest % letters as u64) as usize;
                        rest /= letters as u64;
                    }
                    let mut acc = init();
                    let mut od = Odometer::new(set, n, &prefix);
                    let mut rank = c * tail;
                    while od.advance() {
                        visit(&mut acc, rank, &od.word, od.product())?;
                        rank += 1;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<A>>>()?
        }
        EnumerationMode::Sampled => {
            let chunks = count.div_ceil(SAMPLE_CHUNK);
            (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut acc = init();
                    for idx in c * SAMPLE_CHUNK..((c + 1) * SAMPLE_CHUNK).min(count) {
                        let word = sampled_word(seed, idx, letters, n);
                        let prod = set.word_product(&word);
                        visit(&mut acc, idx, &word, &prod)?;
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<A>>>()?
        }
    };
    let mut it = parts.into_iter();
    let first = it.next().unwrap_or_else(&init);
    let total = it.try_fold(first, merge)?;
    Ok((total, mode, count))
}
