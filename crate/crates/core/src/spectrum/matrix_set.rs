use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{normalize_det, UnimodularMatrix};

/// A finite generating set `S ⊂ SL(d,ℝ)`, optionally with labels and a
/// probability vector (the step law of a random walk).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSet {
    dim: usize,
    gens: Vec<UnimodularMatrix>,
    labels: Option<Vec<String>>,
    weights: Option<Vec<f64>>,
}

/// On-disk schema: `{"d": int, "matrices": [[row]…], "weights"?: [..], "labels"?: [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSetJson {
    pub d: usize,
    pub matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

fn validate_weights(w: &[f64], count: usize) -> Result<()> {
    if w.len() != count {
        return Err(Error::parse(
            "weights",
            format!("{} weights for {count} matrices", w.len()),
        ));
    }
    if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
        return Err(Error::parse(format!("weights[{i}]"), format!("invalid weight {x}")));
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(Error::parse("weights", format!("weights sum to {sum}, not 1")));
    }
    Ok(())
}

impl MatrixSet {
    pub fn new(gens: Vec<UnimodularMatrix>) -> Result<Self> {
        let first = gens.first().ok_or(Error::EmptyInput)?;
        let dim = first.dim();
        if let Some(g) = gens.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: g.dim(),
            });
        }
        Ok(MatrixSet {
            dim,
            gens,
            labels: None,
            weights: None,
        })
    }

    /// Normalizes each row-major matrix and collects them.
    pub fn from_rows(mats: &[Vec<Vec<f64>>]) -> Result<Self> {
        let gens = mats
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                UnimodularMatrix::from_rows(rows).map_err(|e| match e {
                    Error::SingularInput { reason, .. } => Error::SingularInput {
                        index: Some(i),
                        reason,
                    },
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(gens)
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, self.gens.len())?;
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.gens.len() {
            return Err(Error::parse(
                "labels",
                format!("{} labels for {} matrices", labels.len(), self.gens.len()),
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn gens(&self) -> &[UnimodularMatrix] {
        &self.gens
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// The step law: explicit weights, or uniform.
    pub fn weights_or_uniform(&self) -> Vec<f64> {
        self.weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / self.gens.len() as f64; self.gens.len()])
    }

    /// Label of generator `i` (falls back to `g{i}`).
    pub fn label(&self, i: usize) -> String {
        self.labels
            .as_ref()
            .map(|l| l[i].clone())
            .unwrap_or_else(|| format!("g{i}"))
    }

    /// Product of a word, left to right: `g_{w₀} g_{w₁} ⋯`.
    pub fn word_product(&self, word: &[usize]) -> UnimodularMatrix {
        let mut it = word.iter();
        let first = match it.next() {
            Some(&i) => self.gens[i].clone(),
            None => return UnimodularMatrix::identity(self.dim).expect("identity is unimodular"),
        };
        it.fold(first, |acc, &i| acc.mul(&self.gens[i]))
    }

    /// Appends products of the given words as new generators (weights and
    /// labels are dropped; labels of new elements are the concatenated
    /// generator labels).
    pub fn extended_with_words(&self, words: &[Vec<usize>]) -> Result<MatrixSet> {
        let mut gens = self.gens.clone();
        let mut labels: Vec<String> = (0..self.len()).map(|i| self.label(i)).collect();
        for w in words {
            if w.is_empty() || w.iter().any(|&i| i >= self.len()) {
                return Err(Error::BadIndex(format!("word {w:?} is not a word in the generators")));
            }
            gens.push(self.word_product(w));
            labels.push(w.iter().map(|&i| self.label(i)).collect::<Vec<_>>().join("·"));
        }
        MatrixSet::new(gens)?.with_labels(labels)
    }

    /// Replaces every generator by the given word products only.
    pub fn from_words(&self, words: &[Vec<usize>]) -> Result<MatrixSet> {
        let ext = self.extended_with_words(words)?;
        let n = self.len();
        let labels = ext.labels.clone().unwrap()[n..].to_vec();
        MatrixSet::new(ext.gens[n..].to_vec())?.with_labels(labels)
    }

    pub fn from_json(json: &MatrixSetJson) -> Result<Self> {
        if json.matrices.is_empty() {
            return Err(Error::parse("matrices", "no matrices"));
        }
        for m in &json.matrices {
            let bad = std::iter::once(m.len())
                .chain(m.iter().map(|row| row.len()))
                .find(|&l| l != json.d);
            if let Some(found) = bad {
                return Err(Error::DimMismatch {
                    expected: json.d,
                    found,
                });
            }
        }
        let mut set = Self::from_rows(&json.matrices)?;
        if let Some(w) = &json.weights {
            set = set.with_weights(w.clone())?;
        }
        if let Some(l) = &json.labels {
            set = set.with_labels(l.clone())?;
        }
        Ok(set)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: MatrixSetJson = serde_json::from_str(text).map_err(|e| {
            Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string())
        })?;
        Self::from_json(&json)
    }

    /// Serializes the unit-determinant generators.
    pub fn to_json(&self) -> MatrixSetJson {
        MatrixSetJson {
            d: self.dim,
            matrices: self
                .gens
                .iter()
                .map(|g| {
                    let e: DMatrix<f64> = g.unit_det_entries();
                    (0..self.dim)
                        .map(|i| (0..self.dim).map(|j| e[(i, j)]).collect())
                        .collect()
                })
                .collect(),
            weights: self.weights.clone(),
            labels: self.labels.clone(),
        }
    }
}

/// Reads a matrix set from a JSON file; matrices are normalized to
/// `|det| = 1` and weights validated.
pub fn load_matrix_set(path: impl AsRef<Path>) -> Result<MatrixSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    MatrixSet::from_json_str(&text)
}

/// Builds a row-major matrix from nested slices. Test and example helper.
pub fn normalize_rows(rows: &[Vec<f64>]) -> Result<UnimodularMatrix> {
    let d = rows.len();
    normalize_det(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}
