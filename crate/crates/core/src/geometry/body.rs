use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::directions::{make_directions, DirectionSet};
use crate::error::{Error, Result};
use crate::linalg::ChamberVector;

/// A convex body `{x : ⟨x, u_j⟩ ≤ h_j}` in the trace-zero hyperplane,
/// stored by its support values on a fixed direction set, together with
/// the points that realize them.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportBody {
    dirset: Arc<DirectionSet>,
    h: Vec<f64>,
    witnesses: Vec<ChamberVector>,
}

/// Running max of support values over a stream of points.
///
/// Each direction remembers the point attaining its max; ties go to the
/// smaller key, so merging partial accumulators in any order gives the same
/// body.
#[derive(Debug, Clone)]
pub struct SupportAccumulator {
    dirset: Arc<DirectionSet>,
    h: Vec<f64>,
    best: Vec<Option<(u64, usize)>>,
    points: Vec<(u64, ChamberVector)>,
    count: u64,
}

impl SupportAccumulator {
    pub fn new(dirset: Arc<DirectionSet>) -> Self {
        let m = dirset.resolution();
        SupportAccumulator {
            dirset,
            h: vec![f64::NEG_INFINITY; m],
            best: vec![None; m],
            points: Vec::new(),
            count: 0,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn offer(&mut self, key: u64, point: &ChamberVector) -> Result<()> {
        if point.dim() != self.dirset.dim() {
            return Err(Error::DimMismatch {
                expected: self.dirset.dim(),
                found: point.dim(),
            });
        }
        let mut slot: Option<usize> = None;
        for (j, u) in self.dirset.dirs().iter().enumerate() {
            let v = point.dot(u);
            let wins = match self.best[j] {
                None => true,
                Some((k, _)) => v > self.h[j] || (v == self.h[j] && key < k),
            };
            if wins {
                let idx = *slot.get_or_insert_with(|| {
                    self.points.push((key, point.clone()));
                    self.points.len() - 1
                });
                self.h[j] = v;
                self.best[j] = Some((key, idx));
            }
        }
        Ok(())
    }

    /// Adds a point; `key` orders ties (smaller wins).
    pub fn push(&mut self, key: u64, point: &ChamberVector) -> Result<()> {
        self.count += 1;
        self.offer(key, point)?;
        if self.points.len() > 4 * self.h.len() + 64 {
            self.compact();
        }
        Ok(())
    }

    /// Associative, commutative max-merge.
    pub fn merge(mut self, other: SupportAccumulator) -> Result<SupportAccumulator> {
        if !same_dirset(&self.dirset, &other.dirset) {
            return Err(Error::DirsetMismatch);
        }
        let count = self.count + other.count;
        for (key, p) in other.witness_points() {
            self.offer(key, &p)?;
        }
        self.count = count;
        self.compact();
        Ok(self)
    }

    fn witness_points(&self) -> Vec<(u64, ChamberVector)> {
        let mut idx: Vec<(u64, usize)> = self.best.iter().flatten().copied().collect();
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|(_, i)| self.points[i].clone()).collect()
    }

    fn compact(&mut self) {
        let kept = self.witness_points();
        let h = std::mem::take(&mut self.h);
        let best_keys: Vec<Option<u64>> = self.best.iter().map(|b| b.map(|(k, _)| k)).collect();
        self.points = kept;
        self.best = best_keys
            .iter()
            .map(|k| k.map(|k| (k, self.points.iter().position(|(pk, _)| *pk == k).unwrap())))
            .collect();
        self.h = h;
    }

    pub fn finish(self) -> Result<SupportBody> {
        if self.best.iter().any(|b| b.is_none()) {
            return Err(Error::EmptyInput);
        }
        let witnesses = self.witness_points().into_iter().map(|(_, p)| p).collect();
        Ok(SupportBody {
            dirset: self.dirset,
            h: self.h,
            witnesses,
        })
    }
}

fn same_dirset(a: &Arc<DirectionSet>, b: &Arc<DirectionSet>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Support body of the convex hull of `pts`.
pub fn body_from_points(pts: &[ChamberVector], dirset: Arc<DirectionSet>) -> Result<SupportBody> {
    if pts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut acc = SupportAccumulator::new(dirset);
    for (i, p) in pts.iter().enumerate() {
        acc.push(i as u64, p)?;
    }
    acc.finish()
}

/// `max_j |h_A,j − h_B,j|`, the Hausdorff distance of the two outer bodies
/// seen through the direction set. For the true convex bodies the error of
/// this value shrinks with the direction resolution.
pub fn hausdorff_distance(a: &SupportBody, b: &SupportBody) -> Result<f64> {
    if !same_dirset(&a.dirset, &b.dirset) {
        return Err(Error::DirsetMismatch);
    }
    Ok(a
        .h
        .iter()
        .zip(&b.h)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Outer membership test: `⟨x, u_j⟩ ≤ h_j + tol` for every direction.
pub fn contains(body: &SupportBody, x: &ChamberVector, tol: f64) -> bool {
    body.dirset
        .dirs()
        .iter()
        .zip(&body.h)
        .all(|(u, h)| x.dot(u) <= h + tol)
}

/// `min_j (h_j − ⟨x, u_j⟩)`: positive means `x` is strictly inside the
/// outer body by at least that much along every direction.
pub fn interior_margin(body: &SupportBody, x: &ChamberVector) -> f64 {
    body.dirset
        .dirs()
        .iter()
        .zip(&body.h)
        .map(|(u, h)| h - x.dot(u))
        .fold(f64::INFINITY, f64::min)
}

/// Trace of the cone over the body on the unit sphere: every witness is
/// pushed radially to norm one (witnesses at the origin are dropped) and
/// the hull of the results is returned.
pub fn asymptotic_cone(body: &SupportBody) -> Result<SupportBody> {
    let pts: Vec<ChamberVector> = body
        .witnesses
        .iter()
        .filter_map(|p| {
            let n = p.norm();
            (n > 1e-12).then(|| p.scaled(1.0 / n))
        })
        .collect();
    if pts.is_empty() {
        return Err(Error::DegenerateBody);
    }
    body_from_points(&pts, body.dirset.clone())
}

impl SupportBody {
    pub fn dirset(&self) -> &Arc<DirectionSet> {
        &self.dirset
    }

    pub fn dim(&self) -> usize {
        self.dirset.dim()
    }

    pub fn support_values(&self) -> &[f64] {
        &self.h
    }

    pub fn witnesses(&self) -> &[ChamberVector] {
        &self.witnesses
    }

    /// Support value `sup_{x∈B} ⟨x, u⟩` for any `u` in the hyperplane.
    /// Exact when `u` is parallel to a stored direction; otherwise taken
    /// over the retained witnesses, which is an inner bound.
    pub fn support_value(&self, u: &[f64]) -> f64 {
        let n = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if let Some(j) = self.dirset.find(u) {
            return self.h[j] * n;
        }
        self.witnesses
            .iter()
            .map(|p| p.dot(u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minkowski sum with the ball of radius `eps` (as seen by the
    /// direction set).
    pub fn dilated(&self, eps: f64) -> SupportBody {
        SupportBody {
            h: self.h.iter().map(|h| h + eps).collect(),
            ..self.clone()
        }
    }

    /// Homothety by `c > 0`.
    pub fn scaled(&self, c: f64) -> SupportBody {
        SupportBody {
            dirset: self.dirset.clone(),
            h: self.h.iter().map(|h| h * c).collect(),
            witnesses: self.witnesses.iter().map(|p| p.scaled(c)).collect(),
        }
    }

    /// Largest witness norm; the body's radius about the origin.
    pub fn radius(&self) -> f64 {
        self.witnesses.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> BodyJson {
        BodyJson {
            d: self.dirset.dim(),
            m: self.dirset.requested(),
            seed: self.dirset.seed(),
            h: self.h.clone(),
            witnesses: self.witnesses.iter().map(|p| p.coords().to_vec()).collect(),
        }
    }

    pub fn from_json(json: &BodyJson) -> Result<SupportBody> {
        let dirset = Arc::new(make_directions(json.d, json.m, json.seed)?);
        if json.h.len() != dirset.resolution() {
            return Err(Error::parse(
                "h",
                format!(
                    "expected {} support values, found {}",
                    dirset.resolution(),
                    json.h.len()
                ),
            ));
        }
        let witnesses = json
            .witnesses
            .iter()
            .map(|w| {
                if w.len() == json.d {
                    Ok(ChamberVector::new(w.clone()))
                } else {
                    Err(Error::DimMismatch {
                        expected: json.d,
                        found: w.len(),
                    })
                }
            })
            .collect::<Result<_>>()?;
        Ok(SupportBody {
            dirset,
            h: json.h.clone(),
            witnesses,
        })
    }
}

/// On-disk form of a [`SupportBody`]; the directions are regenerated from
/// `(d, m, seed)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyJson {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    pub h: Vec<f64>,
    pub witnesses: Vec<Vec<f64>>,
}
