use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::poly::{enumerate_subsets, MultilinearPoly, SubsetKey};
use crate::scalar::Scalar;
use crate::sdp::min_eigenvalue;

/// Positions of all subsets of `[n]` up to a maximum size, in canonical order.
#[derive(Debug)]
pub struct MomentIndex {
    n: usize,
    max_size: usize,
    keys: Vec<SubsetKey>,
    pos: HashMap<SubsetKey, usize>,
}

impl MomentIndex {
    pub fn new(n: usize, max_size: usize) -> Self {
        let keys: Vec<SubsetKey> = enumerate_subsets(n, max_size).collect();
        let pos = keys
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        MomentIndex {
            n,
            max_size,
            keys,
            pos,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[SubsetKey] {
        &self.keys
    }

    pub fn position(&self, key: &SubsetKey) -> Option<usize> {
        self.pos.get(key).copied()
    }

    pub fn require(&self, key: &SubsetKey) -> Result<usize> {
        self.position(key)
            .ok_or_else(|| Error::MissingMoment(key.to_string()))
    }
}

/// Moment vector `y` indexed by all subsets of size at most `2r`, with `y_∅ = 1`.
#[derive(Clone, Debug)]
pub struct MomentVector<T> {
    round: usize,
    index: Arc<MomentIndex>,
    values: Vec<T>,
}

impl<T: Scalar> MomentVector<T> {
    pub fn new(index: Arc<MomentIndex>, round: usize, values: Vec<T>) -> Result<Self> {
        if index.max_size() < (2 * round).min(index.n()) {
            return Err(Error::DimensionMismatch(format!(
                "index covers subsets up to {}, round {round} needs {}",
                index.max_size(),
                2 * round
            )));
        }
        if values.len() != index.len() {
            return Err(Error::LengthMismatch {
                expected: index.len(),
                got: values.len(),
            });
        }
        if !values[0].is_one() {
            return Err(Error::InvalidParameter(format!(
                "y_∅ must be 1, got {:?}",
                values[0]
            )));
        }
        Ok(MomentVector {
            round,
            index,
            values,
        })
    }

    pub fn from_fn(n: usize, round: usize, mut f: impl FnMut(&SubsetKey) -> T) -> Result<Self> {
        let index = Arc::new(MomentIndex::new(n, 2 * round));
        let values = index.keys().iter().map(&mut f).collect();
        Self::new(index, round, values)
    }

    /// `y_S = ∏_{i∈S} x_i`.
    pub fn rank1_lift(x: &[bool], round: usize) -> Self {
        Self::from_fn(x.len(), round, |s| {
            if s.vars().iter().all(|&v| x[v as usize]) {
                T::one()
            } else {
                T::zero()
            }
        })
        .expect("rank-1 lift has y_∅ = 1")
    }

    /// `Σ_k w_k y^(k)`; the weights must sum to one.
    pub fn convex_combination(weights: &[T], parts: &[MomentVector<T>]) -> Result<Self> {
        if weights.len() != parts.len() || parts.is_empty() {
            return Err(Error::LengthMismatch {
                expected: parts.len(),
                got: weights.len(),
            });
        }
        let first = &parts[0];
        let mut values = vec![T::zero(); first.values.len()];
        for (w, p) in weights.iter().zip(parts) {
            if p.values.len() != values.len() {
                return Err(Error::LengthMismatch {
                    expected: values.len(),
                    got: p.values.len(),
                });
            }
            for (acc, v) in values.iter_mut().zip(&p.values) {
                *acc = acc.clone() + w.clone() * v.clone();
            }
        }
        Self::new(first.index.clone(), first.round, values)
    }

    pub fn n(&self) -> usize {
        self.index.n()
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn index(&self) -> &Arc<MomentIndex> {
        &self.index
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, key: &SubsetKey) -> Result<&T> {
        Ok(&self.values[self.index.require(key)?])
    }

    pub fn to_f64(&self) -> MomentVector<f64> {
        MomentVector {
            round: self.round,
            index: self.index.clone(),
            values: self.values.iter().map(Scalar::to_f64_lossy).collect(),
        }
    }

    /// Moment matrix over subsets of size at most `level`: entry `(S,T) = y_{S∪T}`.
    pub fn moment_matrix(&self, level: usize) -> Result<MomentMatrix<T>> {
        if level > self.round {
            return Err(Error::DegreeTooLarge {
                degree: level,
                round: self.round,
            });
        }
        let basis: Vec<SubsetKey> = enumerate_subsets(self.n(), level).collect();
        let k = basis.len();
        let mut entries = Vec::with_capacity(k * k);
        for a in &basis {
            for b in &basis {
                entries.push(self.get(&a.union(b))?.clone());
            }
        }
        Ok(MomentMatrix { basis, entries })
    }

    /// `(P*y)_S = Σ_T P(T)·y_{S∪T}` for every `|S| ≤ 2r − deg P`.
    pub fn shift(&self, p: &MultilinearPoly) -> Result<BTreeMap<SubsetKey, T>> {
        let d = p.degree();
        let top = (2 * self.round).min(self.n());
        if d > 2 * self.round {
            return Err(Error::DegreeTooLarge {
                degree: d,
                round: self.round,
            });
        }
        let coeffs: Vec<(&SubsetKey, T)> =
            p.terms().map(|(k, c)| (k, T::from_rational(c))).collect();
        let mut out = BTreeMap::new();
        for s in enumerate_subsets(self.n(), top.saturating_sub(d)) {
            let mut acc = T::zero();
            for (t, c) in &coeffs {
                acc = acc + c.clone() * self.get(&s.union(t))?.clone();
            }
            out.insert(s, acc);
        }
        Ok(out)
    }

    /// Localizing matrix `M(P*y)` over subsets of size at most `level`.
    pub fn localizing_matrix(&self, p: &MultilinearPoly, level: usize) -> Result<MomentMatrix<T>> {
        if 2 * level + p.degree() > 2 * self.round {
            return Err(Error::DegreeTooLarge {
                degree: p.degree(),
                round: self.round,
            });
        }
        let coeffs: Vec<(&SubsetKey, T)> =
            p.terms().map(|(k, c)| (k, T::from_rational(c))).collect();
        let basis: Vec<SubsetKey> = enumerate_subsets(self.n(), level).collect();
        let mut entries = Vec::with_capacity(basis.len() * basis.len());
        for a in &basis {
            for b in &basis {
                let u = a.union(b);
                let mut acc = T::zero();
                for (t, c) in &coeffs {
                    acc = acc + c.clone() * self.get(&u.union(t))?.clone();
                }
                entries.push(acc);
            }
        }
        Ok(MomentMatrix { basis, entries })
    }
}

/// Dense symmetric matrix whose rows and columns are indexed by subsets.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentMatrix<T> {
    basis: Vec<SubsetKey>,
    entries: Vec<T>,
}

impl<T: Scalar> MomentMatrix<T> {
    pub fn basis(&self) -> &[SubsetKey] {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.basis.len() + j]
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |i, j| self.get(i, j).to_f64_lossy())
    }

    /// Largest gap between two entries whose row/column subsets have the same union.
    pub fn union_inconsistency(&self) -> f64 {
        let mut seen: HashMap<SubsetKey, &T> = HashMap::new();
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in self.basis.iter().enumerate() {
                let v = self.get(i, j);
                let u = a.union(b);
                match seen.get(&u) {
                    Some(first) => {
                        let d = (v.clone() - (*first).clone()).abs().to_f64_lossy();
                        worst = worst.max(d);
                    }
                    None => {
                        seen.insert(u, v);
                    }
                }
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.to_dmatrix())
    }
}
