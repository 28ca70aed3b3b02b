use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::moments::MomentVector;
use crate::error::{Error, Result};
use crate::poly::SubsetKey;
use crate::scalar::Scalar;

/// Explicit vectors `Ū_S`, one column per basis subset.
#[derive(Clone, Debug)]
pub struct GramSolution {
    basis: Vec<SubsetKey>,
    pos: HashMap<SubsetKey, usize>,
    vectors: DMatrix<f64>,
}

impl GramSolution {
    /// `vectors` has one column per entry of `basis`.
    pub fn from_vectors(basis: Vec<SubsetKey>, vectors: DMatrix<f64>) -> Result<Self> {
        if vectors.ncols() != basis.len() {
            return Err(Error::LengthMismatch {
                expected: basis.len(),
                got: vectors.ncols(),
            });
        }
        let pos: HashMap<SubsetKey, usize> = basis
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, k)| (k, i))
            .collect();
        if pos.len() != basis.len() {
            return Err(Error::InvalidParameter(
                "duplicate subset in Gram basis".into(),
            ));
        }
        if !pos.contains_key(&SubsetKey::empty()) {
            return Err(Error::Uncovered(SubsetKey::empty().to_string()));
        }
        Ok(GramSolution {
            basis,
            pos,
            vectors,
        })
    }

    /// Factors a PSD inner-product matrix `G = ŪᵀŪ`; eigenvalues in `[−tol, 0)` are clipped.
    pub fn from_inner_products(
        basis: Vec<SubsetKey>,
        gram: &DMatrix<f64>,
        tol: f64,
    ) -> Result<Self> {
        let eig = gram.clone().symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
                tol,
            });
        }
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > 0.0)
            .collect();
        let k = gram.nrows();
        let mut vectors = DMatrix::zeros(keep.len(), k);
        for (row, &e) in keep.iter().enumerate() {
            let s = eig.eigenvalues[e].sqrt();
            for c in 0..k {
                vectors[(row, c)] = s * eig.eigenvectors[(c, e)];
            }
        }
        Self::from_vectors(basis, vectors)
    }

    pub fn basis(&self) -> &[SubsetKey] {
        &self.basis
    }

    pub fn dimension(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn position(&self, s: &SubsetKey) -> Option<usize> {
        self.pos.get(s).copied()
    }

    pub fn vector(&self, s: &SubsetKey) -> Option<DVector<f64>> {
        self.position(s)
            .map(|i| self.vectors.column(i).into_owned())
    }

    pub fn inner_at(&self, i: usize, j: usize) -> f64 {
        self.vectors.column(i).dot(&self.vectors.column(j))
    }

    pub fn inner(&self, a: &SubsetKey, b: &SubsetKey) -> Option<f64> {
        Some(self.inner_at(self.position(a)?, self.position(b)?))
    }

    /// Adds `delta` to `Ū_s`, growing the ambient dimension if `delta` is longer.
    pub fn perturbed(&self, s: &SubsetKey, delta: &DVector<f64>) -> Result<Self> {
        let i = self
            .position(s)
            .ok_or_else(|| Error::Uncovered(s.to_string()))?;
        let dim = self.dimension().max(delta.len());
        let mut v = self.vectors.clone().resize_vertically(dim, 0.0);
        for (r, d) in delta.iter().enumerate() {
            v[(r, i)] += d;
        }
        Self::from_vectors(self.basis.clone(), v)
    }
}

/// Factors `M(y)` at `level` into vectors with `⟨Ū_S,Ū_T⟩ = y_{S∪T}`.
pub fn gram_from_moments<T: Scalar>(
    y: &MomentVector<T>,
    level: usize,
    tol: f64,
) -> Result<GramSolution> {
    let m = y.moment_matrix(level)?;
    GramSolution::from_inner_products(m.basis().to_vec(), &m.to_dmatrix(), tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairViolation {
    pub a: SubsetKey,
    pub b: SubsetKey,
    pub observed: f64,
    pub expected: f64,
}

impl PairViolation {
    pub fn gap(&self) -> f64 {
        (self.observed - self.expected).abs()
    }

    pub fn involves(&self, s: &SubsetKey) -> bool {
        self.a == *s || self.b == *s
    }
}

#[derive(Clone, Debug, Default)]
pub struct VectorReport {
    /// Pairs whose inner product differs from `‖Ū_{A∪B}‖²` (or, when `A∪B` is
    /// outside the basis, from the first pair seen with the same union).
    pub union_violations: Vec<PairViolation>,
    /// Pairs with inner product below `−tol`.
    pub negative_inner: Vec<PairViolation>,
    /// `|‖Ū_∅‖² − 1|`
    pub empty_norm_deviation: f64,
    /// Largest union-consistency gap seen, whether or not it exceeded `tol`.
    pub max_union_gap: f64,
    pub tol: f64,
}

impl VectorReport {
    pub fn is_clean(&self) -> bool {
        self.union_violations.is_empty()
            && self.negative_inner.is_empty()
            && self.empty_norm_deviation <= self.tol
    }

    /// Subsets named by any violation.
    pub fn offending_subsets(&self) -> Vec<SubsetKey> {
        let mut out: Vec<SubsetKey> = self
            .union_violations
            .iter()
            .chain(&self.negative_inner)
            .flat_map(|v| [v.a.clone(), v.b.clone()])
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

pub fn verify_vector_constraints(g: &GramSolution, tol: f64) -> VectorReport {
    let mut report = VectorReport {
        tol,
        ..VectorReport::default()
    };
    let e = g.position(&SubsetKey::empty()).expect("basis contains ∅");
    report.empty_norm_deviation = (g.inner_at(e, e) - 1.0).abs();
    let mut first_by_union: HashMap<SubsetKey, f64> = HashMap::new();
    let k = g.basis.len();
    for i in 0..k {
        for j in i..k {
            let (a, b) = (&g.basis[i], &g.basis[j]);
            let ip = g.inner_at(i, j);
            let u = a.union(b);
            let expected = match g.position(&u) {
                Some(p) => Some(g.inner_at(p, p)),
                None => match first_by_union.get(&u) {
                    Some(&v) => Some(v),
                    None => {
                        first_by_union.insert(u, ip);
                        None
                    }
                },
            };
            if let Some(expected) = expected {
                let gap = (ip - expected).abs();
                report.max_union_gap = report.max_union_gap.max(gap);
                if gap > tol {
                    report.union_violations.push(PairViolation {
                        a: a.clone(),
                        b: b.clone(),
                        observed: ip,
                        expected,
                    });
                }
            }
            if ip < -tol {
                report.negative_inner.push(PairViolation {
                    a: a.clone(),
                    b: b.clone(),
                    observed: ip,
                    expected: 0.0,
                });
            }
        }
    }
    report
}
