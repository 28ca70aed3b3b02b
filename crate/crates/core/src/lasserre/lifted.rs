use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::moments::{MomentIndex, MomentVector};
use crate::error::{Error, Result};
use crate::poly::{
    enumerate_subsets, BinaryProgram, ConstraintKind, MultilinearPoly, Sense, SubsetKey,
};
use crate::scalar::{Rational, Scalar};
use crate::sdp::{
    min_eigenvalue, solve_with, Block, BlockKind, BlockMatrices, Constraint,
    ConstraintKind as RowKind, SdpProblem, SdpSolution, SolverOptions, Term,
};

/// A PSD block whose entry `(S,T)` is `Σ_U c_U y_{S∪T∪U}` (`c = 1` on `∅` when no localizer).
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedBlock {
    pub basis: Vec<SubsetKey>,
    pub localizer: Option<MultilinearPoly>,
}

/// `Σ_K c_K y_K = rhs` over moment positions.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftedMeta {
    pub round: usize,
    pub source: String,
    /// Balance fraction (`τ′` or `τ`) for members of a Ψ family.
    #[serde(with = "crate::scalar::serde_rational_opt")]
    pub balance: Option<Rational>,
}

/// Moment-space relaxation: variables are `y_K` for `|K| ≤ 2r`, with `y_∅ = 1`.
#[derive(Clone, Debug)]
pub struct LiftedSdp {
    pub index: Arc<MomentIndex>,
    pub blocks: Vec<LiftedBlock>,
    pub equalities: Vec<LinearRow>,
    /// Every moment is nonnegative (pairwise inner products of the vectors are ≥ 0).
    pub nonnegative: bool,
    pub objective: Vec<(usize, Rational)>,
    pub sense: Sense,
    pub meta: LiftedMeta,
}

#[derive(Clone, Debug)]
pub struct LiftEvaluation<T> {
    pub objective: T,
    pub max_equality_violation: T,
    pub min_eigenvalues: Vec<f64>,
    pub min_moment: T,
}

impl<T: Scalar> LiftEvaluation<T> {
    pub fn is_feasible(&self, tol: f64) -> bool {
        self.max_equality_violation.to_f64_lossy() <= tol
            && self.min_eigenvalues.iter().all(|&l| l >= -tol)
            && self.min_moment.to_f64_lossy() >= -tol
    }
}

/// Relaxation of `prog` at round `r`: `M(y) ⪰ 0` plus either `M(Q*y) ⪰ 0` or
/// the linear rows `(Q*y)_S = 0` for an equality constraint.
pub fn build_lifted_sdp(prog: &BinaryProgram, r: usize) -> Result<LiftedSdp> {
    let d = prog.degree();
    if r < d {
        return Err(Error::DegreeTooLarge {
            degree: d,
            round: r,
        });
    }
    let n = prog.n;
    let index = Arc::new(MomentIndex::new(n, 2 * r));
    let mut blocks = vec![LiftedBlock {
        basis: enumerate_subsets(n, r).collect(),
        localizer: None,
    }];
    let dq = prog.constraint.degree();
    let mut equalities = Vec::new();
    match prog.kind {
        ConstraintKind::NonNegative => blocks.push(LiftedBlock {
            basis: enumerate_subsets(n, r - dq.div_ceil(2)).collect(),
            localizer: Some(prog.constraint.clone()),
        }),
        ConstraintKind::Equality => {
            for s in enumerate_subsets(n, (2 * r).saturating_sub(dq)) {
                let row = shifted_row(&index, &prog.constraint, &s, &Rational::zero())?;
                if !row.coeffs.is_empty() {
                    equalities.push(row);
                }
            }
        }
    }
    let objective = poly_row(&index, &prog.objective)?;
    Ok(LiftedSdp {
        index,
        blocks,
        equalities,
        nonnegative: false,
        objective,
        sense: prog.sense,
        meta: LiftedMeta {
            round: r,
            source: "binary-program".into(),
            balance: None,
        },
    })
}

/// Row for `(P*y)_S = rhs`, merged over coinciding unions.
pub(crate) fn shifted_row(
    index: &MomentIndex,
    p: &MultilinearPoly,
    s: &SubsetKey,
    rhs: &Rational,
) -> Result<LinearRow> {
    let mut acc: HashMap<usize, Rational> = HashMap::new();
    for (t, c) in p.terms() {
        let pos = index.require(&s.union(t))?;
        *acc.entry(pos).or_insert_with(Rational::zero) += c;
    }
    let mut coeffs: Vec<(usize, Rational)> =
        acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    coeffs.sort_by_key(|e| e.0);
    Ok(LinearRow {
        coeffs,
        rhs: rhs.clone(),
    })
}

pub(crate) fn poly_row(index: &MomentIndex, p: &MultilinearPoly) -> Result<Vec<(usize, Rational)>> {
    Ok(shifted_row(index, p, &SubsetKey::empty(), &Rational::zero())?.coeffs)
}

impl LiftedSdp {
    pub fn round(&self) -> usize {
        self.meta.round
    }

    pub fn num_moments(&self) -> usize {
        self.index.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.basis.len()).collect()
    }

    fn block_entry<T: Scalar>(
        &self,
        b: &LiftedBlock,
        y: &MomentVector<T>,
        u: &SubsetKey,
    ) -> Result<T> {
        match &b.localizer {
            None => Ok(y.get(u)?.clone()),
            Some(q) => {
                let mut acc = T::zero();
                for (t, c) in q.terms() {
                    acc = acc + T::from_rational(c) * y.get(&u.union(t))?.clone();
                }
                Ok(acc)
            }
        }
    }

    /// Checks every constraint at `y` (exact for rational moments; eigenvalues in f64).
    pub fn evaluate<T: Scalar>(&self, y: &MomentVector<T>) -> Result<LiftEvaluation<T>> {
        if y.values().len() != self.index.len() {
            return Err(Error::LengthMismatch {
                expected: self.index.len(),
                got: y.values().len(),
            });
        }
        let vals = y.values();
        let row_value = |coeffs: &[(usize, Rational)]| -> T {
            coeffs.iter().fold(T::zero(), |a, (k, c)| {
                a + T::from_rational(c) * vals[*k].clone()
            })
        };
        let mut worst = T::zero();
        for row in &self.equalities {
            let v = (row_value(&row.coeffs) - T::from_rational(&row.rhs)).abs();
            if v > worst {
                worst = v;
            }
        }
        let mut min_eigenvalues = Vec::with_capacity(self.blocks.len());
        for b in &self.blocks {
            let k = b.basis.len();
            let mut m = DMatrix::zeros(k, k);
            for i in 0..k {
                for j in i..k {
                    let v = self
                        .block_entry(b, y, &b.basis[i].union(&b.basis[j]))?
                        .to_f64_lossy();
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            min_eigenvalues.push(min_eigenvalue(&m));
        }
        let min_moment = if self.nonnegative {
            vals.iter()
                .cloned()
                .fold(T::one(), |a, v| if v < a { v } else { a })
        } else {
            T::zero()
        };
        Ok(LiftEvaluation {
            objective: row_value(&self.objective),
            max_equality_violation: worst,
            min_eigenvalues,
            min_moment,
        })
    }

    /// First `(i ≤ j)` pair of the moment block whose union is each moment.
    fn representatives(&self) -> Vec<(usize, usize)> {
        let basis = &self.blocks[0].basis;
        let mut rep = vec![(usize::MAX, usize::MAX); self.index.len()];
        for i in 0..basis.len() {
            for j in i..basis.len() {
                if let Some(k) = self.index.position(&basis[i].union(&basis[j])) {
                    if rep[k].0 == usize::MAX {
                        rep[k] = (i, j);
                    }
                }
            }
        }
        rep
    }

    /// Standard-form SDP: block 0 is `M(y)`, followed by localizer blocks and,
    /// when moments are nonnegative, a diagonal block holding a copy of each moment.
    pub fn to_sdp_problem(&self) -> Result<SdpProblem> {
        let rep = self.representatives();
        if let Some(k) = rep.iter().position(|r| r.0 == usize::MAX) {
            return Err(Error::MissingMoment(format!(
                "{} is not a union of two basis subsets",
                self.index.keys()[k]
            )));
        }
        let omega = |(i, j): (usize, usize)| if i == j { 1.0 } else { 2.0 };
        let moment_term = |k: usize, coef: f64| {
            let (i, j) = rep[k];
            Term::new(0, i, j, coef / omega((i, j)))
        };
        let eq = |terms: Vec<Term>, rhs: f64| Constraint {
            terms,
            kind: RowKind::Eq,
            rhs,
        };
        let to_f64 = |c: &Rational| c.to_f64().unwrap_or(f64::NAN);

        let mut blocks = Vec::new();
        let mut constraints = Vec::new();
        for (b, blk) in self.blocks.iter().enumerate() {
            let k = blk.basis.len();
            blocks.push(Block {
                kind: BlockKind::Psd,
                size: k,
            });
            let mut first: HashMap<SubsetKey, (usize, usize)> = HashMap::new();
            for i in 0..k {
                for j in i..k {
                    let u = blk.basis[i].union(&blk.basis[j]);
                    match first.get(&u) {
                        Some(&r) => {
                            constraints.push(eq(
                                vec![
                                    Term::new(b, i, j, 1.0 / omega((i, j))),
                                    Term::new(b, r.0, r.1, -1.0 / omega(r)),
                                ],
                                0.0,
                            ));
                        }
                        None => {
                            first.insert(u.clone(), (i, j));
                            if let Some(q) = &blk.localizer {
                                let row = shifted_row(&self.index, q, &u, &Rational::zero())?;
                                let mut terms = vec![Term::new(b, i, j, 1.0 / omega((i, j)))];
                                for (m, c) in &row.coeffs {
                                    terms.push(moment_term(*m, -to_f64(c)));
                                }
                                constraints.push(eq(terms, 0.0));
                            }
                        }
                    }
                }
            }
        }
        constraints.push(eq(vec![Term::new(0, 0, 0, 1.0)], 1.0));
        if self.nonnegative {
            let lp = blocks.len();
            blocks.push(Block {
                kind: BlockKind::Diagonal,
                size: self.index.len(),
            });
            for k in 0..self.index.len() {
                constraints.push(eq(
                    vec![Term::new(lp, k, k, 1.0), moment_term(k, -1.0)],
                    0.0,
                ));
            }
        }
        for row in &self.equalities {
            let terms: Vec<Term> = row
                .coeffs
                .iter()
                .map(|(k, c)| moment_term(*k, to_f64(c)))
                .collect();
            constraints.push(eq(terms, to_f64(&row.rhs)));
        }
        let objective = self
            .objective
            .iter()
            .map(|(k, c)| moment_term(*k, to_f64(c)))
            .collect();
        Ok(SdpProblem {
            blocks,
            constraints,
            objective,
            sense: self.sense,
        })
    }

    /// Reads `y` off the moment block of a standard-form solution.
    pub fn moments_from_blocks(&self, blocks: &BlockMatrices) -> Result<MomentVector<f64>> {
        let rep = self.representatives();
        let m = blocks
            .first()
            .ok_or_else(|| Error::DimensionMismatch("no blocks".into()))?;
        let mut values: Vec<f64> = rep.iter().map(|&(i, j)| m[(i, j)]).collect();
        values[0] = 1.0;
        MomentVector::new(self.index.clone(), self.meta.round, values)
    }

    pub fn objective_value<T: Scalar>(&self, y: &MomentVector<T>) -> T {
        self.objective.iter().fold(T::zero(), |a, (k, c)| {
            a + T::from_rational(c) * y.values()[*k].clone()
        })
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<LiftedSolve> {
        let problem = self.to_sdp_problem()?;
        let solution = solve_with(&problem, opts)?;
        let moments = self.moments_from_blocks(&solution.blocks)?;
        Ok(LiftedSolve {
            value: solution.objective,
            solution,
            moments,
        })
    }

    pub fn is_minimization(&self) -> bool {
        self.sense == Sense::Minimize
    }

    pub fn max_abs_objective_coefficient(&self) -> f64 {
        self.objective
            .iter()
            .map(|(_, c)| c.abs().to_f64().unwrap_or(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct LiftedSolve {
    pub value: f64,
    pub solution: SdpSolution,
    pub moments: MomentVector<f64>,
}
