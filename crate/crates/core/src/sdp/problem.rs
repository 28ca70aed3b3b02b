use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Sense;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// Dense symmetric block constrained to be positive semidefinite.
    Psd,
    /// Diagonal block with nonnegative entries (an LP block).
    Diagonal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub size: usize,
}

/// One entry of a symmetric coefficient matrix. `i ≤ j`; an off-diagonal entry
/// stands for both `(i,j)` and `(j,i)`, so it contributes `2·value·X_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

impl Term {
    pub fn new(block: usize, i: usize, j: usize, value: f64) -> Self {
        Term {
            block,
            i: i.min(j),
            j: i.max(j),
            value,
        }
    }

    /// Multiplier of `X_ij` in `⟨A, X⟩`.
    pub fn weight(&self) -> f64 {
        if self.i == self.j {
            1.0
        } else {
            2.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintKind {
    Eq,
    Ge,
    Le,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<Term>,
    pub kind: ConstraintKind,
    pub rhs: f64,
}

/// `optimize ⟨C, X⟩ s.t. ⟨A_k, X⟩ (=,≥,≤) b_k, X = diag(X_1, …) in the product cone`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<Block>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<Term>,
    pub sense: Sense,
}

impl SdpProblem {
    pub fn validate(&self) -> Result<()> {
        let check = |t: &Term| -> Result<()> {
            let b = self.blocks.get(t.block).ok_or_else(|| {
                Error::DimensionMismatch(format!("block {} of {}", t.block, self.blocks.len()))
            })?;
            if t.i > t.j || t.j >= b.size {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({},{}) in block {} of size {}",
                    t.i, t.j, t.block, b.size
                )));
            }
            if b.kind == BlockKind::Diagonal && t.i != t.j {
                return Err(Error::DimensionMismatch(format!(
                    "off-diagonal entry ({},{}) in diagonal block {}",
                    t.i, t.j, t.block
                )));
            }
            if !t.value.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite coefficient {}",
                    t.value
                )));
            }
            Ok(())
        };
        for (k, c) in self.constraints.iter().enumerate() {
            if c.terms.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "constraint {k} has no terms"
                )));
            }
            c.terms.iter().try_for_each(check)?;
        }
        self.objective.iter().try_for_each(check)
    }

    /// Rewrites inequalities with a nonnegative slack in an appended diagonal block.
    pub fn to_equality_form(&self) -> SdpProblem {
        let slacks: Vec<usize> = self
            .constraints
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind != ConstraintKind::Eq)
            .map(|(k, _)| k)
            .collect();
        let mut out = self.clone();
        if slacks.is_empty() {
            return out;
        }
        let block = out.blocks.len();
        out.blocks.push(Block {
            kind: BlockKind::Diagonal,
            size: slacks.len(),
        });
        for (s, &k) in slacks.iter().enumerate() {
            let c = &mut out.constraints[k];
            let sign = if c.kind == ConstraintKind::Ge {
                -1.0
            } else {
                1.0
            };
            c.terms.push(Term::new(block, s, s, sign));
            c.kind = ConstraintKind::Eq;
        }
        out
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }
}

/// Block-diagonal primal point; diagonal blocks are stored as full matrices too.
pub type BlockMatrices = Vec<nalgebra::DMatrix<f64>>;

pub fn evaluate_terms(terms: &[Term], x: &BlockMatrices) -> f64 {
    terms
        .iter()
        .map(|t| t.weight() * t.value * x[t.block][(t.i, t.j)])
        .sum()
}

/// Signed violation of each constraint at `x` (zero when satisfied).
pub fn constraint_violations(p: &SdpProblem, x: &BlockMatrices) -> Vec<f64> {
    p.constraints
        .iter()
        .map(|c| {
            let lhs = evaluate_terms(&c.terms, x);
            match c.kind {
                ConstraintKind::Eq => lhs - c.rhs,
                ConstraintKind::Ge => (c.rhs - lhs).max(0.0),
                ConstraintKind::Le => (lhs - c.rhs).max(0.0),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn inequality_becomes_slack() {
        let p = SdpProblem {
            blocks: vec![Block {
                kind: BlockKind::Psd,
                size: 2,
            }],
            constraints: vec![
                Constraint {
                    terms: vec![Term::new(0, 1, 0, 0.5)],
                    kind: ConstraintKind::Ge,
                    rhs: 1.0,
                },
                Constraint {
                    terms: vec![Term::new(0, 0, 0, 1.0)],
                    kind: ConstraintKind::Eq,
                    rhs: 1.0,
                },
            ],
            objective: vec![],
            sense: Sense::Minimize,
        };
        p.validate().unwrap();
        let q = p.to_equality_form();
        assert_eq!(q.blocks.len(), 2);
        assert!(q.constraints.iter().all(|c| c.kind == ConstraintKind::Eq));
        let x = vec![
            DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 10.0]),
            DMatrix::from_row_slice(1, 1, &[2.0]),
        ];
        // X_01 = 3 contributes 2·0.5·3 = 3; slack 2 makes it 1
        assert_eq!(constraint_violations(&q, &x), vec![0.0, 0.0]);
        assert_eq!(constraint_violations(&p, &x[..1].to_vec()), vec![0.0, 0.0]);
    }

    #[test]
    fn validation_rejects_bad_indices() {
        let mut p = SdpProblem {
            blocks: vec![Block {
                kind: BlockKind::Diagonal,
                size: 2,
            }],
            constraints: vec![Constraint {
                terms: vec![Term::new(0, 0, 1, 1.0)],
                kind: ConstraintKind::Eq,
                rhs: 0.0,
            }],
            objective: vec![],
            sense: Sense::Minimize,
        };
        assert!(p.validate().is_err());
        p.constraints[0].terms = vec![];
        assert!(p.validate().is_err());
        p.constraints[0].terms = vec![Term::new(1, 0, 0, 1.0)];
        assert!(p.validate().is_err());
    }
}
