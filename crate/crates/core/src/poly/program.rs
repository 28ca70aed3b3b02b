use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::subset::{canonical_key, SubsetKey};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, parse_rational, rat_int, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A multilinear polynomial `Σ_T c_T ∏_{j∈T} x_j` with exact rational coefficients.
///
/// Zero coefficients are never stored, so two polynomials are equal iff their
/// coefficient maps are equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultilinearPoly {
    n: usize,
    degree_bound: usize,
    coeffs: BTreeMap<SubsetKey, Rational>,
}

impl MultilinearPoly {
    pub fn zero(n: usize, degree_bound: usize) -> Self {
        MultilinearPoly {
            n,
            degree_bound,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n, 0);
        p.add_term_key(SubsetKey::empty(), c);
        p
    }

    /// `Σ_v x_v` over all `n` variables.
    pub fn sum_of_variables(n: usize) -> Self {
        let mut p = Self::zero(n, 1);
        for v in 0..n as u32 {
            p.add_term_key(SubsetKey::singleton(v), Rational::one());
        }
        p
    }

    /// Multilinear form of `Σ_{(u,v)∈E} (x_u − x_v)² = Σ (x_u + x_v − 2 x_u x_v)`.
    pub fn cut_polynomial(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut p = Self::zero(n, 2);
        for &(u, v) in edges {
            for &w in &[u, v] {
                if w as usize >= n {
                    return Err(Error::IndexOutOfRange {
                        index: w as usize,
                        len: n,
                    });
                }
            }
            p.add_term_key(SubsetKey::singleton(u), Rational::one());
            p.add_term_key(SubsetKey::singleton(v), Rational::one());
            p.add_term_key(SubsetKey::from_unsorted([u, v]), rat_int(-2));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    /// Size of the largest monomial with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.coeffs.keys().map(SubsetKey::len).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SubsetKey, &Rational)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, key: &SubsetKey) -> Rational {
        self.coeffs.get(key).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `c·∏_{j∈vars} x_j`; indices are canonicalized and range-checked.
    pub fn add_term(&mut self, vars: &[usize], c: Rational) -> Result<()> {
        let key = canonical_key(vars, self.n)?;
        self.add_term_key(key, c);
        Ok(())
    }

    pub fn add_term_key(&mut self, key: SubsetKey, c: Rational) {
        if c.is_zero() {
            return;
        }
        self.degree_bound = self.degree_bound.max(key.len());
        let entry = self.coeffs.entry(key);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `a·self + b·other`.
    pub fn linear_combination(&self, a: &Rational, other: &Self, b: &Rational) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let mut out = Self::zero(self.n, self.degree_bound.max(other.degree_bound));
        for (k, c) in &self.coeffs {
            out.add_term_key(k.clone(), a * c);
        }
        for (k, c) in &other.coeffs {
            out.add_term_key(k.clone(), b * c);
        }
        Ok(out)
    }

    pub fn scaled(&self, a: &Rational) -> Self {
        let mut out = Self::zero(self.n, self.degree_bound);
        for (k, c) in &self.coeffs {
            out.add_term_key(k.clone(), a * c);
        }
        out
    }

    /// Rebuilds the coefficient map from scratch; a fixpoint on canonical input.
    pub fn canonicalized(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree_bound);
        for (k, c) in &self.coeffs {
            out.add_term_key(
                SubsetKey::from_unsorted(k.vars().iter().copied()),
                c.clone(),
            );
        }
        out
    }

    pub fn eval(&self, x: &[bool]) -> Result<Rational> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut acc = Rational::zero();
        for (k, c) in &self.coeffs {
            if k.vars().iter().all(|&v| x[v as usize]) {
                acc += c;
            }
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            n: self.n,
            terms: self
                .coeffs
                .iter()
                .map(|(k, c)| TermJson {
                    vars: k.vars().to_vec(),
                    coeff: format_rational(c),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self> {
        let mut p = Self::zero(j.n, 0);
        for (idx, t) in j.terms.iter().enumerate() {
            if t.vars.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse {
                    line: idx,
                    message: format!("term vars {:?} not strictly ascending", t.vars),
                });
            }
            let coeff = parse_rational(&t.coeff).ok_or_else(|| Error::Parse {
                line: idx,
                message: format!("bad coefficient {:?}", t.coeff),
            })?;
            let vars: Vec<usize> = t.vars.iter().map(|&v| v as usize).collect();
            p.add_term(&vars, coeff)?;
        }
        Ok(p)
    }
}

/// JSON form: `{"n":int,"terms":[{"vars":[...],"coeff":"num/den"}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub vars: Vec<u32>,
    pub coeff: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `Q(x) ≥ 0`
    NonNegative,
    /// `Q(x) = 0`
    Equality,
}

/// Optimize `P(x)` over `x ∈ {0,1}^n` subject to a single polynomial constraint on `Q(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryProgram {
    pub n: usize,
    pub objective: MultilinearPoly,
    pub constraint: MultilinearPoly,
    pub kind: ConstraintKind,
    pub sense: Sense,
}

impl BinaryProgram {
    pub fn new(
        objective: MultilinearPoly,
        constraint: MultilinearPoly,
        kind: ConstraintKind,
        sense: Sense,
    ) -> Result<Self> {
        if objective.n() != constraint.n() {
            return Err(Error::LengthMismatch {
                expected: objective.n(),
                got: constraint.n(),
            });
        }
        Ok(BinaryProgram {
            n: objective.n(),
            objective,
            constraint,
            kind,
            sense,
        })
    }

    /// Largest monomial degree across objective and constraint.
    pub fn degree(&self) -> usize {
        self.objective.degree().max(self.constraint.degree())
    }

    pub fn is_feasible(&self, x: &[bool]) -> Result<bool> {
        let q = self.constraint.eval(x)?;
        Ok(match self.kind {
            ConstraintKind::NonNegative => !q.is_negative(),
            ConstraintKind::Equality => q.is_zero(),
        })
    }

    /// Exhaustive optimum over all feasible points (`n ≤ 24`), first optimum in
    /// counting order of the bit vector read as a little-endian integer.
    pub fn brute_force(&self) -> Result<Option<(Rational, Vec<bool>)>> {
        if self.n > 24 {
            return Err(Error::Guard(format!(
                "brute force limited to 24 variables, got {}",
                self.n
            )));
        }
        let mut best: Option<(Rational, Vec<bool>)> = None;
        for mask in 0u64..(1u64 << self.n) {
            let x: Vec<bool> = (0..self.n).map(|i| mask >> i & 1 == 1).collect();
            if !self.is_feasible(&x)? {
                continue;
            }
            let v = self.objective.eval(&x)?;
            let better = match &best {
                None => true,
                Some((b, _)) => match self.sense {
                    Sense::Minimize => v < *b,
                    Sense::Maximize => v > *b,
                },
            };
            if better {
                best = Some((v, x));
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn bits(mask: u32, n: usize) -> Vec<bool> {
        (0..n).map(|i| mask >> i & 1 == 1).collect()
    }

    #[test]
    fn eval_examples() {
        let mut p = MultilinearPoly::zero(2, 2);
        p.add_term(&[0, 1], rat_int(2)).unwrap();
        assert_eq!(p.eval(&[true, true]).unwrap(), rat_int(2));

        let empty = MultilinearPoly::zero(3, 0);
        for m in 0..8 {
            assert!(empty.eval(&bits(m, 3)).unwrap().is_zero());
        }

        let path = MultilinearPoly::cut_polynomial(3, &[(0, 1), (1, 2)]).unwrap();
        let x = [true, false, true];
        // direct count of crossing edges
        let crossings = [(0usize, 1usize), (1, 2)]
            .iter()
            .filter(|(u, v)| x[*u] != x[*v])
            .count();
        assert_eq!(path.eval(&x).unwrap(), rat_int(crossings as i64));
        assert_eq!(crossings, 2);
    }

    #[test]
    fn eval_rejects_wrong_length() {
        let p = MultilinearPoly::sum_of_variables(3);
        assert!(matches!(
            p.eval(&[true]),
            Err(Error::LengthMismatch {
                expected: 3,
                got: 1
            })
        ));
    }

    #[test]
    fn square_difference_is_crossing_indicator() {
        let p = MultilinearPoly::cut_polynomial(2, &[(0, 1)]).unwrap();
        for m in 0..4 {
            let x = bits(m, 2);
            let expect = if x[0] != x[1] { 1 } else { 0 };
            assert_eq!(p.eval(&x).unwrap(), rat_int(expect));
        }
    }

    #[test]
    fn linearity_exhaustive() {
        let n = 10;
        let mut p = MultilinearPoly::zero(n, 3);
        let mut q = MultilinearPoly::zero(n, 3);
        p.add_term(&[0, 3], rat(3, 2)).unwrap();
        p.add_term(&[9], rat_int(-1)).unwrap();
        p.add_term(&[1, 2, 5], rat(1, 3)).unwrap();
        q.add_term(&[], rat_int(4)).unwrap();
        q.add_term(&[0, 3], rat_int(2)).unwrap();
        q.add_term(&[4, 7, 8], rat(-5, 7)).unwrap();
        let (a, b) = (rat(2, 5), rat_int(-3));
        let comb = p.linear_combination(&a, &q, &b).unwrap();
        for m in 0..(1u32 << n) {
            let x = bits(m, n);
            let lhs = comb.eval(&x).unwrap();
            let rhs = &a * p.eval(&x).unwrap() + &b * q.eval(&x).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn canonicalization_is_fixpoint_and_drops_zeros() {
        let mut p = MultilinearPoly::zero(4, 2);
        p.add_term(&[1, 0], rat_int(1)).unwrap();
        p.add_term(&[0, 1], rat_int(-1)).unwrap();
        p.add_term(&[2], rat(1, 2)).unwrap();
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.canonicalized(), p);
        assert_eq!(p.canonicalized().canonicalized(), p.canonicalized());
    }

    #[test]
    fn json_round_trip_and_format() {
        let p = MultilinearPoly::cut_polynomial(3, &[(0, 1), (1, 2)]).unwrap();
        let j = p.to_json();
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.starts_with(r#"{"n":3,"terms":[{"vars":[0],"coeff":"1/1"}"#));
        let back: PolyJson = serde_json::from_str(&text).unwrap();
        assert_eq!(MultilinearPoly::from_json(&back).unwrap(), p);

        let bad = PolyJson {
            n: 3,
            terms: vec![TermJson {
                vars: vec![2, 1],
                coeff: "1".into(),
            }],
        };
        assert!(MultilinearPoly::from_json(&bad).is_err());
    }

    #[test]
    fn brute_force_balanced_four_cycle() {
        let cut = MultilinearPoly::cut_polynomial(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let q = MultilinearPoly::sum_of_variables(4)
            .linear_combination(
                &rat_int(1),
                &MultilinearPoly::constant(4, rat_int(-2)),
                &rat_int(1),
            )
            .unwrap();
        let prog = BinaryProgram::new(cut, q, ConstraintKind::Equality, Sense::Minimize).unwrap();
        let (v, x) = prog.brute_force().unwrap().unwrap();
        assert_eq!(v, rat_int(2));
        assert_eq!(x.iter().filter(|b| **b).count(), 2);
    }
}
