use std::collections::HashMap;

use num_traits::One;

use super::instance::Xor3Instance;
use crate::error::{Error, Result};
use crate::lasserre::{build_lifted_sdp, MomentVector};
use crate::poly::{BinaryProgram, ConstraintKind, MultilinearPoly, Sense, SubsetKey};
use crate::scalar::{rat_int, Rational, Scalar};
use crate::sdp::{SolveStatus, SolverOptions};

/// A map from variables to bits, stored sorted by variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PartialAssignment(Vec<(u32, bool)>);

impl PartialAssignment {
    pub fn empty() -> Self {
        PartialAssignment(Vec::new())
    }

    /// Rejects a variable bound twice.
    pub fn new(mut bindings: Vec<(u32, bool)>) -> Result<Self> {
        bindings.sort_unstable();
        if bindings.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParameter("variable bound twice".into()));
        }
        Ok(PartialAssignment(bindings))
    }

    /// `x` restricted to `vars`.
    pub fn restrict(x: &[bool], vars: &SubsetKey) -> Self {
        PartialAssignment(vars.vars().iter().map(|&v| (v, x[v as usize])).collect())
    }

    /// All `2^|vars|` assignments to `vars`, in binary counting order.
    pub fn all_on(vars: &SubsetKey) -> Vec<Self> {
        let k = vars.len();
        (0u32..1 << k)
            .map(|code| {
                PartialAssignment(
                    vars.vars()
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| (v, code >> (k - 1 - i) & 1 == 1))
                        .collect(),
                )
            })
            .collect()
    }

    pub fn bindings(&self) -> &[(u32, bool)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vars(&self) -> SubsetKey {
        SubsetKey::from_sorted(self.0.iter().map(|b| b.0).collect())
    }

    pub fn get(&self, v: u32) -> Option<bool> {
        self.0
            .binary_search_by_key(&v, |b| b.0)
            .ok()
            .map(|i| self.0[i].1)
    }

    /// Union of two assignments, or `None` if they disagree on a shared variable.
    pub fn merge(&self, other: &Self) -> Option<Self> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    if a[i].1 != b[j].1 {
                        return None;
                    }
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Some(PartialAssignment(out))
    }

    pub fn agrees_with(&self, x: &[bool]) -> bool {
        self.0.iter().all(|&(v, b)| x[v as usize] == b)
    }
}

#[derive(Clone, Debug)]
pub enum GramData<T> {
    /// `W_(S,α) = [α = x|_S]·e` for a single unit vector `e`.
    Rank1 { assignment: Vec<bool> },
    /// Explicit inner products over an indexed set of pairs.
    Explicit {
        pairs: Vec<PartialAssignment>,
        index: HashMap<PartialAssignment, usize>,
        gram: Vec<T>,
    },
}

/// Vectors `W_(S,α)` for `|S| ≤ round`, given through their inner products.
#[derive(Clone, Debug)]
pub struct XorLasserreSolution<T> {
    pub n: usize,
    pub round: usize,
    pub data: GramData<T>,
}

impl<T: Scalar> XorLasserreSolution<T> {
    pub fn covers(&self, a: &PartialAssignment) -> bool {
        match &self.data {
            GramData::Rank1 { .. } => a.len() <= self.round,
            GramData::Explicit { index, .. } => index.contains_key(a),
        }
    }

    pub fn inner(&self, a: &PartialAssignment, b: &PartialAssignment) -> Result<T> {
        for p in [a, b] {
            if !self.covers(p) {
                return Err(Error::CoverageGap(format!("{:?}", p.bindings())));
            }
        }
        Ok(match &self.data {
            GramData::Rank1 { assignment } => {
                if a.agrees_with(assignment) && b.agrees_with(assignment) {
                    T::one()
                } else {
                    T::zero()
                }
            }
            GramData::Explicit { index, gram, pairs } => {
                gram[index[a] * pairs.len() + index[b]].clone()
            }
        })
    }

    pub fn pairs_up_to(&self, size: usize) -> Vec<PartialAssignment> {
        match &self.data {
            GramData::Rank1 { .. } => {
                let mut out = Vec::new();
                for s in crate::poly::enumerate_subsets(self.n, size.min(self.round)) {
                    out.extend(PartialAssignment::all_on(&s));
                }
                out
            }
            GramData::Explicit { pairs, .. } => {
                pairs.iter().filter(|p| p.len() <= size).cloned().collect()
            }
        }
    }

    /// Mutable Gram entry of an explicit solution (both symmetric positions).
    pub fn set_inner(&mut self, a: &PartialAssignment, b: &PartialAssignment, v: T) -> Result<()> {
        match &mut self.data {
            GramData::Rank1 { .. } => Err(Error::InvalidParameter(
                "rank-1 solutions have no stored Gram entries".into(),
            )),
            GramData::Explicit { pairs, index, gram } => {
                let k = pairs.len();
                let (i, j) = match (index.get(a), index.get(b)) {
                    (Some(&i), Some(&j)) => (i, j),
                    _ => return Err(Error::CoverageGap(format!("{:?} / {:?}", a, b))),
                };
                gram[i * k + j] = v.clone();
                gram[j * k + i] = v;
                Ok(())
            }
        }
    }

    /// Inner products `⟨W_(S,α), W_(T,β)⟩ = Σ_{U ⊆ zeros} (−1)^{|U|} y_{ones ∪ U}`
    /// for all pairs with `|S| ≤ pair_round`, where `ones`/`zeros` split `α∘β`.
    pub fn from_moments(y: &MomentVector<T>, pair_round: usize) -> Result<Self> {
        if pair_round > y.round() {
            return Err(Error::DegreeTooLarge {
                degree: pair_round,
                round: y.round(),
            });
        }
        let n = y.n();
        let mut pairs = Vec::new();
        for s in crate::poly::enumerate_subsets(n, pair_round) {
            pairs.extend(PartialAssignment::all_on(&s));
        }
        let k = pairs.len();
        let mut gram = vec![T::zero(); k * k];
        for i in 0..k {
            for j in i..k {
                let v = match pairs[i].merge(&pairs[j]) {
                    None => T::zero(),
                    Some(c) => event_mass(y, &c)?,
                };
                gram[i * k + j] = v.clone();
                gram[j * k + i] = v;
            }
        }
        let index = pairs
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, p)| (p, i))
            .collect();
        Ok(XorLasserreSolution {
            n,
            round: pair_round,
            data: GramData::Explicit { pairs, index, gram },
        })
    }
}

/// Mass the moment vector puts on the event `x|_S = α`.
fn event_mass<T: Scalar>(y: &MomentVector<T>, a: &PartialAssignment) -> Result<T> {
    let ones = SubsetKey::from_sorted(a.bindings().iter().filter(|b| b.1).map(|b| b.0).collect());
    let zeros = SubsetKey::from_sorted(a.bindings().iter().filter(|b| !b.1).map(|b| b.0).collect());
    let mut acc = T::zero();
    for u in zeros.subsets() {
        let v = y.get(&ones.union(&u))?.clone();
        if u.len() % 2 == 0 {
            acc = acc + v;
        } else {
            acc = acc - v;
        }
    }
    Ok(acc)
}

/// Rank-1 solution supported on the planted assignment `x`.
pub fn perfect_solution_from_assignment<T: Scalar>(
    inst: &Xor3Instance,
    x: &[bool],
    round: usize,
) -> Result<XorLasserreSolution<T>> {
    if x.len() != inst.n {
        return Err(Error::LengthMismatch {
            expected: inst.n,
            got: x.len(),
        });
    }
    if let Some(i) = inst.constraints.iter().position(|c| !c.is_satisfied(x)) {
        return Err(Error::NotSatisfying(i));
    }
    Ok(XorLasserreSolution {
        n: inst.n,
        round,
        data: GramData::Rank1 {
            assignment: x.to_vec(),
        },
    })
}

/// `Σ_i [C_i satisfied]` as a multilinear polynomial.
pub fn satisfied_polynomial(inst: &Xor3Instance) -> Result<MultilinearPoly> {
    let mut p = MultilinearPoly::zero(inst.n, 3);
    for c in &inst.constraints {
        let [a, b, d] = c.vars.map(|v| v as usize);
        // a ⊕ b ⊕ d = a + b + d − 2(ab + ad + bd) + 4abd
        let s = if c.parity { 1 } else { -1 };
        if !c.parity {
            p.add_term(&[], rat_int(1))?;
        }
        for v in [a, b, d] {
            p.add_term(&[v], rat_int(s))?;
        }
        for pair in [[a, b], [a, d], [b, d]] {
            p.add_term(&pair, rat_int(-2 * s))?;
        }
        p.add_term(&[a, b, d], rat_int(4 * s))?;
    }
    Ok(p)
}

/// `max Σ_i sat_i(x)` subject to `Σ_i sat_i(x) − m ≥ 0`.
pub fn xor_program(inst: &Xor3Instance) -> Result<BinaryProgram> {
    let p = satisfied_polynomial(inst)?;
    let q = p.linear_combination(
        &Rational::one(),
        &MultilinearPoly::constant(inst.n, rat_int(inst.m() as i64)),
        &rat_int(-1),
    )?;
    BinaryProgram::new(p, q, ConstraintKind::NonNegative, Sense::Maximize)
}

/// Solves the round-`r` relaxation of [`xor_program`] and reads off pair vectors
/// up to `pair_round`.
pub fn numeric_solution(
    inst: &Xor3Instance,
    r: usize,
    pair_round: usize,
    opts: &SolverOptions,
) -> Result<(XorLasserreSolution<f64>, SolveStatus)> {
    let lifted = build_lifted_sdp(&xor_program(inst)?, r)?;
    let solved = lifted.solve(opts)?;
    let sol = XorLasserreSolution::from_moments(&solved.moments, pair_round)?;
    Ok((sol, solved.solution.status))
}

#[derive(Clone, Debug)]
pub struct XorValidation<T> {
    /// Property (i): `Σ_i Σ_{α satisfies C_i} ‖W_(C_i,α)‖²`.
    pub value: T,
    pub value_deficit: f64,
    /// Property (ii): largest negative inner product magnitude.
    pub nonnegativity: f64,
    /// Property (iii): largest inner product between contradictory pairs.
    pub contradiction: f64,
    /// Property (iv): largest spread within a group of pairs with equal combined assignment.
    pub union_consistency: f64,
    /// Property (v): largest `|Σ_α ‖W_(S,α)‖² − 1|`.
    pub normalization: f64,
    /// Largest `‖Σ_α W_(S,α) − W_∅‖²`, from Gram entries only.
    pub observation_residual: f64,
    pub checked_pairs: usize,
}

impl<T: Scalar> XorValidation<T> {
    pub fn worst(&self) -> f64 {
        [
            self.value_deficit.abs(),
            self.nonnegativity,
            self.contradiction,
            self.union_consistency,
            self.normalization,
            self.observation_residual,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.worst() <= tol
    }
}

const VALIDATION_PAIR_BUDGET: usize = 2000;

/// Checks properties (i)–(v) and the sum identity on pairs of size ≤ 3 (≤ 2
/// when the size-3 set is too large); property (i) always uses the constraint triples.
pub fn validate_solution<T: Scalar>(
    sol: &XorLasserreSolution<T>,
    inst: &Xor3Instance,
) -> Result<XorValidation<T>> {
    let mut size = sol.round.min(3);
    let mut pairs = sol.pairs_up_to(size);
    while pairs.len() > VALIDATION_PAIR_BUDGET && size > 1 {
        size -= 1;
        pairs = sol.pairs_up_to(size);
    }
    let empty = PartialAssignment::empty();
    let w_empty = sol.inner(&empty, &empty)?;

    let mut value = T::zero();
    for c in &inst.constraints {
        for a in c.satisfying() {
            let pa = PartialAssignment::new(c.vars.iter().copied().zip(a).collect())?;
            value = value + sol.inner(&pa, &pa)?;
        }
    }
    let value_deficit = (T::of_usize(inst.m()) - value.clone()).to_f64_lossy();

    let mut nonnegativity = 0.0f64;
    let mut contradiction = 0.0f64;
    let mut union_consistency = 0.0f64;
    let mut groups: HashMap<PartialAssignment, T> = HashMap::new();
    for (i, a) in pairs.iter().enumerate() {
        for b in &pairs[i..] {
            let ip = sol.inner(a, b)?;
            if ip.is_negative() {
                nonnegativity = nonnegativity.max(ip.abs().to_f64_lossy());
            }
            match a.merge(b) {
                None => contradiction = contradiction.max(ip.abs().to_f64_lossy()),
                Some(c) => match groups.get(&c) {
                    Some(first) => {
                        let d = (ip - first.clone()).abs().to_f64_lossy();
                        union_consistency = union_consistency.max(d);
                    }
                    None => {
                        groups.insert(c, ip);
                    }
                },
            }
        }
    }

    let mut normalization = 0.0f64;
    let mut observation_residual = 0.0f64;
    let mut by_vars: Vec<(SubsetKey, Vec<&PartialAssignment>)> = Vec::new();
    let mut slot: HashMap<SubsetKey, usize> = HashMap::new();
    for p in &pairs {
        let s = p.vars();
        let k = *slot.entry(s.clone()).or_insert_with(|| {
            by_vars.push((s, Vec::new()));
            by_vars.len() - 1
        });
        by_vars[k].1.push(p);
    }
    for (s, group) in &by_vars {
        if group.len() != 1 << s.len() {
            return Err(Error::CoverageGap(format!(
                "not every assignment to {s} is indexed"
            )));
        }
        let mut norms = T::zero();
        let mut sum_sq = T::zero();
        let mut cross = T::zero();
        for a in group {
            norms = norms + sol.inner(a, a)?;
            cross = cross + sol.inner(a, &empty)?;
            for b in group {
                sum_sq = sum_sq + sol.inner(a, b)?;
            }
        }
        normalization = normalization.max((norms - T::one()).abs().to_f64_lossy());
        let two = T::of_usize(2);
        let res = sum_sq - two * cross + w_empty.clone();
        observation_residual = observation_residual.max(res.abs().to_f64_lossy());
    }

    Ok(XorValidation {
        value,
        value_deficit,
        nonnegativity,
        contradiction,
        union_consistency,
        normalization,
        observation_residual,
        checked_pairs: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn planted() -> (Xor3Instance, Vec<bool>) {
        Xor3Instance::sample_planted(6, 12, 4).unwrap()
    }

    #[test]
    fn merge_and_restrict() {
        let a = PartialAssignment::new(vec![(3, true), (1, false)]).unwrap();
        let b = PartialAssignment::new(vec![(1, false), (2, true)]).unwrap();
        let c = PartialAssignment::new(vec![(1, true)]).unwrap();
        assert_eq!(
            a.merge(&b).unwrap().bindings(),
            &[(1, false), (2, true), (3, true)]
        );
        assert!(a.merge(&c).is_none());
        assert!(PartialAssignment::new(vec![(1, true), (1, false)]).is_err());
        assert_eq!(
            PartialAssignment::all_on(&SubsetKey::from_unsorted([0, 4])).len(),
            4
        );
    }

    #[test]
    fn planted_rank1_is_perfect() {
        let (inst, x) = planted();
        let sol = perfect_solution_from_assignment::<Rational>(&inst, &x, 3).unwrap();
        for s in crate::poly::enumerate_subsets(6, 2) {
            for a in PartialAssignment::all_on(&s) {
                let want = if a.agrees_with(&x) { 1 } else { 0 };
                assert_eq!(sol.inner(&a, &a).unwrap(), rat_int(want));
            }
        }
        let v = validate_solution(&sol, &inst).unwrap();
        assert_eq!(v.value, rat_int(12));
        assert_eq!(v.worst(), 0.0);
        let mut y = x.clone();
        y[0] = !y[0];
        if inst.satisfied_count(&y).unwrap() < 12 {
            assert!(matches!(
                perfect_solution_from_assignment::<Rational>(&inst, &y, 3),
                Err(Error::NotSatisfying(_))
            ));
        }
    }

    #[test]
    fn brute_force_on_planted() {
        let (inst, x) = planted();
        let (best, _) = inst.max_sat_bruteforce().unwrap();
        assert_eq!(best, 12);
        assert_eq!(inst.satisfied_count(&x).unwrap(), 12);
    }

    #[test]
    fn moments_of_rank1_match_rank1_solution() {
        let (inst, x) = planted();
        let y = MomentVector::<Rational>::rank1_lift(&x, 3);
        let explicit = XorLasserreSolution::from_moments(&y, 3).unwrap();
        let rank1 = perfect_solution_from_assignment::<Rational>(&inst, &x, 3).unwrap();
        for a in explicit.pairs_up_to(2) {
            for b in explicit.pairs_up_to(2) {
                assert_eq!(
                    explicit.inner(&a, &b).unwrap(),
                    rank1.inner(&a, &b).unwrap()
                );
            }
        }
        assert_eq!(validate_solution(&explicit, &inst).unwrap().worst(), 0.0);
    }

    #[test]
    fn negated_entry_flagged() {
        let (inst, x) = Xor3Instance::sample_planted(4, 3, 1).unwrap();
        let y = MomentVector::<Rational>::rank1_lift(&x, 2);
        let mut sol = XorLasserreSolution::from_moments(&y, 2).unwrap();
        let a = PartialAssignment::restrict(&x, &SubsetKey::singleton(0));
        let v = sol.inner(&a, &PartialAssignment::empty()).unwrap();
        sol.set_inner(&a, &PartialAssignment::empty(), -v).unwrap();
        let report = validate_solution(&sol, &inst);
        // constraint triples need size-3 pairs, which a round-2 solution lacks
        assert!(matches!(report, Err(Error::CoverageGap(_))));
        let y3 = MomentVector::<Rational>::rank1_lift(&x, 3);
        let mut sol = XorLasserreSolution::from_moments(&y3, 3).unwrap();
        sol.set_inner(&a, &PartialAssignment::empty(), rat_int(-1))
            .unwrap();
        let report = validate_solution(&sol, &inst).unwrap();
        assert!(report.nonnegativity > 0.0);
    }

    #[test]
    fn satisfied_polynomial_counts() {
        let inst = Xor3Instance::sample_random(5, 9, 8).unwrap();
        let p = satisfied_polynomial(&inst).unwrap();
        for mask in 0..32u32 {
            let x: Vec<bool> = (0..5).map(|i| mask >> i & 1 == 1).collect();
            assert_eq!(
                p.eval(&x).unwrap(),
                rat_int(inst.satisfied_count(&x).unwrap() as i64)
            );
        }
    }
}
