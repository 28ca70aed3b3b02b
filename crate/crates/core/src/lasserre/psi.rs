//! Balanced relaxation families over a graph: Balanced Separator (enumerated
//! balance `τ′ ∈ [τ, 1−τ]`) and Uniform Sparsest Cut (enumerated `τ ≤ 1/2`).

use std::sync::Arc;

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::lifted::{LiftedBlock, LiftedMeta, LiftedSdp, LiftedSolve, LinearRow};
use super::moments::MomentIndex;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poly::{enumerate_subsets, Sense, SubsetKey};
use crate::scalar::{rat, rat_int, Rational};
use crate::sdp::SolverOptions;

/// Slack applied when turning a floating-point `τ` into integral side sizes.
pub const BALANCE_SLACK: f64 = 1e-9;

/// Allowed sizes of the smaller side: `⌈τ|V|⌉ ..= ⌊(1−τ)|V|⌋`.
pub fn balanced_range(n: usize, tau: f64) -> (usize, usize) {
    let lo = (tau * n as f64 - BALANCE_SLACK).ceil().max(0.0) as usize;
    let hi = ((1.0 - tau) * n as f64 + BALANCE_SLACK).floor().max(0.0) as usize;
    (lo, hi.min(n))
}

fn balanced_member(
    g: &Graph,
    r: usize,
    k: usize,
    scale: &Rational,
    source: &str,
) -> Result<LiftedSdp> {
    let n = g.num_vertices();
    let index = Arc::new(MomentIndex::new(n, 2 * r));
    let kk = rat_int(k as i64);
    let mut equalities = Vec::new();
    for s in enumerate_subsets(n, (2 * r).saturating_sub(1)) {
        let mut coeffs: Vec<(usize, Rational)> = Vec::new();
        let mut own = -kk.clone();
        for v in 0..n as u32 {
            if s.contains(v) {
                own += Rational::one();
            } else {
                coeffs.push((index.require(&s.with(v))?, Rational::one()));
            }
        }
        if !own.is_zero() {
            coeffs.push((index.require(&s)?, own));
        }
        coeffs.sort_by_key(|e| e.0);
        if !coeffs.is_empty() {
            equalities.push(LinearRow {
                coeffs,
                rhs: Rational::zero(),
            });
        }
    }
    let mut objective: Vec<(usize, Rational)> = vec![(0, Rational::zero()); 0];
    let mut acc = std::collections::BTreeMap::<usize, Rational>::new();
    for &(u, v) in g.edges() {
        for (key, c) in [
            (SubsetKey::singleton(u), 1),
            (SubsetKey::singleton(v), 1),
            (SubsetKey::from_unsorted([u, v]), -2),
        ] {
            *acc.entry(index.require(&key)?)
                .or_insert_with(Rational::zero) += rat_int(c) * scale;
        }
    }
    objective.extend(acc.into_iter().filter(|(_, c)| !c.is_zero()));
    Ok(LiftedSdp {
        index,
        blocks: vec![LiftedBlock {
            basis: enumerate_subsets(n, r).collect(),
            localizer: None,
        }],
        equalities,
        nonnegative: true,
        objective,
        sense: Sense::Minimize,
        meta: LiftedMeta {
            round: r,
            source: source.into(),
            balance: Some(rat(k as i64, n as i64)),
        },
    })
}

/// One relaxation per `τ′ = k/|V| ∈ [τ, 1−τ]`, minimizing the number of cut edges.
pub fn build_psi1(g: &Graph, tau: f64, r: usize) -> Result<Vec<(Rational, LiftedSdp)>> {
    if !(tau > 0.0 && tau < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "τ must lie in (0, 1/2), got {tau}"
        )));
    }
    let n = g.num_vertices();
    let (lo, hi) = balanced_range(n, tau);
    if lo > hi || n == 0 {
        return Err(Error::EmptyGrid(format!(
            "no k/{n} in [{tau}, {}]",
            1.0 - tau
        )));
    }
    (lo..=hi)
        .map(|k| {
            let m = balanced_member(g, r, k, &Rational::one(), "balanced-separator")?;
            Ok((rat(k as i64, n as i64), m))
        })
        .collect()
}

/// One relaxation per `τ = k/|V|`, `k = 1..=⌊|V|/2⌋`, with objective scaled by `1/(|V|²τ(1−τ))`.
pub fn build_psi2(g: &Graph, r: usize) -> Result<Vec<(Rational, LiftedSdp)>> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 vertices, got {n}"
        )));
    }
    (1..=n / 2)
        .map(|k| {
            let scale = rat(1, (k * (n - k)) as i64);
            let m = balanced_member(g, r, k, &scale, "uniform-sparsest-cut")?;
            Ok((rat(k as i64, n as i64), m))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct FamilySolve {
    pub members: Vec<(Rational, LiftedSolve)>,
    /// Index into `members` of the smallest value.
    pub best: usize,
}

impl FamilySolve {
    pub fn value(&self) -> f64 {
        self.members[self.best].1.value
    }

    pub fn all_converged(&self) -> bool {
        self.members
            .iter()
            .all(|(_, s)| s.solution.status == crate::sdp::SolveStatus::Converged)
    }
}

/// Solves every member concurrently and takes the minimum.
pub fn solve_family(family: &[(Rational, LiftedSdp)], opts: &SolverOptions) -> Result<FamilySolve> {
    if family.is_empty() {
        return Err(Error::EmptyGrid("empty relaxation family".into()));
    }
    let members: Vec<(Rational, LiftedSolve)> = family
        .par_iter()
        .map(|(t, l)| Ok((t.clone(), l.solve(opts)?)))
        .collect::<Result<_>>()?;
    let best = (0..members.len())
        .min_by(|&a, &b| members[a].1.value.total_cmp(&members[b].1.value))
        .expect("nonempty");
    Ok(FamilySolve { members, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasserre::MomentVector;

    #[test]
    fn grids() {
        let tri = Graph::complete(3);
        let f = build_psi1(&tri, 1.0 / 3.0, 1).unwrap();
        let taus: Vec<Rational> = f.iter().map(|x| x.0.clone()).collect();
        assert_eq!(taus, vec![rat(1, 3), rat(2, 3)]);
        assert_eq!(f[0].1.block_sizes()[0], 4);
        let edge = Graph::path(2);
        assert_eq!(build_psi1(&edge, 0.5 - 1e-12, 1).unwrap().len(), 1);
        assert!(build_psi1(&edge, 0.5, 1).is_err());
        assert_eq!(build_psi2(&Graph::path(3), 1).unwrap().len(), 1);
        assert!(matches!(
            build_psi1(&Graph::path(3), 0.45, 1),
            Err(Error::EmptyGrid(_))
        ));
    }

    #[test]
    fn rank1_cut_objective_is_exact() {
        let g = Graph::cycle(5);
        let fam = build_psi1(&g, 0.2, 2).unwrap();
        for mask in 0..32u32 {
            let x: Vec<bool> = (0..5).map(|i| mask >> i & 1 == 1).collect();
            let k = x.iter().filter(|b| **b).count();
            let cut = g
                .edges()
                .iter()
                .filter(|&&(u, v)| x[u as usize] != x[v as usize])
                .count();
            let y = MomentVector::<Rational>::rank1_lift(&x, 2);
            for (t, l) in &fam {
                let ev = l.evaluate(&y).unwrap();
                assert_eq!(ev.objective, rat_int(cut as i64));
                let matches = *t == rat(k as i64, 5);
                assert_eq!(ev.max_equality_violation.is_zero(), matches, "{t} {k}");
            }
        }
    }
}
