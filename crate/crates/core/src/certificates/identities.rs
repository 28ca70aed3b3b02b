use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lift::{ImplicitLiftedSolution, LiftKind, VertexValue};
use crate::error::{Error, Result};
use crate::gadgets::{EdgeTag, VertexRole};
use crate::lasserre::{certify_lift, GramSolution, LiftCertificate, VectorFamily};
use crate::poly::{MultilinearPoly, SubsetKey};
use crate::scalar::{format_rational, Rational, Scalar};
use crate::xor3::PartialAssignment;

#[derive(Clone, Debug)]
pub struct EdgeObjective<T> {
    pub total: T,
    pub by_tag: BTreeMap<EdgeTag, T>,
}

fn singleton<T: Scalar>(
    sol: &ImplicitLiftedSolution<'_, T>,
    v: u32,
) -> Result<Option<PartialAssignment>> {
    Ok(match sol.vertex_value(v)? {
        VertexValue::Zero => None,
        VertexValue::Neutral => Some(PartialAssignment::empty()),
        VertexValue::Bind(p) => Some(p),
    })
}

/// Both endpoints carry the same vector by construction, so the term is zero.
fn constant_across(tag: EdgeTag, a: &VertexRole, b: &VertexRole) -> bool {
    match (tag, a, b) {
        (
            EdgeTag::Clique,
            VertexRole::Clique { var: x, bit: p, .. },
            VertexRole::Clique { var: y, bit: q, .. },
        ) => x == y && p == q,
        (EdgeTag::ZrExpander, VertexRole::Zr { .. }, VertexRole::Zr { .. }) => true,
        (EdgeTag::DExpander, VertexRole::Dl { .. }, VertexRole::Dl { .. }) => true,
        (EdgeTag::DExpander, VertexRole::Dr { .. }, VertexRole::Dr { .. }) => true,
        _ => false,
    }
}

/// `Σ_{(u,v)∈E} ‖Ū_u − Ū_v‖²`, split by edge tag. Clique and expander edges
/// join vertices with identical vectors and are skipped without evaluation.
pub fn edge_objective<T: Scalar>(sol: &ImplicitLiftedSolution<'_, T>) -> Result<EdgeObjective<T>> {
    let host = sol.host();
    let mut by_tag: BTreeMap<EdgeTag, T> = BTreeMap::new();
    for e in &host.edges {
        let slot = by_tag.entry(e.tag).or_insert_with(T::zero);
        if constant_across(e.tag, &host.roles[e.u as usize], &host.roles[e.v as usize]) {
            continue;
        }
        let term = match (singleton(sol, e.u)?, singleton(sol, e.v)?) {
            (None, None) => T::zero(),
            (Some(a), None) | (None, Some(a)) => sol.inner(&a, &a),
            (Some(a), Some(b)) if a == b => T::zero(),
            (Some(a), Some(b)) => {
                sol.inner(&a, &a) + sol.inner(&b, &b) - T::of_usize(2) * sol.inner(&a, &b)
            }
        };
        *slot = slot.clone() + term;
    }
    let total = by_tag.values().fold(T::zero(), |acc, v| acc + v.clone());
    Ok(EdgeObjective { total, by_tag })
}

pub fn bs_objective<T: Scalar>(sol: &ImplicitLiftedSolution<'_, T>) -> Result<EdgeObjective<T>> {
    if sol.kind() != LiftKind::Bs {
        return Err(Error::Provenance(
            "bs_objective needs a lift onto H_Φ".into(),
        ));
    }
    edge_objective(sol)
}

/// Tests `Σ_{v∈vertices} Ū_v = δ·Ū_∅`.
pub fn balance_over<T: Scalar>(
    sol: &ImplicitLiftedSolution<'_, T>,
    vertices: &[u32],
    tol: f64,
) -> Result<LiftCertificate<T>> {
    let n = sol.host().num_vertices();
    let mut q = MultilinearPoly::zero(n, 1);
    for &v in vertices {
        if v as usize >= n {
            return Err(Error::IndexOutOfRange {
                index: v as usize,
                len: n,
            });
        }
        q.add_term_key(SubsetKey::singleton(v), Rational::from_integer(1.into()));
    }
    certify_lift(sol, &q, tol)
}

/// Balance certificate over every host vertex; `δ` is the implied `|A|`.
pub fn bs_balance_residual<T: Scalar>(
    sol: &ImplicitLiftedSolution<'_, T>,
    tol: f64,
) -> Result<LiftCertificate<T>> {
    let all: Vec<u32> = (0..sol.host().num_vertices() as u32).collect();
    balance_over(sol, &all, tol)
}

#[derive(Clone, Debug)]
pub struct UscObjective<T> {
    pub raw: T,
    /// `raw / (|V|²·τ(1−τ))`
    pub scaled: T,
    /// `raw / (τ|V|)²`
    pub paper_bound: T,
    pub vertices: usize,
    pub tau: T,
}

/// Sparsest-cut objective of a lifted USC solution; `τ` must match the balance.
pub fn usc_objective<T: Scalar>(
    sol: &ImplicitLiftedSolution<'_, T>,
    tau: &T,
    tol: f64,
) -> Result<UscObjective<T>> {
    if sol.kind() != LiftKind::Usc {
        return Err(Error::Provenance(
            "usc_objective needs a lift onto the USC graph".into(),
        ));
    }
    let nv = sol.host().num_vertices();
    let v = T::of_usize(nv);
    let balance = bs_balance_residual(sol, tol)?;
    let implied = balance.delta.clone() / v.clone();
    if (implied.clone() - tau.clone()).abs().to_f64_lossy() > tol {
        return Err(Error::InvalidParameter(format!(
            "τ = {} but the balance implies {}",
            tau.render(),
            implied.render()
        )));
    }
    let raw = edge_objective(sol)?.total;
    let one = T::one();
    let scaled = raw.clone() / (v.clone() * v.clone() * tau.clone() * (one - tau.clone()));
    let side = tau.clone() * v;
    let paper_bound = raw.clone() / (side.clone() * side);
    Ok(UscObjective {
        raw,
        scaled,
        paper_bound,
        vertices: nv,
        tau: tau.clone(),
    })
}

/// Explicit vectors for `∅` plus the given subsets, factored from their Gram matrix.
pub fn materialize<T: Scalar>(
    sol: &ImplicitLiftedSolution<'_, T>,
    subsets: &[SubsetKey],
    tol: f64,
) -> Result<GramSolution> {
    let mut basis = vec![SubsetKey::empty()];
    for s in subsets {
        if !basis.contains(s) {
            basis.push(s.clone());
        }
    }
    let k = basis.len();
    let mut gram = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = sol.inner_of(&basis[i], &basis[j])?.to_f64_lossy();
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    GramSolution::from_inner_products(basis, &gram, tol)
}

/// One line of a certificate report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub expected: String,
    pub observed: String,
    pub residual: f64,
    pub accepted: bool,
}

/// Compares `observed` with an exact expected value; rationals must match exactly
/// when `tol` is zero.
pub fn identity_check<T: Scalar>(
    name: &str,
    expected: &Rational,
    observed: &T,
    tol: f64,
) -> IdentityCheck {
    let diff = (observed.clone() - T::from_rational(expected)).abs();
    let residual = diff.to_f64_lossy();
    IdentityCheck {
        identity: name.into(),
        expected: format_rational(expected),
        observed: observed.render(),
        residual,
        accepted: diff.is_zero() || residual <= tol,
    }
}

/// Inequality `observed ≤ bound`, reported in the same shape.
pub fn bound_check<T: Scalar>(name: &str, bound: &T, observed: &T) -> IdentityCheck {
    let slack = bound.clone() - observed.clone();
    IdentityCheck {
        identity: name.into(),
        expected: format!("<= {}", bound.render()),
        observed: observed.render(),
        residual: (-slack.to_f64_lossy()).max(0.0),
        accepted: !slack.is_negative(),
    }
}
