use std::collections::HashMap;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::gadgets::{GadgetGraph, Stage, VertexRole};
use crate::lasserre::VectorFamily;
use crate::poly::SubsetKey;
use crate::scalar::Scalar;
use crate::xor3::{PartialAssignment, Xor3Instance, XorLasserreSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LiftKind {
    /// Vectors on H_Φ; anything touching Z_r is zero.
    Bs,
    /// Vectors on the sparsest-cut graph; D_l acts as `Ū_∅`, D_r as zero.
    Usc,
}

/// What a single host vertex contributes to `Ū_S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexValue {
    /// Forces `Ū_S = 0`.
    Zero,
    /// Leaves `Ū_S` unchanged.
    Neutral,
    /// Merges these bindings into the partial assignment.
    Bind(PartialAssignment),
}

/// Vectors `Ū_S` for host vertex sets `S`, evaluated lazily as `W_(S′,α)` of a
/// 3-XOR solution and memoized per subset.
pub struct ImplicitLiftedSolution<'a, T> {
    base: &'a XorLasserreSolution<T>,
    inst: &'a Xor3Instance,
    host: &'a GadgetGraph,
    max_size: usize,
    kind: LiftKind,
    memo: Mutex<HashMap<SubsetKey, Option<PartialAssignment>>>,
}

impl<'a, T: Scalar> ImplicitLiftedSolution<'a, T> {
    pub fn base(&self) -> &XorLasserreSolution<T> {
        self.base
    }

    pub fn instance(&self) -> &Xor3Instance {
        self.inst
    }

    pub fn host(&self) -> &GadgetGraph {
        self.host
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn kind(&self) -> LiftKind {
        self.kind
    }

    pub fn vertex_value(&self, v: u32) -> Result<VertexValue> {
        let role = self
            .host
            .roles
            .get(v as usize)
            .ok_or(Error::IndexOutOfRange {
                index: v as usize,
                len: self.host.roles.len(),
            })?;
        Ok(match *role {
            VertexRole::Left {
                constraint,
                assignment,
            } => {
                let c = &self.inst.constraints[constraint as usize];
                VertexValue::Bind(PartialAssignment::new(
                    (0..3).map(|z| (c.vars[z], assignment[z])).collect(),
                )?)
            }
            VertexRole::Clique { var, bit, .. } => {
                VertexValue::Bind(PartialAssignment::new(vec![(var, bit)])?)
            }
            VertexRole::Zr { .. } | VertexRole::Dr { .. } => VertexValue::Zero,
            VertexRole::Dl { .. } => VertexValue::Neutral,
        })
    }

    fn compute(&self, s: &SubsetKey) -> Result<Option<PartialAssignment>> {
        let mut acc = PartialAssignment::empty();
        let mut values = Vec::with_capacity(s.len());
        for &v in s.vars() {
            values.push(self.vertex_value(v)?);
        }
        // a zero factor wins over a contradiction or a coverage question
        if values.contains(&VertexValue::Zero) {
            return Ok(None);
        }
        for val in values {
            if let VertexValue::Bind(p) = val {
                match acc.merge(&p) {
                    Some(m) => acc = m,
                    None => return Ok(None),
                }
            }
        }
        if !self.base.covers(&acc) {
            return Err(Error::CoverageGap(format!(
                "base solution has no vector for {:?}",
                acc.bindings()
            )));
        }
        Ok(Some(acc))
    }

    /// The partial assignment whose `W` vector is `Ū_S`, or `None` for the zero vector.
    pub fn evaluate(&self, s: &SubsetKey) -> Result<Option<PartialAssignment>> {
        if s.len() > self.max_size {
            return Err(Error::DegreeTooLarge {
                degree: s.len(),
                round: self.max_size,
            });
        }
        if let Some(hit) = self.memo.lock().expect("memo lock").get(s) {
            return Ok(hit.clone());
        }
        let value = self.compute(s)?;
        self.memo
            .lock()
            .expect("memo lock")
            .insert(s.clone(), value.clone());
        Ok(value)
    }

    /// `⟨Ū_S, Ū_T⟩` for two subsets.
    pub fn inner_of(&self, s: &SubsetKey, t: &SubsetKey) -> Result<T> {
        match (self.evaluate(s)?, self.evaluate(t)?) {
            (Some(a), Some(b)) => self.base.inner(&a, &b),
            _ => Ok(T::zero()),
        }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }
}

impl<'a, T: Scalar> VectorFamily for ImplicitLiftedSolution<'a, T> {
    type Scalar = T;
    type Handle = PartialAssignment;

    fn handle(&self, s: &SubsetKey) -> Result<Option<PartialAssignment>> {
        self.evaluate(s)
    }

    fn inner(&self, a: &PartialAssignment, b: &PartialAssignment) -> T {
        self.base
            .inner(a, b)
            .expect("handles are covered by the base")
    }
}

/// Lifts a 3-XOR solution to vectors on H_Φ for subsets of up to `max_size`
/// vertices. Such a subset touches at most `3·max_size` variables, so the base
/// must reach that round.
pub fn lift_bs_solution<'a, T: Scalar>(
    base: &'a XorLasserreSolution<T>,
    inst: &'a Xor3Instance,
    host: &'a GadgetGraph,
    max_size: usize,
) -> Result<ImplicitLiftedSolution<'a, T>> {
    if host.provenance != inst.id() || base.n != inst.n {
        return Err(Error::Provenance("host, base and instance disagree".into()));
    }
    if host.stage == Stage::Usc {
        return Err(Error::Provenance(
            "lift_bs_solution expects H_Φ, not the USC graph".into(),
        ));
    }
    if base.round < 3 * max_size {
        return Err(Error::DegreeTooLarge {
            degree: 3 * max_size,
            round: base.round,
        });
    }
    Ok(ImplicitLiftedSolution {
        base,
        inst,
        host,
        max_size,
        kind: LiftKind::Bs,
        memo: Mutex::new(HashMap::new()),
    })
}

/// Extends a lifted H_Φ solution to the sparsest-cut graph built on the same host.
pub fn lift_usc_solution<'a, T: Scalar>(
    bs: &ImplicitLiftedSolution<'a, T>,
    usc: &'a GadgetGraph,
) -> Result<ImplicitLiftedSolution<'a, T>> {
    let h = bs.host;
    let same_host = usc.stage == Stage::Usc
        && bs.kind == LiftKind::Bs
        && usc.provenance == h.provenance
        && usc.roles.len() >= h.roles.len()
        && usc.roles[..h.roles.len()] == h.roles[..];
    if !same_host {
        return Err(Error::Provenance(
            "USC graph does not extend the lifted host".into(),
        ));
    }
    Ok(ImplicitLiftedSolution {
        base: bs.base,
        inst: bs.inst,
        host: usc,
        max_size: bs.max_size,
        kind: LiftKind::Usc,
        memo: Mutex::new(HashMap::new()),
    })
}
