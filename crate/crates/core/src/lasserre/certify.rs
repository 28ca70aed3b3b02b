use std::collections::HashMap;
use std::hash::Hash;

use num_traits::{One, Signed, Zero};

use super::gram::GramSolution;
use crate::error::{Error, Result};
use crate::poly::{MultilinearPoly, SubsetKey};
use crate::scalar::Scalar;

/// Anything that can hand out vectors `Ū_S` and their inner products.
///
/// `handle` returns `Ok(None)` for a vector known to be zero and an error for
/// a subset the family does not cover. Equal handles must denote equal vectors.
pub trait VectorFamily {
    type Scalar: Scalar;
    type Handle: Clone + Eq + Hash;

    fn handle(&self, s: &SubsetKey) -> Result<Option<Self::Handle>>;
    fn inner(&self, a: &Self::Handle, b: &Self::Handle) -> Self::Scalar;
}

impl VectorFamily for GramSolution {
    type Scalar = f64;
    type Handle = usize;

    fn handle(&self, s: &SubsetKey) -> Result<Option<usize>> {
        self.position(s)
            .map(Some)
            .ok_or_else(|| Error::Uncovered(s.to_string()))
    }

    fn inner(&self, a: &usize, b: &usize) -> f64 {
        self.inner_at(*a, *b)
    }
}

#[derive(Clone, Debug)]
pub struct LiftCertificate<T> {
    /// `⟨Σ_S Q(S)Ū_S, Ū_∅⟩`
    pub delta: T,
    /// `‖Σ_S Q(S)Ū_S − δŪ_∅‖²`, exact on the rational path
    pub residual_sq: T,
    pub residual: f64,
    /// Largest of `|‖Ū_∅‖² − 1|` and `|⟨Ū_S,Ū_∅⟩ − ‖Ū_S‖²|` over the support of `Q`.
    pub hypothesis_gap: T,
    pub accepted: bool,
}

/// Tests whether `Σ_S Q(S)Ū_S = δ·Ū_∅` with `δ ≥ 0`, which makes `Q ≥ 0` liftable.
///
/// The vectors touched by `Q` must also be consistent with `Ū_∅` as in a
/// feasible vector solution; a family that fails this is rejected even if the
/// sum happens to be collinear with `Ū_∅`.
pub fn certify_lift<F: VectorFamily>(
    family: &F,
    q: &MultilinearPoly,
    tol: f64,
) -> Result<LiftCertificate<F::Scalar>> {
    let empty = family
        .handle(&SubsetKey::empty())?
        .ok_or_else(|| Error::InvalidParameter("Ū_∅ is the zero vector".into()))?;
    let mut slot: HashMap<F::Handle, usize> = HashMap::new();
    let mut combo: Vec<(F::Handle, F::Scalar)> = Vec::new();
    for (s, c) in q.terms() {
        if let Some(h) = family.handle(s)? {
            let c = F::Scalar::from_rational(c);
            match slot.get(&h) {
                Some(&i) => combo[i].1 = combo[i].1.clone() + c,
                None => {
                    slot.insert(h.clone(), combo.len());
                    combo.push((h, c));
                }
            }
        }
    }
    let ee = family.inner(&empty, &empty);
    let mut hypothesis_gap = (ee.clone() - F::Scalar::one()).abs();
    let mut v_e = F::Scalar::zero();
    for (h, c) in &combo {
        let he = family.inner(h, &empty);
        let gap = (he.clone() - family.inner(h, h)).abs();
        if gap > hypothesis_gap {
            hypothesis_gap = gap;
        }
        v_e = v_e + c.clone() * he;
    }
    let mut vv = F::Scalar::zero();
    for (i, (h1, c1)) in combo.iter().enumerate() {
        vv = vv + c1.clone() * c1.clone() * family.inner(h1, h1);
        for (h2, c2) in &combo[i + 1..] {
            let two = F::Scalar::of_usize(2);
            vv = vv + two * c1.clone() * c2.clone() * family.inner(h1, h2);
        }
    }
    let delta = v_e.clone();
    let two = F::Scalar::of_usize(2);
    let residual_sq = vv - two * delta.clone() * v_e + delta.clone() * delta.clone() * ee;
    let residual = residual_sq.to_f64_lossy().max(0.0).sqrt();
    let accepted =
        residual <= tol && delta.to_f64_lossy() >= -tol && hypothesis_gap.to_f64_lossy() <= tol;
    Ok(LiftCertificate {
        delta,
        residual_sq,
        residual,
        hypothesis_gap,
        accepted,
    })
}

/// Vectors of a rank-1 lift in exact arithmetic: `Ū_S = [x_S]·e`.
#[derive(Clone, Debug)]
pub struct Rank1Family<'a> {
    pub x: &'a [bool],
}

impl<'a> VectorFamily for Rank1Family<'a> {
    type Scalar = crate::scalar::Rational;
    type Handle = ();

    fn handle(&self, s: &SubsetKey) -> Result<Option<()>> {
        if let Some(&v) = s.vars().iter().find(|&&v| v as usize >= self.x.len()) {
            return Err(Error::Uncovered(format!("variable {v}")));
        }
        Ok(s.vars().iter().all(|&v| self.x[v as usize]).then_some(()))
    }

    fn inner(&self, _: &(), _: &()) -> Self::Scalar {
        num_traits::One::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasserre::{gram_from_moments, MomentVector};
    use crate::scalar::{rat, rat_int, Rational};
    use nalgebra::DVector;

    fn sample_q(n: usize) -> MultilinearPoly {
        let mut q = MultilinearPoly::zero(n, 2);
        q.add_term(&[0], rat(3, 2)).unwrap();
        q.add_term(&[1, 2], rat_int(-4)).unwrap();
        q.add_term(&[], rat_int(2)).unwrap();
        q.add_term(&[2], rat_int(1)).unwrap();
        q
    }

    #[test]
    fn zero_polynomial() {
        let x = [true, false, true];
        let c = certify_lift(&Rank1Family { x: &x }, &MultilinearPoly::zero(3, 0), 0.0).unwrap();
        assert!(c.delta.is_zero() && c.residual_sq.is_zero() && c.accepted);
    }

    #[test]
    fn rank1_delta_is_evaluation() {
        let q = sample_q(3);
        for mask in 0..8u32 {
            let x: Vec<bool> = (0..3).map(|i| mask >> i & 1 == 1).collect();
            let c = certify_lift(&Rank1Family { x: &x }, &q, 0.0).unwrap();
            assert_eq!(c.delta, q.eval(&x).unwrap());
            assert!(c.residual_sq.is_zero());
            assert_eq!(c.accepted, !q.eval(&x).unwrap().is_negative());
        }
    }

    #[test]
    fn float_path_on_gram() {
        let q = sample_q(3);
        let x = [true, true, false];
        let y = MomentVector::<Rational>::rank1_lift(&x, 2);
        let g = gram_from_moments(&y, 2, 1e-9).unwrap();
        let c = certify_lift(&g, &q, 1e-9).unwrap();
        assert!(c.accepted);
        assert!((c.delta - 3.5).abs() < 1e-12);

        let dim = g.dimension();
        let mut dir = DVector::zeros(dim + 1);
        dir[dim] = 1e-3;
        let bad = g.perturbed(&SubsetKey::singleton(0), &dir).unwrap();
        assert!(!certify_lift(&bad, &q, 1e-9).unwrap().accepted);
    }

    #[test]
    fn uncovered_subset() {
        let q = sample_q(3);
        let y = MomentVector::<Rational>::rank1_lift(&[true, true, false], 1);
        let g = gram_from_moments(&y, 0, 1e-9).unwrap();
        assert!(matches!(
            certify_lift(&g, &q, 1e-9),
            Err(Error::Uncovered(_))
        ));
    }
}
