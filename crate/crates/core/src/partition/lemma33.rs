use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadgets::{left_rep_degrees, GadgetGraph, VertexRole};
use crate::scalar::Rational;
use crate::xor3::Xor3Instance;

/// A literal `x_var = bit`.
pub type Literal = (u32, bool);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma33Check {
    pub literals: usize,
    /// Left-rep edges landing on the literals' representatives.
    pub deg: usize,
    /// Left vertices whose three literals all lie in the set.
    pub contained: usize,
    /// `6m|L′|/n · (1 − 20/√β)`
    pub degree_floor: f64,
    /// `m|L′|³/(2n³) · (1 + 100/√β)`
    pub contained_ceiling: f64,
    pub bound1_ok: bool,
    pub bound2_ok: bool,
    /// The bounds only speak about sets with `|L′| ≥ n/3`.
    pub meaningful: bool,
}

/// Measures the degree and containment counts of a literal set on `h`.
/// The two bounds are descriptive; nothing here asserts them.
pub fn check_lemma33(
    inst: &Xor3Instance,
    h: &GadgetGraph,
    literals: &[Literal],
) -> Result<Lemma33Check> {
    if h.provenance != inst.id() {
        return Err(Error::Provenance(
            "gadget graph was not built from this instance".into(),
        ));
    }
    let n = inst.n;
    let mut member = vec![false; 2 * n];
    for &(var, bit) in literals {
        if var as usize >= n {
            return Err(Error::IndexOutOfRange {
                index: var as usize,
                len: n,
            });
        }
        let k = 2 * var as usize + bit as usize;
        if member[k] {
            return Err(Error::InvalidParameter(format!(
                "literal ({var}, {bit}) repeated"
            )));
        }
        member[k] = true;
    }
    let lay = h.layout();
    let reps = left_rep_degrees(h);
    let deg: usize = (0..n)
        .flat_map(|v| [false, true].map(move |b| (v, b)))
        .filter(|&(v, b)| member[2 * v + b as usize])
        .map(|(v, b)| reps[lay.rep(v, b) as usize])
        .sum();
    let contained = h
        .roles
        .iter()
        .filter(|r| match r {
            VertexRole::Left {
                constraint,
                assignment,
            } => {
                let c = &inst.constraints[*constraint as usize];
                (0..3).all(|z| member[2 * c.vars[z] as usize + assignment[z] as usize])
            }
            _ => false,
        })
        .count();
    let (m, nf, l) = (inst.m() as f64, n as f64, literals.len() as f64);
    let beta = inst.m() as f64 / nf;
    let degree_floor = 6.0 * m * l / nf * (1.0 - 20.0 / beta.sqrt());
    let contained_ceiling = m * l.powi(3) / (2.0 * nf.powi(3)) * (1.0 + 100.0 / beta.sqrt());
    Ok(Lemma33Check {
        literals: literals.len(),
        deg,
        contained,
        degree_floor,
        contained_ceiling,
        bound1_ok: deg as f64 >= degree_floor,
        bound2_ok: contained as f64 <= contained_ceiling,
        meaningful: 3 * literals.len() >= n,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReference {
    pub value: f64,
    /// Exact value when the formula is rational in its inputs.
    #[serde(with = "crate::scalar::serde_rational_opt")]
    pub exact: Option<Rational>,
    /// The `O(1/√β)` and `O(1/M)` corrections have unknown constants and are left out.
    pub corrections_omitted: bool,
}

/// Leading term `4m(3τ − τ³)` of the balanced-separator soundness bound.
pub fn bs_soundness_reference(tau: f64, m: usize) -> Result<SoundnessReference> {
    if !(tau > 1.0 / 3.0 && tau < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "τ = {tau} outside (1/3, 1/2)"
        )));
    }
    Ok(SoundnessReference {
        value: 4.0 * m as f64 * (3.0 * tau - tau.powi(3)),
        exact: None,
        corrections_omitted: true,
    })
}

/// `γ = (1 + 1/(100M)) · (2M+10)m / (1001Mm)²` for the sparsest-cut instance.
pub fn usc_soundness_reference(multiplier: usize, m: usize) -> Result<SoundnessReference> {
    if multiplier == 0 || m == 0 {
        return Err(Error::InvalidParameter("M and m must be positive".into()));
    }
    let mm = multiplier as i64;
    let mi = m as i64;
    let factor = Rational::new((100 * mm + 1).into(), (100 * mm).into());
    let denom = 1001 * mm * mi;
    let gamma = factor * Rational::new(((2 * mm + 10) * mi).into(), (denom * denom).into());
    Ok(SoundnessReference {
        value: crate::scalar::Scalar::to_f64_lossy(&gamma),
        exact: Some(gamma),
        corrections_omitted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_bs_instance, GadgetParams};
    use crate::scalar::{rat, rat_int};

    #[test]
    fn reference_values() {
        let r = bs_soundness_reference(0.45, 8).unwrap();
        assert!((r.value - 40.284).abs() < 1e-12);
        assert!(r.corrections_omitted);
        let near = bs_soundness_reference(1.0 / 3.0 + 1e-9, 3).unwrap().value;
        assert!((near - 12.0 * 26.0 / 27.0).abs() < 1e-6);
        assert!(bs_soundness_reference(1.0 / 3.0, 3).is_err());
        assert!(bs_soundness_reference(0.5, 3).is_err());
        // (201/200) · 112 / 16016²
        let g = usc_soundness_reference(2, 8).unwrap();
        assert_eq!(g.exact, Some(rat(201, 200) * rat(112, 16016 * 16016)));
    }

    #[test]
    fn extreme_literal_sets() {
        let (inst, _) = Xor3Instance::sample_planted(6, 24, 2).unwrap();
        let h = build_bs_instance(&inst, &GadgetParams::new(rat_int(4), 2, 2)).unwrap();
        let none = check_lemma33(&inst, &h, &[]).unwrap();
        assert_eq!((none.deg, none.contained), (0, 0));
        assert!(!none.meaningful);
        let all: Vec<Literal> = (0..6).flat_map(|v| [(v, false), (v, true)]).collect();
        let full = check_lemma33(&inst, &h, &all).unwrap();
        assert_eq!((full.deg, full.contained), (12 * 24, 4 * 24));
        assert!(check_lemma33(&inst, &h, &[(6, true)]).is_err());
        assert!(check_lemma33(&inst, &h, &[(1, true), (1, true)]).is_err());
    }
}
