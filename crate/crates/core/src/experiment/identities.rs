use crate::certificates::{
    bound_check, bs_balance_residual, bs_objective, identity_check, lift_bs_solution,
    lift_usc_solution, usc_objective, IdentityCheck,
};
use crate::error::Result;
use crate::gadgets::{audit, GadgetGraph, Stage};
use crate::scalar::{rat, rat_int, Rational};
use crate::xor3::{perfect_solution_from_assignment, Xor3Instance};

/// The exact completeness checks for a planted assignment on `g` (any stage).
///
/// The edge-sum identities only have closed forms before degree reduction;
/// on a reduced host the observed value is listed against the unreduced
/// expectation as an upper bound.
pub fn planted_identities(
    inst: &Xor3Instance,
    x: &[bool],
    g: &GadgetGraph,
) -> Result<Vec<IdentityCheck>> {
    let host = g.host_part();
    let m = g.m as i64;
    let mm = g.params.multiplier as i64;
    let base = perfect_solution_from_assignment::<Rational>(inst, x, 3)?;
    let sol = lift_bs_solution(&base, inst, &host, 1)?;
    let mut out = Vec::new();
    let rep = audit(g, inst);
    out.push(IdentityCheck {
        identity: "structural-audit".into(),
        expected: format!("{} checks", rep.checks),
        observed: format!("{} failures", rep.failures.len()),
        residual: rep.failures.len() as f64,
        accepted: rep.passed(),
    });
    out.push(identity_check(
        "host-vertices",
        &rat_int((2 * mm + 5) * m),
        &rat_int(host.num_vertices() as i64),
        0.0,
    ));
    let obj = bs_objective(&sol)?.total;
    if host.reduced {
        out.push(bound_check("bs-objective", &rat_int(5 * m), &obj));
    } else {
        out.push(identity_check("bs-objective", &rat_int(5 * m), &obj, 0.0));
    }
    let bal = bs_balance_residual(&sol, 0.0)?;
    out.push(identity_check(
        "bs-balance",
        &rat_int((mm + 1) * m),
        &bal.delta,
        0.0,
    ));
    out.push(identity_check(
        "bs-balance-residual",
        &rat_int(0),
        &bal.residual_sq,
        0.0,
    ));
    if g.stage == Stage::Usc {
        let lambda = g.params.d_scale.expect("USC graphs record λ") as i64;
        let nv = g.num_vertices() as i64;
        out.push(identity_check(
            "usc-vertices",
            &rat_int((2 * lambda * mm + 2 * mm + 5) * m),
            &rat_int(nv),
            0.0,
        ));
        let us = lift_usc_solution(&sol, g)?;
        let side = ((lambda + 1) * mm + 1) * m;
        let tau = rat(side, nv);
        let ub = bs_balance_residual(&us, 0.0)?;
        out.push(identity_check(
            "usc-balance",
            &rat_int(side),
            &ub.delta,
            0.0,
        ));
        out.push(identity_check(
            "usc-balance-residual",
            &rat_int(0),
            &ub.residual_sq,
            0.0,
        ));
        let o = usc_objective(&us, &tau, 0.0)?;
        let raw_expected = if host.reduced {
            None
        } else {
            Some(rat_int((2 * mm + 10) * m))
        };
        match raw_expected {
            Some(e) => {
                out.push(identity_check("usc-objective", &e, &o.raw, 0.0));
                let scaled = e / (rat_int(side) * rat_int(nv - side));
                out.push(identity_check("usc-scaled", &scaled, &o.scaled, 0.0));
            }
            None => out.push(bound_check(
                "usc-objective",
                &rat_int((2 * mm + 10) * m),
                &o.raw,
            )),
        }
        out.push(bound_check("usc-scaled-bound", &o.paper_bound, &o.scaled));
    }
    Ok(out)
}
