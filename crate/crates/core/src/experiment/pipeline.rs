use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::identities::planted_identities;
use super::store::{content_hash, SCHEMA};
use crate::certificates::{identity_check, IdentityCheck};
use crate::error::{Error, Result};
use crate::gadgets::{build_bs_instance, GadgetGraph, GadgetParams};
use crate::graph::Graph;
use crate::lasserre::{build_psi1, build_psi2, solve_family, FamilySolve};
use crate::partition::{
    best_balanced_separator, bs_soundness_reference, OracleMode, SoundnessReference, EXACT_LIMIT,
};
use crate::poly::count_subsets;
use crate::scalar::{format_rational, rat_int};
use crate::sdp::{SolveStatus, SolverOptions};
use crate::xor3::Xor3Instance;

/// Largest moment vector a pipeline solve will assemble.
pub const MOMENT_GUARD: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Balanced separator, one member per admissible side size.
    Psi1,
    /// Uniform sparsest cut, one member per side size up to |V|/2.
    Psi2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRow {
    pub tau_prime: String,
    pub value: f64,
    pub primal_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: Family,
    pub round: usize,
    pub tau: Option<f64>,
    pub members: Vec<MemberRow>,
    pub value: f64,
    pub best_tau_prime: String,
    pub converged: bool,
}

impl FamilyReport {
    fn from_solve(family: Family, round: usize, tau: Option<f64>, s: &FamilySolve) -> Self {
        let members = s
            .members
            .iter()
            .map(|(t, l)| MemberRow {
                tau_prime: format_rational(t),
                value: l.value,
                primal_residual: l.solution.primal_residual,
                min_eigenvalue: l.solution.min_eigenvalue(),
                iterations: l.solution.iterations,
                status: l.solution.status,
            })
            .collect::<Vec<_>>();
        FamilyReport {
            family,
            round,
            tau,
            value: s.value(),
            best_tau_prime: members[s.best].tau_prime.clone(),
            members,
            converged: s.all_converged(),
        }
    }

    pub fn csv(&self) -> String {
        let mut s =
            String::from("tau_prime,value,primal_residual,min_eigenvalue,iterations,status\n");
        for r in &self.members {
            let _ = writeln!(
                s,
                "{},{:.12e},{:.3e},{:.3e},{},{:?}",
                r.tau_prime, r.value, r.primal_residual, r.min_eigenvalue, r.iterations, r.status
            );
        }
        s
    }
}

/// Builds and solves a relaxation family on `g`, refusing oversized moment vectors.
pub fn solve_relaxation(
    g: &Graph,
    family: Family,
    tau: Option<f64>,
    round: usize,
    opts: &SolverOptions,
) -> Result<FamilyReport> {
    let moments = count_subsets(g.num_vertices(), 2 * round);
    if moments > MOMENT_GUARD {
        return Err(Error::Guard(format!(
            "{moments} moments for |V| = {} at r = {round} exceed the guard of {MOMENT_GUARD}",
            g.num_vertices()
        )));
    }
    let fam = match family {
        Family::Psi1 => build_psi1(
            g,
            tau.ok_or_else(|| Error::InvalidParameter("Ψ1 needs τ".into()))?,
            round,
        )?,
        Family::Psi2 => build_psi2(g, round)?,
    };
    let s = solve_family(&fam, opts)?;
    Ok(FamilyReport::from_solve(family, round, tau, &s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralReport {
    pub mode: OracleMode,
    pub value: u64,
    pub side: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub instance_id: String,
    pub gadget_id: String,
    pub vertices: usize,
    pub edges: usize,
    pub sdp: FamilyReport,
    pub integral: IntegralReport,
    /// `integral / sdp`; absent when the relaxation value is not positive.
    pub gap_ratio: Option<f64>,
    /// Lower limit the ratio must respect when the integral value is exact.
    pub ratio_floor: f64,
    /// `5m`, the value of the planted completeness solution.
    pub completeness_value: Option<u64>,
    pub identities: Vec<IdentityCheck>,
    pub soundness_reference: Option<SoundnessReference>,
    pub wall_times: BTreeMap<String, f64>,
}

impl GapReport {
    pub fn identities_accepted(&self) -> bool {
        self.identities.iter().all(|c| c.accepted)
    }

    /// With an exact oracle the relaxation may not beat the integral optimum.
    pub fn ratio_sound(&self) -> bool {
        self.integral.mode != OracleMode::Exact
            || self.gap_ratio.is_none_or(|r| r >= self.ratio_floor)
    }
}

pub fn instance_for(cfg: &ExperimentConfig) -> Result<(Xor3Instance, Option<Vec<bool>>)> {
    let m = cfg.m()?;
    if cfg.planted {
        let (inst, x) = Xor3Instance::sample_planted(cfg.n, m, cfg.seed)?;
        Ok((inst, Some(x)))
    } else {
        Ok((Xor3Instance::sample_random(cfg.n, m, cfg.seed)?, None))
    }
}

pub fn gadget_params(cfg: &ExperimentConfig) -> GadgetParams {
    let mut p = GadgetParams::new(cfg.beta.clone(), cfg.multiplier, cfg.seed);
    p.degree_factor = cfg.degree_factor;
    p
}

/// generate → build → lift → solve → integral optimum → ratio.
pub fn run_gap(cfg: &ExperimentConfig) -> Result<GapReport> {
    cfg.validate()?;
    let mut times = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, times: &mut BTreeMap<String, f64>| {
        times.insert(name.to_string(), clock.elapsed().as_secs_f64());
        clock = Instant::now();
    };
    let (inst, planted) = instance_for(cfg)?;
    let h: GadgetGraph = build_bs_instance(&inst, &gadget_params(cfg))?;
    let g = h.to_graph()?;
    lap("build", &mut times);

    let m = inst.m() as i64;
    let mut identities = match &planted {
        Some(x) => planted_identities(&inst, x, &h)?,
        None => vec![identity_check(
            "host-vertices",
            &rat_int((2 * cfg.multiplier as i64 + 5) * m),
            &rat_int(h.num_vertices() as i64),
            0.0,
        )],
    };
    if let Some(x) = &planted {
        identities.push(identity_check(
            "planted-satisfies-all",
            &rat_int(m),
            &rat_int(inst.satisfied_count(x)? as i64),
            0.0,
        ));
    }
    lap("lift", &mut times);

    if cfg.oracle == OracleMode::Exact && g.num_vertices() > EXACT_LIMIT {
        return Err(Error::Guard(format!(
            "exact oracle limited to {EXACT_LIMIT} vertices; H_Φ has {} (use the local-search oracle)",
            g.num_vertices()
        )));
    }
    let opts = SolverOptions {
        tol: cfg.tolerances.solver,
        max_iter: cfg.max_iter,
        ..SolverOptions::default()
    };
    let sdp = solve_relaxation(&g, Family::Psi1, Some(cfg.tau), cfg.round, &opts)?;
    lap("solve", &mut times);

    let (cut, stats) = best_balanced_separator(&g, cfg.tau, cfg.oracle, cfg.seed)?;
    lap("integral", &mut times);

    let gap_ratio = (sdp.value > cfg.tolerances.solver).then(|| stats.crossing as f64 / sdp.value);
    Ok(GapReport {
        schema: SCHEMA.into(),
        config: cfg.clone(),
        instance_id: inst.id(),
        gadget_id: content_hash(&h.to_json()),
        vertices: g.num_vertices(),
        edges: g.num_edges(),
        sdp,
        integral: IntegralReport {
            mode: cfg.oracle,
            value: stats.crossing,
            side: cut.vertices(),
        },
        gap_ratio,
        ratio_floor: 1.0 - 10.0 * cfg.tolerances.solver,
        completeness_value: planted.as_ref().map(|_| 5 * inst.m() as u64),
        identities,
        soundness_reference: bs_soundness_reference(cfg.tau, inst.m()).ok(),
        wall_times: times,
    })
}
