use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lasserre_gap::experiment::{
    content_hash, planted_identities, run_gap, solve_relaxation, ArtifactStore, ExperimentConfig,
    Family, Tolerances, WORKDIR_ENV,
};
use lasserre_gap::gadgets::{
    build_bs_instance, build_usc_instance, reduce_degree, GadgetGraph, GadgetParams,
};
use lasserre_gap::graph::Graph;
use lasserre_gap::lasserre::{build_psi1, build_psi2};
use lasserre_gap::partition::{
    best_balanced_separator, best_sparsest_cut, OracleMode, EXACT_LIMIT,
};
use lasserre_gap::scalar::{format_rational, parse_rational, Rational};
use lasserre_gap::sdp::{to_sdpa_string, SolverOptions, DEFAULT_MAX_ITER, DEFAULT_TOL};
use lasserre_gap::xor3::Xor3Instance;

const EXIT_IDENTITY: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lasserre-gap",
    version,
    about = "Lasserre relaxations and gadget gap instances"
)]
struct Cli {
    /// Directory for artifacts.
    #[arg(long, global = true, env = WORKDIR_ENV, default_value = ".")]
    workdir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleArg {
    /// Exact when the graph is small enough, local search otherwise.
    Auto,
    Exact,
    LocalSearch,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Psi1,
    Psi2,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Target {
    Balance,
    Objective,
    Usc,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Edges,
    Sdpa,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a 3-XOR instance.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "beta")]
        m: Option<usize>,
        #[arg(long)]
        beta: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Plant a hidden satisfying assignment.
        #[arg(long)]
        planted: bool,
    },
    /// Build H_Φ (optionally degree-reduced and/or with the sparsest-cut expanders).
    Build {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        beta: String,
        #[arg(long = "M")]
        multiplier: usize,
        #[arg(long, default_value_t = lasserre_gap::gadgets::DEFAULT_DEGREE_FACTOR)]
        c: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        reduce: bool,
        /// Add D_l and D_r of size λ·M·m each.
        #[arg(long, value_name = "LAMBDA")]
        usc: Option<usize>,
        #[arg(long)]
        d_target: Option<f64>,
    },
    /// Lift the planted assignment and check the completeness identities.
    Lift {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        gadget: PathBuf,
    },
    /// Solve a relaxation family on a graph.
    Solve {
        /// `path:N`, `cycle:N`, `complete:N`, or a gadget/graph artifact.
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum, default_value = "psi1")]
        family: FamilyArg,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Also print the per-member CSV summary.
        #[arg(long)]
        csv: bool,
    },
    /// Integral balanced separator or sparsest cut.
    Brute {
        #[arg(long)]
        graph: String,
        #[arg(long, conflicts_with = "sparsest")]
        tau: Option<f64>,
        #[arg(long)]
        sparsest: bool,
        #[arg(long, value_enum, default_value = "auto")]
        mode: OracleArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Whole pipeline on one configuration.
    Gap {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        beta: String,
        #[arg(long = "M")]
        multiplier: usize,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, conflicts_with = "random")]
        planted: bool,
        #[arg(long)]
        random: bool,
        #[arg(long, value_enum, default_value = "auto")]
        oracle: OracleArg,
        #[arg(long, default_value_t = lasserre_gap::gadgets::DEFAULT_DEGREE_FACTOR)]
        c: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Run a subset of the identity checks and fail with exit code 2 on a mismatch.
    Certify {
        #[arg(long, value_enum, default_value = "all")]
        target: Target,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        gadget: PathBuf,
    },
    /// Write a gadget graph as JSON, an edge list, or an SDPA relaxation member.
    Export {
        #[arg(long)]
        graph: String,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, value_enum, default_value = "psi1")]
        family: FamilyArg,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long, default_value_t = 1)]
        r: usize,
        /// Index of the family member to export.
        #[arg(long, default_value_t = 0)]
        member: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_beta(s: &str) -> Result<Rational> {
    parse_rational(s).ok_or_else(|| anyhow!("β must be an integer or p/q, got {s:?}"))
}

fn load_instance(store: &ArtifactStore, path: &Path) -> Result<(Xor3Instance, Option<Vec<bool>>)> {
    let v = store.get(path, Some("instance"))?;
    let inst = Xor3Instance::from_json(&v["instance"])?;
    let planted = match &v["planted"] {
        Value::Null => None,
        p => Some(
            serde_json::from_value::<Vec<u8>>(p.clone())?
                .into_iter()
                .map(|b| b == 1)
                .collect(),
        ),
    };
    Ok((inst, planted))
}

fn load_gadget(store: &ArtifactStore, path: &Path) -> Result<GadgetGraph> {
    let v = store.get(path, Some("gadget"))?;
    Ok(GadgetGraph::from_json(&v["gadget"])?)
}

fn load_graph(store: &ArtifactStore, spec: &str) -> Result<Graph> {
    if let Some((kind, n)) = spec.split_once(':') {
        if let Ok(n) = n.parse::<usize>() {
            return match kind {
                "path" => Ok(Graph::path(n)),
                "cycle" => Ok(Graph::cycle(n)),
                "complete" => Ok(Graph::complete(n)),
                _ => bail!("unknown graph family {kind:?}"),
            };
        }
    }
    let v = store.get(Path::new(spec), None)?;
    match v["kind"].as_str() {
        Some("gadget") => Ok(GadgetGraph::from_json(&v["gadget"])?.to_graph()?),
        Some("graph") => {
            let g: Graph = serde_json::from_value(v["graph"].clone())?;
            Ok(Graph::from_edges(g.num_vertices(), g.edges())?)
        }
        other => bail!("{spec}: cannot read a graph from a {other:?} artifact"),
    }
}

fn resolve_oracle(choice: OracleArg, vertices: usize) -> OracleMode {
    match choice {
        OracleArg::Exact => OracleMode::Exact,
        OracleArg::LocalSearch => OracleMode::LocalSearch,
        OracleArg::Auto if vertices <= EXACT_LIMIT => OracleMode::Exact,
        OracleArg::Auto => OracleMode::LocalSearch,
    }
}

fn family_of(f: FamilyArg) -> Family {
    match f {
        FamilyArg::Psi1 => Family::Psi1,
        FamilyArg::Psi2 => Family::Psi2,
    }
}

fn emit(store: &ArtifactStore, kind: &str, body: Value) -> Result<()> {
    let (path, _) = store.put(kind, body)?;
    println!("{}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    let store = ArtifactStore::new(&cli.workdir);
    match cli.cmd {
        Cmd::Gen {
            n,
            m,
            beta,
            seed,
            planted,
        } => {
            let m = match (m, beta) {
                (Some(m), _) => m,
                (None, Some(b)) => {
                    ExperimentConfig::new(n, parse_beta(&b)?, 1, 0.25, 1, seed).m()?
                }
                (None, None) => bail!("give --m or --beta"),
            };
            let (inst, x) = if planted {
                let (i, x) = Xor3Instance::sample_planted(n, m, seed)?;
                (i, Some(x))
            } else {
                (Xor3Instance::sample_random(n, m, seed)?, None)
            };
            let planted: Value = match x {
                Some(x) => json!(x.iter().map(|&b| b as u8).collect::<Vec<_>>()),
                None => Value::Null,
            };
            emit(
                &store,
                "instance",
                json!({ "instance_id": inst.id(), "instance": inst.to_json(), "planted": planted }),
            )?;
        }
        Cmd::Build {
            instance,
            beta,
            multiplier,
            c,
            seed,
            reduce,
            usc,
            d_target,
        } => {
            let (inst, _) = load_instance(&store, &instance)?;
            let mut params = GadgetParams::new(parse_beta(&beta)?, multiplier, seed);
            params.degree_factor = c;
            let mut g = build_bs_instance(&inst, &params)?;
            let mut reduction = Value::Null;
            if reduce {
                let r = reduce_degree(&g)?;
                reduction = json!({
                    "removed": r.removed.len(),
                    "shared_pairs": r.shared_pairs,
                    "bound": format_rational(&r.removal_bound()),
                    "within_bound": r.within_bound(),
                    "y_reference": 1000.0 * (inst.m() as f64).powi(2) / inst.n as f64,
                });
                g = r.graph;
            }
            if let Some(lambda) = usc {
                g = build_usc_instance(&g, lambda, d_target)?;
            }
            for c in &g.certificates {
                if !c.certificate.meets_target() {
                    eprintln!(
                        "note: {} expander bound {:.3} ({:?}) below target {}",
                        c.name,
                        c.certificate.lower_bound,
                        c.certificate.method,
                        c.certificate.target
                    );
                }
            }
            let gj = g.to_json();
            emit(
                &store,
                "gadget",
                json!({ "instance_id": inst.id(), "gadget_id": content_hash(&gj), "reduction": reduction, "gadget": gj }),
            )?;
        }
        Cmd::Lift { instance, gadget } => return certify(&store, Target::All, &instance, &gadget),
        Cmd::Certify {
            target,
            instance,
            gadget,
        } => return certify(&store, target, &instance, &gadget),
        Cmd::Solve {
            graph,
            family,
            tau,
            r,
            tol,
            max_iter,
            csv,
        } => {
            let g = load_graph(&store, &graph)?;
            let opts = SolverOptions {
                tol,
                max_iter,
                ..SolverOptions::default()
            };
            let rep = solve_relaxation(&g, family_of(family), tau, r, &opts)?;
            if csv {
                print!("{}", rep.csv());
            }
            let converged = rep.converged;
            emit(&store, "solve", json!({ "graph": graph, "report": rep }))?;
            if !converged {
                eprintln!("solver did not converge on every member");
                return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
            }
        }
        Cmd::Brute {
            graph,
            tau,
            sparsest,
            mode,
            seed,
        } => {
            let g = load_graph(&store, &graph)?;
            let mode = resolve_oracle(mode, g.num_vertices());
            let (cut, stats) = if sparsest {
                best_sparsest_cut(&g, mode, seed)?
            } else {
                let tau = tau.ok_or_else(|| anyhow!("give --tau or --sparsest"))?;
                best_balanced_separator(&g, tau, mode, seed)?
            };
            emit(
                &store,
                "cut",
                json!({ "graph": graph, "mode": mode, "tau": tau, "stats": stats, "witness": cut.to_json() }),
            )?;
        }
        Cmd::Gap {
            n,
            beta,
            multiplier,
            tau,
            r,
            seed,
            planted: _,
            random,
            oracle,
            c,
            tol,
            max_iter,
            csv,
        } => {
            let mut cfg = ExperimentConfig::new(n, parse_beta(&beta)?, multiplier, tau, r, seed);
            cfg.planted = !random;
            cfg.degree_factor = c;
            cfg.max_iter = max_iter;
            cfg.tolerances = Tolerances {
                solver: tol,
                ..Tolerances::default()
            };
            let vertices = (2 * multiplier + 5) * cfg.m()?;
            cfg.oracle = resolve_oracle(oracle, vertices);
            let rep = run_gap(&cfg)?;
            if csv {
                print!("{}", rep.sdp.csv());
            }
            eprintln!(
                "sdp {:.6} integral {} ({:?}) ratio {}",
                rep.sdp.value,
                rep.integral.value,
                rep.integral.mode,
                rep.gap_ratio.map_or("n/a".into(), |r| format!("{r:.6}"))
            );
            let (ids, conv) = (rep.identities_accepted(), rep.sdp.converged);
            emit(&store, "gap-report", serde_json::to_value(&rep)?)?;
            if !ids {
                eprintln!("identity check failed");
                return Ok(ExitCode::from(EXIT_IDENTITY));
            }
            if !conv {
                eprintln!("solver did not converge on every member");
                return Ok(ExitCode::from(EXIT_NOT_CONVERGED));
            }
        }
        Cmd::Export {
            graph,
            format,
            family,
            tau,
            r,
            member,
            out,
        } => {
            let text = match format {
                Format::Json | Format::Edges => {
                    let v = store.get(Path::new(&graph), Some("gadget"))?;
                    let g = GadgetGraph::from_json(&v["gadget"])?;
                    match format {
                        Format::Json => serde_json::to_string_pretty(&g.to_json())? + "\n",
                        _ => g.to_edge_list(),
                    }
                }
                Format::Sdpa => {
                    let g = load_graph(&store, &graph)?;
                    let fam = match family {
                        FamilyArg::Psi1 => {
                            build_psi1(&g, tau.ok_or_else(|| anyhow!("Ψ1 needs --tau"))?, r)?
                        }
                        FamilyArg::Psi2 => build_psi2(&g, r)?,
                    };
                    let (_, l) = fam.get(member).ok_or_else(|| {
                        anyhow!("member {member} out of range (family has {})", fam.len())
                    })?;
                    to_sdpa_string(&l.to_sdp_problem()?)?
                }
            };
            std::fs::write(&out, text).with_context(|| format!("writing {}", out.display()))?;
            println!("{}", out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn certify(
    store: &ArtifactStore,
    target: Target,
    instance: &Path,
    gadget: &Path,
) -> Result<ExitCode> {
    let (inst, planted) = load_instance(store, instance)?;
    let x = planted.ok_or_else(|| anyhow!("identity checks need a planted instance"))?;
    let g = load_gadget(store, gadget)?;
    let checks: Vec<_> = planted_identities(&inst, &x, &g)?
        .into_iter()
        .filter(|c| match target {
            Target::All => true,
            Target::Balance => c.identity.contains("balance"),
            Target::Objective => c.identity.starts_with("bs-objective"),
            Target::Usc => c.identity.starts_with("usc"),
        })
        .collect();
    if checks.is_empty() {
        bail!("no identity matches that target on a {:?} graph", g.stage);
    }
    let accepted = checks.iter().all(|c| c.accepted);
    for c in &checks {
        eprintln!(
            "{:<24} expected {:<16} observed {:<16} {}",
            c.identity,
            c.expected,
            c.observed,
            if c.accepted { "ok" } else { "FAILED" }
        );
    }
    emit(
        store,
        "certificate",
        json!({ "instance_id": inst.id(), "gadget_id": content_hash(&g.to_json()), "checks": checks, "accepted": accepted }),
    )?;
    Ok(if accepted {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_IDENTITY)
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
