use serde::{Deserialize, Serialize};

use super::build::{left_rep_degrees, ZR_ATTACH_DEGREE};
use super::graph::{EdgeTag, GadgetGraph, Stage, VertexRole};
use crate::xor3::Xor3Instance;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: usize,
    pub failures: Vec<String>,
}

impl AuditReport {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Cardinality and wiring audit of a gadget graph against its source instance.
pub fn audit(g: &GadgetGraph, inst: &Xor3Instance) -> AuditReport {
    let mut r = AuditReport::default();
    let lay = g.layout();
    let nv = g.roles.len();
    r.check(g.provenance == inst.id(), || {
        "provenance does not match instance".into()
    });
    r.check(inst.m() == g.m && inst.n == g.n, || {
        "instance size mismatch".into()
    });
    if !r.passed() {
        return r;
    }
    r.check(nv == lay.total(), || {
        format!("{nv} vertices, layout says {}", lay.total())
    });
    r.check(lay.h_size() == (2 * g.params.multiplier + 5) * g.m, || {
        format!("host has {} vertices, expected (2M+5)m", lay.h_size())
    });
    if nv != lay.total() {
        return r;
    }

    // roles sit at their canonical positions
    let mut misplaced = 0usize;
    for (i, c) in inst.constraints.iter().enumerate() {
        for (k, a) in c.satisfying().iter().enumerate() {
            let want = VertexRole::Left {
                constraint: i as u32,
                assignment: *a,
            };
            misplaced += (g.roles[lay.left(i, k) as usize] != want) as usize;
        }
    }
    for var in 0..g.n {
        for bit in [false, true] {
            for copy in 1..=lay.clique {
                let want = VertexRole::Clique {
                    var: var as u32,
                    bit,
                    copy: copy as u32,
                };
                misplaced += (g.roles[lay.clique_vertex(var, bit, copy) as usize] != want) as usize;
            }
        }
    }
    for k in 0..g.m {
        misplaced += (g.roles[lay.zr(k) as usize] != VertexRole::Zr { index: k as u32 }) as usize;
    }
    for k in 0..lay.d {
        misplaced += (g.roles[lay.dl(k) as usize] != VertexRole::Dl { index: k as u32 }) as usize;
        misplaced += (g.roles[lay.dr(k) as usize] != VertexRole::Dr { index: k as u32 }) as usize;
    }
    r.check(misplaced == 0, || {
        format!("{misplaced} vertices out of canonical order")
    });
    for (i, role) in g.roles.iter().enumerate() {
        if let VertexRole::Left {
            constraint,
            assignment,
        } = role
        {
            let c = &inst.constraints[*constraint as usize];
            let ok = (assignment[0] ^ assignment[1] ^ assignment[2]) == c.parity;
            r.check(ok, || {
                format!("left vertex {i} carries a violating assignment")
            });
        }
    }
    let count = |f: fn(&VertexRole) -> bool| g.count_role(f);
    r.check(
        count(|v| matches!(v, VertexRole::Left { .. })) == 4 * g.m,
        || "|L| ≠ 4m".into(),
    );
    r.check(
        count(|v| matches!(v, VertexRole::Clique { .. })) == 2 * g.n * lay.clique,
        || "|R| ≠ 2n·Mβ".into(),
    );
    r.check(count(|v| matches!(v, VertexRole::Zr { .. })) == g.m, || {
        "|Z_r| ≠ m".into()
    });

    // simple graph
    let mut pairs: Vec<(u32, u32)> = g.edges.iter().map(|e| (e.u, e.v)).collect();
    let loops = pairs.iter().filter(|p| p.0 >= p.1).count();
    r.check(loops == 0, || {
        format!("{loops} self-loops or unordered edges")
    });
    r.check(pairs.iter().all(|p| (p.1 as usize) < nv), || {
        "edge endpoint out of range".into()
    });
    pairs.sort_unstable();
    let dups = pairs.windows(2).filter(|w| w[0] == w[1]).count();
    r.check(dups == 0, || format!("{dups} duplicate edges"));
    drop(pairs);

    let is = |v: u32, f: fn(&VertexRole) -> bool| f(&g.roles[v as usize]);
    let left = |v: &VertexRole| matches!(v, VertexRole::Left { .. });
    let zr = |v: &VertexRole| matches!(v, VertexRole::Zr { .. });
    let dl = |v: &VertexRole| matches!(v, VertexRole::Dl { .. });
    let dr = |v: &VertexRole| matches!(v, VertexRole::Dr { .. });
    let host = |v: &VertexRole| !matches!(v, VertexRole::Dl { .. } | VertexRole::Dr { .. });

    let mut zr_left = vec![0usize; nv];
    let mut left_zr: Vec<Vec<u32>> = vec![Vec::new(); 4 * g.m];
    let mut left_rep = vec![0usize; 4 * g.m];
    let mut clique_edges = vec![0usize; 2 * g.n];
    let mut zr_exp = vec![0usize; nv];
    let mut dlink_l = vec![0usize; nv];
    let mut dlink_r = vec![0usize; nv];
    let mut d_hit = vec![0usize; nv];
    let mut bad_tag = 0usize;
    for e in &g.edges {
        let (u, v) = (e.u, e.v);
        match e.tag {
            EdgeTag::Clique => match (g.roles[u as usize], g.roles[v as usize]) {
                (
                    VertexRole::Clique { var: a, bit: p, .. },
                    VertexRole::Clique { var: b, bit: q, .. },
                ) if a == b && p == q => clique_edges[2 * a as usize + p as usize] += 1,
                _ => bad_tag += 1,
            },
            EdgeTag::LeftRep => {
                let VertexRole::Left {
                    constraint,
                    assignment,
                } = g.roles[u as usize]
                else {
                    bad_tag += 1;
                    continue;
                };
                let VertexRole::Clique { var, bit, copy } = g.roles[v as usize] else {
                    bad_tag += 1;
                    continue;
                };
                let c = &inst.constraints[constraint as usize];
                let consistent =
                    copy == 1 && (0..3).any(|z| c.vars[z] == var && assignment[z] == bit);
                bad_tag += (!consistent) as usize;
                left_rep[u as usize] += 1;
            }
            EdgeTag::LeftZr => {
                if is(u, left) && is(v, zr) {
                    left_zr[u as usize].push(v);
                    zr_left[v as usize] += 1;
                } else {
                    bad_tag += 1;
                }
            }
            EdgeTag::ZrExpander => {
                if is(u, zr) && is(v, zr) {
                    zr_exp[u as usize] += 1;
                    zr_exp[v as usize] += 1;
                } else {
                    bad_tag += 1;
                }
            }
            EdgeTag::DExpander => {
                if !((is(u, dl) && is(v, dl)) || (is(u, dr) && is(v, dr))) {
                    bad_tag += 1;
                }
            }
            EdgeTag::DLink => {
                if !is(u, host) {
                    bad_tag += 1;
                } else if is(v, dl) {
                    dlink_l[u as usize] += 1;
                    d_hit[v as usize] += 1;
                } else if is(v, dr) {
                    dlink_r[u as usize] += 1;
                    d_hit[v as usize] += 1;
                } else {
                    bad_tag += 1;
                }
            }
        }
    }
    r.check(bad_tag == 0, || {
        format!("{bad_tag} edges whose tag does not fit their endpoints")
    });
    let full = lay.clique * (lay.clique - 1) / 2;
    r.check(clique_edges.iter().all(|&c| c == full), || {
        "a literal clique is not complete".into()
    });
    r.check(
        (0..g.m).all(|k| zr_left[lay.zr(k) as usize] == ZR_ATTACH_DEGREE),
        || "a Z_r vertex does not have exactly 8 left-zr edges".into(),
    );
    r.check(left_zr.iter().all(|z| z.len() == 2 && z[0] != z[1]), || {
        "a left vertex lacks two distinct Z_r neighbours".into()
    });
    if !g.reduced {
        r.check(left_rep.iter().all(|&d| d == 3), || {
            "a left vertex lacks 3 left-rep edges".into()
        });
    } else {
        r.check(left_rep.iter().all(|&d| d <= 3), || {
            "a left vertex has > 3 left-rep edges".into()
        });
    }
    if let Some(cert) = g.certificate("zr") {
        r.check(
            (0..g.m).all(|k| zr_exp[lay.zr(k) as usize] == cert.degree),
            || "Z_r expander is not regular".into(),
        );
    }

    // closed-form degree bounds once the host has been reduced
    if g.reduced {
        let reps = left_rep_degrees(g);
        let bm = lay.clique;
        r.check(reps.iter().all(|&d| d <= bm + 1), || {
            "a representative exceeds βM+1 left-rep edges".into()
        });
        let mut deg = vec![0usize; nv];
        for e in &g.edges {
            deg[e.u as usize] += 1;
            deg[e.v as usize] += 1;
        }
        let links = if g.stage == Stage::Usc { 2 } else { 0 };
        let zr_deg = g.certificate("zr").map_or(0, |c| c.degree);
        let d_deg = g.params.expander_degree();
        let over = g
            .roles
            .iter()
            .zip(&deg)
            .filter(|(role, &d)| {
                let cap = match role {
                    VertexRole::Left { .. } => 5 + links,
                    VertexRole::Clique { .. } => bm - 1 + bm + 1 + links,
                    VertexRole::Zr { .. } => zr_deg + ZR_ATTACH_DEGREE + links,
                    VertexRole::Dl { .. } | VertexRole::Dr { .. } => d_deg + 1,
                };
                d > cap
            })
            .count();
        r.check(over == 0, || {
            format!("{over} vertices above their role degree bound")
        });
    }

    if g.stage == Stage::Usc {
        r.check(count(dl) == lay.d && count(dr) == lay.d, || {
            "|D_l| or |D_r| ≠ λMm".into()
        });
        r.check(
            (0..lay.h_size()).all(|v| dlink_l[v] == 1 && dlink_r[v] == 1),
            || "a host vertex lacks one link into each of D_l and D_r".into(),
        );
        r.check(d_hit.iter().all(|&h| h <= 1), || {
            "d-links are not injective".into()
        });
        let d_edges = g.count_tag(EdgeTag::DExpander);
        let want: usize = ["dl", "dr"]
            .iter()
            .filter_map(|n| g.certificate(n))
            .map(|c| lay.d * c.degree / 2)
            .sum();
        r.check(d_edges == want, || {
            format!("{d_edges} D-expander edges, expected {want}")
        });
    } else {
        r.check(g.count_tag(EdgeTag::DLink) == 0, || {
            "d-links before USC stage".into()
        });
    }
    r
}
