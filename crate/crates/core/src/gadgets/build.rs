use serde::{Deserialize, Serialize};

use super::expander::{regular_multigraph, sample_expander};
use super::graph::{
    EdgeTag, GadgetEdge, GadgetGraph, GadgetParams, Layout, NamedCertificate, Stage, VertexRole,
};
use crate::error::{Error, Result};
use crate::scalar::{format_rational, Rational};
use crate::xor3::{derive_seed, Xor3Instance};

/// Each left vertex sends two edges into Z_r, so every Z_r vertex sees eight.
pub const ZR_ATTACH_DEGREE: usize = 8;

fn edge(u: u32, v: u32, tag: EdgeTag) -> GadgetEdge {
    GadgetEdge {
        u: u.min(v),
        v: u.max(v),
        tag,
    }
}

/// Builds H_Φ: satisfying-assignment left vertices, literal cliques, and the
/// Z_r expander that left vertices attach to. Z_r only has `m` vertices, so an
/// expansion of `M` can be out of reach; the certificate records what was found.
pub fn build_bs_instance(inst: &Xor3Instance, params: &GadgetParams) -> Result<GadgetGraph> {
    let (n, m) = (inst.n, inst.m());
    let clique = params.clique_size()?;
    let expected_m = &params.beta * Rational::from_integer(n.into());
    if expected_m != Rational::from_integer(m.into()) {
        return Err(Error::InvalidParameter(format!(
            "m = {m} but β·n = {}",
            format_rational(&expected_m)
        )));
    }
    if m < 2 {
        return Err(Error::InvalidParameter("Z_r attachment needs m ≥ 2".into()));
    }
    let layout = Layout { n, m, clique, d: 0 };
    let mut roles = Vec::with_capacity(layout.h_size());
    for (i, c) in inst.constraints.iter().enumerate() {
        for a in c.satisfying() {
            roles.push(VertexRole::Left {
                constraint: i as u32,
                assignment: a,
            });
        }
    }
    for var in 0..n as u32 {
        for bit in [false, true] {
            for copy in 1..=clique as u32 {
                roles.push(VertexRole::Clique { var, bit, copy });
            }
        }
    }
    roles.extend((0..m as u32).map(|index| VertexRole::Zr { index }));

    let mut edges = Vec::new();
    for var in 0..n {
        for bit in [false, true] {
            for a in 1..=clique {
                for b in a + 1..=clique {
                    edges.push(edge(
                        layout.clique_vertex(var, bit, a),
                        layout.clique_vertex(var, bit, b),
                        EdgeTag::Clique,
                    ));
                }
            }
        }
    }
    for (i, c) in inst.constraints.iter().enumerate() {
        for (k, a) in c.satisfying().iter().enumerate() {
            for z in 0..3 {
                edges.push(edge(
                    layout.left(i, k),
                    layout.rep(c.vars[z] as usize, a[z]),
                    EdgeTag::LeftRep,
                ));
            }
        }
    }
    let attach = regular_multigraph(m, ZR_ATTACH_DEGREE, derive_seed(params.seed, 1))?;
    debug_assert_eq!(attach.len(), 4 * m);
    for (k, &(a, b)) in attach.iter().enumerate() {
        let l = k as u32;
        edges.push(edge(l, layout.zr(a as usize), EdgeTag::LeftZr));
        edges.push(edge(l, layout.zr(b as usize), EdgeTag::LeftZr));
    }
    let (zr_edges, cert) = sample_expander(
        m,
        params.expander_degree(),
        params.multiplier as f64,
        derive_seed(params.seed, 2),
    )?;
    edges.extend(zr_edges.iter().map(|&(a, b)| {
        edge(
            layout.zr(a as usize),
            layout.zr(b as usize),
            EdgeTag::ZrExpander,
        )
    }));
    Ok(GadgetGraph {
        params: params.clone(),
        stage: Stage::Bs,
        n,
        m,
        provenance: inst.id(),
        reduced: false,
        roles,
        edges,
        certificates: vec![NamedCertificate {
            name: "zr".into(),
            certificate: cert,
        }],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub graph: GadgetGraph,
    pub removed: Vec<(u32, u32)>,
    /// Unordered pairs of left-rep edges sharing a representative.
    pub shared_pairs: u64,
    /// `βM`, the removal threshold.
    pub threshold: usize,
}

impl Reduction {
    /// `2Y/(βM)` as an exact rational.
    pub fn removal_bound(&self) -> Rational {
        Rational::new((2 * self.shared_pairs).into(), self.threshold.into())
    }

    pub fn within_bound(&self) -> bool {
        Rational::from_integer(self.removed.len().into()) <= self.removal_bound()
    }
}

/// Left-rep degree of every vertex (zero off the representatives).
pub fn left_rep_degrees(h: &GadgetGraph) -> Vec<usize> {
    let mut deg = vec![0usize; h.roles.len()];
    for e in h.edges.iter().filter(|e| e.tag == EdgeTag::LeftRep) {
        deg[e.u as usize] += 1;
        deg[e.v as usize] += 1;
    }
    for (i, r) in h.roles.iter().enumerate() {
        if matches!(r, VertexRole::Left { .. }) {
            deg[i] = 0;
        }
    }
    deg
}

/// Single pass over left-rep edges: an edge goes when its representative has
/// more than `βM` other left-rep edges, judged on the input degrees.
pub fn reduce_degree(h: &GadgetGraph) -> Result<Reduction> {
    if h.stage != Stage::Bs {
        return Err(Error::Provenance(format!(
            "degree reduction expects a freshly built H_Φ, got stage {:?}",
            h.stage
        )));
    }
    let threshold = h.params.clique_size()?;
    let deg = left_rep_degrees(h);
    let shared_pairs: u64 = deg
        .iter()
        .map(|&d| (d * d.saturating_sub(1) / 2) as u64)
        .sum();
    let mut removed = Vec::new();
    let mut edges = Vec::with_capacity(h.edges.len());
    for e in &h.edges {
        if e.tag == EdgeTag::LeftRep {
            let rep = if deg[e.u as usize] > 0 { e.u } else { e.v };
            if deg[rep as usize] - 1 > threshold {
                removed.push((e.u, e.v));
                continue;
            }
        }
        edges.push(*e);
    }
    let mut graph = h.clone();
    graph.edges = edges;
    graph.stage = Stage::Reduced;
    graph.reduced = true;
    Ok(Reduction {
        graph,
        removed,
        shared_pairs,
        threshold,
    })
}

/// Adds the D_l and D_r expanders of size `λ·M·m` each and links every host
/// vertex once into each side. A missed expansion target is recorded in the
/// certificates, not raised.
pub fn build_usc_instance(
    h: &GadgetGraph,
    d_scale: usize,
    d_target: Option<f64>,
) -> Result<GadgetGraph> {
    if h.stage == Stage::Usc {
        return Err(Error::Provenance(
            "graph already carries the USC expanders".into(),
        ));
    }
    let host = h.roles.len();
    let d = d_scale * h.params.multiplier * h.m;
    if d < host {
        return Err(Error::InvalidParameter(format!(
            "λ·M·m = {d} cannot host an injection of {host} vertices"
        )));
    }
    let mut params = h.params.clone();
    params.d_scale = Some(d_scale);
    let target = d_target.unwrap_or(1e4 * params.multiplier as f64);
    params.d_target = Some(target);
    let layout = Layout {
        n: h.n,
        m: h.m,
        clique: params.clique_size()?,
        d,
    };
    let mut out = h.clone();
    out.params = params;
    out.stage = Stage::Usc;
    out.roles.reserve(2 * d);
    out.roles
        .extend((0..d as u32).map(|index| VertexRole::Dl { index }));
    out.roles
        .extend((0..d as u32).map(|index| VertexRole::Dr { index }));
    for (k, name, stream) in [(0usize, "dl", 3u64), (1, "dr", 4)] {
        let (de, cert) = sample_expander(
            d,
            out.params.expander_degree(),
            target,
            derive_seed(h.params.seed, stream),
        )?;
        let base = (layout.h_size() + k * d) as u32;
        out.edges.reserve(de.len());
        out.edges.extend(
            de.iter()
                .map(|&(a, b)| edge(base + a, base + b, EdgeTag::DExpander)),
        );
        out.certificates.push(NamedCertificate {
            name: name.into(),
            certificate: cert,
        });
    }
    for v in 0..host {
        out.edges.push(edge(v as u32, layout.dl(v), EdgeTag::DLink));
        out.edges.push(edge(v as u32, layout.dr(v), EdgeTag::DLink));
    }
    Ok(out)
}
