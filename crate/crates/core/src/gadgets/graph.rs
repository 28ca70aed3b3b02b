use std::fmt::Write as _;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::expander::ExpanderCertificate;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::{format_rational, Rational};

pub const DEFAULT_DEGREE_FACTOR: usize = 16;
pub const DEFAULT_D_SCALE: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum VertexRole {
    /// Constraint `constraint` paired with one of its satisfying assignments.
    Left {
        constraint: u32,
        assignment: [bool; 3],
    },
    /// Copy `copy` (1-based; copy 1 is the representative) of literal `x_var = bit`.
    Clique {
        var: u32,
        bit: bool,
        copy: u32,
    },
    Zr {
        index: u32,
    },
    Dl {
        index: u32,
    },
    Dr {
        index: u32,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeTag {
    Clique,
    LeftRep,
    LeftZr,
    ZrExpander,
    DExpander,
    DLink,
}

impl EdgeTag {
    pub fn name(self) -> &'static str {
        match self {
            EdgeTag::Clique => "clique",
            EdgeTag::LeftRep => "left-rep",
            EdgeTag::LeftZr => "left-zr",
            EdgeTag::ZrExpander => "zr-expander",
            EdgeTag::DExpander => "d-expander",
            EdgeTag::DLink => "d-link",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetEdge {
    pub u: u32,
    pub v: u32,
    pub tag: EdgeTag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Bs,
    Reduced,
    Usc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetParams {
    #[serde(with = "crate::scalar::serde_rational")]
    pub beta: Rational,
    /// The clique multiplier `M`.
    pub multiplier: usize,
    /// Expander degree is `degree_factor · M`.
    pub degree_factor: usize,
    pub seed: u64,
    /// Size factor `λ` of the two USC expanders (`λ·M·m` vertices each).
    #[serde(default)]
    pub d_scale: Option<usize>,
    /// Expansion asked of the USC expanders; defaults to `10⁴·M`.
    #[serde(default)]
    pub d_target: Option<f64>,
}

impl GadgetParams {
    pub fn new(beta: Rational, multiplier: usize, seed: u64) -> Self {
        GadgetParams {
            beta,
            multiplier,
            degree_factor: DEFAULT_DEGREE_FACTOR,
            seed,
            d_scale: None,
            d_target: None,
        }
    }

    /// `M·β`, the size of each literal clique.
    pub fn clique_size(&self) -> Result<usize> {
        let s = &self.beta * Rational::from_integer(self.multiplier.into());
        if !s.is_integer() || s <= Rational::from_integer(0.into()) {
            return Err(Error::InvalidParameter(format!(
                "M·β = {} is not a positive integer",
                format_rational(&s)
            )));
        }
        s.to_integer()
            .to_usize()
            .ok_or_else(|| Error::InvalidParameter("clique size overflows".into()))
    }

    pub fn expander_degree(&self) -> usize {
        self.degree_factor * self.multiplier
    }
}

/// Vertex numbering: left, cliques, Z_r, then D_l and D_r when present.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub m: usize,
    pub clique: usize,
    pub d: usize,
}

impl Layout {
    pub fn left(&self, constraint: usize, k: usize) -> u32 {
        (4 * constraint + k) as u32
    }
    pub fn clique_vertex(&self, var: usize, bit: bool, copy: usize) -> u32 {
        (4 * self.m + (2 * var + bit as usize) * self.clique + copy - 1) as u32
    }
    pub fn rep(&self, var: usize, bit: bool) -> u32 {
        self.clique_vertex(var, bit, 1)
    }
    pub fn zr(&self, k: usize) -> u32 {
        (4 * self.m + 2 * self.n * self.clique + k) as u32
    }
    /// Vertices of the host before any USC augmentation.
    pub fn h_size(&self) -> usize {
        5 * self.m + 2 * self.n * self.clique
    }
    pub fn dl(&self, k: usize) -> u32 {
        (self.h_size() + k) as u32
    }
    pub fn dr(&self, k: usize) -> u32 {
        (self.h_size() + self.d + k) as u32
    }
    pub fn total(&self) -> usize {
        self.h_size() + 2 * self.d
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCertificate {
    pub name: String,
    pub certificate: ExpanderCertificate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetGraph {
    pub params: GadgetParams,
    pub stage: Stage,
    pub n: usize,
    pub m: usize,
    /// Id of the 3-XOR instance this graph was built from.
    pub provenance: String,
    /// Set once left-rep edges have been thinned by degree reduction.
    #[serde(default)]
    pub reduced: bool,
    pub roles: Vec<VertexRole>,
    pub edges: Vec<GadgetEdge>,
    pub certificates: Vec<NamedCertificate>,
}

impl GadgetGraph {
    pub fn layout(&self) -> Layout {
        let d = match self.stage {
            Stage::Usc => {
                self.params.d_scale.unwrap_or(DEFAULT_D_SCALE) * self.params.multiplier * self.m
            }
            _ => 0,
        };
        Layout {
            n: self.n,
            m: self.m,
            clique: self
                .params
                .clique_size()
                .expect("validated at construction"),
            d,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.roles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn count_role(&self, pred: impl Fn(&VertexRole) -> bool) -> usize {
        self.roles.iter().filter(|r| pred(r)).count()
    }

    pub fn count_tag(&self, tag: EdgeTag) -> usize {
        self.edges.iter().filter(|e| e.tag == tag).count()
    }

    pub fn certificate(&self, name: &str) -> Option<&ExpanderCertificate> {
        self.certificates
            .iter()
            .find(|c| c.name == name)
            .map(|c| &c.certificate)
    }

    pub fn to_graph(&self) -> Result<Graph> {
        let edges: Vec<(u32, u32)> = self.edges.iter().map(|e| (e.u, e.v)).collect();
        Graph::from_edges(self.roles.len(), &edges)
    }

    /// The H_Φ (or H′_Φ) part of a sparsest-cut graph: D vertices, d-links and
    /// D expanders dropped. Other stages are returned unchanged.
    pub fn host_part(&self) -> GadgetGraph {
        if self.stage != Stage::Usc {
            return self.clone();
        }
        let h = self.layout().h_size();
        let mut params = self.params.clone();
        params.d_scale = None;
        params.d_target = None;
        GadgetGraph {
            params,
            stage: if self.reduced {
                Stage::Reduced
            } else {
                Stage::Bs
            },
            n: self.n,
            m: self.m,
            provenance: self.provenance.clone(),
            reduced: self.reduced,
            roles: self.roles[..h].to_vec(),
            edges: self
                .edges
                .iter()
                .filter(|e| !matches!(e.tag, EdgeTag::DLink | EdgeTag::DExpander))
                .copied()
                .collect(),
            certificates: self
                .certificates
                .iter()
                .filter(|c| c.name == "zr")
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("gadget graph serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let g: GadgetGraph = serde_json::from_value(v.clone())?;
        g.params.clique_size()?;
        Ok(g)
    }

    /// `u v` per line (0-based) after a commented role table.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# vertices {} edges {} stage {:?}",
            self.roles.len(),
            self.edges.len(),
            self.stage
        );
        let mut start = 0usize;
        while start < self.roles.len() {
            let kind = role_kind(&self.roles[start]);
            let mut end = start;
            while end < self.roles.len() && role_kind(&self.roles[end]) == kind {
                end += 1;
            }
            let _ = writeln!(s, "# {kind} {start}..{}", end - 1);
            start = end;
        }
        for e in &self.edges {
            let _ = writeln!(s, "{} {}", e.u, e.v);
        }
        s
    }
}

pub fn role_kind(r: &VertexRole) -> &'static str {
    match r {
        VertexRole::Left { .. } => "left",
        VertexRole::Clique { .. } => "clique",
        VertexRole::Zr { .. } => "zr",
        VertexRole::Dl { .. } => "dl",
        VertexRole::Dr { .. } => "dr",
    }
}
