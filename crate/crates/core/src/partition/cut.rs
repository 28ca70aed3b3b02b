use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Rational;

/// Side `A` of a cut as a bitset over the vertices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cut {
    n: usize,
    words: Vec<u64>,
}

impl Cut {
    pub fn empty(n: usize) -> Self {
        Cut {
            n,
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn from_vertices(n: usize, side: &[u32]) -> Result<Self> {
        let mut c = Cut::empty(n);
        for &v in side {
            if v as usize >= n {
                return Err(Error::IndexOutOfRange {
                    index: v as usize,
                    len: n,
                });
            }
            c.insert(v);
        }
        Ok(c)
    }

    /// Low `n` bits of `code` select side `A`.
    pub fn from_code(n: usize, code: u64) -> Self {
        let mut c = Cut::empty(n);
        if n > 0 {
            c.words[0] = if n >= 64 {
                code
            } else {
                code & ((1u64 << n) - 1)
            };
        }
        c
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, v: u32) -> bool {
        self.words[v as usize / 64] >> (v % 64) & 1 == 1
    }

    pub fn insert(&mut self, v: u32) {
        self.words[v as usize / 64] |= 1 << (v % 64);
    }

    pub fn remove(&mut self, v: u32) {
        self.words[v as usize / 64] &= !(1 << (v % 64));
    }

    pub fn toggle(&mut self, v: u32) {
        self.words[v as usize / 64] ^= 1 << (v % 64);
    }

    pub fn size(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn vertices(&self) -> Vec<u32> {
        (0..self.n as u32).filter(|&v| self.contains(v)).collect()
    }

    pub fn complement(&self) -> Self {
        let mut c = Cut::empty(self.n);
        for v in 0..self.n as u32 {
            if !self.contains(v) {
                c.insert(v);
            }
        }
        c
    }

    /// Witness JSON: the sorted side-A vertex list.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "n": self.n, "side": self.vertices() })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutStats {
    pub crossing: u64,
    pub side_a: usize,
    pub side_b: usize,
    /// `crossing / (|A|·|V∖A|)`; absent for trivial cuts.
    #[serde(with = "crate::scalar::serde_rational_opt")]
    pub sparsity: Option<Rational>,
    #[serde(with = "crate::scalar::serde_rational")]
    pub balance: Rational,
}

impl CutStats {
    pub fn new(crossing: u64, side_a: usize, side_b: usize) -> Self {
        let total = side_a + side_b;
        CutStats {
            crossing,
            side_a,
            side_b,
            sparsity: (side_a > 0 && side_b > 0)
                .then(|| Rational::new(crossing.into(), ((side_a * side_b) as u64).into())),
            balance: if total == 0 {
                Rational::from_integer(0.into())
            } else {
                Rational::new((side_a as u64).into(), (total as u64).into())
            },
        }
    }

    pub fn of(g: &Graph, cut: &Cut) -> Result<Self> {
        let a = cut.size();
        Ok(CutStats::new(cut_edges(g, cut)?, a, g.num_vertices() - a))
    }

    /// Recomputes sparsity from the counts and compares exactly.
    pub fn is_consistent(&self) -> bool {
        *self == CutStats::new(self.crossing, self.side_a, self.side_b)
    }

    pub fn csv_header() -> &'static str {
        "crossing,side_a,side_b,sparsity,balance"
    }

    pub fn csv_row(&self) -> String {
        let sp = self
            .sparsity
            .as_ref()
            .map(crate::scalar::format_rational)
            .unwrap_or_default();
        format!(
            "{},{},{},{},{}",
            self.crossing,
            self.side_a,
            self.side_b,
            sp,
            crate::scalar::format_rational(&self.balance)
        )
    }
}

/// Number of edges with exactly one endpoint in `A`.
pub fn cut_edges(g: &Graph, cut: &Cut) -> Result<u64> {
    if cut.n() != g.num_vertices() {
        return Err(Error::LengthMismatch {
            expected: g.num_vertices(),
            got: cut.n(),
        });
    }
    Ok(g.edges()
        .iter()
        .filter(|&&(u, v)| cut.contains(u) != cut.contains(v))
        .count() as u64)
}

/// Exact comparison of `c1/(a1·b1)` with `c2/(a2·b2)`.
pub fn cmp_sparsity(c1: u64, ab1: u64, c2: u64, ab2: u64) -> Ordering {
    (c1 as u128 * ab2 as u128).cmp(&(c2 as u128 * ab1 as u128))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_counts() {
        let tri = Graph::complete(3);
        assert_eq!(cut_edges(&tri, &Cut::empty(3)).unwrap(), 0);
        assert_eq!(
            cut_edges(&tri, &Cut::from_vertices(3, &[1]).unwrap()).unwrap(),
            2
        );
        assert!(Cut::from_vertices(3, &[3]).is_err());
        assert!(cut_edges(&tri, &Cut::empty(4)).is_err());
    }

    #[test]
    fn stats_fields() {
        let s = CutStats::of(&Graph::path(3), &Cut::from_vertices(3, &[0]).unwrap()).unwrap();
        assert_eq!(s.sparsity, Some(Rational::new(1.into(), 2.into())));
        assert_eq!(s.balance, Rational::new(1.into(), 3.into()));
        assert!(s.is_consistent());
        assert_eq!(s.csv_row(), "1,1,2,1/2,1/3");
        assert_eq!(CutStats::new(0, 0, 3).sparsity, None);
    }

    #[test]
    fn wide_bitset() {
        let mut c = Cut::empty(130);
        c.insert(129);
        c.insert(64);
        assert_eq!(c.vertices(), vec![64, 129]);
        c.toggle(64);
        assert_eq!(c.size(), 1);
        assert_eq!(c.complement().size(), 129);
        assert_eq!(Cut::from_code(3, 0b101).vertices(), vec![0, 2]);
    }
}
