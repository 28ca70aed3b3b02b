use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cut::{cmp_sparsity, Cut, CutStats};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::lasserre::balanced_range;
use crate::xor3::{derive_seed, SeededRng};

/// Largest vertex count the exact oracles enumerate.
pub const EXACT_LIMIT: usize = 26;
pub const LOCAL_RESTARTS: usize = 64;
const CHUNK_BITS: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    Exact,
    LocalSearch,
}

fn guard(g: &Graph) -> Result<()> {
    if g.num_vertices() > EXACT_LIMIT {
        return Err(Error::Guard(format!(
            "exact partition oracle limited to {EXACT_LIMIT} vertices, got {}",
            g.num_vertices()
        )));
    }
    Ok(())
}

fn masks(g: &Graph) -> Vec<u32> {
    let mut adj = vec![0u32; g.num_vertices()];
    for &(u, v) in g.edges() {
        adj[u as usize] |= 1 << v;
        adj[v as usize] |= 1 << u;
    }
    adj
}

/// Walks every side `A ⊆ {0..n-2}` (the last vertex stays outside, which
/// loses nothing since both objectives are symmetric) in Gray-code order and
/// keeps the best `(crossing, |A|, code)` under `better`; ties go to the
/// smaller code.
fn enumerate<F>(
    g: &Graph,
    admissible: impl Fn(u32) -> bool + Sync,
    better: F,
) -> Option<(u64, u32, u64)>
where
    F: Fn(u64, u32, u64, u32) -> Ordering + Sync,
{
    let n = g.num_vertices();
    if n == 0 {
        return None;
    }
    let adj = masks(g);
    let free = (n - 1) as u32;
    let total: u64 = 1 << free;
    let chunk = 1u64 << CHUNK_BITS.min(free);
    let pick = |a: Option<(u64, u32, u64)>, b: Option<(u64, u32, u64)>| match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => match better(x.0, x.1, y.0, y.1).then(x.2.cmp(&y.2)) {
            Ordering::Greater => Some(y),
            _ => Some(x),
        },
    };
    (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let mut code = start ^ (start >> 1);
            let mut crossing: u64 = (0..n)
                .filter(|&v| code >> v & 1 == 1)
                .map(|v| (adj[v] & !(code as u32)).count_ones() as u64)
                .sum();
            let mut best = None;
            for i in start..start + chunk {
                if i > start {
                    let v = i.trailing_zeros() as usize;
                    let a = code as u32;
                    let inside = a >> v & 1 == 1;
                    let before = (adj[v] & if inside { !a } else { a }).count_ones() as u64;
                    crossing = crossing + adj[v].count_ones() as u64 - 2 * before;
                    code ^= 1 << v;
                }
                let size = code.count_ones();
                if admissible(size) {
                    best = pick(best, Some((crossing, size, code)));
                }
            }
            best
        })
        .reduce(|| None, pick)
}

fn finish(g: &Graph, code: u64) -> Result<(Cut, CutStats)> {
    let cut = Cut::from_code(g.num_vertices(), code);
    let stats = CutStats::of(g, &cut)?;
    Ok((cut, stats))
}

fn exact_balanced(g: &Graph, lo: usize, hi: usize) -> Result<(Cut, CutStats)> {
    guard(g)?;
    let best = enumerate(
        g,
        |s| (lo..=hi).contains(&(s as usize)),
        |c1, _, c2, _| c1.cmp(&c2),
    )
    .ok_or_else(|| Error::InvalidParameter("no admissible balanced cut".into()))?;
    finish(g, best.2)
}

fn exact_sparsest(g: &Graph) -> Result<(Cut, CutStats)> {
    guard(g)?;
    let n = g.num_vertices() as u64;
    let best = enumerate(
        g,
        |s| s >= 1,
        |c1, s1, c2, s2| {
            cmp_sparsity(
                c1,
                s1 as u64 * (n - s1 as u64),
                c2,
                s2 as u64 * (n - s2 as u64),
            )
        },
    )
    .ok_or_else(|| Error::InvalidParameter("sparsest cut needs at least two vertices".into()))?;
    finish(g, best.2)
}

struct Local {
    adj: Vec<Vec<u32>>,
    side: Vec<bool>,
    /// external minus internal degree
    gain: Vec<i64>,
    crossing: u64,
    size: usize,
}

impl Local {
    fn new(adj: Vec<Vec<u32>>, side: Vec<bool>) -> Self {
        let mut l = Local {
            gain: vec![0; side.len()],
            adj,
            size: side.iter().filter(|&&s| s).count(),
            side,
            crossing: 0,
        };
        let mut crossing = 0i64;
        for v in 0..l.side.len() {
            l.gain[v] = l.adj[v]
                .iter()
                .map(|&u| {
                    if l.side[u as usize] != l.side[v] {
                        1
                    } else {
                        -1
                    }
                })
                .sum();
            crossing += l.adj[v]
                .iter()
                .filter(|&&u| l.side[u as usize] != l.side[v])
                .count() as i64;
        }
        l.crossing = (crossing / 2) as u64;
        l
    }

    fn flip(&mut self, v: usize) {
        self.crossing = (self.crossing as i64 - self.gain[v]) as u64;
        self.size = if self.side[v] {
            self.size - 1
        } else {
            self.size + 1
        };
        self.side[v] = !self.side[v];
        self.gain[v] = -self.gain[v];
        for i in 0..self.adj[v].len() {
            let u = self.adj[v][i] as usize;
            self.gain[u] += if self.side[u] == self.side[v] { -2 } else { 2 };
        }
    }

    fn adjacent(&self, u: usize, v: u32) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    fn code(&self) -> Vec<u32> {
        (0..self.side.len() as u32)
            .filter(|&v| self.side[v as usize])
            .collect()
    }
}

fn sorted_adjacency(g: &Graph) -> Vec<Vec<u32>> {
    let mut adj = g.adjacency();
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

fn random_side(n: usize, size: usize, rng: &mut SeededRng) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    let mut side = vec![false; n];
    for &v in &order[..size] {
        side[v] = true;
    }
    side
}

/// Balanced swap descent from seeded random starts; swaps keep `|A|` fixed.
fn local_balanced(g: &Graph, lo: usize, hi: usize, seed: u64) -> Result<(Cut, CutStats)> {
    let n = g.num_vertices();
    let adj = sorted_adjacency(g);
    let runs: Vec<(u64, Vec<u32>)> = (0..LOCAL_RESTARTS)
        .into_par_iter()
        .map(|k| {
            let mut rng = SeededRng::new(derive_seed(seed, k as u64));
            let size = lo + k % (hi - lo + 1);
            let mut st = Local::new(adj.clone(), random_side(n, size, &mut rng));
            'descent: loop {
                for u in 0..n {
                    if !st.side[u] {
                        continue;
                    }
                    for v in 0..n {
                        if st.side[v] {
                            continue;
                        }
                        let w = st.adjacent(u, v as u32) as i64;
                        if st.gain[u] + st.gain[v] - 2 * w > 0 {
                            st.flip(u);
                            st.flip(v);
                            continue 'descent;
                        }
                    }
                }
                break;
            }
            (st.crossing, st.code())
        })
        .collect();
    let best = runs.into_iter().min_by_key(|r| r.0).expect("restarts > 0");
    let cut = Cut::from_vertices(n, &best.1)?;
    let stats = CutStats::of(g, &cut)?;
    Ok((cut, stats))
}

/// Single-vertex flip descent on exact sparsity, never emptying either side.
fn local_sparsest(g: &Graph, seed: u64) -> Result<(Cut, CutStats)> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "sparsest cut needs at least two vertices".into(),
        ));
    }
    let adj = sorted_adjacency(g);
    let nn = n as u64;
    let runs: Vec<(u64, u64, Vec<u32>)> = (0..LOCAL_RESTARTS)
        .into_par_iter()
        .map(|k| {
            let mut rng = SeededRng::new(derive_seed(seed, k as u64));
            let size = 1 + k % (n - 1);
            let mut st = Local::new(adj.clone(), random_side(n, size, &mut rng));
            'descent: loop {
                let ab = st.size as u64 * (nn - st.size as u64);
                for v in 0..n {
                    let new_size = if st.side[v] { st.size - 1 } else { st.size + 1 };
                    if new_size == 0 || new_size == n {
                        continue;
                    }
                    let c = (st.crossing as i64 - st.gain[v]) as u64;
                    let nab = new_size as u64 * (nn - new_size as u64);
                    if cmp_sparsity(c, nab, st.crossing, ab) == Ordering::Less {
                        st.flip(v);
                        continue 'descent;
                    }
                }
                break;
            }
            (
                st.crossing,
                st.size as u64 * (nn - st.size as u64),
                st.code(),
            )
        })
        .collect();
    let best = runs
        .into_iter()
        .reduce(|a, b| {
            if cmp_sparsity(b.0, b.1, a.0, a.1) == Ordering::Less {
                b
            } else {
                a
            }
        })
        .expect("restarts > 0");
    let cut = Cut::from_vertices(n, &best.2)?;
    let stats = CutStats::of(g, &cut)?;
    Ok((cut, stats))
}

/// Minimum crossing over cuts with `⌈τ|V|⌉ ≤ |A| ≤ ⌊(1−τ)|V|⌋`.
pub fn best_balanced_separator(
    g: &Graph,
    tau: f64,
    mode: OracleMode,
    seed: u64,
) -> Result<(Cut, CutStats)> {
    if !(0.0..=0.5).contains(&tau) {
        return Err(Error::InvalidParameter(format!(
            "τ = {tau} outside [0, 1/2]"
        )));
    }
    let (lo, hi) = balanced_range(g.num_vertices(), tau);
    if lo > hi {
        return Err(Error::InvalidParameter(format!(
            "no side size in [{lo}, {hi}] for {} vertices",
            g.num_vertices()
        )));
    }
    match mode {
        OracleMode::Exact => exact_balanced(g, lo, hi),
        OracleMode::LocalSearch => local_balanced(g, lo, hi, seed),
    }
}

/// Minimum of `edges(A, V∖A)/(|A|·|V∖A|)` over nontrivial cuts, compared exactly.
pub fn best_sparsest_cut(g: &Graph, mode: OracleMode, seed: u64) -> Result<(Cut, CutStats)> {
    match mode {
        OracleMode::Exact => exact_sparsest(g),
        OracleMode::LocalSearch => local_sparsest(g, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::cut_edges;
    use crate::scalar::{rat, rat_int};
    use proptest::prelude::*;

    /// Plain enumeration over all `2^n` sides, no symmetry or Gray code.
    fn naive(g: &Graph, ok: impl Fn(usize) -> bool) -> Vec<(u64, usize)> {
        let n = g.num_vertices();
        (0..1u64 << n)
            .map(|code| Cut::from_code(n, code))
            .filter(|c| ok(c.size()))
            .map(|c| (cut_edges(g, &c).unwrap(), c.size()))
            .collect()
    }

    fn naive_balanced(g: &Graph, tau: f64) -> u64 {
        let (lo, hi) = balanced_range(g.num_vertices(), tau);
        naive(g, |s| (lo..=hi).contains(&s))
            .iter()
            .map(|x| x.0)
            .min()
            .unwrap()
    }

    fn naive_sparsest(g: &Graph) -> crate::Rational {
        let n = g.num_vertices();
        naive(g, |s| s > 0 && s < n)
            .iter()
            .map(|&(c, s)| rat(c as i64, (s * (n - s)) as i64))
            .min()
            .unwrap()
    }

    fn random_graph(n: usize, p: u64, seed: u64) -> Graph {
        let mut rng = SeededRng::new(seed);
        let mut e = Vec::new();
        for u in 0..n as u32 {
            for v in u + 1..n as u32 {
                if rng.below(100) < p {
                    e.push((u, v));
                }
            }
        }
        Graph::from_edges(n, &e).unwrap()
    }

    #[test]
    fn fixed_examples() {
        let edge = Graph::path(2);
        assert_eq!(
            best_balanced_separator(&edge, 0.5, OracleMode::Exact, 0)
                .unwrap()
                .1
                .crossing,
            1
        );
        assert_eq!(
            best_balanced_separator(&Graph::cycle(4), 0.5, OracleMode::Exact, 0)
                .unwrap()
                .1
                .crossing,
            2
        );
        assert_eq!(
            best_balanced_separator(&Graph::complete(4), 0.5, OracleMode::Exact, 0)
                .unwrap()
                .1
                .crossing,
            4
        );
        assert_eq!(
            best_sparsest_cut(&edge, OracleMode::Exact, 0)
                .unwrap()
                .1
                .sparsity,
            Some(rat_int(1))
        );
        let two = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(
            best_sparsest_cut(&two, OracleMode::Exact, 0)
                .unwrap()
                .1
                .sparsity,
            Some(rat_int(0))
        );
        assert_eq!(
            best_sparsest_cut(&Graph::path(3), OracleMode::Exact, 0)
                .unwrap()
                .1
                .sparsity,
            Some(rat(1, 2))
        );
    }

    #[test]
    fn guards_and_ranges() {
        let big = Graph::path(EXACT_LIMIT + 1);
        assert!(matches!(
            best_sparsest_cut(&big, OracleMode::Exact, 0),
            Err(Error::Guard(_))
        ));
        assert!(best_balanced_separator(&Graph::path(3), 0.6, OracleMode::Exact, 0).is_err());
        assert!(best_balanced_separator(&Graph::path(1), 0.5, OracleMode::Exact, 0).is_err());
        assert!(best_sparsest_cut(&Graph::path(1), OracleMode::LocalSearch, 0).is_err());
        // local search still works past the exact guard
        let (_, s) = best_sparsest_cut(&big, OracleMode::LocalSearch, 0).unwrap();
        assert!(s.crossing >= 1);
    }

    #[test]
    fn witness_matches_stats() {
        let g = random_graph(11, 40, 3);
        let (cut, stats) = best_balanced_separator(&g, 0.4, OracleMode::Exact, 0).unwrap();
        assert_eq!(cut_edges(&g, &cut).unwrap(), stats.crossing);
        assert!(stats.is_consistent());
        assert!(!cut.contains(10));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn exact_matches_naive(n in 2usize..=10, p in 10u64..80, seed in any::<u64>(), t in 0usize..=5) {
            let g = random_graph(n, p, seed);
            let tau = t as f64 / 10.0;
            if balanced_range(n, tau).0 <= balanced_range(n, tau).1 {
                let (_, s) = best_balanced_separator(&g, tau, OracleMode::Exact, 0).unwrap();
                prop_assert_eq!(s.crossing, naive_balanced(&g, tau));
                let (_, l) = best_balanced_separator(&g, tau, OracleMode::LocalSearch, seed).unwrap();
                prop_assert!(l.crossing >= s.crossing);
            }
            let (_, s) = best_sparsest_cut(&g, OracleMode::Exact, 0).unwrap();
            prop_assert_eq!(s.sparsity.clone().unwrap(), naive_sparsest(&g));
            let (_, l) = best_sparsest_cut(&g, OracleMode::LocalSearch, seed).unwrap();
            prop_assert!(l.sparsity.unwrap() >= s.sparsity.unwrap());
        }

        #[test]
        fn distinct_sparsities_never_tie(c1 in 0u64..50, a1 in 1u64..20, c2 in 0u64..50, a2 in 1u64..20) {
            let eq = cmp_sparsity(c1, a1, c2, a2) == Ordering::Equal;
            prop_assert_eq!(eq, rat(c1 as i64, a1 as i64) == rat(c2 as i64, a2 as i64));
        }
    }
}
