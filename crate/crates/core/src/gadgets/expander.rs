use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::xor3::{derive_seed, SeededRng};

/// Largest size certified by exhaustive subset enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 20;
/// Largest size certified with a dense eigendecomposition.
pub const DENSE_SPECTRAL_LIMIT: usize = 2500;
pub const MAX_ATTEMPTS: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateMethod {
    Complete,
    Bruteforce,
    Spectral,
    /// Lanczos estimate of the spectral bound; never counts as certified.
    SpectralEstimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderCertificate {
    pub size: usize,
    pub degree: usize,
    pub method: CertificateMethod,
    /// Lower bound on `min_{|T| ≤ size/2} edges(T, T̄)/|T|` (an estimate for `SpectralEstimate`).
    pub lower_bound: f64,
    pub target: f64,
    pub certified: bool,
    pub attempts: usize,
}

impl ExpanderCertificate {
    pub fn meets_target(&self) -> bool {
        self.certified && self.lower_bound >= self.target
    }
}

/// Exact edge expansion by enumerating every `T` with `|T| ≤ size/2` (`size ≤ 20`).
pub fn brute_force_expansion(size: usize, edges: &[(u32, u32)]) -> Result<f64> {
    if size > BRUTE_FORCE_LIMIT {
        return Err(Error::Guard(format!(
            "brute-force expansion limited to {BRUTE_FORCE_LIMIT} vertices, got {size}"
        )));
    }
    let mut adj = vec![0u32; size];
    for &(u, v) in edges {
        adj[u as usize] |= 1 << v;
        adj[v as usize] |= 1 << u;
    }
    let mut best = f64::INFINITY;
    for t in 1u32..(1u32 << size) {
        let k = t.count_ones() as usize;
        if 2 * k > size {
            continue;
        }
        let mut out = 0u32;
        let mut rest = t;
        while rest != 0 {
            let v = rest.trailing_zeros();
            out += (adj[v as usize] & !t).count_ones();
            rest &= rest - 1;
        }
        best = best.min(out as f64 / k as f64);
    }
    Ok(best)
}

fn adjacency_matrix(size: usize, edges: &[(u32, u32)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(size, size);
    for &(u, v) in edges {
        a[(u as usize, v as usize)] += 1.0;
        a[(v as usize, u as usize)] += 1.0;
    }
    a
}

/// Second-largest adjacency eigenvalue (dense).
pub fn second_eigenvalue(size: usize, edges: &[(u32, u32)]) -> f64 {
    let mut ev: Vec<f64> = crate::sdp::symmetric_eigenvalues(&adjacency_matrix(size, edges))
        .iter()
        .copied()
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev.get(1).copied().unwrap_or(f64::NEG_INFINITY)
}

/// Lanczos estimate of the largest eigenvalue orthogonal to the all-ones vector.
pub fn second_eigenvalue_estimate(
    size: usize,
    edges: &[(u32, u32)],
    steps: usize,
    seed: u64,
) -> f64 {
    let mut adj_start = vec![0usize; size + 1];
    for &(u, v) in edges {
        adj_start[u as usize + 1] += 1;
        adj_start[v as usize + 1] += 1;
    }
    for i in 0..size {
        adj_start[i + 1] += adj_start[i];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![0u32; 2 * edges.len()];
    for &(u, v) in edges {
        adj[fill[u as usize]] = v;
        fill[u as usize] += 1;
        adj[fill[v as usize]] = u;
        fill[v as usize] += 1;
    }
    let matvec = |x: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(
            size,
            (0..size).map(|i| {
                adj[adj_start[i]..adj_start[i + 1]]
                    .iter()
                    .map(|&j| x[j as usize])
                    .sum()
            }),
        )
    };
    let deflate = |x: &mut DVector<f64>| {
        let mean = x.sum() / size as f64;
        x.add_scalar_mut(-mean);
    };
    let mut rng = SeededRng::new(seed);
    let mut q = DVector::from_iterator(
        size,
        (0..size).map(|_| rng.below(1 << 20) as f64 - (1 << 19) as f64),
    );
    deflate(&mut q);
    q /= q.norm();
    let mut basis: Vec<DVector<f64>> = vec![q];
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for k in 0..steps.min(size.saturating_sub(1)) {
        let mut w = matvec(&basis[k]);
        deflate(&mut w);
        let a = w.dot(&basis[k]);
        alpha.push(a);
        for b in &basis {
            let c = w.dot(b);
            w.axpy(-c, b, 1.0);
        }
        let nb = w.norm();
        if nb < 1e-10 {
            break;
        }
        beta.push(nb);
        basis.push(w / nb);
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j || j + 1 == i {
            beta[i.min(j)]
        } else {
            0.0
        }
    });
    crate::sdp::symmetric_eigenvalues(&t)
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Uniform-ish random `degree`-regular simple graph: configuration-model pairing
/// followed by random switchings that remove loops and parallel edges.
pub fn random_regular(size: usize, degree: usize, seed: u64) -> Result<Vec<(u32, u32)>> {
    if degree >= size || (size * degree) % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "no simple {degree}-regular graph on {size} vertices"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut stubs: Vec<u32> = (0..size as u32)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    rng.shuffle(&mut stubs);
    let mut edges: Vec<(u32, u32)> = stubs
        .chunks(2)
        .map(|p| (p[0].min(p[1]), p[0].max(p[1])))
        .collect();
    let ne = edges.len();
    for _round in 0..10_000 {
        let mut order: Vec<usize> = (0..ne).collect();
        order.sort_unstable_by_key(|&i| edges[i]);
        let mut bad: Vec<usize> = Vec::new();
        for w in 0..ne {
            let e = edges[order[w]];
            if e.0 == e.1 || (w > 0 && edges[order[w - 1]] == e) {
                bad.push(order[w]);
            }
        }
        if bad.is_empty() {
            edges.sort_unstable();
            return Ok(edges);
        }
        for i in bad {
            let j = rng.below(ne as u64) as usize;
            if j == i {
                continue;
            }
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            let (p, q) = if rng.bit() {
                ((a, c), (b, d))
            } else {
                ((a, d), (b, c))
            };
            if p.0 != p.1 && q.0 != q.1 {
                edges[i] = (p.0.min(p.1), p.0.max(p.1));
                edges[j] = (q.0.min(q.1), q.0.max(q.1));
            }
        }
    }
    Err(Error::Sampling(format!(
        "could not repair a {degree}-regular pairing on {size} vertices"
    )))
}

/// The dense eigendecomposition is skipped when `target > degree/2`: no
/// spectral bound can reach it, so the cheap estimate is reported instead.
fn certify(
    size: usize,
    degree: usize,
    edges: &[(u32, u32)],
    target: f64,
    seed: u64,
) -> Result<(CertificateMethod, f64, bool)> {
    if size <= BRUTE_FORCE_LIMIT {
        Ok((
            CertificateMethod::Bruteforce,
            brute_force_expansion(size, edges)?,
            true,
        ))
    } else if size <= DENSE_SPECTRAL_LIMIT && target <= degree as f64 / 2.0 {
        let l2 = second_eigenvalue(size, edges);
        Ok((
            CertificateMethod::Spectral,
            (degree as f64 - l2) / 2.0,
            true,
        ))
    } else {
        let l2 = second_eigenvalue_estimate(size, edges, 60, seed);
        Ok((
            CertificateMethod::SpectralEstimate,
            (degree as f64 - l2) / 2.0,
            false,
        ))
    }
}

/// Samples and certifies an expander, returning the best attempt even when the
/// target is missed. Retries only when the target is at most `degree/2`, the
/// largest expansion a spectral bound can show.
pub fn sample_expander(
    size: usize,
    degree: usize,
    target: f64,
    seed: u64,
) -> Result<(Vec<(u32, u32)>, ExpanderCertificate)> {
    if size <= degree + 1 {
        let mut edges = Vec::new();
        for u in 0..size as u32 {
            for v in u + 1..size as u32 {
                edges.push((u, v));
            }
        }
        let bound = size.div_ceil(2) as f64;
        return Ok((
            edges,
            ExpanderCertificate {
                size,
                degree: size.saturating_sub(1),
                method: CertificateMethod::Complete,
                lower_bound: bound,
                target,
                certified: true,
                attempts: 0,
            },
        ));
    }
    let attempts = if target <= degree as f64 / 2.0 {
        MAX_ATTEMPTS
    } else {
        1
    };
    let mut best: Option<(Vec<(u32, u32)>, ExpanderCertificate)> = None;
    for k in 0..attempts {
        let s = derive_seed(seed, k as u64);
        let edges = random_regular(size, degree, s)?;
        let (method, bound, certified) = certify(size, degree, &edges, target, s)?;
        let cert = ExpanderCertificate {
            size,
            degree,
            method,
            lower_bound: bound,
            target,
            certified,
            attempts: k + 1,
        };
        let done = cert.meets_target();
        if best.as_ref().is_none_or(|b| bound > b.1.lower_bound) {
            best = Some((edges, cert));
        }
        if done {
            break;
        }
    }
    let (edges, mut cert) = best.expect("at least one attempt");
    cert.attempts = cert.attempts.max(1);
    Ok((edges, cert))
}

/// Like [`sample_expander`] but fails unless the certified bound reaches `target`.
pub fn build_expander(
    size: usize,
    degree: usize,
    target: f64,
    seed: u64,
) -> Result<(Vec<(u32, u32)>, ExpanderCertificate)> {
    let (edges, cert) = sample_expander(size, degree, target, seed)?;
    if !cert.meets_target() {
        return Err(Error::CertificationFailed {
            attempts: cert.attempts,
            best_bound: cert.lower_bound,
            target,
        });
    }
    Ok((edges, cert))
}

/// 8-regular-style multigraph on `size` vertices via configuration model;
/// self-loops are switched away, parallel edges are kept.
pub fn regular_multigraph(size: usize, degree: usize, seed: u64) -> Result<Vec<(u32, u32)>> {
    if size < 2 || (size * degree) % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "no loopless {degree}-regular multigraph on {size} vertices"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut stubs: Vec<u32> = (0..size as u32)
        .flat_map(|v| std::iter::repeat_n(v, degree))
        .collect();
    rng.shuffle(&mut stubs);
    let mut edges: Vec<(u32, u32)> = stubs.chunks(2).map(|p| (p[0], p[1])).collect();
    let ne = edges.len();
    for _ in 0..100_000 {
        let Some(i) = edges.iter().position(|e| e.0 == e.1) else {
            return Ok(edges
                .into_iter()
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect());
        };
        let j = rng.below(ne as u64) as usize;
        let (a, b) = edges[i];
        let (c, d) = edges[j];
        if a != c && b != d {
            edges[i] = (a, c);
            edges[j] = (b, d);
        }
    }
    Err(Error::Sampling(format!(
        "could not remove self-loops on {size} vertices"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(size: usize, edges: &[(u32, u32)]) -> Vec<usize> {
        let mut d = vec![0; size];
        for &(u, v) in edges {
            d[u as usize] += 1;
            d[v as usize] += 1;
        }
        d
    }

    #[test]
    fn random_regular_is_simple_and_regular() {
        for (size, degree) in [(12, 6), (30, 3), (200, 32)] {
            let e = random_regular(size, degree, 7).unwrap();
            assert!(degrees(size, &e).iter().all(|&d| d == degree));
            let mut s = e.clone();
            s.sort();
            s.dedup();
            assert_eq!(s.len(), e.len());
            assert!(e.iter().all(|&(u, v)| u < v));
        }
        assert!(random_regular(5, 3, 0).is_err());
    }

    #[test]
    fn complete_fallback() {
        let (e, c) = build_expander(5, 8, 3.0, 1).unwrap();
        assert_eq!(e.len(), 10);
        assert_eq!(c.method, CertificateMethod::Complete);
        assert_eq!(c.lower_bound, 3.0);
        // exhaustive check of the closed form
        assert_eq!(brute_force_expansion(5, &e).unwrap(), 3.0);
        assert_eq!(
            brute_force_expansion(6, &build_expander(6, 5, 1.0, 0).unwrap().0).unwrap(),
            3.0
        );
    }

    #[test]
    fn brute_force_matches_cycle_formula() {
        // cycle on 10 vertices: best T is a 5-arc with 2 leaving edges
        let e: Vec<(u32, u32)> = (0..10u32)
            .map(|i| (i.min((i + 1) % 10), i.max((i + 1) % 10)))
            .collect();
        assert_eq!(brute_force_expansion(10, &e).unwrap(), 2.0 / 5.0);
    }

    #[test]
    fn lanczos_tracks_dense_value() {
        let e = random_regular(300, 10, 3).unwrap();
        let dense = second_eigenvalue(300, &e);
        let est = second_eigenvalue_estimate(300, &e, 80, 1);
        assert!(est <= dense + 1e-8);
        assert!(dense - est < 0.05, "{dense} {est}");
    }

    #[test]
    fn multigraph_is_regular_without_loops() {
        let e = regular_multigraph(9, 8, 4).unwrap();
        assert_eq!(e.len(), 36);
        assert!(degrees(9, &e).iter().all(|&d| d == 8));
        assert!(e.iter().all(|&(u, v)| u != v));
    }

    #[test]
    fn unreachable_target_is_reported_not_retried() {
        let (_, c) = sample_expander(40, 4, 100.0, 2).unwrap();
        assert_eq!(c.attempts, 1);
        assert!(!c.meets_target());
        assert!(matches!(
            build_expander(40, 4, 100.0, 2),
            Err(Error::CertificationFailed { .. })
        ));
    }
}
