//! Operator-splitting (ADMM) solver for problems in standard equality form.
//!
//! The affine step is an exact projection in the Frobenius metric. Constraints of
//! the form `x_p − x_q = 0` (the bulk of moment-matrix consistency rows) are
//! removed in a presolve by merging entries into groups; the remaining rows are
//! handled with a pseudo-inverse computed once.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::problem::{constraint_violations, evaluate_terms, BlockKind, BlockMatrices, SdpProblem};
use super::psd::{min_eigenvalue, project_symmetric};
use crate::error::{Error, Result};
use crate::poly::Sense;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    InfeasibleSuspected,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub blocks: BlockMatrices,
    pub objective: f64,
    /// Largest constraint violation, recomputed from `blocks`.
    pub primal_residual: f64,
    pub min_eigenvalues: Vec<f64>,
    pub iterations: usize,
    pub status: SolveStatus,
}

impl SdpSolution {
    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub rho: f64,
    pub relaxation: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            rho: 1.0,
            relaxation: 1.6,
        }
    }
}

pub fn solve(p: &SdpProblem, tol: f64, max_iter: usize) -> Result<SdpSolution> {
    solve_with(
        p,
        &SolverOptions {
            tol,
            max_iter,
            ..SolverOptions::default()
        },
    )
}

struct Layout {
    /// (block, i, j) of every flat entry
    entries: Vec<(usize, usize, usize)>,
    weight: Vec<f64>,
    offsets: Vec<usize>,
}

impl Layout {
    fn new(p: &SdpProblem) -> Self {
        let mut entries = Vec::new();
        let mut weight = Vec::new();
        let mut offsets = Vec::new();
        for (b, blk) in p.blocks.iter().enumerate() {
            offsets.push(entries.len());
            match blk.kind {
                BlockKind::Psd => {
                    for j in 0..blk.size {
                        for i in 0..=j {
                            entries.push((b, i, j));
                            weight.push(if i == j { 1.0 } else { 2.0 });
                        }
                    }
                }
                BlockKind::Diagonal => {
                    for i in 0..blk.size {
                        entries.push((b, i, i));
                        weight.push(1.0);
                    }
                }
            }
        }
        offsets.push(entries.len());
        Layout {
            entries,
            weight,
            offsets,
        }
    }

    fn flat(&self, p: &SdpProblem, block: usize, i: usize, j: usize) -> usize {
        let (i, j) = (i.min(j), i.max(j));
        match p.blocks[block].kind {
            BlockKind::Psd => self.offsets[block] + j * (j + 1) / 2 + i,
            BlockKind::Diagonal => self.offsets[block] + i,
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = a;
        while self.0[c] != r {
            let next = self.0[c];
            self.0[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Affine set `{x : A x = b}` after merging two-entry equalities into groups.
struct AffineProjector {
    group_of: Vec<usize>,
    group_weight: Vec<f64>,
    /// sparse rows over groups
    rows: Vec<Vec<(usize, f64)>>,
    rhs: DVector<f64>,
    k_pinv: DMatrix<f64>,
    consistent: bool,
}

impl AffineProjector {
    fn new(p: &SdpProblem, layout: &Layout) -> Self {
        let ne = layout.entries.len();
        let mut dense_rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
        for c in &p.constraints {
            let mut row: Vec<(usize, f64)> = c
                .terms
                .iter()
                .map(|t| (layout.flat(p, t.block, t.i, t.j), t.weight() * t.value))
                .collect();
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for (e, v) in row {
                match merged.last_mut() {
                    Some(last) if last.0 == e => last.1 += v,
                    _ => merged.push((e, v)),
                }
            }
            merged.retain(|e| e.1 != 0.0);
            dense_rows.push((merged, c.rhs));
        }

        let mut uf = UnionFind((0..ne).collect());
        let mut rest = Vec::new();
        for (row, rhs) in dense_rows {
            let is_link = row.len() == 2
                && rhs == 0.0
                && (row[0].1 + row[1].1).abs() <= 1e-14 * row[0].1.abs();
            if is_link {
                uf.union(row[0].0, row[1].0);
            } else {
                rest.push((row, rhs));
            }
        }

        let mut root_to_group = vec![usize::MAX; ne];
        let mut group_of = vec![0; ne];
        let mut group_weight = Vec::new();
        for e in 0..ne {
            let r = uf.find(e);
            if root_to_group[r] == usize::MAX {
                root_to_group[r] = group_weight.len();
                group_weight.push(0.0);
            }
            group_of[e] = root_to_group[r];
            group_weight[group_of[e]] += layout.weight[e];
        }

        let mut consistent = true;
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (row, b) in rest {
            let mut g: Vec<(usize, f64)> = row.iter().map(|&(e, v)| (group_of[e], v)).collect();
            g.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(g.len());
            for (k, v) in g {
                match merged.last_mut() {
                    Some(last) if last.0 == k => last.1 += v,
                    _ => merged.push((k, v)),
                }
            }
            let scale = row.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
            merged.retain(|e| e.1.abs() > 1e-14 * scale);
            if merged.is_empty() {
                if b.abs() > 1e-12 {
                    consistent = false;
                }
                continue;
            }
            rows.push(merged);
            rhs.push(b);
        }

        let m = rows.len();
        let mut k = DMatrix::zeros(m, m);
        // K = A W⁻¹ Aᵀ, accumulated through a column-major view of A
        let mut by_group: Vec<Vec<(usize, f64)>> = vec![Vec::new(); group_weight.len()];
        for (r, row) in rows.iter().enumerate() {
            for &(g, v) in row {
                by_group[g].push((r, v));
            }
        }
        for (g, col) in by_group.iter().enumerate() {
            let w = group_weight[g];
            for &(r1, v1) in col {
                for &(r2, v2) in col {
                    k[(r1, r2)] += v1 * v2 / w;
                }
            }
        }
        let k_pinv = if m == 0 {
            k
        } else {
            let eig = k.symmetric_eigen();
            let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
            let cut = top * 1e-11;
            let mut pinv = DMatrix::zeros(m, m);
            for (i, &l) in eig.eigenvalues.iter().enumerate() {
                if l > cut {
                    let v = eig.eigenvectors.column(i);
                    pinv.ger(1.0 / l, &v, &v, 1.0);
                }
            }
            pinv
        };

        let mut proj = AffineProjector {
            group_of,
            group_weight,
            rows,
            rhs: DVector::from_vec(rhs),
            k_pinv,
            consistent,
        };
        if proj.consistent {
            let g = proj.project(DVector::zeros(proj.group_weight.len()));
            let res = proj.apply(&g) - &proj.rhs;
            let scale = 1.0 + proj.rhs.amax();
            if res.amax() > 1e-8 * scale {
                proj.consistent = false;
            }
        }
        proj
    }

    fn apply(&self, g: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|&(k, v)| v * g[k]).sum::<f64>()),
        )
    }

    /// Weighted projection of group values onto the remaining rows.
    fn project(&self, mut g: DVector<f64>) -> DVector<f64> {
        if self.rows.is_empty() {
            return g;
        }
        let r = self.apply(&g) - &self.rhs;
        let z = &self.k_pinv * r;
        for (row, zr) in self.rows.iter().zip(z.iter()) {
            for &(k, v) in row {
                g[k] -= v * zr / self.group_weight[k];
            }
        }
        g
    }
}

fn weighted_norm(weight: &[f64], v: impl Iterator<Item = f64>) -> f64 {
    weight
        .iter()
        .zip(v)
        .map(|(w, x)| w * x * x)
        .sum::<f64>()
        .sqrt()
}

/// Solves `p` to primal tolerance `opts.tol`; the returned point satisfies the
/// equalities to rounding error and has eigenvalues ≥ `−tol` when converged.
pub fn solve_with(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {}",
            opts.tol
        )));
    }
    p.validate()?;
    let std = p.to_equality_form();
    let layout = Layout::new(&std);
    let ne = layout.entries.len();
    let proj = AffineProjector::new(&std, &layout);
    let ng = proj.group_weight.len();

    let sign = match std.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut cost = vec![0.0; ng];
    for t in &std.objective {
        let e = layout.flat(&std, t.block, t.i, t.j);
        cost[proj.group_of[e]] += sign * t.weight() * t.value;
    }

    let mut z = vec![0.0; ne];
    let mut u = vec![0.0; ne];
    let mut x = vec![0.0; ne];
    let mut rho = opts.rho;
    let alpha = opts.relaxation;
    let mut status = SolveStatus::MaxIter;
    let mut iterations = 0;
    let mut history: Vec<f64> = Vec::new();

    if proj.consistent {
        for it in 0..opts.max_iter {
            iterations = it + 1;
            let mut gsum = vec![0.0; ng];
            for e in 0..ne {
                gsum[proj.group_of[e]] += layout.weight[e] * (z[e] - u[e]);
            }
            let gbar = DVector::from_iterator(
                ng,
                (0..ng).map(|g| (gsum[g] - cost[g] / rho) / proj.group_weight[g]),
            );
            let g = proj.project(gbar);
            for e in 0..ne {
                x[e] = g[proj.group_of[e]];
            }

            let z_old = z.clone();
            let xh: Vec<f64> = (0..ne)
                .map(|e| alpha * x[e] + (1.0 - alpha) * z_old[e])
                .collect();
            for (b, blk) in std.blocks.iter().enumerate() {
                let (lo, hi) = (layout.offsets[b], layout.offsets[b + 1]);
                match blk.kind {
                    BlockKind::Diagonal => {
                        for e in lo..hi {
                            z[e] = (xh[e] + u[e]).max(0.0);
                        }
                    }
                    BlockKind::Psd => {
                        let s = blk.size;
                        let mut m = DMatrix::zeros(s, s);
                        for e in lo..hi {
                            let (_, i, j) = layout.entries[e];
                            let v = xh[e] + u[e];
                            m[(i, j)] = v;
                            m[(j, i)] = v;
                        }
                        let pm = project_symmetric(&m);
                        for e in lo..hi {
                            let (_, i, j) = layout.entries[e];
                            z[e] = 0.5 * (pm[(i, j)] + pm[(j, i)]);
                        }
                    }
                }
            }
            for e in 0..ne {
                u[e] += xh[e] - z[e];
            }

            let r_p = weighted_norm(&layout.weight, (0..ne).map(|e| x[e] - z[e]));
            let r_d = rho * weighted_norm(&layout.weight, (0..ne).map(|e| z[e] - z_old[e]));
            if !r_p.is_finite() || !r_d.is_finite() {
                return Err(Error::NanDetected {
                    iteration: it,
                    context: format!("primal residual {r_p}, dual residual {r_d}, rho {rho}"),
                });
            }
            if r_p <= opts.tol && r_d <= opts.tol {
                status = SolveStatus::Converged;
                break;
            }
            history.push(r_p);
            if it >= 2000 && r_d <= opts.tol && r_p > 1e3 * opts.tol {
                let past = history[it - 1000];
                if r_p > 0.999 * past {
                    status = SolveStatus::InfeasibleSuspected;
                    break;
                }
            }
            if it % 25 == 24 {
                let factor = if r_p > 10.0 * r_d {
                    2.0
                } else if r_d > 10.0 * r_p {
                    0.5
                } else {
                    1.0
                };
                let next = (rho * factor).clamp(1e-6, 1e6);
                if next != rho {
                    let ratio = rho / next;
                    u.iter_mut().for_each(|v| *v *= ratio);
                    rho = next;
                }
            }
        }
    } else {
        status = SolveStatus::InfeasibleSuspected;
    }

    let mut full: BlockMatrices = std
        .blocks
        .iter()
        .map(|b| DMatrix::zeros(b.size, b.size))
        .collect();
    for (e, &(b, i, j)) in layout.entries.iter().enumerate() {
        full[b][(i, j)] = x[e];
        full[b][(j, i)] = x[e];
    }
    let residual = constraint_violations(&std, &full)
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()));
    let min_eigenvalues: Vec<f64> = std
        .blocks
        .iter()
        .zip(&full)
        .map(|(b, m)| match b.kind {
            BlockKind::Psd => min_eigenvalue(m),
            BlockKind::Diagonal => m.diagonal().iter().copied().fold(f64::INFINITY, f64::min),
        })
        .collect();
    let objective = evaluate_terms(&std.objective, &full);
    if status == SolveStatus::Converged {
        let worst_eig = min_eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if residual > opts.tol || worst_eig < -opts.tol {
            status = SolveStatus::MaxIter;
        }
    }
    full.truncate(p.blocks.len());
    let min_eigenvalues = min_eigenvalues[..p.blocks.len()].to_vec();
    Ok(SdpSolution {
        blocks: full,
        objective,
        primal_residual: residual,
        min_eigenvalues,
        iterations,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::problem::{Block, Constraint, ConstraintKind, Term};

    fn psd(size: usize) -> Block {
        Block {
            kind: BlockKind::Psd,
            size,
        }
    }

    #[test]
    fn trace_with_unit_diagonal() {
        let p = SdpProblem {
            blocks: vec![psd(3)],
            constraints: (0..3)
                .map(|i| Constraint {
                    terms: vec![Term::new(0, i, i, 1.0)],
                    kind: ConstraintKind::Eq,
                    rhs: 1.0,
                })
                .collect(),
            objective: (0..3).map(|i| Term::new(0, i, i, 1.0)).collect(),
            sense: Sense::Minimize,
        };
        let s = solve(&p, 1e-7, 10_000).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert!((s.objective - 3.0).abs() <= 1e-7);
    }

    #[test]
    fn max_offdiagonal_with_unit_diagonal() {
        // maximize X_01 subject to X_00 = X_11 = 1, optimum 1
        let p = SdpProblem {
            blocks: vec![psd(2)],
            constraints: (0..2)
                .map(|i| Constraint {
                    terms: vec![Term::new(0, i, i, 1.0)],
                    kind: ConstraintKind::Eq,
                    rhs: 1.0,
                })
                .collect(),
            objective: vec![Term::new(0, 0, 1, 0.5)],
            sense: Sense::Maximize,
        };
        let s = solve(&p, 1e-8, 100_000).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert!((s.objective - 1.0).abs() <= 1e-6, "{}", s.objective);
    }

    #[test]
    fn infeasible_toy() {
        let p = SdpProblem {
            blocks: vec![psd(1)],
            constraints: vec![Constraint {
                terms: vec![Term::new(0, 0, 0, 1.0)],
                kind: ConstraintKind::Eq,
                rhs: -1.0,
            }],
            objective: vec![],
            sense: Sense::Minimize,
        };
        let s = solve(&p, 1e-7, 50_000).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleSuspected);
    }

    #[test]
    fn inconsistent_equalities_flagged_without_iterating() {
        let row = |rhs| Constraint {
            terms: vec![Term::new(0, 0, 0, 1.0)],
            kind: ConstraintKind::Eq,
            rhs,
        };
        let p = SdpProblem {
            blocks: vec![psd(2)],
            constraints: vec![row(1.0), row(2.0)],
            objective: vec![],
            sense: Sense::Minimize,
        };
        let s = solve(&p, 1e-7, 1000).unwrap();
        assert_eq!(s.status, SolveStatus::InfeasibleSuspected);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn rejects_nonpositive_tol() {
        let p = SdpProblem {
            blocks: vec![psd(1)],
            constraints: vec![],
            objective: vec![],
            sense: Sense::Minimize,
        };
        assert!(solve(&p, 0.0, 10).is_err());
    }
}
