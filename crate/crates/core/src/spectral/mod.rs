//! Spectral quantities of Cayley graphs and of the walks on a square complex.

pub mod eigen;
pub mod operators;

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::complex::{Side, SquareComplex};
use crate::groups::{GeneratorSet, GroupTable};
pub use eigen::LanczosParams;
pub use operators::{build_operators, cayley_walk, ComplexOperators, Csr, StateSpace, WalkOperator};

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 6000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("no convergence within {budget} matrix-vector products (estimate {estimate}, residual {residual:e})")]
    NoConvergence { budget: usize, estimate: f64, residual: f64 },
    #[error("LAPACK returned info = {0}")]
    Lapack(i32),
    #[error("operator has no room for a second eigenvalue")]
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Auto,
    Dense,
    Iterative,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Second-largest eigenvalue of the normalized (stochastic) operator.
    pub lambda2: f64,
    pub method: Method,
    pub tol: f64,
    pub iterations: usize,
}

/// Second-largest eigenvalue of a reversible Markov operator, computed on
/// its symmetrization `W^{1/2} M W^{-1/2}`.
pub fn lambda2(op: &WalkOperator, choice: MethodChoice, params: LanczosParams) -> Result<SpectralReport, SpectralError> {
    let n = op.dim();
    if n < 2 {
        return Err(SpectralError::Empty);
    }
    let sqrt_pi: Vec<f64> = op.pi.iter().map(|p| p.sqrt()).collect();
    let dense = match choice {
        MethodChoice::Auto => n <= DENSE_LIMIT,
        MethodChoice::Dense => true,
        MethodChoice::Iterative => false,
    };
    if dense {
        let mut a = vec![0.0; n * n];
        let m = &op.matrix;
        for i in 0..n {
            for (j, v) in m.row(i) {
                a[i * n + j as usize] += sqrt_pi[i] * v / sqrt_pi[j as usize];
            }
        }
        let top = eigen::dense_top_eigenvalues(&mut a, n, 2)?;
        Ok(SpectralReport { lambda2: top[1], method: Method::Dense, tol: 0.0, iterations: 1 })
    } else {
        let r = eigen::lanczos_largest(
            n,
            |x, y| op.apply_symmetrized(&sqrt_pi, x, y),
            &[sqrt_pi.clone()],
            params,
        )?;
        Ok(SpectralReport { lambda2: r.value, method: Method::Iterative, tol: params.tol, iterations: r.matvecs })
    }
}

/// λ₂ of the normalized random walk on Cay(G, S).
pub fn cayley_lambda2(group: &GroupTable, set: &GeneratorSet, choice: MethodChoice, params: LanczosParams) -> Result<SpectralReport, SpectralError> {
    lambda2(&cayley_walk(group, set, false), choice, params)
}

/// Simple adjacency lists.
#[derive(Clone, Debug)]
pub struct Graph {
    pub adj: Vec<Vec<u32>>,
}

impl Graph {
    pub fn cayley(group: &GroupTable, set: &GeneratorSet) -> Self {
        Graph {
            adj: (0..group.order() as u32)
                .map(|g| set.elements().iter().map(|&s| group.mul(g, s)).collect())
                .collect(),
        }
    }

    /// Shortest cycle length, or `None` for a forest. A pair of parallel
    /// edges counts as a 2-cycle; a self-loop as a 1-cycle.
    pub fn girth(&self) -> Option<usize> {
        let n = self.adj.len();
        let mut best = usize::MAX;
        let mut dist = vec![u32::MAX; n];
        let mut parent_edge = vec![(u32::MAX, usize::MAX); n];
        for root in 0..n {
            // BFS from each root; an edge other than the tree edge closes a cycle
            let mut touched = vec![root];
            dist[root] = 0;
            let mut queue = VecDeque::from([root as u32]);
            'bfs: while let Some(x) = queue.pop_front() {
                let dx = dist[x as usize] as usize;
                if 2 * dx + 1 >= best {
                    break;
                }
                for (k, &y) in self.adj[x as usize].iter().enumerate() {
                    if y == x {
                        best = best.min(1);
                        continue;
                    }
                    if parent_edge[x as usize] == (y, self.reverse_slot(x, y, k)) {
                        continue;
                    }
                    if dist[y as usize] == u32::MAX {
                        dist[y as usize] = dx as u32 + 1;
                        parent_edge[y as usize] = (x, k);
                        touched.push(y as usize);
                        queue.push_back(y);
                    } else {
                        best = best.min(dx + dist[y as usize] as usize + 1);
                        if best <= 2 {
                            break 'bfs;
                        }
                    }
                }
            }
            for t in touched {
                dist[t] = u32::MAX;
                parent_edge[t] = (u32::MAX, usize::MAX);
            }
        }
        (best != usize::MAX).then_some(best)
    }

    /// Slot in `adj[y]` of the edge that appears as slot `k` in `adj[x]`.
    /// Parallel copies are matched by rank among equal targets.
    fn reverse_slot(&self, x: u32, y: u32, k: usize) -> usize {
        let rank = self.adj[x as usize][..k].iter().filter(|&&z| z == y).count();
        self.adj[y as usize]
            .iter()
            .enumerate()
            .filter(|&(_, &z)| z == x)
            .nth(rank)
            .map_or(usize::MAX, |(s, _)| s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AlonChung {
    /// ⟨1_T, M 1_T⟩ / ⟨1_T, 1_T⟩.
    pub delta: f64,
    pub lambda: f64,
    /// Pr[T].
    pub mass: f64,
    /// ⟨1_T, M 1_T⟩.
    pub stay: f64,
    pub mass_bound: f64,
    pub stay_bound: f64,
    pub holds: bool,
}

/// The expander-mixing consequences for the indicator of `t`: Pr[T] ≥ δ − λ
/// and ⟨1_T, M1_T⟩ ≥ δ(δ − λ), where δ is measured on `t` itself.
pub fn alon_chung_check(op: &WalkOperator, t: &[u32], lambda: f64) -> AlonChung {
    let mut f = vec![0.0; op.dim()];
    for &x in t {
        f[x as usize] = 1.0;
    }
    let mass = op.inner(&f, &f);
    let stay = op.inner(&f, &op.apply(&f));
    let delta = if mass > 0.0 { stay / mass } else { 0.0 };
    let mass_bound = delta - lambda;
    let stay_bound = delta * (delta - lambda);
    let eps = 1e-12;
    AlonChung {
        delta,
        lambda,
        mass,
        stay,
        mass_bound,
        stay_bound,
        holds: mass + eps >= mass_bound && stay + eps >= stay_bound,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ParallelConcentration {
    /// ⟨f, M∥ f⟩ / ⟨f, f⟩ under the edge distribution.
    pub c_measured: f64,
    pub best_side: Side,
    pub best_label: u32,
    pub best_count: usize,
    /// (c − λ)|G|/2 evaluated at c = c_measured.
    pub required: f64,
    pub holds: bool,
}

/// For an edge set R: some label class must hold at least (c − λ)|G|/2
/// edges of R, with c the measured parallel-walk return rate.
pub fn parallel_concentration(cx: &SquareComplex, parallel: &WalkOperator, r: &[u32], lambda: f64) -> ParallelConcentration {
    let mut f = vec![0.0; cx.num_edges()];
    for &e in r {
        f[e as usize] = 1.0;
    }
    let norm = parallel.inner(&f, &f);
    let c = if norm > 0.0 { parallel.inner(&f, &parallel.apply(&f)) / norm } else { 0.0 };
    let mut counts: Vec<((Side, u32), usize)> = Vec::new();
    let mut sorted: Vec<u32> = r.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for e in sorted {
        let ed = cx.edge(e);
        match counts.iter_mut().find(|(k, _)| *k == (ed.side, ed.label)) {
            Some((_, n)) => *n += 1,
            None => counts.push(((ed.side, ed.label), 1)),
        }
    }
    let ((side, label), best) = counts.into_iter().max_by_key(|&(k, n)| (n, std::cmp::Reverse(k))).unwrap_or(((Side::A, 0), 0));
    let required = (c - lambda) * cx.num_vertices() as f64 / 2.0;
    ParallelConcentration {
        c_measured: c,
        best_side: side,
        best_label: label,
        best_count: best,
        required,
        holds: best as f64 + 1e-9 >= required,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_and_complete_graph() {
        let z8 = GroupTable::cyclic(8).unwrap();
        let s = GeneratorSet::new(&z8, [1, 7]).unwrap();
        let r = cayley_lambda2(&z8, &s, MethodChoice::Auto, LanczosParams::default()).unwrap();
        assert!((r.lambda2 - (std::f64::consts::PI / 4.0).cos()).abs() < 1e-9);
        let z4 = GroupTable::cyclic(4).unwrap();
        let s = GeneratorSet::new(&z4, [1, 2, 3]).unwrap();
        let r = cayley_lambda2(&z4, &s, MethodChoice::Auto, LanczosParams::default()).unwrap();
        assert!((r.lambda2 + 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn disconnected_graph_has_lambda_one() {
        let z8 = GroupTable::cyclic(8).unwrap();
        let s = GeneratorSet::new(&z8, [2, 6]).unwrap();
        let r = cayley_lambda2(&z8, &s, MethodChoice::Dense, LanczosParams::default()).unwrap();
        assert!((r.lambda2 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dense_and_iterative_agree() {
        let g = GroupTable::dihedral(150).unwrap();
        let s = GeneratorSet::new(&g, [1, 149, 150, 153, 171]).unwrap();
        let p = LanczosParams::default();
        let d = cayley_lambda2(&g, &s, MethodChoice::Dense, p).unwrap();
        let i = cayley_lambda2(&g, &s, MethodChoice::Iterative, p).unwrap();
        assert!((d.lambda2 - i.lambda2).abs() < 1e-6, "{} vs {}", d.lambda2, i.lambda2);
    }

    #[test]
    fn girth_examples() {
        let z8 = GroupTable::cyclic(8).unwrap();
        let s = GeneratorSet::new(&z8, [1, 7]).unwrap();
        assert_eq!(Graph::cayley(&z8, &s).girth(), Some(8));
        let z4 = GroupTable::cyclic(4).unwrap();
        let s = GeneratorSet::new(&z4, [1, 2, 3]).unwrap();
        assert_eq!(Graph::cayley(&z4, &s).girth(), Some(3));
        let path = Graph { adj: vec![vec![1], vec![0, 2], vec![1]] };
        assert_eq!(path.girth(), None);
    }

    #[test]
    fn alon_chung_on_the_cycle() {
        let z8 = GroupTable::cyclic(8).unwrap();
        let s = GeneratorSet::new(&z8, [1, 7]).unwrap();
        let op = cayley_walk(&z8, &s, false);
        let lam = (std::f64::consts::PI / 4.0).cos();
        let r = alon_chung_check(&op, &[0, 1, 2, 3], lam);
        assert!((r.delta - 0.75).abs() < 1e-12);
        assert!((r.mass_bound * 8.0 - (0.75 - lam) * 8.0).abs() < 1e-12);
        assert!(r.holds);
        let all: Vec<u32> = (0..8).collect();
        let r = alon_chung_check(&op, &all, lam);
        assert!((r.delta - 1.0).abs() < 1e-12 && r.holds);
    }

    #[test]
    fn parallel_concentration_extremes() {
        let g = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&g, [1, 7]).unwrap();
        let b = GeneratorSet::new(&g, [3, 5]).unwrap();
        let cx = SquareComplex::build(&g, &a, &b).unwrap();
        let ops = build_operators(&cx);
        let all: Vec<u32> = (0..cx.num_edges() as u32).collect();
        let r = parallel_concentration(&cx, &ops.parallel, &all, 0.7);
        assert!((r.c_measured - 1.0).abs() < 1e-12);
        assert_eq!(r.best_count, 8);
        let r = parallel_concentration(&cx, &ops.parallel, &[0], 0.7);
        assert_eq!(r.c_measured, 0.0);
        assert!(r.holds);
        // a single class: operator value equals the direct count of stays
        let class: Vec<u32> = cx.class_edges(Side::A, 1).collect();
        let r = parallel_concentration(&cx, &ops.parallel, &class, 0.7);
        let stays: usize = class
            .iter()
            .map(|&e| cx.parallel_neighbors(e).iter().filter(|(f, _)| class.contains(f)).count())
            .sum();
        assert_eq!(stays, 2 * class.len());
        assert!((r.c_measured - 1.0).abs() < 1e-12);
    }
}
