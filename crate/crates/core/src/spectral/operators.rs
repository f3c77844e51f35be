//! Sparse Markov operators on vertices and edges of a square complex.

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::complex::{Side, SquareComplex};
use crate::groups::{GeneratorSet, GroupTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpace {
    Vertices,
    Edges,
}

/// Compressed sparse rows.
#[derive(Clone, Debug)]
pub struct Csr {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<u32>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// From per-row (column, value) lists; repeated columns are summed.
    pub fn from_rows(n_cols: usize, rows: Vec<Vec<(u32, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows.iter().cloned() {
            r.sort_by_key(|&(c, _)| c);
            let mut last: Option<u32> = None;
            for (c, v) in r {
                if last == Some(c) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Csr { n_rows: rows.len(), n_cols, row_ptr, cols, vals }
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (u32, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    /// Product `self · other`.
    pub fn matmul(&self, other: &Csr) -> Csr {
        assert_eq!(self.n_cols, other.n_rows);
        let rows = (0..self.n_rows)
            .map(|i| {
                let mut acc: Vec<(u32, f64)> = Vec::new();
                for (k, v) in self.row(i) {
                    for (j, w) in other.row(k as usize) {
                        acc.push((j, v * w));
                    }
                }
                acc
            })
            .collect();
        Csr::from_rows(other.n_cols, rows)
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }
}

/// A Markov operator `(Mf)(x) = Σ_y M(x,y) f(y)` with a stationary
/// distribution under which it is self-adjoint.
#[derive(Clone, Debug)]
pub struct WalkOperator {
    pub name: String,
    pub space: StateSpace,
    /// Stationary distribution as floats.
    pub pi: Vec<f64>,
    pub matrix: Csr,
}

impl WalkOperator {
    pub fn dim(&self) -> usize {
        self.pi.len()
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.matrix.n_rows];
        self.matrix.apply(f, &mut out);
        out
    }

    /// `⟨f, g⟩ = E_π[f g]`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        self.pi.iter().zip(f).zip(g).map(|((p, a), b)| p * a * b).sum()
    }

    /// max |M·1 − 1|.
    pub fn constant_residual(&self) -> f64 {
        let ones = vec![1.0; self.dim()];
        self.apply(&ones).iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max)
    }

    /// max |π(x)M(x,y) − π(y)M(y,x)| over stored entries, which is the
    /// self-adjointness defect under ⟨·,·⟩_π.
    pub fn self_adjoint_residual(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for x in 0..m.n_rows {
            for (y, v) in m.row(x) {
                let back = m.row(y as usize).find(|&(c, _)| c as usize == x).map_or(0.0, |(_, w)| w);
                worst = worst.max((self.pi[x] * v - self.pi[y as usize] * back).abs());
            }
        }
        worst
    }

    /// Row sums minus one and negative entries; zero for a stochastic matrix.
    pub fn stochastic_residual(&self) -> f64 {
        let m = &self.matrix;
        let mut worst: f64 = 0.0;
        for x in 0..m.n_rows {
            let mut s = 0.0;
            for (_, v) in m.row(x) {
                worst = worst.max(-v);
                s += v;
            }
            worst = worst.max((s - 1.0).abs());
        }
        worst
    }

    /// Symmetrised matrix `W^{1/2} M W^{-1/2}` applied to `x`.
    pub fn apply_symmetrized(&self, sqrt_pi: &[f64], x: &[f64], y: &mut [f64]) {
        let m = &self.matrix;
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                let j = m.cols[k] as usize;
                acc += m.vals[k] * x[j] / sqrt_pi[j];
            }
            *yi = acc * sqrt_pi[i];
        }
    }

    /// Restriction to the states in `keep` (renormalising π); meaningful
    /// when `keep` is closed under the walk.
    pub fn restrict(&self, keep: &[u32], name: String) -> WalkOperator {
        let mut slot = vec![u32::MAX; self.dim()];
        for (k, &x) in keep.iter().enumerate() {
            slot[x as usize] = k as u32;
        }
        let rows = keep
            .iter()
            .map(|&x| {
                self.matrix
                    .row(x as usize)
                    .filter(|&(y, _)| slot[y as usize] != u32::MAX)
                    .map(|(y, v)| (slot[y as usize], v))
                    .collect()
            })
            .collect();
        let total: f64 = keep.iter().map(|&x| self.pi[x as usize]).sum();
        WalkOperator {
            name,
            space: self.space,
            pi: keep.iter().map(|&x| self.pi[x as usize] / total).collect(),
            matrix: Csr::from_rows(keep.len(), rows),
        }
    }
}

/// Random walk on Cay(G, S): left multiplication `g → s g` when `left`,
/// otherwise right multiplication `g → g s`. Both have the same spectrum.
pub fn cayley_walk(group: &GroupTable, set: &GeneratorSet, left: bool) -> WalkOperator {
    let n = group.order();
    let w = 1.0 / set.len() as f64;
    let rows = (0..n as u32)
        .map(|g| {
            set.elements()
                .iter()
                .map(|&s| (if left { group.mul(s, g) } else { group.mul(g, s) }, w))
                .collect()
        })
        .collect();
    WalkOperator {
        name: format!("Cay({}, {} generators)", group.name(), set.len()),
        space: StateSpace::Vertices,
        pi: vec![1.0 / n as f64; n],
        matrix: Csr::from_rows(n, rows),
    }
}

/// Edge distribution: half the mass uniform on A-edges, half uniform on B-edges.
pub fn edge_distribution(cx: &SquareComplex) -> Vec<Ratio<u64>> {
    let na_e = cx.num_a_edges() as u64;
    let nb_e = cx.num_edges() as u64 - na_e;
    cx.edges()
        .iter()
        .map(|e| match e.side {
            Side::A => Ratio::new(1, 2 * na_e),
            Side::B => Ratio::new(1, 2 * nb_e),
        })
        .collect()
}

/// All walk operators of a complex.
#[derive(Clone, Debug)]
pub struct ComplexOperators {
    pub m_a: WalkOperator,
    pub m_b: WalkOperator,
    pub m_0: WalkOperator,
    /// Edges → vertices: `Df(g) = ½E_a f({g,ag}) + ½E_b f({g,gb})`.
    pub down: Csr,
    /// Vertices → edges: `Uf({u,v}) = ½(f(u)+f(v))`.
    pub up: Csr,
    /// `U M₀ D` on edges.
    pub m: WalkOperator,
    pub parallel: WalkOperator,
    pub edge_weights: Vec<Ratio<u64>>,
}

pub fn build_operators(cx: &SquareComplex) -> ComplexOperators {
    let n = cx.num_vertices();
    let (na, nb) = (cx.a_size(), cx.b_size());
    let uniform = vec![1.0 / n as f64; n];
    let m_a = WalkOperator {
        name: "M_A".into(),
        space: StateSpace::Vertices,
        pi: uniform.clone(),
        matrix: Csr::from_rows(
            n,
            (0..n as u32)
                .map(|g| (0..na).map(|i| (cx.left_neighbor(g, i), 1.0 / na as f64)).collect())
                .collect(),
        ),
    };
    let m_b = WalkOperator {
        name: "M_B".into(),
        space: StateSpace::Vertices,
        pi: uniform.clone(),
        matrix: Csr::from_rows(
            n,
            (0..n as u32)
                .map(|g| (0..nb).map(|j| (cx.right_neighbor(g, j), 1.0 / nb as f64)).collect())
                .collect(),
        ),
    };
    let m_0 = WalkOperator {
        name: "M_0".into(),
        space: StateSpace::Vertices,
        pi: uniform,
        matrix: Csr::from_rows(
            n,
            (0..n)
                .map(|g| {
                    m_a.matrix
                        .row(g)
                        .chain(m_b.matrix.row(g))
                        .map(|(c, v)| (c, 0.5 * v))
                        .collect()
                })
                .collect(),
        ),
    };
    let ne = cx.num_edges();
    let down = Csr::from_rows(
        ne,
        (0..n as u32)
            .map(|g| {
                let mut r: Vec<(u32, f64)> = (0..na).map(|i| (cx.a_edge_at(g, i), 0.5 / na as f64)).collect();
                r.extend((0..nb).map(|j| (cx.b_edge_at(g, j), 0.5 / nb as f64)));
                r
            })
            .collect(),
    );
    let up = Csr::from_rows(
        n,
        cx.edges().iter().map(|e| vec![(e.u, 0.5), (e.v, 0.5)]).collect(),
    );
    let edge_weights = edge_distribution(cx);
    let pi_e: Vec<f64> = edge_weights.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
    let m = WalkOperator {
        name: "U M_0 D".into(),
        space: StateSpace::Edges,
        pi: pi_e.clone(),
        matrix: up.matmul(&m_0.matrix).matmul(&down),
    };
    let parallel = WalkOperator {
        name: "M_par".into(),
        space: StateSpace::Edges,
        pi: pi_e,
        matrix: Csr::from_rows(
            ne,
            (0..ne as u32)
                .map(|e| {
                    cx.parallel_neighbors(e)
                        .into_iter()
                        .map(|(f, p)| (f, *p.numer() as f64 / *p.denom() as f64))
                        .collect()
                })
                .collect(),
        ),
    };
    ComplexOperators { m_a, m_b, m_0, down, up, m, parallel, edge_weights }
}

/// `|⟨Df₁, f₀⟩ − ⟨f₁, Uf₀⟩_{D₁}|` for seeded random `f₁, f₀`.
pub fn down_up_adjointness(cx: &SquareComplex, ops: &ComplexOperators, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cx.num_vertices();
    let ne = cx.num_edges();
    let f1: Vec<f64> = (0..ne).map(|_| rng.random::<f64>() - 0.5).collect();
    let f0: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let mut df1 = vec![0.0; n];
    ops.down.apply(&f1, &mut df1);
    let mut uf0 = vec![0.0; ne];
    ops.up.apply(&f0, &mut uf0);
    let lhs: f64 = df1.iter().zip(&f0).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let rhs = ops.m.inner(&f1, &uf0);
    (lhs - rhs).abs()
}
