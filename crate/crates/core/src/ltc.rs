//! The global square code C[G, A, B, C_A, C_B] and its vertex-local tester.
//!
//! Bit positions are the canonical square ids of the complex. The local
//! view at g is the |A| × |B| grid with cell (i, j) holding the square
//! [a_i, g, b_j], packed as bit `i·|B| + j` of a u64.

use std::collections::VecDeque;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{tensor, CodeError, LinearCode};
use crate::complex::{Side, SquareComplex};
use crate::gf2::{min_weight, BitMatrix, BitVector, WeightMode};

pub const MAX_LOCAL_CELLS: usize = 64;
pub const EXACT_DIST_DIM_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtcError {
    #[error("base code length {found} does not match generator set size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("local grid has {0} cells, above {MAX_LOCAL_CELLS}")]
    LocalTooLarge(usize),
    #[error("word has length {found}, expected {expected}")]
    WordLength { expected: usize, found: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AssemblyMode {
    Edges,
    Vertices,
}

/// C_A ⊗ C_B on the |A| × |B| grid, with its parity checks as bit masks.
#[derive(Clone, Debug)]
pub struct LocalTensor {
    pub na: usize,
    pub nb: usize,
    pub code: LinearCode,
    checks: Vec<u64>,
    row_checks: Vec<u64>,
    col_checks: Vec<u64>,
}

impl LocalTensor {
    pub fn new(ca: &LinearCode, cb: &LinearCode) -> Result<Self, LtcError> {
        let (na, nb) = (ca.len(), cb.len());
        if na * nb > MAX_LOCAL_CELLS {
            return Err(LtcError::LocalTooLarge(na * nb));
        }
        let code = tensor(ca, cb);
        let checks = code.parity_check().rows().iter().map(|r| r.as_u64()).collect();
        let row_checks = cb.parity_check().rows().iter().map(|r| r.as_u64()).collect();
        let col_checks = ca.parity_check().rows().iter().map(|r| r.as_u64()).collect();
        Ok(Self { na, nb, code, checks, row_checks, col_checks })
    }

    #[inline]
    pub fn contains(&self, grid: u64) -> bool {
        self.checks.iter().all(|&m| (m & grid).count_ones() % 2 == 0)
    }

    /// Row `i` of a grid as a word of C_B's length.
    #[inline]
    pub fn row(&self, grid: u64, i: usize) -> u64 {
        (grid >> (i * self.nb)) & ((1u64 << self.nb) - 1)
    }

    /// Column `j` of a grid as a word of C_A's length.
    #[inline]
    pub fn col(&self, grid: u64, j: usize) -> u64 {
        (0..self.na).fold(0, |acc, i| acc | (((grid >> (i * self.nb + j)) & 1) << i))
    }

    pub fn row_in_cb(&self, word: u64) -> bool {
        self.row_checks.iter().all(|&m| (m & word).count_ones() % 2 == 0)
    }

    pub fn col_in_ca(&self, word: u64) -> bool {
        self.col_checks.iter().all(|&m| (m & word).count_ones() % 2 == 0)
    }

    pub fn codim(&self) -> usize {
        self.checks.len()
    }
}

#[derive(Clone, Debug)]
pub struct SquareCodeInstance {
    complex: SquareComplex,
    ca: LinearCode,
    cb: LinearCode,
    local: LocalTensor,
    mode: AssemblyMode,
    parity_rows: usize,
    rank: usize,
    /// Basis of the global code.
    generator: BitMatrix,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LiftedTensorCheck {
    pub edge_rows: usize,
    pub vertex_rows: usize,
    pub edge_rank: usize,
    pub vertex_rank: usize,
    pub edge_kernel_in_vertex_system: bool,
    pub vertex_kernel_in_edge_system: bool,
    pub equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateBounds {
    #[serde(serialize_with = "ratio_i")]
    pub rate: Ratio<i64>,
    #[serde(serialize_with = "ratio_i")]
    pub generic: Ratio<i64>,
    pub cover_size: usize,
    #[serde(serialize_with = "ratio_i")]
    pub nu: Ratio<i64>,
    #[serde(serialize_with = "ratio_i")]
    pub cover: Ratio<i64>,
    pub bipartite: bool,
    #[serde(serialize_with = "opt_ratio_i")]
    pub bipartite_bound: Option<Ratio<i64>>,
    pub all_hold: bool,
}

fn ratio_i<S: serde::Serializer>(r: &Ratio<i64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn opt_ratio_i<S: serde::Serializer>(r: &Option<Ratio<i64>>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => ratio_i(r, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub delta_a: f64,
    pub delta_b: f64,
    pub lambda: f64,
    pub bound: f64,
    /// Minimum weight found; exact or an upper bound depending on `exact`.
    pub measured: Option<usize>,
    pub relative: Option<f64>,
    pub exact: bool,
    /// measured ≥ bound·n; `None` when the bound is vacuous or nothing was measured.
    pub holds: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaTheorem {
    pub c: f64,
    pub kappa: f64,
    pub condition_holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TestOutcome {
    pub vertex: u32,
    pub accept: bool,
    pub queried: Vec<u32>,
}

impl SquareCodeInstance {
    pub fn assemble(
        complex: &SquareComplex,
        ca: &LinearCode,
        cb: &LinearCode,
        mode: AssemblyMode,
    ) -> Result<Self, LtcError> {
        if ca.len() != complex.a_size() {
            return Err(LtcError::LengthMismatch { expected: complex.a_size(), found: ca.len() });
        }
        if cb.len() != complex.b_size() {
            return Err(LtcError::LengthMismatch { expected: complex.b_size(), found: cb.len() });
        }
        let local = LocalTensor::new(ca, cb)?;
        let mut inst = Self {
            complex: complex.clone(),
            ca: ca.clone(),
            cb: cb.clone(),
            local,
            mode,
            parity_rows: 0,
            rank: 0,
            generator: BitMatrix::empty(complex.num_squares()),
        };
        let h = inst.parity_system(mode);
        let kernel = h.nullspace_basis();
        inst.parity_rows = h.nrows();
        inst.rank = h.ncols() - kernel.len();
        inst.generator = BitMatrix::from_rows(h.ncols(), kernel).expect("kernel vectors have the code length");
        Ok(inst)
    }

    /// Parity rows in the requested assembly mode, over the square ids.
    pub fn parity_system(&self, mode: AssemblyMode) -> BitMatrix {
        let cx = &self.complex;
        let n = cx.num_squares();
        let mut h = BitMatrix::empty(n);
        match mode {
            AssemblyMode::Edges => {
                for e in 0..cx.num_edges() as u32 {
                    let squares = cx.edge_squares(e);
                    let dual = match cx.edge(e).side {
                        Side::A => self.cb.parity_check(),
                        Side::B => self.ca.parity_check(),
                    };
                    for chk in dual.rows() {
                        h.push_row(BitVector::from_indices(n, chk.iter_ones().map(|k| squares[k] as usize)));
                    }
                }
            }
            AssemblyMode::Vertices => {
                for g in 0..cx.num_vertices() as u32 {
                    let link = cx.link_row_major(g);
                    for &m in &self.local.checks {
                        h.push_row(BitVector::from_indices(n, BitVector::from_u64(m, link.len()).iter_ones().map(|k| link[k] as usize)));
                    }
                }
            }
        }
        h
    }

    pub fn complex(&self) -> &SquareComplex {
        &self.complex
    }

    pub fn code_a(&self) -> &LinearCode {
        &self.ca
    }

    pub fn code_b(&self) -> &LinearCode {
        &self.cb
    }

    pub fn local(&self) -> &LocalTensor {
        &self.local
    }

    pub fn mode(&self) -> AssemblyMode {
        self.mode
    }

    pub fn parity_rows(&self) -> usize {
        self.parity_rows
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.complex.num_squares()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn rate(&self) -> Ratio<i64> {
        Ratio::new(self.dim() as i64, self.len() as i64)
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    fn check_len(&self, f: &BitVector) -> Result<(), LtcError> {
        if f.len() != self.len() {
            return Err(LtcError::WordLength { expected: self.len(), found: f.len() });
        }
        Ok(())
    }

    /// Local view of `f` at `g`.
    pub fn local_grid(&self, f: &BitVector, g: u32) -> u64 {
        self.complex
            .link_row_major(g)
            .iter()
            .enumerate()
            .fold(0u64, |acc, (k, &s)| acc | ((f.get(s as usize) as u64) << k))
    }

    pub fn contains(&self, f: &BitVector) -> bool {
        f.len() == self.len() && (0..self.complex.num_vertices() as u32).all(|g| self.local.contains(self.local_grid(f, g)))
    }

    /// Number of vertices whose local view is not a tensor codeword.
    pub fn rejecting_vertices(&self, f: &BitVector) -> Result<usize, LtcError> {
        self.check_len(f)?;
        Ok((0..self.complex.num_vertices() as u32)
            .filter(|&g| !self.local.contains(self.local_grid(f, g)))
            .count())
    }

    /// Exact rejection probability of the vertex tester.
    pub fn zeta(&self, f: &BitVector) -> Result<Ratio<u64>, LtcError> {
        Ok(Ratio::new(self.rejecting_vertices(f)? as u64, self.complex.num_vertices() as u64))
    }

    /// One run of the tester: uniform vertex, read its |A||B| squares.
    pub fn sample_test(&self, f: &BitVector, seed: u64) -> Result<TestOutcome, LtcError> {
        self.check_len(f)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = rng.random_range(0..self.complex.num_vertices() as u32);
        let queried = self.complex.link_row_major(g).to_vec();
        let accept = self.local.contains(self.local_grid(f, g));
        Ok(TestOutcome { vertex: g, accept, queried })
    }

    pub fn random_codeword<R: Rng>(&self, rng: &mut R) -> BitVector {
        let mut w = BitVector::zeros(self.len());
        for row in self.generator.rows() {
            if rng.random_bool(0.5) {
                w.xor_assign(row);
            }
        }
        w
    }

    /// Exact Hamming distance from `f` to the code, by enumeration when
    /// dim ≤ 24.
    pub fn distance_to_code(&self, f: &BitVector) -> Option<usize> {
        let k = self.dim();
        if k > EXACT_DIST_DIM_CAP {
            return None;
        }
        let rows = self.generator.rows();
        let mut cur = f.clone();
        let mut best = cur.weight();
        for step in 1u64..(1u64 << k) {
            cur.xor_assign(&rows[step.trailing_zeros() as usize]);
            best = best.min(cur.weight());
        }
        Some(best)
    }

    /// Edge-mode and vertex-mode systems define the same code.
    pub fn lifted_tensor_check(&self) -> LiftedTensorCheck {
        let he = self.parity_system(AssemblyMode::Edges);
        let hv = self.parity_system(AssemblyMode::Vertices);
        let ke = he.nullspace_basis();
        let kv = hv.nullspace_basis();
        let edge_kernel_in_vertex_system = ke.iter().all(|v| hv.annihilates(v));
        let vertex_kernel_in_edge_system = kv.iter().all(|v| he.annihilates(v));
        let n = self.len();
        LiftedTensorCheck {
            edge_rows: he.nrows(),
            vertex_rows: hv.nrows(),
            edge_rank: n - ke.len(),
            vertex_rank: n - kv.len(),
            edge_kernel_in_vertex_system,
            vertex_kernel_in_edge_system,
            equal: ke.len() == kv.len() && edge_kernel_in_vertex_system && vertex_kernel_in_edge_system,
        }
    }

    pub fn rate_bounds(&self) -> RateBounds {
        let ra = self.ca.rate();
        let rb = self.cb.rate();
        let one = Ratio::from_integer(1);
        let generic = Ratio::from_integer(2) * (ra + rb) - Ratio::from_integer(3);
        let bipartite = is_bipartite(&self.complex);
        let (cover_size, nu) = if bipartite {
            (self.complex.num_vertices() / 2, Ratio::new(1, 2))
        } else {
            let c = greedy_vertex_cover(&self.complex).len();
            (c, Ratio::new(c as i64, self.complex.num_vertices() as i64))
        };
        let four = Ratio::from_integer(4);
        let cover = four * nu * ra * rb + one - four * nu;
        let bipartite_bound = bipartite.then(|| Ratio::from_integer(2) * ra * rb - one);
        let rate = self.rate();
        let all_hold = rate >= generic && rate >= cover && bipartite_bound.is_none_or(|b| rate >= b);
        RateBounds { rate, generic, cover_size, nu, cover, bipartite, bipartite_bound, all_hold }
    }

    /// Distance bound δ_Aδ_B(max(δ_A, δ_B) − λ) against a measured minimum weight.
    pub fn distance_report(&self, lambda: f64, mode: Option<WeightMode>) -> Result<DistanceReport, LtcError> {
        let rel = |c: &LinearCode| -> Result<f64, LtcError> {
            Ok(c.distance()?.weight as f64 / c.len() as f64)
        };
        let delta_a = rel(&self.ca)?;
        let delta_b = rel(&self.cb)?;
        let bound = delta_a * delta_b * (delta_a.max(delta_b) - lambda);
        let mode = mode.unwrap_or(if self.dim() <= EXACT_DIST_DIM_CAP {
            WeightMode::Exact { cap: EXACT_DIST_DIM_CAP }
        } else {
            WeightMode::Heuristic { iterations: 20, seed: 0 }
        });
        let (measured, exact) = if self.dim() == 0 {
            (None, true)
        } else {
            let mw = min_weight(&self.generator, mode).map_err(CodeError::from)?;
            (Some(mw.weight), mw.exact)
        };
        let n = self.len() as f64;
        let relative = measured.map(|w| w as f64 / n);
        let holds = match relative {
            Some(r) if bound > 0.0 => Some(r >= bound - 1e-12),
            _ => None,
        };
        Ok(DistanceReport { delta_a, delta_b, lambda, bound, measured, relative, exact, holds })
    }
}

/// Constants of the local testability theorem.
pub fn kappa_theorem(na: usize, nb: usize, delta_a: f64, delta_b: f64, kappa0: f64, lambda: f64) -> KappaTheorem {
    let c = kappa0 / (8.0 + kappa0) * delta_a.min(delta_b);
    let s = (na + nb) as f64;
    let kappa = (1.0 / (4.0 * (1.0 + s))).min((c - lambda) / (2.0 * s));
    KappaTheorem { c, kappa, condition_holds: c > lambda }
}

fn skeleton(cx: &SquareComplex) -> Vec<Vec<u32>> {
    let mut adj = vec![Vec::new(); cx.num_vertices()];
    for e in cx.edges() {
        adj[e.u as usize].push(e.v);
        adj[e.v as usize].push(e.u);
    }
    adj
}

pub fn is_bipartite(cx: &SquareComplex) -> bool {
    let adj = skeleton(cx);
    let mut color = vec![u8::MAX; adj.len()];
    for s in 0..adj.len() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let v = v as usize;
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    queue.push_back(v);
                } else if color[v] == color[u] {
                    return false;
                }
            }
        }
    }
    true
}

/// Greedy max-degree vertex cover of the 1-skeleton.
pub fn greedy_vertex_cover(cx: &SquareComplex) -> Vec<u32> {
    let adj = skeleton(cx);
    let n = adj.len();
    let mut covered = vec![false; cx.num_edges()];
    let mut inc: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (k, e) in cx.edges().iter().enumerate() {
        inc[e.u as usize].push(k);
        inc[e.v as usize].push(k);
    }
    let mut deg: Vec<usize> = inc.iter().map(|v| v.len()).collect();
    let mut cover = Vec::new();
    let mut left = cx.num_edges();
    while left > 0 {
        let g = (0..n).max_by_key(|&g| (deg[g], std::cmp::Reverse(g))).unwrap();
        cover.push(g as u32);
        for &k in &inc[g] {
            if !covered[k] {
                covered[k] = true;
                left -= 1;
                let e = cx.edge(k as u32);
                deg[e.u as usize] -= 1;
                deg[e.v as usize] -= 1;
            }
        }
    }
    cover.sort_unstable();
    cover
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{GeneratorSet, GroupTable};

    fn z8() -> SquareComplex {
        let g = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&g, [1, 7]).unwrap();
        let b = GeneratorSet::new(&g, [3, 5]).unwrap();
        SquareComplex::build(&g, &a, &b).unwrap()
    }

    #[test]
    fn z8_repetition_instance() {
        let rep = LinearCode::repetition(2);
        let inst = SquareCodeInstance::assemble(&z8(), &rep, &rep, AssemblyMode::Edges).unwrap();
        assert_eq!(inst.len(), 8);
        assert_eq!(inst.dim(), 1);
        assert_eq!(inst.generator().row(0).weight(), 8);
        let lt = inst.lifted_tensor_check();
        assert!(lt.equal);
        assert_eq!(lt.edge_rows, 16);
        assert_eq!(lt.vertex_rows, 8 * 3);
        let rb = inst.rate_bounds();
        assert_eq!(rb.rate, Ratio::new(1, 8));
        assert_eq!(rb.generic, Ratio::from_integer(-1));
        assert!(rb.all_hold);
        let dr = inst.distance_report(std::f64::consts::FRAC_1_SQRT_2, None).unwrap();
        assert!((dr.bound - (1.0 - std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
        assert_eq!(dr.measured, Some(8));
        assert_eq!(dr.holds, Some(true));
    }

    #[test]
    fn z8_single_square_zeta() {
        let rep = LinearCode::repetition(2);
        let inst = SquareCodeInstance::assemble(&z8(), &rep, &rep, AssemblyMode::Vertices).unwrap();
        let f = BitVector::unit(8, 0);
        assert_eq!(inst.zeta(&f).unwrap(), Ratio::new(1, 2));
        assert_eq!(inst.zeta(&BitVector::ones(8)).unwrap(), Ratio::from_integer(0));
        assert_eq!(inst.distance_to_code(&f), Some(1));
        let rejects = (0..10_000u64).filter(|&s| !inst.sample_test(&f, s).unwrap().accept).count();
        assert!((rejects as f64 / 1e4 - 0.5).abs() < 0.02, "{rejects}");
        assert_eq!(inst.sample_test(&f, 3).unwrap().queried.len(), 4);
    }

    #[test]
    fn kappa_theorem_arithmetic() {
        let k = kappa_theorem(2, 2, 1.0, 1.0, 0.5, 0.0);
        assert!((k.c - 1.0 / 17.0).abs() < 1e-15);
        // min(1/20, (1/17)/8)
        assert!((k.kappa - 1.0 / 136.0).abs() < 1e-15);
        assert!(k.condition_holds);
        let k = kappa_theorem(2, 2, 1.0, 1.0, 0.5, std::f64::consts::FRAC_1_SQRT_2);
        assert!(!k.condition_holds && k.kappa <= 0.0);
    }

    #[test]
    fn cover_is_a_cover() {
        let cx = z8();
        let cover = greedy_vertex_cover(&cx);
        assert!(cx.edges().iter().all(|e| cover.binary_search(&e.u).is_ok() || cover.binary_search(&e.v).is_ok()));
        // Z8 with odd generators: even/odd bipartition
        assert!(is_bipartite(&cx));
    }

    #[test]
    fn rejects_bad_lengths() {
        let rep = LinearCode::repetition(3);
        let two = LinearCode::repetition(2);
        assert!(matches!(
            SquareCodeInstance::assemble(&z8(), &rep, &two, AssemblyMode::Edges),
            Err(LtcError::LengthMismatch { expected: 2, found: 3 })
        ));
    }
}
