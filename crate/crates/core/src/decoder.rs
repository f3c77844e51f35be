//! Local-view decoder: nearest tensor codeword per vertex, then greedy
//! single-vertex replacements that lower the number of dispute edges.

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::codes::testability::ratio_str;
use crate::complex::Side;
use crate::gf2::BitVector;
use crate::ltc::SquareCodeInstance;

pub const MAX_LOCAL_DIM: usize = 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecoderError {
    #[error("local tensor code has dimension {0}, above the exhaustive cap {MAX_LOCAL_DIM}")]
    TensorDimCapExceeded(usize),
    #[error("word has length {found}, expected {expected}")]
    WordLength { expected: usize, found: usize },
}

/// One tensor codeword per vertex and the edges on which neighbours disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalViewAssignment {
    pub views: Vec<u64>,
    disputes: Vec<bool>,
    dispute_count: usize,
    a_disputes: usize,
    num_a_edges: usize,
}

impl LocalViewAssignment {
    pub fn dispute_count(&self) -> usize {
        self.dispute_count
    }

    pub fn is_dispute(&self, e: u32) -> bool {
        self.disputes[e as usize]
    }

    pub fn dispute_edges(&self) -> impl Iterator<Item = u32> + '_ {
        self.disputes.iter().enumerate().filter(|(_, &d)| d).map(|(e, _)| e as u32)
    }

    /// Fraction of dispute edges, uniform over X(1).
    pub fn delta(&self) -> Ratio<u64> {
        Ratio::new(self.dispute_count as u64, self.disputes.len() as u64)
    }

    /// Dispute probability when an A-edge or a B-edge is chosen with
    /// probability ½ each.
    pub fn delta_weighted(&self) -> Ratio<u64> {
        let na = self.num_a_edges as u64;
        let nb = (self.disputes.len() - self.num_a_edges) as u64;
        let ra = self.a_disputes as u64;
        let rb = (self.dispute_count - self.a_disputes) as u64;
        Ratio::new(ra * nb + rb * na, 2 * na * nb)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Codeword,
    Far,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub vertex: u32,
    pub old: u64,
    pub new: u64,
    pub local_before: usize,
    pub local_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub verdict: Verdict,
    pub iterations: usize,
    #[serde(serialize_with = "ratio_str")]
    pub delta_initial: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub delta_final: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub delta_final_weighted: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub zeta: Ratio<u64>,
    /// Δ(W⁰)·|X(1)|
    pub iteration_bound: u64,
    /// Δ(W⁰) ≤ 2ζ(f)
    pub initial_delta_holds: bool,
    /// Number of squares where f and f₀ differ.
    pub dist: Option<usize>,
    pub dist_relative: Option<f64>,
    /// 4(1+|A|+|B|)ζ(f)
    pub completeness_bound: f64,
    pub completeness_holds: Option<bool>,
    #[serde(skip)]
    pub output: Option<BitVector>,
    #[serde(skip)]
    pub final_views: LocalViewAssignment,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeDispute {
    pub edge: u32,
    pub side: Side,
    /// |R ∩ E∥(e)|
    pub parallel: usize,
    /// dispute edges of the other side at the two endpoints
    pub at_u: usize,
    pub at_v: usize,
    pub required: usize,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexAgreement {
    pub vertex: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DisputeDiagnostics {
    pub edges: Vec<EdgeDispute>,
    pub all_edges_hold: bool,
    /// Per-vertex agreement inequality; present when κ₀ is supplied.
    pub vertices: Vec<VertexAgreement>,
    pub all_vertices_hold: Option<bool>,
    /// The vertex inequality follows from termination only when |A| = |B|.
    pub vertex_inequality_asserted: bool,
}

struct Candidate {
    word: u64,
    rows: Vec<u64>,
    cols: Vec<u64>,
}

pub struct Decoder<'a> {
    inst: &'a SquareCodeInstance,
    /// Tensor codewords in lexicographic order (coordinate 0 most significant).
    cands: Vec<Candidate>,
}

fn lex_key(word: u64, len: usize) -> u64 {
    word.reverse_bits() >> (64 - len)
}

impl<'a> Decoder<'a> {
    pub fn new(inst: &'a SquareCodeInstance) -> Result<Self, DecoderError> {
        let local = inst.local();
        let k = local.code.dim();
        if k > MAX_LOCAL_DIM {
            return Err(DecoderError::TensorDimCapExceeded(k));
        }
        let cells = local.na * local.nb;
        let mut words = local.code.codewords_u64().expect("local code within enumeration caps");
        words.sort_unstable_by_key(|&w| lex_key(w, cells));
        let cands = words
            .into_iter()
            .map(|word| Candidate {
                word,
                rows: (0..local.na).map(|i| local.row(word, i)).collect(),
                cols: (0..local.nb).map(|j| local.col(word, j)).collect(),
            })
            .collect();
        Ok(Self { inst, cands })
    }

    pub fn instance(&self) -> &SquareCodeInstance {
        self.inst
    }

    fn check_len(&self, f: &BitVector) -> Result<(), DecoderError> {
        if f.len() != self.inst.len() {
            return Err(DecoderError::WordLength { expected: self.inst.len(), found: f.len() });
        }
        Ok(())
    }

    fn edge_disputed(&self, views: &[u64], e: u32) -> bool {
        let local = self.inst.local();
        let ed = self.inst.complex().edge(e);
        let (wu, wv) = (views[ed.u as usize], views[ed.v as usize]);
        match ed.side {
            Side::A => local.row(wu, ed.pos_u as usize) != local.row(wv, ed.pos_v as usize),
            Side::B => local.col(wu, ed.pos_u as usize) != local.col(wv, ed.pos_v as usize),
        }
    }

    pub fn assignment(&self, views: Vec<u64>) -> LocalViewAssignment {
        let cx = self.inst.complex();
        let disputes: Vec<bool> = (0..cx.num_edges() as u32).map(|e| self.edge_disputed(&views, e)).collect();
        let num_a_edges = cx.num_a_edges();
        let a_disputes = disputes[..num_a_edges].iter().filter(|&&d| d).count();
        let dispute_count = disputes.iter().filter(|&&d| d).count();
        LocalViewAssignment { views, disputes, dispute_count, a_disputes, num_a_edges }
    }

    /// Nearest tensor codeword to every local view, ties to the
    /// lexicographically smallest.
    pub fn init_views(&self, f: &BitVector) -> Result<LocalViewAssignment, DecoderError> {
        self.check_len(f)?;
        let views = (0..self.inst.complex().num_vertices() as u32)
            .map(|g| {
                let grid = self.inst.local_grid(f, g);
                let mut best = (u32::MAX, 0u64);
                for c in &self.cands {
                    let d = (c.word ^ grid).count_ones();
                    if d < best.0 {
                        best = (d, c.word);
                    }
                }
                best.1
            })
            .collect();
        Ok(self.assignment(views))
    }

    /// Rows and columns the neighbours of `g` hold on the shared edges.
    fn neighbour_lines(&self, views: &[u64], g: u32) -> (Vec<u64>, Vec<u64>) {
        let cx = self.inst.complex();
        let local = self.inst.local();
        let rows = (0..local.na)
            .map(|i| local.row(views[cx.left_neighbor(g, i) as usize], cx.a_inverse_pos(i)))
            .collect();
        let cols = (0..local.nb)
            .map(|j| local.col(views[cx.right_neighbor(g, j) as usize], cx.b_inverse_pos(j)))
            .collect();
        (rows, cols)
    }

    fn local_count(c: &Candidate, rows: &[u64], cols: &[u64]) -> usize {
        c.rows.iter().zip(rows).filter(|(a, b)| a != b).count() + c.cols.iter().zip(cols).filter(|(a, b)| a != b).count()
    }

    /// Current local dispute count at `g` and the best replacement.
    fn best_at(&self, views: &[u64], g: u32) -> (usize, usize, u64) {
        let (rows, cols) = self.neighbour_lines(views, g);
        let cur = views[g as usize];
        let local = self.inst.local();
        let now = (0..local.na).filter(|&i| local.row(cur, i) != rows[i]).count()
            + (0..local.nb).filter(|&j| local.col(cur, j) != cols[j]).count();
        let mut best = (usize::MAX, 0u64);
        for c in &self.cands {
            let k = Self::local_count(c, &rows, &cols);
            if k < best.0 {
                best = (k, c.word);
            }
        }
        (now, best.0, best.1)
    }

    fn commit(&self, w: &mut LocalViewAssignment, g: u32, word: u64) {
        w.views[g as usize] = word;
        let cx = self.inst.complex();
        let local = self.inst.local();
        let incident = (0..local.na)
            .map(|i| cx.a_edge_at(g, i))
            .chain((0..local.nb).map(|j| cx.b_edge_at(g, j)));
        for e in incident {
            let now = self.edge_disputed(&w.views, e);
            let was = w.disputes[e as usize];
            if now != was {
                w.disputes[e as usize] = now;
                let is_a = (e as usize) < w.num_a_edges;
                if now {
                    w.dispute_count += 1;
                    w.a_disputes += is_a as usize;
                } else {
                    w.dispute_count -= 1;
                    w.a_disputes -= is_a as usize;
                }
            }
        }
    }

    /// First vertex, in index order, with a strictly improving replacement;
    /// commits its best replacement.
    pub fn step(&self, w: &mut LocalViewAssignment) -> Option<StepRecord> {
        for g in 0..self.inst.complex().num_vertices() as u32 {
            let (now, best, word) = self.best_at(&w.views, g);
            if best < now {
                let old = w.views[g as usize];
                self.commit(w, g, word);
                return Some(StepRecord { vertex: g, old, new: word, local_before: now, local_after: best });
            }
        }
        None
    }

    fn neighbours(&self, g: u32) -> impl Iterator<Item = u32> + '_ {
        let cx = self.inst.complex();
        (0..cx.a_size())
            .map(move |i| cx.left_neighbor(g, i))
            .chain((0..cx.b_size()).map(move |j| cx.right_neighbor(g, j)))
    }

    /// Runs `step` to a fixed point from the given state; returns the number
    /// of committed steps. Same moves as repeated `step`, without rescanning.
    pub fn improve(&self, w: &mut LocalViewAssignment) -> usize {
        let n = self.inst.complex().num_vertices() as u32;
        let mut open: BTreeSet<u32> = (0..n)
            .filter(|&g| {
                let (now, best, _) = self.best_at(&w.views, g);
                best < now
            })
            .collect();
        let mut steps = 0;
        while let Some(g) = open.pop_first() {
            let (now, best, word) = self.best_at(&w.views, g);
            debug_assert!(best < now);
            let before = w.dispute_count;
            self.commit(w, g, word);
            debug_assert_eq!(before - w.dispute_count, now - best);
            steps += 1;
            for h in std::iter::once(g).chain(self.neighbours(g)) {
                let (now, best, _) = self.best_at(&w.views, h);
                if best < now {
                    open.insert(h);
                } else {
                    open.remove(&h);
                }
            }
        }
        steps
    }

    /// Reads f₀ off the views at the smallest vertex of each square,
    /// checking that all four corners agree.
    pub fn extract(&self, w: &LocalViewAssignment) -> Option<BitVector> {
        let cx = self.inst.complex();
        let nb = cx.b_size();
        let mut f0 = BitVector::zeros(cx.num_squares());
        for s in 0..cx.num_squares() as u32 {
            let corners = cx.corners(s);
            let bit = |c: &crate::complex::Corner| (w.views[c.vertex as usize] >> (c.apos as usize * nb + c.bpos as usize)) & 1;
            let first = corners.iter().min_by_key(|c| c.vertex).unwrap();
            let v = bit(first);
            if corners.iter().any(|c| bit(c) != v) {
                return None;
            }
            f0.set(s as usize, v == 1);
        }
        Some(f0)
    }

    pub fn run(&self, f: &BitVector) -> Result<DecodeOutcome, DecoderError> {
        let zeta = self.inst.zeta(f).map_err(|_| DecoderError::WordLength { expected: self.inst.len(), found: f.len() })?;
        let mut w = self.init_views(f)?;
        let delta_initial = w.delta();
        let iteration_bound = w.dispute_count as u64;
        let iterations = self.improve(&mut w);
        let delta_final = w.delta();
        let cx = self.inst.complex();
        let completeness_bound = 4.0 * (1 + cx.a_size() + cx.b_size()) as f64 * (*zeta.numer() as f64 / *zeta.denom() as f64);
        let (verdict, output) = if w.dispute_count == 0 {
            let f0 = self.extract(&w).expect("zero disagreement forces consistent corners");
            (Verdict::Codeword, Some(f0))
        } else {
            (Verdict::Far, None)
        };
        let dist = output.as_ref().map(|f0| f0.distance(f));
        let dist_relative = dist.map(|d| d as f64 / self.inst.len() as f64);
        let completeness_holds = dist_relative.map(|d| d <= completeness_bound + 1e-12);
        Ok(DecodeOutcome {
            verdict,
            iterations,
            delta_initial,
            delta_final,
            delta_final_weighted: w.delta_weighted(),
            zeta,
            iteration_bound,
            initial_delta_holds: delta_initial <= zeta * 2,
            dist,
            dist_relative,
            completeness_bound,
            completeness_holds,
            output,
            final_views: w,
        })
    }

    /// Local counts around every dispute edge and, given κ₀, the per-vertex
    /// agreement inequality.
    pub fn dispute_diagnostics(&self, w: &LocalViewAssignment, kappa0: Option<f64>) -> DisputeDiagnostics {
        let cx = self.inst.complex();
        let (na, nb) = (cx.a_size(), cx.b_size());
        let da = self.inst.code_a().distance().map(|m| m.weight).unwrap_or(0);
        let db = self.inst.code_b().distance().map(|m| m.weight).unwrap_or(0);
        let r = |e: u32| w.disputes[e as usize] as usize;
        let mut edges = Vec::new();
        for e in w.dispute_edges() {
            let ed = cx.edge(e);
            let (parallel, at_u, at_v, required) = match ed.side {
                Side::A => {
                    let i = ed.pos_u as usize;
                    let par = (0..nb).map(|j| r(cx.a_edge_at(cx.right_neighbor(ed.u, j), i))).sum();
                    let bu = (0..nb).map(|j| r(cx.b_edge_at(ed.u, j))).sum();
                    let bv = (0..nb).map(|j| r(cx.b_edge_at(ed.v, j))).sum();
                    (par, bu, bv, db)
                }
                Side::B => {
                    let j = ed.pos_u as usize;
                    let par = (0..na).map(|i| r(cx.b_edge_at(cx.left_neighbor(ed.u, i), j))).sum();
                    let au = (0..na).map(|i| r(cx.a_edge_at(ed.u, i))).sum();
                    let av = (0..na).map(|i| r(cx.a_edge_at(ed.v, i))).sum();
                    (par, au, av, da)
                }
            };
            let holds = parallel + at_u + at_v >= required;
            edges.push(EdgeDispute { edge: e, side: ed.side, parallel, at_u, at_v, required, holds });
        }
        let all_edges_hold = edges.iter().all(|e| e.holds);
        let mut vertices = Vec::new();
        if let Some(k0) = kappa0 {
            for g in 0..cx.num_vertices() as u32 {
                let pa = (0..na).map(|i| r(cx.a_edge_at(g, i))).sum::<usize>() as f64 / na as f64;
                let pb = (0..nb).map(|j| r(cx.b_edge_at(g, j))).sum::<usize>() as f64 / nb as f64;
                let mut hits = 0usize;
                for i in 0..na {
                    let ag = cx.left_neighbor(g, i);
                    for j in 0..nb {
                        let gb = cx.right_neighbor(g, j);
                        if r(cx.b_edge_at(ag, j)) == 1 || r(cx.a_edge_at(gb, i)) == 1 {
                            hits += 1;
                        }
                    }
                }
                let lhs = pa + pb;
                let rhs = hits as f64 / (na * nb) as f64 / k0;
                vertices.push(VertexAgreement { vertex: g, lhs, rhs, holds: lhs <= rhs + 1e-12 });
            }
        }
        let all_vertices_hold = kappa0.map(|_| vertices.iter().all(|v| v.holds));
        DisputeDiagnostics { edges, all_edges_hold, vertices, all_vertices_hold, vertex_inequality_asserted: na == nb }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::LinearCode;
    use crate::complex::SquareComplex;
    use crate::groups::{GeneratorSet, GroupTable};
    use crate::ltc::AssemblyMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z8_instance() -> SquareCodeInstance {
        let g = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&g, [1, 7]).unwrap();
        let b = GeneratorSet::new(&g, [3, 5]).unwrap();
        let cx = SquareComplex::build(&g, &a, &b).unwrap();
        let rep = LinearCode::repetition(2);
        SquareCodeInstance::assemble(&cx, &rep, &rep, AssemblyMode::Edges).unwrap()
    }

    #[test]
    fn shared_lines_match_square_ids() {
        let inst = z8_instance();
        let cx = inst.complex();
        for g in 0..8u32 {
            for i in 0..2 {
                let v = cx.left_neighbor(g, i);
                for j in 0..2 {
                    assert_eq!(cx.link_cell(g, i, j), cx.link_cell(v, cx.a_inverse_pos(i), j));
                }
            }
            for j in 0..2 {
                let v = cx.right_neighbor(g, j);
                for i in 0..2 {
                    assert_eq!(cx.link_cell(g, i, j), cx.link_cell(v, i, cx.b_inverse_pos(j)));
                }
            }
        }
    }

    #[test]
    fn single_square_error() {
        let inst = z8_instance();
        let dec = Decoder::new(&inst).unwrap();
        let f = BitVector::unit(8, 0);
        let w0 = dec.init_views(&f).unwrap();
        assert!(w0.views.iter().all(|&v| v == 0));
        assert_eq!(w0.delta(), Ratio::from_integer(0));
        let out = dec.run(&f).unwrap();
        assert_eq!(out.verdict, Verdict::Codeword);
        assert_eq!(out.output, Some(BitVector::zeros(8)));
        assert_eq!(out.dist, Some(1));
        assert!((out.completeness_bound - 10.0).abs() < 1e-12);
        assert_eq!(out.completeness_holds, Some(true));
    }

    #[test]
    fn codeword_decodes_to_itself() {
        let inst = z8_instance();
        let dec = Decoder::new(&inst).unwrap();
        let out = dec.run(&BitVector::ones(8)).unwrap();
        assert_eq!((out.verdict, out.iterations), (Verdict::Codeword, 0));
        assert_eq!(out.output, Some(BitVector::ones(8)));
    }

    #[test]
    fn one_all_ones_vertex() {
        let inst = z8_instance();
        let dec = Decoder::new(&inst).unwrap();
        let mut views = vec![0u64; 8];
        views[3] = 0b1111;
        let mut w = dec.assignment(views);
        // 4 incident edges out of 16
        assert_eq!(w.delta(), Ratio::new(4, 16));
        let diag = dec.dispute_diagnostics(&w, Some(0.5));
        assert_eq!(diag.edges.len(), 4);
        assert!(diag.all_edges_hold);
        assert!(diag.edges.iter().all(|e| e.required == 2));
        let rec = dec.step(&mut w).unwrap();
        assert_eq!((rec.vertex, rec.local_before, rec.local_after), (3, 4, 0));
        assert_eq!(w.delta(), Ratio::from_integer(0));
        assert!(dec.step(&mut w).is_none());
    }

    #[test]
    fn improve_matches_naive_steps() {
        let inst = z8_instance();
        let dec = Decoder::new(&inst).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let views: Vec<u64> = (0..8).map(|_| if rng.random_bool(0.5) { 0b1111 } else { 0 }).collect();
            let mut a = dec.assignment(views.clone());
            let mut b = dec.assignment(views);
            let mut naive = 0;
            while dec.step(&mut a).is_some() {
                naive += 1;
            }
            assert_eq!(dec.improve(&mut b), naive);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn weighted_delta_equals_uniform_for_equal_sides() {
        let inst = z8_instance();
        let dec = Decoder::new(&inst).unwrap();
        let w = dec.assignment(vec![0b1111, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(w.delta(), w.delta_weighted());
    }
}
