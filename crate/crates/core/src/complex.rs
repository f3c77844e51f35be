//! The left-right Cayley complex Cay²(A, G, B).
//!
//! Vertices are group elements. An A-edge joins g and ag, a B-edge joins g
//! and gb, and the square [a, g, b] has vertices g, ag, gb, agb. Squares are
//! stored by their canonical triple, the lexicographic minimum of
//! (a, g, b), (a⁻¹, ag, b), (a⁻¹, agb, b⁻¹), (a, gb, b⁻¹).

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::generators::{tnc_by_orders, TncCertificate};
use crate::groups::{GeneratorSet, GroupError, GroupTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("no-conjugacy condition fails at {count} triples, first (a, g, b) = {first:?}")]
    TncViolation { count: usize, first: (u32, u32, u32) },
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("structural invariant violated: {0}")]
    Invariant(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub side: Side,
    /// min(c, c⁻¹) for the generator c joining the endpoints.
    pub label: u32,
    pub u: u32,
    pub v: u32,
    /// Row (A-edge) or column (B-edge) of the edge in the link grid of `u`.
    pub pos_u: u16,
    /// Same for `v`.
    pub pos_v: u16,
}

/// One corner of a square: the vertex and the square's cell in its grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Corner {
    pub vertex: u32,
    pub apos: u16,
    pub bpos: u16,
}

/// All violating triples (a, g, b) with g⁻¹ag = b.
pub fn check_tnc(group: &GroupTable, a: &GeneratorSet, b: &GeneratorSet) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for g in 0..group.order() as u32 {
        for &x in a.elements() {
            let c = group.conjugate(x, g);
            if b.contains(c) {
                out.push((x, g, c));
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct SquareComplex {
    group: GroupTable,
    a: GeneratorSet,
    b: GeneratorSet,
    n: usize,
    na: usize,
    nb: usize,
    /// left[g·|A| + i] = a_i g
    left: Vec<u32>,
    /// right[g·|B| + j] = g b_j
    right: Vec<u32>,
    a_inv: Vec<u16>,
    b_inv: Vec<u16>,
    /// Canonical (a-pos, g, b-pos) triples, sorted.
    squares: Vec<(u16, u32, u16)>,
    /// link[g·|A||B| + i·|B| + j] = id of [a_i, g, b_j]
    link: Vec<u32>,
    corners: Vec<[Corner; 4]>,
    edges: Vec<Edge>,
    a_edge: Vec<u32>,
    b_edge: Vec<u32>,
    tnc: TncCertificate,
    warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LabelClass {
    pub side: Side,
    pub label: u32,
    pub involution: bool,
    pub size: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexSummary {
    pub group: String,
    pub group_order: usize,
    pub a: Vec<u32>,
    pub b: Vec<u32>,
    pub vertices: usize,
    pub a_edges: usize,
    pub b_edges: usize,
    pub edges: usize,
    pub squares: usize,
    pub label_classes: Vec<LabelClass>,
    pub tnc: TncCertificate,
    pub warnings: Vec<String>,
}

impl SquareComplex {
    pub fn build(group: &GroupTable, a: &GeneratorSet, b: &GeneratorSet) -> Result<Self, ComplexError> {
        let tnc = tnc_by_orders(group, a, b);
        if tnc == TncCertificate::Deferred {
            let v = check_tnc(group, a, b);
            if let Some(&first) = v.first() {
                return Err(ComplexError::TncViolation { count: v.len(), first });
            }
        }
        let n = group.order();
        let (na, nb) = (a.len(), b.len());
        if na == 0 || nb == 0 || na > u16::MAX as usize || nb > u16::MAX as usize {
            return Err(ComplexError::Invariant("generator sets must be non-empty".into()));
        }
        let mut warnings = Vec::new();
        if !group.generates(a.elements()) {
            warnings.push("A does not generate the group".to_string());
        }
        if !group.generates(b.elements()) {
            warnings.push("B does not generate the group".to_string());
        }
        let mut left = Vec::with_capacity(n * na);
        let mut right = Vec::with_capacity(n * nb);
        for g in 0..n as u32 {
            left.extend(a.elements().iter().map(|&x| group.mul(x, g)));
            right.extend(b.elements().iter().map(|&y| group.mul(g, y)));
        }
        let a_inv: Vec<u16> = a.elements().iter().map(|&x| a.position(group.inv(x)).unwrap() as u16).collect();
        let b_inv: Vec<u16> = b.elements().iter().map(|&y| b.position(group.inv(y)).unwrap() as u16).collect();

        let mut cx = SquareComplex {
            group: group.clone(),
            a: a.clone(),
            b: b.clone(),
            n,
            na,
            nb,
            left,
            right,
            a_inv,
            b_inv,
            squares: Vec::new(),
            link: Vec::new(),
            corners: Vec::new(),
            edges: Vec::new(),
            a_edge: Vec::new(),
            b_edge: Vec::new(),
            tnc,
            warnings,
        };
        cx.build_squares()?;
        cx.build_edges();
        cx.assert_invariants()?;
        Ok(cx)
    }

    /// The four members of the class of (a_i, g, b_j), as position triples.
    fn class_of(&self, i: usize, g: u32, j: usize) -> [(u16, u32, u16); 4] {
        let ag = self.left[g as usize * self.na + i];
        let gb = self.right[g as usize * self.nb + j];
        let agb = self.right[ag as usize * self.nb + j];
        let (i, j) = (i as u16, j as u16);
        let (ii, ji) = (self.a_inv[i as usize], self.b_inv[j as usize]);
        [(i, g, j), (ii, ag, j), (ii, agb, ji), (i, gb, ji)]
    }

    fn build_squares(&mut self) -> Result<(), ComplexError> {
        let (n, na, nb) = (self.n, self.na, self.nb);
        // positions are order-preserving, so comparing positions compares element indices
        let mut reps = Vec::with_capacity(n * na * nb / 4 + 1);
        for g in 0..n as u32 {
            for i in 0..na {
                for j in 0..nb {
                    let cls = self.class_of(i, g, j);
                    let rep = *cls.iter().min().unwrap();
                    if rep == cls[0] {
                        reps.push(rep);
                    }
                }
            }
        }
        reps.sort_unstable();
        reps.dedup();
        self.squares = reps;
        let mut link = vec![u32::MAX; n * na * nb];
        let mut corners = Vec::with_capacity(self.squares.len());
        for (id, &(i, g, j)) in self.squares.iter().enumerate() {
            let cls = self.class_of(i as usize, g, j as usize);
            let mut cs = [Corner { vertex: 0, apos: 0, bpos: 0 }; 4];
            for (k, &(ci, cg, cj)) in cls.iter().enumerate() {
                let slot = &mut link[cg as usize * na * nb + ci as usize * nb + cj as usize];
                if *slot != u32::MAX {
                    return Err(ComplexError::Invariant(format!(
                        "square class of ({i},{g},{j}) has fewer than 4 members"
                    )));
                }
                *slot = id as u32;
                cs[k] = Corner { vertex: cg, apos: ci, bpos: cj };
            }
            corners.push(cs);
        }
        if link.iter().any(|&s| s == u32::MAX) {
            return Err(ComplexError::Invariant("a link cell has no square".into()));
        }
        self.link = link;
        self.corners = corners;
        Ok(())
    }

    fn build_edges(&mut self) {
        let (n, na, nb) = (self.n, self.na, self.nb);
        let mut keys = Vec::with_capacity(n * (na + nb) / 2);
        for g in 0..n as u32 {
            for i in 0..na {
                let x = self.a.elements()[i];
                let label = x.min(self.group.inv(x));
                let h = self.left[g as usize * na + i];
                keys.push((Side::A, label, g.min(h), g.max(h)));
            }
            for j in 0..nb {
                let y = self.b.elements()[j];
                let label = y.min(self.group.inv(y));
                let h = self.right[g as usize * nb + j];
                keys.push((Side::B, label, g.min(h), g.max(h)));
            }
        }
        keys.sort_unstable();
        keys.dedup();
        let mut a_edge = vec![0u32; n * na];
        let mut b_edge = vec![0u32; n * nb];
        let mut edges: Vec<Edge> = keys
            .iter()
            .map(|&(side, label, u, v)| Edge { side, label, u, v, pos_u: u16::MAX, pos_v: u16::MAX })
            .collect();
        for g in 0..n as u32 {
            for i in 0..na {
                let x = self.a.elements()[i];
                let h = self.left[g as usize * na + i];
                let key = (Side::A, x.min(self.group.inv(x)), g.min(h), g.max(h));
                let id = keys.binary_search(&key).unwrap();
                a_edge[g as usize * na + i] = id as u32;
                let e = &mut edges[id];
                if e.u == g {
                    e.pos_u = i as u16;
                } else {
                    e.pos_v = i as u16;
                }
            }
            for j in 0..nb {
                let y = self.b.elements()[j];
                let h = self.right[g as usize * nb + j];
                let key = (Side::B, y.min(self.group.inv(y)), g.min(h), g.max(h));
                let id = keys.binary_search(&key).unwrap();
                b_edge[g as usize * nb + j] = id as u32;
                let e = &mut edges[id];
                if e.u == g {
                    e.pos_u = j as u16;
                } else {
                    e.pos_v = j as u16;
                }
            }
        }
        self.edges = edges;
        self.a_edge = a_edge;
        self.b_edge = b_edge;
    }

    fn assert_invariants(&self) -> Result<(), ComplexError> {
        let fail = |m: String| Err(ComplexError::Invariant(m));
        let (n, na, nb) = (self.n, self.na, self.nb);
        if 2 * self.edges.len() != (na + nb) * n {
            return fail(format!("edge count {} differs from (|A|+|B|)|G|/2", self.edges.len()));
        }
        if 4 * self.squares.len() != na * nb * n {
            return fail(format!("square count {} differs from |A||B||G|/4", self.squares.len()));
        }
        for g in 0..n as u32 {
            let mut nbrs: Vec<u32> = self.left[g as usize * na..(g as usize + 1) * na].to_vec();
            nbrs.extend_from_slice(&self.right[g as usize * nb..(g as usize + 1) * nb]);
            nbrs.sort_unstable();
            nbrs.dedup();
            if nbrs.len() != na + nb {
                return fail(format!("vertex {g} has {} distinct neighbours", nbrs.len()));
            }
            let mut cell: Vec<u32> = self.link[g as usize * na * nb..(g as usize + 1) * na * nb].to_vec();
            cell.sort_unstable();
            cell.dedup();
            if cell.len() != na * nb {
                return fail(format!("link of vertex {g} repeats a square"));
            }
        }
        for (id, cs) in self.corners.iter().enumerate() {
            let mut vs: Vec<u32> = cs.iter().map(|c| c.vertex).collect();
            vs.sort_unstable();
            vs.dedup();
            if vs.len() != 4 {
                return fail(format!("square {id} has {} distinct vertices", vs.len()));
            }
        }
        for e in &self.edges {
            if e.pos_u == u16::MAX || e.pos_v == u16::MAX {
                return fail(format!("edge {e:?} is missing an endpoint position"));
            }
        }
        for cls in self.label_classes() {
            let expect = if cls.involution { n / 2 } else { n };
            if cls.size != expect {
                return fail(format!("label class {cls:?} should have {expect} edges"));
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &GroupTable {
        &self.group
    }

    pub fn a(&self) -> &GeneratorSet {
        &self.a
    }

    pub fn b(&self) -> &GeneratorSet {
        &self.b
    }

    #[inline]
    pub fn num_vertices(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn a_size(&self) -> usize {
        self.na
    }

    #[inline]
    pub fn b_size(&self) -> usize {
        self.nb
    }

    #[inline]
    pub fn num_squares(&self) -> usize {
        self.squares.len()
    }

    #[inline]
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn tnc_certificate(&self) -> TncCertificate {
        self.tnc
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Canonical triple of a square as group elements (a, g, b).
    pub fn square(&self, id: u32) -> (u32, u32, u32) {
        let (i, g, j) = self.squares[id as usize];
        (self.a.elements()[i as usize], g, self.b.elements()[j as usize])
    }

    /// Id of [a, g, b] for a ∈ A, b ∈ B given as elements.
    pub fn square_id(&self, a: u32, g: u32, b: u32) -> Option<u32> {
        let i = self.a.position(a)?;
        let j = self.b.position(b)?;
        Some(self.link_cell(g, i, j))
    }

    /// Square at cell (i, j) of the link grid of `g`.
    #[inline]
    pub fn link_cell(&self, g: u32, i: usize, j: usize) -> u32 {
        self.link[g as usize * self.na * self.nb + i * self.nb + j]
    }

    /// Link of `g` in row-major order: `|A|·|B|` square ids.
    #[inline]
    pub fn link_row_major(&self, g: u32) -> &[u32] {
        let s = self.na * self.nb;
        &self.link[g as usize * s..(g as usize + 1) * s]
    }

    /// The |A| × |B| grid of squares at `g`.
    pub fn vertex_link(&self, g: u32) -> Vec<Vec<u32>> {
        self.link_row_major(g).chunks(self.nb).map(|r| r.to_vec()).collect()
    }

    #[inline]
    pub fn corners(&self, square: u32) -> &[Corner; 4] {
        &self.corners[square as usize]
    }

    #[inline]
    pub fn edge(&self, e: u32) -> &Edge {
        &self.edges[e as usize]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Edge {g, a_i g}.
    #[inline]
    pub fn a_edge_at(&self, g: u32, i: usize) -> u32 {
        self.a_edge[g as usize * self.na + i]
    }

    /// Edge {g, g b_j}.
    #[inline]
    pub fn b_edge_at(&self, g: u32, j: usize) -> u32 {
        self.b_edge[g as usize * self.nb + j]
    }

    #[inline]
    pub fn left_neighbor(&self, g: u32, i: usize) -> u32 {
        self.left[g as usize * self.na + i]
    }

    #[inline]
    pub fn right_neighbor(&self, g: u32, j: usize) -> u32 {
        self.right[g as usize * self.nb + j]
    }

    #[inline]
    pub fn a_inverse_pos(&self, i: usize) -> usize {
        self.a_inv[i] as usize
    }

    #[inline]
    pub fn b_inverse_pos(&self, j: usize) -> usize {
        self.b_inv[j] as usize
    }

    /// Squares containing edge `e`, in link order at its endpoint `u`:
    /// the row of an A-edge (indexed by B) or the column of a B-edge (indexed by A).
    pub fn edge_squares(&self, e: u32) -> Vec<u32> {
        let ed = &self.edges[e as usize];
        match ed.side {
            Side::A => (0..self.nb).map(|j| self.link_cell(ed.u, ed.pos_u as usize, j)).collect(),
            Side::B => (0..self.na).map(|i| self.link_cell(ed.u, i, ed.pos_u as usize)).collect(),
        }
    }

    /// Edge opposite to `e` in square `s` (same label, disjoint endpoints).
    pub fn opposite_edge(&self, e: u32, s: u32) -> u32 {
        let ed = &self.edges[e as usize];
        let cs = &self.corners[s as usize];
        for c in cs {
            if c.vertex == ed.u || c.vertex == ed.v {
                continue;
            }
            // the corner's edge of the same side belongs to the opposite edge
            return match ed.side {
                Side::A => self.a_edge_at(c.vertex, c.apos as usize),
                Side::B => self.b_edge_at(c.vertex, c.bpos as usize),
            };
        }
        unreachable!("a square has two vertices off any of its edges")
    }

    /// Parallel walk from `e`: pick a uniform square through `e`, move to the
    /// opposite edge. Probabilities are exact and summed over coinciding targets.
    pub fn parallel_neighbors(&self, e: u32) -> Vec<(u32, Ratio<u64>)> {
        let sq = self.edge_squares(e);
        let k = sq.len() as u64;
        let mut acc: BTreeMap<u32, u64> = BTreeMap::new();
        for s in sq {
            *acc.entry(self.opposite_edge(e, s)).or_default() += 1;
        }
        acc.into_iter().map(|(f, c)| (f, Ratio::new(c, k))).collect()
    }

    pub fn label_classes(&self) -> Vec<LabelClass> {
        let mut out: Vec<LabelClass> = Vec::new();
        for e in &self.edges {
            match out.last_mut() {
                Some(c) if c.side == e.side && c.label == e.label => c.size += 1,
                _ => out.push(LabelClass {
                    side: e.side,
                    label: e.label,
                    involution: self.group.inv(e.label) == e.label,
                    size: 1,
                }),
            }
        }
        out
    }

    /// Edge ids of one label class.
    pub fn class_edges(&self, side: Side, label: u32) -> std::ops::Range<u32> {
        let lo = self.edges.partition_point(|e| (e.side, e.label) < (side, label));
        let hi = self.edges.partition_point(|e| (e.side, e.label) <= (side, label));
        lo as u32..hi as u32
    }

    pub fn num_a_edges(&self) -> usize {
        self.edges.partition_point(|e| e.side == Side::A)
    }

    pub fn summary(&self) -> ComplexSummary {
        let na_e = self.num_a_edges();
        ComplexSummary {
            group: self.group.name().to_string(),
            group_order: self.n,
            a: self.a.elements().to_vec(),
            b: self.b.elements().to_vec(),
            vertices: self.n,
            a_edges: na_e,
            b_edges: self.edges.len() - na_e,
            edges: self.edges.len(),
            squares: self.squares.len(),
            label_classes: self.label_classes(),
            tnc: self.tnc,
            warnings: self.warnings.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z8() -> SquareComplex {
        let g = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&g, [1, 7]).unwrap();
        let b = GeneratorSet::new(&g, [3, 5]).unwrap();
        SquareComplex::build(&g, &a, &b).unwrap()
    }

    #[test]
    fn z8_counts() {
        let cx = z8();
        assert_eq!(cx.num_vertices(), 8);
        assert_eq!(cx.num_edges(), 16);
        assert_eq!(cx.num_squares(), 8);
        assert_eq!(cx.tnc_certificate(), TncCertificate::Deferred);
    }

    #[test]
    fn z8_square_class() {
        let cx = z8();
        let id = cx.square_id(1, 0, 3).unwrap();
        assert_eq!(cx.square(id), (1, 0, 3));
        // (a⁻¹, ag, b) = (7, 1, 3), (a⁻¹, agb, b⁻¹) = (7, 4, 5), (a, gb, b⁻¹) = (1, 3, 5)
        for (a, g, b) in [(7, 1, 3), (7, 4, 5), (1, 3, 5)] {
            assert_eq!(cx.square_id(a, g, b), Some(id));
        }
    }

    #[test]
    fn tnc_violation_is_rejected() {
        let g = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&g, [1, 7]).unwrap();
        let b = GeneratorSet::new(&g, [1, 7, 3, 5]).unwrap();
        assert_eq!(check_tnc(&g, &a, &b).len(), 16);
        assert!(matches!(
            SquareComplex::build(&g, &a, &b),
            Err(ComplexError::TncViolation { first: (1, 0, 1), .. })
        ));
    }

    #[test]
    fn z8_link_and_parallel_walk() {
        let cx = z8();
        let grid = cx.vertex_link(0);
        assert_eq!(grid.len(), 2);
        let mut flat: Vec<u32> = grid.concat();
        flat.sort();
        flat.dedup();
        assert_eq!(flat.len(), 4);
        let e = (0..cx.num_edges() as u32)
            .find(|&e| {
                let ed = cx.edge(e);
                ed.side == Side::A && (ed.u, ed.v) == (0, 1)
            })
            .unwrap();
        let nb = cx.parallel_neighbors(e);
        let targets: Vec<(u32, u32)> = nb.iter().map(|&(f, _)| (cx.edge(f).u, cx.edge(f).v)).collect();
        assert_eq!(targets, vec![(3, 4), (5, 6)]);
        assert!(nb.iter().all(|&(_, p)| p == Ratio::new(1, 2)));
    }

    #[test]
    fn re_rooting_shares_a_row() {
        // [a,g,b] = [a⁻¹,ag,b]: row a at g equals row a⁻¹ at ag
        let cx = z8();
        for g in 0..8 {
            for i in 0..2 {
                let ag = cx.left_neighbor(g, i);
                let ii = cx.a_inverse_pos(i);
                for j in 0..2 {
                    assert_eq!(cx.link_cell(g, i, j), cx.link_cell(ag, ii, j));
                }
            }
        }
    }

    #[test]
    fn dihedral_with_involutions() {
        // in D_n every reflection is an involution, so label classes have |G|/2 edges
        let g = GroupTable::dihedral(7).unwrap();
        let a = GeneratorSet::new(&g, [1, 6]).unwrap();
        let b = GeneratorSet::new(&g, [7, 8]).unwrap();
        let cx = SquareComplex::build(&g, &a, &b).unwrap();
        let classes = cx.label_classes();
        assert!(classes.iter().any(|c| c.involution && c.size == 7));
        assert_eq!(cx.tnc_certificate(), TncCertificate::ByOrders);
    }

    proptest! {
        #[test]
        fn parallel_walk_is_symmetric(n in 5u32..24, seed in any::<u64>()) {
            let g = GroupTable::dihedral(n).unwrap();
            let Ok(pair) = crate::generators::search_pair(&g, 2, 2, seed, 50) else { return Ok(()) };
            let cx = SquareComplex::build(&g, &pair.a, &pair.b).unwrap();
            let mut total = Ratio::new(0u64, 1);
            for e in 0..cx.num_edges() as u32 {
                for (f, p) in cx.parallel_neighbors(e) {
                    prop_assert_ne!(f, e);
                    prop_assert_eq!(cx.edge(f).label, cx.edge(e).label);
                    prop_assert_eq!(cx.edge(f).side, cx.edge(e).side);
                    let back = cx.parallel_neighbors(f).into_iter().find(|&(h, _)| h == e).map(|x| x.1);
                    prop_assert_eq!(back, Some(p));
                    total += p;
                }
            }
            prop_assert_eq!(total, Ratio::from_integer(cx.num_edges() as u64));
            let link_total: usize = (0..cx.num_vertices() as u32).map(|v| cx.link_row_major(v).len()).sum();
            prop_assert_eq!(link_total, 4 * cx.num_squares());
        }
    }
}
