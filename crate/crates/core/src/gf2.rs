//! Dense linear algebra over GF(2).
//!
//! Vectors and matrix rows are packed 64 coordinates per `u64` word, with
//! coordinate `i` stored at bit `i % 64` of word `i / 64`. Elimination works
//! row-wise with word-level XOR and only touches the words at or after the
//! current pivot column.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Default largest code dimension for exhaustive minimum-weight search.
pub const DEFAULT_EXACT_DIM_CAP: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("exact enumeration requested for dimension {dim}, above the cap {cap}")]
    ExactCapExceeded { dim: usize, cap: usize },
    #[error("the code has dimension zero, so it has no nonzero codeword")]
    ZeroDimensional,
    #[error("malformed matrix text: {0}")]
    Parse(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

/// A vector in GF(2)^n.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; words_for(len)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in v.words.iter_mut() {
            *w = u64::MAX;
        }
        v.clear_tail();
        v
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(index, true);
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector from the low `len` bits of `word` (bit `i` is coordinate `i`).
    pub fn from_u64(word: u64, len: usize) -> Self {
        assert!(len <= 64);
        let mut v = Self::zeros(len);
        if len > 0 {
            v.words[0] = word;
            v.clear_tail();
        }
        v
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in ones {
            v.set(i, true);
        }
        v
    }

    /// Parses a string of `0`/`1` characters, coordinate 0 first.
    pub fn parse01(s: &str) -> Result<Self, Gf2Error> {
        let s = s.trim();
        let mut v = Self::zeros(s.len());
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(Gf2Error::Parse(format!("unexpected character {other:?}"))),
            }
        }
        Ok(v)
    }

    pub fn to_string01(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i & 63);
        if value {
            self.words[i >> 6] |= mask;
        } else {
            self.words[i >> 6] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i >> 6] ^= 1u64 << (i & 63);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    /// XOR restricted to words `from_word..`.
    #[inline]
    fn xor_assign_from(&mut self, other: &BitVector, from_word: usize) {
        for (a, b) in self.words[from_word..].iter_mut().zip(&other.words[from_word..]) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    #[inline]
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn distance(&self, other: &BitVector) -> usize {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over GF(2).
    #[inline]
    pub fn dot(&self, other: &BitVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let t = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(wi * 64 + t)
                }
            })
        })
    }

    /// Index of the first set coordinate at or after `from`.
    pub fn first_one_from(&self, from: usize) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        let mut wi = from >> 6;
        let mut w = self.words[wi] & (u64::MAX << (from & 63));
        loop {
            if w != 0 {
                let idx = wi * 64 + w.trailing_zeros() as usize;
                return (idx < self.len).then_some(idx);
            }
            wi += 1;
            if wi >= self.words.len() {
                return None;
            }
            w = self.words[wi];
        }
    }

    /// Coordinates selected by `indices`, in that order.
    pub fn gather(&self, indices: &[usize]) -> BitVector {
        let mut out = BitVector::zeros(indices.len());
        for (k, &i) in indices.iter().enumerate() {
            if self.get(i) {
                out.set(k, true);
            }
        }
        out
    }

    /// Low 64 coordinates packed into a word. Requires `len <= 64`.
    pub fn as_u64(&self) -> u64 {
        assert!(self.len <= 64);
        self.words.first().copied().unwrap_or(0)
    }

    /// Lexicographic comparison with coordinate 0 most significant.
    pub fn lex_cmp(&self, other: &BitVector) -> Ordering {
        for (a, b) in self.words.iter().zip(&other.words) {
            if a != b {
                return a.reverse_bits().cmp(&b.reverse_bits());
            }
        }
        self.len.cmp(&other.len)
    }

    fn clear_tail(&mut self) {
        let r = self.len & 63;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self.to_string01())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string01())
    }
}

/// A binary matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

/// Reduced row echelon form together with its rank and pivot columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub rank: usize,
    /// Row-equivalent matrix in reduced row echelon form; rows `rank..` are zero.
    pub rref: BitMatrix,
    /// Pivot column of row `i` for `i < rank`; strictly increasing.
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn empty(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Gf2Error::LengthMismatch {
                expected: cols,
                got: bad.len(),
            });
        }
        Ok(Self { cols, rows })
    }

    /// Builds from nested 0/1 integers; convenient in tests.
    pub fn from_u8_rows(rows: &[&[u8]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                BitVector::from_bools(&r.iter().map(|&x| x != 0).collect::<Vec<_>>())
            })
            .collect();
        Self { cols, rows }
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<BitVector> {
        self.rows
    }

    pub fn push_row(&mut self, row: BitVector) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        self.rows[r].get(c)
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        self.rows[r].set(c, value);
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for c in row.iter_ones() {
                t.rows[c].set(r, true);
            }
        }
        t
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v) {
                out.set(i, true);
            }
        }
        out
    }

    /// True when every row is orthogonal to `v`.
    pub fn annihilates(&self, v: &BitVector) -> bool {
        self.rows.iter().all(|row| !row.dot(v))
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols);
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        BitMatrix {
            cols: self.cols,
            rows,
        }
    }

    /// Forward elimination in place; returns pivot columns. Row `i < rank` has
    /// its leading one at `pivots[i]` and zeros before it.
    fn echelonize(&mut self) -> Vec<usize> {
        let nrows = self.rows.len();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == nrows {
                break;
            }
            let wi = col >> 6;
            let mask = 1u64 << (col & 63);
            let Some(p) = (rank..nrows).find(|&r| self.rows[r].words[wi] & mask != 0) else {
                continue;
            };
            self.rows.swap(rank, p);
            let (head, tail) = self.rows.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for row in tail.iter_mut() {
                if row.words[wi] & mask != 0 {
                    row.xor_assign_from(pivot, wi);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().echelonize().len()
    }

    /// Reduced row echelon form, rank and pivot columns.
    pub fn rank_and_rref(&self) -> Rref {
        let mut m = self.clone();
        let pivots = m.echelonize();
        // back substitution, bottom pivot first
        for i in (0..pivots.len()).rev() {
            let col = pivots[i];
            let wi = col >> 6;
            let mask = 1u64 << (col & 63);
            let (head, tail) = m.rows.split_at_mut(i);
            let pivot = &tail[0];
            for row in head.iter_mut() {
                if row.words[wi] & mask != 0 {
                    row.xor_assign_from(pivot, wi);
                }
            }
        }
        Rref {
            rank: pivots.len(),
            rref: m,
            pivots,
        }
    }

    /// Basis of `{v : self · v = 0}`, one vector per non-pivot column.
    pub fn nullspace_basis(&self) -> Vec<BitVector> {
        let Rref { rref, pivots, .. } = self.rank_and_rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        // column-major view of the pivot rows restricted to free columns
        let mut basis = Vec::with_capacity(self.cols - pivots.len());
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut free_slot = vec![usize::MAX; self.cols];
        for (k, &c) in free.iter().enumerate() {
            free_slot[c] = k;
            basis.push(BitVector::unit(self.cols, c));
        }
        for (i, &p) in pivots.iter().enumerate() {
            for c in rref.rows[i].iter_ones() {
                if c != p {
                    basis[free_slot[c]].set(p, true);
                }
            }
        }
        basis
    }

    /// An independent row basis of the row space, in reduced echelon form.
    pub fn row_basis(&self) -> BitMatrix {
        let Rref { rank, mut rref, .. } = self.rank_and_rref();
        rref.rows.truncate(rank);
        rref
    }

    /// Text form: `rows cols` header, then one 0/1 string per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows.len(), self.cols);
        for row in &self.rows {
            out.push_str(&row.to_string01());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, Gf2Error> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Gf2Error::Parse("missing header".into()))?;
        let mut it = header.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<usize, Gf2Error> {
            tok.ok_or_else(|| Gf2Error::Parse("header needs `rows cols`".into()))?
                .parse()
                .map_err(|e| Gf2Error::Parse(format!("bad header: {e}")))
        };
        let nrows = parse(it.next())?;
        let ncols = parse(it.next())?;
        if it.next().is_some() {
            return Err(Gf2Error::Parse("header has extra fields".into()));
        }
        let mut rows = Vec::with_capacity(nrows);
        for line in lines {
            let row = BitVector::parse01(line)?;
            if row.len() != ncols {
                return Err(Gf2Error::Parse(format!(
                    "row {} has {} entries, expected {ncols}",
                    rows.len(),
                    row.len()
                )));
            }
            rows.push(row);
        }
        if rows.len() != nrows {
            return Err(Gf2Error::Parse(format!(
                "expected {nrows} rows, found {}",
                rows.len()
            )));
        }
        Ok(Self { cols: ncols, rows })
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for row in &self.rows {
            writeln!(f, "  {}", row.to_string01())?;
        }
        write!(f, "]")
    }
}

/// How to search for the minimum weight of a code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMode {
    /// Enumerate all nonzero codewords; refused above `cap`.
    Exact { cap: usize },
    /// Seeded information-set sampling; the result is an upper bound.
    Heuristic { iterations: usize, seed: u64 },
}

impl Default for WeightMode {
    fn default() -> Self {
        WeightMode::Exact {
            cap: DEFAULT_EXACT_DIM_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinWeight {
    pub weight: usize,
    pub witness: BitVector,
    /// False when the weight is only an upper bound.
    pub exact: bool,
}

/// Minimum Hamming weight over the nonzero span of `basis`.
///
/// `basis` must be linearly independent for the exact mode to visit each
/// codeword once; dependent input still gives the right answer as long as
/// the span is nonzero.
pub fn min_weight(basis: &BitMatrix, mode: WeightMode) -> Result<MinWeight, Gf2Error> {
    let basis = basis.row_basis();
    let k = basis.nrows();
    if k == 0 {
        return Err(Gf2Error::ZeroDimensional);
    }
    match mode {
        WeightMode::Exact { cap } => {
            if k > cap {
                return Err(Gf2Error::ExactCapExceeded { dim: k, cap });
            }
            Ok(exact_min_weight(&basis))
        }
        WeightMode::Heuristic { iterations, seed } => {
            Ok(information_set_min_weight(&basis, iterations.max(1), seed))
        }
    }
}

/// Gray-code sweep over all `2^k - 1` nonzero combinations.
fn exact_min_weight(basis: &BitMatrix) -> MinWeight {
    let k = basis.nrows();
    let n = basis.ncols();
    let mut current = BitVector::zeros(n);
    let mut best = usize::MAX;
    let mut best_word = BitVector::zeros(n);
    let total: u64 = 1u64 << k;
    for step in 1..total {
        let flip = step.trailing_zeros() as usize;
        current.xor_assign(basis.row(flip));
        let w = current.weight();
        if w < best || (w == best && current.lex_cmp(&best_word) == Ordering::Less) {
            best = w;
            best_word = current.clone();
        }
    }
    MinWeight {
        weight: best,
        witness: best_word,
        exact: true,
    }
}

/// Information-set sampling: permute columns, bring the generator into
/// systematic form on the first information set, and score rows and
/// pairwise row sums.
fn information_set_min_weight(basis: &BitMatrix, iterations: usize, seed: u64) -> MinWeight {
    let n = basis.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = MinWeight {
        weight: usize::MAX,
        witness: BitVector::zeros(n),
        exact: false,
    };
    let consider = |w: &BitVector, best: &mut MinWeight| {
        let wt = w.weight();
        if wt > 0 && wt < best.weight {
            best.weight = wt;
            best.witness = w.clone();
        }
    };
    let mut perm: Vec<usize> = (0..n).collect();
    for it in 0..iterations {
        if it > 0 {
            perm.shuffle(&mut rng);
        }
        let permuted = BitMatrix {
            cols: n,
            rows: basis.rows.iter().map(|r| r.gather(&perm)).collect(),
        };
        let reduced = permuted.row_basis();
        let rows: Vec<BitVector> = reduced
            .rows
            .iter()
            .map(|r| {
                let mut orig = BitVector::zeros(n);
                for c in r.iter_ones() {
                    orig.set(perm[c], true);
                }
                orig
            })
            .collect();
        for (i, r) in rows.iter().enumerate() {
            consider(r, &mut best);
            for s in &rows[i + 1..] {
                consider(&r.xor(s), &mut best);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> BitMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if rng.random_bool(0.5) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    #[test]
    fn rank_of_small_matrices() {
        let m = BitMatrix::from_u8_rows(&[&[1, 1, 0], &[0, 1, 1]]);
        let r = m.rank_and_rref();
        assert_eq!(r.rank, 2);
        assert_eq!(r.pivots, vec![0, 1]);
        assert_eq!(BitMatrix::zeros(3, 3).rank(), 0);
    }

    #[test]
    fn rank_equals_transpose_rank() {
        let m = random_matrix(20, 30, 7);
        assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn nullspace_examples() {
        let m = BitMatrix::from_u8_rows(&[&[1, 1, 0], &[0, 1, 1]]);
        let basis = m.nullspace_basis();
        assert_eq!(basis, vec![BitVector::parse01("111").unwrap()]);
        assert!(BitMatrix::identity(4).nullspace_basis().is_empty());
    }

    #[test]
    fn repetition_code_distance() {
        let g = BitMatrix::from_u8_rows(&[&[1, 1, 1]]);
        let mw = min_weight(&g, WeightMode::default()).unwrap();
        assert_eq!(mw.weight, 3);
        assert!(mw.exact);
    }

    #[test]
    fn tensor_of_two_repetitions_has_weight_four() {
        // generator of [2,1,2] ⊗ [2,1,2] is the single all-ones 2x2 grid
        let g = BitMatrix::from_u8_rows(&[&[1, 1, 1, 1]]);
        assert_eq!(min_weight(&g, WeightMode::default()).unwrap().weight, 4);
    }

    #[test]
    fn exact_matches_enumeration_on_random_12_4() {
        let g = random_matrix(4, 12, 99);
        let basis = g.row_basis();
        // oracle: walk every coefficient vector directly
        let mut oracle = usize::MAX;
        for mask in 1u32..(1 << basis.nrows()) {
            let mut w = BitVector::zeros(12);
            for i in 0..basis.nrows() {
                if mask >> i & 1 == 1 {
                    w.xor_assign(basis.row(i));
                }
            }
            oracle = oracle.min(w.weight());
        }
        assert_eq!(min_weight(&g, WeightMode::default()).unwrap().weight, oracle);
    }

    #[test]
    fn exact_cap_is_enforced() {
        let g = BitMatrix::identity(5);
        assert_eq!(
            min_weight(&g, WeightMode::Exact { cap: 4 }),
            Err(Gf2Error::ExactCapExceeded { dim: 5, cap: 4 })
        );
        assert_eq!(
            min_weight(&BitMatrix::empty(3), WeightMode::default()),
            Err(Gf2Error::ZeroDimensional)
        );
    }

    #[test]
    fn heuristic_is_an_upper_bound() {
        let g = random_matrix(8, 20, 3);
        let exact = min_weight(&g, WeightMode::default()).unwrap();
        let heur = min_weight(
            &g,
            WeightMode::Heuristic {
                iterations: 10,
                seed: 1,
            },
        )
        .unwrap();
        assert!(!heur.exact);
        assert!(heur.weight >= exact.weight);
        assert_eq!(heur.witness.weight(), heur.weight);
    }

    #[test]
    fn text_format_round_trip_and_errors() {
        let m = BitMatrix::from_u8_rows(&[&[1, 0, 1], &[0, 1, 1]]);
        let text = m.to_text();
        assert_eq!(text, "2 3\n101\n011\n");
        assert_eq!(BitMatrix::from_text(&text).unwrap(), m);
        assert!(BitMatrix::from_text("2 3\n101\n").is_err());
        assert!(BitMatrix::from_text("1 3\n1x1\n").is_err());
    }

    #[test]
    fn lex_order_puts_coordinate_zero_first() {
        let a = BitVector::parse01("0111").unwrap();
        let b = BitVector::parse01("1000").unwrap();
        assert_eq!(a.lex_cmp(&b), Ordering::Less);
    }

    proptest! {
        #[test]
        fn rank_nullity(rows in 1usize..12, cols in 1usize..80, seed in any::<u64>()) {
            let m = random_matrix(rows, cols, seed);
            let r = m.rank_and_rref();
            let basis = m.nullspace_basis();
            prop_assert_eq!(r.rank + basis.len(), cols);
            prop_assert!(r.rank <= rows.min(cols));
            prop_assert!(r.pivots.windows(2).all(|w| w[0] < w[1]));
            for v in &basis {
                prop_assert!(m.annihilates(v));
            }
            prop_assert_eq!(BitMatrix::from_rows(cols, basis.clone()).unwrap().rank(), basis.len());
            // rref is idempotent
            prop_assert_eq!(r.rref.rank_and_rref().rref, r.rref.clone());
        }

        #[test]
        fn xor_is_an_involution(bits in proptest::collection::vec(any::<bool>(), 0..200),
                                other in proptest::collection::vec(any::<bool>(), 0..200)) {
            let n = bits.len().min(other.len());
            let a = BitVector::from_bools(&bits[..n]);
            let b = BitVector::from_bools(&other[..n]);
            prop_assert_eq!(a.xor(&b).xor(&b), a.clone());
            prop_assert_eq!(a.weight(), bits[..n].iter().filter(|&&x| x).count());
            prop_assert!(a.xor(&a).is_zero());
        }
    }
}
