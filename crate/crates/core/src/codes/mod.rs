//! Binary linear codes, tensor products, LDPC factor graphs and testability
//! oracles for small tensor codes.

pub mod ldpc;
pub mod testability;

use std::sync::OnceLock;

use num_rational::Ratio;
use thiserror::Error;

use crate::gf2::{min_weight, BitMatrix, BitVector, Gf2Error, MinWeight, WeightMode};

pub use ldpc::{check_expander, random_ldpc, ExpanderCheck, FactorGraph};
pub use testability::{
    agreement_kappa, dsw_tau_bound, kappa_from_tau, kappa_from_tau_exact, robustness_tau, tau_from_kappa, tau_from_kappa_exact, DswBound, KappaResult, TauResult,
    TestabilityReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error(transparent)]
    Gf2(#[from] Gf2Error),
    #[error("n·c = {nc} is not divisible by d = {d}")]
    Divisibility { nc: usize, d: usize },
    #[error("instance too large for exhaustive search: {0}")]
    SizeCapExceeded(String),
    #[error("subset enumeration needs {needed} subsets, above the budget {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("malformed code text: {0}")]
    Parse(String),
    #[error("code has no nonzero codeword")]
    ZeroCode,
}

/// A binary linear code held by generator and parity-check bases.
#[derive(Clone, Debug)]
pub struct LinearCode {
    n: usize,
    generator: BitMatrix,
    parity: BitMatrix,
    distance: OnceLock<Result<MinWeight, Gf2Error>>,
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.generator == other.generator
    }
}

impl LinearCode {
    /// Code spanned by the rows of `g`.
    pub fn from_generator(g: &BitMatrix) -> Self {
        let generator = g.row_basis();
        let parity = BitMatrix::from_rows(g.ncols(), g.nullspace_basis()).unwrap().row_basis();
        Self { n: g.ncols(), generator, parity, distance: OnceLock::new() }
    }

    /// Code `{v : H v = 0}`.
    pub fn from_parity_check(h: &BitMatrix) -> Self {
        let generator = BitMatrix::from_rows(h.ncols(), h.nullspace_basis()).unwrap().row_basis();
        let parity = h.row_basis();
        Self { n: h.ncols(), generator, parity, distance: OnceLock::new() }
    }

    pub fn repetition(n: usize) -> Self {
        let mut g = BitMatrix::empty(n);
        g.push_row(BitVector::ones(n));
        Self::from_generator(&g)
    }

    /// Even-weight code [n, n−1, 2].
    pub fn parity(n: usize) -> Self {
        let mut h = BitMatrix::empty(n);
        h.push_row(BitVector::ones(n));
        Self::from_parity_check(&h)
    }

    pub fn full(n: usize) -> Self {
        Self::from_generator(&BitMatrix::identity(n))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn rate(&self) -> Ratio<i64> {
        Ratio::new(self.dim() as i64, self.n as i64)
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    /// Row basis of the dual code.
    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        v.len() == self.n && self.parity.annihilates(v)
    }

    /// Minimum distance by exhaustive enumeration (default cap), cached.
    pub fn distance(&self) -> Result<MinWeight, CodeError> {
        self.distance
            .get_or_init(|| min_weight(&self.generator, WeightMode::default()))
            .clone()
            .map_err(CodeError::from)
    }

    /// Minimum distance with an explicit search mode; not cached.
    pub fn distance_with(&self, mode: WeightMode) -> Result<MinWeight, CodeError> {
        Ok(min_weight(&self.generator, mode)?)
    }

    /// Relative distance d/n.
    pub fn relative_distance(&self) -> Result<Ratio<i64>, CodeError> {
        Ok(Ratio::new(self.distance()?.weight as i64, self.n as i64))
    }

    /// All codewords as packed words (requires n ≤ 64 and dim ≤ 24), in
    /// Gray-code order starting from zero.
    pub fn codewords_u64(&self) -> Result<Vec<u64>, CodeError> {
        if self.n > 64 || self.dim() > 24 {
            return Err(CodeError::SizeCapExceeded(format!("n = {}, dim = {}", self.n, self.dim())));
        }
        let rows: Vec<u64> = self.generator.rows().iter().map(|r| r.as_u64()).collect();
        let mut out = Vec::with_capacity(1 << self.dim());
        let mut cur = 0u64;
        out.push(cur);
        for step in 1u64..(1 << self.dim()) {
            cur ^= rows[step.trailing_zeros() as usize];
            out.push(cur);
        }
        Ok(out)
    }

    /// Text form: header `n dim distance exact`, then the generator matrix.
    pub fn to_text(&self) -> String {
        let (d, exact) = match self.distance() {
            Ok(mw) => (mw.weight.to_string(), "exact"),
            Err(_) => ("?".to_string(), "unknown"),
        };
        format!("{} {} {} {}\n{}", self.n, self.dim(), d, exact, self.generator.to_text())
    }

    pub fn from_text(text: &str) -> Result<Self, CodeError> {
        let (header, rest) = text
            .split_once('\n')
            .ok_or_else(|| CodeError::Parse("missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(CodeError::Parse("header needs `n dim distance exact`".into()));
        }
        let n: usize = fields[0].parse().map_err(|_| CodeError::Parse("bad n".into()))?;
        let g = BitMatrix::from_text(rest)?;
        if g.ncols() != n {
            return Err(CodeError::Parse(format!("generator has {} columns, header says {n}", g.ncols())));
        }
        let code = Self::from_generator(&g);
        if fields[1].parse::<usize>().ok() != Some(code.dim()) {
            return Err(CodeError::Parse("dimension in header disagrees with generator rank".into()));
        }
        Ok(code)
    }
}

/// C₁ ⊗ C₂ on n₁ × n₂ grids; coordinate (i, j) is `i·n₂ + j`, rows lie in
/// C₂ and columns in C₁.
pub fn tensor(c1: &LinearCode, c2: &LinearCode) -> LinearCode {
    let (n1, n2) = (c1.len(), c2.len());
    let mut g = BitMatrix::empty(n1 * n2);
    for r1 in c1.generator().rows() {
        for r2 in c2.generator().rows() {
            let mut v = BitVector::zeros(n1 * n2);
            for i in r1.iter_ones() {
                for j in r2.iter_ones() {
                    v.set(i * n2 + j, true);
                }
            }
            g.push_row(v);
        }
    }
    LinearCode::from_generator(&g)
}

/// Membership of an n₁ × n₂ grid (packed as `i·n₂ + j`) in C₁ ⊗ C₂ via its
/// rows and columns.
pub fn in_tensor_by_lines(c1: &LinearCode, c2: &LinearCode, grid: &BitVector) -> bool {
    let (n1, n2) = (c1.len(), c2.len());
    (0..n1).all(|i| c2.contains(&grid.gather(&(i * n2..(i + 1) * n2).collect::<Vec<_>>())))
        && (0..n2).all(|j| c1.contains(&grid.gather(&(0..n1).map(|i| i * n2 + j).collect::<Vec<_>>())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_code(n: usize, k: usize, seed: u64) -> LinearCode {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = BitMatrix::zeros(k, n);
        for r in 0..k {
            for c in 0..n {
                g.set(r, c, rng.random_bool(0.5));
            }
        }
        LinearCode::from_generator(&g)
    }

    #[test]
    fn basic_codes() {
        let rep = LinearCode::repetition(3);
        assert_eq!((rep.dim(), rep.distance().unwrap().weight), (1, 3));
        let par = LinearCode::parity(3);
        assert_eq!((par.dim(), par.distance().unwrap().weight), (2, 2));
        assert_eq!(LinearCode::full(4).distance().unwrap().weight, 1);
        assert_eq!(rep.parity_check().nrows(), 2);
    }

    #[test]
    fn tensor_of_repetitions() {
        let t = tensor(&LinearCode::repetition(2), &LinearCode::repetition(2));
        assert_eq!(t.dim(), 1);
        let mut words = t.codewords_u64().unwrap();
        words.sort();
        assert_eq!(words, vec![0, 0b1111]);
    }

    #[test]
    fn parity_tensor_repetition() {
        let t = tensor(&LinearCode::parity(3), &LinearCode::repetition(3));
        assert_eq!(t.dim(), 2);
        // oracle: the 3 nonzero codewords by enumeration
        let words = t.codewords_u64().unwrap();
        let min = words.iter().filter(|&&w| w != 0).map(|w| w.count_ones()).min().unwrap();
        assert_eq!(min, 6);
        assert_eq!(t.distance().unwrap().weight, 6);
    }

    #[test]
    fn tensor_multiplicativity_on_random_pair() {
        let c1 = random_code(5, 2, 11);
        let c2 = random_code(4, 2, 12);
        let t = tensor(&c1, &c2);
        assert_eq!(t.dim(), c1.dim() * c2.dim());
        assert_eq!(
            t.distance().unwrap().weight,
            c1.distance().unwrap().weight * c2.distance().unwrap().weight
        );
    }

    #[test]
    fn text_round_trip() {
        let c = LinearCode::parity(4);
        let text = c.to_text();
        assert!(text.starts_with("4 3 2 exact\n"));
        assert_eq!(LinearCode::from_text(&text).unwrap(), c);
        assert!(LinearCode::from_text("4 2 2 exact\n1 4\n1111\n").is_err());
    }

    proptest! {
        #[test]
        fn generator_and_parity_are_dual(n in 2usize..14, k in 1usize..6, seed in any::<u64>()) {
            let c = random_code(n, k.min(n), seed);
            prop_assert_eq!(c.dim() + c.parity_check().nrows(), n);
            for g in c.generator().rows() {
                prop_assert!(c.parity_check().annihilates(g));
            }
        }

        #[test]
        fn tensor_membership_matches_lines(n1 in 2usize..5, n2 in 2usize..5, s1 in any::<u64>(), s2 in any::<u64>(), f in any::<u32>()) {
            let c1 = random_code(n1, 1 + (s1 % n1 as u64) as usize, s1);
            let c2 = random_code(n2, 1 + (s2 % n2 as u64) as usize, s2);
            let t = tensor(&c1, &c2);
            let grid = BitVector::from_u64(f as u64, n1 * n2);
            prop_assert_eq!(t.contains(&grid), in_tensor_by_lines(&c1, &c2, &grid));
            if c1.dim() > 0 && c2.dim() > 0 && c1.dim() * c2.dim() <= 12 {
                prop_assert_eq!(
                    t.distance().unwrap().weight,
                    c1.distance().unwrap().weight * c2.distance().unwrap().weight
                );
            }
        }
    }
}
