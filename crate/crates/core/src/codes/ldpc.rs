//! Random (c, d)-regular LDPC codes and exhaustive expansion checks.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CodeError, LinearCode};
use crate::gf2::BitMatrix;

pub const DEFAULT_SUBSET_BUDGET: u128 = 100_000_000;

/// A (c, d)-biregular bipartite multigraph between `n` variables and `m`
/// checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorGraph {
    pub n: usize,
    pub m: usize,
    pub c: usize,
    pub d: usize,
    /// (variable, check) pairs, one per half-edge match; repeats allowed.
    pub edges: Vec<(u32, u32)>,
    pub seed: u64,
}

impl FactorGraph {
    /// Checks adjacent to each variable, with multiplicity.
    pub fn variable_neighbors(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::with_capacity(self.c); self.n];
        for &(v, chk) in &self.edges {
            out[v as usize].push(chk);
        }
        out
    }

    /// Parity-check matrix: entry (check, variable) is the edge multiplicity mod 2.
    pub fn parity_matrix(&self) -> BitMatrix {
        let mut h = BitMatrix::zeros(self.m, self.n);
        for &(v, chk) in &self.edges {
            let cur = h.get(chk as usize, v as usize);
            h.set(chk as usize, v as usize, !cur);
        }
        h
    }

    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut left = vec![0; self.n];
        let mut right = vec![0; self.m];
        for &(v, chk) in &self.edges {
            left[v as usize] += 1;
            right[chk as usize] += 1;
        }
        (left, right)
    }
}

/// Uniform matching of the `nc` variable half-edges with the `md` check
/// half-edges, driven by `seed`.
pub fn random_ldpc(c: usize, d: usize, n: usize, seed: u64) -> Result<(LinearCode, FactorGraph), CodeError> {
    if d == 0 || (n * c) % d != 0 {
        return Err(CodeError::Divisibility { nc: n * c, d });
    }
    let m = n * c / d;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut right: Vec<u32> = (0..m as u32).flat_map(|chk| std::iter::repeat_n(chk, d)).collect();
    right.shuffle(&mut rng);
    let edges = (0..n as u32)
        .flat_map(|v| std::iter::repeat_n(v, c))
        .zip(right)
        .collect();
    let fg = FactorGraph { n, m, c, d, edges, seed };
    let code = LinearCode::from_parity_check(&fg.parity_matrix());
    Ok((code, fg))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ExpanderCheck {
    /// Every left set of size at most `max_size` has at least c|S|(1−γ) distinct neighbours.
    Certified { max_size: usize, subsets_checked: u64, vacuous: bool },
    Counterexample { set: Vec<u32>, neighbors: usize, required: f64 },
}

impl ExpanderCheck {
    pub fn is_certified(&self) -> bool {
        matches!(self, ExpanderCheck::Certified { .. })
    }
}

fn binomial_sum(n: usize, k: usize) -> u128 {
    let mut total = 0u128;
    let mut term = 1u128;
    for i in 1..=k {
        term = term * (n - i + 1) as u128 / i as u128;
        total = total.saturating_add(term);
    }
    total
}

/// Exhaustive (δ, γ)-expansion check over all left sets of size ≤ ⌊δn⌋.
pub fn check_expander(fg: &FactorGraph, delta: f64, gamma: f64, budget: u128) -> Result<ExpanderCheck, CodeError> {
    let max_size = (delta * fg.n as f64 + 1e-12).floor().max(0.0) as usize;
    let max_size = max_size.min(fg.n);
    if max_size == 0 {
        return Ok(ExpanderCheck::Certified { max_size, subsets_checked: 0, vacuous: true });
    }
    let needed = binomial_sum(fg.n, max_size);
    if needed > budget {
        return Err(CodeError::BudgetExceeded { needed, budget });
    }
    let nbrs = fg.variable_neighbors();
    let mut count = vec![0u32; fg.m];
    let mut distinct = 0usize;
    let mut stack: Vec<u32> = Vec::new();
    let mut checked = 0u64;
    let factor = fg.c as f64 * (1.0 - gamma);

    fn add(nb: &[u32], count: &mut [u32], distinct: &mut usize) {
        for &x in nb {
            if count[x as usize] == 0 {
                *distinct += 1;
            }
            count[x as usize] += 1;
        }
    }
    fn remove(nb: &[u32], count: &mut [u32], distinct: &mut usize) {
        for &x in nb {
            count[x as usize] -= 1;
            if count[x as usize] == 0 {
                *distinct -= 1;
            }
        }
    }

    // iterative DFS over increasing index sequences
    let mut next: u32 = 0;
    loop {
        if (next as usize) < fg.n && stack.len() < max_size {
            stack.push(next);
            add(&nbrs[next as usize], &mut count, &mut distinct);
            checked += 1;
            let required = factor * stack.len() as f64;
            if (distinct as f64) < required - 1e-9 {
                return Ok(ExpanderCheck::Counterexample { set: stack.clone(), neighbors: distinct, required });
            }
            next += 1;
        } else {
            let Some(last) = stack.pop() else { break };
            remove(&nbrs[last as usize], &mut count, &mut distinct);
            next = last + 1;
        }
    }
    Ok(ExpanderCheck::Certified { max_size, subsets_checked: checked, vacuous: false })
}
