//! Exhaustive robust and agreement testability for tiny tensor codes, plus
//! the conversions between the two and the expander-code robustness bound.

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use super::{tensor, CodeError, LinearCode};
use crate::gf2::BitVector;

pub const MAX_TAU_CELLS: usize = 20;
pub const MAX_KAPPA_PAIRS: u128 = 1_000_000;

pub(crate) fn ratio_str<S: Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn opt_ratio_str<S: Serializer>(r: &Option<Ratio<u64>>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => ratio_str(r, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauResult {
    #[serde(serialize_with = "ratio_str")]
    pub tau: Ratio<u64>,
    /// Lexicographically smallest minimizer, packed `i·n₂ + j`.
    pub witness: String,
    pub exact: bool,
    pub words_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaResult {
    #[serde(serialize_with = "ratio_str")]
    pub kappa: Ratio<u64>,
    /// Word with every column in C₁.
    pub witness_col: String,
    /// Word with every row in C₂.
    pub witness_row: String,
    pub exact: bool,
    pub pairs_checked: u64,
    pub pairs_skipped: u64,
}

fn ratio_lt(a: (u64, u64), b: (u64, u64)) -> bool {
    (a.0 as u128) * (b.1 as u128) < (b.0 as u128) * (a.1 as u128)
}

fn lex_key(word: u64, len: usize) -> u64 {
    if len == 0 {
        0
    } else {
        word.reverse_bits() >> (64 - len)
    }
}

fn nearest_table(code: &LinearCode) -> Result<Vec<u8>, CodeError> {
    let words = code.codewords_u64()?;
    let n = code.len();
    Ok((0..1u64 << n)
        .map(|x| words.iter().map(|&c| (x ^ c).count_ones() as u8).min().unwrap())
        .collect())
}

fn row_of(f: u64, i: usize, n2: usize) -> usize {
    ((f >> (i * n2)) & ((1u64 << n2) - 1)) as usize
}

fn col_of(f: u64, j: usize, n1: usize, n2: usize) -> usize {
    (0..n1).fold(0usize, |acc, i| acc | ((((f >> (i * n2 + j)) & 1) as usize) << i))
}

/// τ = min over f ∉ C₁⊗C₂ of ((Σ_j d(col_j, C₁) + Σ_i d(row_i, C₂))/2) / d(f, C₁⊗C₂).
/// Returns `None` when the tensor code is the whole space.
pub fn robustness_tau(c1: &LinearCode, c2: &LinearCode) -> Result<Option<TauResult>, CodeError> {
    let (n1, n2) = (c1.len(), c2.len());
    let cells = n1 * n2;
    if cells > MAX_TAU_CELLS || cells == 0 {
        return Err(CodeError::SizeCapExceeded(format!("{n1}×{n2} grid, exhaustive cap {MAX_TAU_CELLS} cells")));
    }
    let t = tensor(c1, c2);
    let h: Vec<u64> = t.parity_check().rows().iter().map(|r| r.as_u64()).collect();
    let r = h.len();
    if r == 0 {
        return Ok(None);
    }
    let col_mask: Vec<u64> = (0..cells)
        .map(|k| h.iter().enumerate().fold(0u64, |acc, (s, row)| acc | (((row >> k) & 1) << s)))
        .collect();

    let total = 1u64 << cells;
    // coset leaders by weight
    let mut coset = vec![u8::MAX; 1 << r];
    let (mut f, mut syn) = (0u64, 0u64);
    coset[0] = 0;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        f ^= 1 << k;
        syn ^= col_mask[k];
        let w = f.count_ones() as u8;
        if w < coset[syn as usize] {
            coset[syn as usize] = w;
        }
    }

    let row_d = nearest_table(c2)?;
    let col_d = nearest_table(c1)?;
    let mut rows = vec![0usize; n1];
    let mut cols = vec![0usize; n2];
    let (mut srow, mut scol) = (0u64, 0u64);
    let (mut f, mut syn) = (0u64, 0u64);
    let mut best: Option<((u64, u64), u64)> = None;
    for step in 1..total {
        let k = step.trailing_zeros() as usize;
        let (i, j) = (k / n2, k % n2);
        f ^= 1 << k;
        syn ^= col_mask[k];
        srow -= row_d[rows[i]] as u64;
        rows[i] ^= 1 << j;
        srow += row_d[rows[i]] as u64;
        scol -= col_d[cols[j]] as u64;
        cols[j] ^= 1 << i;
        scol += col_d[cols[j]] as u64;
        if syn == 0 {
            continue;
        }
        let ratio = (srow + scol, 2 * coset[syn as usize] as u64);
        let better = match &best {
            None => true,
            Some((b, wf)) => {
                ratio_lt(ratio, *b) || (!ratio_lt(*b, ratio) && lex_key(f, cells) < lex_key(*wf, cells))
            }
        };
        if better {
            best = Some((ratio, f));
        }
    }
    debug_assert!(rows.iter().enumerate().all(|(i, &w)| w == row_of(f, i, n2)));
    debug_assert!(cols.iter().enumerate().all(|(j, &w)| w == col_of(f, j, n1, n2)));
    Ok(best.map(|((num, den), w)| TauResult {
        tau: Ratio::new(num, den),
        witness: BitVector::from_u64(w, cells).to_string01(),
        exact: true,
        words_checked: total,
    }))
}

/// κ = min over (w_col, w_row) with positive correction cost of
/// disagree(w_col, w_row) / min_w (changed-columns·n₁ + changed-rows·n₂),
/// which equals the fraction form after clearing n₁n₂.
pub fn agreement_kappa(c1: &LinearCode, c2: &LinearCode) -> Result<Option<KappaResult>, CodeError> {
    let (n1, n2) = (c1.len(), c2.len());
    let cells = n1 * n2;
    let k1 = c1.dim() as u32;
    let k2 = c2.dim() as u32;
    let pairs = 1u128
        .checked_shl(k1 * n2 as u32 + k2 * n1 as u32)
        .filter(|_| k1 * n2 as u32 + k2 * n1 as u32 <= 120)
        .unwrap_or(u128::MAX);
    if cells > 64 || pairs > MAX_KAPPA_PAIRS {
        return Err(CodeError::SizeCapExceeded(format!("{pairs} pairs, cap {MAX_KAPPA_PAIRS}")));
    }
    let w1 = c1.codewords_u64()?;
    let w2 = c2.codewords_u64()?;
    let tensor_words = tensor(c1, c2).codewords_u64()?;

    let spread_col = |x: u64, j: usize| (0..n1).fold(0u64, |acc, i| acc | (((x >> i) & 1) << (i * n2 + j)));
    let spread_row = |x: u64, i: usize| x << (i * n2);

    let all_col: Vec<u64> = product_words(&w1, n2, spread_col);
    let all_row: Vec<u64> = product_words(&w2, n1, spread_row);

    let col_masks: Vec<u64> = (0..n2).map(|j| spread_col((1u64 << n1) - 1, j)).collect();
    let row_masks: Vec<u64> = (0..n1).map(|i| spread_row((1u64 << n2) - 1, i)).collect();
    let count_lines = |d: u64, masks: &[u64]| masks.iter().filter(|&&m| d & m != 0).count() as u64;

    // row cost per (w_row, w)
    let row_cost: Vec<Vec<u64>> = all_row
        .iter()
        .map(|&wr| tensor_words.iter().map(|&w| count_lines(wr ^ w, &row_masks) * n2 as u64).collect())
        .collect();

    let mut best: Option<((u64, u64), u64, u64)> = None;
    let (mut checked, mut skipped) = (0u64, 0u64);
    let mut col_cost = vec![0u64; tensor_words.len()];
    for &wc in &all_col {
        for (slot, &w) in col_cost.iter_mut().zip(&tensor_words) {
            *slot = count_lines(wc ^ w, &col_masks) * n1 as u64;
        }
        for (ri, &wr) in all_row.iter().enumerate() {
            let cost = col_cost.iter().zip(&row_cost[ri]).map(|(a, b)| a + b).min().unwrap();
            if cost == 0 {
                skipped += 1;
                continue;
            }
            checked += 1;
            let ratio = ((wc ^ wr).count_ones() as u64, cost);
            let better = match &best {
                None => true,
                Some((b, bc, br)) => {
                    ratio_lt(ratio, *b)
                        || (!ratio_lt(*b, ratio)
                            && (lex_key(wc, cells), lex_key(wr, cells)) < (lex_key(*bc, cells), lex_key(*br, cells)))
                }
            };
            if better {
                best = Some((ratio, wc, wr));
            }
        }
    }
    Ok(best.map(|((num, den), wc, wr)| KappaResult {
        kappa: Ratio::new(num, den),
        witness_col: BitVector::from_u64(wc, cells).to_string01(),
        witness_row: BitVector::from_u64(wr, cells).to_string01(),
        exact: true,
        pairs_checked: checked,
        pairs_skipped: skipped,
    }))
}

fn product_words(words: &[u64], lines: usize, place: impl Fn(u64, usize) -> u64) -> Vec<u64> {
    let mut out = vec![0u64];
    for line in 0..lines {
        out = out.iter().flat_map(|&acc| words.iter().map(move |&w| (acc, w))).map(|(acc, w)| acc | place(w, line)).collect();
    }
    out
}

/// Agreement constant implied by robustness τ, with relative distances δ₁, δ₂.
pub fn kappa_from_tau(tau: f64, delta1: f64, delta2: f64) -> f64 {
    1.0 / (1.0 / (2.0 * tau * delta1) + (1.0 + 1.0 / (2.0 * tau)) / delta2)
}

/// Exact form 2τδ₁δ₂ / (δ₂ + δ₁(1+2τ)).
pub fn kappa_from_tau_exact(tau: Ratio<u64>, delta1: Ratio<u64>, delta2: Ratio<u64>) -> Ratio<u64> {
    let two = Ratio::from_integer(2);
    two * tau * delta1 * delta2 / (delta2 + delta1 * (Ratio::from_integer(1) + two * tau))
}

/// Robustness implied by agreement constant κ.
pub fn tau_from_kappa(kappa: f64) -> f64 {
    kappa / (2.0 * (kappa + 1.0))
}

pub fn tau_from_kappa_exact(kappa: Ratio<u64>) -> Ratio<u64> {
    kappa / (Ratio::from_integer(2) * (kappa + Ratio::from_integer(1)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DswBound {
    /// δδ′(1/6 − γ)/(2d), clamped at 0.
    pub small_gamma: f64,
    /// δδ′ / d^{log_{0.5+γ} 0.05}; 0 when γ ≥ 1/2.
    pub any_gamma: f64,
    /// `small_gamma` when γ < 1/6, otherwise `any_gamma`.
    pub bound: f64,
}

/// Lower bound on τ for C ⊗ C′ with C a (c, d)-regular (δ, γ)-expander code
/// and C′ of relative distance δ′.
pub fn dsw_tau_bound(delta: f64, delta_prime: f64, gamma: f64, d: usize) -> DswBound {
    let small_gamma = (delta * delta_prime * (1.0 / 6.0 - gamma) / (2.0 * d as f64)).max(0.0);
    let any_gamma = if gamma < 0.5 {
        let exponent = 0.05f64.ln() / (0.5 + gamma).ln();
        delta * delta_prime * (-(exponent * (d as f64).ln())).exp()
    } else {
        0.0
    };
    let bound = if gamma < 1.0 / 6.0 { small_gamma } else { any_gamma };
    DswBound { small_gamma, any_gamma, bound }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestabilityReport {
    pub n1: usize,
    pub n2: usize,
    #[serde(serialize_with = "ratio_str")]
    pub delta1: Ratio<u64>,
    #[serde(serialize_with = "ratio_str")]
    pub delta2: Ratio<u64>,
    pub tau: Option<TauResult>,
    pub tau_error: Option<String>,
    pub kappa: Option<KappaResult>,
    pub kappa_error: Option<String>,
    #[serde(serialize_with = "opt_ratio_str")]
    pub kappa_from_tau: Option<Ratio<u64>>,
    #[serde(serialize_with = "opt_ratio_str")]
    pub tau_from_kappa: Option<Ratio<u64>>,
    /// measured κ ≥ κ(τ)
    pub kappa_direction: Option<bool>,
    /// measured τ ≥ τ(κ)
    pub tau_direction: Option<bool>,
}

impl TestabilityReport {
    pub fn compute(c1: &LinearCode, c2: &LinearCode) -> Result<Self, CodeError> {
        let rel = |c: &LinearCode| -> Result<Ratio<u64>, CodeError> {
            let d = c.distance().map_err(|_| CodeError::ZeroCode)?.weight as u64;
            Ok(Ratio::new(d, c.len() as u64))
        };
        let delta1 = rel(c1)?;
        let delta2 = rel(c2)?;
        let (tau, tau_error) = match robustness_tau(c1, c2) {
            Ok(t) => (t, None),
            Err(e) => (None, Some(e.to_string())),
        };
        let (kappa, kappa_error) = match agreement_kappa(c1, c2) {
            Ok(k) => (k, None),
            Err(e) => (None, Some(e.to_string())),
        };
        let kappa_from_tau = tau.as_ref().map(|t| kappa_from_tau_exact(t.tau, delta1, delta2));
        let tau_from_kappa = kappa.as_ref().map(|k| tau_from_kappa_exact(k.kappa));
        let (kappa_direction, tau_direction) = match (&tau, &kappa) {
            (Some(t), Some(k)) => (
                Some(k.kappa >= kappa_from_tau.unwrap()),
                Some(t.tau >= tau_from_kappa.unwrap()),
            ),
            _ => (None, None),
        };
        Ok(Self {
            n1: c1.len(),
            n2: c2.len(),
            delta1,
            delta2,
            tau,
            tau_error,
            kappa,
            kappa_error,
            kappa_from_tau,
            tau_from_kappa,
            kappa_direction,
            tau_direction,
        })
    }
}
