//! Parameter chain from a target rate to the base code, the complex size
//! and the final distance/testability constants. Tiny and huge quantities
//! are carried as natural logarithms.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

pub const C0: u32 = 7;
pub const GAMMA0: f64 = 0.15;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("rate must lie strictly between 0 and 1, got {0}")]
    BadRate(f64),
}

/// A positive real stored by its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogReal(pub f64);

impl LogReal {
    pub fn from_value(x: f64) -> Self {
        LogReal(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn log2(self) -> f64 {
        self.0 / std::f64::consts::LN_2
    }

    pub fn log10(self) -> f64 {
        self.0 / std::f64::consts::LN_10
    }

    /// Value as f64; 0 or ∞ outside the double range.
    pub fn value(self) -> f64 {
        self.0.exp()
    }

    /// Scientific notation with `digits` significant digits, at any magnitude.
    pub fn sci(self, digits: usize) -> String {
        let l = self.log10();
        let mut exp = l.floor();
        let mut mant = 10f64.powf(l - exp);
        let scale = 10f64.powi(digits as i32 - 1);
        mant = (mant * scale).round() / scale;
        if mant >= 10.0 {
            mant /= 10.0;
            exp += 1.0;
        }
        format!("{:.*}e{}", digits - 1, mant, exp as i64)
    }

    pub fn mul(self, o: LogReal) -> LogReal {
        LogReal(self.0 + o.0)
    }

    pub fn div(self, o: LogReal) -> LogReal {
        LogReal(self.0 - o.0)
    }

    pub fn powf(self, p: f64) -> LogReal {
        LogReal(self.0 * p)
    }

    pub fn add(self, o: LogReal) -> LogReal {
        let (hi, lo) = if self.0 >= o.0 { (self.0, o.0) } else { (o.0, self.0) };
        LogReal(hi + (lo - hi).exp().ln_1p())
    }

    /// self − o, or `None` when the difference is not positive.
    pub fn sub(self, o: LogReal) -> Option<LogReal> {
        if o.0 >= self.0 {
            return None;
        }
        Some(LogReal(self.0 + (-(o.0 - self.0).exp()).ln_1p()))
    }
}

impl Serialize for LogReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.sci(10))
    }
}

fn biguint_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 60;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_str_radix(10))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseCodePlan {
    pub r0: f64,
    pub c0: u32,
    pub gamma0: f64,
    pub d0: u64,
    pub delta0: LogReal,
    pub kappa0: LogReal,
    /// robustness of C₀ ⊗ C₀ before conversion
    pub tau0: LogReal,
    /// log₂ of the smallest admissible LDPC length
    pub log2_n0: f64,
    /// γ₀ > 1/c₀
    pub gamma_exceeds_inverse_c: bool,
    pub d0_exceeds_c0: bool,
}

/// Largest δ allowed for a random (c, d)-biregular graph to be a (δ, γ)-expander.
pub fn expansion_delta(c: f64, gamma: f64, d: f64) -> LogReal {
    let cg = c * gamma;
    let ln_base = 2f64.ln() + (c + 1.0 - cg) + cg * d.ln() + cg * (1.0 - gamma).ln();
    LogReal(-ln_base / (cg - 1.0))
}

/// log₂ of the smallest n with e^{c+1−cγ}d^{cγ}(1−γ)^{cγ} n^{−1/9} + n·2^{−n^{min(1/3,(cγ−1)/2)}} < 1.
pub fn log2_n0(c: f64, gamma: f64, d: f64) -> f64 {
    let cg = c * gamma;
    let ln_k = (c + 1.0 - cg) + cg * d.ln() + cg * (1.0 - gamma).ln();
    let expo = (1.0f64 / 3.0).min((cg - 1.0) / 2.0);
    let ln2 = std::f64::consts::LN_2;
    let lhs = |l2: f64| -> f64 {
        let ln_n = l2 * ln2;
        let t1 = (ln_k - ln_n / 9.0).exp();
        let t2 = (ln_n - ln2 * (expo * ln_n).exp()).exp();
        t1 + t2
    };
    // past the maximum of the second term the sum is decreasing
    let peak = (1.0 / (expo * ln2)).ln() / (expo * ln2);
    let mut lo = peak.max(1.0);
    let mut hi = lo.max(2.0);
    while lhs(hi) >= 1.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lhs(mid) < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub fn plan_base_code(r0: f64) -> Result<BaseCodePlan, PlannerError> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(PlannerError::BadRate(r0));
    }
    let c = C0 as f64;
    let d0 = (7.0 / (1.0 - r0) - 1e-12).ceil() as u64;
    let delta0 = expansion_delta(c, GAMMA0, d0 as f64);
    let gap = LogReal::from_value(1.0 / 6.0 - GAMMA0);
    let tau0 = delta0.powf(2.0).mul(gap).div(LogReal::from_value(2.0 * d0 as f64));
    let kappa0 = delta0.powf(3.0).mul(gap).div(LogReal::from_value(4.0 * d0 as f64));
    Ok(BaseCodePlan {
        r0,
        c0: C0,
        gamma0: GAMMA0,
        d0,
        delta0,
        kappa0,
        tau0,
        log2_n0: log2_n0(c, GAMMA0, d0 as f64),
        gamma_exceeds_inverse_c: GAMMA0 > 1.0 / c,
        d0_exceeds_c0: d0 > C0 as u64,
    })
}

const SMALL_PRIMES: [u32; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];

/// Miller–Rabin with the first twenty prime bases (a proof below 3.3·10²⁴).
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &p in &SMALL_PRIMES {
        let p = BigUint::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let n1 = n - 1u32;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    'bases: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn sieve(limit: u32) -> Vec<u32> {
    let mut is = vec![true; limit as usize + 1];
    is[0] = false;
    is[1] = false;
    let mut i = 2usize;
    while i * i <= limit as usize {
        if is[i] {
            for j in (i * i..=limit as usize).step_by(i) {
                is[j] = false;
            }
        }
        i += 1;
    }
    (0..=limit).filter(|&k| is[k as usize]).collect()
}

/// Smallest prime ≥ `start` that is odd.
pub fn next_odd_prime(start: &BigUint) -> BigUint {
    let small = sieve(20_000);
    let mut n = if start <= &BigUint::from(3u32) { BigUint::from(3u32) } else { start.clone() };
    if n.is_even() {
        n += 1u32;
    }
    loop {
        let cheap_reject = small.iter().any(|&p| {
            let p = BigUint::from(p);
            p < n && (&n % &p).is_zero()
        });
        if !cheap_reject && is_probable_prime(&n) {
            return n;
        }
        n += 2u32;
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrimePower {
    #[serde(serialize_with = "ser_big")]
    pub q: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub p: BigUint,
    pub k: u32,
}

/// Smallest odd prime power ≥ `start`.
pub fn next_odd_prime_power(start: &BigUint) -> PrimePower {
    let p = next_odd_prime(start);
    let mut best = PrimePower { q: p.clone(), p, k: 1 };
    let bits = start.bits() as u32;
    let one = BigUint::one();
    for k in 2..=bits.max(2) {
        let root = if *start <= one { one.clone() } else { (start - 1u32).nth_root(k) + 1u32 };
        if root < BigUint::from(3u32) {
            break;
        }
        let q = root.pow(k);
        if q >= best.q || root.is_even() {
            continue;
        }
        if is_probable_prime(&root) {
            best = PrimePower { q, p: root, k };
        }
    }
    best
}

/// Smallest integer ≥ e^{ln}, padded by a relative 10⁻⁹ to cover the
/// rounding in `ln`.
pub fn ceil_exp(ln: f64) -> BigUint {
    let l2 = ln / std::f64::consts::LN_2 + 1e-9 / std::f64::consts::LN_2;
    if l2 < 60.0 {
        return BigUint::from(2f64.powf(l2).ceil() as u64);
    }
    let e = l2.floor();
    let mant = 2f64.powf(l2 - e);
    let m = (mant * 2f64.powi(52)).ceil() as u64;
    BigUint::from(m) << (e as u64 - 52)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComplexPlan {
    pub log2_q0_terms: [f64; 3],
    pub log2_q0: f64,
    pub q: PrimePower,
    pub log2_q: f64,
    #[serde(serialize_with = "ser_big")]
    pub big_d: BigUint,
    pub log2_big_d: f64,
    /// 8D^{−1/2}
    pub lambda: LogReal,
    /// κ₀δ₀/(8+κ₀)
    pub c_term: LogReal,
    pub d_divisible_by_d0: bool,
    pub d_exceeds_half_q: bool,
    pub lambda_below_c_term: bool,
    pub lambda_below_delta0: bool,
    /// q ≥ max{2d₀², D₀, 17}
    pub q_meets_complex_requirements: bool,
}

pub fn plan_complex(base: &BaseCodePlan) -> ComplexPlan {
    let ln2 = std::f64::consts::LN_2;
    let k0 = base.kappa0;
    let eight = LogReal::from_value(8.0);
    let c_term = k0.mul(base.delta0).div(k0.add(eight));
    let third = LogReal::from_value(128.0).mul(k0.add(eight).div(k0.mul(base.delta0)).powf(2.0));
    let log2_q0_terms = [1.0 + base.log2_n0, (2.0 * (base.d0 * base.d0) as f64).log2(), third.log2()];
    let log2_q0 = log2_q0_terms.iter().cloned().fold(f64::MIN, f64::max);
    let q = next_odd_prime_power(&ceil_exp(log2_q0 * ln2));
    let d0 = BigUint::from(base.d0);
    let big_d = (&q.q + 1u32) / &d0 * &d0;
    let ln_d = biguint_ln(&big_d);
    let lambda = LogReal(8f64.ln() - 0.5 * ln_d);
    let log2_q = biguint_ln(&q.q) / ln2;
    ComplexPlan {
        log2_q0_terms,
        log2_q0,
        log2_q,
        d_divisible_by_d0: (&big_d % &d0).is_zero(),
        d_exceeds_half_q: &big_d * 2u32 > q.q,
        lambda_below_c_term: lambda < c_term,
        lambda_below_delta0: lambda < base.delta0,
        q_meets_complex_requirements: log2_q >= base.log2_n0 && q.q >= BigUint::from(2 * base.d0 * base.d0).max(BigUint::from(17u32)),
        q,
        big_d,
        log2_big_d: ln_d / ln2,
        lambda,
        c_term,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalVariant {
    /// constant in front of D^{−1/2}
    pub constant: u32,
    /// δ₀²(δ₀ − kD^{−1/2}); `None` when not positive
    pub distance: Option<LogReal>,
    /// min{1/(4+8D), (1/(4D))(κ₀δ₀/(8+κ₀) − kD^{−1/2})}; `None` when not positive
    pub kappa: Option<LogReal>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupOrder {
    pub i: u32,
    pub log10_order: f64,
    pub digits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FullPlan {
    pub r: f64,
    pub rate_bound: f64,
    pub base: BaseCodePlan,
    pub complex: ComplexPlan,
    pub log2_queries: f64,
    pub variants: [FinalVariant; 2],
    pub group_orders: Vec<GroupOrder>,
}

/// |PSL₂(q^i)| = ½(q^{3i} − q^i) for odd q.
pub fn psl2_order_power(q: &BigUint, i: u32) -> BigUint {
    let qi = q.pow(i);
    (qi.pow(3) - &qi) / 2u32
}

pub fn final_variant(base: &BaseCodePlan, cp: &ComplexPlan, constant: u32) -> FinalVariant {
    let ln_d = cp.log2_big_d * std::f64::consts::LN_2;
    let slack = LogReal((constant as f64).ln() - 0.5 * ln_d);
    let distance = base.delta0.sub(slack).map(|x| base.delta0.powf(2.0).mul(x));
    let first = LogReal(-LogReal(4f64.ln()).add(LogReal(8f64.ln() + ln_d)).ln());
    let kappa = cp.c_term.sub(slack).map(|x| {
        let second = x.div(LogReal(4f64.ln() + ln_d));
        if first < second {
            first
        } else {
            second
        }
    });
    FinalVariant { constant, distance, kappa }
}

pub fn plan_family(r: f64, orders: &[u32]) -> Result<FullPlan, PlannerError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(PlannerError::BadRate(r));
    }
    let r0 = (r + 3.0) / 4.0;
    let base = plan_base_code(r0)?;
    let complex = plan_complex(&base);
    let variants = [final_variant(&base, &complex, 4), final_variant(&base, &complex, 8)];
    let group_orders = orders
        .iter()
        .map(|&i| {
            let g = psl2_order_power(&complex.q.q, i);
            GroupOrder { i, log10_order: biguint_ln(&g) / std::f64::consts::LN_10, digits: g.to_str_radix(10).len() }
        })
        .collect();
    Ok(FullPlan {
        r,
        rate_bound: 4.0 * r0 - 3.0,
        log2_queries: 2.0 * complex.log2_big_d,
        base,
        complex,
        variants,
        group_orders,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub epsilon: f64,
    pub d0: u64,
    pub ln_delta0: f64,
    /// ln(δ₀ / ε²¹)
    pub ln_ratio: f64,
    /// d ln δ₀ / d ln ε from the previous point
    pub slope: Option<f64>,
}

/// δ₀ against ε = 1 − r₀ on a geometric grid.
pub fn delta0_scaling(epsilons: &[f64]) -> Vec<ScalingPoint> {
    let mut out: Vec<ScalingPoint> = Vec::new();
    for &eps in epsilons {
        let p = plan_base_code(1.0 - eps).expect("epsilon in (0,1)");
        let ln_delta0 = p.delta0.ln();
        let slope = out.last().map(|prev| (ln_delta0 - prev.ln_delta0) / (eps.ln() - prev.epsilon.ln()));
        out.push(ScalingPoint { epsilon: eps, d0: p.d0, ln_delta0, ln_ratio: ln_delta0 - 21.0 * eps.ln(), slope });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn log_real_arithmetic() {
        let a = LogReal::from_value(3.0);
        let b = LogReal::from_value(5.0);
        assert!((a.add(b).value() - 8.0).abs() < 1e-12);
        assert!((b.sub(a).unwrap().value() - 2.0).abs() < 1e-12);
        assert!(a.sub(b).is_none());
        assert_eq!(LogReal::from_value(1.5e-300).sci(3), "1.50e-300");
        assert_eq!(LogReal(-1000.0 * std::f64::consts::LN_10).sci(2), "1.0e-1000");
    }

    #[test]
    fn small_prime_powers() {
        assert!(is_probable_prime(&BigUint::from(1_000_000_007u64)));
        assert!(!is_probable_prime(&BigUint::from(3_215_031_751u64)));
        assert_eq!(next_odd_prime_power(&BigUint::from(24u32)).q, BigUint::from(25u32));
        assert_eq!(next_odd_prime_power(&BigUint::from(26u32)).q, BigUint::from(27u32));
        assert_eq!(next_odd_prime_power(&BigUint::from(28u32)).q, BigUint::from(29u32));
        let pp = next_odd_prime_power(&BigUint::from(120u32));
        assert_eq!((pp.q, pp.k), (BigUint::from(121u32), 2));
    }

    #[test]
    fn ceil_exp_covers_target() {
        for l in [1.0f64, 10.0, 44.0, 100.0, 2000.0] {
            let q = ceil_exp(l);
            assert!(biguint_ln(&q) >= l);
            if l > 50.0 {
                assert!(biguint_ln(&q) - l < 1e-6);
            } else {
                assert!(((&q - 1u32).to_f64().unwrap()) < l.exp() * (1.0 + 1e-8));
            }
        }
    }

    #[test]
    fn remark_constant_form() {
        // (2·e^{6.95}·14^{1.05}·0.85^{1.05})^{−20}
        let direct = -20.0 * (2f64.ln() + 6.95 + 1.05 * 14f64.ln() + 1.05 * 0.85f64.ln());
        let p = plan_base_code(0.5).unwrap();
        assert!((p.delta0.ln() - direct).abs() < 1e-9);
        assert!(p.gamma_exceeds_inverse_c && p.d0_exceeds_c0);
        assert!(rel(p.kappa0.ln(), 3.0 * direct + (1.0 / 60.0f64).ln() - 56f64.ln()) < 1e-12);
    }

    #[test]
    fn base_constants_match_high_precision_values() {
        // computed independently at 60 decimal digits
        let p = plan_base_code(0.5).unwrap();
        assert_eq!(p.d0, 14);
        assert!(rel(p.delta0.ln(), -204.870250013666) < 1e-12);
        assert!(rel(p.kappa0.ln(), -622.730446293955) < 1e-12);
        assert_eq!(p.delta0.sci(6), "1.06165e-89");
        assert_eq!(p.kappa0.sci(6), "3.56126e-271");
        let p = plan_base_code(0.875).unwrap();
        assert_eq!(p.d0, 56);
        assert!(rel(p.delta0.ln(), -233.982431597184) < 1e-12);
        assert!(rel(p.kappa0.ln(), -711.453285405628) < 1e-12);
        assert_eq!(p.delta0.sci(6), "2.41391e-102");
        assert_eq!(p.kappa0.sci(6), "1.04656e-309");
    }

    #[test]
    fn full_chain_for_half_rate() {
        let plan = plan_family(0.5, &[1, 2]).unwrap();
        assert_eq!(plan.base.r0, 0.875);
        assert_eq!(plan.base.d0, 56);
        assert!((plan.rate_bound - 0.5).abs() < 1e-15);
        let c = &plan.complex;
        assert!((c.log2_q0 - 2741.0).abs() < 2.0, "{}", c.log2_q0);
        assert!(c.d_divisible_by_d0 && c.d_exceeds_half_q);
        assert!(c.lambda_below_c_term && c.lambda_below_delta0 && c.q_meets_complex_requirements);
        assert!(c.q.q.is_odd() && is_probable_prime(&c.q.p));
        assert!(c.log2_q >= c.log2_q0);
        for v in &plan.variants {
            let dist = v.distance.unwrap();
            assert!(dist <= plan.base.delta0.powf(3.0));
            assert!(plan.base.delta0.powf(3.0).ln() - dist.ln() < 1e-12);
            assert!(v.kappa.unwrap().ln() < 0.0);
        }
        assert!(plan.variants[1].kappa.unwrap() <= plan.variants[0].kappa.unwrap());
        assert!((plan.log2_queries - 2.0 * c.log2_big_d).abs() < 1e-9);
        let g1 = &plan.group_orders[0];
        assert!((g1.log10_order - (3.0 * c.log2_q * 2f64.log10() - 2f64.log10())).abs() < 1e-6);
        assert_eq!(plan.group_orders[1].digits as f64, (plan.group_orders[1].log10_order.floor() + 1.0));
    }

    #[test]
    fn base_rate_half_q0_scale() {
        let p = plan_base_code(0.5).unwrap();
        let c = plan_complex(&p);
        assert!((c.log2_q0 - 2401.0).abs() < 2.0, "{}", c.log2_q0);
    }

    #[test]
    fn scaling_sweep_is_monotone() {
        let pts = delta0_scaling(&[0.5, 0.25, 0.125, 0.0625]);
        assert!(pts.windows(2).all(|w| w[1].ln_delta0 < w[0].ln_delta0));
        assert!(pts[1..].iter().all(|p| p.slope.unwrap() > 0.0));
    }

    #[test]
    fn psl2_order_small() {
        assert_eq!(psl2_order_power(&BigUint::from(5u32), 1), BigUint::from(60u32));
        assert_eq!(psl2_order_power(&BigUint::from(3u32), 2), BigUint::from(360u32));
    }

    #[test]
    fn n0_threshold_brackets() {
        let l = log2_n0(7.0, 0.15, 14.0);
        // the looser closed form in the remark is max{K⁹, 2^400}
        assert!(l > 124.0 && l < 400.0, "{l}");
    }
}
