//! Explicit generator sets: the Morgenstern order-2 family over PSL₂(q^i)
//! with q a power of two, the derived sets A and A′, certification of the
//! no-conjugacy condition by element orders, and degree reduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::complex::check_tnc;
use crate::groups::field::{Elem, Field};
use crate::groups::{GeneratorSet, GroupError, GroupTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("q = {0} is not a power of two")]
    NotPowerOfTwo(u32),
    #[error("degree i = {0} must be even and positive")]
    OddDegree(u32),
    #[error("no admissible element outside F_q with i^2 + i in F_q")]
    NoAdmissibleIota,
    #[error("no field element of degree {0} over F_q")]
    NoFieldGenerator(u32),
    #[error("found {found} solutions of the norm equation, expected {expected}")]
    DegenerateSolutionCount { found: usize, expected: usize },
    #[error("no symmetric subset of size {target} can be obtained from a set of size {size}")]
    NoSymmetricSubset { size: usize, target: usize },
    #[error("no generator pair found after {0} attempts")]
    SearchExhausted(usize),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Morgenstern,
    User,
    Search,
}

#[derive(Clone, Debug)]
pub struct GeneratorPair {
    pub a: GeneratorSet,
    pub b: GeneratorSet,
    pub provenance: Provenance,
}

/// A product set built from the Morgenstern elements, with what was dropped
/// on the way to a set.
#[derive(Clone, Debug)]
pub struct ProductSet {
    pub set: GeneratorSet,
    /// Products in construction order, before deduplication.
    pub products: Vec<u32>,
    /// Number of products equal to an earlier product.
    pub duplicates: usize,
    /// Products equal to the identity (dropped).
    pub identity_hits: usize,
    /// Elements of the set with order exactly 2.
    pub order_two: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct MorgensternFamily {
    pub q: u32,
    pub i: u32,
    pub group: GroupTable,
    /// 𝐢: outside F_q with 𝐢² + 𝐢 ∈ F_q.
    pub iota: Elem,
    pub epsilon: Elem,
    /// Field element of degree i over F_q.
    pub x: Elem,
    /// Solutions (γ, δ) of γ² + γδ + δ²ε = 1, δ-major order.
    pub solutions: Vec<(Elem, Elem)>,
    /// Image of b_j in the group, j = 0..=q.
    pub b_list: Vec<u32>,
}

impl MorgensternFamily {
    pub fn new(q: u32, i: u32, cap: usize) -> Result<Self, GeneratorError> {
        if q < 2 || !q.is_power_of_two() {
            return Err(GeneratorError::NotPowerOfTwo(q));
        }
        if i == 0 || i % 2 == 1 {
            return Err(GeneratorError::OddDegree(i));
        }
        let ell = q.trailing_zeros();
        let field = Field::new(2, ell * i)?;
        let fq = field.subfield(q);
        let in_fq = |y: Elem| fq.binary_search(&y).is_ok();
        let iota = (0..field.order())
            .find(|&y| !in_fq(y) && in_fq(field.add(field.mul(y, y), y)))
            .ok_or(GeneratorError::NoAdmissibleIota)?;
        let epsilon = field.add(field.mul(iota, iota), iota);
        let x = (0..field.order())
            .find(|&y| field.frobenius_orbit(y, q) == i)
            .ok_or(GeneratorError::NoFieldGenerator(i))?;
        let mut solutions = Vec::new();
        for &d in &fq {
            for &g in &fq {
                let lhs = field.add(
                    field.add(field.mul(g, g), field.mul(g, d)),
                    field.mul(field.mul(d, d), epsilon),
                );
                if lhs == 1 {
                    solutions.push((g, d));
                }
            }
        }
        if solutions.len() != q as usize + 1 {
            return Err(GeneratorError::DegenerateSolutionCount {
                found: solutions.len(),
                expected: q as usize + 1,
            });
        }
        let group = GroupTable::psl2(field.clone(), cap)?;
        let psl = group.psl2_data().expect("psl2 group");
        let b_list = solutions
            .iter()
            .map(|&(g, d)| {
                let top = field.add(g, field.mul(d, iota));
                let bottom = field.mul(x, field.add(field.add(g, d), field.mul(d, iota)));
                psl.index_of(&[1, top, bottom, 1])
                    .expect("determinant 1 + x is nonzero")
            })
            .collect();
        Ok(Self {
            q,
            i,
            group,
            iota,
            epsilon,
            x,
            solutions,
            b_list,
        })
    }

    pub fn b(&self) -> Result<GeneratorSet, GeneratorError> {
        Ok(GeneratorSet::new(&self.group, self.b_list.iter().copied())?)
    }

    /// A = {b_t b_s : t ≠ s}.
    pub fn a(&self) -> Result<ProductSet, GeneratorError> {
        let mut products = Vec::new();
        for (t, &bt) in self.b_list.iter().enumerate() {
            for (s, &bs) in self.b_list.iter().enumerate() {
                if t != s {
                    products.push(self.group.mul(bt, bs));
                }
            }
        }
        self.product_set(products)
    }

    /// A′ = {b₀b_j, b_jb₀ : j = 1..q}.
    pub fn a_prime(&self) -> Result<ProductSet, GeneratorError> {
        let b0 = self.b_list[0];
        let mut products = Vec::new();
        for &bj in &self.b_list[1..] {
            products.push(self.group.mul(b0, bj));
            products.push(self.group.mul(bj, b0));
        }
        self.product_set(products)
    }

    fn product_set(&self, products: Vec<u32>) -> Result<ProductSet, GeneratorError> {
        let e = self.group.identity();
        let identity_hits = products.iter().filter(|&&p| p == e).count();
        let mut sorted: Vec<u32> = products.iter().copied().filter(|&p| p != e).collect();
        sorted.sort_unstable();
        sorted.dedup();
        let duplicates = products.len() - identity_hits - sorted.len();
        let set = GeneratorSet::new(&self.group, sorted)?;
        let order_two = set
            .elements()
            .iter()
            .copied()
            .filter(|&g| self.group.element_order(g) == 2)
            .collect();
        Ok(ProductSet {
            set,
            products,
            duplicates,
            identity_hits,
            order_two,
        })
    }

    /// 2√q/(q+1).
    pub fn ramanujan_bound(&self) -> f64 {
        2.0 * (self.q as f64).sqrt() / (self.q as f64 + 1.0)
    }

    /// (3q−1)/(q²+q), the bound for Cay(G, A).
    pub fn a_bound(&self) -> f64 {
        let q = self.q as f64;
        (3.0 * q - 1.0) / (q * q + q)
    }

    /// 3√(2q−1)/(2q), the bound for Cay(G, A′).
    pub fn a_prime_bound(&self) -> f64 {
        let q = self.q as f64;
        3.0 * (2.0 * q - 1.0).sqrt() / (2.0 * q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TncCertificate {
    /// One set consists of involutions and the other has none; conjugation
    /// preserves order, so no a is conjugate to any b.
    ByOrders,
    /// Orders do not decide; an exhaustive check is needed.
    Deferred,
}

pub fn tnc_by_orders(group: &GroupTable, a: &GeneratorSet, b: &GeneratorSet) -> TncCertificate {
    let all = |s: &GeneratorSet, two: bool| {
        s.elements()
            .iter()
            .all(|&g| (group.element_order(g) == 2) == two)
    };
    if (all(b, true) && all(a, false)) || (all(a, true) && all(b, false)) {
        TncCertificate::ByOrders
    } else {
        TncCertificate::Deferred
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DegreeReduction {
    pub reduced: GeneratorSet,
    pub removed: Vec<u32>,
    /// λ + 2|S∖S′|/|S′|.
    pub bound: f64,
    /// 4λ when |S∖S′| ≤ 2|S|^{1/2} and 2|S|^{−1/2} ≤ λ ≤ 1/3.
    pub bound_small: Option<f64>,
}

/// Removes inverse-closed units (involutions singly, other elements with their
/// inverse) from the lexicographic end until `target` elements remain.
pub fn degree_reduce(
    group: &GroupTable,
    s: &GeneratorSet,
    target: usize,
    lambda: f64,
) -> Result<DegreeReduction, GeneratorError> {
    let size = s.len();
    let err = GeneratorError::NoSymmetricSubset { size, target };
    if target > size || target == 0 {
        return Err(err);
    }
    let mut units: Vec<Vec<u32>> = Vec::new();
    for &x in s.elements() {
        let xi = group.inv(x);
        if xi == x {
            units.push(vec![x]);
        } else if x < xi {
            units.push(vec![x, xi]);
        }
    }
    let feasible = |rem: usize, singles: usize, pairs: usize| {
        rem <= singles + 2 * pairs && (rem % 2 == 0 || singles >= 1)
    };
    let count_before = |k: usize| {
        let singles = units[..k].iter().filter(|u| u.len() == 1).count();
        (singles, k - singles)
    };
    let mut rem = size - target;
    let (s0, p0) = count_before(units.len());
    if !feasible(rem, s0, p0) {
        return Err(err);
    }
    let mut removed = Vec::new();
    for k in (0..units.len()).rev() {
        if rem == 0 {
            break;
        }
        let u = &units[k];
        let (singles, pairs) = count_before(k);
        if u.len() <= rem && feasible(rem - u.len(), singles, pairs) {
            removed.extend_from_slice(u);
            rem -= u.len();
        }
    }
    debug_assert_eq!(rem, 0);
    removed.sort_unstable();
    let reduced = GeneratorSet::new(
        group,
        s.elements().iter().copied().filter(|x| removed.binary_search(x).is_err()),
    )?;
    let diff = removed.len() as f64;
    let bound = lambda + 2.0 * diff / reduced.len() as f64;
    let sz = size as f64;
    let bound_small = (diff <= 2.0 * sz.sqrt() && 2.0 / sz.sqrt() <= lambda && lambda <= 1.0 / 3.0)
        .then_some(4.0 * lambda);
    Ok(DegreeReduction {
        reduced,
        removed,
        bound,
        bound_small,
    })
}

/// Seeded random search for symmetric sets of the given sizes satisfying the
/// no-conjugacy condition.
pub fn search_pair(
    group: &GroupTable,
    size_a: usize,
    size_b: usize,
    seed: u64,
    attempts: usize,
) -> Result<GeneratorPair, GeneratorError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = group.order() as u32;
    let draw = |rng: &mut ChaCha8Rng, size: usize| -> Option<GeneratorSet> {
        let mut elems: Vec<u32> = Vec::new();
        for _ in 0..8 * size + 8 {
            if elems.len() == size {
                break;
            }
            let x = rng.random_range(0..n);
            if x == group.identity() || elems.contains(&x) {
                continue;
            }
            let xi = group.inv(x);
            if xi == x {
                elems.push(x);
            } else if elems.len() + 2 <= size {
                elems.push(x);
                elems.push(xi);
            }
        }
        (elems.len() == size).then(|| GeneratorSet::new(group, elems).ok()).flatten()
    };
    for _ in 0..attempts {
        let (Some(a), Some(b)) = (draw(&mut rng, size_a), draw(&mut rng, size_b)) else {
            continue;
        };
        if check_tnc(group, &a, &b).is_empty() {
            return Ok(GeneratorPair {
                a,
                b,
                provenance: Provenance::Search,
            });
        }
    }
    Err(GeneratorError::SearchExhausted(attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::DEFAULT_ORDER_CAP;

    #[test]
    fn solutions_over_f2() {
        let m = MorgensternFamily::new(2, 4, DEFAULT_ORDER_CAP).unwrap();
        // oracle: direct enumeration of γ² + γδ + δ²ε = 1 over {0,1} with ε = 1
        assert_eq!(m.epsilon, 1);
        let mut oracle = Vec::new();
        for d in 0..2u32 {
            for g in 0..2u32 {
                if (g * g + g * d + d * d) % 2 == 1 {
                    oracle.push((g, d));
                }
            }
        }
        assert_eq!(m.solutions, oracle);
        assert_eq!(m.solutions, vec![(1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn b_elements_are_involutions() {
        for (q, i) in [(2, 2), (2, 4), (4, 2)] {
            let m = MorgensternFamily::new(q, i, DEFAULT_ORDER_CAP).unwrap();
            assert_eq!(m.b_list.len(), q as usize + 1);
            for &b in &m.b_list {
                assert_eq!(m.group.mul(b, b), m.group.identity());
                assert_eq!(m.group.element_order(b), 2);
            }
        }
    }

    #[test]
    fn a_sets_for_q2_i4() {
        let m = MorgensternFamily::new(2, 4, DEFAULT_ORDER_CAP).unwrap();
        let a = m.a().unwrap();
        assert_eq!(a.products.len(), 6);
        assert_eq!(a.set.len() + a.duplicates + a.identity_hits, 6);
        let ap = m.a_prime().unwrap();
        assert_eq!(ap.products.len(), 4);
        // (b₀b_j)⁻¹ = b_jb₀
        for pair in ap.products.chunks(2) {
            assert_eq!(m.group.inv(pair[0]), pair[1]);
        }
        assert_eq!(
            tnc_by_orders(&m.group, &ap.set, &m.b().unwrap()),
            if ap.order_two.is_empty() { TncCertificate::ByOrders } else { TncCertificate::Deferred }
        );
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(MorgensternFamily::new(3, 2, 10).unwrap_err(), GeneratorError::NotPowerOfTwo(3));
        assert_eq!(MorgensternFamily::new(2, 3, 10).unwrap_err(), GeneratorError::OddDegree(3));
    }

    #[test]
    fn orders_defer_in_abelian_case() {
        let z8 = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&z8, [1, 7]).unwrap();
        let b = GeneratorSet::new(&z8, [3, 5]).unwrap();
        assert_eq!(tnc_by_orders(&z8, &a, &b), TncCertificate::Deferred);
        assert!(check_tnc(&z8, &a, &b).is_empty());
        assert_eq!(tnc_by_orders(&z8, &a, &a), TncCertificate::Deferred);
        assert!(!check_tnc(&z8, &a, &a).is_empty());
    }

    #[test]
    fn degree_reduction_examples() {
        // in Z12 the only involution is 6
        let z12 = GroupTable::cyclic(12).unwrap();
        let s = GeneratorSet::new(&z12, [1, 11, 5, 7, 6, 4, 8]).unwrap();
        let r = degree_reduce(&z12, &s, 6, 0.5).unwrap();
        assert_eq!(r.removed, vec![6]);
        assert!((r.bound - (0.5 + 2.0 / 6.0)).abs() < 1e-12);
        let r = degree_reduce(&z12, &s, 7, 0.5).unwrap();
        assert_eq!(r.reduced, s);
        assert_eq!(r.bound, 0.5);
        // pairs go from the lexicographic end: {5,7} before {4,8} before {1,11}
        let r = degree_reduce(&z12, &s, 5, 0.5).unwrap();
        assert_eq!(r.removed, vec![5, 7]);
        let s = GeneratorSet::new(&z12, [1, 11, 5, 7]).unwrap();
        assert!(degree_reduce(&z12, &s, 3, 0.5).is_err());
    }

    #[test]
    fn one_involution_out_of_six() {
        // (Z/2)^3 as disjoint transpositions: every non-identity element is an involution
        let g = GroupTable::permutations(
            &[vec![1, 0, 2, 3, 4, 5], vec![0, 1, 3, 2, 4, 5], vec![0, 1, 2, 3, 5, 4]],
            100,
        )
        .unwrap();
        let six: Vec<u32> = (0..8).filter(|&x| x != g.identity()).take(6).collect();
        let s = GeneratorSet::new(&g, six).unwrap();
        let r = degree_reduce(&g, &s, 5, 0.5).unwrap();
        assert_eq!(r.removed.len(), 1);
        assert!((r.bound - 0.9).abs() < 1e-12);
    }

    #[test]
    fn search_finds_tnc_pair() {
        let g = GroupTable::psl2(Field::new(2, 2).unwrap(), 1000).unwrap();
        let pair = search_pair(&g, 4, 3, 5, 1000).unwrap();
        assert_eq!((pair.a.len(), pair.b.len()), (4, 3));
        assert!(check_tnc(&g, &pair.a, &pair.b).is_empty());
    }
}
