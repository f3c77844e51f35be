//! Finite groups as indexed multiplication structures.

pub mod field;
pub mod psl2;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use field::Field;
pub use psl2::Psl2;

/// Default largest group order.
pub const DEFAULT_ORDER_CAP: usize = 1_000_000;
/// Groups up to this order get a full multiplication table.
pub const DENSE_TABLE_LIMIT: usize = 1024;
/// Full associativity is checked up to this order; above it a sample.
pub const FULL_ASSOCIATIVITY_LIMIT: usize = 512;
pub const ASSOCIATIVITY_SAMPLES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("the modulus polynomial is reducible")]
    ReducibleModulus,
    #[error("bad modulus: {0}")]
    BadModulus(String),
    #[error("field order exceeds 2^16")]
    FieldTooLarge,
    #[error("group order {reached} exceeds the cap {cap}")]
    OrderCapExceeded { cap: usize, reached: usize },
    #[error("group axiom violated: {0}")]
    AxiomViolation(String),
    #[error("element index {0} is out of range")]
    BadIndex(u32),
    #[error("generator set is not closed under inverses: {0} lacks its inverse")]
    NonSymmetricSet(u32),
    #[error("generator set contains the identity")]
    IdentityInSet,
    #[error("malformed group text: {0}")]
    Parse(String),
}

type MulFn = Arc<dyn Fn(u32, u32) -> u32 + Send + Sync>;
type LabelFn = Arc<dyn Fn(u32) -> String + Send + Sync>;

#[derive(Clone)]
enum MulRepr {
    Dense(Arc<Vec<u32>>),
    Cyclic(u32),
    /// Index `k + n·e` is `r^k s^e`.
    Dihedral(u32),
    Func(MulFn),
}

/// A finite group on indices `0..order`.
#[derive(Clone)]
pub struct GroupTable {
    name: String,
    order: usize,
    identity: u32,
    inverse: Arc<Vec<u32>>,
    mul: MulRepr,
    label: Option<LabelFn>,
    psl2: Option<Arc<Psl2>>,
}

impl fmt::Debug for GroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupTable")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("identity", &self.identity)
            .finish()
    }
}

impl GroupTable {
    fn from_mul(
        name: String,
        order: usize,
        identity: u32,
        mul: MulFn,
        label: Option<LabelFn>,
    ) -> Self {
        let mut g = GroupTable {
            name,
            order,
            identity,
            inverse: Arc::new(Vec::new()),
            mul: MulRepr::Func(mul.clone()),
            label,
            psl2: None,
        };
        if order <= DENSE_TABLE_LIMIT {
            let mut table = Vec::with_capacity(order * order);
            for a in 0..order as u32 {
                for b in 0..order as u32 {
                    table.push(mul(a, b));
                }
            }
            g.mul = MulRepr::Dense(Arc::new(table));
        }
        g.inverse = Arc::new(g.compute_inverses());
        g
    }

    fn compute_inverses(&self) -> Vec<u32> {
        match self.mul {
            MulRepr::Cyclic(n) => (0..n).map(|a| (n - a) % n).collect(),
            MulRepr::Dihedral(n) => (0..2 * n)
                .map(|x| if x < n { (n - x) % n } else { x })
                .collect(),
            _ => {
                if let Some(p) = &self.psl2 {
                    return (0..self.order as u32).map(|g| p.inv(g)).collect();
                }
                // every element has finite order, so g^(ord-1) is the inverse
                (0..self.order as u32)
                    .map(|g| {
                        let mut prev = self.identity;
                        let mut x = g;
                        while x != self.identity {
                            prev = x;
                            x = self.mul(x, g);
                        }
                        prev
                    })
                    .collect()
            }
        }
    }

    /// Z_n under addition.
    pub fn cyclic(n: u32) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::AxiomViolation("cyclic group of order 0".into()));
        }
        let mut g = GroupTable {
            name: format!("Z{n}"),
            order: n as usize,
            identity: 0,
            inverse: Arc::new(Vec::new()),
            mul: MulRepr::Cyclic(n),
            label: None,
            psl2: None,
        };
        g.inverse = Arc::new(g.compute_inverses());
        Ok(g)
    }

    /// Dihedral group of order 2n; index `k + n·e` is `r^k s^e`.
    pub fn dihedral(n: u32) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::AxiomViolation("dihedral group with n = 0".into()));
        }
        let mut g = GroupTable {
            name: format!("D{n}"),
            order: 2 * n as usize,
            identity: 0,
            inverse: Arc::new(Vec::new()),
            mul: MulRepr::Dihedral(n),
            label: Some(Arc::new(move |x| {
                if x < n {
                    format!("r^{x}")
                } else {
                    format!("r^{}s", x - n)
                }
            })),
            psl2: None,
        };
        g.inverse = Arc::new(g.compute_inverses());
        Ok(g)
    }

    /// PSL₂ over `field`, refusing orders above `cap`.
    pub fn psl2(field: Field, cap: usize) -> Result<Self, GroupError> {
        let name = format!(
            "PSL2({}^{})",
            field.characteristic(),
            field.degree()
        );
        let p = Arc::new(Psl2::new(field, cap)?);
        let order = p.order();
        let identity = p.identity();
        let pm = p.clone();
        let pl = p.clone();
        let mut g = GroupTable {
            name,
            order,
            identity,
            inverse: Arc::new(Vec::new()),
            mul: MulRepr::Func(Arc::new(move |a, b| pm.mul(a, b))),
            label: Some(Arc::new(move |x| pl.label(x))),
            psl2: Some(p),
        };
        if order <= DENSE_TABLE_LIMIT {
            g = Self::from_mul(g.name.clone(), order, identity, Self::func_of(&g), g.label.clone())
                .with_psl2(g.psl2.clone());
        } else {
            g.inverse = Arc::new(g.compute_inverses());
        }
        Ok(g)
    }

    fn func_of(g: &GroupTable) -> MulFn {
        match &g.mul {
            MulRepr::Func(f) => f.clone(),
            _ => unreachable!(),
        }
    }

    fn with_psl2(mut self, p: Option<Arc<Psl2>>) -> Self {
        self.psl2 = p;
        self
    }

    /// Permutation group generated by `gens`, each a permutation of
    /// `0..degree` in image form. Composition is `(p·q)(i) = p[q[i]]`.
    pub fn permutations(gens: &[Vec<u32>], cap: usize) -> Result<Self, GroupError> {
        let degree = gens.first().map_or(0, |g| g.len());
        for g in gens {
            let mut seen = vec![false; degree];
            if g.len() != degree || g.iter().any(|&x| x as usize >= degree || std::mem::replace(&mut seen[x as usize], true)) {
                return Err(GroupError::AxiomViolation(format!(
                    "{g:?} is not a permutation of 0..{degree}"
                )));
            }
        }
        let identity: Vec<u32> = (0..degree as u32).collect();
        let compose = |p: &Vec<u32>, q: &Vec<u32>| q.iter().map(|&i| p[i as usize]).collect::<Vec<u32>>();
        let (table, _) = group_from_closure(gens.to_vec(), identity, compose, cap, format!("Perm({degree})"), |p| format!("{p:?}"))?;
        Ok(table)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> u32 {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mul {
            MulRepr::Dense(t) => t[a as usize * self.order + b as usize],
            MulRepr::Cyclic(n) => ((a as u64 + b as u64) % *n as u64) as u32,
            MulRepr::Dihedral(n) => {
                let n = *n;
                let (ka, ea) = (a % n, a / n);
                let (kb, eb) = (b % n, b / n);
                let k = if ea == 0 { (ka + kb) % n } else { (ka + n - kb) % n };
                k + n * ((ea + eb) % 2)
            }
            MulRepr::Func(f) => f(a, b),
        }
    }

    #[inline]
    pub fn inv(&self, a: u32) -> u32 {
        self.inverse[a as usize]
    }

    /// `g⁻¹ a g`.
    pub fn conjugate(&self, a: u32, g: u32) -> u32 {
        self.mul(self.mul(self.inv(g), a), g)
    }

    pub fn label(&self, g: u32) -> String {
        match &self.label {
            Some(f) => f(g),
            None => g.to_string(),
        }
    }

    pub fn psl2_data(&self) -> Option<&Psl2> {
        self.psl2.as_deref()
    }

    pub fn has_dense_table(&self) -> bool {
        matches!(self.mul, MulRepr::Dense(_))
    }

    /// Smallest `n ≥ 1` with `g^n = e`.
    pub fn element_order(&self, g: u32) -> u64 {
        let mut x = g;
        let mut n = 1;
        while x != self.identity {
            x = self.mul(x, g);
            n += 1;
        }
        n
    }

    /// Elements of the subgroup generated by `gens`, sorted.
    pub fn generated_subgroup(&self, gens: &[u32]) -> Vec<u32> {
        let mut seen = vec![false; self.order];
        let mut queue = VecDeque::from([self.identity]);
        seen[self.identity as usize] = true;
        while let Some(x) = queue.pop_front() {
            for &s in gens {
                let y = self.mul(x, s);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    queue.push_back(y);
                }
            }
        }
        (0..self.order as u32).filter(|&g| seen[g as usize]).collect()
    }

    pub fn generates(&self, gens: &[u32]) -> bool {
        self.generated_subgroup(gens).len() == self.order
    }

    /// Checks identity and inverse laws for every element and associativity
    /// exhaustively for small orders, on seeded random triples otherwise.
    pub fn verify(&self, seed: u64) -> Result<(), GroupError> {
        let e = self.identity;
        for g in 0..self.order as u32 {
            if self.mul(e, g) != g || self.mul(g, e) != g {
                return Err(GroupError::AxiomViolation(format!("identity law fails at {g}")));
            }
            let gi = self.inv(g);
            if self.mul(g, gi) != e || self.mul(gi, g) != e {
                return Err(GroupError::AxiomViolation(format!("inverse law fails at {g}")));
            }
        }
        let check = |a: u32, b: u32, c: u32| -> Result<(), GroupError> {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(GroupError::AxiomViolation(format!(
                    "associativity fails at ({a},{b},{c})"
                )));
            }
            Ok(())
        };
        let n = self.order as u32;
        if self.order <= FULL_ASSOCIATIVITY_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mul(a, b);
                    for c in 0..n {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return check(a, b, c);
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..ASSOCIATIVITY_SAMPLES {
                check(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))?;
            }
        }
        Ok(())
    }
}

/// Closes `seeds` under `mul` and returns the group on the sorted element
/// list together with that list.
pub fn group_from_closure<T, M, L>(
    seeds: Vec<T>,
    identity: T,
    mul: M,
    cap: usize,
    name: String,
    label: L,
) -> Result<(GroupTable, Arc<Vec<T>>), GroupError>
where
    T: Clone + Ord + Hash + Send + Sync + 'static,
    M: Fn(&T, &T) -> T + Send + Sync + 'static,
    L: Fn(&T) -> String + Send + Sync + 'static,
{
    let mut found: HashMap<T, ()> = HashMap::new();
    found.insert(identity.clone(), ());
    let mut queue = VecDeque::from([identity.clone()]);
    while let Some(x) = queue.pop_front() {
        for s in &seeds {
            let y = mul(&x, s);
            if !found.contains_key(&y) {
                if found.len() >= cap {
                    return Err(GroupError::OrderCapExceeded {
                        cap,
                        reached: found.len() + 1,
                    });
                }
                found.insert(y.clone(), ());
                queue.push_back(y);
            }
        }
    }
    let mut elements: Vec<T> = found.into_keys().collect();
    elements.sort();
    let elements = Arc::new(elements);
    let index: Arc<HashMap<T, u32>> = Arc::new(
        elements
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), i as u32))
            .collect(),
    );
    let id = index[&identity];
    let (em, im) = (elements.clone(), index.clone());
    let mul_fn: MulFn = Arc::new(move |a, b| im[&mul(&em[a as usize], &em[b as usize])]);
    let el = elements.clone();
    let label_fn: LabelFn = Arc::new(move |g| label(&el[g as usize]));
    let order = elements.len();
    Ok((GroupTable::from_mul(name, order, id, mul_fn, Some(label_fn)), elements))
}

/// A symmetric, identity-free set of group elements, sorted and deduplicated.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSet {
    elements: Vec<u32>,
}

impl GeneratorSet {
    pub fn new(group: &GroupTable, elements: impl IntoIterator<Item = u32>) -> Result<Self, GroupError> {
        let mut elements: Vec<u32> = elements.into_iter().collect();
        elements.sort_unstable();
        elements.dedup();
        for &x in &elements {
            if x as usize >= group.order() {
                return Err(GroupError::BadIndex(x));
            }
            if x == group.identity() {
                return Err(GroupError::IdentityInSet);
            }
            if elements.binary_search(&group.inv(x)).is_err() {
                return Err(GroupError::NonSymmetricSet(x));
            }
        }
        Ok(Self { elements })
    }

    /// Closes `elements` under inverses before validating.
    pub fn symmetrized(group: &GroupTable, elements: impl IntoIterator<Item = u32>) -> Result<Self, GroupError> {
        let mut all = Vec::new();
        for x in elements {
            all.push(x);
            if (x as usize) < group.order() {
                all.push(group.inv(x));
            }
        }
        Self::new(group, all)
    }

    #[inline]
    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    #[inline]
    pub fn contains(&self, x: u32) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Position of `x` in the sorted list.
    #[inline]
    pub fn position(&self, x: u32) -> Option<usize> {
        self.elements.binary_search(&x).ok()
    }
}

/// Plain-text header for a group and generator sets: order, name, one label
/// per generator. Multiplication tables are not written.
pub fn export_text(group: &GroupTable, sets: &[(&str, &GeneratorSet)]) -> String {
    let mut out = format!("group {}\norder {}\n", group.name(), group.order());
    for (name, set) in sets {
        let idx: Vec<String> = set.elements().iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("set {name} {}\n", idx.join(" ")));
        for &x in set.elements() {
            out.push_str(&format!("  {x} {}\n", group.label(x)));
        }
    }
    out
}

/// Reads back the group name, order and generator index lists written by
/// [`export_text`].
pub fn import_text(text: &str) -> Result<(String, usize, Vec<(String, Vec<u32>)>), GroupError> {
    let mut name = None;
    let mut order = None;
    let mut sets = Vec::new();
    for line in text.lines() {
        if line.starts_with("  ") || line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("group") => name = it.next().map(str::to_string),
            Some("order") => {
                order = Some(
                    it.next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| GroupError::Parse("bad order line".into()))?,
                )
            }
            Some("set") => {
                let set_name = it
                    .next()
                    .ok_or_else(|| GroupError::Parse("set without a name".into()))?
                    .to_string();
                let idx = it
                    .map(|s| s.parse().map_err(|_| GroupError::Parse(format!("bad index {s}"))))
                    .collect::<Result<Vec<u32>, _>>()?;
                sets.push((set_name, idx));
            }
            Some(other) => return Err(GroupError::Parse(format!("unknown line {other}"))),
            None => {}
        }
    }
    Ok((
        name.ok_or_else(|| GroupError::Parse("missing group line".into()))?,
        order.ok_or_else(|| GroupError::Parse("missing order line".into()))?,
        sets,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cyclic_and_orders() {
        let z8 = GroupTable::cyclic(8).unwrap();
        assert_eq!(z8.order(), 8);
        assert_eq!(z8.element_order(0), 1);
        assert_eq!(z8.element_order(3), 8);
        assert_eq!(z8.element_order(4), 2);
        assert_eq!(z8.generated_subgroup(&[1]).len(), 8);
        z8.verify(0).unwrap();
    }

    #[test]
    fn symmetric_group_from_transpositions() {
        let s3 = GroupTable::permutations(&[vec![1, 0, 2], vec![0, 2, 1]], 100).unwrap();
        assert_eq!(s3.order(), 6);
        s3.verify(0).unwrap();
        assert!(s3.has_dense_table());
    }

    #[test]
    fn closure_respects_cap() {
        let err = GroupTable::permutations(&[vec![1, 2, 3, 4, 0], vec![1, 0, 2, 3, 4]], 50).unwrap_err();
        assert!(matches!(err, GroupError::OrderCapExceeded { cap: 50, .. }));
    }

    #[test]
    fn dihedral_is_a_group() {
        let d5 = GroupTable::dihedral(5).unwrap();
        assert_eq!(d5.order(), 10);
        d5.verify(0).unwrap();
        // s r s = r^{-1}
        assert_eq!(d5.mul(d5.mul(5, 1), 5), 4);
        // oracle: the same group as permutations of a pentagon
        let perm = GroupTable::permutations(&[vec![1, 2, 3, 4, 0], vec![0, 4, 3, 2, 1]], 100).unwrap();
        assert_eq!(perm.order(), 10);
    }

    #[test]
    fn psl2_groups_verify() {
        for (p, k) in [(2, 1), (3, 1), (2, 2), (5, 1)] {
            let g = GroupTable::psl2(Field::new(p, k).unwrap(), DEFAULT_ORDER_CAP).unwrap();
            g.verify(1).unwrap();
        }
        let g = GroupTable::psl2(Field::new(2, 4).unwrap(), DEFAULT_ORDER_CAP).unwrap();
        assert_eq!(g.order(), 4080);
        assert!(!g.has_dense_table());
        g.verify(1).unwrap();
    }

    #[test]
    fn lagrange_on_psl2_16() {
        let g = GroupTable::psl2(Field::new(2, 4).unwrap(), DEFAULT_ORDER_CAP).unwrap();
        for x in 0..g.order() as u32 {
            assert_eq!(g.order() as u64 % g.element_order(x), 0);
        }
    }

    #[test]
    fn generator_set_validation() {
        let z8 = GroupTable::cyclic(8).unwrap();
        assert_eq!(GeneratorSet::new(&z8, [7, 1]).unwrap().elements(), &[1, 7]);
        assert_eq!(GeneratorSet::new(&z8, [1]), Err(GroupError::NonSymmetricSet(1)));
        assert_eq!(GeneratorSet::new(&z8, [0, 4]), Err(GroupError::IdentityInSet));
        assert_eq!(GeneratorSet::symmetrized(&z8, [3]).unwrap().elements(), &[3, 5]);
    }

    #[test]
    fn text_round_trip() {
        let z8 = GroupTable::cyclic(8).unwrap();
        let a = GeneratorSet::new(&z8, [1, 7]).unwrap();
        let b = GeneratorSet::new(&z8, [3, 5]).unwrap();
        let text = export_text(&z8, &[("A", &a), ("B", &b)]);
        let (name, order, sets) = import_text(&text).unwrap();
        assert_eq!(name, "Z8");
        assert_eq!(order, 8);
        assert_eq!(sets, vec![("A".into(), vec![1, 7]), ("B".into(), vec![3, 5])]);
    }

    proptest! {
        #[test]
        fn orders_divide_group_order(n in 1u32..60, g in any::<u32>()) {
            let d = GroupTable::dihedral(n).unwrap();
            let g = g % d.order() as u32;
            prop_assert_eq!(d.order() as u64 % d.element_order(g), 0);
            prop_assert_eq!(d.mul(g, d.inv(g)), d.identity());
        }
    }
}
