//! Finite fields GF(p^k) with table-driven multiplication.
//!
//! An element is an index `Σ c_j p^j` where `c_0 + c_1 t + … + c_{k-1} t^{k-1}`
//! is its polynomial representative modulo the field modulus.

use super::GroupError;

/// Largest field order accepted. Matrix entries are packed into 16 bits.
pub const MAX_FIELD_ORDER: u32 = 1 << 16;

pub type Elem = u32;

#[derive(Clone, Debug)]
pub struct Field {
    p: u32,
    k: u32,
    q: u32,
    /// Monic modulus, low coefficient first, length `k + 1`.
    modulus: Vec<u32>,
    primitive: Elem,
    /// `exp[i] = primitive^i`, doubled so products of logs need no reduction.
    exp: Vec<Elem>,
    /// `log[0]` is unused.
    log: Vec<u32>,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Polynomial remainder over F_p. Both inputs are low-coefficient first.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    let lead_inv = mod_inv(m[dm], p);
    while r.len() > dm {
        let top = *r.last().unwrap();
        if top != 0 {
            let f = (top as u64 * lead_inv as u64 % p as u64) as u32;
            let shift = r.len() - 1 - dm;
            for (j, &mj) in m.iter().enumerate() {
                let sub = (f as u64 * mj as u64 % p as u64) as u32;
                r[shift + j] = (r[shift + j] + p - sub) % p;
            }
        }
        r.pop();
    }
    r
}

fn mod_inv(a: u32, p: u32) -> u32 {
    // Fermat, p prime
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

/// Coefficients of `t` written in base `p`, padded to `len`.
fn digits(mut t: u64, p: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((t % p as u64) as u32);
        t /= p as u64;
    }
    out
}

/// True when the monic polynomial `m` (degree ≥ 1) has no monic factor of
/// degree between 1 and deg/2.
pub fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    if deg == 0 {
        return false;
    }
    for d in 1..=deg / 2 {
        for t in 0..(p as u64).pow(d as u32) {
            let mut f = digits(t, p, d);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// GF(p^k) with the default modulus: the first irreducible monic
    /// `x^k + lower(t)` for `t = 0, 1, 2, …`, where `lower(t)` has the base-p
    /// digits of `t` as coefficients.
    pub fn new(p: u32, k: u32) -> Result<Self, GroupError> {
        Self::check_params(p, k)?;
        let q = p.pow(k) as u64;
        for t in 0..q {
            let mut m = digits(t, p, k as usize);
            m.push(1);
            if is_irreducible(&m, p) {
                return Self::build(p, k, m);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    /// GF(p^k) with an explicit monic modulus given low coefficient first.
    pub fn with_modulus(p: u32, k: u32, modulus: &[u32]) -> Result<Self, GroupError> {
        Self::check_params(p, k)?;
        if modulus.len() != k as usize + 1 || *modulus.last().unwrap() != 1 {
            return Err(GroupError::BadModulus(format!(
                "expected a monic polynomial of degree {k}"
            )));
        }
        if modulus.iter().any(|&c| c >= p) {
            return Err(GroupError::BadModulus(format!(
                "coefficients must lie in 0..{p}"
            )));
        }
        if !is_irreducible(modulus, p) {
            return Err(GroupError::ReducibleModulus);
        }
        Self::build(p, k, modulus.to_vec())
    }

    fn check_params(p: u32, k: u32) -> Result<(), GroupError> {
        if !is_prime(p as u64) {
            return Err(GroupError::NotPrime(p));
        }
        if k == 0 {
            return Err(GroupError::BadModulus("degree must be at least 1".into()));
        }
        match p.checked_pow(k) {
            Some(q) if q <= MAX_FIELD_ORDER => Ok(()),
            _ => Err(GroupError::FieldTooLarge),
        }
    }

    fn build(p: u32, k: u32, modulus: Vec<u32>) -> Result<Self, GroupError> {
        let q = p.pow(k);
        let mut field = Field {
            p,
            k,
            q,
            modulus,
            primitive: 0,
            exp: Vec::new(),
            log: Vec::new(),
        };
        let factors = prime_factors(q as u64 - 1);
        let primitive = (1..q)
            .find(|&g| {
                factors
                    .iter()
                    .all(|&r| field.slow_pow(g, (q as u64 - 1) / r) != 1)
            })
            .ok_or(GroupError::ReducibleModulus)?;
        let mut exp = Vec::with_capacity(2 * (q as usize - 1));
        let mut log = vec![0u32; q as usize];
        let mut x = 1;
        for i in 0..q - 1 {
            exp.push(x);
            log[x as usize] = i;
            x = field.slow_mul(x, primitive);
        }
        if x != 1 {
            return Err(GroupError::ReducibleModulus);
        }
        exp.extend_from_within(..);
        field.primitive = primitive;
        field.exp = exp;
        field.log = log;
        Ok(field)
    }

    fn slow_mul(&self, a: Elem, b: Elem) -> Elem {
        let k = self.k as usize;
        let (ca, cb) = (self.coeffs(a), self.coeffs(b));
        let mut prod = vec![0u32; 2 * k - 1];
        for (i, &x) in ca.iter().enumerate() {
            for (j, &y) in cb.iter().enumerate() {
                prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % self.p as u64) as u32;
            }
        }
        self.from_coeffs(&poly_rem(&prod, &self.modulus, self.p))
    }

    fn slow_pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut result = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                result = self.slow_mul(result, base);
            }
            base = self.slow_mul(base, base);
            e >>= 1;
        }
        result
    }

    #[inline]
    pub fn characteristic(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn primitive_element(&self) -> Elem {
        self.primitive
    }

    pub fn coeffs(&self, a: Elem) -> Vec<u32> {
        digits(a as u64, self.p, self.k as usize)
    }

    pub fn from_coeffs(&self, c: &[u32]) -> Elem {
        c.iter().rev().fold(0, |acc, &x| acc * self.p + x % self.p)
    }

    /// The element `n · 1`.
    pub fn from_int(&self, n: i64) -> Elem {
        n.rem_euclid(self.p as i64) as Elem
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.p == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let (mut out, mut place) = (0, 1);
        while a > 0 || b > 0 {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        if self.p == 2 {
            return a;
        }
        let mut a = a;
        let (mut out, mut place) = (0, 1);
        while a > 0 {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        let l = self.log[a as usize];
        Some(self.exp[((self.q - 1 - l) % (self.q - 1)) as usize])
    }

    pub fn div(&self, a: Elem, b: Elem) -> Option<Elem> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64 * (e % (self.q as u64 - 1));
        self.exp[(l % (self.q as u64 - 1)) as usize]
    }

    /// Multiplicative order of a nonzero element.
    pub fn mult_order(&self, a: Elem) -> Option<u64> {
        if a == 0 {
            return None;
        }
        let n = self.q as u64 - 1;
        let l = self.log[a as usize] as u64;
        Some(n / num_integer::gcd(n, l))
    }

    /// A square root when one exists.
    pub fn sqrt(&self, a: Elem) -> Option<Elem> {
        (0..self.q).find(|&x| self.mul(x, x) == a)
    }

    /// Elements of the subfield of order `sub` (those with `y^sub = y`).
    pub fn subfield(&self, sub: u32) -> Vec<Elem> {
        (0..self.q).filter(|&y| self.pow(y, sub as u64) == y).collect()
    }

    /// Size of the orbit of `y` under `y ↦ y^sub`; this is the degree of `y`
    /// over the subfield of order `sub`.
    pub fn frobenius_orbit(&self, y: Elem, sub: u32) -> u32 {
        let mut z = self.pow(y, sub as u64);
        let mut n = 1;
        while z != y {
            z = self.pow(z, sub as u64);
            n += 1;
        }
        n
    }
}
