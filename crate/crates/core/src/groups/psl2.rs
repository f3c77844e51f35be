//! PSL₂ over a finite field as projective 2×2 matrices.
//!
//! In even characteristic every invertible matrix is scaled so its first
//! nonzero entry (row-major) is 1; the resulting classes form PGL₂ = PSL₂ =
//! SL₂. In odd characteristic elements are SL₂ matrices modulo ±1, stored as
//! the lexicographically smaller of the two lifts.

use super::field::{Elem, Field};
use super::GroupError;

/// Row-major `[a, b, c, d]` for `[[a, b], [c, d]]`.
pub type Matrix = [Elem; 4];

#[derive(Clone, Debug)]
pub struct Psl2 {
    field: Field,
    /// Canonical matrices packed 16 bits per entry, sorted ascending.
    keys: Vec<u64>,
}

#[inline]
fn pack(m: &Matrix) -> u64 {
    (m[0] as u64) << 48 | (m[1] as u64) << 32 | (m[2] as u64) << 16 | m[3] as u64
}

#[inline]
fn unpack(k: u64) -> Matrix {
    [
        (k >> 48) as Elem,
        (k >> 32 & 0xffff) as Elem,
        (k >> 16 & 0xffff) as Elem,
        (k & 0xffff) as Elem,
    ]
}

/// |PSL₂(q)| = q(q²−1)/gcd(2, q−1).
pub fn psl2_order(q: u64) -> u64 {
    let full = q * (q * q - 1);
    if q % 2 == 0 {
        full
    } else {
        full / 2
    }
}

impl Psl2 {
    pub fn new(field: Field, cap: usize) -> Result<Self, GroupError> {
        let q = field.order() as u64;
        let expected = psl2_order(q);
        if expected > cap as u64 {
            return Err(GroupError::OrderCapExceeded {
                cap,
                reached: expected as usize,
            });
        }
        let mut keys = Vec::with_capacity(expected as usize);
        let f = &field;
        let qq = f.order();
        if f.characteristic() == 2 {
            // first nonzero entry equal to 1, determinant nonzero
            for b in 0..qq {
                for c in 0..qq {
                    let bc = f.mul(b, c);
                    for d in 0..qq {
                        if d != bc {
                            keys.push(pack(&[1, b, c, d]));
                        }
                    }
                }
            }
            for c in 1..qq {
                for d in 0..qq {
                    keys.push(pack(&[0, 1, c, d]));
                }
            }
        } else {
            for a in 0..qq {
                for b in 0..qq {
                    for c in 0..qq {
                        let one_bc = f.add(1, f.mul(b, c));
                        if a != 0 {
                            let d = f.div(one_bc, a).unwrap();
                            keys.push(pack(&Self::sign_canonical(f, [a, b, c, d])));
                        } else if one_bc == 0 {
                            for d in 0..qq {
                                keys.push(pack(&Self::sign_canonical(f, [a, b, c, d])));
                            }
                        }
                    }
                }
            }
        }
        keys.sort_unstable();
        keys.dedup();
        debug_assert_eq!(keys.len() as u64, expected);
        Ok(Psl2 { field, keys })
    }

    fn sign_canonical(f: &Field, m: Matrix) -> Matrix {
        let neg = m.map(|x| f.neg(x));
        if neg < m {
            neg
        } else {
            m
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn order(&self) -> usize {
        self.keys.len()
    }

    pub fn matrix(&self, g: u32) -> Matrix {
        unpack(self.keys[g as usize])
    }

    pub fn det(&self, m: &Matrix) -> Elem {
        let f = &self.field;
        f.sub(f.mul(m[0], m[3]), f.mul(m[1], m[2]))
    }

    /// Canonical representative of the class of `m`, or `None` when `m` does
    /// not define an element (singular, or in odd characteristic a
    /// determinant that is not a square).
    pub fn canonical(&self, m: &Matrix) -> Option<Matrix> {
        let f = &self.field;
        let det = self.det(m);
        if det == 0 {
            return None;
        }
        if f.characteristic() == 2 {
            let lead = *m.iter().find(|&&x| x != 0)?;
            let s = f.inv(lead)?;
            Some(m.map(|x| f.mul(x, s)))
        } else {
            let root = f.sqrt(det)?;
            let s = f.inv(root)?;
            Some(Self::sign_canonical(f, m.map(|x| f.mul(x, s))))
        }
    }

    /// Index of the element represented by `m`.
    pub fn index_of(&self, m: &Matrix) -> Option<u32> {
        let c = self.canonical(m)?;
        self.keys.binary_search(&pack(&c)).ok().map(|i| i as u32)
    }

    pub fn mat_mul(&self, x: &Matrix, y: &Matrix) -> Matrix {
        let f = &self.field;
        [
            f.add(f.mul(x[0], y[0]), f.mul(x[1], y[2])),
            f.add(f.mul(x[0], y[1]), f.mul(x[1], y[3])),
            f.add(f.mul(x[2], y[0]), f.mul(x[3], y[2])),
            f.add(f.mul(x[2], y[1]), f.mul(x[3], y[3])),
        ]
    }

    pub fn mul(&self, g: u32, h: u32) -> u32 {
        let m = self.mat_mul(&self.matrix(g), &self.matrix(h));
        self.index_of(&m).expect("product of group elements is in the group")
    }

    /// Adjugate, which is the inverse up to scaling.
    pub fn inv(&self, g: u32) -> u32 {
        let f = &self.field;
        let m = self.matrix(g);
        let adj = [m[3], f.neg(m[1]), f.neg(m[2]), m[0]];
        self.index_of(&adj).expect("inverse is in the group")
    }

    pub fn identity(&self) -> u32 {
        self.index_of(&[1, 0, 0, 1]).unwrap()
    }

    pub fn label(&self, g: u32) -> String {
        let m = self.matrix(g);
        format!("[[{},{}],[{},{}]]", m[0], m[1], m[2], m[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_small_psl2() {
        // q=2: SL₂(2) enumerated directly, q=3: ½(q³−q)
        for (p, k, want) in [(2, 1, 6), (3, 1, 12), (5, 1, 60), (2, 2, 60), (2, 3, 504), (3, 2, 360)] {
            let g = Psl2::new(Field::new(p, k).unwrap(), 1_000_000).unwrap();
            assert_eq!(g.order(), want, "q = {p}^{k}");
        }
    }

    #[test]
    fn sl2_of_two_by_enumeration() {
        // oracle: every 0/1 matrix with odd determinant
        let mut count = 0;
        for bits in 0..16u32 {
            let [a, b, c, d] = [bits & 1, bits >> 1 & 1, bits >> 2 & 1, bits >> 3 & 1];
            if (a * d + b * c) % 2 == 1 {
                count += 1;
            }
        }
        let g = Psl2::new(Field::new(2, 1).unwrap(), 100).unwrap();
        assert_eq!(g.order(), count);
    }

    #[test]
    fn order_cap() {
        assert!(matches!(
            Psl2::new(Field::new(2, 4).unwrap(), 1000),
            Err(GroupError::OrderCapExceeded { reached: 4080, .. })
        ));
    }

    #[test]
    fn scalar_multiples_share_an_index() {
        let g = Psl2::new(Field::new(2, 2).unwrap(), 1000).unwrap();
        let f = g.field().clone();
        let m = [1, 2, 3, 3];
        assert_ne!(g.det(&m), 0);
        for s in 1..4 {
            let sm = m.map(|x| f.mul(x, s));
            assert_eq!(g.index_of(&sm), g.index_of(&m));
        }
        let g = Psl2::new(Field::new(5, 1).unwrap(), 1000).unwrap();
        let m = [2, 0, 0, 3];
        assert_eq!(g.index_of(&m), g.index_of(&[3, 0, 0, 2]));
    }

    #[test]
    fn inverse_and_identity() {
        let g = Psl2::new(Field::new(3, 1).unwrap(), 100).unwrap();
        let e = g.identity();
        for x in 0..g.order() as u32 {
            assert_eq!(g.mul(x, g.inv(x)), e);
            assert_eq!(g.mul(e, x), x);
        }
    }
}
