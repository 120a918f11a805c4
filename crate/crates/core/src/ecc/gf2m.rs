//! Binary extension fields GF(2^m), m <= 20, in polynomial basis.
//!
//! Element `v` is the polynomial whose coefficients are the bits of `v`.
//! The modulus for each degree is the lexicographically least irreducible
//! polynomial of that degree.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const MAX_DEGREE: u32 = 20;

/// Lexicographically least irreducible polynomial of degree `m`, indexed by `m`.
pub const IRREDUCIBLE: [u32; 21] = [
    0, 0x2, 0x7, 0xb, 0x13, 0x25, 0x43, 0x83, 0x11b, 0x203, 0x409, 0x805, 0x1009, 0x201b, 0x4021,
    0x8003, 0x1002b, 0x20009, 0x40009, 0x80027, 0x100009,
];

/// Carry-less product of `a` and `b` reduced modulo `poly` (degree `m`).
pub fn clmul_mod(mut a: u32, mut b: u32, poly: u32, m: u32) -> u32 {
    let mut acc = 0u32;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a;
        }
        b >>= 1;
        a <<= 1;
        if a >> m & 1 == 1 {
            a ^= poly;
        }
    }
    acc
}

/// GF(2^m) with log/antilog tables.
pub struct Gf2m {
    m: u32,
    poly: u32,
    order: u32,
    generator: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
    subspace: OnceLock<SubspacePolys>,
}

impl std::fmt::Debug for Gf2m {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF(2^{}) mod {:#x}", self.m, self.poly)
    }
}

impl Gf2m {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE {
            return Err(Error::invalid(format!(
                "field degree {m} outside 1..={MAX_DEGREE}"
            )));
        }
        let poly = IRREDUCIBLE[m as usize];
        let order = (1u32 << m) - 1;
        let generator = (1..=order)
            .find(|&g| multiplicative_order(g, poly, m) == order)
            .expect("the multiplicative group is cyclic");
        let mut exp = vec![0u32; 2 * order as usize];
        let mut log = vec![0u32; 1 << m];
        let mut v = 1u32;
        for e in 0..order {
            exp[e as usize] = v;
            exp[(e + order) as usize] = v;
            log[v as usize] = e;
            v = clmul_mod(v, generator, poly, m);
        }
        Ok(Gf2m {
            m,
            poly,
            order,
            generator,
            exp,
            log,
            subspace: OnceLock::new(),
        })
    }

    /// Process-wide shared instance for degree `m`.
    pub fn shared(m: u32) -> Result<Arc<Gf2m>> {
        static FIELDS: OnceLock<Mutex<HashMap<u32, Arc<Gf2m>>>> = OnceLock::new();
        let map = FIELDS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = map.lock().unwrap();
        if let Some(f) = map.get(&m) {
            return Ok(f.clone());
        }
        let f = Arc::new(Gf2m::new(m)?);
        map.insert(m, f.clone());
        Ok(f)
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> u32 {
        self.poly
    }

    pub fn size(&self) -> usize {
        1 << self.m
    }

    pub fn generator(&self) -> u32 {
        self.generator
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
        }
    }

    #[inline]
    pub fn square(&self, a: u32) -> u32 {
        self.mul(a, a)
    }

    pub fn inv(&self, a: u32) -> Result<u32> {
        if a == 0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.exp[(self.order - self.log[a as usize]) as usize % self.order as usize])
    }

    pub fn pow(&self, a: u32, e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = (self.log[a as usize] as u64 * (e % self.order as u64)) % self.order as u64;
        self.exp[l as usize]
    }

    /// Multiplication by shift-and-reduce, independent of the tables.
    pub fn mul_reference(&self, a: u32, b: u32) -> u32 {
        clmul_mod(a, b, self.poly, self.m)
    }

    pub(crate) fn subspace_polys(&self) -> &SubspacePolys {
        self.subspace.get_or_init(|| SubspacePolys::new(self))
    }
}

fn multiplicative_order(g: u32, poly: u32, m: u32) -> u32 {
    let mut v = g;
    let mut k = 1u32;
    while v != 1 {
        v = clmul_mod(v, g, poly, m);
        k += 1;
        if k > (1u32 << m) {
            return 0;
        }
    }
    k
}

/// A field element tagged with its degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gf2mElement {
    pub m: u32,
    pub value: u32,
}

impl Gf2mElement {
    pub fn new(m: u32, value: u32) -> Result<Self> {
        if m == 0 || m > MAX_DEGREE || value >> m != 0 {
            return Err(Error::invalid(format!("{value} is not an element of GF(2^{m})")));
        }
        Ok(Gf2mElement { m, value })
    }
}

pub fn gf_mul(a: Gf2mElement, b: Gf2mElement) -> Result<Gf2mElement> {
    if a.m != b.m {
        return Err(Error::invalid(format!("GF(2^{}) vs GF(2^{})", a.m, b.m)));
    }
    let f = Gf2m::shared(a.m)?;
    Ok(Gf2mElement {
        m: a.m,
        value: f.mul(a.value, b.value),
    })
}

pub fn gf_inv(a: Gf2mElement) -> Result<Gf2mElement> {
    let f = Gf2m::shared(a.m)?;
    Ok(Gf2mElement {
        m: a.m,
        value: f.inv(a.value)?,
    })
}

/// Subspace vanishing polynomials `W_t` of `V_t = {0, .., 2^t - 1}`.
///
/// `W_t` is linearized: `W_t(x) = sum_i w[t][i] x^(2^i)`, with
/// `W_{t+1}(x) = W_t(x)^2 + W_t(2^t) W_t(x)`.
pub(crate) struct SubspacePolys {
    pub(crate) coeffs: Vec<Vec<u32>>,
}

impl SubspacePolys {
    fn new(f: &Gf2m) -> Self {
        let m = f.m as usize;
        let mut coeffs: Vec<Vec<u32>> = vec![vec![1]];
        for t in 0..m {
            let w = &coeffs[t];
            let bt = eval_linearized(f, w, 1u32 << t);
            let mut next = vec![0u32; t + 2];
            for (i, &c) in w.iter().enumerate() {
                next[i + 1] ^= f.square(c);
                next[i] ^= f.mul(bt, c);
            }
            coeffs.push(next);
        }
        SubspacePolys { coeffs }
    }

    pub(crate) fn eval(&self, f: &Gf2m, t: usize, x: u32) -> u32 {
        eval_linearized(f, &self.coeffs[t], x)
    }
}

fn eval_linearized(f: &Gf2m, w: &[u32], x: u32) -> u32 {
    let mut acc = 0u32;
    let mut p = x;
    for &c in w {
        acc ^= f.mul(c, p);
        p = f.square(p);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_irreducible(p: u32, m: u32) -> bool {
        // Trial division by every polynomial of degree 1..=m/2.
        for d in 1..=m / 2 {
            for q in (1u32 << d)..(1u32 << (d + 1)) {
                let mut a = p;
                while a != 0 && 32 - a.leading_zeros() >= 32 - q.leading_zeros() {
                    a ^= q << ((32 - a.leading_zeros()) - (32 - q.leading_zeros()));
                }
                if a == 0 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn table_is_least_irreducible() {
        for m in 1..=16u32 {
            let first = ((1u32 << m)..(1u32 << (m + 1)))
                .find(|&p| is_irreducible(p, m))
                .unwrap();
            assert_eq!(IRREDUCIBLE[m as usize], first, "degree {m}");
        }
    }

    #[test]
    fn m2_examples() {
        let f = Gf2m::new(2).unwrap();
        // alpha = x = 2; alpha^2 = alpha + 1 = 3.
        assert_eq!(f.mul(2, 2), 3);
        assert_eq!(f.mul(3, 1), 3);
        assert_eq!(f.inv(1).unwrap(), 1);
        assert!(matches!(f.inv(0), Err(Error::ZeroInverse)));
        let a = Gf2mElement::new(2, 2).unwrap();
        assert_eq!(gf_mul(a, a).unwrap().value, 3);
        assert!(gf_mul(a, Gf2mElement::new(3, 1).unwrap()).is_err());
        assert!(Gf2mElement::new(2, 4).is_err());
    }

    #[test]
    fn tables_match_reference() {
        for m in [1u32, 3, 5, 8] {
            let f = Gf2m::new(m).unwrap();
            for a in 0..f.size() as u32 {
                for b in 0..f.size() as u32 {
                    assert_eq!(f.mul(a, b), f.mul_reference(a, b));
                }
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn subspace_polys_vanish() {
        let f = Gf2m::new(6).unwrap();
        let sp = f.subspace_polys();
        for t in 0..=6usize {
            for v in 0..(1u32 << t) {
                assert_eq!(sp.eval(&f, t, v), 0, "W_{t}({v})");
            }
            if t < 6 {
                assert_ne!(sp.eval(&f, t, 1 << t), 0);
            }
        }
    }
}
