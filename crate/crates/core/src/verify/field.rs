//! Small finite fields and the random Toeplitz baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{weight_distance, DistanceReport};
use crate::error::{Error, Result};
use crate::symbol::{StreamEncoder, Symbol};

pub const SUPPORTED_FIELDS: [usize; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

/// Tolerance for comparisons involving `entropy_hr`.
pub const ENTROPY_TOLERANCE: f64 = 1e-12;

/// `F_q` with elements `0..q`. Prime fields use residues; `F_{2^k}` uses the
/// bit pattern modulo `x^2+x+1`, `x^3+x+1`, `x^4+x+1`; `F_9` stores `a + 3b`
/// for `a + b i` with `i^2 = -1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmallField {
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
}

fn char2_mul(a: usize, b: usize, k: u32, poly: usize) -> usize {
    let mut acc = 0;
    for i in 0..k {
        if b >> i & 1 == 1 {
            acc ^= a << i;
        }
    }
    for d in (k..2 * k).rev() {
        if acc >> d & 1 == 1 {
            acc ^= poly << (d - k);
        }
    }
    acc
}

impl SmallField {
    pub fn new(q: usize) -> Result<Self> {
        type Op = Box<dyn Fn(usize, usize) -> usize>;
        let (add, mul): (Op, Op) = match q {
            2 | 3 | 5 | 7 | 11 | 13 => (Box::new(move |a, b| (a + b) % q), Box::new(move |a, b| a * b % q)),
            4 | 8 | 16 => {
                let k = q.trailing_zeros();
                let poly = match q {
                    4 => 0x7,
                    8 => 0xb,
                    _ => 0x13,
                };
                (Box::new(|a, b| a ^ b), Box::new(move |a, b| char2_mul(a, b, k, poly)))
            }
            9 => (
                Box::new(|a, b| (a % 3 + b % 3) % 3 + 3 * ((a / 3 + b / 3) % 3)),
                Box::new(|a, b| {
                    let (a0, a1, b0, b1) = (a % 3, a / 3, b % 3, b / 3);
                    (a0 * b0 + 2 * a1 * b1) % 3 + 3 * ((a0 * b1 + a1 * b0) % 3)
                }),
            ),
            _ => return Err(Error::invalid(format!("no field table for q = {q}"))),
        };
        let table = |f: &Op| -> Vec<u8> {
            (0..q * q).map(|i| f(i / q, i % q) as u8).collect()
        };
        Ok(SmallField {
            q,
            add: table(&add),
            mul: table(&mul),
        })
    }

    pub fn size(&self) -> usize {
        self.q
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }
}

/// Lower-triangular Toeplitz generators `A_1 .. A_{d-1}` over `F_q`; the code
/// emits `(x_i, (A_1 x)_i, .., (A_{d-1} x)_i)` in the alphabet of size `q^d`.
#[derive(Clone, Debug)]
pub struct ToeplitzCode {
    pub q: usize,
    pub d: usize,
    pub n: usize,
    /// `diagonals[k][t]` is entry `(i, i - t)` of `A_{k+1}`.
    pub diagonals: Vec<Vec<u8>>,
    pub seed: Option<u64>,
    field: SmallField,
}

impl ToeplitzCode {
    pub fn new(q: usize, d: usize, diagonals: Vec<Vec<u8>>, seed: Option<u64>) -> Result<Self> {
        let field = SmallField::new(q)?;
        if d < 2 || diagonals.len() != d - 1 {
            return Err(Error::invalid(format!(
                "d = {d} needs d - 1 >= 1 diagonal sequences, got {}",
                diagonals.len()
            )));
        }
        let n = diagonals[0].len();
        if diagonals.iter().any(|v| v.len() != n || v.iter().any(|&e| e as usize >= q)) {
            return Err(Error::invalid("diagonals must share a length and hold field elements"));
        }
        Ok(ToeplitzCode {
            q,
            d,
            n,
            diagonals,
            seed,
            field,
        })
    }

    pub fn field(&self) -> &SmallField {
        &self.field
    }

    /// Entry `(i, j)` of `A_k`, `1 <= k < d`, 0-indexed.
    pub fn entry(&self, k: usize, i: usize, j: usize) -> u8 {
        if i < j {
            0
        } else {
            self.diagonals[k - 1][i - j]
        }
    }

    /// Field coordinates of the output at the last position of `x`.
    pub fn symbol_at(&self, x: &[u8]) -> Vec<u8> {
        let i = x.len() - 1;
        let mut out = Vec::with_capacity(self.d);
        out.push(x[i]);
        for k in 1..self.d {
            let v = x
                .iter()
                .enumerate()
                .fold(0u8, |acc, (j, &xj)| self.field.add(acc, self.field.mul(self.entry(k, i, j), xj)));
            out.push(v);
        }
        out
    }

    pub fn encode(&self, x: &[u8]) -> Result<Vec<Vec<u8>>> {
        let mut enc = ToeplitzEncoder::new(self.clone());
        x.iter().map(|&v| enc.push(v)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct ToeplitzEncoder {
    code: ToeplitzCode,
    prefix: Vec<u8>,
}

impl ToeplitzEncoder {
    pub fn new(code: ToeplitzCode) -> Self {
        ToeplitzEncoder {
            code,
            prefix: Vec::new(),
        }
    }
}

impl StreamEncoder for ToeplitzEncoder {
    type Input = u8;
    type Output = Vec<u8>;

    fn push(&mut self, v: u8) -> Result<Vec<u8>> {
        if self.prefix.len() == self.code.n {
            return Err(Error::Capacity {
                len: self.prefix.len() + 1,
                capacity: self.code.n,
            });
        }
        if v as usize >= self.code.q {
            return Err(Error::invalid(format!("{v} is not an element of F_{}", self.code.q)));
        }
        self.prefix.push(v);
        Ok(self.code.symbol_at(&self.prefix))
    }

    fn consumed(&self) -> usize {
        self.prefix.len()
    }
}

/// Uniform diagonals from a ChaCha8 stream.
pub fn sample_toeplitz_code(q: usize, d: usize, n: usize, seed: u64) -> Result<ToeplitzCode> {
    SmallField::new(q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diagonals = (1..d)
        .map(|_| (0..n).map(|_| rng.gen_range(0..q) as u8).collect())
        .collect();
    ToeplitzCode::new(q, d, diagonals, Some(seed))
}

/// `δ̃` over all non-zero `x ∈ F_q^m`, `m <= n_max`, counting field coordinates.
pub fn toeplitz_tilde_distance(code: &ToeplitzCode, n_max: usize) -> Result<DistanceReport> {
    if n_max > code.n {
        return Err(Error::Capacity {
            len: n_max,
            capacity: code.n,
        });
    }
    let alphabet = (0..code.q).map(|v| Symbol::Int(v.into())).collect();
    let mut buf = Vec::with_capacity(n_max);
    weight_distance(code.q, 0, n_max, code.d, alphabet, |x| {
        buf.clear();
        buf.extend(x.iter().map(|&v| v as u8));
        code.symbol_at(&buf).iter().filter(|&&v| v != 0).count()
    })
}

/// `H_r(x) = x log_r(r-1) - x log_r x - (1-x) log_r(1-x)`.
pub fn entropy_hr(r: f64, x: f64) -> Result<f64> {
    if r < 2.0 || !(0.0..=(r - 1.0) / r + ENTROPY_TOLERANCE).contains(&x) {
        return Err(Error::invalid(format!("H_r needs r >= 2 and x in [0, (r-1)/r], got r = {r}, x = {x}")));
    }
    let lg = |v: f64| v.ln() / r.ln();
    let term = |v: f64| if v <= 0.0 { 0.0 } else { v * lg(v) };
    Ok(x * lg(r - 1.0) - term(x) - term(1.0 - x))
}

/// `log_r(2q) + H_r(δ) <= 1`, up to `ENTROPY_TOLERANCE`.
pub fn toeplitz_condition(q: f64, r: f64, delta: f64) -> Result<bool> {
    let lhs = (2.0 * q).ln() / r.ln() + entropy_hr(r, delta)?;
    Ok(lhs <= 1.0 + ENTROPY_TOLERANCE)
}
