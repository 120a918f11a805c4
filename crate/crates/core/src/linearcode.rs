//! Linear tree codes generated by a lower-triangular matrix `A`.
//!
//! `TC_A` emits `(x_i, (A x)_i)` at position `i`. The boosted variant appends
//! `r` zeros to every block of `s` inputs and emits blocks of `r + s` entries
//! of `A x'`. The integer tree code is `TC_A` with the Pascal matrix and keeps
//! no bound on the input length.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::pascal::{LowerTriangularMatrix, PascalRows};
use crate::symbol::{Nat, StreamEncoder, Symbol, ToSymbol};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pair<T> {
    pub a: T,
    pub b: T,
}

pub type IntPair = Pair<BigInt>;
pub type NatPair = Pair<Nat>;

impl ToSymbol for IntPair {
    fn to_symbol(&self) -> Symbol {
        Symbol::IntPair(self.a.clone(), self.b.clone())
    }
}

impl ToSymbol for NatPair {
    fn to_symbol(&self) -> Symbol {
        Symbol::nat_pair(&self.a, &self.b)
    }
}

/// Streaming `TC_A` with `A_0 = I` and `A_1 = A`.
#[derive(Clone, Debug)]
pub struct TcAEncoder {
    a: Arc<LowerTriangularMatrix>,
    inputs: Vec<BigInt>,
}

impl TcAEncoder {
    pub fn new(a: Arc<LowerTriangularMatrix>) -> Self {
        TcAEncoder { a, inputs: Vec::new() }
    }
}

impl StreamEncoder for TcAEncoder {
    type Input = BigInt;
    type Output = IntPair;

    fn push(&mut self, x: BigInt) -> Result<IntPair> {
        let i = self.inputs.len();
        if i >= self.a.dim() {
            return Err(Error::Capacity {
                len: i + 1,
                capacity: self.a.dim(),
            });
        }
        self.inputs.push(x);
        let b = self.a.row(i).iter().zip(&self.inputs).map(|(c, v)| c * v).sum();
        Ok(Pair {
            a: self.inputs[i].clone(),
            b,
        })
    }

    fn consumed(&self) -> usize {
        self.inputs.len()
    }
}

pub fn encode_tc_a(a: &LowerTriangularMatrix, x: &[BigInt]) -> Result<Vec<IntPair>> {
    if x.len() > a.dim() {
        return Err(Error::Capacity {
            len: x.len(),
            capacity: a.dim(),
        });
    }
    let mut enc = TcAEncoder::new(Arc::new(a.truncate(x.len())?));
    x.iter().map(|v| enc.push(v.clone())).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoostParams {
    pub s: usize,
    pub r: usize,
}

impl BoostParams {
    pub fn new(s: usize, r: usize) -> Result<Self> {
        if s == 0 || r == 0 {
            return Err(Error::invalid(format!("boost (s, r) = ({s}, {r}) needs s, r >= 1")));
        }
        Ok(BoostParams { s, r })
    }

    pub fn block_len(&self) -> usize {
        self.s + self.r
    }
}

/// Streaming `TC_{A,(s,r)}` over an explicit matrix.
#[derive(Clone, Debug)]
pub struct BoostedEncoder {
    a: Arc<LowerTriangularMatrix>,
    params: BoostParams,
    padded: Vec<BigInt>,
}

impl BoostedEncoder {
    pub fn new(a: Arc<LowerTriangularMatrix>, params: BoostParams) -> Self {
        BoostedEncoder {
            a,
            params,
            padded: Vec::new(),
        }
    }
}

impl StreamEncoder for BoostedEncoder {
    type Input = Vec<BigInt>;
    type Output = Vec<BigInt>;

    fn push(&mut self, block: Vec<BigInt>) -> Result<Vec<BigInt>> {
        let BoostParams { s, r } = self.params;
        if block.len() != s {
            return Err(Error::LengthMismatch {
                left: block.len(),
                right: s,
            });
        }
        let start = self.padded.len();
        if start + s + r > self.a.dim() {
            return Err(Error::Capacity {
                len: start + s + r,
                capacity: self.a.dim(),
            });
        }
        self.padded.extend(block);
        self.padded.extend(std::iter::repeat_n(BigInt::zero(), r));
        Ok((start..start + s + r)
            .map(|i| self.a.row(i).iter().zip(&self.padded).map(|(c, v)| c * v).sum())
            .collect())
    }

    fn consumed(&self) -> usize {
        self.padded.len() / self.params.block_len()
    }
}

pub fn encode_tc_a_sr(
    a: &LowerTriangularMatrix,
    params: BoostParams,
    blocks: &[Vec<BigInt>],
) -> Result<Vec<Vec<BigInt>>> {
    let mut enc = BoostedEncoder::new(Arc::new(a.clone()), params);
    blocks.iter().map(|b| enc.push(b.clone())).collect()
}

/// `TC_ℤ`: `TC_A` with the Pascal matrix over arbitrary-precision naturals.
///
/// Row `i` of Pascal's matrix is generated incrementally, so each push costs
/// `O(i)` big-integer additions and multiplications.
#[derive(Clone, Debug, Default)]
pub struct IntTreeEncoder {
    rows: PascalRows,
    inputs: Vec<Nat>,
}

impl IntTreeEncoder {
    pub fn new() -> Self {
        Self::default()
    }
}

impl StreamEncoder for IntTreeEncoder {
    type Input = Nat;
    type Output = NatPair;

    fn push(&mut self, a: Nat) -> Result<NatPair> {
        self.inputs.push(a);
        let row = self.rows.advance();
        let b = row
            .iter()
            .zip(&self.inputs)
            .filter(|(_, v)| !v.is_zero())
            .map(|(c, v)| c * v)
            .sum();
        Ok(Pair {
            a: self.inputs.last().unwrap().clone(),
            b,
        })
    }

    fn consumed(&self) -> usize {
        self.inputs.len()
    }
}

pub fn encode_int_treecode(a: &[Nat]) -> Vec<NatPair> {
    let mut enc = IntTreeEncoder::new();
    a.iter()
        .map(|v| enc.push(v.clone()).expect("unbounded encoder"))
        .collect()
}

/// `TC_{P,(s,r)}` over naturals without a dimension bound.
#[derive(Clone, Debug)]
pub struct PascalBoostedEncoder {
    params: BoostParams,
    rows: PascalRows,
    padded: Vec<Nat>,
}

impl PascalBoostedEncoder {
    pub fn new(params: BoostParams) -> Self {
        PascalBoostedEncoder {
            params,
            rows: PascalRows::new(),
            padded: Vec::new(),
        }
    }
}

impl StreamEncoder for PascalBoostedEncoder {
    type Input = Vec<Nat>;
    type Output = Vec<Nat>;

    fn push(&mut self, block: Vec<Nat>) -> Result<Vec<Nat>> {
        let BoostParams { s, r } = self.params;
        if block.len() != s {
            return Err(Error::LengthMismatch {
                left: block.len(),
                right: s,
            });
        }
        self.padded.extend(block);
        self.padded.extend(std::iter::repeat_n(Nat::zero(), r));
        let mut out = Vec::with_capacity(s + r);
        for _ in 0..s + r {
            let row = self.rows.advance();
            out.push(
                row.iter()
                    .zip(&self.padded)
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(c, v)| c * v)
                    .sum(),
            );
        }
        Ok(out)
    }

    fn consumed(&self) -> usize {
        self.padded.len() / self.params.block_len()
    }
}

/// The two index sets from the distance argument for `TC_A`, 1-indexed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CxRxReport {
    /// Columns `j` with `x_j != 0`.
    pub c_x: BTreeSet<usize>,
    /// Rows `i > ell` with `(A x)_i = 0`.
    pub r_x: BTreeSet<usize>,
    /// `split(x, 0)`.
    pub ell: usize,
}

impl CxRxReport {
    pub fn claim_holds(&self) -> bool {
        self.c_x.len() > self.r_x.len()
    }
}

pub fn cx_rx_report(a: &LowerTriangularMatrix, x: &[BigInt]) -> Result<CxRxReport> {
    let ell = x.iter().take_while(|v| v.is_zero()).count();
    if ell == x.len() {
        return Err(Error::invalid("the index sets are undefined for x = 0"));
    }
    let y = a.mul_prefix(x)?;
    Ok(CxRxReport {
        c_x: (1..=x.len()).filter(|&j| !x[j - 1].is_zero()).collect(),
        r_x: (ell + 1..=x.len()).filter(|&i| y[i - 1].is_zero()).collect(),
        ell,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pascal::pascal_matrix;
    use crate::symbol::encode_stream;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn pair(a: i64, b: i64) -> IntPair {
        Pair {
            a: a.into(),
            b: b.into(),
        }
    }

    #[test]
    fn tc_a_examples() {
        let p = pascal_matrix(1);
        assert_eq!(
            encode_tc_a(&p, &ints(&[1, 1])).unwrap(),
            vec![pair(1, 1), pair(1, 2)]
        );
        assert_eq!(
            encode_tc_a(&pascal_matrix(4), &ints(&[0, 0, 0])).unwrap(),
            vec![pair(0, 0); 3]
        );
        assert!(encode_tc_a(&p, &ints(&[1, 1, 1])).is_err());
        let full = encode_tc_a(&p, &ints(&[1, 1])).unwrap();
        let short = encode_tc_a(&p, &ints(&[1])).unwrap();
        assert_eq!(full[0], short[0]);
    }

    #[test]
    fn boosted_examples() {
        let p = pascal_matrix(5);
        let out = encode_tc_a_sr(&p, BoostParams::new(1, 2).unwrap(), &[ints(&[1]), ints(&[1])])
            .unwrap();
        let direct = p.mul_prefix(&ints(&[1, 0, 0, 1, 0, 0])).unwrap();
        assert_eq!(out, vec![direct[..3].to_vec(), direct[3..].to_vec()]);
        let zero = encode_tc_a_sr(&p, BoostParams::new(1, 1).unwrap(), &[ints(&[0])]).unwrap();
        assert_eq!(zero, vec![ints(&[0, 0])]);
        assert!(BoostParams::new(1, 0).is_err());
        assert!(encode_tc_a_sr(&p, BoostParams::new(2, 1).unwrap(), &[ints(&[1])]).is_err());
    }

    #[test]
    fn int_tree_examples() {
        let out = encode_int_treecode(&[Nat::from(3u32), Nat::from(5u32)]);
        assert_eq!(out[0], Pair { a: 3u32.into(), b: 3u32.into() });
        assert_eq!(out[1], Pair { a: 5u32.into(), b: 8u32.into() });
        let unit = encode_int_treecode(&[1u32, 0, 0, 0].map(Nat::from));
        assert!(unit.iter().all(|p| p.b == Nat::from(1u32)));
    }

    #[test]
    fn pascal_boosted_matches_matrix_route() {
        let params = BoostParams::new(2, 1).unwrap();
        let blocks: Vec<Vec<u32>> = vec![vec![1, 2], vec![0, 3], vec![4, 0], vec![1, 1]];
        let mut fast = PascalBoostedEncoder::new(params);
        let got = encode_stream(&mut fast, blocks.iter().map(|b| b.iter().map(|&v| Nat::from(v)).collect()))
            .unwrap();
        let p = pascal_matrix(11);
        let want = encode_tc_a_sr(
            &p,
            params,
            &blocks
                .iter()
                .map(|b| b.iter().map(|&v| BigInt::from(v)).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let got: Vec<Vec<BigInt>> = got
            .into_iter()
            .map(|b| b.into_iter().map(BigInt::from).collect())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn cx_rx_examples() {
        let r = cx_rx_report(&pascal_matrix(2), &ints(&[0, 1, 0])).unwrap();
        assert_eq!(r.c_x, BTreeSet::from([2]));
        assert!(r.r_x.is_empty());
        assert_eq!(r.ell, 1);
        let r = cx_rx_report(&pascal_matrix(1), &ints(&[1, 0])).unwrap();
        assert_eq!(r.c_x, BTreeSet::from([1]));
        assert!(r.r_x.is_empty());
        assert!(cx_rx_report(&pascal_matrix(1), &ints(&[0, 0])).is_err());
        // A row that vanishes: x = (1, -1) gives (A x)_2 = 0.
        let r = cx_rx_report(&pascal_matrix(1), &ints(&[1, -1])).unwrap();
        assert_eq!(r.r_x, BTreeSet::from([2]));
        assert!(r.claim_holds());
    }
}
