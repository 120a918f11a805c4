//! Large-alphabet truncated tree code: `s`-bit blocks in, fixed-width bit
//! symbols out, by bit-packing the integer tree code.

use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::linearcode::{BoostParams, IntTreeEncoder, PascalBoostedEncoder};
use crate::symbol::{BitString, Nat, StreamEncoder};

/// Which integer tree code sits under the packing.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PackedKind {
    /// `TC_ℤ`: block `a_i` becomes `a_i ∥ b_i`, `3s` bits, distance 1/2.
    Systematic,
    /// `TC_{P,(1,r)}`: `r + 1` integers per block, distance `r/(r+1)`.
    Boosted { r: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PackedCodeParams {
    pub s: usize,
    pub kind: PackedKind,
}

impl PackedCodeParams {
    pub fn new(s: usize, kind: PackedKind) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("block width s must be >= 1"));
        }
        if let PackedKind::Boosted { r } = kind {
            if r == 0 {
                return Err(Error::invalid("boosted packing needs r >= 1"));
            }
        }
        Ok(PackedCodeParams { s, kind })
    }

    pub fn systematic(s: usize) -> Result<Self> {
        Self::new(s, PackedKind::Systematic)
    }

    /// Output bits per input bit of a block.
    pub fn width_multiplier(&self) -> usize {
        match self.kind {
            PackedKind::Systematic => 3,
            PackedKind::Boosted { r } => (r + 1) * (r + 2),
        }
    }

    pub fn symbol_bits(&self) -> usize {
        self.width_multiplier() * self.s
    }

    /// Distance of the underlying integer tree code.
    pub fn base_distance(&self) -> Rational64 {
        match self.kind {
            PackedKind::Systematic => Rational64::new(1, 2),
            PackedKind::Boosted { r } => Rational64::new(r as i64, r as i64 + 1),
        }
    }

    /// Maximum number of blocks, `n = s`.
    pub fn capacity(&self) -> usize {
        self.s
    }
}

#[derive(Clone, Debug)]
enum Inner {
    Int(IntTreeEncoder),
    Boosted(PascalBoostedEncoder),
}

#[derive(Clone, Debug)]
pub struct PackedTreeEncoder {
    params: PackedCodeParams,
    inner: Inner,
    blocks: usize,
}

impl PackedTreeEncoder {
    pub fn new(params: PackedCodeParams) -> Self {
        let inner = match params.kind {
            PackedKind::Systematic => Inner::Int(IntTreeEncoder::new()),
            PackedKind::Boosted { r } => {
                Inner::Boosted(PascalBoostedEncoder::new(BoostParams { s: 1, r }))
            }
        };
        PackedTreeEncoder {
            params,
            inner,
            blocks: 0,
        }
    }

    pub fn params(&self) -> &PackedCodeParams {
        &self.params
    }
}

impl StreamEncoder for PackedTreeEncoder {
    type Input = BitString;
    type Output = BitString;

    fn push(&mut self, block: BitString) -> Result<BitString> {
        let s = self.params.s;
        if block.len() != s {
            return Err(Error::LengthMismatch {
                left: block.len(),
                right: s,
            });
        }
        if self.blocks == self.params.capacity() {
            return Err(Error::Capacity {
                len: self.blocks + 1,
                capacity: self.params.capacity(),
            });
        }
        self.blocks += 1;
        let a: Nat = block.to_biguint();
        let mut out = BitString::with_capacity(self.params.symbol_bits());
        match &mut self.inner {
            Inner::Int(enc) => {
                let pair = enc.push(a)?;
                out.append(&block);
                out.append(&BitString::from_biguint(&pair.b, 2 * s)?);
            }
            Inner::Boosted(enc) => {
                let PackedKind::Boosted { r } = self.params.kind else {
                    unreachable!()
                };
                for v in enc.push(vec![a])? {
                    out.append(&BitString::from_biguint(&v, (r + 2) * s)?);
                }
            }
        }
        Ok(out)
    }

    fn consumed(&self) -> usize {
        self.blocks
    }
}

pub fn encode_block_tc(params: PackedCodeParams, blocks: &[BitString]) -> Result<Vec<BitString>> {
    if blocks.len() > params.capacity() {
        return Err(Error::Capacity {
            len: blocks.len(),
            capacity: params.capacity(),
        });
    }
    let mut enc = PackedTreeEncoder::new(params);
    blocks.iter().map(|b| enc.push(b.clone())).collect()
}
