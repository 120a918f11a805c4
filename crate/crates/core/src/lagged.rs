//! Lagged tree codes.
//!
//! The truncated code groups the input into `s`-bit blocks, encodes block `j`
//! with the packed tree code and spreads `C` of that symbol over positions
//! `js .. js + s - 1`. Positions `1 .. s - 1` are blank.
//!
//! The untruncated code runs one truncated instance per segment
//! `(q h, (q + 2) h]` with `h = s^2 / 2`; position `i` carries the pair
//! (instance `J - 2`, instance `J - 1`) for `J = ceil(i / h)`.

use std::sync::Arc;

use num_rational::Rational64;

use crate::ecc::CodeSpecC;
use crate::error::{Error, Result};
use crate::packing::{PackedCodeParams, PackedKind, PackedTreeEncoder};
use crate::symbol::{BitString, StreamEncoder, Symbol, ToSymbol};

#[derive(Clone, Debug)]
pub struct LaggedParams {
    pub s: usize,
    pub ell: usize,
    pub packed: PackedCodeParams,
    pub spec: Arc<CodeSpecC>,
    /// Distance of `C` used in the guarantee; the provable one unless overridden.
    pub delta: Rational64,
}

impl LaggedParams {
    pub fn new(s: usize, ell: usize, spec: Arc<CodeSpecC>, kind: PackedKind) -> Result<Self> {
        if s < 2 || !s.is_multiple_of(2) {
            return Err(Error::invalid(format!("block width s = {s} must be even and >= 2")));
        }
        if ell < 2 * s {
            return Err(Error::invalid(format!(
                "lag {ell} < 2s = {}: the distance bound would be vacuous",
                2 * s
            )));
        }
        let packed = PackedCodeParams::new(s, kind)?;
        if spec.s != s || spec.input_bits != packed.symbol_bits() {
            return Err(Error::invalid(format!(
                "C maps {} bits to {} symbols; need {} bits to {s} symbols",
                spec.input_bits,
                spec.s,
                packed.symbol_bits()
            )));
        }
        let delta = spec.provable;
        Ok(LaggedParams {
            s,
            ell,
            packed,
            spec,
            delta,
        })
    }

    pub fn with_delta(mut self, delta: Rational64) -> Self {
        self.delta = delta;
        self
    }

    /// `a = ell / s`.
    pub fn a(&self) -> Rational64 {
        Rational64::new(self.ell as i64, self.s as i64)
    }

    pub fn c(&self) -> usize {
        self.spec.c
    }

    /// Offset between consecutive untruncated instances, `s^2 / 2`.
    pub fn half_span(&self) -> usize {
        self.s * self.s / 2
    }

    /// `delta * (rho - (1 + rho) s / ell)` with `rho` the base tree-code distance.
    ///
    /// With `rho = 1/2` this is `delta * (1/2 - 3 / (2a))`.
    pub fn guaranteed(&self) -> Rational64 {
        let rho = self.packed.base_distance();
        self.delta * (rho - (Rational64::from_integer(1) + rho) / self.a())
    }
}

/// Output of the truncated code: `None` is the blank symbol.
pub type LagSymbol = Option<BitString>;

impl ToSymbol for Option<BitString> {
    fn to_symbol(&self) -> Symbol {
        match self {
            None => Symbol::Blank,
            Some(b) => Symbol::Bits(b.clone()),
        }
    }
}

#[derive(Clone, Debug)]
struct Current {
    /// Position `js` of the first symbol of this block's codeword.
    start: usize,
    packed: BitString,
    codeword: Option<Arc<BitString>>,
}

#[derive(Clone, Debug)]
pub struct TruncatedLagged {
    params: Arc<LaggedParams>,
    pos: usize,
    block: BitString,
    packed: PackedTreeEncoder,
    current: Option<Current>,
}

impl TruncatedLagged {
    pub fn new(params: Arc<LaggedParams>) -> Self {
        let packed = PackedTreeEncoder::new(params.packed);
        TruncatedLagged {
            block: BitString::with_capacity(params.s),
            params,
            pos: 0,
            packed,
            current: None,
        }
    }

    pub fn capacity(&self) -> usize {
        self.params.s * self.params.s
    }

    /// Consumes one bit without materializing the output symbol.
    pub fn advance(&mut self, bit: bool) -> Result<()> {
        if self.pos == self.capacity() {
            return Err(Error::Capacity {
                len: self.pos + 1,
                capacity: self.capacity(),
            });
        }
        self.pos += 1;
        self.block.push(bit);
        if self.block.len() == self.params.s {
            let block = std::mem::replace(&mut self.block, BitString::with_capacity(self.params.s));
            let packed = self.packed.push(block)?;
            self.current = Some(Current {
                start: self.pos,
                packed,
                codeword: None,
            });
        }
        Ok(())
    }

    /// The symbol at the current position.
    pub fn symbol(&mut self) -> Result<LagSymbol> {
        let s = self.params.s;
        let c = self.params.c();
        let pos = self.pos;
        let Some(cur) = self.current.as_mut() else {
            return Ok(None);
        };
        let idx = pos - cur.start;
        debug_assert!(idx < s);
        if cur.codeword.is_none() {
            cur.codeword = Some(Arc::new(self.params.spec.encode_flat(&cur.packed)?));
        }
        Ok(Some(cur.codeword.as_ref().unwrap().slice(idx * c, c)))
    }
}

impl StreamEncoder for TruncatedLagged {
    type Input = bool;
    type Output = LagSymbol;

    fn push(&mut self, bit: bool) -> Result<LagSymbol> {
        self.advance(bit)?;
        self.symbol()
    }

    fn consumed(&self) -> usize {
        self.pos
    }
}

pub fn encode_truncated_lagged(params: &Arc<LaggedParams>, x: &BitString) -> Result<Vec<LagSymbol>> {
    let cap = params.s * params.s;
    if x.len() > cap {
        return Err(Error::Capacity {
            len: x.len(),
            capacity: cap,
        });
    }
    let mut enc = TruncatedLagged::new(params.clone());
    x.iter().map(|b| enc.push(b)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaggedSymbol {
    pub left: LagSymbol,
    pub right: LagSymbol,
}

impl ToSymbol for LaggedSymbol {
    fn to_symbol(&self) -> Symbol {
        Symbol::Tuple(vec![self.left.to_symbol(), self.right.to_symbol()])
    }
}

#[derive(Clone, Debug)]
pub struct UntruncatedLagged {
    params: Arc<LaggedParams>,
    pos: usize,
    older: Option<TruncatedLagged>,
    newer: Option<TruncatedLagged>,
}

impl UntruncatedLagged {
    pub fn new(params: Arc<LaggedParams>) -> Self {
        UntruncatedLagged {
            params,
            pos: 0,
            older: None,
            newer: None,
        }
    }

    pub fn params(&self) -> &Arc<LaggedParams> {
        &self.params
    }

    pub fn advance(&mut self, bit: bool) -> Result<()> {
        let h = self.params.half_span();
        if self.pos.is_multiple_of(h) {
            self.older = self.newer.take();
            self.newer = Some(TruncatedLagged::new(self.params.clone()));
        }
        self.pos += 1;
        if let Some(e) = self.older.as_mut() {
            e.advance(bit)?;
        }
        self.newer.as_mut().unwrap().advance(bit)
    }

    pub fn symbol(&mut self) -> Result<LaggedSymbol> {
        let left = match self.older.as_mut() {
            Some(e) => e.symbol()?,
            None => None,
        };
        let right = match self.newer.as_mut() {
            Some(e) => e.symbol()?,
            None => None,
        };
        Ok(LaggedSymbol { left, right })
    }
}

impl StreamEncoder for UntruncatedLagged {
    type Input = bool;
    type Output = LaggedSymbol;

    fn push(&mut self, bit: bool) -> Result<LaggedSymbol> {
        self.advance(bit)?;
        self.symbol()
    }

    fn consumed(&self) -> usize {
        self.pos
    }
}

pub fn encode_untruncated_lagged(params: &Arc<LaggedParams>, x: &BitString) -> Result<Vec<LaggedSymbol>> {
    let mut enc = UntruncatedLagged::new(params.clone());
    x.iter().map(|b| enc.push(b)).collect()
}
