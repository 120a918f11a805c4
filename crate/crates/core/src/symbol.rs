//! Bit strings, output symbols, alphabet descriptors and the split/distance
//! primitives shared by every encoder.
//!
//! Sequences are 1-indexed in the documentation of positions (`x_1..x_n`),
//! while Rust slices are 0-indexed as usual: position `i` lives at `x[i - 1]`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};

/// Arbitrary-precision non-negative integer.
pub type Nat = BigUint;

/// Packed bit string, most-significant bit first.
///
/// Bit `i` lives in `words[i / 64]` at bit `63 - i % 64`. Bits past `len`
/// are kept zero so derived equality and hashing are exact.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn zeros(len: usize) -> Self {
        BitString {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        bits.iter().copied().collect()
    }

    /// Parses a string of `0`/`1` characters.
    pub fn parse01(s: &str) -> Result<Self> {
        let mut out = BitString::with_capacity(s.len());
        for ch in s.chars() {
            match ch {
                '0' => out.push(false),
                '1' => out.push(true),
                _ => return Err(Error::invalid(format!("not a bit: {ch:?}"))),
            }
        }
        Ok(out)
    }

    /// `width`-bit big-endian representation of `value`.
    pub fn from_uint(value: u64, width: usize) -> Result<Self> {
        if width < 64 && value >> width != 0 {
            return Err(Error::invalid(format!(
                "{value} does not fit in {width} bits"
            )));
        }
        let mut out = BitString::with_capacity(width);
        if width > 64 {
            out.extend_zeros(width - 64);
            out.push_uint(value, 64);
        } else {
            out.push_uint(value, width);
        }
        Ok(out)
    }

    pub fn from_biguint(value: &BigUint, width: usize) -> Result<Self> {
        if value.bits() as usize > width {
            return Err(Error::invalid(format!(
                "{value} does not fit in {width} bits"
            )));
        }
        let mut out = BitString::zeros(width);
        for b in 0..value.bits() {
            if value.bit(b) {
                out.set(width - 1 - b as usize, true);
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] >> (63 - i % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (63 - i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if bit {
            self.words[self.len / 64] |= 1u64 << (63 - self.len % 64);
        }
        self.len += 1;
    }

    pub fn extend_zeros(&mut self, count: usize) {
        self.len += count;
        self.words.resize(self.len.div_ceil(64), 0);
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        if width == 0 {
            return;
        }
        let aligned = value << (64 - width);
        self.push_aligned(aligned, width);
    }

    /// Appends the top `nbits` bits of `word`.
    fn push_aligned(&mut self, word: u64, nbits: usize) {
        debug_assert!((1..=64).contains(&nbits));
        let word = if nbits == 64 {
            word
        } else {
            word & !(u64::MAX >> nbits)
        };
        let off = self.len % 64;
        if off == 0 {
            self.words.push(word);
        } else {
            *self.words.last_mut().unwrap() |= word >> off;
            if nbits > 64 - off {
                self.words.push(word << (64 - off));
            }
        }
        self.len += nbits;
    }

    pub fn append(&mut self, other: &BitString) {
        let mut left = other.len;
        for &w in &other.words {
            let take = left.min(64);
            if take == 0 {
                break;
            }
            self.push_aligned(w, take);
            left -= take;
        }
    }

    /// Copy of bits `start .. start + len`.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(
            start + len <= self.len,
            "slice {start}+{len} out of range {}",
            self.len
        );
        let nwords = len.div_ceil(64);
        let mut words = Vec::with_capacity(nwords);
        let sh = start % 64;
        let base = start / 64;
        for k in 0..nwords {
            let hi = self.words[base + k];
            let w = if sh == 0 {
                hi
            } else {
                let lo = self.words.get(base + k + 1).copied().unwrap_or(0);
                (hi << sh) | (lo >> (64 - sh))
            };
            words.push(w);
        }
        let mut out = BitString { words, len };
        out.clear_tail();
        out
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !(u64::MAX >> r);
            }
        }
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(BitString {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a ^ b)
                .collect(),
            len: self.len,
        })
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Big-endian value of a string of at most 64 bits.
    pub fn to_u64(&self) -> u64 {
        assert!(self.len <= 64, "{} bits do not fit in u64", self.len);
        if self.len == 0 {
            0
        } else {
            self.words[0] >> (64 - self.len)
        }
    }

    pub fn to_biguint(&self) -> BigUint {
        let mut v = BigUint::zero();
        for w in &self.words {
            v = (v << 64u32) + BigUint::from(*w);
        }
        let pad = self.words.len() * 64 - self.len;
        v >> pad
    }

    /// Lowercase hex of the numeric value, `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let pad = digits * 4 - self.len;
        let mut out = String::with_capacity(digits);
        let mut acc = 0u8;
        let mut nb = pad;
        for bit in self.iter() {
            acc = acc << 1 | bit as u8;
            nb += 1;
            if nb == 4 {
                out.push(char::from_digit(acc as u32, 16).unwrap());
                acc = 0;
                nb = 0;
            }
        }
        out
    }

    pub fn from_hex(hex: &str, width: usize) -> Result<BitString> {
        let digits = width.div_ceil(4);
        let hex = hex.trim();
        if hex.len() != digits {
            return Err(Error::invalid(format!(
                "expected {digits} hex digits for {width} bits, got {}",
                hex.len()
            )));
        }
        let pad = digits * 4 - width;
        let mut full = BitString::with_capacity(digits * 4);
        for ch in hex.chars() {
            let d = ch
                .to_digit(16)
                .ok_or_else(|| Error::invalid(format!("not a hex digit: {ch:?}")))?;
            full.push_uint(d as u64, 4);
        }
        if (0..pad).any(|i| full.get(i)) {
            return Err(Error::invalid(format!("{hex} exceeds {width} bits")));
        }
        Ok(full.slice(pad, width))
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

impl FromIterator<bool> for BitString {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut out = BitString::new();
        for b in iter {
            out.push(b);
        }
        out
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

/// A per-position output symbol.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    /// The empty output of a lagged encoder that has not seen a full block.
    Blank,
    /// Fixed-width payload; the width is the payload length.
    Bits(BitString),
    Int(BigInt),
    IntPair(BigInt, BigInt),
    Tuple(Vec<Symbol>),
}

impl Symbol {
    pub fn tuple(parts: Vec<Symbol>) -> Result<Symbol> {
        if parts.is_empty() {
            return Err(Error::invalid("tuple symbols need at least one part"));
        }
        Ok(Symbol::Tuple(parts))
    }

    pub fn nat_pair(a: &Nat, b: &Nat) -> Symbol {
        Symbol::IntPair(BigInt::from(a.clone()), BigInt::from(b.clone()))
    }

    /// Bits carried by the symbol, treating integers by their magnitude.
    pub fn bit_size(&self) -> usize {
        match self {
            Symbol::Blank => 0,
            Symbol::Bits(b) => b.len(),
            Symbol::Int(v) => v.bits() as usize,
            Symbol::IntPair(a, b) => (a.bits() + b.bits()) as usize,
            Symbol::Tuple(parts) => parts.iter().map(Symbol::bit_size).sum(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Blank => f.write_str("-"),
            Symbol::Bits(b) => f.write_str(&b.to_hex()),
            Symbol::Int(v) => write!(f, "{v}"),
            Symbol::IntPair(a, b) => write!(f, "({a},{b})"),
            Symbol::Tuple(parts) => {
                f.write_str("(")?;
                for (k, p) in parts.iter().enumerate() {
                    if k > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Width of one component of a position's alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentWidth {
    Bits(usize),
    Blank,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphabetDescriptor {
    pub position: usize,
    pub total_bits: usize,
    pub structure: Vec<(String, ComponentWidth)>,
}

impl AlphabetDescriptor {
    pub fn new(position: usize, structure: Vec<(String, ComponentWidth)>) -> Self {
        let total_bits = structure
            .iter()
            .map(|(_, w)| match w {
                ComponentWidth::Bits(b) => *b,
                ComponentWidth::Blank => 0,
            })
            .sum();
        AlphabetDescriptor {
            position,
            total_bits,
            structure,
        }
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::LengthMismatch { left: a, right: b })
    } else {
        Ok(())
    }
}

/// Length of the longest common prefix of two equal-length sequences.
pub fn split<T: PartialEq>(x: &[T], y: &[T]) -> Result<usize> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).take_while(|(a, b)| a == b).count())
}

pub fn hamming_distance<T: PartialEq>(x: &[T], y: &[T]) -> Result<usize> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).filter(|(a, b)| a != b).count())
}

pub fn hamming_weight<T: PartialEq>(x: &[T], zero: &T) -> usize {
    x.iter().filter(|v| *v != zero).count()
}

/// Online encoder: one output symbol per pushed input symbol.
///
/// Output `i` may depend on inputs `1..=i` only; every implementation is
/// checked for prefix determinism in the test suite.
pub trait StreamEncoder {
    type Input;
    type Output;

    fn push(&mut self, input: Self::Input) -> Result<Self::Output>;

    /// Number of inputs consumed so far.
    fn consumed(&self) -> usize;
}

pub fn encode_stream<E, I>(enc: &mut E, inputs: I) -> Result<Vec<E::Output>>
where
    E: StreamEncoder,
    I: IntoIterator<Item = E::Input>,
{
    inputs.into_iter().map(|x| enc.push(x)).collect()
}

/// Conversion into the serializable symbol type.
pub trait ToSymbol {
    fn to_symbol(&self) -> Symbol;
}

impl ToSymbol for Symbol {
    fn to_symbol(&self) -> Symbol {
        self.clone()
    }
}

impl ToSymbol for BitString {
    fn to_symbol(&self) -> Symbol {
        Symbol::Bits(self.clone())
    }
}

impl ToSymbol for bool {
    fn to_symbol(&self) -> Symbol {
        Symbol::Int(BigInt::from(*self as u8))
    }
}

impl ToSymbol for u64 {
    fn to_symbol(&self) -> Symbol {
        Symbol::Int(BigInt::from(*self))
    }
}

impl ToSymbol for u8 {
    fn to_symbol(&self) -> Symbol {
        Symbol::Int(BigInt::from(*self))
    }
}

impl ToSymbol for BigInt {
    fn to_symbol(&self) -> Symbol {
        Symbol::Int(self.clone())
    }
}

impl<T: ToSymbol> ToSymbol for Vec<T> {
    fn to_symbol(&self) -> Symbol {
        if self.is_empty() {
            Symbol::Blank
        } else {
            Symbol::Tuple(self.iter().map(ToSymbol::to_symbol).collect())
        }
    }
}
