//! The block code `C: {0,1}^{w s} -> ({0,1}^c)^s` used by the lagged codes.
//!
//! Two recipes are provided. RS-only evaluates a Reed-Solomon code at `s`
//! points; `c` grows like `log s`, and when the symbol size would exceed the
//! table limit the message is split over `t` interleaved RS codewords. The
//! concatenated recipe uses an outer RS code over GF(2^m), a seeded random
//! binary inner code of rate 1/8 and relative distance 3/10, then regroups
//! the bits into `s` symbols of a constant `c` bits.
//!
//! The message is zero-padded at its most significant end.

pub mod gf2m;
pub mod inner;
pub mod rs;

use std::sync::Arc;

use num_integer::Integer;
use num_rational::Rational64;

use crate::error::{Error, Result};
use crate::symbol::BitString;
pub use gf2m::{gf_inv, gf_mul, Gf2m, Gf2mElement};
pub use inner::{find_inner_code, InnerCode, InnerCodeCache};
pub use rs::{rs_encode, RSParams};

/// Relative distance of the inner code in the concatenated recipe.
pub const DELTA_IN: (i64, i64) = (3, 10);
/// Inner codeword bits per message bit.
pub const INNER_EXPANSION: usize = 8;
/// Default input multiplier: `C` encodes `3s` bits.
pub const DEFAULT_WIDTH: usize = 3;
/// Horizon of the scan that computes `s_delta`.
pub const S_DELTA_HORIZON: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recipe {
    RsOnly,
    Concatenated,
}

impl std::str::FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rs" => Ok(Recipe::RsOnly),
            "concat" => Ok(Recipe::Concatenated),
            _ => Err(Error::invalid(format!("unknown recipe {s:?} (rs|concat)"))),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Construction {
    /// `interleave` independent RS codewords side by side in every symbol.
    RsOnly { outer: RSParams, interleave: usize },
    Concatenated {
        outer: RSParams,
        inner: Arc<InnerCode>,
        delta_out: Rational64,
    },
}

#[derive(Clone, Debug)]
pub struct CodeSpecC {
    pub s: usize,
    /// Input bits, `w * s`.
    pub input_bits: usize,
    /// Bits per output symbol.
    pub c: usize,
    pub target: Rational64,
    /// Distance guaranteed by the component parameters.
    pub provable: Rational64,
    pub seed: u64,
    pub construction: Construction,
}

fn ceil_div(a: i64, b: i64) -> i64 {
    Integer::div_ceil(&a, &b)
}

fn ceil_log2(x: usize) -> u32 {
    x.next_power_of_two().trailing_zeros()
}

fn check_delta(delta: Rational64) -> Result<()> {
    if delta < Rational64::from_integer(0) || delta >= Rational64::from_integer(1) {
        return Err(Error::invalid(format!("delta = {delta} outside [0, 1)")));
    }
    Ok(())
}

/// Arithmetic skeleton of a recipe, before any inner code is searched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Plan {
    m: u32,
    k: usize,
    n: usize,
    interleave: usize,
    c: usize,
}

fn rs_plan(s: usize, w: usize, delta: Rational64) -> Result<Plan> {
    let one_minus = Rational64::from_integer(1) - delta;
    let wr = Rational64::from_integer(w as i64) / one_minus;
    let m_rate = (ceil_div(*wr.numer(), *wr.denom()) + 1) as u32;
    let m_len = ceil_log2(s + 1);
    let m = m_rate.max(m_len);
    if m <= gf2m::MAX_DEGREE {
        let k = (w * s).div_ceil(m as usize);
        return Ok(Plan {
            m,
            k,
            n: s,
            interleave: 1,
            c: m as usize,
        });
    }
    // Interleave t codewords over the smallest field that holds s points.
    if m_len > gf2m::MAX_DEGREE {
        return Err(Error::infeasible(format!(
            "s = {s} needs GF(2^{m_len}); the field table stops at degree {}",
            gf2m::MAX_DEGREE
        )));
    }
    let ds = delta * Rational64::from_integer(s as i64);
    let k = (s as i64 - ceil_div(*ds.numer(), *ds.denom()) + 1).clamp(1, s as i64) as usize;
    let t = (w * s).div_ceil(k * m_len as usize);
    Ok(Plan {
        m: m_len,
        k,
        n: s,
        interleave: t,
        c: t * m_len as usize,
    })
}

fn concat_plan(s: usize, w: usize, delta: Rational64) -> Result<(Plan, Rational64)> {
    let delta_in = Rational64::new(DELTA_IN.0, DELTA_IN.1);
    if delta >= Rational64::new(1, 2) {
        return Err(Error::infeasible(format!(
            "delta = {delta}: a binary inner code needs delta_in < 1/2 (Plotkin bound); \
             the concatenated recipe cannot reach this distance"
        )));
    }
    if delta >= delta_in {
        return Err(Error::infeasible(format!(
            "delta = {delta} is at least the inner distance {delta_in}; use the rs recipe"
        )));
    }
    let delta_out = delta / delta_in;
    let denom = Rational64::from_integer(1) - delta_out;
    let cr = Rational64::from_integer((INNER_EXPANSION * w) as i64) / denom;
    let c = ceil_div(*cr.numer(), *cr.denom()) as usize;
    let k_for = |m: usize| (w * s).div_ceil(m);
    for m in 1..=gf2m::MAX_DEGREE as usize {
        let n = s * c / (INNER_EXPANSION * m);
        if n < (1usize << m) {
            let k = k_for(m);
            if k > n || n == 0 {
                return Err(Error::infeasible(format!(
                    "s = {s} is too small: {n} outer symbols cannot carry {k} message symbols"
                )));
            }
            return Ok((
                Plan {
                    m: m as u32,
                    k,
                    n,
                    interleave: 1,
                    c,
                },
                delta_out,
            ));
        }
    }
    Err(Error::infeasible(format!(
        "s = {s} needs an outer field beyond GF(2^{})",
        gf2m::MAX_DEGREE
    )))
}

fn rs_provable(plan: &Plan, s: usize) -> Rational64 {
    Rational64::new((s - plan.k + 1) as i64, s as i64)
}

/// Bits that differ between two codewords are at least `(N - k + 1) d_in`;
/// a `c`-bit symbol holds at most `c` of them.
fn concat_provable(plan: &Plan, s: usize, d_in: usize) -> Rational64 {
    let bits = ((plan.n - plan.k + 1) * d_in) as i64;
    let syms = ceil_div(bits, plan.c as i64).min(s as i64);
    Rational64::new(syms, s as i64)
}

fn plan_provable(s: usize, w: usize, delta: Rational64, recipe: Recipe) -> Result<Rational64> {
    match recipe {
        Recipe::RsOnly => Ok(rs_provable(&rs_plan(s, w, delta)?, s)),
        Recipe::Concatenated => {
            let (plan, _) = concat_plan(s, w, delta)?;
            let d_in = inner::required_distance(
                Rational64::new(DELTA_IN.0, DELTA_IN.1),
                INNER_EXPANSION * plan.m as usize,
            );
            Ok(concat_provable(&plan, s, d_in))
        }
    }
}

/// Smallest `s` from which the recipe's provable distance meets `delta`
/// for every `s' <= S_DELTA_HORIZON`, using the guaranteed inner distance.
pub fn s_delta(delta: Rational64, recipe: Recipe, w: usize) -> Result<usize> {
    check_delta(delta)?;
    let mut best = None;
    for s in (1..=S_DELTA_HORIZON).rev() {
        let ok = matches!(plan_provable(s, w, delta, recipe), Ok(p) if p >= delta);
        if !ok {
            break;
        }
        best = Some(s);
    }
    best.ok_or_else(|| {
        Error::infeasible(format!(
            "no s <= {S_DELTA_HORIZON} reaches delta = {delta} with this recipe"
        ))
    })
}

pub fn build_code_c(s: usize, delta: Rational64, recipe: Recipe, seed: u64) -> Result<CodeSpecC> {
    build_code_c_with(s, DEFAULT_WIDTH, delta, recipe, seed, None)
}

/// Builds `C` for `w * s`-bit inputs.
pub fn build_code_c_with(
    s: usize,
    w: usize,
    delta: Rational64,
    recipe: Recipe,
    seed: u64,
    cache: Option<&InnerCodeCache>,
) -> Result<CodeSpecC> {
    check_delta(delta)?;
    if s == 0 || w == 0 {
        return Err(Error::invalid("s and the width multiplier must be >= 1"));
    }
    let spec = match recipe {
        Recipe::RsOnly => {
            let plan = rs_plan(s, w, delta)?;
            CodeSpecC {
                s,
                input_bits: w * s,
                c: plan.c,
                target: delta,
                provable: rs_provable(&plan, s),
                seed,
                construction: Construction::RsOnly {
                    outer: RSParams::new(plan.m, plan.k, plan.n)?,
                    interleave: plan.interleave,
                },
            }
        }
        Recipe::Concatenated => {
            let (plan, delta_out) = concat_plan(s, w, delta)?;
            let m_in = plan.m as usize;
            let n_in = INNER_EXPANSION * m_in;
            let delta_in = Rational64::new(DELTA_IN.0, DELTA_IN.1);
            let inner = match cache {
                Some(c) => c.get_or_find(m_in, n_in, delta_in, seed)?,
                None => find_inner_code(m_in, n_in, delta_in, seed, inner::DEFAULT_ATTEMPTS)?,
            };
            CodeSpecC {
                s,
                input_bits: w * s,
                c: plan.c,
                target: delta,
                provable: concat_provable(&plan, s, inner.verified_distance),
                seed,
                construction: Construction::Concatenated {
                    outer: RSParams::new(plan.m, plan.k, plan.n)?,
                    inner: Arc::new(inner),
                    delta_out,
                },
            }
        }
    };
    if spec.provable < delta {
        let sd = s_delta(delta, recipe, w)
            .map(|v| v.to_string())
            .unwrap_or_else(|_| "none".into());
        return Err(Error::infeasible(format!(
            "s = {s} is below s_delta = {sd}: provable distance {} < {delta}",
            spec.provable
        )));
    }
    Ok(spec)
}

/// Splits `bits` (zero-padded at the front to `count * m` bits) into `m`-bit symbols.
fn to_symbols(bits: &BitString, count: usize, m: usize) -> Vec<u32> {
    let total = count * m;
    let pad = total - bits.len();
    let mut padded = BitString::zeros(pad);
    padded.append(bits);
    (0..count)
        .map(|i| padded.slice(i * m, m).to_u64() as u32)
        .collect()
}

impl CodeSpecC {
    pub fn recipe(&self) -> Recipe {
        match self.construction {
            Construction::RsOnly { .. } => Recipe::RsOnly,
            Construction::Concatenated { .. } => Recipe::Concatenated,
        }
    }

    /// The `s * c` codeword bits, symbol after symbol.
    pub fn encode_flat(&self, x: &BitString) -> Result<BitString> {
        if x.len() != self.input_bits {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: self.input_bits,
            });
        }
        match &self.construction {
            Construction::RsOnly { outer, interleave } => {
                let m = outer.m() as usize;
                let syms = to_symbols(x, interleave * outer.k(), m);
                let words: Vec<Vec<u32>> = syms
                    .chunks(outer.k())
                    .map(|msg| rs_encode(outer, msg))
                    .collect::<Result<_>>()?;
                let mut out = BitString::with_capacity(self.s * self.c);
                for p in 0..self.s {
                    for w in &words {
                        out.push_uint(w[p] as u64, m);
                    }
                }
                Ok(out)
            }
            Construction::Concatenated { outer, inner, .. } => {
                let syms = to_symbols(x, outer.k(), outer.m() as usize);
                let word = rs_encode(outer, &syms)?;
                let mut out = BitString::with_capacity(self.s * self.c);
                for v in word {
                    inner.encode_into(v, &mut out);
                }
                out.extend_zeros(self.s * self.c - out.len());
                Ok(out)
            }
        }
    }

    pub fn encode(&self, x: &BitString) -> Result<Vec<BitString>> {
        let flat = self.encode_flat(x)?;
        Ok((0..self.s).map(|i| flat.slice(i * self.c, self.c)).collect())
    }

    /// One-line JSON summary.
    pub fn summary(&self) -> serde_json::Value {
        let ratio = |r: Rational64| format!("{}/{}", r.numer(), r.denom());
        let mut v = serde_json::json!({
            "s": self.s,
            "input_bits": self.input_bits,
            "c": self.c,
            "delta": ratio(self.target),
            "provable_delta": ratio(self.provable),
            "seed": self.seed,
        });
        let obj = v.as_object_mut().unwrap();
        match &self.construction {
            Construction::RsOnly { outer, interleave } => {
                obj.insert("recipe".into(), "rs".into());
                obj.insert("m".into(), outer.m().into());
                obj.insert("k".into(), outer.k().into());
                obj.insert("n".into(), outer.n().into());
                obj.insert("interleave".into(), (*interleave).into());
            }
            Construction::Concatenated {
                outer,
                inner,
                delta_out,
            } => {
                obj.insert("recipe".into(), "concat".into());
                obj.insert("m".into(), outer.m().into());
                obj.insert("k".into(), outer.k().into());
                obj.insert("n".into(), outer.n().into());
                obj.insert("delta_out".into(), ratio(*delta_out).into());
                obj.insert("inner_n".into(), inner.n_in.into());
                obj.insert("inner_distance".into(), inner.verified_distance.into());
            }
        }
        v
    }
}

/// Alias matching the functional form used elsewhere.
pub fn encode_c(spec: &CodeSpecC, x: &BitString) -> Result<Vec<BitString>> {
    spec.encode(x)
}
