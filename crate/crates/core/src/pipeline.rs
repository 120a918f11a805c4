//! The binary-input tree code: a sliding window of the last `ell_1 + 1`
//! input bits superimposed with untruncated lagged codes whose lags follow
//! the schedule `ell_1 = a s_min`, `ell_{g+1} = floor(ell_g^2 / (2 a^2))`.
//!
//! Level `g` uses blocks of `s_g` bits, the smallest even integer with
//! `s_g >= ell_g / a` and `s_g^2 / 2 >= ell_{g+1}`, so its lag range
//! `[ell_g, s_g^2 / 2]` reaches the next level. A level contributes to the
//! output from position `s_g` on, whatever the target length `n`, so
//! encodings for different `n` agree on common prefixes.

use std::collections::VecDeque;
use std::sync::Arc;

use num_integer::Roots;
use num_rational::Rational64;

use crate::ecc::{build_code_c_with, s_delta, CodeSpecC, InnerCodeCache, Recipe};
use crate::error::{Error, Result};
use crate::lagged::{LaggedParams, LaggedSymbol, UntruncatedLagged};
use crate::packing::{PackedCodeParams, PackedKind};
use crate::symbol::{AlphabetDescriptor, BitString, ComponentWidth, StreamEncoder, Symbol, ToSymbol};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub n: usize,
    /// Declared final distance.
    pub eta: Rational64,
    /// Target distance of `C`.
    pub delta: Rational64,
    pub a: usize,
    /// `(s, r)` of the base tree code; `(1, 1)` selects `TC_ℤ`.
    pub boost: (usize, usize),
    pub s_min: usize,
    pub recipe: Recipe,
    pub seed: u64,
}

impl PipelineConfig {
    /// Defaults: `delta = 1/4`, `a = 6`, `s_min = 16`, concatenated `C`.
    pub fn new(n: usize) -> Self {
        PipelineConfig {
            n,
            eta: Rational64::new(1, 16),
            delta: Rational64::new(1, 4),
            a: 6,
            boost: (1, 1),
            s_min: 16,
            recipe: Recipe::Concatenated,
            seed: 0,
        }
    }

    pub fn packed_kind(&self) -> Result<PackedKind> {
        match self.boost {
            (1, 1) => Ok(PackedKind::Systematic),
            (1, r) if r >= 2 => Ok(PackedKind::Boosted { r }),
            (s, r) => Err(Error::invalid(format!(
                "boost (s, r) = ({s}, {r}) unsupported: binary input needs s = 1 and r >= 1"
            ))),
        }
    }

    pub fn rule_constant(&self) -> usize {
        2 * self.a * self.a
    }

    pub fn window_len(&self) -> usize {
        self.a * self.s_min + 1
    }
}

/// Picks `(s, r)`, `delta` and `a` so that the composed bound reaches `eta`.
pub fn boosted_config(n: usize, eta: Rational64) -> Result<PipelineConfig> {
    let one = Rational64::from_integer(1);
    if eta < Rational64::from_integer(0) || eta >= one {
        return Err(Error::invalid(format!("eta = {eta} outside [0, 1)")));
    }
    let mut cfg = PipelineConfig::new(n);
    if eta <= Rational64::new(1, 16) {
        cfg.eta = eta;
        return Ok(cfg);
    }
    let target = one - (one - eta) / 3;
    let mut r = 1usize;
    while Rational64::new(r as i64, r as i64 + 1) < target {
        r += 1;
    }
    let rho = Rational64::new(r as i64, r as i64 + 1);
    let mut a = 2usize;
    while target * (rho - (one + rho) / Rational64::from_integer(a as i64)) < eta {
        a += 1;
    }
    let recipe = if target < Rational64::new(3, 10) {
        Recipe::Concatenated
    } else {
        Recipe::RsOnly
    };
    let w = PackedCodeParams::new(1, PackedKind::Boosted { r })?.width_multiplier();
    let s_floor = s_delta(target, recipe, w)?;
    let mut s_min = (2 * a + 1).max(s_floor);
    if s_min % 2 == 1 {
        s_min += 1;
    }
    cfg.eta = eta;
    cfg.delta = target;
    cfg.a = a;
    cfg.boost = (1, r);
    cfg.s_min = s_min;
    cfg.recipe = recipe;
    Ok(cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Level {
    /// 1-based level index.
    pub g: usize,
    pub ell: usize,
    pub s: usize,
    /// Lag interval `[ell_g, floor(ell_g^2 / K)]` assigned to this level.
    pub lo: usize,
    pub hi: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    pub a: usize,
    pub s_min: usize,
    pub rule_constant: usize,
    pub n: usize,
    /// Levels whose intervals cover `[ell_1, n]`.
    pub levels: Vec<Level>,
}

fn next_ell(ell: usize, k: usize) -> Result<usize> {
    let sq = (ell as u128) * (ell as u128) / k as u128;
    usize::try_from(sq).map_err(|_| Error::infeasible("schedule overflows usize"))
}

fn even_ceil(v: usize) -> usize {
    v + v % 2
}

/// Levels `g = 1, 2, ..` while `s_g <= max_s`.
pub fn level_sequence(a: usize, s_min: usize, max_s: usize) -> Result<Vec<Level>> {
    levels_while(a, s_min, |l| l.s <= max_s, |_| false)
}

/// Generates levels while `keep` holds, stopping after the first level
/// for which `last` holds.
fn levels_while(
    a: usize,
    s_min: usize,
    keep: impl Fn(&Level) -> bool,
    last: impl Fn(&Level) -> bool,
) -> Result<Vec<Level>> {
    if a < 2 {
        return Err(Error::invalid(format!("a = {a} must be >= 2")));
    }
    if s_min == 0 {
        return Err(Error::invalid("s_min must be >= 1"));
    }
    let k = 2 * a * a;
    let mut out = Vec::new();
    let mut ell = a * s_min;
    for g in 1.. {
        let by_ratio = ell.div_ceil(a);
        let probe = Level {
            g,
            ell,
            s: even_ceil(by_ratio.max(s_min).max(2)),
            lo: ell,
            hi: ell,
        };
        if !keep(&probe) {
            break;
        }
        let next = next_ell(ell, k)?;
        if next <= ell {
            return Err(Error::infeasible(format!(
                "schedule stalls at level {g}: ell = {ell} gives floor(ell^2 / {k}) = {next}; \
                 growth needs ell > {k}"
            )));
        }
        let by_reach = {
            let t = 2 * next;
            let r = t.sqrt();
            if r * r < t {
                r + 1
            } else {
                r
            }
        };
        let lvl = Level {
            s: even_ceil(by_ratio.max(by_reach).max(s_min).max(2)),
            hi: next,
            ..probe
        };
        if !keep(&lvl) {
            break;
        }
        out.push(lvl);
        if last(&lvl) {
            break;
        }
        ell = next;
    }
    Ok(out)
}

pub fn build_schedule(n: usize, s_min: usize) -> Result<Schedule> {
    build_schedule_with(n, s_min, 6)
}

pub fn build_schedule_with(n: usize, s_min: usize, a: usize) -> Result<Schedule> {
    let ell1 = a * s_min;
    if n < ell1 {
        return Err(Error::invalid(format!("n = {n} is below ell_1 = {ell1}")));
    }
    let k = 2 * a * a;
    let levels = levels_while(a, s_min, |_| true, |l| l.hi >= n)?;
    let sched = Schedule {
        a,
        s_min,
        rule_constant: k,
        n,
        levels,
    };
    sched.check_contiguous()?;
    Ok(sched)
}

/// Which part of the code is responsible for a lag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coverage {
    Window,
    Level(usize),
}

impl Schedule {
    pub fn ell1(&self) -> usize {
        self.a * self.s_min
    }

    fn check_contiguous(&self) -> Result<()> {
        let mut reach = self.ell1();
        for lvl in &self.levels {
            if lvl.lo > reach {
                return Err(Error::infeasible(format!(
                    "gap in lag coverage before level {}: ({reach}, {})",
                    lvl.g, lvl.lo
                )));
            }
            reach = reach.max(lvl.hi);
        }
        if reach < self.n {
            return Err(Error::infeasible(format!(
                "levels reach lag {reach} < n = {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn coverage(&self, b: usize) -> Option<Coverage> {
        if b >= 1 && b <= self.ell1() {
            return Some(Coverage::Window);
        }
        self.levels
            .iter()
            .find(|l| l.lo <= b && b <= l.hi)
            .map(|l| Coverage::Level(l.g))
    }
}

#[derive(Clone, Debug)]
pub struct PipelineLevel {
    pub level: Level,
    pub params: Arc<LaggedParams>,
    /// Lagged distance on `[ell_g, s_g^2 / 2]`.
    pub guarantee: Rational64,
}

#[derive(Debug)]
pub struct Pipeline {
    pub config: PipelineConfig,
    pub schedule: Schedule,
    /// Every level with `s_g <= n`, in order.
    pub levels: Vec<PipelineLevel>,
}

fn build_level(
    cfg: &PipelineConfig,
    kind: PackedKind,
    lvl: Level,
    cache: Option<&InnerCodeCache>,
) -> Result<PipelineLevel> {
    let w = PackedCodeParams::new(lvl.s, kind)?.width_multiplier();
    let make = |delta: Rational64| -> Result<PipelineLevel> {
        let spec: CodeSpecC = build_code_c_with(lvl.s, w, delta, cfg.recipe, cfg.seed, cache)?;
        let params = LaggedParams::new(lvl.s, lvl.ell, Arc::new(spec), kind)?;
        let guarantee = params.guaranteed();
        Ok(PipelineLevel {
            level: lvl,
            params: Arc::new(params),
            guarantee,
        })
    };
    let first = make(cfg.delta)?;
    if first.guarantee >= cfg.eta {
        return Ok(first);
    }
    // The block width is rounded up, so ell_g / s_g can fall below a. Ask
    // C for the distance that restores eta at this level's actual ratio.
    let rho = first.params.packed.base_distance();
    let factor = rho
        - (Rational64::from_integer(1) + rho)
            * Rational64::new(lvl.s as i64, lvl.ell as i64);
    if factor <= Rational64::from_integer(0) {
        return Err(Error::infeasible(format!(
            "level {}: ell / s = {}/{} is too small for any distance",
            lvl.g, lvl.ell, lvl.s
        )));
    }
    let second = make(cfg.eta / factor)?;
    if second.guarantee < cfg.eta {
        return Err(Error::infeasible(format!(
            "level {}: guarantee {} below eta = {}",
            lvl.g, second.guarantee, cfg.eta
        )));
    }
    Ok(second)
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self> {
        Self::with_cache(config, None)
    }

    pub fn with_cache(config: PipelineConfig, cache: Option<&InnerCodeCache>) -> Result<Self> {
        let kind = config.packed_kind()?;
        let schedule = build_schedule_with(config.n, config.s_min, config.a)?;
        let levels = level_sequence(config.a, config.s_min, config.n)?
            .into_iter()
            .map(|lvl| build_level(&config, kind, lvl, cache))
            .collect::<Result<Vec<_>>>()?;
        Ok(Pipeline {
            config,
            schedule,
            levels,
        })
    }

    pub fn window_len(&self) -> usize {
        self.config.window_len()
    }

    /// Minimum guarantee over the levels that cover lags up to `n`.
    pub fn guarantee(&self) -> Rational64 {
        let covering = self.schedule.levels.len();
        self.levels[..covering]
            .iter()
            .map(|l| l.guarantee)
            .fold(Rational64::from_integer(1), |acc, g| acc.min(g))
    }

    pub fn encoder(self: &Arc<Self>) -> PipelineEncoder {
        PipelineEncoder::new(self.clone())
    }

    pub fn alphabet_at(&self, i: usize) -> Result<AlphabetDescriptor> {
        if i == 0 || i > self.config.n {
            return Err(Error::invalid(format!(
                "position {i} outside 1..={}",
                self.config.n
            )));
        }
        let mut structure = vec![(
            "window".to_string(),
            ComponentWidth::Bits(i.min(self.window_len())),
        )];
        for l in &self.levels {
            let g = l.level.g;
            if l.level.s <= i {
                structure.push((format!("level {g} left"), ComponentWidth::Bits(l.params.c())));
                structure.push((format!("level {g} right"), ComponentWidth::Bits(l.params.c())));
            } else {
                structure.push((format!("level {g}"), ComponentWidth::Blank));
            }
        }
        Ok(AlphabetDescriptor::new(i, structure))
    }

    pub fn encode_final(self: &Arc<Self>, x: &BitString) -> Result<Vec<FinalSymbol>> {
        if x.len() > self.config.n {
            return Err(Error::Capacity {
                len: x.len(),
                capacity: self.config.n,
            });
        }
        let mut enc = self.encoder();
        x.iter().map(|b| enc.push(b)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinalSymbol {
    pub window: BitString,
    /// One entry per active level, level 1 first.
    pub levels: Vec<LaggedSymbol>,
}

impl FinalSymbol {
    /// Window bits plus the bits of every non-blank slot.
    pub fn payload_bits(&self) -> usize {
        self.window.len()
            + self
                .levels
                .iter()
                .map(|l| {
                    l.left.as_ref().map_or(0, BitString::len)
                        + l.right.as_ref().map_or(0, BitString::len)
                })
                .sum::<usize>()
    }
}

impl ToSymbol for FinalSymbol {
    fn to_symbol(&self) -> Symbol {
        let mut parts = vec![Symbol::Bits(self.window.clone())];
        parts.extend(self.levels.iter().map(ToSymbol::to_symbol));
        Symbol::Tuple(parts)
    }
}

impl std::fmt::Display for FinalSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_symbol())
    }
}

#[derive(Clone, Debug)]
pub struct PipelineEncoder {
    pipeline: Arc<Pipeline>,
    pos: usize,
    window: VecDeque<bool>,
    levels: Vec<UntruncatedLagged>,
}

impl PipelineEncoder {
    pub fn new(pipeline: Arc<Pipeline>) -> Self {
        let levels = pipeline
            .levels
            .iter()
            .map(|l| UntruncatedLagged::new(l.params.clone()))
            .collect();
        PipelineEncoder {
            window: VecDeque::with_capacity(pipeline.window_len() + 1),
            pipeline,
            pos: 0,
            levels,
        }
    }

    pub fn pipeline(&self) -> &Arc<Pipeline> {
        &self.pipeline
    }

    /// Consumes one bit without materializing the output symbol.
    pub fn advance(&mut self, bit: bool) -> Result<()> {
        if self.pos == self.pipeline.config.n {
            return Err(Error::Capacity {
                len: self.pos + 1,
                capacity: self.pipeline.config.n,
            });
        }
        self.pos += 1;
        self.window.push_back(bit);
        if self.window.len() > self.pipeline.window_len() {
            self.window.pop_front();
        }
        for l in &mut self.levels {
            l.advance(bit)?;
        }
        Ok(())
    }

    pub fn symbol(&mut self) -> Result<FinalSymbol> {
        let window: BitString = self.window.iter().copied().collect();
        let mut levels = Vec::new();
        for (enc, l) in self.levels.iter_mut().zip(&self.pipeline.levels) {
            if l.level.s <= self.pos {
                levels.push(enc.symbol()?);
            }
        }
        Ok(FinalSymbol { window, levels })
    }
}

impl StreamEncoder for PipelineEncoder {
    type Input = bool;
    type Output = FinalSymbol;

    fn push(&mut self, bit: bool) -> Result<FinalSymbol> {
        self.advance(bit)?;
        self.symbol()
    }

    fn consumed(&self) -> usize {
        self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn schedule_examples() {
        let s = build_schedule(1_000_000, 16).unwrap();
        let ells: Vec<usize> = s.levels.iter().map(|l| l.ell).collect();
        assert_eq!(ells, vec![96, 128, 227, 715, 7100, 700138]);
        let ss: Vec<usize> = s.levels.iter().map(|l| l.s).collect();
        assert_eq!(ss, vec![16, 22, 38, 120, 1184, 116690]);
        assert_eq!(build_schedule(96, 16).unwrap().levels.len(), 1);
        assert!(build_schedule(95, 16).is_err());
        let e = build_schedule(10_000, 12).unwrap_err();
        assert!(e.to_string().contains("stalls at level 1"), "{e}");
    }

    #[test]
    fn level_reach() {
        for l in level_sequence(6, 16, 10_000_000).unwrap() {
            assert!(l.s * l.s / 2 >= l.hi);
            assert!(l.s * 6 >= l.ell);
            assert_eq!(l.s % 2, 0);
        }
    }

    #[test]
    fn boosted_examples() {
        let c = boosted_config(100, r(0, 1)).unwrap();
        assert_eq!((c.a, c.boost, c.delta), (6, (1, 1), r(1, 4)));
        let c = boosted_config(100, r(1, 2)).unwrap();
        assert_eq!(c.boost, (1, 5));
        assert_eq!(c.delta, r(5, 6));
        assert_eq!(c.a, 8);
        let rho = r(5, 6);
        assert!(c.delta * (rho - (r(1, 1) + rho) / r(8, 1)) >= r(1, 2));
        assert!(boosted_config(100, r(1, 1)).is_err());
    }

    #[test]
    fn small_pipeline_shapes() {
        let p = Arc::new(Pipeline::new(PipelineConfig::new(300)).unwrap());
        let mut enc = p.encoder();
        let mut prev = 0;
        for i in 1..=300usize {
            let sym = enc.push(i % 3 == 0).unwrap();
            let alpha = p.alphabet_at(i).unwrap();
            assert!(alpha.total_bits >= prev);
            prev = alpha.total_bits;
            let declared: usize = sym.window.len()
                + sym
                    .levels
                    .iter()
                    .zip(&p.levels)
                    .map(|(_, l)| 2 * l.params.c())
                    .sum::<usize>();
            assert_eq!(declared, alpha.total_bits);
            assert!(sym.payload_bits() <= alpha.total_bits);
            for l in &p.levels {
                if l.level.ell > 6 * (i + 1) {
                    assert!(sym.levels.len() < l.level.g);
                }
            }
        }
        assert_eq!(p.alphabet_at(1).unwrap().total_bits, 1);
        assert!(enc.push(true).is_err());
    }
}
