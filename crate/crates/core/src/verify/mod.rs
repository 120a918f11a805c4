//! Ground-truth distance oracles.
//!
//! The pair engine enumerates the input tree once, interns every output
//! symbol to a per-depth id, and then walks pairs of subtrees that diverge
//! at each split, accumulating the Hamming distance incrementally. A branch
//! is cut only when it can no longer beat the current minimum, so results
//! are exact. Among minimizers the lexicographically least `(x, x')` (as
//! alphabet indices) is reported.

mod field;

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::ecc::CodeSpecC;
use crate::error::{Error, Result};
use crate::pascal::LowerTriangularMatrix;
use crate::symbol::{BitString, StreamEncoder, Symbol, ToSymbol};

pub use field::{
    entropy_hr, sample_toeplitz_code, toeplitz_condition, toeplitz_tilde_distance, SmallField,
    ToeplitzCode, ToeplitzEncoder, ENTROPY_TOLERANCE, SUPPORTED_FIELDS,
};

/// Cap on pair-walk steps.
pub const DEFAULT_PAIR_BUDGET: u64 = 1 << 36;
/// Cap on enumerated tree nodes.
pub const MAX_TREE_NODES: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Inputs as indices into the report's alphabet.
    pub x: Vec<usize>,
    pub x_prime: Vec<usize>,
    pub split: usize,
    /// Differing output symbols, or non-zero coordinates for weight reports.
    pub hamming: usize,
    pub n: usize,
}

#[derive(Clone, Debug)]
pub struct DistanceReport {
    pub value: Rational64,
    pub witness: Witness,
    /// Coordinates per position in the denominator (1 for symbol distance).
    pub scale: usize,
    pub alphabet: Vec<Symbol>,
    pub space: String,
    /// Pairs (or vectors) scored.
    pub examined: u64,
}

impl DistanceReport {
    pub fn inputs<T: Clone>(&self, alphabet: &[T]) -> (Vec<T>, Vec<T>) {
        let map = |v: &[usize]| v.iter().map(|&i| alphabet[i].clone()).collect();
        (map(&self.witness.x), map(&self.witness.x_prime))
    }

    /// Value and split recomputed from the witness fields.
    pub fn is_consistent(&self) -> bool {
        let w = &self.witness;
        let split = w.x.iter().zip(&w.x_prime).take_while(|(a, b)| a == b).count();
        w.x.len() == w.n
            && w.x_prime.len() == w.n
            && split == w.split
            && w.split < w.n
            && self.value == ratio(w.hamming, self.scale * (w.n - w.split))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let show = |v: &[usize]| -> String {
            Symbol::Tuple(v.iter().map(|&i| self.alphabet[i].clone()).collect()).to_string()
        };
        json!({
            "value": self.value.to_string(),
            "x": show(&self.witness.x),
            "x_prime": show(&self.witness.x_prime),
            "split": self.witness.split,
            "delta": self.witness.hamming,
            "n": self.witness.n,
            "scale": self.scale,
            "space": self.space,
            "examined": self.examined.to_string(),
        })
    }
}

fn ratio(num: usize, den: usize) -> Rational64 {
    Rational64::new(num as i64, den as i64)
}

fn tree_nodes(sigma: usize, depth: usize) -> u64 {
    let mut total = 0u64;
    let mut level = 1u64;
    for _ in 0..depth {
        level = level.saturating_mul(sigma as u64);
        total = total.saturating_add(level);
    }
    total
}

fn digits(mut idx: usize, sigma: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for d in out.iter_mut().rev() {
        *d = idx % sigma;
        idx /= sigma;
    }
    out
}

/// Output symbol ids for every node of the input tree.
struct SymbolTable {
    sigma: usize,
    /// `ids[d][node]` for nodes at depth `d >= 1`, numbered in base `sigma`.
    ids: Vec<Vec<u32>>,
}

impl SymbolTable {
    fn build<E>(proto: &E, alphabet: &[E::Input], depth: usize) -> Result<Self>
    where
        E: StreamEncoder + Clone,
        E::Input: Clone,
        E::Output: Eq + Hash,
    {
        let sigma = alphabet.len();
        let nodes = tree_nodes(sigma, depth);
        if nodes > MAX_TREE_NODES {
            return Err(Error::Budget {
                what: "input tree",
                needed: nodes.to_string(),
                budget: MAX_TREE_NODES as u128,
            });
        }
        let mut ids: Vec<Vec<u32>> = vec![Vec::new()];
        let mut width = 1usize;
        for _ in 0..depth {
            width *= sigma;
            ids.push(vec![0; width]);
        }
        let mut intern: HashMap<E::Output, u32> = HashMap::new();
        let mut stack = vec![(proto.clone(), 0usize, 0usize)];
        while let Some((enc, d, idx)) = stack.pop() {
            for (c, input) in alphabet.iter().enumerate() {
                let mut e = enc.clone();
                let out = e.push(input.clone())?;
                let next = intern.len() as u32;
                let id = *intern.entry(out).or_insert(next);
                let child = idx * sigma + c;
                ids[d + 1][child] = id;
                if d + 1 < depth {
                    stack.push((e, d + 1, child));
                }
            }
        }
        Ok(SymbolTable { sigma, ids })
    }
}

/// Which pairs a search scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairSearch {
    /// Lag window `lo <= n - split <= hi`.
    pub lo: usize,
    pub hi: usize,
    /// Score only pairs of length exactly `n_max`.
    pub exact_len: bool,
    pub budget: u64,
}

impl PairSearch {
    pub fn full(n_max: usize) -> Self {
        PairSearch {
            lo: 1,
            hi: n_max,
            exact_len: false,
            budget: DEFAULT_PAIR_BUDGET,
        }
    }
}

#[derive(Clone, Debug)]
struct Best {
    hamming: usize,
    b: usize,
    n: usize,
    split: usize,
    x: Vec<usize>,
    x_prime: Vec<usize>,
}

impl Best {
    /// True if `(hamming, b)` with key `(x, x')` should replace `self`.
    fn beaten_by(&self, hamming: usize, b: usize, x: &[usize], x_prime: &[usize]) -> bool {
        let lhs = hamming * self.b;
        let rhs = self.hamming * b;
        lhs < rhs || (lhs == rhs && (x, x_prime) < (self.x.as_slice(), self.x_prime.as_slice()))
    }
}

fn offer(best: &mut Option<Best>, hamming: usize, split: usize, x: Vec<usize>, x_prime: Vec<usize>) {
    let n = x.len();
    let b = n - split;
    let take = match best {
        None => true,
        Some(cur) => cur.beaten_by(hamming, b, &x, &x_prime),
    };
    if take {
        *best = Some(Best {
            hamming,
            b,
            n,
            split,
            x,
            x_prime,
        });
    }
}

struct Walker<'a> {
    table: &'a SymbolTable,
    search: PairSearch,
    n_max: usize,
    split: usize,
    best: Option<Best>,
    steps: u64,
    examined: u64,
}

impl Walker<'_> {
    fn could_improve(&self, hamming: usize, b_max: usize) -> bool {
        match &self.best {
            None => true,
            Some(best) => hamming * best.b <= best.hamming * b_max,
        }
    }

    fn walk(&mut self, depth: usize, u: usize, v: usize, hamming: usize) -> Result<()> {
        self.steps += 1;
        if self.steps > self.search.budget {
            return Err(Error::Budget {
                what: "pair walk",
                needed: format!("> {}", self.search.budget),
                budget: self.search.budget as u128,
            });
        }
        let b = depth - self.split;
        let scored = b >= self.search.lo
            && b <= self.search.hi
            && (!self.search.exact_len || depth == self.n_max);
        if scored {
            self.examined += 1;
            let better = match &self.best {
                None => true,
                Some(best) => hamming * best.b <= best.hamming * b,
            };
            if better {
                let sigma = self.table.sigma;
                offer(&mut self.best, hamming, self.split, digits(u, sigma, depth), digits(v, sigma, depth));
            }
        }
        let b_max = self.search.hi.min(self.n_max - self.split);
        if b >= b_max || !self.could_improve(hamming, b_max) {
            return Ok(());
        }
        let sigma = self.table.sigma;
        let row = &self.table.ids[depth + 1];
        for c in 0..sigma {
            let uc = u * sigma + c;
            for c2 in 0..sigma {
                let vc = v * sigma + c2;
                let h = hamming + usize::from(row[uc] != row[vc]);
                self.walk(depth + 1, uc, vc, h)?;
            }
        }
        Ok(())
    }
}

fn alphabet_symbols<T: ToSymbol>(alphabet: &[T]) -> Vec<Symbol> {
    alphabet.iter().map(ToSymbol::to_symbol).collect()
}

/// Exact minimum of `Δ / (n - split)` over the pairs selected by `search`.
pub fn pair_distance<E>(
    proto: &E,
    alphabet: &[E::Input],
    n_max: usize,
    search: PairSearch,
) -> Result<DistanceReport>
where
    E: StreamEncoder + Clone,
    E::Input: Clone + ToSymbol,
    E::Output: Eq + Hash,
{
    let sigma = alphabet.len();
    if sigma < 2 {
        return Err(Error::invalid("input alphabet needs at least two symbols"));
    }
    if n_max == 0 || search.lo == 0 || search.lo > search.hi || search.lo > n_max {
        return Err(Error::invalid(format!(
            "no pair with lag in [{}, {}] at n_max = {n_max}",
            search.lo, search.hi
        )));
    }
    let table = SymbolTable::build(proto, alphabet, n_max)?;
    let mut walker = Walker {
        table: &table,
        search,
        n_max,
        split: 0,
        best: None,
        steps: 0,
        examined: 0,
    };
    for split in 0..n_max {
        if n_max - split < search.lo {
            break;
        }
        walker.split = split;
        let prefixes = sigma.pow(split as u32);
        let row = &table.ids[split + 1];
        for w in 0..prefixes {
            for a in 0..sigma {
                for a2 in a + 1..sigma {
                    let u = w * sigma + a;
                    let v = w * sigma + a2;
                    walker.walk(split + 1, u, v, usize::from(row[u] != row[v]))?;
                }
            }
        }
    }
    let examined = walker.examined;
    let best = walker.best.ok_or_else(|| Error::invalid("no pair in the lag range"))?;
    let space = format!(
        "all pairs over {sigma} symbols, n <= {n_max}, lag in [{}, {}]{}",
        search.lo,
        search.hi.min(n_max),
        if search.exact_len { ", length exactly n_max" } else { "" }
    );
    Ok(report(best, 1, alphabet_symbols(alphabet), space, examined))
}

fn report(best: Best, scale: usize, alphabet: Vec<Symbol>, space: String, examined: u64) -> DistanceReport {
    DistanceReport {
        value: ratio(best.hamming, scale * best.b),
        witness: Witness {
            x: best.x,
            x_prime: best.x_prime,
            split: best.split,
            hamming: best.hamming,
            n: best.n,
        },
        scale,
        alphabet,
        space,
        examined,
    }
}

pub fn tree_distance_exhaustive<E>(proto: &E, alphabet: &[E::Input], n_max: usize) -> Result<DistanceReport>
where
    E: StreamEncoder + Clone,
    E::Input: Clone + ToSymbol,
    E::Output: Eq + Hash,
{
    pair_distance(proto, alphabet, n_max, PairSearch::full(n_max))
}

/// Distance over pairs of length exactly `n` only.
pub fn relaxed_distance<E>(proto: &E, alphabet: &[E::Input], n: usize) -> Result<DistanceReport>
where
    E: StreamEncoder + Clone,
    E::Input: Clone + ToSymbol,
    E::Output: Eq + Hash,
{
    pair_distance(
        proto,
        alphabet,
        n,
        PairSearch {
            exact_len: true,
            ..PairSearch::full(n)
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagMode {
    Exhaustive,
    Sampled { seed: u64, trials: u64 },
}

/// Minimum of `Δ / b` over pairs with `ell <= b <= big_l`.
pub fn lagged_distance<E>(
    proto: &E,
    ell: usize,
    big_l: usize,
    alphabet: &[E::Input],
    n_max: usize,
    mode: LagMode,
) -> Result<DistanceReport>
where
    E: StreamEncoder + Clone,
    E::Input: Clone + ToSymbol,
    E::Output: Eq + Hash,
{
    if n_max < ell || ell == 0 || big_l < ell {
        return Err(Error::invalid(format!(
            "no pair with lag in [{ell}, {big_l}] at n_max = {n_max}"
        )));
    }
    let search = PairSearch {
        lo: ell,
        hi: big_l,
        exact_len: false,
        budget: DEFAULT_PAIR_BUDGET,
    };
    match mode {
        LagMode::Exhaustive => pair_distance(proto, alphabet, n_max, search),
        LagMode::Sampled { seed, trials } => sampled_distance(proto, alphabet, n_max, search, seed, trials),
    }
}

/// Minimum over random pairs; an upper bound on the exact value.
pub fn sampled_distance<E>(
    proto: &E,
    alphabet: &[E::Input],
    n_max: usize,
    search: PairSearch,
    seed: u64,
    trials: u64,
) -> Result<DistanceReport>
where
    E: StreamEncoder + Clone,
    E::Input: Clone + ToSymbol,
    E::Output: Eq + Hash,
{
    let sigma = alphabet.len();
    if sigma < 2 || trials == 0 || search.lo == 0 || search.lo > n_max.min(search.hi) {
        return Err(Error::invalid("empty sampling space"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Best> = None;
    for _ in 0..trials {
        let n = if search.exact_len {
            n_max
        } else {
            rng.gen_range(search.lo..=n_max)
        };
        let b = rng.gen_range(search.lo..=search.hi.min(n));
        let split = n - b;
        let x: Vec<usize> = (0..n).map(|_| rng.gen_range(0..sigma)).collect();
        let mut x_prime = x.clone();
        x_prime[split] = (x[split] + rng.gen_range(1..sigma)) % sigma;
        for v in &mut x_prime[split + 1..] {
            *v = rng.gen_range(0..sigma);
        }
        let (lo, hi) = if x <= x_prime { (x, x_prime) } else { (x_prime, x) };
        let mut e1 = proto.clone();
        let mut e2 = proto.clone();
        let mut hamming = 0;
        for (&i, &j) in lo.iter().zip(&hi) {
            let o1 = e1.push(alphabet[i].clone())?;
            let o2 = e2.push(alphabet[j].clone())?;
            hamming += usize::from(o1 != o2);
        }
        offer(&mut best, hamming, split, lo, hi);
    }
    let space = format!(
        "{trials} random pairs over {sigma} symbols, n <= {n_max}, lag in [{}, {}], seed {seed}",
        search.lo,
        search.hi.min(n_max)
    );
    Ok(report(best.unwrap(), 1, alphabet_symbols(alphabet), space, trials))
}

/// Exact minimum over non-zero `x` of `wt / (scale (n - split(x, 0)))`,
/// where `pos_weight(prefix)` gives the weight of the last position's output.
pub fn weight_distance<F>(
    sigma: usize,
    zero: usize,
    n_max: usize,
    scale: usize,
    alphabet: Vec<Symbol>,
    mut pos_weight: F,
) -> Result<DistanceReport>
where
    F: FnMut(&[usize]) -> usize,
{
    if sigma < 2 || zero >= sigma || n_max == 0 || scale == 0 {
        return Err(Error::invalid("weight distance needs a zero symbol and a non-zero one"));
    }
    let nodes = tree_nodes(sigma, n_max);
    if nodes > MAX_TREE_NODES {
        return Err(Error::Budget {
            what: "weight enumeration",
            needed: nodes.to_string(),
            budget: MAX_TREE_NODES as u128,
        });
    }
    let mut best: Option<Best> = None;
    let mut examined = 0u64;
    // (prefix, weight so far, split or None while all-zero)
    let mut stack = vec![(Vec::new(), 0usize, None::<usize>)];
    while let Some((prefix, wt, split)) = stack.pop() {
        for c in (0..sigma).rev() {
            let mut x = prefix.clone();
            x.push(c);
            let split = split.or(if c == zero { None } else { Some(x.len() - 1) });
            let w = wt + pos_weight(&x);
            if let Some(p) = split {
                examined += 1;
                let zeros = vec![zero; x.len()];
                offer(&mut best, w, p, x.clone(), zeros);
            }
            if x.len() < n_max {
                stack.push((x, w, split));
            }
        }
    }
    let space = format!("non-zero vectors over {sigma} symbols, n <= {n_max}");
    Ok(report(best.unwrap(), scale, alphabet, space, examined))
}

/// `δ̃` of the code `x -> (x_i, (Ax)_i)` over entries drawn from `range`.
pub fn weight_distance_linear(a: &LowerTriangularMatrix, range: &[BigInt], n_max: usize) -> Result<DistanceReport> {
    if a.dim() < n_max {
        return Err(Error::invalid(format!(
            "matrix dimension {} below n_max = {n_max}",
            a.dim()
        )));
    }
    let zero = range
        .iter()
        .position(Zero::is_zero)
        .ok_or_else(|| Error::invalid("range must contain 0"))?;
    weight_distance(range.len(), zero, n_max, 2, alphabet_symbols(range), |x| {
        let i = x.len() - 1;
        let ax: BigInt = x
            .iter()
            .enumerate()
            .map(|(j, &c)| a.entry(i, j) * &range[c])
            .sum();
        usize::from(!range[x[i]].is_zero()) + usize::from(!ax.is_zero())
    })
}

/// `⌊n (1 - log σ / log γ) + 1⌋ / n`, computed as `(n + 1 - m) / n` with `m`
/// the least integer such that `γ^m >= σ^n`.
pub fn singleton_bound(n: usize, sigma: u64, gamma: u64) -> Result<Rational64> {
    if n == 0 || sigma < 2 || gamma < 2 {
        return Err(Error::invalid("singleton bound needs n >= 1 and sizes >= 2"));
    }
    let target = BigUint::from(sigma).pow(n as u32);
    let mut m = 0usize;
    let mut pow = BigUint::one();
    while pow < target {
        pow *= gamma;
        m += 1;
    }
    Ok(Rational64::new((n + 1).saturating_sub(m) as i64, n as i64))
}

/// `δ > 1 - log σ / log γ`, decided as `σ^q > γ^(q - p)` for `δ = p / q`.
pub fn is_mds(delta: Rational64, sigma: u64, gamma: u64) -> bool {
    let (p, q) = (*delta.numer(), *delta.denom());
    if p >= q {
        return true;
    }
    BigUint::from(sigma).pow(q as u32) > BigUint::from(gamma).pow((q - p) as u32)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeDistance {
    /// Minimum number of differing `c`-bit symbols.
    pub min_distance: usize,
    pub x: BitString,
    pub x_prime: BitString,
    pub examined: u64,
}

/// Minimum symbol distance of `C` over all pairs of distinct messages.
pub fn exhaustive_code_distance(spec: &CodeSpecC) -> Result<CodeDistance> {
    let k = spec.input_bits;
    if k > 16 {
        return Err(Error::Budget {
            what: "code enumeration",
            needed: format!("2^{k}"),
            budget: 1 << 16,
        });
    }
    let words = (0..1u64 << k)
        .map(|v| spec.encode(&BitString::from_uint(v, k)?))
        .collect::<Result<Vec<_>>>()?;
    let mut best = CodeDistance {
        min_distance: usize::MAX,
        x: BitString::new(),
        x_prime: BitString::new(),
        examined: 0,
    };
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            best.examined += 1;
            let d = words[i].iter().zip(&words[j]).filter(|(a, b)| a != b).count();
            if d < best.min_distance {
                best.min_distance = d;
                best.x = BitString::from_uint(i as u64, k)?;
                best.x_prime = BitString::from_uint(j as u64, k)?;
            }
        }
    }
    Ok(best)
}

/// Minimum symbol distance over `pairs` random pairs of distinct messages.
pub fn sampled_code_distance(spec: &CodeSpecC, pairs: u64, seed: u64) -> Result<CodeDistance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = spec.input_bits;
    let mut best = CodeDistance {
        min_distance: usize::MAX,
        x: BitString::new(),
        x_prime: BitString::new(),
        examined: 0,
    };
    while best.examined < pairs {
        let x: BitString = (0..k).map(|_| rng.gen::<bool>()).collect();
        let y: BitString = (0..k).map(|_| rng.gen::<bool>()).collect();
        if x == y {
            continue;
        }
        best.examined += 1;
        let (cx, cy) = (spec.encode(&x)?, spec.encode(&y)?);
        let d = cx.iter().zip(&cy).filter(|(a, b)| a != b).count();
        if d < best.min_distance {
            best.min_distance = d;
            best.x = x;
            best.x_prime = y;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearcode::TcAEncoder;
    use crate::pascal::pascal_matrix;
    use std::sync::Arc;

    /// Emits its input unchanged.
    #[derive(Clone)]
    struct Copy(usize);

    impl StreamEncoder for Copy {
        type Input = bool;
        type Output = bool;
        fn push(&mut self, b: bool) -> Result<bool> {
            self.0 += 1;
            Ok(b)
        }
        fn consumed(&self) -> usize {
            self.0
        }
    }

    /// Emits the whole prefix.
    #[derive(Clone, Default)]
    struct Prefix(Vec<bool>);

    impl StreamEncoder for Prefix {
        type Input = bool;
        type Output = Vec<bool>;
        fn push(&mut self, b: bool) -> Result<Vec<bool>> {
            self.0.push(b);
            Ok(self.0.clone())
        }
        fn consumed(&self) -> usize {
            self.0.len()
        }
    }

    #[test]
    fn copy_and_prefix() {
        let r = tree_distance_exhaustive(&Copy(0), &[false, true], 3).unwrap();
        assert_eq!(r.value, Rational64::new(1, 3));
        assert_eq!(r.witness.x, vec![0, 0, 0]);
        assert_eq!(r.witness.x_prime, vec![1, 0, 0]);
        assert!(r.is_consistent());
        let r = tree_distance_exhaustive(&Prefix::default(), &[false, true], 4).unwrap();
        assert_eq!(r.value, Rational64::from_integer(1));
        // ell = 1, L = n is the plain distance.
        let l = lagged_distance(&Copy(0), 1, 3, &[false, true], 3, LagMode::Exhaustive).unwrap();
        assert_eq!(l.value, Rational64::new(1, 3));
        assert!(lagged_distance(&Copy(0), 4, 4, &[false, true], 3, LagMode::Exhaustive).is_err());
    }

    #[test]
    fn sampled_covers_small_space() {
        let ex = lagged_distance(&Copy(0), 2, 3, &[false, true], 3, LagMode::Exhaustive).unwrap();
        let sa = lagged_distance(
            &Copy(0),
            2,
            3,
            &[false, true],
            3,
            LagMode::Sampled { seed: 3, trials: 4000 },
        )
        .unwrap();
        assert_eq!(ex.value, sa.value);
        assert_eq!(ex.witness, sa.witness);
    }

    #[test]
    fn pascal_distances() {
        let p = Arc::new(pascal_matrix(6));
        let range: Vec<BigInt> = (0..3).map(BigInt::from).collect();
        let r = tree_distance_exhaustive(&TcAEncoder::new(p.clone()), &range, 5).unwrap();
        assert!(r.value > Rational64::new(1, 2));
        assert!(is_mds(r.value, 3, 9));
        let t = weight_distance_linear(&p, &range, 5).unwrap();
        assert!(t.value > Rational64::new(1, 2));
        assert!(t.is_consistent());
    }

    #[test]
    fn singleton_examples() {
        assert_eq!(singleton_bound(4, 2, 4).unwrap(), Rational64::new(3, 4));
        assert_eq!(singleton_bound(3, 2, 2).unwrap(), Rational64::new(1, 3));
        assert!(!is_mds(Rational64::new(1, 2), 2, 4));
        assert!(is_mds(Rational64::new(3, 5), 2, 4));
        assert!(singleton_bound(0, 2, 2).is_err());
    }
}
