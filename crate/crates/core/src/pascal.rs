//! Lower-triangular integer matrices, the Pascal matrix, exact minors, the
//! total-non-singularity check and a search for small-entry TNS matrices.
//!
//! Row and column indices in this module are 0-indexed.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symbol::Nat;

/// Default cap on the number of staircase minors a TNS check may evaluate.
pub const DEFAULT_MINOR_BUDGET: u128 = 50_000_000;

/// Default cap on the raw candidate space of the exhaustive TNS search.
pub const DEFAULT_SEARCH_BUDGET: u128 = 1_000_000_000;

/// Exact binomial coefficient, 0 when `j > i`.
pub fn binomial(i: usize, j: usize) -> Nat {
    if j > i {
        return Nat::zero();
    }
    let j = j.min(i - j);
    let mut acc = Nat::one();
    for t in 0..j {
        acc *= (i - t) as u64;
        acc /= (t + 1) as u64;
    }
    acc
}

#[derive(Clone, PartialEq, Eq)]
pub struct LowerTriangularMatrix {
    rows: Vec<Vec<BigInt>>,
}

impl LowerTriangularMatrix {
    /// Builds a matrix from its lower triangle; row `i` must have `i + 1` entries.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        for (i, row) in rows.iter().enumerate() {
            if row.len() != i + 1 {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    i + 1
                )));
            }
        }
        Ok(LowerTriangularMatrix { rows })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn identity(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| {
                let mut r = vec![BigInt::zero(); i + 1];
                r[i] = BigInt::one();
                r
            })
            .collect();
        LowerTriangularMatrix { rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Entry `(i, j)`; zero above the diagonal.
    pub fn entry(&self, i: usize, j: usize) -> BigInt {
        assert!(i < self.dim() && j < self.dim(), "index out of range");
        if j > i {
            BigInt::zero()
        } else {
            self.rows[i][j].clone()
        }
    }

    /// The stored lower part of row `i` (columns `0..=i`).
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.rows[i]
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.rows
            .iter()
            .flatten()
            .map(|v| v.abs())
            .max()
            .unwrap_or_default()
    }

    /// `A^{(k)} x` for `k = x.len() <= dim`.
    pub fn mul_prefix(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() > self.dim() {
            return Err(Error::Capacity {
                len: x.len(),
                capacity: self.dim(),
            });
        }
        Ok((0..x.len())
            .map(|i| self.rows[i].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Leading principal `k × k` block.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        if k > self.dim() {
            return Err(Error::Capacity {
                len: k,
                capacity: self.dim(),
            });
        }
        Ok(LowerTriangularMatrix {
            rows: self.rows[..k].to_vec(),
        })
    }

    /// Inverse of a matrix whose diagonal entries are all ±1.
    pub fn inverse_unit_lower(&self) -> Result<Self> {
        let n = self.dim();
        let mut inv: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        for i in 0..n {
            let d = &self.rows[i][i];
            if d.abs() != BigInt::one() {
                return Err(Error::invalid(format!(
                    "diagonal entry {i} is {d}, not a unit"
                )));
            }
            let mut row = vec![BigInt::zero(); i + 1];
            row[i] = d.clone();
            for j in (0..i).rev() {
                let mut acc = BigInt::zero();
                for k in j..i {
                    acc += &self.rows[i][k] * &inv[k][j];
                }
                row[j] = -(acc * d);
            }
            inv.push(row);
        }
        Ok(LowerTriangularMatrix { rows: inv })
    }
}

impl fmt::Display for LowerTriangularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            f.write_str(&cells.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for LowerTriangularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.rows).finish()
    }
}

/// The `(n+1) × (n+1)` Pascal matrix.
pub fn pascal_matrix(n: usize) -> LowerTriangularMatrix {
    let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut row = vec![BigInt::one(); i + 1];
        for j in 1..i {
            row[j] = &rows[i - 1][j - 1] + &rows[i - 1][j];
        }
        rows.push(row);
    }
    LowerTriangularMatrix { rows }
}

/// Incrementally generated Pascal rows, one row per call.
#[derive(Clone, Debug, Default)]
pub struct PascalRows {
    row: Vec<BigUint>,
}

impl PascalRows {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of the current row, or `None` before the first `advance`.
    pub fn index(&self) -> Option<usize> {
        self.row.len().checked_sub(1)
    }

    pub fn current(&self) -> &[BigUint] {
        &self.row
    }

    pub fn advance(&mut self) -> &[BigUint] {
        let n = self.row.len();
        if n > 0 {
            for j in (1..n).rev() {
                let prev = self.row[j - 1].clone();
                self.row[j] += prev;
            }
        }
        self.row.push(BigUint::one());
        &self.row
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinorIndexPair {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl MinorIndexPair {
    pub fn new(rows: Vec<usize>, cols: Vec<usize>) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::invalid(format!(
                "|I| = {} but |J| = {}",
                rows.len(),
                cols.len()
            )));
        }
        if rows.is_empty() {
            return Err(Error::invalid("empty index sets"));
        }
        let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&rows) || !increasing(&cols) {
            return Err(Error::invalid("index sets must be strictly increasing"));
        }
        Ok(MinorIndexPair { rows, cols })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_staircase(&self) -> bool {
        self.rows.iter().zip(&self.cols).all(|(i, j)| i >= j)
    }
}

impl fmt::Display for MinorIndexPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "I={:?} J={:?}", self.rows, self.cols)
    }
}

/// Fraction-free Gaussian elimination; exact over the integers.
pub fn bareiss_determinant(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

fn check_indices(dim: usize, m: &MinorIndexPair) -> Result<()> {
    if let Some(&bad) = m.rows.iter().chain(&m.cols).find(|&&v| v >= dim) {
        return Err(Error::invalid(format!(
            "index {bad} outside dimension {dim}"
        )));
    }
    Ok(())
}

fn submatrix(a: &LowerTriangularMatrix, m: &MinorIndexPair) -> Vec<Vec<BigInt>> {
    m.rows
        .iter()
        .map(|&i| m.cols.iter().map(|&j| a.entry(i, j)).collect())
        .collect()
}

/// `det A[I|J]`, exact.
pub fn minor_determinant(a: &LowerTriangularMatrix, m: &MinorIndexPair) -> Result<BigInt> {
    check_indices(a.dim(), m)?;
    Ok(bareiss_determinant(submatrix(a, m)))
}

/// Number of staircase pairs `(I, J)` of a `dim × dim` matrix.
///
/// The staircase condition is equivalent to: every prefix `[0, t]` contains
/// at least as many column indices as row indices. The DP tracks that surplus.
pub fn count_staircase_pairs(dim: usize) -> u128 {
    // ways[d]: partial pairs over [0, t) with surplus d = |J| - |I|.
    let mut ways = vec![0u128; dim + 2];
    ways[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0u128; dim + 2];
        for d in 0..=dim {
            let w = ways[d];
            if w == 0 {
                continue;
            }
            // t in neither, or in both.
            next[d] = next[d].saturating_add(w.saturating_mul(2));
            // t in J only.
            next[d + 1] = next[d + 1].saturating_add(w);
            // t in I only.
            if d > 0 {
                next[d - 1] = next[d - 1].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[0] - 1
}

fn for_each_combination(n: usize, r: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(
        start: usize,
        n: usize,
        r: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == r {
            return f(cur);
        }
        let need = r - cur.len();
        for v in start..=n - need {
            cur.push(v);
            let go = rec(v + 1, n, r, cur, f);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    if r > n {
        return true;
    }
    rec(0, n, r, &mut Vec::with_capacity(r), f)
}

/// Column sets `J` with `j_s <= i_s`, in lexicographic order.
fn for_each_dominated(rows: &[usize], f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(rows: &[usize], start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let s = cur.len();
        if s == rows.len() {
            return f(cur);
        }
        for v in start..=rows[s] {
            cur.push(v);
            let go = rec(rows, v + 1, cur, f);
            cur.pop();
            if !go {
                return false;
            }
        }
        true
    }
    rec(rows, 0, &mut Vec::with_capacity(rows.len()), f)
}

/// Visits staircase pairs in canonical order: increasing size, then
/// lexicographic on `(I, J)`. Stops early when `f` returns false.
pub fn for_each_staircase_pair(dim: usize, f: &mut dyn FnMut(&[usize], &[usize]) -> bool) {
    for r in 1..=dim {
        let go = for_each_combination(dim, r, &mut |rows| {
            for_each_dominated(rows, &mut |cols| f(rows, cols))
        });
        if !go {
            return;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TnsReport {
    pub dim: usize,
    pub minors_checked: u128,
    pub positive: u128,
    pub negative: u128,
    /// First singular staircase minor in canonical order.
    pub witness: Option<MinorIndexPair>,
}

impl TnsReport {
    pub fn is_tns(&self) -> bool {
        self.witness.is_none()
    }
}

/// Exhaustive total-non-singularity check over all staircase minors.
pub fn is_totally_nonsingular(a: &LowerTriangularMatrix, budget: u128) -> Result<TnsReport> {
    let dim = a.dim();
    let needed = count_staircase_pairs(dim);
    if needed > budget {
        return Err(Error::Budget {
            what: "staircase minors",
            needed: needed.to_string(),
            budget,
        });
    }
    let mut report = TnsReport {
        dim,
        minors_checked: 0,
        positive: 0,
        negative: 0,
        witness: None,
    };
    for_each_staircase_pair(dim, &mut |rows, cols| {
        let sub = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| a.entry(i, j)).collect())
            .collect();
        let det = bareiss_determinant(sub);
        report.minors_checked += 1;
        if det.is_zero() {
            report.witness = Some(MinorIndexPair {
                rows: rows.to_vec(),
                cols: cols.to_vec(),
            });
            return false;
        }
        if det.is_positive() {
            report.positive += 1;
        } else {
            report.negative += 1;
        }
        true
    });
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    /// Backtracking over every candidate; `None` is a proof of non-existence.
    Exhaustive { budget: u128 },
    /// Row-wise rejection sampling; `None` only means the attempts ran out.
    Randomized { seed: u64, attempts: u64 },
}

/// Staircase pairs whose largest row index is `last`.
fn pairs_ending_at(dim: usize) -> Vec<Vec<MinorIndexPair>> {
    let mut by_row: Vec<Vec<MinorIndexPair>> = vec![Vec::new(); dim];
    for_each_staircase_pair(dim, &mut |rows, cols| {
        by_row[*rows.last().unwrap()].push(MinorIndexPair {
            rows: rows.to_vec(),
            cols: cols.to_vec(),
        });
        true
    });
    by_row
}

fn rows_nonsingular(rows: &[Vec<i64>], pairs: &[MinorIndexPair]) -> bool {
    pairs.iter().all(|m| {
        let sub = m
            .rows
            .iter()
            .map(|&i| {
                m.cols
                    .iter()
                    .map(|&j| BigInt::from(if j <= i { rows[i][j] } else { 0 }))
                    .collect()
            })
            .collect();
        !bareiss_determinant(sub).is_zero()
    })
}

fn to_matrix(rows: &[Vec<i64>]) -> LowerTriangularMatrix {
    LowerTriangularMatrix {
        rows: rows
            .iter()
            .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
            .collect(),
    }
}

/// Searches for an `n × n` TNS lower-triangular matrix with `|entries| <= bound`.
pub fn search_tns(n: usize, bound: u64, mode: SearchMode) -> Result<Option<LowerTriangularMatrix>> {
    if n == 0 {
        return Ok(Some(LowerTriangularMatrix { rows: Vec::new() }));
    }
    if bound == 0 {
        return Ok(None);
    }
    let b = i64::try_from(bound).map_err(|_| Error::invalid("bound too large"))?;
    let by_row = pairs_ending_at(n);
    match mode {
        SearchMode::Exhaustive { budget } => {
            let free = (n * (n - 1) / 2) as u32;
            let raw = BigUint::from(2 * bound).pow(n as u32) * BigUint::from(2 * bound + 1).pow(free);
            if raw > BigUint::from(budget) {
                return Err(Error::Budget {
                    what: "TNS search candidates",
                    needed: raw.to_string(),
                    budget,
                });
            }
            // 1, -1, 2, -2, ..., then 0 for off-diagonal entries.
            let mut values: Vec<i64> = (1..=b).flat_map(|v| [v, -v]).collect();
            let diag_values = values.clone();
            values.push(0);
            let mut rows: Vec<Vec<i64>> = Vec::with_capacity(n);
            Ok(backtrack(n, &values, &diag_values, &by_row, &mut rows).then(|| to_matrix(&rows)))
        }
        SearchMode::Randomized { seed, attempts } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows: Vec<Vec<i64>> = Vec::with_capacity(n);
            let mut left = attempts;
            while rows.len() < n {
                if left == 0 {
                    return Ok(None);
                }
                left -= 1;
                let i = rows.len();
                let mut row: Vec<i64> = (0..i).map(|_| rng.gen_range(-b..=b)).collect();
                let mut d = rng.gen_range(1..=b);
                if rng.gen::<bool>() {
                    d = -d;
                }
                row.push(d);
                rows.push(row);
                if !rows_nonsingular(&rows, &by_row[i]) {
                    rows.pop();
                }
            }
            Ok(Some(to_matrix(&rows)))
        }
    }
}

fn backtrack(
    n: usize,
    values: &[i64],
    diag_values: &[i64],
    by_row: &[Vec<MinorIndexPair>],
    rows: &mut Vec<Vec<i64>>,
) -> bool {
    let i = rows.len();
    if i == n {
        return true;
    }
    // Odometer over row i: columns 0..i from `values`, the diagonal from `diag_values`.
    let mut idx = vec![0usize; i + 1];
    loop {
        let row: Vec<i64> = (0..=i)
            .map(|j| if j == i { diag_values[idx[j]] } else { values[idx[j]] })
            .collect();
        rows.push(row);
        if rows_nonsingular(rows, &by_row[i]) && backtrack(n, values, diag_values, by_row, rows) {
            return true;
        }
        rows.pop();
        // Increment with the diagonal as the fastest digit.
        let mut j = i + 1;
        loop {
            if j == 0 {
                return false;
            }
            j -= 1;
            let limit = if j == i { diag_values.len() } else { values.len() };
            idx[j] += 1;
            if idx[j] < limit {
                break;
            }
            idx[j] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(0, 0), Nat::one());
        assert_eq!(binomial(5, 2), Nat::from(10u32));
        assert_eq!(binomial(3, 5), Nat::zero());
    }

    #[test]
    fn pascal_rows() {
        assert_eq!(pascal_matrix(2).to_string(), "1\n1 1\n1 2 1");
        assert_eq!(pascal_matrix(0).to_string(), "1");
        assert_eq!(pascal_matrix(4).entry(4, 2), big(6));
        let mut inc = PascalRows::new();
        for i in 0..20 {
            let row = inc.advance().to_vec();
            let want: Vec<Nat> = (0..=i).map(|j| binomial(i, j)).collect();
            assert_eq!(row, want);
        }
    }

    #[test]
    fn minor_examples() {
        let p = pascal_matrix(3);
        let m = MinorIndexPair::new(vec![1, 2], vec![0, 1]).unwrap();
        assert_eq!(minor_determinant(&p, &m).unwrap(), big(1));
        let id = LowerTriangularMatrix::identity(3);
        let m = MinorIndexPair::new(vec![2], vec![1]).unwrap();
        assert_eq!(minor_determinant(&id, &m).unwrap(), big(0));
        let m = MinorIndexPair::new(vec![0], vec![0]).unwrap();
        assert_eq!(minor_determinant(&p, &m).unwrap(), p.entry(0, 0));
        assert!(MinorIndexPair::new(vec![1, 0], vec![0, 1]).is_err());
        assert!(MinorIndexPair::new(vec![0], vec![0, 1]).is_err());
        let far = MinorIndexPair::new(vec![7], vec![0]).unwrap();
        assert!(minor_determinant(&p, &far).is_err());
    }

    #[test]
    fn tns_examples() {
        let r = is_totally_nonsingular(&pascal_matrix(4), DEFAULT_MINOR_BUDGET).unwrap();
        assert!(r.is_tns());
        assert_eq!(r.positive, r.minors_checked);
        // The first singular minor of the identity in canonical order. In
        // 1-indexed notation this is I = {2}, J = {1}.
        let r = is_totally_nonsingular(&LowerTriangularMatrix::identity(3), DEFAULT_MINOR_BUDGET)
            .unwrap();
        assert_eq!(
            r.witness,
            Some(MinorIndexPair::new(vec![1], vec![0]).unwrap())
        );
        let two = LowerTriangularMatrix::from_i64_rows(&[&[1], &[1, 1]]).unwrap();
        let r = is_totally_nonsingular(&two, DEFAULT_MINOR_BUDGET).unwrap();
        assert!(r.is_tns());
        // Three 1x1 minors on or below the diagonal plus the full determinant.
        assert_eq!(r.minors_checked, 4);
    }

    #[test]
    fn tns_budget_is_an_error() {
        assert!(matches!(
            is_totally_nonsingular(&pascal_matrix(8), 10),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn staircase_count_matches_enumeration() {
        for dim in 0..=8 {
            let mut n = 0u128;
            for_each_staircase_pair(dim, &mut |_, _| {
                n += 1;
                true
            });
            assert_eq!(n, count_staircase_pairs(dim), "dim {dim}");
        }
    }

    #[test]
    fn search_examples() {
        let ex = SearchMode::Exhaustive {
            budget: DEFAULT_SEARCH_BUDGET,
        };
        let one = search_tns(1, 1, ex).unwrap().unwrap();
        assert_eq!(one.to_string(), "1");
        let two = search_tns(2, 1, ex).unwrap().unwrap();
        assert_eq!(two.to_string(), "1\n1 1");
        let three = search_tns(3, 1, ex).unwrap().unwrap();
        assert!(is_totally_nonsingular(&three, DEFAULT_MINOR_BUDGET).unwrap().is_tns());
        assert!(three.max_abs_entry() <= big(1));
        assert_eq!(search_tns(2, 0, ex).unwrap(), None);
        assert!(matches!(
            search_tns(7, 3, ex),
            Err(Error::Budget { .. })
        ));
    }

    #[test]
    fn nonnegative_three_by_three_is_infeasible() {
        // Enumerate all 0/1 fills with unit diagonal: none is TNS.
        for mask in 0..8u32 {
            let e = |k: u32| (mask >> k & 1) as i64;
            let a = LowerTriangularMatrix::from_i64_rows(&[&[1], &[e(0), 1], &[e(1), e(2), 1]])
                .unwrap();
            assert!(!is_totally_nonsingular(&a, DEFAULT_MINOR_BUDGET).unwrap().is_tns());
        }
    }

    #[test]
    fn randomized_search_is_seeded() {
        let mode = SearchMode::Randomized {
            seed: 7,
            attempts: 100_000,
        };
        let a = search_tns(4, 2, mode).unwrap().unwrap();
        let b = search_tns(4, 2, mode).unwrap().unwrap();
        assert_eq!(a, b);
        assert!(is_totally_nonsingular(&a, DEFAULT_MINOR_BUDGET).unwrap().is_tns());
        assert!(a.max_abs_entry() <= big(2));
    }

    #[test]
    fn inverse_of_pascal() {
        let p = pascal_matrix(5);
        let inv = p.inverse_unit_lower().unwrap();
        for i in 0..6 {
            for j in 0..=i {
                let sign = if (i - j) % 2 == 0 { 1 } else { -1 };
                assert_eq!(inv.entry(i, j), BigInt::from(binomial(i, j)) * sign);
            }
        }
    }
}
