use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Zero};
use proptest::prelude::*;

use treecode::ecc::inner::{deserialize_inner_code, find_inner_code, serialize_inner_code};
use treecode::ecc::{build_code_c, Recipe};
use treecode::linearcode::{encode_tc_a, TcAEncoder};
use treecode::packing::{encode_block_tc, PackedCodeParams, PackedTreeEncoder};
use treecode::pascal::{
    bareiss_determinant, binomial, is_totally_nonsingular, minor_determinant, pascal_matrix, LowerTriangularMatrix,
    MinorIndexPair,
};
use treecode::pipeline::{build_schedule, Coverage, Pipeline, PipelineConfig};
use treecode::symbol::{hamming_distance, split};
use treecode::verify::{
    relaxed_distance, sample_toeplitz_code, singleton_bound, toeplitz_tilde_distance, tree_distance_exhaustive,
    weight_distance_linear, ToeplitzEncoder,
};
use treecode::{BitString, StreamEncoder};

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Determinant by Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<i64>]) -> BigInt {
    if m.is_empty() {
        return BigInt::one();
    }
    let mut total = BigInt::zero();
    for (j, &v) in m[0].iter().enumerate() {
        if v == 0 {
            continue;
        }
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
            .collect();
        let term = BigInt::from(v) * cofactor_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

fn lower(rows: &[Vec<i64>]) -> LowerTriangularMatrix {
    let refs: Vec<&[i64]> = rows.iter().map(|r| r.as_slice()).collect();
    LowerTriangularMatrix::from_i64_rows(&refs).unwrap()
}

fn lower_strategy(max_dim: usize, lo: i64, hi: i64) -> impl Strategy<Value = Vec<Vec<i64>>> {
    (1..=max_dim).prop_flat_map(move |d| {
        (0..d)
            .map(|i| proptest::collection::vec(lo..=hi, i + 1))
            .collect::<Vec<_>>()
    })
}

/// Every staircase minor by cofactor expansion, in reverse size order.
fn tns_oracle(rows: &[Vec<i64>]) -> (bool, u128) {
    let d = rows.len();
    let entry = |i: usize, j: usize| if j <= i { rows[i][j] } else { 0 };
    let mut ok = true;
    let mut count = 0;
    for k in (1..=d).rev() {
        for r in subsets(d, k) {
            for c in subsets(d, k) {
                if r.iter().zip(&c).any(|(i, j)| i < j) {
                    continue;
                }
                count += 1;
                let m: Vec<Vec<i64>> = r.iter().map(|&i| c.iter().map(|&j| entry(i, j)).collect()).collect();
                ok &= !cofactor_det(&m).is_zero();
            }
        }
    }
    (ok, count)
}

#[test]
fn binomial_recurrence() {
    for i in 1..=256 {
        for j in 1..i {
            assert_eq!(binomial(i, j), binomial(i - 1, j - 1) + binomial(i - 1, j));
        }
        assert!(binomial(i, 0).is_one() && binomial(i, i).is_one());
    }
}

#[test]
fn schedule_covers_every_lag() {
    let n = 10_000_000;
    let s = build_schedule(n, 16).unwrap();
    let mut level = 0;
    for b in 1..=n {
        match s.coverage(b) {
            Some(Coverage::Window) => assert!(b <= 96),
            Some(Coverage::Level(g)) => {
                assert!(g >= level);
                level = g;
            }
            None => panic!("lag {b} uncovered"),
        }
    }
}

#[test]
fn packed_distance_half() {
    let p = PackedCodeParams::systematic(4).unwrap();
    let blocks: Vec<BitString> = (0..16).map(|v| BitString::from_uint(v, 4).unwrap()).collect();
    let inputs: Vec<Vec<usize>> = (0..=3)
        .flat_map(|k| (0..16usize.pow(k)).map(move |v| (0..k).map(|i| v / 16usize.pow(i) % 16).collect()))
        .collect();
    for x in &inputs {
        for y in &inputs {
            if x.len() != y.len() || x == y {
                continue;
            }
            let ex = encode_block_tc(p, &x.iter().map(|&i| blocks[i].clone()).collect::<Vec<_>>()).unwrap();
            let ey = encode_block_tc(p, &y.iter().map(|&i| blocks[i].clone()).collect::<Vec<_>>()).unwrap();
            let sp = split(x, y).unwrap();
            let d = hamming_distance(&ex, &ey).unwrap();
            assert!(2 * d >= x.len() - sp, "{x:?} {y:?}");
        }
    }
}

#[test]
fn code_c_injective_on_samples() {
    let spec = build_code_c(16, Rational64::new(1, 4), Recipe::Concatenated, 0).unwrap();
    let d = treecode::verify::sampled_code_distance(&spec, 10_000, 1).unwrap();
    assert!(d.min_distance > 0);
}

#[test]
fn relaxed_and_tilde_relations() {
    let p = Arc::new(pascal_matrix(5));
    let range = ints(&[0, 1, 2]);
    for n in 1..=4 {
        let full = tree_distance_exhaustive(&TcAEncoder::new(p.clone()), &range, n).unwrap();
        let relaxed = relaxed_distance(&TcAEncoder::new(p.clone()), &range, n).unwrap();
        assert!(relaxed.value >= full.value);
        // Differences of {0,1,2}-vectors range over {-2..2}.
        let tilde = weight_distance_linear(&p, &ints(&[-2, -1, 0, 1, 2]), n).unwrap();
        assert!(tilde.value <= full.value);
    }
    for seed in 0..4 {
        let code = sample_toeplitz_code(3, 2, 4, seed).unwrap();
        let full = tree_distance_exhaustive(&ToeplitzEncoder::new(code.clone()), &[0u8, 1, 2], 4).unwrap();
        let tilde = toeplitz_tilde_distance(&code, 4).unwrap();
        assert!(tilde.value <= full.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_and_hamming(x in proptest::collection::vec(0u8..3, 0..12), y in proptest::collection::vec(0u8..3, 0..12)) {
        let n = x.len().min(y.len());
        let (x, y) = (&x[..n], &y[..n]);
        prop_assert_eq!(split(x, y).unwrap(), split(y, x).unwrap());
        prop_assert_eq!(split(x, y).unwrap() == n, x == y);
        if x != y {
            prop_assert!(hamming_distance(x, y).unwrap() >= 1);
        }
    }

    #[test]
    fn shared_prefix_contributes_nothing(x in proptest::collection::vec(-3i64..4, 1..10), y in proptest::collection::vec(-3i64..4, 1..10)) {
        let n = x.len().min(y.len());
        let p = pascal_matrix(n);
        let (ex, ey) = (encode_tc_a(&p, &ints(&x[..n])).unwrap(), encode_tc_a(&p, &ints(&y[..n])).unwrap());
        let sp = split(&x[..n], &y[..n]).unwrap();
        prop_assert_eq!(&ex[..sp], &ey[..sp]);
        prop_assert!(sp == n || ex[sp] != ey[sp]);
    }

    #[test]
    fn bareiss_matches_cofactor(d in 1usize..=4, seed in proptest::collection::vec(-9i64..=9, 16)) {
        let m: Vec<Vec<i64>> = (0..d).map(|i| seed[i * 4..i * 4 + d].to_vec()).collect();
        let big: Vec<Vec<BigInt>> = m.iter().map(|r| ints(r)).collect();
        prop_assert_eq!(bareiss_determinant(big), cofactor_det(&m));
    }

    #[test]
    fn minors_match_cofactor(rows in lower_strategy(5, -9, 9), k in 1usize..=4, pick in any::<u64>()) {
        let a = lower(&rows);
        let d = rows.len();
        let k = k.min(d);
        let all = subsets(d, k);
        let r = &all[(pick % all.len() as u64) as usize];
        let c = &all[((pick >> 20) % all.len() as u64) as usize];
        let entry = |i: usize, j: usize| if j <= i { rows[i][j] } else { 0 };
        let m: Vec<Vec<i64>> = r.iter().map(|&i| c.iter().map(|&j| entry(i, j)).collect()).collect();
        let pair = MinorIndexPair::new(r.clone(), c.clone()).unwrap();
        prop_assert_eq!(minor_determinant(&a, &pair).unwrap(), cofactor_det(&m));
    }

    #[test]
    fn tns_verdict_matches_reordered_oracle(rows in lower_strategy(4, -2, 2)) {
        let rep = is_totally_nonsingular(&lower(&rows), 1 << 20).unwrap();
        let (ok, count) = tns_oracle(&rows);
        prop_assert_eq!(rep.is_tns(), ok);
        if ok {
            prop_assert_eq!(rep.minors_checked, count);
        }
    }

    #[test]
    fn tc_a_is_linear(x in proptest::collection::vec(-50i64..50, 1..12), y in proptest::collection::vec(-50i64..50, 1..12)) {
        let n = x.len().min(y.len());
        let p = pascal_matrix(n);
        let sum: Vec<i64> = x[..n].iter().zip(&y[..n]).map(|(a, b)| a + b).collect();
        let es = encode_tc_a(&p, &ints(&sum)).unwrap();
        let ex = encode_tc_a(&p, &ints(&x[..n])).unwrap();
        let ey = encode_tc_a(&p, &ints(&y[..n])).unwrap();
        for i in 0..n {
            prop_assert_eq!(&es[i].a, &(&ex[i].a + &ey[i].a));
            prop_assert_eq!(&es[i].b, &(&ex[i].b + &ey[i].b));
        }
    }

    #[test]
    fn packed_is_systematic(bits in proptest::collection::vec(any::<bool>(), 1..25), s in 5usize..8) {
        let p = PackedCodeParams::systematic(s).unwrap();
        let blocks: Vec<BitString> = bits.chunks(s).filter(|c| c.len() == s).map(BitString::from_bits).collect();
        let mut enc = PackedTreeEncoder::new(p);
        for b in &blocks {
            let sym = enc.push(b.clone()).unwrap();
            prop_assert_eq!(sym.len(), p.symbol_bits());
            prop_assert_eq!(&sym.slice(0, s), b);
        }
    }

    #[test]
    fn regrouping_bound(seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let spec = build_code_c(32, Rational64::new(1, 4), Recipe::Concatenated, 0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: BitString = (0..spec.input_bits).map(|_| rng.gen::<bool>()).collect();
        let y: BitString = (0..spec.input_bits).map(|_| rng.gen::<bool>()).collect();
        let (fx, fy) = (spec.encode_flat(&x).unwrap(), spec.encode_flat(&y).unwrap());
        let bits = fx.xor(&fy).unwrap().count_ones();
        let (sx, sy) = (spec.encode(&x).unwrap(), spec.encode(&y).unwrap());
        let syms = sx.iter().zip(&sy).filter(|(a, b)| a != b).count();
        prop_assert!(syms * spec.c >= bits);
    }

    #[test]
    fn alphabet_independent_of_n(i in 1usize..3000) {
        let small = Pipeline::new(PipelineConfig::new(3000)).unwrap();
        let big = Pipeline::new(PipelineConfig::new(12_000)).unwrap();
        prop_assert_eq!(small.alphabet_at(i).unwrap().total_bits, big.alphabet_at(i).unwrap().total_bits);
    }

    #[test]
    fn witness_reevaluates(seed in any::<u64>(), n in 1usize..=5) {
        let code = sample_toeplitz_code(3, 2, 5, seed).unwrap();
        let alphabet = [0u8, 1, 2];
        let rep = tree_distance_exhaustive(&ToeplitzEncoder::new(code.clone()), &alphabet, n).unwrap();
        prop_assert!(rep.is_consistent());
        let (x, y) = rep.inputs(&alphabet);
        let (ex, ey) = (code.encode(&x).unwrap(), code.encode(&y).unwrap());
        prop_assert_eq!(hamming_distance(&ex, &ey).unwrap(), rep.witness.hamming);
        prop_assert_eq!(split(&x, &y).unwrap(), rep.witness.split);
        let bound = (1..=n).map(|k| singleton_bound(k, 3, 9).unwrap()).min().unwrap();
        prop_assert!(rep.value <= bound);
    }

    #[test]
    fn inner_code_round_trip(seed in 0u64..50, m in 3usize..=6) {
        let code = find_inner_code(m, 8 * m, Rational64::new(3, 10), seed, 10_000).unwrap();
        let back = deserialize_inner_code(&serialize_inner_code(&code)).unwrap();
        prop_assert_eq!(back.verified_distance, code.verified_distance);
        prop_assert_eq!(back.generator, code.generator);
    }
}
