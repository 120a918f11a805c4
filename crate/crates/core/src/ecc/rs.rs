//! Reed-Solomon encoding by polynomial evaluation.
//!
//! `msg[i]` is the coefficient of `x^i`; the evaluation points are the field
//! elements whose integer representations are `0, 1, .., n - 1`. Horner's rule
//! is the reference route. The fast route is an additive FFT that splits the
//! points into cosets of the subspaces `V_t = {0, .., 2^t - 1}`.

use std::sync::Arc;

use super::gf2m::Gf2m;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct RSParams {
    field: Arc<Gf2m>,
    k: usize,
    n: usize,
}

impl RSParams {
    pub fn new(m: u32, k: usize, n: usize) -> Result<Self> {
        let field = Gf2m::shared(m)?;
        if k == 0 || k > n || n > field.size() {
            return Err(Error::invalid(format!(
                "RS parameters need 1 <= k <= n <= 2^m, got k={k} n={n} m={m}"
            )));
        }
        Ok(RSParams { field, k, n })
    }

    pub fn m(&self) -> u32 {
        self.field.degree()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Gf2m {
        &self.field
    }

    /// `n - k + 1`.
    pub fn min_distance(&self) -> usize {
        self.n - self.k + 1
    }
}

fn check_msg(params: &RSParams, msg: &[u32]) -> Result<()> {
    if msg.len() != params.k {
        return Err(Error::LengthMismatch {
            left: msg.len(),
            right: params.k,
        });
    }
    if let Some(&bad) = msg.iter().find(|&&v| v as usize >= params.field.size()) {
        return Err(Error::invalid(format!(
            "{bad} is not an element of GF(2^{})",
            params.m()
        )));
    }
    Ok(())
}

pub fn rs_encode(params: &RSParams, msg: &[u32]) -> Result<Vec<u32>> {
    check_msg(params, msg)?;
    let levels = params.n.next_power_of_two().trailing_zeros() as usize;
    // Division by the subspace polynomials dominates: about size * levels^2 / 2.
    let fft_cost = (params.n.next_power_of_two() * (levels * levels / 2 + 2)) as u128;
    let horner_cost = (params.n * params.k) as u128;
    Ok(if fft_cost < horner_cost {
        additive_fft(&params.field, msg, params.n)
    } else {
        horner(&params.field, msg, params.n)
    })
}

pub fn rs_encode_horner(params: &RSParams, msg: &[u32]) -> Result<Vec<u32>> {
    check_msg(params, msg)?;
    Ok(horner(&params.field, msg, params.n))
}

pub fn rs_encode_fft(params: &RSParams, msg: &[u32]) -> Result<Vec<u32>> {
    check_msg(params, msg)?;
    Ok(additive_fft(&params.field, msg, params.n))
}

fn horner(f: &Gf2m, msg: &[u32], n: usize) -> Vec<u32> {
    (0..n as u32)
        .map(|x| msg.iter().rev().fold(0u32, |acc, &c| f.mul(acc, x) ^ c))
        .collect()
}

fn additive_fft(f: &Gf2m, msg: &[u32], n: usize) -> Vec<u32> {
    let size = n.next_power_of_two();
    let top = size.trailing_zeros() as usize;
    let mut buf = msg.to_vec();
    buf.resize(size, 0);
    fft_rec(f, top, 0, &mut buf, n);
    buf.truncate(n);
    buf
}

/// Replaces `buf` (a polynomial of degree `< 2^t`) by its values on
/// `a + V_t`, in place; positions whose point is `>= n` are left undefined.
fn fft_rec(f: &Gf2m, t: usize, a: usize, buf: &mut [u32], n: usize) {
    if t == 0 {
        return;
    }
    let half = 1usize << (t - 1);
    let sp = f.subspace_polys();
    let w = &sp.coeffs[t - 1];
    // Divide by W = W_{t-1}: afterwards buf = [R | Q] with poly = Q W + R.
    for d in (half..buf.len()).rev() {
        let q = buf[d];
        if q == 0 {
            continue;
        }
        let base = d - half;
        for (i, &wi) in w[..w.len() - 1].iter().enumerate() {
            buf[base + (1 << i)] ^= f.mul(q, wi);
        }
    }
    // On a coset W takes the constant value c, so poly = R + c Q there.
    let c0 = sp.eval(f, t - 1, a as u32);
    let step = sp.eval(f, t - 1, half as u32);
    let upper_needed = a + half < n;
    let (lo, hi) = buf.split_at_mut(half);
    for (r, q) in lo.iter_mut().zip(hi.iter_mut()) {
        let v = *r ^ f.mul(c0, *q);
        *r = v;
        *q = v ^ f.mul(step, *q);
    }
    fft_rec(f, t - 1, a, lo, n);
    if upper_needed {
        fft_rec(f, t - 1, a + half, hi, n);
    }
}
