//! The sequence `c_n^[r]`, the `A_i` sequences, modified binomials and
//! weighted partial sums.

use std::collections::HashMap;
use std::sync::RwLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChebError {
    #[error("modified binomial [{0}; {1}] is not an integer")]
    NonIntegral(i64, i64),
    #[error("value does not fit in i64")]
    Overflow,
}

/// `c_n^[r]` with `c_1 = 0`, `c_2 = 1`, `c_n = r c_{n-1} - c_{n-2}` in both
/// directions.
pub fn c(r: i64, n: i64) -> BigInt {
    let r = BigInt::from(r);
    let (mut a, mut b) = (BigInt::zero(), BigInt::one()); // c_1, c_2
    if n >= 1 {
        for _ in 1..n {
            let next = &r * &b - &a;
            a = std::mem::replace(&mut b, next);
        }
        a
    } else {
        // walk down: c_{k-1} = r c_k - c_{k+1}
        for _ in n..1 {
            let prev = &r * &a - &b;
            b = std::mem::replace(&mut a, prev);
        }
        a
    }
}

/// `c_n^[r]` as a machine integer; panics if it does not fit.
pub fn c_small(r: i64, n: i64) -> i64 {
    c(r, n).to_i64().expect("c_n exceeds i64")
}

/// Memoized `c_n^[r]` for one `r`.
#[derive(Debug)]
pub struct ChebSeq {
    r: i64,
    memo: RwLock<HashMap<i64, BigInt>>,
}

impl ChebSeq {
    pub fn new(r: i64) -> Self {
        ChebSeq { r, memo: RwLock::new(HashMap::new()) }
    }

    pub fn r(&self) -> i64 {
        self.r
    }

    pub fn get(&self, n: i64) -> BigInt {
        if let Some(v) = self.memo.read().expect("memo lock").get(&n) {
            return v.clone();
        }
        let v = c(self.r, n);
        self.memo.write().expect("memo lock").insert(n, v.clone());
        v
    }
}

/// `(c_{n-1})^2 - c_n c_{n-2} = 1` and `c_{n-1} c_{n+k-3} - c_{n+k-2} c_{n-2} = c_k`.
pub fn check_cn_identity(r: i64, n: i64, k: i64) -> bool {
    let s = ChebSeq::new(r);
    let first = s.get(n - 1) * s.get(n - 1) - s.get(n) * s.get(n - 2) == BigInt::one();
    let second = s.get(n - 1) * s.get(n + k - 3) - s.get(n + k - 2) * s.get(n - 2) == s.get(k);
    first && second
}

/// `∏_{i=0}^{a-b-1} (a-i)/(a-b-i)` for `a > b`, `1` for `a = b`, `0` below.
pub fn modified_binomial(a: i64, b: i64) -> Result<BigInt, ChebError> {
    if a < b {
        return Ok(BigInt::zero());
    }
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..(a - b) {
        num *= a - i;
        den *= a - b - i;
    }
    let (q, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return Err(ChebError::NonIntegral(a, b));
    }
    Ok(q)
}

/// Ordinary binomial with `C(n, k) = 0` for `n < 0` or `k < 0`.
pub fn binomial_nonneg(n: i64, k: i64) -> BigInt {
    if n < 0 || k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Which exponent multiplies `c_{i+1}` in `A_i`.
///
/// `First` is the form where the word from `t'` starts in direction 1, i.e.
/// the seed count `n` is even; there `A_i = p c_{i+1} + q c_i` and `α = q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Form {
    First,
    Second,
}

impl Form {
    /// Form of a word with `n` seeds whose last mutation is in direction 1.
    pub fn for_seed_count(n: i64) -> Form {
        if n.rem_euclid(2) == 0 { Form::First } else { Form::Second }
    }

    /// `(P, Q)` with `A_i = P c_{i+1} + Q c_i`.
    pub fn leading(self, p: i64, q: i64) -> (i64, i64) {
        match self {
            Form::First => (p, q),
            Form::Second => (q, p),
        }
    }
}

/// `A_i(p, q)`.
pub fn a_seq(p: i64, q: i64, r: i64, form: Form, i: i64) -> i64 {
    let (pp, qq) = form.leading(p, q);
    pp * c_small(r, i + 1) + qq * c_small(r, i)
}

pub fn alpha(p: i64, q: i64, form: Form) -> i64 {
    form.leading(p, q).1
}

/// `s_0 = 0`, `s_i = Σ_{j<i} c_{i-j+1} τ_j`; returns `s_0..s_len`.
pub fn partial_sums(taus: &[i64], r: i64) -> Vec<i64> {
    let mut s = Vec::with_capacity(taus.len() + 1);
    s.push(0);
    for i in 1..=taus.len() as i64 {
        let v: i64 = (0..i).map(|j| c_small(r, i - j + 1) * taus[j as usize]).sum();
        s.push(v);
    }
    s
}

/// Same values through `s_n = r s_{n-1} - s_{n-2} + τ_{n-1}`, with `s_{-1} = 0`.
pub fn partial_sums_recursive(taus: &[i64], r: i64) -> Vec<i64> {
    let mut s = vec![0i64];
    let mut prev = 0i64;
    for &t in taus {
        let last = *s.last().unwrap();
        let next = r * last - prev + t;
        prev = last;
        s.push(next);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r3_values() {
        let want = [-3, -1, 0, 1, 3, 8, 21, 55, 144, 377, 987];
        for (k, w) in want.iter().enumerate() {
            assert_eq!(c(3, k as i64 - 1), BigInt::from(*w));
        }
    }

    #[test]
    fn r2_linear() {
        for n in -5..=10 {
            assert_eq!(c_small(2, n), n - 1);
        }
    }

    #[test]
    fn identity_examples() {
        assert_eq!(c_small(3, 4).pow(2) - c_small(3, 5) * c_small(3, 3), 1);
        assert!(check_cn_identity(3, 5, 2));
        for n in 3..10 {
            assert!(check_cn_identity(2, n, 0));
        }
    }

    #[test]
    fn modified_binomial_examples() {
        assert_eq!(modified_binomial(5, 2).unwrap(), BigInt::from(10));
        assert_eq!(modified_binomial(2, -1).unwrap(), BigInt::zero());
        assert_eq!(modified_binomial(-1, -3).unwrap(), BigInt::one());
        assert_eq!(modified_binomial(-3, -4).unwrap(), BigInt::from(-3));
        assert_eq!(modified_binomial(4, 4).unwrap(), BigInt::one());
        assert_eq!(modified_binomial(3, 4).unwrap(), BigInt::zero());
    }

    #[test]
    fn a_seq_examples() {
        assert_eq!(a_seq(3, 2, 4, Form::First, 1), 3);
        assert_eq!(a_seq(3, 2, 4, Form::Second, 1), 2);
        assert_eq!(alpha(3, 2, Form::First), 2);
        assert_eq!(Form::for_seed_count(4), Form::First);
        assert_eq!(Form::for_seed_count(5), Form::Second);
    }

    #[test]
    fn partial_sum_examples() {
        let s = partial_sums(&[4, 7], 3);
        assert_eq!(s[1], 4);
        assert_eq!(s[2], 3 * 4 + 7);
        assert_eq!(partial_sums_recursive(&[4, 7, -2], 3), partial_sums(&[4, 7, -2], 3));
    }

    #[test]
    fn memo_matches_direct() {
        let s = ChebSeq::new(4);
        for n in -6..12 {
            assert_eq!(s.get(n), c(4, n));
            assert_eq!(s.get(n), c(4, n));
        }
    }
}
