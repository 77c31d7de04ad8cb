//! Catalan numbers, profile probabilities `P(a, b)`, leaf-growth weights
//! `C(a, b)` and their continuum limits, in exact rationals and in floats.
//!
//! `P(a, b) = Cat(a) Cat(b) / Cat(a + b + 1)` is the probability that a
//! uniform tree of size `a + b + 1` has profile `(a, b)`, and
//!
//! ```text
//! C(a, b) = (a + 1)(2a + 1)(a + 3b + 3) / ((a + b + 1)(a + b + 2)(2(a + b) + 3))
//! ```
//!
//! is the probability that the leaf-growth measure sends a leaf into the
//! size-`a` side of an `(a, b)` split.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Exact rational in lowest terms with a positive denominator.
pub type ExactRational = BigRational;

/// Catalan numbers up to this index are kept in a shared table.
const CATALAN_MEMO: usize = 402;

fn catalan_table() -> &'static [BigUint] {
    static TABLE: OnceLock<Vec<BigUint>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(CATALAN_MEMO + 1);
        t.push(BigUint::one());
        for k in 0..CATALAN_MEMO {
            // Cat(k + 1) = Cat(k) * 2(2k + 1) / (k + 2), exact at every step.
            let next = &t[k] * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
            t.push(next);
        }
        t
    })
}

pub fn catalan_int(n: usize) -> BigUint {
    if let Some(c) = catalan_table().get(n) {
        return c.clone();
    }
    let mut c = catalan_table()[CATALAN_MEMO].clone();
    for k in CATALAN_MEMO..n {
        c = c * BigUint::from(2 * (2 * k as u64 + 1)) / BigUint::from(k as u64 + 2);
    }
    c
}

/// `binom(2n, n) / (n + 1)` as an integer-valued rational.
pub fn catalan(n: usize) -> ExactRational {
    BigRational::from_integer(BigInt::from(catalan_int(n)))
}

/// Catalan numbers that fit in a `u128` (`n <= 66`), by the product formula.
pub fn catalan_u128(n: usize) -> u128 {
    let mut c: u128 = 1;
    for k in 0..n as u128 {
        c = c * 2 * (2 * k + 1) / (k + 2);
    }
    c
}

fn rat(num: i64, den: i64) -> ExactRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// `P(a, b)`, exact.
pub fn split_prob(a: usize, b: usize) -> ExactRational {
    let num = catalan_int(a) * catalan_int(b);
    BigRational::new(BigInt::from(num), BigInt::from(catalan_int(a + b + 1)))
}

/// `P(a, b)` with the convention `P(a, -1) = P(-1, b) = 0`.
pub fn split_prob_signed(a: i64, b: i64) -> ExactRational {
    if a < 0 || b < 0 {
        return ExactRational::zero();
    }
    split_prob(a as usize, b as usize)
}

/// `ln P(a, b)` via log-gamma.
pub fn ln_split_prob(a: usize, b: usize) -> f64 {
    ln_catalan(a) + ln_catalan(b) - ln_catalan(a + b + 1)
}

/// `P(a, b)` as a float.
pub fn split_prob_f(a: usize, b: usize) -> f64 {
    ln_split_prob(a, b).exp()
}

/// `ln Cat(k) = ln Γ(2k + 1) − 2 ln Γ(k + 1) − ln(k + 1)`.
pub fn ln_catalan(k: usize) -> f64 {
    let k = k as f64;
    ln_gamma(2.0 * k + 1.0) - 2.0 * ln_gamma(k + 1.0) - (k + 1.0).ln()
}

/// `C(a, b)`, exact.
pub fn c_weight(a: usize, b: usize) -> ExactRational {
    let (a, b) = (a as i64, b as i64);
    let num = BigInt::from((a + 1) * (2 * a + 1)) * BigInt::from(a + 3 * b + 3);
    let den = BigInt::from((a + b + 1) * (a + b + 2)) * BigInt::from(2 * (a + b) + 3);
    BigRational::new(num, den)
}

/// `C(a, b)` as a float.
pub fn c_weight_f(a: usize, b: usize) -> f64 {
    let (a, b) = (a as f64, b as f64);
    let s = a + b;
    (a + 1.0) * (2.0 * a + 1.0) * (a + 3.0 * b + 3.0) / ((s + 1.0) * (s + 2.0) * (2.0 * s + 3.0))
}

pub fn ln_c_weight(a: usize, b: usize) -> f64 {
    c_weight_f(a, b).ln()
}

/// Probability that a player starting with `2a + 1` tokens wins at least
/// two of three matches against one starting with `2b + 1` tokens, where
/// each match is won with probability proportional to the current token
/// count and the winner gains a token.
pub fn best_of_three(a: usize, b: usize) -> ExactRational {
    let (a, b) = (a as i64, b as i64);
    let den = (2 * a + 2 * b + 2) * (2 * a + 2 * b + 3) * (2 * a + 2 * b + 4);
    let two_wins = rat(3 * (2 * a + 1) * (2 * a + 2) * (2 * b + 1), den);
    let three_wins = rat((2 * a + 1) * (2 * a + 2) * (2 * a + 3), den);
    two_wins + three_wins
}

/// `c(x) = x²(3 − 2x)`, the large-size limit of `C(a, b)` with `a/n → x`.
pub fn c_limit(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

/// `p(x) = (x(1 − x))^{-3/2}`, the density limit of `4√π n^{3/2} P(a, b)`.
pub fn p_limit(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Pole(x));
    }
    Ok((x * (1.0 - x)).powf(-1.5))
}

/// `max_a |C(a, n − 1 − a) − c(a / n)|`, which is at most `1/n`.
pub fn approximation_error_scan(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("approximation scan needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    Ok((0..n)
        .map(|a| (c_weight_f(a, n - 1 - a) - c_limit(a as f64 / nf)).abs())
        .fold(0.0, f64::max))
}

/// Precomputed `ln Cat(k)` for `k <= 2 n_max + 1`, for fast `ln P(a, b)`
/// with `a + b + 1 <= 2 n_max + 1`.
#[derive(Clone, Debug)]
pub struct LogWeightTable {
    n_max: usize,
    log_catalan: Vec<f64>,
}

impl LogWeightTable {
    pub fn new(n_max: usize) -> Self {
        let log_catalan = (0..=2 * n_max + 1).map(ln_catalan).collect();
        LogWeightTable { n_max, log_catalan }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn ln_catalan(&self, k: usize) -> f64 {
        self.log_catalan[k]
    }

    pub fn ln_split_prob(&self, a: usize, b: usize) -> f64 {
        self.log_catalan[a] + self.log_catalan[b] - self.log_catalan[a + b + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> ExactRational {
        rat(n, d)
    }

    #[test]
    fn catalan_values() {
        assert_eq!(catalan(0), r(1, 1));
        assert_eq!(catalan(3), r(5, 1));
        assert_eq!(catalan(10), r(16796, 1));
        for n in 0..=60 {
            assert_eq!(catalan_int(n), BigUint::from(catalan_u128(n)));
        }
        // Beyond the memo table.
        let big = catalan_int(CATALAN_MEMO + 3);
        let stepped = catalan_int(CATALAN_MEMO + 2) * BigUint::from(2u64 * (2 * (CATALAN_MEMO as u64 + 2) + 1))
            / BigUint::from(CATALAN_MEMO as u64 + 4);
        assert_eq!(big, stepped);
    }

    #[test]
    fn binomial_form_of_catalan() {
        for n in 0..=30u64 {
            let mut binom = BigUint::one();
            for k in 0..n {
                binom = binom * BigUint::from(2 * n - k) / BigUint::from(k + 1);
            }
            assert_eq!(catalan_int(n as usize), binom / BigUint::from(n + 1));
        }
    }

    #[test]
    fn split_prob_examples() {
        assert_eq!(split_prob(0, 0), r(1, 1));
        assert_eq!(split_prob(1, 1), r(1, 5));
        assert_eq!(split_prob(0, 2), r(2, 5));
        assert_eq!(split_prob(2, 0), r(2, 5));
        assert_eq!(split_prob(0, 2) + split_prob(1, 1) + split_prob(2, 0), r(1, 1));
        assert_eq!(split_prob_signed(-1, 3), ExactRational::zero());
    }

    #[test]
    fn split_probs_sum_to_one() {
        for n in 1..=60 {
            let total: ExactRational = (0..n).map(|a| split_prob(a, n - 1 - a)).sum();
            assert_eq!(total, ExactRational::one());
            let f: f64 = (0..n).map(|a| split_prob_f(a, n - 1 - a)).sum();
            assert!((f - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn c_weight_examples() {
        for a in 0..=20 {
            assert_eq!(c_weight(a, a), r(1, 2));
        }
        assert_eq!(c_weight(1, 0), r(4, 5));
        assert_eq!(c_weight(0, 1), r(1, 5));
        assert_eq!(c_weight(0, 4), r(1, 22));
    }

    #[test]
    fn best_of_three_examples() {
        assert_eq!(best_of_three(0, 0), r(1, 2));
        assert_eq!(best_of_three(1, 0), r(96, 120));
    }

    #[test]
    fn limits() {
        assert_eq!(c_limit(0.5), 0.5);
        assert_eq!(c_limit(1.0), 1.0);
        assert!((p_limit(0.5).unwrap() - 8.0).abs() < 1e-12);
        assert!(matches!(p_limit(0.0), Err(Error::Pole(_))));
        assert!(matches!(p_limit(1.0), Err(Error::Pole(_))));
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((c_limit(x) + c_limit(1.0 - x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn approximation_scan() {
        assert!(matches!(approximation_error_scan(1), Err(Error::InvalidArgument(_))));
        // n = 2 by hand: C(0,1) = 1/5 vs c(0) = 0; C(1,0) = 4/5 vs c(1/2) = 1/2.
        let e2 = approximation_error_scan(2).unwrap();
        assert!((e2 - 0.3).abs() < 1e-15);
        assert!(e2 <= 0.5);
        assert!(approximation_error_scan(10).unwrap() <= 0.1);
        assert!(approximation_error_scan(10_000).unwrap() <= 1e-4);
    }

    #[test]
    fn log_table_matches_exact_catalan() {
        let table = LogWeightTable::new(30);
        for k in 0..=60 {
            let exact = catalan_u128(k) as f64;
            let rel = (table.ln_catalan(k).exp() - exact).abs() / exact;
            assert!(rel < 1e-12, "k = {k}: relative error {rel}");
        }
        assert!((table.ln_split_prob(1, 1).exp() - 0.2).abs() < 1e-14);
    }
}
