//! Exact arbitrary-precision integer and rational arithmetic.
//!
//! Everything in this module is computed without tolerances: rationals are
//! kept in lowest terms with a positive denominator, so equality of values
//! is structural equality. The even-index binomial sum is evaluated by
//! literal summation; its closed form is reserved for test oracles.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational scalar, always stored in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExactError {
    #[error("binomial index k={k} exceeds n={n}")]
    BinomialIndexOutOfRange { n: u32, k: u32 },
    #[error("zero base cannot be raised to a negative power")]
    ZeroToNegativePower,
}

/// Binomial coefficient C(n, k) as an exact integer.
///
/// Uses the multiplicative product form with exact intermediate division;
/// the Pascal-recurrence route is kept independent for cross-checking.
pub fn binomial(n: u32, k: u32) -> Result<BigInt, ExactError> {
    if k > n {
        return Err(ExactError::BinomialIndexOutOfRange { n, k });
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        // exact at every step: C(n-k+i, i) is an integer
        acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
    }
    Ok(acc)
}

/// Sum of 2^(l-k) C(l, k) over even k in 0..=l, by direct summation.
pub fn even_binomial_sum(l: u32) -> BigInt {
    let mut acc = BigInt::zero();
    let mut k = 0;
    while k <= l {
        let coeff = binomial(l, k).expect("k <= l by construction");
        acc += coeff << (l - k);
        k += 2;
    }
    acc
}

/// Exact integer power of a rational, in lowest terms.
pub fn rational_pow(base: &Rational, exp: i64) -> Result<Rational, ExactError> {
    if base.is_zero() && exp < 0 {
        return Err(ExactError::ZeroToNegativePower);
    }
    let positive = square_multiply(base, exp.unsigned_abs());
    if exp < 0 {
        Ok(positive.recip())
    } else {
        Ok(positive)
    }
}

fn square_multiply(base: &Rational, mut exp: u64) -> Rational {
    let mut acc = Rational::one();
    let mut sq = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= &sq;
        }
        exp >>= 1;
        if exp > 0 {
            sq = &sq * &sq;
        }
    }
    acc
}

/// 3^e as an exact integer.
pub fn pow3(e: u32) -> BigInt {
    BigInt::from(3u32).pow(e)
}

/// Rational from an integer numerator/denominator pair.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Rational from an integer.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Renders a rational as `num/den` with an explicit denominator.
pub fn ratio_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Absolute value of a rational.
pub fn abs(q: &Rational) -> Rational {
    if q.is_negative() {
        -q.clone()
    } else {
        q.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Pascal's triangle, additions only.
    fn binomial_pascal(n: u32, k: u32) -> BigInt {
        let mut row = vec![BigInt::one()];
        for _ in 0..n {
            let mut next = vec![BigInt::one()];
            for i in 1..row.len() {
                next.push(&row[i - 1] + &row[i]);
            }
            next.push(BigInt::one());
            row = next;
        }
        row[k as usize].clone()
    }

    #[test]
    fn binomial_matches_pascal_oracle() {
        assert_eq!(binomial(7, 2).unwrap(), binomial_pascal(7, 2));
        assert_eq!(binomial(7, 2).unwrap(), BigInt::from(21));
        assert_eq!(binomial(5, 0).unwrap(), BigInt::one());
        assert_eq!(binomial(8, 4).unwrap(), binomial_pascal(8, 4));
        assert_eq!(binomial(8, 4).unwrap(), BigInt::from(70));
    }

    #[test]
    fn binomial_rejects_k_above_n() {
        assert_eq!(
            binomial(3, 4),
            Err(ExactError::BinomialIndexOutOfRange { n: 3, k: 4 })
        );
    }

    #[test]
    fn binomial_pascal_rule() {
        for n in 2..=20u32 {
            for k in 1..n {
                let lhs = binomial(n, k).unwrap();
                let rhs = binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap();
                assert_eq!(lhs, rhs, "Pascal rule failed at n={n} k={k}");
            }
        }
    }

    #[test]
    fn even_binomial_sum_small_cases() {
        // l=7 by hand: 128 + 672 + 280 + 14
        assert_eq!(even_binomial_sum(7), BigInt::from(128 + 672 + 280 + 14));
        assert_eq!(even_binomial_sum(7), BigInt::from(1094));
        assert_eq!(even_binomial_sum(1), BigInt::from(2));
        assert_eq!(even_binomial_sum(0), BigInt::one());
    }

    #[test]
    fn even_binomial_sum_closed_form_oracle() {
        // closed form (3^l + 1)/2 is the oracle, never the implementation
        for l in 0..=64u32 {
            let doubled = even_binomial_sum(l) * BigInt::from(2);
            assert_eq!(doubled, pow3(l) + BigInt::one(), "identity failed at l={l}");
        }
    }

    /// Independent oracle: repeated multiplication.
    fn pow_by_repeated_mul(base: &Rational, exp: i64) -> Rational {
        let mut acc = Rational::one();
        for _ in 0..exp.unsigned_abs() {
            acc *= base;
        }
        if exp < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    #[test]
    fn rational_pow_matches_repeated_multiplication() {
        let cases = [
            (ratio(2, 3), 3, ratio(8, 27)),
            (ratio(5, 7), 0, int(1)),
            (ratio(-1, 2), -2, int(4)),
        ];
        for (base, exp, expected) in cases {
            assert_eq!(rational_pow(&base, exp).unwrap(), expected);
            assert_eq!(
                rational_pow(&base, exp).unwrap(),
                pow_by_repeated_mul(&base, exp)
            );
        }
    }

    #[test]
    fn rational_pow_zero_base_negative_exponent() {
        assert_eq!(
            rational_pow(&int(0), -1),
            Err(ExactError::ZeroToNegativePower)
        );
        assert_eq!(rational_pow(&int(0), 0).unwrap(), int(1));
    }

    #[test]
    fn ratio_string_always_explicit() {
        assert_eq!(ratio_string(&int(5)), "5/1");
        assert_eq!(ratio_string(&ratio(-3, 6)), "-1/2");
    }
}
