//! High-precision floating-point reals for the numeric channel.
//!
//! Wraps an arbitrary-precision binary float with a fixed working precision
//! carried alongside the value. Mixed-precision operations compute at the
//! larger of the two operand precisions. Every value produced here is finite;
//! operations that could leave the finite domain return errors instead.

use std::cell::RefCell;
use std::cmp::Ordering;

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::exact::Rational;

const RM: RoundingMode = RoundingMode::ToEven;

/// Guard bits used internally by multi-step operations (roots, powers).
const GUARD_BITS: u32 = 32;

thread_local! {
    static CONSTS: RefCell<Consts> =
        RefCell::new(Consts::new().expect("constants cache allocation"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RealError {
    #[error("precision {requested} bits is below the minimum of {min} bits")]
    PrecisionTooLow { requested: u32, min: u32 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("even-order root of a negative value")]
    RootOfNegative,
    #[error("logarithm of a non-positive value")]
    LogOfNonPositive,
    #[error("power of a negative base with non-integer exponent")]
    PowOfNegative,
    #[error("value is not finite: {op}")]
    NonFinite { op: &'static str },
}

/// Working precision in bits, validated to be at least 64.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const MIN_BITS: u32 = 64;
    pub const DEFAULT: Precision = Precision(128);

    pub fn new(bits: u32) -> Result<Self, RealError> {
        if bits < Self::MIN_BITS {
            return Err(RealError::PrecisionTooLow {
                requested: bits,
                min: Self::MIN_BITS,
            });
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision::DEFAULT
    }
}

/// Arbitrary-precision real number with an attached working precision.
#[derive(Clone, Debug)]
pub struct HighPrecisionReal {
    value: BigFloat,
    prec: Precision,
}

impl HighPrecisionReal {
    fn wrap(value: BigFloat, prec: Precision, op: &'static str) -> Self {
        assert!(
            !value.is_inf() && !value.is_nan(),
            "non-finite result from {op}"
        );
        HighPrecisionReal { value, prec }
    }

    pub fn zero(prec: Precision) -> Self {
        HighPrecisionReal {
            value: BigFloat::new(prec.bits() as usize),
            prec,
        }
    }

    pub fn from_u64(n: u64, prec: Precision) -> Self {
        let value = BigFloat::from_u64(n, prec.bits() as usize);
        Self::wrap(value, prec, "from_u64")
    }

    pub fn from_f64(x: f64, prec: Precision) -> Result<Self, RealError> {
        if !x.is_finite() {
            return Err(RealError::NonFinite { op: "from_f64" });
        }
        Ok(HighPrecisionReal {
            value: BigFloat::from_f64(x, prec.bits() as usize),
            prec,
        })
    }

    fn from_bigint(n: &BigInt, prec: Precision) -> BigFloat {
        let (sign, digits) = n.to_u64_digits();
        if digits.is_empty() {
            return BigFloat::new(prec.bits() as usize);
        }
        let s = match sign {
            num_bigint::Sign::Minus => Sign::Neg,
            _ => Sign::Pos,
        };
        // exponent equal to the bit capacity makes the words an exact integer
        let e = (digits.len() * 64) as astro_float::Exponent;
        BigFloat::from_words(&digits, s, e)
    }

    /// Converts an exact rational, correctly rounded to the target precision.
    pub fn from_rational(q: &Rational, prec: Precision) -> Self {
        if q.is_zero() {
            return Self::zero(prec);
        }
        let num = Self::from_bigint(q.numer(), prec);
        let den = Self::from_bigint(q.denom(), prec);
        let value = num.div(&den, prec.bits() as usize, RM);
        Self::wrap(value, prec, "from_rational")
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.value.is_positive() && !self.value.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative() && !self.value.is_zero()
    }

    fn join(&self, other: &Self) -> (usize, Precision) {
        let prec = self.prec.max(other.prec);
        (prec.bits() as usize, prec)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (p, prec) = self.join(other);
        Self::wrap(self.value.add(&other.value, p, RM), prec, "add")
    }

    pub fn sub(&self, other: &Self) -> Self {
        let (p, prec) = self.join(other);
        Self::wrap(self.value.sub(&other.value, p, RM), prec, "sub")
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (p, prec) = self.join(other);
        Self::wrap(self.value.mul(&other.value, p, RM), prec, "mul")
    }

    pub fn div(&self, other: &Self) -> Result<Self, RealError> {
        if other.is_zero() {
            return Err(RealError::DivisionByZero);
        }
        let (p, prec) = self.join(other);
        Ok(Self::wrap(self.value.div(&other.value, p, RM), prec, "div"))
    }

    pub fn neg(&self) -> Self {
        HighPrecisionReal {
            value: self.value.neg(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Integer power with exponent of either sign.
    pub fn powi(&self, n: i64) -> Result<Self, RealError> {
        let p = self.prec.bits() as usize;
        if n == 0 {
            return Ok(Self::from_u64(1, self.prec));
        }
        if self.is_zero() {
            if n < 0 {
                return Err(RealError::DivisionByZero);
            }
            return Ok(Self::zero(self.prec));
        }
        let raised = self
            .value
            .powi(n.unsigned_abs() as usize, p + GUARD_BITS as usize, RM);
        let value = if n < 0 {
            raised.reciprocal(p, RM)
        } else {
            let mut v = raised;
            v.set_precision(p, RM).expect("precision reduction");
            v
        };
        Ok(Self::wrap(value, self.prec, "powi"))
    }

    /// Real power `self^a` for a strictly positive base (or zero base with
    /// a positive exponent).
    ///
    /// Exponents that are integers or small dyadic rationals are evaluated
    /// with root and product arithmetic: the general power routine escalates
    /// precision to settle the rounding and never terminates when the true
    /// result is exactly representable, which integer exponents routinely
    /// produce.
    pub fn pow_f64(&self, a: f64) -> Result<Self, RealError> {
        if !a.is_finite() {
            return Err(RealError::NonFinite { op: "pow_f64 exponent" });
        }
        if self.is_zero() {
            if a > 0.0 {
                return Ok(Self::zero(self.prec));
            }
            if a == 0.0 {
                return Ok(Self::from_u64(1, self.prec));
            }
            return Err(RealError::DivisionByZero);
        }
        if self.is_negative() {
            return Err(RealError::PowOfNegative);
        }
        let one = Self::from_u64(1, self.prec);
        if self.total_cmp(&one) == Ordering::Equal {
            return Ok(one);
        }
        for halvings in 0..=6u32 {
            let scaled = a * f64::from(1u32 << halvings);
            if scaled.fract() == 0.0 && scaled.abs() <= 2f64.powi(40) {
                return self.dyadic_pow(scaled as i64, halvings);
            }
        }
        let p = self.prec.bits() as usize;
        let exp = BigFloat::from_f64(a, 64);
        let value = with_consts(|cc| self.value.pow(&exp, p, RM, cc));
        Ok(Self::wrap(value, self.prec, "pow_f64"))
    }

    /// self^(k / 2^halvings) by repeated square roots and an integer power.
    fn dyadic_pow(&self, k: i64, halvings: u32) -> Result<Self, RealError> {
        let p = self.prec.bits() as usize;
        let wp = p + GUARD_BITS as usize;
        let mut root = self.value.clone();
        for _ in 0..halvings {
            root = root.sqrt(wp, RM);
        }
        if k == 0 {
            return Ok(Self::from_u64(1, self.prec));
        }
        let raised = root.powi(k.unsigned_abs() as usize, wp, RM);
        let value = if k < 0 {
            raised.reciprocal(p, RM)
        } else {
            let mut v = raised;
            v.set_precision(p, RM).expect("precision reduction");
            v
        };
        Ok(Self::wrap(value, self.prec, "pow_f64"))
    }

    /// Principal n-th root of a nonnegative value.
    pub fn nth_root(&self, n: u32) -> Result<Self, RealError> {
        assert!(n >= 1, "root order must be at least 1");
        if self.is_negative() {
            return Err(RealError::RootOfNegative);
        }
        if self.is_zero() || n == 1 {
            return Ok(self.clone());
        }
        let one = Self::from_u64(1, self.prec);
        if self.total_cmp(&one) == Ordering::Equal {
            return Ok(one);
        }
        let p = self.prec.bits() as usize;
        let value = match n {
            2 => self.value.sqrt(p, RM),
            3 => self.value.cbrt(p, RM),
            _ => {
                let wp = p + GUARD_BITS as usize;
                let order = BigFloat::from_u64(n as u64, wp);
                with_consts(|cc| {
                    let log = self.value.ln(wp, RM, cc);
                    let scaled = log.div(&order, wp, RM);
                    let mut v = scaled.exp(p + 2, RM, cc);
                    v.set_precision(p, RM).expect("precision reduction");
                    v
                })
            }
        };
        Ok(Self::wrap(value, self.prec, "nth_root"))
    }

    pub fn ln(&self) -> Result<Self, RealError> {
        if !self.is_positive() {
            return Err(RealError::LogOfNonPositive);
        }
        let one = Self::from_u64(1, self.prec);
        if self.total_cmp(&one) == Ordering::Equal {
            return Ok(Self::zero(self.prec));
        }
        let p = self.prec.bits() as usize;
        let value = with_consts(|cc| self.value.ln(p, RM, cc));
        Ok(Self::wrap(value, self.prec, "ln"))
    }

    pub fn exp(&self) -> Self {
        if self.is_zero() {
            return Self::from_u64(1, self.prec);
        }
        let p = self.prec.bits() as usize;
        let value = with_consts(|cc| self.value.exp(p, RM, cc));
        Self::wrap(value, self.prec, "exp")
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        self.value
            .partial_cmp(&other.value)
            .expect("finite values are totally ordered")
    }

    pub fn max(&self, other: &Self) -> Self {
        if self.total_cmp(other) == Ordering::Less {
            other.clone()
        } else {
            self.clone()
        }
    }

    /// Nearest double. Lossy output conversion for reports only.
    pub fn to_f64(&self) -> f64 {
        let Some((words, _, sign, e, _)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        if words.iter().all(|w| *w == 0) {
            return 0.0;
        }
        let hi = words[words.len() - 1] as f64;
        let lo = if words.len() >= 2 {
            words[words.len() - 2] as f64
        } else {
            0.0
        };
        // normalized fraction in [0.5, 1): top two words suffice for a double
        let frac = hi / 2f64.powi(64) + lo / 2f64.powi(128);
        let magnitude = if e > 1100 {
            f64::INFINITY
        } else if e < -1100 {
            0.0
        } else {
            frac * 2f64.powi(e)
        };
        match sign {
            Sign::Neg => -magnitude,
            Sign::Pos => magnitude,
        }
    }
}

impl PartialEq for HighPrecisionReal {
    fn eq(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }
}

impl PartialOrd for HighPrecisionReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

/// Nearest double of an exact rational, via the high-precision channel.
pub fn rational_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() && d != 0.0 => n / d,
        _ => HighPrecisionReal::from_rational(q, Precision::DEFAULT).to_f64(),
    }
}

/// Exact rational from a finite double. Every finite double is a rational
/// with a power-of-two denominator, so this conversion is lossless.
pub fn f64_to_rational(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}
