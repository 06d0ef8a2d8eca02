//! Control functions bounding equation residuals, their contraction series,
//! and the corresponding closed-form limits over the reals.
//!
//! The stability argument sums the control along the contracted diagonal:
//! the s-th term is 3^(-l s) Q(x/3^(s+1), x/3^(s+1)). For the power-shaped
//! families the diagonal collapses to C * mag * t^e, the term ratio is the
//! exact constant 3^(-(l+e)), and the geometric tail is exact, so the
//! truncated sum plus the tail reproduces the limit independent of where
//! the truncation happens. The submultiplicative family only admits a tail
//! ratio bound, 3^(-l) * alpha(1/3).

use std::fmt;
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exact::{pow3, rational_pow, ExactError, Rational};
use crate::real::{HighPrecisionReal, Precision, RealError};

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("control parameter {name} must be nonnegative, got {value}")]
    NegativeMagnitude { name: &'static str, value: f64 },
    #[error("control parameter {name} must be finite")]
    NonFiniteParameter { name: &'static str },
    #[error("degree must be at least 1, got {degree}")]
    InvalidDegree { degree: u32 },
    #[error("control evaluation requires a strictly positive point")]
    NonPositivePoint,
    #[error("shape function returned a negative value")]
    NegativeAlphaValue,
    #[error("closed form undefined: exponent {exponent} equals -degree {degree}")]
    ParameterExclusion { exponent: f64, degree: u32 },
    #[error(transparent)]
    Real(#[from] RealError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Shape function for the submultiplicative family. Takes and returns exact
/// rationals so that contraction inequalities are decidable without
/// floating-point rounding.
#[derive(Clone)]
pub enum AlphaFunction {
    /// alpha(t) = t^exponent.
    RationalPower { exponent: i32 },
    Custom(Arc<dyn Fn(&Rational) -> Rational + Send + Sync>),
}

impl AlphaFunction {
    pub fn eval(&self, t: &Rational) -> Result<Rational, ControlError> {
        use num_traits::Signed;
        let value = match self {
            AlphaFunction::RationalPower { exponent } => {
                rational_pow(t, *exponent as i64)?
            }
            AlphaFunction::Custom(f) => f(t),
        };
        if value.is_negative() {
            return Err(ControlError::NegativeAlphaValue);
        }
        Ok(value)
    }

    pub fn describe(&self) -> String {
        match self {
            AlphaFunction::RationalPower { exponent } => format!("t^{exponent}"),
            AlphaFunction::Custom(_) => "custom".to_string(),
        }
    }
}

impl fmt::Debug for AlphaFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlphaFunction({})", self.describe())
    }
}

/// Residual control Q(x, y), evaluated on magnitudes |x|, |y|.
#[derive(Clone, Debug)]
pub enum ControlFunction {
    /// Q = epsilon.
    Constant { epsilon: f64 },
    /// Q = epsilon (|x|^alpha + |y|^alpha).
    SumPower { epsilon: f64, alpha: f64 },
    /// Q = epsilon (|x|^alpha + |y|^alpha + |x|^(alpha/2) |y|^(alpha/2)).
    MixedPower { epsilon: f64, alpha: f64 },
    /// Q = epsilon |x|^p |y|^q.
    ProductPower { epsilon: f64, p_exp: f64, q_exp: f64 },
    /// Q = delta (alpha(|x|) + alpha(|y|)).
    Submultiplicative { delta: f64, alpha: AlphaFunction },
}

impl ControlFunction {
    pub fn family_name(&self) -> &'static str {
        match self {
            ControlFunction::Constant { .. } => "constant",
            ControlFunction::SumPower { .. } => "sum_power",
            ControlFunction::MixedPower { .. } => "mixed_power",
            ControlFunction::ProductPower { .. } => "product_power",
            ControlFunction::Submultiplicative { .. } => "submultiplicative",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ControlFunction::Constant { epsilon } => format!("constant(epsilon={epsilon})"),
            ControlFunction::SumPower { epsilon, alpha } => {
                format!("sum_power(epsilon={epsilon} alpha={alpha})")
            }
            ControlFunction::MixedPower { epsilon, alpha } => {
                format!("mixed_power(epsilon={epsilon} alpha={alpha})")
            }
            ControlFunction::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            } => format!("product_power(epsilon={epsilon} p={p_exp} q={q_exp})"),
            ControlFunction::Submultiplicative { delta, alpha } => {
                format!("submultiplicative(delta={delta} alpha={})", alpha.describe())
            }
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let check = |name: &'static str, value: f64, nonneg: bool| {
            if !value.is_finite() {
                return Err(ControlError::NonFiniteParameter { name });
            }
            if nonneg && value < 0.0 {
                return Err(ControlError::NegativeMagnitude { name, value });
            }
            Ok(())
        };
        match self {
            ControlFunction::Constant { epsilon } => check("epsilon", *epsilon, true),
            ControlFunction::SumPower { epsilon, alpha }
            | ControlFunction::MixedPower { epsilon, alpha } => {
                check("epsilon", *epsilon, true)?;
                check("alpha", *alpha, false)
            }
            ControlFunction::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            } => {
                check("epsilon", *epsilon, true)?;
                check("p", *p_exp, false)?;
                check("q", *q_exp, false)
            }
            ControlFunction::Submultiplicative { delta, .. } => check("delta", *delta, true),
        }
    }

    /// Magnitude parameter of the family (epsilon or delta).
    pub fn magnitude(&self) -> f64 {
        match self {
            ControlFunction::Constant { epsilon }
            | ControlFunction::SumPower { epsilon, .. }
            | ControlFunction::MixedPower { epsilon, .. }
            | ControlFunction::ProductPower { epsilon, .. } => *epsilon,
            ControlFunction::Submultiplicative { delta, .. } => *delta,
        }
    }

    /// Diagonal shape for the power families: Q(t, t) = C * mag * t^e,
    /// returned as (C, e). None for the submultiplicative family.
    pub fn diagonal_power_shape(&self) -> Option<(u32, f64)> {
        match self {
            ControlFunction::Constant { .. } => Some((1, 0.0)),
            ControlFunction::SumPower { alpha, .. } => Some((2, *alpha)),
            ControlFunction::MixedPower { alpha, .. } => Some((3, *alpha)),
            ControlFunction::ProductPower { p_exp, q_exp, .. } => Some((1, p_exp + q_exp)),
            ControlFunction::Submultiplicative { .. } => None,
        }
    }

    fn pow_term(t: &Rational, e: f64, prec: Precision) -> Result<HighPrecisionReal, ControlError> {
        Ok(HighPrecisionReal::from_rational(t, prec).pow_f64(e)?)
    }

    /// Q at a pair of nonnegative rational magnitudes.
    pub fn eval_hp(
        &self,
        x_abs: &Rational,
        y_abs: &Rational,
        prec: Precision,
    ) -> Result<HighPrecisionReal, ControlError> {
        use num_traits::Signed;
        self.validate()?;
        if x_abs.is_negative() || y_abs.is_negative() {
            return Err(ControlError::NonPositivePoint);
        }
        let mag = HighPrecisionReal::from_f64(self.magnitude(), prec)?;
        let value = match self {
            ControlFunction::Constant { .. } => mag,
            ControlFunction::SumPower { alpha, .. } => {
                let xs = Self::pow_term(x_abs, *alpha, prec)?;
                let ys = Self::pow_term(y_abs, *alpha, prec)?;
                mag.mul(&xs.add(&ys))
            }
            ControlFunction::MixedPower { alpha, .. } => {
                let xs = Self::pow_term(x_abs, *alpha, prec)?;
                let ys = Self::pow_term(y_abs, *alpha, prec)?;
                let half = *alpha / 2.0;
                let cross = Self::pow_term(x_abs, half, prec)?
                    .mul(&Self::pow_term(y_abs, half, prec)?);
                mag.mul(&xs.add(&ys).add(&cross))
            }
            ControlFunction::ProductPower { p_exp, q_exp, .. } => {
                let xs = Self::pow_term(x_abs, *p_exp, prec)?;
                let ys = Self::pow_term(y_abs, *q_exp, prec)?;
                mag.mul(&xs).mul(&ys)
            }
            ControlFunction::Submultiplicative { alpha, .. } => {
                let ax = alpha.eval(x_abs)?;
                let ay = alpha.eval(y_abs)?;
                mag.mul(&HighPrecisionReal::from_rational(&(ax + ay), prec))
            }
        };
        Ok(value)
    }

    /// Q along the diagonal: Q(t, t) for a nonnegative rational t. The
    /// product family collapses t^p t^q into one power with the combined
    /// exponent so the series terms see the same exponent value as the
    /// tail ratio and the closed form (p + q is a single double-precision
    /// sum in all three).
    pub fn diagonal_hp(
        &self,
        t: &Rational,
        prec: Precision,
    ) -> Result<HighPrecisionReal, ControlError> {
        if let ControlFunction::ProductPower { p_exp, q_exp, .. } = self {
            use num_traits::Signed;
            self.validate()?;
            if t.is_negative() {
                return Err(ControlError::NonPositivePoint);
            }
            let mag = HighPrecisionReal::from_f64(self.magnitude(), prec)?;
            return Ok(mag.mul(&Self::pow_term(t, p_exp + q_exp, prec)?));
        }
        self.eval_hp(t, t, prec)
    }

    /// Double-precision view of Q for the non-Archimedean channel, where
    /// magnitudes are powers of the prime.
    pub fn eval_f64(&self, x_abs: f64, y_abs: f64) -> Result<f64, ControlError> {
        self.validate()?;
        if x_abs < 0.0 || y_abs < 0.0 {
            return Err(ControlError::NonPositivePoint);
        }
        let value = match self {
            ControlFunction::Constant { epsilon } => *epsilon,
            ControlFunction::SumPower { epsilon, alpha } => {
                epsilon * (x_abs.powf(*alpha) + y_abs.powf(*alpha))
            }
            ControlFunction::MixedPower { epsilon, alpha } => {
                epsilon
                    * (x_abs.powf(*alpha)
                        + y_abs.powf(*alpha)
                        + x_abs.powf(*alpha / 2.0) * y_abs.powf(*alpha / 2.0))
            }
            ControlFunction::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            } => epsilon * x_abs.powf(*p_exp) * y_abs.powf(*q_exp),
            ControlFunction::Submultiplicative { delta, alpha } => {
                let to_q = |v: f64| {
                    Rational::from_float(v).ok_or(ControlError::NonFiniteParameter {
                        name: "submultiplicative argument",
                    })
                };
                let ax = alpha.eval(&to_q(x_abs)?)?;
                let ay = alpha.eval(&to_q(y_abs)?)?;
                delta * crate::real::rational_to_f64(&(ax + ay))
            }
        };
        Ok(value)
    }
}

impl Serialize for ControlFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ControlFunction::Constant { epsilon } => {
                let mut s = serializer.serialize_struct("control", 2)?;
                s.serialize_field("family", "constant")?;
                s.serialize_field("epsilon", epsilon)?;
                s.end()
            }
            ControlFunction::SumPower { epsilon, alpha } => {
                let mut s = serializer.serialize_struct("control", 3)?;
                s.serialize_field("family", "sum_power")?;
                s.serialize_field("epsilon", epsilon)?;
                s.serialize_field("alpha", alpha)?;
                s.end()
            }
            ControlFunction::MixedPower { epsilon, alpha } => {
                let mut s = serializer.serialize_struct("control", 3)?;
                s.serialize_field("family", "mixed_power")?;
                s.serialize_field("epsilon", epsilon)?;
                s.serialize_field("alpha", alpha)?;
                s.end()
            }
            ControlFunction::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            } => {
                let mut s = serializer.serialize_struct("control", 4)?;
                s.serialize_field("family", "product_power")?;
                s.serialize_field("epsilon", epsilon)?;
                s.serialize_field("p", p_exp)?;
                s.serialize_field("q", q_exp)?;
                s.end()
            }
            ControlFunction::Submultiplicative { delta, alpha } => {
                let mut s = serializer.serialize_struct("control", 3)?;
                s.serialize_field("family", "submultiplicative")?;
                s.serialize_field("delta", delta)?;
                s.serialize_field("alpha", &alpha.describe())?;
                s.end()
            }
        }
    }
}

/// Tail of the contraction series past the computed partial sum.
#[derive(Clone, Debug, PartialEq)]
pub enum TailBound {
    Finite(HighPrecisionReal),
    Unbounded,
}

/// Result of summing the contraction series.
#[derive(Clone, Debug)]
pub struct SeriesEvaluation {
    pub partial_sum: HighPrecisionReal,
    pub terms_used: u32,
    pub tail_bound: TailBound,
    pub converged: bool,
}

impl SeriesEvaluation {
    /// Partial sum plus tail. For the power families the tail is the exact
    /// geometric remainder, so this equals the limit regardless of where
    /// the summation stopped.
    pub fn limit_estimate(&self) -> Option<HighPrecisionReal> {
        match &self.tail_bound {
            TailBound::Finite(tail) => Some(self.partial_sum.add(tail)),
            TailBound::Unbounded => None,
        }
    }
}

/// Tail ratio of the series: exact 3^(-(l+e)) for the power families, the
/// submultiplicativity bound 3^(-l) alpha(1/3) otherwise. A ratio >= 1
/// means the tail cannot be bounded.
fn tail_ratio(q: &ControlFunction, l: u32) -> Result<Option<Rational>, ControlError> {
    match q.diagonal_power_shape() {
        Some((_, e)) => {
            let combined = e + l as f64;
            if combined <= 0.0 {
                return Ok(None);
            }
            // only used for the convergence verdict and the tail of
            // non-integer exponents; integer exponents get the exact ratio
            if combined.fract() == 0.0 && combined.abs() < 60.0 {
                let k = combined as i64;
                Ok(Some(rational_pow(&Rational::from_integer(3.into()), -k)?))
            } else {
                Ok(None) // handled by the caller in high precision
            }
        }
        None => {
            let ControlFunction::Submultiplicative { alpha, .. } = q else {
                unreachable!("power shape covered above");
            };
            let third = Rational::new(1.into(), 3.into());
            let ratio = alpha.eval(&third)?
                / Rational::from_integer(pow3(l));
            if ratio >= Rational::from_integer(1.into()) {
                Ok(None)
            } else {
                Ok(Some(ratio))
            }
        }
    }
}

/// Sums the contraction series sum_s 3^(-l s) Q(x/3^(s+1), x/3^(s+1)) by
/// literal term evaluation, up to `max_terms` terms or until the geometric
/// tail drops below `rel_tol` of the partial sum.
pub fn series_bound(
    q: &ControlFunction,
    l: u32,
    x_abs: &Rational,
    max_terms: u32,
    rel_tol: f64,
    prec: Precision,
) -> Result<SeriesEvaluation, ControlError> {
    use num_traits::Signed;
    q.validate()?;
    if l == 0 {
        return Err(ControlError::InvalidDegree { degree: 0 });
    }
    if !x_abs.is_positive() {
        return Err(ControlError::NonPositivePoint);
    }
    assert!(max_terms >= 1, "at least one term is required");

    // decide convergence up front
    let divergent = match q.diagonal_power_shape() {
        Some((_, e)) => e + l as f64 <= 0.0,
        None => tail_ratio(q, l)?.is_none(),
    };

    let three = Rational::from_integer(3.into());
    let scale_step = Rational::new(1.into(), pow3(l)); // 3^(-l) per term
    let tol = HighPrecisionReal::from_f64(rel_tol, prec)?;

    let mut partial = HighPrecisionReal::zero(prec);
    let mut scale = Rational::from_integer(1.into());
    let mut point = x_abs / &three;
    let mut terms_used = 0u32;

    let term_at =
        |scale: &Rational, point: &Rational| -> Result<HighPrecisionReal, ControlError> {
            let diag = q.diagonal_hp(point, prec)?;
            Ok(HighPrecisionReal::from_rational(scale, prec).mul(&diag))
        };

    let mut finish_tail: Option<TailBound> = None;
    while terms_used < max_terms {
        let term = term_at(&scale, &point)?;
        partial = partial.add(&term);
        terms_used += 1;
        scale *= &scale_step;
        point /= &three;

        if divergent {
            continue;
        }
        let next = term_at(&scale, &point)?;
        let tail = geometric_tail(q, l, &next, prec)?;
        let done = tail.is_zero() || tail.total_cmp(&tol.mul(&partial)) != std::cmp::Ordering::Greater;
        if done {
            finish_tail = Some(TailBound::Finite(tail));
            break;
        }
        if terms_used == max_terms {
            finish_tail = Some(TailBound::Finite(tail));
        }
    }

    let (tail_bound, converged) = if divergent {
        (TailBound::Unbounded, false)
    } else {
        let tail = finish_tail.expect("tail computed for convergent series");
        let converged = match &tail {
            TailBound::Finite(t) => {
                t.is_zero() || t.total_cmp(&tol.mul(&partial)) != std::cmp::Ordering::Greater
            }
            TailBound::Unbounded => false,
        };
        (tail, converged)
    };

    Ok(SeriesEvaluation {
        partial_sum: partial,
        terms_used,
        tail_bound,
        converged,
    })
}

/// Tail from the first omitted term: term / (1 - ratio).
fn geometric_tail(
    q: &ControlFunction,
    l: u32,
    first_omitted: &HighPrecisionReal,
    prec: Precision,
) -> Result<HighPrecisionReal, ControlError> {
    if first_omitted.is_zero() {
        return Ok(HighPrecisionReal::zero(prec));
    }
    let one = HighPrecisionReal::from_u64(1, prec);
    let ratio = match tail_ratio(q, l)? {
        Some(r) => HighPrecisionReal::from_rational(&r, prec),
        None => match q.diagonal_power_shape() {
            Some((_, e)) => {
                debug_assert!(e + l as f64 > 0.0);
                let three_l =
                    HighPrecisionReal::from_rational(&Rational::from_integer(pow3(l)), prec);
                HighPrecisionReal::from_u64(3, prec)
                    .pow_f64(-e)?
                    .div(&three_l)?
            }
            None => return Ok(first_omitted.clone()),
        },
    };
    Ok(first_omitted.div(&one.sub(&ratio))?)
}

/// Closed-form limit of the contraction series, when the family admits one.
#[derive(Clone, Debug)]
pub enum ClosedFormBound {
    Applicable(HighPrecisionReal),
    NotApplicable(&'static str),
}

/// The closed-form stability bound C * mag * |x|^e * 3^l / (3^(e+l) - 1)
/// for the power families. Errors when e = -l exactly (vanishing
/// denominator); reports the divergent range e < -l as not applicable.
pub fn closed_form_bound(
    q: &ControlFunction,
    l: u32,
    x_abs: &Rational,
    prec: Precision,
) -> Result<ClosedFormBound, ControlError> {
    use num_traits::Signed;
    q.validate()?;
    if l == 0 {
        return Err(ControlError::InvalidDegree { degree: 0 });
    }
    if !x_abs.is_positive() {
        return Err(ControlError::NonPositivePoint);
    }
    let Some((c, e)) = q.diagonal_power_shape() else {
        return Ok(ClosedFormBound::NotApplicable(
            "no real-field closed form for the submultiplicative family",
        ));
    };
    let combined = e + l as f64;
    if combined == 0.0 {
        return Err(ControlError::ParameterExclusion {
            exponent: e,
            degree: l,
        });
    }
    if combined < 0.0 {
        return Ok(ClosedFormBound::NotApplicable(
            "series diverges for exponents below -degree",
        ));
    }
    let mag = HighPrecisionReal::from_f64(q.magnitude(), prec)?;
    let coeff = HighPrecisionReal::from_u64(c as u64, prec);
    let x_pow = HighPrecisionReal::from_rational(x_abs, prec).pow_f64(e)?;
    let three_l = HighPrecisionReal::from_rational(&Rational::from_integer(pow3(l)), prec);
    let one = HighPrecisionReal::from_u64(1, prec);
    // 3^(e+l) as exact 3^l times 3^e; adding the exponents in f64 first
    // drops low bits of e and shifts the result by ~ulp(e+l) * ln 3
    let denom = three_l
        .mul(&HighPrecisionReal::from_u64(3, prec).pow_f64(e)?)
        .sub(&one);
    let bound = coeff.mul(&mag).mul(&x_pow).mul(&three_l).div(&denom)?;
    Ok(ClosedFormBound::Applicable(bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, ratio};

    const P: Precision = Precision::DEFAULT;

    fn assert_close(a: &HighPrecisionReal, q: Rational, tol: f64) {
        let b = HighPrecisionReal::from_rational(&q, P);
        let diff = a.sub(&b).abs().to_f64();
        assert!(diff < tol, "difference {diff} exceeds {tol}");
    }

    #[test]
    fn constant_series_partials_and_limit() {
        let q = ControlFunction::Constant { epsilon: 1.0 };
        let two_terms = series_bound(&q, 1, &int(1), 2, 1e-30, P).unwrap();
        assert_eq!(two_terms.terms_used, 2);
        assert_close(&two_terms.partial_sum, ratio(4, 3), 1e-36);
        // tail = (1/9) / (1 - 1/3) = 1/6, so the limit is exact at 3/2
        assert_close(&two_terms.limit_estimate().unwrap(), ratio(3, 2), 1e-36);
        assert!(!two_terms.converged);

        let resolved = series_bound(&q, 1, &int(1), 96, 1e-30, P).unwrap();
        assert!(resolved.converged);
        assert_close(&resolved.limit_estimate().unwrap(), ratio(3, 2), 1e-35);

        let l2 = series_bound(&q, 2, &int(1), 96, 1e-30, P).unwrap();
        assert_close(&l2.limit_estimate().unwrap(), ratio(9, 8), 1e-35);
    }

    #[test]
    fn closed_forms_at_pinned_values() {
        let value = |q: &ControlFunction, l: u32, x: Rational| -> HighPrecisionReal {
            match closed_form_bound(q, l, &x, P).unwrap() {
                ClosedFormBound::Applicable(v) => v,
                ClosedFormBound::NotApplicable(w) => panic!("unexpected: {w}"),
            }
        };
        let constant = ControlFunction::Constant { epsilon: 1.0 };
        assert_close(&value(&constant, 1, int(1)), ratio(3, 2), 1e-36);
        assert_close(&value(&constant, 2, int(1)), ratio(9, 8), 1e-36);

        let sum = ControlFunction::SumPower {
            epsilon: 1.0,
            alpha: 1.0,
        };
        assert_close(&value(&sum, 1, int(1)), ratio(3, 4), 1e-36);

        let product = ControlFunction::ProductPower {
            epsilon: 1.0,
            p_exp: 1.0,
            q_exp: 1.0,
        };
        assert_close(&value(&product, 1, int(1)), ratio(3, 26), 1e-36);

        let mixed = ControlFunction::MixedPower {
            epsilon: 1.0,
            alpha: 1.0,
        };
        assert_close(&value(&mixed, 2, int(1)), ratio(27, 26), 1e-36);
    }

    #[test]
    fn series_limit_matches_closed_form_across_truncations() {
        let q = ControlFunction::SumPower {
            epsilon: 0.37,
            alpha: 1.5,
        };
        let closed = match closed_form_bound(&q, 2, &ratio(5, 4), P).unwrap() {
            ClosedFormBound::Applicable(v) => v,
            _ => unreachable!(),
        };
        for max_terms in [1u32, 2, 3, 7, 20] {
            let series = series_bound(&q, 2, &ratio(5, 4), max_terms, 1e-60, P).unwrap();
            let limit = series.limit_estimate().unwrap();
            let rel = limit.sub(&closed).abs().div(&closed).unwrap().to_f64();
            assert!(rel < 1e-25, "truncation {max_terms}: relative gap {rel}");
        }
    }

    #[test]
    fn divergent_exponent_reports_unbounded() {
        let q = ControlFunction::SumPower {
            epsilon: 1.0,
            alpha: -2.0,
        };
        let series = series_bound(&q, 1, &int(1), 8, 1e-30, P).unwrap();
        assert_eq!(series.tail_bound, TailBound::Unbounded);
        assert!(!series.converged);
        assert!(series.limit_estimate().is_none());
        assert!(series.partial_sum.is_positive());
    }

    #[test]
    fn exponent_exclusion_and_divergent_closed_form() {
        let at_exclusion = ControlFunction::SumPower {
            epsilon: 1.0,
            alpha: -1.0,
        };
        assert!(matches!(
            closed_form_bound(&at_exclusion, 1, &int(1), P),
            Err(ControlError::ParameterExclusion { .. })
        ));
        let below = ControlFunction::SumPower {
            epsilon: 1.0,
            alpha: -3.0,
        };
        assert!(matches!(
            closed_form_bound(&below, 1, &int(1), P).unwrap(),
            ClosedFormBound::NotApplicable(_)
        ));
    }

    #[test]
    fn submultiplicative_series_with_contracting_shape() {
        let q = ControlFunction::Submultiplicative {
            delta: 1.0,
            alpha: AlphaFunction::RationalPower { exponent: 2 },
        };
        // alpha(1/3) = 1/9 so the tail ratio bound is 3^-l / 9 < 1
        let series = series_bound(&q, 1, &int(1), 64, 1e-30, P).unwrap();
        assert!(series.converged);
        let limit = series.limit_estimate().unwrap();
        // exact limit: sum 3^-s * 2 (1/3^(s+1))^2 = (2/9) / (1 - 1/27)
        assert_close(&limit, ratio(2 * 27, 9 * 26), 1e-30);
        assert!(matches!(
            closed_form_bound(&q, 1, &int(1), P).unwrap(),
            ClosedFormBound::NotApplicable(_)
        ));
    }

    #[test]
    fn submultiplicative_expanding_shape_is_unbounded() {
        let q = ControlFunction::Submultiplicative {
            delta: 1.0,
            alpha: AlphaFunction::RationalPower { exponent: -2 },
        };
        let series = series_bound(&q, 1, &int(1), 8, 1e-30, P).unwrap();
        assert_eq!(series.tail_bound, TailBound::Unbounded);
        assert!(!series.converged);
    }

    #[test]
    fn partial_sums_are_monotone() {
        let q = ControlFunction::MixedPower {
            epsilon: 0.2,
            alpha: 0.5,
        };
        let mut last = HighPrecisionReal::zero(P);
        for terms in 1..=12u32 {
            let series = series_bound(&q, 1, &ratio(7, 3), terms, 1e-60, P).unwrap();
            assert!(series.partial_sum >= last);
            last = series.partial_sum;
        }
    }

    #[test]
    fn tail_brackets_the_limit() {
        let q = ControlFunction::ProductPower {
            epsilon: 1.3,
            p_exp: 0.75,
            q_exp: 1.25,
        };
        let long = series_bound(&q, 1, &int(2), 80, 1e-60, P).unwrap();
        let best = long.limit_estimate().unwrap();
        for terms in [1u32, 3, 9] {
            let short = series_bound(&q, 1, &int(2), terms, 1e-60, P).unwrap();
            assert!(short.partial_sum <= best);
            let upper = short.limit_estimate().unwrap();
            let slack = HighPrecisionReal::from_f64(1e-30, P).unwrap();
            assert!(upper.add(&slack) >= best, "tail fails to cover the limit");
        }
    }

    #[test]
    fn negative_magnitude_is_rejected() {
        let q = ControlFunction::Constant { epsilon: -0.5 };
        assert!(matches!(
            q.eval_hp(&int(1), &int(1), P),
            Err(ControlError::NegativeMagnitude { .. })
        ));
    }

    #[test]
    fn custom_alpha_negative_value_is_rejected() {
        let q = ControlFunction::Submultiplicative {
            delta: 1.0,
            alpha: AlphaFunction::Custom(Arc::new(|_| int(-1))),
        };
        assert!(matches!(
            q.eval_hp(&int(1), &int(1), P),
            Err(ControlError::NegativeAlphaValue)
        ));
    }

    #[test]
    fn zero_magnitude_series_converges_to_zero() {
        let q = ControlFunction::Constant { epsilon: 0.0 };
        let series = series_bound(&q, 1, &int(1), 4, 1e-30, P).unwrap();
        assert!(series.converged);
        assert!(series.partial_sum.is_zero());
        assert!(series.limit_estimate().unwrap().is_zero());
    }
}
