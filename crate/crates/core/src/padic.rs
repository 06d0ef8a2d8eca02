//! Non-Archimedean (p-adic) stability bounds.
//!
//! Over a p-adic field the contraction factor |1/3^l|_p equals 3^l when
//! p = 3 and 1 otherwise, so the direct-method geometry inverts: the series
//! argument survives only when the control shrinks fast enough to beat the
//! growing scale factor. The decisive condition is the vanishing of
//! |1/3^l|^m G(x/3^(m+1), y/3^(m+1)) as m grows, checked analytically for
//! the power families and by an exact-rational trend probe otherwise.
//!
//! Valuations are kept as exact integers (with infinity for zero) and
//! norm comparisons that decide verdicts are made in exact rational
//! arithmetic; doubles appear only as reported views.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::control::{AlphaFunction, ControlError, ControlFunction};
use crate::equation::{lambda_residual, EquationError, EquationVariant, EvalPoint, ReciprocalParams};
use crate::exact::{rational_pow, Rational};

#[derive(Debug, Error, PartialEq)]
pub enum PadicError {
    #[error("{given} is not a prime")]
    NotPrime { given: u64 },
    #[error("norm value {value} must be positive and finite")]
    InvalidNorm { value: f64 },
    #[error("probe depth {given} is below the minimum {min}")]
    InvalidProbeDepth { given: u32, min: u32 },
    #[error("closed form undefined: exponent {exponent} equals -degree {degree}")]
    ParameterExclusion { exponent: f64, degree: u32 },
    #[error("sample grid is empty")]
    EmptyGrid,
    #[error("sample points must be strictly positive")]
    NonPositiveSamplePoint,
    #[error("degree must be at least 1")]
    InvalidDegree,
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Equation(#[from] EquationError),
}

/// Valuation and norm of a rational in one prime's completion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PadicNorm {
    /// None encodes the infinite valuation of zero.
    pub valuation: Option<i64>,
    pub norm_value: f64,
}

/// A fixed prime completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PadicContext {
    prime: u64,
}

impl PadicContext {
    pub fn new(prime: u64) -> Result<Self, PadicError> {
        if !is_prime(prime) {
            return Err(PadicError::NotPrime { given: prime });
        }
        Ok(PadicContext { prime })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    fn int_valuation(&self, n: &BigInt) -> i64 {
        debug_assert!(!n.is_zero());
        let p = BigInt::from(self.prime);
        let mut v = 0i64;
        let mut rest = n.abs();
        loop {
            let (q, r) = rest.div_rem(&p);
            if !r.is_zero() {
                return v;
            }
            v += 1;
            rest = q;
        }
    }

    /// p-adic valuation; None for zero (infinite valuation).
    pub fn valuation(&self, q: &Rational) -> Option<i64> {
        if q.is_zero() {
            return None;
        }
        Some(self.int_valuation(q.numer()) - self.int_valuation(q.denom()))
    }

    pub fn norm(&self, q: &Rational) -> PadicNorm {
        match self.valuation(q) {
            None => PadicNorm {
                valuation: None,
                norm_value: 0.0,
            },
            Some(v) => PadicNorm {
                valuation: Some(v),
                norm_value: (self.prime as f64).powi(
                    i32::try_from(-v).expect("valuation fits a machine exponent"),
                ),
            },
        }
    }

    /// Exact rational value of the norm (a power of the prime, or zero).
    pub fn norm_rational(&self, q: &Rational) -> Rational {
        match self.valuation(q) {
            None => Rational::zero(),
            Some(v) => rational_pow(&Rational::from_integer(BigInt::from(self.prime)), -v)
                .expect("prime is nonzero"),
        }
    }

    /// Valuation of 3 in this completion: 1 at p = 3, 0 elsewhere.
    fn v3(&self) -> i64 {
        if self.prime == 3 {
            1
        } else {
            0
        }
    }

    /// |1/3^l|_p as an exact rational: p^(l v_p(3)).
    fn inv_scale_norm(&self, l: u32) -> Rational {
        rational_pow(
            &Rational::from_integer(BigInt::from(self.prime)),
            self.v3() * l as i64,
        )
        .expect("prime is nonzero")
    }

    /// |3|_p^(-1) as an exact rational: the factor a norm gains per
    /// division of the argument by 3.
    fn arg_growth(&self) -> Rational {
        rational_pow(
            &Rational::from_integer(BigInt::from(self.prime)),
            self.v3(),
        )
        .expect("prime is nonzero")
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 || n % 3 == 0 {
        return false;
    }
    let mut d = 5u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 || n % (d + 2) == 0 {
            return false;
        }
        d += 6;
    }
    true
}

/// Verdict on the vanishing condition for the scaled control terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Status {
    Holds,
    Fails,
    Unknown,
}

const MIN_PROBE: u32 = 4;

fn check_norm_input(x: f64) -> Result<(), PadicError> {
    if !x.is_finite() || x <= 0.0 {
        return Err(PadicError::InvalidNorm { value: x });
    }
    Ok(())
}

/// Checks whether |1/3^l|^m G(x/3^(m+1), y/3^(m+1)) tends to zero.
///
/// Power families are decided analytically from the per-step factor
/// p^(v_p(3) (l + e)); other shapes are probed over `probe_m` steps in
/// exact rational arithmetic: uniformly shrinking terms give HOLDS,
/// nondecreasing terms give FAILS, anything else UNKNOWN.
pub fn c0_condition_check(
    ctx: &PadicContext,
    g: &ControlFunction,
    l: u32,
    x_norm: f64,
    y_norm: f64,
    probe_m: u32,
) -> Result<C0Status, PadicError> {
    g.validate()?;
    if l == 0 {
        return Err(PadicError::InvalidDegree);
    }
    check_norm_input(x_norm)?;
    check_norm_input(y_norm)?;
    if probe_m < MIN_PROBE {
        return Err(PadicError::InvalidProbeDepth {
            given: probe_m,
            min: MIN_PROBE,
        });
    }
    if g.magnitude() == 0.0 {
        return Ok(C0Status::Holds);
    }
    if let Some((_, e)) = g.diagonal_power_shape() {
        // per-step growth factor p^(v3 (l + e)) on every term of G
        let growth = ctx.v3() as f64 * (l as f64 + e);
        return Ok(if growth < 0.0 {
            C0Status::Holds
        } else {
            C0Status::Fails
        });
    }

    // exact trend probe for shapes without a uniform power exponent
    let terms = probe_terms_exact(ctx, g, l, x_norm, y_norm, probe_m, 0)?;
    let mut all_shrink = true;
    let mut none_shrink = true;
    for pair in terms.windows(2) {
        if pair[1] < pair[0] {
            none_shrink = false;
        } else {
            all_shrink = false;
        }
    }
    if terms.iter().all(Zero::is_zero) || all_shrink {
        Ok(C0Status::Holds)
    } else if none_shrink {
        Ok(C0Status::Fails)
    } else {
        Ok(C0Status::Unknown)
    }
}

/// |1/3^l|^(m + offset) G(x/3^(m+1), y/3^(m+1)) for m = 0..count, exactly.
/// The vanishing condition uses offset 0, the direct bound offset 1. Only
/// valid for controls whose values at rational norms are rational, which
/// holds for the submultiplicative family.
fn probe_terms_exact(
    ctx: &PadicContext,
    g: &ControlFunction,
    l: u32,
    x_norm: f64,
    y_norm: f64,
    count: u32,
    offset: u32,
) -> Result<Vec<Rational>, PadicError> {
    let ControlFunction::Submultiplicative { delta, alpha } = g else {
        unreachable!("probe is only reached for the submultiplicative family");
    };
    let delta_q = Rational::from_float(*delta).expect("validated finite");
    let x0 = Rational::from_float(x_norm).expect("validated finite");
    let y0 = Rational::from_float(y_norm).expect("validated finite");
    let growth = ctx.arg_growth();
    let inv_scale = ctx.inv_scale_norm(l);

    let mut terms = Vec::with_capacity(count as usize);
    let mut scale = rational_pow(&inv_scale, offset as i64).expect("norm is nonzero");
    let mut xn = &x0 * &growth;
    let mut yn = &y0 * &growth;
    for _ in 0..count {
        let value = &delta_q * (alpha.eval(&xn)? + alpha.eval(&yn)?);
        terms.push(&scale * &value);
        scale *= &inv_scale;
        xn *= &growth;
        yn *= &growth;
    }
    Ok(terms)
}

/// Supremum bound from the direct method: max over k of
/// |1/3^l|^(k+1) G(x/3^(k+1), x/3^(k+1)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DirectBound {
    Diverging,
    Bounded { value: f64, k_argmax: u32 },
}

/// Evaluates the direct-method supremum over k = 0..=k_max. Reports
/// DIVERGING when the terms grow without bound over the probed range.
pub fn theorem41_bound(
    ctx: &PadicContext,
    g: &ControlFunction,
    l: u32,
    x_norm: f64,
    k_max: u32,
) -> Result<DirectBound, PadicError> {
    g.validate()?;
    if l == 0 {
        return Err(PadicError::InvalidDegree);
    }
    check_norm_input(x_norm)?;
    if k_max < 1 {
        return Err(PadicError::InvalidProbeDepth {
            given: k_max,
            min: 1,
        });
    }
    if g.magnitude() == 0.0 {
        return Ok(DirectBound::Bounded {
            value: 0.0,
            k_argmax: 0,
        });
    }

    if let Some((_, e)) = g.diagonal_power_shape() {
        let growth = ctx.v3() as f64 * (l as f64 + e);
        if growth > 0.0 {
            return Ok(DirectBound::Diverging);
        }
        let scale_step = (ctx.prime as f64).powi((ctx.v3() * l as i64) as i32);
        let arg_step = (ctx.prime as f64).powi(ctx.v3() as i32);
        let mut best = f64::NEG_INFINITY;
        let mut best_k = 0u32;
        let mut scale = scale_step;
        let mut arg = x_norm * arg_step;
        for k in 0..=k_max {
            let term = scale * g.eval_f64(arg, arg)?;
            if term > best {
                best = term;
                best_k = k;
            }
            scale *= scale_step;
            arg *= arg_step;
        }
        return Ok(DirectBound::Bounded {
            value: best,
            k_argmax: best_k,
        });
    }

    // exact terms for the submultiplicative family
    let terms = probe_terms_exact(ctx, g, l, x_norm, x_norm, k_max + 1, 1)?;
    let nondecreasing = terms.windows(2).all(|w| w[1] >= w[0]);
    if nondecreasing && terms.last() > terms.first() {
        return Ok(DirectBound::Diverging);
    }
    let mut best = &terms[0];
    let mut best_k = 0u32;
    for (k, term) in terms.iter().enumerate().skip(1) {
        if term > best {
            best = term;
            best_k = k as u32;
        }
    }
    Ok(DirectBound::Bounded {
        value: crate::real::rational_to_f64(best),
        k_argmax: best_k,
    })
}

/// Closed-form stability bound stated for each control family in the
/// non-Archimedean setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CorollaryBound {
    Applicable { value: f64 },
    NotApplicable,
}

/// The published two-case closed forms, split on the exponent against
/// -degree; the split swaps which end of the series dominates.
pub fn corollary_closed_form(
    ctx: &PadicContext,
    g: &ControlFunction,
    l: u32,
    x_norm: f64,
) -> Result<CorollaryBound, PadicError> {
    g.validate()?;
    if l == 0 {
        return Err(PadicError::InvalidDegree);
    }
    check_norm_input(x_norm)?;

    let norm2: f64 = if ctx.prime == 2 { 0.5 } else { 1.0 };
    let norm3: f64 = if ctx.prime == 3 { 1.0 / 3.0 } else { 1.0 };

    let two_case = |front: f64, mag: f64, a: f64| -> Result<CorollaryBound, PadicError> {
        if a == -(l as f64) {
            return Err(PadicError::ParameterExclusion {
                exponent: a,
                degree: l,
            });
        }
        let shape = x_norm.powf(a);
        let value = if a > -(l as f64) {
            front * mag * norm3.powf(-a) * shape
        } else {
            front * mag * norm3.powi(l as i32) * shape
        };
        Ok(CorollaryBound::Applicable { value })
    };

    match g {
        ControlFunction::Constant { epsilon } => Ok(CorollaryBound::Applicable { value: *epsilon }),
        ControlFunction::SumPower { epsilon, alpha } => two_case(norm2, *epsilon, *alpha),
        ControlFunction::MixedPower { epsilon, alpha } => two_case(norm3, *epsilon, *alpha),
        ControlFunction::ProductPower {
            epsilon,
            p_exp,
            q_exp,
        } => two_case(1.0, *epsilon, p_exp + q_exp),
        ControlFunction::Submultiplicative { delta, alpha } => {
            let x0 = Rational::from_float(x_norm).expect("validated finite");
            let contracted = x0 * ctx.arg_growth();
            let value = 2.0 * delta * crate::real::rational_to_f64(&alpha.eval(&contracted)?);
            Ok(CorollaryBound::Applicable { value })
        }
    }
}

/// How the direct bound and the corollary closed form relate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Agreement {
    Match,
    Mismatch { ratio: f64 },
    NotCompared,
}

/// Joint verdict for one (prime, degree, control) configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonArchVerdict {
    pub c0_status: C0Status,
    pub direct: DirectBound,
    pub corollary: CorollaryBound,
    pub agreement: Agreement,
}

const AGREEMENT_REL_TOL: f64 = 1e-12;

/// Runs the condition check, the direct bound, and the closed form, and
/// compares the two bounds where comparison is meaningful. Bounds are only
/// compared when the vanishing condition holds and both sides are finite;
/// a mismatch is reported with its ratio, not an error.
pub fn compare_bounds(
    ctx: &PadicContext,
    g: &ControlFunction,
    l: u32,
    x_norm: f64,
    k_max: u32,
    probe_m: u32,
) -> Result<NonArchVerdict, PadicError> {
    let c0_status = c0_condition_check(ctx, g, l, x_norm, x_norm, probe_m)?;
    let direct = theorem41_bound(ctx, g, l, x_norm, k_max)?;
    let corollary = corollary_closed_form(ctx, g, l, x_norm)?;

    let agreement = match (c0_status, direct, corollary) {
        (
            C0Status::Holds,
            DirectBound::Bounded { value: d, .. },
            CorollaryBound::Applicable { value: c },
        ) => {
            let scale = d.abs().max(c.abs()).max(f64::MIN_POSITIVE);
            if (d - c).abs() <= AGREEMENT_REL_TOL * scale {
                Agreement::Match
            } else {
                Agreement::Mismatch { ratio: d / c }
            }
        }
        _ => Agreement::NotCompared,
    };

    Ok(NonArchVerdict {
        c0_status,
        direct,
        corollary,
        agreement,
    })
}

/// Exact verification of the submultiplicative hypotheses for a shape
/// function: alpha(s t) <= alpha(s) alpha(t) on the sample grid, with
/// s = |3|_p^(-1), and the contraction |1/3^l|_p alpha(s) < 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubmultiplicativeCheck {
    pub property_holds: bool,
    pub contraction_holds: bool,
}

pub fn submultiplicative_check(
    ctx: &PadicContext,
    alpha: &AlphaFunction,
    l: u32,
    sample_grid: &[Rational],
) -> Result<SubmultiplicativeCheck, PadicError> {
    if l == 0 {
        return Err(PadicError::InvalidDegree);
    }
    if sample_grid.is_empty() {
        return Err(PadicError::EmptyGrid);
    }
    let s = ctx.arg_growth();
    let alpha_s = alpha.eval(&s)?;

    let mut property_holds = true;
    for t in sample_grid {
        if !t.is_positive() {
            return Err(PadicError::NonPositiveSamplePoint);
        }
        let lhs = alpha.eval(&(&s * t))?;
        let rhs = &alpha_s * &alpha.eval(t)?;
        if lhs > rhs {
            property_holds = false;
        }
    }

    let contraction = ctx.inv_scale_norm(l) * &alpha_s;
    let contraction_holds = contraction < Rational::one();

    Ok(SubmultiplicativeCheck {
        property_holds,
        contraction_holds,
    })
}

/// p-adic norm of the exact equation residual at an admissible point.
/// Zero for the exact solutions, by the identity the exact channel checks.
pub fn nonarch_lambda_norm(
    ctx: &PadicContext,
    variant: &EquationVariant,
    params: &ReciprocalParams,
    point: &EvalPoint,
) -> Result<PadicNorm, PadicError> {
    let residual = lambda_residual(variant, params, point)?;
    Ok(ctx.norm(&residual))
}
