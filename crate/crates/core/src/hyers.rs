//! Direct-method stability engine over the reals.
//!
//! Takes a perturbed reciprocal function f, forms the contracted iterates
//! g_m(x) = 3^(-l m) f(x / 3^m), and verifies that the limit deviates from
//! f by no more than the contraction series of a control function. The
//! engine works on a positive sample grid: every asserted inequality is a
//! sampled check, and reports state the sampled domain explicitly.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::control::{ControlError, ControlFunction, SeriesEvaluation, TailBound};
use crate::equation::{
    eval_f, lambda_residual, lambda_residual_numeric, EquationError, EquationVariant, EvalPoint,
    ReciprocalParams, SampleError,
};
use crate::exact::{pow3, ratio_string, Rational};
use crate::real::{HighPrecisionReal, Precision, RealError};

#[derive(Debug, Error, PartialEq)]
pub enum HyersError {
    #[error("invalid perturbation: {reason}")]
    InvalidPerturbation { reason: &'static str },
    #[error("base function is not strictly positive on the positive axis")]
    NonPositiveBase,
    #[error("evaluation point {at} is not strictly positive")]
    NonPositivePoint { at: Rational },
    #[error("tabulated function has no sample at {at}")]
    MissingSample { at: Rational },
    #[error("sample grid is empty")]
    EmptyGrid,
    #[error("no admissible sample pairs on the grid")]
    NoAdmissiblePairs,
    #[error("iteration cap must be at least 2, got {max_m}")]
    InvalidIterationCap { max_m: u32 },
    #[error("tolerance must be a positive finite number")]
    NonPositiveTolerance,
    #[error(
        "control fails to dominate the residual at ({x}, {y}): residual {residual} > bound {bound}"
    )]
    HypothesisViolation {
        x: Rational,
        y: Rational,
        residual: f64,
        bound: f64,
    },
    #[error(transparent)]
    Equation(#[from] EquationError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Real(#[from] RealError),
}

/// How the exact reciprocal solution is perturbed.
#[derive(Debug, Clone)]
pub enum Perturbation {
    /// No perturbation: f is the exact solution.
    Zero,
    /// f(x) = (1 + epsilon x^beta) (r/x)^degree. With beta equal to the
    /// degree this is an additive constant epsilon r^degree.
    PowerEnvelope { epsilon: f64, beta: f64 },
    /// f given pointwise by exact samples; undefined elsewhere.
    Tabulated(BTreeMap<Rational, Rational>),
}

/// A function close to an exact reciprocal solution, sampled on the
/// positive axis.
#[derive(Debug, Clone)]
pub struct PerturbedReciprocal {
    base: ReciprocalParams,
    perturbation: Perturbation,
}

impl PerturbedReciprocal {
    pub fn new(
        base: ReciprocalParams,
        perturbation: Perturbation,
    ) -> Result<Self, HyersError> {
        use num_traits::Signed;
        if base.root_coeff().is_negative() && base.degree() % 2 == 1 {
            return Err(HyersError::NonPositiveBase);
        }
        match &perturbation {
            Perturbation::Zero => {}
            Perturbation::PowerEnvelope { epsilon, beta } => {
                if !epsilon.is_finite() || *epsilon < 0.0 {
                    return Err(HyersError::InvalidPerturbation {
                        reason: "envelope magnitude must be finite and nonnegative",
                    });
                }
                if !beta.is_finite() || *beta <= 0.0 {
                    return Err(HyersError::InvalidPerturbation {
                        reason: "envelope exponent must be finite and positive",
                    });
                }
            }
            Perturbation::Tabulated(samples) => {
                use num_traits::Signed as _;
                if samples.is_empty() {
                    return Err(HyersError::InvalidPerturbation {
                        reason: "tabulated perturbation needs at least one sample",
                    });
                }
                for (x, v) in samples {
                    if !x.is_positive() {
                        return Err(HyersError::InvalidPerturbation {
                            reason: "tabulated sample points must be strictly positive",
                        });
                    }
                    if !v.is_positive() {
                        return Err(HyersError::InvalidPerturbation {
                            reason: "tabulated sample values must be strictly positive",
                        });
                    }
                }
            }
        }
        Ok(PerturbedReciprocal { base, perturbation })
    }

    pub fn base(&self) -> &ReciprocalParams {
        &self.base
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.perturbation
    }

    /// Exact value when the perturbation admits one (no floating rounding).
    pub fn sample_rational(&self, x: &Rational) -> Result<Option<Rational>, HyersError> {
        use num_traits::Signed;
        if !x.is_positive() {
            return Err(HyersError::NonPositivePoint { at: x.clone() });
        }
        match &self.perturbation {
            Perturbation::Zero => Ok(Some(eval_f(&self.base, x)?)),
            Perturbation::PowerEnvelope { .. } => Ok(None),
            Perturbation::Tabulated(samples) => match samples.get(x) {
                Some(v) => Ok(Some(v.clone())),
                None => Err(HyersError::MissingSample { at: x.clone() }),
            },
        }
    }

    /// f at a strictly positive rational point.
    pub fn sample(&self, x: &Rational, prec: Precision) -> Result<HighPrecisionReal, HyersError> {
        if let Some(exact) = self.sample_rational(x)? {
            return Ok(HighPrecisionReal::from_rational(&exact, prec));
        }
        let Perturbation::PowerEnvelope { epsilon, beta } = &self.perturbation else {
            unreachable!("exact channel covers the other variants");
        };
        let base = HighPrecisionReal::from_rational(&eval_f(&self.base, x)?, prec);
        let envelope = HighPrecisionReal::from_f64(*epsilon, prec)?
            .mul(&HighPrecisionReal::from_rational(x, prec).pow_f64(*beta)?);
        let one = HighPrecisionReal::from_u64(1, prec);
        Ok(one.add(&envelope).mul(&base))
    }

    fn equation_sampler(
        &self,
        prec: Precision,
    ) -> impl Fn(&Rational) -> Result<HighPrecisionReal, SampleError> + '_ {
        move |x: &Rational| {
            self.sample(x, prec).map_err(|_| SampleError::Undefined { at: x.clone() })
        }
    }
}

/// g_m(x) = 3^(-l m) f(x / 3^m), exact in the scale factor.
pub fn direct_method_iterate(
    f: &PerturbedReciprocal,
    x: &Rational,
    m: u32,
    prec: Precision,
) -> Result<HighPrecisionReal, HyersError> {
    use num_traits::Signed;
    if !x.is_positive() {
        return Err(HyersError::NonPositivePoint { at: x.clone() });
    }
    let l = f.base.degree();
    let scale = Rational::new(1.into(), pow3(l * m));
    let point = x / Rational::from_integer(pow3(m));
    if let Some(exact) = f.sample_rational(&point)? {
        return Ok(HighPrecisionReal::from_rational(&(exact * scale), prec));
    }
    let value = f.sample(&point, prec)?;
    Ok(value.mul(&HighPrecisionReal::from_rational(&scale, prec)))
}

/// The contracted iterates at one point, with their Cauchy defects.
#[derive(Debug, Clone)]
pub struct ApproximationSequence {
    pub point: Rational,
    /// g_0, g_1, ... indexed by m.
    pub iterates: Vec<HighPrecisionReal>,
    /// defects[m] = |g_{m+1} - g_m|.
    pub defects: Vec<HighPrecisionReal>,
    pub limit: HighPrecisionReal,
    pub converged: bool,
}

/// Iterates until a defect vanishes exactly, two successive defects fall
/// below `tol` relative to the iterate scale, or `max_m` is reached.
pub fn build_sequence(
    f: &PerturbedReciprocal,
    x: &Rational,
    max_m: u32,
    tol: f64,
    prec: Precision,
) -> Result<ApproximationSequence, HyersError> {
    if max_m < 2 {
        return Err(HyersError::InvalidIterationCap { max_m });
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(HyersError::NonPositiveTolerance);
    }

    let mut iterates = vec![direct_method_iterate(f, x, 0, prec)?];
    let mut defects: Vec<HighPrecisionReal> = Vec::new();
    let tol_hp = HighPrecisionReal::from_f64(tol, prec)?;
    let one = HighPrecisionReal::from_u64(1, prec);
    let mut converged = false;

    for m in 1..=max_m {
        let next = direct_method_iterate(f, x, m, prec)?;
        let defect = next.sub(iterates.last().expect("nonempty")).abs();
        iterates.push(next);
        defects.push(defect);

        let scale = iterates.last().expect("nonempty").abs().max(&one);
        let threshold = tol_hp.mul(&scale);
        let last = &defects[defects.len() - 1];
        if last.is_zero() {
            converged = true;
            break;
        }
        if defects.len() >= 2 {
            let prev = &defects[defects.len() - 2];
            if *last <= threshold && *prev <= threshold {
                converged = true;
                break;
            }
        }
    }

    let limit = iterates.last().expect("nonempty").clone();
    Ok(ApproximationSequence {
        point: x.clone(),
        iterates,
        defects,
        limit,
        converged,
    })
}

/// Tuning for the stability verification sweep.
#[derive(Debug, Clone)]
pub struct StabilitySettings {
    pub max_m: u32,
    pub tolerance: f64,
    pub series_terms: u32,
    pub series_tol: f64,
    /// A deviation/bound ratio above 1 + report_tolerance counts as a
    /// bound violation.
    pub report_tolerance: f64,
    /// Contracted diagonal pairs (x/3^(s+1), x/3^(s+1)) sampled per point.
    pub pair_depth: u32,
    pub precision: Precision,
}

impl Default for StabilitySettings {
    fn default() -> Self {
        StabilitySettings {
            max_m: 64,
            tolerance: 1e-18,
            series_terms: 96,
            series_tol: 1e-30,
            report_tolerance: 1e-9,
            pair_depth: 6,
            precision: Precision::DEFAULT,
        }
    }
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(q))
}

/// Per-point outcome of the stability sweep.
#[derive(Debug, Clone, Serialize)]
pub struct PointRecord {
    #[serde(serialize_with = "ser_rational")]
    pub x: Rational,
    pub f_value: f64,
    pub g_value: f64,
    pub deviation: f64,
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
    pub sequence_converged: bool,
    pub series_converged: bool,
    pub violation: bool,
    pub scaling_error: f64,
}

/// Outcome of the stability sweep over a grid.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub degree: u32,
    pub control: ControlFunction,
    pub points: Vec<PointRecord>,
    pub max_ratio: f64,
    pub violations: u32,
    pub scaling_probe_max_error: f64,
    pub max_residual: f64,
    pub sampled_pairs: u32,
    pub admissible_pairs: u32,
    pub inadmissible_pairs: u32,
}

/// Residual magnitude at one admissible pair, on the channel matching the
/// perturbation: exact rationals for the unperturbed solution, working
/// precision otherwise.
fn pair_residual(
    f: &PerturbedReciprocal,
    variant: &EquationVariant,
    point: &EvalPoint,
    prec: Precision,
) -> Result<HighPrecisionReal, HyersError> {
    match f.perturbation {
        Perturbation::Zero => {
            let exact = lambda_residual(variant, &f.base, point)?;
            Ok(HighPrecisionReal::from_rational(&exact, prec).abs())
        }
        _ => {
            let sampler = f.equation_sampler(prec);
            Ok(lambda_residual_numeric(variant, sampler, point, prec)?.abs())
        }
    }
}

/// The pair sample set: grid pairs with 0 < y < 2x, which keep every
/// equation argument on the positive axis, plus the contracted diagonals
/// driving the series bound. Returns (pairs, excluded pair count).
fn sample_pairs(
    grid: &[Rational],
    pair_depth: u32,
) -> (Vec<EvalPoint>, u32) {
    let three = Rational::from_integer(3.into());
    let two = Rational::from_integer(2.into());
    let mut pairs = Vec::new();
    let mut inadmissible = 0u32;
    for x in grid {
        for y in grid {
            if *y >= x * &two {
                inadmissible += 1;
                continue;
            }
            pairs.push(EvalPoint::new(x.clone(), y.clone()));
        }
    }
    for x in grid {
        let mut t = x / &three;
        for _ in 0..pair_depth {
            pairs.push(EvalPoint::new(t.clone(), t.clone()));
            t /= &three;
        }
    }
    (pairs, inadmissible)
}

fn check_grid(grid: &[Rational]) -> Result<(), HyersError> {
    use num_traits::Signed;
    if grid.is_empty() {
        return Err(HyersError::EmptyGrid);
    }
    for x in grid {
        if !x.is_positive() {
            return Err(HyersError::NonPositivePoint { at: x.clone() });
        }
    }
    Ok(())
}

/// Verifies the sampled stability claim: the control dominates the residual
/// on every sampled pair, and at every grid point the deviation between f
/// and the contracted limit stays within the contraction series of the
/// control. Also probes the scaling law g(x/3) = 3^l g(x) on the limits.
pub fn verify_stability(
    f: &PerturbedReciprocal,
    q: &ControlFunction,
    grid: &[Rational],
    settings: &StabilitySettings,
) -> Result<StabilityReport, HyersError> {
    check_grid(grid)?;
    q.validate()?;
    let prec = settings.precision;
    let l = f.base.degree();
    let variant = EquationVariant::Primary { degree: l };

    // sampled hypothesis: the control dominates every sampled residual
    let (pairs, inadmissible) = sample_pairs(grid, settings.pair_depth);
    if pairs.is_empty() {
        return Err(HyersError::NoAdmissiblePairs);
    }
    let slack = HighPrecisionReal::from_f64(1e-12, prec)?;
    let one = HighPrecisionReal::from_u64(1, prec);
    let mut max_residual = HighPrecisionReal::zero(prec);
    let mut worst: Option<(EvalPoint, f64, f64)> = None;
    for point in &pairs {
        let residual = pair_residual(f, &variant, point, prec)?;
        let bound = q.eval_hp(&point.x, &point.y, prec)?;
        max_residual = max_residual.max(&residual);
        let allowed = bound.mul(&one.add(&slack)).add(&slack.mul(&bound.add(&one)));
        if residual > allowed {
            let exceed = residual.to_f64() - bound.to_f64();
            let was_worse = worst
                .as_ref()
                .map(|(_, r, b)| exceed > r - b)
                .unwrap_or(true);
            if was_worse {
                worst = Some((point.clone(), residual.to_f64(), bound.to_f64()));
            }
        }
    }
    if let Some((point, residual, bound)) = worst {
        return Err(HyersError::HypothesisViolation {
            x: point.x,
            y: point.y,
            residual,
            bound,
        });
    }

    let mut points = Vec::with_capacity(grid.len());
    let mut max_ratio = 0f64;
    let mut violations = 0u32;
    let mut scaling_max = 0f64;
    let three = Rational::from_integer(3.into());
    let three_l = HighPrecisionReal::from_rational(&Rational::from_integer(pow3(l)), prec);

    for x in grid {
        let seq = build_sequence(f, x, settings.max_m, settings.tolerance, prec)?;
        let f_value = f.sample(x, prec)?;
        let deviation = f_value.sub(&seq.limit).abs();

        let series = crate::control::series_bound(
            q,
            l,
            x,
            settings.series_terms,
            settings.series_tol,
            prec,
        )?;
        let series_converged = !matches!(series.tail_bound, TailBound::Unbounded);
        let bound = series.limit_estimate();

        let (bound_f64, ratio, violation) = match &bound {
            Some(b) => {
                let ratio = if deviation.is_zero() {
                    0.0
                } else if b.is_zero() {
                    f64::INFINITY
                } else {
                    deviation.div(b)?.to_f64()
                };
                (Some(b.to_f64()), Some(ratio), ratio > 1.0 + settings.report_tolerance)
            }
            None => (None, None, false),
        };
        if let Some(r) = ratio {
            if r > max_ratio {
                max_ratio = r;
            }
        }
        if violation {
            violations += 1;
        }

        // scaling probe: the limit must contract threefold arguments by 3^l
        let contracted = build_sequence(f, &(x / &three), settings.max_m, settings.tolerance, prec)?;
        let expected = three_l.mul(&seq.limit);
        let scaling_error = contracted
            .limit
            .sub(&expected)
            .abs()
            .div(&expected.abs())?
            .to_f64();
        if scaling_error > scaling_max {
            scaling_max = scaling_error;
        }

        points.push(PointRecord {
            x: x.clone(),
            f_value: f_value.to_f64(),
            g_value: seq.limit.to_f64(),
            deviation: deviation.to_f64(),
            bound: bound_f64,
            ratio,
            sequence_converged: seq.converged,
            series_converged,
            violation,
            scaling_error,
        });
    }

    Ok(StabilityReport {
        degree: l,
        control: q.clone(),
        points,
        max_ratio,
        violations,
        scaling_probe_max_error: scaling_max,
        max_residual: max_residual.to_f64(),
        sampled_pairs: pairs.len() as u32,
        admissible_pairs: pairs.len() as u32,
        inadmissible_pairs: inadmissible,
    })
}

/// Shape of control to fit empirically.
#[derive(Debug, Clone, Copy)]
pub enum ControlFamilyShape {
    Constant,
    SumPower { alpha: f64 },
    MixedPower { alpha: f64 },
    ProductPower { p_exp: f64, q_exp: f64 },
}

impl ControlFamilyShape {
    fn with_magnitude(self, epsilon: f64) -> ControlFunction {
        match self {
            ControlFamilyShape::Constant => ControlFunction::Constant { epsilon },
            ControlFamilyShape::SumPower { alpha } => {
                ControlFunction::SumPower { epsilon, alpha }
            }
            ControlFamilyShape::MixedPower { alpha } => {
                ControlFunction::MixedPower { epsilon, alpha }
            }
            ControlFamilyShape::ProductPower { p_exp, q_exp } => ControlFunction::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            },
        }
    }
}

/// Fits the smallest magnitude of the given family that dominates the
/// residual on every sampled pair, then nudges it up by one part in 2^48
/// so that rechecking the same pairs cannot trip on rounding.
pub fn empirical_control(
    f: &PerturbedReciprocal,
    grid: &[Rational],
    family: ControlFamilyShape,
    settings: &StabilitySettings,
) -> Result<ControlFunction, HyersError> {
    check_grid(grid)?;
    let prec = settings.precision;
    let variant = EquationVariant::Primary {
        degree: f.base.degree(),
    };
    let (pairs, _) = sample_pairs(grid, settings.pair_depth);
    if pairs.is_empty() {
        return Err(HyersError::NoAdmissiblePairs);
    }

    let shape_probe = family.with_magnitude(1.0);
    let mut max_ratio = HighPrecisionReal::zero(prec);
    for point in &pairs {
        let residual = pair_residual(f, &variant, point, prec)?;
        if residual.is_zero() {
            continue;
        }
        let shape = shape_probe.eval_hp(&point.x, &point.y, prec)?;
        let ratio = residual.div(&shape)?;
        max_ratio = max_ratio.max(&ratio);
    }

    let epsilon = max_ratio.to_f64() * (1.0 + 2f64.powi(-48));
    Ok(family.with_magnitude(epsilon))
}

/// Convenience access to the series evaluation used by the verifier.
pub fn stability_series(
    q: &ControlFunction,
    l: u32,
    x: &Rational,
    settings: &StabilitySettings,
) -> Result<SeriesEvaluation, HyersError> {
    Ok(crate::control::series_bound(
        q,
        l,
        x,
        settings.series_terms,
        settings.series_tol,
        settings.precision,
    )?)
}
