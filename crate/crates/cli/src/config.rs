//! JSON experiment configs. Unknown fields are rejected so a typo fails
//! the run instead of silently falling back to a default.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use recipstab_core::control::{AlphaFunction, ControlFunction};
use recipstab_core::exact::Rational;
use recipstab_core::hyers::{ControlFamilyShape, Perturbation};
use recipstab_core::real::{rational_to_f64, Precision};

use crate::ConfigError;

pub fn load_config<T: DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("config {}: {e}", path.display())))
}

/// Rationals in configs are "num/den" strings (or a bare integer).
pub fn parse_rational(text: &str) -> Result<Rational, ConfigError> {
    text.trim()
        .parse::<Rational>()
        .map_err(|e| ConfigError(format!("invalid rational literal {text:?}: {e}")))
}

pub fn resolve_precision(bits: Option<u32>) -> Result<Option<Precision>, ConfigError> {
    bits.map(|b| Precision::new(b).map_err(|e| ConfigError(e.to_string())))
        .transpose()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSolutionConfig {
    /// Admissible instances checked per equation variant.
    pub instances: u32,
    pub primary_max_degree: u32,
    pub generalized_max_degree: u32,
    /// Overrides the --seed flag when present.
    #[serde(default)]
    pub rng_seed: Option<u64>,
}

impl CheckSolutionConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.instances < 1 {
            return Err(ConfigError("instances must be at least 1".into()));
        }
        if self.primary_max_degree < 1 || self.generalized_max_degree < 1 {
            return Err(ConfigError("degree caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityConfig {
    pub degree: u32,
    pub root_coeff: String,
    pub perturbation: PerturbationSpec,
    pub control: ControlMode,
    pub grid: GridSpec,
    #[serde(default)]
    pub max_m: Option<u32>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub series_terms: Option<u32>,
    #[serde(default)]
    pub series_tol: Option<f64>,
    #[serde(default)]
    pub report_tolerance: Option<f64>,
    #[serde(default)]
    pub pair_depth: Option<u32>,
    /// Overrides the --precision-bits flag when present.
    #[serde(default)]
    pub precision_bits: Option<u32>,
}

#[derive(Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum PerturbationSpec {
    #[serde(rename = "ZERO")]
    Zero,
    #[serde(rename = "POWER_ENVELOPE")]
    PowerEnvelope { epsilon: f64, beta: f64 },
}

impl PerturbationSpec {
    pub fn to_perturbation(&self) -> Perturbation {
        match self {
            PerturbationSpec::Zero => Perturbation::Zero,
            PerturbationSpec::PowerEnvelope { epsilon, beta } => Perturbation::PowerEnvelope {
                epsilon: *epsilon,
                beta: *beta,
            },
        }
    }
}

/// Either fit the control magnitude to the observed residuals, or take a
/// fully declared control at face value (and let the hypothesis check
/// reject it if it is too small).
#[derive(Deserialize)]
#[serde(tag = "mode", deny_unknown_fields)]
pub enum ControlMode {
    #[serde(rename = "EMPIRICAL")]
    Empirical { shape: ShapeSpec },
    #[serde(rename = "DECLARED")]
    Declared { function: ControlSpec },
}

#[derive(Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum ShapeSpec {
    #[serde(rename = "CONSTANT")]
    Constant,
    #[serde(rename = "SUM_POWER")]
    SumPower { alpha: f64 },
    #[serde(rename = "MIXED_POWER")]
    MixedPower { alpha: f64 },
    #[serde(rename = "PRODUCT_POWER")]
    ProductPower { p_exp: f64, q_exp: f64 },
}

impl ShapeSpec {
    pub fn to_shape(&self) -> ControlFamilyShape {
        match *self {
            ShapeSpec::Constant => ControlFamilyShape::Constant,
            ShapeSpec::SumPower { alpha } => ControlFamilyShape::SumPower { alpha },
            ShapeSpec::MixedPower { alpha } => ControlFamilyShape::MixedPower { alpha },
            ShapeSpec::ProductPower { p_exp, q_exp } => {
                ControlFamilyShape::ProductPower { p_exp, q_exp }
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "family", deny_unknown_fields)]
pub enum ControlSpec {
    #[serde(rename = "CONSTANT")]
    Constant { epsilon: f64 },
    #[serde(rename = "SUM_POWER")]
    SumPower { epsilon: f64, alpha: f64 },
    #[serde(rename = "MIXED_POWER")]
    MixedPower { epsilon: f64, alpha: f64 },
    #[serde(rename = "PRODUCT_POWER")]
    ProductPower { epsilon: f64, p_exp: f64, q_exp: f64 },
    /// The shape function is a rational power t^alpha_exponent so the
    /// submultiplicativity and contraction checks stay exact.
    #[serde(rename = "SUBMULTIPLICATIVE")]
    Submultiplicative { delta: f64, alpha_exponent: i32 },
}

impl ControlSpec {
    pub fn to_control(&self) -> Result<ControlFunction, ConfigError> {
        let control = match *self {
            ControlSpec::Constant { epsilon } => ControlFunction::Constant { epsilon },
            ControlSpec::SumPower { epsilon, alpha } => {
                ControlFunction::SumPower { epsilon, alpha }
            }
            ControlSpec::MixedPower { epsilon, alpha } => {
                ControlFunction::MixedPower { epsilon, alpha }
            }
            ControlSpec::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            } => ControlFunction::ProductPower {
                epsilon,
                p_exp,
                q_exp,
            },
            ControlSpec::Submultiplicative {
                delta,
                alpha_exponent,
            } => ControlFunction::Submultiplicative {
                delta,
                alpha: AlphaFunction::RationalPower {
                    exponent: alpha_exponent,
                },
            },
        };
        control
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        Ok(control)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: String,
    pub max: String,
    pub count: u32,
    pub spacing: Spacing,
}

#[derive(Deserialize, Clone, Copy)]
pub enum Spacing {
    #[serde(rename = "LINEAR")]
    Linear,
    #[serde(rename = "GEOMETRIC")]
    Geometric,
}

/// Expands a grid spec into exact rational points. Linear grids are exact
/// end to end; geometric interior points come from double-precision
/// interpolation converted losslessly, so they are deterministic too.
pub fn build_grid(spec: &GridSpec) -> Result<Vec<Rational>, ConfigError> {
    use num_traits::Zero;

    let min = parse_rational(&spec.min)?;
    let max = parse_rational(&spec.max)?;
    if min <= Rational::zero() {
        return Err(ConfigError("grid min must be positive".into()));
    }
    if max < min {
        return Err(ConfigError("grid max must be at least min".into()));
    }
    if spec.count < 1 {
        return Err(ConfigError("grid count must be at least 1".into()));
    }
    if spec.count == 1 {
        return Ok(vec![min]);
    }

    let n = spec.count as usize;
    let mut points = Vec::with_capacity(n);
    match spec.spacing {
        Spacing::Linear => {
            let step = (&max - &min) / Rational::from_integer(((n - 1) as i64).into());
            for i in 0..n {
                points.push(&min + &step * Rational::from_integer((i as i64).into()));
            }
        }
        Spacing::Geometric => {
            let lo = rational_to_f64(&min);
            let hi = rational_to_f64(&max);
            for i in 0..n {
                if i == 0 {
                    points.push(min.clone());
                } else if i == n - 1 {
                    points.push(max.clone());
                } else {
                    let t = i as f64 / (n - 1) as f64;
                    let v = lo * (hi / lo).powf(t);
                    let q = Rational::from_float(v).ok_or_else(|| {
                        ConfigError(format!("geometric grid point {v} is not finite"))
                    })?;
                    points.push(q);
                }
            }
        }
    }
    Ok(points)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PadicConfig {
    pub primes: Vec<u64>,
    pub degrees: Vec<u32>,
    pub controls: Vec<ControlSpec>,
    /// p-adic norm of the base point; must be positive (in a completion
    /// the norm of a nonzero rational is a power of the prime).
    pub x_norm: f64,
    #[serde(default)]
    pub k_max: Option<u32>,
    #[serde(default)]
    pub probe_m: Option<u32>,
    /// Grid for the exact submultiplicativity check, as rational strings.
    #[serde(default)]
    pub submultiplicative_grid: Option<Vec<String>>,
}

impl PadicConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.primes.is_empty() {
            return Err(ConfigError("primes list must be nonempty".into()));
        }
        if self.degrees.is_empty() {
            return Err(ConfigError("degrees list must be nonempty".into()));
        }
        if self.degrees.iter().any(|&l| l < 1) {
            return Err(ConfigError("degrees must be at least 1".into()));
        }
        if self.controls.is_empty() {
            return Err(ConfigError("controls list must be nonempty".into()));
        }
        if !self.x_norm.is_finite() || self.x_norm <= 0.0 {
            return Err(ConfigError("x_norm must be positive and finite".into()));
        }
        Ok(())
    }
}
