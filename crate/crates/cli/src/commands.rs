//! The five commands. Each returns a RunSummary whose `failed` count
//! drives the process exit status.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use recipstab_core::control::ControlFunction;
use recipstab_core::equation::{
    check_admissibility, compare_with_published, lambda_residual, scaling_check,
    specialize_coefficients, EquationVariant, EvalPoint, ReciprocalParams,
    SpecializationVerdict,
};
use recipstab_core::exact::{even_binomial_sum, pow3, ratio, ratio_string, Rational};
use recipstab_core::hyers::{
    empirical_control, verify_stability, HyersError, PerturbedReciprocal, StabilityReport,
    StabilitySettings,
};
use recipstab_core::padic::{
    c0_condition_check, compare_bounds, submultiplicative_check, theorem41_bound, Agreement,
    C0Status, CorollaryBound, DirectBound, PadicContext, PadicError, SubmultiplicativeCheck,
};
use recipstab_core::real::Precision;
use recipstab_core::AlphaFunction;

use crate::config::{
    self, load_config, parse_rational, CheckSolutionConfig, ControlMode, PadicConfig,
    StabilityConfig,
};
use crate::report::{fmt_bool, fmt_opt_real, fmt_real, RunSummary};
use crate::{ConfigError, VariantArg};

fn internal(err: impl std::fmt::Display) -> ConfigError {
    ConfigError(err.to_string())
}

pub fn verify_identity(l_max: u32, json_mode: bool) -> Result<RunSummary, ConfigError> {
    let mut summary = RunSummary::new("verify-identity");
    let mut first_failure: Option<u32> = None;
    for l in 0..=l_max {
        summary.checks_run += 1;
        let doubled = even_binomial_sum(l) * BigInt::from(2);
        let target = pow3(l) + BigInt::from(1);
        if doubled == target {
            summary.passed += 1;
        } else {
            summary.failed += 1;
            first_failure.get_or_insert(l);
        }
    }
    if !json_mode {
        match first_failure {
            None => println!("doubled even-index binomial sums match 3^l + 1 for l = 0..={l_max}"),
            Some(l) => println!("identity fails first at l = {l}"),
        }
    }
    summary.detail = json!({ "l_max": l_max, "first_failure": first_failure });
    Ok(summary)
}

fn nonzero_rational(rng: &mut ChaCha8Rng) -> Rational {
    let mut num = 0i64;
    while num == 0 {
        num = rng.gen_range(-60..=60);
    }
    ratio(num, rng.gen_range(1..=24))
}

pub fn check_solution(
    path: &Path,
    flag_seed: u64,
    json_mode: bool,
) -> Result<RunSummary, ConfigError> {
    let cfg: CheckSolutionConfig = load_config(path)?;
    cfg.validate()?;
    let seed = cfg.rng_seed.unwrap_or(flag_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut summary = RunSummary::new("check-solution");
    let mut first_failure: Option<String> = None;

    for generalized in [false, true] {
        let max_degree = if generalized {
            cfg.generalized_max_degree
        } else {
            cfg.primary_max_degree
        };
        let mut admissible_done = 0u32;
        while admissible_done < cfg.instances {
            let degree = rng.gen_range(1..=max_degree);
            let variant = if generalized {
                EquationVariant::generalized(degree)
            } else {
                EquationVariant::primary(degree)
            }
            .expect("degree is at least 1");
            let params =
                ReciprocalParams::new(nonzero_rational(&mut rng), degree).expect("nonzero");
            let point = EvalPoint::new(nonzero_rational(&mut rng), nonzero_rational(&mut rng));

            if check_admissibility(&variant, &point).is_err() {
                summary.flagged += 1;
                continue;
            }
            admissible_done += 1;
            summary.checks_run += 1;

            let residual = lambda_residual(&variant, &params, &point).map_err(internal)?;
            let (lhs, rhs) = scaling_check(&params, &point.x).map_err(internal)?;
            if residual.is_zero() && lhs == rhs {
                summary.passed += 1;
            } else {
                summary.failed += 1;
                first_failure.get_or_insert_with(|| {
                    format!(
                        "variant={} degree={} r={} x={} y={} residual={}",
                        variant.name(),
                        degree,
                        ratio_string(params.root_coeff()),
                        ratio_string(&point.x),
                        ratio_string(&point.y),
                        ratio_string(&residual),
                    )
                });
            }
        }
    }

    if !json_mode {
        println!(
            "{} admissible instances per variant, {} inadmissible draws flagged",
            cfg.instances, summary.flagged
        );
        if let Some(f) = &first_failure {
            println!("first failure: {f}");
        }
    }
    summary.detail = json!({
        "instances_per_variant": cfg.instances,
        "seed": seed,
        "first_failure": first_failure,
    });
    Ok(summary)
}

pub fn specialize(
    variant_arg: VariantArg,
    degree: u32,
    json_mode: bool,
) -> Result<RunSummary, ConfigError> {
    let variant = match variant_arg {
        VariantArg::Primary => EquationVariant::primary(degree),
        VariantArg::Generalized => EquationVariant::generalized(degree),
    }
    .map_err(internal)?;

    let coefficients = specialize_coefficients(&variant);
    let verdict = compare_with_published(&variant);

    let (verdict_name, reference, note) = match &verdict {
        SpecializationVerdict::Match { reference } => ("MATCH", Some(*reference), None),
        SpecializationVerdict::MatchWithNote { reference, note } => {
            ("MATCH-WITH-NOTE", Some(*reference), Some(*note))
        }
        SpecializationVerdict::Mismatch { reference } => ("MISMATCH", Some(*reference), None),
        SpecializationVerdict::NoPublishedReference => ("NO-PUBLISHED-REFERENCE", None, None),
    };

    if !json_mode {
        println!("variant: {} degree: {}", variant.name(), degree);
        let rendered: Vec<String> = coefficients
            .iter()
            .map(|(index, coeff)| format!("{index}:{coeff}"))
            .collect();
        println!("coefficients: {}", rendered.join(" "));
        match reference {
            Some(r) => println!("verdict: {verdict_name} ({r})"),
            None => println!("verdict: {verdict_name}"),
        }
        if let Some(n) = note {
            println!("note: {n}");
        }
    }

    let coeff_map: serde_json::Map<String, serde_json::Value> = coefficients
        .iter()
        .map(|(index, coeff)| (index.to_string(), json!(coeff.to_string())))
        .collect();

    let mut summary = RunSummary::new("specialize");
    summary.checks_run = 1;
    match verdict {
        SpecializationVerdict::Mismatch { .. } => summary.failed = 1,
        SpecializationVerdict::MatchWithNote { .. } => {
            summary.passed = 1;
            summary.flagged = 1;
        }
        _ => summary.passed = 1,
    }
    summary.detail = json!({
        "variant": variant.name(),
        "degree": degree,
        "coefficients": coeff_map,
        "verdict": verdict_name,
        "reference": reference,
        "note": note,
    });
    Ok(summary)
}

pub fn stability_run(
    path: &Path,
    out: &Path,
    flag_precision: Option<Precision>,
    json_mode: bool,
) -> Result<RunSummary, ConfigError> {
    let cfg: StabilityConfig = load_config(path)?;
    let grid = config::build_grid(&cfg.grid)?;

    let mut settings = StabilitySettings::default();
    if let Some(v) = cfg.max_m {
        settings.max_m = v;
    }
    if let Some(v) = cfg.tolerance {
        settings.tolerance = v;
    }
    if let Some(v) = cfg.series_terms {
        settings.series_terms = v;
    }
    if let Some(v) = cfg.series_tol {
        settings.series_tol = v;
    }
    if let Some(v) = cfg.report_tolerance {
        settings.report_tolerance = v;
    }
    if let Some(v) = cfg.pair_depth {
        settings.pair_depth = v;
    }
    match (config::resolve_precision(cfg.precision_bits)?, flag_precision) {
        (Some(p), _) => settings.precision = p,
        (None, Some(p)) => settings.precision = p,
        (None, None) => {}
    }

    let params = ReciprocalParams::new(parse_rational(&cfg.root_coeff)?, cfg.degree)
        .map_err(internal)?;
    let f =
        PerturbedReciprocal::new(params, cfg.perturbation.to_perturbation()).map_err(internal)?;

    let control = match &cfg.control {
        ControlMode::Empirical { shape } => {
            empirical_control(&f, &grid, shape.to_shape(), &settings).map_err(internal)?
        }
        ControlMode::Declared { function } => function.to_control()?,
    };

    fs::create_dir_all(out)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", out.display())))?;
    let json_path = out.join("stability_report.json");

    let mut summary = RunSummary::new("stability-run");
    match verify_stability(&f, &control, &grid, &settings) {
        Ok(report) => {
            let csv_path = out.join("stability_report.csv");
            write_stability_csv(&csv_path, &report)?;
            let rendered = serde_json::to_string_pretty(&report).map_err(internal)?;
            fs::write(&json_path, rendered + "\n").map_err(internal)?;

            summary.checks_run = report.points.len() as u64;
            summary.failed = u64::from(report.violations);
            summary.passed = summary.checks_run - summary.failed;
            summary.flagged = u64::from(report.inadmissible_pairs);
            summary.artifacts = vec![
                csv_path.display().to_string(),
                json_path.display().to_string(),
            ];

            if !json_mode {
                println!("control: {}", control.describe());
                println!(
                    "points: {} violations: {} max deviation/bound ratio: {}",
                    report.points.len(),
                    report.violations,
                    fmt_real(report.max_ratio)
                );
                println!(
                    "max residual: {} scaling probe max error: {}",
                    fmt_real(report.max_residual),
                    fmt_real(report.scaling_probe_max_error)
                );
            }
            summary.detail = json!({
                "degree": report.degree,
                "control": serde_json::to_value(&report.control).map_err(internal)?,
                "violations": report.violations,
                "max_ratio": report.max_ratio,
                "max_residual": report.max_residual,
                "scaling_probe_max_error": report.scaling_probe_max_error,
                "sampled_pairs": report.sampled_pairs,
                "admissible_pairs": report.admissible_pairs,
                "inadmissible_pairs": report.inadmissible_pairs,
            });
        }
        Err(HyersError::HypothesisViolation {
            x,
            y,
            residual,
            bound,
        }) => {
            let payload = json!({
                "hypothesis_violation": {
                    "x": ratio_string(&x),
                    "y": ratio_string(&y),
                    "residual": residual,
                    "bound": bound,
                }
            });
            let rendered = serde_json::to_string_pretty(&payload).map_err(internal)?;
            fs::write(&json_path, rendered + "\n").map_err(internal)?;
            if !json_mode {
                println!(
                    "hypothesis violation at (x={}, y={}): residual {} exceeds declared control {}",
                    ratio_string(&x),
                    ratio_string(&y),
                    fmt_real(residual),
                    fmt_real(bound)
                );
            }
            summary.checks_run = 1;
            summary.failed = 1;
            summary.artifacts = vec![json_path.display().to_string()];
            summary.detail = payload;
        }
        Err(other) => return Err(internal(other)),
    }
    Ok(summary)
}

fn write_stability_csv(path: &Path, report: &StabilityReport) -> Result<(), ConfigError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record([
            "x",
            "f_value",
            "g_value",
            "deviation",
            "bound",
            "ratio",
            "sequence_converged",
            "series_converged",
            "violation",
            "scaling_error",
        ])
        .map_err(internal)?;
    for point in &report.points {
        writer
            .write_record([
                ratio_string(&point.x),
                fmt_real(point.f_value),
                fmt_real(point.g_value),
                fmt_real(point.deviation),
                fmt_opt_real(point.bound),
                fmt_opt_real(point.ratio),
                fmt_bool(point.sequence_converged),
                fmt_bool(point.series_converged),
                fmt_bool(point.violation),
                fmt_real(point.scaling_error),
            ])
            .map_err(internal)?;
    }
    writer.flush().map_err(internal)?;
    Ok(())
}

#[derive(Serialize)]
struct PadicRow {
    prime: u64,
    degree: u32,
    family: &'static str,
    control: String,
    c0_status: C0Status,
    direct: DirectBound,
    /// None when the closed form excludes the exponent.
    corollary: Option<CorollaryBound>,
    agreement: Agreement,
    submultiplicative: Option<SubmultiplicativeCheck>,
    /// Cross-check of the analytic vanishing decision against the exact
    /// trend probe; None where the probe is the primary route already.
    c0_probe_agrees: Option<bool>,
}

const DEFAULT_K_MAX: u32 = 8;
const DEFAULT_PROBE_M: u32 = 8;
const DEFAULT_SUBMULT_GRID: [&str; 5] = ["1/9", "1/3", "1", "3", "9"];

pub fn padic_run(path: &Path, out: &Path, json_mode: bool) -> Result<RunSummary, ConfigError> {
    let cfg: PadicConfig = load_config(path)?;
    cfg.validate()?;
    let k_max = cfg.k_max.unwrap_or(DEFAULT_K_MAX);
    let probe_m = cfg.probe_m.unwrap_or(DEFAULT_PROBE_M);

    let submult_grid: Vec<Rational> = match &cfg.submultiplicative_grid {
        Some(entries) => entries
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<_, _>>()?,
        None => DEFAULT_SUBMULT_GRID
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<_, _>>()?,
    };

    let contexts: Vec<PadicContext> = cfg
        .primes
        .iter()
        .map(|&p| PadicContext::new(p).map_err(internal))
        .collect::<Result<_, _>>()?;

    let mut summary = RunSummary::new("padic-run");
    let mut rows = Vec::new();
    for ctx in &contexts {
        for &degree in &cfg.degrees {
            for spec in &cfg.controls {
                let control = spec.to_control()?;
                let row = padic_row(ctx, &control, degree, cfg.x_norm, k_max, probe_m,
                    &submult_grid)?;
                summary.checks_run += 1;
                match row.c0_probe_agrees {
                    Some(false) => summary.failed += 1,
                    _ => summary.passed += 1,
                }
                if matches!(row.agreement, Agreement::Mismatch { .. }) || row.corollary.is_none()
                {
                    summary.flagged += 1;
                }
                if !json_mode {
                    print_padic_row(&row);
                }
                rows.push(row);
            }
        }
    }

    fs::create_dir_all(out)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", out.display())))?;
    let csv_path = out.join("padic_report.csv");
    write_padic_csv(&csv_path, &rows)?;
    let json_path = out.join("padic_report.json");
    let payload = json!({
        "x_norm": cfg.x_norm,
        "k_max": k_max,
        "probe_m": probe_m,
        "rows": rows,
    });
    let rendered = serde_json::to_string_pretty(&payload).map_err(internal)?;
    fs::write(&json_path, rendered + "\n").map_err(internal)?;

    summary.artifacts = vec![
        csv_path.display().to_string(),
        json_path.display().to_string(),
    ];
    summary.detail = json!({
        "rows": summary.checks_run,
        "mismatches_flagged": summary.flagged,
        "consistency_failures": summary.failed,
    });
    Ok(summary)
}

fn padic_row(
    ctx: &PadicContext,
    control: &ControlFunction,
    degree: u32,
    x_norm: f64,
    k_max: u32,
    probe_m: u32,
    submult_grid: &[Rational],
) -> Result<PadicRow, ConfigError> {
    let (c0_status, direct, corollary, agreement) =
        match compare_bounds(ctx, control, degree, x_norm, k_max, probe_m) {
            Ok(v) => (v.c0_status, v.direct, Some(v.corollary), v.agreement),
            Err(PadicError::ParameterExclusion { .. }) => {
                let c0 = c0_condition_check(ctx, control, degree, x_norm, x_norm, probe_m)
                    .map_err(internal)?;
                let direct =
                    theorem41_bound(ctx, control, degree, x_norm, k_max).map_err(internal)?;
                (c0, direct, None, Agreement::NotCompared)
            }
            Err(other) => return Err(internal(other)),
        };

    let submultiplicative = match control {
        ControlFunction::Submultiplicative { alpha, .. } => Some(
            submultiplicative_check(ctx, alpha, degree, submult_grid).map_err(internal)?,
        ),
        _ => None,
    };

    let c0_probe_agrees = match integer_exponent(control) {
        Some(exponent) if control.magnitude() > 0.0 => {
            let equivalent = ControlFunction::Submultiplicative {
                delta: 1.0,
                alpha: AlphaFunction::RationalPower { exponent },
            };
            let probed = c0_condition_check(ctx, &equivalent, degree, x_norm, x_norm, probe_m)
                .map_err(internal)?;
            Some(probed == c0_status)
        }
        _ => None,
    };

    Ok(PadicRow {
        prime: ctx.prime(),
        degree,
        family: control.family_name(),
        control: control.describe(),
        c0_status,
        direct,
        corollary,
        agreement,
        submultiplicative,
        c0_probe_agrees,
    })
}

/// The control's uniform power exponent when it is a machine integer, the
/// precondition for the exact cross-probe.
fn integer_exponent(control: &ControlFunction) -> Option<i32> {
    let (_, e) = control.diagonal_power_shape()?;
    if e.fract() == 0.0 && e.abs() <= 1_000_000.0 {
        Some(e as i32)
    } else {
        None
    }
}

fn c0_str(status: C0Status) -> &'static str {
    match status {
        C0Status::Holds => "HOLDS",
        C0Status::Fails => "FAILS",
        C0Status::Unknown => "UNKNOWN",
    }
}

fn print_padic_row(row: &PadicRow) {
    let direct = match row.direct {
        DirectBound::Diverging => "DIVERGING".to_string(),
        DirectBound::Bounded { value, k_argmax } => {
            format!("{} at k={}", fmt_real(value), k_argmax)
        }
    };
    let corollary = match row.corollary {
        None => "EXCLUDED".to_string(),
        Some(CorollaryBound::NotApplicable) => "NOT-APPLICABLE".to_string(),
        Some(CorollaryBound::Applicable { value }) => fmt_real(value),
    };
    let agreement = match row.agreement {
        Agreement::Match => "MATCH".to_string(),
        Agreement::Mismatch { ratio } => format!("MISMATCH(ratio {})", fmt_real(ratio)),
        Agreement::NotCompared => "NOT-COMPARED".to_string(),
    };
    println!(
        "p={} l={} {}: c0={} direct={} corollary={} agreement={}",
        row.prime,
        row.degree,
        row.control,
        c0_str(row.c0_status),
        direct,
        corollary,
        agreement
    );
}

fn write_padic_csv(path: &Path, rows: &[PadicRow]) -> Result<(), ConfigError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))?;
    writer
        .write_record([
            "prime",
            "degree",
            "family",
            "control",
            "c0_status",
            "direct",
            "direct_value",
            "direct_k_argmax",
            "corollary",
            "corollary_value",
            "agreement",
            "agreement_ratio",
            "submultiplicative_property",
            "submultiplicative_contraction",
            "c0_probe_agrees",
        ])
        .map_err(internal)?;
    for row in rows {
        let (direct_kind, direct_value, direct_k) = match row.direct {
            DirectBound::Diverging => ("DIVERGING", String::new(), String::new()),
            DirectBound::Bounded { value, k_argmax } => {
                ("BOUNDED", fmt_real(value), k_argmax.to_string())
            }
        };
        let (corollary_kind, corollary_value) = match row.corollary {
            None => ("EXCLUDED", String::new()),
            Some(CorollaryBound::NotApplicable) => ("NOT-APPLICABLE", String::new()),
            Some(CorollaryBound::Applicable { value }) => ("APPLICABLE", fmt_real(value)),
        };
        let (agreement_kind, agreement_ratio) = match row.agreement {
            Agreement::Match => ("MATCH", String::new()),
            Agreement::Mismatch { ratio } => ("MISMATCH", fmt_real(ratio)),
            Agreement::NotCompared => ("NOT-COMPARED", String::new()),
        };
        let (sub_property, sub_contraction) = match row.submultiplicative {
            Some(check) => (
                fmt_bool(check.property_holds),
                fmt_bool(check.contraction_holds),
            ),
            None => (String::new(), String::new()),
        };
        writer
            .write_record([
                row.prime.to_string(),
                row.degree.to_string(),
                row.family.to_string(),
                row.control.clone(),
                c0_str(row.c0_status).to_string(),
                direct_kind.to_string(),
                direct_value,
                direct_k,
                corollary_kind.to_string(),
                corollary_value,
                agreement_kind.to_string(),
                agreement_ratio,
                sub_property,
                sub_contraction,
                row.c0_probe_agrees.map(fmt_bool).unwrap_or_default(),
            ])
            .map_err(internal)?;
    }
    writer.flush().map_err(internal)?;
    Ok(())
}
