//! Configuration parsing: a flat `key=value` file with optional
//! `[section]` blocks (one experiment per section), overridden by command
//! line flags, resolved into fully-validated experiment plans.
//!
//! Every resolved plan carries an echo of all effective keys; re-parsing
//! that echo reproduces the plan exactly.

use bbo_infer::harness::{default_checkpoints, ExperimentPlan, RunSettings, Theta0Init};
use bbo_infer::model::{AlgorithmId, StepSchedule, WeightMode};
use bbo_infer::optimizers::{AlgorithmSpec, FourPointDenominator};
use bbo_infer::problems::{MeanFunction, Problem};
use bbo_infer::rng::{NoiseCase, SinusoidSigma};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key \"{0}\"")]
    UnknownKey(String),
    #[error("key \"{key}\": {message}")]
    BadValue { key: String, message: String },
    #[error("line {line}: expected key=value, got \"{text}\"")]
    Malformed { line: usize, text: String },
    #[error("duplicate section \"{0}\"")]
    DuplicateSection(String),
    #[error("invalid plan: {0}")]
    Plan(String),
}

/// Flag-level overrides; `None` leaves the file/default value in place.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub tau: Option<usize>,
    pub algorithms: Option<String>,
    pub problems: Option<String>,
    pub alpha: Option<String>,
    pub emit_plots: bool,
}

/// One experiment resolved from the configuration.
#[derive(Debug, Clone)]
pub struct NamedPlan {
    pub name: String,
    pub plan: ExperimentPlan,
    pub emit_plots: bool,
    /// Echo of every effective key; serialize with [`render_resolved`].
    pub resolved: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "problems",
    "algorithms",
    "replications",
    "n",
    "tau",
    "gamma",
    "alpha",
    "seed",
    "a_scale",
    "a_exponent",
    "c_scale",
    "c_exponent",
    "h",
    "mts_gamma_exponent",
    "mts_zeta_exponent",
    "weight_mode",
    "theta0",
    "mu0",
    "v0",
    "four_point_denominator",
    "checkpoints",
    "emit_plots",
    "perm10_bernoulli_mu_star",
    "perm10_affine_mu_star",
];

fn defaults() -> BTreeMap<String, String> {
    let mut map = BTreeMap::new();
    let defaults: &[(&str, &str)] = &[
        ("problems", "quad1d-sharp:normal"),
        (
            "algorithms",
            "spsa-si,ordinary,forward,four-point,mts,mts-four-point",
        ),
        ("replications", "300"),
        ("n", "20000"),
        ("tau", "50"),
        ("gamma", "0.05"),
        ("alpha", "0.05"),
        ("seed", "42"),
        ("a_scale", "30"),
        ("a_exponent", "1"),
        ("c_scale", "1"),
        ("c_exponent", "0.2"),
        ("h", "3"),
        ("mts_gamma_exponent", "0.666"),
        ("mts_zeta_exponent", "0.55"),
        ("weight_mode", "unit"),
        ("theta0", "0.5"),
        ("mu0", "0"),
        ("v0", "0"),
        ("four_point_denominator", "richardson-corrected"),
        ("checkpoints", "30"),
        ("emit_plots", "false"),
        // reference optimal values for the uncertified 10-d function
        ("perm10_bernoulli_mu_star", "0.2689414213699951"),
        ("perm10_affine_mu_star", "0"),
    ];
    for (k, v) in defaults {
        map.insert((*k).to_string(), (*v).to_string());
    }
    map
}

/// Parses the configuration text plus flag overrides into one plan per
/// section (a single anonymous plan named "main" when no sections appear).
pub fn parse_config(contents: &str, overrides: &Overrides) -> Result<Vec<NamedPlan>, ConfigError> {
    let mut globals = defaults();
    let mut sections: Vec<(String, BTreeMap<String, String>)> = Vec::new();
    let mut current: Option<usize> = None;

    for (idx, raw) in contents.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.iter().any(|(n, _)| *n == name) {
                return Err(ConfigError::DuplicateSection(name));
            }
            sections.push((name, BTreeMap::new()));
            current = Some(sections.len() - 1);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: idx + 1,
                text: line.to_string(),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        match current {
            Some(i) => {
                sections[i].1.insert(key, value);
            }
            None => {
                globals.insert(key, value);
            }
        }
    }

    if sections.is_empty() {
        sections.push(("main".to_string(), BTreeMap::new()));
    }

    let mut plans = Vec::with_capacity(sections.len());
    for (name, overrides_map) in sections {
        let mut effective = globals.clone();
        effective.extend(overrides_map);
        apply_flag_overrides(&mut effective, overrides);
        plans.push(build_plan(name, effective)?);
    }
    Ok(plans)
}

fn apply_flag_overrides(map: &mut BTreeMap<String, String>, flags: &Overrides) {
    let mut set = |key: &str, value: String| {
        map.insert(key.to_string(), value);
    };
    if let Some(v) = flags.seed {
        set("seed", v.to_string());
    }
    if let Some(v) = flags.replications {
        set("replications", v.to_string());
    }
    if let Some(v) = flags.n {
        set("n", v.to_string());
    }
    if let Some(v) = flags.gamma {
        set("gamma", v.to_string());
    }
    if let Some(v) = flags.tau {
        set("tau", v.to_string());
    }
    if let Some(v) = &flags.algorithms {
        set("algorithms", v.clone());
    }
    if let Some(v) = &flags.problems {
        set("problems", v.clone());
    }
    if let Some(v) = &flags.alpha {
        set("alpha", v.clone());
    }
    if flags.emit_plots {
        set("emit_plots", "true".to_string());
    }
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        message: message.into(),
    }
}

fn get_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64, ConfigError> {
    map[key]
        .parse::<f64>()
        .map_err(|_| bad(key, format!("\"{}\" is not a number", map[key])))
}

fn get_usize(map: &BTreeMap<String, String>, key: &str) -> Result<usize, ConfigError> {
    map[key]
        .parse::<usize>()
        .map_err(|_| bad(key, format!("\"{}\" is not a non-negative integer", map[key])))
}

fn get_u64(map: &BTreeMap<String, String>, key: &str) -> Result<u64, ConfigError> {
    map[key]
        .parse::<u64>()
        .map_err(|_| bad(key, format!("\"{}\" is not an unsigned integer", map[key])))
}

fn get_bool(map: &BTreeMap<String, String>, key: &str) -> Result<bool, ConfigError> {
    match map[key].as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => Err(bad(key, format!("\"{other}\" is not a boolean"))),
    }
}

fn parse_case(case: &str) -> Result<NoiseCase, ConfigError> {
    match case {
        "bernoulli" => Ok(NoiseCase::Bernoulli),
        "normal" => Ok(NoiseCase::Normal(SinusoidSigma::default())),
        "gamma" => NoiseCase::gamma(4.0).map_err(|e| bad("problems", e.to_string())),
        "pareto" => NoiseCase::pareto(3.0).map_err(|e| bad("problems", e.to_string())),
        "lognormal" => NoiseCase::lognormal(1.0).map_err(|e| bad("problems", e.to_string())),
        other => Err(bad(
            "problems",
            format!("unknown noise case \"{other}\"; expected bernoulli|normal|gamma|pareto|lognormal"),
        )),
    }
}

fn parse_problem(id: &str, map: &BTreeMap<String, String>) -> Result<Problem, ConfigError> {
    let Some((mean_id, case_id)) = id.split_once(':') else {
        return Err(bad(
            "problems",
            format!("\"{id}\" must have the form <function>:<case>"),
        ));
    };
    let case = parse_case(case_id)?;
    let build = |mean: MeanFunction| {
        Problem::new(mean, case, mean.default_region())
            .map_err(|e| bad("problems", format!("{id}: {e}")))
    };
    match mean_id {
        "quad1d-wu" => build(MeanFunction::Quad1dWu),
        "quad1d-sharp" => build(MeanFunction::Quad1dSharp),
        "quad2d" => build(MeanFunction::quad2d_default()),
        "perm10" => {
            let (mean, mu_star_key) = if case_id == "bernoulli" {
                (MeanFunction::perm10_bernoulli(), "perm10_bernoulli_mu_star")
            } else {
                (MeanFunction::perm10_affine(), "perm10_affine_mu_star")
            };
            let mu_star = get_f64(map, mu_star_key)?;
            Problem::with_reference_optimum(mean, case, mean.default_region(), mu_star)
                .map_err(|e| bad("problems", format!("{id}: {e}")))
        }
        other => Err(bad(
            "problems",
            format!("unknown mean function \"{other}\"; expected quad1d-wu|quad1d-sharp|quad2d|perm10"),
        )),
    }
}

fn build_plan(name: String, map: BTreeMap<String, String>) -> Result<NamedPlan, ConfigError> {
    let gamma = get_f64(&map, "gamma")?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(bad("gamma", format!("{gamma} must lie in (0, 1)")));
    }
    let n = get_usize(&map, "n")?;
    // CI output is always emitted, so enforce the constant-step sample-size
    // floor n > -(1 / 2 gamma) ln gamma.
    let min_n = (-(0.5 / gamma) * gamma.ln()).floor() as usize + 1;
    if n < min_n {
        return Err(bad(
            "n",
            format!("{n} is below the minimum sample size {min_n} for gamma = {gamma}"),
        ));
    }
    let tau = get_usize(&map, "tau")?;
    if tau == 0 {
        return Err(bad("tau", "batch size must be at least 1"));
    }
    let replications = get_usize(&map, "replications")?;
    if replications == 0 {
        return Err(bad("replications", "must be at least 1"));
    }

    let alpha_levels: Vec<f64> = map["alpha"]
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| bad("alpha", format!("\"{s}\" is not a number")))
        })
        .collect::<Result<_, _>>()?;
    for &a in &alpha_levels {
        if !(a > 0.0 && a < 1.0) {
            return Err(bad("alpha", format!("{a} must lie in (0, 1)")));
        }
    }

    let a_scale = get_f64(&map, "a_scale")?;
    let a_exponent = get_f64(&map, "a_exponent")?;
    let a_schedule = StepSchedule::power_decay(a_scale, a_exponent)
        .map_err(|e| bad("a_scale", e.to_string()))?;
    let c_scale = get_f64(&map, "c_scale")?;
    let c_exponent = get_f64(&map, "c_exponent")?;
    let c_schedule = StepSchedule::power_decay(c_scale, c_exponent)
        .map_err(|e| bad("c_scale", e.to_string()))?;

    let weight_mode = match map["weight_mode"].as_str() {
        "unit" => WeightMode::Unit,
        "k-over-k-plus-1" => WeightMode::KOverKPlusOne,
        other => {
            return Err(bad(
                "weight_mode",
                format!("\"{other}\" is not unit|k-over-k-plus-1"),
            ))
        }
    };
    let denominator = FourPointDenominator::parse(&map["four_point_denominator"]).ok_or_else(
        || {
            bad(
                "four_point_denominator",
                format!(
                    "\"{}\" is not richardson-corrected|as-printed",
                    map["four_point_denominator"]
                ),
            )
        },
    )?;
    let h = get_f64(&map, "h")?;
    let mts_gamma_exponent = get_f64(&map, "mts_gamma_exponent")?;
    let mts_zeta_exponent = get_f64(&map, "mts_zeta_exponent")?;

    let algorithms: Vec<AlgorithmSpec> = map["algorithms"]
        .split(',')
        .map(|s| {
            let id = AlgorithmId::parse(s.trim()).ok_or_else(|| {
                bad("algorithms", format!("unknown algorithm \"{}\"", s.trim()))
            })?;
            Ok(AlgorithmSpec {
                id,
                h,
                mts_gamma_exponent,
                mts_zeta_exponent,
                denominator,
            })
        })
        .collect::<Result<_, ConfigError>>()?;

    let problems: Vec<Problem> = map["problems"]
        .split(',')
        .map(|s| parse_problem(s.trim(), &map))
        .collect::<Result<_, _>>()?;

    let theta0_raw = &map["theta0"];
    let theta0 = if theta0_raw.contains(',') {
        let entries: Vec<f64> = theta0_raw
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| bad("theta0", format!("\"{s}\" is not a number")))
            })
            .collect::<Result<_, _>>()?;
        Theta0Init::Vector(entries)
    } else {
        Theta0Init::Scalar(
            theta0_raw
                .parse::<f64>()
                .map_err(|_| bad("theta0", format!("\"{theta0_raw}\" is not a number")))?,
        )
    };

    let checkpoint_count = get_usize(&map, "checkpoints")?;
    if checkpoint_count == 0 {
        return Err(bad("checkpoints", "must request at least 1 checkpoint"));
    }

    let settings = RunSettings {
        n_iterations: n,
        batch_size: tau,
        a_schedule,
        c_schedule,
        gamma,
        theta0,
        mu0: get_f64(&map, "mu0")?,
        v0: get_f64(&map, "v0")?,
        weight_mode,
        seed: get_u64(&map, "seed")?,
    };
    let plan = ExperimentPlan {
        problems,
        algorithms,
        replications,
        settings,
        checkpoints: default_checkpoints(n, checkpoint_count),
        alpha_levels,
    };
    plan.validate().map_err(|e| ConfigError::Plan(e.to_string()))?;

    let emit_plots = get_bool(&map, "emit_plots")?;
    Ok(NamedPlan {
        name,
        plan,
        emit_plots,
        resolved: map,
    })
}

/// Serializes the effective configuration; re-parsing it yields an
/// identical plan.
pub fn render_resolved(plan: &NamedPlan) -> String {
    let mut out = String::new();
    for (key, value) in &plan.resolved {
        out.push_str(key);
        out.push('=');
        out.push_str(value);
        out.push('\n');
    }
    out
}
