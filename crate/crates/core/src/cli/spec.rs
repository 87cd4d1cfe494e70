//! Experiment description: flat `key = value` config files plus flag overrides.

use std::path::PathBuf;
use std::str::FromStr;

use super::CliError;
use crate::integrand::BuiltIn;
use crate::solver::{InitPolicy, SolverConfig};

/// Named problems with their integrand and end conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    /// `U²/2`, `u(0) = 0`, `u(1) = 1`.
    Problem1,
    /// `U²/2 + 8u²`, `u(0) = 0`, `u(1) = 1`.
    QuadMass,
    /// `(U² - 1)²/4 + u²/2`, zero end values.
    Bolza,
    /// `(U² - 1)²/4`, zero end values.
    BolzaBare,
}

impl Problem {
    pub fn integrand(self) -> BuiltIn {
        match self {
            Problem::Problem1 => BuiltIn::HalfSquare,
            Problem::QuadMass => BuiltIn::QuadraticMass,
            Problem::Bolza => BuiltIn::TwoWellFull,
            Problem::BolzaBare => BuiltIn::TwoWellBare,
        }
    }

    pub fn bc(self) -> (f64, f64) {
        match self {
            Problem::Problem1 | Problem::QuadMass => (0.0, 1.0),
            Problem::Bolza | Problem::BolzaBare => (0.0, 0.0),
        }
    }
}

impl FromStr for Problem {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "problem1" => Ok(Problem::Problem1),
            "quad-mass" => Ok(Problem::QuadMass),
            "bolza" => Ok(Problem::Bolza),
            "bolza-bare" => Ok(Problem::BolzaBare),
            other => Err(CliError::Spec(format!("unknown problem `{other}`"))),
        }
    }
}

/// Source of the curve fed to `energy` and `residual`.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSource {
    /// Built-in profile sampled on the grid: `linear`, `zero`, `square`,
    /// `hat`, `local-exp` or `ode-approx`.
    Named(String),
    File(PathBuf),
}

pub const PROFILE_NAMES: [&str; 6] = ["linear", "zero", "square", "hat", "local-exp", "ode-approx"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitName {
    Linear,
    Random,
    Hat,
}

impl FromStr for InitName {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            // zero start = linear interpolant of zero end values
            "linear" | "zero" => Ok(InitName::Linear),
            "random" => Ok(InitName::Random),
            "hat" => Ok(InitName::Hat),
            other => Err(CliError::Spec(format!("unknown init policy `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentSpec {
    pub problem: Option<Problem>,
    pub integrand: Option<BuiltIn>,
    pub n: Option<usize>,
    pub bc: Option<(f64, f64)>,
    pub profile: Option<ProfileSource>,
    pub init: Option<InitName>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub memory: Option<usize>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

pub const DEFAULT_CELLS: usize = 128;

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Spec(format!("bad value for `{key}`: `{value}`")))
}

pub fn parse_bc(value: &str) -> Result<(f64, f64), CliError> {
    let mut parts = value.split(',');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(a), Some(b), None) => {
            let a: f64 = parse_num("bc", a)?;
            let b: f64 = parse_num("bc", b)?;
            if !a.is_finite() || !b.is_finite() {
                return Err(CliError::Spec("end values must be finite".into()));
            }
            Ok((a, b))
        }
        _ => Err(CliError::Spec(format!("bc must be `a,b`, got `{value}`"))),
    }
}

pub fn parse_profile(value: &str) -> Result<ProfileSource, CliError> {
    if PROFILE_NAMES.contains(&value) {
        Ok(ProfileSource::Named(value.to_string()))
    } else {
        Err(CliError::Spec(format!(
            "unknown profile `{value}` (expected one of {})",
            PROFILE_NAMES.join(", ")
        )))
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Spec(format!("bad boolean for `{key}`: `{value}`"))),
    }
}

impl ExperimentSpec {
    /// Parses `key = value` lines; `#` starts a comment, unknown keys are errors.
    pub fn from_config_str(text: &str) -> Result<Self, CliError> {
        let mut spec = ExperimentSpec::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Spec(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "problem" => spec.problem = Some(value.parse()?),
                "integrand" => {
                    spec.integrand = Some(value.parse().map_err(|e: crate::Error| CliError::Spec(e.to_string()))?)
                }
                "n" => spec.n = Some(parse_num(key, value)?),
                "bc" => spec.bc = Some(parse_bc(value)?),
                "profile" => spec.profile = Some(parse_profile(value)?),
                "input" => spec.profile = Some(ProfileSource::File(PathBuf::from(value))),
                "init" => spec.init = Some(value.parse()?),
                "seed" => spec.seed = Some(parse_num(key, value)?),
                "max_iters" => spec.max_iters = Some(parse_num(key, value)?),
                "grad_tol" => spec.grad_tol = Some(parse_num(key, value)?),
                "memory" => spec.memory = Some(parse_num(key, value)?),
                "out" => spec.out = Some(PathBuf::from(value)),
                "svg" => spec.svg = parse_bool(key, value)?,
                other => {
                    return Err(CliError::Spec(format!(
                        "line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(spec)
    }

    /// Fields set in `other` replace those of `self`.
    pub fn overridden_by(self, other: ExperimentSpec) -> Self {
        ExperimentSpec {
            problem: other.problem.or(self.problem),
            integrand: other.integrand.or(self.integrand),
            n: other.n.or(self.n),
            bc: other.bc.or(self.bc),
            profile: other.profile.or(self.profile),
            init: other.init.or(self.init),
            seed: other.seed.or(self.seed),
            max_iters: other.max_iters.or(self.max_iters),
            grad_tol: other.grad_tol.or(self.grad_tol),
            memory: other.memory.or(self.memory),
            out: other.out.or(self.out),
            svg: other.svg || self.svg,
        }
    }

    pub fn integrand(&self) -> BuiltIn {
        self.integrand
            .or(self.problem.map(Problem::integrand))
            .unwrap_or(BuiltIn::HalfSquare)
    }

    pub fn bc(&self) -> (f64, f64) {
        self.bc
            .or(self.problem.map(Problem::bc))
            .unwrap_or(match self.integrand() {
                BuiltIn::TwoWellFull | BuiltIn::TwoWellBare => (0.0, 0.0),
                _ => (0.0, 1.0),
            })
    }

    pub fn cells(&self) -> usize {
        self.n.unwrap_or(DEFAULT_CELLS)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn solver_config(&self, n: usize) -> Result<SolverConfig, CliError> {
        let defaults = SolverConfig::for_cells(n);
        let cfg = SolverConfig {
            max_iters: self.max_iters.unwrap_or(defaults.max_iters),
            grad_tol: self.grad_tol.unwrap_or(defaults.grad_tol),
            memory: self.memory.unwrap_or(defaults.memory),
            seed: self.seed.unwrap_or(defaults.seed),
            ..defaults
        };
        cfg.validate().map_err(|e| CliError::Spec(e.to_string()))?;
        Ok(cfg)
    }

    pub fn init_policy(&self) -> InitPolicy {
        match self.init.unwrap_or(InitName::Linear) {
            InitName::Linear => InitPolicy::Linear,
            InitName::Random => InitPolicy::Random { amplitude: 0.25 },
            InitName::Hat => InitPolicy::Hat,
        }
    }
}
