//! Energy densities `W(x, u, U)` together with their partial derivatives.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// A density `W(x, u, U)` with analytic partials in `u` and `U`.
///
/// `U` stands for the value of the difference quotient `Du(x, X)`.
pub trait Integrand: Send + Sync {
    fn name(&self) -> String;

    /// Growth exponent `p > 1`.
    fn growth(&self) -> f64;

    fn w(&self, x: f64, u: f64, du: f64) -> f64;

    /// `∂W/∂u`.
    fn w_u(&self, x: f64, u: f64, du: f64) -> f64;

    /// `∂W/∂U`.
    fn w_du(&self, x: f64, u: f64, du: f64) -> f64;

    fn grad(&self, x: f64, u: f64, du: f64) -> (f64, f64) {
        (self.w_u(x, u, du), self.w_du(x, u, du))
    }

    /// Constants `(c0, c1)` with `W >= c0 |U|^p - c1`, if known.
    fn coercivity(&self) -> Option<(f64, f64)> {
        None
    }
}

/// The densities used by the worked problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BuiltIn {
    /// `|U|^p`.
    PowerP(f64),
    /// `U²/2`.
    HalfSquare,
    /// `U²/2 + 8u²`.
    QuadraticMass,
    /// `(U² - 1)²/4 + u²/2`.
    TwoWellFull,
    /// `(U² - 1)²/4`.
    TwoWellBare,
}

impl BuiltIn {
    pub fn all_named() -> [BuiltIn; 5] {
        [
            BuiltIn::PowerP(3.0),
            BuiltIn::HalfSquare,
            BuiltIn::QuadraticMass,
            BuiltIn::TwoWellFull,
            BuiltIn::TwoWellBare,
        ]
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self, BuiltIn::TwoWellFull | BuiltIn::TwoWellBare)
    }
}

impl Integrand for BuiltIn {
    fn name(&self) -> String {
        self.to_string()
    }

    fn growth(&self) -> f64 {
        match *self {
            BuiltIn::PowerP(p) => p,
            BuiltIn::HalfSquare | BuiltIn::QuadraticMass => 2.0,
            BuiltIn::TwoWellFull | BuiltIn::TwoWellBare => 4.0,
        }
    }

    fn w(&self, _x: f64, u: f64, du: f64) -> f64 {
        match *self {
            BuiltIn::PowerP(p) => du.abs().powf(p),
            BuiltIn::HalfSquare => 0.5 * du * du,
            BuiltIn::QuadraticMass => 0.5 * du * du + 8.0 * u * u,
            BuiltIn::TwoWellFull => {
                let well = du * du - 1.0;
                0.25 * well * well + 0.5 * u * u
            }
            BuiltIn::TwoWellBare => {
                let well = du * du - 1.0;
                0.25 * well * well
            }
        }
    }

    fn w_u(&self, _x: f64, u: f64, _du: f64) -> f64 {
        match *self {
            BuiltIn::PowerP(_) | BuiltIn::HalfSquare | BuiltIn::TwoWellBare => 0.0,
            BuiltIn::QuadraticMass => 16.0 * u,
            BuiltIn::TwoWellFull => u,
        }
    }

    fn w_du(&self, _x: f64, _u: f64, du: f64) -> f64 {
        match *self {
            BuiltIn::PowerP(_) if du == 0.0 => 0.0,
            BuiltIn::PowerP(p) => p * du.abs().powf(p - 1.0) * du.signum(),
            BuiltIn::HalfSquare | BuiltIn::QuadraticMass => du,
            BuiltIn::TwoWellFull | BuiltIn::TwoWellBare => du * (du * du - 1.0),
        }
    }

    fn coercivity(&self) -> Option<(f64, f64)> {
        Some(match *self {
            BuiltIn::PowerP(_) => (1.0, 1.0),
            BuiltIn::HalfSquare | BuiltIn::QuadraticMass => (0.5, 0.5),
            // (U²-1)²/4 - U⁴/8 + 1/4 = (U² - 2)²/8 >= 0
            BuiltIn::TwoWellFull | BuiltIn::TwoWellBare => (0.125, 0.25),
        })
    }
}

impl fmt::Display for BuiltIn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltIn::PowerP(p) => write!(f, "power:{p}"),
            BuiltIn::HalfSquare => f.write_str("half-square"),
            BuiltIn::QuadraticMass => f.write_str("quad-mass"),
            BuiltIn::TwoWellFull => f.write_str("two-well"),
            BuiltIn::TwoWellBare => f.write_str("two-well-bare"),
        }
    }
}

impl FromStr for BuiltIn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "half-square" => Ok(BuiltIn::HalfSquare),
            "quad-mass" => Ok(BuiltIn::QuadraticMass),
            "two-well" => Ok(BuiltIn::TwoWellFull),
            "two-well-bare" => Ok(BuiltIn::TwoWellBare),
            other => {
                let p = other
                    .strip_prefix("power:")
                    .ok_or_else(|| Error::Parameter(format!("unknown integrand `{other}`")))?;
                let p: f64 = p
                    .parse()
                    .map_err(|_| Error::Parameter(format!("bad exponent in `{other}`")))?;
                if !(p > 1.0) || !p.is_finite() {
                    return Err(Error::Parameter(format!("exponent must exceed 1, got {p}")));
                }
                Ok(BuiltIn::PowerP(p))
            }
        }
    }
}

/// Result of comparing analytic partials against central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeCheck {
    pub max_rel_err_u: f64,
    pub max_rel_err_du: f64,
    pub tolerance: f64,
}

impl DerivativeCheck {
    pub fn passed(&self) -> bool {
        self.max_rel_err_u <= self.tolerance && self.max_rel_err_du <= self.tolerance
    }
}

pub const DERIVATIVE_STEP: f64 = 1e-6;
pub const DERIVATIVE_TOLERANCE: f64 = 1e-5;

/// Compares `w_u`, `w_du` against central differences of `w` at each probe `(x, u, U)`.
///
/// The relative error is measured against `max(|analytic|, 1)` so that
/// vanishing partials do not blow up the ratio.
pub fn check_derivatives<I: Integrand + ?Sized>(
    integrand: &I,
    probes: &[(f64, f64, f64)],
) -> crate::Result<DerivativeCheck> {
    if probes.is_empty() {
        return Err(Error::Parameter("probe list is empty".into()));
    }
    let h = DERIVATIVE_STEP;
    let mut report = DerivativeCheck {
        max_rel_err_u: 0.0,
        max_rel_err_du: 0.0,
        tolerance: DERIVATIVE_TOLERANCE,
    };
    for &(x, u, du) in probes {
        let fd_u = (integrand.w(x, u + h, du) - integrand.w(x, u - h, du)) / (2.0 * h);
        let fd_du = (integrand.w(x, u, du + h) - integrand.w(x, u, du - h)) / (2.0 * h);
        let (a_u, a_du) = integrand.grad(x, u, du);
        let err_u = (fd_u - a_u).abs() / a_u.abs().max(1.0);
        let err_du = (fd_du - a_du).abs() / a_du.abs().max(1.0);
        report.max_rel_err_u = report.max_rel_err_u.max(err_u);
        report.max_rel_err_du = report.max_rel_err_du.max(err_du);
    }
    Ok(report)
}

/// Checks `W >= c0 |U|^p - c1` on the given probes; `None` when the integrand
/// does not declare coercivity constants.
pub fn check_coercivity<I: Integrand + ?Sized>(
    integrand: &I,
    probes: &[(f64, f64, f64)],
) -> Option<bool> {
    let (c0, c1) = integrand.coercivity()?;
    let p = integrand.growth();
    Some(
        probes
            .iter()
            .all(|&(x, u, du)| integrand.w(x, u, du) >= c0 * du.abs().powf(p) - c1 - 1e-12),
    )
}
