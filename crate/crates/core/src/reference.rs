//! Closed-form and quasi-analytic comparison profiles.

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// A profile sampled on grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    pub name: String,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub u_prime: Option<Vec<f64>>,
    pub params: Vec<(String, f64)>,
}

/// Minimizer of the local functional `∫ (u'²/2 + 8u²) dx` with `u(0) = 0`, `u(1) = 1`.
pub fn local_exp_solution(x: f64) -> f64 {
    let e4 = 4f64.exp();
    e4 / (e4 * e4 - 1.0) * ((4.0 * x).exp() - (-4.0 * x).exp())
}

pub fn local_exp_profile(grid: &Grid1D) -> ReferenceProfile {
    let x = grid.nodes();
    let e4 = 4f64.exp();
    let scale = e4 / (e4 * e4 - 1.0);
    ReferenceProfile {
        name: "local-exp".into(),
        u: x.iter().map(|&t| local_exp_solution(t)).collect(),
        u_prime: Some(
            x.iter()
                .map(|&t| 4.0 * scale * ((4.0 * t).exp() + (-4.0 * t).exp()))
                .collect(),
        ),
        x,
        params: vec![],
    }
}

/// `t^{2t}` extended continuously by 1 at `t = 0`.
fn self_power(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else {
        (2.0 * t * t.ln()).exp()
    }
}

/// Unnormalized derivative shape `x^{2x} (1 - x)^{2(1 - x)}`, equal to 1 at both ends.
pub fn ode_shape(x: f64) -> f64 {
    self_power(x) * self_power(1.0 - x)
}

/// Approximate derivative `k x^{2x} (1 - x)^{2(1 - x)}` of the quadratic-case minimizer.
pub fn ode_approx_derivative(x: f64, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Parameter(format!("k must be positive, got {k}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            value: x,
            what: "[0, 1]",
        });
    }
    Ok(k * ode_shape(x))
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

fn adaptive_simpson_rec(
    f: &impl Fn(f64) -> f64,
    (a, fa): (f64, f64),
    (b, fb): (f64, f64),
    (m, fm): (f64, f64),
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let (lm, flm, left) = simpson(f, a, fa, m, fm);
    let (rm, frm, right) = simpson(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson_rec(f, (a, fa), (m, fm), (lm, flm), left, 0.5 * tol, depth - 1)
        + adaptive_simpson_rec(f, (m, fm), (b, fb), (rm, frm), right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(&f, a, fa, b, fb);
    adaptive_simpson_rec(&f, (a, fa), (b, fb), (m, fm), whole, tol, 50)
}

const SHAPE_TOLERANCE: f64 = 1e-13;

/// Constant `k` with `k⁻¹ = ∫₀¹ x^{2x} (1 - x)^{2(1 - x)} dx`.
pub fn normalize_k() -> f64 {
    1.0 / adaptive_simpson(ode_shape, 0.0, 1.0, SHAPE_TOLERANCE)
}

/// Cumulative integral of the normalized approximate derivative on the grid
/// nodes; starts at 0 and ends at 1 up to quadrature error.
pub fn ode_approx_profile(grid: &Grid1D) -> ReferenceProfile {
    let k = normalize_k();
    let x = grid.nodes();
    let cell_tol = SHAPE_TOLERANCE / grid.cells() as f64;
    let mut u = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    u.push(0.0);
    for w in x.windows(2) {
        acc += adaptive_simpson(ode_shape, w[0], w[1], cell_tol);
        u.push(k * acc);
    }
    let u_prime = x.iter().map(|&t| k * ode_shape(t)).collect();
    ReferenceProfile {
        name: "ode-approx".into(),
        x,
        u,
        u_prime: Some(u_prime),
        params: vec![("k".into(), k)],
    }
}

/// Hölder exponent `(p - 2) / p` of finite-energy functions, defined for `p > 2`.
pub fn holder_exponent(p: f64) -> Result<f64> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::Domain {
            value: p,
            what: "(2, ∞)",
        });
    }
    Ok((p - 2.0) / p)
}
