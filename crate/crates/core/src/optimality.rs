//! Optimality residuals for the non-local problem.
//!
//! A minimizer satisfies, for a.e. `x`,
//!
//! ```text
//! R(x) = ∫₀¹ [ -Ndiv W_U(x, u(x), Du(x, X)) + W_u(x, u(x), Du(x, X)) ] dX = 0
//! ```
//!
//! with `Ndiv F(x, X) = (F(x, X) + F(X, x)) / (X - x)` and the integral taken
//! as a principal value. Residuals are evaluated at interior grid nodes with
//! the cell midpoints as abscissae, so the two never coincide. The principal
//! value is realized by summing the contributions of midpoints placed
//! symmetrically about the node in pairs; only cells outside that symmetric
//! window are accumulated one by one.
//!
//! For `W = (U² - 1)²/4 + u²/2` the residual is exactly the two-well integral
//! equation `u(x)/2 = ∫ Du/(X - x) (Du² - 1) dX`, so it has no separate
//! entry point here.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, NodalFunction};
use crate::integrand::Integrand;

/// Pointwise residual values at the interior nodes plus aggregate norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub x_points: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `(h Σ R(x_i)²)^{1/2}` over every interior node.
    pub norm_l2: f64,
    /// Max `|R(x_i)|`, leaving out the two boundary-adjacent nodes when the
    /// grid has at least four cells.
    pub norm_sup: f64,
}

impl ResidualReport {
    fn from_values(grid: &Grid1D, residuals: Vec<f64>) -> Self {
        let n = grid.cells();
        let x_points = (1..n).map(|k| grid.node(k)).collect();
        let norm_l2 = (grid.spacing() * residuals.iter().map(|r| r * r).sum::<f64>()).sqrt();
        let inner = if residuals.len() >= 3 {
            &residuals[1..residuals.len() - 1]
        } else {
            &residuals[..]
        };
        let norm_sup = inner.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
        ResidualReport {
            x_points,
            residuals,
            norm_l2,
            norm_sup,
        }
    }

    /// Max `|R(x_i)|` over all interior nodes.
    pub fn sup_including_boundary(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs()))
    }
}

/// Non-local divergence `(F(x, X) + F(X, x)) / (X - x)`.
pub fn ndiv(f: impl Fn(f64, f64) -> f64, x: f64, other: f64) -> Result<f64> {
    if x == other {
        return Err(Error::Singular(x));
    }
    Ok((f(x, other) + f(other, x)) / (other - x))
}

/// Principal value of `∫₀¹ dX / (X - x)`, namely `ln((1 - x) / x)`.
pub fn pv_log(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain {
            value: x,
            what: "(0, 1)",
        });
    }
    Ok(((1.0 - x) / x).ln())
}

/// Midpoint quadrature `h Σ_j g(j)` around interior node `k`, where cells
/// `k - 1 - i` and `k + i` are added as a pair for `i < min(k, n - k)`.
///
/// For an integrand odd about `x_k` every pair cancels exactly.
pub fn paired_midpoint_sum(grid: &Grid1D, k: usize, mut g: impl FnMut(usize) -> f64) -> f64 {
    let n = grid.cells();
    debug_assert!(k >= 1 && k < n);
    let window = k.min(n - k);
    let mut acc = 0.0;
    for i in 0..window {
        acc += g(k + i) + g(k - 1 - i);
    }
    let rest = if k < n - k { 2 * k..n } else { 0..2 * k - n };
    for j in rest {
        acc += g(j);
    }
    acc * grid.spacing()
}

/// Index of the interior node at coordinate `x`.
fn interior_node(grid: &Grid1D, x: f64) -> Result<usize> {
    let n = grid.cells();
    let k = (x * n as f64).round();
    if k >= 1.0 && k <= (n - 1) as f64 && (grid.node(k as usize) - x).abs() <= 1e-12 {
        Ok(k as usize)
    } else {
        Err(Error::Domain {
            value: x,
            what: "the interior grid nodes",
        })
    }
}

/// Residual at interior node `k`.
pub fn residual_at_node<I: Integrand + ?Sized>(
    u: &NodalFunction,
    integrand: &I,
    k: usize,
) -> Result<f64> {
    let grid = u.grid();
    if k == 0 || k >= grid.cells() {
        return Err(Error::Domain {
            value: k as f64,
            what: "the interior node indices",
        });
    }
    let x = grid.node(k);
    let ux = u.values()[k];
    Ok(paired_midpoint_sum(grid, k, |j| {
        let other = grid.midpoint(j);
        let u_other = u.midpoint_value(j);
        let gap = other - x;
        let q = (u_other - ux) / gap;
        integrand.w_u(x, ux, q)
            - (integrand.w_du(x, ux, q) + integrand.w_du(other, u_other, q)) / gap
    }))
}

/// Residual at the interior node with coordinate `x`.
pub fn residual<I: Integrand + ?Sized>(u: &NodalFunction, integrand: &I, x: f64) -> Result<f64> {
    residual_at_node(u, integrand, interior_node(u.grid(), x)?)
}

pub fn residual_report<I: Integrand + ?Sized>(
    u: &NodalFunction,
    integrand: &I,
) -> Result<ResidualReport> {
    let n = u.grid().cells();
    let values = (1..n)
        .map(|k| residual_at_node(u, integrand, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_values(u.grid(), values))
}

/// The quadratic-case condition `∫₀¹ (u(X) - u(x)) / (X - x)² dX` at every
/// interior node, with the same pairing as [`residual_report`].
///
/// For `W = U²/2` this is `-1/2` times the general residual.
pub fn check_inteqo(u: &NodalFunction) -> ResidualReport {
    let grid = u.grid();
    let n = grid.cells();
    let values = (1..n)
        .map(|k| {
            let x = grid.node(k);
            let ux = u.values()[k];
            paired_midpoint_sum(grid, k, |j| {
                let gap = grid.midpoint(j) - x;
                (u.midpoint_value(j) - ux) / (gap * gap)
            })
        })
        .collect();
    ResidualReport::from_values(grid, values)
}

/// Kernel `x(1 - x)/(X - x) + χ_{(0,x)}(X)` of the integrated-by-parts form
/// of the quadratic condition.
pub fn kernel_k(x: f64, other: f64) -> Result<f64> {
    for t in [x, other] {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Domain {
                value: t,
                what: "(0, 1)",
            });
        }
    }
    if x == other {
        return Err(Error::Singular(x));
    }
    let indicator = if other < x { 1.0 } else { 0.0 };
    Ok(x * (1.0 - x) / (other - x) + indicator)
}

/// Principal value of `∫₀¹ K(x_k, X) u'(X) dX` using the cell slopes of `u`
/// at the midpoints. For a minimizer with `u(0) = 0` and `u(1) = 1` this
/// should equal `x_k`.
pub fn kernel_k_integral(u: &NodalFunction, k: usize) -> Result<f64> {
    let grid = u.grid();
    if k == 0 || k >= grid.cells() {
        return Err(Error::Domain {
            value: k as f64,
            what: "the interior node indices",
        });
    }
    let x = grid.node(k);
    let mut err = None;
    let total = paired_midpoint_sum(grid, k, |j| match kernel_k(x, grid.midpoint(j)) {
        Ok(kernel) => kernel * u.slope(j),
        Err(e) => {
            err.get_or_insert(e);
            0.0
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(total),
    }
}
