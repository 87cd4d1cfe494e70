//! Tensor-midpoint quadrature of the double-integral energy
//!
//! ```text
//! E(u) = ∫₀¹ ∫₀¹ W(x, u(x), Du(x, X)) dX dx
//! ```
//!
//! and its exact gradient with respect to the interior nodal values.
//!
//! Both integration variables run over the cell midpoints `m_i`. On the
//! diagonal `i = j` the quotient is replaced by the cell slope, which is the
//! pointwise limit of `Du` for a piecewise-linear function.

use crate::error::{Error, Result};
use crate::grid::{Grid1D, NodalFunction};
use crate::integrand::Integrand;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub value: f64,
    pub n: usize,
    pub integrand: String,
    /// Row sums `h² Σ_j W(m_i, u(m_i), Du(m_i, m_j))`, one per midpoint `m_i`.
    /// `value` is their compensated sum.
    pub rows: Option<Vec<f64>>,
}

/// Neumaier-compensated running sum. Line searches compare energies whose
/// difference is far below the rounding error of a naive sum of n² terms.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

fn sum_rows(rows: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    rows.iter().for_each(|&r| acc.add(r));
    acc.total()
}

/// Quotient field at midpoint pair `(i, j)`.
#[inline]
fn pair_quotient(u: &NodalFunction, mids: &[f64], um: &[f64], i: usize, j: usize) -> f64 {
    if i == j {
        u.slope(i)
    } else {
        (um[j] - um[i]) / (mids[j] - mids[i])
    }
}

fn midpoint_values(u: &NodalFunction) -> Vec<f64> {
    (0..u.grid().cells()).map(|i| u.midpoint_value(i)).collect()
}

fn row_sums<I: Integrand + ?Sized>(u: &NodalFunction, integrand: &I) -> Result<Vec<f64>> {
    let grid = u.grid();
    let n = grid.cells();
    let h = grid.spacing();
    let mids = grid.midpoints();
    let um = midpoint_values(u);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = CompensatedSum::default();
        for j in 0..n {
            let q = pair_quotient(u, &mids, &um, i, j);
            let w = integrand.w(mids[i], um[i], q);
            if !w.is_finite() {
                return Err(Error::NonFiniteEnergy {
                    x: mids[i],
                    other: mids[j],
                });
            }
            acc.add(w);
        }
        rows.push(acc.total() * h * h);
    }
    Ok(rows)
}

/// Discrete energy of `u`.
pub fn energy<I: Integrand + ?Sized>(u: &NodalFunction, integrand: &I) -> Result<EnergyReport> {
    let rows = row_sums(u, integrand)?;
    Ok(EnergyReport {
        value: sum_rows(&rows),
        n: u.grid().cells(),
        integrand: integrand.name(),
        rows: Some(rows),
    })
}

/// Energy value only, without the row breakdown.
pub fn energy_value<I: Integrand + ?Sized>(u: &NodalFunction, integrand: &I) -> Result<f64> {
    Ok(sum_rows(&row_sums(u, integrand)?))
}

/// Energy and its partial derivatives with respect to every nodal value
/// (including the two end values).
pub fn energy_and_full_gradient<I: Integrand + ?Sized>(
    u: &NodalFunction,
    integrand: &I,
) -> Result<(f64, Vec<f64>)> {
    let grid = u.grid();
    let n = grid.cells();
    let h = grid.spacing();
    let inv_h = n as f64;
    let mids = grid.midpoints();
    let um = midpoint_values(u);

    // d/d(u(m_i)) and d/d(v_k) accumulators, scaled by h² at the end
    let mut d_mid = vec![0.0; n];
    let mut d_node = vec![0.0; n + 1];
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = CompensatedSum::default();
        for j in 0..n {
            let q = pair_quotient(u, &mids, &um, i, j);
            let w = integrand.w(mids[i], um[i], q);
            if !w.is_finite() {
                return Err(Error::NonFiniteEnergy {
                    x: mids[i],
                    other: mids[j],
                });
            }
            row.add(w);
            let (w_u, w_du) = integrand.grad(mids[i], um[i], q);
            d_mid[i] += w_u;
            if i == j {
                d_node[i + 1] += w_du * inv_h;
                d_node[i] -= w_du * inv_h;
            } else {
                let scaled = w_du / (mids[j] - mids[i]);
                d_mid[j] += scaled;
                d_mid[i] -= scaled;
            }
        }
        rows.push(row.total() * h * h);
    }
    for (i, d) in d_mid.into_iter().enumerate() {
        d_node[i] += 0.5 * d;
        d_node[i + 1] += 0.5 * d;
    }
    let h2 = h * h;
    d_node.iter_mut().for_each(|g| *g *= h2);
    Ok((sum_rows(&rows), d_node))
}

/// Gradient of the discrete energy with respect to the interior nodal values
/// `v_1, ..., v_{n-1}`.
pub fn energy_gradient<I: Integrand + ?Sized>(u: &NodalFunction, integrand: &I) -> Result<Vec<f64>> {
    let (_, mut g) = energy_and_full_gradient(u, integrand)?;
    g.pop();
    g.remove(0);
    Ok(g)
}

/// Energies of one continuum profile sampled on a grid and on its refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinementComparison {
    pub coarse: f64,
    pub fine: f64,
    pub gap: f64,
}

pub fn refine_and_compare<I, F>(
    profile: F,
    integrand: &I,
    n: usize,
    factor: usize,
) -> Result<RefinementComparison>
where
    I: Integrand + ?Sized,
    F: Fn(f64) -> f64,
{
    if factor < 2 {
        return Err(Error::Parameter(format!(
            "refinement factor must be at least 2, got {factor}"
        )));
    }
    let coarse_grid = Grid1D::uniform(n)?;
    let fine_grid = coarse_grid.refined(factor)?;
    let coarse = energy_value(&NodalFunction::from_fn(coarse_grid, &profile), integrand)?;
    let fine = energy_value(&NodalFunction::from_fn(fine_grid, &profile), integrand)?;
    Ok(RefinementComparison {
        coarse,
        fine,
        gap: (coarse - fine).abs(),
    })
}
