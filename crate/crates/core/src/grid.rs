//! Uniform partitions of (0,1) and piecewise-linear nodal functions.
//!
//! A [`NodalFunction`] is the discrete stand-in for an admissible profile
//! `u`: nodal values on a [`Grid1D`], linear in between, with optional fixed
//! end values. The non-local derivative substitute is the difference
//! quotient `Du(s, t) = (u(t) - u(s)) / (t - s)`.

use crate::error::{Error, Result};

/// Relative (to `h`) separation below which two points are treated as coincident
/// by [`NodalFunction::difference_quotient`].
pub const DIAGONAL_TOLERANCE: f64 = 1e-9;

/// Uniform grid on [0,1] with `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    h: f64,
}

impl Grid1D {
    /// Builds the uniform grid with `n` cells. Requires `n >= 2`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 cells, got {n}"
            )));
        }
        Ok(Grid1D {
            n,
            h: 1.0 / n as f64,
        })
    }

    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.n + 1
    }

    /// Coordinate of node `i`; the last node is exactly 1.
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n);
        if i == self.n {
            1.0
        } else {
            i as f64 / self.n as f64
        }
    }

    /// Centre of cell `i`.
    pub fn midpoint(&self, i: usize) -> f64 {
        debug_assert!(i < self.n);
        (i as f64 + 0.5) / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.node(i)).collect()
    }

    pub fn midpoints(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.midpoint(i)).collect()
    }

    /// Index of the cell containing `t`; nodes shared by two cells belong to
    /// the right one, except `t = 1` which belongs to the last cell.
    pub fn cell_of(&self, t: f64) -> usize {
        let c = (t * self.n as f64).floor();
        if c < 0.0 {
            0
        } else {
            (c as usize).min(self.n - 1)
        }
    }

    /// Grid with `factor` times as many cells.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        Grid1D::uniform(self.n * factor)
    }
}

/// Piecewise-linear function on a [`Grid1D`] given by its nodal values.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalFunction {
    grid: Grid1D,
    values: Vec<f64>,
    left_bc: Option<f64>,
    right_bc: Option<f64>,
}

impl NodalFunction {
    /// Wraps nodal values, checking their count and that any fixed end value
    /// is matched exactly.
    pub fn new(
        grid: Grid1D,
        values: Vec<f64>,
        left_bc: Option<f64>,
        right_bc: Option<f64>,
    ) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidFunction(format!(
                "expected {} nodal values, got {}",
                grid.node_count(),
                values.len()
            )));
        }
        if let Some(a) = left_bc {
            if values[0] != a {
                return Err(Error::InvalidFunction(format!(
                    "left value {} does not match end condition {a}",
                    values[0]
                )));
            }
        }
        if let Some(b) = right_bc {
            if values[grid.cells()] != b {
                return Err(Error::InvalidFunction(format!(
                    "right value {} does not match end condition {b}",
                    values[grid.cells()]
                )));
            }
        }
        Ok(NodalFunction {
            grid,
            values,
            left_bc,
            right_bc,
        })
    }

    /// Samples `f` at the nodes and leaves the end values free.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        NodalFunction {
            grid,
            values,
            left_bc: None,
            right_bc: None,
        }
    }

    /// Samples `f` at the interior nodes and pins the ends to `bc`.
    pub fn from_fn_with_bc(grid: Grid1D, bc: (f64, f64), f: impl Fn(f64) -> f64) -> Self {
        let n = grid.cells();
        let values = (0..=n)
            .map(|i| match i {
                0 => bc.0,
                i if i == n => bc.1,
                i => f(grid.node(i)),
            })
            .collect();
        NodalFunction {
            grid,
            values,
            left_bc: Some(bc.0),
            right_bc: Some(bc.1),
        }
    }

    /// Linear interpolant of the end conditions.
    pub fn linear(grid: Grid1D, bc: (f64, f64)) -> Self {
        Self::from_fn_with_bc(grid, bc, |x| bc.0 + (bc.1 - bc.0) * x)
    }

    pub fn constant(grid: Grid1D, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn left_bc(&self) -> Option<f64> {
        self.left_bc
    }

    pub fn right_bc(&self) -> Option<f64> {
        self.right_bc
    }

    /// Returns a copy with both end conditions set to the current end values.
    pub fn pinned(mut self) -> Self {
        self.left_bc = Some(self.values[0]);
        self.right_bc = Some(self.values[self.grid.cells()]);
        self
    }

    /// Replaces the interior values, keeping the end values untouched.
    pub fn with_interior(&self, interior: &[f64]) -> Result<Self> {
        let n = self.grid.cells();
        if interior.len() != n - 1 {
            return Err(Error::InvalidFunction(format!(
                "expected {} interior values, got {}",
                n - 1,
                interior.len()
            )));
        }
        let mut values = self.values.clone();
        values[1..n].copy_from_slice(interior);
        Ok(NodalFunction { values, ..*self })
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.grid.cells()]
    }

    /// Value at the midpoint of cell `i`.
    pub fn midpoint_value(&self, i: usize) -> f64 {
        0.5 * (self.values[i] + self.values[i + 1])
    }

    /// Slope of cell `i`.
    pub fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) * self.grid.cells() as f64
    }

    /// Piecewise-linear interpolation at `t`, exact at nodes.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain {
                value: t,
                what: "[0, 1]",
            });
        }
        let n = self.grid.cells();
        let r = t * n as f64;
        let nearest = r.round();
        if (r - nearest).abs() <= 4.0 * f64::EPSILON * n as f64 {
            return Ok(self.values[nearest as usize]);
        }
        let i = self.grid.cell_of(t);
        let lambda = r - i as f64;
        Ok(self.values[i] + lambda * (self.values[i + 1] - self.values[i]))
    }

    /// Non-local difference quotient `(u(t) - u(s)) / (t - s)`.
    ///
    /// For `|t - s| <= h * DIAGONAL_TOLERANCE` the quotient is replaced by its
    /// limit, the slope of the cell containing `(s + t) / 2`.
    pub fn difference_quotient(&self, s: f64, t: f64) -> Result<f64> {
        let us = self.eval(s)?;
        let ut = self.eval(t)?;
        if (t - s).abs() <= self.grid.spacing() * DIAGONAL_TOLERANCE {
            return Ok(self.slope(self.grid.cell_of(0.5 * (s + t))));
        }
        Ok((ut - us) / (t - s))
    }

    /// Linear prolongation onto `grid` (typically a refinement).
    pub fn prolong(&self, grid: Grid1D) -> Self {
        let n = grid.cells();
        let values = (0..=n)
            .map(|i| match i {
                0 => self.values[0],
                i if i == n => self.values[self.grid.cells()],
                i => self
                    .eval(grid.node(i))
                    .expect("grid nodes lie in [0, 1]"),
            })
            .collect();
        NodalFunction {
            grid,
            values,
            left_bc: self.left_bc,
            right_bc: self.right_bc,
        }
    }

    /// Sup-norm distance to `other`, measured at the nodes of the finer of the two grids.
    pub fn sup_distance(&self, other: &NodalFunction) -> f64 {
        let (fine, coarse) = if self.grid.cells() >= other.grid.cells() {
            (self, other)
        } else {
            (other, self)
        };
        fine.grid
            .nodes()
            .iter()
            .zip(&fine.values)
            .map(|(&x, &v)| (v - coarse.eval(x).expect("grid nodes lie in [0, 1]")).abs())
            .fold(0.0, f64::max)
    }

    /// Nodal derivative by finite differences: central inside, one-sided at the ends.
    pub fn nodal_derivative(&self) -> Vec<f64> {
        let n = self.grid.cells();
        (0..=n)
            .map(|i| match i {
                0 => self.slope(0),
                i if i == n => self.slope(n - 1),
                i => 0.5 * (self.slope(i - 1) + self.slope(i)),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_grid_n4() {
        let g = Grid1D::uniform(4).unwrap();
        assert_eq!(g.nodes(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.midpoints(), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn uniform_grid_n2() {
        let g = Grid1D::uniform(2).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn too_coarse_grid_is_rejected() {
        assert!(matches!(Grid1D::uniform(1), Err(Error::InvalidGrid(_))));
        assert!(Grid1D::uniform(0).is_err());
    }

    #[test]
    fn grid_invariants() {
        for n in [2, 3, 7, 64, 129, 1000] {
            let g = Grid1D::uniform(n).unwrap();
            let nodes = g.nodes();
            assert_eq!(nodes[0], 0.0);
            assert_eq!(nodes[n], 1.0);
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            for (i, m) in g.midpoints().into_iter().enumerate() {
                assert!(nodes[i] < m && m < nodes[i + 1]);
            }
            assert!((g.spacing() * n as f64 - 1.0).abs() <= 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn eval_examples() {
        let g = Grid1D::uniform(10).unwrap();
        let id = NodalFunction::linear(g, (0.0, 1.0));
        assert!((id.eval(0.3).unwrap() - 0.3).abs() < 1e-15);
        let c = NodalFunction::constant(g, 2.5);
        for t in [0.0, 0.17, 0.5, 1.0] {
            assert_eq!(c.eval(t).unwrap(), 2.5);
        }
        let hat = NodalFunction::new(Grid1D::uniform(2).unwrap(), vec![0.0, 0.5, 0.0], None, None)
            .unwrap();
        assert_eq!(hat.eval(0.25).unwrap(), 0.25);
    }

    #[test]
    fn eval_outside_domain() {
        let u = NodalFunction::constant(Grid1D::uniform(4).unwrap(), 1.0);
        assert!(matches!(u.eval(-0.1), Err(Error::Domain { .. })));
        assert!(u.eval(1.0 + 1e-12).is_err());
        assert!(u.eval(f64::NAN).is_err());
    }

    #[test]
    fn eval_exact_at_nodes() {
        let g = Grid1D::uniform(37).unwrap();
        let u = NodalFunction::from_fn(g, |x| (7.0 * x).sin());
        for (i, &x) in g.nodes().iter().enumerate() {
            assert_eq!(u.eval(x).unwrap(), u.values()[i]);
        }
    }

    #[test]
    fn eval_matches_direct_formula() {
        use rand::{Rng, SeedableRng};
        let g = Grid1D::uniform(23).unwrap();
        let u = NodalFunction::from_fn(g, |x| x * x - 0.3 * x);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let t: f64 = rng.gen();
            let i = ((t * 23.0).floor() as usize).min(22);
            let (x0, x1) = (i as f64 / 23.0, (i + 1) as f64 / 23.0);
            let direct = u.values()[i] + (t - x0) / (x1 - x0) * (u.values()[i + 1] - u.values()[i]);
            worst = worst.max((u.eval(t).unwrap() - direct).abs());
        }
        assert!(worst <= 4.0 * f64::EPSILON, "{worst}");
    }

    #[test]
    fn difference_quotient_examples() {
        let g = Grid1D::uniform(8).unwrap();
        let id = NodalFunction::linear(g, (0.0, 1.0));
        for (s, t) in [(0.0, 1.0), (0.1, 0.7), (0.9, 0.2), (0.3, 0.3)] {
            assert!((id.difference_quotient(s, t).unwrap() - 1.0).abs() < 1e-12);
        }
        let c = NodalFunction::constant(g, -4.0);
        assert_eq!(c.difference_quotient(0.2, 0.6).unwrap(), 0.0);
        let hat = NodalFunction::new(Grid1D::uniform(2).unwrap(), vec![0.0, 0.5, 0.0], None, None)
            .unwrap();
        assert_eq!(hat.difference_quotient(0.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn diagonal_branch_returns_cell_slope() {
        let g = Grid1D::uniform(4).unwrap();
        let u = NodalFunction::new(g, vec![0.0, 1.0, 1.5, 1.0, 0.0], None, None).unwrap();
        assert_eq!(u.difference_quotient(0.3, 0.3).unwrap(), u.slope(1));
        assert_eq!(u.slope(1), 2.0);
        assert_eq!(u.difference_quotient(0.9, 0.9).unwrap(), -4.0);
    }

    #[test]
    fn bc_mismatch_is_rejected() {
        let g = Grid1D::uniform(2).unwrap();
        assert!(NodalFunction::new(g, vec![0.1, 0.5, 1.0], Some(0.0), Some(1.0)).is_err());
        assert!(NodalFunction::new(g, vec![0.0, 0.5], None, None).is_err());
    }

    #[test]
    fn prolongation_preserves_function() {
        let g = Grid1D::uniform(5).unwrap();
        let u = NodalFunction::from_fn(g, |x| x * x);
        let fine = u.prolong(g.refined(2).unwrap());
        assert!(u.sup_distance(&fine) < 1e-15);
        assert_eq!(fine.values()[2], u.values()[1]);
    }

    fn random_function() -> impl Strategy<Value = NodalFunction> {
        (2usize..40).prop_flat_map(|n| {
            proptest::collection::vec(-5.0f64..5.0, n + 1).prop_map(move |v| {
                NodalFunction::new(Grid1D::uniform(n).unwrap(), v, None, None).unwrap()
            })
        })
    }

    fn rounding_bound(scale: f64, s: f64, t: f64, g: &Grid1D) -> f64 {
        let gap = (t - s).abs().max(g.spacing() * DIAGONAL_TOLERANCE);
        16.0 * f64::EPSILON * (1.0 + scale) * (g.cells() as f64).max(1.0 / gap)
    }

    proptest! {
        #[test]
        fn quotient_is_symmetric(u in random_function(), s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            prop_assume!(s != t);
            let a = u.difference_quotient(s, t).unwrap();
            let b = u.difference_quotient(t, s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        }

        #[test]
        fn quotient_is_shift_invariant(u in random_function(), c in -10.0f64..10.0,
                                        s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            let shifted = NodalFunction::new(*u.grid(), u.values().iter().map(|v| v + c).collect(), None, None).unwrap();
            let a = u.difference_quotient(s, t).unwrap();
            let b = shifted.difference_quotient(s, t).unwrap();
            // the shift cancels only up to rounding of the shifted values
            let tol = rounding_bound(5.0 + c.abs(), s, t, u.grid());
            prop_assert!((a - b).abs() <= tol, "{a} vs {b}");
        }

        #[test]
        fn affine_functions_have_constant_quotient(n in 2usize..50, a in -3.0f64..3.0, b in -3.0f64..3.0,
                                                   s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
            let u = NodalFunction::from_fn(Grid1D::uniform(n).unwrap(), |x| a * x + b);
            let q = u.difference_quotient(s, t).unwrap();
            let tol = rounding_bound(a.abs() + b.abs(), s, t, u.grid());
            prop_assert!((q - a).abs() <= tol, "q = {q}, slope = {a}");
        }
    }
}
