//! Minimization of the discrete energy over the interior nodal values.
//!
//! The end values are never touched, so every iterate satisfies the end
//! conditions exactly. Directions come from the limited-memory BFGS two-loop
//! recursion (or plain steepest descent when `memory == 0`), steps from an
//! Armijo backtracking line search. Once energy differences drop to round-off
//! level the search switches to a gradient-based acceptance test; no accepted
//! step ever increases the energy.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{energy_and_full_gradient, energy_value};
use crate::error::{Error, Result};
use crate::grid::{Grid1D, NodalFunction};
use crate::integrand::Integrand;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Stop once the Euclidean norm of the interior gradient is at most this.
    pub grad_tol: f64,
    pub initial_step: f64,
    pub shrink: f64,
    /// Armijo constant.
    pub sufficient_decrease: f64,
    /// Number of stored curvature pairs; 0 selects steepest descent.
    pub memory: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 20_000,
            grad_tol: 1e-8,
            initial_step: 1.0,
            shrink: 0.5,
            sufficient_decrease: 1e-4,
            memory: 10,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// Default configuration with the gradient tolerance chosen for `n` cells:
    /// `1e-8` up to 128 cells, `1e-6` above.
    pub fn for_cells(n: usize) -> Self {
        SolverConfig {
            grad_tol: if n <= 128 { 1e-8 } else { 1e-6 },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Parameter("max_iters must be at least 1".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Parameter("grad_tol must be positive".into()));
        }
        if !(self.initial_step > 0.0) || !self.initial_step.is_finite() {
            return Err(Error::Parameter("initial_step must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Parameter("shrink factor must lie in (0, 1)".into()));
        }
        if !(self.sufficient_decrease > 0.0 && self.sufficient_decrease < 1.0) {
            return Err(Error::Parameter(
                "sufficient-decrease constant must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

/// Starting point for [`minimize`].
#[derive(Debug, Clone, PartialEq)]
pub enum InitPolicy {
    /// Linear interpolant of the end conditions.
    Linear,
    /// Linear interpolant plus seeded uniform noise in `[-amplitude, amplitude]`.
    Random { amplitude: f64 },
    /// Linear interpolant plus a tent of slopes ±1 peaking at x = 1/2.
    Hat,
    Given(NodalFunction),
}

impl InitPolicy {
    pub fn build(&self, grid: Grid1D, bc: (f64, f64), seed: u64) -> Result<NodalFunction> {
        let linear = |x: f64| bc.0 + (bc.1 - bc.0) * x;
        Ok(match self {
            InitPolicy::Linear => NodalFunction::linear(grid, bc),
            InitPolicy::Random { amplitude } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let values: Vec<f64> = grid
                    .nodes()
                    .into_iter()
                    .map(|x| linear(x) + amplitude * rng.gen_range(-1.0..=1.0))
                    .collect();
                let n = grid.cells();
                NodalFunction::from_fn_with_bc(grid, bc, |x| {
                    values[(x * n as f64).round() as usize]
                })
            }
            InitPolicy::Hat => {
                NodalFunction::from_fn_with_bc(grid, bc, |x| linear(x) + 0.5 - (x - 0.5).abs())
            }
            InitPolicy::Given(u) => {
                if *u.grid() != grid || u.values()[0] != bc.0 || u.values()[grid.cells()] != bc.1 {
                    return Err(Error::InvalidFunction(
                        "initial guess does not match the grid or the end conditions".into(),
                    ));
                }
                NodalFunction::new(grid, u.values().to_vec(), Some(bc.0), Some(bc.1))?
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub u: NodalFunction,
    pub energy: f64,
    pub grad_norm: f64,
    pub iters: usize,
    /// One entry for the start and one per accepted step.
    pub trace: Vec<TracePoint>,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Objective<'a, I: ?Sized> {
    template: NodalFunction,
    integrand: &'a I,
}

impl<I: Integrand + ?Sized> Objective<'_, I> {
    fn eval(&self, interior: &[f64]) -> Result<(f64, Vec<f64>)> {
        let u = self.template.with_interior(interior)?;
        let (e, mut g) = energy_and_full_gradient(&u, self.integrand)?;
        g.pop();
        g.remove(0);
        Ok((e, g))
    }

    fn value(&self, interior: &[f64]) -> Result<f64> {
        energy_value(&self.template.with_interior(interior)?, self.integrand)
    }
}

/// Two-loop recursion: approximates `-H⁻¹ g` from the stored pairs.
fn lbfgs_direction(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y) in history.iter().rev() {
        let rho = 1.0 / dot(y, s);
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push((rho, a));
    }
    if let Some((s, y)) = history.back() {
        let gamma = dot(s, y) / dot(y, y);
        q.iter_mut().for_each(|qi| *qi *= gamma);
    }
    for ((s, y), (rho, a)) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|qi| *qi = -*qi);
    q
}

struct Step {
    x: Vec<f64>,
    f: f64,
    g: Vec<f64>,
    length: f64,
}

fn trial_point(x: &[f64], direction: &[f64], step: f64) -> Vec<f64> {
    x.iter().zip(direction).map(|(a, d)| a + step * d).collect()
}

/// Steps shrink until `step * |d|_inf` no longer moves `x` in floating point.
fn step_too_small(x: &[f64], direction: &[f64], step: f64) -> bool {
    let d_max = direction.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let x_max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    step * d_max <= f64::EPSILON * (1.0 + x_max)
}

/// Backtracking with the Armijo sufficient-decrease test.
fn armijo_search<I: Integrand + ?Sized>(
    objective: &Objective<'_, I>,
    x: &[f64],
    f: f64,
    direction: &[f64],
    slope: f64,
    mut step: f64,
    cfg: &SolverConfig,
) -> Result<Option<Step>> {
    while !step_too_small(x, direction, step) {
        let trial = trial_point(x, direction, step);
        let f_trial = objective.value(&trial)?;
        if f_trial <= f + cfg.sufficient_decrease * step * slope {
            let (f_trial, g_trial) = objective.eval(&trial)?;
            return Ok(Some(Step { x: trial, f: f_trial, g: g_trial, length: step }));
        }
        step *= cfg.shrink;
    }
    Ok(None)
}

/// Backtracking that accepts the first step with no energy increase whose
/// directional derivative has not overshot: `g(x + s d)·d <= (1 - 2c) |g·d|`.
fn flat_search<I: Integrand + ?Sized>(
    objective: &Objective<'_, I>,
    x: &[f64],
    f: f64,
    direction: &[f64],
    slope: f64,
    mut step: f64,
    cfg: &SolverConfig,
) -> Result<Option<Step>> {
    let bound = (1.0 - 2.0 * cfg.sufficient_decrease) * slope.abs();
    while !step_too_small(x, direction, step) {
        let trial = trial_point(x, direction, step);
        let (f_trial, g_trial) = objective.eval(&trial)?;
        if f_trial <= f && dot(&g_trial, direction) <= bound && norm(&g_trial).is_finite() {
            return Ok(Some(Step { x: trial, f: f_trial, g: g_trial, length: step }));
        }
        step *= cfg.shrink;
    }
    Ok(None)
}

/// Minimizes the discrete energy with end values `bc` starting from `init`.
///
/// Returns the first iterate whose gradient norm is at most `cfg.grad_tol`,
/// otherwise the last (and lowest) iterate after `cfg.max_iters` steps with
/// `converged == false`.
pub fn minimize<I: Integrand + ?Sized>(
    integrand: &I,
    grid: Grid1D,
    bc: (f64, f64),
    init: &InitPolicy,
    cfg: &SolverConfig,
) -> Result<MinimizeResult> {
    cfg.validate()?;
    let start = init.build(grid, bc, cfg.seed)?;
    let objective = Objective {
        template: start.clone(),
        integrand,
    };
    let mut x = start.interior().to_vec();
    let (mut f, mut g) = objective.eval(&x)?;
    let mut g_norm = norm(&g);
    let mut trace = vec![TracePoint {
        energy: f,
        grad_norm: g_norm,
    }];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(cfg.memory);
    let mut fallback_step = cfg.initial_step;
    let mut iters = 0;
    let mut converged = g_norm <= cfg.grad_tol;

    while !converged && iters < cfg.max_iters {
        let mut used_history = !history.is_empty();
        let mut direction = if used_history {
            lbfgs_direction(&g, &history)
        } else {
            g.iter().map(|v| -v).collect()
        };
        if dot(&g, &direction) >= 0.0 {
            history.clear();
            used_history = false;
            direction = g.iter().map(|v| -v).collect();
        }

        let accepted = loop {
            let slope = dot(&g, &direction);
            let initial = if used_history { 1.0 } else { fallback_step };
            let mut found = armijo_search(&objective, &x, f, &direction, slope, initial, cfg)?;
            if found.is_none() {
                // near the round-off floor energy differences carry no signal;
                // fall back to a gradient-based test that still forbids any increase
                found = flat_search(&objective, &x, f, &direction, slope, initial, cfg)?;
            }
            match found {
                Some(hit) => break Some(hit),
                None if used_history => {
                    // stale curvature pairs: retry along the steepest-descent direction
                    history.clear();
                    used_history = false;
                    direction = g.iter().map(|v| -v).collect();
                }
                None => break None,
            }
        };

        let Some(Step { x: x_new, f: f_new, g: g_new, length: step }) = accepted else {
            return Err(Error::LineSearch {
                iteration: iters,
                trace,
            });
        };
        if !used_history {
            fallback_step = (step / cfg.shrink).min(1e6);
        }
        if cfg.memory > 0 {
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            if dot(&s, &y) > 1e-14 * norm(&s) * norm(&y) {
                if history.len() == cfg.memory {
                    history.pop_front();
                }
                history.push_back((s, y));
            }
        }
        x = x_new;
        f = f_new;
        g = g_new;
        g_norm = norm(&g);
        iters += 1;
        trace.push(TracePoint {
            energy: f,
            grad_norm: g_norm,
        });
        converged = g_norm <= cfg.grad_tol;
    }

    Ok(MinimizeResult {
        u: start.with_interior(&x)?,
        energy: f,
        grad_norm: g_norm,
        iters,
        trace,
        converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSummary {
    pub n: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub iters: usize,
    pub converged: bool,
    /// Sup-norm change between the prolonged coarser solution and this level's
    /// solution; `None` on the first level.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationResult {
    pub result: MinimizeResult,
    pub levels: Vec<LevelSummary>,
}

/// Solves on `n_start` cells, then repeatedly doubles the grid, prolongs the
/// previous solution linearly and re-solves until `n_end` cells.
pub fn continuation_refine<I: Integrand + ?Sized>(
    integrand: &I,
    bc: (f64, f64),
    n_start: usize,
    n_end: usize,
    init: &InitPolicy,
    cfg: &SolverConfig,
) -> Result<ContinuationResult> {
    if n_start == 0 || n_end < n_start || n_end % n_start != 0 || !(n_end / n_start).is_power_of_two() {
        return Err(Error::Parameter(format!(
            "n_end = {n_end} is not n_start = {n_start} times a power of two"
        )));
    }
    let mut grid = Grid1D::uniform(n_start)?;
    let mut result = minimize(integrand, grid, bc, init, cfg)?;
    let mut levels = vec![LevelSummary {
        n: n_start,
        energy: result.energy,
        grad_norm: result.grad_norm,
        iters: result.iters,
        converged: result.converged,
        delta: None,
    }];
    while grid.cells() < n_end {
        grid = grid.refined(2)?;
        let prolonged = result.u.prolong(grid);
        result = minimize(integrand, grid, bc, &InitPolicy::Given(prolonged.clone()), cfg)?;
        levels.push(LevelSummary {
            n: grid.cells(),
            energy: result.energy,
            grad_norm: result.grad_norm,
            iters: result.iters,
            converged: result.converged,
            delta: Some(prolonged.sup_distance(&result.u)),
        });
    }
    Ok(ContinuationResult { result, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{energy_gradient, energy_value};
    use crate::integrand::BuiltIn;

    fn grid(n: usize) -> Grid1D {
        Grid1D::uniform(n).unwrap()
    }

    fn assert_descent(r: &MinimizeResult) {
        assert!(r.trace.windows(2).all(|w| w[1].energy <= w[0].energy));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = [
            SolverConfig { max_iters: 0, ..Default::default() },
            SolverConfig { grad_tol: 0.0, ..Default::default() },
            SolverConfig { shrink: 1.0, ..Default::default() },
            SolverConfig { sufficient_decrease: 0.0, ..Default::default() },
            SolverConfig { initial_step: -1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(minimize(&BuiltIn::HalfSquare, grid(8), (0.0, 1.0), &InitPolicy::Linear, &cfg).is_err());
        }
        assert_eq!(SolverConfig::for_cells(128).grad_tol, 1e-8);
        assert_eq!(SolverConfig::for_cells(256).grad_tol, 1e-6);
    }

    #[test]
    fn half_square_beats_linear() {
        let r = minimize(&BuiltIn::HalfSquare, grid(64), (0.0, 1.0), &InitPolicy::Linear, &SolverConfig::for_cells(64)).unwrap();
        assert!(r.converged);
        assert!(r.energy < 0.5);
        assert_descent(&r);
        assert_eq!(r.u.values()[0], 0.0);
        assert_eq!(r.u.values()[64], 1.0);
        assert_eq!(r.energy, energy_value(&r.u, &BuiltIn::HalfSquare).unwrap());
        let g = energy_gradient(&r.u, &BuiltIn::HalfSquare).unwrap();
        assert!(g.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-8);
    }

    #[test]
    fn quad_mass_minimizer_is_unique() {
        let cfg = SolverConfig::for_cells(64);
        let a = minimize(&BuiltIn::QuadraticMass, grid(64), (0.0, 1.0), &InitPolicy::Linear, &cfg).unwrap();
        let b = minimize(&BuiltIn::QuadraticMass, grid(64), (0.0, 1.0), &InitPolicy::Random { amplitude: 0.3 }, &cfg).unwrap();
        assert!(a.converged && b.converged);
        assert!(a.u.sup_distance(&b.u) <= 1e-5);
        assert_descent(&b);
    }

    #[test]
    fn two_well_bare_never_exceeds_zero_energy() {
        let r = minimize(&BuiltIn::TwoWellBare, grid(64), (0.0, 0.0), &InitPolicy::Linear, &SolverConfig::default()).unwrap();
        assert!(r.energy <= 0.25);
        assert!(r.converged);
        assert_eq!(r.iters, 0);
    }

    #[test]
    fn steepest_descent_also_converges() {
        let cfg = SolverConfig { memory: 0, grad_tol: 1e-6, ..SolverConfig::default() };
        let r = minimize(&BuiltIn::QuadraticMass, grid(16), (0.0, 1.0), &InitPolicy::Linear, &cfg).unwrap();
        assert!(r.converged, "{} after {}", r.grad_norm, r.iters);
        assert_descent(&r);
    }

    #[test]
    fn iteration_cap_reports_non_convergence() {
        let cfg = SolverConfig { max_iters: 3, ..SolverConfig::default() };
        let r = minimize(&BuiltIn::HalfSquare, grid(32), (0.0, 1.0), &InitPolicy::Linear, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iters, 3);
        assert_eq!(r.trace.len(), 4);
    }

    #[test]
    fn deterministic_traces() {
        let cfg = SolverConfig { seed: 99, ..SolverConfig::for_cells(32) };
        let run = || {
            minimize(&BuiltIn::TwoWellFull, grid(32), (0.0, 0.0), &InitPolicy::Random { amplitude: 0.2 }, &cfg).unwrap()
        };
        assert_eq!(run().trace, run().trace);
    }

    #[test]
    fn hat_init_has_unit_slopes() {
        let u = InitPolicy::Hat.build(grid(8), (0.0, 0.0), 0).unwrap();
        assert!((u.eval(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((0..8).all(|i| (u.slope(i).abs() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn given_init_must_match_bc() {
        let u = NodalFunction::linear(grid(8), (0.0, 2.0));
        let err = InitPolicy::Given(u).build(grid(8), (0.0, 1.0), 0);
        assert!(err.is_err());
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let u = NodalFunction::from_fn_with_bc(grid(8), (0.0, 1.0), |x| if x == 0.5 { f64::NAN } else { x });
        let r = minimize(&BuiltIn::HalfSquare, grid(8), (0.0, 1.0), &InitPolicy::Given(u), &SolverConfig::default());
        assert!(matches!(r, Err(Error::NonFiniteEnergy { .. })));
    }

    #[test]
    fn continuation_examples() {
        let cfg = SolverConfig::for_cells(64);
        let half = continuation_refine(&BuiltIn::HalfSquare, (0.0, 1.0), 16, 64, &InitPolicy::Linear, &cfg).unwrap();
        let deltas: Vec<f64> = half.levels.iter().filter_map(|l| l.delta).collect();
        assert_eq!(deltas.len(), 2);
        assert!(deltas[1] < deltas[0], "{deltas:?}");
        assert_eq!(half.result.u.grid().cells(), 64);

        let mass = continuation_refine(&BuiltIn::QuadraticMass, (0.0, 1.0), 16, 32, &InitPolicy::Linear, &cfg).unwrap();
        assert!(mass.levels.iter().all(|l| l.converged));
        // boundary layer at x = 1 sharpens with n, so the delta stays O(1)
        assert!(mass.levels[1].delta.unwrap().is_finite());
        assert!(mass.levels[1].energy < mass.levels[0].energy);

        let bare = continuation_refine(&BuiltIn::TwoWellBare, (0.0, 0.0), 32, 64, &InitPolicy::Linear, &cfg).unwrap();
        assert!(bare.levels[1].delta.unwrap().is_finite());

        assert!(continuation_refine(&BuiltIn::HalfSquare, (0.0, 1.0), 16, 48, &InitPolicy::Linear, &cfg).is_err());
    }
}
