use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::spec::{ExperimentSpec, ProfileSource};
use super::svg::{self, Series};
use super::{curve, CliError, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::energy::energy;
use crate::grid::{Grid1D, NodalFunction};
use crate::integrand::BuiltIn;
use crate::optimality::residual_report;
use crate::reference::{self, local_exp_solution, ode_approx_derivative, ode_approx_profile};
use crate::solver::{minimize, InitPolicy, MinimizeResult};

const NON_CONVEX_WARNING: &str = "warning: the two-well density is not convex; the curve below is a \
critical point reached from the chosen start, not a certified global minimizer, and a finer \
grid need not reveal finer oscillations";

fn say(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_svg(path: &Path, title: &str, series: &[Series<'_>]) -> Result<(), CliError> {
    fs::write(path, svg::render(title, series)).map_err(|e| CliError::io(path, e))
}

fn grid_for(spec: &ExperimentSpec) -> Result<Grid1D, CliError> {
    Ok(Grid1D::uniform(spec.cells())?)
}

/// Builds the curve named by `profile`/`input`.
pub(super) fn load_profile(spec: &ExperimentSpec) -> Result<NodalFunction, CliError> {
    let source = spec
        .profile
        .as_ref()
        .ok_or_else(|| CliError::Spec("no input curve: pass --input FILE or --profile NAME".into()))?;
    let name = match source {
        ProfileSource::File(path) => return curve::read_function(path),
        ProfileSource::Named(name) => name.as_str(),
    };
    let grid = grid_for(spec)?;
    let bc = spec.bc();
    let u = match name {
        "linear" => NodalFunction::linear(grid, bc),
        "zero" => NodalFunction::constant(grid, 0.0).pinned(),
        "square" => NodalFunction::from_fn(grid, |x| x * x).pinned(),
        "hat" => InitPolicy::Hat.build(grid, bc, 0)?,
        "local-exp" => NodalFunction::from_fn(grid, local_exp_solution).pinned(),
        "ode-approx" => NodalFunction::new(grid, ode_approx_profile(&grid).u, None, None)?.pinned(),
        other => return Err(CliError::Spec(format!("unknown profile `{other}`"))),
    };
    Ok(u)
}

pub fn cmd_energy(spec: &ExperimentSpec, out: &mut dyn Write) -> Result<i32, CliError> {
    let integrand = spec.integrand();
    let u = load_profile(spec)?;
    let report = energy(&u, &integrand)?;
    say(out, format!("integrand = {}", report.integrand));
    say(out, format!("n = {}", report.n));
    say(out, format!("h = {:.16e}", u.grid().spacing()));
    say(out, format!("energy = {:.16e}", report.value));
    Ok(EXIT_OK)
}

fn summarize(out: &mut dyn Write, label: &str, r: &MinimizeResult) {
    say(
        out,
        format!(
            "{label}: n = {}, energy = {:.16e}, grad_norm = {:.3e}, iters = {}, converged = {}",
            r.u.grid().cells(),
            r.energy,
            r.grad_norm,
            r.iters,
            r.converged
        ),
    );
}

pub fn cmd_minimize(spec: &ExperimentSpec, out: &mut dyn Write) -> Result<i32, CliError> {
    let integrand = spec.integrand();
    let grid = grid_for(spec)?;
    let bc = spec.bc();
    let cfg = spec.solver_config(grid.cells())?;
    if !integrand.is_convex() {
        say(out, NON_CONVEX_WARNING);
    }
    let result = minimize(&integrand, grid, bc, &spec.init_policy(), &cfg)?;

    let dir = spec.out_dir();
    prepare_dir(&dir)?;
    let path = dir.join("minimizer.csv");
    curve::write_function(&path, &result.u)?;
    say(out, format!("integrand = {integrand}"));
    say(out, format!("bc = {},{}", bc.0, bc.1));
    say(out, format!("n = {}", grid.cells()));
    say(out, format!("energy = {:.16e}", result.energy));
    say(out, format!("grad_norm = {:.16e}", result.grad_norm));
    say(out, format!("iters = {}", result.iters));
    say(out, format!("converged = {}", result.converged));
    say(out, format!("curve = {}", path.display()));

    let nodes = grid.nodes();
    let mut overlay = None;
    if integrand == BuiltIn::QuadraticMass && bc == (0.0, 1.0) {
        let local: Vec<f64> = nodes.iter().map(|&x| local_exp_solution(x)).collect();
        let path = dir.join("local_exp.csv");
        curve::write_curve(&path, &nodes, &local)?;
        say(out, format!("overlay = {}", path.display()));
        overlay = Some(local);
    }
    if spec.svg {
        let mut series = vec![Series { label: "minimizer", x: &nodes, y: result.u.values() }];
        if let Some(local) = &overlay {
            series.push(Series { label: "local solution", x: &nodes, y: local });
        }
        let path = dir.join("minimizer.svg");
        write_svg(&path, &format!("minimizer, {integrand}, n = {}", grid.cells()), &series)?;
        say(out, format!("plot = {}", path.display()));
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_residual(spec: &ExperimentSpec, out: &mut dyn Write) -> Result<i32, CliError> {
    let integrand = spec.integrand();
    let u = load_profile(spec)?;
    let report = residual_report(&u, &integrand)?;
    say(out, format!("integrand = {integrand}"));
    say(out, format!("n = {}", u.grid().cells()));
    say(out, "x,residual");
    for (x, r) in report.x_points.iter().zip(&report.residuals) {
        say(out, format!("{x:.16e},{r:.16e}"));
    }
    say(out, format!("norm_l2 = {:.16e}", report.norm_l2));
    say(out, format!("norm_sup = {:.16e}", report.norm_sup));
    say(out, format!("norm_sup_with_boundary = {:.16e}", report.sup_including_boundary()));
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    OdeApprox,
    Problem1,
    QuadMass,
    Bolza,
}

impl FromStr for Figure {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fig1-ode-approx" => Ok(Figure::OdeApprox),
            "fig2-problem1" => Ok(Figure::Problem1),
            "fig3-quad-mass" => Ok(Figure::QuadMass),
            "fig4-bolza" => Ok(Figure::Bolza),
            other => Err(CliError::Spec(format!(
                "unknown figure `{other}` (expected fig1-ode-approx, fig2-problem1, fig3-quad-mass or fig4-bolza)"
            ))),
        }
    }
}

/// Samples used for the derivative curves of the first figure.
pub const FIG1_SAMPLES: usize = 512;
/// Amplitude of the seeded perturbation added to the zero start in the
/// extra two-well runs.
pub const FIG4_PERTURBATION: f64 = 1e-3;

struct Writer<'a> {
    dir: PathBuf,
    svg: bool,
    out: &'a mut dyn Write,
}

impl Writer<'_> {
    fn curve(&mut self, name: &str, x: &[f64], u: &[f64]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        curve::write_curve(&path, x, u)?;
        say(self.out, format!("wrote {}", path.display()));
        Ok(())
    }

    fn plot(&mut self, name: &str, title: &str, series: &[Series<'_>]) -> Result<(), CliError> {
        if self.svg {
            let path = self.dir.join(name);
            write_svg(&path, title, series)?;
            say(self.out, format!("wrote {}", path.display()));
        }
        Ok(())
    }
}

pub fn cmd_reproduce(
    figure: Figure,
    spec: &ExperimentSpec,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let dir = spec.out_dir();
    prepare_dir(&dir)?;
    let mut w = Writer { dir, svg: spec.svg, out };
    match figure {
        Figure::OdeApprox => reproduce_ode_approx(&mut w),
        Figure::Problem1 => reproduce_convex(&mut w, spec, BuiltIn::HalfSquare),
        Figure::QuadMass => reproduce_convex(&mut w, spec, BuiltIn::QuadraticMass),
        Figure::Bolza => reproduce_bolza(&mut w, spec),
    }
}

fn reproduce_ode_approx(w: &mut Writer<'_>) -> Result<i32, CliError> {
    let k = reference::normalize_k();
    say(w.out, format!("normalized k = {k:.12}"));
    say(w.out, format!("displayed k = 2, difference = {:.12}", k - 2.0));
    let xs: Vec<f64> = (0..FIG1_SAMPLES)
        .map(|i| i as f64 / (FIG1_SAMPLES - 1) as f64)
        .collect();
    let curve_for = |k: f64| {
        xs.iter()
            .map(|&x| ode_approx_derivative(x, k))
            .collect::<crate::Result<Vec<f64>>>()
    };
    let normalized = curve_for(k)?;
    let displayed = curve_for(2.0)?;
    w.curve("fig1_derivative_k_normalized.csv", &xs, &normalized)?;
    w.curve("fig1_derivative_k2.csv", &xs, &displayed)?;

    let grid = Grid1D::uniform(FIG1_SAMPLES - 1)?;
    let profile = ode_approx_profile(&grid);
    w.curve("fig1_profile.csv", &profile.x, &profile.u)?;
    w.plot(
        "fig1_derivative.svg",
        "approximate derivative k x^(2x) (1-x)^(2(1-x))",
        &[
            Series { label: "normalized k", x: &xs, y: &normalized },
            Series { label: "k = 2", x: &xs, y: &displayed },
        ],
    )?;
    Ok(EXIT_OK)
}

fn reproduce_convex(w: &mut Writer<'_>, spec: &ExperimentSpec, integrand: BuiltIn) -> Result<i32, CliError> {
    let grid = grid_for(spec)?;
    let cfg = spec.solver_config(grid.cells())?;
    let bc = (0.0, 1.0);
    let result = minimize(&integrand, grid, bc, &spec.init_policy(), &cfg)?;
    summarize(w.out, &integrand.to_string(), &result);
    let nodes = grid.nodes();
    let (prefix, overlay_name, overlay) = if integrand == BuiltIn::QuadraticMass {
        let local: Vec<f64> = nodes.iter().map(|&x| local_exp_solution(x)).collect();
        ("fig3", "fig3_local_exp.csv", local)
    } else {
        ("fig2", "fig2_ode_profile.csv", ode_approx_profile(&grid).u)
    };
    w.curve(&format!("{prefix}_minimizer.csv"), &nodes, result.u.values())?;
    w.curve(overlay_name, &nodes, &overlay)?;
    let distance = result
        .u
        .values()
        .iter()
        .zip(&overlay)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    say(w.out, format!("sup distance to overlay = {distance:.6e}"));

    let title = format!("{integrand}, n = {}", grid.cells());
    if prefix == "fig2" {
        let derivative = result.u.nodal_derivative();
        w.curve("fig2_derivative.csv", &nodes, &derivative)?;
        w.plot("fig2_minimizer.svg", &title, &[
            Series { label: "minimizer", x: &nodes, y: result.u.values() },
            Series { label: "ode approximation", x: &nodes, y: &overlay },
        ])?;
        w.plot("fig2_derivative.svg", "derivative of the minimizer", &[
            Series { label: "finite differences", x: &nodes, y: &derivative },
        ])?;
    } else {
        w.plot("fig3_minimizer.svg", &title, &[
            Series { label: "non-local minimizer", x: &nodes, y: result.u.values() },
            Series { label: "local solution", x: &nodes, y: &overlay },
        ])?;
    }
    Ok(if result.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn reproduce_bolza(w: &mut Writer<'_>, spec: &ExperimentSpec) -> Result<i32, CliError> {
    say(w.out, NON_CONVEX_WARNING);
    let integrand = BuiltIn::TwoWellBare;
    let bc = (0.0, 0.0);
    let coarse_n = spec.n.unwrap_or(64);
    let mut all_converged = true;
    for (label, init) in [
        ("zero", InitPolicy::Linear),
        ("perturbed", InitPolicy::Random { amplitude: FIG4_PERTURBATION }),
    ] {
        let mut levels = Vec::with_capacity(2);
        for n in [coarse_n, 2 * coarse_n] {
            let grid = Grid1D::uniform(n)?;
            let cfg = spec.solver_config(n)?;
            let result = minimize(&integrand, grid, bc, &init, &cfg)?;
            summarize(w.out, &format!("{label} start"), &result);
            w.curve(&format!("fig4_{label}_n{n}.csv"), &grid.nodes(), result.u.values())?;
            all_converged &= result.converged;
            levels.push(result);
        }
        let distance = levels[0].u.sup_distance(&levels[1].u);
        say(w.out, format!("{label} start: sup distance between n = {coarse_n} and n = {} = {distance:.6e}", 2 * coarse_n));
        let (xa, xb) = (levels[0].u.grid().nodes(), levels[1].u.grid().nodes());
        let (la, lb) = (format!("n = {coarse_n}"), format!("n = {}", 2 * coarse_n));
        w.plot(
            &format!("fig4_{label}.svg"),
            &format!("two-well without lower-order term, {label} start"),
            &[
                Series { label: &la, x: &xa, y: levels[0].u.values() },
                Series { label: &lb, x: &xb, y: levels[1].u.values() },
            ],
        )?;
    }
    Ok(if all_converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}
