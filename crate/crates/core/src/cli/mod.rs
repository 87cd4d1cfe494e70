//! The `nlvar` command line.
//!
//! ```text
//! nlvar energy|minimize|residual|reproduce [--config FILE] [--n INT]
//!       [--integrand NAME] [--bc a,b] [--seed INT] [--out DIR] [--svg]
//! ```
//!
//! Exit codes: 0 success, 2 bad specification, 3 numerical failure,
//! 4 minimization stopped at the iteration cap.

mod commands;
pub mod curve;
pub mod spec;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use commands::{cmd_energy, cmd_minimize, cmd_reproduce, cmd_residual, Figure};
pub use spec::{ExperimentSpec, ProfileSource};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Numeric(crate::Error),
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) | CliError::Io { .. } => EXIT_SPEC,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        use crate::Error as E;
        match e {
            E::InvalidGrid(_) | E::Parameter(_) | E::InvalidFunction(_) | E::Domain { .. } => {
                CliError::Spec(e.to_string())
            }
            E::NonFiniteEnergy { .. } | E::Singular(_) | E::LineSearch { .. } => CliError::Numeric(e),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "nlvar", about = "One-dimensional non-local variational problems", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the discrete energy of a curve or named profile.
    Energy(CommonArgs),
    /// Minimize the energy with fixed end values and write the minimizer.
    Minimize(CommonArgs),
    /// Print the principal-value optimality residual at every interior node.
    Residual(CommonArgs),
    /// Regenerate the curves behind one of the figures.
    Reproduce {
        /// fig1-ode-approx, fig2-problem1, fig3-quad-mass or fig4-bolza
        figure: String,
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// key = value experiment file; flags override its entries
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// power:P, half-square, quad-mass, two-well or two-well-bare
    #[arg(long)]
    pub integrand: Option<String>,
    /// problem1, quad-mass, bolza or bolza-bare
    #[arg(long)]
    pub problem: Option<String>,
    /// end values `a,b`
    #[arg(long, allow_hyphen_values = true)]
    pub bc: Option<String>,
    /// named profile: linear, zero, square, hat, local-exp, ode-approx
    #[arg(long)]
    pub profile: Option<String>,
    /// curve file (`x,u` CSV)
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// linear (alias zero), random or hat
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub svg: bool,
}

impl CommonArgs {
    /// Merges the optional config file with the flags.
    pub fn to_spec(&self) -> Result<ExperimentSpec, CliError> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                ExperimentSpec::from_config_str(&text)?
            }
            None => ExperimentSpec::default(),
        };
        let mut flags = ExperimentSpec {
            n: self.n,
            seed: self.seed,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            out: self.out.clone(),
            svg: self.svg,
            ..Default::default()
        };
        if let Some(name) = &self.integrand {
            flags.integrand = Some(name.parse().map_err(|e: crate::Error| CliError::Spec(e.to_string()))?);
        }
        if let Some(p) = &self.problem {
            flags.problem = Some(p.parse()?);
        }
        if let Some(bc) = &self.bc {
            flags.bc = Some(spec::parse_bc(bc)?);
        }
        if let Some(profile) = &self.profile {
            flags.profile = Some(spec::parse_profile(profile)?);
        }
        if let Some(path) = &self.input {
            flags.profile = Some(ProfileSource::File(path.clone()));
        }
        if let Some(init) = &self.init {
            flags.init = Some(init.parse()?);
        }
        Ok(base.overridden_by(flags))
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// human-readable output to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SPEC } else { EXIT_OK };
            let _ = write!(out, "{e}");
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Energy(args) => args.to_spec().and_then(|s| cmd_energy(&s, out)),
        Command::Minimize(args) => args.to_spec().and_then(|s| cmd_minimize(&s, out)),
        Command::Residual(args) => args.to_spec().and_then(|s| cmd_residual(&s, out)),
        Command::Reproduce { figure, common } => figure
            .parse::<Figure>()
            .and_then(|fig| Ok((fig, common.to_spec()?)))
            .and_then(|(fig, s)| cmd_reproduce(fig, &s, out)),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(out, "error: {e}");
            e.exit_code()
        }
    }
}
