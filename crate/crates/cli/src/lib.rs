//! Command-line front end: argument model, dispatch and result persistence.
//!
//! Every run produces a [`RunRecord`] (config echo, toolkit version and
//! outputs) written as JSON, plus optional CSV tables. Floats are written
//! with 17 significant digits; wall time goes to stderr only, so identical
//! invocations produce byte-identical files.

mod commands;
pub mod inputs;
pub mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use commands::run;
pub use output::{to_json, write_record, RunRecord, Table};

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "rhcap", version, about = "Capacity, singular functions and Riemann-Hilbert solvers on the disk")]
#[command(arg_required_else_help = true)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Directory for JSON and CSV results; JSON goes to stdout when absent.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub out: Option<std::path::PathBuf>,
    /// Boundary grid size M (power of two).
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Largest Fekete point count.
    #[arg(long, global = true)]
    pub nmax: Option<usize>,
    /// Tolerance of the command's main audit.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Logarithmic capacity of interval and arc unions.
    #[command(subcommand)]
    Cap(CapCommand),
    /// Cantor-type sets and their singular functions.
    #[command(subcommand)]
    Cantor(CantorCommand),
    /// Antiderivatives with prescribed derivative off a small-capacity set.
    #[command(subcommand)]
    Lusin(LusinCommand),
    /// Poisson extension, probes and h^p norms.
    #[command(subcommand)]
    Dirichlet(DirichletCommand),
    /// The Riemann-Hilbert problem Re(conj(lambda) f) = phi.
    #[command(subcommand)]
    Rh(RhCommand),
    /// The same problem for quasiconformal f through a Beltrami solve.
    #[command(subcommand)]
    Beltrami(BeltramiCommand),
    /// Harmonic functions with null boundary limits.
    #[command(subcommand)]
    Dimension(DimensionCommand),
    /// List every library operation and the command that reaches it.
    Ops,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CapMethod {
    Transfinite,
    Potential,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapCommand {
    /// Capacity estimate of a set.
    Estimate {
        /// `interval:a,b[;a,b...]`, `arc:t1,t2[;...]` or `circle:r`.
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value = "transfinite")]
        method: CapMethod,
        /// Quadrature nodes of the potential method.
        #[arg(long, default_value_t = 256)]
        nodes: usize,
    },
    /// Capacity density of the complement of a set on the line.
    Density {
        #[arg(long)]
        set: String,
        #[arg(long)]
        x0: f64,
        #[arg(long)]
        eps: f64,
    },
    /// Logarithmic thinness of a set on the circle at a point.
    Thin {
        #[arg(long)]
        set: String,
        #[arg(long)]
        theta0: f64,
        /// Decreasing radii in (0, 1).
        #[arg(long, default_value = "0.5,0.25,0.125,0.0625")]
        deltas: String,
    },
    /// Fekete points of a set.
    Fekete {
        #[arg(long)]
        set: String,
        #[arg(long, default_value_t = 16)]
        n: usize,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CantorCommand {
    /// Stage intervals, the zero-capacity series and the singular function.
    Build {
        /// `const:c`, `dexp`, `dexp:shift` or `list:p1,p2,...`.
        #[arg(long)]
        pk: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Generation whose intervals are listed (at most 12).
        #[arg(long, default_value_t = 6)]
        stage: usize,
        /// Sample points of the singular function on [0, 1].
        #[arg(long, default_value_t = 1025)]
        samples: usize,
        /// Capacity estimates for generations 1..=n (0 skips them).
        #[arg(long, default_value_t = 0)]
        capacity_gens: usize,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LusinCommand {
    /// Continuous antiderivative with small sup norm and zero end values.
    Run {
        /// `builtin:const1|const:c|sign|noise:seed` or a CSV of cell values.
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// Grid cells (ignored for CSV input); defaults to 4096.
        #[arg(long)]
        cells: Option<usize>,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirichletCommand {
    /// Poisson extension with a Stolz probe and h^p norms.
    Solve {
        /// `builtin:cos|sin|step|const:c|noise:seed` or a CSV.
        #[arg(long)]
        phi: String,
        /// `theta,aperture`.
        #[arg(long, default_value = "0,0.7853981633974483")]
        probe: String,
        /// Radii of the h^p norms.
        #[arg(long, default_value = "0.5,0.9,0.95")]
        radii: String,
    },
    /// Harmonic function with prescribed limits off a small-capacity set.
    Gehring {
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value_t = 5)]
        stages: usize,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RhCommand {
    /// Solve and audit the boundary condition.
    Solve {
        /// `builtin:const[:a]|winding[:k]|step` or a CSV.
        #[arg(long)]
        lambda: String,
        #[arg(long)]
        phi: String,
        #[arg(long, default_value_t = 5)]
        stages: usize,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        /// Bound on the directly extended part of `phi e^beta`.
        #[arg(long)]
        clamp: Option<f64>,
        #[arg(long, default_value_t = 64)]
        audit: usize,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeltramiCommand {
    /// Solve the Beltrami equation and the composed boundary problem.
    Solve {
        /// `builtin:zero|radial:k|const:k` (the prefix is optional).
        #[arg(long)]
        mu: String,
        #[arg(long, default_value = "builtin:const")]
        lambda: String,
        #[arg(long, default_value = "builtin:cos")]
        phi: String,
        #[arg(long, default_value_t = 512)]
        lattice: usize,
        /// Stopping tolerance of the Neumann iteration.
        #[arg(long = "qc-tol", default_value_t = 1e-10)]
        qc_tol: f64,
        /// Keep every k-th lattice row and column in the JSON `h` table.
        #[arg(long, default_value_t = 16)]
        decimate: usize,
        #[arg(long, default_value_t = 64)]
        audit: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionCommand {
    /// Remainder bounds, independence witnesses and h^p growth.
    Demo {
        /// Head coefficients gamma_1, gamma_2, ...
        #[arg(long, allow_hyphen_values = true)]
        gamma: String,
        /// Truncation index of the remainder bound.
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value = "0.3,0.5,0.8")]
        r: String,
        /// Bound on the omitted tail sum |gamma_n|.
        #[arg(long, default_value_t = 0.0)]
        tail: f64,
    },
}
