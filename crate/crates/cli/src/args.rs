use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "moyal", version, about = "Metric computations on the Moyal plane")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Length scale λ_P.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub lambda_p: f64,
    /// Truncation N for operator evaluations.
    #[arg(long, global = true, env = "MOYAL_TRUNCATION", default_value_t = 32)]
    pub truncation: usize,
    /// Comma-separated, strictly increasing truncations; overrides --truncation.
    #[arg(long, global = true, value_delimiter = ',')]
    pub schedule: Option<Vec<usize>>,
    /// Convergence tolerance between successive truncations.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

impl Global {
    pub fn schedule(&self) -> Vec<usize> {
        self.schedule.clone().unwrap_or_else(|| vec![self.truncation])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest distinct eigenvalues of the length operator L.
    Spectrum {
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
    /// All metrics between two states.
    Compare(CompareArgs),
    /// Relative gap between d_D and d'_L as the upper level grows.
    Ratio(RatioArgs),
    /// Geodesic residuals of l₀, l₁, l₂, l₃ and the shift structure of ∂_z l₀.
    Geodesic,
    /// Doubled triple at the level-matched Λ, checked against d_L².
    Double(DoubleArgs),
    /// Grid star-product checks on named test functions.
    Star(StarArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    /// diagonal-lp for number-diagonal pairs, interior-point otherwise.
    Auto,
    DiagonalLp,
    ProjectedAscent,
    InteriorPoint,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
    pub solver: SolverChoice,
    /// Truncation used by the solver (the general methods scale as N⁶).
    #[arg(long, default_value_t = 20)]
    pub solver_truncation: usize,
    /// Write the solver objective per iteration as CSV.
    #[arg(long)]
    pub solver_trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// First state: eig:m | coh:m:k1,k2 | sph:m,n:x,y,z | vec:c0,c1,...
    pub state1: String,
    pub state2: String,
    /// Internal scale Λ of the doubled triple; default matches the first state's level.
    #[arg(long)]
    pub lambda_cap: Option<f64>,
    /// Tolerance for numeric-vs-closed-form checks.
    #[arg(long, default_value_t = 1e-6)]
    pub check_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    #[arg(long, default_value_t = 50)]
    pub n_max: usize,
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    pub kappa: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', num_args = 2, allow_hyphen_values = true)]
    pub kappa_tilde: Option<Vec<f64>>,
    /// Opposite sphere states at heights ±z instead of translated eigenstates.
    #[arg(long, allow_hyphen_values = true)]
    pub sphere_z: Option<f64>,
    /// Check: the last |ratio| (or |ratio − target| for spheres) is below this.
    #[arg(long)]
    pub expect_below: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DoubleArgs {
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// Override Λ (otherwise fixed so that 1/Λ² = 4E_m).
    #[arg(long)]
    pub lambda_cap: Option<f64>,
    /// Also recompute d_D with the solver and check the identity with it.
    #[arg(long)]
    pub with_solver: bool,
    #[arg(long, default_value_t = 1e-10)]
    pub check_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub solver_check_tol: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StarCheck {
    Associativity,
    Projector,
    Commutator,
    Limit,
    Tracial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridFormat {
    Csv,
    Binary,
}

#[derive(Debug, Args)]
pub struct StarArgs {
    /// Checks to run; default: associativity, projector, limit, tracial.
    #[arg(long = "check", value_enum)]
    pub checks: Vec<StarCheck>,
    /// Test functions: one | zero | ground | x1 | x2 | gauss:a,b,v
    #[arg(long, default_value = "gauss:0.5,0,1", allow_hyphen_values = true)]
    pub f: String,
    #[arg(long, default_value = "gauss:0,-0.7,1.3", allow_hyphen_values = true)]
    pub g: String,
    #[arg(long, default_value = "gauss:-0.4,0.3,0.8", allow_hyphen_values = true)]
    pub h: String,
    /// Half-width of the grid; default 12√θ (32√θ for the commutator check).
    #[arg(long)]
    pub extent: Option<f64>,
    /// Points per axis (power of two, at least 64).
    #[arg(long, default_value_t = 128)]
    pub resolution: usize,
    /// Noncommutativity θ; default λ_P².
    #[arg(long)]
    pub theta: Option<f64>,
    /// θ sequence for the commutative-limit check.
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.25,0.125")]
    pub thetas: Vec<f64>,
    #[arg(long, default_value_t = 1e-6)]
    pub star_tol: f64,
    /// Write f⋆g on the grid to this file.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = GridFormat::Csv)]
    pub grid_format: GridFormat,
}
