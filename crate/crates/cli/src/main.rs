mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Bayesian multivariate probit for binary panel data.
#[derive(Debug, Parser)]
#[command(name = "mvprobit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a panel from known parameters.
    Simulate(SimulateArgs),
    /// Fit the model described by a JSON config.
    Fit(FitArgs),
    /// Posterior summaries, or an IACT comparison of two runs.
    Diagnose(DiagnoseArgs),
    /// Per-individual predictive probabilities of an outcome or bundle.
    Predict(PredictArgs),
    /// Conditional-independence graph of a precision matrix.
    Graph(GraphArgs),
    /// Draws and dependence summaries of the correlation prior.
    PriorStudy(PriorStudyArgs),
    /// Joint-distribution correctness test of the Gibbs sampler.
    GewekeTest(GewekeArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Use the survey posterior means with the survey codebook design.
    #[arg(long, conflicts_with = "truth", required_unless_present = "truth")]
    paper_params: bool,
    /// JSON file with `outcomes`, `covariates`, `beta`, `r_eps` and `sigma_alpha`.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Keep only the first D outcomes of the parameter set.
    #[arg(long)]
    outcomes: Option<usize>,
    #[arg(long, default_value_t = 162)]
    individuals: usize,
    #[arg(long, default_value_t = 16)]
    periods: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; defaults to $MVPROBIT_OUT or the current directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the sampler seed; replicate r uses seed + r.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Overrides `output_dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    /// Directory written by `fit`.
    #[arg(long)]
    draws: PathBuf,
    /// Second run of the same model; reports IACT ratios draws/compare.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Blocks to include, comma separated; default all stored.
    #[arg(long, value_delimiter = ',')]
    blocks: Vec<String>,
    #[arg(long, default_value = "A")]
    label: String,
    #[arg(long, default_value = "B")]
    compare_label: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "event", required = true, multiple = false)]
struct EventArgs {
    /// One-based outcomes; the event is "at least one of them is 1".
    #[arg(long, value_delimiter = ',', group = "event")]
    bundle: Option<Vec<usize>>,
    /// One-based outcomes; the event is "all of them are 1".
    #[arg(long, value_delimiter = ',', group = "event")]
    all_of: Option<Vec<usize>>,
    /// A single one-based outcome.
    #[arg(long, group = "event")]
    outcome: Option<usize>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    draws: PathBuf,
    #[command(flatten)]
    event: EventArgs,
    /// Observation-level covariates without the intercept; default all zero
    /// (the base case).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Error draws per posterior draw for bundle events.
    #[arg(long, default_value_t = 1000)]
    n_mc: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory; defaults to the draws directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GraphArgs {
    #[arg(long)]
    draws: PathBuf,
    /// R_inv or Sigma_alpha_inv.
    #[arg(long, default_value = "R_inv")]
    matrix: String,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Output directory; defaults to the draws directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PriorStudyArgs {
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Defaults to D + 1.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BetaPriorArg {
    Normal,
    Horseshoe,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SigmaPriorArg {
    Iw,
    Hiw,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Independent,
    Antithetic,
}

#[derive(Debug, Args)]
struct GewekeArgs {
    #[arg(long, value_enum, default_value = "normal")]
    beta_prior: BetaPriorArg,
    #[arg(long, value_enum, default_value = "iw")]
    sigma_prior: SigmaPriorArg,
    /// Move for both the coefficients and the random effects.
    #[arg(long, value_enum, default_value = "independent")]
    mode: ModeArg,
    #[arg(long, default_value_t = 100_000)]
    sweeps: usize,
    /// 1 (intercept only) or 2 (intercept and an alternating covariate).
    #[arg(long, default_value_t = 1)]
    covariates: usize,
    #[arg(long, default_value_t = 0.01)]
    x_scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Fit(a) => commands::fit(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Predict(a) => commands::predict(a),
        Command::Graph(a) => commands::graph(a),
        Command::PriorStudy(a) => commands::prior_study(a),
        Command::GewekeTest(a) => commands::geweke_test(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 2 } else { 1 })
        }
    }
}
