mod commands;
mod config;
mod error;
mod plot;
mod svg;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{McmcArgs, PlotArgs, RunArgs, SimulateArgs, SummarizeArgs};
use config::RunOverrides;
use error::CliError;

/// Sparsity-path analysis for logistic regression under generalized-t priors.
#[derive(Parser)]
#[command(name = "spa", version)]
struct Cli {
    /// Worker threads for the particle moves (default: all cores).
    #[arg(long, global = true, env = "SPA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an LD-blocked genotype dataset with logistic phenotypes.
    Simulate(SimulateCli),
    /// Run the sampler over the scale schedule.
    Run(RunCli),
    /// Compute path summaries from a run directory.
    Summarize(SummarizeCli),
    /// Fixed-scale MCMC, optionally compared with a sampler run.
    McmcCheck(McmcCli),
    /// Render SVG plots from a summary directory.
    Plot(PlotCli),
}

#[derive(Args)]
struct SimulateCli {
    /// Reference design to start from: a (500 x 50) or b (1859 x 184).
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    /// Markers per correlated block.
    #[arg(long)]
    block_size: Option<usize>,
    /// Latent within-block correlation in [0, 1).
    #[arg(long)]
    corr: Option<f64>,
    /// 1-based index of a true effect (repeatable).
    #[arg(long)]
    nonzero_index: Vec<usize>,
    /// Coefficient for the matching --nonzero-index (repeatable).
    #[arg(long, allow_hyphen_values = true)]
    nonzero_beta: Vec<f64>,
    /// Draw this many effects at random positions instead.
    #[arg(long)]
    random_count: Option<usize>,
    /// Spread of random effects: a standard deviation, or a variance with --variance.
    #[arg(long, default_value_t = 0.2)]
    beta_scale: f64,
    #[arg(long)]
    variance: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dataset CSV to write.
    #[arg(long)]
    out: PathBuf,
    /// Truth CSV (default: truth.csv next to the dataset).
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct RunCli {
    /// Dataset CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// key = value settings file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reproduce a previous run from its manifest; flags take precedence.
    #[arg(long)]
    from_manifest: Option<PathBuf>,
    /// Prior degrees of freedom.
    #[arg(long)]
    a: Option<f64>,
    /// First inverse-gamma rate of the schedule.
    #[arg(long)]
    b1: Option<f64>,
    /// Geometric ratio of the schedule.
    #[arg(long)]
    rho: Option<f64>,
    /// Number of schedule steps.
    #[arg(long = "T", visible_alias = "steps")]
    steps: Option<usize>,
    /// Add an unpenalized intercept column.
    #[arg(long)]
    intercept: bool,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(long)]
    step_sd: Option<f64>,
    #[arg(long)]
    ess_frac: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    burn_in: Option<usize>,
    #[arg(long)]
    init_thin: Option<usize>,
    /// Keep full particle sets every k-th step only.
    #[arg(long)]
    snapshot_every: Option<usize>,
    /// Suppress progress lines.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct SummarizeCli {
    /// Run directory written by `spa run`.
    #[arg(long)]
    run: PathBuf,
    /// Output directory (default: <run>/summary).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Dataset CSV (default: the one recorded in the manifest).
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    /// Comma-separated concentration half-widths; the first is the headline.
    #[arg(long, default_value = "0.1,0.05")]
    deltas: String,
    /// Central credible level.
    #[arg(long, default_value_t = 0.9)]
    level: f64,
    /// Grid size of the density estimates at the scale mode.
    #[arg(long, default_value_t = 201)]
    kde_points: usize,
}

#[derive(Args)]
struct McmcCli {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Sampler run to compare against.
    #[arg(long)]
    run: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    /// Inverse-gamma rate (default with --run: the middle retained step).
    #[arg(long)]
    b: Option<f64>,
    /// Kept samples.
    #[arg(long, default_value_t = 100_000)]
    iters: usize,
    #[arg(long, default_value_t = 2000)]
    burn_in: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 0.5)]
    step_sd: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.9)]
    level: f64,
    /// Add an unpenalized intercept (without --run).
    #[arg(long)]
    intercept: bool,
}

#[derive(Args)]
struct PlotCli {
    /// Summary directory written by `spa summarize`.
    #[arg(long)]
    summary: PathBuf,
    /// Output directory (default: <summary>/plots).
    #[arg(long)]
    out: Option<PathBuf>,
    /// all, spa, bands or marginal.
    #[arg(long, default_value = "all")]
    kind: String,
    /// Concentration half-width for the path plot (default 0.1 when present).
    #[arg(long)]
    delta: Option<String>,
}

fn dispatch(cli: Cli) -> Result<String, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    match cli.command {
        Command::Simulate(a) => commands::simulate(&SimulateArgs {
            scenario: a.scenario,
            n: a.n,
            p: a.p,
            block_size: a.block_size,
            corr: a.corr,
            nonzero_index: a.nonzero_index,
            nonzero_beta: a.nonzero_beta,
            random_count: a.random_count,
            beta_scale: a.beta_scale,
            variance: a.variance,
            seed: a.seed,
            out: a.out,
            truth: a.truth,
        }),
        Command::Run(a) => commands::run(&RunArgs {
            out: a.out,
            config: a.config,
            from_manifest: a.from_manifest,
            quiet: a.quiet,
            overrides: RunOverrides {
                data: a.data,
                a: a.a,
                b1: a.b1,
                rho: a.rho,
                steps: a.steps,
                intercept: a.intercept,
                particles: a.particles,
                cycles: a.cycles,
                step_sd: a.step_sd,
                ess_frac: a.ess_frac,
                seed: a.seed,
                burn_in: a.burn_in,
                init_thin: a.init_thin,
                snapshot_every: a.snapshot_every,
            },
        }),
        Command::Summarize(a) => commands::summarize_cmd(&SummarizeArgs {
            run: a.run,
            out: a.out,
            data: a.data,
            a: a.a,
            deltas: a.deltas,
            level: a.level,
            kde_points: a.kde_points,
        }),
        Command::McmcCheck(a) => commands::mcmc_check(&McmcArgs {
            data: a.data,
            run: a.run,
            out: a.out,
            a: a.a,
            b: a.b,
            iters: a.iters,
            burn_in: a.burn_in,
            thin: a.thin,
            step_sd: a.step_sd,
            seed: a.seed,
            level: a.level,
            intercept: a.intercept,
        }),
        Command::Plot(a) => commands::plot_cmd(&PlotArgs {
            summary: a.summary,
            out: a.out,
            kind: a.kind,
            delta: a.delta,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(message) => {
            print!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
