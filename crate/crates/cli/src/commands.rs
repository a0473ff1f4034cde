use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use spa_core::data::{load_dataset, save_dataset, simulate_dataset, REFERENCE_EFFECTS};
use spa_core::emmap::EmConfig;
use spa_core::smc::{fixed_b_mcmc, read_run, run_sampler_with, write_run, FixedChainConfig, SmcOutput};
use spa_core::summary::{summarize, unconverged_map_steps, weighted_quantiles, write_spa, SummaryConfig};
use spa_core::{Dataset, Effects, GtPrior, SimSpec};

use crate::config::{parse_list, KeyValues, RunConfig, RunOverrides};
use crate::error::CliError;
use crate::plot;

pub const MANIFEST: &str = "manifest.txt";

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub scenario: Option<String>,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub block_size: Option<usize>,
    pub corr: Option<f64>,
    pub nonzero_index: Vec<usize>,
    pub nonzero_beta: Vec<f64>,
    pub random_count: Option<usize>,
    pub beta_scale: f64,
    pub variance: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub truth: Option<PathBuf>,
}

pub fn simulate(args: &SimulateArgs) -> Result<String, CliError> {
    let mut spec = match args.scenario.as_deref() {
        None | Some("a") | Some("A") => SimSpec::scenario_a(args.seed),
        Some("b") | Some("B") => SimSpec::scenario_b(args.seed),
        Some(other) => return Err(CliError::Usage(format!("unknown scenario `{other}` (expected a or b)"))),
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    if let Some(p) = args.p {
        spec.p = p;
        spec.block_size = spec.block_size.min(p);
    }
    if let Some(b) = args.block_size {
        spec.block_size = b;
    }
    if let Some(r) = args.corr {
        spec.within_block_corr = r;
    }
    if let Some(count) = args.random_count {
        if !args.nonzero_index.is_empty() {
            return Err(CliError::Usage("give either --nonzero-index or --random-count, not both".into()));
        }
        spec.effects = Effects::Random {
            count,
            scale: args.beta_scale,
            scale_is_variance: args.variance,
        };
    } else if !args.nonzero_index.is_empty() {
        let betas = if args.nonzero_beta.is_empty() {
            if args.nonzero_index.len() > REFERENCE_EFFECTS.len() {
                return Err(CliError::Usage(format!(
                    "give --nonzero-beta for each index (defaults cover at most {})",
                    REFERENCE_EFFECTS.len()
                )));
            }
            REFERENCE_EFFECTS[..args.nonzero_index.len()].to_vec()
        } else if args.nonzero_beta.len() == args.nonzero_index.len() {
            args.nonzero_beta.clone()
        } else {
            return Err(CliError::Usage("--nonzero-index and --nonzero-beta counts differ".into()));
        };
        spec.effects = Effects::Fixed(args.nonzero_index.iter().copied().zip(betas).collect());
    } else if args.p.is_some() {
        if let Effects::Fixed(list) = &spec.effects {
            if list.iter().any(|&(idx, _)| idx > spec.p) {
                return Err(CliError::Usage(
                    "scenario effect indices exceed --p; give --nonzero-index or --random-count".into(),
                ));
            }
        }
    }
    let (data, truth) = simulate_dataset(&spec)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    save_dataset(&data, &args.out)?;
    let truth_path = match &args.truth {
        Some(p) => p.clone(),
        None => args.out.with_file_name("truth.csv"),
    };
    let mut s = String::from("index,name,beta\n");
    for (j, b) in truth.iter().enumerate() {
        if *b != 0.0 {
            writeln!(s, "{},{},{}", j + 1, data.names()[j], b).unwrap();
        }
    }
    write_file(&truth_path, &s)?;
    let cases = data.y().iter().sum::<f64>() / data.n() as f64;
    Ok(format!(
        "n = {}, p = {}, case fraction = {:.4}\nwrote {} and {}\n",
        data.n(),
        data.p(),
        cases,
        args.out.display(),
        truth_path.display()
    ))
}

fn load_for_model(path: &Path, intercept: bool) -> Result<Dataset, CliError> {
    let data = load_dataset(path)?;
    if !data.is_standardized(1e-6) {
        eprintln!(
            "warning: predictors in {} are not standardized; results depend on column scaling",
            path.display()
        );
    }
    Ok(if intercept { data.with_intercept() } else { data })
}

pub struct RunArgs {
    pub out: PathBuf,
    pub config: Option<PathBuf>,
    pub from_manifest: Option<PathBuf>,
    pub overrides: RunOverrides,
    pub quiet: bool,
}

pub fn run(args: &RunArgs) -> Result<String, CliError> {
    let file = match (&args.config, &args.from_manifest) {
        (Some(_), Some(_)) => {
            return Err(CliError::Usage("--config and --from-manifest are mutually exclusive".into()))
        }
        (Some(p), None) | (None, Some(p)) => KeyValues::read(p)?,
        (None, None) => KeyValues::default(),
    };
    let config = RunConfig::resolve(&file, &args.overrides)?;
    let schedule = config.schedule()?;
    let data = load_for_model(&config.data, config.intercept)?;
    create_dir(&args.out)?;
    let total = schedule.len();
    let quiet = args.quiet;
    let output = run_sampler_with(&data, config.a, &schedule, &config.smc, |s| {
        if !quiet && (s.t % 25 == 0 || s.t == total || s.t == 1) {
            eprintln!(
                "step {:>4}/{total}  b = {:.5}  ESS = {:.1}  log Z_t/Z_1 = {:.4}  accept = {:.3}",
                s.t, s.b, s.ess, s.log_z_ratio_cum, s.acceptance_rate
            );
        }
    })?;
    write_run(&output, &args.out)?;
    write_file(&args.out.join(MANIFEST), &config.manifest())?;
    let last = output.steps.last().expect("at least one step");
    Ok(format!(
        "completed {} steps with {} particles; final log Z_T/Z_1 = {:.6}\nwrote {}\n",
        output.steps.len(),
        config.smc.particles,
        last.log_z_ratio_cum,
        args.out.display()
    ))
}

/// Settings recorded by `run`, for commands that consume a run directory.
fn run_manifest(dir: &Path) -> Result<RunConfig, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Input(format!("run directory {} does not exist", dir.display())));
    }
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Err(CliError::Input(format!("{} not found; is this a run directory?", path.display())));
    }
    RunConfig::resolve(&KeyValues::read(&path)?, &RunOverrides::default())
}

fn load_run(dir: &Path, data: Option<&Path>, a: Option<f64>) -> Result<(SmcOutput, Dataset), CliError> {
    let manifest = run_manifest(dir)?;
    let a = a.unwrap_or(manifest.a);
    let data_path = data.map(Path::to_path_buf).unwrap_or(manifest.data);
    let data = load_for_model(&data_path, manifest.intercept)?;
    let output = read_run(dir, a)?;
    if output.names != data.names() {
        return Err(CliError::Usage(format!(
            "columns of {} do not match the run's coefficients",
            data_path.display()
        )));
    }
    Ok((output, data))
}

pub struct SummarizeArgs {
    pub run: PathBuf,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub a: Option<f64>,
    pub deltas: String,
    pub level: f64,
    pub kde_points: usize,
}

pub fn summarize_cmd(args: &SummarizeArgs) -> Result<String, CliError> {
    let (output, data) = load_run(&args.run, args.data.as_deref(), args.a)?;
    let config = SummaryConfig {
        deltas: parse_list(&args.deltas)?,
        level: args.level,
        kde_points: args.kde_points,
        em: EmConfig::default(),
    };
    let result = summarize(&output, &data, &config)?;
    let out = args.out.clone().unwrap_or_else(|| args.run.join("summary"));
    write_spa(&result, &out)?;
    let mut report = spa_core::summary::report(&result);
    let bad = unconverged_map_steps(&result);
    if !bad.is_empty() {
        writeln!(report, "\nEM did not converge at {} step(s); first at t = {}", bad.len(), bad[0].0).unwrap();
    }
    writeln!(report, "\nwrote summaries to {}", out.display()).unwrap();
    Ok(report)
}

pub struct McmcArgs {
    pub data: Option<PathBuf>,
    pub run: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub step_sd: f64,
    pub seed: u64,
    pub level: f64,
    pub intercept: bool,
}

pub fn mcmc_check(args: &McmcArgs) -> Result<String, CliError> {
    let run = match &args.run {
        Some(dir) => Some(load_run(dir, args.data.as_deref(), args.a)?),
        None => None,
    };
    let (data, a) = match &run {
        Some((output, data)) => (data.clone(), output.a),
        None => {
            let path = args
                .data
                .as_ref()
                .ok_or_else(|| CliError::Usage("give --data or --run".into()))?;
            let a = args.a.ok_or_else(|| CliError::Usage("give --a or --run".into()))?;
            (load_for_model(path, args.intercept)?, a)
        }
    };
    let b = match (args.b, &run) {
        (Some(b), _) => b,
        (None, Some((output, _))) => output.snapshots[(output.snapshots.len() - 1) / 2].b,
        (None, None) => return Err(CliError::Usage("give --b or --run".into())),
    };
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(CliError::Usage("--level must lie in (0, 1)".into()));
    }
    let prior = GtPrior::from_rate(a, b)?;
    let chain = fixed_b_mcmc(
        &data,
        &prior,
        &FixedChainConfig {
            samples: args.iters,
            burn_in: args.burn_in,
            thin: args.thin,
            step_sd: args.step_sd,
            seed: args.seed,
        },
    )?;
    let out = match (&args.out, &args.run) {
        (Some(o), _) => o.clone(),
        (None, Some(r)) => r.join("mcmc_check"),
        (None, None) => return Err(CliError::Usage("give --out".into())),
    };
    create_dir(&out)?;
    let names = data.names();
    let mut s = names.join(",");
    s.push('\n');
    for beta in &chain.samples {
        let row: Vec<String> = beta.iter().map(|v| v.to_string()).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    write_file(&out.join("samples.csv"), &s)?;

    let tail = (1.0 - args.level) / 2.0;
    let qs = [tail, 0.5, 1.0 - tail];
    let uniform = vec![1.0 / chain.samples.len() as f64; chain.samples.len()];
    let mcmc_q: Vec<Vec<f64>> = (0..names.len())
        .map(|j| weighted_quantiles(&chain.coefficient(j), &uniform, &qs))
        .collect::<Result<_, _>>()?;

    let mut report = String::new();
    writeln!(
        report,
        "fixed-scale chain: a = {a}, b = {b}, c = {:.6}, {} samples, acceptance {:.3}",
        b / a,
        chain.samples.len(),
        chain.acceptance_rate
    )
    .unwrap();
    let mut table = String::new();
    match &run {
        Some((output, _)) => {
            let snap = output
                .snapshots
                .iter()
                .min_by(|x, y| (x.b.ln() - b.ln()).abs().total_cmp(&(y.b.ln() - b.ln()).abs()))
                .expect("run has snapshots");
            writeln!(report, "compared with sampler snapshot t = {} (b = {})", snap.t, snap.b).unwrap();
            table.push_str("coefficient,smc_median,mcmc_median,median_diff,smc_lower,mcmc_lower,smc_upper,mcmc_upper,interval_diff\n");
            writeln!(
                report,
                "{:<16} {:>10} {:>10} {:>10} {:>10}",
                "coefficient", "smc med", "mcmc med", "|diff|", "max |end|"
            )
            .unwrap();
            for j in 0..names.len() {
                let sq = weighted_quantiles(&snap.coefficient(j), &snap.weights, &qs)?;
                let mq = &mcmc_q[j];
                let dmed = (sq[1] - mq[1]).abs();
                let dint = (sq[0] - mq[0]).abs().max((sq[2] - mq[2]).abs());
                writeln!(
                    table,
                    "{},{},{},{},{},{},{},{},{}",
                    names[j], sq[1], mq[1], dmed, sq[0], mq[0], sq[2], mq[2], dint
                )
                .unwrap();
                writeln!(
                    report,
                    "{:<16} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                    names[j], sq[1], mq[1], dmed, dint
                )
                .unwrap();
            }
            write_file(&out.join("comparison.csv"), &table)?;
        }
        None => {
            table.push_str("coefficient,median,lower,upper\n");
            writeln!(report, "{:<16} {:>10} {:>10} {:>10}", "coefficient", "median", "lower", "upper").unwrap();
            for j in 0..names.len() {
                let q = &mcmc_q[j];
                writeln!(table, "{},{},{},{}", names[j], q[1], q[0], q[2]).unwrap();
                writeln!(report, "{:<16} {:>10.4} {:>10.4} {:>10.4}", names[j], q[1], q[0], q[2]).unwrap();
            }
            write_file(&out.join("quantiles.csv"), &table)?;
        }
    }
    writeln!(report, "wrote {}", out.display()).unwrap();
    Ok(report)
}

pub struct PlotArgs {
    pub summary: PathBuf,
    pub out: Option<PathBuf>,
    pub kind: String,
    pub delta: Option<String>,
}

pub fn plot_cmd(args: &PlotArgs) -> Result<String, CliError> {
    if !args.summary.is_dir() {
        return Err(CliError::Input(format!("summary directory {} does not exist", args.summary.display())));
    }
    let out = args.out.clone().unwrap_or_else(|| args.summary.join("plots"));
    create_dir(&out)?;
    let (spa, bands, marginal) = match args.kind.as_str() {
        "all" => (true, true, true),
        "spa" => (true, false, false),
        "bands" => (false, true, false),
        "marginal" => (false, false, true),
        other => {
            return Err(CliError::Usage(format!(
                "unknown plot kind `{other}` (expected all, spa, bands or marginal)"
            )))
        }
    };
    let mut written = Vec::new();
    if spa {
        let path = out.join("spa.svg");
        plot::write(&path, &plot::spa_plot(&args.summary, args.delta.as_deref())?)?;
        written.push(path);
    }
    if bands {
        let dir = out.join("bands");
        create_dir(&dir)?;
        for (name, svg) in plot::band_plots(&args.summary)? {
            let safe: String = name
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
                .collect();
            let path = dir.join(format!("{safe}.svg"));
            plot::write(&path, &svg)?;
            written.push(path);
        }
    }
    if marginal {
        let path = out.join("marginal.svg");
        plot::write(&path, &plot::marginal_plot(&args.summary)?)?;
        written.push(path);
    }
    Ok(format!("wrote {} plot(s) to {}\n", written.len(), out.display()))
}
