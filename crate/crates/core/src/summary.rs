//! Path statistics over the sampler output: MAP path, weighted quantiles
//! and absolute medians, concentration away from zero, the posterior over
//! the scale, the scale-marginalized pooled posterior and weighted kernel
//! density estimates.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::emmap::{em_map, EmConfig};
use crate::error::{Result, SpaError};
use crate::model::{log_likelihood, log_prior, log_posterior_unnorm, GtPrior};
use crate::smc::{ess, SmcOutput, Snapshot};

fn check_weights(values: &[f64], weights: &[f64]) -> Result<()> {
    if values.len() != weights.len() {
        return Err(SpaError::DimensionMismatch {
            expected: values.len(),
            actual: weights.len(),
        });
    }
    if values.is_empty() {
        return Err(SpaError::invalid("empty sample"));
    }
    Ok(())
}

/// Smallest value whose cumulative weight reaches `q` (left-continuous
/// generalized inverse of the weighted empirical CDF, no interpolation).
pub fn weighted_quantile(values: &[f64], weights: &[f64], q: f64) -> Result<f64> {
    Ok(weighted_quantiles(values, weights, &[q])?[0])
}

/// Several quantiles from one sort.
pub fn weighted_quantiles(values: &[f64], weights: &[f64], qs: &[f64]) -> Result<Vec<f64>> {
    check_weights(values, weights)?;
    if let Some(q) = qs.iter().find(|q| !(**q > 0.0 && **q < 1.0)) {
        return Err(SpaError::invalid(format!("quantile level {q} not in (0, 1)")));
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(qs.len());
    for &q in qs {
        let mut cum = 0.0;
        let mut chosen = values[order[order.len() - 1]];
        for &i in &order {
            cum += weights[i] / total;
            if cum >= q {
                chosen = values[i];
                break;
            }
        }
        out.push(chosen);
    }
    Ok(out)
}

/// `1 − Pr(β ∈ (−Δ, Δ))` under the weighted sample.
pub fn concentration(samples: &[f64], weights: &[f64], delta: f64) -> Result<f64> {
    check_weights(samples, weights)?;
    if !(delta > 0.0) {
        return Err(SpaError::invalid("concentration band must be > 0"));
    }
    let total: f64 = weights.iter().sum();
    let inside: f64 = samples
        .iter()
        .zip(weights)
        .filter(|(x, _)| x.abs() < delta)
        .map(|(_, w)| w)
        .sum();
    Ok((1.0 - inside / total).max(0.0))
}

fn weighted_mean(samples: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    samples.iter().zip(weights).map(|(x, w)| x * w).sum::<f64>() / total
}

/// `|median|` of every coefficient at every retained step.
pub fn abs_median_path(output: &SmcOutput) -> Result<Vec<Vec<f64>>> {
    output
        .snapshots
        .iter()
        .map(|snap| {
            (0..output.names.len())
                .map(|j| Ok(weighted_quantile(&snap.coefficient(j), &snap.weights, 0.5)?.abs()))
                .collect()
        })
        .collect()
}

/// Discrete posterior over the scale grid `c_t = b_t / a` under a uniform
/// prior on `log b`.
#[derive(Debug, Clone, PartialEq)]
pub struct CPosterior {
    pub t: Vec<usize>,
    pub c: Vec<f64>,
    pub mass: Vec<f64>,
    /// Position of the mode in the vectors above.
    pub mode: usize,
}

impl CPosterior {
    pub fn mode_t(&self) -> usize {
        self.t[self.mode]
    }

    pub fn mode_c(&self) -> f64 {
        self.c[self.mode]
    }
}

/// Masses proportional to `Z_t / Z_1`.
pub fn c_posterior(output: &SmcOutput) -> Result<CPosterior> {
    if output.steps.is_empty() {
        return Err(SpaError::Missing("no steps in sampler output".into()));
    }
    let logs: Vec<f64> = output.steps.iter().map(|s| s.log_z_ratio_cum).collect();
    if logs.iter().any(|l| !l.is_finite()) {
        return Err(SpaError::Missing("non-finite evidence ratio".into()));
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = raw.iter().sum();
    let mass: Vec<f64> = raw.iter().map(|r| r / sum).collect();
    let mode = mass
        .iter()
        .enumerate()
        .fold(0, |best, (k, &m)| if m > mass[best] { k } else { best });
    Ok(CPosterior {
        t: output.steps.iter().map(|s| s.t).collect(),
        c: output.steps.iter().map(|s| s.b / output.a).collect(),
        mass,
        mode,
    })
}

/// Particles from every step, each weighted by the scale posterior mass of
/// its step times its within-step weight.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledPosterior {
    /// `samples[j]` holds every pooled draw of coefficient `j`.
    pub samples: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub fn pooled_posterior(output: &SmcOutput) -> Result<PooledPosterior> {
    if !output.has_all_snapshots() {
        return Err(SpaError::Missing(
            "pooled posterior needs particle snapshots for every step; rerun without snapshot thinning".into(),
        ));
    }
    let cpost = c_posterior(output)?;
    let p = output.names.len();
    let total: usize = output.snapshots.iter().map(|s| s.weights.len()).sum();
    let mut samples = vec![Vec::with_capacity(total); p];
    let mut weights = Vec::with_capacity(total);
    for (snap, &m) in output.snapshots.iter().zip(&cpost.mass) {
        for (beta, &w) in snap.betas.iter().zip(&snap.weights) {
            for (col, &b) in samples.iter_mut().zip(beta) {
                col.push(b);
            }
            weights.push(m * w);
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= sum;
    }
    Ok(PooledPosterior { samples, weights })
}

/// One point of the MAP path.
#[derive(Debug, Clone, PartialEq)]
pub struct MapStep {
    pub t: usize,
    pub b: f64,
    pub beta: Vec<f64>,
    pub log_post: f64,
    /// EM met its tolerances for the chosen candidate.
    pub converged: bool,
    /// The chosen candidate was seeded at the previous step's MAP.
    pub from_previous: bool,
}

fn best_particle(snap: &Snapshot, data: &Dataset, prior: &GtPrior) -> Result<usize> {
    let scores: Vec<f64> = match &snap.loglik {
        Some(ll) => snap
            .betas
            .iter()
            .zip(ll)
            .map(|(b, l)| l + log_prior(data, b, prior))
            .collect(),
        None => snap
            .betas
            .par_iter()
            .map(|b| log_posterior_unnorm(data, b, prior))
            .collect::<Result<_>>()?,
    };
    Ok(scores
        .iter()
        .enumerate()
        .fold(0, |best, (k, &s)| if s > scores[best] { k } else { best }))
}

/// For each retained step, run EM from the highest-density particle and
/// from the previous step's MAP; keep the candidate with the higher log
/// posterior (the previous-MAP candidate on ties).
pub fn map_path(output: &SmcOutput, data: &Dataset, em: &EmConfig) -> Result<Vec<MapStep>> {
    if data.p() != output.names.len() {
        return Err(SpaError::DimensionMismatch {
            expected: output.names.len(),
            actual: data.p(),
        });
    }
    let a = output.a;
    let from_best: Vec<(GtPrior, crate::emmap::EmFit)> = output
        .snapshots
        .par_iter()
        .map(|snap| {
            let prior = GtPrior::from_rate(a, snap.b)?;
            let k = best_particle(snap, data, &prior)?;
            Ok((prior, em_map(data, &prior, &snap.betas[k], em)?))
        })
        .collect::<Result<_>>()?;
    let mut path: Vec<MapStep> = Vec::with_capacity(from_best.len());
    for (snap, (prior, best)) in output.snapshots.iter().zip(from_best) {
        let mut chosen = MapStep {
            t: snap.t,
            b: snap.b,
            converged: best.converged && best.inner_converged,
            log_post: best.log_post,
            beta: best.beta,
            from_previous: false,
        };
        if let Some(prev) = path.last() {
            let cont = em_map(data, &prior, &prev.beta, em)?;
            if cont.log_post >= chosen.log_post {
                chosen = MapStep {
                    t: snap.t,
                    b: snap.b,
                    converged: cont.converged && cont.inner_converged,
                    log_post: cont.log_post,
                    beta: cont.beta,
                    from_previous: true,
                };
            }
        }
        path.push(chosen);
    }
    Ok(path)
}

/// Gaussian KDE with weighted Silverman bandwidth `1.06 σ_w N_eff^(−1/5)`.
///
/// If the weighted spread is zero (all weight on one value) the unweighted
/// spread of the sample is used instead.
pub fn weighted_kde(samples: &[f64], weights: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let h = kde_bandwidth(samples, weights)?;
    let total: f64 = weights.iter().sum();
    let norm = 1.0 / (h * (2.0 * std::f64::consts::PI).sqrt());
    Ok(grid
        .iter()
        .map(|&g| {
            samples
                .iter()
                .zip(weights)
                .map(|(&x, &w)| {
                    let z = (g - x) / h;
                    w * (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
                / total
        })
        .collect())
}

pub fn kde_bandwidth(samples: &[f64], weights: &[f64]) -> Result<f64> {
    check_weights(samples, weights)?;
    let first = samples[0];
    if samples.iter().all(|&x| x == first) {
        return Err(SpaError::invalid("density estimate needs at least two distinct samples"));
    }
    let total: f64 = weights.iter().sum();
    let normalized: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mean = weighted_mean(samples, &normalized);
    let var: f64 = samples
        .iter()
        .zip(&normalized)
        .map(|(x, w)| w * (x - mean) * (x - mean))
        .sum();
    let sd = if var > 0.0 {
        var.sqrt()
    } else {
        let uniform = vec![1.0 / samples.len() as f64; samples.len()];
        let m = weighted_mean(samples, &uniform);
        (samples.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / samples.len() as f64).sqrt()
    };
    Ok(1.06 * sd * ess(&normalized).powf(-0.2))
}

/// Summary settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryConfig {
    /// Concentration half-widths; the first is the headline value.
    pub deltas: Vec<f64>,
    /// Central credible level, e.g. 0.9.
    pub level: f64,
    pub kde_points: usize,
    pub em: EmConfig,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        SummaryConfig {
            deltas: vec![0.1, 0.05],
            level: 0.9,
            kde_points: 201,
            em: EmConfig::default(),
        }
    }
}

/// Per-step, per-coefficient statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct StepStats {
    pub t: usize,
    pub b: f64,
    pub c: f64,
    pub map: Vec<f64>,
    pub map_converged: bool,
    pub median: Vec<f64>,
    pub abs_median: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// One vector per entry of [`SummaryConfig::deltas`].
    pub concentration: Vec<Vec<f64>>,
    pub log_z_ratio: f64,
}

/// Scale-marginalized summary of one coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledCoefficient {
    pub name: String,
    /// MAP at the scale-posterior mode.
    pub map: f64,
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
    pub concentration: Vec<f64>,
}

/// Everything emitted by the summarize stage.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaResult {
    pub names: Vec<String>,
    pub a: f64,
    pub deltas: Vec<f64>,
    pub level: f64,
    pub steps: Vec<StepStats>,
    pub c_posterior: CPosterior,
    pub pooled: Vec<PooledCoefficient>,
    /// KDE grid and per-coefficient densities at the scale mode.
    pub density_grid: Vec<f64>,
    pub densities: Vec<Vec<f64>>,
}

impl SpaResult {
    /// Statistics at the scale-posterior mode.
    pub fn at_mode(&self) -> &StepStats {
        let t = self.c_posterior.mode_t();
        self.steps.iter().find(|s| s.t == t).expect("mode step retained")
    }

    /// Coefficient indices ordered by decreasing pooled headline concentration.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.pooled.len()).collect();
        order.sort_by(|&i, &j| self.pooled[j].concentration[0].total_cmp(&self.pooled[i].concentration[0]));
        order
    }
}

fn step_stats(snap: &Snapshot, a: f64, log_z: f64, p: usize, config: &SummaryConfig) -> Result<StepStats> {
    let tail = (1.0 - config.level) / 2.0;
    let mut stats = StepStats {
        t: snap.t,
        b: snap.b,
        c: snap.b / a,
        map: vec![],
        map_converged: false,
        median: Vec::with_capacity(p),
        abs_median: Vec::with_capacity(p),
        mean: Vec::with_capacity(p),
        lower: Vec::with_capacity(p),
        upper: Vec::with_capacity(p),
        concentration: vec![Vec::with_capacity(p); config.deltas.len()],
        log_z_ratio: log_z,
    };
    for j in 0..p {
        let xs = snap.coefficient(j);
        let q = weighted_quantiles(&xs, &snap.weights, &[tail, 0.5, 1.0 - tail])?;
        stats.lower.push(q[0]);
        stats.median.push(q[1]);
        stats.abs_median.push(q[1].abs());
        stats.upper.push(q[2]);
        stats.mean.push(weighted_mean(&xs, &snap.weights));
        for (v, &d) in stats.concentration.iter_mut().zip(&config.deltas) {
            v.push(concentration(&xs, &snap.weights, d)?);
        }
    }
    Ok(stats)
}

/// Compute the full set of path statistics. Requires particle snapshots at
/// every step.
pub fn summarize(output: &SmcOutput, data: &Dataset, config: &SummaryConfig) -> Result<SpaResult> {
    if config.deltas.is_empty() {
        return Err(SpaError::invalid("need at least one concentration band"));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(SpaError::invalid("credible level must lie in (0, 1)"));
    }
    if config.kde_points < 2 {
        return Err(SpaError::invalid("KDE grid needs at least two points"));
    }
    if !output.has_all_snapshots() {
        return Err(SpaError::Missing(
            "summaries need particle snapshots for every step; rerun without snapshot thinning".into(),
        ));
    }
    let p = output.names.len();
    let cpost = c_posterior(output)?;
    let mut steps: Vec<StepStats> = output
        .snapshots
        .par_iter()
        .zip(&output.steps)
        .map(|(snap, st)| step_stats(snap, output.a, st.log_z_ratio_cum, p, config))
        .collect::<Result<_>>()?;
    for (stats, m) in steps.iter_mut().zip(map_path(output, data, &config.em)?) {
        stats.map = m.beta;
        stats.map_converged = m.converged;
    }
    let pooled_post = pooled_posterior(output)?;
    let tail = (1.0 - config.level) / 2.0;
    let mode_map = &steps[cpost.mode].map;
    let pooled = (0..p)
        .map(|j| {
            let xs = &pooled_post.samples[j];
            let q = weighted_quantiles(xs, &pooled_post.weights, &[tail, 0.5, 1.0 - tail])?;
            Ok(PooledCoefficient {
                name: output.names[j].clone(),
                map: mode_map[j],
                median: q[1],
                lower: q[0],
                upper: q[2],
                concentration: config
                    .deltas
                    .iter()
                    .map(|&d| concentration(xs, &pooled_post.weights, d))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mode_snap = &output.snapshots[cpost.mode];
    let (lo, hi) = mode_snap
        .betas
        .iter()
        .flatten()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &b| (lo.min(b), hi.max(b)));
    let pad = 0.25 * (hi - lo).max(0.1);
    let (lo, hi) = (lo - pad, hi + pad);
    let density_grid: Vec<f64> = (0..config.kde_points)
        .map(|k| lo + (hi - lo) * k as f64 / (config.kde_points - 1) as f64)
        .collect();
    let densities = (0..p)
        .map(|j| {
            let xs = mode_snap.coefficient(j);
            match weighted_kde(&xs, &mode_snap.weights, &density_grid) {
                Ok(d) => d,
                // All particles agree on this coefficient.
                Err(_) => vec![0.0; density_grid.len()],
            }
        })
        .collect();

    Ok(SpaResult {
        names: output.names.clone(),
        a: output.a,
        deltas: config.deltas.clone(),
        level: config.level,
        steps,
        c_posterior: cpost,
        pooled,
        density_grid,
        densities,
    })
}

fn header(prefix: &str, names: &[String]) -> String {
    let mut s = prefix.to_string();
    for n in names {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    s
}

fn push_row(s: &mut String, values: &[f64]) {
    for v in values {
        write!(s, ",{v}").unwrap();
    }
    s.push('\n');
}

fn write_file(dir: &Path, name: &str, contents: String) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| SpaError::io(&path, e))
}

fn pct(level: f64) -> String {
    let v = level * 100.0;
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v}")
    }
}

/// Write every summary table and the text report into `dir`.
pub fn write_spa(result: &SpaResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SpaError::io(dir, e))?;
    let names = &result.names;

    let mut map = header("t,b,c", names);
    let mut med = header("t,b,c", names);
    let mut conc = header("t,b,c,delta", names);
    let mut bands = String::from("t,b,c,coefficient,lower,median,mean,upper,map\n");
    for st in &result.steps {
        write!(map, "{},{},{}", st.t, st.b, st.c).unwrap();
        push_row(&mut map, &st.map);
        write!(med, "{},{},{}", st.t, st.b, st.c).unwrap();
        push_row(&mut med, &st.abs_median);
        for (d, v) in result.deltas.iter().zip(&st.concentration) {
            write!(conc, "{},{},{},{}", st.t, st.b, st.c, d).unwrap();
            push_row(&mut conc, v);
        }
        for j in 0..names.len() {
            writeln!(
                bands,
                "{},{},{},{},{},{},{},{},{}",
                st.t, st.b, st.c, names[j], st.lower[j], st.median[j], st.mean[j], st.upper[j], st.map[j]
            )
            .unwrap();
        }
    }
    write_file(dir, "map_path.csv", map)?;
    write_file(dir, "medians.csv", med)?;
    write_file(dir, "concentration.csv", conc)?;
    write_file(dir, "bands.csv", bands)?;

    let cp = &result.c_posterior;
    let mut s = String::from("t,c,mass\n");
    for k in 0..cp.t.len() {
        writeln!(s, "{},{},{}", cp.t[k], cp.c[k], cp.mass[k]).unwrap();
    }
    write_file(dir, "c_posterior.csv", s)?;

    let level = pct(result.level);
    let mut s = format!("coefficient,map,median,lo{level},hi{level}");
    let mut deltas: Vec<(usize, f64)> = result.deltas.iter().copied().enumerate().collect();
    deltas.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (_, d) in &deltas {
        write!(s, ",V_{d}").unwrap();
    }
    s.push('\n');
    for pc in &result.pooled {
        write!(s, "{},{},{},{},{}", pc.name, pc.map, pc.median, pc.lower, pc.upper).unwrap();
        for (k, _) in &deltas {
            write!(s, ",{}", pc.concentration[*k]).unwrap();
        }
        s.push('\n');
    }
    write_file(dir, "pooled_summary.csv", s)?;

    let mut s = header("x", names);
    for (k, x) in result.density_grid.iter().enumerate() {
        write!(s, "{x}").unwrap();
        let row: Vec<f64> = result.densities.iter().map(|d| d[k]).collect();
        push_row(&mut s, &row);
    }
    write_file(dir, "density_mode.csv", s)?;

    write_file(dir, "report.txt", report(result))
}

/// Plain-text report naming the scale mode and ranking coefficients.
pub fn report(result: &SpaResult) -> String {
    let mode = result.at_mode();
    let d = result.deltas[0];
    let mut s = String::new();
    writeln!(s, "degrees of freedom a = {}", result.a).unwrap();
    writeln!(
        s,
        "posterior mode of c: c~ = {:.6} (log c = {:.4}, step t = {}, mass {:.4})",
        mode.c,
        mode.c.ln(),
        mode.t,
        result.c_posterior.mass[result.c_posterior.mode]
    )
    .unwrap();
    writeln!(s).unwrap();
    writeln!(s, "coefficients ranked by scale-marginalized concentration V({d}):").unwrap();
    writeln!(s, "{:>5}  {:<16} {:>10} {:>10} {:>10}", "rank", "coefficient", "V", "median", "V at c~").unwrap();
    for (rank, j) in result.ranking().into_iter().enumerate() {
        writeln!(
            s,
            "{:>5}  {:<16} {:>10.4} {:>10.4} {:>10.4}",
            rank + 1,
            result.names[j],
            result.pooled[j].concentration[0],
            result.pooled[j].median,
            mode.concentration[0][j]
        )
        .unwrap();
    }
    s
}

/// Convergence flags of the MAP path that failed, as `(t, b)` pairs.
pub fn unconverged_map_steps(result: &SpaResult) -> Vec<(usize, f64)> {
    result
        .steps
        .iter()
        .filter(|s| !s.map_converged)
        .map(|s| (s.t, s.b))
        .collect()
}

/// Log-likelihood of every particle in a snapshot.
pub fn snapshot_loglik(snap: &Snapshot, data: &Dataset) -> Result<Vec<f64>> {
    snap.betas
        .par_iter()
        .map(|b| Ok(log_likelihood(data, b)?.0))
        .collect()
}
