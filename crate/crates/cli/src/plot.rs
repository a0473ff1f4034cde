//! SVG renderings of the summary tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::CliError;
use crate::svg::{color, data_range, escape, Document, Panel};
use crate::table::Table;

struct PathTables {
    names: Vec<String>,
    log_c: Vec<f64>,
    map: Vec<Vec<f64>>,
    medians: Vec<Vec<f64>>,
    /// Per delta: per step, per coefficient.
    concentration: BTreeMap<String, Vec<Vec<f64>>>,
    c_mass: Vec<f64>,
    c_log: Vec<f64>,
    mode_log_c: f64,
}

fn coefficient_rows(table: &Table, skip: usize) -> Result<Vec<Vec<f64>>, CliError> {
    (0..table.rows.len())
        .map(|r| (skip..table.header.len()).map(|c| table.number(r, c)).collect())
        .collect()
}

fn load_paths(dir: &Path) -> Result<PathTables, CliError> {
    let map = Table::read(&dir.join("map_path.csv"))?;
    let med = Table::read(&dir.join("medians.csv"))?;
    let conc = Table::read(&dir.join("concentration.csv"))?;
    let cp = Table::read(&dir.join("c_posterior.csv"))?;
    let names = map.header[3..].to_vec();
    let log_c = map.column("c")?.iter().map(|c| c.ln()).collect();
    let mut concentration: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    let dcol = conc.index("delta")?;
    for r in 0..conc.rows.len() {
        let row = (4..conc.header.len()).map(|c| conc.number(r, c)).collect::<Result<_, _>>()?;
        concentration.entry(conc.rows[r][dcol].clone()).or_default().push(row);
    }
    let c_mass = cp.column("mass")?;
    let c_log: Vec<f64> = cp.column("c")?.iter().map(|c| c.ln()).collect();
    let mode = c_mass
        .iter()
        .enumerate()
        .fold(0, |best, (k, &m)| if m > c_mass[best] { k } else { best });
    Ok(PathTables {
        names,
        log_c,
        map: coefficient_rows(&map, 3)?,
        medians: coefficient_rows(&med, 3)?,
        concentration,
        mode_log_c: c_log[mode],
        c_mass,
        c_log,
    })
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// Indices of the `k` coefficients with the largest `|value|` at the step
/// nearest the mode.
fn labelled(rows: &[Vec<f64>], at: usize, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..rows[at].len()).collect();
    order.sort_by(|&i, &j| rows[at][j].abs().total_cmp(&rows[at][i].abs()).then(i.cmp(&j)));
    order.truncate(k);
    order
}

fn coefficient_panel(doc: &mut Document, panel: &Panel, t: &PathTables, rows: &[Vec<f64>], mode_step: usize) {
    panel.hline(doc, 0.0, "#999999");
    for j in 0..t.names.len() {
        panel.line(doc, &t.log_c, &column(rows, j), color(j), 1.2, None);
    }
    let first = t.log_c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for j in labelled(rows, mode_step, 5) {
        let y = rows[0][j];
        doc.text(panel.px(first) + 3.0, panel.py(y) + 3.0, &t.names[j], 9.0, "start");
    }
    panel.mode_line(doc, t.mode_log_c);
}

fn nearest(values: &[f64], x: f64) -> usize {
    values
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if (v - x).abs() < (values[best] - x).abs() { k } else { best })
}

/// Four-panel path plot: MAPs, absolute medians, posterior over `c`, and
/// concentrations, all against `log c`.
pub fn spa_plot(dir: &Path, delta: Option<&str>) -> Result<String, CliError> {
    let t = load_paths(dir)?;
    let xr = data_range(&t.log_c, 0.0);
    let mode_step = nearest(&t.log_c, t.mode_log_c);
    let (w, h) = (1100.0, 840.0);
    let mut doc = Document::new(w, h);
    let (pw, ph) = (420.0, 290.0);
    let lefts = [80.0, 620.0];
    let tops = [50.0, 460.0];
    let xlabel = "log c";

    let all_map: Vec<f64> = t.map.iter().flatten().copied().collect();
    let p = Panel::new(lefts[0], tops[0], pw, ph, xr, data_range(&all_map, 0.05));
    p.frame(&mut doc, "(a) MAP estimates", xlabel, "beta");
    coefficient_panel(&mut doc, &p, &t, &t.map, mode_step);

    let all_med: Vec<f64> = t.medians.iter().flatten().copied().collect();
    let (_, hi) = data_range(&all_med, 0.05);
    let p = Panel::new(lefts[1], tops[0], pw, ph, xr, (0.0, hi));
    p.frame(&mut doc, "(b) absolute medians", xlabel, "|median|");
    coefficient_panel(&mut doc, &p, &t, &t.medians, mode_step);

    let (_, hi) = data_range(&t.c_mass, 0.05);
    let p = Panel::new(lefts[0], tops[1], pw, ph, xr, (0.0, hi));
    p.frame(&mut doc, "(c) posterior over c", xlabel, "mass");
    p.line(&mut doc, &t.c_log, &t.c_mass, "black", 1.5, None);
    p.mode_line(&mut doc, t.mode_log_c);

    let key = match delta {
        Some(d) => d.to_string(),
        None => {
            let keys: Vec<&String> = t.concentration.keys().collect();
            keys.iter()
                .find(|k| k.parse::<f64>().ok() == Some(0.1))
                .or(keys.first())
                .map(|k| k.to_string())
                .ok_or_else(|| CliError::Input("concentration.csv has no rows".into()))?
        }
    };
    let conc = t
        .concentration
        .get(&key)
        .ok_or_else(|| CliError::Usage(format!("no concentration rows for delta {key}")))?;
    let p = Panel::new(lefts[1], tops[1], pw, ph, xr, (0.0, 1.0));
    p.frame(&mut doc, &format!("(d) concentration, delta = {key}"), xlabel, "V");
    coefficient_panel(&mut doc, &p, &t, conc, mode_step);
    Ok(doc.finish())
}

/// One plot per coefficient: credible band, median, mean and MAP.
pub fn band_plots(dir: &Path) -> Result<Vec<(String, String)>, CliError> {
    let table = Table::read(&dir.join("bands.csv"))?;
    let cp = Table::read(&dir.join("c_posterior.csv"))?;
    let mass = cp.column("mass")?;
    let c = cp.column("c")?;
    let mode = mass
        .iter()
        .enumerate()
        .fold(0, |best, (k, &m)| if m > mass[best] { k } else { best });
    let mode_log_c = c[mode].ln();
    let name_col = table.index("coefficient")?;
    let cols: Vec<usize> = ["c", "lower", "median", "mean", "upper", "map"]
        .iter()
        .map(|n| table.index(n))
        .collect::<Result<_, _>>()?;
    let mut order: Vec<String> = Vec::new();
    let mut series: BTreeMap<String, [Vec<f64>; 6]> = BTreeMap::new();
    for r in 0..table.rows.len() {
        let name = table.rows[r][name_col].clone();
        let entry = series.entry(name.clone()).or_insert_with(|| {
            order.push(name);
            Default::default()
        });
        for (k, &col) in cols.iter().enumerate() {
            entry[k].push(table.number(r, col)?);
        }
    }
    let mut out = Vec::new();
    for name in order {
        let [c, lo, med, mean, hi, map] = &series[&name];
        let log_c: Vec<f64> = c.iter().map(|v| v.ln()).collect();
        let mut doc = Document::new(640.0, 420.0);
        let yr = data_range(lo.iter().chain(hi).chain(map), 0.05);
        let p = Panel::new(80.0, 50.0, 520.0, 300.0, data_range(&log_c, 0.0), yr);
        p.frame(&mut doc, &name, "log c", "beta");
        p.hline(&mut doc, 0.0, "#999999");
        p.band(&mut doc, &log_c, lo, hi, "#1f77b4");
        p.line(&mut doc, &log_c, med, "#1f77b4", 1.5, None);
        p.line(&mut doc, &log_c, mean, "#2ca02c", 1.2, Some("3,3"));
        p.markers(&mut doc, &log_c, map, "#d62728", 1.6);
        p.mode_line(&mut doc, mode_log_c);
        doc.text(600.0, 395.0, "band: credible interval; solid: median; dotted: mean; dots: MAP", 9.0, "end");
        out.push((name, doc.finish()));
    }
    Ok(out)
}

/// Scale-marginalized summaries: interval, median and MAP per coefficient,
/// with concentration bars for each band width.
pub fn marginal_plot(dir: &Path) -> Result<String, CliError> {
    let table = Table::read(&dir.join("pooled_summary.csv"))?;
    let names: Vec<String> = table.rows.iter().map(|r| r[0].clone()).collect();
    let p = names.len();
    let map = table.column("map")?;
    let median = table.column("median")?;
    let lo_col = table
        .header
        .iter()
        .position(|h| h.starts_with("lo"))
        .ok_or_else(|| CliError::Input("pooled_summary.csv lacks a lower-bound column".into()))?;
    let hi_col = lo_col + 1;
    let lo: Vec<f64> = (0..p).map(|r| table.number(r, lo_col)).collect::<Result<_, _>>()?;
    let hi: Vec<f64> = (0..p).map(|r| table.number(r, hi_col)).collect::<Result<_, _>>()?;
    let v_cols: Vec<usize> = (0..table.header.len()).filter(|&k| table.header[k].starts_with("V_")).collect();

    let width = (120.0 + 18.0 * p as f64).max(640.0);
    let mut doc = Document::new(width, 720.0);
    let xr = (0.0, p as f64 + 1.0);
    let xs: Vec<f64> = (1..=p).map(|k| k as f64).collect();
    let top = Panel::new(80.0, 50.0, width - 120.0, 260.0, xr, data_range(lo.iter().chain(&hi).chain(&map), 0.05));
    top.frame(&mut doc, "scale-marginalized posterior", "coefficient", "beta");
    top.hline(&mut doc, 0.0, "#999999");
    for k in 0..p {
        top.line(&mut doc, &[xs[k], xs[k]], &[lo[k], hi[k]], "#1f77b4", 2.0, None);
    }
    top.markers(&mut doc, &xs, &median, "#1f77b4", 3.0);
    top.markers(&mut doc, &xs, &map, "#d62728", 2.0);

    let bottom = Panel::new(80.0, 390.0, width - 120.0, 260.0, xr, (0.0, 1.0));
    bottom.frame(&mut doc, "marginal concentration", "coefficient", "V");
    let bar = 0.8 / v_cols.len().max(1) as f64;
    for (slot, &col) in v_cols.iter().enumerate() {
        for k in 0..p {
            let v = table.number(k, col)?;
            let x0 = bottom.px(xs[k] - 0.4 + slot as f64 * bar);
            let x1 = bottom.px(xs[k] - 0.4 + (slot + 1) as f64 * bar);
            doc.raw(&format!(
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                crate::svg::f(x0),
                crate::svg::f(bottom.py(v)),
                crate::svg::f(x1 - x0),
                crate::svg::f(bottom.py(0.0) - bottom.py(v)),
                color(slot + 1)
            ));
        }
        doc.text(
            width - 40.0,
            400.0 + 14.0 * slot as f64,
            &table.header[col],
            10.0,
            "end",
        );
    }
    if p <= 60 {
        for (k, name) in names.iter().enumerate() {
            let x = bottom.px(xs[k]);
            let y = 390.0 + 260.0 + 24.0;
            doc.raw(&format!(
                r#"<text x="{0}" y="{1}" font-size="8" text-anchor="end" font-family="sans-serif" transform="rotate(-60 {0} {1})">{2}</text>"#,
                crate::svg::f(x),
                crate::svg::f(y),
                escape(name)
            ));
        }
    }
    Ok(doc.finish())
}

pub fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
