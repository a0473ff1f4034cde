use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::sampler::{SmcOutput, Snapshot, StepSummary};
use crate::error::{Result, SpaError};

pub const RUN_FILE: &str = "run.csv";
const PARTICLE_DIR: &str = "particles";

fn snapshot_file(t: usize) -> String {
    format!("step_{t:04}.csv")
}

/// Write `run.csv` and one `particles/step_NNNN.csv` per retained snapshot.
pub fn write_run(output: &SmcOutput, dir: &Path) -> Result<()> {
    let pdir = dir.join(PARTICLE_DIR);
    fs::create_dir_all(&pdir).map_err(|e| SpaError::io(&pdir, e))?;
    let mut s = String::from("t,b,ess,log_z_ratio_cum,acceptance_rate\n");
    for st in &output.steps {
        writeln!(s, "{},{},{},{},{}", st.t, st.b, st.ess, st.log_z_ratio_cum, st.acceptance_rate).unwrap();
    }
    let path = dir.join(RUN_FILE);
    fs::write(&path, s).map_err(|e| SpaError::io(&path, e))?;
    for snap in &output.snapshots {
        let mut s = String::from("particle_index,weight");
        for name in &output.names {
            s.push(',');
            s.push_str(name);
        }
        s.push('\n');
        for (i, (beta, w)) in snap.betas.iter().zip(&snap.weights).enumerate() {
            write!(s, "{},{}", i + 1, w).unwrap();
            for b in beta {
                write!(s, ",{b}").unwrap();
            }
            s.push('\n');
        }
        let path = pdir.join(snapshot_file(snap.t));
        fs::write(&path, s).map_err(|e| SpaError::io(&path, e))?;
    }
    Ok(())
}

fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path).map_err(|e| SpaError::io(path, e))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| SpaError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: "empty file".into(),
        })?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        let row: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let row = row.map_err(|e| SpaError::Parse {
            path: path.to_path_buf(),
            line: k as u64 + 2,
            msg: e.to_string(),
        })?;
        if row.len() != header.len() {
            return Err(SpaError::Parse {
                path: path.to_path_buf(),
                line: k as u64 + 2,
                msg: format!("expected {} fields, found {}", header.len(), row.len()),
            });
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Read back what [`write_run`] wrote. Resampling flags and per-particle
/// log-likelihoods are not stored and come back as `false` / `None`.
pub fn read_run(dir: &Path, a: f64) -> Result<SmcOutput> {
    let (_, rows) = read_table(&dir.join(RUN_FILE))?;
    let steps: Vec<StepSummary> = rows
        .iter()
        .map(|r| StepSummary {
            t: r[0] as usize,
            b: r[1],
            ess: r[2],
            log_z_ratio_cum: r[3],
            acceptance_rate: r[4],
            resampled: false,
        })
        .collect();
    let mut snapshots = Vec::new();
    let mut names = Vec::new();
    for st in &steps {
        let path = dir.join(PARTICLE_DIR).join(snapshot_file(st.t));
        if !path.exists() {
            continue;
        }
        let (header, rows) = read_table(&path)?;
        names = header[2..].to_vec();
        snapshots.push(Snapshot {
            t: st.t,
            b: st.b,
            betas: rows.iter().map(|r| r[2..].to_vec()).collect(),
            weights: rows.iter().map(|r| r[1]).collect(),
            loglik: None,
        });
    }
    if snapshots.is_empty() {
        return Err(SpaError::Missing(format!(
            "no particle snapshots under {}",
            dir.join(PARTICLE_DIR).display()
        )));
    }
    Ok(SmcOutput {
        a,
        names,
        steps,
        snapshots,
    })
}
