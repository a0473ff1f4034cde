//! Datasets: synthetic genotypes with block LD structure, simulated binary
//! phenotypes, column standardization, correlation structure and CSV storage.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Result, SpaError};
use crate::model::sigmoid;
use crate::rng::{self, ids};

/// Dense column-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Matrix {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let nrows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * columns.len());
        for col in columns {
            if col.len() != nrows {
                return Err(SpaError::DimensionMismatch {
                    expected: nrows,
                    actual: col.len(),
                });
            }
            data.extend_from_slice(col);
        }
        Ok(Matrix {
            nrows,
            ncols: columns.len(),
            data,
        })
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.nrows + i]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[j * self.nrows + i] = v;
    }

    /// `X β`.
    pub fn mul_vec(&self, beta: &[f64]) -> Result<Vec<f64>> {
        if beta.len() != self.ncols {
            return Err(SpaError::DimensionMismatch {
                expected: self.ncols,
                actual: beta.len(),
            });
        }
        let mut out = vec![0.0; self.nrows];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (o, &x) in out.iter_mut().zip(self.column(j)) {
                    *o += x * b;
                }
            }
        }
        Ok(out)
    }
}

/// Distinct values of a column that takes only a handful of them (SNP codes
/// after standardization), with a per-row code into `values`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Levels {
    pub values: Vec<f64>,
    pub codes: Vec<u8>,
}

const MAX_LEVELS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ColumnInfo {
    /// `Σ_i y_i x_ij`
    pub y_dot: f64,
    pub max_abs: f64,
    pub levels: Option<Levels>,
}

fn column_levels(col: &[f64]) -> Option<Levels> {
    let mut values: Vec<f64> = Vec::new();
    let mut codes = Vec::with_capacity(col.len());
    for &v in col {
        let code = match values.iter().position(|&u| u.to_bits() == v.to_bits()) {
            Some(k) => k,
            None => {
                if values.len() == MAX_LEVELS {
                    return None;
                }
                values.push(v);
                values.len() - 1
            }
        };
        codes.push(code as u8);
    }
    Some(Levels { values, codes })
}

/// Predictor matrix with binary response.
///
/// Columns are stored contiguously so a single-coordinate change of `β`
/// touches one slice. When `intercept` is set, column 0 is a constant column
/// of ones that is excluded from the prior.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Matrix,
    y: Vec<f64>,
    names: Vec<String>,
    intercept: bool,
    info: Vec<ColumnInfo>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<u8>, names: Vec<String>) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(SpaError::DimensionMismatch {
                expected: x.nrows(),
                actual: y.len(),
            });
        }
        if names.len() != x.ncols() {
            return Err(SpaError::DimensionMismatch {
                expected: x.ncols(),
                actual: names.len(),
            });
        }
        if let Some(bad) = y.iter().find(|&&v| v > 1) {
            return Err(SpaError::invalid(format!("response value {bad} is not 0/1")));
        }
        let y: Vec<f64> = y.into_iter().map(f64::from).collect();
        let info = (0..x.ncols())
            .map(|j| column_info(x.column(j), &y))
            .collect();
        Ok(Dataset {
            x,
            y,
            names,
            intercept: false,
            info,
        })
    }

    /// Copy with an unpenalized column of ones prepended.
    pub fn with_intercept(&self) -> Self {
        if self.intercept {
            return self.clone();
        }
        let n = self.n();
        let mut columns = vec![vec![1.0; n]];
        columns.extend((0..self.p()).map(|j| self.x.column(j).to_vec()));
        let x = Matrix::from_columns(&columns).expect("columns share length");
        let mut names = vec!["intercept".to_string()];
        names.extend(self.names.iter().cloned());
        let info = (0..x.ncols())
            .map(|j| column_info(x.column(j), &self.y))
            .collect();
        Dataset {
            x,
            y: self.y.clone(),
            names,
            intercept: true,
            info,
        }
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Number of coefficients, including the intercept when present.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &Matrix {
        &self.x
    }

    pub fn column(&self, j: usize) -> &[f64] {
        self.x.column(j)
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has_intercept(&self) -> bool {
        self.intercept
    }

    /// Whether coefficient `j` carries the sparsity prior.
    pub fn is_penalized(&self, j: usize) -> bool {
        !(self.intercept && j == 0)
    }

    /// Index of the first penalized coefficient.
    pub fn first_penalized(&self) -> usize {
        usize::from(self.intercept)
    }

    pub(crate) fn info(&self, j: usize) -> &ColumnInfo {
        &self.info[j]
    }

    /// Predictor matrix without the intercept column.
    pub fn predictors(&self) -> Matrix {
        if !self.intercept {
            return self.x.clone();
        }
        let cols: Vec<Vec<f64>> = (1..self.p()).map(|j| self.x.column(j).to_vec()).collect();
        Matrix::from_columns(&cols).expect("columns share length")
    }

    /// Whether every predictor column has mean 0 and sample sd 1 within `tol`.
    pub fn is_standardized(&self, tol: f64) -> bool {
        (self.first_penalized()..self.p()).all(|j| {
            let (mean, sd) = mean_sd(self.column(j));
            mean.abs() <= tol && (sd - 1.0).abs() <= tol
        })
    }
}

fn column_info(col: &[f64], y: &[f64]) -> ColumnInfo {
    ColumnInfo {
        y_dot: col.iter().zip(y).map(|(x, y)| x * y).sum(),
        max_abs: col.iter().fold(0.0, |m, x| m.max(x.abs())),
        levels: column_levels(col),
    }
}

fn mean_sd(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let ss: f64 = col.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// How true effects are assigned.
#[derive(Debug, Clone, PartialEq)]
pub enum Effects {
    /// 1-based column index and coefficient.
    Fixed(Vec<(usize, f64)>),
    /// `count` random columns with Normal(0, ·) coefficients. `scale` is a
    /// standard deviation unless `scale_is_variance`.
    Random {
        count: usize,
        scale: f64,
        scale_is_variance: bool,
    },
}

/// Simulation design.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub n: usize,
    pub p: usize,
    pub block_size: usize,
    pub within_block_corr: f64,
    pub effects: Effects,
    pub seed: u64,
}

/// Coefficients used by both reference scenarios.
pub const REFERENCE_EFFECTS: [f64; 5] = [-0.2538, 0.4578, -0.1873, -0.1498, 0.0996];

impl SimSpec {
    /// 500 subjects, 50 markers, five true effects.
    pub fn scenario_a(seed: u64) -> Self {
        SimSpec {
            n: 500,
            p: 50,
            block_size: 10,
            within_block_corr: 0.7,
            effects: Effects::Fixed(
                [10, 14, 24, 31, 37]
                    .into_iter()
                    .zip(REFERENCE_EFFECTS)
                    .collect(),
            ),
            seed,
        }
    }

    /// 1859 subjects, 184 markers, five true effects.
    pub fn scenario_b(seed: u64) -> Self {
        SimSpec {
            n: 1859,
            p: 184,
            block_size: 10,
            within_block_corr: 0.7,
            effects: Effects::Fixed(
                [108, 22, 5, 117, 162]
                    .into_iter()
                    .zip(REFERENCE_EFFECTS)
                    .collect(),
            ),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p == 0 {
            return Err(SpaError::invalid("need n >= 2 and p >= 1"));
        }
        if self.block_size == 0 || self.block_size > self.p {
            return Err(SpaError::invalid(format!(
                "block size {} must be in [1, p={}]",
                self.block_size, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.within_block_corr) {
            return Err(SpaError::invalid(format!(
                "within-block correlation {} not in [0, 1)",
                self.within_block_corr
            )));
        }
        match &self.effects {
            Effects::Fixed(list) => {
                let mut seen = vec![false; self.p];
                for &(idx, coef) in list {
                    if idx == 0 || idx > self.p {
                        return Err(SpaError::invalid(format!(
                            "nonzero index {idx} outside [1, {}]",
                            self.p
                        )));
                    }
                    if std::mem::replace(&mut seen[idx - 1], true) {
                        return Err(SpaError::invalid(format!("duplicate nonzero index {idx}")));
                    }
                    if !coef.is_finite() {
                        return Err(SpaError::invalid("non-finite coefficient"));
                    }
                }
            }
            Effects::Random { count, scale, .. } => {
                if *count > self.p {
                    return Err(SpaError::invalid(format!(
                        "{count} nonzero effects requested but p = {}",
                        self.p
                    )));
                }
                if !(*scale >= 0.0) {
                    return Err(SpaError::invalid("effect scale must be >= 0"));
                }
            }
        }
        Ok(())
    }

    /// The length-`p` true coefficient vector.
    pub fn true_coefficients(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let mut beta = vec![0.0; self.p];
        match &self.effects {
            Effects::Fixed(list) => {
                for &(idx, coef) in list {
                    beta[idx - 1] = coef;
                }
            }
            Effects::Random {
                count,
                scale,
                scale_is_variance,
            } => {
                let sd = if *scale_is_variance {
                    scale.sqrt()
                } else {
                    *scale
                };
                let mut rng = rng::stream(self.seed, ids::EFFECTS);
                let mut chosen = sample_indices(&mut rng, self.p, *count).into_vec();
                chosen.sort_unstable();
                for j in chosen {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    beta[j] = sd * z;
                }
            }
        }
        Ok(beta)
    }
}

/// Raw genotype counts in {0, 1, 2}.
///
/// Within each block of `block_size` consecutive markers, marker liabilities
/// share one latent Gaussian factor with weight `√ρ`; each liability is cut
/// into genotype classes by Hardy-Weinberg proportions for a minor-allele
/// frequency drawn from [0.1, 0.5].
pub fn simulate_genotypes(spec: &SimSpec) -> Result<Matrix> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, ids::GENOTYPES);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let load = spec.within_block_corr.sqrt();
    let resid = (1.0 - spec.within_block_corr).sqrt();
    let mut out = Matrix::zeros(spec.n, spec.p);
    let mut factor = vec![0.0; spec.n];
    for j in 0..spec.p {
        if j % spec.block_size == 0 {
            for f in factor.iter_mut() {
                *f = StandardNormal.sample(&mut rng);
            }
        }
        let maf: f64 = rng.gen_range(0.1..0.5);
        let lower = std_normal.inverse_cdf((1.0 - maf) * (1.0 - maf));
        let upper = std_normal.inverse_cdf(1.0 - maf * maf);
        for (i, &f) in factor.iter().enumerate() {
            let e: f64 = StandardNormal.sample(&mut rng);
            let z = load * f + resid * e;
            let g = if z < lower {
                0.0
            } else if z > upper {
                2.0
            } else {
                1.0
            };
            out.set(i, j, g);
        }
    }
    Ok(out)
}

/// Centre every column and scale it to unit sample standard deviation.
pub fn standardize(raw: &Matrix) -> Result<Matrix> {
    let mut out = raw.clone();
    for j in 0..raw.ncols() {
        let (mean, sd) = mean_sd(raw.column(j));
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(SpaError::ConstantColumn(format!("column {}", j + 1)));
        }
        for v in out.column_mut(j) {
            *v = (*v - mean) / sd;
        }
    }
    Ok(out)
}

/// `y_i ~ Bernoulli(logit⁻¹(x_i·β))`.
pub fn simulate_phenotypes(x: &Matrix, beta: &[f64], seed: u64) -> Result<Vec<u8>> {
    let eta = x.mul_vec(beta)?;
    let mut rng = rng::stream(seed, ids::PHENOTYPES);
    Ok(eta
        .iter()
        .map(|&e| u8::from(rng.gen::<f64>() < sigmoid(e)))
        .collect())
}

/// Sample Pearson correlations between columns.
pub fn correlation_matrix(x: &Matrix) -> Matrix {
    let p = x.ncols();
    let centered: Vec<(Vec<f64>, f64)> = (0..p)
        .map(|j| {
            let col = x.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let c: Vec<f64> = col.iter().map(|v| v - mean).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            (c, norm)
        })
        .collect();
    let mut out = Matrix::zeros(p, p);
    for j in 0..p {
        out.set(j, j, 1.0);
        for k in 0..j {
            let (a, na) = &centered[j];
            let (b, nb) = &centered[k];
            let r = a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() / (na * nb);
            out.set(j, k, r);
            out.set(k, j, r);
        }
    }
    out
}

/// Generate, standardize and label a dataset. Returns it with the true
/// coefficient vector.
pub fn simulate_dataset(spec: &SimSpec) -> Result<(Dataset, Vec<f64>)> {
    let beta = spec.true_coefficients()?;
    let x = standardize(&simulate_genotypes(spec)?)?;
    let y = simulate_phenotypes(&x, &beta, spec.seed)?;
    let data = Dataset::new(x, y, snp_names(spec.p))?;
    Ok((data, beta))
}

pub fn snp_names(p: usize) -> Vec<String> {
    let width = p.to_string().len().max(3);
    (1..=p).map(|j| format!("snp_{j:0width$}")).collect()
}

/// Write `y,<names...>` CSV. The intercept column, if any, is not stored.
pub fn save_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let start = data.first_penalized();
    let mut s = String::from("y");
    for name in &data.names()[start..] {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for i in 0..data.n() {
        write!(s, "{}", data.y()[i] as u8).unwrap();
        for j in start..data.p() {
            write!(s, ",{}", data.x().get(i, j)).unwrap();
        }
        s.push('\n');
    }
    fs::write(path, s).map_err(|e| SpaError::io(path, e))
}

/// Read a dataset written by [`save_dataset`] (or any CSV whose first column
/// is a 0/1 response named `y`).
pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let parse_err = |line: u64, msg: String| SpaError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => SpaError::io(path, io),
            other => parse_err(1, format!("{other:?}")),
        })?;
    let header = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if header.get(0).map(str::trim) != Some("y") {
        return Err(parse_err(
            1,
            "missing header: first column must be named `y`".into(),
        ));
    }
    let names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
    if names.is_empty() {
        return Err(parse_err(1, "no predictor columns".into()));
    }
    let mut columns = vec![Vec::new(); names.len()];
    let mut y = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != names.len() + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", names.len() + 1, rec.len()),
            ));
        }
        let yv = match rec[0].trim() {
            "0" => 0u8,
            "1" => 1u8,
            other => return Err(parse_err(line, format!("response `{other}` is not 0 or 1"))),
        };
        y.push(yv);
        for (col, field) in columns.iter_mut().zip(rec.iter().skip(1)) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("cannot parse `{field}` as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value `{field}`")));
            }
            col.push(v);
        }
    }
    if y.is_empty() {
        return Err(parse_err(2, "no data rows".into()));
    }
    Dataset::new(Matrix::from_columns(&columns)?, y, names)
}
