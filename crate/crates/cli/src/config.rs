use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use spa_core::smc::{Schedule, SmcConfig};

use crate::error::CliError;

/// Flat `key = value` settings. Blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValues(BTreeMap<String, String>);

impl KeyValues {
    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("{}:{}: expected key = value", origin.display(), k + 1))
            })?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KeyValues(map))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("bad value for `{key}`: {v}"))),
        }
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    pub fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        match self.0.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::Usage(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad number `{s}` in list")))
        })
        .collect()
}

/// Fully resolved settings of a sampler run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    pub a: f64,
    pub b1: f64,
    pub rho: f64,
    pub steps: usize,
    pub intercept: bool,
    pub smc: SmcConfig,
}

pub const RUN_KEYS: &[&str] = &[
    "version",
    "data",
    "a",
    "b1",
    "rho",
    "T",
    "intercept",
    "particles",
    "cycles",
    "step_sd",
    "ess_frac",
    "seed",
    "burn_in",
    "init_thin",
    "snapshot_every",
];

/// Values given on the command line; `None` falls back to the file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub data: Option<PathBuf>,
    pub a: Option<f64>,
    pub b1: Option<f64>,
    pub rho: Option<f64>,
    pub steps: Option<usize>,
    pub intercept: bool,
    pub particles: Option<usize>,
    pub cycles: Option<usize>,
    pub step_sd: Option<f64>,
    pub ess_frac: Option<f64>,
    pub seed: Option<u64>,
    pub burn_in: Option<usize>,
    pub init_thin: Option<usize>,
    pub snapshot_every: Option<usize>,
}

impl RunConfig {
    pub fn resolve(file: &KeyValues, flags: &RunOverrides) -> Result<Self, CliError> {
        file.check_known(RUN_KEYS)?;
        let d = SmcConfig::default();
        let data = match &flags.data {
            Some(p) => p.clone(),
            None => file
                .get_str("data")
                .map(PathBuf::from)
                .ok_or_else(|| CliError::Usage("no dataset given (--data or `data` key)".into()))?,
        };
        let config = RunConfig {
            data,
            a: pick(flags.a, file, "a", 4.0)?,
            b1: pick(flags.b1, file, "b1", 2.0)?,
            rho: pick(flags.rho, file, "rho", 0.98)?,
            steps: pick(flags.steps, file, "T", 350)?,
            intercept: flags.intercept || file.get("intercept")?.unwrap_or(false),
            smc: SmcConfig {
                particles: pick(flags.particles, file, "particles", d.particles)?,
                cycles: pick(flags.cycles, file, "cycles", d.cycles)?,
                step_sd: pick(flags.step_sd, file, "step_sd", d.step_sd)?,
                ess_threshold_frac: pick(flags.ess_frac, file, "ess_frac", d.ess_threshold_frac)?,
                seed: pick(flags.seed, file, "seed", d.seed)?,
                burn_in: pick(flags.burn_in, file, "burn_in", d.burn_in)?,
                init_thin: pick(flags.init_thin, file, "init_thin", d.init_thin)?,
                snapshot_every: pick(flags.snapshot_every, file, "snapshot_every", d.snapshot_every)?,
            },
        };
        config.smc.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        config.schedule()?;
        if !(config.a > 0.0) {
            return Err(CliError::Usage("a must be > 0".into()));
        }
        Ok(config)
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        Schedule::new(self.b1, self.rho, self.steps).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Manifest text: every setting needed to reproduce the run. The output
    /// directory and thread count are deliberately absent.
    pub fn manifest(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# spa run manifest").unwrap();
        writeln!(s, "version = {}", env!("CARGO_PKG_VERSION")).unwrap();
        writeln!(s, "data = {}", self.data.display()).unwrap();
        writeln!(s, "a = {}", self.a).unwrap();
        writeln!(s, "b1 = {}", self.b1).unwrap();
        writeln!(s, "rho = {}", self.rho).unwrap();
        writeln!(s, "T = {}", self.steps).unwrap();
        writeln!(s, "intercept = {}", self.intercept).unwrap();
        writeln!(s, "particles = {}", self.smc.particles).unwrap();
        writeln!(s, "cycles = {}", self.smc.cycles).unwrap();
        writeln!(s, "step_sd = {}", self.smc.step_sd).unwrap();
        writeln!(s, "ess_frac = {}", self.smc.ess_threshold_frac).unwrap();
        writeln!(s, "seed = {}", self.smc.seed).unwrap();
        writeln!(s, "burn_in = {}", self.smc.burn_in).unwrap();
        writeln!(s, "init_thin = {}", self.smc.init_thin).unwrap();
        writeln!(s, "snapshot_every = {}", self.smc.snapshot_every).unwrap();
        s
    }
}

fn pick<T: FromStr>(flag: Option<T>, file: &KeyValues, key: &str, default: T) -> Result<T, CliError> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips() {
        let flags = RunOverrides {
            data: Some("d.csv".into()),
            steps: Some(12),
            seed: Some(9),
            intercept: true,
            ..Default::default()
        };
        let config = RunConfig::resolve(&KeyValues::default(), &flags).unwrap();
        let kv = KeyValues::parse(&config.manifest(), Path::new("m")).unwrap();
        let again = RunConfig::resolve(&kv, &RunOverrides::default()).unwrap();
        assert_eq!(config, again);
    }

    #[test]
    fn flags_override_file() {
        let kv = KeyValues::parse("data = x.csv\nseed = 3\n# note\n\nparticles=64", Path::new("f")).unwrap();
        let flags = RunOverrides {
            seed: Some(4),
            ..Default::default()
        };
        let c = RunConfig::resolve(&kv, &flags).unwrap();
        assert_eq!(c.smc.seed, 4);
        assert_eq!(c.smc.particles, 64);
        assert_eq!(c.data, PathBuf::from("x.csv"));
    }

    #[test]
    fn bad_files_are_usage_errors() {
        assert!(KeyValues::parse("no equals sign", Path::new("f")).is_err());
        let kv = KeyValues::parse("data = x\nbogus = 1", Path::new("f")).unwrap();
        assert!(RunConfig::resolve(&kv, &RunOverrides::default()).is_err());
        let kv = KeyValues::parse("data = x\nrho = 1", Path::new("f")).unwrap();
        assert!(RunConfig::resolve(&kv, &RunOverrides::default()).is_err());
        assert!(RunConfig::resolve(&KeyValues::default(), &RunOverrides::default()).is_err());
    }
}
