//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; the
//! resolved configuration (defaults filled in) is what runs and what gets
//! written beside the outputs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use backscatter::grid::Grid2D;
use backscatter::q3quad::Q3Params;
use backscatter::{Error, PotentialSpec, Result};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Forward,
    Born,
    Q3Verify,
    Theorem1,
    Theorem2,
    Scaling,
    Lemmas,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Forward,
        Experiment::Born,
        Experiment::Q3Verify,
        Experiment::Theorem1,
        Experiment::Theorem2,
        Experiment::Scaling,
        Experiment::Lemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Forward => "forward",
            Experiment::Born => "born",
            Experiment::Q3Verify => "q3-verify",
            Experiment::Theorem1 => "theorem1",
            Experiment::Theorem2 => "theorem2",
            Experiment::Scaling => "scaling",
            Experiment::Lemmas => "lemmas",
        }
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub potential: PotentialSpec,
    pub n: usize,
    pub half_width: f64,
    /// Explicit wavenumbers; empty means the grid ladder up to `k_max`.
    pub ks: Vec<f64>,
    pub k_max: f64,
    pub angles: usize,
    pub tol: f64,
    /// Forward runs: incidence angle (radians).
    pub theta: f64,
    pub q3_m: usize,
    /// Radial truncation T; None: |η|/2 + 128.
    pub q3_t: Option<f64>,
    pub verify_n: usize,
    pub etas: Vec<[f64; 2]>,
    pub eps_ladder: Vec<f64>,
    pub c0: f64,
    pub probe_xi: [f64; 2],
    pub spectral_n: usize,
    pub cutoff: f64,
    pub threshold: Option<f64>,
    pub band: [f64; 2],
    pub seed: u64,
    pub out: PathBuf,
    pub cache_dir: PathBuf,
}

impl ExperimentConfig {
    /// Defaults for each experiment; theorem2's are the desk-scale run.
    pub fn defaults(experiment: Experiment) -> Self {
        let (potential, k_max) = match experiment {
            Experiment::Forward => ("disk(radius=0.8, amplitude=0.1)", 8.0),
            // scaling runs ε·q₀ along the ladder
            Experiment::Theorem1 | Experiment::Q3Verify | Experiment::Lemmas | Experiment::Scaling => {
                ("disk(radius=0.8, amplitude=1.0)", 16.0)
            }
            _ => ("disk(radius=0.8, amplitude=0.05)", 16.0),
        };
        ExperimentConfig {
            experiment,
            potential: potential.parse().expect("default potential parses"),
            n: if experiment == Experiment::Scaling { 128 } else { 256 },
            half_width: 4.0,
            ks: vec![],
            k_max,
            angles: 64,
            tol: 1e-10,
            theta: 0.0,
            q3_m: 64,
            q3_t: None,
            verify_n: 1024,
            etas: vec![[12.0, 0.0], [9.0, 9.0], [-6.0, 14.0]],
            eps_ladder: vec![0.02, 0.04, 0.08, 0.16],
            c0: 10.0,
            probe_xi: [10.0, 4.0],
            spectral_n: 32,
            cutoff: 10.0,
            threshold: None,
            band: [11.0, 64.0],
            seed: 0,
            out: PathBuf::from(format!("out/{}", experiment.name())),
            cache_dir: PathBuf::from(".backscatter-cache"),
        }
    }

    /// Parse `text` on top of the defaults for `experiment`. An
    /// `experiment` key, if present, must agree.
    pub fn parse(text: &str, experiment: Experiment) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        let mut seen = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), ()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "experiment" => {
                let e: Experiment = v.parse()?;
                if e != self.experiment {
                    return Err(Error::Config(format!("config is for `{e}`, not `{}`", self.experiment)));
                }
            }
            "potential" => self.potential = v.parse()?,
            "n" => self.n = num(key, v)?,
            "half_width" => self.half_width = num(key, v)?,
            "ks" => self.ks = list(key, v)?,
            "k_max" => self.k_max = num(key, v)?,
            "angles" => self.angles = num(key, v)?,
            "tol" => self.tol = num(key, v)?,
            "theta" => self.theta = num(key, v)?,
            "q3_m" => self.q3_m = num(key, v)?,
            "q3_t" => self.q3_t = if v == "auto" { None } else { Some(num(key, v)?) },
            "verify_n" => self.verify_n = num(key, v)?,
            "etas" => {
                self.etas = v
                    .split(';')
                    .map(|p| pair(key, p))
                    .collect::<Result<_>>()?
            }
            "eps_ladder" => self.eps_ladder = list(key, v)?,
            "c0" => self.c0 = num(key, v)?,
            "probe_xi" => self.probe_xi = pair(key, v)?,
            "spectral_n" => self.spectral_n = num(key, v)?,
            "cutoff" => self.cutoff = num(key, v)?,
            "threshold" => self.threshold = if v == "default" { None } else { Some(num(key, v)?) },
            "band" => self.band = pair(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "cache_dir" => self.cache_dir = PathBuf::from(v),
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// All checks that can be made before any computation.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if !(self.tol > 1e-14 && self.tol < 1e-2) {
            return Err(Error::Config(format!("tol = {} outside (1e-14, 1e-2)", self.tol)));
        }
        if !(self.c0 > 1.0) {
            return Err(Error::Config(format!(
                "c0 = {}: the frequency cutoff C₀ of the Born terms must satisfy C₀ > 1",
                self.c0
            )));
        }
        if !(self.k_max > 0.0) || self.ks.iter().any(|k| !(*k > 0.0)) {
            return Err(Error::Config("wavenumbers must be positive".into()));
        }
        if self.ks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("ks must be strictly increasing".into()));
        }
        if self.angles < 16 || !self.angles.is_power_of_two() {
            return Err(Error::Config(format!("angles = {} must be a power of two ≥ 16", self.angles)));
        }
        if self.k_eff_max() > 0.5 * grid.nyquist() {
            return Err(Error::Config(format!(
                "k = {} exceeds half the grid Nyquist frequency {:.3}",
                self.k_eff_max(),
                grid.nyquist()
            )));
        }
        if self.q3_m < 32 || !self.q3_m.is_power_of_two() {
            return Err(Error::Config(format!("q3_m = {} must be a power of two ≥ 32", self.q3_m)));
        }
        if self.eps_ladder.len() < 2 || self.eps_ladder.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("eps_ladder needs at least two positive entries".into()));
        }
        if self.etas.is_empty() || self.etas.iter().any(|e| e[0].hypot(e[1]) <= 10.0) {
            return Err(Error::Config("etas must be nonempty with |η| > 10".into()));
        }
        if !(self.band[0] > 4.0 && self.band[1] > self.band[0]) {
            return Err(Error::Config(format!("band {:?} must satisfy 4 < lower < upper", self.band)));
        }
        if !(self.cutoff >= 0.0) {
            return Err(Error::Config("cutoff must be non-negative".into()));
        }
        Grid2D::new(self.verify_n, self.half_width)?;
        Grid2D::new(self.spectral_n, self.half_width)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.n, self.half_width).map_err(|e| Error::Config(e.to_string()))
    }

    fn k_eff_max(&self) -> f64 {
        match self.experiment {
            Experiment::Born | Experiment::Theorem2 => self.ks.last().copied().unwrap_or(self.k_max),
            Experiment::Forward => self.k_max.max(self.ks.last().copied().unwrap_or(0.0)),
            _ => 0.0,
        }
    }

    pub fn q3_params(&self) -> Q3Params {
        Q3Params { m: self.q3_m, t_max: self.q3_t, ..Q3Params::default() }
    }

    /// Canonical text: one `key = value` per line, fixed order.
    pub fn resolved(&self) -> String {
        let fl = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::new();
        let mut kv = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        kv("experiment", self.experiment.to_string());
        kv("potential", self.potential.to_string());
        kv("n", self.n.to_string());
        kv("half_width", format!("{:?}", self.half_width));
        if !self.ks.is_empty() {
            kv("ks", fl(&self.ks));
        }
        kv("k_max", format!("{:?}", self.k_max));
        kv("angles", self.angles.to_string());
        kv("tol", format!("{:?}", self.tol));
        kv("theta", format!("{:?}", self.theta));
        kv("q3_m", self.q3_m.to_string());
        kv("q3_t", self.q3_t.map_or("auto".into(), |t| format!("{t:?}")));
        kv("verify_n", self.verify_n.to_string());
        kv("etas", self.etas.iter().map(|e| format!("{:?}, {:?}", e[0], e[1])).collect::<Vec<_>>().join("; "));
        kv("eps_ladder", fl(&self.eps_ladder));
        kv("c0", format!("{:?}", self.c0));
        kv("probe_xi", fl(&self.probe_xi));
        kv("spectral_n", self.spectral_n.to_string());
        kv("cutoff", format!("{:?}", self.cutoff));
        kv("threshold", self.threshold.map_or("default".into(), |t| format!("{t:?}")));
        kv("band", fl(&self.band));
        kv("seed", self.seed.to_string());
        kv("out", self.out.display().to_string());
        kv("cache_dir", self.cache_dir.display().to_string());
        s
    }

    /// SHA-256 of the resolved text, excluding where outputs go.
    pub fn hash(&self) -> String {
        let text: String = self
            .resolved()
            .lines()
            .filter(|l| !l.starts_with("out =") && !l.starts_with("cache_dir ="))
            .map(|l| format!("{l}\n"))
            .collect();
        let d = Sha256::digest(text.as_bytes());
        d.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| num(key, x.trim())).collect()
}

fn pair(key: &str, v: &str) -> Result<[f64; 2]> {
    let l = list(key, v)?;
    <[f64; 2]>::try_from(l.as_slice()).map_err(|_| Error::Config(format!("`{key}`: expected two numbers, found `{v}`")))
}
