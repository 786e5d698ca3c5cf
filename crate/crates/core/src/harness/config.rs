//! Flat `key = value` settings shared by the config file and the command line.

use std::path::{Path, PathBuf};

use super::Placement;
use crate::assembly::{DEFAULT_C_STAR, DEFAULT_LOAD_DEGREE};
use crate::error::{Error, Result};
use crate::norms::DEFAULT_DEGREE;
use crate::solver::SolveMethod;
use crate::weight::DEFAULT_K_GRID;

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub b: f64,
    pub c: f64,
    pub beta: f64,
    pub cstar: f64,
    pub k: Vec<f64>,
    pub placements: Vec<Placement>,
    pub quad_degree: usize,
    pub load_degree: usize,
    pub strict: bool,
    pub seed: u64,
    pub out: PathBuf,
    pub preset: String,
    pub method: SolveMethod,
    pub trials: usize,
    pub density: usize,
    pub p: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            n: vec![24],
            epsilon: vec![1e-4],
            b: 1.0,
            c: 1.0,
            beta: 1.0,
            cstar: DEFAULT_C_STAR,
            k: DEFAULT_K_GRID.to_vec(),
            placements: vec![Placement::CenterOmegaS, Placement::MidOmegaX],
            quad_degree: DEFAULT_DEGREE,
            load_degree: DEFAULT_LOAD_DEGREE,
            strict: true,
            seed: 20_240_601,
            out: PathBuf::from("out"),
            preset: "manufactured-sine".into(),
            method: SolveMethod::BandedLu,
            trials: 200,
            density: 100,
            p: 2.0,
        }
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::InvalidParameter(format!("bad value `{v}` for `{key}`")))
        })
        .collect()
}

fn one<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::InvalidParameter(format!("bad value `{value}` for `{key}`")))
}

impl Settings {
    /// Applies one setting. Keys match the long command-line flags.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key.trim().replace('_', "-").as_str() {
            "n" => self.n = list(key, value)?,
            "epsilon" | "eps" => self.epsilon = list(key, value)?,
            "b" => self.b = one(key, value)?,
            "c" => self.c = one(key, value)?,
            "beta" => self.beta = one(key, value)?,
            "cstar" => self.cstar = one(key, value)?,
            "k" => self.k = list(key, value)?,
            "placement" => self.placements = list(key, value)?,
            "quad-degree" => self.quad_degree = one(key, value)?,
            "load-degree" => self.load_degree = one(key, value)?,
            "strict" => self.strict = one(key, value)?,
            "no-strict" => self.strict = !one::<bool>(key, value)?,
            "seed" => self.seed = one(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            "preset" => self.preset = value.trim().to_string(),
            "method" => {
                self.method = match value.trim() {
                    "banded-lu" | "direct" => SolveMethod::BandedLu,
                    "bicgstab" | "bicgstab-ilu0" | "iterative" => SolveMethod::BiCgStabIlu0,
                    other => {
                        return Err(Error::InvalidParameter(format!("unknown method `{other}`")))
                    }
                }
            }
            "trials" => self.trials = one(key, value)?,
            "density" => self.density = one(key, value)?,
            "p" => {
                self.p = match value.trim() {
                    "inf" | "infinity" => f64::INFINITY,
                    v => one(key, v)?,
                }
            }
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown setting `{other}`"
                )))
            }
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn apply_config_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: lineno + 1,
                msg: format!("expected key = value, got `{line}`"),
            })?;
            self.apply(key, value).map_err(|e| Error::Config {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn apply_config_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_config_text(&text)
    }

    pub fn first_n(&self) -> usize {
        self.n[0]
    }

    pub fn first_epsilon(&self) -> f64 {
        self.epsilon[0]
    }

    pub fn first_k(&self) -> f64 {
        self.k[0]
    }
}
