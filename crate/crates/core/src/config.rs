//! Run configuration in a flat `key = value` file.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the work directory. `PIPEFORGE_SEED` overrides `seed`.

use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SEED_ENV: &str = "PIPEFORGE_SEED";

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub dim: usize,
    pub hidden: usize,
    pub rounds: usize,
    pub max_nodes: usize,
    pub k: usize,
    pub retries: usize,
    pub seed: u64,
    pub corpus_dir: PathBuf,
    pub model_file: PathBuf,
    pub index_file: PathBuf,
    pub registry_file: PathBuf,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            dim: crate::profile::DEFAULT_DIM,
            hidden: 32,
            rounds: 2,
            max_nodes: crate::generator::generate::DEFAULT_MAX_GENERATED_NODES,
            k: 3,
            retries: crate::generator::generate::DEFAULT_RETRIES,
            seed: 0,
            corpus_dir: "corpus".into(),
            model_file: "model.pgen".into(),
            index_file: "corpus/index.pfix".into(),
            registry_file: "registry.json".into(),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {0}: expected key = value")]
    Syntax(usize),
    #[error("line {0}: unknown key {1:?}")]
    UnknownKey(usize, String),
    #[error("line {0}: bad value for {1}")]
    BadValue(usize, String),
    #[error("{0} must be positive")]
    NotPositive(&'static str),
    #[error("{SEED_ENV} is not an unsigned integer: {0:?}")]
    BadSeedEnv(String),
    #[error("cannot read config: {0}")]
    Io(String),
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax(n))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<usize>().map_err(|_| ConfigError::BadValue(n, k.to_string()));
            match k {
                "dim" => c.dim = num(v)?,
                "hidden" => c.hidden = num(v)?,
                "rounds" => c.rounds = num(v)?,
                "max_nodes" => c.max_nodes = num(v)?,
                "k" => c.k = num(v)?,
                "retries" => c.retries = num(v)?,
                "seed" => c.seed = v.parse().map_err(|_| ConfigError::BadValue(n, k.to_string()))?,
                "corpus_dir" => c.corpus_dir = v.into(),
                "model_file" => c.model_file = v.into(),
                "index_file" => c.index_file = v.into(),
                "registry_file" => c.registry_file = v.into(),
                _ => return Err(ConfigError::UnknownKey(n, k.to_string())),
            }
        }
        c.check()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<(), ConfigError> {
        for (name, v) in [
            ("dim", self.dim),
            ("hidden", self.hidden),
            ("max_nodes", self.max_nodes),
            ("k", self.k),
        ] {
            if v == 0 {
                return Err(ConfigError::NotPositive(name));
            }
        }
        Ok(())
    }

    /// Applies `PIPEFORGE_SEED` when it is set.
    pub fn with_env(mut self) -> Result<Self, ConfigError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| ConfigError::BadSeedEnv(v.clone()))?;
        }
        Ok(self)
    }

    /// Makes every relative path absolute under `workdir`.
    pub fn rooted(mut self, workdir: &Path) -> Self {
        for p in [
            &mut self.corpus_dir,
            &mut self.model_file,
            &mut self.index_file,
            &mut self.registry_file,
        ] {
            if p.is_relative() {
                *p = workdir.join(&*p);
            }
        }
        self
    }
}
