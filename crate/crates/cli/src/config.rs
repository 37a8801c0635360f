//! `key = value` configuration for the `pipeline` subcommand.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use c2v_core::clean::CleanConfig;
use c2v_core::embed::TrainConfig;
use c2v_core::eval::SplitConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub sql: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub wordnet_dir: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub seed: u64,
    pub threads: usize,
    pub k: usize,
    pub train: TrainConfig,
    pub clean: CleanConfig,
    pub split: SplitConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sql: Vec::new(),
            out_dir: PathBuf::from("c2v-out"),
            wordnet_dir: None,
            lexicon: None,
            seed: 42,
            threads: 1,
            k: 1,
            train: TrainConfig::default(),
            clean: CleanConfig::default(),
            split: SplitConfig::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::parse(&text, base).with_context(|| format!("in config file {}", path.display()))
    }

    /// Parses config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`", n + 1);
            };
            cfg.set(key.trim(), value.trim(), base)
                .with_context(|| format!("line {}", n + 1))?;
        }
        if cfg.sql.is_empty() {
            bail!("no `sql` input files given");
        }
        cfg.train.seed = cfg.seed;
        cfg.train.threads = cfg.threads;
        cfg.split.seed = cfg.seed;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let path = |v: &str| base.join(v);
        match key {
            "sql" => self
                .sql
                .extend(value.split(',').map(str::trim).filter(|v| !v.is_empty()).map(path)),
            "out_dir" => self.out_dir = path(value),
            "wordnet_dir" => self.wordnet_dir = Some(path(value)),
            "lexicon" => self.lexicon = Some(path(value)),
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "train_fraction" => self.split.train_fraction = parse(key, value)?,
            "rare_trigram_fraction" => self.clean.rare_trigram_fraction = parse(key, value)?,
            "digit_fraction" => self.clean.digit_fraction = parse(key, value)?,
            "dim" => self.train.dim = parse(key, value)?,
            "window" => self.train.window = parse(key, value)?,
            "window_full" => self.train.window_full = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "learning_rate" => self.train.learning_rate = parse(key, value)?,
            "negatives" => self.train.negatives = parse(key, value)?,
            "ngram_min" => self.train.ngram_min = parse(key, value)?,
            "ngram_max" => self.train.ngram_max = parse(key, value)?,
            "bucket" => self.train.bucket = parse(key, value)?,
            "min_count" => self.train.min_count = parse(key, value)?,
            other => bail!("unknown key `{other}`"),
        }
        Ok(())
    }
}
