use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::attrib::{ForestConfig, TermUnit, VocabConfig};
use crate::mcts::{SearchConfig, Widening};

/// Flat key-value experiment description; every key is optional.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Artifacts land here; relative paths resolve against the config file.
    pub out_dir: PathBuf,
    /// On-disk corpus. Empty selects the synthetic corpus.
    pub corpus_dir: PathBuf,
    pub synth_authors: usize,
    pub synth_challenges: usize,
    pub synth_noise: f64,
    pub tests_per_unit: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub term_unit: TermUnit,
    pub ngram: usize,
    pub max_terms: usize,
    pub n_trees: usize,
    pub budget: usize,
    pub max_depth: usize,
    pub exploration: f64,
    pub rollout_depth: usize,
    pub early_stop: bool,
    /// 0 disables progressive widening.
    pub widening_c: f64,
    pub widening_alpha: f64,
    /// Evade at most this many correctly attributed test units; 0 means all.
    pub evade_limit: usize,
    pub random_baseline: bool,
    pub pairgen: bool,
    pub pairgen_strict: bool,
    pub pairgen_budget: usize,
    /// Build style sets for at most this many training units; 0 means all.
    pub pairgen_limit: usize,
    /// Shell command for the neural stage. Empty disables it.
    pub neural_command: String,
    /// 0 uses every core; `UNSTYLE_WORKERS` overrides.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let search = SearchConfig::default();
        let widening = search.widening.unwrap_or(Widening { c: 0.0, alpha: 0.0 });
        ExperimentConfig {
            out_dir: PathBuf::from("run"),
            corpus_dir: PathBuf::new(),
            synth_authors: 20,
            synth_challenges: 8,
            synth_noise: 0.1,
            tests_per_unit: 3,
            seed: 0,
            train_fraction: 0.75,
            term_unit: TermUnit::CharNgram,
            ngram: 3,
            max_terms: VocabConfig::default().max_terms,
            n_trees: ForestConfig::default().n_trees,
            budget: search.budget,
            max_depth: search.max_depth,
            exploration: search.exploration,
            rollout_depth: search.rollout_depth,
            early_stop: search.early_stop,
            widening_c: widening.c,
            widening_alpha: widening.alpha,
            evade_limit: 0,
            random_baseline: true,
            pairgen: true,
            pairgen_strict: false,
            pairgen_budget: 100,
            pairgen_limit: 0,
            neural_command: String::new(),
            workers: 0,
        }
    }
}

pub const WORKERS_ENV: &str = "UNSTYLE_WORKERS";

fn resolve_workers(env: Option<&str>, configured: usize) -> usize {
    env.and_then(|v| v.trim().parse().ok()).unwrap_or(configured)
}

impl ExperimentConfig {
    /// Parses `path`; relative directories are resolved against its parent.
    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for dir in [&mut cfg.out_dir, &mut cfg.corpus_dir] {
            if !dir.as_os_str().is_empty() && dir.is_relative() {
                *dir = base.join(&*dir);
            }
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad("train_fraction must lie in (0, 1)");
        }
        if self.exploration <= 0.0 {
            return bad("exploration must be positive");
        }
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if self.corpus_dir.as_os_str().is_empty() && self.synth_authors < 2 {
            return bad("synth_authors must be at least 2");
        }
        if self.widening_c < 0.0 || self.widening_alpha < 0.0 {
            return bad("widening parameters must be non-negative");
        }
        Ok(())
    }

    /// Config value unless the environment override is set and valid.
    pub fn effective_workers(&self) -> usize {
        resolve_workers(std::env::var(WORKERS_ENV).ok().as_deref(), self.workers)
    }

    pub fn vocab(&self) -> VocabConfig {
        VocabConfig { unit: self.term_unit, n: self.ngram, max_terms: self.max_terms }
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig { n_trees: self.n_trees, seed: self.seed, ..Default::default() }
    }

    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            budget: self.budget,
            max_depth: self.max_depth,
            exploration: self.exploration,
            rollout_depth: self.rollout_depth,
            early_stop: self.early_stop,
            seed: self.seed,
            widening: (self.widening_c > 0.0).then_some(Widening { c: self.widening_c, alpha: self.widening_alpha }),
        }
    }
}
