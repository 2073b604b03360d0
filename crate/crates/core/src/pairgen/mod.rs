//! Style-variant sets and the source/target pair dataset consumed by the
//! neural stage.
//!
//! For a unit written by author `i` among `n` authors, a targeted search toward
//! every other author `j` yields `n - 1` variants. Pairs are adjacent variants
//! in the order `[0..n] \ {i}` followed by `i`; dropping the single pair that
//! reaches `i` leaves exactly `n - 2`.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attrib::Attributor;
use crate::corpus::SourceUnit;
use crate::frontend::{parse_source, SyntaxFailure};
use crate::interp::{check_equivalence, EquivError};
use crate::mcts::{evade, Objective, SearchConfig, SearchError};
use crate::transforms::TransformAction;

#[derive(Debug, Error)]
pub enum PairgenError {
    #[error("program admits no transform")]
    NoActions,
    #[error("author {0:?} is not in the author list")]
    UnknownAuthor(String),
    #[error("{0} styles; pairs need at least 3")]
    TooFewStyles(usize),
    #[error("refusing to export an empty pair dataset")]
    EmptyDataset,
    #[error("unit {unit} does not parse: {source}")]
    Syntax { unit: String, source: SyntaxFailure },
    #[error(transparent)]
    Search(SearchError),
    #[error(transparent)]
    Equivalence(#[from] EquivError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {source}")]
    Schema { path: PathBuf, line: usize, source: serde_json::Error },
}

impl From<SearchError> for PairgenError {
    fn from(e: SearchError) -> Self {
        match e {
            SearchError::NoActions => PairgenError::NoActions,
            other => PairgenError::Search(other),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PairgenConfig {
    pub search: SearchConfig,
    /// Drop variants whose targeted search did not reach the target author.
    pub strict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variant {
    /// 0-based index into the author list.
    pub style: usize,
    pub code: String,
    /// False when the search ended without reaching the target; the
    /// highest-reward state is kept instead.
    pub reached_target: bool,
    pub sequence: Vec<TransformAction>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleSet {
    pub source: SourceUnit,
    pub authors: Vec<String>,
    /// Index of `source.author`; never present among `variants`.
    pub own: usize,
    /// Ascending by `style`.
    pub variants: Vec<Variant>,
    /// Styles whose variant was discarded by the strict or equivalence filter.
    pub dropped: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pair {
    pub src: String,
    pub tgt: String,
    pub author: String,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDataset {
    pub pairs: Vec<Pair>,
}

/// Per-target search seed, so results do not depend on scheduling.
fn search_seed(base: u64, unit: &SourceUnit, style: usize) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in unit.id().bytes().chain((style as u64).to_le_bytes()) {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    base ^ h
}

pub fn build_style_set(
    unit: &SourceUnit,
    authors: &[String],
    model: &dyn Attributor,
    cfg: &PairgenConfig,
) -> Result<StyleSet, PairgenError> {
    let own = authors
        .iter()
        .position(|a| *a == unit.author)
        .ok_or_else(|| PairgenError::UnknownAuthor(unit.author.clone()))?;
    let program = parse_source(&unit.code).map_err(|source| PairgenError::Syntax { unit: unit.id(), source })?;
    let results: Vec<(usize, Result<Option<Variant>, PairgenError>)> = (0..authors.len())
        .into_par_iter()
        .filter(|&j| j != own)
        .map(|j| {
            let search = SearchConfig { seed: search_seed(cfg.search.seed, unit, j), ..cfg.search };
            let run = || -> Result<Option<Variant>, PairgenError> {
                let r = evade(&program, model, &Objective::Targeted(authors[j].clone()), &search)?;
                if cfg.strict && !r.success {
                    return Ok(None);
                }
                if !unit.tests.is_empty() && !check_equivalence(&program, &r.final_code, &unit.tests)?.is_equivalent() {
                    return Ok(None);
                }
                Ok(Some(Variant { style: j, code: r.final_code, reached_target: r.success, sequence: r.sequence }))
            };
            (j, run())
        })
        .collect();
    let mut variants = Vec::new();
    let mut dropped = Vec::new();
    for (j, r) in results {
        match r? {
            Some(v) => variants.push(v),
            None => dropped.push(j),
        }
    }
    Ok(StyleSet { source: unit.clone(), authors: authors.to_vec(), own, variants, dropped })
}

/// Adjacent pairs over the variants in style order; `n - 2` when none were dropped.
pub fn build_pairs(set: &StyleSet) -> Result<Vec<Pair>, PairgenError> {
    let n = set.authors.len();
    if n < 3 {
        return Err(PairgenError::TooFewStyles(n));
    }
    Ok(set
        .variants
        .windows(2)
        .map(|w| Pair {
            src: w[0].code.clone(),
            tgt: w[1].code.clone(),
            author: set.source.author.clone(),
            from: w[0].style,
            to: w[1].style,
        })
        .collect())
}

/// Style sets and pairs for every unit, in unit order.
pub fn build_dataset(
    units: &[SourceUnit],
    authors: &[String],
    model: &dyn Attributor,
    cfg: &PairgenConfig,
) -> Result<(Vec<StyleSet>, PairDataset), PairgenError> {
    let sets = units.par_iter().map(|u| build_style_set(u, authors, model, cfg)).collect::<Result<Vec<_>, _>>()?;
    let mut pairs = Vec::new();
    for s in &sets {
        pairs.extend(build_pairs(s)?);
    }
    Ok((sets, PairDataset { pairs }))
}

pub fn export_jsonl(dataset: &PairDataset, path: &Path) -> Result<(), PairgenError> {
    if dataset.pairs.is_empty() {
        return Err(PairgenError::EmptyDataset);
    }
    let mut buf = Vec::new();
    for p in &dataset.pairs {
        serde_json::to_writer(&mut buf, p).expect("pairs serialize");
        buf.push(b'\n');
    }
    let io = |source| PairgenError::Io { path: path.to_path_buf(), source };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(&buf).map_err(io)
}

pub fn read_jsonl(path: &Path) -> Result<PairDataset, PairgenError> {
    let io = |source| PairgenError::Io { path: path.to_path_buf(), source };
    let f = fs::File::open(path).map_err(io)?;
    let mut pairs = Vec::new();
    for (k, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        pairs.push(serde_json::from_str(&line).map_err(|source| PairgenError::Schema {
            path: path.to_path_buf(),
            line: k + 1,
            source,
        })?);
    }
    Ok(PairDataset { pairs })
}

#[cfg(test)]
mod tests;
