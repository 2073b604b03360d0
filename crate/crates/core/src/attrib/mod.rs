//! Stylometric authorship attribution: TF-IDF or AST-stylometry features fed
//! to a random forest.

mod ast_features;
mod forest;
mod tfidf;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::SourceUnit;
use crate::frontend::{parse_source, SyntaxFailure};

pub use ast_features::{ast_dim, ast_feature_names, featurize_ast};
pub use forest::{train_forest, Forest, ForestConfig, Node, Tree};
pub use tfidf::{build_vocabulary, featurize_tfidf, terms, TermUnit, VocabConfig, Vocabulary};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AttribError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("training data has a single author")]
    SingleClass,
    #[error("{features} feature vectors but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("feature dimension {got} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("source does not parse: {0}")]
    Syntax(#[from] SyntaxFailure),
    #[error("model version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u32 },
    #[error("model file is malformed: {0}")]
    Format(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Sparse vector with strictly increasing indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub entries: Vec<(u32, f64)>,
    pub dim: usize,
}

impl FeatureVector {
    /// Drops zero weights and scales to unit L2 norm (zero vectors stay zero).
    pub fn normalized(entries: Vec<(u32, f64)>, dim: usize) -> FeatureVector {
        let mut entries: Vec<(u32, f64)> = entries.into_iter().filter(|e| e.1 != 0.0).collect();
        let norm = entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt();
        if norm > 0.0 {
            entries.iter_mut().for_each(|e| e.1 /= norm);
        }
        FeatureVector { entries, dim }
    }

    pub fn from_dense(v: &[f64]) -> FeatureVector {
        FeatureVector::normalized(v.iter().enumerate().map(|(i, &w)| (i as u32, w)).collect(), v.len())
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for &(i, w) in &self.entries {
            d[i as usize] = w;
        }
        d
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.1 * e.1).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TfidfRf,
    AstRf,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::TfidfRf => "tfidf-rf",
            ModelKind::AstRf => "ast-rf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub kind: ModelKind,
    pub vocab: VocabConfig,
    pub forest: ForestConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig { kind: ModelKind::TfidfRf, vocab: VocabConfig::default(), forest: ForestConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub author: String,
    /// Probabilities aligned with the model's label order.
    pub distribution: Vec<f64>,
}

/// Index of the largest probability; ties go to the earliest (lexicographically
/// smallest) label.
pub fn argmax(dist: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in dist.iter().enumerate() {
        if p > dist[best] {
            best = i;
        }
    }
    best
}

/// Anything that maps source text to an author distribution.
pub trait Attributor: Send + Sync {
    /// Sorted, distinct author labels.
    fn labels(&self) -> &[String];

    fn distribution(&self, source: &str) -> Result<Vec<f64>, AttribError>;

    fn predict_source(&self, source: &str) -> Result<Prediction, AttribError> {
        let distribution = self.distribution(source)?;
        let author = self.labels()[argmax(&distribution)].clone();
        Ok(Prediction { author, distribution })
    }

    fn label_index(&self, author: &str) -> Option<usize> {
        self.labels().binary_search_by(|l| l.as_str().cmp(author)).ok()
    }
}

/// Trained classifier. Immutable; share it across threads by reference.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributionModel {
    version: u32,
    kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocabulary: Option<Vocabulary>,
    labels: Vec<String>,
    forest: Forest,
}

/// Trains a forest on precomputed features. `vocabulary` must be present for
/// `tfidf-rf` so the model can featurize new text.
pub fn train_rf(
    kind: ModelKind,
    vocabulary: Option<Vocabulary>,
    features: &[FeatureVector],
    labels: &[String],
    cfg: &ForestConfig,
) -> Result<AttributionModel, AttribError> {
    if features.len() != labels.len() {
        return Err(AttribError::LengthMismatch { features: features.len(), labels: labels.len() });
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(AttribError::SingleClass);
    }
    let dim = match (kind, &vocabulary) {
        (ModelKind::TfidfRf, Some(v)) => v.len(),
        (ModelKind::TfidfRf, None) => return Err(AttribError::EmptyCorpus),
        (ModelKind::AstRf, _) => ast_dim(),
    };
    if let Some(f) = features.iter().find(|f| f.dim != dim) {
        return Err(AttribError::DimensionMismatch { expected: dim, got: f.dim });
    }
    let x: Vec<Vec<f64>> = features.iter().map(FeatureVector::to_dense).collect();
    let y: Vec<usize> = labels.iter().map(|l| classes.binary_search(l).expect("label collected above")).collect();
    let forest = train_forest(&x, &y, classes.len(), cfg);
    Ok(AttributionModel { version: MODEL_VERSION, kind, vocabulary, labels: classes, forest })
}

/// Builds the vocabulary (for `tfidf-rf`), featurizes and trains.
pub fn train_model(units: &[SourceUnit], cfg: &TrainConfig) -> Result<AttributionModel, AttribError> {
    if units.is_empty() {
        return Err(AttribError::EmptyCorpus);
    }
    let labels: Vec<String> = units.iter().map(|u| u.author.clone()).collect();
    match cfg.kind {
        ModelKind::TfidfRf => {
            let docs: Vec<&str> = units.iter().map(|u| u.code.as_str()).collect();
            let vocab = build_vocabulary(&docs, cfg.vocab)?;
            let features: Vec<FeatureVector> = docs.par_iter().map(|d| featurize_tfidf(d, &vocab)).collect();
            train_rf(cfg.kind, Some(vocab), &features, &labels, &cfg.forest)
        }
        ModelKind::AstRf => {
            let features = units
                .par_iter()
                .map(|u| Ok(featurize_ast(&parse_source(&u.code)?, &u.code)))
                .collect::<Result<Vec<_>, AttribError>>()?;
            train_rf(cfg.kind, None, &features, &labels, &cfg.forest)
        }
    }
}

impl AttributionModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn vocabulary(&self) -> Option<&Vocabulary> {
        self.vocabulary.as_ref()
    }

    pub fn forest(&self) -> &Forest {
        &self.forest
    }

    pub fn dim(&self) -> usize {
        self.forest.dim
    }

    pub fn featurize(&self, source: &str) -> Result<FeatureVector, AttribError> {
        match (self.kind, &self.vocabulary) {
            (ModelKind::TfidfRf, Some(v)) => Ok(featurize_tfidf(source, v)),
            _ => Ok(featurize_ast(&parse_source(source)?, source)),
        }
    }

    pub fn predict(&self, features: &FeatureVector) -> Result<Prediction, AttribError> {
        if features.dim != self.dim() {
            return Err(AttribError::DimensionMismatch { expected: self.dim(), got: features.dim });
        }
        let distribution = self.forest.predict_proba(&features.to_dense());
        Ok(Prediction { author: self.labels[argmax(&distribution)].clone(), distribution })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<AttributionModel, AttribError> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let found = raw.get("version").and_then(serde_json::Value::as_u64).unwrap_or(0);
        if found != MODEL_VERSION as u64 {
            return Err(AttribError::VersionMismatch { found, expected: MODEL_VERSION });
        }
        Ok(serde_json::from_value(raw)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), AttribError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<AttributionModel, AttribError> {
        AttributionModel::from_json(&std::fs::read_to_string(path)?)
    }
}

impl Attributor for AttributionModel {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn distribution(&self, source: &str) -> Result<Vec<f64>, AttribError> {
        Ok(self.predict(&self.featurize(source)?)?.distribution)
    }
}

/// Fraction of units attributed to their true author. Units that cannot be
/// featurized count as misattributed.
pub fn evaluate_accuracy(model: &dyn Attributor, test: &[SourceUnit]) -> Result<f64, AttribError> {
    if test.is_empty() {
        return Err(AttribError::EmptyCorpus);
    }
    let hits = test.par_iter().filter(|u| model.predict_source(&u.code).is_ok_and(|p| p.author == u.author)).count();
    Ok(hits as f64 / test.len() as f64)
}
