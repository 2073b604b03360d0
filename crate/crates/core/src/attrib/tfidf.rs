use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{AttribError, FeatureVector};
use crate::frontend::{tokenize, TokenKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermUnit {
    /// Identifier, keyword, literal and operator lexemes. Punctuation is skipped.
    Word,
    /// Character n-grams of the raw source.
    CharNgram,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VocabConfig {
    pub unit: TermUnit,
    /// Only used in char-ngram mode.
    pub n: usize,
    pub max_terms: usize,
}

impl Default for VocabConfig {
    fn default() -> Self {
        VocabConfig { unit: TermUnit::Word, n: 3, max_terms: 2500 }
    }
}

#[derive(Serialize, Deserialize)]
struct VocabularyData {
    config: VocabConfig,
    terms: Vec<String>,
    doc_freq: Vec<usize>,
    n_docs: usize,
}

/// Terms sorted by (document frequency desc, term asc).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyData", into = "VocabularyData")]
pub struct Vocabulary {
    pub config: VocabConfig,
    pub terms: Vec<String>,
    pub doc_freq: Vec<usize>,
    pub n_docs: usize,
    index: HashMap<String, usize>,
}

impl From<VocabularyData> for Vocabulary {
    fn from(d: VocabularyData) -> Self {
        let index = d.terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Vocabulary { config: d.config, terms: d.terms, doc_freq: d.doc_freq, n_docs: d.n_docs, index }
    }
}

impl From<Vocabulary> for VocabularyData {
    fn from(v: Vocabulary) -> Self {
        VocabularyData { config: v.config, terms: v.terms, doc_freq: v.doc_freq, n_docs: v.n_docs }
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    /// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
    pub fn idf(&self, i: usize) -> f64 {
        ((1.0 + self.n_docs as f64) / (1.0 + self.doc_freq[i] as f64)).ln() + 1.0
    }
}

/// Splits a document into terms. Unlexable text falls back to whitespace words.
pub fn terms(source: &str, config: &VocabConfig) -> Vec<String> {
    match config.unit {
        TermUnit::Word => match tokenize(source) {
            Ok(ts) => ts.tokens.into_iter().filter(|t| t.kind != TokenKind::Punctuation).map(|t| t.text).collect(),
            Err(_) => source.split_whitespace().map(str::to_owned).collect(),
        },
        TermUnit::CharNgram => {
            let chars: Vec<char> = source.chars().collect();
            if config.n == 0 {
                return Vec::new();
            }
            chars.windows(config.n).map(|w| w.iter().collect()).collect()
        }
    }
}

pub fn build_vocabulary(docs: &[&str], config: VocabConfig) -> Result<Vocabulary, AttribError> {
    if docs.is_empty() {
        return Err(AttribError::EmptyCorpus);
    }
    let mut df: HashMap<String, usize> = HashMap::new();
    for d in docs {
        let uniq: HashSet<String> = terms(d, &config).into_iter().collect();
        for t in uniq {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(config.max_terms);
    let (terms, doc_freq) = ranked.into_iter().unzip();
    Ok(VocabularyData { config, terms, doc_freq, n_docs: docs.len() }.into())
}

/// Raw-count tf times smoothed idf, L2-normalized. Unknown terms are ignored.
pub fn featurize_tfidf(source: &str, vocab: &Vocabulary) -> FeatureVector {
    let mut tf: BTreeMap<usize, f64> = BTreeMap::new();
    for t in terms(source, &vocab.config) {
        if let Some(i) = vocab.index_of(&t) {
            *tf.entry(i).or_default() += 1.0;
        }
    }
    let entries = tf.into_iter().map(|(i, c)| (i as u32, c * vocab.idf(i))).collect();
    FeatureVector::normalized(entries, vocab.len())
}
