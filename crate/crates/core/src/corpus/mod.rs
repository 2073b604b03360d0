//! Corpus ingestion (`<author>/<challenge>.cpp` plus `tests/`) and stratified splits.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{analyze, parse_source};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestCase {
    pub input: String,
    pub expected_output: String,
    /// Absolute tolerance for numeric tokens; `None` means exact comparison.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

impl TestCase {
    pub fn new(input: impl Into<String>, expected_output: impl Into<String>) -> Self {
        TestCase { input: input.into(), expected_output: expected_output.into(), tolerance: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceUnit {
    pub author: String,
    pub challenge: String,
    pub code: String,
    pub tests: Vec<TestCase>,
}

impl SourceUnit {
    pub fn id(&self) -> String {
        format!("{}/{}", self.author, self.challenge)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    /// Sorted by (author, challenge).
    pub units: Vec<SourceUnit>,
    /// Sorted, distinct.
    pub authors: Vec<String>,
}

impl Corpus {
    pub fn new(mut units: Vec<SourceUnit>) -> Self {
        units.sort_by(|a, b| (&a.author, &a.challenge).cmp(&(&b.author, &b.challenge)));
        let mut authors: Vec<String> = units.iter().map(|u| u.author.clone()).collect();
        authors.dedup();
        Corpus { units, authors }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Writes the on-disk layout read by [`ingest_corpus`].
    pub fn write_to(&self, root: &Path) -> Result<(), CorpusError> {
        for u in &self.units {
            let dir = root.join(&u.author);
            let tests = dir.join("tests");
            fs::create_dir_all(&tests).map_err(|e| io_err(&tests, e))?;
            let file = dir.join(format!("{}.cpp", u.challenge));
            fs::write(&file, &u.code).map_err(|e| io_err(&file, e))?;
            for (i, t) in u.tests.iter().enumerate() {
                let input = tests.join(format!("{}.{}.in", u.challenge, i + 1));
                fs::write(&input, &t.input).map_err(|e| io_err(&input, e))?;
                let output = tests.join(format!("{}.{}.out", u.challenge, i + 1));
                fs::write(&output, &t.expected_output).map_err(|e| io_err(&output, e))?;
            }
        }
        Ok(())
    }
}

/// One line of the rejection report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub path: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ingested {
    pub corpus: Corpus,
    pub rejections: Vec<Rejection>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus root {0} does not exist or is not a directory")]
    MissingRoot(PathBuf),
    #[error("corpus contains no parsable units")]
    EmptyCorpus,
    #[error("author {0} has fewer than 2 units")]
    AuthorTooSmall(String),
    #[error("train fraction {0} is not in (0, 1)")]
    InvalidFraction(f64),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io { path: path.to_path_buf(), source }
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CorpusError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| io_err(dir, e))? {
        out.push(entry.map_err(|e| io_err(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

enum Loaded {
    Unit(SourceUnit),
    Rejected(Rejection),
}

/// Reads every `<author>/<challenge>.cpp` under `root`. Undecodable or
/// out-of-subset sources are reported, never silently dropped.
pub fn ingest_corpus(root: &Path) -> Result<Ingested, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::MissingRoot(root.to_path_buf()));
    }
    let mut jobs = Vec::new();
    for author_dir in sorted_entries(root)? {
        if !author_dir.is_dir() {
            continue;
        }
        for file in sorted_entries(&author_dir)? {
            if file.is_file() && file.extension().is_some_and(|e| e == "cpp") {
                jobs.push(file);
            }
        }
    }
    let loaded: Vec<Result<Vec<Loaded>, CorpusError>> = jobs.par_iter().map(|f| load_unit(root, f)).collect();
    let mut units = Vec::new();
    let mut rejections = Vec::new();
    for l in loaded {
        for item in l? {
            match item {
                Loaded::Unit(u) => units.push(u),
                Loaded::Rejected(r) => rejections.push(r),
            }
        }
    }
    if units.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    rejections.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(Ingested { corpus: Corpus::new(units), rejections })
}

fn display(root: &Path, p: &Path) -> String {
    p.strip_prefix(root).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

fn load_unit(root: &Path, file: &Path) -> Result<Vec<Loaded>, CorpusError> {
    let mut out = Vec::new();
    let author = file.parent().and_then(Path::file_name).map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let challenge = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let reject = |reason: String| Loaded::Rejected(Rejection { path: display(root, file), reason });
    let bytes = fs::read(file).map_err(|e| io_err(file, e))?;
    let code = match String::from_utf8(bytes) {
        Ok(c) => c,
        Err(e) => {
            out.push(reject(format!("invalid UTF-8 at byte {}", e.utf8_error().valid_up_to())));
            return Ok(out);
        }
    };
    if author.is_empty() || challenge.is_empty() {
        out.push(reject("empty author or challenge name".into()));
        return Ok(out);
    }
    if let Err(f) = parse_source(&code).and_then(|p| analyze(&p).map(|_| ())) {
        out.push(reject(format!("out of subset: {f}")));
        return Ok(out);
    }
    let tests = load_tests(root, file, &challenge, &mut out)?;
    out.push(Loaded::Unit(SourceUnit { author, challenge, code, tests }));
    Ok(out)
}

fn load_tests(root: &Path, file: &Path, challenge: &str, out: &mut Vec<Loaded>) -> Result<Vec<TestCase>, CorpusError> {
    let dir = file.parent().expect("unit lives in an author directory").join("tests");
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut inputs: BTreeMap<u64, PathBuf> = BTreeMap::new();
    let prefix = format!("{challenge}.");
    for p in sorted_entries(&dir)? {
        let Some(name) = p.file_name().map(|s| s.to_string_lossy().into_owned()) else { continue };
        let Some(rest) = name.strip_prefix(&prefix).and_then(|r| r.strip_suffix(".in")) else { continue };
        if let Ok(n) = rest.parse::<u64>() {
            inputs.insert(n, p);
        }
    }
    let mut tests = Vec::new();
    for (n, input_path) in inputs {
        let output_path = dir.join(format!("{challenge}.{n}.out"));
        let read = |p: &Path| -> Result<Option<String>, CorpusError> {
            match fs::read(p) {
                Ok(b) => Ok(String::from_utf8(b).ok()),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
                Err(e) => Err(io_err(p, e)),
            }
        };
        match (read(&input_path)?, read(&output_path)?) {
            (Some(input), Some(expected_output)) => tests.push(TestCase { input, expected_output, tolerance: None }),
            _ => out.push(Loaded::Rejected(Rejection {
                path: display(root, &input_path),
                reason: "test case without a readable UTF-8 .in/.out pair".into(),
            })),
        }
    }
    Ok(tests)
}

pub fn write_rejections(path: &Path, rejections: &[Rejection]) -> Result<(), CorpusError> {
    let mut buf = Vec::new();
    for r in rejections {
        serde_json::to_writer(&mut buf, r).expect("rejection serializes");
        buf.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(&buf).map_err(|e| io_err(path, e))
}

/// Per-author stratified split: `round(fraction * n)` units of each author go
/// to train, capped so the test side keeps at least one unit.
pub fn split_dataset(corpus: &Corpus, seed: u64, train_fraction: f64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(train_fraction));
    }
    let mut by_author: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, u) in corpus.units.iter().enumerate() {
        by_author.entry(&u.author).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; corpus.units.len()];
    for (author, mut idx) in by_author {
        let n = idx.len();
        if n < 2 {
            return Err(CorpusError::AuthorTooSmall(author.to_string()));
        }
        let k = ((train_fraction * n as f64).round() as usize).min(n - 1);
        idx.shuffle(&mut rng);
        for &i in &idx[..k] {
            in_train[i] = true;
        }
    }
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (u, t) in corpus.units.iter().zip(in_train) {
        if t {
            train.push(u.clone());
        } else {
            test.push(u.clone());
        }
    }
    Ok((Corpus::new(train), Corpus::new(test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const OK: &str = "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}";

    fn unit(author: &str, challenge: &str) -> SourceUnit {
        SourceUnit {
            author: author.into(),
            challenge: challenge.into(),
            code: OK.into(),
            tests: vec![TestCase::new("1 2", "3\n")],
        }
    }

    #[test]
    fn ingest_two_by_two() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = Corpus::new(vec![unit("a2", "c1"), unit("a1", "c2"), unit("a1", "c1"), unit("a2", "c2")]);
        corpus.write_to(dir.path()).unwrap();
        let got = ingest_corpus(dir.path()).unwrap();
        assert_eq!(got.corpus.len(), 4);
        assert_eq!(got.corpus.authors, vec!["a1", "a2"]);
        assert_eq!(got.corpus, corpus);
        assert!(got.rejections.is_empty());
    }

    #[test]
    fn invalid_utf8_and_out_of_subset_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        Corpus::new(vec![unit("a", "ok")]).write_to(dir.path()).unwrap();
        fs::write(dir.path().join("a/bad.cpp"), b"int main(){\xff}").unwrap();
        fs::write(dir.path().join("a/cls.cpp"), "class A {}; int main(){return 0;}").unwrap();
        let got = ingest_corpus(dir.path()).unwrap();
        assert_eq!(got.corpus.len(), 1);
        assert_eq!(got.rejections.len(), 2);
        assert_eq!(got.rejections[0].path, "a/bad.cpp");
        assert!(got.rejections[0].reason.contains("UTF-8"));
        assert!(got.rejections[1].reason.starts_with("out of subset"));
        let report = dir.path().join("rej.jsonl");
        write_rejections(&report, &got.rejections).unwrap();
        let line = fs::read_to_string(&report).unwrap().lines().next().unwrap().to_string();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 2);
        assert_eq!(v["path"], "a/bad.cpp");
    }

    #[test]
    fn ingest_errors() {
        assert!(matches!(ingest_corpus(Path::new("/nonexistent/corpus")), Err(CorpusError::MissingRoot(_))));
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir(dir.path().join("a")).unwrap();
        fs::write(dir.path().join("a/x.cpp"), "int main(){return 0}").unwrap();
        assert!(matches!(ingest_corpus(dir.path()), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn tests_pair_by_stem_and_index() {
        let dir = tempfile::tempdir().unwrap();
        let mut u = unit("a", "c");
        u.tests = (0..12).map(|i| TestCase::new(format!("{i} 0"), format!("{i}\n"))).collect();
        Corpus::new(vec![u.clone()]).write_to(dir.path()).unwrap();
        // An orphan input is reported; index order is numeric, not lexicographic.
        fs::write(dir.path().join("a/tests/c.99.in"), "1").unwrap();
        let got = ingest_corpus(dir.path()).unwrap();
        assert_eq!(got.corpus.units[0].tests, u.tests);
        assert_eq!(got.rejections.len(), 1);
    }

    #[test]
    fn split_ten_by_eight() {
        let units = (0..10).flat_map(|a| (0..8).map(move |c| unit(&format!("a{a}"), &format!("c{c}")))).collect();
        let corpus = Corpus::new(units);
        let (train, test) = split_dataset(&corpus, 7, 0.75).unwrap();
        for a in &corpus.authors {
            assert_eq!(train.units.iter().filter(|u| &u.author == a).count(), 6);
            assert_eq!(test.units.iter().filter(|u| &u.author == a).count(), 2);
        }
        assert_eq!(split_dataset(&corpus, 7, 0.75).unwrap(), (train, test));
    }

    #[test]
    fn split_errors() {
        let corpus = Corpus::new(vec![unit("a", "1"), unit("a", "2"), unit("b", "1")]);
        assert!(matches!(split_dataset(&corpus, 0, 0.5), Err(CorpusError::AuthorTooSmall(a)) if a == "b"));
        assert!(matches!(split_dataset(&corpus, 0, 1.0), Err(CorpusError::InvalidFraction(_))));
    }
}
