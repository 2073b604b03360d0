use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::metrics::{
    evasion_success_rate, transformation_success_rate, EvasionOutcome, EvasionVerdict, TransformVerdict,
    TransformationOutcome,
};
use super::neural::run_neural;
use super::report::{AttributionSummary, EvasionSummary, MetricsReport, NeuralSummary, StageTiming};
use super::ExperimentError;
use crate::attrib::{evaluate_accuracy, train_model, AttributionModel, Attributor, ModelKind, TrainConfig};
use crate::corpus::{ingest_corpus, split_dataset, write_rejections, Corpus, SourceUnit};
use crate::frontend::parse_source;
use crate::frontend::Program;
use crate::mcts::{evade, random_baseline, EvasionResult, Objective, SearchConfig, SearchError};
use crate::pairgen::{build_dataset, export_jsonl, PairgenConfig};
use crate::synth::{synthetic_corpus, SynthConfig};

type SearchFn = fn(&Program, &dyn Attributor, &Objective, &SearchConfig) -> Result<EvasionResult, SearchError>;

pub const PRIMARY_MODEL: &str = "tfidf-rf";
pub const SECONDARY_MODEL: &str = "ast-rf";
pub const MCTS: &str = "mcts";
pub const RANDOM: &str = "random";

/// File layout of one experiment directory.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub root: PathBuf,
}

impl Artifacts {
    pub fn corpus(&self) -> PathBuf {
        self.root.join("corpus.json")
    }
    pub fn split(&self) -> PathBuf {
        self.root.join("split.json")
    }
    pub fn rejections(&self) -> PathBuf {
        self.root.join("rejections.json")
    }
    pub fn model(&self, name: &str) -> PathBuf {
        self.root.join("models").join(format!("{name}.json"))
    }
    pub fn attribution(&self) -> PathBuf {
        self.root.join("models").join("accuracy.json")
    }
    pub fn evasion(&self) -> PathBuf {
        self.root.join("evasion.json")
    }
    pub fn pairs(&self) -> PathBuf {
        self.root.join("pairs.jsonl")
    }
    pub fn pairgen(&self) -> PathBuf {
        self.root.join("pairgen.json")
    }
    pub fn neural_dir(&self) -> PathBuf {
        self.root.join("neural")
    }
    pub fn neural_result(&self) -> PathBuf {
        self.neural_dir().join("result.json")
    }
    pub fn verdicts(&self) -> PathBuf {
        self.root.join("verdicts.json")
    }
    pub fn report_json(&self) -> PathBuf {
        self.root.join("report.json")
    }
    pub fn report_text(&self) -> PathBuf {
        self.root.join("report.txt")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Split {
    train: Corpus,
    test: Corpus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvasionRecord {
    pub unit: String,
    pub author: String,
    pub method: String,
    pub success: bool,
    pub predicted: String,
    pub final_code: String,
    pub sequence_len: usize,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PairgenSummary {
    pairs: usize,
    style_sets: usize,
    dropped_variants: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct NeuralRecord {
    unit: String,
    author: String,
    code: String,
}

/// Raw per-candidate verdicts every reported rate is derived from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerdictLogs {
    /// Equivalence of search outputs, per method.
    pub transform: BTreeMap<String, Vec<TransformVerdict>>,
    /// Method, then attributor.
    pub evasion: BTreeMap<String, BTreeMap<String, Vec<EvasionVerdict>>>,
    pub neural_transform: Option<Vec<TransformVerdict>>,
    pub neural_evasion: Option<BTreeMap<String, Vec<EvasionVerdict>>>,
}

impl VerdictLogs {
    pub fn search_transformation(&self) -> TransformationOutcome {
        TransformationOutcome::from_log(self.transform.values().flatten().cloned().collect())
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

/// Written through a temporary file so an interrupted stage never leaves a
/// half-written artifact that a later run would resume from.
fn write_artifact(path: &Path, bytes: &[u8]) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ExperimentError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifacts serialize");
    text.push('\n');
    write_artifact(path, text.as_bytes())
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ExperimentError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| ExperimentError::Json { path: path.to_path_buf(), source })
}

fn stage_err(stage: &'static str) -> impl Fn(String) -> ExperimentError {
    move |message| ExperimentError::Stage { stage, message }
}

pub struct Experiment {
    pub config: ExperimentConfig,
    /// Executable whose `encode` subcommand the neural stage may call.
    pub encoder: Option<PathBuf>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricsReport, ExperimentError> {
    Experiment { config: config.clone(), encoder: None }.run()
}

impl Experiment {
    pub fn artifacts(&self) -> Artifacts {
        Artifacts { root: self.config.out_dir.clone() }
    }

    pub fn run(&self) -> Result<MetricsReport, ExperimentError> {
        self.config.validate()?;
        let workers = self.config.effective_workers();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| ExperimentError::Config(format!("worker pool: {e}")))?;
        pool.install(|| self.run_stages())
    }

    fn run_stages(&self) -> Result<MetricsReport, ExperimentError> {
        let art = self.artifacts();
        fs::create_dir_all(&art.root).map_err(io_err(&art.root))?;
        let mut timing = Vec::new();
        let mut timed = |stage: &str, resumed: bool, start: Instant| {
            timing.push(StageTiming { stage: stage.to_string(), seconds: start.elapsed().as_secs_f64(), resumed });
        };

        let t = Instant::now();
        let (split, resumed) = self.ingest(&art)?;
        timed("ingest", resumed, t);

        let t = Instant::now();
        let (models, attribution, resumed) = self.train(&art, &split)?;
        timed("train", resumed, t);

        let t = Instant::now();
        let (records, resumed) = self.evade(&art, &split, &models[PRIMARY_MODEL])?;
        timed("evade", resumed, t);

        let mut pairs = None;
        if self.config.pairgen {
            let t = Instant::now();
            let (summary, resumed) = self.pairgen(&art, &split, &models[PRIMARY_MODEL])?;
            pairs = Some(summary.pairs);
            timed("pairgen", resumed, t);
        }

        let mut neural = None;
        if !self.config.neural_command.is_empty() {
            let t = Instant::now();
            let (out, resumed) = self.neural(&art, &split)?;
            neural = Some(out);
            timed("neural", resumed, t);
        }

        let t = Instant::now();
        let (logs, resumed) = self.verify(&art, &split, &models, &records, neural.as_deref())?;
        timed("verify", resumed, t);

        let t = Instant::now();
        let mut report = self.summarize(&logs, attribution, &records, pairs);
        timed("report", false, t);
        report.timing = timing;
        write_json(&art.report_json(), &report)?;
        write_artifact(&art.report_text(), report.render_text().as_bytes())?;
        Ok(report)
    }

    fn ingest(&self, art: &Artifacts) -> Result<(Split, bool), ExperimentError> {
        if art.corpus().exists() && art.split().exists() {
            return Ok((read_json(&art.split())?, true));
        }
        let cfg = &self.config;
        let err = stage_err("ingest");
        let corpus = if cfg.corpus_dir.as_os_str().is_empty() {
            synthetic_corpus(&SynthConfig {
                authors: cfg.synth_authors,
                challenges: cfg.synth_challenges,
                tests_per_unit: cfg.tests_per_unit,
                noise: cfg.synth_noise,
                seed: cfg.seed,
            })
        } else {
            let ingested = ingest_corpus(&cfg.corpus_dir).map_err(|e| err(e.to_string()))?;
            write_rejections(&art.rejections(), &ingested.rejections).map_err(|e| err(e.to_string()))?;
            ingested.corpus
        };
        let (train, test) = split_dataset(&corpus, cfg.seed, cfg.train_fraction).map_err(|e| err(e.to_string()))?;
        write_json(&art.corpus(), &corpus)?;
        let split = Split { train, test };
        write_json(&art.split(), &split)?;
        Ok((split, false))
    }

    #[allow(clippy::type_complexity)]
    fn train(
        &self,
        art: &Artifacts,
        split: &Split,
    ) -> Result<(HashMap<&'static str, AttributionModel>, Vec<AttributionSummary>, bool), ExperimentError> {
        let err = stage_err("train");
        let names = [(PRIMARY_MODEL, ModelKind::TfidfRf), (SECONDARY_MODEL, ModelKind::AstRf)];
        if names.iter().all(|(n, _)| art.model(n).exists()) && art.attribution().exists() {
            let mut models = HashMap::new();
            for (n, _) in names {
                models.insert(n, AttributionModel::load(&art.model(n)).map_err(|e| err(e.to_string()))?);
            }
            return Ok((models, read_json(&art.attribution())?, true));
        }
        let mut models = HashMap::new();
        let mut summary = Vec::new();
        for (name, kind) in names {
            let cfg = TrainConfig { kind, vocab: self.config.vocab(), forest: self.config.forest() };
            let model = train_model(&split.train.units, &cfg).map_err(|e| err(e.to_string()))?;
            let acc = evaluate_accuracy(&model, &split.test.units).map_err(|e| err(e.to_string()))?;
            let text = model.to_json();
            write_artifact(&art.model(name), text.as_bytes())?;
            summary.push(AttributionSummary {
                model: name.to_string(),
                test_accuracy: acc,
                test_units: split.test.len(),
            });
            models.insert(name, model);
        }
        write_json(&art.attribution(), &summary)?;
        Ok((models, summary, false))
    }

    /// Test units the attacked model attributes correctly, in corpus order.
    fn targets<'a>(&self, split: &'a Split, model: &AttributionModel) -> Vec<&'a SourceUnit> {
        let mut out: Vec<&SourceUnit> = split
            .test
            .units
            .par_iter()
            .filter(|u| model.predict_source(&u.code).is_ok_and(|p| p.author == u.author))
            .collect();
        if self.config.evade_limit > 0 {
            out.truncate(self.config.evade_limit);
        }
        out
    }

    fn evade(
        &self,
        art: &Artifacts,
        split: &Split,
        model: &AttributionModel,
    ) -> Result<(Vec<EvasionRecord>, bool), ExperimentError> {
        if art.evasion().exists() {
            return Ok((read_json(&art.evasion())?, true));
        }
        let err = stage_err("evade");
        let search = self.config.search();
        let targets = self.targets(split, model);
        let per_unit: Vec<Result<Vec<EvasionRecord>, String>> = targets
            .par_iter()
            .map(|u| {
                let p = parse_source(&u.code).map_err(|e| format!("{}: {e}", u.id()))?;
                let obj = Objective::Untargeted(u.author.clone());
                let mut methods: Vec<(&str, SearchFn)> = vec![(MCTS, evade)];
                if self.config.random_baseline {
                    methods.push((RANDOM, random_baseline));
                }
                methods
                    .into_iter()
                    .map(|(name, f)| {
                        let r = f(&p, model, &obj, &search).map_err(|e| format!("{} ({name}): {e}", u.id()))?;
                        Ok(EvasionRecord {
                            unit: u.id(),
                            author: u.author.clone(),
                            method: name.to_string(),
                            success: r.success,
                            predicted: r.predicted,
                            final_code: r.final_code,
                            sequence_len: r.sequence.len(),
                            iterations: r.iterations_used,
                        })
                    })
                    .collect()
            })
            .collect();
        let mut records = Vec::new();
        for r in per_unit {
            records.extend(r.map_err(&err)?);
        }
        write_json(&art.evasion(), &records)?;
        Ok((records, false))
    }

    fn pairgen(
        &self,
        art: &Artifacts,
        split: &Split,
        model: &AttributionModel,
    ) -> Result<(PairgenSummary, bool), ExperimentError> {
        if art.pairgen().exists() {
            return Ok((read_json(&art.pairgen())?, true));
        }
        let err = stage_err("pairgen");
        let authors = model.labels().to_vec();
        if authors.len() < 3 {
            let summary = PairgenSummary { pairs: 0, style_sets: 0, dropped_variants: 0 };
            write_json(&art.pairgen(), &summary)?;
            return Ok((summary, false));
        }
        let mut units = split.train.units.clone();
        if self.config.pairgen_limit > 0 {
            units.truncate(self.config.pairgen_limit);
        }
        let cfg = PairgenConfig {
            search: SearchConfig { budget: self.config.pairgen_budget, ..self.config.search() },
            strict: self.config.pairgen_strict,
        };
        let (sets, dataset) = build_dataset(&units, &authors, model, &cfg).map_err(|e| err(e.to_string()))?;
        if !dataset.pairs.is_empty() {
            export_jsonl(&dataset, &art.pairs()).map_err(|e| err(e.to_string()))?;
        }
        let summary = PairgenSummary {
            pairs: dataset.pairs.len(),
            style_sets: sets.len(),
            dropped_variants: sets.iter().map(|s| s.dropped.len()).sum(),
        };
        write_json(&art.pairgen(), &summary)?;
        Ok((summary, false))
    }

    fn neural(&self, art: &Artifacts, split: &Split) -> Result<(Vec<NeuralRecord>, bool), ExperimentError> {
        if art.neural_result().exists() {
            return Ok((read_json(&art.neural_result())?, true));
        }
        let inputs: Vec<(String, String, String)> =
            split.test.units.iter().map(|u| (u.id(), u.author.clone(), u.code.clone())).collect();
        let pairs = art.pairs().exists().then(|| art.pairs());
        let encoder = self.encoder.as_ref().map(|e| vec![e.display().to_string(), "encode".to_string()]);
        let outputs = run_neural(&self.config.neural_command, &art.neural_dir(), pairs, encoder, &inputs)
            .map_err(stage_err("neural"))?;
        let records: Vec<NeuralRecord> = inputs
            .into_iter()
            .zip(outputs)
            .map(|((unit, author, _), code)| NeuralRecord { unit, author, code })
            .collect();
        write_json(&art.neural_result(), &records)?;
        Ok((records, false))
    }

    fn verify(
        &self,
        art: &Artifacts,
        split: &Split,
        models: &HashMap<&'static str, AttributionModel>,
        records: &[EvasionRecord],
        neural: Option<&[NeuralRecord]>,
    ) -> Result<(VerdictLogs, bool), ExperimentError> {
        if art.verdicts().exists() {
            let logs: VerdictLogs = read_json(&art.verdicts())?;
            // A neural run added after verification invalidates the old logs.
            if logs.neural_transform.is_some() == neural.is_some() {
                return Ok((logs, true));
            }
        }
        let units: HashMap<String, &SourceUnit> = split.test.units.iter().map(|u| (u.id(), u)).collect();
        let err = stage_err("verify");
        let lookup = |id: &str| units.get(id).copied().ok_or_else(|| err(format!("unknown unit {id}")));
        let mut logs = VerdictLogs::default();
        let mut methods: Vec<&str> = records.iter().map(|r| r.method.as_str()).collect();
        methods.sort();
        methods.dedup();
        let model_names = [PRIMARY_MODEL, SECONDARY_MODEL];
        for m in methods {
            let rs: Vec<&EvasionRecord> = records.iter().filter(|r| r.method == m).collect();
            let outputs = rs
                .iter()
                .map(|r| Ok((lookup(&r.unit)?.clone(), r.final_code.clone())))
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            logs.transform.insert(m.to_string(), transformation_success_rate(&outputs).log);
            let candidates: Vec<(String, String)> =
                rs.iter().map(|r| (r.author.clone(), r.final_code.clone())).collect();
            let per_model = model_names
                .iter()
                .map(|n| (n.to_string(), evasion_success_rate(&models[n], &candidates).log))
                .collect();
            logs.evasion.insert(m.to_string(), per_model);
        }
        if let Some(neural) = neural {
            let outputs = neural
                .iter()
                .map(|r| Ok((lookup(&r.unit)?.clone(), r.code.clone())))
                .collect::<Result<Vec<_>, ExperimentError>>()?;
            logs.neural_transform = Some(transformation_success_rate(&outputs).log);
            let candidates: Vec<(String, String)> = neural.iter().map(|r| (r.author.clone(), r.code.clone())).collect();
            logs.neural_evasion = Some(
                model_names
                    .iter()
                    .map(|n| (n.to_string(), evasion_success_rate(&models[n], &candidates).log))
                    .collect(),
            );
        }
        write_json(&art.verdicts(), &logs)?;
        Ok((logs, false))
    }

    fn summarize(
        &self,
        logs: &VerdictLogs,
        attribution: Vec<AttributionSummary>,
        records: &[EvasionRecord],
        pairs: Option<usize>,
    ) -> MetricsReport {
        let search = logs.search_transformation();
        let evasion = logs
            .evasion
            .iter()
            .map(|(method, per_model)| {
                let rs: Vec<&EvasionRecord> = records.iter().filter(|r| &r.method == method).collect();
                let mean_len = if rs.is_empty() {
                    0.0
                } else {
                    rs.iter().map(|r| r.sequence_len).sum::<usize>() as f64 / rs.len() as f64
                };
                EvasionSummary {
                    method: method.clone(),
                    rate: per_model
                        .iter()
                        .map(|(m, log)| (m.clone(), EvasionOutcome::from_log(log.clone()).rate))
                        .collect(),
                    samples: rs.len(),
                    mean_sequence_len: mean_len,
                }
            })
            .collect();
        let neural = logs.neural_transform.as_ref().map(|t| {
            let outcome = TransformationOutcome::from_log(t.clone());
            NeuralSummary {
                transformation_success_rate: outcome.rate,
                samples: outcome.evaluated,
                error_table: outcome.error_table,
                evasion_success_rate: logs
                    .neural_evasion
                    .iter()
                    .flatten()
                    .map(|(m, log)| (m.clone(), EvasionOutcome::from_log(log.clone()).rate))
                    .collect(),
            }
        });
        MetricsReport {
            transformation_success_rate: search.rate,
            transformation_samples: search.evaluated,
            error_table: search.error_table,
            attribution,
            evasion,
            pairs,
            neural,
            timing: Vec::new(),
            config: self.config.clone(),
        }
    }
}

#[cfg(test)]
mod tests;
