use std::error::Error;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use unstyle::attrib::{
    evaluate_accuracy, train_model, AttributionModel, ForestConfig, ModelKind, TermUnit, TrainConfig, VocabConfig,
};
use unstyle::corpus::{ingest_corpus, split_dataset, write_rejections, Corpus, SourceUnit};
use unstyle::eval::{transformation_success_rate, Experiment, ExperimentConfig, MetricsReport};
use unstyle::frontend::{encode, parse_source, EncodeLimits};
use unstyle::mcts::{evade_traced, random_baseline, Objective, SearchConfig, Widening};
use unstyle::pairgen::{build_dataset, export_jsonl, PairgenConfig};
use unstyle::synth::{synthetic_corpus, SynthConfig};
use unstyle::transforms::TransformId;

type Result<T = ()> = std::result::Result<T, Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "unstyle", version, about = "Authorship attribution and style evasion for a C++ subset")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    TfidfRf,
    AstRf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Unit {
    Word,
    CharNgram,
}

#[derive(clap::Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 500)]
    budget: usize,
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
    #[arg(long, default_value_t = std::f64::consts::SQRT_2)]
    exploration: f64,
    #[arg(long, default_value_t = 4)]
    rollout_depth: usize,
    /// Keep searching after the first success.
    #[arg(long)]
    no_early_stop: bool,
    /// 0 disables progressive widening.
    #[arg(long, default_value_t = 1.0)]
    widening_c: f64,
    #[arg(long, default_value_t = 0.3)]
    widening_alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn config(&self) -> SearchConfig {
        SearchConfig {
            budget: self.budget,
            max_depth: self.max_depth,
            exploration: self.exploration,
            rollout_depth: self.rollout_depth,
            early_stop: !self.no_early_stop,
            seed: self.seed,
            widening: (self.widening_c > 0.0).then_some(Widening { c: self.widening_c, alpha: self.widening_alpha }),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Read `<author>/<challenge>.cpp` plus `tests/` into a corpus JSON file.
    Ingest {
        root: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where rejected files are listed.
        #[arg(long)]
        rejections: Option<PathBuf>,
    },
    /// Per-author stratified train/test split of a corpus JSON file.
    Split {
        corpus: PathBuf,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long, default_value_t = 0.75)]
        train_fraction: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train an attribution model; prints test accuracy when `--test` is given.
    TrainAttrib {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "tfidf-rf")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "word")]
        unit: Unit,
        #[arg(long, default_value_t = 3)]
        ngram: usize,
        #[arg(long, default_value_t = 2500)]
        max_terms: usize,
        #[arg(long, default_value_t = 300)]
        trees: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Search for a transformation sequence that changes a file's attribution.
    Evade {
        source: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// True author (untargeted search).
        #[arg(long, required_unless_present = "target", conflicts_with = "target")]
        author: Option<String>,
        /// Author to imitate (targeted search).
        #[arg(long)]
        target: Option<String>,
        #[command(flatten)]
        search: SearchArgs,
        /// Use random walks instead of tree search.
        #[arg(long)]
        random: bool,
        /// JSON lines, one per iteration.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the final program here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build style sets for a corpus and export source/target pairs as JSONL.
    Pairgen {
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Only the first N units.
        #[arg(long)]
        limit: Option<usize>,
        /// Drop variants whose search did not reach the target author.
        #[arg(long)]
        strict: bool,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Tokens, leaf paths and data-flow graph of a file (`-` for stdin) as JSON.
    Encode {
        source: PathBuf,
        #[arg(long, default_value_t = 64)]
        max_ast_depth: usize,
        #[arg(long, default_value_t = 1000)]
        max_paths: usize,
        #[arg(long, default_value_t = 1000)]
        max_dfg: usize,
    },
    /// Check candidates `<dir>/<author>/<challenge>.cpp` against a corpus's tests.
    Verify {
        corpus: PathBuf,
        candidates: PathBuf,
        /// Also print every verdict.
        #[arg(long)]
        verbose: bool,
    },
    /// Print the text report of an experiment directory.
    Report {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run every experiment stage from a flat TOML config.
    Run { config: PathBuf },
    /// Transform catalogue.
    Transforms {
        #[command(subcommand)]
        command: TransformsCommand,
    },
    /// Write a synthetic styled corpus in the ingest layout.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 20)]
        authors: usize,
        #[arg(long, default_value_t = 8)]
        challenges: usize,
        #[arg(long, default_value_t = 3)]
        tests: usize,
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum TransformsCommand {
    List,
}

fn read_source(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?)
    }
}

fn read_corpus(path: &Path) -> Result<Corpus> {
    Ok(serde_json::from_str(&read_source(path)?).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result {
    match cli.command {
        Command::Ingest { root, out, rejections } => {
            let ingested = ingest_corpus(&root)?;
            write_json(&out, &ingested.corpus)?;
            if let Some(r) = rejections {
                write_rejections(&r, &ingested.rejections)?;
            }
            eprintln!(
                "{} units from {} authors, {} rejected",
                ingested.corpus.len(),
                ingested.corpus.authors.len(),
                ingested.rejections.len()
            );
        }
        Command::Split { corpus, train, test, train_fraction, seed } => {
            let (a, b) = split_dataset(&read_corpus(&corpus)?, seed, train_fraction)?;
            write_json(&train, &a)?;
            write_json(&test, &b)?;
            eprintln!("{} train, {} test", a.len(), b.len());
        }
        Command::TrainAttrib { corpus, out, kind, unit, ngram, max_terms, trees, seed, test } => {
            let cfg = TrainConfig {
                kind: match kind {
                    Kind::TfidfRf => ModelKind::TfidfRf,
                    Kind::AstRf => ModelKind::AstRf,
                },
                vocab: VocabConfig {
                    unit: match unit {
                        Unit::Word => TermUnit::Word,
                        Unit::CharNgram => TermUnit::CharNgram,
                    },
                    n: ngram,
                    max_terms,
                },
                forest: ForestConfig { n_trees: trees, seed, ..Default::default() },
            };
            let model = train_model(&read_corpus(&corpus)?.units, &cfg)?;
            model.save(&out)?;
            if let Some(t) = test {
                println!("accuracy {:.4}", evaluate_accuracy(&model, &read_corpus(&t)?.units)?);
            }
        }
        Command::Evade { source, model, author, target, search, random, trace, out } => {
            let program = parse_source(&read_source(&source)?)?;
            let model = AttributionModel::load(&model)?;
            let objective = match (author, target) {
                (_, Some(t)) => Objective::Targeted(t),
                (Some(a), None) => Objective::Untargeted(a),
                (None, None) => unreachable!("clap requires one of --author and --target"),
            };
            let cfg = search.config();
            let result = if random {
                random_baseline(&program, &model, &objective, &cfg)?
            } else {
                let mut file = trace.map(|p| fs::File::create(&p).map(io::BufWriter::new)).transpose()?;
                evade_traced(&program, &model, &objective, &cfg, file.as_mut().map(|f| f as &mut dyn Write))?
            };
            if let Some(o) = out {
                fs::write(&o, &result.final_code)?;
            }
            print_json(&result)?;
        }
        Command::Pairgen { corpus, model, out, limit, strict, search } => {
            let corpus = read_corpus(&corpus)?;
            let model = AttributionModel::load(&model)?;
            let mut units = corpus.units;
            if let Some(l) = limit {
                units.truncate(l);
            }
            let cfg = PairgenConfig { search: search.config(), strict };
            let (sets, dataset) = build_dataset(&units, &corpus.authors, &model, &cfg)?;
            export_jsonl(&dataset, &out)?;
            let dropped: usize = sets.iter().map(|s| s.dropped.len()).sum();
            eprintln!("{} pairs from {} units, {} variants dropped", dataset.pairs.len(), sets.len(), dropped);
        }
        Command::Encode { source, max_ast_depth, max_paths, max_dfg } => {
            let limits = EncodeLimits { max_ast_depth, max_paths, max_dfg };
            print_json(&encode(&read_source(&source)?, limits)?)?;
        }
        Command::Verify { corpus, candidates, verbose } => {
            let corpus = read_corpus(&corpus)?;
            let mut outputs: Vec<(SourceUnit, String)> = Vec::new();
            for u in corpus.units {
                let path = candidates.join(&u.author).join(format!("{}.cpp", u.challenge));
                if let Ok(code) = fs::read_to_string(&path) {
                    outputs.push((u, code));
                }
            }
            let outcome = transformation_success_rate(&outputs);
            if verbose {
                for v in &outcome.log {
                    println!("{}\t{}", v.unit, serde_json::to_string(&v.verdict)?);
                }
            }
            println!(
                "transformation success {:.2}% ({} of {}, {} without tests)",
                100.0 * outcome.rate,
                outcome.equivalent,
                outcome.evaluated,
                outcome.excluded_no_tests
            );
            for (class, n) in &outcome.error_table {
                println!("  {class:<40} {n:>5}");
            }
        }
        Command::Report { dir, json } => {
            let path = dir.join("report.json");
            let report: MetricsReport = serde_json::from_str(&read_source(&path)?)?;
            if json {
                print_json(&report)?;
            } else {
                print!("{}", report.render_text());
            }
        }
        Command::Run { config } => {
            let config = ExperimentConfig::load(&config)?;
            let experiment = Experiment { config, encoder: std::env::current_exe().ok() };
            print!("{}", experiment.run()?.render_text());
        }
        Command::Transforms { command: TransformsCommand::List } => {
            for t in TransformId::ALL {
                println!("{:<4} {:<13} {}", t.to_string(), t.family().as_str(), t.description());
            }
        }
        Command::Synth { out, authors, challenges, tests, noise, seed } => {
            let corpus = synthetic_corpus(&SynthConfig { authors, challenges, tests_per_unit: tests, noise, seed });
            corpus.write_to(&out)?;
            eprintln!("{} units from {} authors", corpus.len(), corpus.authors.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
