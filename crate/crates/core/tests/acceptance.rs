//! Acceptance suite. Prints one line per criterion and exits non-zero if any
//! criterion fails. Thresholds are fixed; a failing criterion is reported,
//! never relaxed.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use unstyle::attrib::{
    build_vocabulary, evaluate_accuracy, featurize_tfidf, train_model, Attributor, ForestConfig, TermUnit, TrainConfig,
    VocabConfig,
};
use unstyle::corpus::{split_dataset, SourceUnit, TestCase};
use unstyle::frontend::{parse_source, print_source, SyntaxCategory};
use unstyle::interp::{check_equivalence, execute, ErrorClass, Limits, SemanticCategory};
use unstyle::mcts::{evade, random_baseline, Objective, SearchConfig};
use unstyle::pairgen::{build_pairs, build_style_set, PairgenConfig};
use unstyle::synth::{random_units, synthetic_corpus, SynthConfig, CHALLENGES};
use unstyle::transforms::{apply, enumerate_actions, TransformId};

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn attribution_config(seed: u64) -> TrainConfig {
    TrainConfig {
        vocab: VocabConfig { unit: TermUnit::CharNgram, n: 3, ..Default::default() },
        forest: ForestConfig { seed, ..Default::default() },
        ..Default::default()
    }
}

/// Exported pairs per source equal n - 2 for n in 3..=10, none touching the
/// source's own style, and the (from, to) list matches exhaustive enumeration.
fn pair_count_law() -> Outcome {
    let mut checked = 0;
    for n in 3..=10usize {
        let corpus = synthetic_corpus(&SynthConfig {
            authors: n,
            challenges: 2,
            tests_per_unit: 3,
            seed: n as u64,
            ..Default::default()
        });
        let cfg = TrainConfig { forest: ForestConfig { n_trees: 30, ..Default::default() }, ..Default::default() };
        let model = train_model(&corpus.units, &cfg).expect("training succeeds");
        let pg = PairgenConfig { search: SearchConfig { budget: 10, ..Default::default() }, strict: false };
        for unit in corpus.units.iter().filter(|u| u.challenge == corpus.units[0].challenge) {
            let set = build_style_set(unit, &corpus.authors, &model, &pg).expect("style set builds");
            let pairs = build_pairs(&set).expect("pairs build");
            let expected = enumerate_pairs(n, set.own);
            let got: Vec<(usize, usize)> = pairs.iter().map(|p| (p.from, p.to)).collect();
            if !set.dropped.is_empty() || pairs.len() != n - 2 || got != expected {
                return outcome(false, format!("n={n} own={} got {got:?}, expected {expected:?}", set.own));
            }
            if pairs.iter().any(|p| p.from == set.own || p.to == set.own) {
                return outcome(false, format!("n={n} pair touches own index {}", set.own));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} sources over n=3..10, every source gave n-2 pairs"))
}

/// Oracle: all (a, b) with a < b, both distinct from `own`, and no non-own
/// index strictly between them.
fn enumerate_pairs(n: usize, own: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if a != own && b != own && !(a + 1..b).any(|k| k != own) {
                out.push((a, b));
            }
        }
    }
    out
}

fn transform_soundness() -> Outcome {
    let units = random_units(60, 3, 20_240_601);
    let results: Vec<(usize, BTreeMap<TransformId, usize>, Vec<String>)> = units
        .par_iter()
        .map(|u| {
            let p = parse_source(&u.code).expect("generated programs parse");
            let mut per = BTreeMap::new();
            let mut bad = Vec::new();
            let actions = enumerate_actions(&p);
            for a in &actions {
                *per.entry(a.transform).or_insert(0) += 1;
                let ok = apply(&p, a)
                    .map(|q| {
                        check_equivalence(&p, &print_source(&q), &u.tests).map(|v| v.is_equivalent()).unwrap_or(false)
                    })
                    .unwrap_or(false);
                if !ok {
                    bad.push(format!("{} {a}", u.challenge));
                }
            }
            (actions.len(), per, bad)
        })
        .collect();
    let total: usize = results.iter().map(|r| r.0).sum();
    let mut per: BTreeMap<TransformId, usize> = BTreeMap::new();
    for r in &results {
        for (t, c) in &r.1 {
            *per.entry(*t).or_default() += c;
        }
    }
    let bad: Vec<&String> = results.iter().flat_map(|r| &r.2).collect();
    let min_tests = units.iter().map(|u| u.tests.len()).min().unwrap_or(0);
    let missing: Vec<String> =
        TransformId::ALL.iter().filter(|t| !per.contains_key(t)).map(|t| t.to_string()).collect();
    let coverage = per.iter().map(|(t, c)| format!("{t}:{c}")).collect::<Vec<_>>().join(" ");
    let pass = units.len() >= 50 && min_tests >= 3 && bad.is_empty() && missing.is_empty();
    let mut detail = format!(
        "{} programs, {total} actions, {} equivalent, min tests {min_tests} [{coverage}]",
        units.len(),
        total - bad.len()
    );
    if !missing.is_empty() {
        detail += &format!("; no sites for {}", missing.join(","));
    }
    if let Some(b) = bad.first() {
        detail += &format!("; first failure {b}");
    }
    outcome(pass, detail)
}

fn parser_round_trip() -> Outcome {
    let mut programs: Vec<String> = Vec::new();
    for seed in SEEDS {
        programs.extend(
            synthetic_corpus(&SynthConfig { seed, tests_per_unit: 0, ..Default::default() })
                .units
                .into_iter()
                .map(|u| u.code),
        );
    }
    programs.extend(CHALLENGES.iter().map(|c| c.source.to_string()));
    programs.extend(random_units(200, 0, 7).into_iter().map(|u| u.code));
    let failures: Vec<usize> = programs
        .par_iter()
        .enumerate()
        .filter_map(|(i, src)| {
            let first = parse_source(src).ok()?;
            let second = parse_source(&print_source(&first)).ok();
            (second.as_ref() != Some(&first)).then_some(i)
        })
        .collect();
    let unparsed = programs.iter().filter(|s| parse_source(s).is_err()).count();
    let ok = programs.len() - failures.len();
    outcome(failures.is_empty(), format!("{ok}/{} programs, {unparsed} failed to parse", programs.len()))
}

fn attribution() -> Outcome {
    let accs: Vec<f64> = SEEDS
        .iter()
        .map(|&seed| {
            let corpus = synthetic_corpus(&SynthConfig { seed, ..Default::default() });
            let (train, test) = split_dataset(&corpus, seed, 0.75).expect("split");
            let model = train_model(&train.units, &attribution_config(seed)).expect("training succeeds");
            evaluate_accuracy(&model, &test.units).expect("non-empty test split")
        })
        .collect();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let var = accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / accs.len() as f64;
    let per = accs.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(" ");
    outcome(mean >= 0.80, format!("mean {mean:.4} variance {var:.6} sd {:.4} per seed [{per}]", var.sqrt()))
}

fn evasion() -> Outcome {
    let mut mcts_hits = 0usize;
    let mut random_hits = 0usize;
    let mut targets = 0usize;
    let mut per = Vec::new();
    for seed in SEEDS {
        let corpus = synthetic_corpus(&SynthConfig { seed, ..Default::default() });
        let (train, test) = split_dataset(&corpus, seed, 0.75).expect("split");
        let model = train_model(&train.units, &attribution_config(seed)).expect("training succeeds");
        let victims: Vec<&SourceUnit> = test
            .units
            .iter()
            .filter(|u| model.predict_source(&u.code).map(|p| p.author == u.author).unwrap_or(false))
            .collect();
        let cfg = SearchConfig { budget: 500, seed, ..Default::default() };
        let hits: Vec<(bool, bool)> = victims
            .par_iter()
            .map(|u| {
                let p = parse_source(&u.code).expect("corpus programs parse");
                let objective = Objective::Untargeted(u.author.clone());
                let a = evade(&p, &model, &objective, &cfg).expect("search runs");
                let b = random_baseline(&p, &model, &objective, &cfg).expect("baseline runs");
                (a.success, b.success)
            })
            .collect();
        let m = hits.iter().filter(|h| h.0).count();
        let r = hits.iter().filter(|h| h.1).count();
        per.push(format!("{m}/{r} of {}", hits.len()));
        mcts_hits += m;
        random_hits += r;
        targets += hits.len();
    }
    let mcts = mcts_hits as f64 / targets as f64;
    let random = random_hits as f64 / targets as f64;
    outcome(
        mcts >= 0.70 && mcts > random,
        format!("mcts {mcts:.4} random {random:.4} over {targets} targets; per seed mcts/random [{}]", per.join(", ")),
    )
}

fn taxonomy() -> Outcome {
    const ORIGINAL: &str = "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}";
    let original = parse_source(ORIGINAL).expect("original parses");
    let tests: Vec<TestCase> = ["2 3", "10 -4", "7 0"]
        .iter()
        .map(|i| TestCase::new(*i, execute(&original, i, Limits::default()).stdout))
        .collect();
    let seeded: [(&str, ErrorClass); 8] = [
        (
            "int main(){int a,b; cin>>a>>b; cout<<a+c<<endl; return 0;}",
            ErrorClass::Syntax(SyntaxCategory::UndeclaredVariable),
        ),
        (
            "int main(){int a,b; int a; cin>>a>>b; cout<<a+b<<endl; return 0;}",
            ErrorClass::Syntax(SyntaxCategory::RedeclaredVariable),
        ),
        (
            "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl return 0;}",
            ErrorClass::Syntax(SyntaxCategory::MissingSemicolonOrBrace),
        ),
        (
            "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return;}",
            ErrorClass::Syntax(SyntaxCategory::ReturnStatement),
        ),
        ("int solve(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}", ErrorClass::Syntax(SyntaxCategory::Other)),
        (
            "int main(){int a,b; cin>>a>>b; cout<<b+b<<endl; return 0;}",
            ErrorClass::Semantic(SemanticCategory::MisusedVariable),
        ),
        (
            "int main(){int a,b; cin>>a>>b; if(a>b) cout<<a+b<<endl; return 0;}",
            ErrorClass::Semantic(SemanticCategory::OutputStatement),
        ),
        (
            "int main(){int a,b=0; cin>>a; cout<<a+b<<endl; return 0;}",
            ErrorClass::Semantic(SemanticCategory::InputStatement),
        ),
    ];
    let mut wrong = Vec::new();
    for (src, want) in &seeded {
        let got = check_equivalence(&original, src, &tests).expect("tests supplied").failure;
        if got != Some(*want) {
            wrong.push(format!("{want}: got {}", got.map_or("equivalent".to_string(), |g| g.to_string())));
        }
    }
    let covered: std::collections::BTreeSet<ErrorClass> = seeded.iter().map(|s| s.1).collect();
    let pass = wrong.is_empty() && covered.len() == ErrorClass::all().len();
    outcome(
        pass,
        format!(
            "{}/8 classified as seeded{}",
            8 - wrong.len(),
            if wrong.is_empty() { String::new() } else { format!("; {}", wrong.join("; ")) }
        ),
    )
}

/// Hand formula: w = tf * (ln((1 + N) / (1 + df)) + 1), then L2 normalization
/// per document. Counts below are read off the three documents by hand.
fn tfidf_oracle() -> Outcome {
    let docs = ["alpha beta beta", "beta gamma", "alpha alpha delta gamma"];
    let vocab =
        build_vocabulary(&docs, VocabConfig { unit: TermUnit::Word, n: 1, max_terms: 100 }).expect("vocabulary");
    let idf = |df: f64| (4.0 / (1.0 + df)).ln() + 1.0;
    // term -> (df, tf per document)
    let table: [(&str, f64, [f64; 3]); 4] = [
        ("alpha", 2.0, [1.0, 0.0, 2.0]),
        ("beta", 2.0, [2.0, 1.0, 0.0]),
        ("gamma", 2.0, [0.0, 1.0, 1.0]),
        ("delta", 1.0, [0.0, 0.0, 1.0]),
    ];
    let mut worst: f64 = 0.0;
    if vocab.len() != table.len() {
        return outcome(false, format!("vocabulary has {} terms, expected 4", vocab.len()));
    }
    for (d, doc) in docs.iter().enumerate() {
        let raw: Vec<f64> = table.iter().map(|(_, df, tf)| tf[d] * idf(*df)).collect();
        let norm = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
        let fv = featurize_tfidf(doc, &vocab);
        for (k, (term, _, _)) in table.iter().enumerate() {
            let Some(i) = vocab.index_of(term) else {
                return outcome(false, format!("{term} missing from vocabulary"));
            };
            let got = fv.entries.iter().find(|e| e.0 as usize == i).map_or(0.0, |e| e.1);
            worst = worst.max((got - raw[k] / norm).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max abs error {worst:.2e} over 3 documents x 4 terms"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("pair count law", Duration::from_secs(60), pair_count_law),
        ("transform soundness", Duration::from_secs(600), transform_soundness),
        ("parser round trip", Duration::from_secs(60), parser_round_trip),
        ("attribution accuracy", Duration::from_secs(300), attribution),
        ("untargeted evasion", Duration::from_secs(1800), evasion),
        ("failure taxonomy", Duration::from_secs(60), taxonomy),
        ("tf-idf oracle", Duration::from_secs(60), tfidf_oracle),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= limit;
        failed += usize::from(!pass);
        println!(
            "{} {name}: {} ({:.1}s, limit {}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    println!("acceptance: {} of {} criteria passed", 7 - failed, 7);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
