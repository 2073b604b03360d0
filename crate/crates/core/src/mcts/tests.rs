use super::*;
use crate::attrib::{train_model, ForestConfig, TrainConfig};
use crate::corpus::SourceUnit;
use crate::frontend::parse_source;

fn labels() -> Vec<String> {
    vec!["alice".into(), "bob".into()]
}

/// Same distribution for every input.
struct Fixed(Vec<String>, Vec<f64>);

impl Attributor for Fixed {
    fn labels(&self) -> &[String] {
        &self.0
    }
    fn distribution(&self, _: &str) -> Result<Vec<f64>, AttribError> {
        Ok(self.1.clone())
    }
}

/// Predicts bob only for one exact source text.
struct ExactFlip(Vec<String>, String);

impl Attributor for ExactFlip {
    fn labels(&self) -> &[String] {
        &self.0
    }
    fn distribution(&self, src: &str) -> Result<Vec<f64>, AttribError> {
        Ok(if src == self.1 { vec![0.1, 0.9] } else { vec![0.9, 0.1] })
    }
}

/// P(bob) grows with the number of `printf`, `while` and `_` occurrences.
struct Smooth(Vec<String>);

impl Attributor for Smooth {
    fn labels(&self) -> &[String] {
        &self.0
    }
    fn distribution(&self, src: &str) -> Result<Vec<f64>, AttribError> {
        let s = (src.matches("printf").count() + src.matches("while").count() + src.matches('_').count()) as f64;
        let bob = s / (s + 4.0);
        Ok(vec![1.0 - bob, bob])
    }
}

const SMALL: &str = "int main(){int a=1; cout<<a<<endl; return 0;}";
const RICHER: &str = "int main(){int n=4,s=0; for(int i=0;i<n;i++){s+=i;} cout<<s<<endl; return 0;}";

fn alice() -> Objective {
    Objective::Untargeted("alice".into())
}

#[test]
fn reward_follows_probability() {
    let sure = Fixed(labels(), vec![1.0, 0.0]);
    assert_eq!(reward(&sure, "", &alice()).unwrap(), 0.0);
    let never = Fixed(labels(), vec![0.0, 1.0]);
    assert_eq!(reward(&never, "", &alice()).unwrap(), 1.0);
    assert_eq!(reward(&never, "", &Objective::Targeted("bob".into())).unwrap(), 1.0);
    assert_eq!(reward(&never, "", &Objective::Targeted("carol".into())).unwrap(), 0.0);
}

#[test]
fn zero_budget_only_checks_the_original() {
    let p = parse_source(SMALL).unwrap();
    let cfg = SearchConfig { budget: 0, ..Default::default() };
    let sure = Fixed(labels(), vec![1.0, 0.0]);
    let r = evade(&p, &sure, &alice(), &cfg).unwrap();
    assert!(!r.success && r.sequence.is_empty() && r.iterations_used == 0);
    assert_eq!(r, random_baseline(&p, &sure, &alice(), &cfg).unwrap());
    let wrong = evade(&p, &sure, &Objective::Untargeted("bob".into()), &cfg).unwrap();
    assert!(wrong.success && wrong.sequence.is_empty());
}

#[test]
fn no_actions_is_reported() {
    let p = parse_source("int main(){}").unwrap();
    assert!(enumerate_actions(&p).is_empty());
    let sure = Fixed(labels(), vec![1.0, 0.0]);
    assert!(matches!(evade(&p, &sure, &alice(), &SearchConfig::default()), Err(SearchError::NoActions)));
    assert!(matches!(random_baseline(&p, &sure, &alice(), &SearchConfig::default()), Err(SearchError::NoActions)));
}

fn one_flip() -> (Program, ExactFlip, TransformAction, usize) {
    let p = parse_source(RICHER).unwrap();
    let actions = enumerate_actions(&p);
    let chosen = actions.iter().find(|a| a.transform == crate::transforms::TransformId::T5).unwrap().clone();
    let target = print_source(&apply(&p, &chosen).unwrap());
    // Exhaustive single-step oracle: exactly one action reaches the flipping text.
    let hits = actions.iter().filter(|a| print_source(&apply(&p, a).unwrap()) == target).count();
    assert_eq!(hits, 1);
    (p, ExactFlip(labels(), target), chosen, actions.len())
}

#[test]
fn single_flipping_rename_is_found() {
    let (p, model, chosen, n) = one_flip();
    // Exhaustive root expansion; widening would defer some first-level actions.
    let cfg = SearchConfig { budget: n, widening: None, ..Default::default() };
    let r = evade(&p, &model, &alice(), &cfg).unwrap();
    assert!(r.success);
    assert_eq!(r.sequence, vec![chosen]);
    assert_eq!(r.predicted, "bob");
    assert!(r.iterations_used <= n);
}

#[test]
fn uct_needs_fewer_iterations_than_random_walks() {
    let p = parse_source(SMALL).unwrap();
    let actions = enumerate_actions(&p);
    let target = print_source(&apply(&p, &actions[0]).unwrap());
    let model = ExactFlip(labels(), target);
    let budget = 400;
    let mean = |f: &dyn Fn(u64) -> EvasionResult| {
        (0..100).map(f).map(|r| if r.success { r.iterations_used } else { budget + 1 }).sum::<usize>() as f64 / 100.0
    };
    let cfg = |seed| SearchConfig { budget, seed, ..Default::default() };
    let uct = mean(&|s| evade(&p, &model, &alice(), &cfg(s)).unwrap());
    let rnd = mean(&|s| random_baseline(&p, &model, &alice(), &cfg(s)).unwrap());
    assert!(uct <= actions.len() as f64, "uct {uct}");
    assert!(uct < rnd, "uct {uct} random {rnd}");
}

#[test]
fn search_is_deterministic_and_budget_monotone() {
    let p = parse_source(RICHER).unwrap();
    let model = Smooth(labels());
    let run = |budget, seed| evade(&p, &model, &alice(), &SearchConfig { budget, seed, ..Default::default() }).unwrap();
    assert_eq!(run(60, 3), run(60, 3));
    for seed in 0..5 {
        let mut succeeded = false;
        for budget in [1, 5, 20, 60] {
            let r = run(budget, seed);
            assert!(!succeeded || r.success, "seed {seed} budget {budget}");
            succeeded |= r.success;
        }
    }
    let base =
        |seed| random_baseline(&p, &model, &alice(), &SearchConfig { budget: 40, seed, ..Default::default() }).unwrap();
    assert_eq!(base(2), base(2));
}

#[test]
fn root_visits_match_iterations_and_trace_has_one_line_each() {
    let p = parse_source(RICHER).unwrap();
    let model = Smooth(labels());
    let cfg = SearchConfig { budget: 30, early_stop: false, ..Default::default() };
    let mut buf = Vec::new();
    let r = evade_traced(&p, &model, &Objective::Targeted("carol".into()), &cfg, Some(&mut buf)).unwrap();
    assert_eq!(r.iterations_used, 30);
    assert_eq!(r.root_visits, 30);
    let lines: Vec<serde_json::Value> =
        String::from_utf8(buf).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 30);
    assert!(lines.iter().all(|l| l["depth"].as_u64().unwrap() <= cfg.max_depth as u64));
    assert!(r.sequence.len() <= cfg.max_depth);
}

#[test]
fn final_code_is_equivalent_and_consistent() {
    let p = parse_source(RICHER).unwrap();
    let model = Smooth(labels());
    let r = evade(&p, &model, &alice(), &SearchConfig { budget: 50, ..Default::default() }).unwrap();
    assert!(r.success);
    assert_eq!(model.predict_source(&r.final_code).unwrap().author, r.predicted);
    let replay = crate::transforms::apply_all(&p, &r.sequence).unwrap();
    assert_eq!(print_source(&replay), r.final_code);
    let tests = [crate::corpus::TestCase::new("", "6")];
    assert!(crate::interp::check_equivalence(&p, &r.final_code, &tests).unwrap().is_equivalent());
}

#[test]
fn targeted_reward_prefers_the_targets_own_code() {
    let unit = |a: &str, i: usize, code: String| SourceUnit {
        author: a.into(),
        challenge: format!("c{i}"),
        code,
        tests: vec![],
    };
    let mut units = Vec::new();
    for i in 0..4 {
        units.push(unit("alice", i, format!("int main(){{int alpha{i}=0; printf(\"%d\", alpha{i}); return 0;}}")));
        units.push(unit("bob", i, format!("int main(){{long long beta{i}=0; cout<<beta{i}; return 0;}}")));
    }
    let cfg = TrainConfig { forest: ForestConfig { n_trees: 30, seed: 4, ..Default::default() }, ..Default::default() };
    let model = train_model(&units, &cfg).unwrap();
    let target = Objective::Targeted("bob".into());
    let own = reward(&model, &units[1].code, &target).unwrap();
    assert_eq!(model.predict_source(&units[1].code).unwrap().author, "bob");
    for u in units.iter().filter(|u| u.author == "alice") {
        assert!(own >= reward(&model, &u.code, &target).unwrap());
    }
}

#[test]
fn widening_reaches_deeper_tree_nodes() {
    let p = parse_source(RICHER).unwrap();
    let model = Fixed(labels(), vec![0.7, 0.3]);
    let n = enumerate_actions(&p).len();
    let deepest = |widening| {
        let cfg = SearchConfig { budget: n, rollout_depth: 0, widening, ..Default::default() };
        let mut buf = Vec::new();
        evade_traced(&p, &model, &alice(), &cfg, Some(&mut buf)).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["depth"].as_u64().unwrap())
            .max()
            .unwrap()
    };
    assert_eq!(deepest(None), 1);
    assert!(deepest(Some(Widening { c: 1.0, alpha: 0.3 })) >= 3);
}
