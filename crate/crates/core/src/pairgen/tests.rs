use proptest::prelude::*;

use super::*;
use crate::attrib::{train_model, AttribError, ForestConfig, TrainConfig};
use crate::corpus::TestCase;
use crate::synth::{synthetic_corpus, SynthConfig};

fn names(n: usize) -> Vec<String> {
    (0..n).map(|k| format!("a{k}")).collect()
}

/// A style set with placeholder variants, as `build_style_set` would shape it.
fn shaped(n: usize, own: usize) -> StyleSet {
    let authors = names(n);
    StyleSet {
        source: SourceUnit { author: authors[own].clone(), challenge: "c".into(), code: String::new(), tests: vec![] },
        variants: (0..n)
            .filter(|&j| j != own)
            .map(|j| Variant { style: j, code: format!("v{j}"), reached_target: true, sequence: vec![] })
            .collect(),
        authors,
        own,
        dropped: vec![],
    }
}

/// Independent oracle: every ordered pair (a, b) of distinct non-own styles
/// where b is the next non-own style after a.
fn oracle(n: usize, own: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let between = (a + 1..b).any(|k| k != own);
            if a != own && b != own && !between {
                out.push((a, b));
            }
        }
    }
    out
}

#[test]
fn count_law_holds_exhaustively_for_small_n() {
    for n in 3..=10 {
        for own in 0..n {
            let pairs = build_pairs(&shaped(n, own)).unwrap();
            assert_eq!(pairs.len(), n - 2, "n={n} own={own}");
            let got: Vec<(usize, usize)> = pairs.iter().map(|p| (p.from, p.to)).collect();
            assert_eq!(got, oracle(n, own));
            assert!(pairs.iter().all(|p| p.src == format!("v{}", p.from) && p.tgt == format!("v{}", p.to)));
        }
    }
}

#[test]
fn three_styles_give_one_pair_and_two_give_none() {
    assert_eq!(build_pairs(&shaped(3, 1)).unwrap().len(), 1);
    assert!(matches!(build_pairs(&shaped(2, 0)), Err(PairgenError::TooFewStyles(2))));
}

proptest! {
    #[test]
    fn no_pair_touches_the_own_style(n in 3usize..=10, own_frac in 0.0f64..1.0) {
        let own = ((own_frac * n as f64) as usize).min(n - 1);
        let pairs = build_pairs(&shaped(n, own)).unwrap();
        prop_assert_eq!(pairs.len(), n - 2);
        prop_assert!(pairs.iter().all(|p| p.from != own && p.to != own && p.from < p.to));
    }
}

fn small_world(authors: usize) -> (Vec<SourceUnit>, crate::attrib::AttributionModel) {
    let corpus = synthetic_corpus(&SynthConfig { authors, challenges: 3, tests_per_unit: 3, ..Default::default() });
    let cfg = TrainConfig { forest: ForestConfig { n_trees: 25, ..Default::default() }, ..Default::default() };
    let model = train_model(&corpus.units, &cfg).unwrap();
    (corpus.units, model)
}

fn quick() -> PairgenConfig {
    PairgenConfig { search: SearchConfig { budget: 15, ..Default::default() }, strict: false }
}

#[test]
fn five_authors_give_four_equivalent_variants() {
    let (units, model) = small_world(5);
    let authors = model.labels().to_vec();
    let unit = &units[0];
    let set = build_style_set(unit, &authors, &model, &quick()).unwrap();
    assert_eq!(set.variants.len(), 4);
    assert!(set.variants.iter().all(|v| v.style != set.own));
    let original = parse_source(&unit.code).unwrap();
    for v in &set.variants {
        assert!(check_equivalence(&original, &v.code, &unit.tests).unwrap().is_equivalent());
    }
    assert_eq!(build_pairs(&set).unwrap().len(), 3);
}

#[test]
fn two_authors_give_one_variant_and_no_pairs() {
    let (units, model) = small_world(2);
    let set = build_style_set(&units[0], model.labels(), &model, &quick()).unwrap();
    assert_eq!(set.variants.len(), 1);
    assert!(matches!(build_pairs(&set), Err(PairgenError::TooFewStyles(2))));
}

/// Always attributes code to the first author.
struct Stubborn(Vec<String>);

impl Attributor for Stubborn {
    fn labels(&self) -> &[String] {
        &self.0
    }
    fn distribution(&self, _: &str) -> Result<Vec<f64>, AttribError> {
        let mut d = vec![0.0; self.0.len()];
        d[0] = 1.0;
        Ok(d)
    }
}

#[test]
fn unreached_targets_are_kept_unless_strict() {
    let unit = SourceUnit {
        author: "a1".into(),
        challenge: "c".into(),
        code: "int main(){int x; cin>>x; cout<<x*2<<endl; return 0;}".into(),
        tests: vec![TestCase::new("3", "6\n"), TestCase::new("0", "0\n")],
    };
    let model = Stubborn(names(4));
    let lax = build_style_set(&unit, &names(4), &model, &quick()).unwrap();
    assert_eq!(
        lax.variants.iter().map(|v| (v.style, v.reached_target)).collect::<Vec<_>>(),
        [(0, true), (2, false), (3, false)]
    );
    let strict = build_style_set(&unit, &names(4), &model, &PairgenConfig { strict: true, ..quick() }).unwrap();
    assert_eq!(strict.variants.len(), 1);
    assert_eq!(strict.dropped, vec![2, 3]);
}

#[test]
fn unknown_author_and_actionless_program_are_errors() {
    let mut unit =
        SourceUnit { author: "zed".into(), challenge: "c".into(), code: "int main(){}".into(), tests: vec![] };
    let model = Stubborn(names(3));
    assert!(matches!(build_style_set(&unit, &names(3), &model, &quick()), Err(PairgenError::UnknownAuthor(_))));
    unit.author = "a1".into();
    assert!(matches!(build_style_set(&unit, &names(3), &model, &quick()), Err(PairgenError::NoActions)));
}

#[test]
fn export_round_trips_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let one = PairDataset { pairs: build_pairs(&shaped(3, 2)).unwrap() };
    let path = dir.path().join("pairs.jsonl");
    export_jsonl(&one, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim()).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys.len(), 5);
    for k in ["src", "tgt", "author", "from", "to"] {
        assert!(keys.contains(&k));
    }
    assert_eq!(read_jsonl(&path).unwrap(), one);

    let again = dir.path().join("again.jsonl");
    export_jsonl(&one, &again).unwrap();
    assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());

    let empty = dir.path().join("empty.jsonl");
    assert!(matches!(export_jsonl(&PairDataset::default(), &empty), Err(PairgenError::EmptyDataset)));
    assert!(!empty.exists());
}

#[test]
fn dataset_is_deterministic_and_every_code_is_equivalent() {
    let (units, model) = small_world(4);
    let subset: Vec<SourceUnit> = units.iter().step_by(3).cloned().collect();
    let (sets, a) = build_dataset(&subset, model.labels(), &model, &quick()).unwrap();
    let (_, b) = build_dataset(&subset, model.labels(), &model, &quick()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.pairs.len(), subset.len() * 2);
    assert_eq!(sets.len(), subset.len());
    for (chunk, unit) in a.pairs.chunks(2).zip(&subset) {
        let original = parse_source(&unit.code).unwrap();
        for p in chunk {
            assert_eq!(p.author, unit.author);
            for code in [&p.src, &p.tgt] {
                assert!(check_equivalence(&original, code, &unit.tests).unwrap().is_equivalent());
            }
        }
    }
}
