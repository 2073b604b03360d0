//! Synthetic data: styled solutions of fixed challenges for attribution and
//! evasion experiments, and random programs for transform soundness checks.

mod challenges;
mod random;
mod styles;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use challenges::{Challenge, CHALLENGES, ROLES};
pub use random::{random_input, random_program};
pub use styles::{apply_style, author_styles, AuthorStyle, NameScheme};

use crate::corpus::{Corpus, SourceUnit, TestCase};
use crate::frontend::{parse_source, print_source};
use crate::interp::{execute, Limits};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub authors: usize,
    /// At most [`CHALLENGES`]`.len()`.
    pub challenges: usize,
    pub tests_per_unit: usize,
    /// Probability of an author skipping one habit in one program.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { authors: 20, challenges: 8, tests_per_unit: 3, noise: 0.1, seed: 0 }
    }
}

/// Expected outputs come from running the reference solution.
pub fn challenge_tests(ch: &Challenge, n: usize, seed: u64) -> Vec<TestCase> {
    let reference = parse_source(ch.source).expect("reference solutions parse");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let input = (ch.gen_input)(&mut rng);
            let r = execute(&reference, &input, Limits::default());
            assert!(r.is_ok(), "reference solution {} failed: {:?}", ch.name, r.status);
            TestCase::new(input, r.stdout)
        })
        .collect()
}

/// Every author solves every challenge in their own style.
pub fn synthetic_corpus(cfg: &SynthConfig) -> Corpus {
    let styles = author_styles(cfg.authors, cfg.seed);
    let chosen = &CHALLENGES[..cfg.challenges.min(CHALLENGES.len())];
    let tests: Vec<Vec<TestCase>> = chosen
        .iter()
        .enumerate()
        .map(|(k, ch)| challenge_tests(ch, cfg.tests_per_unit, cfg.seed ^ (k as u64 + 1)))
        .collect();
    let units: Vec<SourceUnit> = styles
        .par_iter()
        .enumerate()
        .flat_map_iter(|(a, style)| {
            let tests = &tests;
            chosen.iter().enumerate().map(move |(k, ch)| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1_000_003) ^ ((a * 64 + k) as u64));
                let styled =
                    apply_style(&parse_source(ch.source).expect("reference parses"), style, cfg.noise, &mut rng);
                SourceUnit {
                    author: style.name.clone(),
                    challenge: ch.name.to_string(),
                    code: print_source(&styled),
                    tests: tests[k].clone(),
                }
            })
        })
        .collect();
    Corpus::new(units)
}

/// Random programs with `tests` generated inputs each, under author `gen`.
pub fn random_units(count: usize, tests: usize, seed: u64) -> Vec<SourceUnit> {
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let code = random_program(&mut rng);
            let p = parse_source(&code).unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{code}"));
            let tests = (0..tests)
                .map(|_| {
                    let input = random_input(&mut rng);
                    TestCase::new(input.clone(), execute(&p, &input, Limits::default()).stdout)
                })
                .collect();
            SourceUnit { author: "gen".into(), challenge: format!("r{i:03}"), code, tests }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::check_equivalence;

    #[test]
    fn reference_solutions_parse_and_pass_their_tests() {
        for (k, ch) in CHALLENGES.iter().enumerate() {
            let tests = challenge_tests(ch, 4, k as u64);
            let p = parse_source(ch.source).unwrap();
            assert!(check_equivalence(&p, ch.source, &tests).unwrap().is_equivalent(), "{}", ch.name);
        }
    }

    #[test]
    fn styled_units_are_equivalent_to_references() {
        let corpus = synthetic_corpus(&SynthConfig { authors: 6, tests_per_unit: 3, ..Default::default() });
        assert_eq!(corpus.len(), 6 * 8);
        for u in &corpus.units {
            let ch = CHALLENGES.iter().find(|c| c.name == u.challenge).unwrap();
            let reference = parse_source(ch.source).unwrap();
            let v = check_equivalence(&reference, &u.code, &u.tests).unwrap();
            assert!(v.is_equivalent(), "{} / {}: {v:?}\n{}", u.author, u.challenge, u.code);
        }
    }

    #[test]
    fn styles_are_distinct_and_deterministic() {
        let a = author_styles(20, 7);
        assert_eq!(a, author_styles(20, 7));
        let set: std::collections::BTreeSet<_> =
            a.iter().map(|s| (s.while_loops, s.printf_io, s.update, s.scheme, s.alt_stems, s.split_decls)).collect();
        assert!(set.len() >= 18);
        let c1 = synthetic_corpus(&SynthConfig { authors: 3, ..Default::default() });
        let c2 = synthetic_corpus(&SynthConfig { authors: 3, ..Default::default() });
        assert_eq!(c1.units, c2.units);
    }

    #[test]
    fn random_programs_run_cleanly() {
        for u in random_units(30, 3, 11) {
            let p = parse_source(&u.code).unwrap();
            for t in &u.tests {
                let r = execute(&p, &t.input, Limits::default());
                assert!(r.is_ok(), "{:?}\n{}", r.status, u.code);
            }
        }
    }
}
