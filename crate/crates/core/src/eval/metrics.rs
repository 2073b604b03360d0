use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attrib::Attributor;
use crate::corpus::SourceUnit;
use crate::frontend::parse_source;
use crate::interp::{check_equivalence, ErrorClass, Verdict};

/// Failure counts keyed by `family/category`.
pub type ErrorTable = BTreeMap<String, usize>;

/// One candidate's equivalence verdict; the raw material every transformation
/// rate is recomputed from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransformVerdict {
    pub unit: String,
    /// `None` when the unit had no tests and was excluded.
    pub verdict: Option<Verdict>,
    pub failure: Option<ErrorClass>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformationOutcome {
    pub rate: f64,
    pub evaluated: usize,
    pub equivalent: usize,
    pub excluded_no_tests: usize,
    pub error_table: ErrorTable,
    pub log: Vec<TransformVerdict>,
}

impl TransformationOutcome {
    pub fn from_log(log: Vec<TransformVerdict>) -> Self {
        let evaluated = log.iter().filter(|v| v.verdict.is_some()).count();
        let equivalent = log.iter().filter(|v| v.verdict == Some(Verdict::Equivalent)).count();
        let mut error_table = ErrorTable::new();
        for class in log.iter().filter_map(|v| v.failure) {
            *error_table.entry(class.to_string()).or_default() += 1;
        }
        TransformationOutcome {
            rate: ratio(equivalent, evaluated),
            evaluated,
            equivalent,
            excluded_no_tests: log.len() - evaluated,
            error_table,
            log,
        }
    }

    /// Sum of error-table rows whose family matches, e.g. `"syntax"`.
    pub fn family_total(&self, family: &str) -> usize {
        family_total(&self.error_table, family)
    }
}

pub fn family_total(table: &ErrorTable, family: &str) -> usize {
    table.iter().filter(|(k, _)| k.split('/').next() == Some(family)).map(|(_, v)| v).sum()
}

/// 0 for an empty sample.
fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Equivalent verdicts over evaluated candidates. Units without tests are
/// excluded and counted.
pub fn transformation_success_rate(outputs: &[(SourceUnit, String)]) -> TransformationOutcome {
    let log = outputs
        .par_iter()
        .map(|(unit, candidate)| {
            let id = unit.id();
            let Ok(original) = parse_source(&unit.code) else {
                // Originals are ingested in-subset; an unparsable one cannot be judged.
                return TransformVerdict { unit: id, verdict: None, failure: None };
            };
            match check_equivalence(&original, candidate, &unit.tests) {
                Ok(v) => TransformVerdict { unit: id, verdict: Some(v.verdict), failure: v.failure },
                Err(_) => TransformVerdict { unit: id, verdict: None, failure: None },
            }
        })
        .collect();
    TransformationOutcome::from_log(log)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvasionVerdict {
    pub true_author: String,
    /// `None` when the candidate does not parse or cannot be featurized.
    pub predicted: Option<String>,
    pub evaded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvasionOutcome {
    pub rate: f64,
    pub total: usize,
    pub evaded: usize,
    pub log: Vec<EvasionVerdict>,
}

impl EvasionOutcome {
    pub fn from_log(log: Vec<EvasionVerdict>) -> Self {
        let evaded = log.iter().filter(|v| v.evaded).count();
        EvasionOutcome { rate: ratio(evaded, log.len()), total: log.len(), evaded, log }
    }
}

/// Untargeted: fraction of candidates predicted as someone other than their
/// true author. Non-parsing candidates count as failures.
pub fn evasion_success_rate(model: &dyn Attributor, outputs: &[(String, String)]) -> EvasionOutcome {
    let log = outputs
        .par_iter()
        .map(|(author, code)| {
            let predicted = parse_source(code).ok().and_then(|_| model.predict_source(code).ok()).map(|p| p.author);
            let evaded = predicted.as_ref().is_some_and(|p| p != author);
            EvasionVerdict { true_author: author.clone(), predicted, evaded }
        })
        .collect();
    EvasionOutcome::from_log(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attrib::AttribError;
    use crate::corpus::TestCase;
    use crate::frontend::SyntaxCategory;
    use crate::interp::SemanticCategory;

    const ADD: &str = "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}";

    fn unit(k: usize, tests: bool) -> SourceUnit {
        SourceUnit {
            author: "amy".into(),
            challenge: format!("c{k}"),
            code: ADD.into(),
            tests: if tests { vec![TestCase::new("2 3", "5\n"), TestCase::new("1 1", "2\n")] } else { vec![] },
        }
    }

    #[test]
    fn identity_candidates_are_all_equivalent() {
        let outputs: Vec<_> = (0..4).map(|k| (unit(k, true), ADD.to_string())).collect();
        let o = transformation_success_rate(&outputs);
        assert_eq!(o.rate, 1.0);
        assert!(o.error_table.is_empty());
        assert_eq!(o.evaluated, 4);
    }

    #[test]
    fn units_without_tests_are_excluded_and_counted() {
        let outputs = vec![(unit(0, true), ADD.to_string()), (unit(1, false), ADD.to_string())];
        let o = transformation_success_rate(&outputs);
        assert_eq!((o.evaluated, o.excluded_no_tests, o.rate), (1, 1, 1.0));
    }

    #[test]
    fn failures_fill_the_error_table() {
        let outputs = vec![
            (unit(0, true), ADD.to_string()),
            (unit(1, true), "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl return 0;}".to_string()),
            (unit(2, true), "int main(){int a,b; cin>>a>>b; cout<<a-b<<endl; return 0;}".to_string()),
            (unit(3, true), "int main(){int a,b; cin>>a>>b; return 0;}".to_string()),
        ];
        let o = transformation_success_rate(&outputs);
        assert_eq!(o.rate, 0.25);
        assert_eq!(o.family_total("syntax"), 1);
        assert_eq!(o.family_total("semantic"), 2);
        let failures: usize = o.error_table.values().sum();
        assert_eq!(failures as f64, (1.0 - o.rate) * o.evaluated as f64);
    }

    #[test]
    fn reference_counts_reproduce_the_rate_and_totals() {
        // 272 equivalent, 40 syntax and 8 semantic failures out of 320.
        let mut log = Vec::new();
        for k in 0..320 {
            let (verdict, failure) = match k {
                0..272 => (Verdict::Equivalent, None),
                272..312 => {
                    (Verdict::SyntaxFail, Some(ErrorClass::Syntax(SyntaxCategory::ALL[k % SyntaxCategory::ALL.len()])))
                }
                _ => (Verdict::SemanticFail, Some(ErrorClass::Semantic(SemanticCategory::ALL[k % 3]))),
            };
            log.push(TransformVerdict { unit: format!("u{k}"), verdict: Some(verdict), failure });
        }
        let o = TransformationOutcome::from_log(log);
        assert!((o.rate - 0.85).abs() < 1e-12);
        assert_eq!(o.family_total("syntax"), 40);
        assert_eq!(o.family_total("semantic"), 8);
    }

    struct Always(Vec<String>, usize);

    impl Attributor for Always {
        fn labels(&self) -> &[String] {
            &self.0
        }
        fn distribution(&self, _: &str) -> Result<Vec<f64>, AttribError> {
            let mut d = vec![0.0; self.0.len()];
            d[self.1] = 1.0;
            Ok(d)
        }
    }

    #[test]
    fn evasion_rate_counts_mislabels_and_rejects_broken_code() {
        let labels = vec!["amy".to_string(), "bo".to_string()];
        let outputs = vec![("amy".to_string(), ADD.to_string()), ("amy".to_string(), ADD.to_string())];
        assert_eq!(evasion_success_rate(&Always(labels.clone(), 0), &outputs).rate, 0.0);
        assert_eq!(evasion_success_rate(&Always(labels.clone(), 1), &outputs).rate, 1.0);
        let broken = vec![("amy".to_string(), "int main( {".to_string())];
        let o = evasion_success_rate(&Always(labels, 1), &broken);
        assert_eq!(o.rate, 0.0);
        assert_eq!(o.log[0].predicted, None);
    }
}
