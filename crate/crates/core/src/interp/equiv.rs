//! Semantic-equivalence oracle and failure taxonomy.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::exec::{execute_resolved, ExecutionResult, Limits};
use crate::corpus::TestCase;
use crate::frontend::ast::Program;
use crate::frontend::sema::{analyze, Sema};
use crate::frontend::visit::for_each_ident;
use crate::frontend::{parse_source, SyntaxCategory, SyntaxFailure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SemanticCategory {
    MisusedVariable,
    OutputStatement,
    InputStatement,
}

impl SemanticCategory {
    pub const ALL: [SemanticCategory; 3] =
        [SemanticCategory::MisusedVariable, SemanticCategory::OutputStatement, SemanticCategory::InputStatement];

    pub fn as_str(self) -> &'static str {
        match self {
            SemanticCategory::MisusedVariable => "misused-variable",
            SemanticCategory::OutputStatement => "output-statement",
            SemanticCategory::InputStatement => "input-statement",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family", content = "category")]
pub enum ErrorClass {
    Syntax(SyntaxCategory),
    Semantic(SemanticCategory),
}

impl ErrorClass {
    /// Every class, syntax rows first.
    pub fn all() -> Vec<ErrorClass> {
        SyntaxCategory::ALL
            .iter()
            .map(|c| ErrorClass::Syntax(*c))
            .chain(SemanticCategory::ALL.iter().map(|c| ErrorClass::Semantic(*c)))
            .collect()
    }

    pub fn family(&self) -> &'static str {
        match self {
            ErrorClass::Syntax(_) => "syntax",
            ErrorClass::Semantic(_) => "semantic",
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            ErrorClass::Syntax(c) => c.as_str(),
            ErrorClass::Semantic(c) => c.as_str(),
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.family(), self.category())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equivalent,
    SyntaxFail,
    SemanticFail,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    pub failure: Option<ErrorClass>,
    pub failed_case: Option<usize>,
}

impl EquivalenceVerdict {
    pub fn is_equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EquivError {
    #[error("no test cases supplied")]
    NoTests,
}

/// What the classifier may look at.
#[derive(Clone, Debug)]
pub enum Evidence {
    Syntax(SyntaxFailure),
    Semantic { case: usize, original: ExecutionResult, candidate: ExecutionResult },
}

/// Strips trailing whitespace on every line and trailing newlines.
pub fn normalize_output(s: &str) -> String {
    let lines: Vec<&str> = s.split('\n').map(str::trim_end).collect();
    let mut out = lines.join("\n");
    while out.ends_with('\n') {
        out.pop();
    }
    out
}

/// Exact match after normalization, or token-wise numeric match within `tolerance`.
pub fn outputs_match(actual: &str, expected: &str, tolerance: Option<f64>) -> bool {
    let (a, e) = (normalize_output(actual), normalize_output(expected));
    if a == e {
        return true;
    }
    let Some(tol) = tolerance else { return false };
    let (ta, te): (Vec<&str>, Vec<&str>) = (a.split_whitespace().collect(), e.split_whitespace().collect());
    ta.len() == te.len()
        && ta.iter().zip(&te).all(|(x, y)| match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(p), Ok(q)) => (p - q).abs() <= tol,
            _ => x == y,
        })
}

pub fn check_equivalence(
    original: &Program,
    candidate_source: &str,
    tests: &[TestCase],
) -> Result<EquivalenceVerdict, EquivError> {
    check_equivalence_with(original, candidate_source, tests, Limits::default())
}

pub fn check_equivalence_with(
    original: &Program,
    candidate_source: &str,
    tests: &[TestCase],
    limits: Limits,
) -> Result<EquivalenceVerdict, EquivError> {
    if tests.is_empty() {
        return Err(EquivError::NoTests);
    }
    let syntax_fail = |f: SyntaxFailure| {
        let class = classify_failure(original, candidate_source, &Evidence::Syntax(f));
        Ok(EquivalenceVerdict { verdict: Verdict::SyntaxFail, failure: Some(class), failed_case: None })
    };
    let candidate = match parse_source(candidate_source) {
        Ok(p) => p,
        Err(f) => return syntax_fail(f),
    };
    let sema = match analyze(&candidate) {
        Ok(s) => s,
        Err(f) => return syntax_fail(f),
    };
    if sema.function("main").is_none() {
        return syntax_fail(SyntaxFailure {
            category: SyntaxCategory::Other,
            message: "no 'main' function".into(),
            line: 1,
            column: 1,
        });
    }
    let original_sema = analyze(original).ok();
    for (i, t) in tests.iter().enumerate() {
        let got = execute_resolved(&candidate, &sema, &t.input, limits);
        if got.is_ok() && outputs_match(&got.stdout, &t.expected_output, t.tolerance) {
            continue;
        }
        let reference = match &original_sema {
            Some(s) => execute_resolved(original, s, &t.input, limits),
            None => super::exec::execute(original, &t.input, limits),
        };
        let class = classify_failure(
            original,
            candidate_source,
            &Evidence::Semantic { case: i, original: reference, candidate: got },
        );
        return Ok(EquivalenceVerdict { verdict: Verdict::SemanticFail, failure: Some(class), failed_case: Some(i) });
    }
    Ok(EquivalenceVerdict { verdict: Verdict::Equivalent, failure: None, failed_case: None })
}

/// Exactly one class per failure. Semantic priority is input > output >
/// misused-variable; misused-variable is also the fallback.
pub fn classify_failure(_original: &Program, _candidate_source: &str, evidence: &Evidence) -> ErrorClass {
    match evidence {
        Evidence::Syntax(f) => ErrorClass::Syntax(f.category),
        Evidence::Semantic { original: o, candidate: c, .. } => {
            if o.input_items != c.input_items || o.input_stmts != c.input_stmts {
                ErrorClass::Semantic(SemanticCategory::InputStatement)
            } else if o.output_stmts != c.output_stmts {
                ErrorClass::Semantic(SemanticCategory::OutputStatement)
            } else {
                // Rebinding (see `rebinding_differs`) and unclassifiable divergences share this row.
                ErrorClass::Semantic(SemanticCategory::MisusedVariable)
            }
        }
    }
}

/// Declaration ordinal of every variable occurrence, in traversal order.
fn binding_signature(p: &Program, sema: &Sema) -> Vec<usize> {
    let mut decl_ordinal: HashMap<usize, usize> = HashMap::new();
    let mut seq = Vec::new();
    for_each_ident(p, &mut |id| {
        let idx = sema.binding_index(id);
        if !sema.bindings[idx].is_variable() {
            return;
        }
        let next = decl_ordinal.len();
        let ord = *decl_ordinal.entry(idx).or_insert(next);
        seq.push(ord);
    });
    seq
}

/// True when some aligned variable occurrence binds to a different
/// declaration in `candidate` than in `original`.
pub fn rebinding_differs(original: &Program, candidate: &Program) -> bool {
    match (analyze(original), analyze(candidate)) {
        (Ok(a), Ok(b)) => binding_signature(original, &a) != binding_signature(candidate, &b),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SUM: &str = "int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0;}";

    fn tests() -> Vec<TestCase> {
        vec![TestCase::new("2 3", "5\n"), TestCase::new("10 -4", "6")]
    }

    fn verdict(candidate: &str) -> EquivalenceVerdict {
        check_equivalence(&parse_source(SUM).unwrap(), candidate, &tests()).unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_output("a  \nb\t\n\n\n"), "a\nb");
        assert!(outputs_match("1.0001 x\n", "1 x", Some(1e-3)));
        assert!(!outputs_match("1.01 x", "1 x", Some(1e-3)));
        assert!(!outputs_match("1 x", "1 y", Some(1.0)));
    }

    #[test]
    fn identity_is_equivalent() {
        assert!(verdict(SUM).is_equivalent());
        assert_eq!(check_equivalence(&parse_source(SUM).unwrap(), SUM, &[]), Err(EquivError::NoTests));
    }

    #[test]
    fn syntax_categories() {
        let v = verdict("int main(){int a,b; cin>>a>>b; cout<<a+b<<endl; return 0}");
        assert_eq!(v.verdict, Verdict::SyntaxFail);
        assert_eq!(v.failure, Some(ErrorClass::Syntax(SyntaxCategory::MissingSemicolonOrBrace)));
        assert_eq!(v.failed_case, None);
        let v = verdict("int main(){int a; int a; return 0;}");
        assert_eq!(v.failure, Some(ErrorClass::Syntax(SyntaxCategory::RedeclaredVariable)));
        let v = verdict("int f(){return 0;}");
        assert_eq!(v.failure, Some(ErrorClass::Syntax(SyntaxCategory::Other)));
    }

    #[test]
    fn semantic_categories() {
        let v = verdict("int main(){int a,b; cin>>a>>b; cout<<a+a<<endl; return 0;}");
        assert_eq!(v.verdict, Verdict::SemanticFail);
        assert_eq!(v.failure, Some(ErrorClass::Semantic(SemanticCategory::MisusedVariable)));
        assert_eq!(v.failed_case, Some(0));
        let v = verdict("int main(){int a,b; cin>>a>>b; return 0;}");
        assert_eq!(v.failure, Some(ErrorClass::Semantic(SemanticCategory::OutputStatement)));
        let v = verdict("int main(){int a,b=3; cin>>a; cout<<a+b<<endl; return 0;}");
        assert_eq!(v.failure, Some(ErrorClass::Semantic(SemanticCategory::InputStatement)));
        assert_eq!(v.failed_case, Some(1));
    }

    #[test]
    fn rebinding_detector() {
        let a = parse_source("int main(){int x=1,y=2; cout<<x; return 0;}").unwrap();
        let b = parse_source("int main(){int x=1,y=2; cout<<y; return 0;}").unwrap();
        let c = parse_source("int main(){int p=1,q=2; cout<<p; return 0;}").unwrap();
        assert!(rebinding_differs(&a, &b));
        assert!(!rebinding_differs(&a, &c));
    }

    #[test]
    fn error_class_json() {
        let v = serde_json::to_value(ErrorClass::Semantic(SemanticCategory::InputStatement)).unwrap();
        assert_eq!(v, serde_json::json!({"family": "semantic", "category": "input-statement"}));
        assert_eq!(ErrorClass::all().len(), 8);
    }
}
