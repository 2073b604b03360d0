//! One JSON document per program carrying the three structural views the
//! neural stage consumes, all indexed by the same token stream.

use serde::{Deserialize, Serialize};

use super::dfg::{build_dfg, Dfg, DfgError};
use super::emit::NodeKind;
use super::lexer::{tokenize, TokenKind};
use super::syntax::{extract_leaf_paths, syntax_tree};
use super::{parse_source, print_source, SyntaxFailure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodeLimits {
    pub max_ast_depth: usize,
    pub max_paths: usize,
    pub max_dfg: usize,
}

impl Default for EncodeLimits {
    fn default() -> Self {
        EncodeLimits { max_ast_depth: 64, max_paths: 1000, max_dfg: 1000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedToken {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedPath {
    /// Index into `tokens`.
    pub token: usize,
    pub path: Vec<NodeKind>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Encoded {
    /// Canonical printing of the input; every index refers to its tokens.
    pub source: String,
    pub tokens: Vec<EncodedToken>,
    pub leaf_paths: Vec<EncodedPath>,
    pub dfg: Dfg,
}

#[derive(Debug, thiserror::Error)]
pub enum EncodeError {
    #[error(transparent)]
    Syntax(#[from] SyntaxFailure),
    #[error(transparent)]
    Dfg(#[from] DfgError),
}

pub fn encode(source: &str, limits: EncodeLimits) -> Result<Encoded, EncodeError> {
    let canonical = print_source(&parse_source(source)?);
    let program = parse_source(&canonical)?;
    let tokens = tokenize(&canonical)
        .map_err(|e| SyntaxFailure {
            category: super::SyntaxCategory::Other,
            message: e.message,
            line: e.line,
            column: e.column,
        })?
        .tokens
        .into_iter()
        .map(|t| EncodedToken { kind: t.kind, text: t.text, line: t.line, column: t.column })
        .collect();
    let leaf_paths = extract_leaf_paths(&syntax_tree(&program), limits.max_ast_depth, limits.max_paths)
        .into_iter()
        .map(|p| EncodedPath { token: p.leaf.index, path: p.path })
        .collect();
    let dfg = build_dfg(&program, limits.max_dfg)?;
    Ok(Encoded { source: canonical, tokens, leaf_paths, dfg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::dfg::Role;

    const SRC: &str = "int main(){int a=1; int b=a+2; cout<<b<<endl; return 0;}";

    #[test]
    fn views_share_one_token_index() {
        let e = encode(SRC, EncodeLimits::default()).unwrap();
        assert_eq!(e.leaf_paths.len(), e.tokens.len());
        for (k, p) in e.leaf_paths.iter().enumerate() {
            assert_eq!(p.token, k);
            assert_eq!(p.path[0], NodeKind::Program);
        }
        for n in &e.dfg.nodes {
            assert_eq!(e.tokens[n.token as usize].text, n.name);
        }
        let def_a = e.dfg.nodes.iter().position(|n| n.name == "a" && n.role == Role::Def).unwrap();
        let use_a = e.dfg.nodes.iter().position(|n| n.name == "a" && n.role == Role::Use).unwrap();
        assert!(e.dfg.edges.contains(&(def_a, use_a)));
    }

    #[test]
    fn limits_cap_paths_and_depth() {
        let e = encode(SRC, EncodeLimits { max_ast_depth: 3, max_paths: 5, max_dfg: 2 }).unwrap();
        assert_eq!(e.leaf_paths.len(), 5);
        assert!(e.leaf_paths.iter().all(|p| p.path.len() <= 3));
        assert!(e.dfg.nodes.len() <= 2);
    }

    #[test]
    fn invalid_source_is_a_syntax_error() {
        assert!(matches!(encode("int main( {", EncodeLimits::default()), Err(EncodeError::Syntax(_))));
    }
}
