//! Lexing, parsing, printing and structural extraction for the C++ subset.

pub mod ast;
pub mod dfg;
pub mod emit;
pub mod encode;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod sema;
pub mod syntax;
pub mod visit;

pub use ast::Program;
pub use dfg::{build_dfg, Dfg, DfgError};
pub use emit::NodeKind;
pub use encode::{encode, EncodeError, EncodeLimits, Encoded};
pub use lexer::{tokenize, LexError, Token, TokenKind, TokenStream};
pub use parser::{parse, SyntaxCategory, SyntaxFailure};
pub use printer::print_source;
pub use sema::{analyze, Sema};
pub use syntax::{extract_leaf_paths, syntax_tree, LeafPath, SyntaxNode};

/// Tokenize and parse; lexical errors are reported as `other` syntax failures.
pub fn parse_source(source: &str) -> Result<Program, SyntaxFailure> {
    let tokens = tokenize(source).map_err(|e| SyntaxFailure {
        category: SyntaxCategory::Other,
        message: e.message.clone(),
        line: e.line,
        column: e.column,
    })?;
    parse(&tokens)
}
