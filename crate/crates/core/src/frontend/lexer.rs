//! Lossless lexer for the C++ subset.
//!
//! Every token records the trivia (whitespace, comments, preprocessor lines)
//! that precedes it, so concatenating `trivia + text` over the stream and
//! appending the end-of-file trivia reproduces the input exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntegerLiteral,
    FloatLiteral,
    StringLiteral,
    CharLiteral,
    Operator,
    Punctuation,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Identifier => "identifier",
            TokenKind::Keyword => "keyword",
            TokenKind::IntegerLiteral => "integer-literal",
            TokenKind::FloatLiteral => "float-literal",
            TokenKind::StringLiteral => "string-literal",
            TokenKind::CharLiteral => "char-literal",
            TokenKind::Operator => "operator",
            TokenKind::Punctuation => "punctuation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "text", rename_all = "kebab-case")]
pub enum Trivia {
    Whitespace(String),
    LineComment(String),
    BlockComment(String),
    Directive(String),
}

impl Trivia {
    pub fn text(&self) -> &str {
        match self {
            Trivia::Whitespace(s) | Trivia::LineComment(s) | Trivia::BlockComment(s) | Trivia::Directive(s) => s,
        }
    }

    pub fn is_comment_like(&self) -> bool {
        !matches!(self, Trivia::Whitespace(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
    pub trivia: Vec<Trivia>,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text && !matches!(self.kind, TokenKind::StringLiteral | TokenKind::CharLiteral)
    }

    /// Whitespace immediately preceding the token (after the last comment).
    pub fn leading_whitespace(&self) -> &str {
        match self.trivia.last() {
            Some(Trivia::Whitespace(s)) => s,
            _ => "",
        }
    }

    pub fn comments(&self) -> impl Iterator<Item = &str> {
        self.trivia.iter().filter(|t| t.is_comment_like()).map(|t| t.text())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenStream {
    pub tokens: Vec<Token>,
    pub eof_trivia: Vec<Trivia>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Rebuilds the exact source text.
    pub fn reconstruct(&self) -> String {
        let mut out = String::new();
        for tok in &self.tokens {
            for t in &tok.trivia {
                out.push_str(t.text());
            }
            out.push_str(&tok.text);
        }
        for t in &self.eof_trivia {
            out.push_str(t.text());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("lex error at {line}:{column}: {message} near `{snippet}`")]
pub struct LexError {
    pub line: u32,
    pub column: u32,
    pub message: String,
    pub snippet: String,
}

pub const KEYWORDS: &[&str] = &[
    "auto",
    "bool",
    "break",
    "case",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "delete",
    "do",
    "double",
    "else",
    "enum",
    "extern",
    "false",
    "float",
    "for",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "namespace",
    "new",
    "operator",
    "private",
    "public",
    "register",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "template",
    "this",
    "true",
    "typedef",
    "typename",
    "union",
    "unsigned",
    "using",
    "void",
    "volatile",
    "while",
];

/// Operators ordered so that longer lexemes are tried first.
pub const OPERATORS: &[&str] = &[
    "<<=", ">>=", "->", "::", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=", "*=", "/=", "%=",
    "&=", "|=", "^=", "+", "-", "*", "/", "%", "<", ">", "=", "!", "~", "&", "|", "^", "?", ":", ".",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ','];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_n(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn at_line_start(&self) -> bool {
        let before = &self.src[..self.pos];
        match before.rfind('\n') {
            Some(i) => before[i + 1..].chars().all(|c| c == ' ' || c == '\t'),
            None => before.chars().all(|c| c == ' ' || c == '\t'),
        }
    }

    fn error(&self, line: u32, column: u32, start: usize, message: &str) -> LexError {
        let snippet: String = self.src[start..].chars().take(12).collect();
        LexError { line, column, message: message.to_string(), snippet }
    }
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_ascii_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_ascii_alphanumeric()
}

pub fn tokenize(source: &str) -> Result<TokenStream, LexError> {
    let mut cur = Cursor { src: source, pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    loop {
        let trivia = lex_trivia(&mut cur)?;
        let Some(c) = cur.peek() else {
            return Ok(TokenStream { tokens, eof_trivia: trivia });
        };
        let (line, column, start) = (cur.line, cur.column, cur.pos);
        let kind = if is_ident_start(c) {
            while cur.peek().is_some_and(is_ident_continue) {
                cur.bump();
            }
            if is_keyword(&source[start..cur.pos]) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            lex_number(&mut cur)
        } else if c == '"' || c == '\'' {
            lex_quoted(&mut cur, c).map_err(|msg| cur.error(line, column, start, msg))?;
            if c == '"' {
                TokenKind::StringLiteral
            } else {
                TokenKind::CharLiteral
            }
        } else if PUNCTUATION.contains(&c) {
            cur.bump();
            TokenKind::Punctuation
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(*op)) {
            cur.bump_n(op.chars().count());
            TokenKind::Operator
        } else {
            return Err(cur.error(line, column, start, "unexpected character"));
        };
        tokens.push(Token { kind, text: source[start..cur.pos].to_string(), line, column, trivia });
    }
}

fn lex_trivia(cur: &mut Cursor<'_>) -> Result<Vec<Trivia>, LexError> {
    let mut out = Vec::new();
    loop {
        let start = cur.pos;
        match cur.peek() {
            Some(c) if c.is_whitespace() => {
                while cur.peek().is_some_and(char::is_whitespace) {
                    cur.bump();
                }
                out.push(Trivia::Whitespace(cur.src[start..cur.pos].to_string()));
            }
            Some('/') if cur.peek_at(1) == Some('/') => {
                while cur.peek().is_some_and(|c| c != '\n') {
                    cur.bump();
                }
                out.push(Trivia::LineComment(cur.src[start..cur.pos].to_string()));
            }
            Some('/') if cur.peek_at(1) == Some('*') => {
                let (line, column) = (cur.line, cur.column);
                cur.bump_n(2);
                loop {
                    if cur.rest().starts_with("*/") {
                        cur.bump_n(2);
                        break;
                    }
                    if cur.bump().is_none() {
                        return Err(cur.error(line, column, start, "unterminated block comment"));
                    }
                }
                out.push(Trivia::BlockComment(cur.src[start..cur.pos].to_string()));
            }
            Some('#') if cur.at_line_start() => {
                loop {
                    match cur.peek() {
                        None | Some('\n') => break,
                        Some('\\') if cur.peek_at(1) == Some('\n') => cur.bump_n(2),
                        Some(_) => {
                            cur.bump();
                        }
                    }
                }
                out.push(Trivia::Directive(cur.src[start..cur.pos].to_string()));
            }
            _ => return Ok(out),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>) -> TokenKind {
    let mut float = false;
    if cur.rest().starts_with("0x") || cur.rest().starts_with("0X") {
        cur.bump_n(2);
        while cur.peek().is_some_and(|c| c.is_ascii_hexdigit()) {
            cur.bump();
        }
    } else {
        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
            cur.bump();
        }
        if cur.peek() == Some('.') {
            float = true;
            cur.bump();
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
        }
        if matches!(cur.peek(), Some('e' | 'E')) {
            let sign = matches!(cur.peek_at(1), Some('+' | '-'));
            let digit_at = if sign { 2 } else { 1 };
            if cur.peek_at(digit_at).is_some_and(|c| c.is_ascii_digit()) {
                float = true;
                cur.bump_n(digit_at);
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
            }
        }
    }
    if float {
        if matches!(cur.peek(), Some('f' | 'F' | 'l' | 'L')) {
            cur.bump();
        }
        TokenKind::FloatLiteral
    } else {
        while matches!(cur.peek(), Some('u' | 'U' | 'l' | 'L')) {
            cur.bump();
        }
        TokenKind::IntegerLiteral
    }
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: char) -> Result<(), &'static str> {
    cur.bump();
    loop {
        match cur.peek() {
            None | Some('\n') => {
                return Err(if quote == '"' { "unterminated string literal" } else { "unterminated character literal" })
            }
            Some('\\') => {
                cur.bump();
                if cur.peek().is_none() || cur.peek() == Some('\n') {
                    continue;
                }
                cur.bump();
            }
            Some(c) if c == quote => {
                cur.bump();
                return Ok(());
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
}

/// Decodes the body of a string or character literal lexeme (quotes included).
pub fn unescape(lexeme: &str) -> String {
    let inner = &lexeme[1..lexeme.len().saturating_sub(1).max(1)];
    let mut out = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('t') => out.push('\t'),
            Some('r') => out.push('\r'),
            Some('0') => out.push('\0'),
            Some('a') => out.push('\x07'),
            Some('b') => out.push('\x08'),
            Some('f') => out.push('\x0c'),
            Some('v') => out.push('\x0b'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

/// Encodes text as the body of a C string literal (without quotes).
pub fn escape_str(text: &str) -> String {
    let mut out = String::new();
    for c in text.chars() {
        match c {
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            '\0' => out.push_str("\\0"),
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            c => out.push(c),
        }
    }
    out
}

/// True when `prev` immediately followed by `next` would lex differently
/// from the two tokens separately.
pub fn needs_separation(prev: &str, next: &str) -> bool {
    let (Some(a), Some(b)) = (prev.chars().last(), next.chars().next()) else {
        return false;
    };
    if is_ident_continue(a) && (is_ident_continue(b) || b == '.' && prev.chars().all(|c| c.is_ascii_digit())) {
        return true;
    }
    if a == '/' && (b == '/' || b == '*') {
        return true;
    }
    let joined = format!("{prev}{next}");
    OPERATORS.iter().any(|op| op.len() > prev.len() && joined.starts_with(op))
}
