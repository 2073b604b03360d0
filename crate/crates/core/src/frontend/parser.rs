//! Recursive-descent parser for the supported C++ subset.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::lexer::{Token, TokenKind, TokenStream};

/// Compile-time failure categories (the syntax half of the error taxonomy).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SyntaxCategory {
    UndeclaredVariable,
    RedeclaredVariable,
    MissingSemicolonOrBrace,
    ReturnStatement,
    Other,
}

impl SyntaxCategory {
    pub const ALL: [SyntaxCategory; 5] = [
        SyntaxCategory::UndeclaredVariable,
        SyntaxCategory::RedeclaredVariable,
        SyntaxCategory::MissingSemicolonOrBrace,
        SyntaxCategory::ReturnStatement,
        SyntaxCategory::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SyntaxCategory::UndeclaredVariable => "undeclared-variable",
            SyntaxCategory::RedeclaredVariable => "redeclared-variable",
            SyntaxCategory::MissingSemicolonOrBrace => "missing-semicolon-or-brace",
            SyntaxCategory::ReturnStatement => "return-statement",
            SyntaxCategory::Other => "other",
        }
    }
}

impl fmt::Display for SyntaxCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{category} at {line}:{column}: {message}")]
pub struct SyntaxFailure {
    pub category: SyntaxCategory,
    pub message: String,
    pub line: u32,
    pub column: u32,
}

type PResult<T> = Result<T, SyntaxFailure>;

pub fn parse(stream: &TokenStream) -> Result<Program, SyntaxFailure> {
    let mut p = Parser {
        toks: &stream.tokens,
        eof_trivia_comments: stream
            .eof_trivia
            .iter()
            .filter(|t| t.is_comment_like())
            .map(|t| t.text().to_string())
            .collect(),
        pos: 0,
        comments_done: 0,
        pending: Vec::new(),
        typedefs: HashSet::new(),
        split_gt: false,
        first_body_open: None,
        first_body_stmt: None,
    };
    let mut program = p.program()?;
    program.layout = p.detect_layout();
    program.renumber();
    Ok(program)
}

struct Parser<'a> {
    toks: &'a [Token],
    eof_trivia_comments: Vec<String>,
    pos: usize,
    comments_done: usize,
    pending: Vec<String>,
    typedefs: HashSet<String>,
    split_gt: bool,
    first_body_open: Option<usize>,
    first_body_stmt: Option<usize>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + n)
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.is(text))
    }

    fn at_ident(&self, name: &str) -> bool {
        self.peek().is_some_and(|t| t.kind == TokenKind::Identifier && t.text == name)
    }

    fn advance(&mut self) -> &'a Token {
        let tok = &self.toks[self.pos];
        if self.comments_done <= self.pos {
            self.pending.extend(tok.comments().map(str::to_string));
            self.comments_done = self.pos + 1;
        }
        self.pos += 1;
        tok
    }

    /// Comments that belong in front of the construct starting at the current token.
    fn take_leading(&mut self) -> Vec<String> {
        let mut out = std::mem::take(&mut self.pending);
        if let Some(tok) = self.peek() {
            if self.comments_done <= self.pos {
                out.extend(tok.comments().map(str::to_string));
                self.comments_done = self.pos + 1;
            }
        } else {
            out.append(&mut self.eof_trivia_comments);
        }
        out
    }

    fn fail(&self, category: SyntaxCategory, message: impl Into<String>) -> SyntaxFailure {
        let (line, column) = match self.peek() {
            Some(t) => (t.line, t.column),
            None => self.toks.last().map(|t| (t.line, t.column + t.text.len() as u32)).unwrap_or((1, 1)),
        };
        SyntaxFailure { category, message: message.into(), line, column }
    }

    fn found(&self) -> String {
        self.peek().map(|t| format!("`{}`", t.text)).unwrap_or_else(|| "end of input".into())
    }

    fn expect(&mut self, text: &str) -> PResult<&'a Token> {
        if self.at(text) {
            return Ok(self.advance());
        }
        let category = match text {
            ";" | "}" => SyntaxCategory::MissingSemicolonOrBrace,
            _ => SyntaxCategory::Other,
        };
        Err(self.fail(category, format!("expected `{text}`, found {}", self.found())))
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Identifier => {
                let index = self.pos as u32;
                let t = self.advance();
                Ok(Ident { name: t.text.clone(), id: 0, span: Span { line: t.line, column: t.column, token: index } })
            }
            _ => Err(self.fail(SyntaxCategory::Other, format!("expected identifier, found {}", self.found()))),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut items = Vec::new();
        while self.peek().is_some() {
            let comments = self.take_leading();
            let kind = self.item()?;
            items.push(Item { comments, kind });
        }
        let trailing_comments = self.take_leading();
        Ok(Program { items, trailing_comments, layout: Layout::default() })
    }

    fn item(&mut self) -> PResult<ItemKind> {
        if self.at("using") {
            self.advance();
            self.expect("namespace")?;
            let name = self.ident()?;
            self.expect(";")?;
            return Ok(ItemKind::Using(name.name));
        }
        if self.at("typedef") {
            self.advance();
            let ty = self.ty()?;
            let name = self.ident()?;
            self.expect(";")?;
            self.typedefs.insert(name.name.clone());
            return Ok(ItemKind::Typedef { ty, name: name.name });
        }
        if self.at("return") {
            return Err(self.fail(SyntaxCategory::ReturnStatement, "return statement outside of a function"));
        }
        if !self.at_type_start() {
            return Err(self.fail(SyntaxCategory::Other, format!("unexpected {} at top level", self.found())));
        }
        let ty = self.ty()?;
        let name = self.ident()?;
        if self.at("(") {
            return self.function(ty, name).map(ItemKind::Function);
        }
        let decl = self.declarators(ty, Some(name))?;
        self.expect(";")?;
        Ok(ItemKind::Global(decl))
    }

    fn function(&mut self, ret: Type, name: Ident) -> PResult<Function> {
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.at(")") {
            loop {
                if !self.at_type_start() {
                    return Err(
                        self.fail(SyntaxCategory::Other, format!("expected parameter type, found {}", self.found()))
                    );
                }
                let ty = self.ty()?;
                let by_ref = self.at("&");
                if by_ref {
                    self.advance();
                }
                let name = self.ident()?;
                params.push(Param { ty, by_ref, name });
                if self.at(",") {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(")")?;
        if !self.at("{") {
            return Err(self.fail(SyntaxCategory::Other, format!("expected function body, found {}", self.found())));
        }
        if self.first_body_open.is_none() {
            self.first_body_open = Some(self.pos);
        }
        let body = self.block()?;
        Ok(Function { ret, name, params, body })
    }

    fn at_type_start(&self) -> bool {
        let Some(t) = self.peek() else { return false };
        match t.kind {
            TokenKind::Keyword => matches!(t.text.as_str(), "int" | "long" | "double" | "bool" | "char" | "void"),
            TokenKind::Identifier => {
                (t.text == "string" || self.typedefs.contains(&t.text))
                    || (t.text == "vector" && self.peek_at(1).is_some_and(|n| n.is("<")))
            }
            _ => false,
        }
    }

    fn ty(&mut self) -> PResult<Type> {
        let Some(t) = self.peek() else {
            return Err(self.fail(SyntaxCategory::Other, "expected type"));
        };
        let ty = match t.text.as_str() {
            "int" => Type::Int,
            "double" => Type::Double,
            "bool" => Type::Bool,
            "char" => Type::Char,
            "void" => Type::Void,
            "string" => Type::Str,
            "long" => {
                self.advance();
                if !self.at("long") {
                    return Err(self.fail(SyntaxCategory::Other, "only `long long` is supported"));
                }
                Type::LongLong
            }
            "vector" => {
                self.advance();
                self.expect("<")?;
                let inner = self.ty()?;
                self.close_angle()?;
                return Ok(Type::Vector(Box::new(inner)));
            }
            name if self.typedefs.contains(name) => Type::Alias(name.to_string()),
            _ => return Err(self.fail(SyntaxCategory::Other, format!("unsupported type {}", self.found()))),
        };
        self.advance();
        Ok(ty)
    }

    fn close_angle(&mut self) -> PResult<()> {
        if self.split_gt {
            self.split_gt = false;
            self.advance();
            return Ok(());
        }
        if self.at(">>") {
            self.split_gt = true;
            return Ok(());
        }
        self.expect(">").map(|_| ())
    }

    fn declarators(&mut self, ty: Type, first: Option<Ident>) -> PResult<Decl> {
        let mut declarators = Vec::new();
        let mut first = first;
        loop {
            let name = match first.take() {
                Some(n) => n,
                None => self.ident()?,
            };
            let mut dims = Vec::new();
            while self.at("[") {
                self.advance();
                dims.push(self.expr()?);
                self.expect("]")?;
            }
            let init = if self.at("=") {
                self.advance();
                if self.at("{") {
                    self.advance();
                    let items = self.comma_list("}")?;
                    Some(Init::List(items))
                } else {
                    Some(Init::Assign(self.assign()?))
                }
            } else if self.at("(") {
                self.advance();
                let args = self.comma_list(")")?;
                Some(Init::Ctor(args))
            } else {
                None
            };
            declarators.push(Declarator { name, dims, init });
            if self.at(",") {
                self.advance();
            } else {
                break;
            }
        }
        Ok(Decl { ty, declarators })
    }

    /// Comma-separated expressions up to (and consuming) `close`.
    fn comma_list(&mut self, close: &str) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.at(close) {
            self.advance();
            return Ok(items);
        }
        loop {
            items.push(self.assign()?);
            if self.at(",") {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(close)?;
        Ok(items)
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect("{")?;
        let mut stmts = Vec::new();
        loop {
            match self.peek() {
                None => {
                    return Err(self.fail(SyntaxCategory::MissingSemicolonOrBrace, "expected `}`, found end of input"));
                }
                Some(t) if t.is("}") => {
                    let trailing_comments = self.take_leading();
                    self.advance();
                    return Ok(Block { stmts, trailing_comments });
                }
                Some(_) => {
                    if self.first_body_open.is_some() && self.first_body_stmt.is_none() {
                        self.first_body_stmt = Some(self.pos);
                    }
                    stmts.push(self.stmt()?);
                }
            }
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let comments = self.take_leading();
        let kind = self.stmt_kind()?;
        Ok(Stmt { comments, kind })
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect("(")?;
        let e = self.expr()?;
        self.expect(")")?;
        Ok(e)
    }

    fn stmt_kind(&mut self) -> PResult<StmtKind> {
        let Some(tok) = self.peek() else {
            return Err(self.fail(SyntaxCategory::MissingSemicolonOrBrace, "expected statement"));
        };
        if tok.kind == TokenKind::Keyword || tok.kind == TokenKind::Punctuation {
            match tok.text.as_str() {
                "{" => return Ok(StmtKind::Block(self.block()?)),
                ";" => {
                    self.advance();
                    return Ok(StmtKind::Empty);
                }
                "if" => {
                    self.advance();
                    let cond = self.paren_expr()?;
                    let then = Box::new(self.stmt()?);
                    let els = if self.at("else") {
                        self.advance();
                        Some(Box::new(self.stmt()?))
                    } else {
                        None
                    };
                    return Ok(StmtKind::If { cond, then, els });
                }
                "while" => {
                    self.advance();
                    let cond = self.paren_expr()?;
                    let body = Box::new(self.stmt()?);
                    return Ok(StmtKind::While { cond, body });
                }
                "do" => {
                    self.advance();
                    let body = Box::new(self.stmt()?);
                    self.expect("while")?;
                    let cond = self.paren_expr()?;
                    self.expect(";")?;
                    return Ok(StmtKind::DoWhile { body, cond });
                }
                "for" => return self.for_stmt(),
                "break" | "continue" => {
                    let is_break = tok.text == "break";
                    self.advance();
                    self.expect(";")?;
                    return Ok(if is_break { StmtKind::Break } else { StmtKind::Continue });
                }
                "return" => {
                    self.advance();
                    if self.at(";") {
                        self.advance();
                        return Ok(StmtKind::Return(None));
                    }
                    let e = self.expr()?;
                    self.expect(";")?;
                    return Ok(StmtKind::Return(Some(e)));
                }
                "else" => return Err(self.fail(SyntaxCategory::Other, "`else` without matching `if`")),
                _ => {}
            }
        }
        if tok.kind == TokenKind::Identifier {
            let next = self.peek_at(1);
            match tok.text.as_str() {
                "cout" if next.is_some_and(|n| n.is("<<")) => return self.output_stmt(),
                "cin" if next.is_some_and(|n| n.is(">>")) => return self.input_stmt(),
                "printf" | "scanf" if next.is_some_and(|n| n.is("(")) => return self.format_stmt(),
                _ => {}
            }
        }
        if self.at_type_start() {
            let ty = self.ty()?;
            let d = self.declarators(ty, None)?;
            self.expect(";")?;
            return Ok(StmtKind::Decl(d));
        }
        if tok.kind == TokenKind::Keyword && !matches!(tok.text.as_str(), "true" | "false") {
            return Err(self.fail(SyntaxCategory::Other, format!("unsupported construct {}", self.found())));
        }
        let e = self.expr()?;
        self.expect(";")?;
        Ok(StmtKind::Expr(e))
    }

    fn for_stmt(&mut self) -> PResult<StmtKind> {
        self.advance();
        self.expect("(")?;
        let init = if self.at(";") {
            None
        } else if self.at_type_start() {
            let ty = self.ty()?;
            Some(ForInit::Decl(self.declarators(ty, None)?))
        } else {
            Some(ForInit::Expr(self.expr()?))
        };
        self.expect(";")?;
        let cond = if self.at(";") { None } else { Some(self.expr()?) };
        self.expect(";")?;
        let step = if self.at(")") { None } else { Some(self.expr()?) };
        self.expect(")")?;
        let body = Box::new(self.stmt()?);
        Ok(StmtKind::For { init, cond, step, body })
    }

    fn output_stmt(&mut self) -> PResult<StmtKind> {
        self.advance();
        let mut items = Vec::new();
        while self.at("<<") {
            self.advance();
            if self.at_ident("endl") {
                self.advance();
                items.push(OutItem::Endl);
            } else {
                items.push(OutItem::Expr(self.binary(BinOp::Add.precedence())?));
            }
        }
        self.expect(";")?;
        Ok(StmtKind::Output(items))
    }

    fn input_stmt(&mut self) -> PResult<StmtKind> {
        self.advance();
        let mut items = Vec::new();
        while self.at(">>") {
            self.advance();
            items.push(self.binary(BinOp::Add.precedence())?);
        }
        self.expect(";")?;
        Ok(StmtKind::Input(items))
    }

    fn format_stmt(&mut self) -> PResult<StmtKind> {
        let is_printf = self.advance().text == "printf";
        self.expect("(")?;
        let format = match self.peek() {
            Some(t) if t.kind == TokenKind::StringLiteral => self.advance().text.clone(),
            _ => return Err(self.fail(SyntaxCategory::Other, "format must be a string literal")),
        };
        let mut args = Vec::new();
        while self.at(",") {
            self.advance();
            args.push(self.assign()?);
        }
        self.expect(")")?;
        self.expect(";")?;
        Ok(if is_printf { StmtKind::Printf { format, args } } else { StmtKind::Scanf { format, args } })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.assign()
    }

    fn assign(&mut self) -> PResult<Expr> {
        let lhs = self.ternary()?;
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Operator {
                if let Some(op) = AssignOp::from_symbol(&t.text) {
                    self.advance();
                    let value = self.assign()?;
                    return Ok(Expr::Assign { op, target: Box::new(lhs), value: Box::new(value) });
                }
            }
        }
        Ok(lhs)
    }

    fn ternary(&mut self) -> PResult<Expr> {
        let cond = self.binary(BinOp::Or.precedence())?;
        if !self.at("?") {
            return Ok(cond);
        }
        self.advance();
        let then = self.expr()?;
        self.expect(":")?;
        let els = self.assign()?;
        Ok(Expr::Ternary { cond: Box::new(cond), then: Box::new(then), els: Box::new(els) })
    }

    fn peek_binop(&self) -> Option<BinOp> {
        let t = self.peek()?;
        if t.kind != TokenKind::Operator {
            return None;
        }
        BinOp::from_symbol(&t.text)
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.peek_binop() {
            let p = op.precedence();
            if p < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(p + 1)?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) };
        }
        Ok(lhs)
    }

    fn at_cast(&self) -> bool {
        if !self.at("(") {
            return false;
        }
        let Some(t) = self.peek_at(1) else { return false };
        match t.kind {
            TokenKind::Keyword => matches!(t.text.as_str(), "int" | "long" | "double" | "bool" | "char"),
            TokenKind::Identifier => {
                (t.text == "string" || self.typedefs.contains(&t.text)) && self.peek_at(2).is_some_and(|n| n.is(")"))
            }
            _ => false,
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Operator {
                let op = match t.text.as_str() {
                    "-" => Some(UnaryOp::Neg),
                    "+" => Some(UnaryOp::Plus),
                    "!" => Some(UnaryOp::Not),
                    "~" => Some(UnaryOp::BitNot),
                    "&" => Some(UnaryOp::AddrOf),
                    _ => None,
                };
                if let Some(op) = op {
                    self.advance();
                    let expr = self.unary()?;
                    return Ok(Expr::Unary { op, expr: Box::new(expr) });
                }
                if t.text == "++" || t.text == "--" {
                    let increment = t.text == "++";
                    self.advance();
                    let target = self.unary()?;
                    return Ok(Expr::Update { increment, prefix: true, target: Box::new(target) });
                }
            }
        }
        if self.at_cast() {
            self.advance();
            let ty = self.ty()?;
            self.expect(")")?;
            let expr = self.unary()?;
            return Ok(Expr::Cast { ty, expr: Box::new(expr) });
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.at("[") {
                self.advance();
                let index = self.expr()?;
                self.expect("]")?;
                e = Expr::Index { base: Box::new(e), index: Box::new(index) };
            } else if self.at(".") {
                self.advance();
                let method = self.ident()?.name;
                if !self.at("(") {
                    return Err(self.fail(SyntaxCategory::Other, "member access is limited to method calls"));
                }
                self.advance();
                let args = self.comma_list(")")?;
                e = Expr::Method { recv: Box::new(e), method, args };
            } else if self.at("++") || self.at("--") {
                let increment = self.advance().text == "++";
                e = Expr::Update { increment, prefix: false, target: Box::new(e) };
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(t) = self.peek() else {
            return Err(self.fail(SyntaxCategory::MissingSemicolonOrBrace, "expected expression, found end of input"));
        };
        let e = match t.kind {
            TokenKind::IntegerLiteral => Expr::IntLit(t.text.clone()),
            TokenKind::FloatLiteral => Expr::FloatLit(t.text.clone()),
            TokenKind::CharLiteral => Expr::CharLit(t.text.clone()),
            TokenKind::StringLiteral => Expr::StrLit(t.text.clone()),
            TokenKind::Keyword if t.text == "true" || t.text == "false" => Expr::BoolLit(t.text == "true"),
            TokenKind::Identifier => {
                let id = self.ident()?;
                if self.at("::") {
                    return Err(self.fail(SyntaxCategory::Other, "qualified names are not supported"));
                }
                if self.at("(") {
                    self.advance();
                    let args = self.comma_list(")")?;
                    return Ok(Expr::Call { callee: id, args });
                }
                return Ok(Expr::Var(id));
            }
            TokenKind::Punctuation if t.text == "(" => {
                self.advance();
                let inner = self.expr()?;
                self.expect(")")?;
                return Ok(Expr::Paren(Box::new(inner)));
            }
            _ => return Err(self.fail(SyntaxCategory::Other, format!("expected expression, found {}", self.found()))),
        };
        self.advance();
        Ok(e)
    }

    fn detect_layout(&self) -> Layout {
        let mut layout = Layout::default();
        if let Some(i) = self.first_body_open {
            layout.brace_on_new_line =
                self.toks[i].trivia.iter().any(|t| !t.is_comment_like() && t.text().contains('\n'));
        }
        if let Some(i) = self.first_body_stmt {
            let ws = self.toks[i].leading_whitespace();
            if let Some(nl) = ws.rfind('\n') {
                let indent = &ws[nl + 1..];
                if indent.starts_with('\t') {
                    layout.indent = Indent::Tab;
                } else if (1..=8).contains(&indent.len()) && indent.chars().all(|c| c == ' ') {
                    layout.indent = Indent::Spaces(indent.len() as u8);
                }
            }
        }
        layout
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::tokenize;

    fn parse_src(src: &str) -> Result<Program, SyntaxFailure> {
        parse(&tokenize(src).unwrap())
    }

    #[test]
    fn minimal_program() {
        let p = parse_src("int main(){return 0;}").unwrap();
        let main = p.function("main").unwrap();
        assert_eq!(main.body.stmts.len(), 1);
        assert_eq!(main.body.stmts[0].kind, StmtKind::Return(Some(Expr::IntLit("0".into()))));
    }

    #[test]
    fn missing_semicolon() {
        let err = parse_src("int main(){return 0}").unwrap_err();
        assert_eq!(err.category, SyntaxCategory::MissingSemicolonOrBrace);
    }

    #[test]
    fn missing_closing_brace() {
        let err = parse_src("int main(){ int x = 1;").unwrap_err();
        assert_eq!(err.category, SyntaxCategory::MissingSemicolonOrBrace);
    }

    #[test]
    fn malformed_expression() {
        let err = parse_src("int main(){int x; x = ;}").unwrap_err();
        assert_eq!(err.category, SyntaxCategory::Other);
    }

    #[test]
    fn top_level_return() {
        let err = parse_src("return 0;").unwrap_err();
        assert_eq!(err.category, SyntaxCategory::ReturnStatement);
    }

    #[test]
    fn out_of_subset_constructs() {
        for src in [
            "struct A {};",
            "int main(){ std::cout << 1; }",
            "int main(){ const int x = 1; return 0; }",
            "int main(){ switch (1) {} }",
            "template<typename T> T f(T x){return x;}",
        ] {
            let err = parse_src(src).unwrap_err();
            assert_eq!(err.category, SyntaxCategory::Other, "{src}");
        }
    }

    #[test]
    fn precedence_and_assoc() {
        let p = parse_src("int main(){ int a; a = 1 + 2 * 3 - 4; return 0; }").unwrap();
        let StmtKind::Expr(Expr::Assign { value, .. }) = &p.function("main").unwrap().body.stmts[1].kind else {
            panic!()
        };
        let Expr::Binary { op: BinOp::Sub, lhs, .. } = value.as_ref() else { panic!("{value:?}") };
        assert!(matches!(lhs.as_ref(), Expr::Binary { op: BinOp::Add, .. }));
    }

    #[test]
    fn nested_vector_split_shift() {
        let p = parse_src("int main(){ vector<vector<int>> g(3); return 0; }").unwrap();
        let StmtKind::Decl(d) = &p.function("main").unwrap().body.stmts[0].kind else { panic!() };
        assert_eq!(d.ty, Type::Vector(Box::new(Type::Vector(Box::new(Type::Int)))));
    }

    #[test]
    fn io_statements() {
        let p = parse_src(
            "int main(){ int a, b; cin >> a >> b; cout << a + b << \" \" << endl; printf(\"%d\\n\", a); scanf(\"%d\", &b); return 0; }",
        )
        .unwrap();
        let body = &p.function("main").unwrap().body.stmts;
        assert!(matches!(&body[1].kind, StmtKind::Input(v) if v.len() == 2));
        assert!(matches!(&body[2].kind, StmtKind::Output(v) if v.len() == 3 && v[2] == OutItem::Endl));
        assert!(matches!(&body[3].kind, StmtKind::Printf { args, .. } if args.len() == 1));
        assert!(matches!(&body[4].kind, StmtKind::Scanf { .. }));
    }

    #[test]
    fn typedef_and_cast() {
        let p = parse_src("typedef long long ll; int main(){ ll x = (ll)3 * 2; return 0; }").unwrap();
        assert!(matches!(&p.items[0].kind, ItemKind::Typedef { name, .. } if name == "ll"));
    }

    #[test]
    fn comments_attach_to_statements() {
        let src = "#include <cstdio>\n// main\nint main() {\n    // one\n    int a = 1;\n    // end\n}\n// bye\n";
        let p = parse_src(src).unwrap();
        assert_eq!(p.items[0].comments, vec!["#include <cstdio>", "// main"]);
        let f = p.function("main").unwrap();
        assert_eq!(f.body.stmts[0].comments, vec!["// one"]);
        assert_eq!(f.body.trailing_comments, vec!["// end"]);
        assert_eq!(p.trailing_comments, vec!["// bye"]);
    }

    #[test]
    fn layout_detection() {
        let p = parse_src("int main()\n{\n\treturn 0;\n}\n").unwrap();
        assert_eq!(p.layout, Layout { indent: Indent::Tab, brace_on_new_line: true });
        let p = parse_src("int main() {\n  return 0;\n}\n").unwrap();
        assert_eq!(p.layout, Layout { indent: Indent::Spaces(2), brace_on_new_line: false });
    }

    #[test]
    fn ids_are_dense_and_unique() {
        let p = parse_src("int f(int a){return a;} int main(){int b = f(2); return b;}").unwrap();
        let mut ids = Vec::new();
        crate::frontend::visit::for_each_ident(&p, &mut |i| ids.push(i.id));
        assert_eq!(ids, (0..ids.len() as u32).collect::<Vec<_>>());
    }
}
