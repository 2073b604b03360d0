//! Single traversal of the typed tree that drives both the source printer and
//! the generic syntax tree, so printed tokens and tree leaves always agree.

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::lexer::TokenKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Program,
    UsingDirective,
    TypedefDecl,
    Function,
    Parameter,
    Type,
    Block,
    DeclStmt,
    Declaration,
    Declarator,
    InitList,
    CtorArgs,
    ExprStmt,
    IfStmt,
    WhileStmt,
    DoStmt,
    ForStmt,
    BreakStmt,
    ContinueStmt,
    ReturnStmt,
    EmptyStmt,
    OutputStmt,
    InputStmt,
    PrintfStmt,
    ScanfStmt,
    BinaryExpr,
    UnaryExpr,
    AssignExpr,
    UpdateExpr,
    TernaryExpr,
    IndexExpr,
    CallExpr,
    MethodCallExpr,
    CastExpr,
    ParenExpr,
    BoolLiteral,
    Identifier,
    Keyword,
    Operator,
    Punctuation,
    IntegerLiteral,
    FloatLiteral,
    StringLiteral,
    CharLiteral,
}

impl NodeKind {
    pub const ALL: [NodeKind; 44] = [
        NodeKind::Program,
        NodeKind::UsingDirective,
        NodeKind::TypedefDecl,
        NodeKind::Function,
        NodeKind::Parameter,
        NodeKind::Type,
        NodeKind::Block,
        NodeKind::DeclStmt,
        NodeKind::Declaration,
        NodeKind::Declarator,
        NodeKind::InitList,
        NodeKind::CtorArgs,
        NodeKind::ExprStmt,
        NodeKind::IfStmt,
        NodeKind::WhileStmt,
        NodeKind::DoStmt,
        NodeKind::ForStmt,
        NodeKind::BreakStmt,
        NodeKind::ContinueStmt,
        NodeKind::ReturnStmt,
        NodeKind::EmptyStmt,
        NodeKind::OutputStmt,
        NodeKind::InputStmt,
        NodeKind::PrintfStmt,
        NodeKind::ScanfStmt,
        NodeKind::BinaryExpr,
        NodeKind::UnaryExpr,
        NodeKind::AssignExpr,
        NodeKind::UpdateExpr,
        NodeKind::TernaryExpr,
        NodeKind::IndexExpr,
        NodeKind::CallExpr,
        NodeKind::MethodCallExpr,
        NodeKind::CastExpr,
        NodeKind::ParenExpr,
        NodeKind::BoolLiteral,
        NodeKind::Identifier,
        NodeKind::Keyword,
        NodeKind::Operator,
        NodeKind::Punctuation,
        NodeKind::IntegerLiteral,
        NodeKind::FloatLiteral,
        NodeKind::StringLiteral,
        NodeKind::CharLiteral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Program => "program",
            NodeKind::UsingDirective => "using-directive",
            NodeKind::TypedefDecl => "typedef-decl",
            NodeKind::Function => "function",
            NodeKind::Parameter => "parameter",
            NodeKind::Type => "type",
            NodeKind::Block => "block",
            NodeKind::DeclStmt => "decl-stmt",
            NodeKind::Declaration => "declaration",
            NodeKind::Declarator => "declarator",
            NodeKind::InitList => "init-list",
            NodeKind::CtorArgs => "ctor-args",
            NodeKind::ExprStmt => "expr-stmt",
            NodeKind::IfStmt => "if-stmt",
            NodeKind::WhileStmt => "while-stmt",
            NodeKind::DoStmt => "do-stmt",
            NodeKind::ForStmt => "for-stmt",
            NodeKind::BreakStmt => "break-stmt",
            NodeKind::ContinueStmt => "continue-stmt",
            NodeKind::ReturnStmt => "return-stmt",
            NodeKind::EmptyStmt => "empty-stmt",
            NodeKind::OutputStmt => "output-stmt",
            NodeKind::InputStmt => "input-stmt",
            NodeKind::PrintfStmt => "printf-stmt",
            NodeKind::ScanfStmt => "scanf-stmt",
            NodeKind::BinaryExpr => "binary-expr",
            NodeKind::UnaryExpr => "unary-expr",
            NodeKind::AssignExpr => "assign-expr",
            NodeKind::UpdateExpr => "update-expr",
            NodeKind::TernaryExpr => "ternary-expr",
            NodeKind::IndexExpr => "index-expr",
            NodeKind::CallExpr => "call-expr",
            NodeKind::MethodCallExpr => "method-call-expr",
            NodeKind::CastExpr => "cast-expr",
            NodeKind::ParenExpr => "paren-expr",
            NodeKind::BoolLiteral => "bool-literal",
            NodeKind::Identifier => "identifier",
            NodeKind::Keyword => "keyword",
            NodeKind::Operator => "operator",
            NodeKind::Punctuation => "punctuation",
            NodeKind::IntegerLiteral => "integer-literal",
            NodeKind::FloatLiteral => "float-literal",
            NodeKind::StringLiteral => "string-literal",
            NodeKind::CharLiteral => "char-literal",
        }
    }

    pub fn from_token(kind: TokenKind) -> NodeKind {
        match kind {
            TokenKind::Identifier => NodeKind::Identifier,
            TokenKind::Keyword => NodeKind::Keyword,
            TokenKind::IntegerLiteral => NodeKind::IntegerLiteral,
            TokenKind::FloatLiteral => NodeKind::FloatLiteral,
            TokenKind::StringLiteral => NodeKind::StringLiteral,
            TokenKind::CharLiteral => NodeKind::CharLiteral,
            TokenKind::Operator => NodeKind::Operator,
            TokenKind::Punctuation => NodeKind::Punctuation,
        }
    }

    /// Leaves that carry a bare lexical token rather than a literal value.
    pub fn is_lexical_leaf(self) -> bool {
        matches!(self, NodeKind::Identifier | NodeKind::Keyword | NodeKind::Operator | NodeKind::Punctuation)
    }
}

/// Receiver of the emission stream. Layout hooks default to no-ops.
pub trait Sink {
    fn open(&mut self, kind: NodeKind);
    fn close(&mut self);
    fn token(&mut self, kind: TokenKind, text: &str);
    fn space(&mut self) {}
    fn newline(&mut self) {}
    fn blank_line(&mut self) {}
    fn indent(&mut self) {}
    fn dedent(&mut self) {}
    fn comment(&mut self, _text: &str) {}
}

pub fn emit_program(p: &Program, sink: &mut dyn Sink) {
    let mut e = Emitter { sink, layout: p.layout };
    e.program(p);
}

struct Emitter<'s> {
    sink: &'s mut dyn Sink,
    layout: Layout,
}

impl Emitter<'_> {
    fn kw(&mut self, s: &str) {
        self.sink.token(TokenKind::Keyword, s);
    }

    fn op(&mut self, s: &str) {
        self.sink.token(TokenKind::Operator, s);
    }

    fn punct(&mut self, s: &str) {
        self.sink.token(TokenKind::Punctuation, s);
    }

    fn ident(&mut self, s: &str) {
        self.sink.token(TokenKind::Identifier, s);
    }

    fn spaced_op(&mut self, s: &str) {
        self.sink.space();
        self.op(s);
        self.sink.space();
    }

    fn comments(&mut self, comments: &[String]) {
        for c in comments {
            self.sink.newline();
            self.sink.comment(c);
        }
    }

    fn program(&mut self, p: &Program) {
        self.sink.open(NodeKind::Program);
        for (i, item) in p.items.iter().enumerate() {
            if i > 0 {
                let prev_fn = matches!(p.items[i - 1].kind, ItemKind::Function(_));
                if prev_fn || matches!(item.kind, ItemKind::Function(_)) {
                    self.sink.blank_line();
                }
            }
            self.comments(&item.comments);
            self.sink.newline();
            self.item(&item.kind);
        }
        self.comments(&p.trailing_comments);
        self.sink.newline();
        self.sink.close();
    }

    fn item(&mut self, item: &ItemKind) {
        match item {
            ItemKind::Using(ns) => {
                self.sink.open(NodeKind::UsingDirective);
                self.kw("using");
                self.sink.space();
                self.kw("namespace");
                self.sink.space();
                self.ident(ns);
                self.punct(";");
                self.sink.close();
            }
            ItemKind::Typedef { ty, name } => {
                self.sink.open(NodeKind::TypedefDecl);
                self.kw("typedef");
                self.sink.space();
                self.ty(ty);
                self.sink.space();
                self.ident(name);
                self.punct(";");
                self.sink.close();
            }
            ItemKind::Global(d) => {
                self.sink.open(NodeKind::DeclStmt);
                self.decl(d);
                self.punct(";");
                self.sink.close();
            }
            ItemKind::Function(f) => self.function(f),
        }
    }

    fn function(&mut self, f: &Function) {
        self.sink.open(NodeKind::Function);
        self.ty(&f.ret);
        self.sink.space();
        self.ident(&f.name.name);
        self.punct("(");
        for (i, p) in f.params.iter().enumerate() {
            if i > 0 {
                self.punct(",");
                self.sink.space();
            }
            self.sink.open(NodeKind::Parameter);
            self.ty(&p.ty);
            self.sink.space();
            if p.by_ref {
                self.op("&");
            }
            self.ident(&p.name.name);
            self.sink.close();
        }
        self.punct(")");
        self.braced_block(&f.body);
        self.sink.close();
    }

    fn ty(&mut self, t: &Type) {
        self.sink.open(NodeKind::Type);
        let closers = self.ty_tokens(t);
        for _ in 0..closers / 2 {
            self.op(">>");
        }
        if closers % 2 == 1 {
            self.op(">");
        }
        self.sink.close();
    }

    /// Emits the type's tokens except trailing `>` closers, whose count is returned.
    fn ty_tokens(&mut self, t: &Type) -> usize {
        match t {
            Type::Int => self.kw("int"),
            Type::LongLong => {
                self.kw("long");
                self.sink.space();
                self.kw("long");
            }
            Type::Double => self.kw("double"),
            Type::Bool => self.kw("bool"),
            Type::Char => self.kw("char"),
            Type::Void => self.kw("void"),
            Type::Str => self.ident("string"),
            Type::Alias(name) => self.ident(name),
            Type::Vector(inner) => {
                self.ident("vector");
                self.op("<");
                return self.ty_tokens(inner) + 1;
            }
        }
        0
    }

    fn open_brace(&mut self) {
        if self.layout.brace_on_new_line {
            self.sink.newline();
        } else {
            self.sink.space();
        }
        self.punct("{");
    }

    /// `{ ... }` preceded by the layout's brace placement.
    fn braced_block(&mut self, b: &Block) {
        self.sink.open(NodeKind::Block);
        self.open_brace();
        self.block_tail(b);
        self.sink.close();
    }

    fn block_tail(&mut self, b: &Block) {
        self.sink.indent();
        for s in &b.stmts {
            self.stmt(s);
        }
        self.comments(&b.trailing_comments);
        self.sink.dedent();
        self.sink.newline();
        self.punct("}");
    }

    /// Body of a compound statement: braced block, or an indented single statement.
    fn body(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Block(b) if s.comments.is_empty() => self.braced_block(b),
            _ => {
                self.sink.indent();
                self.stmt(s);
                self.sink.dedent();
            }
        }
    }

    fn after_body(&mut self, body: &Stmt) {
        if body.is_block() && body.comments.is_empty() && !self.layout.brace_on_new_line {
            self.sink.space();
        } else {
            self.sink.newline();
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        self.comments(&s.comments);
        self.sink.newline();
        self.stmt_kind(&s.kind);
    }

    fn stmt_kind(&mut self, kind: &StmtKind) {
        match kind {
            StmtKind::Decl(d) => {
                self.sink.open(NodeKind::DeclStmt);
                self.decl(d);
                self.punct(";");
                self.sink.close();
            }
            StmtKind::Expr(e) => {
                self.sink.open(NodeKind::ExprStmt);
                self.expr(e);
                self.punct(";");
                self.sink.close();
            }
            StmtKind::If { cond, then, els } => {
                self.sink.open(NodeKind::IfStmt);
                self.kw("if");
                self.sink.space();
                self.punct("(");
                self.expr(cond);
                self.punct(")");
                self.body(then);
                if let Some(els) = els {
                    self.after_body(then);
                    self.kw("else");
                    match &els.kind {
                        StmtKind::If { .. } if els.comments.is_empty() => {
                            self.sink.space();
                            self.stmt_kind(&els.kind);
                        }
                        _ => self.body(els),
                    }
                }
                self.sink.close();
            }
            StmtKind::While { cond, body } => {
                self.sink.open(NodeKind::WhileStmt);
                self.kw("while");
                self.sink.space();
                self.punct("(");
                self.expr(cond);
                self.punct(")");
                self.body(body);
                self.sink.close();
            }
            StmtKind::DoWhile { body, cond } => {
                self.sink.open(NodeKind::DoStmt);
                self.kw("do");
                self.body(body);
                self.after_body(body);
                self.kw("while");
                self.sink.space();
                self.punct("(");
                self.expr(cond);
                self.punct(")");
                self.punct(";");
                self.sink.close();
            }
            StmtKind::For { init, cond, step, body } => {
                self.sink.open(NodeKind::ForStmt);
                self.kw("for");
                self.sink.space();
                self.punct("(");
                match init {
                    Some(ForInit::Decl(d)) => self.decl(d),
                    Some(ForInit::Expr(e)) => self.expr(e),
                    None => {}
                }
                self.punct(";");
                if let Some(c) = cond {
                    self.sink.space();
                    self.expr(c);
                }
                self.punct(";");
                if let Some(st) = step {
                    self.sink.space();
                    self.expr(st);
                }
                self.punct(")");
                self.body(body);
                self.sink.close();
            }
            StmtKind::Break => self.simple(NodeKind::BreakStmt, "break"),
            StmtKind::Continue => self.simple(NodeKind::ContinueStmt, "continue"),
            StmtKind::Return(e) => {
                self.sink.open(NodeKind::ReturnStmt);
                self.kw("return");
                if let Some(e) = e {
                    self.sink.space();
                    self.expr(e);
                }
                self.punct(";");
                self.sink.close();
            }
            StmtKind::Block(b) => {
                self.sink.open(NodeKind::Block);
                self.punct("{");
                self.block_tail(b);
                self.sink.close();
            }
            StmtKind::Empty => {
                self.sink.open(NodeKind::EmptyStmt);
                self.punct(";");
                self.sink.close();
            }
            StmtKind::Output(items) => {
                self.sink.open(NodeKind::OutputStmt);
                self.ident("cout");
                for it in items {
                    self.spaced_op("<<");
                    match it {
                        OutItem::Endl => self.ident("endl"),
                        OutItem::Expr(e) => self.expr(e),
                    }
                }
                self.punct(";");
                self.sink.close();
            }
            StmtKind::Input(items) => {
                self.sink.open(NodeKind::InputStmt);
                self.ident("cin");
                for e in items {
                    self.spaced_op(">>");
                    self.expr(e);
                }
                self.punct(";");
                self.sink.close();
            }
            StmtKind::Printf { format, args } | StmtKind::Scanf { format, args } => {
                let (kind, name) = if matches!(kind, StmtKind::Printf { .. }) {
                    (NodeKind::PrintfStmt, "printf")
                } else {
                    (NodeKind::ScanfStmt, "scanf")
                };
                self.sink.open(kind);
                self.ident(name);
                self.punct("(");
                self.sink.token(TokenKind::StringLiteral, format);
                for a in args {
                    self.punct(",");
                    self.sink.space();
                    self.expr(a);
                }
                self.punct(")");
                self.punct(";");
                self.sink.close();
            }
        }
    }

    fn simple(&mut self, kind: NodeKind, kw: &str) {
        self.sink.open(kind);
        self.kw(kw);
        self.punct(";");
        self.sink.close();
    }

    fn decl(&mut self, d: &Decl) {
        self.sink.open(NodeKind::Declaration);
        self.ty(&d.ty);
        self.sink.space();
        for (i, dc) in d.declarators.iter().enumerate() {
            if i > 0 {
                self.punct(",");
                self.sink.space();
            }
            self.sink.open(NodeKind::Declarator);
            self.ident(&dc.name.name);
            for dim in &dc.dims {
                self.punct("[");
                self.expr(dim);
                self.punct("]");
            }
            match &dc.init {
                Some(Init::Assign(e)) => {
                    self.spaced_op("=");
                    self.expr(e);
                }
                Some(Init::List(items)) => {
                    self.spaced_op("=");
                    self.sink.open(NodeKind::InitList);
                    self.punct("{");
                    self.args(items);
                    self.punct("}");
                    self.sink.close();
                }
                Some(Init::Ctor(args)) => {
                    self.sink.open(NodeKind::CtorArgs);
                    self.punct("(");
                    self.args(args);
                    self.punct(")");
                    self.sink.close();
                }
                None => {}
            }
            self.sink.close();
        }
        self.sink.close();
    }

    fn args(&mut self, args: &[Expr]) {
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.punct(",");
                self.sink.space();
            }
            self.expr(a);
        }
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::IntLit(s) => self.sink.token(TokenKind::IntegerLiteral, s),
            Expr::FloatLit(s) => self.sink.token(TokenKind::FloatLiteral, s),
            Expr::CharLit(s) => self.sink.token(TokenKind::CharLiteral, s),
            Expr::StrLit(s) => self.sink.token(TokenKind::StringLiteral, s),
            Expr::BoolLit(b) => {
                self.sink.open(NodeKind::BoolLiteral);
                self.kw(if *b { "true" } else { "false" });
                self.sink.close();
            }
            Expr::Var(id) => self.ident(&id.name),
            Expr::Unary { op, expr } => {
                self.sink.open(NodeKind::UnaryExpr);
                self.op(op.as_str());
                self.expr(expr);
                self.sink.close();
            }
            Expr::Binary { op, lhs, rhs } => {
                self.sink.open(NodeKind::BinaryExpr);
                self.expr(lhs);
                self.spaced_op(op.as_str());
                self.expr(rhs);
                self.sink.close();
            }
            Expr::Assign { op, target, value } => {
                self.sink.open(NodeKind::AssignExpr);
                self.expr(target);
                self.spaced_op(op.as_str());
                self.expr(value);
                self.sink.close();
            }
            Expr::Update { increment, prefix, target } => {
                self.sink.open(NodeKind::UpdateExpr);
                let op = if *increment { "++" } else { "--" };
                if *prefix {
                    self.op(op);
                    self.expr(target);
                } else {
                    self.expr(target);
                    self.op(op);
                }
                self.sink.close();
            }
            Expr::Ternary { cond, then, els } => {
                self.sink.open(NodeKind::TernaryExpr);
                self.expr(cond);
                self.spaced_op("?");
                self.expr(then);
                self.spaced_op(":");
                self.expr(els);
                self.sink.close();
            }
            Expr::Index { base, index } => {
                self.sink.open(NodeKind::IndexExpr);
                self.expr(base);
                self.punct("[");
                self.expr(index);
                self.punct("]");
                self.sink.close();
            }
            Expr::Call { callee, args } => {
                self.sink.open(NodeKind::CallExpr);
                self.ident(&callee.name);
                self.punct("(");
                self.args(args);
                self.punct(")");
                self.sink.close();
            }
            Expr::Method { recv, method, args } => {
                self.sink.open(NodeKind::MethodCallExpr);
                self.expr(recv);
                self.op(".");
                self.ident(method);
                self.punct("(");
                self.args(args);
                self.punct(")");
                self.sink.close();
            }
            Expr::Cast { ty, expr } => {
                self.sink.open(NodeKind::CastExpr);
                self.punct("(");
                self.ty(ty);
                self.punct(")");
                self.expr(expr);
                self.sink.close();
            }
            Expr::Paren(inner) => {
                self.sink.open(NodeKind::ParenExpr);
                self.punct("(");
                self.expr(inner);
                self.punct(")");
                self.sink.close();
            }
        }
    }
}
