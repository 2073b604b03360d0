//! Typed syntax tree for the C++ subset.
//!
//! Structural equality ignores source positions and identifier ids: two trees
//! are equal when they print to the same program.

use std::fmt;

/// Source position of an identifier occurrence. Never participates in equality.
#[derive(Clone, Copy, Debug, Default)]
pub struct Span {
    pub line: u32,
    pub column: u32,
    pub token: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

#[derive(Clone, Debug)]
pub struct Ident {
    pub name: String,
    /// Unique within a program after [`Program::renumber`].
    pub id: u32,
    pub span: Span,
}

impl Ident {
    pub fn new(name: impl Into<String>) -> Self {
        Ident { name: name.into(), id: 0, span: Span::default() }
    }
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

impl Eq for Ident {}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    LongLong,
    Double,
    Bool,
    Char,
    Str,
    Void,
    Vector(Box<Type>),
    Alias(String),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::LongLong => f.write_str("long long"),
            Type::Double => f.write_str("double"),
            Type::Bool => f.write_str("bool"),
            Type::Char => f.write_str("char"),
            Type::Str => f.write_str("string"),
            Type::Void => f.write_str("void"),
            Type::Vector(inner) => write!(f, "vector<{inner}>"),
            Type::Alias(name) => f.write_str(name),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Plus,
    Not,
    BitNot,
    AddrOf,
}

impl UnaryOp {
    pub fn as_str(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Plus => "+",
            UnaryOp::Not => "!",
            UnaryOp::BitNot => "~",
            UnaryOp::AddrOf => "&",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    And,
    Or,
}

impl BinOp {
    pub const ALL: [BinOp; 18] = [
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::Add,
        BinOp::Sub,
        BinOp::Shl,
        BinOp::Shr,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::BitAnd,
        BinOp::BitXor,
        BinOp::BitOr,
        BinOp::And,
        BinOp::Or,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Shl => "<<",
            BinOp::Shr => ">>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::BitAnd => "&",
            BinOp::BitXor => "^",
            BinOp::BitOr => "|",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn from_symbol(s: &str) -> Option<BinOp> {
        BinOp::ALL.iter().copied().find(|op| op.as_str() == s)
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Mul | BinOp::Div | BinOp::Rem => 13,
            BinOp::Add | BinOp::Sub => 12,
            BinOp::Shl | BinOp::Shr => 11,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 10,
            BinOp::Eq | BinOp::Ne => 9,
            BinOp::BitAnd => 8,
            BinOp::BitXor => 7,
            BinOp::BitOr => 6,
            BinOp::And => 5,
            BinOp::Or => 4,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne)
    }
}

/// `=` or a compound assignment operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AssignOp(pub Option<BinOp>);

impl AssignOp {
    pub const PLAIN: AssignOp = AssignOp(None);

    pub fn as_str(self) -> &'static str {
        match self.0 {
            None => "=",
            Some(BinOp::Mul) => "*=",
            Some(BinOp::Div) => "/=",
            Some(BinOp::Rem) => "%=",
            Some(BinOp::Add) => "+=",
            Some(BinOp::Sub) => "-=",
            Some(BinOp::Shl) => "<<=",
            Some(BinOp::Shr) => ">>=",
            Some(BinOp::BitAnd) => "&=",
            Some(BinOp::BitXor) => "^=",
            Some(BinOp::BitOr) => "|=",
            Some(_) => unreachable!("not a compound assignment operator"),
        }
    }

    pub fn from_symbol(s: &str) -> Option<AssignOp> {
        if s == "=" {
            return Some(AssignOp::PLAIN);
        }
        let base = s.strip_suffix('=')?;
        let op = BinOp::from_symbol(base)?;
        Self::compound_allowed(op).then_some(AssignOp(Some(op)))
    }

    pub fn compound_allowed(op: BinOp) -> bool {
        matches!(
            op,
            BinOp::Mul
                | BinOp::Div
                | BinOp::Rem
                | BinOp::Add
                | BinOp::Sub
                | BinOp::Shl
                | BinOp::Shr
                | BinOp::BitAnd
                | BinOp::BitXor
                | BinOp::BitOr
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    IntLit(String),
    FloatLit(String),
    CharLit(String),
    StrLit(String),
    BoolLit(bool),
    Var(Ident),
    Unary { op: UnaryOp, expr: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Assign { op: AssignOp, target: Box<Expr>, value: Box<Expr> },
    Update { increment: bool, prefix: bool, target: Box<Expr> },
    Ternary { cond: Box<Expr>, then: Box<Expr>, els: Box<Expr> },
    Index { base: Box<Expr>, index: Box<Expr> },
    Call { callee: Ident, args: Vec<Expr> },
    Method { recv: Box<Expr>, method: String, args: Vec<Expr> },
    Cast { ty: Type, expr: Box<Expr> },
    Paren(Box<Expr>),
}

/// Precedence levels used by the parser and by code that builds expressions.
pub mod prec {
    pub const ASSIGN: u8 = 2;
    pub const TERNARY: u8 = 3;
    pub const UNARY: u8 = 15;
    pub const POSTFIX: u8 = 16;
    pub const PRIMARY: u8 = 17;
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(Ident::new(name))
    }

    pub fn int(v: i64) -> Expr {
        Expr::IntLit(v.to_string())
    }

    pub fn precedence(&self) -> u8 {
        match self {
            Expr::Assign { .. } => prec::ASSIGN,
            Expr::Ternary { .. } => prec::TERNARY,
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Unary { .. } | Expr::Cast { .. } => prec::UNARY,
            Expr::Update { prefix: true, .. } => prec::UNARY,
            Expr::Update { prefix: false, .. } | Expr::Index { .. } | Expr::Call { .. } | Expr::Method { .. } => {
                prec::POSTFIX
            }
            _ => prec::PRIMARY,
        }
    }

    /// Wraps in parentheses when the expression binds looser than `min`.
    pub fn paren_if_below(self, min: u8) -> Expr {
        if self.precedence() < min {
            Expr::Paren(Box::new(self))
        } else {
            self
        }
    }

    pub fn strip_parens(&self) -> &Expr {
        match self {
            Expr::Paren(inner) => inner.strip_parens(),
            e => e,
        }
    }

    /// No calls, assignments, updates or input: evaluating twice is the same as once.
    pub fn is_pure(&self) -> bool {
        match self {
            Expr::IntLit(_)
            | Expr::FloatLit(_)
            | Expr::CharLit(_)
            | Expr::StrLit(_)
            | Expr::BoolLit(_)
            | Expr::Var(_) => true,
            Expr::Unary { op, expr } => *op != UnaryOp::AddrOf && expr.is_pure(),
            Expr::Binary { lhs, rhs, .. } => lhs.is_pure() && rhs.is_pure(),
            Expr::Ternary { cond, then, els } => cond.is_pure() && then.is_pure() && els.is_pure(),
            Expr::Index { base, index } => base.is_pure() && index.is_pure(),
            Expr::Cast { expr, .. } | Expr::Paren(expr) => expr.is_pure(),
            Expr::Method { recv, method, args } => {
                matches!(method.as_str(), "size" | "c_str" | "substr")
                    && recv.is_pure()
                    && args.iter().all(Expr::is_pure)
            }
            Expr::Assign { .. } | Expr::Update { .. } | Expr::Call { .. } => false,
        }
    }

    pub fn is_literal(&self) -> bool {
        match self {
            Expr::IntLit(_) | Expr::FloatLit(_) | Expr::CharLit(_) | Expr::StrLit(_) | Expr::BoolLit(_) => true,
            Expr::Unary { op: UnaryOp::Neg | UnaryOp::Plus, expr } => expr.is_literal(),
            Expr::Paren(inner) => inner.is_literal(),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Init {
    /// `= expr`
    Assign(Expr),
    /// `= {a, b, c}`
    List(Vec<Expr>),
    /// `(a, b)`
    Ctor(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Declarator {
    pub name: Ident,
    pub dims: Vec<Expr>,
    pub init: Option<Init>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decl {
    pub ty: Type,
    pub declarators: Vec<Declarator>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForInit {
    Decl(Decl),
    Expr(Expr),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutItem {
    Expr(Expr),
    Endl,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
    pub trailing_comments: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub comments: Vec<String>,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt { comments: Vec::new(), kind }
    }

    pub fn block(stmts: Vec<Stmt>) -> Stmt {
        Stmt::new(StmtKind::Block(Block { stmts, trailing_comments: Vec::new() }))
    }

    pub fn is_block(&self) -> bool {
        matches!(self.kind, StmtKind::Block(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Decl(Decl),
    Expr(Expr),
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        init: Option<ForInit>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Break,
    Continue,
    Return(Option<Expr>),
    Block(Block),
    Empty,
    /// `cout << a << b;` (the `cout` identifier is implicit)
    Output(Vec<OutItem>),
    /// `cin >> a >> b;`
    Input(Vec<Expr>),
    /// `printf("fmt", args);` with the format kept as its literal lexeme.
    Printf {
        format: String,
        args: Vec<Expr>,
    },
    Scanf {
        format: String,
        args: Vec<Expr>,
    },
}

impl StmtKind {
    pub fn is_io(&self) -> bool {
        matches!(self, StmtKind::Output(_) | StmtKind::Input(_) | StmtKind::Printf { .. } | StmtKind::Scanf { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub ty: Type,
    pub by_ref: bool,
    pub name: Ident,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    pub ret: Type,
    pub name: Ident,
    pub params: Vec<Param>,
    pub body: Block,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ItemKind {
    Using(String),
    Typedef { ty: Type, name: String },
    Global(Decl),
    Function(Function),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Item {
    pub comments: Vec<String>,
    pub kind: ItemKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Indent {
    Spaces(u8),
    Tab,
}

/// Layout choices the printer honours; detected from the source when parsing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    pub indent: Indent,
    pub brace_on_new_line: bool,
}

impl Default for Layout {
    fn default() -> Self {
        Layout { indent: Indent::Spaces(4), brace_on_new_line: false }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub items: Vec<Item>,
    pub trailing_comments: Vec<String>,
    pub layout: Layout,
}

impl Program {
    pub fn functions(&self) -> impl Iterator<Item = &Function> {
        self.items.iter().filter_map(|it| match &it.kind {
            ItemKind::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions().find(|f| f.name.name == name)
    }

    /// Assigns fresh, dense identifier ids in traversal order.
    pub fn renumber(&mut self) {
        let mut next = 0u32;
        crate::frontend::visit::for_each_ident_mut(self, &mut |ident| {
            ident.id = next;
            next += 1;
        });
    }

    pub fn ident_count(&self) -> usize {
        let mut n = 0;
        crate::frontend::visit::for_each_ident(self, &mut |_| n += 1);
        n
    }
}
