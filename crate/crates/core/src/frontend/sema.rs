//! Name binding and light type checking.
//!
//! Produces the identifier-to-binding resolution consumed by the interpreter,
//! the data-flow builder and the transforms. Failures are reported with the
//! same taxonomy as parse failures.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::parser::{SyntaxCategory, SyntaxFailure};

pub const BUILTINS: [&str; 5] = ["min", "max", "abs", "swap", "sqrt"];

/// Resolved static type. `Array` covers fixed-size C arrays of any extent.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SType {
    Int,
    LongLong,
    Double,
    Bool,
    Char,
    Str,
    Void,
    Vector(Box<SType>),
    Array(Box<SType>),
}

impl SType {
    pub fn is_numeric(&self) -> bool {
        matches!(self, SType::Int | SType::LongLong | SType::Double | SType::Bool | SType::Char)
    }

    pub fn is_integral(&self) -> bool {
        matches!(self, SType::Int | SType::LongLong | SType::Bool | SType::Char)
    }

    /// Integer promotion for arithmetic operands.
    fn promoted(&self) -> SType {
        match self {
            SType::Bool | SType::Char => SType::Int,
            t => t.clone(),
        }
    }

    fn element(&self) -> Option<SType> {
        match self {
            SType::Vector(t) | SType::Array(t) => Some((**t).clone()),
            SType::Str => Some(SType::Char),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BindingKind {
    Global,
    Local,
    Param,
    Function,
    Builtin,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub name: String,
    pub kind: BindingKind,
    pub ty: SType,
    /// Identifier id of the declaring occurrence; `None` for builtins.
    pub decl: Option<u32>,
    /// Frame slot for locals and params, global slot for globals, function index for functions.
    pub slot: usize,
    pub by_ref: bool,
}

impl Binding {
    pub fn is_variable(&self) -> bool {
        matches!(self.kind, BindingKind::Global | BindingKind::Local | BindingKind::Param)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionInfo {
    pub name: String,
    pub item: usize,
    pub ret: SType,
    pub params: Vec<usize>,
    pub n_slots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sema {
    pub bindings: Vec<Binding>,
    /// Binding index per identifier id.
    pub resolution: Vec<usize>,
    pub functions: Vec<FunctionInfo>,
    pub n_globals: usize,
    pub typedefs: HashMap<String, SType>,
}

impl Sema {
    pub fn binding_of(&self, ident: &Ident) -> &Binding {
        &self.bindings[self.resolution[ident.id as usize]]
    }

    pub fn binding_index(&self, ident: &Ident) -> usize {
        self.resolution[ident.id as usize]
    }

    pub fn function(&self, name: &str) -> Option<&FunctionInfo> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn resolve_type(&self, t: &Type) -> SType {
        resolve_type(&self.typedefs, t)
    }

    /// Static type of an expression, `None` when it is ill-typed.
    pub fn type_of(&self, e: &Expr) -> Option<SType> {
        self.infer(e).ok()
    }

    fn infer(&self, e: &Expr) -> Result<SType, String> {
        Ok(match e {
            Expr::IntLit(s) => {
                let lower = s.to_ascii_lowercase();
                if lower.contains("ll") || parse_int_literal(s).is_some_and(|v| v > i32::MAX as i64) {
                    SType::LongLong
                } else {
                    SType::Int
                }
            }
            Expr::FloatLit(_) => SType::Double,
            Expr::CharLit(_) => SType::Char,
            Expr::StrLit(_) => SType::Str,
            Expr::BoolLit(_) => SType::Bool,
            Expr::Var(id) => {
                let b = self.binding_of(id);
                if !b.is_variable() {
                    return Err(format!("'{}' is not a variable", id.name));
                }
                b.ty.clone()
            }
            Expr::Paren(inner) => self.infer(inner)?,
            Expr::Unary { op, expr } => {
                let t = self.infer(expr)?;
                match op {
                    UnaryOp::Not if t.is_numeric() => SType::Bool,
                    UnaryOp::Neg | UnaryOp::Plus if t.is_numeric() => t.promoted(),
                    UnaryOp::BitNot if t.is_integral() => t.promoted(),
                    UnaryOp::AddrOf => return Err("address-of outside scanf".into()),
                    _ => return Err(format!("invalid operand of unary '{}'", op.as_str())),
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let (l, r) = (self.infer(lhs)?, self.infer(rhs)?);
                binary_type(*op, &l, &r).ok_or_else(|| format!("invalid operands to binary '{}'", op.as_str()))?
            }
            Expr::Assign { op, target, value } => {
                let (t, v) = (self.infer(target)?, self.infer(value)?);
                if let Some(bop) = op.0 {
                    binary_type(bop, &t, &v).ok_or_else(|| format!("invalid operands to '{}'", op.as_str()))?;
                }
                if !assignable(&t, &v) {
                    return Err(format!("cannot assign value to target of incompatible type ({t:?} <- {v:?})"));
                }
                t
            }
            Expr::Update { target, .. } => {
                let t = self.infer(target)?;
                if !t.is_numeric() || t == SType::Bool {
                    return Err("invalid operand of increment/decrement".into());
                }
                t
            }
            Expr::Ternary { cond, then, els } => {
                let c = self.infer(cond)?;
                if !c.is_numeric() {
                    return Err("condition is not a scalar".into());
                }
                let (a, b) = (self.infer(then)?, self.infer(els)?);
                if a.is_numeric() && b.is_numeric() {
                    arith(&a, &b)
                } else if a == b {
                    a
                } else {
                    return Err("ternary branches have incompatible types".into());
                }
            }
            Expr::Index { base, index } => {
                let b = self.infer(base)?;
                if !self.infer(index)?.is_integral() {
                    return Err("array subscript is not an integer".into());
                }
                b.element().ok_or("subscripted value is not an array, vector or string")?
            }
            Expr::Call { callee, args } => {
                let arg_types = args.iter().map(|a| self.infer(a)).collect::<Result<Vec<_>, _>>()?;
                let b = self.binding_of(callee);
                match b.kind {
                    BindingKind::Builtin => match callee.name.as_str() {
                        "min" | "max" => {
                            if arg_types[0] != arg_types[1] || !arg_types[0].is_numeric() && arg_types[0] != SType::Str
                            {
                                return Err(format!("no matching function for call to '{}'", callee.name));
                            }
                            arg_types[0].clone()
                        }
                        "abs" if arg_types[0].is_numeric() => arg_types[0].promoted(),
                        "sqrt" if arg_types[0].is_numeric() => SType::Double,
                        "swap" if arg_types[0] == arg_types[1] => SType::Void,
                        _ => return Err(format!("no matching function for call to '{}'", callee.name)),
                    },
                    BindingKind::Function => {
                        let f = &self.functions[b.slot];
                        for (p, a) in f.params.iter().zip(&arg_types) {
                            let pt = &self.bindings[*p].ty;
                            let ok = if self.bindings[*p].by_ref { pt == a } else { assignable(pt, a) };
                            if !ok {
                                return Err(format!("argument type mismatch in call to '{}'", callee.name));
                            }
                        }
                        f.ret.clone()
                    }
                    _ => return Err(format!("'{}' cannot be used as a function", callee.name)),
                }
            }
            Expr::Method { recv, method, args } => {
                let r = self.infer(recv)?;
                let a = args.iter().map(|a| self.infer(a)).collect::<Result<Vec<_>, _>>()?;
                match (&r, method.as_str(), a.len()) {
                    (SType::Vector(_) | SType::Str, "size", 0) => SType::Int,
                    (SType::Vector(inner), "push_back", 1) if assignable(inner, &a[0]) => SType::Void,
                    (SType::Str, "substr", 1 | 2) if a.iter().all(SType::is_integral) => SType::Str,
                    (SType::Str, "c_str", 0) => SType::Str,
                    _ => return Err(format!("no member '{method}' applicable here")),
                }
            }
            Expr::Cast { ty, expr } => {
                let t = self.infer(expr)?;
                let target = self.resolve_type(ty);
                if !(t.is_numeric() && target.is_numeric()) {
                    return Err("invalid cast".into());
                }
                target
            }
        })
    }
}

pub fn parse_int_literal(s: &str) -> Option<i64> {
    let t = s.trim_end_matches(['l', 'L', 'u', 'U']);
    if let Some(hex) = t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        u64::from_str_radix(hex, 16).ok().map(|v| v as i64)
    } else if t.len() > 1 && t.starts_with('0') {
        u64::from_str_radix(&t[1..], 8).ok().map(|v| v as i64)
    } else {
        t.parse::<u64>().ok().map(|v| v as i64)
    }
}

fn arith(a: &SType, b: &SType) -> SType {
    if *a == SType::Double || *b == SType::Double {
        SType::Double
    } else if *a == SType::LongLong || *b == SType::LongLong {
        SType::LongLong
    } else {
        SType::Int
    }
}

fn binary_type(op: BinOp, l: &SType, r: &SType) -> Option<SType> {
    use BinOp::*;
    if l.is_numeric() && r.is_numeric() {
        return match op {
            And | Or => Some(SType::Bool),
            _ if op.is_comparison() => Some(SType::Bool),
            Rem | Shl | Shr | BitAnd | BitOr | BitXor => (l.is_integral() && r.is_integral()).then(|| arith(l, r)),
            _ => Some(arith(l, r)),
        };
    }
    let stringish = |t: &SType| matches!(t, SType::Str | SType::Char);
    match op {
        Add if (*l == SType::Str && stringish(r)) || (stringish(l) && *r == SType::Str) => Some(SType::Str),
        _ if op.is_comparison() && *l == SType::Str && *r == SType::Str => Some(SType::Bool),
        _ => None,
    }
}

/// Whether a value of type `v` may be stored into a location of type `t`.
pub fn assignable(t: &SType, v: &SType) -> bool {
    match t {
        _ if t.is_numeric() => v.is_numeric(),
        SType::Str => matches!(v, SType::Str | SType::Char),
        SType::Vector(_) => t == v,
        _ => false,
    }
}

pub fn resolve_type(typedefs: &HashMap<String, SType>, t: &Type) -> SType {
    match t {
        Type::Int => SType::Int,
        Type::LongLong => SType::LongLong,
        Type::Double => SType::Double,
        Type::Bool => SType::Bool,
        Type::Char => SType::Char,
        Type::Str => SType::Str,
        Type::Void => SType::Void,
        Type::Vector(inner) => SType::Vector(Box::new(resolve_type(typedefs, inner))),
        Type::Alias(name) => typedefs.get(name).cloned().unwrap_or(SType::Int),
    }
}

pub fn analyze(p: &Program) -> Result<Sema, SyntaxFailure> {
    let mut b = Binder {
        sema: Sema {
            bindings: Vec::new(),
            resolution: vec![usize::MAX; p.ident_count()],
            functions: Vec::new(),
            n_globals: 0,
            typedefs: HashMap::new(),
        },
        scopes: vec![HashMap::new(), HashMap::new()],
        slots: 0,
        loop_depth: 0,
        ret: SType::Void,
    };
    for name in BUILTINS {
        b.sema.bindings.push(Binding {
            name: name.to_string(),
            kind: BindingKind::Builtin,
            ty: SType::Void,
            decl: None,
            slot: 0,
            by_ref: false,
        });
        b.scopes[0].insert(name.to_string(), b.sema.bindings.len() - 1);
    }
    // Functions are visible program-wide so mutual recursion needs no prototypes.
    for (item_idx, item) in p.items.iter().enumerate() {
        if let ItemKind::Typedef { ty, name } = &item.kind {
            let resolved = resolve_type(&b.sema.typedefs, ty);
            b.sema.typedefs.insert(name.clone(), resolved);
        }
        if let ItemKind::Function(f) = &item.kind {
            let ret = b.sema.resolve_type(&f.ret);
            let index = b.sema.functions.len();
            b.declare(&f.name, BindingKind::Function, ret.clone(), index, false)?;
            b.sema.functions.push(FunctionInfo {
                name: f.name.name.clone(),
                item: item_idx,
                ret,
                params: Vec::new(),
                n_slots: 0,
            });
        }
    }
    let mut fn_index = 0;
    for item in &p.items {
        match &item.kind {
            ItemKind::Global(d) => b.decl(d, BindingKind::Global)?,
            ItemKind::Function(f) => {
                b.function(f, fn_index)?;
                fn_index += 1;
            }
            ItemKind::Using(_) | ItemKind::Typedef { .. } => {}
        }
    }
    let sema = b.sema;
    for item in &p.items {
        match &item.kind {
            ItemKind::Global(d) => check_decl_types(&sema, d)?,
            ItemKind::Function(f) => {
                let ret = sema.resolve_type(&f.ret);
                for s in &f.body.stmts {
                    check_stmt_types(&sema, s, &ret)?;
                }
            }
            _ => {}
        }
    }
    Ok(sema)
}

struct Binder {
    sema: Sema,
    scopes: Vec<HashMap<String, usize>>,
    slots: usize,
    loop_depth: usize,
    ret: SType,
}

fn fail(category: SyntaxCategory, at: &Ident, message: impl Into<String>) -> SyntaxFailure {
    SyntaxFailure { category, message: message.into(), line: at.span.line, column: at.span.column }
}

/// Position of the first identifier in `e`, if any.
fn expr_pos(e: &Expr) -> (u32, u32) {
    let mut pos = None;
    super::visit::expr_idents(e, &mut |id| {
        pos.get_or_insert((id.span.line, id.span.column));
    });
    pos.unwrap_or((0, 0))
}

fn fail_expr(e: &Expr, message: impl Into<String>) -> SyntaxFailure {
    let (line, column) = expr_pos(e);
    SyntaxFailure { category: SyntaxCategory::Other, message: message.into(), line, column }
}

impl Binder {
    fn declare(
        &mut self,
        name: &Ident,
        kind: BindingKind,
        ty: SType,
        slot: usize,
        by_ref: bool,
    ) -> Result<(), SyntaxFailure> {
        let scope = self.scopes.last_mut().expect("scope stack is never empty");
        if scope.contains_key(&name.name) {
            return Err(fail(SyntaxCategory::RedeclaredVariable, name, format!("redeclaration of '{}'", name.name)));
        }
        if ty == SType::Void && kind != BindingKind::Function {
            return Err(fail(SyntaxCategory::Other, name, format!("variable '{}' declared void", name.name)));
        }
        let index = self.sema.bindings.len();
        self.sema.bindings.push(Binding { name: name.name.clone(), kind, ty, decl: Some(name.id), slot, by_ref });
        scope.insert(name.name.clone(), index);
        self.sema.resolution[name.id as usize] = index;
        Ok(())
    }

    fn lookup(&mut self, name: &Ident) -> Result<usize, SyntaxFailure> {
        for scope in self.scopes.iter().rev() {
            if let Some(&i) = scope.get(&name.name) {
                self.sema.resolution[name.id as usize] = i;
                return Ok(i);
            }
        }
        Err(fail(SyntaxCategory::UndeclaredVariable, name, format!("'{}' was not declared in this scope", name.name)))
    }

    fn function(&mut self, f: &Function, index: usize) -> Result<(), SyntaxFailure> {
        self.slots = 0;
        self.ret = self.sema.functions[index].ret.clone();
        self.scopes.push(HashMap::new());
        let mut params = Vec::new();
        for p in &f.params {
            let ty = self.sema.resolve_type(&p.ty);
            let slot = self.next_slot();
            self.declare(&p.name, BindingKind::Param, ty, slot, p.by_ref)?;
            params.push(self.sema.bindings.len() - 1);
        }
        for s in &f.body.stmts {
            self.stmt(s)?;
        }
        self.scopes.pop();
        let info = &mut self.sema.functions[index];
        info.params = params;
        info.n_slots = self.slots;
        Ok(())
    }

    fn next_slot(&mut self) -> usize {
        self.slots += 1;
        self.slots - 1
    }

    fn decl(&mut self, d: &Decl, kind: BindingKind) -> Result<(), SyntaxFailure> {
        let base = self.sema.resolve_type(&d.ty);
        for dc in &d.declarators {
            for dim in &dc.dims {
                self.expr(dim)?;
            }
            let ty = dc.dims.iter().fold(base.clone(), |t, _| SType::Array(Box::new(t)));
            let slot = if kind == BindingKind::Global {
                self.sema.n_globals += 1;
                self.sema.n_globals - 1
            } else {
                self.next_slot()
            };
            self.declare(&dc.name, kind, ty, slot, false)?;
            match &dc.init {
                Some(Init::Assign(e)) => self.expr(e)?,
                Some(Init::List(es)) | Some(Init::Ctor(es)) => {
                    for e in es {
                        self.expr(e)?;
                    }
                }
                None => {}
            }
        }
        Ok(())
    }

    fn scoped(&mut self, s: &Stmt) -> Result<(), SyntaxFailure> {
        self.scopes.push(HashMap::new());
        let r = self.stmt(s);
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), SyntaxFailure> {
        match &s.kind {
            StmtKind::Decl(d) => self.decl(d, BindingKind::Local)?,
            StmtKind::Expr(e) => self.expr(e)?,
            StmtKind::If { cond, then, els } => {
                self.expr(cond)?;
                self.scoped(then)?;
                if let Some(e) = els {
                    self.scoped(e)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond)?;
                self.loop_body(body, false)?;
            }
            StmtKind::DoWhile { body, cond } => {
                self.loop_body(body, false)?;
                self.expr(cond)?;
            }
            StmtKind::For { init, cond, step, body } => {
                self.scopes.push(HashMap::new());
                match init {
                    Some(ForInit::Decl(d)) => self.decl(d, BindingKind::Local)?,
                    Some(ForInit::Expr(e)) => self.expr(e)?,
                    None => {}
                }
                if let Some(c) = cond {
                    self.expr(c)?;
                }
                if let Some(st) = step {
                    self.expr(st)?;
                }
                self.loop_body(body, true)?;
                self.scopes.pop();
            }
            StmtKind::Break | StmtKind::Continue => {
                if self.loop_depth == 0 {
                    let word = if matches!(s.kind, StmtKind::Break) { "break" } else { "continue" };
                    return Err(SyntaxFailure {
                        category: SyntaxCategory::Other,
                        message: format!("{word} statement not within a loop"),
                        line: 0,
                        column: 0,
                    });
                }
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e)?;
                }
                let arity_ok = e.is_some() != (self.ret == SType::Void);
                if !arity_ok {
                    let message = if e.is_some() {
                        "return with a value in a void function"
                    } else {
                        "return without a value in a non-void function"
                    };
                    return Err(SyntaxFailure {
                        category: SyntaxCategory::ReturnStatement,
                        message: message.into(),
                        line: 0,
                        column: 0,
                    });
                }
            }
            StmtKind::Block(b) => {
                self.scopes.push(HashMap::new());
                for s in &b.stmts {
                    self.stmt(s)?;
                }
                self.scopes.pop();
            }
            StmtKind::Empty => {}
            StmtKind::Output(items) => {
                for it in items {
                    if let OutItem::Expr(e) = it {
                        self.expr(e)?;
                    }
                }
            }
            StmtKind::Input(args) => {
                for a in args {
                    self.expr(a)?;
                    self.require_lvalue(a)?;
                }
            }
            StmtKind::Printf { args, .. } => {
                for a in args {
                    self.expr(a)?;
                }
            }
            StmtKind::Scanf { args, .. } => {
                for a in args {
                    // scanf takes `&x` for scalars; the operand itself must be an lvalue.
                    let inner = match a {
                        Expr::Unary { op: UnaryOp::AddrOf, expr } => expr,
                        other => other,
                    };
                    self.expr(inner)?;
                    self.require_lvalue(inner)?;
                }
            }
        }
        Ok(())
    }

    fn loop_body(&mut self, body: &Stmt, shares_scope: bool) -> Result<(), SyntaxFailure> {
        self.loop_depth += 1;
        let r = match &body.kind {
            StmtKind::Block(b) if shares_scope => b.stmts.iter().try_for_each(|s| self.stmt(s)),
            _ => self.scoped(body),
        };
        self.loop_depth -= 1;
        r
    }

    fn is_lvalue(&self, e: &Expr) -> bool {
        match e {
            Expr::Var(id) => self.sema.bindings[self.sema.resolution[id.id as usize]].is_variable(),
            Expr::Index { base, .. } => self.is_lvalue(base),
            Expr::Paren(inner) => self.is_lvalue(inner),
            _ => false,
        }
    }

    fn require_lvalue(&self, e: &Expr) -> Result<(), SyntaxFailure> {
        if self.is_lvalue(e) {
            Ok(())
        } else {
            Err(fail_expr(e, "lvalue required"))
        }
    }

    fn expr(&mut self, e: &Expr) -> Result<(), SyntaxFailure> {
        match e {
            Expr::IntLit(_) | Expr::FloatLit(_) | Expr::CharLit(_) | Expr::StrLit(_) | Expr::BoolLit(_) => {}
            Expr::Var(id) => {
                let b = self.lookup(id)?;
                if !self.sema.bindings[b].is_variable() {
                    return Err(fail(SyntaxCategory::Other, id, format!("'{}' used as a variable", id.name)));
                }
            }
            Expr::Unary { op, expr } => {
                if *op == UnaryOp::AddrOf {
                    return Err(fail_expr(expr, "address-of is only supported as a scanf argument"));
                }
                self.expr(expr)?;
            }
            Expr::Cast { expr, .. } | Expr::Paren(expr) => self.expr(expr)?,
            Expr::Binary { lhs, rhs, .. } => {
                self.expr(lhs)?;
                self.expr(rhs)?;
            }
            Expr::Assign { target, value, .. } => {
                self.expr(target)?;
                self.expr(value)?;
                self.require_lvalue(target)?;
            }
            Expr::Update { target, .. } => {
                self.expr(target)?;
                self.require_lvalue(target)?;
            }
            Expr::Ternary { cond, then, els } => {
                self.expr(cond)?;
                self.expr(then)?;
                self.expr(els)?;
            }
            Expr::Index { base, index } => {
                self.expr(base)?;
                self.expr(index)?;
            }
            Expr::Call { callee, args } => {
                let b = self.lookup(callee)?;
                for a in args {
                    self.expr(a)?;
                }
                let binding = &self.sema.bindings[b];
                match binding.kind {
                    BindingKind::Builtin => {
                        let (arity, by_ref) = match callee.name.as_str() {
                            "min" | "max" => (2, false),
                            "swap" => (2, true),
                            _ => (1, false),
                        };
                        if args.len() != arity {
                            return Err(fail(
                                SyntaxCategory::Other,
                                callee,
                                format!("wrong number of arguments to '{}'", callee.name),
                            ));
                        }
                        if by_ref {
                            args.iter().try_for_each(|a| self.require_lvalue(a))?;
                        }
                    }
                    // User functions are checked once every parameter list is bound.
                    BindingKind::Function => {}
                    _ => {
                        return Err(fail(
                            SyntaxCategory::Other,
                            callee,
                            format!("'{}' cannot be used as a function", callee.name),
                        ))
                    }
                }
            }
            Expr::Method { recv, args, .. } => {
                self.expr(recv)?;
                for a in args {
                    self.expr(a)?;
                }
            }
        }
        Ok(())
    }
}

/// Arity, reference-argument and type checks that need every function bound first.
fn check_call_shapes(sema: &Sema, e: &Expr) -> Result<(), SyntaxFailure> {
    let mut err = None;
    super::visit::walk_expr(e, &mut |sub| {
        if err.is_some() {
            return;
        }
        if let Expr::Call { callee, args } = sub {
            let b = sema.binding_of(callee);
            if b.kind == BindingKind::Function {
                let f = &sema.functions[b.slot];
                if f.params.len() != args.len() {
                    err = Some(fail(
                        SyntaxCategory::Other,
                        callee,
                        format!("wrong number of arguments to '{}'", callee.name),
                    ));
                    return;
                }
                for (p, a) in f.params.iter().zip(args) {
                    if sema.bindings[*p].by_ref && !is_lvalue(sema, a) {
                        err = Some(fail_expr(a, "reference argument must be an lvalue"));
                        return;
                    }
                }
            }
        }
    });
    err.map_or(Ok(()), Err)
}

fn is_lvalue(sema: &Sema, e: &Expr) -> bool {
    match e {
        Expr::Var(id) => sema.binding_of(id).is_variable(),
        Expr::Index { base, .. } => is_lvalue(sema, base),
        Expr::Paren(inner) => is_lvalue(sema, inner),
        _ => false,
    }
}

fn check_expr(sema: &Sema, e: &Expr) -> Result<SType, SyntaxFailure> {
    check_call_shapes(sema, e)?;
    sema.infer(e).map_err(|m| fail_expr(e, m))
}

fn check_decl_types(sema: &Sema, d: &Decl) -> Result<(), SyntaxFailure> {
    let base = sema.resolve_type(&d.ty);
    for dc in &d.declarators {
        for dim in &dc.dims {
            if !check_expr(sema, dim)?.is_integral() {
                return Err(fail_expr(dim, "array size is not an integer"));
            }
        }
        match &dc.init {
            Some(Init::Assign(e)) => {
                let v = check_expr(sema, e)?;
                if !dc.dims.is_empty() || !assignable(&base, &v) || (base == SType::Str && v == SType::Char) {
                    return Err(fail(
                        SyntaxCategory::Other,
                        &dc.name,
                        format!("invalid initializer for '{}'", dc.name.name),
                    ));
                }
            }
            Some(Init::List(es)) => {
                let elem = match (&base, dc.dims.len()) {
                    (_, 1) => base.clone(),
                    (SType::Vector(inner), 0) => (**inner).clone(),
                    _ => return Err(fail(SyntaxCategory::Other, &dc.name, "unsupported initializer list")),
                };
                for e in es {
                    if !assignable(&elem, &check_expr(sema, e)?) {
                        return Err(fail(SyntaxCategory::Other, &dc.name, "initializer element type mismatch"));
                    }
                }
            }
            Some(Init::Ctor(es)) => {
                let types = es.iter().map(|e| check_expr(sema, e)).collect::<Result<Vec<_>, _>>()?;
                let ok = match (&base, types.as_slice()) {
                    _ if !dc.dims.is_empty() => false,
                    (SType::Vector(_), [n]) => n.is_integral(),
                    (SType::Vector(inner), [n, v]) => n.is_integral() && assignable(inner, v),
                    (SType::Str, [n, c]) => n.is_integral() && *c == SType::Char,
                    (t, [v]) => t.is_numeric() && v.is_numeric() || *t == SType::Str && *v == SType::Str,
                    _ => false,
                };
                if !ok {
                    return Err(fail(SyntaxCategory::Other, &dc.name, "no matching constructor"));
                }
            }
            None => {}
        }
    }
    Ok(())
}

fn check_cond(sema: &Sema, e: &Expr) -> Result<(), SyntaxFailure> {
    if check_expr(sema, e)?.is_numeric() {
        Ok(())
    } else {
        Err(fail_expr(e, "condition is not a scalar"))
    }
}

fn check_stmt_types(sema: &Sema, s: &Stmt, ret: &SType) -> Result<(), SyntaxFailure> {
    match &s.kind {
        StmtKind::Decl(d) => check_decl_types(sema, d)?,
        StmtKind::Expr(e) => {
            check_expr(sema, e)?;
        }
        StmtKind::If { cond, then, els } => {
            check_cond(sema, cond)?;
            check_stmt_types(sema, then, ret)?;
            if let Some(e) = els {
                check_stmt_types(sema, e, ret)?;
            }
        }
        StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
            check_cond(sema, cond)?;
            check_stmt_types(sema, body, ret)?;
        }
        StmtKind::For { init, cond, step, body } => {
            match init {
                Some(ForInit::Decl(d)) => check_decl_types(sema, d)?,
                Some(ForInit::Expr(e)) => {
                    check_expr(sema, e)?;
                }
                None => {}
            }
            if let Some(c) = cond {
                check_cond(sema, c)?;
            }
            if let Some(st) = step {
                check_expr(sema, st)?;
            }
            check_stmt_types(sema, body, ret)?;
        }
        StmtKind::Return(Some(e)) => {
            let t = check_expr(sema, e)?;
            if !assignable(ret, &t) {
                return Err(SyntaxFailure {
                    category: SyntaxCategory::ReturnStatement,
                    message: "returned value does not match the function's return type".into(),
                    line: 0,
                    column: 0,
                });
            }
        }
        StmtKind::Block(b) => {
            for s in &b.stmts {
                check_stmt_types(sema, s, ret)?;
            }
        }
        StmtKind::Output(items) => {
            for it in items {
                if let OutItem::Expr(e) = it {
                    let t = check_expr(sema, e)?;
                    if !(t.is_numeric() || t == SType::Str) {
                        return Err(fail_expr(e, "no operator<< for this operand"));
                    }
                }
            }
        }
        StmtKind::Input(args) => {
            for a in args {
                let t = check_expr(sema, a)?;
                if !(t.is_numeric() && t != SType::Bool || t == SType::Str) {
                    return Err(fail_expr(a, "no operator>> for this operand"));
                }
            }
        }
        StmtKind::Printf { format, args } => check_format(sema, format, args, false)?,
        StmtKind::Scanf { format, args } => check_format(sema, format, args, true)?,
        StmtKind::Return(None) | StmtKind::Break | StmtKind::Continue | StmtKind::Empty => {}
    }
    Ok(())
}

/// Conversion specifiers of a printf/scanf format, or an error for unsupported ones.
pub fn format_specs(format_lexeme: &str) -> Result<Vec<String>, String> {
    let body = super::lexer::unescape(format_lexeme);
    let mut specs = Vec::new();
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c != '%' {
            continue;
        }
        let mut spec = String::new();
        while let Some(&n) = chars.peek() {
            spec.push(n);
            chars.next();
            if n.is_ascii_alphabetic() && n != 'l' || n == '%' {
                break;
            }
        }
        match spec.as_str() {
            "%" => {}
            "d" | "lld" | "f" | "lf" | "s" | "c" => specs.push(spec),
            _ => return Err(format!("unsupported conversion '%{spec}'")),
        }
    }
    Ok(specs)
}

fn check_format(sema: &Sema, format: &str, args: &[Expr], scan: bool) -> Result<(), SyntaxFailure> {
    let bad = |message: String| {
        let (line, column) = args.first().map(expr_pos).unwrap_or((0, 0));
        SyntaxFailure { category: SyntaxCategory::Other, message, line, column }
    };
    let specs = format_specs(format).map_err(bad)?;
    if specs.len() != args.len() {
        return Err(bad("format string does not match the argument count".into()));
    }
    for (spec, a) in specs.iter().zip(args) {
        let (target, addr) = match a {
            Expr::Unary { op: UnaryOp::AddrOf, expr } => (expr.as_ref(), true),
            other => (other, false),
        };
        let t = check_expr(sema, target)?;
        let ok = match spec.as_str() {
            "d" => t == SType::Int || !scan && matches!(t, SType::Char | SType::Bool),
            "lld" => t == SType::LongLong,
            "f" => t == SType::Double && !scan,
            "lf" => t == SType::Double && scan,
            "s" => t == SType::Str && !scan,
            "c" => t == SType::Char || !scan && t.is_integral(),
            _ => false,
        };
        let addr_ok = if scan { addr } else { !addr };
        if !ok || !addr_ok {
            return Err(fail_expr(target, format!("argument does not match '%{spec}'")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::tokenize;
    use crate::frontend::parser::parse;

    fn run(src: &str) -> Result<(Program, Sema), SyntaxFailure> {
        let p = parse(&tokenize(src).unwrap()).unwrap();
        analyze(&p).map(|s| (p, s))
    }

    fn category(src: &str) -> SyntaxCategory {
        run(src).unwrap_err().category
    }

    #[test]
    fn resolves_shadowing_and_slots() {
        let (p, s) = run("int g; int main(){int x=1; {int x=2; x++;} x+=g; return x;}").unwrap();
        let mut uses = Vec::new();
        crate::frontend::visit::for_each_ident(&p, &mut |id| uses.push((id.name.clone(), s.binding_index(id))));
        let xs: Vec<usize> = uses.iter().filter(|(n, _)| n == "x").map(|(_, b)| *b).collect();
        assert_eq!(xs.len(), 5);
        assert_eq!(xs[0], xs[3]);
        assert_eq!(xs[1], xs[2]);
        assert_ne!(xs[0], xs[1]);
        assert_eq!(s.function("main").unwrap().n_slots, 2);
        assert_eq!(s.n_globals, 1);
    }

    #[test]
    fn undeclared_and_redeclared() {
        assert_eq!(category("int main(){x=1;}"), SyntaxCategory::UndeclaredVariable);
        assert_eq!(category("int main(){int a; int a; return 0;}"), SyntaxCategory::RedeclaredVariable);
        assert_eq!(
            category("int f(int a){int a; return a;} int main(){return 0;}"),
            SyntaxCategory::RedeclaredVariable
        );
        assert_eq!(category("int main(){for(int i=0;i<3;i++){int i;} return 0;}"), SyntaxCategory::RedeclaredVariable);
        assert!(run("int main(){int a; {int a;} for(int i=0;i<2;i++){} for(int i=0;i<2;i++){} return 0;}").is_ok());
    }

    #[test]
    fn return_arity() {
        assert_eq!(category("void f(){return 1;} int main(){return 0;}"), SyntaxCategory::ReturnStatement);
        assert_eq!(category("int main(){return;}"), SyntaxCategory::ReturnStatement);
        assert_eq!(category("int main(){string s; return s;}"), SyntaxCategory::ReturnStatement);
    }

    #[test]
    fn other_errors() {
        for src in [
            "int main(){1=2; return 0;}",
            "int main(){break; return 0;}",
            "int f(int a){return a;} int main(){return f(1,2);}",
            "void f(int &a){} int main(){f(3); return 0;}",
            "int main(){int x; x.push_back(1); return 0;}",
            "int main(){int x = \"a\"; return 0;}",
            "int main(){int x; printf(\"%x\", x); return 0;}",
            "int main(){int x; scanf(\"%d\", x); return 0;}",
            "int main(){int x; int y = &x; return 0;}",
            "int main(){main = 1; return 0;}",
        ] {
            assert_eq!(category(src), SyntaxCategory::Other, "{src}");
        }
    }

    #[test]
    fn recursion_and_forward_calls() {
        assert!(run("int main(){return f(3);} int f(int n){if(n<=0) return 0; return n+f(n-1);}").is_ok());
    }

    #[test]
    fn expression_types() {
        let (p, s) = run("typedef long long ll; int main(){ll a=1; double d=2; string t=\"x\"; vector<int> v; int k = v.size(); cout<<a+1<<d*2<<t+'c'<<v[0]<<t[0]<<endl; return k;}").unwrap();
        let f = p.function("main").unwrap();
        let StmtKind::Output(items) = &f.body.stmts[5].kind else { panic!() };
        let types: Vec<SType> = items
            .iter()
            .filter_map(|it| match it {
                OutItem::Expr(e) => s.type_of(e),
                OutItem::Endl => None,
            })
            .collect();
        assert_eq!(types, vec![SType::LongLong, SType::Double, SType::Str, SType::Int, SType::Char]);
    }

    #[test]
    fn format_spec_parsing() {
        assert_eq!(format_specs("\"%d %lld%%\\n%s%c%f\"").unwrap(), vec!["d", "lld", "s", "c", "f"]);
        assert!(format_specs("\"%5d\"").is_err());
    }
}
