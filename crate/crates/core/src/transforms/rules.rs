use std::collections::{BTreeMap, HashSet};

use super::paths::{parent_list, parent_list_mut, stmt_at, stmt_at_mut, visit_stmts, Slot};
use super::{Ctx, Payload, Site, TransformAction, TransformId, UpdateForm};
use crate::frontend::ast::*;
use crate::frontend::lexer::{escape_str, unescape};
use crate::frontend::sema::{BindingKind, SType, BUILTINS};
use crate::frontend::visit::{
    for_each_ident, for_each_ident_mut, for_each_type_mut, stmt_idents, walk_expr, walk_stmt,
};

pub(super) fn sites(ctx: &Ctx, t: TransformId) -> Vec<Site> {
    use TransformId::*;
    match t {
        T1 => t1_sites(ctx),
        T2 => stmt_sites(ctx, |_, s, _| matches!(s.kind, StmtKind::While { .. })),
        T3 => stmt_sites(ctx, |ctx, s, _| printf_to_cout(ctx, s).is_some()),
        T4 => stmt_sites(ctx, |ctx, s, _| cout_to_printf(ctx, s).is_some()),
        T5 => t5_sites(ctx),
        T6 => stmt_sites(ctx, |_, s, slot| {
            slot == Slot::List && matches!(&s.kind, StmtKind::Decl(d) if d.declarators.len() > 1)
        }),
        T7 => t7_sites(ctx),
        T8 => t8_sites(ctx),
        T9 => stmt_sites(ctx, |_, s, _| matches!(s.kind, StmtKind::If { els: Some(_), .. })),
        T10 => stmt_sites(ctx, |_, s, slot| brace_toggle_ok(s, slot)),
        T11 => t11_sites(ctx),
        T12 => t12_sites(ctx),
    }
}

pub(super) fn rewrite(ctx: &Ctx, a: &TransformAction) -> Program {
    use TransformId::*;
    let path = &a.site.path;
    let mut out = ctx.prog.clone();
    match a.transform {
        T1 => rewrite_t1(ctx, &mut out, path),
        T2 => replace_stmt(&mut out, path, |s| {
            let StmtKind::While { cond, body } = s.kind else { unreachable!() };
            vec![Stmt { comments: s.comments, kind: StmtKind::For { init: None, cond: Some(cond), step: None, body } }]
        }),
        T3 => {
            let items = printf_to_cout(ctx, stmt_at(ctx.prog, path).expect("site")).expect("site");
            stmt_at_mut(&mut out, path).expect("site").kind = StmtKind::Output(items);
        }
        T4 => {
            let (format, args) = cout_to_printf(ctx, stmt_at(ctx.prog, path).expect("site")).expect("site");
            stmt_at_mut(&mut out, path).expect("site").kind = StmtKind::Printf { format, args };
        }
        T5 => {
            let Payload::Name(name) = &a.site.payload else { unreachable!() };
            let target = ctx.sema.bindings.iter().position(|b| b.decl == Some(path[0] as u32)).expect("site");
            let resolution = &ctx.sema.resolution;
            for_each_ident_mut(&mut out, &mut |id| {
                if resolution[id.id as usize] == target {
                    id.name = name.clone();
                }
            });
        }
        T6 => replace_stmt(&mut out, path, |s| {
            let StmtKind::Decl(d) = s.kind else { unreachable!() };
            let mut comments = Some(s.comments);
            d.declarators
                .into_iter()
                .map(|dc| Stmt {
                    comments: comments.take().unwrap_or_default(),
                    kind: StmtKind::Decl(Decl { ty: d.ty.clone(), declarators: vec![dc] }),
                })
                .collect()
        }),
        T7 => {
            let list = parent_list_mut(&mut out, path).expect("site");
            let i = *path.last().expect("site");
            let second = list.remove(i + 1);
            let (StmtKind::Decl(first), StmtKind::Decl(second)) = (&mut list[i].kind, second.kind) else {
                unreachable!()
            };
            first.declarators.extend(second.declarators);
        }
        T8 => {
            let Payload::Form(form) = a.site.payload else { unreachable!() };
            let s = stmt_at_mut(&mut out, path).expect("site");
            let e = match &mut s.kind {
                StmtKind::Expr(e) => e,
                StmtKind::For { step: Some(e), .. } => e,
                _ => unreachable!(),
            };
            let u = classify_update(&ctx.sema, e).expect("site");
            *e = build_update(u, form);
        }
        T9 => {
            let s = stmt_at_mut(&mut out, path).expect("site");
            let StmtKind::If { cond, then, els: Some(els) } = &mut s.kind else { unreachable!() };
            let new_cond = negate(&ctx.sema, cond);
            let old_then = std::mem::replace(then, Box::new(Stmt::new(StmtKind::Empty)));
            let mut new_then = std::mem::replace(els, old_then);
            if ends_with_open_if(&new_then) {
                // Keeps a trailing `else` from binding to the moved `if`.
                new_then = Box::new(Stmt::block(vec![*new_then]));
            }
            *then = new_then;
            *cond = new_cond;
        }
        T10 => {
            let s = stmt_at_mut(&mut out, path).expect("site");
            let old = std::mem::replace(s, Stmt::new(StmtKind::Empty));
            *s = match old.kind {
                StmtKind::Block(mut b) => {
                    let mut inner = b.stmts.pop().expect("single statement");
                    let mut comments = old.comments;
                    comments.append(&mut inner.comments);
                    inner.comments = comments;
                    inner
                }
                _ => Stmt::block(vec![old]),
            };
        }
        T11 => rewrite_t11(&mut out, path),
        T12 => {
            let list = parent_list_mut(&mut out, path).expect("site");
            let i = *path.last().expect("site");
            let j = first_use_after(list, i).expect("site");
            let decl = list.remove(i);
            list.insert(j - 1, decl);
        }
    }
    out
}

fn stmt_site(path: &[usize]) -> Site {
    Site { path: path.to_vec(), payload: Payload::None }
}

fn stmt_sites(ctx: &Ctx, pred: impl Fn(&Ctx, &Stmt, Slot) -> bool) -> Vec<Site> {
    stmt_sites_with_path(ctx, |ctx, _, s, slot| pred(ctx, s, slot))
}

/// Replaces the statement at `path` with `f(stmt)`; several statements are
/// spliced into a list parent or wrapped in a block elsewhere.
fn replace_stmt(p: &mut Program, path: &[usize], f: impl FnOnce(Stmt) -> Vec<Stmt>) {
    let in_list = parent_list(p, path).is_some();
    let slot = stmt_at_mut(p, path).expect("site");
    let old = std::mem::replace(slot, Stmt::new(StmtKind::Empty));
    let mut new = f(old);
    if new.len() == 1 {
        *slot = new.pop().expect("one statement");
    } else if in_list {
        let i = *path.last().expect("non-empty path");
        parent_list_mut(p, path).expect("list parent").splice(i..=i, new);
    } else {
        *slot = Stmt::block(new);
    }
}

fn expr_names(e: &Expr) -> HashSet<String> {
    let mut out = HashSet::new();
    walk_expr(e, &mut |x| match x {
        Expr::Var(id) | Expr::Call { callee: id, .. } => {
            out.insert(id.name.clone());
        }
        _ => {}
    });
    out
}

fn declared_names(s: &Stmt) -> HashSet<String> {
    let mut out = HashSet::new();
    walk_stmt(s, &mut |x| match &x.kind {
        StmtKind::Decl(d) | StmtKind::For { init: Some(ForInit::Decl(d)), .. } => {
            out.extend(d.declarators.iter().map(|dc| dc.name.name.clone()));
        }
        _ => {}
    });
    out
}

// ---- T1 -------------------------------------------------------------------

fn t1_sites(ctx: &Ctx) -> Vec<Site> {
    stmt_sites(ctx, |_, s, _| match &s.kind {
        // The step moves into the body's scope, so no body declaration may shadow it.
        StmtKind::For { step, body, .. } => {
            step.as_ref().is_none_or(|st| expr_names(st).is_disjoint(&declared_names(body)))
        }
        _ => false,
    })
}

/// Inserts `step` before every `continue` that targets this loop.
fn rewrite_continues(stmts: Vec<Stmt>, step: &Stmt) -> Vec<Stmt> {
    let mut out = Vec::with_capacity(stmts.len());
    for s in stmts {
        if matches!(s.kind, StmtKind::Continue) {
            out.push(step.clone());
            out.push(s);
        } else {
            out.push(rewrite_continue_stmt(s, step));
        }
    }
    out
}

fn rewrite_continue_stmt(s: Stmt, step: &Stmt) -> Stmt {
    let Stmt { comments, kind } = s;
    let kind = match kind {
        StmtKind::Continue => {
            return Stmt {
                comments,
                kind: StmtKind::Block(Block {
                    stmts: vec![step.clone(), Stmt::new(StmtKind::Continue)],
                    trailing_comments: Vec::new(),
                }),
            }
        }
        StmtKind::Block(b) => {
            StmtKind::Block(Block { stmts: rewrite_continues(b.stmts, step), trailing_comments: b.trailing_comments })
        }
        StmtKind::If { cond, then, els } => StmtKind::If {
            cond,
            then: Box::new(rewrite_continue_stmt(*then, step)),
            els: els.map(|e| Box::new(rewrite_continue_stmt(*e, step))),
        },
        other => other,
    };
    Stmt { comments, kind }
}

fn hoist_is_safe(ctx: &Ctx, item: usize, d: &Decl) -> bool {
    let ItemKind::Function(f) = &ctx.prog.items[item].kind else { return false };
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for p in &f.params {
        *counts.entry(&p.name.name).or_default() += 1;
    }
    for s in &f.body.stmts {
        walk_stmt(s, &mut |x| match &x.kind {
            StmtKind::Decl(d) | StmtKind::For { init: Some(ForInit::Decl(d)), .. } => {
                for dc in &d.declarators {
                    *counts.entry(&dc.name.name).or_default() += 1;
                }
            }
            _ => {}
        });
    }
    let global = |n: &str| {
        ctx.sema.bindings.iter().any(|b| b.name == n && matches!(b.kind, BindingKind::Global | BindingKind::Function))
    };
    d.declarators.iter().all(|dc| counts.get(dc.name.name.as_str()) == Some(&1) && !global(&dc.name.name))
}

fn rewrite_t1(ctx: &Ctx, out: &mut Program, path: &[usize]) {
    let in_list = parent_list(ctx.prog, path).is_some();
    let hoist = match &stmt_at(ctx.prog, path).expect("site").kind {
        StmtKind::For { init: Some(ForInit::Decl(d)), .. } => in_list && hoist_is_safe(ctx, path[0], d),
        _ => true,
    };
    replace_stmt(out, path, |s| {
        let StmtKind::For { init, cond, step, body } = s.kind else { unreachable!() };
        let (mut stmts, trailing) = match body.kind {
            StmtKind::Block(b) if body.comments.is_empty() => (b.stmts, b.trailing_comments),
            _ => (vec![*body], Vec::new()),
        };
        if let Some(e) = step {
            let step = Stmt::new(StmtKind::Expr(e));
            stmts = rewrite_continues(stmts, &step);
            stmts.push(step);
        }
        let cond = cond.unwrap_or(Expr::BoolLit(true));
        let while_stmt = Stmt::new(StmtKind::While {
            cond,
            body: Box::new(Stmt::new(StmtKind::Block(Block { stmts, trailing_comments: trailing }))),
        });
        let mut result = match init {
            None => vec![while_stmt],
            Some(ForInit::Expr(e)) => vec![Stmt::new(StmtKind::Expr(e)), while_stmt],
            Some(ForInit::Decl(d)) => {
                let pair = vec![Stmt::new(StmtKind::Decl(d)), while_stmt];
                if hoist {
                    pair
                } else {
                    vec![Stmt::block(pair)]
                }
            }
        };
        result[0].comments = s.comments;
        result
    });
}

// ---- T3 / T4 ----------------------------------------------------------------

/// No assignments, updates or user calls: evaluation order cannot matter.
fn io_safe(ctx: &Ctx, e: &Expr) -> bool {
    let mut ok = true;
    walk_expr(e, &mut |x| match x {
        Expr::Assign { .. } | Expr::Update { .. } => ok = false,
        Expr::Call { callee, .. }
            if ctx.sema.binding_of(callee).kind != BindingKind::Builtin || callee.name == "swap" =>
        {
            ok = false
        }
        _ => {}
    });
    ok
}

enum Piece {
    Text(String),
    Spec(String),
}

fn parse_format(lexeme: &str) -> Option<Vec<Piece>> {
    let text = unescape(lexeme);
    let mut pieces = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '%' {
            cur.push(c);
            continue;
        }
        let mut spec = String::new();
        loop {
            let n = chars.next()?;
            spec.push(n);
            if n.is_ascii_alphabetic() && n != 'l' || n == '%' {
                break;
            }
        }
        if spec == "%" {
            cur.push('%');
            continue;
        }
        if !matches!(spec.as_str(), "d" | "lld" | "c" | "s") {
            return None;
        }
        if !cur.is_empty() {
            pieces.push(Piece::Text(std::mem::take(&mut cur)));
        }
        pieces.push(Piece::Spec(spec));
    }
    if !cur.is_empty() {
        pieces.push(Piece::Text(cur));
    }
    Some(pieces)
}

fn str_lit(text: &str) -> Expr {
    Expr::StrLit(format!("\"{}\"", escape_str(text)))
}

fn out_operand(e: Expr) -> Expr {
    e.paren_if_below(BinOp::Add.precedence())
}

fn cast(ty: Type, e: Expr) -> Expr {
    Expr::Cast { ty, expr: Box::new(e.paren_if_below(prec::UNARY)) }
}

fn printf_to_cout(ctx: &Ctx, s: &Stmt) -> Option<Vec<OutItem>> {
    let StmtKind::Printf { format, args } = &s.kind else { return None };
    if !args.iter().all(|a| io_safe(ctx, a)) {
        return None;
    }
    let mut items = Vec::new();
    let mut args = args.iter();
    for piece in parse_format(format)? {
        match piece {
            Piece::Text(t) => {
                for (i, part) in t.split('\n').enumerate() {
                    if i > 0 {
                        items.push(OutItem::Endl);
                    }
                    if !part.is_empty() {
                        items.push(OutItem::Expr(str_lit(part)));
                    }
                }
            }
            Piece::Spec(spec) => {
                let arg = args.next()?.clone();
                let ty = ctx.sema.type_of(&arg)?;
                let e = match (spec.as_str(), &ty) {
                    ("d" | "lld", SType::Char) => cast(Type::Int, arg),
                    ("d" | "lld", _) => arg,
                    ("c", SType::Char) => arg,
                    ("c", _) => cast(Type::Char, arg),
                    ("s", _) => match arg {
                        Expr::Method { recv, method, args } if method == "c_str" && args.is_empty() => *recv,
                        other => other,
                    },
                    _ => return None,
                };
                items.push(OutItem::Expr(out_operand(e)));
            }
        }
    }
    (!items.is_empty()).then_some(items)
}

fn cout_to_printf(ctx: &Ctx, s: &Stmt) -> Option<(String, Vec<Expr>)> {
    let StmtKind::Output(items) = &s.kind else { return None };
    let mut text = String::new();
    let mut args = Vec::new();
    for it in items {
        let e = match it {
            OutItem::Endl => {
                text.push('\n');
                continue;
            }
            OutItem::Expr(e) => e,
        };
        match e.strip_parens() {
            Expr::StrLit(l) | Expr::CharLit(l) => {
                text.push_str(&unescape(l).replace('%', "%%"));
                continue;
            }
            _ => {}
        }
        if !io_safe(ctx, e) {
            return None;
        }
        let arg = e.strip_parens().clone();
        match ctx.sema.type_of(e)? {
            SType::Int | SType::Bool => text.push_str("%d"),
            SType::LongLong => text.push_str("%lld"),
            SType::Char => text.push_str("%c"),
            SType::Str => {
                text.push_str("%s");
                let wrapped = match arg {
                    Expr::Method { ref method, .. } if method == "c_str" => arg,
                    other => Expr::Method {
                        recv: Box::new(other.paren_if_below(prec::POSTFIX)),
                        method: "c_str".into(),
                        args: Vec::new(),
                    },
                };
                args.push(wrapped);
                continue;
            }
            _ => return None,
        }
        args.push(arg);
    }
    Some((format!("\"{}\"", escape_str(&text)), args))
}

// ---- T5 ---------------------------------------------------------------------

const RESERVED: [&str; 8] = ["main", "cin", "cout", "endl", "printf", "scanf", "std", "string"];
const WORDS: [&str; 8] = ["value", "count", "index", "total", "item", "result", "limit", "step"];
const LETTERS: &str = "abcdefghijkmnpqrstuvwxyz";
/// Variables per program that receive rename actions.
pub const RENAME_POOL: usize = 8;

fn taken_names(p: &Program) -> HashSet<String> {
    let mut names: HashSet<String> = RESERVED.iter().chain(BUILTINS.iter()).map(|s| s.to_string()).collect();
    for_each_ident(p, &mut |id| {
        names.insert(id.name.clone());
    });
    for item in &p.items {
        if let ItemKind::Typedef { name, .. } = &item.kind {
            names.insert(name.clone());
        }
    }
    names
}

fn type_word(t: &SType) -> &'static str {
    match t {
        SType::Int => "num",
        SType::LongLong => "big",
        SType::Double => "real",
        SType::Bool => "flag",
        SType::Char => "ch",
        SType::Str => "text",
        SType::Vector(_) => "list",
        SType::Array(_) => "arr",
        SType::Void => "x",
    }
}

fn t5_sites(ctx: &Ctx) -> Vec<Site> {
    let mut vars: Vec<(u32, usize)> = ctx
        .sema
        .bindings
        .iter()
        .enumerate()
        .filter(|(_, b)| b.is_variable())
        .filter_map(|(i, b)| b.decl.map(|d| (d, i)))
        .collect();
    vars.sort();
    let taken = taken_names(ctx.prog);
    let letter = LETTERS.chars().map(String::from).find(|l| !taken.contains(l));
    let mut out = Vec::new();
    for (ordinal, (decl, b)) in vars.into_iter().take(RENAME_POOL).enumerate() {
        let binding = &ctx.sema.bindings[b];
        let (word, tw) = (WORDS[ordinal], type_word(&binding.ty));
        let mut tw_cap = tw.to_string();
        tw_cap[..1].make_ascii_uppercase();
        let candidates = [Some(format!("{word}{tw_cap}")), Some(format!("{word}_{tw}")), letter.clone()];
        for name in candidates.into_iter().flatten() {
            if name != binding.name && !taken.contains(&name) {
                out.push(Site { path: vec![decl as usize], payload: Payload::Name(name) });
            }
        }
    }
    out
}

// ---- T7 ---------------------------------------------------------------------

fn t7_sites(ctx: &Ctx) -> Vec<Site> {
    let mut out = Vec::new();
    visit_stmts(ctx.prog, &mut |path, s, slot| {
        let StmtKind::Decl(a) = &s.kind else { return };
        if slot != Slot::List {
            return;
        }
        let list = parent_list(ctx.prog, path).expect("list slot");
        let i = *path.last().expect("non-empty path");
        if let Some(Stmt { comments, kind: StmtKind::Decl(b) }) = list.get(i + 1) {
            if comments.is_empty() && a.ty == b.ty {
                out.push(stmt_site(path));
            }
        }
    });
    out
}

// ---- T8 ---------------------------------------------------------------------

struct Update {
    target: Expr,
    op: BinOp,
    k: Expr,
    form: UpdateForm,
}

fn one() -> Expr {
    Expr::IntLit("1".into())
}

fn classify_update(sema: &crate::frontend::sema::Sema, e: &Expr) -> Option<Update> {
    let u = match e {
        Expr::Assign { op: AssignOp(None), target, value } => match value.as_ref() {
            Expr::Binary { op, lhs, rhs } if AssignOp::compound_allowed(*op) && lhs == target => {
                Update { target: (**target).clone(), op: *op, k: (**rhs).clone(), form: UpdateForm::Plain }
            }
            _ => return None,
        },
        Expr::Assign { op: AssignOp(Some(op)), target, value } => {
            Update { target: (**target).clone(), op: *op, k: (**value).clone(), form: UpdateForm::Compound }
        }
        Expr::Update { increment, prefix, target } => Update {
            target: (**target).clone(),
            op: if *increment { BinOp::Add } else { BinOp::Sub },
            k: one(),
            form: if *prefix { UpdateForm::Prefix } else { UpdateForm::Postfix },
        },
        _ => return None,
    };
    let ty = sema.type_of(&u.target)?;
    let lvalue = matches!(u.target, Expr::Var(_) | Expr::Index { .. });
    (lvalue && u.target.is_pure() && u.k.is_pure() && ty.is_numeric() && ty != SType::Bool).then_some(u)
}

fn update_forms(u: &Update) -> Vec<UpdateForm> {
    let unit = u.k == one() && matches!(u.op, BinOp::Add | BinOp::Sub);
    [UpdateForm::Plain, UpdateForm::Compound, UpdateForm::Postfix, UpdateForm::Prefix]
        .into_iter()
        .filter(|f| *f != u.form && (unit || matches!(f, UpdateForm::Plain | UpdateForm::Compound)))
        .collect()
}

fn build_update(u: Update, form: UpdateForm) -> Expr {
    let target = Box::new(u.target);
    match form {
        UpdateForm::Plain => Expr::Assign {
            op: AssignOp::PLAIN,
            target: target.clone(),
            value: Box::new(Expr::Binary {
                op: u.op,
                lhs: target,
                rhs: Box::new(u.k.strip_parens().clone().paren_if_below(u.op.precedence() + 1)),
            }),
        },
        UpdateForm::Compound => {
            Expr::Assign { op: AssignOp(Some(u.op)), target, value: Box::new(u.k.strip_parens().clone()) }
        }
        UpdateForm::Postfix | UpdateForm::Prefix => {
            Expr::Update { increment: u.op == BinOp::Add, prefix: form == UpdateForm::Prefix, target }
        }
    }
}

fn t8_sites(ctx: &Ctx) -> Vec<Site> {
    let mut out = Vec::new();
    visit_stmts(ctx.prog, &mut |path, s, _| {
        let e = match &s.kind {
            StmtKind::Expr(e) | StmtKind::For { step: Some(e), .. } => e,
            _ => return,
        };
        if let Some(u) = classify_update(&ctx.sema, e) {
            for f in update_forms(&u) {
                out.push(Site { path: path.to_vec(), payload: Payload::Form(f) });
            }
        }
    });
    out
}

// ---- T9 ---------------------------------------------------------------------

fn negate(sema: &crate::frontend::sema::Sema, cond: &Expr) -> Expr {
    match cond {
        Expr::Paren(inner) => negate(sema, inner),
        Expr::Unary { op: UnaryOp::Not, expr } => expr.strip_parens().clone(),
        Expr::Binary { op, lhs, rhs } if op.is_comparison() => {
            // Flipping is exact for totally ordered operands; doubles may be NaN.
            let exact = |e: &Expr| sema.type_of(e).is_some_and(|t| t.is_integral() || t == SType::Str);
            if exact(lhs) && exact(rhs) {
                let flipped = match op {
                    BinOp::Lt => BinOp::Ge,
                    BinOp::Le => BinOp::Gt,
                    BinOp::Gt => BinOp::Le,
                    BinOp::Ge => BinOp::Lt,
                    BinOp::Eq => BinOp::Ne,
                    _ => BinOp::Eq,
                };
                return Expr::Binary { op: flipped, lhs: lhs.clone(), rhs: rhs.clone() };
            }
            not(cond)
        }
        _ => not(cond),
    }
}

fn not(e: &Expr) -> Expr {
    Expr::Unary { op: UnaryOp::Not, expr: Box::new(e.clone().paren_if_below(prec::UNARY)) }
}

// ---- T10 --------------------------------------------------------------------

/// True when a following `else` would bind inside `s`.
fn ends_with_open_if(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::If { els: None, .. } => true,
        StmtKind::If { els: Some(e), .. } => ends_with_open_if(e),
        StmtKind::While { body, .. } | StmtKind::For { body, .. } => ends_with_open_if(body),
        _ => false,
    }
}

fn brace_toggle_ok(s: &Stmt, slot: Slot) -> bool {
    if slot == Slot::List {
        return false;
    }
    match &s.kind {
        StmtKind::Block(b) => {
            b.stmts.len() == 1
                && b.trailing_comments.is_empty()
                && !matches!(b.stmts[0].kind, StmtKind::Decl(_))
                && !ends_with_open_if(&b.stmts[0])
        }
        StmtKind::Decl(_) => false,
        _ => true,
    }
}

// ---- T11 --------------------------------------------------------------------

const LL: &str = "ll";

fn mentions_long_long(t: &Type) -> bool {
    match t {
        Type::LongLong => true,
        Type::Vector(inner) => mentions_long_long(inner),
        _ => false,
    }
}

fn map_type(t: &mut Type, from: &Type, to: &Type) {
    if t == from {
        *t = to.clone();
    } else if let Type::Vector(inner) = t {
        map_type(inner, from, to);
    }
}

fn t11_sites(ctx: &Ctx) -> Vec<Site> {
    let mut out = Vec::new();
    let mut has_typedef = false;
    for (i, item) in ctx.prog.items.iter().enumerate() {
        if let ItemKind::Typedef { ty: Type::LongLong, .. } = item.kind {
            has_typedef = true;
            out.push(stmt_site(&[i]));
        }
    }
    if !has_typedef && !taken_names(ctx.prog).contains(LL) {
        let mut probe = ctx.prog.clone();
        let mut found = false;
        for_each_type_mut(&mut probe, &mut |t| found |= mentions_long_long(t));
        if found {
            out.insert(0, stmt_site(&[]));
        }
    }
    out
}

fn rewrite_t11(out: &mut Program, path: &[usize]) {
    match path.first() {
        None => {
            let alias = Type::Alias(LL.into());
            for_each_type_mut(out, &mut |t| map_type(t, &Type::LongLong, &alias));
            let pos = out.items.iter().take_while(|it| matches!(it.kind, ItemKind::Using(_))).count();
            let mut item =
                Item { comments: Vec::new(), kind: ItemKind::Typedef { ty: Type::LongLong, name: LL.into() } };
            if pos == 0 {
                if let Some(first) = out.items.first_mut() {
                    item.comments = std::mem::take(&mut first.comments);
                }
            }
            out.items.insert(pos, item);
        }
        Some(&i) => {
            let removed = out.items.remove(i);
            let ItemKind::Typedef { name, .. } = removed.kind else { unreachable!() };
            let mut comments = removed.comments;
            match out.items.get_mut(i) {
                Some(next) => {
                    comments.append(&mut next.comments);
                    next.comments = comments;
                }
                None => {
                    comments.append(&mut out.trailing_comments);
                    out.trailing_comments = comments;
                }
            }
            for_each_type_mut(out, &mut |t| map_type(t, &Type::Alias(name.clone()), &Type::LongLong));
        }
    }
}

// ---- T12 --------------------------------------------------------------------

fn init_is_constant(d: &Declarator) -> bool {
    let init_ok = match &d.init {
        None => true,
        Some(Init::Assign(e)) => e.is_literal(),
        Some(Init::List(es)) | Some(Init::Ctor(es)) => es.iter().all(Expr::is_literal),
    };
    init_ok && d.dims.iter().all(Expr::is_literal)
}

fn mentions(s: &Stmt, name: &str) -> bool {
    let mut hit = false;
    stmt_idents(s, &mut |id| hit |= id.name == name);
    hit
}

/// Index of the first statement after `i` naming the variable declared at `i`.
fn first_use_after(list: &[Stmt], i: usize) -> Option<usize> {
    let StmtKind::Decl(d) = &list[i].kind else { return None };
    let [dc] = d.declarators.as_slice() else { return None };
    if !init_is_constant(dc) {
        return None;
    }
    let j = (i + 1..list.len()).find(|&j| mentions(&list[j], &dc.name.name))?;
    (j > i + 1).then_some(j)
}

fn t12_sites(ctx: &Ctx) -> Vec<Site> {
    stmt_sites_with_path(ctx, |ctx, path, s, slot| {
        slot == Slot::List
            && matches!(s.kind, StmtKind::Decl(_))
            && first_use_after(parent_list(ctx.prog, path).expect("list slot"), *path.last().expect("path")).is_some()
    })
}

fn stmt_sites_with_path(ctx: &Ctx, pred: impl Fn(&Ctx, &[usize], &Stmt, Slot) -> bool) -> Vec<Site> {
    let mut out = Vec::new();
    visit_stmts(ctx.prog, &mut |path, s, slot| {
        if pred(ctx, path, s, slot) {
            out.push(stmt_site(path));
        }
    });
    out
}
