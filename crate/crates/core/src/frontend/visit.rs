//! Identifier and expression traversal in source order.
//!
//! The shared and mutable walkers are generated from one definition so they
//! visit identifiers in the same order.

use super::ast::*;

macro_rules! ident_walkers {
    ($program:ident, $block:ident, $stmt:ident, $decl:ident, $expr:ident; $($m:ident)?) => {
        pub fn $program(p: & $($m)? Program, f: &mut dyn FnMut(& $($m)? Ident)) {
            for item in & $($m)? p.items {
                match & $($m)? item.kind {
                    ItemKind::Using(_) | ItemKind::Typedef { .. } => {}
                    ItemKind::Global(d) => $decl(d, f),
                    ItemKind::Function(func) => {
                        f(& $($m)? func.name);
                        for param in & $($m)? func.params {
                            f(& $($m)? param.name);
                        }
                        $block(& $($m)? func.body, f);
                    }
                }
            }
        }

        pub fn $block(b: & $($m)? Block, f: &mut dyn FnMut(& $($m)? Ident)) {
            for s in & $($m)? b.stmts {
                $stmt(s, f);
            }
        }

        pub fn $stmt(s: & $($m)? Stmt, f: &mut dyn FnMut(& $($m)? Ident)) {
            match & $($m)? s.kind {
                StmtKind::Decl(d) => $decl(d, f),
                StmtKind::Expr(e) => $expr(e, f),
                StmtKind::If { cond, then, els } => {
                    $expr(cond, f);
                    $stmt(then, f);
                    if let Some(e) = els {
                        $stmt(e, f);
                    }
                }
                StmtKind::While { cond, body } => {
                    $expr(cond, f);
                    $stmt(body, f);
                }
                StmtKind::DoWhile { body, cond } => {
                    $stmt(body, f);
                    $expr(cond, f);
                }
                StmtKind::For { init, cond, step, body } => {
                    match init {
                        Some(ForInit::Decl(d)) => $decl(d, f),
                        Some(ForInit::Expr(e)) => $expr(e, f),
                        None => {}
                    }
                    if let Some(c) = cond {
                        $expr(c, f);
                    }
                    if let Some(st) = step {
                        $expr(st, f);
                    }
                    $stmt(body, f);
                }
                StmtKind::Return(Some(e)) => $expr(e, f),
                StmtKind::Block(b) => $block(b, f),
                StmtKind::Output(items) => {
                    for it in items {
                        if let OutItem::Expr(e) = it {
                            $expr(e, f);
                        }
                    }
                }
                StmtKind::Input(args) | StmtKind::Printf { args, .. } | StmtKind::Scanf { args, .. } => {
                    for a in args {
                        $expr(a, f);
                    }
                }
                StmtKind::Return(None) | StmtKind::Break | StmtKind::Continue | StmtKind::Empty => {}
            }
        }

        pub fn $decl(d: & $($m)? Decl, f: &mut dyn FnMut(& $($m)? Ident)) {
            for dc in & $($m)? d.declarators {
                for dim in & $($m)? dc.dims {
                    $expr(dim, f);
                }
                f(& $($m)? dc.name);
                match & $($m)? dc.init {
                    Some(Init::Assign(e)) => $expr(e, f),
                    Some(Init::List(es)) | Some(Init::Ctor(es)) => {
                        for e in es {
                            $expr(e, f);
                        }
                    }
                    None => {}
                }
            }
        }

        pub fn $expr(e: & $($m)? Expr, f: &mut dyn FnMut(& $($m)? Ident)) {
            match e {
                Expr::IntLit(_) | Expr::FloatLit(_) | Expr::CharLit(_) | Expr::StrLit(_) | Expr::BoolLit(_) => {}
                Expr::Var(id) => f(id),
                Expr::Unary { expr, .. } | Expr::Cast { expr, .. } | Expr::Paren(expr) => $expr(expr, f),
                Expr::Update { target, .. } => $expr(target, f),
                Expr::Binary { lhs, rhs, .. } => {
                    $expr(lhs, f);
                    $expr(rhs, f);
                }
                Expr::Assign { target, value, .. } => {
                    $expr(target, f);
                    $expr(value, f);
                }
                Expr::Ternary { cond, then, els } => {
                    $expr(cond, f);
                    $expr(then, f);
                    $expr(els, f);
                }
                Expr::Index { base, index } => {
                    $expr(base, f);
                    $expr(index, f);
                }
                Expr::Call { callee, args } => {
                    f(callee);
                    for a in args {
                        $expr(a, f);
                    }
                }
                Expr::Method { recv, args, .. } => {
                    $expr(recv, f);
                    for a in args {
                        $expr(a, f);
                    }
                }
            }
        }
    };
}

ident_walkers!(for_each_ident, block_idents, stmt_idents, decl_idents, expr_idents;);
ident_walkers!(for_each_ident_mut, block_idents_mut, stmt_idents_mut, decl_idents_mut, expr_idents_mut; mut);

/// Pre-order walk over every statement of the program, including nested ones.
pub fn for_each_stmt<'a>(p: &'a Program, f: &mut dyn FnMut(&'a Stmt)) {
    for item in &p.items {
        if let ItemKind::Function(func) = &item.kind {
            for s in &func.body.stmts {
                walk_stmt(s, f);
            }
        }
    }
}

pub fn walk_stmt<'a>(s: &'a Stmt, f: &mut dyn FnMut(&'a Stmt)) {
    f(s);
    match &s.kind {
        StmtKind::If { then, els, .. } => {
            walk_stmt(then, f);
            if let Some(e) = els {
                walk_stmt(e, f);
            }
        }
        StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } | StmtKind::For { body, .. } => {
            walk_stmt(body, f)
        }
        StmtKind::Block(b) => {
            for s in &b.stmts {
                walk_stmt(s, f);
            }
        }
        _ => {}
    }
}

/// Pre-order walk over an expression tree.
pub fn walk_expr<'a>(e: &'a Expr, f: &mut dyn FnMut(&'a Expr)) {
    f(e);
    match e {
        Expr::Unary { expr, .. } | Expr::Cast { expr, .. } | Expr::Paren(expr) => walk_expr(expr, f),
        Expr::Update { target, .. } => walk_expr(target, f),
        Expr::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        Expr::Assign { target, value, .. } => {
            walk_expr(target, f);
            walk_expr(value, f);
        }
        Expr::Ternary { cond, then, els } => {
            walk_expr(cond, f);
            walk_expr(then, f);
            walk_expr(els, f);
        }
        Expr::Index { base, index } => {
            walk_expr(base, f);
            walk_expr(index, f);
        }
        Expr::Call { args, .. } => args.iter().for_each(|a| walk_expr(a, f)),
        Expr::Method { recv, args, .. } => {
            walk_expr(recv, f);
            args.iter().for_each(|a| walk_expr(a, f));
        }
        _ => {}
    }
}

/// Every type annotation in the program, mutably (used by typedef rewriting).
pub fn for_each_type_mut(p: &mut Program, f: &mut dyn FnMut(&mut Type)) {
    fn decl(d: &mut Decl, f: &mut dyn FnMut(&mut Type)) {
        f(&mut d.ty);
    }
    fn expr(e: &mut Expr, f: &mut dyn FnMut(&mut Type)) {
        match e {
            Expr::Cast { ty, expr: inner } => {
                f(ty);
                expr(inner, f);
            }
            Expr::Unary { expr: inner, .. } | Expr::Paren(inner) => expr(inner, f),
            Expr::Update { target, .. } => expr(target, f),
            Expr::Binary { lhs, rhs, .. } => {
                expr(lhs, f);
                expr(rhs, f);
            }
            Expr::Assign { target, value, .. } => {
                expr(target, f);
                expr(value, f);
            }
            Expr::Ternary { cond, then, els } => {
                expr(cond, f);
                expr(then, f);
                expr(els, f);
            }
            Expr::Index { base, index } => {
                expr(base, f);
                expr(index, f);
            }
            Expr::Call { args, .. } => args.iter_mut().for_each(|a| expr(a, f)),
            Expr::Method { recv, args, .. } => {
                expr(recv, f);
                args.iter_mut().for_each(|a| expr(a, f));
            }
            _ => {}
        }
    }
    fn declarators(d: &mut Decl, f: &mut dyn FnMut(&mut Type)) {
        for dc in &mut d.declarators {
            dc.dims.iter_mut().for_each(|e| expr(e, f));
            match &mut dc.init {
                Some(Init::Assign(e)) => expr(e, f),
                Some(Init::List(es)) | Some(Init::Ctor(es)) => es.iter_mut().for_each(|e| expr(e, f)),
                None => {}
            }
        }
    }
    fn stmt(s: &mut Stmt, f: &mut dyn FnMut(&mut Type)) {
        match &mut s.kind {
            StmtKind::Decl(d) => {
                decl(d, f);
                declarators(d, f);
            }
            StmtKind::Expr(e) | StmtKind::Return(Some(e)) => expr(e, f),
            StmtKind::If { cond, then, els } => {
                expr(cond, f);
                stmt(then, f);
                if let Some(e) = els {
                    stmt(e, f);
                }
            }
            StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
                expr(cond, f);
                stmt(body, f);
            }
            StmtKind::For { init, cond, step, body } => {
                match init {
                    Some(ForInit::Decl(d)) => {
                        decl(d, f);
                        declarators(d, f);
                    }
                    Some(ForInit::Expr(e)) => expr(e, f),
                    None => {}
                }
                cond.iter_mut().for_each(|e| expr(e, f));
                step.iter_mut().for_each(|e| expr(e, f));
                stmt(body, f);
            }
            StmtKind::Block(b) => b.stmts.iter_mut().for_each(|s| stmt(s, f)),
            StmtKind::Output(items) => items.iter_mut().for_each(|it| {
                if let OutItem::Expr(e) = it {
                    expr(e, f)
                }
            }),
            StmtKind::Input(args) | StmtKind::Printf { args, .. } | StmtKind::Scanf { args, .. } => {
                args.iter_mut().for_each(|e| expr(e, f))
            }
            _ => {}
        }
    }
    for item in &mut p.items {
        match &mut item.kind {
            ItemKind::Typedef { ty, .. } => f(ty),
            ItemKind::Global(d) => {
                decl(d, f);
                declarators(d, f);
            }
            ItemKind::Function(func) => {
                f(&mut func.ret);
                for param in &mut func.params {
                    f(&mut param.ty);
                }
                func.body.stmts.iter_mut().for_each(|s| stmt(s, f));
            }
            ItemKind::Using(_) => {}
        }
    }
}
