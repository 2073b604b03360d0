use crate::frontend::ast::*;

/// Position of a statement inside its parent.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Element of a function body or block.
    List,
    Then {
        has_else: bool,
    },
    Else,
    LoopBody,
}

fn child(s: &Stmt, i: usize) -> Option<&Stmt> {
    match (&s.kind, i) {
        (StmtKind::Block(b), i) => b.stmts.get(i),
        (StmtKind::If { then, .. }, 0) => Some(then),
        (StmtKind::If { els: Some(e), .. }, 1) => Some(e),
        (StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } | StmtKind::For { body, .. }, 0) => Some(body),
        _ => None,
    }
}

fn child_mut(s: &mut Stmt, i: usize) -> Option<&mut Stmt> {
    match (&mut s.kind, i) {
        (StmtKind::Block(b), i) => b.stmts.get_mut(i),
        (StmtKind::If { then, .. }, 0) => Some(then),
        (StmtKind::If { els: Some(e), .. }, 1) => Some(e),
        (StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } | StmtKind::For { body, .. }, 0) => Some(body),
        _ => None,
    }
}

pub fn stmt_at<'a>(p: &'a Program, path: &[usize]) -> Option<&'a Stmt> {
    let (&item, rest) = path.split_first()?;
    let ItemKind::Function(f) = &p.items.get(item)?.kind else { return None };
    let (&first, rest) = rest.split_first()?;
    let mut s = f.body.stmts.get(first)?;
    for &i in rest {
        s = child(s, i)?;
    }
    Some(s)
}

pub(crate) fn stmt_at_mut<'a>(p: &'a mut Program, path: &[usize]) -> Option<&'a mut Stmt> {
    let (&item, rest) = path.split_first()?;
    let ItemKind::Function(f) = &mut p.items.get_mut(item)?.kind else { return None };
    let (&first, rest) = rest.split_first()?;
    let mut s = f.body.stmts.get_mut(first)?;
    for &i in rest {
        s = child_mut(s, i)?;
    }
    Some(s)
}

/// The statement list that contains the statement at `path`.
pub(crate) fn parent_list_mut<'a>(p: &'a mut Program, path: &[usize]) -> Option<&'a mut Vec<Stmt>> {
    let parent = &path[..path.len().checked_sub(1)?];
    if parent.len() == 1 {
        let ItemKind::Function(f) = &mut p.items.get_mut(parent[0])?.kind else { return None };
        return Some(&mut f.body.stmts);
    }
    match &mut stmt_at_mut(p, parent)?.kind {
        StmtKind::Block(b) => Some(&mut b.stmts),
        _ => None,
    }
}

pub(crate) fn parent_list<'a>(p: &'a Program, path: &[usize]) -> Option<&'a [Stmt]> {
    let parent = &path[..path.len().checked_sub(1)?];
    if parent.len() == 1 {
        let ItemKind::Function(f) = &p.items.get(parent[0])?.kind else { return None };
        return Some(&f.body.stmts);
    }
    match &stmt_at(p, parent)?.kind {
        StmtKind::Block(b) => Some(&b.stmts),
        _ => None,
    }
}

/// Pre-order visit of every statement in every function with its path and slot.
pub fn visit_stmts<'a>(p: &'a Program, f: &mut dyn FnMut(&[usize], &'a Stmt, Slot)) {
    fn go<'a>(s: &'a Stmt, path: &mut Vec<usize>, slot: Slot, f: &mut dyn FnMut(&[usize], &'a Stmt, Slot)) {
        f(path, s, slot);
        match &s.kind {
            StmtKind::Block(b) => {
                for (i, c) in b.stmts.iter().enumerate() {
                    path.push(i);
                    go(c, path, Slot::List, f);
                    path.pop();
                }
            }
            StmtKind::If { then, els, .. } => {
                path.push(0);
                go(then, path, Slot::Then { has_else: els.is_some() }, f);
                path.pop();
                if let Some(e) = els {
                    path.push(1);
                    go(e, path, Slot::Else, f);
                    path.pop();
                }
            }
            StmtKind::While { body, .. } | StmtKind::DoWhile { body, .. } | StmtKind::For { body, .. } => {
                path.push(0);
                go(body, path, Slot::LoopBody, f);
                path.pop();
            }
            _ => {}
        }
    }
    for (i, item) in p.items.iter().enumerate() {
        if let ItemKind::Function(func) = &item.kind {
            let mut path = vec![i, 0];
            for (j, s) in func.body.stmts.iter().enumerate() {
                path[1] = j;
                go(s, &mut path, Slot::List, f);
            }
        }
    }
}
