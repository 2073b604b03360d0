//! Def-use graph over variable occurrences.
//!
//! Reaching definitions are propagated over the structured statements. Loops
//! take a single merge pass: the body is analysed with the entry state, its
//! exit state is joined with the entry, and the body is analysed once more.
//! `break`, `continue` and `return` do not kill definitions, so the graph may
//! over-approximate but never misses an edge the interpreter could realise.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::*;
use super::parser::{SyntaxCategory, SyntaxFailure};
use super::sema::{analyze, BindingKind, Sema};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Def,
    Use,
    /// Read and written by the same occurrence (`x += 1`, `x++`, reference arguments).
    UseDef,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DfgNode {
    pub name: String,
    /// Index of the variable's binding; equal names in different scopes differ here.
    pub var: usize,
    pub line: u32,
    pub column: u32,
    /// Index of the occurrence in the token stream the program was parsed from.
    pub token: u32,
    pub role: Role,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfg {
    pub nodes: Vec<DfgNode>,
    /// `(def, use)` node index pairs, sorted.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DfgError {
    #[error("unresolved identifier '{name}' at {line}:{column}")]
    UnresolvedIdentifier { name: String, line: u32, column: u32 },
    #[error(transparent)]
    Invalid(SyntaxFailure),
}

pub fn build_dfg(p: &Program, max_nodes: usize) -> Result<Dfg, DfgError> {
    let sema = analyze(p).map_err(|f| {
        if f.category == SyntaxCategory::UndeclaredVariable {
            let name = f.message.split('\'').nth(1).unwrap_or_default().to_string();
            DfgError::UnresolvedIdentifier { name, line: f.line, column: f.column }
        } else {
            DfgError::Invalid(f)
        }
    })?;
    Ok(build_dfg_resolved(p, &sema, max_nodes))
}

pub fn build_dfg_resolved(p: &Program, sema: &Sema, max_nodes: usize) -> Dfg {
    let mut b = Builder { sema, nodes: Vec::new(), by_ident: HashMap::new(), edges: BTreeSet::new() };
    let mut globals = State::new();
    for item in &p.items {
        match &item.kind {
            ItemKind::Global(d) => b.decl(d, &mut globals),
            ItemKind::Function(f) => {
                let mut st = globals.clone();
                for param in &f.params {
                    b.def(&param.name, Role::Def, &mut st, true);
                }
                b.stmts(&f.body.stmts, &mut st);
            }
            _ => {}
        }
    }
    // Source order, then truncation.
    let mut order: Vec<usize> = (0..b.nodes.len()).collect();
    order.sort_by_key(|&i| (b.nodes[i].token, i));
    let mut remap = vec![usize::MAX; b.nodes.len()];
    for (new, &old) in order.iter().enumerate().take(max_nodes) {
        remap[old] = new;
    }
    let nodes = order.iter().take(max_nodes).map(|&i| b.nodes[i].clone()).collect();
    let mut edges: Vec<(usize, usize)> = b
        .edges
        .iter()
        .filter_map(|&(d, u)| (remap[d] != usize::MAX && remap[u] != usize::MAX).then_some((remap[d], remap[u])))
        .collect();
    edges.sort_unstable();
    Dfg { nodes, edges }
}

/// Reaching definitions: variable binding → def node indices.
type State = BTreeMap<usize, BTreeSet<usize>>;

fn join(a: &mut State, b: &State) {
    for (var, defs) in b {
        a.entry(*var).or_default().extend(defs.iter().copied());
    }
}

struct Builder<'s> {
    sema: &'s Sema,
    nodes: Vec<DfgNode>,
    by_ident: HashMap<u32, usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl Builder<'_> {
    fn variable(&self, id: &Ident) -> Option<usize> {
        let b = self.sema.binding_index(id);
        self.sema.bindings[b].is_variable().then_some(b)
    }

    /// Node for an occurrence, reused when the second loop pass revisits it.
    fn node(&mut self, id: &Ident, var: usize, role: Role) -> usize {
        if let Some(&i) = self.by_ident.get(&id.id) {
            return i;
        }
        self.by_ident.insert(id.id, self.nodes.len());
        self.nodes.push(DfgNode {
            name: id.name.clone(),
            var,
            line: id.span.line,
            column: id.span.column,
            token: id.span.token,
            role,
        });
        self.nodes.len() - 1
    }

    fn use_(&mut self, id: &Ident, st: &State) {
        if let Some(var) = self.variable(id) {
            let n = self.node(id, var, Role::Use);
            for &d in st.get(&var).into_iter().flatten() {
                self.edges.insert((d, n));
            }
        }
    }

    /// Records a definition. A strong definition replaces the reaching set.
    fn def(&mut self, id: &Ident, role: Role, st: &mut State, strong: bool) {
        let Some(var) = self.variable(id) else { return };
        let n = self.node(id, var, role);
        if role == Role::UseDef {
            for &d in st.get(&var).into_iter().flatten() {
                if d != n {
                    self.edges.insert((d, n));
                }
            }
        }
        let set = st.entry(var).or_default();
        if strong {
            set.clear();
        }
        set.insert(n);
    }

    fn decl(&mut self, d: &Decl, st: &mut State) {
        for dc in &d.declarators {
            for dim in &dc.dims {
                self.expr(dim, st);
            }
            match &dc.init {
                Some(Init::Assign(e)) => self.expr(e, st),
                Some(Init::List(es)) | Some(Init::Ctor(es)) => es.iter().for_each(|e| self.expr(e, st)),
                None => {}
            }
            self.def(&dc.name, Role::Def, st, true);
        }
    }

    fn stmts(&mut self, stmts: &[Stmt], st: &mut State) {
        for s in stmts {
            self.stmt(s, st);
        }
    }

    fn stmt(&mut self, s: &Stmt, st: &mut State) {
        match &s.kind {
            StmtKind::Decl(d) => self.decl(d, st),
            StmtKind::Expr(e) => self.expr(e, st),
            StmtKind::If { cond, then, els } => {
                self.expr(cond, st);
                let mut other = st.clone();
                self.stmt(then, st);
                if let Some(e) = els {
                    self.stmt(e, &mut other);
                }
                join(st, &other);
            }
            StmtKind::While { cond, body } => {
                self.loop_(st, &mut |b, st| {
                    b.expr(cond, st);
                    b.stmt(body, st);
                });
                self.expr(cond, st);
            }
            StmtKind::DoWhile { body, cond } => self.loop_(st, &mut |b, st| {
                b.stmt(body, st);
                b.expr(cond, st);
            }),
            StmtKind::For { init, cond, step, body } => {
                match init {
                    Some(ForInit::Decl(d)) => self.decl(d, st),
                    Some(ForInit::Expr(e)) => self.expr(e, st),
                    None => {}
                }
                self.loop_(st, &mut |b, st| {
                    if let Some(c) = cond {
                        b.expr(c, st);
                    }
                    b.stmt(body, st);
                    if let Some(sp) = step {
                        b.expr(sp, st);
                    }
                });
                if let Some(c) = cond {
                    self.expr(c, st);
                }
            }
            StmtKind::Return(Some(e)) => self.expr(e, st),
            StmtKind::Block(b) => self.stmts(&b.stmts, st),
            StmtKind::Output(items) => {
                for it in items {
                    if let OutItem::Expr(e) = it {
                        self.expr(e, st);
                    }
                }
            }
            StmtKind::Printf { args, .. } => args.iter().for_each(|a| self.expr(a, st)),
            StmtKind::Input(args) | StmtKind::Scanf { args, .. } => {
                for a in args {
                    let target = match a {
                        Expr::Unary { op: UnaryOp::AddrOf, expr } => expr,
                        other => other,
                    };
                    self.store(target, Role::Def, st);
                }
            }
            StmtKind::Return(None) | StmtKind::Break | StmtKind::Continue | StmtKind::Empty => {}
        }
    }

    /// Single merge pass: analyse with the entry state, join the exit state
    /// back into the header, analyse again.
    fn loop_(&mut self, st: &mut State, body: &mut dyn FnMut(&mut Self, &mut State)) {
        let entry = st.clone();
        let mut first = entry.clone();
        body(self, &mut first);
        let mut header = entry;
        join(&mut header, &first);
        let mut second = header.clone();
        body(self, &mut second);
        join(&mut header, &second);
        *st = header;
    }

    /// Write through an lvalue. Whole-variable writes are strong; element writes are weak.
    fn store(&mut self, target: &Expr, role: Role, st: &mut State) {
        match target {
            Expr::Var(id) => self.def(id, role, st, role == Role::Def),
            Expr::Paren(inner) => self.store(inner, role, st),
            Expr::Index { base, index } => {
                self.expr(index, st);
                self.store_weak(base, st);
            }
            other => self.expr(other, st),
        }
    }

    fn store_weak(&mut self, base: &Expr, st: &mut State) {
        match base {
            Expr::Var(id) => self.def(id, Role::UseDef, st, false),
            Expr::Paren(inner) => self.store_weak(inner, st),
            Expr::Index { base, index } => {
                self.expr(index, st);
                self.store_weak(base, st);
            }
            other => self.expr(other, st),
        }
    }

    fn expr(&mut self, e: &Expr, st: &mut State) {
        match e {
            Expr::IntLit(_) | Expr::FloatLit(_) | Expr::CharLit(_) | Expr::StrLit(_) | Expr::BoolLit(_) => {}
            Expr::Var(id) => self.use_(id, st),
            Expr::Unary { expr, .. } | Expr::Cast { expr, .. } | Expr::Paren(expr) => self.expr(expr, st),
            Expr::Binary { op, lhs, rhs } => {
                self.expr(lhs, st);
                if matches!(op, BinOp::And | BinOp::Or) {
                    // Short circuit: defs in the right operand may or may not happen.
                    let mut skipped = st.clone();
                    self.expr(rhs, &mut skipped);
                    join(st, &skipped);
                } else {
                    self.expr(rhs, st);
                }
            }
            Expr::Assign { op, target, value } => {
                self.expr(value, st);
                let role = if op.0.is_some() { Role::UseDef } else { Role::Def };
                self.store(target, role, st);
            }
            Expr::Update { target, .. } => self.store(target, Role::UseDef, st),
            Expr::Ternary { cond, then, els } => {
                self.expr(cond, st);
                let mut other = st.clone();
                self.expr(then, st);
                self.expr(els, &mut other);
                join(st, &other);
            }
            Expr::Index { base, index } => {
                self.expr(base, st);
                self.expr(index, st);
            }
            Expr::Call { callee, args } => {
                let b = self.sema.binding_of(callee);
                let refs: Vec<bool> = match b.kind {
                    BindingKind::Function => {
                        self.sema.functions[b.slot].params.iter().map(|p| self.sema.bindings[*p].by_ref).collect()
                    }
                    BindingKind::Builtin if callee.name == "swap" => vec![true, true],
                    _ => Vec::new(),
                };
                for (i, a) in args.iter().enumerate() {
                    if refs.get(i).copied().unwrap_or(false) {
                        self.store(a, Role::UseDef, st);
                    } else {
                        self.expr(a, st);
                    }
                }
            }
            Expr::Method { recv, method, args } => {
                args.iter().for_each(|a| self.expr(a, st));
                if method == "push_back" {
                    self.store_weak(recv, st);
                } else {
                    self.expr(recv, st);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::tokenize;
    use crate::frontend::parser::parse;

    fn dfg(src: &str) -> Result<Dfg, DfgError> {
        build_dfg(&parse(&tokenize(src).unwrap()).unwrap(), usize::MAX)
    }

    fn edge_names(g: &Dfg) -> Vec<(String, u32, String, u32)> {
        g.edges
            .iter()
            .map(|&(d, u)| (g.nodes[d].name.clone(), g.nodes[d].column, g.nodes[u].name.clone(), g.nodes[u].column))
            .collect()
    }

    #[test]
    fn straight_line_def_use() {
        // Hand analysis: a defined at column 5, used in b's initializer at column 16.
        let g = dfg("int a=1; int b=a; int main(){return 0;}").unwrap();
        assert_eq!(g.nodes.len(), 3);
        assert_eq!(edge_names(&g), vec![("a".to_string(), 5, "a".to_string(), 16)]);
        assert_eq!(g.nodes[0].role, Role::Def);
        assert_eq!(g.nodes[2].role, Role::Use);
    }

    #[test]
    fn no_variables_empty_graph() {
        let g = dfg("int main(){return 0;}").unwrap();
        assert!(g.nodes.is_empty() && g.edges.is_empty());
    }

    #[test]
    fn unresolved_identifier() {
        match dfg("int main(){x=1;}") {
            Err(DfgError::UnresolvedIdentifier { name, .. }) => assert_eq!(name, "x"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn strong_update_kills_and_branches_join() {
        let g = dfg("int main(){int x=1; x=2; int y=x; if(y){x=3;}else{x=4;} return x;}").unwrap();
        let into_y: Vec<_> = edge_names(&g).into_iter().filter(|e| e.2 == "x" && e.3 == 32).collect();
        assert_eq!(into_y, vec![("x".to_string(), 21, "x".to_string(), 32)]);
        let ret = g.nodes.iter().rposition(|n| n.name == "x").unwrap();
        let defs: Vec<u32> = g.edges.iter().filter(|e| e.1 == ret).map(|e| g.nodes[e.0].column).collect();
        assert_eq!(defs.len(), 2);
    }

    #[test]
    fn loop_back_edge_single_merge() {
        let g = dfg("int main(){int s=0; for(int i=0;i<3;i++){s=s+i;} return s;}").unwrap();
        let names = edge_names(&g);
        // s=s+i reads both the entry def and its own previous iteration.
        let s_use = names.iter().filter(|e| e.2 == "s" && e.0 == "s").count();
        assert!(s_use >= 3, "{names:?}");
        // i++ feeds the condition on the back edge.
        assert!(g.edges.iter().any(|&(d, u)| g.nodes[d].role == Role::UseDef
            && g.nodes[u].name == "i"
            && g.nodes[u].role == Role::Use
            && g.nodes[u].column < g.nodes[d].column));
    }

    #[test]
    fn truncation_keeps_prefix() {
        let g = dfg("int main(){int a=1; int b=a; int c=b; return c;}").unwrap();
        let t = build_dfg(&parse(&tokenize("int main(){int a=1; int b=a; int c=b; return c;}").unwrap()).unwrap(), 3)
            .unwrap();
        assert_eq!(t.nodes, g.nodes[..3].to_vec());
        assert!(t.edges.iter().all(|&(d, u)| d < 3 && u < 3));
    }

    #[test]
    fn every_use_has_a_def() {
        let g = dfg("int main(){int n; cin>>n; vector<int> v; for(int i=0;i<n;i++){int x; cin>>x; v.push_back(x);} int t=0; while(n>0){n--; t+=v[n];} cout<<t<<endl; return 0;}").unwrap();
        for (i, n) in g.nodes.iter().enumerate() {
            if n.role != Role::Def {
                assert!(g.edges.iter().any(|e| e.1 == i), "use without def: {n:?}");
            }
        }
    }
}
