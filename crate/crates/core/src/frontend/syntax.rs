//! Generic syntax tree (kind + children + optional token) derived from the typed
//! tree, and the root-to-leaf paths used as structural features.

use serde::{Deserialize, Serialize};

use super::ast::Program;
use super::emit::{emit_program, NodeKind, Sink};
use super::lexer::TokenKind;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafToken {
    pub kind: TokenKind,
    pub text: String,
    /// Position in the printed token stream.
    pub index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<SyntaxNode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<LeafToken>,
}

impl SyntaxNode {
    pub fn is_leaf(&self) -> bool {
        self.token.is_some()
    }

    pub fn leaf_count(&self) -> usize {
        if self.is_leaf() {
            1
        } else {
            self.children.iter().map(SyntaxNode::leaf_count).sum()
        }
    }

    /// Pre-order visit with the node's depth (root = 1).
    pub fn walk(&self, f: &mut dyn FnMut(&SyntaxNode, usize)) {
        fn go(n: &SyntaxNode, depth: usize, f: &mut dyn FnMut(&SyntaxNode, usize)) {
            f(n, depth);
            for c in &n.children {
                go(c, depth + 1, f);
            }
        }
        go(self, 1, f);
    }
}

pub fn syntax_tree(p: &Program) -> SyntaxNode {
    let mut sink = TreeSink { stack: Vec::new(), done: None, next_index: 0 };
    emit_program(p, &mut sink);
    sink.done.expect("emitter closes the program node")
}

struct TreeSink {
    stack: Vec<SyntaxNode>,
    done: Option<SyntaxNode>,
    next_index: usize,
}

impl Sink for TreeSink {
    fn open(&mut self, kind: NodeKind) {
        self.stack.push(SyntaxNode { kind, children: Vec::new(), token: None });
    }

    fn close(&mut self) {
        let node = self.stack.pop().expect("balanced open/close");
        match self.stack.last_mut() {
            Some(parent) => parent.children.push(node),
            None => self.done = Some(node),
        }
    }

    fn token(&mut self, kind: TokenKind, text: &str) {
        let leaf = SyntaxNode {
            kind: NodeKind::from_token(kind),
            children: Vec::new(),
            token: Some(LeafToken { kind, text: text.to_string(), index: self.next_index }),
        };
        self.next_index += 1;
        self.stack.last_mut().expect("tokens are emitted inside a node").children.push(leaf);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeafPath {
    pub leaf: LeafToken,
    /// Node kinds from the (possibly truncated) root side down to the leaf kind.
    pub path: Vec<NodeKind>,
    pub depth: usize,
}

/// One path per leaf in source order. Paths longer than `max_depth` keep the
/// `max_depth` kinds nearest the leaf.
pub fn extract_leaf_paths(tree: &SyntaxNode, max_depth: usize, max_count: usize) -> Vec<LeafPath> {
    fn go(n: &SyntaxNode, stack: &mut Vec<NodeKind>, max_depth: usize, max_count: usize, out: &mut Vec<LeafPath>) {
        if out.len() >= max_count {
            return;
        }
        stack.push(n.kind);
        if let Some(tok) = &n.token {
            let start = stack.len().saturating_sub(max_depth);
            let path = stack[start..].to_vec();
            out.push(LeafPath { leaf: tok.clone(), depth: path.len(), path });
        } else {
            for c in &n.children {
                go(c, stack, max_depth, max_count, out);
            }
        }
        stack.pop();
    }
    let mut out = Vec::new();
    go(tree, &mut Vec::new(), max_depth, max_count, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::lexer::tokenize;
    use crate::frontend::parser::parse;

    fn tree(src: &str) -> SyntaxNode {
        syntax_tree(&parse(&tokenize(src).unwrap()).unwrap())
    }

    #[test]
    fn leaves_match_printed_tokens() {
        let p =
            parse(&tokenize("int main(){vector<vector<int>> v; cout<<v.size()<<endl; return 0;}").unwrap()).unwrap();
        let printed = crate::frontend::printer::print_source(&p);
        let toks = tokenize(&printed).unwrap();
        let mut leaves = Vec::new();
        syntax_tree(&p).walk(&mut |n, _| {
            if let Some(t) = &n.token {
                leaves.push((t.kind, t.text.clone()));
            }
        });
        let lexed: Vec<_> = toks.tokens.iter().map(|t| (t.kind, t.text.clone())).collect();
        assert_eq!(leaves, lexed);
    }

    #[test]
    fn return_literal_path() {
        let t = tree("int main(){return 0;}");
        let paths = extract_leaf_paths(&t, 64, usize::MAX);
        assert_eq!(paths.len(), t.leaf_count());
        let zero = paths.iter().find(|p| p.leaf.text == "0").unwrap();
        // Oracle built by hand: program > function > block > return-stmt > integer-literal.
        assert_eq!(
            zero.path,
            vec![
                NodeKind::Program,
                NodeKind::Function,
                NodeKind::Block,
                NodeKind::ReturnStmt,
                NodeKind::IntegerLiteral
            ]
        );
        assert_eq!(zero.depth, 5);
    }

    #[test]
    fn caps_apply() {
        let t = tree("int main(){int a=1; return a;}");
        assert!(extract_leaf_paths(&t, 64, 0).is_empty());
        let one = extract_leaf_paths(&t, 1, usize::MAX);
        assert!(one.iter().all(|p| p.path.len() == 1 && p.path[0] == NodeKind::from_token(p.leaf.kind)));
        let three = extract_leaf_paths(&t, 3, 4);
        assert_eq!(three.len(), 4);
        let semi = extract_leaf_paths(&t, 2, usize::MAX).into_iter().find(|p| p.leaf.text == "a").unwrap();
        assert_eq!(semi.path, vec![NodeKind::Declarator, NodeKind::Identifier]);
    }

    #[test]
    fn json_shape() {
        let t = tree("int main(){return 0;}");
        let v = serde_json::to_value(&t).unwrap();
        assert_eq!(v["kind"], "program");
        assert_eq!(v["children"][0]["kind"], "function");
        let back: SyntaxNode = serde_json::from_value(v).unwrap();
        assert_eq!(back, t);
    }
}
