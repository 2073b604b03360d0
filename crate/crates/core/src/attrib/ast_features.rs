use super::FeatureVector;
use crate::frontend::ast::Program;
use crate::frontend::{syntax_tree, tokenize, NodeKind};

/// Node kinds that carry no stylistic signal of their own: the root, type
/// wrappers, names and bare keyword/operator/punctuation leaves.
const SKIPPED: [NodeKind; 6] = [
    NodeKind::Program,
    NodeKind::Type,
    NodeKind::Identifier,
    NodeKind::Keyword,
    NodeKind::Operator,
    NodeKind::Punctuation,
];

/// Depth statistics are divided by this before normalization.
const DEPTH_SCALE: f64 = 64.0;

fn counted_kinds() -> impl Iterator<Item = NodeKind> {
    NodeKind::ALL.into_iter().filter(|k| !SKIPPED.contains(k))
}

pub fn ast_dim() -> usize {
    counted_kinds().count() + 5
}

/// Human-readable feature names, aligned with [`featurize_ast`] indices.
pub fn ast_feature_names() -> Vec<String> {
    let mut names: Vec<String> = counted_kinds().map(|k| format!("kind:{}", k.as_str())).collect();
    names.extend(
        ["depth:mean", "depth:max", "layout:tab-ratio", "layout:brace-newline", "layout:blank-lines"].map(String::from),
    );
    names
}

/// Node-kind frequencies, leaf depth mean/max and layout ratios, L2-normalized.
pub fn featurize_ast(p: &Program, layout: &str) -> FeatureVector {
    let kinds: Vec<NodeKind> = counted_kinds().collect();
    let mut dense = vec![0.0; ast_dim()];
    let (mut total, mut leaves, mut depth_sum, mut depth_max) = (0usize, 0usize, 0usize, 0usize);
    syntax_tree(p).walk(&mut |n, depth| {
        if let Some(i) = kinds.iter().position(|k| *k == n.kind) {
            dense[i] += 1.0;
            total += 1;
        }
        if n.is_leaf() {
            leaves += 1;
            depth_sum += depth;
            depth_max = depth_max.max(depth);
        }
    });
    if total > 0 {
        for v in &mut dense[..kinds.len()] {
            *v /= total as f64;
        }
    }
    let base = kinds.len();
    if leaves > 0 {
        dense[base] = depth_sum as f64 / leaves as f64 / DEPTH_SCALE;
        dense[base + 1] = depth_max as f64 / DEPTH_SCALE;
    }
    let [tabs, braces, blanks] = layout_ratios(layout);
    dense[base + 2] = tabs;
    dense[base + 3] = braces;
    dense[base + 4] = blanks;
    FeatureVector::from_dense(&dense)
}

/// [tab share of indentation, share of `{` opening a line, blank-line share].
fn layout_ratios(src: &str) -> [f64; 3] {
    let (mut tabs, mut spaces, mut blank, mut lines) = (0usize, 0usize, 0usize, 0usize);
    for line in src.lines() {
        lines += 1;
        if line.trim().is_empty() {
            blank += 1;
            continue;
        }
        for c in line.chars().take_while(|c| c.is_whitespace()) {
            match c {
                '\t' => tabs += 1,
                _ => spaces += 1,
            }
        }
    }
    let (mut open, mut open_nl) = (0usize, 0usize);
    if let Ok(ts) = tokenize(src) {
        for (i, t) in ts.tokens.iter().enumerate() {
            if t.is("{") {
                open += 1;
                if i > 0 && t.leading_whitespace().contains('\n') {
                    open_nl += 1;
                }
            }
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    [ratio(tabs, tabs + spaces), ratio(open_nl, open), ratio(blank, lines)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn feats(src: &str) -> FeatureVector {
        featurize_ast(&parse_source(src).unwrap(), src)
    }

    #[test]
    fn renaming_does_not_change_features() {
        assert_eq!(
            feats("int main() {\n    int a = 1;\n    cout << a;\n}\n"),
            feats("int main() {\n    int zz = 1;\n    cout << zz;\n}\n")
        );
    }

    #[test]
    fn single_return_has_mass_on_four_kinds() {
        let f = feats("int main(){return 0;}");
        let names = ast_feature_names();
        let kinds: Vec<&str> =
            f.entries.iter().map(|(i, _)| names[*i as usize].as_str()).filter(|n| n.starts_with("kind:")).collect();
        assert_eq!(kinds, ["kind:function", "kind:block", "kind:return-stmt", "kind:integer-literal"]);
    }

    #[test]
    fn deterministic_and_normalized() {
        let a = feats("int main(){}");
        assert_eq!(a, feats("int main(){}"));
        let norm: f64 = a.entries.iter().map(|(_, w)| w * w).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn layout_is_measured() {
        let [tabs, braces, blanks] = layout_ratios("int main()\n{\n\tint a;\n\n\treturn 0;\n}\n");
        assert_eq!(tabs, 1.0);
        assert_eq!(braces, 1.0);
        assert!((blanks - 1.0 / 6.0).abs() < 1e-12);
    }
}
