use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::challenges::ROLES;
use crate::frontend::ast::{Indent, Layout, Program, StmtKind};
use crate::frontend::visit::for_each_ident_mut;
use crate::transforms::{apply, enumerate_transform, stmt_at, Payload, TransformAction, TransformId, UpdateForm};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameScheme {
    Plain,
    /// `myN`, `myIdx`
    MyPrefix,
    /// `n_v`, `idx_v`
    VSuffix,
    /// `N`, `Idx`
    Capital,
    /// `n_`, `idx_`
    Underscore,
    /// `n1`, `idx1`
    Digit,
    /// `_n`, `_idx`
    LeadingUnderscore,
    /// `nVal`, `idxVal`
    ValSuffix,
    /// `nVar`, `idxVar`
    VarSuffix,
    /// `theN`, `theIdx`
    ThePrefix,
}

impl NameScheme {
    pub const ALL: [NameScheme; 10] = [
        NameScheme::Plain,
        NameScheme::MyPrefix,
        NameScheme::VSuffix,
        NameScheme::Capital,
        NameScheme::Underscore,
        NameScheme::Digit,
        NameScheme::LeadingUnderscore,
        NameScheme::ValSuffix,
        NameScheme::VarSuffix,
        NameScheme::ThePrefix,
    ];

    pub fn apply(self, stem: &str) -> String {
        let cap = || {
            let mut c = stem.to_string();
            c[..1].make_ascii_uppercase();
            c
        };
        match self {
            NameScheme::Plain => stem.to_string(),
            NameScheme::MyPrefix => format!("my{}", cap()),
            NameScheme::VSuffix => format!("{stem}_v"),
            NameScheme::Capital => cap(),
            NameScheme::Underscore => format!("{stem}_"),
            NameScheme::Digit => format!("{stem}1"),
            NameScheme::LeadingUnderscore => format!("_{stem}"),
            NameScheme::ValSuffix => format!("{stem}Val"),
            NameScheme::VarSuffix => format!("{stem}Var"),
            NameScheme::ThePrefix => format!("the{}", cap()),
        }
    }
}

/// One author's habits, each realised by driving a transform to a fixpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuthorStyle {
    pub name: String,
    pub while_loops: bool,
    pub printf_io: bool,
    pub update: UpdateForm,
    pub always_braces: bool,
    pub typedef_ll: bool,
    pub split_decls: bool,
    pub late_decls: bool,
    pub scheme: NameScheme,
    /// Picks the second synonym stem of every role.
    pub alt_stems: bool,
    pub indent: u8,
    pub brace_on_new_line: bool,
}

impl AuthorStyle {
    fn signature(&self) -> [u8; 9] {
        [
            self.while_loops as u8,
            self.printf_io as u8,
            self.update as u8,
            self.always_braces as u8,
            self.typedef_ll as u8,
            self.split_decls as u8,
            self.late_decls as u8,
            self.scheme as u8,
            self.alt_stems as u8,
        ]
    }

    fn random(rng: &mut ChaCha8Rng, name: String, naming: (NameScheme, bool)) -> AuthorStyle {
        const FORMS: [UpdateForm; 4] =
            [UpdateForm::Plain, UpdateForm::Compound, UpdateForm::Postfix, UpdateForm::Prefix];
        AuthorStyle {
            name,
            while_loops: rng.random_bool(0.5),
            printf_io: rng.random_bool(0.5),
            update: FORMS[rng.random_range(0..4)],
            always_braces: rng.random_bool(0.5),
            typedef_ll: rng.random_bool(0.5),
            split_decls: rng.random_bool(0.5),
            late_decls: rng.random_bool(0.5),
            scheme: naming.0,
            alt_stems: naming.1,
            indent: [0, 2, 4][rng.random_range(0..3)],
            brace_on_new_line: rng.random_bool(0.3),
        }
    }

    pub fn layout(&self) -> Layout {
        Layout {
            indent: if self.indent == 0 { Indent::Tab } else { Indent::Spaces(self.indent) },
            brace_on_new_line: self.brace_on_new_line,
        }
    }

    pub fn rename_map(&self) -> HashMap<&'static str, String> {
        ROLES.iter().map(|&(base, alt)| (base, self.scheme.apply(if self.alt_stems { alt } else { base }))).collect()
    }
}

/// `n` styles whose habit signatures pairwise differ in at least three places.
/// Naming conventions (scheme, stem choice) are unique while `n` <= 20.
/// Authors are named `author00`, `author01`, ...
pub fn author_styles(n: usize, seed: u64) -> Vec<AuthorStyle> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut namings: Vec<(NameScheme, bool)> = NameScheme::ALL.iter().flat_map(|&s| [(s, false), (s, true)]).collect();
    namings.shuffle(&mut rng);
    let mut out: Vec<AuthorStyle> = Vec::new();
    let mut min_dist = 3;
    let mut attempts = 0;
    while out.len() < n {
        let naming = namings[out.len() % namings.len()];
        let cand = AuthorStyle::random(&mut rng, format!("author{:02}", out.len()), naming);
        let sig = cand.signature();
        let far = out.iter().all(|s| s.signature().iter().zip(&sig).filter(|(a, b)| a != b).count() >= min_dist);
        if far {
            out.push(cand);
        }
        attempts += 1;
        if attempts % 10_000 == 0 && min_dist > 1 {
            min_dist -= 1;
        }
    }
    out
}

/// Applies actions of `t` accepted by `keep` until none remain.
fn drive(p: Program, t: TransformId, keep: &dyn Fn(&Program, &TransformAction) -> bool) -> Program {
    let mut cur = p;
    for _ in 0..500 {
        let Some(a) = enumerate_transform(&cur, t).into_iter().find(|a| keep(&cur, a)) else { break };
        cur = apply(&cur, &a).expect("enumerated action applies");
    }
    cur
}

fn any(_: &Program, _: &TransformAction) -> bool {
    true
}

fn is_block(p: &Program, a: &TransformAction) -> bool {
    matches!(stmt_at(p, &a.site.path).map(|s| &s.kind), Some(StmtKind::Block(_)))
}

/// Rewrites `p` into `style`. Each habit is skipped with probability `noise`.
pub fn apply_style(p: &Program, style: &AuthorStyle, noise: f64, rng: &mut ChaCha8Rng) -> Program {
    let mut cur = p.clone();
    let follow = |rng: &mut ChaCha8Rng| noise <= 0.0 || !rng.random_bool(noise.min(1.0));
    if follow(rng) {
        let map = style.rename_map();
        let taken: BTreeSet<String> = {
            let mut s = BTreeSet::new();
            crate::frontend::visit::for_each_ident(&cur, &mut |id| {
                s.insert(id.name.clone());
            });
            s
        };
        for_each_ident_mut(&mut cur, &mut |id| {
            if let Some(new) = map.get(id.name.as_str()) {
                if !taken.contains(new) {
                    id.name = new.clone();
                }
            }
        });
        cur.renumber();
    }
    if style.typedef_ll && follow(rng) {
        cur = drive(cur, TransformId::T11, &|_, a| a.site.path.is_empty());
    }
    if follow(rng) {
        cur = drive(cur, if style.while_loops { TransformId::T1 } else { TransformId::T2 }, &any);
    }
    if follow(rng) {
        cur = drive(cur, if style.printf_io { TransformId::T4 } else { TransformId::T3 }, &any);
    }
    if follow(rng) {
        let form = style.update;
        cur = drive(cur, TransformId::T8, &move |_, a| a.site.payload == Payload::Form(form));
    }
    if follow(rng) {
        cur = drive(cur, if style.split_decls { TransformId::T6 } else { TransformId::T7 }, &any);
    }
    if style.late_decls && follow(rng) {
        cur = drive(cur, TransformId::T12, &any);
    }
    if follow(rng) {
        let braces = style.always_braces;
        cur = drive(cur, TransformId::T10, &move |p, a| is_block(p, a) != braces);
    }
    cur.layout = style.layout();
    cur
}
