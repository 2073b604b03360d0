//! Semantics-preserving, style-changing rewrites: the action space of the search.
//!
//! A [`Site`] path addresses a statement as `[item, stmt, child, ...]`, where
//! `child` indexes block statements, `0`/`1` for the then/else branches of an
//! `if`, and `0` for loop bodies. T5 paths hold the id of the declaring
//! identifier; T11 paths are `[]` (introduce) or `[typedef item]` (remove).

mod paths;
mod rules;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::ast::Program;
use crate::frontend::sema::{analyze, Sema};
use crate::frontend::SyntaxFailure;

pub use paths::{stmt_at, visit_stmts, Slot};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TransformId {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    T11,
    T12,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    ControlFlow,
    Api,
    Declarations,
    Expressions,
    Layout,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::ControlFlow => "control-flow",
            Family::Api => "api",
            Family::Declarations => "declarations",
            Family::Expressions => "expressions",
            Family::Layout => "layout",
        }
    }
}

impl TransformId {
    pub const ALL: [TransformId; 12] = [
        TransformId::T1,
        TransformId::T2,
        TransformId::T3,
        TransformId::T4,
        TransformId::T5,
        TransformId::T6,
        TransformId::T7,
        TransformId::T8,
        TransformId::T9,
        TransformId::T10,
        TransformId::T11,
        TransformId::T12,
    ];

    pub fn family(self) -> Family {
        use TransformId::*;
        match self {
            T1 | T2 | T9 => Family::ControlFlow,
            T3 | T4 => Family::Api,
            T5 | T6 | T7 | T11 | T12 => Family::Declarations,
            T8 => Family::Expressions,
            T10 => Family::Layout,
        }
    }

    pub fn description(self) -> &'static str {
        use TransformId::*;
        match self {
            T1 => "for loop to while loop",
            T2 => "while loop to for loop with empty init and step",
            T3 => "printf to cout (%d %lld %c %s only)",
            T4 => "cout to printf",
            T5 => "rename a variable (camelCase, snake_case or single-letter scheme)",
            T6 => "split a multi-variable declaration",
            T7 => "merge adjacent declarations of the same type",
            T8 => "rewrite x = x + k, x += k, x++ and ++x into one another",
            T9 => "swap if/else branches and negate the condition",
            T10 => "add or remove braces around a single-statement body",
            T11 => "introduce or remove typedef long long ll",
            T12 => "move a declaration down to its first use",
        }
    }

    pub fn parse(s: &str) -> Option<TransformId> {
        TransformId::ALL.iter().copied().find(|t| t.to_string().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for TransformId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Target shape of a T8 rewrite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpdateForm {
    /// `x = x + k`
    Plain,
    /// `x += k`
    Compound,
    /// `x++`
    Postfix,
    /// `++x`
    Prefix,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Payload {
    None,
    Name(String),
    Form(UpdateForm),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub path: Vec<usize>,
    pub payload: Payload,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TransformAction {
    pub transform: TransformId,
    pub site: Site,
}

impl fmt::Display for TransformAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.transform, self.site.path)?;
        match &self.site.payload {
            Payload::None => Ok(()),
            Payload::Name(n) => write!(f, ":{n}"),
            Payload::Form(form) => write!(f, ":{form:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TransformError {
    #[error("action {0} is not applicable to this program")]
    InapplicableAction(TransformAction),
    #[error("program does not bind: {0}")]
    Invalid(#[from] SyntaxFailure),
}

/// Per-program facts shared by the site finders.
pub(crate) struct Ctx<'a> {
    pub prog: &'a Program,
    pub sema: Sema,
}

/// All applicable actions, grouped by transform (T1 first) and in source
/// order within a transform. Programs that fail to bind admit no actions.
pub fn enumerate_actions(p: &Program) -> Vec<TransformAction> {
    let Ok(sema) = analyze(p) else { return Vec::new() };
    let ctx = Ctx { prog: p, sema };
    TransformId::ALL
        .iter()
        .flat_map(|&t| rules::sites(&ctx, t).into_iter().map(move |site| TransformAction { transform: t, site }))
        .collect()
}

/// Actions of a single transform.
pub fn enumerate_transform(p: &Program, t: TransformId) -> Vec<TransformAction> {
    let Ok(sema) = analyze(p) else { return Vec::new() };
    let ctx = Ctx { prog: p, sema };
    rules::sites(&ctx, t).into_iter().map(|site| TransformAction { transform: t, site }).collect()
}

/// Returns a rewritten copy; `p` is left untouched.
pub fn apply(p: &Program, action: &TransformAction) -> Result<Program, TransformError> {
    let sema = analyze(p)?;
    let ctx = Ctx { prog: p, sema };
    if !rules::sites(&ctx, action.transform).contains(&action.site) {
        return Err(TransformError::InapplicableAction(action.clone()));
    }
    let mut out = rules::rewrite(&ctx, action);
    out.renumber();
    Ok(out)
}

/// Applies a sequence, failing at the first inapplicable step.
pub fn apply_all(p: &Program, actions: &[TransformAction]) -> Result<Program, TransformError> {
    let mut cur = p.clone();
    for a in actions {
        cur = apply(&cur, a)?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests;
