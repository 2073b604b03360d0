//! UCT search over transform sequences that pushes a program's attribution
//! away from its author (untargeted) or toward a chosen one (targeted).

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attrib::{argmax, AttribError, Attributor};
use crate::frontend::ast::Program;
use crate::frontend::print_source;
use crate::transforms::{apply, enumerate_actions, TransformAction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "author", rename_all = "kebab-case")]
pub enum Objective {
    /// Succeeds when the prediction differs from the true author.
    Untargeted(String),
    /// Succeeds when the prediction equals the target author.
    Targeted(String),
}

impl Objective {
    pub fn author(&self) -> &str {
        match self {
            Objective::Untargeted(a) | Objective::Targeted(a) => a,
        }
    }

    pub fn is_success(&self, predicted: &str) -> bool {
        match self {
            Objective::Untargeted(a) => predicted != a,
            Objective::Targeted(a) => predicted == a,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub budget: usize,
    pub max_depth: usize,
    pub exploration: f64,
    pub rollout_depth: usize,
    pub early_stop: bool,
    pub seed: u64,
    /// Progressive widening: a node may hold at most `ceil(c * visits^alpha)`
    /// children. `None` expands every action before descending.
    pub widening: Option<Widening>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Widening {
    pub c: f64,
    pub alpha: f64,
}

impl Widening {
    fn limit(&self, visits: u32) -> usize {
        (self.c * (visits.max(1) as f64).powf(self.alpha)).ceil().max(1.0) as usize
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 500,
            max_depth: 8,
            exploration: std::f64::consts::SQRT_2,
            rollout_depth: 4,
            early_stop: true,
            seed: 0,
            widening: Some(Widening { c: 1.0, alpha: 0.3 }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvasionResult {
    pub success: bool,
    pub final_code: String,
    pub predicted: String,
    pub objective: Objective,
    pub sequence: Vec<TransformAction>,
    pub iterations_used: usize,
    /// Visits recorded at the search root; equals `iterations_used` for UCT.
    pub root_visits: usize,
    pub reward: f64,
}

impl EvasionResult {
    pub fn true_author(&self) -> Option<&str> {
        match &self.objective {
            Objective::Untargeted(a) => Some(a),
            Objective::Targeted(_) => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("program admits no transform")]
    NoActions,
    #[error(transparent)]
    Attrib(#[from] AttribError),
    #[error("trace output failed: {0}")]
    Trace(#[from] std::io::Error),
}

/// Untargeted: 1 - P(author); targeted: P(target). Unknown authors have P = 0.
pub fn reward(model: &dyn Attributor, source: &str, objective: &Objective) -> Result<f64, AttribError> {
    Ok(score(model, &model.distribution(source)?, objective))
}

fn score(model: &dyn Attributor, dist: &[f64], objective: &Objective) -> f64 {
    let p = model.label_index(objective.author()).map_or(0.0, |i| dist[i]);
    match objective {
        Objective::Untargeted(_) => (1.0 - p).clamp(0.0, 1.0),
        Objective::Targeted(_) => p.clamp(0.0, 1.0),
    }
}

#[derive(Clone)]
struct Eval {
    reward: f64,
    predicted: String,
}

/// Scores states, memoized by printed source.
struct Evaluator<'m> {
    model: &'m dyn Attributor,
    objective: &'m Objective,
    cache: HashMap<String, Eval>,
}

impl Evaluator<'_> {
    fn eval(&mut self, code: &str) -> Result<Eval, AttribError> {
        if let Some(e) = self.cache.get(code) {
            return Ok(e.clone());
        }
        let dist = self.model.distribution(code)?;
        let e = Eval {
            reward: score(self.model, &dist, self.objective),
            predicted: self.model.labels()[argmax(&dist)].clone(),
        };
        self.cache.insert(code.to_string(), e.clone());
        Ok(e)
    }
}

/// Best state seen so far: the first successful one, else the highest reward.
struct Best {
    success: bool,
    reward: f64,
    code: String,
    predicted: String,
    sequence: Vec<TransformAction>,
}

impl Best {
    fn offer(&mut self, success: bool, e: &Eval, code: &str, seq: &[TransformAction]) {
        if self.success {
            return;
        }
        if success || e.reward > self.reward {
            *self = Best {
                success,
                reward: e.reward,
                code: code.to_string(),
                predicted: e.predicted.clone(),
                sequence: seq.to_vec(),
            };
        }
    }

    fn finish(self, objective: &Objective, iterations_used: usize, root_visits: usize) -> EvasionResult {
        EvasionResult {
            success: self.success,
            final_code: self.code,
            predicted: self.predicted,
            objective: objective.clone(),
            sequence: self.sequence,
            iterations_used,
            root_visits,
            reward: self.reward,
        }
    }
}

#[derive(Serialize)]
struct TraceLine<'a> {
    iteration: usize,
    depth: usize,
    reward: f64,
    action: Option<&'a TransformAction>,
}

struct SearchNode {
    state: Program,
    action: Option<TransformAction>,
    depth: usize,
    visits: u32,
    total_reward: f64,
    children: Vec<usize>,
    /// `None` until the node is first expanded.
    untried: Option<Vec<TransformAction>>,
}

fn random_walk(start: &Program, steps: usize, rng: &mut ChaCha8Rng, seq: &mut Vec<TransformAction>) -> Program {
    let mut cur = start.clone();
    for _ in 0..steps {
        let actions = enumerate_actions(&cur);
        if actions.is_empty() {
            break;
        }
        let a = actions[rng.random_range(0..actions.len())].clone();
        cur = apply(&cur, &a).expect("enumerated action applies");
        seq.push(a);
    }
    cur
}

/// Scores the unmodified program; the flag is set when no search is needed.
fn root_check(ev: &mut Evaluator, program: &Program, cfg: &SearchConfig) -> Result<(Best, bool), SearchError> {
    let code = print_source(program);
    let e = ev.eval(&code)?;
    let success = ev.objective.is_success(&e.predicted);
    let best = Best { success, reward: e.reward, code, predicted: e.predicted, sequence: Vec::new() };
    Ok((best, cfg.budget == 0 || (success && cfg.early_stop)))
}

pub fn evade(
    program: &Program,
    model: &dyn Attributor,
    objective: &Objective,
    cfg: &SearchConfig,
) -> Result<EvasionResult, SearchError> {
    evade_traced(program, model, objective, cfg, None)
}

/// [`evade`] that also writes one JSON line per iteration to `trace`.
pub fn evade_traced(
    program: &Program,
    model: &dyn Attributor,
    objective: &Objective,
    cfg: &SearchConfig,
    mut trace: Option<&mut dyn Write>,
) -> Result<EvasionResult, SearchError> {
    let mut ev = Evaluator { model, objective, cache: HashMap::new() };
    let (mut best, done) = root_check(&mut ev, program, cfg)?;
    if done {
        return Ok(best.finish(objective, 0, 0));
    }
    let root_actions = enumerate_actions(program);
    if root_actions.is_empty() {
        return Err(SearchError::NoActions);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut nodes = vec![SearchNode {
        state: program.clone(),
        action: None,
        depth: 0,
        visits: 0,
        total_reward: 0.0,
        children: Vec::new(),
        untried: Some(root_actions),
    }];
    let mut iterations = 0;
    while iterations < cfg.budget {
        iterations += 1;
        // Selection.
        let mut path = vec![0usize];
        let mut seq: Vec<TransformAction> = Vec::new();
        loop {
            let n = &nodes[*path.last().expect("root")];
            let untried_left = n.untried.as_ref().is_none_or(|u| !u.is_empty());
            let may_widen = untried_left && cfg.widening.is_none_or(|w| n.children.len() < w.limit(n.visits));
            if n.depth >= cfg.max_depth || may_widen || n.children.is_empty() {
                break;
            }
            let ln_parent = (n.visits.max(1) as f64).ln();
            let pick = *n
                .children
                .iter()
                .max_by(|&&a, &&b| {
                    let uct = |i: usize| {
                        let c = &nodes[i];
                        c.total_reward / c.visits as f64 + cfg.exploration * (ln_parent / c.visits as f64).sqrt()
                    };
                    uct(a).total_cmp(&uct(b))
                })
                .expect("children present");
            seq.push(nodes[pick].action.clone().expect("non-root"));
            path.push(pick);
        }
        // Expansion.
        let leaf = *path.last().expect("root");
        let mut stop_at_fresh: Option<Eval> = None;
        if nodes[leaf].depth < cfg.max_depth {
            if nodes[leaf].untried.is_none() {
                let acts = enumerate_actions(&nodes[leaf].state);
                nodes[leaf].untried = Some(acts);
            }
            let untried = nodes[leaf].untried.as_mut().expect("set above");
            if !untried.is_empty() {
                let a = untried.swap_remove(rng.random_range(0..untried.len()));
                let state = apply(&nodes[leaf].state, &a).expect("enumerated action applies");
                let child = nodes.len();
                let depth = nodes[leaf].depth + 1;
                nodes.push(SearchNode {
                    state,
                    action: Some(a.clone()),
                    depth,
                    visits: 0,
                    total_reward: 0.0,
                    children: Vec::new(),
                    untried: None,
                });
                nodes[leaf].children.push(child);
                seq.push(a);
                path.push(child);
                // A fresh node is scored on its own so a single step can end the search.
                let code = print_source(&nodes[child].state);
                let e = ev.eval(&code)?;
                if objective.is_success(&e.predicted) {
                    best.offer(true, &e, &code, &seq);
                    if cfg.early_stop {
                        stop_at_fresh = Some(e);
                    }
                }
            }
        }
        let node = *path.last().expect("root");
        let (e, success) = match stop_at_fresh {
            Some(e) => (e, true),
            None => {
                // Rollout.
                let steps = cfg.rollout_depth.min(cfg.max_depth.saturating_sub(nodes[node].depth));
                let end = random_walk(&nodes[node].state, steps, &mut rng, &mut seq);
                let code = print_source(&end);
                let e = ev.eval(&code)?;
                let success = objective.is_success(&e.predicted);
                best.offer(success, &e, &code, &seq);
                (e, success)
            }
        };
        if let Some(w) = trace.as_mut() {
            let line = TraceLine {
                iteration: iterations,
                depth: seq.len(),
                reward: e.reward,
                action: nodes[node].action.as_ref(),
            };
            serde_json::to_writer(&mut **w, &line).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        // Backpropagation.
        for &i in &path {
            nodes[i].visits += 1;
            nodes[i].total_reward += e.reward;
        }
        if success && cfg.early_stop {
            break;
        }
    }
    Ok(best.finish(objective, iterations, nodes[0].visits as usize))
}

/// Control condition: each iteration scores the end of an independent random
/// walk whose length is uniform in `1..=max_depth`.
pub fn random_baseline(
    program: &Program,
    model: &dyn Attributor,
    objective: &Objective,
    cfg: &SearchConfig,
) -> Result<EvasionResult, SearchError> {
    let mut ev = Evaluator { model, objective, cache: HashMap::new() };
    let (mut best, done) = root_check(&mut ev, program, cfg)?;
    if done {
        return Ok(best.finish(objective, 0, 0));
    }
    if enumerate_actions(program).is_empty() {
        return Err(SearchError::NoActions);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut iterations = 0;
    while iterations < cfg.budget {
        iterations += 1;
        let len = rng.random_range(1..=cfg.max_depth.max(1));
        let mut seq = Vec::new();
        let end = random_walk(program, len, &mut rng, &mut seq);
        let code = print_source(&end);
        let e = ev.eval(&code)?;
        let success = objective.is_success(&e.predicted);
        best.offer(success, &e, &code, &seq);
        if success && cfg.early_stop {
            break;
        }
    }
    Ok(best.finish(objective, iterations, 0))
}

#[cfg(test)]
mod tests;
