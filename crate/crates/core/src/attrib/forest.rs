//! Random forest classifier: bootstrap-sampled CART trees, Gini impurity,
//! sqrt(dim) features per split.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub bootstrap: bool,
    /// Features examined per split; `None` means ceil(sqrt(dim)).
    pub max_features: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig { n_trees: 300, max_depth: None, min_leaf: 1, bootstrap: true, max_features: None, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "t", rename_all = "kebab-case")]
pub enum Node {
    /// Samples with `x[feature] <= threshold` go left.
    Split { feature: u32, threshold: f64, left: u32, right: u32 },
    /// Sparse class distribution summing to 1.
    Leaf { dist: Vec<(u32, f64)> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(&self, x: &[f64]) -> &[(u32, f64)] {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature as usize] <= *threshold { *left } else { *right } as usize;
                }
                Node::Leaf { dist } => return dist,
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub dim: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    /// Mean of the per-tree leaf distributions.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for t in &self.trees {
            for &(c, w) in t.leaf(x) {
                p[c as usize] += w;
            }
        }
        let n = self.trees.len().max(1) as f64;
        p.iter_mut().for_each(|v| *v /= n);
        p
    }
}

/// `x` is row-major dense data; `y` holds class indices below `n_classes`.
/// Trees are grown in parallel; tree `k` draws from stream `k` of the seed.
pub fn train_forest(x: &[Vec<f64>], y: &[usize], n_classes: usize, cfg: &ForestConfig) -> Forest {
    let dim = x.first().map_or(0, Vec::len);
    let mtry = cfg.max_features.unwrap_or_else(|| (dim as f64).sqrt().ceil() as usize).clamp(1, dim.max(1));
    let trees = (0..cfg.n_trees)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(k as u64);
            let rows: Vec<usize> = if cfg.bootstrap {
                (0..x.len()).map(|_| rng.random_range(0..x.len())).collect()
            } else {
                (0..x.len()).collect()
            };
            let mut b = Builder { x, y, n_classes, cfg, mtry, rng, nodes: Vec::new(), features: (0..dim).collect() };
            b.grow(rows, 0);
            Tree { nodes: b.nodes }
        })
        .collect();
    Forest { n_classes, dim, trees }
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    cfg: &'a ForestConfig,
    mtry: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
    features: Vec<usize>,
}

struct Best {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &r in rows {
            c[self.y[r]] += 1;
        }
        c
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> u32 {
        let id = self.nodes.len() as u32;
        let counts = self.counts(&rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let depth_capped = self.cfg.max_depth.is_some_and(|d| depth >= d);
        let split = if pure || depth_capped || rows.len() < 2 * self.cfg.min_leaf.max(1) {
            None
        } else {
            self.best_split(&rows, &counts)
        };
        let Some(best) = split else {
            let n = rows.len() as f64;
            let dist =
                counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, &c)| (i as u32, c as f64 / n)).collect();
            self.nodes.push(Node::Leaf { dist });
            return id;
        };
        self.nodes.push(Node::Leaf { dist: Vec::new() });
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][best.feature] <= best.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id as usize] = Node::Split { feature: best.feature as u32, threshold: best.threshold, left, right };
        id
    }

    /// Examines features in random order until `mtry` non-constant ones have
    /// been seen and at least one admissible split exists.
    fn best_split(&mut self, rows: &[usize], total: &[usize]) -> Option<Best> {
        let dim = self.features.len();
        let mut best: Option<Best> = None;
        let mut seen = 0usize;
        let mut vals: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for k in 0..dim {
            if seen >= self.mtry && best.is_some() {
                break;
            }
            let j = self.rng.random_range(k..dim);
            self.features.swap(k, j);
            let f = self.features[k];
            vals.clear();
            vals.extend(rows.iter().map(|&r| (self.x[r][f], self.y[r])));
            let first = vals[0].0;
            if vals.iter().all(|v| v.0 == first) {
                continue;
            }
            seen += 1;
            vals.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0usize; self.n_classes];
            let n = vals.len();
            let min_leaf = self.cfg.min_leaf.max(1);
            for i in 0..n - 1 {
                left[vals[i].1] += 1;
                if vals[i].0 == vals[i + 1].0 {
                    continue;
                }
                let nl = i + 1;
                let nr = n - nl;
                if nl < min_leaf || nr < min_leaf {
                    continue;
                }
                // Maximizing sum(c^2)/n over both sides minimizes weighted Gini.
                let sl: f64 = left.iter().map(|&c| (c * c) as f64).sum::<f64>() / nl as f64;
                let sr: f64 =
                    left.iter().zip(total).map(|(&l, &t)| ((t - l) * (t - l)) as f64).sum::<f64>() / nr as f64;
                let score = sl + sr;
                if best.as_ref().is_none_or(|b| score > b.score) {
                    let mid = vals[i].0 + (vals[i + 1].0 - vals[i].0) / 2.0;
                    // Adjacent floats can round the midpoint up onto the right value.
                    let threshold = if mid < vals[i + 1].0 { mid } else { vals[i].0 };
                    best = Some(Best { score, feature: f, threshold });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn separable() -> (Vec<Vec<f64>>, Vec<usize>) {
        let x = vec![vec![0.0, 1.0], vec![0.1, 0.9], vec![0.2, 1.0], vec![1.0, 0.0], vec![0.9, 0.2], vec![0.8, 0.1]];
        (x, vec![0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn separable_data_is_fit() {
        let (x, y) = separable();
        let f = train_forest(&x, &y, 2, &ForestConfig { n_trees: 25, ..Default::default() });
        for (row, &c) in x.iter().zip(&y) {
            let p = f.predict_proba(row);
            assert!(p[c] > 0.5, "{p:?}");
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn same_seed_same_forest() {
        let (x, y) = separable();
        let cfg = ForestConfig { n_trees: 10, seed: 9, ..Default::default() };
        assert_eq!(train_forest(&x, &y, 2, &cfg), train_forest(&x, &y, 2, &cfg));
    }

    #[test]
    fn min_leaf_and_depth_are_respected() {
        let (x, y) = separable();
        let stump = train_forest(&x, &y, 2, &ForestConfig { n_trees: 1, max_depth: Some(0), ..Default::default() });
        assert!(matches!(stump.trees[0].nodes[..], [Node::Leaf { .. }]));
        let wide =
            train_forest(&x, &y, 2, &ForestConfig { n_trees: 3, min_leaf: 3, bootstrap: false, ..Default::default() });
        for t in &wide.trees {
            assert!(t.nodes.len() <= 3);
        }
    }

    proptest! {
        #[test]
        fn single_unbootstrapped_tree_fits_consistent_data(
            rows in prop::collection::btree_map(prop::collection::vec(0u8..4, 3), 0usize..3, 2..30)
        ) {
            let x: Vec<Vec<f64>> = rows.keys().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
            let y: Vec<usize> = rows.values().copied().collect();
            let f = train_forest(&x, &y, 3, &ForestConfig { n_trees: 1, bootstrap: false, ..Default::default() });
            for (row, &c) in x.iter().zip(&y) {
                prop_assert_eq!(f.predict_proba(row)[c], 1.0);
            }
        }
    }
}
