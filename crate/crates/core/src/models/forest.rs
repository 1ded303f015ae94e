use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Matrix, SeededRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features tried per split; `None` means `max(1, floor(sqrt(m)))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_features: None,
            min_samples_split: 2,
            max_depth: None,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.min_samples_split < 2 || self.max_features == Some(0) {
            return Err(Error::Config(format!("invalid random forest parameters {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        counts: [usize; 2],
    },
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
    /// Fraction of distinct training rows in this tree's bootstrap sample.
    pub unique_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub n_features: usize,
    pub trees: Vec<Tree>,
}

/// `1 − Σ p_i²` over the class counts.
pub fn gini_impurity(counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::Input("gini impurity of an empty node".into()));
    }
    Ok(gini(counts[0], n - counts[0]))
}

fn gini(c0: usize, c1: usize) -> f64 {
    let n = (c0 + c1) as f64;
    let (p0, p1) = (c0 as f64 / n, c1 as f64 / n);
    1.0 - p0 * p0 - p1 * p1
}

pub(super) fn fit(p: &ForestParams, x: &Matrix, y: &[u8], rng: &SeededRng) -> ForestModel {
    let m = x.cols();
    let mtry = p
        .max_features
        .unwrap_or_else(|| ((m as f64).sqrt().floor() as usize).max(1))
        .min(m);
    let trees = (0..p.n_trees)
        .into_par_iter()
        .map(|t| grow_tree(p, mtry, x, y, &mut rng.derive_substream(t as u64)))
        .collect();
    ForestModel { n_features: m, trees }
}

fn grow_tree(p: &ForestParams, mtry: usize, x: &Matrix, y: &[u8], rng: &mut SeededRng) -> Tree {
    let n = x.rows();
    let sample: Vec<usize> = (0..n).map(|_| rng.below(n)).collect();
    let mut seen = vec![false; n];
    sample.iter().for_each(|&i| seen[i] = true);
    let unique_fraction = seen.iter().filter(|s| **s).count() as f64 / n as f64;
    Tree {
        nodes: build_nodes(p, mtry, x, y, sample, rng),
        unique_fraction,
    }
}

fn build_nodes(p: &ForestParams, mtry: usize, x: &Matrix, y: &[u8], sample: Vec<usize>, rng: &mut SeededRng) -> Vec<Node> {
    let mut nodes = vec![Node::Leaf { counts: [0, 0] }];
    let mut stack = vec![(0usize, sample, 0usize)];
    while let Some((id, rows, depth)) = stack.pop() {
        let ones = rows.iter().filter(|&&i| y[i] == 1).count();
        let counts = [rows.len() - ones, ones];
        let stop = counts[0] == 0
            || counts[1] == 0
            || rows.len() < p.min_samples_split
            || p.max_depth.is_some_and(|d| depth >= d);
        let split = if stop { None } else { best_split(x, y, &rows, mtry, rng) };
        match split {
            None => nodes[id] = Node::Leaf { counts },
            Some((feature, threshold)) => {
                let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[(i, feature)] <= threshold);
                let (left, right) = (nodes.len(), nodes.len() + 1);
                nodes.push(Node::Leaf { counts: [0, 0] });
                nodes.push(Node::Leaf { counts: [0, 0] });
                nodes[id] = Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                };
                stack.push((right, r, depth + 1));
                stack.push((left, l, depth + 1));
            }
        }
    }
    nodes
}

/// Lowest weighted child impurity over midpoints of sorted distinct values.
/// Features are visited in a random order; the search stops after `mtry`
/// features unless none of them admits a split yet.
fn best_split(x: &Matrix, y: &[u8], rows: &[usize], mtry: usize, rng: &mut SeededRng) -> Option<(usize, f64)> {
    let order = rng.permutation(x.cols());
    let total1 = rows.iter().filter(|&&i| y[i] == 1).count();
    let n = rows.len();
    let mut best: Option<(f64, usize, f64)> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    for (tried, &f) in order.iter().enumerate() {
        if tried >= mtry && best.is_some() {
            break;
        }
        sorted.clear();
        sorted.extend(rows.iter().map(|&i| (x[(i, f)], i)));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut left1 = 0usize;
        for k in 0..n - 1 {
            left1 += usize::from(y[sorted[k].1] == 1);
            let (a, b) = (sorted[k].0, sorted[k + 1].0);
            if a == b {
                continue;
            }
            let nl = k + 1;
            let nr = n - nl;
            let right1 = total1 - left1;
            let score = (nl as f64 * gini(nl - left1, left1) + nr as f64 * gini(nr - right1, right1)) / n as f64;
            if best.map_or(true, |bst| score < bst.0) {
                let mid = 0.5 * (a + b);
                let threshold = if mid < b { mid } else { a };
                best = Some((score, f, threshold));
            }
        }
    }
    best.map(|(_, f, t)| (f, t))
}

impl Tree {
    pub fn vote(&self, row: &[f64]) -> bool {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { counts } => return counts[1] >= counts[0],
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }
}

impl ForestModel {
    pub(super) fn scores(&self, x: &Matrix) -> Vec<f64> {
        let t = self.trees.len() as f64;
        x.row_iter()
            .map(|row| self.trees.iter().filter(|tree| tree.vote(row)).count() as f64 / t)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn gini_examples() {
        assert_eq!(gini_impurity(&[4, 0]).unwrap(), 0.0);
        assert_eq!(gini_impurity(&[2, 2]).unwrap(), 0.5);
        assert_eq!(gini_impurity(&[3, 1]).unwrap(), 0.375);
        assert!(gini_impurity(&[0, 0]).is_err());
    }

    #[test]
    fn single_tree_fits_separable_points() {
        let x = Matrix::from_rows(&[[0.0, 5.0], [1.0, 3.0], [2.0, 1.0], [3.0, 0.0]]).unwrap();
        let y = [0, 0, 1, 1];
        let tree = Tree {
            nodes: build_nodes(&ForestParams::default(), 1, &x, &y, (0..4).collect(), &mut SeededRng::new(1)),
            unique_fraction: 1.0,
        };
        for (row, &label) in x.row_iter().zip(&y) {
            assert_eq!(tree.vote(row), label == 1);
        }
    }

    #[test]
    fn forest_with_full_bootstrap_is_pure() {
        let mut rng = SeededRng::new(3);
        let x = Matrix::from_vec(50, 2, (0..100).map(|_| rng.normal()).collect()).unwrap();
        let y: Vec<u8> = (0..50).map(|_| rng.below(2) as u8).collect();
        let model = fit(&ForestParams::default(), &x, &y, &SeededRng::new(4));
        // every leaf is pure: features are continuous so no ties block a split
        for tree in &model.trees {
            for node in &tree.nodes {
                if let Node::Leaf { counts } = node {
                    assert!(counts[0] == 0 || counts[1] == 0, "{counts:?}");
                }
            }
        }
    }

    #[test]
    fn unanimous_votes_are_exact() {
        let stump = Tree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2 },
                Node::Leaf { counts: [3, 0] },
                Node::Leaf { counts: [0, 3] },
            ],
            unique_fraction: 1.0,
        };
        let model = ForestModel { n_features: 1, trees: vec![stump; 7] };
        let s = model.scores(&Matrix::from_rows(&[[0.0], [1.0]]).unwrap());
        assert_eq!(s, vec![0.0, 1.0]);
    }

    #[test]
    fn bootstrap_unique_fraction() {
        let mut rng = SeededRng::new(6);
        let x = Matrix::from_vec(600, 3, (0..1800).map(|_| rng.normal()).collect()).unwrap();
        let y: Vec<u8> = (0..600).map(|i| (i % 2) as u8).collect();
        let model = fit(&ForestParams { n_trees: 20, ..ForestParams::default() }, &x, &y, &SeededRng::new(7));
        for t in &model.trees {
            assert!((0.55..=0.75).contains(&t.unique_fraction), "{}", t.unique_fraction);
        }
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let mut rng = SeededRng::new(8);
        let x = Matrix::from_vec(80, 3, (0..240).map(|_| rng.normal()).collect()).unwrap();
        let y: Vec<u8> = (0..80).map(|i| (i % 2) as u8).collect();
        let p = ForestParams { n_trees: 12, ..ForestParams::default() };
        let a = fit(&p, &x, &y, &SeededRng::new(9));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| fit(&p, &x, &y, &SeededRng::new(9)));
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn gini_bounds(a in 0usize..1000, b in 0usize..1000) {
            prop_assume!(a + b > 0);
            let g = gini_impurity(&[a, b]).unwrap();
            prop_assert!((0.0..=0.5).contains(&g));
        }
    }
}
