//! CART regression trees and bootstrap-aggregated random forests.
//!
//! Split search looks at every midpoint between consecutive distinct values
//! of each candidate feature and keeps the split with the smallest summed
//! child squared error. Rows are ordered by `(feature value, target)` before
//! prefix sums are taken, so a node's split and leaf value depend only on the
//! multiset of its rows and not on their input order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, domain, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    #[default]
    All,
    Sqrt,
    Count(usize),
}

impl MaxFeatures {
    pub fn resolve(self, n_features: usize) -> usize {
        let k = match self {
            MaxFeatures::All => n_features,
            MaxFeatures::Sqrt => (n_features as f64).sqrt().floor() as usize,
            MaxFeatures::Count(k) => k,
        };
        k.clamp(1, n_features.max(1))
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(MaxFeatures::All),
            "sqrt" => Ok(MaxFeatures::Sqrt),
            n => n
                .parse()
                .ok()
                .filter(|&k| k > 0)
                .map(MaxFeatures::Count)
                .ok_or_else(|| Error::InvalidHyper(format!("max_features `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestHyper {
    pub n_trees: usize,
    /// `None` grows trees until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestHyper {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_leaf: 1,
            min_samples_split: 2,
            max_features: MaxFeatures::All,
            bootstrap: true,
            seed: 0,
        }
    }
}

impl ForestHyper {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::InvalidHyper("n_trees must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidHyper("max_depth must be positive".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidHyper("min_samples_leaf must be at least 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::InvalidHyper("min_samples_split must be at least 2".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Node {
    Leaf { value: f64, samples: usize },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

/// A regression tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[feature] <= threshold { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    pub fn leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    sse: f64,
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [f64],
    hyper: &'a ForestHyper,
    n_candidates: usize,
    nodes: Vec<Node>,
    /// Scratch flags marking rows that go left, indexed by row id.
    goes_left: Vec<bool>,
}

/// Mean of the node targets, summed in sorted order and clamped to their range.
fn leaf_value(y: &[f64], rows: &[usize]) -> f64 {
    let mut vals: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    vals.sort_by(f64::total_cmp);
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    mean.clamp(vals[0], vals[vals.len() - 1])
}

impl Builder<'_> {
    /// `sorted[f]` lists the node's rows (with bootstrap repeats) ordered by
    /// `(x[f], y)`.
    fn grow(&mut self, sorted: Vec<Vec<usize>>, depth: usize, rng: &mut StreamRng) -> usize {
        let id = self.nodes.len();
        let rows = &sorted[0];
        self.nodes.push(Node::Leaf { value: leaf_value(self.y, rows), samples: rows.len() });

        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&i| self.y[i] == first);
        let depth_ok = self.hyper.max_depth.is_none_or(|d| depth < d);
        if pure
            || !depth_ok
            || rows.len() < self.hyper.min_samples_split
            || rows.len() < 2 * self.hyper.min_samples_leaf
        {
            return id;
        }
        let Some(split) = self.best_split(&sorted, rng) else {
            return id;
        };
        for &i in &sorted[0] {
            self.goes_left[i] = self.x[i][split.feature] <= split.threshold;
        }
        let (left, right): (Vec<Vec<usize>>, Vec<Vec<usize>>) =
            sorted.into_iter().map(|order| order.into_iter().partition(|&i| self.goes_left[i])).unzip();
        let left = self.grow(left, depth + 1, rng);
        let right = self.grow(right, depth + 1, rng);
        self.nodes[id] = Node::Split { feature: split.feature, threshold: split.threshold, left, right };
        id
    }

    fn candidate_features(&self, rng: &mut StreamRng) -> Vec<usize> {
        let p = self.x[0].len();
        let mut features: Vec<usize> = (0..p).collect();
        if self.n_candidates < p {
            // Partial Fisher-Yates: first n_candidates slots become the sample.
            for i in 0..self.n_candidates {
                let j = i + rng::below(rng, p - i);
                features.swap(i, j);
            }
            features.truncate(self.n_candidates);
            features.sort_unstable();
        }
        features
    }

    fn best_split(&self, sorted: &[Vec<usize>], rng: &mut StreamRng) -> Option<SplitChoice> {
        let min_leaf = self.hyper.min_samples_leaf;
        let mut best: Option<SplitChoice> = None;
        for feature in self.candidate_features(rng) {
            let order = &sorted[feature];
            let n = order.len();
            let total: f64 = order.iter().map(|&i| self.y[i]).sum();
            let total_sq: f64 = order.iter().map(|&i| self.y[i] * self.y[i]).sum();
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for pos in 0..n - 1 {
                let yi = self.y[order[pos]];
                sum += yi;
                sum_sq += yi * yi;
                let n_left = pos + 1;
                let n_right = n - n_left;
                let here = self.x[order[pos]][feature];
                let next = self.x[order[pos + 1]][feature];
                if here == next || n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let sse_left = (sum_sq - sum * sum / n_left as f64).max(0.0);
                let (rs, rss) = (total - sum, total_sq - sum_sq);
                let sse_right = (rss - rs * rs / n_right as f64).max(0.0);
                let sse = sse_left + sse_right;
                // Strict comparison keeps the lowest feature, then the lowest threshold.
                if best.as_ref().is_none_or(|b| sse < b.sse) {
                    let mut threshold = here + (next - here) / 2.0;
                    if threshold >= next {
                        threshold = here;
                    }
                    best = Some(SplitChoice { feature, threshold, sse });
                }
            }
        }
        best
    }
}

fn check_design(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyInput);
    }
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} rows vs {} targets", x.len(), y.len())));
    }
    let p = x[0].len();
    if p == 0 {
        return Err(Error::DimensionMismatch("no features".into()));
    }
    if x.iter().any(|r| r.len() != p) {
        return Err(Error::DimensionMismatch("ragged feature rows".into()));
    }
    if x.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::DimensionMismatch("non-finite value in input".into()));
    }
    Ok(p)
}

/// Grows one tree on all given rows.
pub fn fit_tree(x: &[Vec<f64>], y: &[f64], hyper: &ForestHyper, rng: &mut StreamRng) -> Result<Tree> {
    let p = check_design(x, y)?;
    hyper.validate()?;
    Ok(grow_tree(x, y, hyper, p, (0..y.len()).collect(), rng))
}

fn grow_tree(x: &[Vec<f64>], y: &[f64], hyper: &ForestHyper, p: usize, rows: Vec<usize>, rng: &mut StreamRng) -> Tree {
    let sorted = (0..p)
        .map(|f| {
            let mut order = rows.clone();
            order.sort_by(|&a, &b| x[a][f].total_cmp(&x[b][f]).then(y[a].total_cmp(&y[b])));
            order
        })
        .collect();
    let mut builder = Builder {
        x,
        y,
        hyper,
        n_candidates: hyper.max_features.resolve(p),
        nodes: Vec::new(),
        goes_left: vec![false; y.len()],
    };
    builder.grow(sorted, 0, rng);
    Tree { nodes: builder.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub hyper: ForestHyper,
    pub feature_names: Vec<String>,
    pub trees: Vec<Tree>,
}

/// Trains `hyper.n_trees` trees; tree `i` draws from stream `(seed, i)`.
pub fn fit_forest(x: &[Vec<f64>], y: &[f64], hyper: &ForestHyper) -> Result<ForestModel> {
    let p = check_design(x, y)?;
    hyper.validate()?;
    let n = y.len();
    let trees = (0..hyper.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(hyper.seed, domain::TREE, i as u64);
            let rows: Vec<usize> =
                if hyper.bootstrap { (0..n).map(|_| rng::below(&mut rng, n)).collect() } else { (0..n).collect() };
            grow_tree(x, y, hyper, p, rows, &mut rng)
        })
        .collect();
    Ok(ForestModel { hyper: hyper.clone(), feature_names: (0..p).map(|j| format!("x{j}")).collect(), trees })
}

impl ForestModel {
    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.feature_names.len());
        self.feature_names = names;
        self
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for tree in &self.trees {
            let v = tree.predict_row(row);
            lo = lo.min(v);
            hi = hi.max(v);
            sum += v;
        }
        (sum / self.trees.len() as f64).clamp(lo, hi)
    }

    /// Mean of per-tree predictions for every row.
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<f64>> {
        if let Some(row) = x.iter().find(|r| r.len() != self.n_features()) {
            return Err(Error::FeatureCountMismatch { expected: self.n_features(), found: row.len() });
        }
        Ok(x.par_iter().map(|row| self.predict_row(row)).collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest models always serialize") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}
