//! Least-squares gradient boosting over shallow regression trees.

use serde::{Deserialize, Serialize};

use super::Prediction;
use crate::error::{Error, Result};
use crate::trace_io::{AttributeKind, TraceDataset, Value};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GbtParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_samples_leaf: 1,
        }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::Domain(format!(
                "learning rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::Domain("min_samples_leaf must be at least 1".into()));
        }
        Ok(())
    }
}

/// Feature as seen at fit time; `categories` is the sorted training alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureInfo {
    pub name: String,
    pub kind: AttributeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTest {
    /// `x <= threshold` goes left.
    Threshold(f64),
    /// `x == category` goes left.
    Category(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        n_samples: usize,
    },
    Split {
        feature: usize,
        #[serde(flatten)]
        test: SplitTest,
        left: usize,
        right: usize,
        /// Side taken by categories never seen during fitting (the larger child).
        default_left: bool,
    },
}

/// Flat node list; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Cell {
    Num(f64),
    /// Index into the feature's training alphabet, `None` if unseen.
    Cat(Option<usize>),
}

impl Tree {
    fn eval(&self, features: &[FeatureInfo], row: &[Cell]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                    default_left,
                } => {
                    let go_left = match (row[*feature], test) {
                        (Cell::Num(x), SplitTest::Threshold(t)) => x <= *t,
                        (Cell::Cat(Some(code)), SplitTest::Category(c)) => features[*feature].categories[code] == *c,
                        _ => *default_left,
                    };
                    at = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn rec(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + rec(nodes, *left).max(rec(nodes, *right)),
            }
        }
        rec(&self.nodes, 0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { value, n_samples } => Some((*value, *n_samples)),
            _ => None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub base_prediction: f64,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub n_trees: usize,
    pub min_samples_leaf: usize,
    pub features: Vec<FeatureInfo>,
    pub trees: Vec<Tree>,
    /// Training RMSE after the base prediction and after each tree.
    pub train_rmse: Vec<f64>,
}

fn encode(features: &[FeatureInfo], data: &TraceDataset) -> Result<Vec<Vec<Cell>>> {
    let schema = data.schema();
    let mut cols = Vec::with_capacity(features.len());
    for f in features {
        let idx = schema
            .index_of(&f.name)
            .filter(|&i| schema.attributes()[i].kind.is_numeric() == f.kind.is_numeric())
            .ok_or_else(|| Error::SchemaMismatch { column: f.name.clone() })?;
        cols.push(idx);
    }
    Ok(data
        .rows()
        .iter()
        .map(|row| {
            features
                .iter()
                .zip(&cols)
                .map(|(f, &i)| match &row[i] {
                    Value::Num(x) => Cell::Num(*x),
                    Value::Cat(s) => Cell::Cat(f.categories.binary_search(s).ok()),
                })
                .collect()
        })
        .collect())
}

struct Builder<'a> {
    features: &'a [FeatureInfo],
    rows: &'a [Vec<Cell>],
    residual: &'a [f64],
    max_depth: usize,
    min_leaf: usize,
    nodes: Vec<Node>,
}

struct Candidate {
    gain: f64,
    feature: usize,
    test: SplitTest,
    n_left: usize,
}

impl Builder<'_> {
    fn build(&mut self, idx: &[usize], depth: usize) -> usize {
        let at = self.nodes.len();
        let n = idx.len();
        let sum: f64 = idx.iter().map(|&i| self.residual[i]).sum();
        self.nodes.push(Node::Leaf {
            value: sum / n as f64,
            n_samples: n,
        });
        if depth >= self.max_depth || n < 2 * self.min_leaf {
            return at;
        }
        let Some(best) = self.best_split(idx, sum) else {
            return at;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| {
            match (self.rows[i][best.feature], &best.test) {
                (Cell::Num(x), SplitTest::Threshold(t)) => x <= *t,
                (Cell::Cat(Some(code)), SplitTest::Category(c)) => self.features[best.feature].categories[code] == *c,
                _ => false,
            }
        });
        debug_assert_eq!(left_idx.len(), best.n_left);
        let left = self.build(&left_idx, depth + 1);
        let right = self.build(&right_idx, depth + 1);
        self.nodes[at] = Node::Split {
            feature: best.feature,
            test: best.test,
            left,
            right,
            default_left: left_idx.len() >= right_idx.len(),
        };
        at
    }

    fn best_split(&self, idx: &[usize], sum: f64) -> Option<Candidate> {
        let n = idx.len();
        let sum_sq: f64 = idx.iter().map(|&i| self.residual[i] * self.residual[i]).sum();
        let parent = sum * sum / n as f64;
        let min_gain = f64::EPSILON * 16.0 * sum_sq;
        let score = |sl: f64, nl: usize| {
            let sr = sum - sl;
            let nr = n - nl;
            sl * sl / nl as f64 + sr * sr / nr as f64 - parent
        };
        let mut best: Option<Candidate> = None;
        let consider = |c: Candidate, best: &mut Option<Candidate>| {
            if c.gain > min_gain && best.as_ref().is_none_or(|b| c.gain > b.gain) {
                *best = Some(c);
            }
        };

        for (f, info) in self.features.iter().enumerate() {
            if info.kind.is_numeric() {
                let mut pairs: Vec<(f64, f64)> = idx
                    .iter()
                    .map(|&i| match self.rows[i][f] {
                        Cell::Num(x) => (x, self.residual[i]),
                        Cell::Cat(_) => unreachable!("numeric feature"),
                    })
                    .collect();
                pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut sl = 0.0;
                for p in 1..n {
                    sl += pairs[p - 1].1;
                    if p < self.min_leaf || n - p < self.min_leaf || pairs[p - 1].0 >= pairs[p].0 {
                        continue;
                    }
                    let (lo, hi) = (pairs[p - 1].0, pairs[p].0);
                    let mut t = lo + (hi - lo) / 2.0;
                    if t >= hi {
                        t = lo;
                    }
                    consider(
                        Candidate {
                            gain: score(sl, p),
                            feature: f,
                            test: SplitTest::Threshold(t),
                            n_left: p,
                        },
                        &mut best,
                    );
                }
            } else {
                let k = info.categories.len();
                let mut sums = vec![0.0; k];
                let mut counts = vec![0usize; k];
                for &i in idx {
                    if let Cell::Cat(Some(c)) = self.rows[i][f] {
                        sums[c] += self.residual[i];
                        counts[c] += 1;
                    }
                }
                for c in 0..k {
                    let nl = counts[c];
                    if nl < self.min_leaf || n - nl < self.min_leaf || nl == 0 || nl == n {
                        continue;
                    }
                    consider(
                        Candidate {
                            gain: score(sums[c], nl),
                            feature: f,
                            test: SplitTest::Category(info.categories[c].clone()),
                            n_left: nl,
                        },
                        &mut best,
                    );
                }
            }
        }
        best
    }
}

fn rmse(residual: &[f64]) -> f64 {
    (residual.iter().map(|r| r * r).sum::<f64>() / residual.len() as f64).sqrt()
}

impl GbtModel {
    /// Least-squares boosting: starts from the target mean and fits each tree
    /// to the current residuals with greedy variance-reduction splits
    /// (numeric thresholds at midpoints of adjacent distinct values,
    /// categorical one-vs-rest). Fitting is deterministic; `_seed` is accepted
    /// for interface symmetry with the other randomized stages.
    pub fn fit(train: &TraceDataset, params: &GbtParams, _seed: u64) -> Result<Self> {
        params.validate()?;
        if train.len() < params.min_samples_leaf {
            return Err(Error::Range(format!(
                "{} training rows cannot satisfy min_samples_leaf = {}",
                train.len(),
                params.min_samples_leaf
            )));
        }
        let schema = train.schema();
        let features: Vec<FeatureInfo> = schema
            .feature_indices()
            .map(|i| {
                let spec = &schema.attributes()[i];
                let mut categories = Vec::new();
                if spec.kind == AttributeKind::Categorical {
                    categories = train.column(i).filter_map(|v| v.as_str().map(str::to_owned)).collect();
                    categories.sort();
                    categories.dedup();
                }
                FeatureInfo {
                    name: spec.name.clone(),
                    kind: spec.kind,
                    categories,
                }
            })
            .collect();
        let rows = encode(&features, train)?;
        let y = train.targets();
        let n = y.len();
        let base = y.iter().sum::<f64>() / n as f64;
        let mut fitted = vec![base; n];
        let mut residual: Vec<f64> = y.iter().map(|t| t - base).collect();
        let mut train_rmse = vec![rmse(&residual)];
        let all: Vec<usize> = (0..n).collect();
        let mut trees = Vec::with_capacity(params.n_trees);

        for _ in 0..params.n_trees {
            let mut builder = Builder {
                features: &features,
                rows: &rows,
                residual: &residual,
                max_depth: params.max_depth,
                min_leaf: params.min_samples_leaf,
                nodes: Vec::new(),
            };
            builder.build(&all, 0);
            let tree = Tree { nodes: builder.nodes };
            for i in 0..n {
                fitted[i] += params.learning_rate * tree.eval(&features, &rows[i]);
                residual[i] = y[i] - fitted[i];
            }
            train_rmse.push(rmse(&residual));
            trees.push(tree);
        }

        let model = Self {
            base_prediction: base,
            learning_rate: params.learning_rate,
            max_depth: params.max_depth,
            n_trees: params.n_trees,
            min_samples_leaf: params.min_samples_leaf,
            features,
            trees,
            train_rmse,
        };
        debug_assert!(model.rmse_non_increasing(), "training RMSE rose: {:?}", model.train_rmse);
        Ok(model)
    }

    pub fn params(&self) -> GbtParams {
        GbtParams {
            n_trees: self.n_trees,
            learning_rate: self.learning_rate,
            max_depth: self.max_depth,
            min_samples_leaf: self.min_samples_leaf,
        }
    }

    fn raw(&self, row: &[Cell]) -> f64 {
        self.base_prediction
            + self.learning_rate * self.trees.iter().map(|t| t.eval(&self.features, row)).sum::<f64>()
    }

    pub fn predict(&self, data: &TraceDataset) -> Result<Vec<Prediction>> {
        Ok(encode(&self.features, data)?
            .iter()
            .map(|r| Prediction::new(self.raw(r)))
            .collect())
    }

    pub fn predict_row(&self, data: &TraceDataset, row: usize) -> Result<Prediction> {
        let one = data.with_rows(vec![data.rows()[row].clone()])?;
        Ok(self.predict(&one)?[0])
    }

    /// Whether per-round training RMSE never increases.
    pub fn rmse_non_increasing(&self) -> bool {
        self.train_rmse
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-12)
    }
}

pub fn fit_gbt(train: &TraceDataset, params: &GbtParams, seed: u64) -> Result<GbtModel> {
    GbtModel::fit(train, params, seed)
}
