//! Greedy Bayesian-network structure learning and noisy conditional tables.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::binning::{bin_attribute, Support};
use super::mi::{joint_configuration, mutual_information};
use super::noise::{distribution_noise_scale, structure_noise_scale, Laplace};
use super::{Epsilon, PrivacyParams};
use crate::error::{Error, Result};
use crate::trace_io::TraceDataset;

const STRUCTURE_STREAM: u64 = 0;
const DISTRIBUTION_STREAM: u64 = 1;

pub(crate) fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Column-major bin indices of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedTable {
    columns: Vec<Vec<usize>>,
    cards: Vec<usize>,
    n: usize,
}

impl BinnedTable {
    /// `cards[i]` is the number of bins of attribute `i`; every index must be below it.
    pub fn new(columns: Vec<Vec<usize>>, cards: Vec<usize>) -> Result<Self> {
        if columns.len() != cards.len() {
            return Err(Error::Shape("one cardinality per column required".into()));
        }
        let n = columns.first().map_or(0, Vec::len);
        for (c, &card) in columns.iter().zip(&cards) {
            if c.len() != n {
                return Err(Error::Shape("columns differ in length".into()));
            }
            if c.iter().any(|&v| v >= card) {
                return Err(Error::Range("bin index exceeds cardinality".into()));
            }
        }
        if n == 0 && !columns.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { columns, cards, n })
    }

    /// Bins every attribute of `data`, returning the table and the per-attribute supports.
    pub fn from_dataset(data: &TraceDataset, bins: usize) -> (Self, Vec<Support>) {
        let mut columns = Vec::with_capacity(data.schema().len());
        let mut supports = Vec::with_capacity(data.schema().len());
        for (i, spec) in data.schema().attributes().iter().enumerate() {
            let values: Vec<_> = data.column(i).cloned().collect();
            let binned = bin_attribute(&values, spec, bins);
            columns.push(binned.indices);
            supports.push(binned.support);
        }
        let cards = supports.iter().map(Support::n_bins).collect();
        (
            Self {
                columns,
                cards,
                n: data.len(),
            },
            supports,
        )
    }

    pub fn d(&self) -> usize {
        self.columns.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn column(&self, i: usize) -> &[usize] {
        &self.columns[i]
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    fn parent_codes(&self, parents: &[usize]) -> (Vec<usize>, usize) {
        if parents.is_empty() {
            return (vec![0; self.n], 1);
        }
        let cols: Vec<&[usize]> = parents.iter().map(|&p| self.column(p)).collect();
        let radices: Vec<usize> = parents.iter().map(|&p| self.cards[p]).collect();
        (joint_configuration(&cols, &radices), radices.iter().product())
    }
}

/// Construction order plus parent sets; `parents[i]` lists attribute indices
/// in ascending order, all placed before `i` in `order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStructure {
    pub order: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
}

/// Conditional probability table: one probability row per parent configuration,
/// indexed mixed-radix with the first listed parent most significant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cpt {
    pub rows: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesNetwork {
    pub order: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub cpts: Vec<Cpt>,
}

impl BayesNetwork {
    pub fn structure(&self) -> NetworkStructure {
        NetworkStructure {
            order: self.order.clone(),
            parents: self.parents.clone(),
        }
    }
}

fn combinations(items: &[usize], r: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], r: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < r - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, r, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, r, 0, &mut Vec::with_capacity(r), &mut out);
    out
}

/// Greedy structure search.
///
/// The root is the attribute with the largest summed pairwise MI. Each further
/// step scores every (unplaced attribute, parent set of size
/// `min(k, placed)`) pair by the MI between the attribute and the joint parent
/// configuration and takes the best. With a privacy budget each score gets
/// Laplace noise (noisy max over `ε/2`). Ties go to the lower schema index,
/// then the lexicographically smaller parent set.
pub fn greedy_bayes(table: &BinnedTable, privacy: &PrivacyParams) -> Result<NetworkStructure> {
    let d = table.d();
    if d == 0 {
        return Err(Error::EmptySchema);
    }
    let k = privacy.effective_degree(d);
    let mut rng = rng_stream(privacy.seed, STRUCTURE_STREAM);
    let noise = match privacy.epsilon {
        Epsilon::Off => None,
        Epsilon::On(eps) => Some(Laplace::new(structure_noise_scale(d, table.n(), eps / 2.0))),
    };
    let mut perturb = |score: f64| match &noise {
        Some(lap) => score + lap.sample(&mut rng),
        None => score,
    };

    let mut pairwise = vec![vec![0.0f64; d]; d];
    for i in 0..d {
        for j in (i + 1)..d {
            let mi = mutual_information::<f64>(table.column(i), table.column(j))?;
            pairwise[i][j] = mi;
            pairwise[j][i] = mi;
        }
    }

    let mut root = 0;
    let mut root_score = f64::NEG_INFINITY;
    for (i, row) in pairwise.iter().enumerate() {
        let s = perturb(row.iter().sum());
        if s > root_score {
            root = i;
            root_score = s;
        }
    }

    let mut order = vec![root];
    let mut placed = vec![false; d];
    placed[root] = true;
    let mut parents = vec![Vec::new(); d];

    while order.len() < d {
        let mut sorted_placed = order.clone();
        sorted_placed.sort_unstable();
        let size = k.min(sorted_placed.len());
        let candidates = combinations(&sorted_placed, size);
        let mut best: Option<(usize, usize, f64)> = None;
        for x in (0..d).filter(|&x| !placed[x]) {
            for (ci, combo) in candidates.iter().enumerate() {
                let mi = if combo.len() == 1 {
                    pairwise[x][combo[0]]
                } else {
                    let (codes, _) = table.parent_codes(combo);
                    mutual_information::<f64>(table.column(x), &codes)?
                };
                let s = perturb(mi);
                if best.is_none_or(|(_, _, b)| s > b) {
                    best = Some((x, ci, s));
                }
            }
        }
        let (x, ci, _) = best.expect("at least one candidate remains");
        placed[x] = true;
        order.push(x);
        parents[x] = candidates[ci].clone();
    }
    Ok(NetworkStructure { order, parents })
}

/// Fills conditional tables for `structure` and returns the network together
/// with each attribute's (noisy) marginal.
///
/// With a budget, Laplace noise of scale `4 (d - k) / (n ε/2)` is added to every
/// normalized joint cell over (parents, node); cells are clamped at zero and
/// renormalized. Parent configurations with no mass fall back to the node
/// marginal.
pub fn noisy_distributions(
    table: &BinnedTable,
    structure: &NetworkStructure,
    privacy: &PrivacyParams,
) -> Result<(BayesNetwork, Vec<Vec<f64>>)> {
    let d = table.d();
    if structure.order.len() != d || structure.parents.len() != d {
        return Err(Error::Shape("structure does not match the table".into()));
    }
    let k = privacy.effective_degree(d);
    let n = table.n();
    let mut rng = rng_stream(privacy.seed, DISTRIBUTION_STREAM);
    let noise = match privacy.epsilon {
        Epsilon::Off => None,
        Epsilon::On(eps) => Some(Laplace::new(distribution_noise_scale(d, k, n, eps / 2.0))),
    };

    let mut cpts = vec![Cpt { rows: Vec::new() }; d];
    let mut marginals = vec![Vec::new(); d];
    for &node in &structure.order {
        let card = table.cards()[node];
        let (codes, n_cfg) = table.parent_codes(&structure.parents[node]);
        let mut counts = vec![0u64; n_cfg * card];
        for (&cfg, &v) in codes.iter().zip(table.column(node)) {
            counts[cfg * card + v] += 1;
        }

        let (joint, marginal) = match &noise {
            None => {
                let mut m = vec![0u64; card];
                for (i, &c) in counts.iter().enumerate() {
                    m[i % card] += c;
                }
                let marginal: Vec<f64> = m.iter().map(|&c| c as f64 / n as f64).collect();
                let joint: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
                (joint, marginal)
            }
            Some(lap) => {
                let mut joint: Vec<f64> = counts
                    .iter()
                    .map(|&c| (c as f64 / n as f64 + lap.sample(&mut rng)).max(0.0))
                    .collect();
                let total: f64 = joint.iter().sum();
                if total > 0.0 {
                    joint.iter_mut().for_each(|v| *v /= total);
                } else {
                    let u = 1.0 / joint.len() as f64;
                    joint.iter_mut().for_each(|v| *v = u);
                }
                let mut marginal = vec![0.0; card];
                for (i, &v) in joint.iter().enumerate() {
                    marginal[i % card] += v;
                }
                normalize(&mut marginal);
                (joint, marginal)
            }
        };

        let rows = joint
            .chunks(card)
            .map(|row| {
                let mass: f64 = row.iter().sum();
                if mass > 0.0 {
                    let mut r: Vec<f64> = row.iter().map(|v| v / mass).collect();
                    normalize(&mut r);
                    r
                } else {
                    marginal.clone()
                }
            })
            .collect();
        cpts[node] = Cpt { rows };
        marginals[node] = marginal;
    }

    Ok((
        BayesNetwork {
            order: structure.order.clone(),
            parents: structure.parents.clone(),
            cpts,
        },
        marginals,
    ))
}

fn normalize(p: &mut [f64]) {
    let s: f64 = p.iter().sum();
    if s > 0.0 && s != 1.0 {
        p.iter_mut().for_each(|v| *v /= s);
    }
}
