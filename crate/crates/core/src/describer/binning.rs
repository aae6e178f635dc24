//! Discretization of attribute columns into histogram bins.

use serde::{Deserialize, Serialize};

use crate::trace_io::{AttributeKind, AttributeSpec, Value};

/// Value domain of an attribute: numeric bin boundaries or a category alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    BinEdges(Vec<f64>),
    Categories(Vec<String>),
}

impl Support {
    pub fn n_bins(&self) -> usize {
        match self {
            Support::BinEdges(e) => e.len() - 1,
            Support::Categories(c) => c.len(),
        }
    }

    /// Bin of `value`. Numeric values outside the edges land in the boundary
    /// bins; unknown categories yield `None`.
    pub fn locate(&self, value: &Value) -> Option<usize> {
        match (self, value) {
            (Support::BinEdges(edges), Value::Num(v)) => Some(locate_edge(edges, *v)),
            (Support::Categories(alphabet), Value::Cat(s)) => {
                alphabet.binary_search_by(|c| c.as_str().cmp(s)).ok()
            }
            _ => None,
        }
    }
}

/// Bins are `[e_i, e_{i+1})`, except the last which is closed on the right.
pub(crate) fn locate_edge(edges: &[f64], v: f64) -> usize {
    let interior = &edges[1..edges.len() - 1];
    interior.partition_point(|&e| e <= v)
}

/// Result of discretizing one column.
#[derive(Clone, Debug, PartialEq)]
pub struct BinnedColumn {
    pub support: Support,
    pub indices: Vec<usize>,
}

/// Discretizes a non-empty column.
///
/// Numeric kinds use `bins` equal-width bins over `[min, max]`; a column with a
/// single distinct value `v` gets edges `[v, v + 1]`. Categorical columns map
/// each value to its rank in the sorted distinct alphabet.
pub fn bin_attribute(values: &[Value], spec: &AttributeSpec, bins: usize) -> BinnedColumn {
    assert!(!values.is_empty(), "cannot bin an empty column");
    match spec.kind {
        AttributeKind::Categorical => {
            let mut alphabet: Vec<String> = values
                .iter()
                .map(|v| v.as_str().expect("categorical cell").to_owned())
                .collect();
            alphabet.sort();
            alphabet.dedup();
            let support = Support::Categories(alphabet);
            let indices = values
                .iter()
                .map(|v| support.locate(v).expect("value is in its own alphabet"))
                .collect();
            BinnedColumn { support, indices }
        }
        AttributeKind::NumericContinuous | AttributeKind::NumericInteger => {
            let xs: Vec<f64> = values
                .iter()
                .map(|v| v.as_f64().expect("numeric cell"))
                .collect();
            let (lo, hi) = xs
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
            let edges = if lo == hi {
                vec![lo, lo + 1.0]
            } else {
                let bins = bins.max(2);
                let width = (hi - lo) / bins as f64;
                let mut e: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
                e.push(hi);
                e
            };
            let indices = xs.iter().map(|&x| locate_edge(&edges, x)).collect();
            BinnedColumn {
                support: Support::BinEdges(edges),
                indices,
            }
        }
    }
}
