//! Plug-in information measures on discretized columns.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const DENSE_LIMIT: usize = 1 << 16;

/// Joint cell counts `(x, y) -> count` visited in ascending `(x, y)` order.
fn joint_counts(x: &[usize], y: &[usize], nx: usize, ny: usize) -> Vec<((usize, usize), u64)> {
    if nx.saturating_mul(ny) <= DENSE_LIMIT {
        let mut table = vec![0u64; nx * ny];
        for (&a, &b) in x.iter().zip(y) {
            table[a * ny + b] += 1;
        }
        table
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(i, c)| ((i / ny, i % ny), c))
            .collect()
    } else {
        let mut map: HashMap<(usize, usize), u64> = HashMap::new();
        for (&a, &b) in x.iter().zip(y) {
            *map.entry((a, b)).or_default() += 1;
        }
        let mut cells: Vec<_> = map.into_iter().collect();
        cells.sort_unstable();
        cells
    }
}

fn counts(x: &[usize], n: usize) -> Vec<u64> {
    let mut c = vec![0u64; n];
    for &v in x {
        c[v] += 1;
    }
    c
}

/// Plug-in estimate of `I(X; Y)` in nats from paired bin indices.
pub fn mutual_information<T: Scalar>(x: &[usize], y: &[usize]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::Shape(format!(
            "index columns differ in length: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(Error::Shape("index columns are empty".into()));
    }
    let nx = x.iter().max().map_or(0, |m| m + 1);
    let ny = y.iter().max().map_or(0, |m| m + 1);
    let cx = counts(x, nx);
    let cy = counts(y, ny);
    let n = T::of_usize(x.len());
    let mut total = T::zero();
    for ((a, b), c) in joint_counts(x, y, nx, ny) {
        let c = T::of(c as f64);
        let ratio = c * n / (T::of(cx[a] as f64) * T::of(cy[b] as f64));
        total += c / n * ratio.ln();
    }
    Ok(total.max(T::zero()))
}

/// Plug-in entropy in nats.
pub fn entropy<T: Scalar>(x: &[usize]) -> T {
    let nx = x.iter().max().map_or(0, |m| m + 1);
    let n = T::of_usize(x.len());
    counts(x, nx)
        .into_iter()
        .filter(|&c| c > 0)
        .map(|c| {
            let p = T::of(c as f64) / n;
            -p * p.ln()
        })
        .sum()
}

/// Encodes the joint configuration of several index columns as one mixed-radix
/// index; the first column is the most significant digit.
pub fn joint_configuration(columns: &[&[usize]], radices: &[usize]) -> Vec<usize> {
    debug_assert_eq!(columns.len(), radices.len());
    let n = columns.first().map_or(0, |c| c.len());
    let mut codes = vec![0usize; n];
    for (col, &radix) in columns.iter().zip(radices) {
        for (code, &v) in codes.iter_mut().zip(col.iter()) {
            *code = *code * radix + v;
        }
    }
    codes
}

/// Upper bound on how much one record can move the plug-in MI estimate over
/// `n` records: `(1/n) ln n + ((n-1)/n) ln(n/(n-1))`.
pub fn mi_sensitivity<T: Scalar>(n: usize) -> T {
    if n <= 1 {
        return T::zero();
    }
    let nf = T::of_usize(n);
    let m = nf - T::one();
    nf.ln() / nf + m / nf * (nf / m).ln()
}
