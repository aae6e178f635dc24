//! Ancestral sampling of synthetic rows from a [`DataSummary`].

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::describer::{AttributeDescriptor, DataSummary, Support, FORMAT_VERSION};
use crate::error::{Error, Result};
use crate::trace_io::{AttributeKind, Role, Schema, TraceDataset, Value};

/// Cumulative form of one probability row.
struct Cumulative {
    cum: Vec<f64>,
    last_positive: usize,
}

impl Cumulative {
    fn new(p: &[f64]) -> Self {
        let mut acc = 0.0;
        let cum = p
            .iter()
            .map(|&v| {
                acc += v;
                acc
            })
            .collect();
        let last_positive = p.iter().rposition(|&v| v > 0.0).unwrap_or(p.len() - 1);
        Self { cum, last_positive }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> usize {
        let total = self.cum[self.cum.len() - 1];
        let u = rng.gen::<f64>() * total;
        self.cum.partition_point(|&c| c <= u).min(self.last_positive)
    }
}

fn emit<R: Rng>(desc: &AttributeDescriptor, bin: usize, rng: &mut R) -> Value {
    match &desc.support {
        Support::Categories(alphabet) => Value::Cat(alphabet[bin].clone()),
        Support::BinEdges(edges) => {
            // A single bin means the column held one distinct value.
            if edges.len() == 2 && desc.marginal.len() == 1 {
                return Value::Num(edges[0]);
            }
            let (lo, hi) = (edges[bin], edges[bin + 1]);
            let last = bin + 2 == edges.len();
            let v = match desc.spec.kind {
                AttributeKind::NumericInteger => {
                    let first = lo.ceil();
                    let end = if last { hi.floor() } else { hi.ceil() - 1.0 };
                    if first <= end {
                        let span = (end - first) as u64 + 1;
                        first + rng.gen_range(0..span) as f64
                    } else {
                        ((lo + hi) / 2.0).round()
                    }
                }
                _ => lo + rng.gen::<f64>() * (hi - lo),
            };
            let v = if desc.spec.role == Role::Target && v <= 0.0 {
                positive_floor(edges)
            } else {
                v
            };
            Value::Num(v)
        }
    }
}

fn positive_floor(edges: &[f64]) -> f64 {
    edges
        .iter()
        .copied()
        .filter(|&e| e > 0.0)
        .reduce(f64::min)
        .unwrap_or(f64::MIN_POSITIVE)
}

/// Samples exactly `n` rows, attribute by attribute in network order, each
/// drawn from the conditional row selected by its already-sampled parents.
/// Numeric values are uniform within the drawn bin (integers over the
/// integers inside it); targets are kept strictly positive.
pub fn sample(summary: &DataSummary, n: usize, seed: u64) -> Result<TraceDataset> {
    if n == 0 {
        return Err(Error::Range("synthetic row count must be at least 1".into()));
    }
    if summary.format_version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "summary format_version {} is not supported (expected {FORMAT_VERSION})",
            summary.format_version
        )));
    }
    summary.check()?;
    let schema = Schema::new(summary.descriptors.iter().map(|d| d.spec.clone()).collect())?;
    let d = summary.d;
    let net = &summary.network;
    let tables: Vec<Vec<Cumulative>> = net
        .cpts
        .iter()
        .map(|cpt| cpt.rows.iter().map(|r| Cumulative::new(r)).collect())
        .collect();
    let cards: Vec<usize> = summary.descriptors.iter().map(|x| x.support.n_bins()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bins = vec![0usize; d];
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = vec![Value::Num(0.0); d];
        for &node in &net.order {
            let cfg = net.parents[node]
                .iter()
                .fold(0usize, |acc, &p| acc * cards[p] + bins[p]);
            let bin = tables[node][cfg].draw(&mut rng);
            bins[node] = bin;
            row[node] = emit(&summary.descriptors[node], bin, &mut rng);
        }
        rows.push(row);
    }
    TraceDataset::new(summary.dataset_name.clone(), schema, rows)
}

/// Bin frequencies of `data`'s column named by `descriptor`, using the
/// descriptor's edges or alphabet. Numeric values outside the edges count
/// toward the boundary bins.
pub fn empirical_marginal(data: &TraceDataset, descriptor: &AttributeDescriptor) -> Result<Vec<f64>> {
    let idx = data
        .schema()
        .index_of(&descriptor.spec.name)
        .ok_or_else(|| Error::SchemaMismatch {
            column: descriptor.spec.name.clone(),
        })?;
    let mut counts = vec![0u64; descriptor.support.n_bins()];
    for (row, v) in data.column(idx).enumerate() {
        let bin = descriptor.support.locate(v).ok_or_else(|| Error::Validation {
            row: row + 1,
            message: format!("`{v}` is outside the domain of `{}`", descriptor.spec.name),
        })?;
        counts[bin] += 1;
    }
    let n = data.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Half the L1 distance between two probability vectors.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions differ in support size");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::describer::{describe, Epsilon, PrivacyParams};
    use crate::trace_io::AttributeSpec;

    fn schema() -> Schema {
        Schema::new(vec![
            AttributeSpec::feature("machine_type", AttributeKind::Categorical),
            AttributeSpec::feature("instance_count", AttributeKind::NumericInteger),
            AttributeSpec::feature("data_size_mb", AttributeKind::NumericContinuous),
            AttributeSpec::target("runtime"),
        ])
        .unwrap()
    }

    fn data() -> TraceDataset {
        let rows = (0..60)
            .map(|i| {
                let m = (i % 6 + 1) * 2;
                let size = 1000.0 + 250.0 * (i % 4) as f64;
                vec![
                    Value::Cat(["c5.xlarge", "m5.xlarge", "r5.xlarge"][i % 3].into()),
                    Value::Num(m as f64),
                    Value::Num(size),
                    Value::Num(20.0 + size / m as f64 * 0.1),
                ]
            })
            .collect();
        TraceDataset::new("demo", schema(), rows).unwrap()
    }

    #[test]
    fn degenerate_machine_type() {
        let rows: Vec<Vec<Value>> = data()
            .rows()
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r[0] = Value::Cat("m5.xlarge".into());
                r
            })
            .collect();
        let d = data().with_rows(rows).unwrap();
        let s = describe(&d, &PrivacyParams::default()).unwrap();
        let syn = sample(&s, 50, 1).unwrap();
        assert_eq!(syn.len(), 50);
        assert!(syn.column(0).all(|v| v == &Value::Cat("m5.xlarge".into())));
    }

    #[test]
    fn values_stay_in_domain() {
        let s = describe(&data(), &PrivacyParams::new(Epsilon::On(0.5), 2, 20, 4).unwrap()).unwrap();
        let syn = sample(&s, 2000, 9).unwrap();
        for (i, desc) in s.descriptors.iter().enumerate() {
            for v in syn.column(i) {
                match (&desc.support, v) {
                    (Support::BinEdges(e), Value::Num(x)) => {
                        assert!(*x >= e[0] && *x <= e[e.len() - 1]);
                        if desc.spec.kind == AttributeKind::NumericInteger {
                            assert_eq!(x.fract(), 0.0);
                        }
                    }
                    (Support::Categories(a), Value::Cat(c)) => assert!(a.contains(c)),
                    _ => panic!("kind mismatch"),
                }
            }
        }
        assert!(syn.targets().iter().all(|&t| t > 0.0));
    }

    #[test]
    fn zero_rows_and_version_mismatch() {
        let mut s = describe(&data(), &PrivacyParams::default()).unwrap();
        assert!(matches!(sample(&s, 0, 1), Err(Error::Range(_))));
        s.format_version = 2;
        assert!(matches!(sample(&s, 5, 1), Err(Error::Format(_))));
    }

    #[test]
    fn self_consistent_marginals() {
        let d = data();
        let s = describe(&d, &PrivacyParams::default()).unwrap();
        for desc in &s.descriptors {
            let m = empirical_marginal(&d, desc).unwrap();
            assert!(total_variation(&m, &desc.marginal) < 1e-9);
        }
        let one = d.with_rows(vec![d.rows()[5].clone()]).unwrap();
        for desc in &s.descriptors {
            let m = empirical_marginal(&one, desc).unwrap();
            assert_eq!(m.iter().filter(|&&p| p == 1.0).count(), 1);
        }
    }

    #[test]
    fn integer_bins_round_inward() {
        let desc = AttributeDescriptor {
            spec: AttributeSpec::feature("m", AttributeKind::NumericInteger),
            support: Support::BinEdges(vec![2.0, 2.5, 3.0, 3.5, 4.0]),
            marginal: vec![0.25; 4],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            assert_eq!(emit(&desc, 0, &mut rng), Value::Num(2.0));
            assert_eq!(emit(&desc, 2, &mut rng), Value::Num(3.0));
            assert_eq!(emit(&desc, 3, &mut rng), Value::Num(4.0));
        }
        // [2.5, 3.0) holds no integer; the midpoint rounds to 3
        assert_eq!(emit(&desc, 1, &mut rng), Value::Num(3.0));
    }

    #[test]
    fn positive_floor_uses_edges() {
        assert_eq!(positive_floor(&[-1.0, 0.0, 0.5, 2.0]), 0.5);
        assert_eq!(positive_floor(&[-1.0, 0.0]), f64::MIN_POSITIVE);
    }
}
