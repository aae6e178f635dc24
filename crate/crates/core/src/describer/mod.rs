//! Builds a privacy-preserving statistical summary of a trace dataset:
//! per-attribute histograms, a greedy Bayesian network over the binned
//! attributes, and Laplace-noised conditional tables.

mod binning;
mod mi;
mod network;
mod noise;

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use binning::{bin_attribute, BinnedColumn, Support};
pub use mi::{entropy, joint_configuration, mi_sensitivity, mutual_information};
pub use network::{greedy_bayes, noisy_distributions, BayesNetwork, BinnedTable, Cpt, NetworkStructure};
pub use noise::{distribution_noise_scale, structure_noise_scale, Laplace};

use crate::error::{Error, Result};
use crate::trace_io::{AttributeSpec, TraceDataset};

pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_BINS: usize = 20;
pub const DEFAULT_DEGREE: usize = 1;

/// Privacy budget; `Off` disables all noise.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum Epsilon {
    #[default]
    Off,
    On(f64),
}

impl Epsilon {
    pub fn value(self) -> Option<f64> {
        match self {
            Epsilon::Off => None,
            Epsilon::On(e) => Some(e),
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Epsilon::Off => f.write_str("off"),
            Epsilon::On(e) => write!(f, "{e}"),
        }
    }
}

impl FromStr for Epsilon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("off") {
            return Ok(Epsilon::Off);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| Error::Domain(format!("epsilon must be a positive number or `off`, got `{s}`")))?;
        if v > 0.0 && v.is_finite() {
            Ok(Epsilon::On(v))
        } else {
            Err(Error::Domain(format!("epsilon must be positive, got {v}")))
        }
    }
}

impl Serialize for Epsilon {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Epsilon::Off => s.serialize_str("off"),
            Epsilon::On(e) => s.serialize_f64(*e),
        }
    }
}

impl<'de> Deserialize<'de> for Epsilon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if v > 0.0 && v.is_finite() => Ok(Epsilon::On(v)),
            Raw::Num(v) => Err(serde::de::Error::custom(format!("epsilon must be positive, got {v}"))),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Budget and model-size knobs governing noise injection.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: Epsilon,
    pub degree_k: usize,
    pub bins: usize,
    pub seed: u64,
}

impl Default for PrivacyParams {
    fn default() -> Self {
        Self {
            epsilon: Epsilon::Off,
            degree_k: DEFAULT_DEGREE,
            bins: DEFAULT_BINS,
            seed: 0,
        }
    }
}

impl PrivacyParams {
    pub fn new(epsilon: Epsilon, degree_k: usize, bins: usize, seed: u64) -> Result<Self> {
        let p = Self {
            epsilon,
            degree_k,
            bins,
            seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if let Epsilon::On(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(Error::Domain(format!("epsilon must be positive, got {e}")));
            }
        }
        if self.degree_k < 1 {
            return Err(Error::Domain("network degree must be at least 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::Domain("bin count must be at least 2".into()));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: Epsilon) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Degree clamped to `d - 1` parents.
    pub fn effective_degree(&self, d: usize) -> usize {
        self.degree_k.min(d.saturating_sub(1))
    }
}

/// Binned domain and marginal distribution of one attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeDescriptor {
    #[serde(flatten)]
    pub spec: AttributeSpec,
    #[serde(flatten)]
    pub support: Support,
    pub marginal: Vec<f64>,
}

/// The shareable artifact: descriptors, network, and conditional tables. Holds
/// no raw rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub format_version: u32,
    pub dataset_name: String,
    pub n_rows: usize,
    pub d: usize,
    pub privacy: PrivacyParams,
    pub descriptors: Vec<AttributeDescriptor>,
    pub network: BayesNetwork,
}

impl DataSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }

    /// Parses a summary, rejecting any `format_version` other than the current one.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        match raw.get("format_version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(FORMAT_VERSION) => {}
            Some(v) => {
                return Err(Error::Format(format!(
                    "summary format_version {v} is not supported (expected {FORMAT_VERSION})"
                )))
            }
            None => return Err(Error::Format("summary has no format_version".into())),
        }
        let summary: DataSummary = serde_json::from_value(raw)?;
        summary.check()?;
        Ok(summary)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::io_util::write_atomic(path.as_ref(), self.to_json().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Structural consistency between descriptors and the network.
    pub fn check(&self) -> Result<()> {
        let d = self.descriptors.len();
        let bad = |m: &str| Err(Error::Format(format!("inconsistent summary: {m}")));
        if self.d != d || self.network.order.len() != d || self.network.cpts.len() != d || self.network.parents.len() != d {
            return bad("attribute counts disagree");
        }
        let mut seen = vec![false; d];
        for &i in &self.network.order {
            if i >= d || seen[i] {
                return bad("order is not a permutation");
            }
            for &p in &self.network.parents[i] {
                if p >= d || !seen[p] {
                    return bad("parent does not precede child");
                }
            }
            seen[i] = true;
        }
        for (i, desc) in self.descriptors.iter().enumerate() {
            let card = desc.support.n_bins();
            if card == 0 || desc.marginal.len() != card {
                return bad("marginal length differs from bin count");
            }
            let n_cfg: usize = self.network.parents[i]
                .iter()
                .map(|&p| self.descriptors[p].support.n_bins())
                .product();
            let cpt = &self.network.cpts[i];
            if cpt.rows.len() != n_cfg || cpt.rows.iter().any(|r| r.len() != card) {
                return bad("conditional table shape");
            }
        }
        Ok(())
    }
}

/// Bins the data, learns the network structure, and fills the (noisy)
/// conditional tables. Deterministic for a fixed `privacy.seed`.
pub fn describe(data: &TraceDataset, privacy: &PrivacyParams) -> Result<DataSummary> {
    privacy.validate()?;
    let (table, supports) = BinnedTable::from_dataset(data, privacy.bins);
    let structure = greedy_bayes(&table, privacy)?;
    let (network, marginals) = noisy_distributions(&table, &structure, privacy)?;
    let d = table.d();
    let descriptors = data
        .schema()
        .attributes()
        .iter()
        .zip(supports)
        .zip(marginals)
        .map(|((spec, support), marginal)| AttributeDescriptor {
            spec: spec.clone(),
            support,
            marginal,
        })
        .collect();
    Ok(DataSummary {
        format_version: FORMAT_VERSION,
        dataset_name: data.name().to_string(),
        n_rows: data.len(),
        d,
        privacy: PrivacyParams {
            degree_k: privacy.effective_degree(d),
            ..*privacy
        },
        descriptors,
        network,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_io::{AttributeKind, Schema, Value};

    fn constant_dataset() -> TraceDataset {
        let schema = Schema::new(vec![
            AttributeSpec::feature("machine_type", AttributeKind::Categorical),
            AttributeSpec::feature("instance_count", AttributeKind::NumericInteger),
            AttributeSpec::target("runtime"),
        ])
        .unwrap();
        let row = vec![Value::Cat("m5.xlarge".into()), Value::Num(4.0), Value::Num(33.0)];
        TraceDataset::new("const", schema, vec![row; 6]).unwrap()
    }

    #[test]
    fn epsilon_parsing() {
        assert_eq!("off".parse::<Epsilon>().unwrap(), Epsilon::Off);
        assert_eq!("0.1".parse::<Epsilon>().unwrap(), Epsilon::On(0.1));
        assert!("0".parse::<Epsilon>().is_err());
        assert!("-1".parse::<Epsilon>().is_err());
        assert!("abc".parse::<Epsilon>().is_err());
    }

    #[test]
    fn privacy_validation() {
        assert!(PrivacyParams::new(Epsilon::Off, 0, 20, 0).is_err());
        assert!(PrivacyParams::new(Epsilon::Off, 1, 1, 0).is_err());
        assert!(PrivacyParams::new(Epsilon::On(0.5), 2, 2, 0).is_ok());
        let p = PrivacyParams::default();
        assert_eq!((p.bins, p.degree_k, p.epsilon), (20, 1, Epsilon::Off));
        assert_eq!(p.effective_degree(1), 0);
        assert_eq!(p.effective_degree(3), 1);
    }

    #[test]
    fn degenerate_distributions() {
        for eps in [Epsilon::Off, Epsilon::On(0.1)] {
            let s = describe(&constant_dataset(), &PrivacyParams::default().with_epsilon(eps)).unwrap();
            for desc in &s.descriptors {
                assert_eq!(desc.marginal, vec![1.0]);
            }
            for cpt in &s.network.cpts {
                assert!(cpt.rows.iter().all(|r| r == &vec![1.0]));
            }
        }
    }

    #[test]
    fn summary_json_round_trip_and_version_check() {
        let p = PrivacyParams::new(Epsilon::On(1.0), 1, 20, 3).unwrap();
        let s = describe(&constant_dataset(), &p).unwrap();
        let text = s.to_json();
        assert!(text.contains("\"format_version\": 1"));
        assert!(text.contains("\"epsilon\": 1.0"));
        assert_eq!(DataSummary::from_json(&text).unwrap(), s);
        let bumped = text.replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(DataSummary::from_json(&bumped), Err(Error::Format(_))));
    }

    #[test]
    fn structural_check_rejects_tampering() {
        let s = describe(&constant_dataset(), &PrivacyParams::default()).unwrap();
        let mut bad = s.clone();
        bad.network.order.swap(0, 1);
        bad.network.parents[bad.network.order[0]] = vec![bad.network.order[1]];
        assert!(bad.check().is_err());
        let mut bad = s;
        bad.descriptors[0].marginal.push(0.0);
        assert!(bad.check().is_err());
    }
}
