use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttributeKind {
    NumericContinuous,
    NumericInteger,
    Categorical,
}

impl AttributeKind {
    pub fn is_numeric(self) -> bool {
        !matches!(self, AttributeKind::Categorical)
    }
}

impl fmt::Display for AttributeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttributeKind::NumericContinuous => "numeric-continuous",
            AttributeKind::NumericInteger => "numeric-integer",
            AttributeKind::Categorical => "categorical",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Feature,
    Target,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    pub role: Role,
}

impl AttributeSpec {
    pub fn new(name: impl Into<String>, kind: AttributeKind, role: Role) -> Self {
        Self {
            name: name.into(),
            kind,
            role,
        }
    }

    pub fn feature(name: impl Into<String>, kind: AttributeKind) -> Self {
        Self::new(name, kind, Role::Feature)
    }

    pub fn target(name: impl Into<String>) -> Self {
        Self::new(name, AttributeKind::NumericContinuous, Role::Target)
    }
}

/// Names the two features an Ernest-style model consumes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ErnestColumns {
    pub scale: String,
    pub machines: String,
}

/// Ordered attribute list with exactly one numeric target.
///
/// On disk a schema is a JSON document:
///
/// ```json
/// {
///   "attributes": [
///     { "name": "machine_type", "kind": "categorical", "role": "feature" },
///     { "name": "instance_count", "kind": "numeric-integer", "role": "feature" },
///     { "name": "runtime", "kind": "numeric-continuous", "role": "target" }
///   ],
///   "ernest": { "scale": "data_size_mb", "machines": "instance_count" }
/// }
/// ```
///
/// The `ernest` block is optional.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    attributes: Vec<AttributeSpec>,
    ernest: Option<ErnestColumns>,
    target: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchema {
    attributes: Vec<AttributeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ernest: Option<ErnestColumns>,
}

impl TryFrom<RawSchema> for Schema {
    type Error = Error;

    fn try_from(raw: RawSchema) -> Result<Self> {
        let schema = Schema::new(raw.attributes)?;
        match raw.ernest {
            Some(cols) => schema.with_ernest(cols.scale, cols.machines),
            None => Ok(schema),
        }
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema {
            attributes: s.attributes,
            ernest: s.ernest,
        }
    }
}

impl Schema {
    pub fn new(attributes: Vec<AttributeSpec>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::EmptySchema);
        }
        for (i, a) in attributes.iter().enumerate() {
            if a.name.trim().is_empty() {
                return Err(Error::InvalidSchema(format!("attribute {i} has an empty name")));
            }
            if attributes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidSchema(format!("duplicate attribute `{}`", a.name)));
            }
        }
        let targets: Vec<usize> = attributes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.role == Role::Target)
            .map(|(i, _)| i)
            .collect();
        let target = match targets.as_slice() {
            [t] => *t,
            [] => return Err(Error::InvalidSchema("no target attribute".into())),
            _ => return Err(Error::InvalidSchema("more than one target attribute".into())),
        };
        if !attributes[target].kind.is_numeric() {
            return Err(Error::InvalidSchema(format!(
                "target `{}` must be numeric",
                attributes[target].name
            )));
        }
        Ok(Self {
            attributes,
            ernest: None,
            target,
        })
    }

    pub fn with_ernest(mut self, scale: impl Into<String>, machines: impl Into<String>) -> Result<Self> {
        let cols = ErnestColumns {
            scale: scale.into(),
            machines: machines.into(),
        };
        for name in [&cols.scale, &cols.machines] {
            match self.index_of(name) {
                Some(i) if self.attributes[i].role == Role::Feature && self.attributes[i].kind.is_numeric() => {}
                _ => {
                    return Err(Error::InvalidSchema(format!(
                        "ernest column `{name}` must be a numeric feature of the schema"
                    )))
                }
            }
        }
        self.ernest = Some(cols);
        Ok(self)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let bytes = Sha256::digest(self.to_json().as_bytes());
        bytes.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn attributes(&self) -> &[AttributeSpec] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn target_index(&self) -> usize {
        self.target
    }

    pub fn target(&self) -> &AttributeSpec {
        &self.attributes[self.target]
    }

    pub fn feature_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.attributes.len()).filter(move |&i| i != self.target)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn ernest(&self) -> Option<&ErnestColumns> {
        self.ernest.as_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sort_schema() -> Schema {
        Schema::new(vec![
            AttributeSpec::feature("machine_type", AttributeKind::Categorical),
            AttributeSpec::feature("instance_count", AttributeKind::NumericInteger),
            AttributeSpec::feature("data_size_mb", AttributeKind::NumericContinuous),
            AttributeSpec::target("runtime"),
        ])
        .unwrap()
        .with_ernest("data_size_mb", "instance_count")
        .unwrap()
    }

    #[test]
    fn json_round_trip() {
        let s = sort_schema();
        let back = Schema::from_json(&s.to_json()).unwrap();
        assert_eq!(s, back);
        assert_eq!(back.target_index(), 3);
        assert_eq!(s.digest(), back.digest());
    }

    #[test]
    fn rejects_two_targets() {
        let err = Schema::new(vec![AttributeSpec::target("a"), AttributeSpec::target("b")]).unwrap_err();
        assert!(matches!(err, Error::InvalidSchema(_)));
    }

    #[test]
    fn rejects_categorical_target() {
        let err = Schema::new(vec![AttributeSpec::new("a", AttributeKind::Categorical, Role::Target)]).unwrap_err();
        assert!(matches!(err, Error::InvalidSchema(_)));
    }

    #[test]
    fn rejects_duplicate_and_empty_names() {
        let dup = Schema::new(vec![
            AttributeSpec::feature("x", AttributeKind::NumericContinuous),
            AttributeSpec::target("x"),
        ]);
        assert!(dup.is_err());
        let empty = Schema::new(vec![AttributeSpec::feature(" ", AttributeKind::NumericContinuous)]);
        assert!(empty.is_err());
        assert!(matches!(Schema::new(vec![]), Err(Error::EmptySchema)));
    }

    #[test]
    fn ernest_columns_must_exist() {
        let s = Schema::new(vec![
            AttributeSpec::feature("m", AttributeKind::NumericInteger),
            AttributeSpec::target("runtime"),
        ])
        .unwrap();
        assert!(s.clone().with_ernest("size", "m").is_err());
        assert!(s.with_ernest("runtime", "m").is_err());
    }

    #[test]
    fn unknown_kind_is_rejected() {
        let text = r#"{"attributes":[{"name":"a","kind":"datetime","role":"target"}]}"#;
        assert!(Schema::from_json(text).is_err());
    }
}
