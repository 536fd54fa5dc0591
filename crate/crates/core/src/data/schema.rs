use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DataError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Input,
    Output,
    Meta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    /// Fixed-length numeric vector, stored in CSV as `name_1..name_len`.
    NumericVector(usize),
}

impl ColumnKind {
    pub fn label(&self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::NumericVector(_) => "numeric_vector",
        }
    }

    /// Number of scalar cells (CSV fields) a value of this kind occupies.
    pub fn width(&self) -> usize {
        match self {
            ColumnKind::NumericVector(len) => *len,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawColumn", into = "RawColumn")]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind, role: Role) -> Self {
        ColumnSpec {
            name: name.into(),
            kind,
            role,
        }
    }

    pub fn numeric(name: impl Into<String>, role: Role) -> Self {
        Self::new(name, ColumnKind::Numeric, role)
    }

    pub fn categorical(name: impl Into<String>, role: Role) -> Self {
        Self::new(name, ColumnKind::Categorical, role)
    }

    pub fn vector(name: impl Into<String>, len: usize, role: Role) -> Self {
        Self::new(name, ColumnKind::NumericVector(len), role)
    }

    /// CSV header fields for this column.
    pub fn csv_fields(&self) -> Vec<String> {
        match self.kind {
            ColumnKind::NumericVector(len) => (1..=len).map(|i| format!("{}_{}", self.name, i)).collect(),
            _ => vec![self.name.clone()],
        }
    }
}

/// JSON form: `{"name", "kind", "role", "len"}` with `len` only for vectors.
#[derive(Serialize, Deserialize)]
struct RawColumn {
    name: String,
    kind: String,
    role: Role,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    len: Option<usize>,
}

impl TryFrom<RawColumn> for ColumnSpec {
    type Error = String;

    fn try_from(raw: RawColumn) -> Result<Self, Self::Error> {
        let kind = match (raw.kind.as_str(), raw.len) {
            ("numeric", None) => ColumnKind::Numeric,
            ("categorical", None) => ColumnKind::Categorical,
            ("numeric_vector", Some(len)) => ColumnKind::NumericVector(len),
            ("numeric_vector", None) => return Err(format!("column `{}`: numeric_vector needs `len`", raw.name)),
            (k, Some(_)) if k == "numeric" || k == "categorical" => {
                return Err(format!("column `{}`: `len` only applies to numeric_vector", raw.name))
            }
            (k, _) => return Err(format!("column `{}`: unknown kind `{}`", raw.name, k)),
        };
        Ok(ColumnSpec {
            name: raw.name,
            kind,
            role: raw.role,
        })
    }
}

impl From<ColumnSpec> for RawColumn {
    fn from(c: ColumnSpec) -> Self {
        let len = match c.kind {
            ColumnKind::NumericVector(len) => Some(len),
            _ => None,
        };
        RawColumn {
            name: c.name,
            kind: c.kind.label().to_string(),
            role: c.role,
            len,
        }
    }
}

/// Ordered column declarations of a [`super::RunTable`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchema", into = "RawSchema")]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

#[derive(Serialize, Deserialize)]
struct RawSchema {
    columns: Vec<ColumnSpec>,
}

impl TryFrom<RawSchema> for Schema {
    type Error = DataError;

    fn try_from(raw: RawSchema) -> Result<Self, Self::Error> {
        Schema::new(raw.columns)
    }
}

impl From<Schema> for RawSchema {
    fn from(s: Schema) -> Self {
        RawSchema { columns: s.columns }
    }
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(DataError::InvalidSchema("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(DataError::DuplicateColumn(c.name.clone()));
            }
            if c.kind == ColumnKind::NumericVector(0) {
                return Err(DataError::InvalidSchema(format!(
                    "vector column `{}` must have length >= 1",
                    c.name
                )));
            }
            if c.role == Role::Output && c.kind == ColumnKind::Categorical {
                return Err(DataError::InvalidSchema(format!(
                    "output column `{}` must be numeric",
                    c.name
                )));
            }
        }
        Ok(Schema { columns })
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn with_roles(&self, role: Role) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(move |c| c.role == role)
    }

    /// Scalar feature names of the output block, vectors expanded.
    pub fn output_fields(&self) -> Vec<String> {
        self.with_roles(Role::Output)
            .flat_map(|c| match c.kind {
                ColumnKind::NumericVector(_) => c.csv_fields(),
                _ => vec![c.name.clone()],
            })
            .collect()
    }

    pub(crate) fn push(&mut self, spec: ColumnSpec) -> Result<(), DataError> {
        if self.index_of(&spec.name).is_some() {
            return Err(DataError::ColumnAlreadyPresent(spec.name));
        }
        let mut columns = self.columns.clone();
        columns.push(spec);
        *self = Schema::new(columns)?;
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
