use std::collections::BTreeSet;

use ndarray::Array2;

use super::{ColumnKind, ColumnSpec, DataError, Role, Schema};

/// Column storage. Vector columns are row-major, `len` values per row.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
    Vector { len: usize, values: Vec<f64> },
}

impl ColumnData {
    fn rows(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical(v) => v.len(),
            ColumnData::Vector { len, values } => values.len() / (*len).max(1),
        }
    }

    fn kind_label(&self) -> &'static str {
        match self {
            ColumnData::Numeric(_) => "numeric",
            ColumnData::Categorical(_) => "categorical",
            ColumnData::Vector { .. } => "numeric_vector",
        }
    }

    fn take(&self, idx: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric(v) => ColumnData::Numeric(idx.iter().map(|&i| v[i]).collect()),
            ColumnData::Categorical(v) => ColumnData::Categorical(idx.iter().map(|&i| v[i].clone()).collect()),
            ColumnData::Vector { len, values } => ColumnData::Vector {
                len: *len,
                values: idx
                    .iter()
                    .flat_map(|&i| values[i * len..(i + 1) * len].iter().copied())
                    .collect(),
            },
        }
    }
}

/// Validated table of production runs.
///
/// Invariants: at least one row; numeric cells finite; vector cells carry the
/// declared length; categorical cells are non-empty.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTable {
    schema: Schema,
    columns: Vec<ColumnData>,
    n_rows: usize,
}

impl RunTable {
    pub fn new(schema: Schema, columns: Vec<ColumnData>) -> Result<Self, DataError> {
        if columns.len() != schema.columns().len() {
            return Err(DataError::LengthMismatch {
                expected: schema.columns().len(),
                actual: columns.len(),
            });
        }
        let n_rows = columns.first().map(ColumnData::rows).unwrap_or(0);
        if n_rows == 0 {
            return Err(DataError::MissingRows);
        }
        for (spec, data) in schema.columns().iter().zip(&columns) {
            check_column(spec, data, n_rows)?;
        }
        Ok(RunTable {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[ColumnData] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<(&ColumnSpec, &ColumnData), DataError> {
        let i = self
            .schema
            .index_of(name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))?;
        Ok((&self.schema.columns()[i], &self.columns[i]))
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64], DataError> {
        match self.column(name)?.1 {
            ColumnData::Numeric(v) => Ok(v),
            other => Err(wrong_kind(name, "numeric", other)),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[String], DataError> {
        match self.column(name)?.1 {
            ColumnData::Categorical(v) => Ok(v),
            other => Err(wrong_kind(name, "categorical", other)),
        }
    }

    /// Row `row` of a vector column.
    pub fn vector_row(&self, name: &str, row: usize) -> Result<&[f64], DataError> {
        match self.column(name)?.1 {
            ColumnData::Vector { len, values } => Ok(&values[row * len..(row + 1) * len]),
            other => Err(wrong_kind(name, "numeric_vector", other)),
        }
    }

    /// Sorted distinct values observed in a categorical column.
    pub fn vocabulary(&self, name: &str) -> Result<Vec<String>, DataError> {
        let set: BTreeSet<&String> = self.categorical(name)?.iter().collect();
        Ok(set.into_iter().cloned().collect())
    }

    /// The `n × p` block formed by every output-role column, vectors expanded.
    pub fn output_matrix(&self) -> Array2<f64> {
        let fields = self.schema.output_fields();
        let mut out = Array2::zeros((self.n_rows, fields.len()));
        let mut col = 0;
        for (spec, data) in self.schema.columns().iter().zip(&self.columns) {
            if spec.role != Role::Output {
                continue;
            }
            match data {
                ColumnData::Numeric(v) => {
                    for (r, x) in v.iter().enumerate() {
                        out[[r, col]] = *x;
                    }
                    col += 1;
                }
                ColumnData::Vector { len, values } => {
                    for r in 0..self.n_rows {
                        for k in 0..*len {
                            out[[r, col + k]] = values[r * len + k];
                        }
                    }
                    col += len;
                }
                ColumnData::Categorical(_) => unreachable!("schema forbids categorical outputs"),
            }
        }
        out
    }

    /// Numeric matrix of the named scalar numeric columns, in order.
    pub fn numeric_matrix(&self, names: &[String]) -> Result<Array2<f64>, DataError> {
        let mut out = Array2::zeros((self.n_rows, names.len()));
        for (j, name) in names.iter().enumerate() {
            for (r, x) in self.numeric(name)?.iter().enumerate() {
                out[[r, j]] = *x;
            }
        }
        Ok(out)
    }

    /// Sub-table of the given rows, in the given order.
    pub fn take(&self, rows: &[usize]) -> Result<RunTable, DataError> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_rows) {
            return Err(DataError::RowOutOfRange {
                index: bad,
                n: self.n_rows,
            });
        }
        if rows.is_empty() {
            return Err(DataError::MissingRows);
        }
        Ok(RunTable {
            schema: self.schema.clone(),
            columns: self.columns.iter().map(|c| c.take(rows)).collect(),
            n_rows: rows.len(),
        })
    }

    /// Appends a column, rejecting names already present.
    pub fn with_column(mut self, spec: ColumnSpec, data: ColumnData) -> Result<RunTable, DataError> {
        check_column(&spec, &data, self.n_rows)?;
        self.schema.push(spec)?;
        self.columns.push(data);
        Ok(self)
    }
}

fn wrong_kind(name: &str, expected: &'static str, actual: &ColumnData) -> DataError {
    DataError::WrongKind {
        column: name.to_string(),
        expected,
        actual: actual.kind_label(),
    }
}

fn check_column(spec: &ColumnSpec, data: &ColumnData, n_rows: usize) -> Result<(), DataError> {
    let nonfinite = |values: &[f64], width: usize| {
        values
            .iter()
            .position(|x| !x.is_finite())
            .map(|i| DataError::NonFiniteValue {
                row: i / width + 1,
                column: spec.name.clone(),
            })
    };
    match (spec.kind, data) {
        (ColumnKind::Numeric, ColumnData::Numeric(v)) => {
            if v.len() != n_rows {
                return Err(DataError::LengthMismatch {
                    expected: n_rows,
                    actual: v.len(),
                });
            }
            if let Some(e) = nonfinite(v, 1) {
                return Err(e);
            }
        }
        (ColumnKind::Categorical, ColumnData::Categorical(v)) => {
            if v.len() != n_rows {
                return Err(DataError::LengthMismatch {
                    expected: n_rows,
                    actual: v.len(),
                });
            }
            if let Some(i) = v.iter().position(|s| s.is_empty()) {
                return Err(DataError::MissingValue {
                    row: i + 1,
                    column: spec.name.clone(),
                });
            }
        }
        (ColumnKind::NumericVector(len), ColumnData::Vector { len: dlen, values }) => {
            if *dlen != len || values.len() != n_rows * len {
                return Err(DataError::BadVectorLength(spec.name.clone()));
            }
            if let Some(e) = nonfinite(values, len) {
                return Err(e);
            }
        }
        (kind, data) => {
            return Err(DataError::WrongKind {
                column: spec.name.clone(),
                expected: kind.label(),
                actual: data.kind_label(),
            })
        }
    }
    Ok(())
}
