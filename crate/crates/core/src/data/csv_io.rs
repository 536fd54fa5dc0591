use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{ColumnData, ColumnKind, DataError, RunTable, Schema};

/// Reads a comma-separated, UTF-8 file with a header row into a validated table.
///
/// Vector columns are stored as `name_1..name_len`. Extra CSV columns not in
/// the schema are ignored; row order is preserved.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<RunTable, DataError> {
    let file = std::fs::File::open(path)?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<RunTable, DataError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: HashMap<String, usize> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.trim().to_string(), i))
        .collect();

    // Field positions for every schema column.
    let mut positions: Vec<Vec<usize>> = Vec::with_capacity(schema.columns().len());
    for spec in schema.columns() {
        let fields = spec.csv_fields();
        let found: Vec<Option<usize>> = fields.iter().map(|f| header.get(f).copied()).collect();
        if found.iter().all(Option::is_none) {
            return Err(DataError::MissingColumn(spec.name.clone()));
        }
        if let ColumnKind::NumericVector(len) = spec.kind {
            let overflow = format!("{}_{}", spec.name, len + 1);
            if found.iter().any(Option::is_none) || header.contains_key(&overflow) {
                return Err(DataError::BadVectorLength(spec.name.clone()));
            }
        }
        positions.push(found.into_iter().map(Option::unwrap).collect());
    }

    let mut columns: Vec<ColumnData> = schema
        .columns()
        .iter()
        .map(|spec| match spec.kind {
            ColumnKind::Numeric => ColumnData::Numeric(Vec::new()),
            ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
            ColumnKind::NumericVector(len) => ColumnData::Vector {
                len,
                values: Vec::new(),
            },
        })
        .collect();

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row = r + 1;
        for ((spec, pos), data) in schema.columns().iter().zip(&positions).zip(&mut columns) {
            match data {
                ColumnData::Numeric(v) => v.push(parse_number(record.get(pos[0]), row, &spec.name)?),
                ColumnData::Vector { values, .. } => {
                    for &p in pos {
                        values.push(parse_number(record.get(p), row, &spec.name)?);
                    }
                }
                ColumnData::Categorical(v) => {
                    let cell = record.get(pos[0]).unwrap_or("").trim();
                    if cell.is_empty() {
                        return Err(DataError::MissingValue {
                            row,
                            column: spec.name.clone(),
                        });
                    }
                    v.push(cell.to_string());
                }
            }
        }
    }
    RunTable::new(schema.clone(), columns)
}

fn parse_number(cell: Option<&str>, row: usize, column: &str) -> Result<f64, DataError> {
    let cell = cell.unwrap_or("").trim();
    if cell.is_empty() {
        return Err(DataError::MissingValue {
            row,
            column: column.to_string(),
        });
    }
    let x: f64 = cell.parse().map_err(|_| DataError::TypeMismatch {
        row,
        column: column.to_string(),
    })?;
    if !x.is_finite() {
        return Err(DataError::NonFiniteValue {
            row,
            column: column.to_string(),
        });
    }
    Ok(x)
}

/// Writes the table as CSV. Numbers use the shortest representation that
/// parses back to the identical `f64`.
pub fn write_csv<W: Write>(table: &RunTable, writer: W) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let header: Vec<String> = table.schema().columns().iter().flat_map(|c| c.csv_fields()).collect();
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for r in 0..table.n_rows() {
        record.clear();
        for data in table.columns() {
            match data {
                ColumnData::Numeric(v) => record.push(v[r].to_string()),
                ColumnData::Categorical(v) => record.push(v[r].clone()),
                ColumnData::Vector { len, values } => {
                    record.extend(values[r * len..(r + 1) * len].iter().map(f64::to_string))
                }
            }
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}
