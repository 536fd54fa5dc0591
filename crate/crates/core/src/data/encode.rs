use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{ColumnData, DataError, RunTable};

/// Provenance of a contiguous block of encoded features.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedBlock {
    pub source: String,
    pub start: usize,
    pub len: usize,
}

/// A category seen at transform time that was absent when the encoder was fit.
/// Its one-hot block is left all zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownCategory {
    pub row: usize,
    pub column: String,
    pub value: String,
}

#[derive(Clone, Debug)]
pub struct EncodedMatrix {
    pub values: Array2<f64>,
    pub feature_names: Vec<String>,
    pub encoding_map: Vec<EncodedBlock>,
    pub warnings: Vec<UnknownCategory>,
}

impl EncodedMatrix {
    /// Encoded column indices per source column, for grouped attribution.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        self.encoding_map
            .iter()
            .map(|b| (b.start..b.start + b.len).collect())
            .collect()
    }

    pub fn source_names(&self) -> Vec<String> {
        self.encoding_map.iter().map(|b| b.source.clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum BlockKind {
    Numeric,
    OneHot { categories: Vec<String> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct BlockSpec {
    source: String,
    #[serde(flatten)]
    kind: BlockKind,
}

/// Fitted numeric encoding: numeric columns pass through, categorical columns
/// become one-hot blocks over the sorted training vocabulary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    blocks: Vec<BlockSpec>,
}

impl Encoder {
    pub fn fit(table: &RunTable, selected: &[String]) -> Result<Encoder, DataError> {
        let mut blocks = Vec::with_capacity(selected.len());
        for name in selected {
            let kind = match table.column(name)?.1 {
                ColumnData::Numeric(_) => BlockKind::Numeric,
                ColumnData::Categorical(_) => BlockKind::OneHot {
                    categories: table.vocabulary(name)?,
                },
                ColumnData::Vector { .. } => {
                    return Err(DataError::WrongKind {
                        column: name.clone(),
                        expected: "numeric or categorical",
                        actual: "numeric_vector",
                    })
                }
            };
            blocks.push(BlockSpec {
                source: name.clone(),
                kind,
            });
        }
        Ok(Encoder { blocks })
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.blocks
            .iter()
            .flat_map(|b| match &b.kind {
                BlockKind::Numeric => vec![b.source.clone()],
                BlockKind::OneHot { categories } => categories.iter().map(|c| format!("{}={}", b.source, c)).collect(),
            })
            .collect()
    }

    pub fn width(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| match &b.kind {
                BlockKind::Numeric => 1,
                BlockKind::OneHot { categories } => categories.len(),
            })
            .sum()
    }

    pub fn transform(&self, table: &RunTable) -> Result<EncodedMatrix, DataError> {
        let n = table.n_rows();
        let mut values = Array2::zeros((n, self.width()));
        let mut encoding_map = Vec::with_capacity(self.blocks.len());
        let mut warnings = Vec::new();
        let mut start = 0;
        for block in &self.blocks {
            let len = match &block.kind {
                BlockKind::Numeric => {
                    for (r, x) in table.numeric(&block.source)?.iter().enumerate() {
                        values[[r, start]] = *x;
                    }
                    1
                }
                BlockKind::OneHot { categories } => {
                    for (r, v) in table.categorical(&block.source)?.iter().enumerate() {
                        match categories.binary_search(v) {
                            Ok(k) => values[[r, start + k]] = 1.0,
                            Err(_) => warnings.push(UnknownCategory {
                                row: r,
                                column: block.source.clone(),
                                value: v.clone(),
                            }),
                        }
                    }
                    categories.len()
                }
            };
            encoding_map.push(EncodedBlock {
                source: block.source.clone(),
                start,
                len,
            });
            start += len;
        }
        Ok(EncodedMatrix {
            values,
            feature_names: self.feature_names(),
            encoding_map,
            warnings,
        })
    }
}

/// Fits an encoder on `table` and transforms it.
pub fn encode(table: &RunTable, selected_inputs: &[String]) -> Result<EncodedMatrix, DataError> {
    Encoder::fit(table, selected_inputs)?.transform(table)
}
