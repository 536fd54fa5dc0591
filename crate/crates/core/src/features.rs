//! Engineered surface-area features of a run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{ColumnData, ColumnSpec, DataError, Role, RunTable};
use crate::Scalar;

pub const TOTAL_COLUMN: &str = "surface_area_total";
pub const STD_COLUMN: &str = "surface_area_std";
pub const DIFF_COLUMN: &str = "surf_area_diff";

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("per-disk area list is empty")]
    EmptyDiskList,
    #[error("missing source column `{0}`")]
    MissingSourceColumn(String),
    #[error("column `{0}` is already present")]
    ColumnAlreadyPresent(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineeredFeatures<F> {
    pub total_surface_area: F,
    /// Population standard deviation over the disks of the run.
    pub surface_area_std: F,
    /// `|nominal - total|`.
    pub surface_area_diff: F,
}

pub fn engineer<F: Scalar>(per_disk_areas: &[F], nominal_area: F) -> Result<EngineeredFeatures<F>, FeatureError> {
    if per_disk_areas.is_empty() {
        return Err(FeatureError::EmptyDiskList);
    }
    let n = F::of_usize(per_disk_areas.len());
    let total: F = per_disk_areas.iter().copied().sum();
    let mean = total / n;
    let var = per_disk_areas.iter().map(|&a| (a - mean) * (a - mean)).sum::<F>() / n;
    Ok(EngineeredFeatures {
        total_surface_area: total,
        surface_area_std: var.sqrt(),
        surface_area_diff: (nominal_area - total).abs(),
    })
}

/// Appends `surface_area_total`, `surface_area_std` and `surf_area_diff` as
/// numeric input columns computed from a per-disk area vector column and a
/// nominal area column. Zero entries in the vector are empty disk slots
/// (reactors hold different disk counts) and are left out.
pub fn augment(table: RunTable, disk_column: &str, nominal_column: &str) -> Result<RunTable, FeatureError> {
    for name in [TOTAL_COLUMN, STD_COLUMN, DIFF_COLUMN] {
        if table.schema().index_of(name).is_some() {
            return Err(FeatureError::ColumnAlreadyPresent(name.to_string()));
        }
    }
    let missing = |name: &str| match table.schema().index_of(name) {
        None => Err(FeatureError::MissingSourceColumn(name.to_string())),
        Some(_) => Ok(()),
    };
    missing(disk_column)?;
    missing(nominal_column)?;

    let nominal = table.numeric(nominal_column)?;
    let n = table.n_rows();
    let (mut total, mut std, mut diff) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (r, &nom) in nominal.iter().enumerate() {
        let loaded: Vec<f64> = table
            .vector_row(disk_column, r)?
            .iter()
            .copied()
            .filter(|&a| a != 0.0)
            .collect();
        let f = engineer(&loaded, nom)?;
        total.push(f.total_surface_area);
        std.push(f.surface_area_std);
        diff.push(f.surface_area_diff);
    }
    Ok(table
        .with_column(
            ColumnSpec::numeric(TOTAL_COLUMN, Role::Input),
            ColumnData::Numeric(total),
        )?
        .with_column(ColumnSpec::numeric(STD_COLUMN, Role::Input), ColumnData::Numeric(std))?
        .with_column(ColumnSpec::numeric(DIFF_COLUMN, Role::Input), ColumnData::Numeric(diff))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Schema;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn uniform_disks_exact_nominal() {
        let f = engineer(&[100.0, 100.0, 100.0], 300.0).unwrap();
        assert_eq!(
            f,
            EngineeredFeatures {
                total_surface_area: 300.0,
                surface_area_std: 0.0,
                surface_area_diff: 0.0
            }
        );
    }

    #[test]
    fn single_empty_disk() {
        let f = engineer(&[0.0f64], 5000.0).unwrap();
        assert_eq!(
            (f.total_surface_area, f.surface_area_std, f.surface_area_diff),
            (0.0, 0.0, 5000.0)
        );
    }

    #[test]
    fn hand_computed_population_std() {
        // deviations -100, 100, 0, 0 -> variance 20000/4 = 5000
        let f = engineer(&[900.0, 1100.0, 1000.0, 1000.0], 4500.0).unwrap();
        assert_eq!(f.total_surface_area, 4000.0);
        assert_relative_eq!(f.surface_area_std, 5000f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(f.surface_area_std, 70.71, epsilon = 5e-3);
        assert_eq!(f.surface_area_diff, 500.0);
        let f32s = engineer(&[900.0f32, 1100.0, 1000.0, 1000.0], 4500.0).unwrap();
        assert_relative_eq!(f32s.surface_area_std, 70.710_68, epsilon = 1e-3);
    }

    #[test]
    fn empty_list() {
        assert!(matches!(engineer::<f64>(&[], 1.0), Err(FeatureError::EmptyDiskList)));
    }

    fn disk_table() -> RunTable {
        let schema = Schema::new(vec![
            ColumnSpec::vector("disk_area", 3, Role::Input),
            ColumnSpec::numeric("nominal_area", Role::Input),
        ])
        .unwrap();
        RunTable::new(
            schema,
            vec![
                ColumnData::Vector {
                    len: 3,
                    values: vec![1.0, 2.0, 3.0, 4.0, 4.0, 4.0],
                },
                ColumnData::Numeric(vec![10.0, 10.0]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn augment_appends_three_columns_once() {
        let t = augment(disk_table(), "disk_area", "nominal_area").unwrap();
        assert_eq!(t.n_rows(), 2);
        assert_eq!(t.schema().columns().len(), 5);
        assert_eq!(t.numeric(DIFF_COLUMN).unwrap(), &[4.0, 2.0]);
        assert_eq!(t.numeric(TOTAL_COLUMN).unwrap(), &[6.0, 12.0]);
        assert_eq!(t.numeric(STD_COLUMN).unwrap()[1], 0.0);
        assert!(matches!(
            augment(t, "disk_area", "nominal_area"),
            Err(FeatureError::ColumnAlreadyPresent(_))
        ));
        assert!(matches!(
            augment(disk_table(), "areas", "nominal_area"),
            Err(FeatureError::MissingSourceColumn(_))
        ));
    }

    #[test]
    fn empty_slots_are_skipped() {
        let schema = Schema::new(vec![
            ColumnSpec::vector("disk_area", 4, Role::Input),
            ColumnSpec::numeric("nominal_area", Role::Input),
        ])
        .unwrap();
        let t = RunTable::new(
            schema,
            vec![
                ColumnData::Vector {
                    len: 4,
                    values: vec![900.0, 1100.0, 0.0, 0.0],
                },
                ColumnData::Numeric(vec![3000.0]),
            ],
        )
        .unwrap();
        let t = augment(t, "disk_area", "nominal_area").unwrap();
        assert_eq!(t.numeric(STD_COLUMN).unwrap(), &[100.0]);
        assert_eq!(t.numeric(DIFF_COLUMN).unwrap(), &[1000.0]);
    }

    proptest! {
        #[test]
        fn homogeneous_and_permutation_invariant(
            areas in proptest::collection::vec(0.0f64..5000.0, 1..50),
            nominal in 0.0f64..100000.0,
            c in 0.01f64..100.0,
            rot in 0usize..50,
        ) {
            let base = engineer(&areas, nominal).unwrap();
            let scaled: Vec<f64> = areas.iter().map(|a| a * c).collect();
            let s = engineer(&scaled, nominal * c).unwrap();
            let tol = |x: f64| 1e-9 * (1.0 + x.abs());
            prop_assert!((s.total_surface_area - c * base.total_surface_area).abs() <= tol(s.total_surface_area));
            prop_assert!((s.surface_area_std - c * base.surface_area_std).abs() <= tol(s.total_surface_area));
            prop_assert!((s.surface_area_diff - c * base.surface_area_diff).abs() <= tol(s.total_surface_area + nominal * c));
            let mut perm = areas.clone();
            let k = rot % perm.len();
            perm.rotate_left(k);
            perm.reverse();
            let p = engineer(&perm, nominal).unwrap();
            prop_assert!((p.total_surface_area - base.total_surface_area).abs() <= tol(base.total_surface_area));
            prop_assert!((p.surface_area_std - base.surface_area_std).abs() <= tol(base.total_surface_area));
            prop_assert!(p.surface_area_std >= 0.0 && p.surface_area_diff >= 0.0);
        }
    }
}
