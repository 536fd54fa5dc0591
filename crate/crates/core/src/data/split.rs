use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{ColumnData, DataError, RunTable};

/// Row indices of a train/test partition, each sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `floor(n * ratio)`, tolerant of the representation error in `ratio`.
fn test_size(n: usize, ratio: f64) -> usize {
    (n as f64 * ratio + 1e-9).floor() as usize
}

/// Seeded train/test partition of `0..n`.
///
/// With `strata`, each class receives its largest-remainder share of the
/// `floor(n * ratio)` test rows, so per-class test counts stay within one row
/// of the exact proportion.
pub fn split_indices(n: usize, test_ratio: f64, seed: u64, strata: Option<&[usize]>) -> Result<Split, DataError> {
    if !(test_ratio > 0.0 && test_ratio < 1.0) {
        return Err(DataError::InvalidRatio(test_ratio));
    }
    let n_test = test_size(n, test_ratio);
    if n < 2 || n_test == 0 || n_test == n {
        return Err(DataError::EmptyPartition { n, ratio: test_ratio });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut test = match strata {
        None => {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            idx.truncate(n_test);
            idx
        }
        Some(labels) => {
            if labels.len() != n {
                return Err(DataError::LengthMismatch {
                    expected: n,
                    actual: labels.len(),
                });
            }
            let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (i, &c) in labels.iter().enumerate() {
                classes.entry(c).or_default().push(i);
            }
            if let Some((c, _)) = classes.iter().find(|(_, m)| m.len() < 2) {
                return Err(DataError::ClassTooSmall(c.to_string()));
            }
            let quotas = largest_remainder(n_test, n, &classes.values().map(Vec::len).collect::<Vec<_>>());
            let mut test = Vec::with_capacity(n_test);
            for (mut members, q) in classes.into_values().zip(quotas) {
                members.shuffle(&mut rng);
                test.extend_from_slice(&members[..q]);
            }
            test
        }
    };
    test.sort_unstable();
    let mut in_test = vec![false; n];
    for &i in &test {
        in_test[i] = true;
    }
    let train = (0..n).filter(|&i| !in_test[i]).collect();
    Ok(Split { train, test })
}

/// Apportions `total` across classes of the given sizes (summing to `n`).
fn largest_remainder(total: usize, n: usize, sizes: &[usize]) -> Vec<usize> {
    let mut quotas: Vec<usize> = sizes.iter().map(|&s| total * s / n).collect();
    let assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    // Remainders compared exactly as (total * s) mod n; ties go to the lower class.
    order.sort_by_key(|&c| std::cmp::Reverse((total * sizes[c]) % n));
    let mut remaining = total - assigned;
    // A class never gives up every member; leftover rows go to the next class in remainder order.
    while remaining > 0 {
        let before = remaining;
        for &c in &order {
            if remaining > 0 && quotas[c] + 1 < sizes[c] {
                quotas[c] += 1;
                remaining -= 1;
            }
        }
        if remaining == before {
            break;
        }
    }
    quotas
}

/// Splits a table, optionally stratified by a categorical or numeric column.
pub fn split(
    table: &RunTable,
    test_ratio: f64,
    seed: u64,
    stratify_by: Option<&str>,
) -> Result<(RunTable, RunTable), DataError> {
    let strata = match stratify_by {
        None => None,
        Some(name) => Some(match table.column(name)?.1 {
            ColumnData::Categorical(values) => class_codes(values.iter().cloned()),
            ColumnData::Numeric(values) => class_codes(values.iter().map(|v| v.to_string())),
            ColumnData::Vector { .. } => {
                return Err(DataError::WrongKind {
                    column: name.to_string(),
                    expected: "categorical",
                    actual: "numeric_vector",
                })
            }
        }),
    };
    let (codes, names) = match strata {
        Some((c, n)) => (Some(c), n),
        None => (None, Vec::new()),
    };
    let s = split_indices(table.n_rows(), test_ratio, seed, codes.as_deref()).map_err(|e| match e {
        DataError::ClassTooSmall(code) => {
            let i: usize = code.parse().expect("numeric class code");
            DataError::ClassTooSmall(names[i].clone())
        }
        other => other,
    })?;
    Ok((table.take(&s.train)?, table.take(&s.test)?))
}

fn class_codes(values: impl Iterator<Item = String>) -> (Vec<usize>, Vec<String>) {
    let values: Vec<String> = values.collect();
    let mut names: Vec<String> = values.clone();
    names.sort();
    names.dedup();
    let codes = values
        .iter()
        .map(|v| names.binary_search(v).expect("value in vocabulary"))
        .collect();
    (codes, names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn production_sized_split() {
        let s = split_indices(603, 0.2, 7, None).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (483, 120));
    }

    #[test]
    fn deterministic_for_seed() {
        let a = split_indices(10, 0.2, 99, None).unwrap();
        let b = split_indices(10, 0.2, 99, None).unwrap();
        assert_eq!(a, b);
        let c = split_indices(10, 0.2, 100, None).unwrap();
        assert_eq!(c.test.len(), 2);
    }

    #[test]
    fn stratification_needs_two_per_class() {
        let mut labels = vec![0; 9];
        labels.push(1);
        let err = split_indices(10, 0.2, 1, Some(&labels)).unwrap_err();
        assert!(matches!(err, DataError::ClassTooSmall(c) if c == "1"));
    }

    #[test]
    fn invalid_ratios() {
        assert!(matches!(
            split_indices(10, 0.0, 1, None),
            Err(DataError::InvalidRatio(_))
        ));
        assert!(matches!(
            split_indices(10, 1.0, 1, None),
            Err(DataError::InvalidRatio(_))
        ));
        assert!(matches!(
            split_indices(3, 0.2, 1, None),
            Err(DataError::EmptyPartition { .. })
        ));
    }

    proptest! {
        #[test]
        fn always_a_partition(n in 2usize..300, ratio in 0.05f64..0.95, seed: u64) {
            if let Ok(s) = split_indices(n, ratio, seed, None) {
                prop_assert_eq!(s.test.len(), test_size(n, ratio));
                let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }

        #[test]
        fn stratified_keeps_proportions(
            labels in proptest::collection::vec(0usize..4, 20..200),
            ratio in 0.1f64..0.5,
            seed: u64,
        ) {
            let n = labels.len();
            match split_indices(n, ratio, seed, Some(&labels)) {
                Ok(s) => {
                    prop_assert_eq!(s.test.len(), test_size(n, ratio));
                    for c in 0..4 {
                        let size = labels.iter().filter(|&&l| l == c).count();
                        let got = s.test.iter().filter(|&&i| labels[i] == c).count() as f64;
                        let exact = s.test.len() as f64 * size as f64 / n as f64;
                        prop_assert!((got - exact).abs() <= 1.0 + 1e-9);
                    }
                    let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
                    all.sort_unstable();
                    prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
                }
                Err(DataError::ClassTooSmall(_)) => {}
                Err(e) => prop_assert!(false, "unexpected {e}"),
            }
        }
    }
}
