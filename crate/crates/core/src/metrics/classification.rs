use serde::{Deserialize, Serialize};

use super::MetricsError;

/// `counts[i][j]` = samples of true class `i` predicted as `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    pub fn k(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.k()).map(|i| self.counts[i][i]).sum()
    }
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], k: usize) -> Result<ConfusionMatrix, MetricsError> {
    if y_true.len() != y_pred.len() {
        return Err(MetricsError::LengthMismatch(y_true.len(), y_pred.len()));
    }
    let mut counts = vec![vec![0; k]; k];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if let Some(&label) = [t, p].iter().find(|&&l| l >= k) {
            return Err(MetricsError::LabelOutOfRange { label, k });
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    /// Scores of one class treated as the positive label.
    BinaryPositive(usize),
    /// Unweighted mean of per-class scores.
    Macro,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Per-class precision, recall and F1. A zero denominator yields 0.
fn per_class(cm: &ConfusionMatrix, c: usize) -> (f64, f64, f64) {
    let tp = cm.counts[c][c];
    let predicted: usize = cm.counts.iter().map(|row| row[c]).sum();
    let actual: usize = cm.counts[c].iter().sum();
    let p = ratio(tp, predicted);
    let r = ratio(tp, actual);
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (p, r, f1)
}

pub fn classification_metrics(
    cm: &ConfusionMatrix,
    averaging: Averaging,
) -> Result<ClassificationMetrics, MetricsError> {
    let total = cm.total();
    if total == 0 {
        return Err(MetricsError::Empty);
    }
    let accuracy = cm.trace() as f64 / total as f64;
    let (precision, recall, f1) = match averaging {
        Averaging::BinaryPositive(c) => {
            if c >= cm.k() {
                return Err(MetricsError::LabelOutOfRange { label: c, k: cm.k() });
            }
            per_class(cm, c)
        }
        Averaging::Macro => {
            let k = cm.k() as f64;
            let (mut p, mut r, mut f) = (0.0, 0.0, 0.0);
            for c in 0..cm.k() {
                let (pc, rc, fc) = per_class(cm, c);
                p += pc;
                r += rc;
                f += fc;
            }
            (p / k, r / k, f / k)
        }
    };
    Ok(ClassificationMetrics {
        accuracy,
        precision,
        recall,
        f1,
    })
}

fn pairs(n: usize) -> f64 {
    (n * n.saturating_sub(1)) as f64 / 2.0
}

/// Chance-corrected agreement between two partitions of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, MetricsError> {
    if a.len() != b.len() {
        return Err(MetricsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(MetricsError::Empty);
    }
    let ka = a.iter().max().unwrap() + 1;
    let kb = b.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; kb]; ka];
    for (&i, &j) in a.iter().zip(b) {
        table[i][j] += 1;
    }
    let index: f64 = table.iter().flatten().map(|&c| pairs(c)).sum();
    let sum_a: f64 = table.iter().map(|row| pairs(row.iter().sum())).sum();
    let sum_b: f64 = (0..kb).map(|j| pairs(table.iter().map(|row| row[j]).sum())).sum();
    let expected = sum_a * sum_b / pairs(a.len()).max(1.0);
    let max = 0.5 * (sum_a + sum_b);
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_give_diagonal() {
        let cm = confusion(&[0, 1, 2, 1], &[0, 1, 2, 1], 3).unwrap();
        assert_eq!(cm.counts, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 1]]);
        let m = classification_metrics(&cm, Averaging::Macro).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn total_confusion_has_zero_diagonal() {
        let cm = confusion(&[0, 0, 1], &[1, 1, 0], 2).unwrap();
        assert_eq!(cm.trace(), 0);
        let m = classification_metrics(&cm, Averaging::Macro).unwrap();
        assert_eq!((m.accuracy, m.f1), (0.0, 0.0));
    }

    #[test]
    fn symmetric_two_by_two() {
        let cm = ConfusionMatrix {
            counts: vec![vec![2, 1], vec![1, 2]],
        };
        let m = classification_metrics(&cm, Averaging::Macro).unwrap();
        for v in [m.accuracy, m.precision, m.recall, m.f1] {
            assert!((v - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn binary_positive_and_zero_rule() {
        // Class 1 never predicted: precision 0, F1 0.
        let cm = ConfusionMatrix {
            counts: vec![vec![5, 0], vec![3, 0]],
        };
        let pos = classification_metrics(&cm, Averaging::BinaryPositive(1)).unwrap();
        assert_eq!((pos.precision, pos.recall, pos.f1), (0.0, 0.0, 0.0));
        let neg = classification_metrics(&cm, Averaging::BinaryPositive(0)).unwrap();
        assert_eq!(neg.precision, 5.0 / 8.0);
        assert_eq!(neg.recall, 1.0);
        assert!(classification_metrics(&cm, Averaging::BinaryPositive(2)).is_err());
    }

    #[test]
    fn errors() {
        assert_eq!(
            confusion(&[0, 3], &[0, 1], 2).unwrap_err(),
            MetricsError::LabelOutOfRange { label: 3, k: 2 }
        );
        assert!(confusion(&[0], &[0, 1], 2).is_err());
        let empty = ConfusionMatrix { counts: vec![vec![0]] };
        assert_eq!(
            classification_metrics(&empty, Averaging::Macro).unwrap_err(),
            MetricsError::Empty
        );
    }

    #[test]
    fn ari_reference_values() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        // Standard example: ARI([0,0,1,1],[0,0,1,2]) = 0.5714285714...
        let v = adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 2]).unwrap();
        assert!((v - 4.0 / 7.0).abs() < 1e-12);
        assert_eq!(adjusted_rand_index(&[0, 0, 0], &[0, 0, 0]).unwrap(), 1.0);
    }
}
