use serde::{Deserialize, Serialize};

use crate::error::{Result, SlideError};
use crate::model::CouplingMatrix;

/// Pair-level confusion table over unordered pairs `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn between(estimate: &CouplingMatrix, truth: &CouplingMatrix) -> Result<Self> {
        check_dims(estimate, truth)?;
        let p = truth.p();
        let mut c = ConfusionCounts::default();
        for i in 0..p {
            for j in (i + 1)..p {
                match (estimate.get(i, j) != 0.0, truth.get(i, j) != 0.0) {
                    (true, true) => c.tp += 1,
                    (false, false) => c.tn += 1,
                    (true, false) => c.fp += 1,
                    (false, true) => c.fn_ += 1,
                }
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// `TP / (TP + FN)`, or 1 when there are no true edges.
    pub fn tpr(&self) -> f64 {
        let d = self.tp + self.fn_;
        if d == 0 {
            1.0
        } else {
            self.tp as f64 / d as f64
        }
    }

    /// `FP / (TN + FP)`, or 0 when there are no true non-edges.
    pub fn fpr(&self) -> f64 {
        let d = self.tn + self.fp;
        if d == 0 {
            0.0
        } else {
            self.fp as f64 / d as f64
        }
    }

    /// Matthews correlation coefficient; 0 when any marginal is empty.
    pub fn mcc(&self) -> f64 {
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
        if factors.iter().any(|&f| f == 0.0) {
            return 0.0;
        }
        (tp * tn - fp * fn_) / factors.iter().product::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureMetrics {
    pub tpr: f64,
    pub fpr: f64,
    pub mcc: f64,
    pub counts: ConfusionCounts,
}

fn check_dims(a: &CouplingMatrix, b: &CouplingMatrix) -> Result<()> {
    if a.p() != b.p() {
        return Err(SlideError::DimensionMismatch { expected: b.p(), found: a.p() });
    }
    Ok(())
}

pub fn structure_metrics(estimate: &CouplingMatrix, truth: &CouplingMatrix) -> Result<StructureMetrics> {
    let counts = ConfusionCounts::between(estimate, truth)?;
    Ok(StructureMetrics { tpr: counts.tpr(), fpr: counts.fpr(), mcc: counts.mcc(), counts })
}

/// `2 / (p (p - 1)) · Σ_{i<j} (Ĵ_ij - J_ij)²`.
pub fn mse(estimate: &CouplingMatrix, truth: &CouplingMatrix) -> Result<f64> {
    check_dims(estimate, truth)?;
    let p = truth.p();
    if p < 2 {
        return Ok(0.0);
    }
    let mut acc = 0.0;
    for i in 0..p {
        for j in (i + 1)..p {
            let d = estimate.get(i, j) - truth.get(i, j);
            acc += d * d;
        }
    }
    Ok(2.0 * acc / (p * (p - 1)) as f64)
}

/// Support equality over all pairs.
pub fn exact_recovery(estimate: &CouplingMatrix, truth: &CouplingMatrix) -> Result<bool> {
    check_dims(estimate, truth)?;
    Ok(estimate.same_support(truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_mcc() {
        let c = ConfusionCounts { tp: 3, tn: 10, fp: 1, fn_: 1 };
        assert!((c.mcc() - 29.0 / 44.0).abs() < 1e-12);
    }

    #[test]
    fn perfect_recovery() {
        let j = CouplingMatrix::from_edges(4, &[(0, 1, 0.5), (2, 3, -0.4)]).unwrap();
        let m = structure_metrics(&j, &j).unwrap();
        assert_eq!((m.tpr, m.fpr, m.mcc), (1.0, 0.0, 1.0));
        assert_eq!(mse(&j, &j).unwrap(), 0.0);
        assert!(exact_recovery(&j, &j).unwrap());
    }

    #[test]
    fn empty_estimate_conventions() {
        let truth = CouplingMatrix::from_edges(4, &[(0, 1, 0.5)]).unwrap();
        let m = structure_metrics(&CouplingMatrix::zeros(4), &truth).unwrap();
        assert_eq!((m.tpr, m.fpr, m.mcc), (0.0, 0.0, 0.0));
    }

    #[test]
    fn single_pair_mse() {
        let a = CouplingMatrix::from_edges(2, &[(0, 1, 0.5)]).unwrap();
        let b = CouplingMatrix::from_edges(2, &[(0, 1, 0.3)]).unwrap();
        assert!((mse(&a, &b).unwrap() - 0.04).abs() < 1e-15);
    }

    #[test]
    fn support_only_recovery() {
        let a = CouplingMatrix::from_edges(3, &[(0, 1, 0.5)]).unwrap();
        let b = CouplingMatrix::from_edges(3, &[(0, 1, 0.9)]).unwrap();
        let c = CouplingMatrix::from_edges(3, &[(0, 1, 0.9), (1, 2, 0.1)]).unwrap();
        assert!(exact_recovery(&a, &b).unwrap());
        assert!(!exact_recovery(&c, &b).unwrap());
        assert!(exact_recovery(&CouplingMatrix::zeros(3), &CouplingMatrix::zeros(3)).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(structure_metrics(&CouplingMatrix::zeros(3), &CouplingMatrix::zeros(4)).is_err());
        assert!(mse(&CouplingMatrix::zeros(3), &CouplingMatrix::zeros(4)).is_err());
    }

    fn matrix(p: usize, mask: u64, vals: &[f64]) -> CouplingMatrix {
        let mut j = CouplingMatrix::zeros(p);
        let mut k = 0;
        for a in 0..p {
            for b in (a + 1)..p {
                if (mask >> k) & 1 == 1 {
                    j.set(a, b, vals[k % vals.len()]);
                }
                k += 1;
            }
        }
        j
    }

    proptest! {
        #[test]
        fn metric_ranges(p in 2usize..8, m1 in any::<u64>(), m2 in any::<u64>(), c in 0.1f64..3.0) {
            let est = matrix(p, m1, &[0.3, -0.2, 0.7]);
            let truth = matrix(p, m2, &[0.5, -0.4]);
            let m = structure_metrics(&est, &truth).unwrap();
            prop_assert!((-1.0..=1.0).contains(&m.mcc));
            prop_assert!((0.0..=1.0).contains(&m.tpr));
            prop_assert!((0.0..=1.0).contains(&m.fpr));
            prop_assert_eq!(m.counts.total() as usize, p * (p - 1) / 2);
            let edges = truth.edge_count();
            if edges >= 1 && edges < p * (p - 1) / 2 {
                prop_assert_eq!(exact_recovery(&est, &truth).unwrap(), m.tpr == 1.0 && m.fpr == 0.0);
            }
            let scale = |x: &CouplingMatrix| {
                CouplingMatrix::from_dense(p, x.as_slice().iter().map(|v| v * c).collect()).unwrap()
            };
            let base = mse(&est, &truth).unwrap();
            let scaled = mse(&scale(&est), &scale(&truth)).unwrap();
            prop_assert!((scaled - c * c * base).abs() <= 1e-12 * (1.0 + scaled));
        }
    }
}
