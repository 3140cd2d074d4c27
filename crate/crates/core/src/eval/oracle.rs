use crate::error::{Result, SlideError};
use crate::model::Dataset;
use crate::pl::{NodeObjective, SolverSettings};

/// Largest number of supports [`exhaustive_best_subset`] will enumerate.
pub const SUBSET_BUDGET: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, t| acc * (n - t) as u128 / (t + 1) as u128)
}

/// Best size-`d` neighbourhood of node `i` by enumerating every support and
/// maximizing the pseudo-likelihood on each. Ties go to the
/// lexicographically smallest support.
pub fn exhaustive_best_subset(data: &Dataset, i: usize, d: usize) -> Result<(Vec<usize>, f64)> {
    let objective = NodeObjective::new(data, i);
    exhaustive_best_subset_with(&objective, d, &SolverSettings::default())
}

pub fn exhaustive_best_subset_with(
    objective: &NodeObjective,
    d: usize,
    settings: &SolverSettings,
) -> Result<(Vec<usize>, f64)> {
    let node = objective.node();
    let candidates: Vec<usize> = (0..objective.p()).filter(|&j| j != node).collect();
    if d > candidates.len() {
        return Err(SlideError::InvalidArgument(format!(
            "support size {d} exceeds the {} candidate neighbours",
            candidates.len()
        )));
    }
    let count = binomial(candidates.len(), d);
    if count > SUBSET_BUDGET {
        return Err(SlideError::BudgetExceeded { count, limit: SUBSET_BUDGET });
    }

    let mut idx: Vec<usize> = (0..d).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        let support: Vec<usize> = idx.iter().map(|&k| candidates[k]).collect();
        let value = objective.maximize(&support, None, settings).pl_value;
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((support, value));
        }
        // Next combination in lexicographic order.
        let m = candidates.len();
        let Some(pos) = (0..d).rev().find(|&t| idx[t] < m - d + t) else {
            break;
        };
        idx[pos] += 1;
        for t in (pos + 1)..d {
            idx[t] = idx[t - 1] + 1;
        }
    }
    Ok(best.expect("at least one support"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_distribution, sample_exact};
    use crate::model::CouplingMatrix;
    use std::f64::consts::LN_2;

    #[test]
    fn empty_support() {
        let data = Dataset::from_rows(&[vec![1, -1, 1], vec![-1, -1, 1], vec![1, 1, 1]]).unwrap();
        let (s, v) = exhaustive_best_subset(&data, 0, 0).unwrap();
        assert!(s.is_empty());
        assert!((v + LN_2).abs() < 1e-15);
    }

    #[test]
    fn finds_single_true_edge() {
        let j = CouplingMatrix::from_edges(4, &[(0, 1, 1.2)]).unwrap();
        let data = sample_exact(&exact_distribution(&j).unwrap(), 5000, 4).unwrap();
        let (s, v) = exhaustive_best_subset(&data, 0, 1).unwrap();
        assert_eq!(s, vec![1]);
        let obj = NodeObjective::new(&data, 0);
        for k in 1..4 {
            assert!(obj.maximize(&[k], None, &SolverSettings::default()).pl_value <= v);
        }
    }

    #[test]
    fn budget_guard() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(40, 20), 137_846_528_820);
        let data = Dataset::new(41, vec![1; 41 * 3]).unwrap();
        assert!(matches!(exhaustive_best_subset(&data, 0, 20), Err(SlideError::BudgetExceeded { .. })));
    }
}
