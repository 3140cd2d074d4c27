//! Node conditionals and the single-site Gibbs sampler.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SlideError};
use crate::model::{CouplingMatrix, Dataset};

/// `P(z_i | z_{-i}) = 1 / (1 + exp(-2 z_i Σ_{j≠i} J_ij z_j))`.
///
/// `coupling` is the row of node `i`; its entry `i` is ignored.
pub fn conditional_prob(coupling: &[f64], z: &[i8], i: usize) -> f64 {
    let field: f64 = coupling
        .iter()
        .zip(z)
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, (&c, &s))| c * s as f64)
        .sum();
    1.0 / (1.0 + (-2.0 * z[i] as f64 * field).exp())
}

/// Chain schedule for [`gibbs_sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GibbsSchedule {
    pub burn_in: usize,
    pub thin: usize,
}

impl GibbsSchedule {
    /// 100·p burn-in sweeps and thinning of 10.
    pub fn default_for(p: usize) -> Self {
        Self { burn_in: 100 * p, thin: 10 }
    }
}

/// Runs one single-site Gibbs chain from a uniform random start, sweeping
/// sites in index order, and records every `thin`-th sweep after `burn_in`.
pub fn gibbs_sample(
    j: &CouplingMatrix,
    n: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 {
        return Err(SlideError::InvalidArgument("n must be at least 1".into()));
    }
    if thin == 0 {
        return Err(SlideError::InvalidArgument("thin must be at least 1".into()));
    }
    let p = j.p();
    let adjacency: Vec<Vec<(usize, f64)>> = (0..p)
        .map(|i| j.neighbors(i).into_iter().map(|k| (k, j.get(i, k))).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z: Vec<i8> = (0..p).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();

    let sweep = |z: &mut Vec<i8>, rng: &mut ChaCha8Rng| {
        for i in 0..p {
            let field: f64 = adjacency[i].iter().map(|&(k, v)| v * z[k] as f64).sum();
            let p_up = 1.0 / (1.0 + (-2.0 * field).exp());
            z[i] = if rng.random::<f64>() < p_up { 1 } else { -1 };
        }
    };

    for _ in 0..burn_in {
        sweep(&mut z, &mut rng);
    }
    let mut spins = Vec::with_capacity(n * p);
    for _ in 0..n {
        for _ in 0..thin {
            sweep(&mut z, &mut rng);
        }
        spins.extend_from_slice(&z);
    }
    Dataset::new(p, spins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{config_spins, exact_distribution};
    use rand::Rng;

    #[test]
    fn zero_coupling_conditional_is_half() {
        assert_eq!(conditional_prob(&[0.0, 0.0, 0.0], &[1, -1, 1], 1), 0.5);
    }

    #[test]
    fn two_spin_conditional() {
        let q = conditional_prob(&[0.0, 0.5], &[1, 1], 0);
        let expected = 0.5f64.exp() / (0.5f64.exp() + (-0.5f64).exp());
        assert!((q - expected).abs() < 1e-15);
        assert!((q - 0.731_058_578_630_004_9).abs() < 1e-12);
    }

    #[test]
    fn flipping_complements() {
        let c = [0.3, 0.0, -1.1, 0.25];
        let z = [1, -1, -1, 1];
        let mut flipped = z;
        flipped[1] = -flipped[1];
        let q = conditional_prob(&c, &z, 1);
        assert!((q + conditional_prob(&c, &flipped, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conditional_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = 6;
        let mut j = CouplingMatrix::zeros(p);
        for a in 0..p {
            for b in (a + 1)..p {
                j.set(a, b, rng.random_range(-1.0..1.0));
            }
        }
        let dist = exact_distribution(&j).unwrap();
        for k in 0..(1 << p) {
            let z = config_spins(k, p);
            for i in 0..p {
                let mut f = z.clone();
                f[i] = -f[i];
                let oracle = dist.prob(&z) / (dist.prob(&z) + dist.prob(&f));
                assert!((conditional_prob(j.row(i), &z, i) - oracle).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn single_sweep_boundary() {
        let data = gibbs_sample(&CouplingMatrix::zeros(3), 1, 0, 1, 1).unwrap();
        assert_eq!(data.n(), 1);
    }

    #[test]
    fn free_spins_have_zero_mean() {
        let n = 20_000;
        let data = gibbs_sample(&CouplingMatrix::zeros(5), n, 10, 1, 2).unwrap();
        let bound = 4.0 / (n as f64).sqrt();
        assert!(data.means().iter().all(|m| m.abs() < bound));
    }

    #[test]
    fn rejects_bad_schedule() {
        assert!(gibbs_sample(&CouplingMatrix::zeros(2), 0, 0, 1, 0).is_err());
        assert!(gibbs_sample(&CouplingMatrix::zeros(2), 1, 0, 0, 0).is_err());
    }

    #[test]
    fn gibbs_is_deterministic() {
        let j = CouplingMatrix::from_edges(3, &[(0, 1, 0.4), (1, 2, 0.9)]).unwrap();
        assert_eq!(gibbs_sample(&j, 200, 5, 2, 17).unwrap(), gibbs_sample(&j, 200, 5, 2, 17).unwrap());
    }
}
