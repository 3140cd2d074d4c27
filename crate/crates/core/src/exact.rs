//! Brute-force enumeration of the Ising distribution for small `p`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SlideError};
use crate::model::{CouplingMatrix, Dataset};

/// Largest `p` accepted by [`exact_distribution`].
pub const MAX_EXACT_P: usize = 20;

/// Probability table over all `2^p` configurations.
///
/// Configuration index `k` encodes spin `z_j = +1` when bit `j` of `k` is set
/// and `z_j = -1` otherwise.
#[derive(Debug, Clone)]
pub struct ExactDistribution {
    p: usize,
    log_partition: f64,
    probabilities: Vec<f64>,
}

/// Decodes configuration index `k` into spins.
pub fn config_spins(k: usize, p: usize) -> Vec<i8> {
    (0..p).map(|j| if (k >> j) & 1 == 1 { 1 } else { -1 }).collect()
}

/// Inverse of [`config_spins`].
pub fn config_index(z: &[i8]) -> usize {
    z.iter()
        .enumerate()
        .filter(|(_, &s)| s == 1)
        .fold(0, |k, (j, _)| k | (1 << j))
}

/// `Σ_{i<j} J_ij z_i z_j`.
pub fn energy(j: &CouplingMatrix, z: &[i8]) -> f64 {
    j.edges()
        .iter()
        .map(|&(a, b, v)| v * (z[a] * z[b]) as f64)
        .sum()
}

pub fn exact_distribution(j: &CouplingMatrix) -> Result<ExactDistribution> {
    let p = j.p();
    if p > MAX_EXACT_P {
        return Err(SlideError::DimensionTooLarge { p, limit: MAX_EXACT_P });
    }
    let edges = j.edges();
    let states = 1usize << p;
    let mut energies = Vec::with_capacity(states);
    for k in 0..states {
        let mut e = 0.0;
        for &(a, b, v) in &edges {
            let same = ((k >> a) & 1) == ((k >> b) & 1);
            e += if same { v } else { -v };
        }
        energies.push(e);
    }
    let max = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = energies.iter().map(|e| (e - max).exp()).sum();
    let log_partition = max + sum.ln();
    let probabilities = energies.iter().map(|e| (e - log_partition).exp()).collect();
    Ok(ExactDistribution { p, log_partition, probabilities })
}

impl ExactDistribution {
    pub fn p(&self) -> usize {
        self.p
    }

    /// `log Φ(J)`.
    pub fn log_partition(&self) -> f64 {
        self.log_partition
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn prob(&self, z: &[i8]) -> f64 {
        self.probabilities[config_index(z)]
    }

    /// Exact `E[z_i z_j]` as a row-major `p × p` buffer.
    pub fn pair_moments(&self) -> Vec<f64> {
        let p = self.p;
        let mut out = vec![0.0; p * p];
        for (k, &pr) in self.probabilities.iter().enumerate() {
            for a in 0..p {
                for b in a..p {
                    let same = ((k >> a) & 1) == ((k >> b) & 1);
                    out[a * p + b] += if same { pr } else { -pr };
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                out[a * p + b] = out[b * p + a];
            }
        }
        out
    }
}

/// Draws `n` i.i.d. configurations by inverse-CDF lookup.
pub fn sample_exact(dist: &ExactDistribution, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(SlideError::InvalidArgument("n must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(dist.probabilities.len());
    let mut acc = 0.0;
    for &pr in &dist.probabilities {
        acc += pr;
        cdf.push(acc);
    }
    let total = acc;
    let last = cdf.len() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins = Vec::with_capacity(n * dist.p);
    for _ in 0..n {
        let u: f64 = rng.random::<f64>() * total;
        let k = cdf.partition_point(|&c| c <= u).min(last);
        spins.extend(config_spins(k, dist.p));
    }
    Dataset::new(dist.p, spins)
}
