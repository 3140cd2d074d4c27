//! Core value types: the symmetric coupling matrix, structural family
//! parameters and the ±1 sample matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlideError};

/// Symmetric, zero-diagonal interaction matrix of a zero-field Ising model.
///
/// Entry `(i, j)` is the coupling between nodes `i` and `j`; the nonzero
/// off-diagonal pattern is the edge set of the underlying graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    p: usize,
    entries: Vec<f64>,
}

impl CouplingMatrix {
    pub fn zeros(p: usize) -> Self {
        Self { p, entries: vec![0.0; p * p] }
    }

    /// Builds a matrix from a row-major dense buffer, validating symmetry,
    /// zero diagonal and finiteness.
    pub fn from_dense(p: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != p * p {
            return Err(SlideError::DimensionMismatch { expected: p * p, found: entries.len() });
        }
        for i in 0..p {
            if entries[i * p + i] != 0.0 {
                return Err(SlideError::InvalidCoupling(format!("nonzero diagonal at {i}")));
            }
            for j in 0..p {
                let v = entries[i * p + j];
                if !v.is_finite() {
                    return Err(SlideError::InvalidCoupling(format!("non-finite entry at ({i}, {j})")));
                }
                if v != entries[j * p + i] {
                    return Err(SlideError::InvalidCoupling(format!("asymmetric entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { p, entries })
    }

    /// Builds a matrix from an edge list `(i, j, value)`.
    pub fn from_edges(p: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut j = Self::zeros(p);
        for &(a, b, v) in edges {
            if a >= p || b >= p || a == b {
                return Err(SlideError::InvalidCoupling(format!("bad edge ({a}, {b}) for p = {p}")));
            }
            if !v.is_finite() {
                return Err(SlideError::InvalidCoupling(format!("non-finite value on edge ({a}, {b})")));
            }
            j.set(a, b, v);
        }
        Ok(j)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.p + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    ///
    /// Panics if `i == j` and `value != 0`.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(i != j || value == 0.0, "diagonal must stay zero");
        self.entries[i * self.p + j] = value;
        self.entries[j * self.p + i] = value;
    }

    /// Row `i`, which is also the coupling vector of node `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.p..(i + 1) * self.p]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    /// Edges `(i, j, J_ij)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.p {
            for j in (i + 1)..self.p {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.get(i, j) != 0.0).collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().filter(|v| **v != 0.0).count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.p).map(|i| self.degree(i)).max().unwrap_or(0)
    }

    /// Smallest `|J_ij|` over edges, `None` for an empty graph.
    pub fn min_signal(&self) -> Option<f64> {
        self.edges().iter().map(|e| e.2.abs()).reduce(f64::min)
    }

    /// Largest ℓ1 row norm.
    pub fn max_neighborhood_weight(&self) -> f64 {
        (0..self.p)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Structural parameters realised by this matrix (λ, γ, d).
    pub fn family_params(&self) -> FamilyParams {
        FamilyParams {
            lambda: self.min_signal().unwrap_or(0.0),
            gamma: self.max_neighborhood_weight(),
            d: self.max_degree(),
        }
    }

    /// True when both matrices have the same nonzero pattern.
    pub fn same_support(&self, other: &CouplingMatrix) -> bool {
        self.p == other.p
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| (*a != 0.0) == (*b != 0.0))
    }
}

/// Minimum signal λ, maximum neighbourhood weight γ and maximum degree d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub lambda: f64,
    pub gamma: f64,
    pub d: usize,
}

impl FamilyParams {
    /// Checks that `j` belongs to the family, with a small slack for
    /// floating point sums in the γ bound.
    pub fn admits(&self, j: &CouplingMatrix) -> bool {
        let realised = j.family_params();
        let edges_ok = j.edge_count() == 0 || realised.lambda >= self.lambda;
        edges_ok && realised.gamma <= self.gamma + 1e-12 && realised.d <= self.d
    }
}

/// `n × p` matrix of ±1 spins, one row per sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    n: usize,
    p: usize,
    spins: Vec<i8>,
}

impl Dataset {
    /// Wraps a row-major spin buffer; every entry must be exactly ±1.
    pub fn new(p: usize, spins: Vec<i8>) -> Result<Self> {
        if p == 0 {
            return Err(SlideError::InvalidArgument("p must be positive".into()));
        }
        if spins.len() % p != 0 {
            return Err(SlideError::DimensionMismatch {
                expected: (spins.len() / p + 1) * p,
                found: spins.len(),
            });
        }
        if let Some(k) = spins.iter().position(|&s| s != 1 && s != -1) {
            return Err(SlideError::InvalidSpin { row: k / p, col: k % p, value: spins[k] as i64 });
        }
        Ok(Self { n: spins.len() / p, p, spins })
    }

    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let p = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut spins = Vec::with_capacity(rows.len() * p);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(SlideError::RaggedRow { row: r, expected: p, found: row.len() });
            }
            spins.extend_from_slice(row);
        }
        Self::new(p, spins)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.spins[r * self.p..(r + 1) * self.p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        self.spins.chunks_exact(self.p)
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.spins
    }

    /// First `n` rows as a new dataset.
    pub fn truncated(&self, n: usize) -> Dataset {
        let n = n.min(self.n);
        Dataset { n, p: self.p, spins: self.spins[..n * self.p].to_vec() }
    }

    /// Empirical second moments `E[z_i z_j]` as a row-major `p × p` buffer
    /// (diagonal is 1).
    pub fn pair_moments(&self) -> Vec<f64> {
        let p = self.p;
        let mut acc = vec![0i64; p * p];
        for row in self.rows() {
            for i in 0..p {
                for j in i..p {
                    acc[i * p + j] += (row[i] * row[j]) as i64;
                }
            }
        }
        let mut out = vec![0.0; p * p];
        for i in 0..p {
            for j in i..p {
                let m = acc[i * p + j] as f64 / self.n as f64;
                out[i * p + j] = m;
                out[j * p + i] = m;
            }
        }
        out
    }

    /// Per-spin sample means.
    pub fn means(&self) -> Vec<f64> {
        let mut acc = vec![0i64; self.p];
        for row in self.rows() {
            for (a, &s) in acc.iter_mut().zip(row) {
                *a += s as i64;
            }
        }
        acc.into_iter().map(|a| a as f64 / self.n as f64).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupling_rejects_asymmetry_and_diagonal() {
        assert!(CouplingMatrix::from_dense(2, vec![0.0, 1.0, 0.5, 0.0]).is_err());
        assert!(CouplingMatrix::from_dense(2, vec![1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(CouplingMatrix::from_dense(2, vec![0.0, 0.3, 0.3, 0.0]).is_ok());
    }

    #[test]
    fn family_params_of_triangle() {
        let j = CouplingMatrix::from_edges(3, &[(0, 1, 0.5), (1, 2, -0.2), (0, 2, 0.4)]).unwrap();
        let f = j.family_params();
        assert_eq!(f.d, 2);
        assert!((f.lambda - 0.2).abs() < 1e-15);
        assert!((f.gamma - 0.9).abs() < 1e-15);
        assert!(f.admits(&j));
    }

    #[test]
    fn dataset_rejects_zero_one_encoding() {
        let err = Dataset::new(2, vec![1, 0, 1, 1]).unwrap_err();
        assert!(matches!(err, SlideError::InvalidSpin { row: 0, col: 1, value: 0 }));
    }

    #[test]
    fn dataset_rejects_ragged_rows() {
        assert!(Dataset::from_rows(&[vec![1, -1], vec![1]]).is_err());
    }
}
