//! Eigenvector layout and two-way partition of an estimated coupling matrix.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::model::CouplingMatrix;

/// Eigenvector entries at or below this magnitude count as zero.
const ZERO_TOL: f64 = 1e-10;

/// Eigenvectors ordered by decreasing `|eigenvalue|`, each flipped so its
/// first nonzero entry is positive. Ties keep the larger signed eigenvalue
/// first. Returns an empty list for the zero matrix.
fn ordered_eigenvectors(j: &CouplingMatrix) -> Vec<Vec<f64>> {
    let p = j.p();
    if j.as_slice().iter().all(|&v| v == 0.0) {
        return Vec::new();
    }
    let m = DMatrix::from_row_slice(p, p, j.as_slice());
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (eig.eigenvalues[a], eig.eigenvalues[b]);
        lb.abs().total_cmp(&la.abs()).then(lb.total_cmp(&la)).then(a.cmp(&b))
    });
    order
        .into_iter()
        .map(|k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            if let Some(first) = v.iter().find(|x| x.abs() > ZERO_TOL) {
                if *first < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
            }
            v
        })
        .collect()
}

/// Two-dimensional layout from the eigenvectors of the two largest-magnitude
/// eigenvalues. The zero matrix maps to the canonical basis vectors.
pub fn spectral_layout(j: &CouplingMatrix) -> Vec<[f64; 2]> {
    let p = j.p();
    let vecs = ordered_eigenvectors(j);
    let column = |k: usize| -> Vec<f64> {
        match vecs.get(k) {
            Some(v) => v.clone(),
            None => (0..p).map(|i| if i == k { 1.0 } else { 0.0 }).collect(),
        }
    };
    let (a, b) = (column(0), column(1));
    (0..p).map(|i| [a[i], b[i]]).collect()
}

/// Labels each node 1 when its entry in the leading eigenvector is
/// positive and 0 otherwise (including numerically zero entries).
pub fn spectral_bipartition(j: &CouplingMatrix) -> Vec<u8> {
    match ordered_eigenvectors(j).first() {
        Some(v) => v.iter().map(|&x| u8::from(x > ZERO_TOL)).collect(),
        None => vec![0; j.p()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cliques(sizes: &[usize], w: f64) -> CouplingMatrix {
        let p = sizes.iter().sum();
        let mut j = CouplingMatrix::zeros(p);
        let mut start = 0;
        for &s in sizes {
            for a in start..start + s {
                for b in (a + 1)..start + s {
                    j.set(a, b, w);
                }
            }
            start += s;
        }
        j
    }

    #[test]
    fn zero_matrix_conventions() {
        let j = CouplingMatrix::zeros(3);
        assert_eq!(spectral_layout(&j), vec![[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]);
        assert_eq!(spectral_bipartition(&j), vec![0, 0, 0]);
    }

    #[test]
    fn disconnected_cliques_are_separated() {
        // K4 has eigenvalue 3 with indicator eigenvector; K3 tops out at 2.
        let j = cliques(&[4, 3], 1.0);
        assert_eq!(spectral_bipartition(&j), vec![1, 1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn two_block_layout_splits_by_sign() {
        // Within-block 1, between-block -1: the leading eigenvector is ±1/√p
        // split by block: J = s sᵀ - I has eigenvalue p - 1 on s, -1 elsewhere.
        let p = 6;
        let mut j = CouplingMatrix::zeros(p);
        for a in 0..p {
            for b in (a + 1)..p {
                j.set(a, b, if (a < 3) == (b < 3) { 1.0 } else { -1.0 });
            }
        }
        let layout = spectral_layout(&j);
        let expected = 1.0 / (p as f64).sqrt();
        for (i, xy) in layout.iter().enumerate() {
            let sign = if i < 3 { 1.0 } else { -1.0 };
            assert!((xy[0] - sign * expected).abs() < 1e-10);
        }
        assert_eq!(spectral_bipartition(&j), vec![1, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn relabeling_is_equivariant() {
        let j = cliques(&[4, 3], 0.7);
        let perm = [6, 2, 4, 0, 1, 5, 3];
        let mut q = CouplingMatrix::zeros(7);
        for a in 0..7 {
            for b in (a + 1)..7 {
                q.set(perm[a], perm[b], j.get(a, b));
            }
        }
        let labels = spectral_bipartition(&j);
        let relabeled = spectral_bipartition(&q);
        for a in 0..7 {
            assert_eq!(labels[a], relabeled[perm[a]]);
        }
    }
}
