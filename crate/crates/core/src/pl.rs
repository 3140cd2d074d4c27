//! Nodewise log pseudo-likelihood.
//!
//! For node `i` and coupling vector `J_i` the objective is the mean over
//! samples of `log P(z_i | z_{-i})`:
//!
//! ```text
//! PL(J_i) = -(1/n) Σ_r softplus(-2 m_r),   m_r = Σ_{j≠i} J_ij z_i z_j
//! ```
//!
//! It is concave in `J_i`. [`NodeObjective`] caches the products
//! `z_i z_j` so that repeated evaluations on different supports are cheap.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::model::Dataset;

/// `log(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Inner solver settings for [`NodeObjective::maximize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Stop once the gradient ∞-norm over the support is below this.
    pub grad_tol: f64,
    /// Newton steps must also shrink below this before declaring convergence.
    pub step_tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Coefficient magnitude bound; reaching it marks the solve as capped.
    pub cap: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { grad_tol: 1e-8, step_tol: 1e-6, max_iter: 100, max_halvings: 30, cap: DEFAULT_CAP }
    }
}

pub const DEFAULT_CAP: f64 = 15.0;

impl SolverSettings {
    /// Cap of `2γ` when the maximum neighbourhood weight is known.
    pub fn with_gamma(gamma: f64) -> Self {
        Self { cap: 2.0 * gamma, ..Self::default() }
    }
}

/// Maximizer of the pseudo-likelihood restricted to a support set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSolution {
    /// Active nodes in ascending order; never contains the target node.
    pub support: Vec<usize>,
    /// Coefficients aligned with `support`.
    pub coefficients: Vec<f64>,
    pub pl_value: f64,
    /// Gradient over all `p` coordinates (entry `i` is zero).
    pub gradient: Vec<f64>,
    pub converged: bool,
    pub capped: bool,
    pub iterations: usize,
}

impl RestrictedSolution {
    /// Dense coupling vector of length `p`.
    pub fn coupling(&self, p: usize) -> Vec<f64> {
        let mut out = vec![0.0; p];
        for (&j, &c) in self.support.iter().zip(&self.coefficients) {
            out[j] = c;
        }
        out
    }

    pub fn coefficient(&self, j: usize) -> Option<f64> {
        self.support.iter().position(|&k| k == j).map(|k| self.coefficients[k])
    }
}

/// Distinct rows of a dataset with their multiplicities, in lexicographic
/// row order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPatterns {
    n: usize,
    p: usize,
    rows: Vec<i8>,
    counts: Vec<u32>,
}

impl SpinPatterns {
    pub fn new(data: &Dataset) -> Self {
        let mut order: Vec<usize> = (0..data.n()).collect();
        order.sort_by(|&a, &b| data.row(a).cmp(data.row(b)));
        let mut rows: Vec<i8> = Vec::new();
        let mut counts: Vec<u32> = Vec::new();
        let p = data.p();
        for r in order {
            let row = data.row(r);
            if counts.is_empty() || &rows[rows.len() - p..] != row {
                rows.extend_from_slice(row);
                counts.push(1);
            } else {
                *counts.last_mut().unwrap() += 1;
            }
        }
        Self { n: data.n(), p, rows, counts }
    }

    /// Number of distinct rows.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Per-sample quantities derived from the margins `m_r` in one pass.
struct MarginTerms {
    value: f64,
    /// `w_r · 2 / (1 + e^{2 m_r})`: gradient weights.
    grad_w: Vec<f64>,
    /// `w_r · 4 q (1 - q)` with `q = logistic(2 m_r)`: curvature weights.
    curv_w: Vec<f64>,
}

/// The pseudo-likelihood of one node over a fixed dataset.
#[derive(Debug, Clone)]
pub struct NodeObjective {
    node: usize,
    n: usize,
    p: usize,
    /// Distinct rows.
    m: usize,
    /// Column-major `z_i z_j` products over distinct rows: `products[j * m + r]`.
    products: Vec<f64>,
    /// Row multiplicity divided by `n`.
    weights: Vec<f64>,
}

impl NodeObjective {
    pub fn new(data: &Dataset, node: usize) -> Self {
        Self::from_patterns(&SpinPatterns::new(data), node)
    }

    pub fn from_patterns(patterns: &SpinPatterns, node: usize) -> Self {
        let (n, p, m) = (patterns.n, patterns.p, patterns.len());
        assert!(node < p, "node {node} out of range for p = {p}");
        let mut products = vec![0.0; m * p];
        for (r, row) in patterns.rows.chunks_exact(p).enumerate() {
            let zi = row[node];
            for (j, &zj) in row.iter().enumerate() {
                products[j * m + r] = (zi * zj) as f64;
            }
        }
        let weights = patterns.counts.iter().map(|&c| c as f64 / n as f64).collect();
        Self { node, n, p, m, products, weights }
    }

    pub fn node(&self) -> usize {
        self.node
    }

    /// Number of samples.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    #[inline]
    fn column(&self, j: usize) -> &[f64] {
        &self.products[j * self.m..(j + 1) * self.m]
    }

    fn margins(&self, support: &[usize], coefficients: &[f64]) -> Vec<f64> {
        let mut m = vec![0.0; self.m];
        for (&j, &c) in support.iter().zip(coefficients) {
            if c != 0.0 {
                for (mr, x) in m.iter_mut().zip(self.column(j)) {
                    *mr += c * x;
                }
            }
        }
        m
    }

    fn value_from_margins(&self, m: &[f64]) -> f64 {
        -m.iter().zip(&self.weights).map(|(&mr, w)| w * softplus(-2.0 * mr)).sum::<f64>()
    }

    fn terms(&self, m: &[f64]) -> MarginTerms {
        let mut value = 0.0;
        let mut grad_w = Vec::with_capacity(self.m);
        let mut curv_w = Vec::with_capacity(self.m);
        for (&mr, &w) in m.iter().zip(&self.weights) {
            // e = exp(-2|m|) in (0, 1]; everything below is built from it.
            let x = 2.0 * mr;
            let e = (-x.abs()).exp();
            let sp = if x < 0.0 { -x + e.ln_1p() } else { e.ln_1p() };
            value -= w * sp;
            let q_neg = if x >= 0.0 { e / (1.0 + e) } else { 1.0 / (1.0 + e) };
            grad_w.push(w * 2.0 * q_neg);
            curv_w.push(w * 4.0 * q_neg * (1.0 - q_neg));
        }
        MarginTerms { value, grad_w, curv_w }
    }

    fn dense_support(&self, coupling: &[f64]) -> (Vec<usize>, Vec<f64>) {
        assert_eq!(coupling.len(), self.p, "coupling vector has wrong length");
        (0..self.p)
            .filter(|&j| j != self.node && coupling[j] != 0.0)
            .map(|j| (j, coupling[j]))
            .unzip()
    }

    /// Mean log pseudo-likelihood at a dense coupling vector (entry `i` ignored).
    pub fn value(&self, coupling: &[f64]) -> f64 {
        let (s, c) = self.dense_support(coupling);
        self.value_from_margins(&self.margins(&s, &c))
    }

    /// Full gradient at a dense coupling vector.
    pub fn gradient(&self, coupling: &[f64]) -> Vec<f64> {
        let (s, c) = self.dense_support(coupling);
        self.full_gradient(&self.terms(&self.margins(&s, &c)).grad_w)
    }

    fn full_gradient(&self, grad_w: &[f64]) -> Vec<f64> {
        (0..self.p)
            .map(|j| if j == self.node { 0.0 } else { dot(self.column(j), grad_w) })
            .collect()
    }

    /// Hessian restricted to `support` (rows and columns in `support` order).
    pub fn hessian(&self, coupling: &[f64], support: &[usize]) -> DMatrix<f64> {
        let (s, c) = self.dense_support(coupling);
        let terms = self.terms(&self.margins(&s, &c));
        self.hessian_from_weights(&terms.curv_w, support)
    }

    fn hessian_from_weights(&self, curv_w: &[f64], support: &[usize]) -> DMatrix<f64> {
        let k = support.len();
        let mut h = DMatrix::zeros(k, k);
        let mut scratch = vec![0.0; self.m];
        for a in 0..k {
            for (s, (x, w)) in scratch.iter_mut().zip(self.column(support[a]).iter().zip(curv_w)) {
                *s = x * w;
            }
            for b in a..k {
                let v = -dot(&scratch, self.column(support[b]));
                h[(a, b)] = v;
                h[(b, a)] = v;
            }
        }
        h
    }

    /// Maximizes the pseudo-likelihood over couplings supported on `support`
    /// by damped Newton iterations.
    ///
    /// `warm` gives starting coefficients aligned with `support` as passed.
    /// When the Hessian cannot be factored the step falls back to the
    /// gradient direction. If a coefficient leaves `[-cap, cap]` it is
    /// clamped and the solve stops with `capped = true`. A solve whose line
    /// search finds no strict increase stops there, counting as converged
    /// when the gradient is within tolerance.
    pub fn maximize(&self, support: &[usize], warm: Option<&[f64]>, settings: &SolverSettings) -> RestrictedSolution {
        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_by_key(|&k| support[k]);
        let support_sorted: Vec<usize> = order.iter().map(|&k| support[k]).collect();
        assert!(!support_sorted.contains(&self.node), "support must exclude the target node");
        assert!(support_sorted.windows(2).all(|w| w[0] < w[1]), "support has duplicates");

        let k = support_sorted.len();
        let mut beta: Vec<f64> = match warm {
            Some(w) => {
                assert_eq!(w.len(), k, "warm start has wrong length");
                order.iter().map(|&o| w[o]).collect()
            }
            None => vec![0.0; k],
        };
        let mut terms = self.terms(&self.margins(&support_sorted, &beta));
        let mut converged = k == 0;
        let mut capped = false;
        let mut iterations = 0;

        while !converged && !capped && iterations < settings.max_iter {
            let g = DVector::from_iterator(k, support_sorted.iter().map(|&j| dot(self.column(j), &terms.grad_w)));
            let neg_h = -self.hessian_from_weights(&terms.curv_w, &support_sorted);
            let newton = neg_h.cholesky().map(|ch| ch.solve(&g)).filter(|d| d.iter().all(|v| v.is_finite()));
            let g_max = g.amax();
            let step = newton.as_ref().map_or(g_max, |d| d.amax());
            if g_max <= settings.grad_tol && step <= settings.step_tol {
                converged = true;
                break;
            }
            let direction = newton.unwrap_or(g);
            iterations += 1;

            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..=settings.max_halvings {
                let trial: Vec<f64> = beta.iter().zip(direction.iter()).map(|(b, d)| b + t * d).collect();
                let tm = self.margins(&support_sorted, &trial);
                if self.value_from_margins(&tm) > terms.value {
                    accepted = Some((trial, tm));
                    break;
                }
                t *= 0.5;
            }
            // No representable improvement: under quasi-separation the
            // objective is flat to machine precision long before the cap.
            let Some((trial, tm)) = accepted else {
                converged = g_max <= settings.grad_tol;
                break;
            };
            beta = trial;
            if beta.iter().any(|b| b.abs() > settings.cap) {
                for b in beta.iter_mut() {
                    *b = b.clamp(-settings.cap, settings.cap);
                }
                terms = self.terms(&self.margins(&support_sorted, &beta));
                capped = true;
            } else {
                terms = self.terms(&tm);
            }
        }

        RestrictedSolution {
            gradient: self.full_gradient(&terms.grad_w),
            support: support_sorted,
            coefficients: beta,
            pl_value: terms.value,
            converged,
            capped,
            iterations,
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean log pseudo-likelihood of node `i`.
pub fn pl_value(coupling: &[f64], data: &Dataset, i: usize) -> f64 {
    NodeObjective::new(data, i).value(coupling)
}

/// Gradient of [`pl_value`] over all `p` coordinates.
pub fn pl_gradient(coupling: &[f64], data: &Dataset, i: usize) -> Vec<f64> {
    NodeObjective::new(data, i).gradient(coupling)
}

/// Hessian of [`pl_value`] restricted to `support`.
pub fn pl_hessian(coupling: &[f64], data: &Dataset, i: usize, support: &[usize]) -> DMatrix<f64> {
    NodeObjective::new(data, i).hessian(coupling, support)
}

pub fn maximize_on_support(
    data: &Dataset,
    i: usize,
    support: &[usize],
    warm: Option<&[f64]>,
    settings: &SolverSettings,
) -> RestrictedSolution {
    NodeObjective::new(data, i).maximize(support, warm, settings)
}
