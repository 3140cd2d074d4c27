//! ℓ0-constrained nodewise pseudo-likelihood maximization by splicing.
//!
//! Three nested loops:
//!
//! * inner: for a fixed neighbourhood size `d`, repeatedly swap the `s`
//!   active nodes with the smallest squared coefficient for the `s`
//!   inactive nodes with the largest squared gradient, keeping a swap only
//!   when the pseudo-likelihood improves by more than `σ_d`;
//! * middle: warm-started sweep over `d = 0..=d_max`, keeping the size that
//!   maximizes the generalized information criterion;
//! * outer: every node independently, followed by symmetrization and
//!   thresholding at `τ`.
//!
//! Pseudo-likelihoods here are per-sample means, so the GIC penalty and
//! `σ_d` are both divided by `n`.

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlideError};
use crate::model::{CouplingMatrix, Dataset};
use crate::pl::{NodeObjective, RestrictedSolution, SolverSettings};

/// Default early-stopping window for the neighbourhood-size sweep.
pub const DEFAULT_GIC_PATIENCE: usize = 3;

/// Algorithm hyperparameters. Unset fields resolve from `(n, p)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlideConfig {
    /// Largest neighbourhood size searched; defaults to
    /// `⌈n / (log p · log log n)⌉`, always capped at `min(p - 1, n / 2)`.
    pub d_max: Option<usize>,
    /// Constant `c` in `σ_d = c · d · log p · log log n / n`.
    pub sigma_const: f64,
    /// Known minimum signal; sets the default threshold to `λ / 2`.
    pub lambda: Option<f64>,
    /// Explicit threshold, overriding the `λ`-derived default.
    pub tau: Option<f64>,
    /// Known maximum neighbourhood weight; sets the coefficient cap to `2γ`.
    pub gamma: Option<f64>,
    pub solver: SolverSettings,
    /// Stop the size sweep after this many consecutive sizes without a GIC
    /// improvement. `None` sweeps all sizes up to `d_max`.
    pub gic_patience: Option<usize>,
    /// Upper bound on accepted splices per inner loop.
    pub max_splices: usize,
    /// Thread count for the nodewise loop; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SlideConfig {
    fn default() -> Self {
        Self {
            d_max: None,
            sigma_const: 0.01,
            lambda: None,
            tau: None,
            gamma: None,
            solver: SolverSettings::default(),
            gic_patience: Some(DEFAULT_GIC_PATIENCE),
            max_splices: 10_000,
            threads: None,
        }
    }
}

impl SlideConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SlideError::InvalidArgument(m));
        if !(self.sigma_const > 0.0) {
            return bad(format!("sigma constant must be positive, got {}", self.sigma_const));
        }
        if let Some(t) = self.tau {
            if !(t >= 0.0) {
                return bad(format!("tau must be non-negative, got {t}"));
            }
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0) {
                return bad(format!("lambda must be positive, got {l}"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 0.0) {
                return bad(format!("gamma must be positive, got {g}"));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Threshold `τ`: explicit value, else `λ / 2`, else 0.
    pub fn tau(&self) -> f64 {
        self.tau.or(self.lambda.map(|l| l / 2.0)).unwrap_or(0.0)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        match self.gamma {
            Some(g) => SolverSettings { cap: 2.0 * g, ..self.solver },
            None => self.solver,
        }
    }

    pub fn d_max_for(&self, n: usize, p: usize) -> usize {
        let cap = p.saturating_sub(1).min(n / 2);
        let d = self.d_max.unwrap_or_else(|| {
            let scale = (p as f64).ln() * (n as f64).ln().ln();
            if scale > 0.0 {
                (n as f64 / scale).ceil() as usize
            } else {
                cap
            }
        });
        d.min(cap)
    }

    /// Splice acceptance threshold `σ_d`.
    pub fn sigma(&self, d: usize, n: usize, p: usize) -> f64 {
        self.sigma_const * gic_penalty(d, n, p)
    }
}

/// `d · log p · log log n / n`.
pub fn gic_penalty(d: usize, n: usize, p: usize) -> f64 {
    d as f64 * (p as f64).ln() * (n as f64).ln().ln() / n as f64
}

/// Generalized information criterion of a size-`d` solution.
pub fn gic(solution: &RestrictedSolution, d: usize, n: usize, p: usize) -> f64 {
    solution.pl_value - gic_penalty(d, n, p)
}

/// Current active set and its restricted maximizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SplicingState {
    pub active: Vec<usize>,
    pub solution: RestrictedSolution,
    pub k: usize,
}

impl SplicingState {
    pub fn new(solution: RestrictedSolution) -> Self {
        Self { active: solution.support.clone(), solution, k: 0 }
    }
}

/// Exchange sets for swap size `s`: the `s` active nodes with the smallest
/// squared coefficient, and the `s` inactive nodes (other than `node`) with
/// the largest squared gradient. Ties go to the smaller index. The second
/// set is shorter than `s` when fewer inactive nodes exist.
pub fn importance_sets(state: &SplicingState, s: usize, node: usize) -> (Vec<usize>, Vec<usize>) {
    let sol = &state.solution;
    let mut backward: Vec<(f64, usize)> = sol
        .support
        .iter()
        .zip(&sol.coefficients)
        .map(|(&j, &c)| (c * c, j))
        .collect();
    backward.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut remove: Vec<usize> = backward.iter().take(s).map(|e| e.1).collect();
    remove.sort_unstable();

    let mut add = forward_order(sol, node);
    add.truncate(s);
    add.sort_unstable();
    (remove, add)
}

/// Inactive nodes other than `node`, by decreasing squared gradient.
fn forward_order(sol: &RestrictedSolution, node: usize) -> Vec<usize> {
    let mut forward: Vec<(f64, usize)> = (0..sol.gradient.len())
        .filter(|&j| j != node && sol.support.binary_search(&j).is_err())
        .map(|j| (sol.gradient[j] * sol.gradient[j], j))
        .collect();
    forward.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    forward.into_iter().map(|e| e.1).collect()
}

fn warm_coefficients(from: &RestrictedSolution, support: &[usize]) -> Vec<f64> {
    support.iter().map(|&j| from.coefficient(j).unwrap_or(0.0)).collect()
}

/// One pass of the inner loop: tries `s = 1, 2, …` and adopts the first
/// exchange whose pseudo-likelihood gain exceeds `sigma`.
pub fn splice_once(
    objective: &NodeObjective,
    state: SplicingState,
    d: usize,
    sigma: f64,
    settings: &SolverSettings,
) -> (SplicingState, bool) {
    let node = objective.node();
    let inactive = objective.p() - 1 - state.active.len();
    for s in 1..=d.min(inactive) {
        let (remove, add) = importance_sets(&state, s, node);
        let mut candidate: Vec<usize> = state
            .active
            .iter()
            .copied()
            .filter(|j| remove.binary_search(j).is_err())
            .chain(add)
            .collect();
        candidate.sort_unstable();
        let warm = warm_coefficients(&state.solution, &candidate);
        let trial = objective.maximize(&candidate, Some(&warm), settings);
        if trial.pl_value - state.solution.pl_value > sigma {
            return (SplicingState { active: trial.support.clone(), solution: trial, k: state.k + 1 }, true);
        }
    }
    (state, false)
}

/// Result of the inner loop at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedSizeSolution {
    pub solution: RestrictedSolution,
    pub splices: usize,
}

/// Inner loop at size `d`, warm-started from the size `d - 1` solution.
pub fn solve_fixed_d(
    objective: &NodeObjective,
    d: usize,
    warm: &RestrictedSolution,
    sigma: f64,
    settings: &SolverSettings,
    max_splices: usize,
) -> FixedSizeSolution {
    let node = objective.node();
    let mut init: Vec<usize> = warm.support.clone();
    if init.len() > d {
        let mut by_weight: Vec<(f64, usize)> = warm
            .support
            .iter()
            .zip(&warm.coefficients)
            .map(|(&j, &c)| (c * c, j))
            .collect();
        by_weight.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        init = by_weight.into_iter().take(d).map(|e| e.1).collect();
    }
    for j in forward_order(warm, node) {
        if init.len() >= d {
            break;
        }
        init.push(j);
    }
    init.sort_unstable();
    let start = objective.maximize(&init, Some(&warm_coefficients(warm, &init)), settings);

    let mut state = SplicingState::new(start);
    loop {
        if state.k >= max_splices {
            warn!("node {node}, d = {d}: splice limit {max_splices} reached");
            break;
        }
        let (next, accepted) = splice_once(objective, state, d, sigma, settings);
        state = next;
        if !accepted {
            break;
        }
    }
    debug!("node {node}, d = {d}: {} splices, pl = {}", state.k, state.solution.pl_value);
    FixedSizeSolution { splices: state.k, solution: state.solution }
}

/// Middle-loop trace for one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSolution {
    pub node: usize,
    /// Solution for each size `d = 0, 1, …`.
    pub per_d: Vec<RestrictedSolution>,
    pub gic_values: Vec<f64>,
    pub splices: Vec<usize>,
    pub chosen_d: usize,
}

impl NodeSolution {
    pub fn chosen(&self) -> &RestrictedSolution {
        &self.per_d[self.chosen_d]
    }
}

/// First maximizer (smallest index on ties).
fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    best
}

pub fn solve_node(data: &Dataset, node: usize, config: &SlideConfig) -> Result<NodeSolution> {
    config.validate()?;
    let n = data.n();
    if n < 3 {
        return Err(SlideError::InvalidArgument(format!("need at least 3 samples, got {n}")));
    }
    let objective = NodeObjective::new(data, node);
    Ok(solve_node_objective(&objective, config))
}

fn solve_node_objective(objective: &NodeObjective, config: &SlideConfig) -> NodeSolution {
    let (n, p) = (objective.n(), objective.p());
    let settings = config.solver_settings();
    let d_max = config.d_max_for(n, p);

    let empty = objective.maximize(&[], None, &settings);
    let mut gic_values = vec![gic(&empty, 0, n, p)];
    let mut per_d = vec![empty];
    let mut splices = vec![0];
    let mut best = 0;
    for d in 1..=d_max {
        let sigma = config.sigma(d, n, p);
        let fixed = solve_fixed_d(objective, d, &per_d[d - 1], sigma, &settings, config.max_splices);
        gic_values.push(gic(&fixed.solution, d, n, p));
        per_d.push(fixed.solution);
        splices.push(fixed.splices);
        if gic_values[d] > gic_values[best] {
            best = d;
        }
        if let Some(patience) = config.gic_patience {
            if d - best >= patience {
                break;
            }
        }
    }
    let chosen_d = first_argmax(&gic_values);
    NodeSolution { node: objective.node(), per_d, gic_values, splices, chosen_d }
}

/// Symmetrizes nodewise coupling rows and zeroes entries whose averaged
/// magnitude falls below `tau`.
pub fn symmetrize(rows: &[Vec<f64>], tau: f64) -> CouplingMatrix {
    let p = rows.len();
    let mut j = CouplingMatrix::zeros(p);
    for a in 0..p {
        for b in (a + 1)..p {
            let avg = 0.5 * (rows[a][b] + rows[b][a]);
            if avg != 0.0 && avg.abs() >= tau {
                j.set(a, b, avg);
            }
        }
    }
    j
}

/// Estimated couplings plus the per-node traces behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub coupling: CouplingMatrix,
    pub nodes: Vec<NodeSolution>,
    pub tau: f64,
    pub d_max: usize,
}

/// Full reconstruction. Output does not depend on the thread count.
pub fn reconstruct_with_trace(data: &Dataset, config: &SlideConfig) -> Result<Reconstruction> {
    config.validate()?;
    let (n, p) = (data.n(), data.p());
    if n < 3 {
        return Err(SlideError::InvalidArgument(format!("need at least 3 samples, got {n}")));
    }
    let run = || -> Vec<NodeSolution> {
        (0..p)
            .into_par_iter()
            .map(|i| solve_node_objective(&NodeObjective::new(data, i), config))
            .collect()
    };
    let nodes = match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| SlideError::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    let rows: Vec<Vec<f64>> = nodes.iter().map(|s| s.chosen().coupling(p)).collect();
    let tau = config.tau();
    Ok(Reconstruction { coupling: symmetrize(&rows, tau), nodes, tau, d_max: config.d_max_for(n, p) })
}

pub fn reconstruct(data: &Dataset, config: &SlideConfig) -> Result<CouplingMatrix> {
    reconstruct_with_trace(data, config).map(|r| r.coupling)
}
