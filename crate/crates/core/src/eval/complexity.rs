//! Empirical sample complexity: the smallest sample size at which the
//! estimator recovers the true support in (nearly) every trial.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlideError};
use crate::exact::{exact_distribution, sample_exact, ExactDistribution, MAX_EXACT_P};
use crate::model::{CouplingMatrix, Dataset};
use crate::sampler::{gibbs_sample, GibbsSchedule};
use crate::slide::{reconstruct, SlideConfig};

/// How trial datasets are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerKind {
    /// Exact enumeration when `p` allows it, Gibbs with default schedule otherwise.
    Auto,
    Exact,
    Gibbs { burn_in: usize, thin: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityProtocol {
    pub trials: usize,
    /// Required fraction of exact recoveries.
    pub success_threshold: f64,
    pub n_start: usize,
    /// Geometric grid ratio.
    pub grid_factor: f64,
    /// Bisection stops when `(hi - lo) / hi` is at most this.
    pub refine_tol: f64,
    pub max_n: usize,
    pub sampler: SamplerKind,
}

impl Default for ComplexityProtocol {
    fn default() -> Self {
        Self {
            trials: 45,
            success_threshold: 1.0,
            n_start: 100,
            grid_factor: 1.3,
            refine_tol: 0.05,
            max_n: 1_000_000,
            sampler: SamplerKind::Auto,
        }
    }
}

impl ComplexityProtocol {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(SlideError::InvalidArgument(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.success_threshold) {
            return bad("success threshold must lie in [0, 1]");
        }
        if self.n_start < 3 || self.max_n < self.n_start {
            return bad("need 3 <= n_start <= max_n");
        }
        if !(self.grid_factor > 1.0) {
            return bad("grid factor must exceed 1");
        }
        if !(self.refine_tol > 0.0) {
            return bad("refinement tolerance must be positive");
        }
        Ok(())
    }

    /// Minimum number of successful trials.
    pub fn required_successes(&self) -> usize {
        ((self.success_threshold * self.trials as f64) - 1e-9).ceil().max(0.0) as usize
    }
}

/// Success count at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    pub successes: usize,
    pub trials: usize,
    pub success_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityResult {
    pub n_emp: usize,
    /// Every evaluated sample size in evaluation order.
    pub trace: Vec<TracePoint>,
}

/// SplitMix64 step; derives independent per-trial seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

enum Source<'a> {
    Exact(ExactDistribution),
    Gibbs(&'a CouplingMatrix, GibbsSchedule),
}

impl Source<'_> {
    fn draw(&self, n: usize, seed: u64) -> Result<Dataset> {
        match self {
            Source::Exact(dist) => sample_exact(dist, n, seed),
            Source::Gibbs(j, s) => gibbs_sample(j, n, s.burn_in, s.thin, seed),
        }
    }
}

/// Draws `trials` datasets of size `n` and counts exact recoveries.
///
/// Trial `t` always uses the seed stream `mix_seed(seed, t)`, so a dataset at
/// size `n` is a prefix of the same trial's dataset at any larger size.
pub fn success_count(
    truth: &CouplingMatrix,
    n: usize,
    trials: usize,
    sampler: SamplerKind,
    config: &SlideConfig,
    seed: u64,
) -> Result<usize> {
    let source = make_source(truth, sampler)?;
    count_with(&source, truth, n, trials, config, seed)
}

fn make_source(truth: &CouplingMatrix, sampler: SamplerKind) -> Result<Source<'_>> {
    Ok(match sampler {
        SamplerKind::Exact => Source::Exact(exact_distribution(truth)?),
        SamplerKind::Auto if truth.p() <= MAX_EXACT_P => Source::Exact(exact_distribution(truth)?),
        SamplerKind::Auto => Source::Gibbs(truth, GibbsSchedule::default_for(truth.p())),
        SamplerKind::Gibbs { burn_in, thin } => Source::Gibbs(truth, GibbsSchedule { burn_in, thin }),
    })
}

fn count_with(
    source: &Source<'_>,
    truth: &CouplingMatrix,
    n: usize,
    trials: usize,
    config: &SlideConfig,
    seed: u64,
) -> Result<usize> {
    let outcomes: Vec<Result<bool>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let data = source.draw(n, mix_seed(seed, t as u64))?;
            Ok(reconstruct(&data, config)?.same_support(truth))
        })
        .collect();
    let mut successes = 0;
    for o in outcomes {
        successes += usize::from(o?);
    }
    Ok(successes)
}

/// Geometric search from `n_start` followed by bisection between the last
/// failing and first passing sample size.
pub fn empirical_sample_complexity(
    truth: &CouplingMatrix,
    protocol: &ComplexityProtocol,
    config: &SlideConfig,
    seed: u64,
) -> Result<ComplexityResult> {
    protocol.validate()?;
    config.validate()?;
    let source = make_source(truth, protocol.sampler)?;
    let need = protocol.required_successes();
    let mut trace = Vec::new();
    let evaluate = |n: usize, trace: &mut Vec<TracePoint>| -> Result<bool> {
        let successes = count_with(&source, truth, n, protocol.trials, config, seed)?;
        let point = TracePoint {
            n,
            successes,
            trials: protocol.trials,
            success_rate: successes as f64 / protocol.trials as f64,
        };
        info!("n = {n}: {successes}/{} exact recoveries", protocol.trials);
        trace.push(point);
        Ok(successes >= need)
    };

    let mut lo: Option<usize> = None;
    let mut n = protocol.n_start;
    let hi = loop {
        if evaluate(n, &mut trace)? {
            break n;
        }
        lo = Some(n);
        if n >= protocol.max_n {
            return Err(SlideError::MaxNExceeded { max_n: protocol.max_n, trace });
        }
        n = ((n as f64 * protocol.grid_factor).round() as usize).max(n + 1).min(protocol.max_n);
    };

    let mut hi = hi;
    if let Some(mut lo) = lo {
        while (hi - lo) as f64 / hi as f64 > protocol.refine_tol && hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if evaluate(mid, &mut trace)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }
    Ok(ComplexityResult { n_emp: hi, trace })
}
