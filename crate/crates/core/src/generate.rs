//! Benchmark coupling matrices: random regular graphs and periodic square
//! lattices with the standard interaction patterns.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SlideError};
use crate::model::{CouplingMatrix, FamilyParams};

const MAX_RESTARTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Random `d`-regular graph on `p` nodes.
    Rrg { p: usize, d: usize },
    /// `L × L` torus.
    Pbsl { l: usize },
}

impl Topology {
    pub fn p(&self) -> usize {
        match *self {
            Topology::Rrg { p, .. } => p,
            Topology::Pbsl { l } => l * l,
        }
    }

    pub fn degree(&self) -> usize {
        match *self {
            Topology::Rrg { d, .. } => d,
            Topology::Pbsl { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pattern {
    /// All couplings `β` except one edge at `λ`.
    FerroOneWeak,
    /// Couplings `±β` with i.i.d. signs, one edge forced to `+λ`, another to `-λ`.
    MixedTwoWeak,
    /// All couplings `β` except one edge at `-λ`.
    FerroOneWeakNegative,
    /// A perfect matching of `λ` edges, all other couplings `β`.
    DegreeDisentangled,
}

impl std::str::FromStr for Pattern {
    type Err = SlideError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ferro-one-weak" => Ok(Pattern::FerroOneWeak),
            "mixed-two-weak" => Ok(Pattern::MixedTwoWeak),
            "ferro-one-weak-negative" => Ok(Pattern::FerroOneWeakNegative),
            "degree-disentangled" => Ok(Pattern::DegreeDisentangled),
            other => Err(SlideError::InvalidArgument(format!("unknown pattern {other:?}"))),
        }
    }
}

impl std::fmt::Display for Pattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Pattern::FerroOneWeak => "ferro-one-weak",
            Pattern::MixedTwoWeak => "mixed-two-weak",
            Pattern::FerroOneWeakNegative => "ferro-one-weak-negative",
            Pattern::DegreeDisentangled => "degree-disentangled",
        })
    }
}

/// Generator specification for a ground-truth coupling matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkModel {
    pub topology: Topology,
    pub pattern: Pattern,
    pub beta: f64,
    pub lambda: f64,
    pub seed: u64,
}

impl BenchmarkModel {
    pub fn build(&self) -> Result<CouplingMatrix> {
        match self.topology {
            Topology::Rrg { p, d } => generate_rrg(p, d, self.beta, self.lambda, self.pattern, self.seed),
            Topology::Pbsl { l } => generate_pbsl(l, self.beta, self.lambda, self.pattern, self.seed),
        }
    }

    /// Structural parameters every model from this specification satisfies.
    pub fn declared_params(&self) -> FamilyParams {
        let d = self.topology.degree();
        let (beta, lambda) = (self.beta.abs(), self.lambda.abs());
        let gamma = (d as f64 - 1.0) * beta + beta.max(lambda);
        FamilyParams { lambda: beta.min(lambda), gamma, d }
    }
}

fn check_weights(beta: f64, lambda: f64) -> Result<()> {
    if !(beta.is_finite() && lambda.is_finite()) || beta <= 0.0 || lambda <= 0.0 {
        return Err(SlideError::InvalidArgument(format!(
            "beta and lambda must be positive and finite (beta = {beta}, lambda = {lambda})"
        )));
    }
    Ok(())
}

/// Random `d`-regular graph with couplings assigned by `pattern`.
pub fn generate_rrg(
    p: usize,
    d: usize,
    beta: f64,
    lambda: f64,
    pattern: Pattern,
    seed: u64,
) -> Result<CouplingMatrix> {
    check_weights(beta, lambda)?;
    if d == 0 || d >= p {
        return Err(SlideError::DegreeInfeasible(format!("need 1 <= d < p, got d = {d}, p = {p}")));
    }
    if (p * d) % 2 != 0 {
        return Err(SlideError::DegreeInfeasible(format!("p·d must be even, got p = {p}, d = {d}")));
    }
    if pattern == Pattern::FerroOneWeakNegative {
        return Err(SlideError::InvalidArgument(
            "ferro-one-weak-negative is defined on the square lattice only".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if pattern == Pattern::DegreeDisentangled {
        if p % 2 != 0 {
            return Err(SlideError::DegreeInfeasible(format!(
                "degree-disentangled needs a perfect matching, p = {p} is odd"
            )));
        }
        let mut nodes: Vec<usize> = (0..p).collect();
        nodes.shuffle(&mut rng);
        let matching: Vec<(usize, usize)> =
            nodes.chunks_exact(2).map(|c| (c[0].min(c[1]), c[0].max(c[1]))).collect();
        let forbidden: HashSet<(usize, usize)> = matching.iter().copied().collect();
        let rest = random_regular_edges(p, d - 1, &forbidden, &mut rng)?;
        let mut j = CouplingMatrix::zeros(p);
        for &(a, b) in &rest {
            j.set(a, b, beta);
        }
        for &(a, b) in &matching {
            j.set(a, b, lambda);
        }
        return Ok(j);
    }
    let edges = random_regular_edges(p, d, &HashSet::new(), &mut rng)?;
    assign_pattern(p, &edges, beta, lambda, pattern, d, &mut rng)
}

/// `L × L` periodic square lattice with couplings assigned by `pattern`.
pub fn generate_pbsl(l: usize, beta: f64, lambda: f64, pattern: Pattern, seed: u64) -> Result<CouplingMatrix> {
    check_weights(beta, lambda)?;
    if l < 3 {
        return Err(SlideError::InvalidArgument(format!("lattice side must be >= 3, got {l}")));
    }
    let p = l * l;
    let mut edges = Vec::with_capacity(2 * p);
    for r in 0..l {
        for c in 0..l {
            let v = r * l + c;
            for w in [r * l + (c + 1) % l, ((r + 1) % l) * l + c] {
                edges.push((v.min(w), v.max(w)));
            }
        }
    }
    edges.sort_unstable();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if pattern == Pattern::DegreeDisentangled {
        if l % 2 != 0 {
            return Err(SlideError::DegreeInfeasible(format!(
                "degree-disentangled needs a perfect matching, p = {p} is odd"
            )));
        }
        let mut j = CouplingMatrix::zeros(p);
        for &(a, b) in &edges {
            j.set(a, b, beta);
        }
        // Horizontal dominoes (r, 2k)-(r, 2k+1) form a perfect matching.
        for r in 0..l {
            for c in (0..l).step_by(2) {
                j.set(r * l + c, r * l + c + 1, lambda);
            }
        }
        return Ok(j);
    }
    assign_pattern(p, &edges, beta, lambda, pattern, 4, &mut rng)
}

fn assign_pattern(
    p: usize,
    edges: &[(usize, usize)],
    beta: f64,
    lambda: f64,
    pattern: Pattern,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Result<CouplingMatrix> {
    let mut j = CouplingMatrix::zeros(p);
    match pattern {
        Pattern::FerroOneWeak | Pattern::FerroOneWeakNegative => {
            for &(a, b) in edges {
                j.set(a, b, beta);
            }
            let (a, b) = edges[rng.random_range(0..edges.len())];
            let weak = if pattern == Pattern::FerroOneWeak { lambda } else { -lambda };
            j.set(a, b, weak);
        }
        Pattern::MixedTwoWeak => {
            if edges.len() < 2 {
                return Err(SlideError::InvalidArgument("mixed-two-weak needs at least two edges".into()));
            }
            for &(a, b) in edges {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                j.set(a, b, sign * beta);
            }
            let gamma = (d as f64 - 1.0) * beta + beta.max(lambda);
            let first = rng.random_range(0..edges.len());
            j.set(edges[first].0, edges[first].1, lambda);
            let mut attempts = 0;
            loop {
                attempts += 1;
                if attempts > MAX_RESTARTS {
                    return Err(SlideError::ConstructionFailed {
                        what: "second weak edge within the weight bound".into(),
                        attempts: MAX_RESTARTS,
                    });
                }
                let second = rng.random_range(0..edges.len());
                if second == first {
                    continue;
                }
                let (a, b) = edges[second];
                let old = j.get(a, b);
                j.set(a, b, -lambda);
                let row_weight = |i: usize| j.row(i).iter().map(|v| v.abs()).sum::<f64>();
                if row_weight(a) <= gamma + 1e-12 && row_weight(b) <= gamma + 1e-12 {
                    break;
                }
                j.set(a, b, old);
            }
        }
        Pattern::DegreeDisentangled => unreachable!("handled by the topology generators"),
    }
    Ok(j)
}

/// Simple `d`-regular edge set avoiding `forbidden`, built by random stub
/// pairing with restart on dead ends.
fn random_regular_edges(
    p: usize,
    d: usize,
    forbidden: &HashSet<(usize, usize)>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, usize)>> {
    if d == 0 {
        return Ok(Vec::new());
    }
    'restart: for _ in 0..MAX_RESTARTS {
        let mut stubs: Vec<usize> = (0..p).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(p * d / 2);
        let suitable = |a: usize, b: usize, edges: &HashSet<(usize, usize)>| {
            let key = (a.min(b), a.max(b));
            a != b && !edges.contains(&key) && !forbidden.contains(&key)
        };
        while !stubs.is_empty() {
            let m = stubs.len();
            let mut paired = false;
            for _ in 0..(4 * m) {
                let x = rng.random_range(0..m);
                let y = rng.random_range(0..m);
                if x != y && suitable(stubs[x], stubs[y], &edges) {
                    let (a, b) = (stubs[x], stubs[y]);
                    edges.insert((a.min(b), a.max(b)));
                    let (hi, lo) = (x.max(y), x.min(y));
                    stubs.swap_remove(hi);
                    stubs.swap_remove(lo);
                    paired = true;
                    break;
                }
            }
            if !paired {
                let any = (0..m).any(|x| ((x + 1)..m).any(|y| suitable(stubs[x], stubs[y], &edges)));
                if !any {
                    continue 'restart;
                }
            }
        }
        let mut out: Vec<_> = edges.into_iter().collect();
        out.sort_unstable();
        return Ok(out);
    }
    Err(SlideError::ConstructionFailed { what: format!("{d}-regular graph on {p} nodes"), attempts: MAX_RESTARTS })
}
