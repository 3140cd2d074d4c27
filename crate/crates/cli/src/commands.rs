//! The single-shot subcommands.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use slide_core::eval::metrics::{exact_recovery, mse, structure_metrics, ConfusionCounts};
use slide_core::io::{format_model, format_samples, ingest_vote_matrix, parse_key_values, parse_model, parse_samples, VoteFormat};
use slide_core::slide::DEFAULT_GIC_PATIENCE;
use slide_core::{
    exact_distribution, gibbs_sample, reconstruct_with_trace, sample_exact, BenchmarkModel, GibbsSchedule, SlideConfig,
    Topology,
};

use crate::manifest::{write_atomic, RunManifest};
use crate::{EvaluateArgs, Failure, GenerateArgs, IngestArgs, ReconstructArgs, SampleArgs, SolverArgs};

fn invalid(msg: impl Into<String>) -> Failure {
    Failure::Validation(msg.into())
}

/// Reads an input file; a missing or unreadable input is a usage error.
pub fn read_input(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))
}

/// Writes `bytes` to `path` atomically, records it and writes the manifest.
fn finish(mut manifest: RunManifest, started: Instant, outputs: &[(&Path, &[u8])]) -> Result<(), Failure> {
    for (path, bytes) in outputs {
        write_atomic(path, bytes)?;
        manifest.artifact(path, bytes);
    }
    manifest.wall_time_ms = started.elapsed().as_millis();
    manifest.write_next_to(outputs[0].0)?;
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let topology = match (&a.rrg, a.pbsl) {
        (Some(v), None) => Topology::Rrg { p: v[0], d: v[1] },
        (None, Some(l)) => Topology::Pbsl { l },
        _ => return Err(invalid("exactly one of --rrg P D or --pbsl L is required")),
    };
    let spec = BenchmarkModel { topology, pattern: a.pattern.into(), beta: a.beta, lambda: a.lambda, seed: a.seed };
    let j = spec.build()?;
    let text = format_model(&j);
    let mut m = RunManifest::new("generate");
    m.param("topology", topology).param("pattern", spec.pattern).param("beta", a.beta).param("lambda", a.lambda);
    m.seed = Some(a.seed);
    finish(m, started, &[(&a.out, text.as_bytes())])
}

pub fn sample(a: &SampleArgs) -> Result<(), Failure> {
    let started = Instant::now();
    if a.n == 0 {
        return Err(invalid("--n must be at least 1"));
    }
    if a.thin == 0 {
        return Err(invalid("--thin must be at least 1"));
    }
    let model_text = read_input(&a.model)?;
    let j = parse_model(&model_text)?;
    let mut m = RunManifest::new("sample");
    m.param("n", a.n).param("model", a.model.display().to_string());
    let data = if a.exact {
        m.param("sampler", "exact");
        sample_exact(&exact_distribution(&j)?, a.n, a.seed)?
    } else {
        let schedule = GibbsSchedule { burn_in: a.burn_in.unwrap_or(GibbsSchedule::default_for(j.p()).burn_in), thin: a.thin };
        m.param("sampler", "gibbs").param("burn_in", schedule.burn_in).param("thin", schedule.thin);
        gibbs_sample(&j, a.n, schedule.burn_in, schedule.thin, a.seed)?
    };
    m.seed = Some(a.seed);
    m.artifact(&a.model, model_text.as_bytes());
    let text = format_samples(&data);
    finish(m, started, &[(&a.out, text.as_bytes())])
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, Failure> {
    v.parse().map_err(|_| invalid(format!("config key {key}: cannot parse {v:?}")))
}

/// Flags layered over the optional key=value config file.
pub fn resolve_config(a: &SolverArgs, threads: Option<usize>) -> Result<(SlideConfig, u64), Failure> {
    let mut cfg = SlideConfig { threads, ..SlideConfig::default() };
    let mut seed = a.seed;
    if let Some(path) = &a.config {
        for (k, v) in parse_key_values(&read_input(path)?)? {
            match k.as_str() {
                "dmax" | "d_max" => cfg.d_max = Some(parse_value(&k, &v)?),
                "tau" => cfg.tau = Some(parse_value(&k, &v)?),
                "lambda" => cfg.lambda = Some(parse_value(&k, &v)?),
                "gamma" => cfg.gamma = Some(parse_value(&k, &v)?),
                "sigma_const" | "sigma-const" => cfg.sigma_const = parse_value(&k, &v)?,
                "patience" => cfg.gic_patience = patience(parse_value(&k, &v)?),
                "max_splices" => cfg.max_splices = parse_value(&k, &v)?,
                "seed" => seed = parse_value(&k, &v)?,
                "threads" => {
                    if threads.is_none() {
                        cfg.threads = Some(parse_value(&k, &v)?)
                    }
                }
                _ => return Err(invalid(format!("unknown config key {k:?}"))),
            }
        }
    }
    if a.dmax.is_some() {
        cfg.d_max = a.dmax;
    }
    if a.tau.is_some() {
        cfg.tau = a.tau;
    }
    if a.lambda.is_some() {
        cfg.lambda = a.lambda;
    }
    if a.gamma.is_some() {
        cfg.gamma = a.gamma;
    }
    if let Some(c) = a.sigma_const {
        cfg.sigma_const = c;
    }
    if let Some(k) = a.patience {
        cfg.gic_patience = patience(k);
    }
    cfg.validate()?;
    Ok((cfg, seed))
}

fn patience(k: usize) -> Option<usize> {
    (k > 0).then_some(k)
}

#[derive(Serialize)]
struct NodeTrace<'a> {
    node: usize,
    chosen_d: usize,
    support: &'a [usize],
    coefficients: &'a [f64],
    gic: &'a [f64],
    pl: Vec<f64>,
    splices: &'a [usize],
}

#[derive(Serialize)]
struct ReconstructTrace<'a> {
    n: usize,
    p: usize,
    d_max: usize,
    tau: f64,
    nodes: Vec<NodeTrace<'a>>,
}

pub fn default_trace_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".trace.json");
    out.with_file_name(name)
}

pub fn reconstruct(a: &ReconstructArgs, threads: Option<usize>) -> Result<(), Failure> {
    let started = Instant::now();
    let (cfg, seed) = resolve_config(&a.solver, threads)?;
    let samples_text = read_input(&a.samples)?;
    let data = parse_samples(&samples_text)?;
    let rec = reconstruct_with_trace(&data, &cfg)?;
    let trace = ReconstructTrace {
        n: data.n(),
        p: data.p(),
        d_max: rec.d_max,
        tau: rec.tau,
        nodes: rec
            .nodes
            .iter()
            .map(|s| NodeTrace {
                node: s.node,
                chosen_d: s.chosen_d,
                support: &s.chosen().support,
                coefficients: &s.chosen().coefficients,
                gic: &s.gic_values,
                pl: s.per_d.iter().map(|r| r.pl_value).collect(),
                splices: &s.splices,
            })
            .collect(),
    };
    let mut trace_json = serde_json::to_string_pretty(&trace).expect("trace serializes");
    trace_json.push('\n');
    let model_text = format_model(&rec.coupling);
    let trace_path = a.trace.clone().unwrap_or_else(|| default_trace_path(&a.out));

    let mut m = RunManifest::new("reconstruct");
    m.param("d_max", rec.d_max)
        .param("tau", rec.tau)
        .param("lambda", cfg.lambda)
        .param("gamma", cfg.gamma)
        .param("sigma_const", cfg.sigma_const)
        .param("gic_patience", cfg.gic_patience.unwrap_or(0))
        .param("default_gic_patience", DEFAULT_GIC_PATIENCE)
        .param("solver", cfg.solver_settings())
        .param("max_splices", cfg.max_splices);
    m.seed = Some(seed);
    m.artifact(&a.samples, samples_text.as_bytes());
    finish(m, started, &[(&a.out, model_text.as_bytes()), (&trace_path, trace_json.as_bytes())])
}

#[derive(Serialize)]
struct Metrics {
    tpr: f64,
    fpr: f64,
    mcc: f64,
    mse: f64,
    exact_recovery: bool,
    counts: ConfusionCounts,
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let est_text = read_input(&a.estimate)?;
    let truth_text = read_input(&a.truth)?;
    let est = parse_model(&est_text)?;
    let truth = parse_model(&truth_text)?;
    let s = structure_metrics(&est, &truth)?;
    let metrics = Metrics {
        tpr: s.tpr,
        fpr: s.fpr,
        mcc: s.mcc,
        mse: mse(&est, &truth)?,
        exact_recovery: exact_recovery(&est, &truth)?,
        counts: s.counts,
    };
    let mut json = serde_json::to_string_pretty(&metrics).expect("metrics serialize");
    json.push('\n');
    match &a.out {
        None => {
            print!("{json}");
            Ok(())
        }
        Some(out) => {
            let mut m = RunManifest::new("evaluate");
            m.artifact(&a.estimate, est_text.as_bytes()).artifact(&a.truth, truth_text.as_bytes());
            finish(m, started, &[(out, json.as_bytes())])
        }
    }
}

pub fn ingest_votes(a: &IngestArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let format_text = read_input(&a.format)?;
    let input_text = read_input(&a.input)?;
    let format = VoteFormat::from_key_values(&format_text)?;
    let data = ingest_vote_matrix(&input_text, &format)?;
    let text = format_samples(&data);
    let mut m = RunManifest::new("ingest-votes");
    m.param("n", data.n()).param("p", data.p());
    m.artifact(&a.input, input_text.as_bytes()).artifact(&a.format, format_text.as_bytes());
    finish(m, started, &[(&a.out, text.as_bytes())])
}
