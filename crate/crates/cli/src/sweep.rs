//! Sample-complexity sweeps over the degree or the coupling strength.
//!
//! Outputs are a long-format trace CSV (one row per evaluated sample size
//! per cell) and a summary JSON holding each cell's `n_emp` and the fit.
//! Both are rewritten after every cell, so an interrupted sweep resumes by
//! skipping the cells already in the summary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use slide_core::eval::complexity::{empirical_sample_complexity, mix_seed, ComplexityProtocol, SamplerKind, TracePoint};
use slide_core::eval::fit::{linear_fit, LinearFit};
use slide_core::{BenchmarkModel, Pattern, SlideConfig, SlideError, Topology};

use crate::commands::read_input;
use crate::manifest::{write_atomic, RunManifest};
use crate::{Axis, Failure, SweepArgs, TopologyArg};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub value: f64,
    /// Regressor: `d` on the degree axis, `d·β` on the beta axis.
    pub x: f64,
    pub model: BenchmarkModel,
    /// `None` when the cell hit `max_n` without meeting the threshold.
    pub n_emp: Option<usize>,
    pub trace: Vec<TracePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub axis: String,
    pub params: serde_json::Value,
    pub cells: Vec<CellResult>,
    /// Least squares of `n_emp` on `d` (degree) or `ln n_emp` on `d·β` (beta).
    pub fit: Option<LinearFit>,
}

/// Seeds derive from the grid value, not its position, so a cell's result
/// does not depend on which other cells share the sweep.
fn cell_seed(base: u64, value: f64, stream: u64) -> u64 {
    mix_seed(mix_seed(base, value.to_bits()), stream)
}

fn model_for(a: &SweepArgs, value: f64) -> Result<BenchmarkModel, Failure> {
    let seed = cell_seed(a.seed, value, 0);
    Ok(match a.axis {
        Axis::Degree => {
            if value.fract() != 0.0 || value < 2.0 {
                return Err(Failure::Validation(format!("degree grid values must be integers ≥ 2, got {value}")));
            }
            let d = value as usize;
            if !(a.gamma > a.lambda) {
                return Err(Failure::Validation("--gamma must exceed --lambda on the degree axis".into()));
            }
            BenchmarkModel {
                topology: Topology::Rrg { p: a.p, d },
                pattern: Pattern::DegreeDisentangled,
                beta: (a.gamma - a.lambda) / (d as f64 - 1.0),
                lambda: a.lambda,
                seed,
            }
        }
        Axis::Beta => BenchmarkModel {
            topology: match a.topology {
                TopologyArg::Rrg => Topology::Rrg { p: a.p, d: a.d },
                TopologyArg::Pbsl => Topology::Pbsl { l: a.l },
            },
            pattern: a.pattern.into(),
            beta: value,
            lambda: a.lambda,
            seed,
        },
    })
}

fn regressor(axis: Axis, model: &BenchmarkModel) -> f64 {
    match axis {
        Axis::Degree => model.topology.degree() as f64,
        Axis::Beta => model.topology.degree() as f64 * model.beta,
    }
}

fn fit_cells(axis: Axis, cells: &[CellResult]) -> Option<LinearFit> {
    let done: Vec<&CellResult> = cells.iter().filter(|c| c.n_emp.is_some()).collect();
    let x: Vec<f64> = done.iter().map(|c| c.x).collect();
    let y: Vec<f64> = done
        .iter()
        .map(|c| {
            let n = c.n_emp.unwrap() as f64;
            match axis {
                Axis::Degree => n,
                Axis::Beta => n.ln(),
            }
        })
        .collect();
    linear_fit(&x, &y)
}

fn render_csv(cells: &[CellResult]) -> String {
    let mut out = String::from("cell,value,x,n,successes,trials,success_rate\n");
    for (k, c) in cells.iter().enumerate() {
        for t in &c.trace {
            out.push_str(&format!("{k},{},{},{},{},{},{}\n", c.value, c.x, t.n, t.successes, t.trials, t.success_rate));
        }
    }
    out
}

pub fn summary_path(a: &SweepArgs) -> PathBuf {
    a.summary.clone().unwrap_or_else(|| {
        let mut name = a.out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
        name.push(".summary.json");
        a.out.with_file_name(name)
    })
}

fn params_json(a: &SweepArgs, protocol: &ComplexityProtocol) -> serde_json::Value {
    serde_json::json!({
        "topology": match a.topology { TopologyArg::Rrg => "rrg", TopologyArg::Pbsl => "pbsl" },
        "p": a.p,
        "d": a.d,
        "l": a.l,
        "gamma": a.gamma,
        "lambda": a.lambda,
        "pattern": Pattern::from(a.pattern).to_string(),
        "known_lambda": a.known_lambda,
        "protocol": protocol,
        "patience": a.patience,
        "seed": a.seed,
    })
}

/// Loads the cells of a previous summary when its parameters (everything but
/// the grid) match this invocation.
fn load_previous(path: &Path, params: &serde_json::Value) -> Result<Vec<CellResult>, Failure> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let prev: SweepSummary = serde_json::from_str(&read_input(path)?)
        .map_err(|e| Failure::Validation(format!("cannot resume from {}: {e}", path.display())))?;
    if &prev.params != params {
        return Err(Failure::Validation(format!(
            "{} was written with different sweep parameters; remove it or pick another --out",
            path.display()
        )));
    }
    Ok(prev.cells)
}

pub fn run(a: &SweepArgs, threads: Option<usize>) -> Result<(), Failure> {
    let started = Instant::now();
    let protocol = ComplexityProtocol {
        trials: a.trials,
        success_threshold: a.threshold,
        n_start: a.n_start,
        grid_factor: a.grid_factor,
        refine_tol: a.refine_tol,
        max_n: a.max_n,
        sampler: SamplerKind::Auto,
    };
    protocol.validate()?;
    if !(a.lambda > 0.0) {
        return Err(Failure::Validation("--lambda must be positive".into()));
    }
    let models: Vec<BenchmarkModel> =
        a.grid.iter().map(|&v| model_for(a, v)).collect::<Result<_, _>>()?;
    let params = params_json(a, &protocol);
    let summary_file = summary_path(a);
    let previous = load_previous(&summary_file, &params)?;

    let mut cells: Vec<CellResult> = Vec::new();
    let mut exceeded = Vec::new();
    for (k, (model, &value)) in models.iter().zip(&a.grid).enumerate() {
        if let Some(done) = previous.iter().find(|c| c.value == value) {
            info!("cell {k} ({value}) already complete, skipping");
            cells.push(done.clone());
            continue;
        }
        let truth = model.build()?;
        let config = SlideConfig {
            lambda: if a.known_lambda { truth.min_signal() } else { None },
            gic_patience: (a.patience > 0).then_some(a.patience),
            threads,
            ..SlideConfig::default()
        };
        let protocol_seed = cell_seed(a.seed, value, 1);
        let (n_emp, trace) = match empirical_sample_complexity(&truth, &protocol, &config, protocol_seed) {
            Ok(r) => (Some(r.n_emp), r.trace),
            Err(SlideError::MaxNExceeded { trace, .. }) => {
                exceeded.push(value);
                (None, trace)
            }
            Err(e) => return Err(e.into()),
        };
        info!("cell {k} ({value}): n_emp = {n_emp:?}");
        cells.push(CellResult { value, x: regressor(a.axis, model), model: *model, n_emp, trace });
        write_outputs(a, &params, &cells, &summary_file, started)?;
    }
    write_outputs(a, &params, &cells, &summary_file, started)?;
    if !exceeded.is_empty() {
        return Err(Failure::Runtime(format!("max_n = {} reached without success at grid values {exceeded:?}", a.max_n)));
    }
    Ok(())
}

fn write_outputs(
    a: &SweepArgs,
    params: &serde_json::Value,
    cells: &[CellResult],
    summary_file: &Path,
    started: Instant,
) -> Result<(), Failure> {
    let summary = SweepSummary {
        axis: match a.axis {
            Axis::Degree => "degree".into(),
            Axis::Beta => "beta".into(),
        },
        params: params.clone(),
        cells: cells.to_vec(),
        fit: fit_cells(a.axis, cells),
    };
    let mut json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    json.push('\n');
    let csv = render_csv(cells);
    write_atomic(&a.out, csv.as_bytes())?;
    write_atomic(summary_file, json.as_bytes())?;
    let mut m = RunManifest::new("sweep");
    if let serde_json::Value::Object(map) = params {
        for (k, v) in map {
            m.param(k, v);
        }
    }
    m.param("grid", &a.grid);
    m.seed = Some(a.seed);
    m.artifact(&a.out, csv.as_bytes()).artifact(summary_file, json.as_bytes());
    m.wall_time_ms = started.elapsed().as_millis();
    m.write_next_to(&a.out)?;
    Ok(())
}
