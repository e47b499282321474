//! Batch commands. Each one validates the config, runs, and writes its
//! artifacts atomically (temp file in the target directory, then rename).

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::plot::line_chart_svg;
use crate::certify::{certify_network, CertifyOptions, GainCertificate};
use crate::dynamics::total_error;
use crate::error::{Error, Result};
use crate::graph::{algebraic_connectivity, is_connected, minimum_density, Graph};
use crate::simulate::{
    estimate_ultimate_bound, integrate_observed, sphere_batch, BoundEstimate, Method, NetworkSystem, SyncMonitor,
    SyncReport, DEFAULT_BOUND_PER_RADIUS, DEFAULT_BOUND_RADII, DEFAULT_BOUND_TAIL_FRACTION, DEFAULT_BOUND_T_END,
};

/// Writes `bytes` to `path` through a temp file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable artifact");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSummary {
    pub c: f64,
    pub c_d: f64,
    pub method: Method,
    pub dt: f64,
    pub t_end: f64,
    pub node_count: usize,
    pub dim: usize,
    pub sync: SyncReport,
}

/// Strided samples of one run plus the full-resolution sync verdict.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub sync: SyncReport,
}

/// Integrates the configured experiment on `net`, keeping every `stride`-th
/// sample; `e_tot` is monitored at every step.
pub fn run_experiment(net: &NetworkSystem, cfg: &ExperimentConfig, stride: usize) -> Result<RunOutput> {
    let spec = cfg.integrator;
    let mut monitor = SyncMonitor::standard(net, spec.dt, spec.t_end)?;
    let mut times = Vec::new();
    let mut states = Vec::new();
    integrate_observed(net, &cfg.initial_state, spec.dt, spec.t_end, spec.method, &mut |k, t, x| {
        monitor.observe(k, x);
        if k % stride == 0 {
            times.push(t);
            states.push(x.to_vec());
        }
    })?;
    Ok(RunOutput { times, states, sync: monitor.report() })
}

fn trajectory_csv(run: &RunOutput, node_count: usize, dim: usize) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    for i in 1..=node_count {
        for k in 1..=dim {
            header.push(format!("x_{i}_{k}"));
        }
    }
    header.push("e_tot".into());
    w.write_record(&header)?;
    for (t, x) in run.times.iter().zip(&run.states) {
        let mut row = Vec::with_capacity(header.len());
        row.push(t.to_string());
        row.extend(x.iter().map(|v| v.to_string()));
        row.push(total_error(x, node_count, dim).to_string());
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub summary: SimulationSummary,
    pub csv: PathBuf,
    pub summary_path: PathBuf,
    pub plot: PathBuf,
}

/// `simulate`: trajectory CSV, summary JSON and an `e_tot` SVG chart.
pub fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SimulateOutcome> {
    let net = cfg.build_network()?;
    let run = run_experiment(&net, cfg, cfg.outputs.stride)?;
    let (n_nodes, dim) = (net.node_count(), net.dim());
    let summary = SimulationSummary {
        c: net.c(),
        c_d: net.c_d(),
        method: cfg.integrator.method,
        dt: cfg.integrator.dt,
        t_end: cfg.integrator.t_end,
        node_count: n_nodes,
        dim,
        sync: run.sync,
    };
    let csv = out_dir.join(&cfg.outputs.csv);
    let summary_path = out_dir.join(&cfg.outputs.summary);
    let plot = out_dir.join(&cfg.outputs.plot);
    write_atomic(&csv, &trajectory_csv(&run, n_nodes, dim)?)?;
    write_json(&summary_path, &summary)?;
    let e: Vec<f64> = run.states.iter().map(|x| total_error(x, n_nodes, dim)).collect();
    let title = format!("Total synchronization error (c = {}, c_d = {})", net.c(), net.c_d());
    write_atomic(&plot, line_chart_svg(&run.times, &e, &title, "t [s]", "e_tot", cfg.outputs.log_scale).as_bytes())?;
    Ok(SimulateOutcome { summary, csv, summary_path, plot })
}

/// `certify`: gain certificate JSON (`certificate.json`).
pub fn cmd_certify(cfg: &ExperimentConfig, radius: f64, seed: u64, out_dir: &Path) -> Result<GainCertificate> {
    let net = cfg.build_network()?;
    let options = CertifyOptions { quad_mode: cfg.quad_mode()?, samples: cfg.certify.samples, seed };
    let cert = certify_network(&net, radius, &options)?;
    write_json(&out_dir.join("certificate.json"), &cert)?;
    Ok(cert)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParameter {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "c_d")]
    CD,
}

impl std::str::FromStr for SweepParameter {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "c" => Ok(SweepParameter::C),
            "c_d" => Ok(SweepParameter::CD),
            other => Err(format!("unknown sweep parameter `{other}` (expected c or c_d)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub terminal_e_tot: Option<f64>,
    pub synchronized: Option<bool>,
    pub error: Option<String>,
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// `sweep`: one simulation per value of `c` or `c_d`, rows written to `sweep.csv`.
/// Fails only when every row failed.
pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    parameter: SweepParameter,
    values: &[f64],
    workers: usize,
    out_dir: &Path,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("sweep needs at least one value".into()));
    }
    let base = cfg.build_network()?;
    let pool = thread_pool(workers)?;
    let results: Vec<(f64, Result<SyncReport>)> = pool.install(|| {
        values
            .par_iter()
            .map(|&v| {
                let net = match parameter {
                    SweepParameter::C => base.with_gains(v, base.c_d()),
                    SweepParameter::CD => base.with_gains(base.c(), v),
                };
                let stride = usize::MAX;
                (v, net.and_then(|net| run_experiment(&net, cfg, stride)).map(|r| r.sync))
            })
            .collect()
    });
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["value", "terminal_e_tot", "synchronized", "error"])?;
    let mut rows = Vec::with_capacity(results.len());
    let mut first_error = None;
    for (value, result) in results {
        let row = match result {
            Ok(sync) => SweepRow {
                value,
                terminal_e_tot: Some(sync.terminal_e_tot),
                synchronized: Some(sync.synchronized),
                error: None,
            },
            Err(e) => {
                let row = SweepRow { value, terminal_e_tot: None, synchronized: None, error: Some(e.to_string()) };
                first_error.get_or_insert(e);
                row
            }
        };
        w.write_record([
            row.value.to_string(),
            row.terminal_e_tot.map(|v| v.to_string()).unwrap_or_default(),
            row.synchronized.map(|v| v.to_string()).unwrap_or_default(),
            row.error.clone().unwrap_or_default(),
        ])?;
        rows.push(row);
    }
    write_atomic(&out_dir.join("sweep.csv"), &w.into_inner().map_err(|e| Error::Io(e.into_error()))?)?;
    match first_error {
        Some(e) if rows.iter().all(|r| r.error.is_some()) => Err(e),
        _ => Ok(rows),
    }
}

/// Initial-condition batch for `bound`: `per_radius` points on each sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchSpec {
    pub radii: Vec<f64>,
    pub per_radius: usize,
    pub t_end: f64,
    pub tail_fraction: f64,
}

impl Default for BatchSpec {
    fn default() -> Self {
        BatchSpec {
            radii: DEFAULT_BOUND_RADII.to_vec(),
            per_radius: DEFAULT_BOUND_PER_RADIUS,
            t_end: DEFAULT_BOUND_T_END,
            tail_fraction: DEFAULT_BOUND_TAIL_FRACTION,
        }
    }
}

/// `bound`: empirical ultimate bound written to `bound.json`. The configured
/// initial state is always part of the batch.
pub fn cmd_bound(
    cfg: &ExperimentConfig,
    batch: &BatchSpec,
    seed: u64,
    workers: usize,
    out_dir: &Path,
) -> Result<BoundEstimate> {
    let net = cfg.build_network()?;
    if batch.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidArgument("batch radii must be finite and nonnegative".into()));
    }
    let mut ics = vec![cfg.initial_state.clone()];
    ics.extend(sphere_batch(net.state_len(), &batch.radii, batch.per_radius, seed));
    let pool = thread_pool(workers)?;
    let est =
        pool.install(|| estimate_ultimate_bound(&net, &ics, cfg.integrator.dt, batch.t_end, batch.tail_fraction))?;
    write_json(&out_dir.join("bound.json"), &est)?;
    Ok(est)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub node_count: usize,
    pub edge_count: usize,
    pub connected: bool,
    pub lambda2: f64,
    /// `None` when the graph is disconnected or too large to enumerate.
    pub delta: Option<f64>,
}

impl GraphInfo {
    pub fn of(g: &Graph) -> Self {
        GraphInfo {
            node_count: g.node_count(),
            edge_count: g.edge_count(),
            connected: is_connected(g),
            lambda2: algebraic_connectivity(g),
            delta: minimum_density(g).ok(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub graph: GraphInfo,
    pub graph_d: GraphInfo,
}

/// `graph-info`: `λ₂`, `δ` and connectivity of both layers.
pub fn cmd_graph_info(cfg: &ExperimentConfig) -> Result<GraphReport> {
    let net = cfg.build_network()?;
    Ok(GraphReport { graph: GraphInfo::of(net.graph()), graph_d: GraphInfo::of(net.graph_d()) })
}

/// Process exit code for an error: 2 for rejected input, 3 for numerical
/// failure, 1 for I/O.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else if matches!(err, Error::Io(_) | Error::Csv(_)) {
        1
    } else {
        2
    }
}
