//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "nodes": [{"model": "vdp", "params": {"mu": 1.0, "epsilon": 0.01, "eta": 0.001}}],
//!   "graph": "complete",
//!   "graph_d": {"edges": [[0, 1], [1, 2]]},
//!   "gains": {"c": 4.0, "c_d": 120.0},
//!   "matrices": {"gamma": [[1, 0], [0, 1]]},
//!   "integrator": {"method": "euler", "dt": 1e-4, "t_end": 10.0},
//!   "initial_state": [1.5, 1.5],
//!   "outputs": {"csv": "trajectory.csv", "summary": "summary.json", "plot": "e_tot.svg", "stride": 100},
//!   "certify": {"quad_mode": "sampled", "samples": 100000}
//! }
//! ```
//!
//! Unknown keys are rejected everywhere. Matrices default to the identity,
//! outputs to the names above.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certify::QuadMode;
use crate::dynamics::model_from_registry;
use crate::error::{Error, Result};
use crate::graph::{build_graph, Graph};
use crate::measures::DEFAULT_SAMPLES;
use crate::simulate::{Method, NetworkSystem, DEFAULT_DT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nodes: Vec<NodeSpec>,
    pub graph: GraphSpec,
    pub graph_d: GraphSpec,
    pub gains: Gains,
    #[serde(default)]
    pub matrices: Matrices,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub initial_state: Vec<f64>,
    #[serde(default)]
    pub outputs: Outputs,
    #[serde(default)]
    pub certify: CertifySpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub model: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

/// `"complete"` or `{"edges": [[i, j], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSpec {
    Named(String),
    Edges { edges: Vec<[usize; 2]> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub c: f64,
    pub c_d: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrices {
    pub gamma: Option<Vec<Vec<f64>>>,
    pub gamma_d: Option<Vec<Vec<f64>>>,
    pub p: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub method: Method,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
}

fn default_dt() -> f64 {
    DEFAULT_DT
}

fn default_t_end() -> f64 {
    10.0
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorSpec { method: Method::Euler, dt: default_dt(), t_end: default_t_end() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub csv: String,
    pub summary: String,
    pub plot: String,
    pub stride: usize,
    pub log_scale: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs {
            csv: "trajectory.csv".into(),
            summary: "summary.json".into(),
            plot: "e_tot.svg".into(),
            stride: 100,
            log_scale: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadModeName {
    Prop2,
    #[default]
    Sampled,
    Injected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySpec {
    pub quad_mode: QuadModeName,
    /// Required for `quad_mode = "injected"`.
    pub max_q_norm: Option<f64>,
    pub samples: usize,
    pub radius: Option<f64>,
}

impl Default for CertifySpec {
    fn default() -> Self {
        CertifySpec { quad_mode: QuadModeName::Sampled, max_q_norm: None, samples: DEFAULT_SAMPLES, radius: None }
    }
}

fn config_err(path: impl Into<String>, message: impl std::fmt::Display) -> Error {
    Error::Config { path: path.into(), message: message.to_string() }
}

impl ExperimentConfig {
    /// Parses JSON, reporting the path of the offending field on failure.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(path, e.into_inner())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(path.display().to_string(), format!("cannot read: {e}")))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn quad_mode(&self) -> Result<QuadMode> {
        match self.certify.quad_mode {
            QuadModeName::Prop2 => Ok(QuadMode::Prop2),
            QuadModeName::Sampled => Ok(QuadMode::Sampled),
            QuadModeName::Injected => match self.certify.max_q_norm {
                Some(v) if v.is_finite() => Ok(QuadMode::Injected { max_q_norm: v }),
                _ => Err(config_err("certify.max_q_norm", "required (finite) when quad_mode is \"injected\"")),
            },
        }
    }

    /// Validates everything and assembles the network.
    pub fn build_network(&self) -> Result<NetworkSystem> {
        if self.nodes.is_empty() {
            return Err(config_err("nodes", "at least one node is required"));
        }
        let mut models = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let model = model_from_registry(&node.model, &node.params).map_err(|e| match e {
                Error::InvalidArgument(msg) => config_err(format!("nodes[{i}]"), msg),
                other => other,
            })?;
            models.push(model);
        }
        let dim = models[0].dim();
        if let Some(i) = models.iter().position(|m| m.dim() != dim) {
            return Err(config_err(format!("nodes[{i}]"), format!("dimension {} differs from {dim}", models[i].dim())));
        }
        let count = models.len();
        let graph = graph_from_spec(&self.graph, count, "graph")?;
        let graph_d = graph_from_spec(&self.graph_d, count, "graph_d")?;
        let mut builder = NetworkSystem::builder(models, graph, graph_d).gains(self.gains.c, self.gains.c_d);
        for (key, v) in [("gains.c", self.gains.c), ("gains.c_d", self.gains.c_d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err(key, "must be finite and nonnegative"));
            }
        }
        if let Some(m) = &self.matrices.gamma {
            builder = builder.gamma(matrix_from_rows(m, dim, "matrices.gamma")?);
        }
        if let Some(m) = &self.matrices.gamma_d {
            builder = builder.gamma_d(matrix_from_rows(m, dim, "matrices.gamma_d")?);
        }
        if let Some(m) = &self.matrices.p {
            builder = builder.p(matrix_from_rows(m, dim, "matrices.p")?);
        }
        let net = builder.build()?;

        if self.initial_state.len() != net.state_len() {
            return Err(config_err(
                "initial_state",
                format!(
                    "length {} but {} nodes × dimension {dim} = {}",
                    self.initial_state.len(),
                    count,
                    net.state_len()
                ),
            ));
        }
        if let Some(i) = self.initial_state.iter().position(|v| !v.is_finite()) {
            return Err(config_err(format!("initial_state[{i}]"), "must be finite"));
        }
        let IntegratorSpec { dt, t_end, .. } = self.integrator;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(config_err("integrator.dt", "must be positive"));
        }
        if !(t_end.is_finite() && t_end >= dt) {
            return Err(config_err("integrator.t_end", "must be at least dt"));
        }
        if self.outputs.stride == 0 {
            return Err(config_err("outputs.stride", "must be at least 1"));
        }
        if self.certify.samples == 0 {
            return Err(config_err("certify.samples", "must be at least 1"));
        }
        Ok(net)
    }
}

pub fn graph_from_spec(spec: &GraphSpec, node_count: usize, key: &str) -> Result<Graph> {
    match spec {
        GraphSpec::Named(name) if name == "complete" => Graph::complete(node_count),
        GraphSpec::Named(name) => {
            Err(config_err(key, format!("unknown graph `{name}` (expected \"complete\" or an edge list)")))
        }
        GraphSpec::Edges { edges } => {
            let pairs: Vec<(usize, usize)> = edges.iter().map(|[i, j]| (*i, *j)).collect();
            build_graph(node_count, &pairs).map_err(|e| config_err(format!("{key}.edges"), e))
        }
    }
}

fn matrix_from_rows(rows: &[Vec<f64>], dim: usize, key: &str) -> Result<DMatrix<f64>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(config_err(key, format!("must be {dim}×{dim}")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(config_err(key, "entries must be finite"));
    }
    Ok(DMatrix::from_fn(dim, dim, |i, j| rows[i][j]))
}
