//! The coupled network, its fixed-step integration, and simulation-based checks
//! (ultimate bounds, synchronization, average dynamics).
//!
//! The right-hand side is discontinuous on the surfaces `x_i,k = x_j,k`. Steps
//! use the selection `sign(0) = 0`, which makes the coupling vanish on the
//! synchronization manifold. No event location is attempted: with explicit
//! Euler the state chatters around the sliding surfaces with an amplitude of
//! order `c_d ‖Γ_d‖ dt`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{common_dim, state_average, total_error, SharedModel};
use crate::error::{Error, Result};
use crate::graph::{laplacian, Graph, Laplacian};

/// `e_tot` level below which the network counts as synchronized.
pub const SYNC_THRESHOLD: f64 = 0.05;
/// Trailing fraction of a run over which the sync threshold must hold.
pub const SYNC_TAIL_FRACTION: f64 = 0.2;
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Euler,
    Rk4,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Euler => "euler",
            Method::Rk4 => "rk4",
        })
    }
}

/// `N` node models coupled through `G` (diffusive) and `G_d` (discontinuous).
#[derive(Debug, Clone)]
pub struct NetworkSystem {
    models: Vec<SharedModel>,
    graph: Graph,
    graph_d: Graph,
    c: f64,
    c_d: f64,
    gamma: DMatrix<f64>,
    gamma_d: DMatrix<f64>,
    p: DMatrix<f64>,
    dim: usize,
}

/// Builder for [`NetworkSystem`]; matrices default to the identity, gains to zero.
#[derive(Debug, Clone)]
pub struct NetworkBuilder {
    models: Vec<SharedModel>,
    graph: Graph,
    graph_d: Graph,
    c: f64,
    c_d: f64,
    gamma: Option<DMatrix<f64>>,
    gamma_d: Option<DMatrix<f64>>,
    p: Option<DMatrix<f64>>,
}

impl NetworkBuilder {
    pub fn gains(mut self, c: f64, c_d: f64) -> Self {
        self.c = c;
        self.c_d = c_d;
        self
    }

    pub fn gamma(mut self, gamma: DMatrix<f64>) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn gamma_d(mut self, gamma_d: DMatrix<f64>) -> Self {
        self.gamma_d = Some(gamma_d);
        self
    }

    pub fn p(mut self, p: DMatrix<f64>) -> Self {
        self.p = Some(p);
        self
    }

    pub fn build(self) -> Result<NetworkSystem> {
        let dim = common_dim(&self.models)?;
        let n_nodes = self.models.len();
        for (name, g) in [("graph", &self.graph), ("graph_d", &self.graph_d)] {
            if g.node_count() != n_nodes {
                return Err(Error::Dimension(format!(
                    "{name} has {} nodes but there are {n_nodes} models",
                    g.node_count()
                )));
            }
        }
        for (name, v) in [("c", self.c), ("c_d", self.c_d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("gain {name} must be finite and nonnegative, got {v}")));
            }
        }
        let identity = DMatrix::identity(dim, dim);
        let check = |name: &str, m: Option<DMatrix<f64>>| -> Result<DMatrix<f64>> {
            let m = m.unwrap_or_else(|| identity.clone());
            if m.shape() != (dim, dim) {
                return Err(Error::Dimension(format!("{name} is {:?}, expected {dim}×{dim}", m.shape())));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("{name} has non-finite entries")));
            }
            Ok(m)
        };
        Ok(NetworkSystem {
            gamma: check("gamma", self.gamma)?,
            gamma_d: check("gamma_d", self.gamma_d)?,
            p: check("p", self.p)?,
            models: self.models,
            graph: self.graph,
            graph_d: self.graph_d,
            c: self.c,
            c_d: self.c_d,
            dim,
        })
    }
}

impl NetworkSystem {
    pub fn builder(models: Vec<SharedModel>, graph: Graph, graph_d: Graph) -> NetworkBuilder {
        NetworkBuilder { models, graph, graph_d, c: 0.0, c_d: 0.0, gamma: None, gamma_d: None, p: None }
    }

    /// Same network with different gains.
    pub fn with_gains(&self, c: f64, c_d: f64) -> Result<Self> {
        for (name, v) in [("c", c), ("c_d", c_d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidArgument(format!("gain {name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(NetworkSystem { c, c_d, ..self.clone() })
    }

    pub fn models(&self) -> &[SharedModel] {
        &self.models
    }
    pub fn graph(&self) -> &Graph {
        &self.graph
    }
    pub fn graph_d(&self) -> &Graph {
        &self.graph_d
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn c_d(&self) -> f64 {
        self.c_d
    }
    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }
    pub fn gamma_d(&self) -> &DMatrix<f64> {
        &self.gamma_d
    }
    pub fn p(&self) -> &DMatrix<f64> {
        &self.p
    }
    pub fn node_count(&self) -> usize {
        self.models.len()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn state_len(&self) -> usize {
        self.models.len() * self.dim
    }

    fn check_state(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.state_len() {
            return Err(Error::Dimension(format!(
                "stacked state has length {}, expected {}",
                x.len(),
                self.state_len()
            )));
        }
        Ok(())
    }

    /// Adds the stacked coupling `ū(x̄)` into `out`, edge by edge. Each edge
    /// contributes equal and opposite terms to its endpoints.
    fn add_coupling(&self, x: &[f64], out: &mut [f64], diff: &mut [f64], term: &mut [f64]) {
        let n = self.dim;
        if self.c != 0.0 {
            for &(i, j) in self.graph.edges() {
                for k in 0..n {
                    diff[k] = x[j * n + k] - x[i * n + k];
                }
                mat_vec(&self.gamma, diff, term);
                for k in 0..n {
                    let v = self.c * term[k];
                    out[i * n + k] += v;
                    out[j * n + k] -= v;
                }
            }
        }
        if self.c_d != 0.0 {
            for &(i, j) in self.graph_d.edges() {
                for k in 0..n {
                    diff[k] = sign(x[j * n + k] - x[i * n + k]);
                }
                mat_vec(&self.gamma_d, diff, term);
                for k in 0..n {
                    let v = self.c_d * term[k];
                    out[i * n + k] += v;
                    out[j * n + k] -= v;
                }
            }
        }
    }

    /// Closed-loop vector field `ẋ̄ = f̄(x̄; t) + ū(x̄)`.
    pub fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let mut scratch = Scratch::new(self.dim);
        self.rhs_with(t, x, out, &mut scratch);
    }

    fn rhs_with(&self, t: f64, x: &[f64], out: &mut [f64], s: &mut Scratch) {
        let n = self.dim;
        for (i, model) in self.models.iter().enumerate() {
            model.eval(&x[i * n..(i + 1) * n], t, &mut out[i * n..(i + 1) * n]);
        }
        self.add_coupling(x, out, &mut s.diff, &mut s.term);
    }

    /// Stacked coupling vector `ū(x̄)`.
    pub fn coupling_vector(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_state(x)?;
        let mut out = vec![0.0; x.len()];
        let mut s = Scratch::new(self.dim);
        self.add_coupling(x, &mut out, &mut s.diff, &mut s.term);
        Ok(out)
    }
}

struct Scratch {
    diff: Vec<f64>,
    term: Vec<f64>,
}

impl Scratch {
    fn new(dim: usize) -> Self {
        Scratch { diff: vec![0.0; dim], term: vec![0.0; dim] }
    }
}

/// `sign` with the selection `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..v.len()).map(|j| m[(i, j)] * v[j]).sum();
    }
}

/// Coupling input of node `i`, evaluated literally from the Laplacian entries:
///
/// `u_i = −c Σ_j L_ij Γ(x_j − x_i) − c_d Σ_j L^d_ij Γ_d sign(x_j − x_i)`.
pub fn coupling_input(i: usize, x: &[f64], net: &NetworkSystem) -> Result<Vec<f64>> {
    net.check_state(x)?;
    if i >= net.node_count() {
        return Err(Error::InvalidArgument(format!("node index {i} out of range")));
    }
    let n = net.dim;
    let Laplacian(l) = laplacian(&net.graph);
    let Laplacian(ld) = laplacian(&net.graph_d);
    let xi = &x[i * n..(i + 1) * n];
    let mut u = vec![0.0; n];
    let mut diff = vec![0.0; n];
    let mut term = vec![0.0; n];
    for j in 0..net.node_count() {
        let xj = &x[j * n..(j + 1) * n];
        if l[(i, j)] != 0.0 {
            diff.iter_mut().zip(xj.iter().zip(xi)).for_each(|(d, (a, b))| *d = a - b);
            mat_vec(&net.gamma, &diff, &mut term);
            u.iter_mut().zip(&term).for_each(|(u, t)| *u -= net.c * l[(i, j)] * t);
        }
        if ld[(i, j)] != 0.0 {
            diff.iter_mut().zip(xj.iter().zip(xi)).for_each(|(d, (a, b))| *d = sign(a - b));
            mat_vec(&net.gamma_d, &diff, &mut term);
            u.iter_mut().zip(&term).for_each(|(u, t)| *u -= net.c_d * ld[(i, j)] * t);
        }
    }
    Ok(u)
}

/// Uniformly sampled solution of the closed-loop network.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Row-major: sample `k` occupies `states[k*len..(k+1)*len]`.
    pub states: Vec<f64>,
    pub node_count: usize,
    pub dim: usize,
    /// Integration step.
    pub dt: f64,
    /// Integration steps between stored samples.
    pub stride: usize,
    pub method: Method,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_len(&self) -> usize {
        self.node_count * self.dim
    }

    pub fn state(&self, k: usize) -> &[f64] {
        let len = self.state_len();
        &self.states[k * len..(k + 1) * len]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn e_tot(&self, k: usize) -> f64 {
        total_error(self.state(k), self.node_count, self.dim)
    }

    pub fn e_tot_series(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.e_tot(k)).collect()
    }
}

fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_end.is_finite() && t_end >= dt * (1.0 - 1e-9)) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_end ≥ dt (dt = {dt}, t_end = {t_end})")));
    }
    Ok(((t_end / dt).round() as usize).max(1))
}

/// Generic fixed-step integrator for `ẋ = F(t, x)`; `observe(k, t, x)` sees
/// every step including `k = 0`.
fn run_fixed_step<F>(
    len: usize,
    x0: &[f64],
    dt: f64,
    steps: usize,
    method: Method,
    mut field: F,
    observe: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut x = x0.to_vec();
    let mut k1 = vec![0.0; len];
    let (mut k2, mut k3, mut k4, mut tmp) = match method {
        Method::Euler => (Vec::new(), Vec::new(), Vec::new(), Vec::new()),
        Method::Rk4 => (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]),
    };
    observe(0, 0.0, &x);
    for step in 0..steps {
        let t = step as f64 * dt;
        match method {
            Method::Euler => {
                field(t, &x, &mut k1);
                x.iter_mut().zip(&k1).for_each(|(x, d)| *x += dt * d);
            }
            Method::Rk4 => {
                field(t, &x, &mut k1);
                axpy(&x, 0.5 * dt, &k1, &mut tmp);
                field(t + 0.5 * dt, &tmp, &mut k2);
                axpy(&x, 0.5 * dt, &k2, &mut tmp);
                field(t + 0.5 * dt, &tmp, &mut k3);
                axpy(&x, dt, &k3, &mut tmp);
                field(t + dt, &tmp, &mut k4);
                for i in 0..len {
                    x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
        }
        let t_next = (step + 1) as f64 * dt;
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp { time: t_next });
        }
        observe(step + 1, t_next, &x);
    }
    Ok(x)
}

fn axpy(x: &[f64], a: f64, y: &[f64], out: &mut [f64]) {
    for ((o, x), y) in out.iter_mut().zip(x).zip(y) {
        *o = x + a * y;
    }
}

fn check_initial_state(net: &NetworkSystem, x0: &[f64]) -> Result<()> {
    net.check_state(x0)?;
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("initial state must be finite".into()));
    }
    Ok(())
}

/// Integrates the network, calling `observe(k, t, x̄)` at every step. Returns
/// the final state.
pub fn integrate_observed(
    net: &NetworkSystem,
    x0: &[f64],
    dt: f64,
    t_end: f64,
    method: Method,
    observe: &mut dyn FnMut(usize, f64, &[f64]),
) -> Result<Vec<f64>> {
    check_initial_state(net, x0)?;
    let steps = step_count(dt, t_end)?;
    let mut scratch = Scratch::new(net.dim);
    run_fixed_step(x0.len(), x0, dt, steps, method, |t, x, out| net.rhs_with(t, x, out, &mut scratch), observe)
}

/// Integrates the network storing every step.
pub fn integrate(net: &NetworkSystem, x0: &[f64], dt: f64, t_end: f64, method: Method) -> Result<Trajectory> {
    integrate_strided(net, x0, dt, t_end, method, 1)
}

/// Integrates the network storing every `stride`-th step.
pub fn integrate_strided(
    net: &NetworkSystem,
    x0: &[f64],
    dt: f64,
    t_end: f64,
    method: Method,
    stride: usize,
) -> Result<Trajectory> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be ≥ 1".into()));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    integrate_observed(net, x0, dt, t_end, method, &mut |k, t, x| {
        if k % stride == 0 {
            times.push(t);
            states.extend_from_slice(x);
        }
    })?;
    Ok(Trajectory { times, states, node_count: net.node_count(), dim: net.dim, dt, stride, method })
}

/// Synchronization verdict over the trailing part of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncReport {
    pub terminal_e_tot: f64,
    pub tail_min_e_tot: f64,
    pub tail_max_e_tot: f64,
    pub threshold: f64,
    pub tail_fraction: f64,
    pub synchronized: bool,
}

/// Tracks `e_tot` at every step of a run and judges synchronization: `e_tot`
/// must stay below `threshold` over the trailing `tail_fraction` of the steps.
#[derive(Debug, Clone)]
pub struct SyncMonitor {
    node_count: usize,
    dim: usize,
    tail_start: usize,
    threshold: f64,
    tail_fraction: f64,
    terminal: f64,
    tail_min: f64,
    tail_max: f64,
}

impl SyncMonitor {
    pub fn new(node_count: usize, dim: usize, steps: usize, threshold: f64, tail_fraction: f64) -> Self {
        let tail_start = ((1.0 - tail_fraction) * steps as f64).floor() as usize;
        SyncMonitor {
            node_count,
            dim,
            tail_start: tail_start.min(steps),
            threshold,
            tail_fraction,
            terminal: f64::NAN,
            tail_min: f64::INFINITY,
            tail_max: f64::NEG_INFINITY,
        }
    }

    /// Monitor with the default threshold and tail for a run of `t_end / dt` steps.
    pub fn standard(net: &NetworkSystem, dt: f64, t_end: f64) -> Result<Self> {
        Ok(Self::new(net.node_count(), net.dim(), step_count(dt, t_end)?, SYNC_THRESHOLD, SYNC_TAIL_FRACTION))
    }

    pub fn observe(&mut self, step: usize, x: &[f64]) {
        let e = total_error(x, self.node_count, self.dim);
        self.terminal = e;
        if step >= self.tail_start {
            self.tail_min = self.tail_min.min(e);
            self.tail_max = self.tail_max.max(e);
        }
    }

    pub fn report(&self) -> SyncReport {
        SyncReport {
            terminal_e_tot: self.terminal,
            tail_min_e_tot: self.tail_min,
            tail_max_e_tot: self.tail_max,
            threshold: self.threshold,
            tail_fraction: self.tail_fraction,
            synchronized: self.tail_max < self.threshold,
        }
    }
}

/// [`SyncReport`] from the stored samples of a trajectory.
pub fn sync_report(traj: &Trajectory, threshold: f64, tail_fraction: f64) -> SyncReport {
    let last = traj.len().saturating_sub(1);
    let mut monitor = SyncMonitor::new(traj.node_count, traj.dim, last, threshold, tail_fraction);
    for k in 0..traj.len() {
        monitor.observe(k, traj.state(k));
    }
    monitor.report()
}

/// Empirical ultimate bound over a batch of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundEstimate {
    /// Max over the batch of the tail-window supremum of `‖x̄(t)‖`.
    pub radius: f64,
    pub tail_window: f64,
    pub ic_batch: usize,
    pub per_trajectory_sup: Vec<f64>,
}

pub const DEFAULT_BOUND_RADII: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_BOUND_PER_RADIUS: usize = 2;
pub const DEFAULT_BOUND_T_END: f64 = 20.0;
pub const DEFAULT_BOUND_TAIL_FRACTION: f64 = 0.5;

/// Initial conditions drawn uniformly on the spheres `‖x̄‖ = r` for each radius.
pub fn sphere_batch(state_len: usize, radii: &[f64], per_radius: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batch = Vec::new();
    for &r in radii {
        for _ in 0..per_radius {
            let v: Vec<f64> = loop {
                let v: Vec<f64> = (0..state_len).map(|_| StandardNormal.sample(&mut rng)).collect();
                if v.iter().any(|x: &f64| *x != 0.0) {
                    break v;
                }
            };
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            batch.push(v.into_iter().map(|x| x * r / norm).collect());
        }
    }
    batch
}

/// Default batch: 8 initial conditions, two on each sphere of radius 1, 2, 4, 8.
pub fn default_bound_batch(state_len: usize, seed: u64) -> Vec<Vec<f64>> {
    sphere_batch(state_len, &DEFAULT_BOUND_RADII, DEFAULT_BOUND_PER_RADIUS, seed)
}

/// Integrates each initial condition (in parallel) and takes the supremum of
/// `‖x̄(t)‖` over the trailing `tail_fraction` of each run.
pub fn estimate_ultimate_bound(
    net: &NetworkSystem,
    batch: &[Vec<f64>],
    dt: f64,
    t_end: f64,
    tail_fraction: f64,
) -> Result<BoundEstimate> {
    if batch.is_empty() {
        return Err(Error::InvalidArgument("initial-condition batch is empty".into()));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("tail_fraction must lie in (0, 1], got {tail_fraction}")));
    }
    let steps = step_count(dt, t_end)?;
    let tail_start = ((1.0 - tail_fraction) * steps as f64).floor() as usize;
    let sups: Vec<f64> = batch
        .par_iter()
        .enumerate()
        .map(|(index, x0)| {
            let mut sup = 0.0f64;
            integrate_observed(net, x0, dt, t_end, Method::Euler, &mut |k, _t, x| {
                if k >= tail_start {
                    sup = sup.max(x.iter().map(|v| v * v).sum::<f64>().sqrt());
                }
            })
            .map_err(|e| Error::InitialCondition { index, source: Box::new(e) })?;
            Ok(sup)
        })
        .collect::<Result<_>>()?;
    Ok(BoundEstimate {
        radius: sups.iter().copied().fold(0.0, f64::max),
        tail_window: tail_fraction * t_end,
        ic_batch: batch.len(),
        per_trajectory_sup: sups,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageDynamicsReport {
    pub t_start: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks that the state average follows `ṡ = (1/N) Σ f_i(s)` once the network
/// is synchronized: integrates `s` from `x̃(t_start)` with the trajectory's step
/// and method, and compares against `x̃` at every stored sample. Passes when the
/// largest deviation is at most `10·tol`.
pub fn verify_average_dynamics(
    traj: &Trajectory,
    models: &[SharedModel],
    t_start: f64,
    tol: f64,
) -> Result<AverageDynamicsReport> {
    let n = common_dim(models)?;
    if models.len() != traj.node_count || n != traj.dim {
        return Err(Error::Dimension("models do not match the trajectory".into()));
    }
    let start = traj
        .times
        .iter()
        .position(|&t| t >= t_start - 1e-9 * traj.dt)
        .ok_or_else(|| Error::InvalidArgument(format!("t_start = {t_start} is past the end of the trajectory")))?;
    let e0 = traj.e_tot(start);
    if !(e0 < tol) {
        return Err(Error::NotSynchronized { time: traj.times[start], e_tot: e0, tol });
    }
    let inv_n = 1.0 / models.len() as f64;
    let mut buf = vec![0.0; n];
    let s0 = state_average(traj.state(start), traj.node_count, n);
    let remaining = traj.len() - 1 - start;
    let mut max_dev = 0.0f64;
    run_fixed_step(
        n,
        &s0,
        traj.dt,
        remaining * traj.stride,
        traj.method,
        |t, s, out| {
            out.iter_mut().for_each(|o| *o = 0.0);
            for m in models {
                m.eval(s, t, &mut buf);
                out.iter_mut().zip(&buf).for_each(|(o, b)| *o += inv_n * b);
            }
        },
        &mut |k, _t, s| {
            if k % traj.stride == 0 {
                let avg = state_average(traj.state(start + k / traj.stride), traj.node_count, n);
                let d = avg.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                max_dev = max_dev.max(d);
            }
        },
    )?;
    Ok(AverageDynamicsReport {
        t_start: traj.times[start],
        max_deviation: max_dev,
        tolerance: tol,
        pass: max_dev <= 10.0 * tol,
    })
}
