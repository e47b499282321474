//! Critical coupling gains and end-to-end gain certificates.
//!
//! ```text
//! c*   = max_i ‖Q_i‖₂ / (λ₂(L) · λ_min(sym PΓ))
//! c_d* = ‖(|P|) m‖∞  / (δ(G_d) · μ∞⁻(PΓ_d))
//! ```
//!
//! Synchronization is guaranteed for `c > c*` and `c_d ≥ c_d*` once the
//! network is ultimately bounded in the ball the `Q_i` and `m` were computed on.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Hypothesis, Result};
use crate::graph::{algebraic_connectivity, is_connected, minimum_density, Graph};
use crate::measures::{
    estimate_mismatch_bound, estimate_quad_sampled, lambda_min_sym, mu_inf_minus, quad_from_jacobian_bounds,
    spectral_norm, DEFAULT_SAMPLES,
};
use crate::simulate::NetworkSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalGains {
    pub c_star: f64,
    pub c_d_star: f64,
}

/// Evaluates both threshold formulas.
///
/// `max_q_norm` may be negative when it comes from a sampled QUAD constant; the
/// field is then contracting and `c*` is reported as 0.
pub fn critical_gains(
    max_q_norm: f64,
    lambda2: f64,
    p: &DMatrix<f64>,
    gamma: &DMatrix<f64>,
    m: &[f64],
    delta: f64,
    gamma_d: &DMatrix<f64>,
) -> Result<CriticalGains> {
    let n = p.nrows();
    if !p.is_square() || gamma.shape() != (n, n) || gamma_d.shape() != (n, n) || m.len() != n {
        return Err(Error::Dimension(format!("P, Γ, Γ_d must be {n}×{n} and m of length {n}")));
    }
    if !(lambda2 > 0.0) {
        return Err(Hypothesis::DiffusiveGraphDisconnected.into());
    }
    if !(delta > 0.0) {
        return Err(Hypothesis::DensityNotPositive(delta).into());
    }
    let lambda_min = lambda_min_sym(&(p * gamma));
    if !(lambda_min > 0.0) {
        return Err(Hypothesis::SymPGammaNotPositive(lambda_min).into());
    }
    let mu = mu_inf_minus(&(p * gamma_d));
    if !(mu > 0.0) {
        return Err(Hypothesis::MuPGammaDNotPositive(mu).into());
    }
    Ok(CriticalGains {
        c_star: max_q_norm.max(0.0) / (lambda2 * lambda_min),
        c_d_star: mismatch_norm(p, m) / (delta * mu),
    })
}

/// `M = ‖(|P|) m‖∞` with `|P|` taken entrywise.
pub fn mismatch_norm(p: &DMatrix<f64>, m: &[f64]) -> f64 {
    let pm = p.abs() * DVector::from_column_slice(m);
    pm.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// How the per-node QUAD matrices `Q_i` are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum QuadMode {
    /// Diagonal `Q_i` from each model's analytic Jacobian bounds on the ball.
    Prop2,
    /// `Q_i = q_i I` with `q_i` the sampled QUAD constant on the ball.
    Sampled,
    /// Use the given value for `max_i ‖Q_i‖₂` directly.
    Injected { max_q_norm: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertifyOptions {
    pub quad_mode: QuadMode,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions { quad_mode: QuadMode::Sampled, samples: DEFAULT_SAMPLES, seed: 0 }
    }
}

/// Every intermediate quantity of the gain computation, with the estimator
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainCertificate {
    pub radius: f64,
    /// Row-major `Q_i` per node; empty when the norm was injected.
    pub q_matrices: Vec<Vec<Vec<f64>>>,
    pub max_q_norm: f64,
    pub lambda2: f64,
    pub lambda_min_sym_pgamma: f64,
    pub m: Vec<f64>,
    pub big_m: f64,
    pub delta: f64,
    pub mu_pgd: f64,
    pub c_star: f64,
    pub c_d_star: f64,
    pub provenance: BTreeMap<String, String>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn connected_lambda2(g: &Graph, hypothesis: Hypothesis) -> Result<f64> {
    if g.node_count() < 2 || !is_connected(g) {
        return Err(hypothesis.into());
    }
    Ok(algebraic_connectivity(g))
}

/// Runs the whole pipeline on a network over the ball of radius `radius`.
pub fn certify_network(net: &NetworkSystem, radius: f64, options: &CertifyOptions) -> Result<GainCertificate> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let lambda2 = connected_lambda2(net.graph(), Hypothesis::DiffusiveGraphDisconnected)?;
    connected_lambda2(net.graph_d(), Hypothesis::DiscontinuousGraphDisconnected)?;
    let delta = minimum_density(net.graph_d())?;

    let mut provenance = BTreeMap::new();
    let sampled = format!("sampled(seed={}, count={})", options.seed, options.samples);
    provenance.insert("lambda2".into(), "analytic".into());
    provenance.insert("delta".into(), "analytic".into());
    provenance.insert("lambda_min_sym_pgamma".into(), "analytic".into());
    provenance.insert("mu_pgd".into(), "analytic".into());

    let mut q_matrices = Vec::new();
    let max_q_norm = match options.quad_mode {
        QuadMode::Prop2 => {
            let mut best = 0.0f64;
            for (i, model) in net.models().iter().enumerate() {
                let bounds =
                    model.jacobian_bounds(radius).ok_or_else(|| Error::MissingJacobianBounds(format!("node {i}")))?;
                let q = quad_from_jacobian_bounds(&bounds);
                best = best.max(spectral_norm(&q));
                q_matrices.push(rows(&q));
            }
            provenance.insert("max_q_norm".into(), "analytic".into());
            best
        }
        QuadMode::Sampled => {
            let mut best = f64::NEG_INFINITY;
            for (i, model) in net.models().iter().enumerate() {
                let q = estimate_quad_sampled(
                    model.as_ref(),
                    radius,
                    options.samples,
                    options.seed.wrapping_add(i as u64),
                )?;
                best = best.max(q.value);
                q_matrices.push(rows(&(DMatrix::identity(net.dim(), net.dim()) * q.value)));
            }
            provenance.insert("max_q_norm".into(), sampled.clone());
            best
        }
        QuadMode::Injected { max_q_norm } => {
            provenance.insert("max_q_norm".into(), "injected".into());
            max_q_norm
        }
    };

    let m = estimate_mismatch_bound(net.models(), radius, options.samples, options.seed)?.value;
    provenance.insert("m".into(), sampled);

    let gains = critical_gains(max_q_norm, lambda2, net.p(), net.gamma(), &m, delta, net.gamma_d())?;
    Ok(GainCertificate {
        radius,
        q_matrices,
        max_q_norm,
        lambda2,
        lambda_min_sym_pgamma: lambda_min_sym(&(net.p() * net.gamma())),
        big_m: mismatch_norm(net.p(), &m),
        m,
        delta,
        mu_pgd: mu_inf_minus(&(net.p() * net.gamma_d())),
        c_star: gains.c_star,
        c_d_star: gains.c_d_star,
        provenance,
    })
}
