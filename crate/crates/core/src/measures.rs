//! Matrix measures, QUAD bounds and the sampling oracles behind the gain formulas.
//!
//! The sampled estimators return lower bounds of the suprema they target: they
//! are certified by sampling only, never by enclosure. Every estimate carries
//! the number of evaluations it used so callers can report it.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{average_field, common_dim, NodeModel, SharedModel};
use crate::error::{Error, Result};

/// Default number of sampled pairs / states for the oracles.
pub const DEFAULT_SAMPLES: usize = 100_000;

/// Entrywise bounds `S` on the Jacobian over the ball `‖x‖ ≤ radius`:
/// `∂f_i/∂x_i ≤ S_ii` and `|∂f_i/∂x_j| ≤ S_ij` for `i ≠ j`, all `S_ij ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobianBounds {
    pub entries: DMatrix<f64>,
    pub radius: f64,
}

impl JacobianBounds {
    pub fn new(entries: DMatrix<f64>, radius: f64) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension("Jacobian bounds must be square".into()));
        }
        if entries.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("Jacobian bounds must be finite and nonnegative".into()));
        }
        Ok(JacobianBounds { entries, radius })
    }
}

/// `μ∞⁻(A) = min_i (A_ii − Σ_{j≠i} |A_ij|)`.
pub fn mu_inf_minus(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| {
            let off: f64 = (0..a.ncols()).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
            a[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn sym_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

/// Smallest eigenvalue of `(A + Aᵀ)/2`.
pub fn lambda_min_sym(a: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(sym_part(a)).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Diagonal `Q` with `Q_ii = S_ii + Σ_{j≠i} (S_ij + S_ji)/2`; the field is then
/// QUAD(I, Q) on the (convex) region the bounds hold on.
pub fn quad_from_jacobian_bounds(s: &JacobianBounds) -> DMatrix<f64> {
    let s = &s.entries;
    let n = s.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            return 0.0;
        }
        s[(i, i)] + (0..n).filter(|&k| k != i).map(|k| (s[(i, k)] + s[(k, i)]) / 2.0).sum::<f64>()
    })
}

/// `xᵀf(x) + h(x)`; zero exactly when `½‖x‖²` satisfies `V̇ = −h + xᵀu` at `x`.
pub fn semipassivity_residual(h: &dyn Fn(&[f64]) -> f64, f: &dyn NodeModel, x: &[f64]) -> f64 {
    let fx = f.eval_vec(x, 0.0);
    x.iter().zip(&fx).map(|(a, b)| a * b).sum::<f64>() + h(x)
}

/// Result of a sampling oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledEstimate<T> {
    pub value: T,
    pub evaluations: usize,
    pub seed: u64,
}

fn gaussian_direction(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = norm2(&v);
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    let scale = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
    gaussian_direction(rng, dim).into_iter().map(|x| x * scale).collect()
}

fn project_to_ball(v: &mut [f64], radius: f64) {
    let norm = norm2(v);
    if norm > radius {
        v.iter_mut().for_each(|x| *x *= radius / norm);
    }
}

fn check_finite(values: &[f64], what: &'static str, at: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what, sample: at.to_vec() })
    }
}

/// Sampled lower bound on the tightest scalar `q` with `f` QUAD(I, qI) on the
/// ball: the maximum of `(v₁−v₂)ᵀ(f(v₁)−f(v₂)) / ‖v₁−v₂‖²` over sampled pairs.
/// Half of the pairs are independent uniform draws; the other half are close
/// pairs (log-uniform separation) that resolve the local Jacobian.
pub fn estimate_quad_sampled(
    f: &dyn NodeModel,
    radius: f64,
    pair_count: usize,
    seed: u64,
) -> Result<SampledEstimate<f64>> {
    if pair_count == 0 || !(radius > 0.0) {
        return Err(Error::InvalidArgument("pair_count ≥ 1 and radius > 0 required".into()));
    }
    let dim = f.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::NEG_INFINITY;
    let (mut f1, mut f2) = (vec![0.0; dim], vec![0.0; dim]);
    for k in 0..pair_count {
        let v1 = uniform_in_ball(&mut rng, dim, radius);
        let v2 = if k % 2 == 0 {
            uniform_in_ball(&mut rng, dim, radius)
        } else {
            let h = radius * 10f64.powf(-rng.gen_range(1.0..4.0));
            let dir = gaussian_direction(&mut rng, dim);
            let mut v2: Vec<f64> = v1.iter().zip(&dir).map(|(a, d)| a + h * d).collect();
            project_to_ball(&mut v2, radius);
            v2
        };
        let delta: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a - b).collect();
        let d2: f64 = delta.iter().map(|x| x * x).sum();
        if d2 == 0.0 {
            continue;
        }
        f.eval(&v1, 0.0, &mut f1);
        check_finite(&f1, "vector field", &v1)?;
        f.eval(&v2, 0.0, &mut f2);
        check_finite(&f2, "vector field", &v2)?;
        let num: f64 = delta.iter().zip(f1.iter().zip(&f2)).map(|(d, (a, b))| d * (a - b)).sum();
        best = best.max(num / d2);
    }
    Ok(SampledEstimate { value: best, evaluations: 2 * pair_count, seed })
}

/// Componentwise `max_i |f_i(x̃) − f̃(x̄)|` at one stacked state.
fn mismatch_at(models: &[SharedModel], x: &[f64], dim: usize) -> Result<Vec<f64>> {
    let n_nodes = models.len();
    let avg_state = crate::dynamics::state_average(x, n_nodes, dim);
    let avg_field = average_field(models, x, 0.0)?;
    check_finite(&avg_field, "average field", x)?;
    let mut dev = vec![0.0f64; dim];
    let mut buf = vec![0.0; dim];
    for m in models {
        m.eval(&avg_state, 0.0, &mut buf);
        check_finite(&buf, "node field at state average", x)?;
        for ((d, a), b) in dev.iter_mut().zip(&buf).zip(&avg_field) {
            *d = d.max((a - b).abs());
        }
    }
    Ok(dev)
}

/// Sampled lower bound on the smallest `m ≥ 0` with `m ≥ |f_i(x̃) − f̃(x̄)|` for
/// every node `i` and every stacked state `‖x̄‖ ≤ radius`.
///
/// The budget is split between uniform draws in the ball, draws on its
/// boundary, coordinate-extreme probes (`±r e_k`, `r(±e_k ± e_l)/√2`), and a
/// final local ascent from the best points found for each component.
pub fn estimate_mismatch_bound(
    models: &[SharedModel],
    radius: f64,
    sample_count: usize,
    seed: u64,
) -> Result<SampledEstimate<Vec<f64>>> {
    let dim = common_dim(models)?;
    if !(radius > 0.0) || sample_count == 0 {
        return Err(Error::InvalidArgument("radius > 0 and sample_count ≥ 1 required".into()));
    }
    if models.len() == 1 {
        return Ok(SampledEstimate { value: vec![0.0; dim], evaluations: 0, seed });
    }
    let total = models.len() * dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = vec![0.0f64; dim];
    let mut evaluations = 0usize;
    // best (value, point) per component, used as ascent starts
    const KEEP: usize = 4;
    let mut elite: Vec<Vec<(f64, Vec<f64>)>> = vec![Vec::new(); dim];

    let mut record = |x: Vec<f64>, m: &mut Vec<f64>, evaluations: &mut usize| -> Result<()> {
        let dev = mismatch_at(models, &x, dim)?;
        *evaluations += 1;
        for (c, &d) in dev.iter().enumerate() {
            m[c] = m[c].max(d);
            let slot = &mut elite[c];
            if slot.len() < KEEP || d > slot[slot.len() - 1].0 {
                slot.push((d, x.clone()));
                slot.sort_by(|a, b| b.0.total_cmp(&a.0));
                slot.truncate(KEEP);
            }
        }
        Ok(())
    };

    // coordinate-extreme probes
    let diag = radius / std::f64::consts::SQRT_2;
    let mut probes = Vec::new();
    for k in 0..total {
        for s in [-1.0, 1.0] {
            let mut p = vec![0.0; total];
            p[k] = s * radius;
            probes.push(p);
        }
        for l in k + 1..total {
            for (sk, sl) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut p = vec![0.0; total];
                p[k] = sk * diag;
                p[l] = sl * diag;
                probes.push(p);
            }
        }
    }
    let probe_budget = probes.len().min(sample_count / 10);
    for p in probes.into_iter().take(probe_budget) {
        record(p, &mut m, &mut evaluations)?;
    }

    let ascent_budget = sample_count / 5;
    let random_budget = sample_count.saturating_sub(probe_budget + ascent_budget);
    for k in 0..random_budget {
        let x = if k % 2 == 0 {
            uniform_in_ball(&mut rng, total, radius)
        } else {
            gaussian_direction(&mut rng, total).into_iter().map(|v| v * radius).collect()
        };
        record(x, &mut m, &mut evaluations)?;
    }

    // local ascent, split evenly across components and their elite starts
    let starts: Vec<(usize, Vec<f64>)> =
        elite.iter().enumerate().flat_map(|(c, slot)| slot.iter().map(move |(_, x)| (c, x.clone()))).collect();
    if !starts.is_empty() {
        let per_start = ascent_budget / starts.len();
        for (c, mut x) in starts {
            let mut value = mismatch_at(models, &x, dim)?[c];
            let mut step = 0.1 * radius;
            for _ in 0..per_start {
                let dir = gaussian_direction(&mut rng, total);
                let mut cand: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
                project_to_ball(&mut cand, radius);
                let dev = mismatch_at(models, &cand, dim)?;
                evaluations += 1;
                for (mc, d) in m.iter_mut().zip(&dev) {
                    *mc = mc.max(*d);
                }
                if dev[c] > value {
                    value = dev[c];
                    x = cand;
                    step = (step * 1.5).min(radius);
                } else {
                    step = (step * 0.85).max(1e-9 * radius);
                }
            }
        }
    }
    Ok(SampledEstimate { value: m, evaluations, seed })
}
