//! Node vector fields, built-in models, the average field and synchronization errors.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measures::JacobianBounds;

/// Vector field `f_i(x; t)` of a single node. Implementations must be pure.
pub trait NodeModel: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// Writes `f(x; t)` into `out` (`x.len() == out.len() == dim()`).
    fn eval(&self, x: &[f64], t: f64, out: &mut [f64]);

    /// Entrywise Jacobian bounds valid on the ball `‖x‖ ≤ radius`, if known.
    fn jacobian_bounds(&self, _radius: f64) -> Option<JacobianBounds> {
        None
    }

    /// Stability component `h(x)` with `xᵀf(x) = −h(x)` for the storage
    /// function `½‖x‖²`, if known.
    fn stability_component(&self, _x: &[f64]) -> Option<f64> {
        None
    }

    fn eval_vec(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval(x, t, &mut out);
        out
    }
}

pub type SharedModel = Arc<dyn NodeModel>;

/// Modified van der Pol oscillator:
///
/// ```text
/// ẋ₁ = x₂ − ε x₁
/// ẋ₂ = μ (1 − x₁² − η x₂²) x₂ − x₁
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VanDerPol {
    pub mu: f64,
    pub epsilon: f64,
    pub eta: f64,
}

pub fn make_vdp(mu: f64, epsilon: f64, eta: f64) -> VanDerPol {
    VanDerPol { mu, epsilon, eta }
}

impl NodeModel for VanDerPol {
    fn dim(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], _t: f64, out: &mut [f64]) {
        let (x1, x2) = (x[0], x[1]);
        out[0] = x2 - self.epsilon * x1;
        out[1] = self.mu * (1.0 - x1 * x1 - self.eta * x2 * x2) * x2 - x1;
    }

    /// Over `‖x‖ ≤ r`, using `|x₁x₂| ≤ r²/2`:
    /// `∂f₁/∂x₁ = −ε`, `|∂f₁/∂x₂| = 1`, `|∂f₂/∂x₁| = |2μx₁x₂ + 1| ≤ |μ|r² + 1`,
    /// `∂f₂/∂x₂ = μ(1 − x₁² − 3ηx₂²) ≤ μ` (needs `μ, η ≥ 0`).
    fn jacobian_bounds(&self, radius: f64) -> Option<JacobianBounds> {
        if self.mu < 0.0 || self.eta < 0.0 || !(radius >= 0.0) {
            return None;
        }
        let s = DMatrix::from_row_slice(
            2,
            2,
            &[(-self.epsilon).max(0.0), 1.0, self.mu.abs() * radius * radius + 1.0, self.mu],
        );
        JacobianBounds::new(s, radius).ok()
    }

    fn stability_component(&self, x: &[f64]) -> Option<f64> {
        let (x1, x2) = (x[0], x[1]);
        Some(self.epsilon * x1 * x1 + self.mu * x2 * x2 * (x1 * x1 + self.eta * x2 * x2 - 1.0))
    }
}

/// Linear field `f(x) = A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub matrix: DMatrix<f64>,
}

impl Linear {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension("linear model matrix must be square".into()));
        }
        Ok(Linear { matrix })
    }

    /// `f(x) = k x` in dimension `dim`.
    pub fn scaled_identity(dim: usize, k: f64) -> Self {
        Linear { matrix: DMatrix::identity(dim, dim) * k }
    }
}

impl NodeModel for Linear {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn eval(&self, x: &[f64], _t: f64, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.matrix.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    /// Constant Jacobian: `S_ii = max(A_ii, 0)`, `S_ij = |A_ij|`.
    fn jacobian_bounds(&self, radius: f64) -> Option<JacobianBounds> {
        let s = DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            let a = self.matrix[(i, j)];
            if i == j {
                a.max(0.0)
            } else {
                a.abs()
            }
        });
        JacobianBounds::new(s, radius).ok()
    }

    /// Only a valid storage identity when `A` is `−kI`; `h(x) = −xᵀAx` in general.
    fn stability_component(&self, x: &[f64]) -> Option<f64> {
        let ax = self.eval_vec(x, 0.0);
        Some(-x.iter().zip(&ax).map(|(a, b)| a * b).sum::<f64>())
    }
}

/// Wraps a closure as a node model. Handy for tests and embedding.
pub struct FnModel<F> {
    dim: usize,
    f: F,
}

impl<F> FnModel<F>
where
    F: Fn(&[f64], f64, &mut [f64]) + Send + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnModel { dim, f }
    }
}

impl<F> fmt::Debug for FnModel<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnModel").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl<F> NodeModel for FnModel<F>
where
    F: Fn(&[f64], f64, &mut [f64]) + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64], t: f64, out: &mut [f64]) {
        (self.f)(x, t, out)
    }
}

/// Builds a registered model from its name and parameter map.
///
/// - `vdp`: `mu` (required), `epsilon` (default 0.01), `eta` (default 0.001)
/// - `linear`: `dim` (default 2), `scale` (required); `f(x) = scale · x`
pub fn model_from_registry(name: &str, params: &BTreeMap<String, f64>) -> Result<SharedModel> {
    let known: &[&str] = match name {
        "vdp" => &["mu", "epsilon", "eta"],
        "linear" => &["dim", "scale"],
        other => return Err(Error::InvalidArgument(format!("unknown model `{other}`"))),
    };
    if let Some(bad) = params.keys().find(|k| !known.contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!("unknown parameter `{bad}` for model `{name}`")));
    }
    let get = |key: &str, default: Option<f64>| -> Result<f64> {
        let v = params
            .get(key)
            .copied()
            .or(default)
            .ok_or_else(|| Error::InvalidArgument(format!("missing parameter `{key}`")))?;
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!("parameter `{key}` must be finite")));
        }
        Ok(v)
    };
    match name {
        "vdp" => Ok(Arc::new(make_vdp(get("mu", None)?, get("epsilon", Some(0.01))?, get("eta", Some(0.001))?))),
        _ => {
            let dim = get("dim", Some(2.0))?;
            if dim < 1.0 || dim.fract() != 0.0 {
                return Err(Error::InvalidArgument("parameter `dim` must be a positive integer".into()));
            }
            Ok(Arc::new(Linear::scaled_identity(dim as usize, get("scale", None)?)))
        }
    }
}

/// Common dimension of a nonempty model list.
pub fn common_dim(models: &[SharedModel]) -> Result<usize> {
    let first = models.first().ok_or_else(|| Error::Dimension("empty model list".into()))?;
    let n = first.dim();
    if let Some((i, m)) = models.iter().enumerate().find(|(_, m)| m.dim() != n) {
        return Err(Error::Dimension(format!("model {i} has dimension {}, expected {n}", m.dim())));
    }
    Ok(n)
}

/// Average vector field `f̃(x̄) = (1/N) Σ_i f_i(x_i; t)`.
pub fn average_field(models: &[SharedModel], x: &[f64], t: f64) -> Result<Vec<f64>> {
    let n = common_dim(models)?;
    let count = models.len();
    if x.len() != count * n {
        return Err(Error::Dimension(format!("stacked state has length {}, expected {}", x.len(), count * n)));
    }
    let mut acc = vec![0.0; n];
    let mut buf = vec![0.0; n];
    for (model, xi) in models.iter().zip(x.chunks_exact(n)) {
        model.eval(xi, t, &mut buf);
        acc.iter_mut().zip(&buf).for_each(|(a, b)| *a += b);
    }
    acc.iter_mut().for_each(|a| *a /= count as f64);
    Ok(acc)
}

/// State average, per-node errors `e_i = x_i − x̃` and `e_tot = (1/N) Σ ‖e_i‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorDecomposition {
    pub average: Vec<f64>,
    pub errors: Vec<Vec<f64>>,
    pub e_tot: f64,
}

pub fn state_average(x: &[f64], node_count: usize, dim: usize) -> Vec<f64> {
    let mut avg = vec![0.0; dim];
    for xi in x.chunks_exact(dim) {
        avg.iter_mut().zip(xi).for_each(|(a, b)| *a += b);
    }
    avg.iter_mut().for_each(|a| *a /= node_count as f64);
    avg
}

/// `e_tot` without materializing the per-node errors.
pub fn total_error(x: &[f64], node_count: usize, dim: usize) -> f64 {
    let avg = state_average(x, node_count, dim);
    x.chunks_exact(dim).map(|xi| xi.iter().zip(&avg).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()).sum::<f64>()
        / node_count as f64
}

pub fn decompose_errors(x: &[f64], node_count: usize, dim: usize) -> Result<ErrorDecomposition> {
    if node_count == 0 || dim == 0 || x.len() != node_count * dim {
        return Err(Error::Dimension(format!("stacked state has length {}, expected {node_count}·{dim}", x.len())));
    }
    let average = state_average(x, node_count, dim);
    let errors: Vec<Vec<f64>> =
        x.chunks_exact(dim).map(|xi| xi.iter().zip(&average).map(|(a, b)| a - b).collect()).collect();
    let e_tot = errors.iter().map(|e| e.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>() / node_count as f64;
    Ok(ErrorDecomposition { average, errors, e_tot })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vdp_values() {
        let m = make_vdp(1.0, 0.01, 0.001);
        assert_eq!(m.eval_vec(&[1.0, 0.0], 0.0), vec![-0.01, -1.0]);
        assert_eq!(make_vdp(3.7, -2.0, 5.0).eval_vec(&[0.0, 0.0], 0.0), vec![0.0, 0.0]);
    }

    #[test]
    fn vdp_storage_identity() {
        // xᵀf(x) = −h(x) at random states
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for mu in [1.0, 2.0, 3.0] {
            let m = make_vdp(mu, 0.01, 0.001);
            for _ in 0..1000 {
                let x = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
                let f = m.eval_vec(&x, 0.0);
                let h = m.stability_component(&x).unwrap();
                let lhs = x[0] * f[0] + x[1] * f[1];
                assert!((lhs + h).abs() <= 1e-9 * (1.0 + h.abs()), "{lhs} vs {h}");
            }
        }
    }

    #[test]
    fn vdp_bounds_shape() {
        let s = make_vdp(3.0, 0.01, 0.001).jacobian_bounds(2.0).unwrap();
        assert_eq!(s.entries, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 13.0, 3.0]));
        assert!(make_vdp(-1.0, 0.01, 0.001).jacobian_bounds(1.0).is_none());
    }

    #[test]
    fn average_field_cases() {
        let vdp: SharedModel = Arc::new(make_vdp(2.0, 0.01, 0.001));
        let x = [0.3, -1.2];
        let single = average_field(std::slice::from_ref(&vdp), &x, 0.0).unwrap();
        assert_eq!(single, vdp.eval_vec(&x, 0.0));
        let twice = average_field(&[vdp.clone(), vdp.clone()], &[0.3, -1.2, 0.3, -1.2], 0.0).unwrap();
        assert_relative_eq!(twice[0], single[0]);
        assert_relative_eq!(twice[1], single[1]);

        let plus: SharedModel = Arc::new(Linear::scaled_identity(2, 1.0));
        let minus: SharedModel = Arc::new(Linear::scaled_identity(2, -1.0));
        assert_eq!(average_field(&[plus, minus], &[1.0, 2.0, 1.0, 2.0], 0.0).unwrap(), vec![0.0, 0.0]);

        assert!(average_field(std::slice::from_ref(&vdp), &[1.0, 2.0, 3.0], 0.0).is_err());
        let three: SharedModel = Arc::new(Linear::scaled_identity(3, 1.0));
        assert!(average_field(&[vdp, three], &[0.0; 5], 0.0).is_err());
    }

    #[test]
    fn decompose_cases() {
        let d = decompose_errors(&[0.0, 2.0], 2, 1).unwrap();
        assert_eq!(d.average, vec![1.0]);
        assert_eq!(d.errors, vec![vec![-1.0], vec![1.0]]);
        assert_eq!(d.e_tot, 1.0);

        let d = decompose_errors(&[0.7, -0.2, 0.7, -0.2, 0.7, -0.2], 3, 2).unwrap();
        assert!(d.e_tot < 1e-15);

        let d = decompose_errors(&[1.5, 1.5, 1.75, 1.75, 2.0, 2.0], 3, 2).unwrap();
        assert_relative_eq!(d.average[0], 1.75);
        assert_relative_eq!(d.average[1], 1.75);
        // (1/3)(√0.125 + 0 + √0.125)
        assert_relative_eq!(d.e_tot, 2.0 * 0.125f64.sqrt() / 3.0, max_relative = 1e-12);
        assert_relative_eq!(d.e_tot, 0.2357, epsilon = 1e-4);
        assert_relative_eq!(total_error(&[1.5, 1.5, 1.75, 1.75, 2.0, 2.0], 3, 2), d.e_tot, max_relative = 1e-12);

        assert!(decompose_errors(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn registry() {
        let mut p = BTreeMap::new();
        p.insert("mu".to_string(), 2.0);
        let m = model_from_registry("vdp", &p).unwrap();
        assert_eq!(m.eval_vec(&[1.0, 0.0], 0.0), vec![-0.01, -1.0]);
        assert!(model_from_registry("lorenz", &p).is_err());
        p.insert("nu".to_string(), 1.0);
        assert!(model_from_registry("vdp", &p).is_err());
        assert!(model_from_registry("vdp", &BTreeMap::new()).is_err());
        let lin = model_from_registry("linear", &BTreeMap::from([("scale".to_string(), -1.0)])).unwrap();
        assert_eq!(lin.eval_vec(&[1.0, 2.0], 0.0), vec![-1.0, -2.0]);
    }
}
