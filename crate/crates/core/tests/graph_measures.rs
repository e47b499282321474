use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use netsync::dynamics::{make_vdp, FnModel, NodeModel, SharedModel};
use netsync::graph::{algebraic_connectivity, build_graph, incidence, is_connected, laplacian, minimum_density, Graph};
use netsync::measures::{
    estimate_mismatch_bound, estimate_quad_sampled, mu_inf_minus, quad_from_jacobian_bounds, spectral_norm,
    JacobianBounds,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arb_graph(max_nodes: usize) -> impl Strategy<Value = Graph> {
    (1..=max_nodes).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let len = pairs.len();
        proptest::collection::vec(any::<bool>(), len).prop_map(move |keep| {
            let edges: Vec<_> = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
            build_graph(n, &edges).unwrap()
        })
    })
}

/// Independent minimum-density oracle: every subset as a `Vec<bool>`, both
/// sides of each cut visited.
fn brute_density(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut best = f64::INFINITY;
    for mask in 1..(1usize << n) - 1 {
        let inside: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
        let size = inside.iter().filter(|b| **b).count();
        let cut = g.edges().iter().filter(|(i, j)| inside[*i] != inside[*j]).count();
        best = best.min(n as f64 * cut as f64 / (2.0 * size as f64 * (n - size) as f64));
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn laplacian_structure(g in arb_graph(12)) {
        let l = laplacian(&g).0;
        prop_assert_eq!(&l, &l.transpose());
        for row in l.row_iter() {
            prop_assert_eq!(row.sum(), 0.0);
        }
        let b = incidence(&g).0;
        prop_assert!((&b * b.transpose() - &l).abs().max() < 1e-12);
        for col in b.column_iter() {
            prop_assert_eq!(col.iter().filter(|v| **v == 1.0).count(), 1);
            prop_assert_eq!(col.iter().filter(|v| **v == -1.0).count(), 1);
        }
    }

    #[test]
    fn connectivity_matches_spectrum(g in arb_graph(12)) {
        if g.node_count() >= 2 {
            prop_assert_eq!(algebraic_connectivity(&g) > 1e-9, is_connected(&g));
        }
    }

    #[test]
    fn density_matches_brute_force(g in arb_graph(8)) {
        if g.node_count() >= 2 && is_connected(&g) {
            let d = minimum_density(&g).unwrap();
            prop_assert!((d - brute_density(&g)).abs() < 1e-12);
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn mu_inf_minus_shift(entries in proptest::collection::vec(-10.0f64..10.0, 9), c in -5.0f64..5.0) {
        let a = DMatrix::from_row_slice(3, 3, &entries);
        let shifted = &a + DMatrix::identity(3, 3) * c;
        prop_assert!((mu_inf_minus(&shifted) - mu_inf_minus(&a) - c).abs() < 1e-12);
    }

    #[test]
    fn quad_matrix_diagonal_nonnegative(entries in proptest::collection::vec(0.0f64..10.0, 16)) {
        let s = JacobianBounds::new(DMatrix::from_row_slice(4, 4, &entries), 1.0).unwrap();
        let q = quad_from_jacobian_bounds(&s);
        for i in 0..4 {
            for j in 0..4 {
                if i == j { prop_assert!(q[(i, j)] >= 0.0) } else { prop_assert_eq!(q[(i, j)], 0.0) }
            }
        }
    }
}

#[test]
fn complete_graph_closed_forms() {
    for n in 2..=10 {
        let g = Graph::complete(n).unwrap();
        assert_relative_eq!(algebraic_connectivity(&g), n as f64, max_relative = 1e-9);
        assert_relative_eq!(minimum_density(&g).unwrap(), n as f64 / 2.0, max_relative = 1e-12);
    }
}

#[test]
fn path_connectivity_closed_form() {
    // λ₂(P_n) = 2(1 − cos(π/n))
    for n in 2..=12 {
        let expected = 2.0 * (1.0 - (std::f64::consts::PI / n as f64).cos());
        assert_relative_eq!(algebraic_connectivity(&Graph::path(n).unwrap()), expected, max_relative = 1e-9);
    }
}

#[test]
fn spectral_norm_against_gram_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let a: DMatrix<f64> = DMatrix::from_fn(2, 2, |_, _| rng.gen_range(-3.0..3.0));
        // closed-form largest eigenvalue of the 2×2 Gram matrix
        let g = a.transpose() * &a;
        let (tr, det) = (g[(0, 0)] + g[(1, 1)], g.determinant());
        let lmax = tr / 2.0 + ((tr * tr / 4.0 - det).max(0.0)).sqrt();
        assert_relative_eq!(spectral_norm(&a), lmax.sqrt(), max_relative = 1e-9);
    }
}

/// Random quadratic field `f_i(x) = Σ_j A_ij x_j + Σ_{j,k} B_ijk x_j x_k` with
/// rigorous Jacobian bounds on `‖x‖ ≤ r`: the `x`-dependent part of
/// `∂f_i/∂x_j` is `Σ_k (B_ijk + B_ikj) x_k`, bounded by `r·‖B_ij· + B_i·j‖₂`.
struct QuadraticField {
    dim: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl QuadraticField {
    fn random(rng: &mut ChaCha8Rng, dim: usize) -> Self {
        QuadraticField {
            dim,
            a: (0..dim * dim).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            b: (0..dim * dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        }
    }

    fn b(&self, i: usize, j: usize, k: usize) -> f64 {
        self.b[(i * self.dim + j) * self.dim + k]
    }

    fn bounds(&self, r: f64) -> JacobianBounds {
        let n = self.dim;
        let s = DMatrix::from_fn(n, n, |i, j| {
            let slope = (0..n).map(|k| (self.b(i, j, k) + self.b(i, k, j)).powi(2)).sum::<f64>().sqrt();
            let a = self.a[i * n + j];
            if i == j {
                (a + r * slope).max(0.0)
            } else {
                a.abs() + r * slope
            }
        });
        JacobianBounds::new(s, r).unwrap()
    }

    fn into_model(self) -> impl NodeModel {
        let n = self.dim;
        FnModel::new(n, move |x: &[f64], _t, out: &mut [f64]| {
            for (i, o) in out.iter_mut().enumerate() {
                let mut v = 0.0;
                for j in 0..n {
                    v += self.a[i * n + j] * x[j];
                    for k in 0..n {
                        v += self.b(i, j, k) * x[j] * x[k];
                    }
                }
                *o = v;
            }
        })
    }
}

#[test]
fn jacobian_quad_inequality_never_violated() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for field_idx in 0..10 {
        let dim = 2 + field_idx % 2;
        let r = rng.gen_range(0.5..2.0);
        let field = QuadraticField::random(&mut rng, dim);
        let q = quad_from_jacobian_bounds(&field.bounds(r));
        let model = field.into_model();
        for _ in 0..1000 {
            let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                loop {
                    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-r..r)).collect();
                    if v.iter().map(|x| x * x).sum::<f64>() <= r * r {
                        return v;
                    }
                }
            };
            let (v1, v2) = (sample(&mut rng), sample(&mut rng));
            let (f1, f2) = (model.eval_vec(&v1, 0.0), model.eval_vec(&v2, 0.0));
            let d: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a - b).collect();
            let lhs: f64 = (0..dim).map(|i| d[i] * (f1[i] - f2[i])).sum();
            let rhs: f64 = (0..dim).map(|i| q[(i, i)] * d[i] * d[i]).sum();
            assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()), "field {field_idx}: {lhs} > {rhs}");
        }
        // the sampled scalar constant can never exceed the largest Q_ii
        let sampled = estimate_quad_sampled(&model, r, 5_000, field_idx as u64).unwrap().value;
        let qmax = (0..dim).map(|i| q[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
        assert!(sampled <= qmax + 1e-9, "{sampled} > {qmax}");
    }
}

#[test]
fn vdp_bounds_hold_on_the_ball() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let r = 7.72;
    for mu in [1.0, 2.0, 3.0] {
        let m = make_vdp(mu, 0.01, 0.001);
        let s = m.jacobian_bounds(r).unwrap().entries;
        for _ in 0..10_000 {
            let (x1, x2) = (rng.gen_range(-r..r), rng.gen_range(-r..r));
            if x1 * x1 + x2 * x2 > r * r {
                continue;
            }
            let j = [[-0.01, 1.0], [-2.0 * mu * x1 * x2 - 1.0, mu * (1.0 - x1 * x1 - 0.003 * x2 * x2)]];
            assert!(j[0][0] <= s[(0, 0)] && j[1][1] <= s[(1, 1)]);
            assert!(j[0][1].abs() <= s[(0, 1)] && j[1][0].abs() <= s[(1, 0)]);
        }
    }
}

fn vdp_trio() -> Vec<SharedModel> {
    [1.0, 2.0, 3.0].iter().map(|&mu| Arc::new(make_vdp(mu, 0.01, 0.001)) as SharedModel).collect()
}

#[test]
fn mismatch_monotone_in_radius() {
    let models = vdp_trio();
    let mut prev = vec![0.0; 2];
    for r in [1.0, 2.0, 4.0, 7.72] {
        let m = estimate_mismatch_bound(&models, r, 20_000, 3).unwrap().value;
        for (a, b) in prev.iter().zip(&m) {
            assert!(a <= b, "m({r}) = {m:?} below previous {prev:?}");
        }
        prev = m;
    }
}

#[test]
fn mismatch_first_component_is_zero_for_vdp() {
    // f₁ is linear and shared by all nodes, so f₁(x̃) equals the average exactly up to rounding
    let m = estimate_mismatch_bound(&vdp_trio(), 7.72, 10_000, 1).unwrap().value;
    assert!(m[0] < 1e-12);
    assert!(m[1] > 100.0);
}

#[test]
fn mismatch_is_seeded() {
    let models = vdp_trio();
    let a = estimate_mismatch_bound(&models, 3.0, 5_000, 42).unwrap();
    let b = estimate_mismatch_bound(&models, 3.0, 5_000, 42).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.evaluations, 5_000);
}
