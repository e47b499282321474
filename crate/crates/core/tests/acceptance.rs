//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use netsync::certify::{certify_network, critical_gains, CertifyOptions, QuadMode};
use netsync::dynamics::{make_vdp, total_error, FnModel, Linear, NodeModel, SharedModel};
use netsync::graph::{algebraic_connectivity, build_graph, incidence, laplacian, minimum_density, Graph};
use netsync::measures::{estimate_mismatch_bound, mu_inf_minus, quad_from_jacobian_bounds, JacobianBounds};
use netsync::simulate::{
    default_bound_batch, estimate_ultimate_bound, integrate, integrate_observed, sync_report, verify_average_dynamics,
    Method, NetworkSystem, Trajectory, DEFAULT_BOUND_TAIL_FRACTION, DEFAULT_BOUND_T_END, SYNC_TAIL_FRACTION,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const RADIUS: f64 = 7.72;
const IC: [f64; 6] = [1.5, 1.5, 1.75, 1.75, 2.0, 2.0];
const DT: f64 = 1e-4;
const T_END: f64 = 10.0;
const THRESHOLD: f64 = 0.05;

type Outcome = (bool, String);
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn models() -> Vec<SharedModel> {
    [1.0, 2.0, 3.0].iter().map(|&mu| Arc::new(make_vdp(mu, 0.01, 0.001)) as SharedModel).collect()
}

fn network(c: f64, c_d: f64) -> NetworkSystem {
    let k3 = Graph::complete(3).unwrap();
    NetworkSystem::builder(models(), k3.clone(), k3).gains(c, c_d).build().unwrap()
}

fn reference_run(c_d: f64) -> Trajectory {
    integrate(&network(4.0, c_d), &IC, DT, T_END, Method::Euler).unwrap()
}

fn tail_range(traj: &Trajectory) -> (f64, f64) {
    let r = sync_report(traj, THRESHOLD, SYNC_TAIL_FRACTION);
    (r.tail_min_e_tot, r.tail_max_e_tot)
}

fn criterion_1() -> Outcome {
    let eye = DMatrix::identity(2, 2);
    let g = critical_gains(11.58, 3.0, &eye, &eye, &[0.0, 179.90], 1.5, &eye).unwrap();
    let rel = |v: f64, want: f64| ((v - want) / want).abs();
    let ok = rel(g.c_star, 3.86) <= 0.005 && rel(g.c_d_star, 119.93) <= 0.005;
    (ok, format!("c* = {:.4} (want 3.86 ± 0.5%), c_d* = {:.4} (want 119.93 ± 0.5%)", g.c_star, g.c_d_star))
}

fn criterion_2a(run: &Trajectory) -> Outcome {
    let (lo, hi) = tail_range(run);
    (lo > THRESHOLD, format!("c_d = 0: tail e_tot ∈ [{lo:.3e}, {hi:.3e}], required to stay above {THRESHOLD}"))
}

fn criterion_2b(run: &Trajectory, both_secs: f64) -> Outcome {
    let (lo, hi) = tail_range(run);
    (
        hi < THRESHOLD && both_secs < 30.0,
        format!(
            "c_d = 120: tail e_tot ∈ [{lo:.3e}, {hi:.3e}], required to stay below {THRESHOLD}; \
             both runs took {both_secs:.2}s (budget 30s)"
        ),
    )
}

fn criterion_3(run: &Trajectory) -> Outcome {
    match verify_average_dynamics(run, &models(), 8.0, 0.05) {
        Ok(r) => (r.pass && r.max_deviation <= 0.5, format!("max deviation {:.3e} (limit 0.5)", r.max_deviation)),
        Err(e) => (false, format!("error: {e}")),
    }
}

fn criterion_4() -> Outcome {
    let m = estimate_mismatch_bound(&models(), RADIUS, 100_000, 0).unwrap().value;
    let norm = m.iter().copied().fold(0.0, f64::max);
    ((160.0..=200.0).contains(&norm), format!("‖m‖∞ = {norm:.2} over B_{RADIUS} (band [160, 200])"))
}

fn criterion_5() -> Outcome {
    let net = network(4.0, 120.0);
    let batch = default_bound_batch(net.state_len(), 0);
    let est = estimate_ultimate_bound(&net, &batch, DT, DEFAULT_BOUND_T_END, DEFAULT_BOUND_TAIL_FRACTION).unwrap();
    (est.radius <= 9.0, format!("r = {:.3} over {} initial conditions (limit 9)", est.radius, est.ic_batch))
}

// Criterion 6 sub-suites. Each returns the number of violations.

fn suite_mu_shift(rng: &mut ChaCha8Rng) -> usize {
    (0..100)
        .filter(|_| {
            let n = rng.gen_range(1..=5);
            let a: DMatrix<f64> = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-10.0..10.0));
            let c = rng.gen_range(-10.0..10.0);
            let shifted = &a + DMatrix::identity(n, n) * c;
            (mu_inf_minus(&shifted) - mu_inf_minus(&a) - c).abs() > 1e-12
        })
        .count()
}

/// Random quadratic field with rigorous entrywise Jacobian bounds on `‖x‖ ≤ r`.
fn random_polynomial_field(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> (impl NodeModel, DMatrix<f64>) {
    let a: Vec<f64> = (0..dim * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let b: Vec<f64> = (0..dim * dim * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let bijk = move |b: &[f64], i: usize, j: usize, k: usize| b[(i * dim + j) * dim + k];
    let s = DMatrix::from_fn(dim, dim, |i, j| {
        let slope = (0..dim).map(|k| (bijk(&b, i, j, k) + bijk(&b, i, k, j)).powi(2)).sum::<f64>().sqrt();
        let lin = a[i * dim + j];
        if i == j {
            (lin + r * slope).max(0.0)
        } else {
            lin.abs() + r * slope
        }
    });
    let q = quad_from_jacobian_bounds(&JacobianBounds::new(s, r).unwrap());
    let model = FnModel::new(dim, move |x: &[f64], _t, out: &mut [f64]| {
        for i in 0..dim {
            out[i] = (0..dim)
                .map(|j| a[i * dim + j] * x[j] + (0..dim).map(|k| bijk(&b, i, j, k) * x[j] * x[k]).sum::<f64>())
                .sum();
        }
    });
    (model, q)
}

fn in_ball(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = r * rng.gen::<f64>().powf(1.0 / dim as f64) / norm;
    v.into_iter().map(|x| x * scale).collect()
}

fn suite_quad_inequality(rng: &mut ChaCha8Rng) -> usize {
    let mut violations = 0;
    for field in 0..10 {
        let dim = 2 + field % 3;
        let r = rng.gen_range(0.5..2.0);
        let (f, q) = random_polynomial_field(rng, dim, r);
        for _ in 0..1000 {
            let (v1, v2) = (in_ball(rng, dim, r), in_ball(rng, dim, r));
            let (f1, f2) = (f.eval_vec(&v1, 0.0), f.eval_vec(&v2, 0.0));
            let d: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a - b).collect();
            let lhs: f64 = (0..dim).map(|i| d[i] * (f1[i] - f2[i])).sum();
            let rhs: f64 = (0..dim).map(|i| q[(i, i)] * d[i] * d[i]).sum();
            if lhs > rhs + 1e-12 * (1.0 + rhs.abs()) {
                violations += 1;
            }
        }
    }
    violations
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|_| rng.gen_bool(0.5)).collect();
    build_graph(n, &edges).unwrap()
}

fn suite_coupling(rng: &mut ChaCha8Rng) -> usize {
    let mut violations = 0;
    for _ in 0..1000 {
        let (nodes, dim) = (rng.gen_range(2..=6), rng.gen_range(1..=3));
        let a: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        let mut gamma_d: DMatrix<f64> = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
        for i in 0..dim {
            gamma_d[(i, i)] = (0..dim).filter(|&j| j != i).map(|j| gamma_d[(i, j)].abs()).sum::<f64>();
        }
        let models = (0..nodes).map(|_| Arc::new(Linear::scaled_identity(dim, 0.0)) as SharedModel).collect();
        let net = NetworkSystem::builder(models, random_graph(rng, nodes), random_graph(rng, nodes))
            .gains(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0))
            .gamma(&a * a.transpose())
            .gamma_d(gamma_d)
            .build()
            .unwrap();
        let x: Vec<f64> = (0..net.state_len()).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let u = net.coupling_vector(&x).unwrap();
        let scale = 1.0 + u.iter().map(|v| v.abs()).sum::<f64>();
        let zero_sum = (0..dim).all(|k| (0..nodes).map(|i| u[i * dim + k]).sum::<f64>().abs() <= 1e-12 * scale);
        let power: f64 = x.iter().zip(&u).map(|(a, b)| a * b).sum();
        if !zero_sum || power > 1e-10 * scale {
            violations += 1;
        }
    }
    violations
}

fn suite_manifold() -> usize {
    let mut violations = 0;
    for (c, c_d) in [(0.0, 0.0), (4.0, 0.0), (4.0, 120.0)] {
        let shared: SharedModel = Arc::new(make_vdp(2.0, 0.01, 0.001));
        let same = vec![shared; 3];
        let k3 = Graph::complete(3).unwrap();
        let net = NetworkSystem::builder(same, k3.clone(), k3).gains(c, c_d).build().unwrap();
        let x0 = [1.75, 1.75, 1.75, 1.75, 1.75, 1.75];
        integrate_observed(&net, &x0, DT, T_END, Method::Euler, &mut |_, _, x| {
            if x[0..2] != x[2..4] || x[0..2] != x[4..6] || total_error(x, 3, 2) > 1e-12 {
                violations += 1;
            }
        })
        .unwrap();
    }
    violations
}

fn suite_complete_graphs() -> usize {
    (2..=10)
        .filter(|&n| {
            let g = Graph::complete(n).unwrap();
            let nf = n as f64;
            (algebraic_connectivity(&g) - nf).abs() > 1e-9 * nf
                || (minimum_density(&g).unwrap() - nf / 2.0).abs() > 1e-12 * nf
        })
        .count()
}

fn suite_incidence(rng: &mut ChaCha8Rng) -> usize {
    (0..200)
        .filter(|_| {
            let n = rng.gen_range(1..=12);
            let g = random_graph(rng, n);
            let b = incidence(&g).0;
            (&b * b.transpose() - laplacian(&g).0).abs().max() > 1e-12
        })
        .count()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let suites = [
        ("μ∞⁻ shift", suite_mu_shift(&mut rng)),
        ("QUAD inequality", suite_quad_inequality(&mut rng)),
        ("coupling zero-sum/dissipativity", suite_coupling(&mut rng)),
        ("manifold invariance", suite_manifold()),
        ("λ₂(K_N), δ(K_N)", suite_complete_graphs()),
        ("B·Bᵀ = L", suite_incidence(&mut rng)),
    ];
    let ok = suites.iter().all(|(_, v)| *v == 0);
    let detail = suites.iter().map(|(name, v)| format!("{name}: {v} violations")).collect::<Vec<_>>().join("; ");
    (ok, detail)
}

fn criterion_7() -> Outcome {
    // Fully computed certificate: sampled QUAD constant and sampled mismatch bound.
    let options = CertifyOptions { quad_mode: QuadMode::Sampled, samples: 100_000, seed: 0 };
    let cert = certify_network(&network(0.0, 0.0), RADIUS, &options).unwrap();
    let (c, c_d) = (1.05 * cert.c_star, 1.05 * cert.c_d_star);
    let net = network(c, c_d);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let x0 = in_ball(&mut rng, net.state_len(), RADIUS);
        let traj = integrate(&net, &x0, DT, T_END, Method::Euler).unwrap();
        worst = worst.max(traj.e_tot(traj.len() - 1));
    }
    (
        worst < THRESHOLD,
        format!(
            "certified c* = {:.3}, c_d* = {:.3}; at 1.05× worst terminal e_tot over 5 ICs = {worst:.3e}",
            cert.c_star, cert.c_d_star
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let run_a = reference_run(0.0);
    let run_b = reference_run(120.0);
    let both_secs = started.elapsed().as_secs_f64();

    let criteria: Vec<Criterion> = vec![
        ("1 gain formula", Box::new(criterion_1)),
        ("2a run (a), c_d = 0, stays unsynchronized", Box::new(|| criterion_2a(&run_a))),
        ("2b run (b), c_d = 120, synchronizes", Box::new(|| criterion_2b(&run_b, both_secs))),
        ("3 average dynamics", Box::new(|| criterion_3(&run_b))),
        ("4 mismatch bound", Box::new(criterion_4)),
        ("5 ultimate bound", Box::new(criterion_5)),
        ("6 oracle suites", Box::new(criterion_6)),
        ("7 sufficiency spot-check", Box::new(criterion_7)),
    ];
    let mut failures = 0;
    for (name, check) in &criteria {
        let t0 = Instant::now();
        let (ok, detail) = check();
        failures += usize::from(!ok);
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {name}: {detail} [{:.2}s]", t0.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
