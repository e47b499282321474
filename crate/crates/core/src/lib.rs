//! Synchronization of heterogeneous nonlinear oscillator networks.
//!
//! Nodes evolve as `ẋ_i = f_i(x_i; t) + u_i` and are coupled through two
//! undirected graphs: a diffusive layer `G` (gain `c`, inner matrix `Γ`) and a
//! discontinuous layer `G_d` (gain `c_d`, inner matrix `Γ_d`) acting through the
//! componentwise sign of state differences:
//!
//! ```text
//! u_i = -c Σ_j L_ij Γ (x_j - x_i) - c_d Σ_j L^d_ij Γ_d sign(x_j - x_i)
//! ```
//!
//! The crate provides
//!
//! - [`graph`]: Laplacians, incidence matrices, algebraic connectivity, minimum density;
//! - [`measures`]: `μ∞⁻`, QUAD bounds from Jacobian bounds, sampling oracles;
//! - [`dynamics`]: the node model contract, built-in models, the average field;
//! - [`simulate`]: fixed-step integration, ultimate-bound and average-dynamics checks;
//! - [`certify`]: critical coupling gains `c*`, `c_d*` and gain certificates;
//! - [`cli`]: JSON experiment configs and the batch commands behind the `netsync` binary.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod measures;
pub mod simulate;

pub use error::{Error, Result};
