//! Fixed-energy solutions of stationary Lagrangian systems that connect a
//! point to a flow line of the symmetry field, found as critical points of
//! arrival-time functionals on paths of constant Noether charge.
//!
//! Everything works in adapted coordinates `(y, t)` on `S x R`, where the
//! symmetry field is `K = d/dt` and the Lagrangian reads
//! `L = L0(y, nu) + (omega_y(nu) + d(y)) tau - tau^2 / 2`.
//!
//! The pieces, bottom-up:
//! - [`model`], [`registry`]: evaluator bundles and named builtin models;
//! - [`lagrangian`]: pointwise `L`, `E`, charges, cone test, assumption sampling;
//! - [`path`]: discretized paths, quadrature, the constant-charge projection;
//! - [`variational`]: arrival times, their gradients, the criticality residual;
//! - [`solver`]: projected `H^1` descent, multi-start and certification;
//! - [`scenario`]: scenario files and the `validate` / `solve` / `sweep` commands.

pub mod error;
pub mod lagrangian;
pub mod model;
pub mod path;
pub mod poly;
pub mod registry;
pub mod scenario;
pub mod solver;
pub mod variational;

pub use error::{FermatError, Result};
pub use lagrangian::{Region, ValidationReport};
pub use model::{Point, PolynomialModel, StationaryModel, TangentVector, Topology};
pub use path::{DiscretePath, NoetherProfile, TangentField};
pub use solver::{SeedSpec, SolutionRecord, SolverOptions};
pub use variational::{ArrivalEvaluation, Branch};
