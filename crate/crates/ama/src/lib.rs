//! Smoothed and accelerated alternating minimization for linearly
//! constrained convex programs, with per-iteration certificates.
//!
//! The problem template is
//!
//! ```text
//! minimize   g(u) + h(v)
//! subject to A u + B v = c,   u ∈ U,   v ∈ V,
//! ```
//!
//! where `g(u) = ½‖Du − q‖²` is a diagonal quadratic, `h` is either a box
//! indicator or a second diagonal quadratic over a box, and `BᵀB` is
//! diagonal. The solver runs dual ascent on the (smoothed) dual function:
//! each iteration minimizes over `u` holding the multiplier fixed, then
//! takes a forward-backward step in `v` and updates the multiplier — the
//! basic scheme uses plain ascent steps, the accelerated one adds
//! FISTA-style momentum.
//!
//! What sets the crate apart is that every run is *certified*: the trace of
//! weighted primal averages is replayed against closed-form worst-case
//! bounds (objective error and feasibility gap as explicit functions of the
//! iteration counter), and an exact active-set oracle supplies the true
//! optimum for desk-scale instances so the bounds are checked against
//! ground truth rather than against another iterative method.
//!
//! One caveat worth knowing up front: the accelerated extrapolation has two
//! renderings (see [`solver::MomentumMode`]). The certificates cover the
//! `classic` difference λ^{k+1} − λ^k; the default `hat` form converges in
//! practice but can exceed the certified feasibility bound, and the test
//! suite pins this down on seeded instances. Pick `classic` whenever the
//! trace must certify.
//!
//! # Quick start
//!
//! ```
//! use ama::model::reformulate_qp;
//! use ama::solver::{run, Algorithm, MomentumMode, Smoothness, SolverConfig};
//! use nalgebra::{DMatrix, DVector};
//!
//! // minimize ½(u − 1)² subject to u = v, v ∈ [0, ½]:
//! // the optimum is u* = v* = ½, f* = ⅛.
//! let spec = reformulate_qp(
//!     &DVector::from_element(1, 1.0),      // diagonal of D
//!     &DVector::from_element(1, 1.0),      // q
//!     &DMatrix::from_row_slice(1, 1, &[1.0]),
//!     &DVector::from_element(1, 0.0),      // lower bounds on v = Au
//!     &DVector::from_element(1, 0.5),      // upper bounds
//!     f64::INFINITY,                       // u itself free
//! )
//! .unwrap();
//!
//! let mut config = SolverConfig::new(Algorithm::AmaAccel, Smoothness::StronglyConvex);
//! config.max_iter = 400;
//! config.momentum = MomentumMode::Classic;
//! let out = run(&spec, &config).unwrap();
//!
//! let last = out.trace.last().unwrap();
//! assert!((last.f_avg - 0.125).abs() < 1e-3);
//! assert!(last.feas < 1e-3);
//! ```
//!
//! # Modules
//!
//! * [`model`] — problem data, box sets, reformulation of bound-constrained
//!   least squares into the template, spectral norm, prox-diameters.
//! * [`operators`] — the u/v subproblem solvers, sharp (tie-broken) argmin
//!   selections, dual values, and the quadratic surrogate used by both the
//!   step acceptance test and the forward-backward identity check.
//! * [`solver`] — the two iteration schemes, backtracking line search,
//!   weighted averaging, and the run driver.
//! * [`certificates`] — closed-form bounds, iteration-count prediction, and
//!   the trace checker.
//! * [`bench`] — seeded instance generation, the exact active-set oracle,
//!   and the end-to-end certification experiment.
//! * [`io`] — problem/trace/reference file formats and run manifests.
//! * [`cli`] — the `ama` binary (`solve`, `bench`, `verify`).

pub mod bench;
pub mod certificates;
pub mod cli;
pub mod error;
pub mod io;
pub mod model;
pub mod operators;
pub mod solver;

pub use certificates::{
    check_trace, predict_iterations, BoundKind, BoundPair, CertReport, CertificateInputs,
    CheckOptions,
};
pub use error::{Error, Result};
pub use model::{reformulate_qp, BoxSet, PrimalPoint, ProblemSpec, QuadraticObjective, SmoothingSetup};
pub use solver::{
    run, Algorithm, GammaPolicy, IterationRecord, MomentumMode, RunMode, Smoothness, SolveOutput,
    SolverConfig, StepPolicy,
};
