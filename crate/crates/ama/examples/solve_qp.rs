//! Solve a small box-constrained least-squares program.
//!
//! The problem is min ½‖Du − q‖² over u ∈ [−r, r]^p subject to a ≤ Au ≤ b.
//! `reformulate_qp` rewrites the two-sided constraint with a slack block v
//! (Au − v = 0, v ∈ [a, b]) so the solver's alternating scheme applies, and
//! the run reports the averaged primal point together with its objective and
//! feasibility gap.

use ama::model::reformulate_qp;
use ama::solver::{run, Algorithm, MomentumMode, Smoothness, SolverConfig};
use nalgebra::{DMatrix, DVector};

fn main() -> ama::Result<()> {
    let d = DVector::from_row_slice(&[1.0, 0.8, 1.2]);
    let q = DVector::from_row_slice(&[0.4, -0.3, 0.9]);
    let a_mat = DMatrix::from_row_slice(2, 3, &[1.0, 0.5, -0.25, 0.0, 1.0, 0.75]);
    // The unconstrained minimizer D⁻¹q maps to Au ≈ (0.025, 0.188), so both
    // upper bounds below bind and the solution sits on the constraint.
    let lower = DVector::from_row_slice(&[-0.6, -0.4]);
    let upper = DVector::from_row_slice(&[-0.1, 0.1]);
    let spec = reformulate_qp(&d, &q, &a_mat, &lower, &upper, 2.0)?;

    let mut config = SolverConfig::new(Algorithm::AmaAccel, Smoothness::Smoothed);
    config.epsilon = 1e-3;
    config.max_iter = 5000;
    config.momentum = MomentumMode::Classic;
    let out = run(&spec, &config)?;

    let last = out.trace.last().expect("nonzero budget");
    let x = out.x_bar.as_ref().expect("averaged point");
    println!("variant: {}", out.mode.summary());
    println!("iterations: {}", last.k + 1);
    println!("f(x_bar) = {:.6}", last.f_avg);
    println!("feasibility gap = {:.3e}", last.feas);
    println!("u = {:?}", x.u.as_slice());
    println!("Au (must sit inside [a, b]) = {:?}", (a_mat * &x.u).as_slice());
    Ok(())
}
