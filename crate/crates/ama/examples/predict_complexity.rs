//! Predicted iteration counts and how they scale with the target accuracy.
//!
//! `predict_iterations` binary-searches the certified bound formulas for the
//! first k whose objective and feasibility bounds both reach ε. Halving ε
//! multiplies the count by ≈4 for the basic smoothed policy (γ re-derived
//! from ε), ≈2 for the accelerated smoothed policy, and ≈√2 for the strongly
//! convex accelerated family — the advertised complexity rates, readable off
//! the table below without running the solver at all.

use ama::bench::{generate, oracle_solve, run_variant, ExperimentConfig, InstanceRecipe};
use ama::certificates::{predict_iterations, BoundKind};
use ama::solver::{resolve_gamma, Algorithm, GammaPolicy, MomentumMode, Smoothness, StepPolicy};

fn main() -> ama::Result<()> {
    let config = ExperimentConfig {
        eps: 1e-2,
        max_iter: 1,
        variants: vec![],
        step: StepPolicy::Fixed,
        momentum: MomentumMode::Classic,
        series_points: 0,
    };

    // Smoothed instance: the two γ-bearing policies.
    let recipe = InstanceRecipe::standard(110, 3, 3, false);
    let spec = generate(&recipe).to_spec()?;
    let reference = oracle_solve(&spec)?;
    let (_, inputs) =
        run_variant(&spec, &reference, Algorithm::Ama, Smoothness::Smoothed, &config)?;

    println!("smoothed instance (seed 110):");
    println!("      eps        basic  x      accelerated  x");
    let mut prev: Option<(u64, u64)> = None;
    for i in 0..5 {
        let eps = 1e-2 / f64::powi(2.0, i);
        let basic = predict_iterations(
            BoundKind::Basic,
            eps,
            &inputs
                .clone()
                .with_gamma(resolve_gamma(&GammaPolicy::AutoBasic, eps, inputs.d_u)?),
            false,
        )?;
        let accel = predict_iterations(
            BoundKind::Accelerated,
            eps,
            &inputs
                .clone()
                .with_gamma(resolve_gamma(&GammaPolicy::AutoAccel, eps, inputs.d_u)?),
            false,
        )?;
        let (bx, ax) = prev.map_or((String::new(), String::new()), |(b, a)| {
            (
                format!("{:.2}", basic as f64 / b as f64),
                format!("{:.2}", accel as f64 / a as f64),
            )
        });
        println!("{eps:>9.1e} {basic:>12} {bx:>5} {accel:>14} {ax:>5}");
        prev = Some((basic, accel));
    }

    // Strongly convex instance: the √2-per-halving family.
    let recipe = InstanceRecipe::standard(204, 3, 3, true);
    let spec = generate(&recipe).to_spec()?;
    let reference = oracle_solve(&spec)?;
    let (_, inputs) =
        run_variant(&spec, &reference, Algorithm::AmaAccel, Smoothness::StronglyConvex, &config)?;

    println!("\nstrongly convex instance (seed 204):");
    println!("      eps   accelerated  x");
    let mut prev: Option<u64> = None;
    for i in 0..5 {
        let eps = 1e-3 / f64::powi(2.0, i);
        let count = predict_iterations(BoundKind::StrongAccel, eps, &inputs, false)?;
        let ratio = prev.map_or(String::new(), |p| format!("{:.3}", count as f64 / p as f64));
        println!("{eps:>9.1e} {count:>13} {ratio:>6}");
        prev = Some(count);
    }
    Ok(())
}
