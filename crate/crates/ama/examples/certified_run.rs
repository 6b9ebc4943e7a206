//! Certify a run against its theoretical convergence bounds.
//!
//! A seeded instance is solved exactly by the active-set oracle (f*, λ*),
//! then the basic scheme runs for a fixed budget and every trace row is
//! replayed against the certified bounds: |f(x̄^k) − f*| must stay below the
//! objective bound and the feasibility gap below the feasibility bound, for
//! every k. The report also predicts how many iterations each policy needs
//! for an ε-solution.

use ama::bench::{generate, oracle_solve, run_variant, ExperimentConfig, InstanceRecipe};
use ama::certificates::{check_trace, BoundKind, CheckOptions};
use ama::solver::{Algorithm, MomentumMode, Smoothness, StepPolicy};

fn main() -> ama::Result<()> {
    let recipe = InstanceRecipe::standard(42, 3, 2, false);
    let spec = generate(&recipe).to_spec()?;
    let reference = oracle_solve(&spec)?;
    println!(
        "oracle: f* = {:.9}, |lambda*| = {:.6}, active set {:?}",
        reference.f_star,
        reference.lambda_star.norm(),
        reference.active_set
    );

    let config = ExperimentConfig {
        eps: 1e-2,
        max_iter: 2000,
        variants: vec![],
        step: StepPolicy::Fixed,
        momentum: MomentumMode::Classic,
        series_points: 0,
    };
    let (out, inputs) =
        run_variant(&spec, &reference, Algorithm::Ama, Smoothness::Smoothed, &config)?;

    let kind = BoundKind::for_mode(&out.mode);
    println!("\n   k      |f - f*|    obj bound         feas   feas bound");
    for &k in &[0usize, 9, 99, 999, 1999] {
        let row = &out.trace[k];
        let pair = kind.evaluate(k, &inputs, false)?;
        println!(
            "{k:>4} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            (row.f_avg - inputs.f_star).abs(),
            pair.obj_bound,
            row.feas,
            pair.feas_bound
        );
    }

    let report = check_trace(&out.trace, &inputs, &out.mode, &CheckOptions::default())?;
    println!(
        "\ncertificate: {} ({} rows checked)",
        if report.passed { "PASS" } else { "FAIL" },
        report.rows_checked
    );
    println!(
        "predicted iterations to eps = {}: basic {:?}, accelerated {:?}",
        report.eps, report.predicted.basic, report.predicted.accelerated
    );
    Ok(())
}
