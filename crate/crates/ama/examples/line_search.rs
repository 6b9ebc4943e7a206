//! Backtracking line search vs the fixed 1/L step.
//!
//! The fixed policy uses η = 1/L_γ derived from the global curvature bound
//! ‖A‖²/(γμ_p). Backtracking starts each basic iteration from half the
//! previous local estimate and doubles until the quadratic surrogate holds,
//! which accepts much longer steps whenever the local curvature is milder
//! than the global bound; the certificates still apply with the curvature
//! constant doubled. (The accelerated scheme keeps its local estimate
//! monotone — its rate proof needs non-increasing steps — so backtracking
//! there only guards against curvature underestimates.) Every accepted step
//! records the surrogate check and the forward–backward recomputation in
//! `lemma_ok`.

use ama::bench::{generate, oracle_solve, run_variant, ExperimentConfig, InstanceRecipe};
use ama::certificates::{check_trace, CheckOptions};
use ama::solver::{Algorithm, MomentumMode, Smoothness, StepPolicy};

fn main() -> ama::Result<()> {
    let recipe = InstanceRecipe::standard(105, 4, 3, false);
    let spec = generate(&recipe).to_spec()?;
    let reference = oracle_solve(&spec)?;
    let eps = 3e-2;

    for step in [StepPolicy::Fixed, StepPolicy::LineSearch] {
        let config = ExperimentConfig {
            eps,
            max_iter: 20_000,
            variants: vec![],
            step,
            momentum: MomentumMode::Classic,
            series_points: 0,
        };
        let (out, inputs) =
            run_variant(&spec, &reference, Algorithm::Ama, Smoothness::Smoothed, &config)?;
        let trace = &out.trace;
        let mean_eta = trace.iter().map(|r| r.eta).sum::<f64>() / trace.len() as f64;
        let mean_trials =
            trace.iter().map(|r| f64::from(r.linesearch_evals)).sum::<f64>() / trace.len() as f64;
        let reached = trace
            .iter()
            .find(|r| (r.f_avg - reference.f_star).abs() <= eps && r.feas <= eps)
            .map_or_else(|| "-".into(), |r| (r.k + 1).to_string());
        let all_steps_checked = trace.iter().all(|r| r.lemma_ok);
        let report = check_trace(trace, &inputs, &out.mode, &CheckOptions::default())?;
        println!(
            "{:<28} mean eta = {mean_eta:.4e}, surrogate trials/iter = {mean_trials:.2}, \
             eps-solution after {reached} iterations, steps checked: {}, certificate {}",
            out.mode.summary(),
            all_steps_checked,
            if report.passed { "PASS" } else { "FAIL" }
        );
    }
    Ok(())
}
