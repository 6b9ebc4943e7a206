//! Executable convergence guarantees.
//!
//! Each bound function evaluates, for a completed iteration count k, the
//! certified right-hand sides for the two ε-solution quantities
//!
//! ```text
//!   |f(x̄^k) − f*|      ≤ obj_bound(k)
//!   ‖Aū^k + Bv̄^k − c‖ ≤ feas_bound(k)
//! ```
//!
//! with constants built only from ‖A‖, the prox moduli, γ, λ⁰ and the dual
//! optimum λ*. `check_trace` replays a recorded run against the matching
//! formulas row by row; `predict_iterations` inverts the bounds by binary
//! search to obtain a certified iteration budget for a target ε.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::{Algorithm, IterationRecord, RunMode, Smoothness};

/// Constants feeding every bound formula. The two Lipschitz-type constants
/// are recomputed on demand from `norm_a` and the moduli so they can never
/// go stale.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateInputs {
    /// Exact optimal value from the reference oracle.
    pub f_star: f64,
    /// Exact multiplier of Au + Bv = c at the optimum.
    pub lambda_star: DVector<f64>,
    /// Initial multiplier of the run being certified.
    pub lambda0: DVector<f64>,
    /// Prox-diameter of U around the run's center (∞ when U is unbounded).
    pub d_u: f64,
    /// Strong-convexity modulus of the prox term (1 for ½‖·−u_c‖²).
    pub mu_p: f64,
    /// Spectral norm ‖A‖.
    pub norm_a: f64,
    /// Strong-convexity modulus of g; 0 when g is not strongly convex.
    pub mu_g: f64,
    /// Smoothing parameter of the run (ignored by the strongly convex
    /// bounds).
    pub gamma: f64,
}

impl CertificateInputs {
    /// Base dual curvature ‖A‖²/μ_p (the γ-free constant of the formulas).
    pub fn lipschitz_base(&self) -> f64 {
        self.norm_a * self.norm_a / self.mu_p
    }

    /// Curvature of the smoothed dual, ‖A‖²/(γ·μ_p).
    pub fn lipschitz_smoothed(&self) -> f64 {
        self.lipschitz_base() / self.gamma
    }

    /// Dual curvature under strong convexity of g, ‖A‖²/μ_g.
    pub fn lipschitz_strong(&self) -> Result<f64> {
        if self.mu_g <= 0.0 {
            return Err(Error::NotStronglyConvex);
        }
        Ok(self.norm_a * self.norm_a / self.mu_g)
    }

    /// Same inputs with a different smoothing parameter.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// (‖λ⁰‖, ‖λ*‖, ‖λ⁰ − λ*‖).
    fn norms(&self) -> (f64, f64, f64) {
        (
            self.lambda0.norm(),
            self.lambda_star.norm(),
            (&self.lambda0 - &self.lambda_star).norm(),
        )
    }

    fn require_smoothable(&self) -> Result<()> {
        if !self.d_u.is_finite() {
            return Err(Error::BadConfig(
                "smoothed-scheme bounds need a finite prox-diameter".into(),
            ));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::BadConfig(format!(
                "smoothed-scheme bounds need γ > 0, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// The two certified right-hand sides at a given k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    /// Right side for |f(x̄^k) − f*|.
    pub obj_bound: f64,
    /// Right side for ‖Aū^k + Bv̄^k − c‖.
    pub feas_bound: f64,
}

/// Guarantee for the basic smoothed scheme after k+1 iterations. With line
/// search the curvature constant doubles (the backtracking acceptance can
/// overshoot the true constant by at most a factor of two).
pub fn bound_ama(k: usize, inputs: &CertificateInputs, line_search: bool) -> Result<BoundPair> {
    inputs.require_smoothable()?;
    let l = inputs.lipschitz_base() * if line_search { 2.0 } else { 1.0 };
    let (n0, ns, dd) = inputs.norms();
    let kf = k as f64 + 1.0;
    let g = inputs.gamma;
    let tail = (l * inputs.d_u / kf).sqrt();
    let obj = f64::max(
        l * n0 * n0 / (g * kf) + g * inputs.d_u,
        2.0 * l * ns * dd / (g * kf) + ns * tail,
    );
    let feas = 2.0 * l * dd / (g * kf) + tail;
    Ok(BoundPair {
        obj_bound: obj,
        feas_bound: feas,
    })
}

/// Guarantee for the accelerated smoothed scheme after k+1 iterations.
pub fn bound_ama_accel(
    k: usize,
    inputs: &CertificateInputs,
    line_search: bool,
) -> Result<BoundPair> {
    inputs.require_smoothable()?;
    let l = inputs.lipschitz_base() * if line_search { 2.0 } else { 1.0 };
    let (n0, ns, dd) = inputs.norms();
    let kk = (k as f64 + 1.0) * (k as f64 + 2.0);
    let g = inputs.gamma;
    let tail = (4.0 * l * inputs.d_u / kk).sqrt();
    let obj = f64::max(
        2.0 * l * n0 * n0 / (g * kk) + g * inputs.d_u,
        8.0 * l * ns * dd / (g * kk) + ns * tail,
    );
    let feas = 8.0 * l * dd / (g * kk) + tail;
    Ok(BoundPair {
        obj_bound: obj,
        feas_bound: feas,
    })
}

/// Guarantee for the strongly convex variants (no smoothing, exact sharp
/// u-oracle) after k+1 iterations.
pub fn bound_strong(
    k: usize,
    inputs: &CertificateInputs,
    accelerated: bool,
    line_search: bool,
) -> Result<BoundPair> {
    let lam = inputs.lipschitz_strong()? * if line_search { 2.0 } else { 1.0 };
    let (n0, ns, dd) = inputs.norms();
    let kf = k as f64 + 1.0;
    let (obj, feas) = if accelerated {
        let kk = kf * (k as f64 + 2.0);
        (
            2.0 * lam / kk * f64::max(n0 * n0, 4.0 * ns * dd),
            8.0 * lam * dd / kk,
        )
    } else {
        (
            lam / kf * f64::max(n0 * n0, 2.0 * ns * dd),
            2.0 * lam * dd / kf,
        )
    };
    Ok(BoundPair {
        obj_bound: obj,
        feas_bound: feas,
    })
}

/// Which guarantee family to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Basic smoothed scheme.
    Basic,
    /// Accelerated smoothed scheme.
    Accelerated,
    /// Strongly convex, basic steps.
    StrongBasic,
    /// Strongly convex, accelerated steps.
    StrongAccel,
}

impl BoundKind {
    pub fn evaluate(
        &self,
        k: usize,
        inputs: &CertificateInputs,
        line_search: bool,
    ) -> Result<BoundPair> {
        match self {
            BoundKind::Basic => bound_ama(k, inputs, line_search),
            BoundKind::Accelerated => bound_ama_accel(k, inputs, line_search),
            BoundKind::StrongBasic => bound_strong(k, inputs, false, line_search),
            BoundKind::StrongAccel => bound_strong(k, inputs, true, line_search),
        }
    }

    /// The guarantee family matching a run descriptor.
    pub fn for_mode(mode: &RunMode) -> Self {
        match (mode.algorithm, mode.smoothness) {
            (Algorithm::Ama, Smoothness::Smoothed) => BoundKind::Basic,
            (Algorithm::AmaAccel, Smoothness::Smoothed) => BoundKind::Accelerated,
            (Algorithm::Ama, Smoothness::StronglyConvex) => BoundKind::StrongBasic,
            (Algorithm::AmaAccel, Smoothness::StronglyConvex) => BoundKind::StrongAccel,
        }
    }
}

const PREDICT_MAX_K: u64 = 1 << 62;

/// Least k whose certified pair satisfies max(obj, feas)(k) ≤ ε, by binary
/// search on the (non-increasing) bound formulas. `Unreachable` reports the
/// asymptotic floor when even k = 2⁶² does not certify ε — under an explicit
/// γ this happens exactly when the smoothing floor γ·D_U exceeds ε.
pub fn predict_iterations(
    kind: BoundKind,
    eps: f64,
    inputs: &CertificateInputs,
    line_search: bool,
) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(Error::BadConfig(format!("ε must be positive, got {eps}")));
    }
    let worst = |k: u64| -> Result<f64> {
        let pair = kind.evaluate(k as usize, inputs, line_search)?;
        Ok(f64::max(pair.obj_bound, pair.feas_bound))
    };
    if worst(PREDICT_MAX_K)? > eps {
        return Err(Error::Unreachable {
            floor: worst(PREDICT_MAX_K)?,
            eps,
        });
    }
    let (mut lo, mut hi) = (0u64, PREDICT_MAX_K);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if worst(mid)? <= eps {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Tolerances for trace certification. The domination checks allow a
/// multiplicative `rel_tol` plus an absolute `abs_tol` on every bound; `eps`
/// is the target accuracy used for the predicted iteration counts in the
/// report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub eps: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            eps: 1e-2,
            rel_tol: 1e-6,
            abs_tol: 1e-9,
        }
    }
}

/// Which certified inequality a trace row violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// |f(x̄^k) − f*| exceeded its bound.
    Objective,
    /// The constraint residual exceeded its bound.
    Feasibility,
    /// f(x̄^k) − f* dipped below −‖λ*‖·feas (the saddle-point lower bound).
    LowerBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: usize,
    pub kind: ViolationKind,
    /// The measured quantity.
    pub value: f64,
    /// The certified right-hand side it had to respect.
    pub bound: f64,
}

/// Predicted ε-solution iteration counts for the three guarantee families
/// that make sense for the certified inputs; `None` when a family does not
/// apply (unbounded U, μ_g = 0, or an unreachable explicit-γ floor).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedCounts {
    pub basic: Option<u64>,
    pub accelerated: Option<u64>,
    pub strong_accel: Option<u64>,
}

/// Outcome of certifying one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub rows_checked: usize,
    pub passed: bool,
    pub first_violation: Option<Violation>,
    pub violations: Vec<Violation>,
    pub predicted: PredictedCounts,
    /// Target accuracy the predictions refer to.
    pub eps: f64,
}

/// Replays `trace` against the guarantee matching `mode`. Every row is
/// checked independently:
///
/// * |f(x̄^k) − f*| ≤ obj_bound(k)·(1 + rel) + abs
/// * feas(k) ≤ feas_bound(k)·(1 + rel) + abs
/// * f(x̄^k) − f* ≥ −‖λ*‖·feas(k) − abs
///
/// An empty trace passes vacuously. Row order is irrelevant because each
/// row carries its own k.
pub fn check_trace(
    trace: &[IterationRecord],
    inputs: &CertificateInputs,
    mode: &RunMode,
    opts: &CheckOptions,
) -> Result<CertReport> {
    if mode.smoothness == Smoothness::Smoothed {
        if let Some(g) = mode.gamma {
            if g != inputs.gamma {
                return Err(Error::TraceVariantMismatch {
                    expected: format!("gamma={}", inputs.gamma),
                    found: format!("gamma={g}"),
                });
            }
        }
    } else if mode.gamma.is_some() {
        return Err(Error::TraceVariantMismatch {
            expected: "no gamma for a strongly convex run".into(),
            found: format!("gamma={}", mode.gamma.unwrap()),
        });
    }

    let kind = BoundKind::for_mode(mode);
    let ns = inputs.lambda_star.norm();
    let mut violations = Vec::new();
    for rec in trace {
        let pair = kind.evaluate(rec.k, inputs, mode.line_search)?;
        let obj_err = (rec.f_avg - inputs.f_star).abs();
        if obj_err > pair.obj_bound * (1.0 + opts.rel_tol) + opts.abs_tol {
            violations.push(Violation {
                k: rec.k,
                kind: ViolationKind::Objective,
                value: obj_err,
                bound: pair.obj_bound,
            });
        }
        if rec.feas > pair.feas_bound * (1.0 + opts.rel_tol) + opts.abs_tol {
            violations.push(Violation {
                k: rec.k,
                kind: ViolationKind::Feasibility,
                value: rec.feas,
                bound: pair.feas_bound,
            });
        }
        let lower = -ns * rec.feas - opts.abs_tol;
        if rec.f_avg - inputs.f_star < lower {
            violations.push(Violation {
                k: rec.k,
                kind: ViolationKind::LowerBound,
                value: rec.f_avg - inputs.f_star,
                bound: lower,
            });
        }
    }

    let smoothed_ok = inputs.d_u.is_finite() && inputs.gamma > 0.0;
    let predicted = PredictedCounts {
        basic: if smoothed_ok {
            predict_iterations(BoundKind::Basic, opts.eps, inputs, mode.line_search).ok()
        } else {
            None
        },
        accelerated: if smoothed_ok {
            predict_iterations(BoundKind::Accelerated, opts.eps, inputs, mode.line_search).ok()
        } else {
            None
        },
        strong_accel: if inputs.mu_g > 0.0 {
            predict_iterations(BoundKind::StrongAccel, opts.eps, inputs, mode.line_search).ok()
        } else {
            None
        },
    };

    Ok(CertReport {
        rows_checked: trace.len(),
        passed: violations.is_empty(),
        first_violation: violations.first().copied(),
        violations,
        predicted,
        eps: opts.eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reformulate_qp;
    use crate::solver::{run, MomentumMode, SolverConfig, StepPolicy};
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn vec1(x: f64) -> DVector<f64> {
        DVector::from_row_slice(&[x])
    }

    /// L = 1, D_U = 1, γ = 0.1, λ⁰ = 0, ‖λ*‖ = 1.
    fn unit_inputs() -> CertificateInputs {
        CertificateInputs {
            f_star: 0.0,
            lambda_star: vec1(1.0),
            lambda0: vec1(0.0),
            d_u: 1.0,
            mu_p: 1.0,
            norm_a: 1.0,
            mu_g: 1.0,
            gamma: 0.1,
        }
    }

    #[test]
    fn basic_bound_unit_example() {
        // 2·1/(0.1·10) + √(1/10) = 2 + 0.31622776…
        let pair = bound_ama(9, &unit_inputs(), false).unwrap();
        assert_relative_eq!(pair.feas_bound, 2.3162277660168379, epsilon = 1e-12);
        // The objective side takes the λ*-branch of the max here.
        assert_relative_eq!(pair.obj_bound, pair.feas_bound, epsilon = 1e-12);
    }

    #[test]
    fn accelerated_bound_unit_example() {
        // 8/(0.1·110) + √(4/110) = 0.72727273 + 0.19069252.
        let pair = bound_ama_accel(9, &unit_inputs(), false).unwrap();
        assert!((pair.feas_bound - 0.91796525).abs() < 5e-8);
        assert_relative_eq!(pair.feas_bound, 0.9179652451218457, epsilon = 1e-12);
    }

    #[test]
    fn zero_multipliers_collapse_the_bounds() {
        let mut inputs = unit_inputs();
        inputs.lambda_star = vec1(0.0);
        for k in [0usize, 3, 9, 99] {
            let kf = k as f64 + 1.0;
            let pair = bound_ama(k, &inputs, false).unwrap();
            assert_relative_eq!(pair.feas_bound, (1.0 / kf).sqrt(), epsilon = 1e-12);
            assert_relative_eq!(pair.obj_bound, 0.1, epsilon = 1e-12);
        }
        // Accelerated at k = 0: √(2·L·D_U).
        let pair = bound_ama_accel(0, &inputs, false).unwrap();
        assert_relative_eq!(pair.feas_bound, 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn smoothing_floor_is_the_large_k_limit() {
        let inputs = unit_inputs();
        let pair = bound_ama(50_000_000, &inputs, false).unwrap();
        assert!((pair.obj_bound - 0.1).abs() < 1e-3);
    }

    #[test]
    fn strong_bound_unit_examples() {
        let inputs = unit_inputs();
        let basic = bound_strong(9, &inputs, false, false).unwrap();
        assert_relative_eq!(basic.feas_bound, 0.2, epsilon = 1e-12);
        let accel = bound_strong(9, &inputs, true, false).unwrap();
        assert_relative_eq!(accel.feas_bound, 8.0 / 110.0, epsilon = 1e-12);
        // Started at the dual optimum: every bound is zero.
        let mut at_opt = unit_inputs();
        at_opt.lambda0 = vec1(1.0);
        for k in [0usize, 5, 77] {
            let pair = bound_strong(k, &at_opt, false, false).unwrap();
            assert_eq!(pair.feas_bound, 0.0);
        }
        let mut no_mu = unit_inputs();
        no_mu.mu_g = 0.0;
        assert!(matches!(
            bound_strong(3, &no_mu, false, false),
            Err(Error::NotStronglyConvex)
        ));
    }

    #[test]
    fn line_search_doubles_the_curvature_constant() {
        let inputs = unit_inputs();
        let plain = bound_strong(9, &inputs, false, false).unwrap();
        let doubled = bound_strong(9, &inputs, false, true).unwrap();
        assert_relative_eq!(doubled.feas_bound, 2.0 * plain.feas_bound, epsilon = 1e-12);
        // Smoothed case: both the 1/k term and the √ tail scale.
        let p = bound_ama(9, &inputs, false).unwrap();
        let d = bound_ama(9, &inputs, true).unwrap();
        assert_relative_eq!(
            d.feas_bound,
            2.0 * 2.0 / (0.1 * 10.0) + (2.0f64 / 10.0).sqrt(),
            epsilon = 1e-12
        );
        assert!(d.feas_bound > p.feas_bound);
    }

    #[test]
    fn bounds_are_monotone_nonincreasing_in_k() {
        let inputs = unit_inputs();
        let mut prev = [f64::INFINITY; 8];
        for k in 0..=100_000usize {
            let pairs = [
                bound_ama(k, &inputs, false).unwrap(),
                bound_ama_accel(k, &inputs, false).unwrap(),
                bound_strong(k, &inputs, false, false).unwrap(),
                bound_strong(k, &inputs, true, false).unwrap(),
            ];
            let cur = [
                pairs[0].obj_bound,
                pairs[0].feas_bound,
                pairs[1].obj_bound,
                pairs[1].feas_bound,
                pairs[2].obj_bound,
                pairs[2].feas_bound,
                pairs[3].obj_bound,
                pairs[3].feas_bound,
            ];
            for (c, p) in cur.iter().zip(prev.iter()) {
                assert!(c <= p, "increase at k={k}");
            }
            prev = cur;
        }
    }

    #[test]
    fn accelerated_dominates_basic_for_large_k() {
        let inputs = unit_inputs();
        // Find the crossover; beyond it the accelerated bound stays below.
        let mut k0 = None;
        for k in 0..=100_000usize {
            let b = bound_ama(k, &inputs, false).unwrap().feas_bound;
            let a = bound_ama_accel(k, &inputs, false).unwrap().feas_bound;
            if a <= b {
                k0 = Some(k);
                break;
            }
        }
        let k0 = k0.expect("no crossover found");
        for k in k0..k0 + 2000 {
            let b = bound_ama(k, &inputs, false).unwrap().feas_bound;
            let a = bound_ama_accel(k, &inputs, false).unwrap().feas_bound;
            assert!(a <= b, "accelerated bound above basic at k={k}");
        }
    }

    #[test]
    fn predict_is_consistent_with_the_bounds() {
        let inputs = unit_inputs();
        for (kind, eps) in [
            (BoundKind::Basic, 1e-2),
            (BoundKind::Accelerated, 1e-2),
            (BoundKind::StrongBasic, 1e-3),
            (BoundKind::StrongAccel, 1e-3),
        ] {
            // Give the smoothed kinds a γ whose floor is reachable.
            let inp = match kind {
                BoundKind::Basic => inputs.clone().with_gamma(eps / 2.0),
                BoundKind::Accelerated => inputs.clone().with_gamma(eps / 2.0),
                _ => inputs.clone(),
            };
            let k = predict_iterations(kind, eps, &inp, false).unwrap();
            let at = kind.evaluate(k as usize, &inp, false).unwrap();
            assert!(f64::max(at.obj_bound, at.feas_bound) <= eps);
            if k > 0 {
                let before = kind.evaluate(k as usize - 1, &inp, false).unwrap();
                assert!(f64::max(before.obj_bound, before.feas_bound) > eps);
            }
        }
    }

    #[test]
    fn predict_scaling_matches_the_complexity_rates() {
        let base = CertificateInputs {
            f_star: 0.0,
            lambda_star: vec1(0.7),
            lambda0: vec1(0.0),
            d_u: 1.0,
            mu_p: 1.0,
            norm_a: 1.0,
            mu_g: 0.5,
            gamma: 1.0,
        };
        // Basic smoothed with the matching auto policy: k ~ 1/ε².
        let eps = 1e-2;
        let k1 = predict_iterations(
            BoundKind::Basic,
            eps,
            &base.clone().with_gamma(eps / 2.0),
            false,
        )
        .unwrap();
        let k2 = predict_iterations(
            BoundKind::Basic,
            eps / 2.0,
            &base.clone().with_gamma(eps / 4.0),
            false,
        )
        .unwrap();
        let ratio = k2 as f64 / k1 as f64;
        assert!((3.8..=4.2).contains(&ratio), "basic ratio {ratio}");
        // Accelerated with its auto policy: k ~ 1/ε.
        let k1 = predict_iterations(
            BoundKind::Accelerated,
            eps,
            &base.clone().with_gamma(eps),
            false,
        )
        .unwrap();
        let k2 = predict_iterations(
            BoundKind::Accelerated,
            eps / 2.0,
            &base.clone().with_gamma(eps / 2.0),
            false,
        )
        .unwrap();
        let ratio = k2 as f64 / k1 as f64;
        assert!((1.9..=2.1).contains(&ratio), "accelerated ratio {ratio}");
        // Strongly convex accelerated: k ~ 1/√ε.
        let eps = 1e-3;
        let k1 = predict_iterations(BoundKind::StrongAccel, eps, &base, false).unwrap();
        let k2 = predict_iterations(BoundKind::StrongAccel, eps / 2.0, &base, false).unwrap();
        let ratio = k2 as f64 / k1 as f64;
        assert!((1.35..=1.48).contains(&ratio), "strong ratio {ratio}");
    }

    #[test]
    fn predict_zero_iterations_when_starting_at_the_optimum() {
        let mut inputs = unit_inputs();
        inputs.lambda_star = vec1(0.0);
        inputs.lambda0 = vec1(0.0);
        assert_eq!(
            predict_iterations(BoundKind::StrongAccel, 1e-6, &inputs, false).unwrap(),
            0
        );
    }

    #[test]
    fn predict_reports_unreachable_floors() {
        let inputs = unit_inputs().with_gamma(0.5); // floor γ·D_U = 0.5 > ε
        let err = predict_iterations(BoundKind::Basic, 0.1, &inputs, false).unwrap_err();
        match &err {
            Error::Unreachable { floor, eps } => {
                assert!(*floor >= 0.5);
                assert_eq!(*eps, 0.1);
            }
            other => panic!("expected Unreachable, got {other:?}"),
        }
        assert_eq!(err.exit_code(), 2);
    }

    /// End-to-end: certify a real run of the scalar instance against its
    /// exact optimum f* = 0.125, λ* = −0.5.
    fn scalar_run(accelerated: bool) -> (Vec<IterationRecord>, CertificateInputs, RunMode) {
        scalar_run_with(accelerated, MomentumMode::Classic)
    }

    fn scalar_run_with(
        accelerated: bool,
        momentum: MomentumMode,
    ) -> (Vec<IterationRecord>, CertificateInputs, RunMode) {
        let spec = reformulate_qp(
            &vec1(1.0),
            &vec1(1.0),
            &DMatrix::from_row_slice(1, 1, &[1.0]),
            &vec1(0.0),
            &vec1(0.5),
            2.0,
        )
        .unwrap();
        let algorithm = if accelerated {
            Algorithm::AmaAccel
        } else {
            Algorithm::Ama
        };
        let mut config = SolverConfig::new(algorithm, Smoothness::Smoothed);
        config.max_iter = 500;
        config.epsilon = 5e-2;
        config.momentum = momentum;
        config.step = StepPolicy::Fixed;
        let out = run(&spec, &config).unwrap();
        let sm = out.smoothing.as_ref().unwrap();
        let inputs = CertificateInputs {
            f_star: 0.125,
            lambda_star: vec1(-0.5),
            lambda0: vec1(0.0),
            d_u: sm.d_u(),
            mu_p: sm.mu_p(),
            norm_a: sm.norm_a(),
            mu_g: 1.0,
            gamma: sm.gamma(),
        };
        (out.trace, inputs, out.mode)
    }

    #[test]
    fn check_trace_passes_on_real_runs() {
        for accelerated in [false, true] {
            let (trace, inputs, mode) = scalar_run(accelerated);
            // Predictions target the run's own ε (the γ floors sit below it).
            let opts = CheckOptions {
                eps: 5e-2,
                ..CheckOptions::default()
            };
            let report = check_trace(&trace, &inputs, &mode, &opts).unwrap();
            assert!(report.passed, "violations: {:?}", report.first_violation);
            assert_eq!(report.rows_checked, 500);
            assert!(report.predicted.basic.is_some());
            assert!(report.predicted.strong_accel.is_some());
        }
    }

    /// The accelerated rate is an estimate-sequence result, and its
    /// telescoping identity holds for the classic extrapolation difference
    /// λ^{k+1} − λ^k only. The hat difference λ^{k+1} − λ̂^k converges in
    /// practice but is *not* covered: on this instance its averaged
    /// feasibility gap overshoots the nominal bound over a whole band of
    /// iterations. The checker must report that overshoot instead of
    /// masking it.
    #[test]
    fn hat_momentum_runs_can_violate_the_accelerated_feasibility_bound() {
        let (trace_hat, inputs, mode_hat) = scalar_run_with(true, MomentumMode::Hat);
        let opts = CheckOptions {
            eps: 5e-2,
            ..CheckOptions::default()
        };
        let report = check_trace(&trace_hat, &inputs, &mode_hat, &opts).unwrap();
        assert!(!report.passed);
        let first = report.first_violation.as_ref().unwrap();
        assert_eq!(first.kind, ViolationKind::Feasibility);
        assert_eq!(first.k, 37);
        assert!(first.value > first.bound);
        // Same instance, same budget, classic difference: certified clean.
        let (trace_classic, _, mode_classic) = scalar_run_with(true, MomentumMode::Classic);
        let clean = check_trace(&trace_classic, &inputs, &mode_classic, &opts).unwrap();
        assert!(clean.passed);
    }

    #[test]
    fn check_trace_flags_an_injected_fault() {
        let (mut trace, inputs, mode) = scalar_run(false);
        let bound = bound_ama(3, &inputs, false).unwrap().obj_bound;
        trace[3].f_avg += 10.0 * bound;
        let report = check_trace(&trace, &inputs, &mode, &CheckOptions::default()).unwrap();
        assert!(!report.passed);
        let first = report.first_violation.unwrap();
        assert_eq!(first.k, 3);
        assert_eq!(first.kind, ViolationKind::Objective);
        // Order-insensitive: reversing the rows finds the same violation.
        trace.reverse();
        let report2 = check_trace(&trace, &inputs, &mode, &CheckOptions::default()).unwrap();
        assert_eq!(report2.violations.len(), report.violations.len());
        assert!(report2.violations.iter().any(|v| v.k == 3));
    }

    #[test]
    fn check_trace_flags_lower_bound_breaches() {
        let (mut trace, inputs, mode) = scalar_run(false);
        trace[7].f_avg = inputs.f_star - 1.0;
        let report = check_trace(&trace, &inputs, &mode, &CheckOptions::default()).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.k == 7 && v.kind == ViolationKind::LowerBound));
    }

    #[test]
    fn check_trace_empty_passes_vacuously() {
        let (_, inputs, mode) = scalar_run(false);
        let report = check_trace(&[], &inputs, &mode, &CheckOptions::default()).unwrap();
        assert!(report.passed);
        assert_eq!(report.rows_checked, 0);
        assert!(report.first_violation.is_none());
    }

    #[test]
    fn check_trace_rejects_gamma_mismatch() {
        let (trace, inputs, mut mode) = scalar_run(false);
        mode.gamma = Some(inputs.gamma * 2.0);
        let err = check_trace(&trace, &inputs, &mode, &CheckOptions::default()).unwrap_err();
        assert!(matches!(err, Error::TraceVariantMismatch { .. }));
        assert_eq!(err.exit_code(), 2);
    }
}
