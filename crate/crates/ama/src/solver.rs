//! The two dual schemes and their strongly convex variants.
//!
//! Both algorithms ascend the (smoothed) dual by alternating the u-oracle,
//! the penalized v-update, and a multiplier step, while recovering a primal
//! candidate by weighted averaging:
//!
//! ```text
//!   ũ^k     = argmin_u g(u) − ⟨Aᵀλ̂^k, u⟩ (+ γ·½‖u−u_c‖²)
//!   v̂^{k+1} = argmin_{v∈V} h(v) − ⟨Bᵀλ̂^k, v⟩ + (η_k/2)‖c − Aũ^k − Bv‖²
//!   λ^{k+1} = λ̂^k + η_k (c − Aũ^k − Bv̂^{k+1})
//!   ṽ^k     ∈ argmax_v ⟨Bᵀλ^{k+1}, v⟩ − h(v)      (selected with hint v̂^{k+1})
//!   x̄^k     = (1 − τ_k)·x̄^{k−1} + τ_k·x̃^k,   τ_k = w_k / S_k
//! ```
//!
//! The basic scheme keeps λ̂^k = λ^k and weights w_k = η_k; the accelerated
//! scheme extrapolates λ̂ with the usual momentum scalar t_k and weights
//! w_k = η_k·t_k. When g is strongly convex the u-oracle is the exact sharp
//! operator and no smoothing is added.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{prox_diameter, spectral_norm, PrimalPoint, ProblemSpec, SmoothingSetup};
use crate::operators::{
    d1_gamma_value, d1_value, d2_value, sharp_u, sharp_v, smoothed_u_argmin, surrogate_from,
    v_subproblem,
};

/// Which dual scheme to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Basic scheme: oracles at λ^k, weights w_k = η_k.
    #[serde(rename = "ama")]
    Ama,
    /// Accelerated scheme: oracles at the extrapolated λ̂^k, w_k = η_k·t_k.
    #[serde(rename = "fama")]
    AmaAccel,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Ama => "ama",
            Algorithm::AmaAccel => "fama",
        })
    }
}

/// Whether the u-oracle is the smoothed argmin or the exact sharp operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Smoothed,
    StronglyConvex,
}

impl std::fmt::Display for Smoothness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Smoothness::Smoothed => "smoothed",
            Smoothness::StronglyConvex => "strongly_convex",
        })
    }
}

/// How the smoothing parameter γ is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaPolicy {
    /// γ = ε/(2·D_U), the choice matching the basic scheme's bound.
    AutoBasic,
    /// γ = ε/D_U, the choice matching the accelerated scheme's bound.
    AutoAccel,
    /// Caller-supplied γ.
    Explicit(f64),
}

/// Step-size rule for η_k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPolicy {
    /// η_k = 1/L_γ every iteration.
    Fixed,
    /// Backtracking on L with doubling, starting from max(lower_L, L_prev/2).
    LineSearch,
}

/// Two renderings of the accelerated extrapolation step. `Hat` measures the
/// momentum difference from the previous extrapolated point λ̂^k, as in the
/// scheme's original description; `Classic` measures it from the previous
/// proximal iterate λ^k (the standard FISTA choice). Their iterates differ,
/// and only `Classic` is covered by the accelerated certificates: the
/// estimate-sequence telescoping behind the (k+1)(k+2) rate holds for the
/// λ^{k+1} − λ^k difference, and `Hat` runs measurably exceed the
/// accelerated feasibility bound on some instances (see the certificate
/// tests). `Hat` stays the default for fidelity to the original scheme;
/// pick `Classic` when the trace must certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumMode {
    Hat,
    Classic,
}

impl std::fmt::Display for MomentumMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MomentumMode::Hat => "hat",
            MomentumMode::Classic => "classic",
        })
    }
}

/// Full configuration of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub smoothness: Smoothness,
    /// Target accuracy ε for the auto-γ policies and the optional stop test.
    pub epsilon: f64,
    pub gamma: GammaPolicy,
    pub step: StepPolicy,
    /// Line-search floor ⎯L; defaults to L_ref/8 when absent.
    pub lower_l: Option<f64>,
    pub max_iter: usize,
    pub momentum: MomentumMode,
    /// Exchange the roles of the two sides before solving when V has the
    /// smaller prox-diameter (requires AᵀA diagonal and bounded U).
    pub swap_sides: bool,
    /// Known optimal value enabling the ε-solution stopping test; without it
    /// the run uses its full budget.
    pub f_star: Option<f64>,
    /// Keep every `record_stride`-th iteration record (the first and last
    /// rows are always kept). Values below 1 behave as 1. Certification
    /// handles sparse traces, so long runs can avoid storing millions of
    /// rows.
    #[serde(default = "default_record_stride")]
    pub record_stride: usize,
    /// Initial multiplier λ⁰ (zeros when absent).
    #[serde(skip)]
    pub lambda0: Option<DVector<f64>>,
    /// Prox center u_c (zeros when absent).
    #[serde(skip)]
    pub center: Option<DVector<f64>>,
}

impl SolverConfig {
    /// A configuration with the defaults used throughout: ε = 10⁻², the
    /// auto-γ policy matching the algorithm, fixed steps, budget 1000.
    pub fn new(algorithm: Algorithm, smoothness: Smoothness) -> Self {
        SolverConfig {
            algorithm,
            smoothness,
            epsilon: 1e-2,
            gamma: match algorithm {
                Algorithm::Ama => GammaPolicy::AutoBasic,
                Algorithm::AmaAccel => GammaPolicy::AutoAccel,
            },
            step: StepPolicy::Fixed,
            lower_l: None,
            max_iter: 1000,
            momentum: MomentumMode::Hat,
            swap_sides: false,
            f_star: None,
            record_stride: 1,
            lambda0: None,
            center: None,
        }
    }
}

fn default_record_stride() -> usize {
    1
}

/// Mutable per-run state. All fields are public so that tests and callers
/// can inspect the iteration; treat them as read-only outside the step
/// functions.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Completed iterations.
    pub k: usize,
    /// λ^k, the proximal dual iterate.
    pub lambda: DVector<f64>,
    /// λ̂^k, the extrapolated point (equals `lambda` in the basic scheme).
    pub lambda_hat: DVector<f64>,
    /// λ^{k−1}; anchor of the `Classic` momentum difference.
    pub lambda_prev: DVector<f64>,
    /// Momentum scalar t_k (accelerated scheme only; stays 1 otherwise).
    pub t: f64,
    /// Running weight sum S_k = Σ w_i.
    pub s_weight: f64,
    /// Averaged primal ū^k.
    pub u_bar: DVector<f64>,
    /// Averaged primal v̄^k.
    pub v_bar: DVector<f64>,
    /// η_{k−1}, the last accepted step.
    pub eta_prev: f64,
    /// 1/η_{k−1}: the last accepted curvature estimate, seed of the next
    /// line search.
    pub l_prev: f64,
    /// ‖A‖, frozen at construction.
    pub norm_a: f64,
}

impl SolverState {
    pub fn new(
        spec: &ProblemSpec,
        config: &SolverConfig,
        smoothing: Option<&SmoothingSetup>,
    ) -> Result<Self> {
        let n = spec.n();
        let lambda = match &config.lambda0 {
            Some(l0) => {
                if l0.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "λ⁰ has length {}, constraint block has {}",
                        l0.len(),
                        n
                    )));
                }
                l0.clone()
            }
            None => DVector::zeros(n),
        };
        let norm_a = match smoothing {
            Some(sm) => sm.norm_a(),
            None => spectral_norm(spec.a_mat())?,
        };
        let l_ref = reference_lipschitz(spec, config, smoothing, norm_a)?;
        let l0 = match config.step {
            StepPolicy::Fixed => l_ref,
            StepPolicy::LineSearch => effective_lower_l(config, l_ref)?,
        };
        Ok(SolverState {
            k: 0,
            lambda: lambda.clone(),
            lambda_hat: lambda.clone(),
            lambda_prev: lambda,
            t: 1.0,
            s_weight: 0.0,
            u_bar: DVector::zeros(spec.p1()),
            v_bar: DVector::zeros(spec.p2()),
            eta_prev: 1.0 / l0,
            l_prev: l0,
            norm_a,
        })
    }
}

/// One row of the per-iteration trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    /// Accepted step η_k.
    pub eta: f64,
    /// f(x̄^k), the objective at the running average.
    pub f_avg: f64,
    /// ‖A·ū^k + B·v̄^k − c‖.
    pub feas: f64,
    /// Smoothed dual value d_γ(λ^{k+1}) (coincides with `d_plain` for the
    /// strongly convex variants).
    pub d_gamma: f64,
    /// Plain dual value d(λ^{k+1}).
    pub d_plain: f64,
    /// Step diagnostics: the accepted-step surrogate inequality and the
    /// independent forward–backward recomputation of λ^{k+1}, both within
    /// 1e−9.
    pub lemma_ok: bool,
    /// Surrogate-condition trials spent this iteration (1 for fixed steps).
    pub linesearch_evals: u32,
    /// Tie-flagged coordinates in the ṽ^k selection.
    pub tie_count: usize,
}

/// Descriptor of how a trace was produced; travels with every trace and
/// reference file so that certificates check the matching formulas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMode {
    pub algorithm: Algorithm,
    pub smoothness: Smoothness,
    pub line_search: bool,
    /// Present only for the accelerated scheme.
    pub momentum: Option<MomentumMode>,
    /// γ of the run; absent for the strongly convex variants.
    pub gamma: Option<f64>,
}

impl RunMode {
    /// Structural equality: everything except γ.
    pub fn matches(&self, other: &RunMode) -> bool {
        self.algorithm == other.algorithm
            && self.smoothness == other.smoothness
            && self.line_search == other.line_search
            && self.momentum == other.momentum
    }

    pub fn summary(&self) -> String {
        format!(
            "{}+{}{}{}",
            self.algorithm,
            self.smoothness,
            if self.line_search { "+linesearch" } else { "" },
            match self.momentum {
                Some(m) => format!("+{m}"),
                None => String::new(),
            }
        )
    }
}

/// Everything a finished run hands back.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub mode: RunMode,
    pub trace: Vec<IterationRecord>,
    /// Averaged primal point, in the caller's original variable order even if
    /// the run swapped sides; `None` when the budget was zero.
    pub x_bar: Option<PrimalPoint>,
    /// Final multiplier λ.
    pub lambda: DVector<f64>,
    /// The smoothing actually used (None for strongly convex runs). Refers
    /// to the solved — possibly swapped — spec.
    pub smoothing: Option<SmoothingSetup>,
    /// Whether the sides were exchanged before solving.
    pub swapped: bool,
}

/// γ for the auto policies, nudged down a few ulps if needed so the floor
/// γ·D_U stays at or below its advertised value despite rounding.
pub fn resolve_gamma(policy: &GammaPolicy, eps: f64, d_u: f64) -> Result<f64> {
    match *policy {
        GammaPolicy::Explicit(g) => {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::BadConfig(format!("explicit γ must be positive, got {g}")));
            }
            Ok(g)
        }
        GammaPolicy::AutoBasic => auto_gamma(eps, d_u, 2.0),
        GammaPolicy::AutoAccel => auto_gamma(eps, d_u, 1.0),
    }
}

fn auto_gamma(eps: f64, d_u: f64, divisor: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::BadConfig(format!("ε must be positive, got {eps}")));
    }
    if !d_u.is_finite() {
        return Err(Error::BadConfig(
            "auto γ needs a finite prox-diameter (bounded U)".into(),
        ));
    }
    if d_u == 0.0 {
        // Singleton box: smoothing is vacuous, any positive γ works.
        return Ok(eps);
    }
    let target = eps / divisor;
    let mut g = target / d_u;
    while g * d_u > target {
        g = f64::from_bits(g.to_bits() - 1);
    }
    Ok(g)
}

fn effective_lower_l(config: &SolverConfig, l_ref: f64) -> Result<f64> {
    let lower = config.lower_l.unwrap_or(l_ref / 8.0);
    if !(lower > 0.0) {
        return Err(Error::BadConfig(format!("lower_L must be positive, got {lower}")));
    }
    if lower > l_ref {
        return Err(Error::BadConfig(format!(
            "lower_L = {lower} exceeds the reference curvature {l_ref}"
        )));
    }
    Ok(lower)
}

fn reference_lipschitz(
    spec: &ProblemSpec,
    config: &SolverConfig,
    smoothing: Option<&SmoothingSetup>,
    norm_a: f64,
) -> Result<f64> {
    match (config.smoothness, smoothing) {
        (Smoothness::Smoothed, Some(sm)) => Ok(sm.lipschitz_smoothed()),
        (Smoothness::Smoothed, None) => Err(Error::BadConfig(
            "smoothed variant needs a SmoothingSetup".into(),
        )),
        (Smoothness::StronglyConvex, Some(_)) => Err(Error::BadConfig(
            "strongly convex variant runs unsmoothed; drop the SmoothingSetup".into(),
        )),
        (Smoothness::StronglyConvex, None) => {
            let mu_g = spec.g().mu();
            if mu_g == 0.0 {
                return Err(Error::NotStronglyConvex);
            }
            Ok(norm_a * norm_a / mu_g)
        }
    }
}

/// u-side oracle, dispatching between the smoothed argmin and the exact
/// sharp operator.
struct UOracle<'a> {
    spec: &'a ProblemSpec,
    smoothing: Option<&'a SmoothingSetup>,
}

impl<'a> UOracle<'a> {
    fn argmin(&self, lambda: &DVector<f64>) -> Result<DVector<f64>> {
        match self.smoothing {
            Some(sm) => Ok(smoothed_u_argmin(self.spec, sm, lambda)),
            None => {
                let s = self.spec.a_mat().transpose() * lambda;
                Ok(sharp_u(self.spec, &s)?.point)
            }
        }
    }

    fn d1(&self, lambda: &DVector<f64>) -> Result<f64> {
        match self.smoothing {
            Some(sm) => Ok(d1_gamma_value(self.spec, sm, lambda)),
            None => d1_value(self.spec, lambda),
        }
    }
}

/// The t-recurrence of the accelerated scheme.
fn momentum_next(t: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
}

/// Independent evaluation of the dual update as a proximal-gradient step:
/// λ⁺ = prox of the concave d² at z = λ̂ + η(∇d¹_γ(λ̂) + c). For the
/// indicator class the prox is interval thresholding on the coefficients
/// along B's (orthogonal) columns — a genuinely different code path from the
/// v-subproblem route.
fn forward_backward_lambda(
    spec: &ProblemSpec,
    lam_hat: &DVector<f64>,
    grad_hat: &DVector<f64>,
    eta: f64,
) -> Result<DVector<f64>> {
    let z = lam_hat + eta * (grad_hat + spec.c());
    let s_z = spec.b_mat().transpose() * &z;
    let beta = spec.beta();
    let p2 = spec.p2();
    let mut coef = DVector::zeros(p2);
    match spec.h_quad() {
        None => {
            for i in 0..p2 {
                if beta[i] == 0.0 {
                    return Err(Error::SingularB(i));
                }
                let t = eta * beta[i];
                let hi = s_z[i] - t * spec.v_set().upper()[i];
                let lo = s_z[i] - t * spec.v_set().lower()[i];
                // Thresholded coefficient of d²'s prox: clamp s toward zero.
                let s_star = if hi >= 0.0 {
                    hi
                } else if lo <= 0.0 {
                    lo
                } else {
                    0.0
                };
                coef[i] = (s_star - s_z[i]) / beta[i];
            }
        }
        Some(hq) => {
            // Quadratic h: the scalar prox is available via its minimizer.
            for i in 0..p2 {
                if beta[i] == 0.0 {
                    return Err(Error::SingularB(i));
                }
                let d = hq.diag()[i];
                let v = spec
                    .v_set()
                    .clip(i, (d * hq.shift()[i] + s_z[i]) / (d * d + eta * beta[i]));
                coef[i] = -eta * v;
            }
        }
    }
    Ok(z + spec.b_mat() * coef)
}

/// Backtracking choice of η: start L at max(lower_L, L_prev/2), double until
/// the trial point satisfies `d¹_γ(λ⁺) ≥ Q_L(λ⁺; λ̂)`, return (η = 1/L, L,
/// trials). Guaranteed to stop once L reaches the true curvature, hence the
/// accepted L never exceeds twice of it (given lower_L below it).
pub fn line_search_eta(
    spec: &ProblemSpec,
    smoothing: &SmoothingSetup,
    lambda_hat: &DVector<f64>,
    prev_l: f64,
    lower_l: f64,
) -> Result<(f64, f64, u32)> {
    let oracle = UOracle {
        spec,
        smoothing: Some(smoothing),
    };
    let u_tilde = oracle.argmin(lambda_hat)?;
    let d1_hat = oracle.d1(lambda_hat)?;
    let grad_hat = -(spec.a_mat() * &u_tilde);
    line_search_core(&oracle, spec, lambda_hat, &u_tilde, d1_hat, &grad_hat, prev_l, lower_l)
}

#[allow(clippy::too_many_arguments)]
fn line_search_core(
    oracle: &UOracle<'_>,
    spec: &ProblemSpec,
    lambda_hat: &DVector<f64>,
    u_tilde: &DVector<f64>,
    d1_hat: f64,
    grad_hat: &DVector<f64>,
    prev_l: f64,
    lower_l: f64,
) -> Result<(f64, f64, u32)> {
    debug_assert!(lower_l > 0.0);
    let mut l = lower_l.max(prev_l / 2.0);
    // Absolute slack well under the 1e−9 diagnostic tolerance; absorbs the
    // rounding of two nearly equal dual values near stationarity.
    let slack = 1e-12 * (1.0 + d1_hat.abs());
    for evals in 1..=60u32 {
        let eta = 1.0 / l;
        if eta < 1e-18 {
            return Err(Error::StepTooSmall);
        }
        let v_hat = v_subproblem(spec, lambda_hat, u_tilde, eta)?;
        let resid = spec.c() - spec.a_mat() * u_tilde - spec.b_mat() * &v_hat;
        let cand = lambda_hat + eta * resid;
        let lhs = oracle.d1(&cand)?;
        let rhs = surrogate_from(d1_hat, grad_hat, &cand, lambda_hat, l);
        if lhs >= rhs - slack {
            return Ok((eta, l, evals));
        }
        l *= 2.0;
    }
    Err(Error::StepTooSmall)
}

/// One iteration of the basic scheme (oracles at λ^k, w_k = η_k).
pub fn step_ama(
    state: &mut SolverState,
    spec: &ProblemSpec,
    smoothing: Option<&SmoothingSetup>,
    config: &SolverConfig,
) -> Result<IterationRecord> {
    step_core(state, spec, smoothing, config, false)
}

/// One iteration of the accelerated scheme (oracles at λ̂^k, w_k = η_k·t_k,
/// momentum extrapolation afterwards).
pub fn step_ama_accel(
    state: &mut SolverState,
    spec: &ProblemSpec,
    smoothing: Option<&SmoothingSetup>,
    config: &SolverConfig,
) -> Result<IterationRecord> {
    step_core(state, spec, smoothing, config, true)
}

fn step_core(
    state: &mut SolverState,
    spec: &ProblemSpec,
    smoothing: Option<&SmoothingSetup>,
    config: &SolverConfig,
    accelerated: bool,
) -> Result<IterationRecord> {
    let l_ref = reference_lipschitz(spec, config, smoothing, state.norm_a)?;
    let oracle = UOracle { spec, smoothing };

    let lam_hat = if accelerated {
        state.lambda_hat.clone()
    } else {
        state.lambda.clone()
    };
    let u_tilde = oracle.argmin(&lam_hat)?;
    let d1_hat = oracle.d1(&lam_hat)?;
    let grad_hat = -(spec.a_mat() * &u_tilde);

    let (eta, l_acc, evals) = match config.step {
        StepPolicy::Fixed => (1.0 / l_ref, l_ref, 1),
        StepPolicy::LineSearch => {
            let mut lower = effective_lower_l(config, l_ref)?;
            if accelerated {
                // The accelerated analysis needs η_k ≤ η_{k−1}; forbid L
                // from dropping below the previously accepted value.
                lower = lower.max(state.l_prev);
            }
            line_search_core(
                &oracle, spec, &lam_hat, &u_tilde, d1_hat, &grad_hat, state.l_prev, lower,
            )?
        }
    };

    let v_hat = v_subproblem(spec, &lam_hat, &u_tilde, eta)?;
    let resid = spec.c() - spec.a_mat() * &u_tilde - spec.b_mat() * &v_hat;
    let lambda_next = &lam_hat + eta * &resid;

    // Diagnostics on the accepted step: the surrogate inequality at the
    // accepted curvature, and the forward–backward recomputation of the
    // same multiplier update.
    let d1_next = oracle.d1(&lambda_next)?;
    let surrogate = surrogate_from(d1_hat, &grad_hat, &lambda_next, &lam_hat, l_acc);
    let surr_ok = d1_next >= surrogate - 1e-9;
    let fb = forward_backward_lambda(spec, &lam_hat, &grad_hat, eta)?;
    let fb_ok = (&fb - &lambda_next).norm() <= 1e-9;

    let bt_next = spec.b_mat().transpose() * &lambda_next;
    let v_tilde = sharp_v(spec, &bt_next, Some(&v_hat))?;
    let tie_count = v_tilde.tie_count();

    let w = if accelerated { eta * state.t } else { eta };
    state.s_weight += w;
    let tau = w / state.s_weight; // τ₀ = 1: S starts at zero
    state.u_bar = (1.0 - tau) * &state.u_bar + tau * &u_tilde;
    state.v_bar = (1.0 - tau) * &state.v_bar + tau * &v_tilde.point;

    let x_bar = PrimalPoint::new(state.u_bar.clone(), state.v_bar.clone());
    let f_avg = spec.objective(&x_bar);
    let feas = spec.feasibility_gap(&x_bar);

    let d2 = d2_value(spec, &lambda_next)?;
    let linear = spec.c().dot(&lambda_next);
    let d_gamma = d1_next + d2 + linear;
    let d_plain = match smoothing {
        Some(_) => d1_value(spec, &lambda_next)? + d2 + linear,
        None => d_gamma,
    };

    if accelerated {
        let t_next = momentum_next(state.t);
        let delta = match config.momentum {
            MomentumMode::Hat => &lambda_next - &lam_hat,
            MomentumMode::Classic => &lambda_next - &state.lambda,
        };
        state.lambda_hat = &lambda_next + ((state.t - 1.0) / t_next) * delta;
        state.t = t_next;
    } else {
        state.lambda_hat = lambda_next.clone();
    }
    state.lambda_prev = std::mem::replace(&mut state.lambda, lambda_next);
    state.eta_prev = eta;
    state.l_prev = l_acc;
    let k = state.k;
    state.k += 1;

    Ok(IterationRecord {
        k,
        eta,
        f_avg,
        feas,
        d_gamma,
        d_plain,
        lemma_ok: surr_ok && fb_ok,
        linesearch_evals: evals,
        tie_count,
    })
}

/// Runs the configured scheme on a validated spec and returns the trace, the
/// averaged primal point, and the final multiplier.
///
/// Stops early only when `config.f_star` is known and both ε-solution
/// conditions hold: |f(x̄) − f*| ≤ ε and ‖Aū + Bv̄ − c‖ ≤ ε. The objective
/// residual is not computable online otherwise, so without f* the run uses
/// its full budget and certification happens offline.
pub fn run(spec: &ProblemSpec, config: &SolverConfig) -> Result<SolveOutput> {
    let mut spec_run = spec.clone().validated()?;
    let mut swapped = false;
    if config.swap_sides {
        if config.center.is_some() {
            return Err(Error::BadConfig(
                "an explicit prox center cannot be combined with swap_sides".into(),
            ));
        }
        let d_u = if spec_run.u_bounded() {
            prox_diameter(spec_run.u_set(), &DVector::zeros(spec_run.p1()))?
        } else {
            f64::INFINITY
        };
        let d_v = prox_diameter(spec_run.v_set(), &DVector::zeros(spec_run.p2()))?;
        if d_v < d_u {
            spec_run = spec_run.swapped()?;
            swapped = true;
        }
    }
    if config.smoothness == Smoothness::StronglyConvex && !spec_run.strongly_convex_eligible() {
        return Err(Error::NotStronglyConvex);
    }

    let smoothing = match config.smoothness {
        Smoothness::Smoothed => {
            let center = match &config.center {
                Some(c) => c.clone(),
                None => DVector::zeros(spec_run.p1()),
            };
            let d_u = prox_diameter(spec_run.u_set(), &center)?;
            let gamma = resolve_gamma(&config.gamma, config.epsilon, d_u)?;
            Some(SmoothingSetup::new(&spec_run, center, gamma)?)
        }
        Smoothness::StronglyConvex => None,
    };

    let mut state = SolverState::new(&spec_run, config, smoothing.as_ref())?;
    let stride = config.record_stride.max(1);
    let mut trace: Vec<IterationRecord> = Vec::new();
    for i in 0..config.max_iter {
        let rec = match config.algorithm {
            Algorithm::Ama => step_ama(&mut state, &spec_run, smoothing.as_ref(), config)?,
            Algorithm::AmaAccel => step_ama_accel(&mut state, &spec_run, smoothing.as_ref(), config)?,
        };
        let stop = config
            .f_star
            .map_or(false, |fs| (rec.f_avg - fs).abs() <= config.epsilon && rec.feas <= config.epsilon);
        if stop || i % stride == 0 || i + 1 == config.max_iter {
            trace.push(rec);
        }
        if stop {
            break;
        }
    }

    let x_bar = if trace.is_empty() {
        None
    } else if swapped {
        Some(PrimalPoint::new(state.v_bar.clone(), state.u_bar.clone()))
    } else {
        Some(PrimalPoint::new(state.u_bar.clone(), state.v_bar.clone()))
    };
    Ok(SolveOutput {
        mode: RunMode {
            algorithm: config.algorithm,
            smoothness: config.smoothness,
            line_search: config.step == StepPolicy::LineSearch,
            momentum: match config.algorithm {
                Algorithm::AmaAccel => Some(config.momentum),
                Algorithm::Ama => None,
            },
            gamma: smoothing.as_ref().map(|sm| sm.gamma()),
        },
        trace,
        x_bar,
        lambda: state.lambda.clone(),
        smoothing,
        swapped,
    })
}
