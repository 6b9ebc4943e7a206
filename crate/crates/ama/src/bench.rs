//! Seeded instance generation and an exact desk-scale reference oracle.
//!
//! The generator produces the clipped least-squares family
//!
//! ```text
//!   min ½‖Du − q‖²   s.t.  Au − v = 0,  v ∈ [a, b],  u ∈ [−r, r]^p1
//! ```
//!
//! with a documented random stream so instances are bit-reproducible. The
//! oracle enumerates active sets of the box bounds and solves each candidate
//! KKT system exactly (up to LU rounding), yielding ground-truth f*, x*, λ*
//! for certification. `run_experiment` chains generation, the oracle, the
//! solver variants, and trace certification into one report.

use nalgebra::{DMatrix, DVector};
use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::certificates::{
    check_trace, predict_iterations, BoundKind, CertReport, CertificateInputs, CheckOptions,
};
use crate::error::{Error, Result};
use crate::model::{prox_diameter, reformulate_qp, spectral_norm, PrimalPoint, ProblemSpec};
use crate::solver::{
    run, Algorithm, IterationRecord, MomentumMode, RunMode, Smoothness, SolveOutput, SolverConfig,
    StepPolicy,
};

/// How the u-box radius r is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RPolicy {
    /// r = ∞ (u unconstrained); pairs with strongly convex g.
    Infinite,
    /// r = ‖x♮‖_∞, so the anchor sits on the boundary scale of U.
    FromAnchor,
}

/// Deterministic description of one generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRecipe {
    pub seed: u64,
    /// Row count of A (dimension of v and λ).
    pub n: usize,
    /// Column count of A (dimension of u).
    pub p1: usize,
    /// Shift all diagonal entries up by 0.1 (μ_g ≥ 0.01) instead of zeroing
    /// a random subset.
    pub strongly_convex: bool,
    pub r_policy: RPolicy,
}

impl InstanceRecipe {
    /// The conventional pairing: strongly convex runs free u, the smoothed
    /// class boxes u at the anchor's ∞-norm.
    pub fn standard(seed: u64, n: usize, p1: usize, strongly_convex: bool) -> Self {
        InstanceRecipe {
            seed,
            n,
            p1,
            strongly_convex,
            r_policy: if strongly_convex {
                RPolicy::Infinite
            } else {
                RPolicy::FromAnchor
            },
        }
    }
}

/// Raw parameters of a generated instance, before reformulation.
#[derive(Debug, Clone, PartialEq)]
pub struct QpParams {
    pub d: DVector<f64>,
    pub q: DVector<f64>,
    pub a_mat: DMatrix<f64>,
    pub a_lower: DVector<f64>,
    pub b_upper: DVector<f64>,
    pub r: f64,
    /// The Slater anchor x♮ used to build the bounds.
    pub anchor: DVector<f64>,
}

impl QpParams {
    pub fn to_spec(&self) -> Result<ProblemSpec> {
        reformulate_qp(
            &self.d,
            &self.q,
            &self.a_mat,
            &self.a_lower,
            &self.b_upper,
            self.r,
        )
    }
}

/// Seeded random stream with a frozen draw order. Normal variates come from
/// hand-rolled Box–Muller pairs over open-interval uniforms; each field
/// starts a fresh pair (no carry between fields), so the stream layout is
/// reproducible from this file alone.
struct SeedStream {
    rng: ChaCha8Rng,
}

impl SeedStream {
    fn new(seed: u64) -> Self {
        SeedStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn uniforms(&mut self, k: usize) -> DVector<f64> {
        DVector::from_fn(k, |_, _| self.rng.sample::<f64, _>(Open01))
    }

    fn normals(&mut self, k: usize) -> DVector<f64> {
        let mut out = Vec::with_capacity(k + 1);
        while out.len() < k {
            let u1: f64 = self.rng.sample(Open01);
            let u2: f64 = self.rng.sample(Open01);
            let radius = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            out.push(radius * theta.cos());
            if out.len() < k {
                out.push(radius * theta.sin());
            }
        }
        DVector::from_vec(out)
    }
}

/// Deterministic instance generation. Stream order: A (row-major), x♮, u₁,
/// u₂, the diagonal of D (plus the zero-mask draw in the non-strongly-convex
/// case), then q. Bounds are a = Ax♮ − u₁ and b = Ax♮ + u₂ with u₁, u₂ in
/// the open unit interval, so a < Ax♮ < b strictly and the anchor is a
/// Slater point.
pub fn generate(recipe: &InstanceRecipe) -> QpParams {
    assert!(recipe.n >= 1 && recipe.p1 >= 1, "degenerate recipe dimensions");
    let mut stream = SeedStream::new(recipe.seed);
    let (n, p1) = (recipe.n, recipe.p1);
    let a_mat = DMatrix::from_row_slice(n, p1, stream.normals(n * p1).as_slice());
    let anchor = stream.normals(p1);
    let u1 = stream.uniforms(n);
    let u2 = stream.uniforms(n);
    let mut d = stream.uniforms(p1);
    if recipe.strongly_convex {
        d.add_scalar_mut(0.1);
    } else {
        // Zero a random subset of the diagonal (at least one entry) so g has
        // a genuine nullspace.
        let mask = stream.uniforms(p1);
        let mut any = false;
        for i in 0..p1 {
            if mask[i] < 0.5 {
                d[i] = 0.0;
                any = true;
            }
        }
        if !any {
            d[mask.imin()] = 0.0;
        }
    }
    let q = stream.normals(p1);
    let ax = &a_mat * &anchor;
    let a_lower = &ax - u1;
    let b_upper = &ax + u2;
    for i in 0..n {
        assert!(
            a_lower[i] < ax[i] && ax[i] < b_upper[i],
            "anchor must be a strict Slater point"
        );
    }
    let r = match recipe.r_policy {
        RPolicy::Infinite => f64::INFINITY,
        RPolicy::FromAnchor => anchor.amax(),
    };
    QpParams {
        d,
        q,
        a_mat,
        a_lower,
        b_upper,
        r,
        anchor,
    }
}

/// Ground truth for one instance.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub f_star: f64,
    pub x_star: PrimalPoint,
    /// Multiplier of the coupling constraint Au − v = 0.
    pub lambda_star: DVector<f64>,
    /// Indices of the active box bounds: `i` for u_i at lower, `p1 + i` for
    /// u_i at upper, `2p1 + j` for v_j at lower, `2p1 + n + j` for v_j at
    /// upper.
    pub active_set: Vec<usize>,
}

const ORACLE_DIM_LIMIT: usize = 12;

#[derive(Clone, Copy, PartialEq, Eq)]
enum CoordState {
    Interior,
    AtLower,
    AtUpper,
}

/// Exact reference solve by active-set enumeration.
///
/// Requires the reformulated shape (B = −I, c = 0, h the box indicator) and
/// p1 + n ≤ 12. For every assignment of {interior, at-lower, at-upper} to
/// the p1 + n coordinates, solves the square KKT system in the unknowns
/// (u_i or its bound multiplier m_i; v_j or its coupling multiplier λ_j):
///
/// ```text
///   D²u − Dq − Aᵀλ + m = 0        (stationarity in u; m_i = μ⁺_i − μ⁻_i)
///   λ_j = ν⁻_j − ν⁺_j              (stationarity in v; 0 when v_j interior)
///   Au − v = 0                     (coupling)
/// ```
///
/// Candidates must be primal feasible and satisfy the multiplier sign rules
/// (μ, ν ≥ −1e−12); the feasible candidate of least objective wins, with
/// ties resolved to the first (lexicographically smallest) state vector.
/// Rank-deficient or badly solved systems are skipped — convexity guarantees
/// a nondegenerate optimal active set exists for generated instances.
pub fn oracle_solve(spec: &ProblemSpec) -> Result<ReferenceSolution> {
    let p1 = spec.p1();
    let n = spec.n();
    if !spec.h_is_zero_indicator() {
        return Err(Error::BadConfig(
            "the exact oracle handles the box-indicator h only".into(),
        ));
    }
    if spec.p2() != n {
        return Err(Error::UnsupportedB);
    }
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { -1.0 } else { 0.0 };
            if spec.b_mat()[(i, j)] != expect {
                return Err(Error::UnsupportedB);
            }
        }
    }
    if spec.c().iter().any(|&c| c != 0.0) {
        return Err(Error::BadConfig("the exact oracle requires c = 0".into()));
    }
    let m = p1 + n;
    if m > ORACLE_DIM_LIMIT {
        return Err(Error::TooLarge(m, ORACLE_DIM_LIMIT));
    }

    let diag = spec.g().diag();
    let q = spec.g().shift();
    let (u_lo, u_hi) = (spec.u_set().lower(), spec.u_set().upper());
    let (v_lo, v_hi) = (spec.v_set().lower(), spec.v_set().upper());

    let total = 3usize.pow(m as u32);
    let mut states = vec![CoordState::Interior; m];
    let mut best: Option<(f64, ReferenceSolution)> = None;

    'candidates: for code in 0..total {
        // Decode base-3, coordinate 0 as the most significant digit, so the
        // scan order is lexicographic in the state vector.
        let mut rem = code;
        for slot in (0..m).rev() {
            states[slot] = match rem % 3 {
                0 => CoordState::Interior,
                1 => CoordState::AtLower,
                2 => CoordState::AtUpper,
                _ => unreachable!(),
            };
            rem /= 3;
        }
        // A coordinate cannot sit on an infinite bound.
        for i in 0..p1 {
            let bad = match states[i] {
                CoordState::AtLower => u_lo[i].is_infinite(),
                CoordState::AtUpper => u_hi[i].is_infinite(),
                CoordState::Interior => false,
            };
            if bad {
                continue 'candidates;
            }
        }

        // Unknown layout: column i < p1 is u_i (interior) or m_i (bound);
        // column p1 + j is v_j (interior) or λ_j (bound).
        let mut mat = DMatrix::<f64>::zeros(m, m);
        let mut rhs = DVector::<f64>::zeros(m);
        // Rows 0..p1: d_i² u_i + m_i − (Aᵀλ)_i = d_i q_i.
        for i in 0..p1 {
            match states[i] {
                CoordState::Interior => mat[(i, i)] = diag[i] * diag[i],
                CoordState::AtLower | CoordState::AtUpper => {
                    let fixed = if states[i] == CoordState::AtLower {
                        u_lo[i]
                    } else {
                        u_hi[i]
                    };
                    mat[(i, i)] = 1.0; // unknown is m_i
                    rhs[i] -= diag[i] * diag[i] * fixed;
                }
            }
            rhs[i] += diag[i] * q[i];
            for j in 0..n {
                if states[p1 + j] != CoordState::Interior {
                    mat[(i, p1 + j)] = -spec.a_mat()[(j, i)];
                }
            }
        }
        // Rows p1..p1+n: Σ_i A_ji u_i − v_j = 0.
        for j in 0..n {
            let row = p1 + j;
            for i in 0..p1 {
                match states[i] {
                    CoordState::Interior => mat[(row, i)] = spec.a_mat()[(j, i)],
                    CoordState::AtLower => rhs[row] -= spec.a_mat()[(j, i)] * u_lo[i],
                    CoordState::AtUpper => rhs[row] -= spec.a_mat()[(j, i)] * u_hi[i],
                }
            }
            match states[p1 + j] {
                CoordState::Interior => mat[(row, p1 + j)] = -1.0,
                CoordState::AtLower => rhs[row] += v_lo[j],
                CoordState::AtUpper => rhs[row] += v_hi[j],
            }
        }

        let lu = mat.clone().lu();
        let sol = match lu.solve(&rhs) {
            Some(s) => s,
            None => continue,
        };
        if (&mat * &sol - &rhs).norm() > 1e-8 * (1.0 + rhs.norm()) {
            continue;
        }

        // Reassemble the primal-dual candidate.
        let mut u = DVector::zeros(p1);
        let mut lam = DVector::zeros(n);
        let mut v = DVector::zeros(n);
        let mut sign_ok = true;
        for i in 0..p1 {
            match states[i] {
                CoordState::Interior => u[i] = sol[i],
                CoordState::AtLower => {
                    u[i] = u_lo[i];
                    sign_ok &= sol[i] <= 1e-12; // m_i = −μ⁻ ≤ 0
                }
                CoordState::AtUpper => {
                    u[i] = u_hi[i];
                    sign_ok &= sol[i] >= -1e-12; // m_i = μ⁺ ≥ 0
                }
            }
        }
        for j in 0..n {
            match states[p1 + j] {
                CoordState::Interior => {
                    v[j] = sol[p1 + j];
                    // λ_j = 0 at an interior v_j.
                }
                CoordState::AtLower => {
                    v[j] = v_lo[j];
                    lam[j] = sol[p1 + j];
                    sign_ok &= lam[j] >= -1e-12; // λ_j = ν⁻ ≥ 0
                }
                CoordState::AtUpper => {
                    v[j] = v_hi[j];
                    lam[j] = sol[p1 + j];
                    sign_ok &= lam[j] <= 1e-12; // λ_j = −ν⁺ ≤ 0
                }
            }
        }
        if !sign_ok {
            continue;
        }
        let feas_tol = 1e-9;
        for i in 0..p1 {
            if u[i] < u_lo[i] - feas_tol || u[i] > u_hi[i] + feas_tol {
                continue 'candidates;
            }
        }
        for j in 0..n {
            if v[j] < v_lo[j] - feas_tol || v[j] > v_hi[j] + feas_tol {
                continue 'candidates;
            }
        }
        let couple = (spec.a_mat() * &u - &v).norm();
        if couple > 1e-9 * (1.0 + v.norm()) {
            continue;
        }

        let f = spec.g().value(&u);
        if best.as_ref().map_or(true, |(fb, _)| f < *fb) {
            let mut active = Vec::new();
            for i in 0..p1 {
                match states[i] {
                    CoordState::AtLower => active.push(i),
                    CoordState::AtUpper => active.push(p1 + i),
                    CoordState::Interior => {}
                }
            }
            for j in 0..n {
                match states[p1 + j] {
                    CoordState::AtLower => active.push(2 * p1 + j),
                    CoordState::AtUpper => active.push(2 * p1 + n + j),
                    CoordState::Interior => {}
                }
            }
            active.sort_unstable();
            best = Some((
                f,
                ReferenceSolution {
                    f_star: f,
                    x_star: PrimalPoint::new(u, v),
                    lambda_star: lam,
                    active_set: active,
                },
            ));
        }
    }

    best.map(|(_, s)| s).ok_or(Error::Infeasible)
}

/// Per-variant settings of an experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Target accuracy for certification and predictions.
    pub eps: f64,
    /// Iteration budget per variant.
    pub max_iter: usize,
    /// Which schemes to run.
    pub variants: Vec<Algorithm>,
    pub step: StepPolicy,
    pub momentum: MomentumMode,
    /// Cap on the emitted plot series length (0 keeps every row).
    pub series_points: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            eps: 1e-2,
            max_iter: 2000,
            variants: vec![Algorithm::Ama, Algorithm::AmaAccel],
            step: StepPolicy::Fixed,
            momentum: MomentumMode::Hat,
            series_points: 256,
        }
    }
}

/// Decimated empirical-vs-bound curves for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub k: Vec<usize>,
    pub obj_err: Vec<f64>,
    pub obj_bound: Vec<f64>,
    pub feas: Vec<f64>,
    pub feas_bound: Vec<f64>,
}

/// Everything recorded about one solver variant inside an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantReport {
    pub mode: RunMode,
    pub cert: CertReport,
    /// First k at which both ε-solution conditions held, if any.
    pub achieved_at: Option<usize>,
    /// Predicted ε-iteration count under this variant's own guarantee.
    pub predicted: Option<u64>,
    pub final_f_avg: f64,
    pub final_feas: f64,
    pub series: Series,
}

/// Oracle block of the experiment report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSummary {
    pub f_star: f64,
    pub lambda_star: Vec<f64>,
    pub u_star: Vec<f64>,
    pub v_star: Vec<f64>,
    pub active_set: Vec<usize>,
}

/// Full experiment outcome: recipe echo, ground truth, per-variant verdicts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub recipe: InstanceRecipe,
    pub eps: f64,
    pub smoothness: Smoothness,
    pub oracle: OracleSummary,
    pub variants: Vec<VariantReport>,
    pub all_passed: bool,
}

fn decimate(trace: &[IterationRecord], cap: usize, bound_at: impl Fn(usize) -> (f64, f64), f_star: f64) -> Series {
    let mut series = Series {
        k: Vec::new(),
        obj_err: Vec::new(),
        obj_bound: Vec::new(),
        feas: Vec::new(),
        feas_bound: Vec::new(),
    };
    if trace.is_empty() {
        return series;
    }
    let stride = if cap == 0 {
        1
    } else {
        trace.len().div_ceil(cap).max(1)
    };
    let mut idx = 0;
    while idx < trace.len() {
        push_row(&mut series, &trace[idx], &bound_at, f_star);
        idx += stride;
    }
    if series.k.last() != Some(&trace[trace.len() - 1].k) {
        push_row(&mut series, &trace[trace.len() - 1], &bound_at, f_star);
    }
    series
}

fn push_row(
    series: &mut Series,
    rec: &IterationRecord,
    bound_at: &impl Fn(usize) -> (f64, f64),
    f_star: f64,
) {
    let (ob, fb) = bound_at(rec.k);
    series.k.push(rec.k);
    series.obj_err.push((rec.f_avg - f_star).abs());
    series.obj_bound.push(ob);
    series.feas.push(rec.feas);
    series.feas_bound.push(fb);
}

/// Runs one solver variant on a prepared instance and assembles the
/// certificate constants matching how it actually ran (the run's own γ,
/// prox-diameter and spectral norm for smoothed runs; the plain constants
/// for strongly convex runs).
pub fn run_variant(
    spec: &ProblemSpec,
    reference: &ReferenceSolution,
    algorithm: Algorithm,
    smoothness: Smoothness,
    config: &ExperimentConfig,
) -> Result<(SolveOutput, CertificateInputs)> {
    let mut solver_cfg = SolverConfig::new(algorithm, smoothness);
    solver_cfg.epsilon = config.eps;
    solver_cfg.max_iter = config.max_iter;
    solver_cfg.step = config.step;
    solver_cfg.momentum = config.momentum;
    let out = run(spec, &solver_cfg)?;

    let inputs = match &out.smoothing {
        Some(sm) => CertificateInputs {
            f_star: reference.f_star,
            lambda_star: reference.lambda_star.clone(),
            lambda0: DVector::zeros(spec.n()),
            d_u: sm.d_u(),
            mu_p: sm.mu_p(),
            norm_a: sm.norm_a(),
            mu_g: spec.g().mu(),
            gamma: sm.gamma(),
        },
        None => CertificateInputs {
            f_star: reference.f_star,
            lambda_star: reference.lambda_star.clone(),
            lambda0: DVector::zeros(spec.n()),
            d_u: if spec.u_bounded() {
                prox_diameter(spec.u_set(), &DVector::zeros(spec.p1()))?
            } else {
                f64::INFINITY
            },
            mu_p: 1.0,
            norm_a: spectral_norm(spec.a_mat())?,
            mu_g: spec.g().mu(),
            gamma: 1.0,
        },
    };
    Ok((out, inputs))
}

/// Generates the instance, solves it exactly, runs every requested variant,
/// and certifies each trace against its guarantee.
pub fn run_experiment(recipe: &InstanceRecipe, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let params = generate(recipe);
    let spec = params.to_spec()?;
    let reference = oracle_solve(&spec)?;
    let smoothness = if recipe.strongly_convex {
        Smoothness::StronglyConvex
    } else {
        Smoothness::Smoothed
    };

    let mut variants = Vec::new();
    let mut all_passed = true;
    for &algorithm in &config.variants {
        let (out, inputs) = run_variant(&spec, &reference, algorithm, smoothness, config)?;

        let opts = CheckOptions {
            eps: config.eps,
            ..CheckOptions::default()
        };
        let cert = check_trace(&out.trace, &inputs, &out.mode, &opts)?;
        all_passed &= cert.passed;

        let kind = BoundKind::for_mode(&out.mode);
        let predicted = predict_iterations(kind, config.eps, &inputs, out.mode.line_search).ok();
        let achieved_at = out
            .trace
            .iter()
            .find(|r| (r.f_avg - reference.f_star).abs() <= config.eps && r.feas <= config.eps)
            .map(|r| r.k);
        let bound_at = |k: usize| {
            let pair = kind
                .evaluate(k, &inputs, out.mode.line_search)
                .expect("bounds evaluated during certification");
            (pair.obj_bound, pair.feas_bound)
        };
        let series = decimate(&out.trace, config.series_points, bound_at, reference.f_star);
        let last = out.trace.last();
        variants.push(VariantReport {
            mode: out.mode.clone(),
            cert,
            achieved_at,
            predicted,
            final_f_avg: last.map_or(f64::NAN, |r| r.f_avg),
            final_feas: last.map_or(f64::NAN, |r| r.feas),
            series,
        });
    }

    Ok(ExperimentReport {
        recipe: *recipe,
        eps: config.eps,
        smoothness,
        oracle: OracleSummary {
            f_star: reference.f_star,
            lambda_star: reference.lambda_star.iter().copied().collect(),
            u_star: reference.x_star.u.iter().copied().collect(),
            v_star: reference.x_star.v.iter().copied().collect(),
            active_set: reference.active_set.clone(),
        },
        variants,
        all_passed,
    })
}
