//! Dual-side oracles.
//!
//! Everything the solvers call lives here: the smoothed u-argmin and its
//! gradient, the exact sharp operators, the penalized v-subproblem, the dual
//! component values d¹, d¹_γ, d², the assembled dual values, and the
//! quadratic surrogate used by the line search.
//!
//! All formulas are closed-form because the supported class is separable:
//! diagonal quadratics over boxes split into independent scalar problems.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{BoxSet, ProblemSpec, QuadraticObjective, SmoothingSetup};

/// Threshold below which a sharp-operator argument counts as zero and the
/// argmax is a whole interval. Chosen well under the rounding accumulated by
/// the dual update at desk scale.
pub const TIE_TOL: f64 = 1e-14;

/// Result of a sharp-operator evaluation: the selected point and, per
/// coordinate, whether the argmax was non-unique (a tie). On tie-free
/// coordinates the point is the unique maximizer; on ties it is some point of
/// the optimal interval (hint or midpoint).
#[derive(Debug, Clone, PartialEq)]
pub struct SharpResult {
    pub point: DVector<f64>,
    pub tie_mask: Vec<bool>,
}

impl SharpResult {
    pub fn tie_count(&self) -> usize {
        self.tie_mask.iter().filter(|&&t| t).count()
    }
}

/// The three-way split of a dual value `d(λ) = d¹(λ) + d²(λ) + ⟨c, λ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualValueBundle {
    pub d1: f64,
    pub d2: f64,
    pub linear: f64,
    pub total: f64,
}

impl DualValueBundle {
    fn assemble(d1: f64, d2: f64, linear: f64) -> Self {
        DualValueBundle {
            d1,
            d2,
            linear,
            total: d1 + d2 + linear,
        }
    }
}

/// Scalar building block: minimize `½(d·x − q)² − s·x` over `[lo, hi]`.
///
/// Returns the attained minimum and its minimizer. With `d = 0` the problem
/// is linear; a nonzero slope pointing at an infinite bound means the minimum
/// is not attained.
fn scalar_box_min(d: f64, q: f64, s: f64, lo: f64, hi: f64, index: usize) -> Result<(f64, f64)> {
    let x = if d > 0.0 {
        ((d * q + s) / (d * d)).max(lo).min(hi)
    } else if s > 0.0 {
        if !hi.is_finite() {
            return Err(Error::UnattainedMin(index));
        }
        hi
    } else if s < 0.0 {
        if !lo.is_finite() {
            return Err(Error::UnattainedMin(index));
        }
        lo
    } else {
        // Flat direction: any point attains the value; pick the one closest
        // to the origin for definiteness.
        0.0f64.max(lo).min(hi)
    };
    let r = d * x - q;
    Ok((0.5 * r * r - s * x, x))
}

/// Minimize `quad(x) − ⟨s, x⟩` over a box, coordinate by coordinate.
fn box_quad_min(
    quad: &QuadraticObjective,
    s: &DVector<f64>,
    set: &BoxSet,
) -> Result<(f64, DVector<f64>)> {
    let mut val = 0.0;
    let mut point = DVector::zeros(s.len());
    for i in 0..s.len() {
        let (vi, xi) = scalar_box_min(quad.diag()[i], quad.shift()[i], s[i], set.lower()[i], set.upper()[i], i)?;
        val += vi;
        point[i] = xi;
    }
    Ok((val, point))
}

/// Unique minimizer of `g(u) − ⟨Aᵀλ, u⟩ + γ·½‖u − center‖²` over U:
/// coordinatewise `clip((diag_i·q_i + (Aᵀλ)_i + γ·center_i) / (diag_i² + γ))`.
pub fn smoothed_u_argmin(
    spec: &ProblemSpec,
    smoothing: &SmoothingSetup,
    lambda: &DVector<f64>,
) -> DVector<f64> {
    let s = spec.a_mat().transpose() * lambda;
    let g = spec.g();
    let gamma = smoothing.gamma();
    DVector::from_fn(spec.p1(), |i, _| {
        let d = g.diag()[i];
        let num = d * g.shift()[i] + s[i] + gamma * smoothing.center()[i];
        spec.u_set().clip(i, num / (d * d + gamma))
    })
}

/// Gradient of the smoothed dual component: `∇d¹_γ(λ) = −A·u*_γ(λ)`.
pub fn grad_d1_gamma(
    spec: &ProblemSpec,
    smoothing: &SmoothingSetup,
    lambda: &DVector<f64>,
) -> DVector<f64> {
    -(spec.a_mat() * smoothed_u_argmin(spec, smoothing, lambda))
}

/// Sharp operator of g over U: the maximizer of `⟨s, u⟩ − g(u)`, available in
/// closed form only when g is strongly convex (`u_i = clip((diag_i·q_i +
/// s_i)/diag_i²)`). Uniqueness makes the tie mask all-false.
pub fn sharp_u(spec: &ProblemSpec, s: &DVector<f64>) -> Result<SharpResult> {
    let g = spec.g();
    if g.mu() == 0.0 {
        return Err(Error::NotStronglyConvex);
    }
    let point = DVector::from_fn(spec.p1(), |i, _| {
        let d = g.diag()[i];
        spec.u_set().clip(i, (d * g.shift()[i] + s[i]) / (d * d))
    });
    Ok(SharpResult {
        point,
        tie_mask: vec![false; spec.p1()],
    })
}

/// Sharp operator of h over V: a maximizer of `⟨s, v⟩ − h(v)`.
///
/// For the indicator class this is the sign rule (upper bound for `s_i > 0`,
/// lower for `s_i < 0`); `|s_i| ≤ TIE_TOL` makes the whole interval optimal
/// and the selection falls back to the clipped hint, or the midpoint without
/// one. A quadratic h (swapped specs) has a unique maximizer wherever its
/// curvature is nonzero.
pub fn sharp_v(
    spec: &ProblemSpec,
    s: &DVector<f64>,
    tie_hint: Option<&DVector<f64>>,
) -> Result<SharpResult> {
    let v_set = spec.v_set();
    if !v_set.is_bounded() {
        return Err(Error::UnboundedV);
    }
    let p2 = spec.p2();
    let mut point = DVector::zeros(p2);
    let mut tie_mask = vec![false; p2];
    for i in 0..p2 {
        let d = spec.h_quad().map_or(0.0, |hq| hq.diag()[i]);
        point[i] = if d > 0.0 {
            let q = spec.h_quad().unwrap().shift()[i];
            v_set.clip(i, (s[i] + d * q) / (d * d))
        } else if s[i] > TIE_TOL {
            v_set.upper()[i]
        } else if s[i] < -TIE_TOL {
            v_set.lower()[i]
        } else {
            tie_mask[i] = true;
            match tie_hint {
                Some(h) => v_set.clip(i, h[i]),
                None => v_set.midpoint(i),
            }
        };
    }
    Ok(SharpResult { point, tie_mask })
}

/// The penalized v-update: minimize `h(v) − ⟨Bᵀλ, v⟩ + (η/2)‖c − A·ũ − B·v‖²`
/// over V. With diagonal BᵀB = diag(β) the exact coordinatewise solution is
/// `v_i = clip((d_i·q_i + (Bᵀλ)_i + η·(Bᵀw)_i) / (d_i² + η·β_i))` with
/// `w = c − A·ũ` (the quadratic h-part is absent in the indicator class).
pub fn v_subproblem(
    spec: &ProblemSpec,
    lambda: &DVector<f64>,
    u_tilde: &DVector<f64>,
    eta: f64,
) -> Result<DVector<f64>> {
    debug_assert!(eta > 0.0);
    let w = spec.c() - spec.a_mat() * u_tilde;
    let bt_lambda = spec.b_mat().transpose() * lambda;
    let bt_w = spec.b_mat().transpose() * w;
    let beta = spec.beta();
    let mut v = DVector::zeros(spec.p2());
    for i in 0..spec.p2() {
        if beta[i] == 0.0 {
            return Err(Error::SingularB(i));
        }
        let (d, dq) = spec
            .h_quad()
            .map_or((0.0, 0.0), |hq| (hq.diag()[i], hq.diag()[i] * hq.shift()[i]));
        v[i] = spec
            .v_set()
            .clip(i, (dq + bt_lambda[i] + eta * bt_w[i]) / (d * d + eta * beta[i]));
    }
    Ok(v)
}

/// Unsmoothed dual component `d¹(λ) = min_{u∈U} g(u) − ⟨Aᵀλ, u⟩`. Attained
/// whenever U is bounded or g strongly convex; otherwise errors loudly.
pub fn d1_value(spec: &ProblemSpec, lambda: &DVector<f64>) -> Result<f64> {
    let s = spec.a_mat().transpose() * lambda;
    box_quad_min(spec.g(), &s, spec.u_set()).map(|(v, _)| v)
}

/// Smoothed dual component `d¹_γ(λ)`, evaluated at the smoothed argmin.
pub fn d1_gamma_value(spec: &ProblemSpec, smoothing: &SmoothingSetup, lambda: &DVector<f64>) -> f64 {
    let u = smoothed_u_argmin(spec, smoothing, lambda);
    let s = spec.a_mat().transpose() * lambda;
    let dev = &u - smoothing.center();
    spec.g().value(&u) - s.dot(&u) + smoothing.gamma() * 0.5 * dev.norm_squared()
}

/// Second dual component `d²(λ) = min_{v∈V} h(v) − ⟨Bᵀλ, v⟩`. For the
/// indicator class this is `−Σ_i max((Bᵀλ)_i·upper_i, (Bᵀλ)_i·lower_i)`.
pub fn d2_value(spec: &ProblemSpec, lambda: &DVector<f64>) -> Result<f64> {
    if !spec.v_set().is_bounded() {
        return Err(Error::UnboundedV);
    }
    let s = spec.b_mat().transpose() * lambda;
    let zero;
    let quad = match spec.h_quad() {
        Some(hq) => hq,
        None => {
            zero = QuadraticObjective::zero(spec.p2());
            &zero
        }
    };
    box_quad_min(quad, &s, spec.v_set()).map(|(v, _)| v)
}

/// Both dual values at λ: the smoothed bundle `d_γ = d¹_γ + d² + ⟨c, λ⟩` and
/// the plain bundle `d = d¹ + d² + ⟨c, λ⟩`.
pub fn dual_values(
    spec: &ProblemSpec,
    smoothing: &SmoothingSetup,
    lambda: &DVector<f64>,
) -> Result<(DualValueBundle, DualValueBundle)> {
    let d2 = d2_value(spec, lambda)?;
    let linear = spec.c().dot(lambda);
    let smoothed = DualValueBundle::assemble(d1_gamma_value(spec, smoothing, lambda), d2, linear);
    let plain = DualValueBundle::assemble(d1_value(spec, lambda)?, d2, linear);
    Ok((smoothed, plain))
}

/// Quadratic surrogate of the smoothed dual component around λ̂:
/// `Q_L(λ; λ̂) = d¹_γ(λ̂) + ⟨∇d¹_γ(λ̂), λ − λ̂⟩ − (L/2)‖λ − λ̂‖²`.
pub fn quad_surrogate(
    spec: &ProblemSpec,
    smoothing: &SmoothingSetup,
    lambda: &DVector<f64>,
    lambda_hat: &DVector<f64>,
    l: f64,
) -> f64 {
    surrogate_from(
        d1_gamma_value(spec, smoothing, lambda_hat),
        &grad_d1_gamma(spec, smoothing, lambda_hat),
        lambda,
        lambda_hat,
        l,
    )
}

/// The same surrogate from precomputed value and gradient at λ̂; shared by
/// the smoothed and the strongly convex (unsmoothed) paths.
pub fn surrogate_from(
    value_hat: f64,
    grad_hat: &DVector<f64>,
    lambda: &DVector<f64>,
    lambda_hat: &DVector<f64>,
    l: f64,
) -> f64 {
    let delta = lambda - lambda_hat;
    value_hat + grad_hat.dot(&delta) - 0.5 * l * delta.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn vec(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    /// 1-D spec with tunable pieces: min ½(d·u − q)² s.t. a·u − v = 0,
    /// v ∈ [vlo, vhi], u ∈ [ulo, uhi].
    fn spec1(d: f64, q: f64, a: f64, ubox: (f64, f64), vbox: (f64, f64)) -> ProblemSpec {
        ProblemSpec::new(
            DMatrix::from_row_slice(1, 1, &[a]),
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            vec(&[0.0]),
            QuadraticObjective::new(vec(&[d]), vec(&[q])).unwrap(),
            None,
            BoxSet::new(vec(&[ubox.0]), vec(&[ubox.1])).unwrap(),
            BoxSet::new(vec(&[vbox.0]), vec(&[vbox.1])).unwrap(),
        )
        .unwrap()
    }

    fn smoothing(spec: &ProblemSpec, gamma: f64) -> SmoothingSetup {
        // Center at the origin; fall back to a unit prox-diameter when U is
        // free (the tests below never read d_u in that case).
        SmoothingSetup::new(spec, DVector::zeros(spec.p1()), gamma)
            .unwrap_or_else(|_| panic!("smoothing setup failed"))
    }

    /// Brute-force 1-D minimizer over a grid, used as an independent check of
    /// the closed forms.
    fn grid_argmin(lo: f64, hi: f64, steps: usize, f: impl Fn(f64) -> f64) -> f64 {
        let mut best_x = lo;
        let mut best = f64::INFINITY;
        for k in 0..=steps {
            let x = lo + (hi - lo) * (k as f64) / (steps as f64);
            let v = f(x);
            if v < best {
                best = v;
                best_x = x;
            }
        }
        best_x
    }

    #[test]
    fn smoothed_argmin_free_box() {
        // min ½(u−2)² + ½u² has its stationary point at u = 1.
        let spec = spec1(1.0, 2.0, 1.0, (-10.0, 10.0), (0.0, 1.0));
        let sm = smoothing(&spec, 1.0);
        let u = smoothed_u_argmin(&spec, &sm, &vec(&[0.0]));
        assert_relative_eq!(u[0], 1.0, max_relative = 1e-12);
        let g = grid_argmin(-10.0, 10.0, 400_000, |x| {
            0.5 * (x - 2.0) * (x - 2.0) + 0.5 * x * x
        });
        assert!((u[0] - g).abs() < 1e-3);
    }

    #[test]
    fn smoothed_argmin_clips_to_box() {
        // Unconstrained optimum is (q·d + s + γ·0)/(d² + γ) = 4/2 = 2 with
        // Aᵀλ = 2; the box [−1, 1] clips it to 1.
        let spec = spec1(1.0, 2.0, 1.0, (-1.0, 1.0), (0.0, 1.0));
        let sm = smoothing(&spec, 1.0);
        let u = smoothed_u_argmin(&spec, &sm, &vec(&[2.0]));
        assert_eq!(u[0], 1.0);
        let g = grid_argmin(-1.0, 1.0, 200_000, |x| {
            0.5 * (x - 2.0) * (x - 2.0) - 2.0 * x + 0.5 * x * x
        });
        assert!((u[0] - g).abs() < 1e-3);
    }

    #[test]
    fn smoothed_argmin_zero_case() {
        let spec = spec1(1.0, 0.0, 1.0, (-1.0, 1.0), (0.0, 1.0));
        let sm = smoothing(&spec, 0.7);
        let u = smoothed_u_argmin(&spec, &sm, &vec(&[0.0]));
        assert_eq!(u[0], 0.0);
    }

    #[test]
    fn sharp_u_examples() {
        let spec = spec1(1.0, 1.0, 1.0, (f64::NEG_INFINITY, f64::INFINITY), (0.0, 1.0));
        let r = sharp_u(&spec, &vec(&[0.0])).unwrap();
        assert_eq!(r.point[0], 1.0);
        assert!(!r.tie_mask[0]);

        let spec2 = spec1(2.0, 1.0, 1.0, (f64::NEG_INFINITY, f64::INFINITY), (0.0, 1.0));
        let r2 = sharp_u(&spec2, &vec(&[2.0])).unwrap();
        // (2·1 + 2)/4 = 1.
        assert_relative_eq!(r2.point[0], 1.0);
    }

    #[test]
    fn sharp_u_requires_strong_convexity() {
        let spec = spec1(0.0, 0.0, 1.0, (-1.0, 1.0), (0.0, 1.0));
        assert!(matches!(sharp_u(&spec, &vec(&[1.0])), Err(Error::NotStronglyConvex)));
    }

    #[test]
    fn sharp_v_sign_rule_and_ties() {
        let spec = ProblemSpec::new(
            DMatrix::identity(2, 2),
            -DMatrix::identity(2, 2),
            vec(&[0.0, 0.0]),
            QuadraticObjective::new(vec(&[1.0, 1.0]), vec(&[0.0, 0.0])).unwrap(),
            None,
            BoxSet::symmetric(2, 5.0).unwrap(),
            BoxSet::symmetric(2, 1.0).unwrap(),
        )
        .unwrap();

        let r = sharp_v(&spec, &vec(&[3.0, -2.0]), None).unwrap();
        assert_eq!(r.point, vec(&[1.0, -1.0]));
        assert_eq!(r.tie_count(), 0);

        let hint = vec(&[0.3, 0.0]);
        let r2 = sharp_v(&spec, &vec(&[0.0, 5.0]), Some(&hint)).unwrap();
        assert_eq!(r2.point, vec(&[0.3, 1.0]));
        assert!(r2.tie_mask[0] && !r2.tie_mask[1]);

        let r3 = sharp_v(&spec, &vec(&[0.0, 0.0]), None).unwrap();
        assert_eq!(r3.point, vec(&[0.0, 0.0])); // midpoints
        assert_eq!(r3.tie_count(), 2);
    }

    #[test]
    fn sharp_v_selection_is_positively_homogeneous() {
        let spec = ProblemSpec::new(
            DMatrix::identity(3, 3),
            -DMatrix::identity(3, 3),
            DVector::zeros(3),
            QuadraticObjective::new(vec(&[1.0, 1.0, 1.0]), DVector::zeros(3)).unwrap(),
            None,
            BoxSet::symmetric(3, 5.0).unwrap(),
            BoxSet::new(vec(&[-1.0, 0.0, -2.0]), vec(&[1.0, 3.0, -0.5])).unwrap(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let s = DVector::from_fn(3, |_, _| rng.gen_range(-2.0..2.0));
            let alpha = rng.gen_range(0.1..10.0);
            let r1 = sharp_v(&spec, &s, None).unwrap();
            let r2 = sharp_v(&spec, &(alpha * &s), None).unwrap();
            for i in 0..3 {
                if !r1.tie_mask[i] {
                    assert_eq!(r1.point[i], r2.point[i]);
                }
            }
        }
    }

    #[test]
    fn v_subproblem_matches_stationarity() {
        // B = −I, c = 0 reduces to v = clip(A·ũ − λ/η): with A·ũ = 1,
        // λ = 0.5, η = 1 the stationary point is 0.5.
        let spec = spec1(1.0, 1.0, 1.0, (-2.0, 2.0), (0.0, 2.0));
        let v = v_subproblem(&spec, &vec(&[0.5]), &vec(&[1.0]), 1.0).unwrap();
        assert_relative_eq!(v[0], 0.5, max_relative = 1e-12);
        let g = grid_argmin(0.0, 2.0, 200_000, |x| {
            -(-0.5 * x) - 0.0 + 0.5 * (1.0 - x) * (1.0 - x) - 0.0
        });
        // h − ⟨Bᵀλ, v⟩ + η/2‖c − Aũ − Bv‖² with Bᵀλ = −0.5.
        assert!((v[0] - g).abs() < 1e-3);

        // λ = 0 is a pure projection of A·ũ onto V.
        let v2 = v_subproblem(&spec, &vec(&[0.0]), &vec(&[1.5]), 2.0).unwrap();
        assert_eq!(v2[0], 1.5);
    }

    #[test]
    fn v_subproblem_rejects_zero_beta() {
        let spec = ProblemSpec::new(
            DMatrix::from_row_slice(2, 1, &[1.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]),
            DVector::zeros(2),
            QuadraticObjective::new(vec(&[1.0]), vec(&[0.0])).unwrap(),
            None,
            BoxSet::symmetric(1, 1.0).unwrap(),
            BoxSet::symmetric(2, 1.0).unwrap(),
        )
        .unwrap();
        let r = v_subproblem(&spec, &DVector::zeros(2), &vec(&[0.0]), 1.0);
        assert!(matches!(r, Err(Error::SingularB(1))));
    }

    #[test]
    fn d1_examples() {
        // λ = 0, q = 0, U = [−1,1]: minimizer 0, value 0.
        let spec = spec1(1.0, 0.0, 1.0, (-1.0, 1.0), (0.0, 1.0));
        assert_eq!(d1_value(&spec, &vec(&[0.0])).unwrap(), 0.0);

        // min ½(u−1)² − u over free U sits at u = 2 with value −1.5.
        let spec2 = spec1(1.0, 1.0, 1.0, (f64::NEG_INFINITY, f64::INFINITY), (0.0, 1.0));
        assert_relative_eq!(d1_value(&spec2, &vec(&[1.0])).unwrap(), -1.5, max_relative = 1e-12);
    }

    #[test]
    fn d1_unattained_is_detected() {
        // Flat objective, free box, nonzero slope: the infimum is −∞.
        let spec = ProblemSpec::new(
            DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            vec(&[0.0]),
            QuadraticObjective::new(vec(&[1.0, 0.0]), vec(&[0.0, 0.0])).unwrap(),
            None,
            BoxSet::new(vec(&[-1.0, f64::NEG_INFINITY]), vec(&[1.0, f64::INFINITY])).unwrap(),
            BoxSet::new(vec(&[0.0]), vec(&[1.0])).unwrap(),
        );
        // Validation already refuses this (μ_g = 0 with unbounded U), which
        // is the point: d1 callers only ever see attained cases.
        assert!(matches!(spec, Err(Error::NotSmoothable)));
    }

    #[test]
    fn d2_examples() {
        let spec = spec1(1.0, 1.0, 1.0, (-1.0, 1.0), (0.0, 1.0));
        assert_eq!(d2_value(&spec, &vec(&[0.0])).unwrap(), 0.0);
        // Bᵀλ = −λ = 2 at λ = −2: max over [0,1] of 2v is 2, so d² = −2.
        assert_eq!(d2_value(&spec, &vec(&[-2.0])).unwrap(), -2.0);
    }

    #[test]
    fn sandwich_estimate_holds() {
        // d¹_γ − γ·D_U ≤ d¹ ≤ d¹_γ over seeded multipliers.
        let spec = spec1(1.0, 0.5, 1.3, (-2.0, 2.0), (0.0, 1.0));
        for &gamma in &[0.05, 1.0, 20.0] {
            let sm = smoothing(&spec, gamma);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..100 {
                let lam = vec(&[rng.gen_range(-4.0..4.0)]);
                let d1 = d1_value(&spec, &lam).unwrap();
                let d1g = d1_gamma_value(&spec, &sm, &lam);
                assert!(d1g - gamma * sm.d_u() <= d1 + 1e-10);
                assert!(d1 <= d1g + 1e-10);
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let spec = ProblemSpec::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.4, 0.9]),
            -DMatrix::identity(2, 2),
            DVector::zeros(2),
            QuadraticObjective::new(vec(&[1.0, 0.7]), vec(&[0.2, -0.6])).unwrap(),
            None,
            BoxSet::symmetric(2, 2.0).unwrap(),
            BoxSet::symmetric(2, 1.0).unwrap(),
        )
        .unwrap();
        let sm = smoothing(&spec, 0.8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = 1e-5;
        for _ in 0..50 {
            let lam = DVector::from_fn(2, |_, _| rng.gen_range(-2.0..2.0));
            let grad = grad_d1_gamma(&spec, &sm, &lam);
            let mut fd = DVector::zeros(2);
            for j in 0..2 {
                let mut lp = lam.clone();
                let mut lm = lam.clone();
                lp[j] += h;
                lm[j] -= h;
                fd[j] = (d1_gamma_value(&spec, &sm, &lp) - d1_gamma_value(&spec, &sm, &lm)) / (2.0 * h);
            }
            let rel = (&fd - &grad).norm() / grad.norm().max(1.0);
            assert!(rel <= 1e-5, "relative fd error {rel}");
        }
    }

    #[test]
    fn gradient_lipschitz_constant_witnessed() {
        let spec = spec1(1.0, 0.5, 1.5, (-2.0, 2.0), (0.0, 1.0));
        let sm = smoothing(&spec, 0.3);
        let lip = sm.lipschitz_smoothed();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let l1 = vec(&[rng.gen_range(-3.0..3.0)]);
            let l2 = vec(&[rng.gen_range(-3.0..3.0)]);
            let g1 = grad_d1_gamma(&spec, &sm, &l1);
            let g2 = grad_d1_gamma(&spec, &sm, &l2);
            assert!((g1 - g2).norm() <= lip * (&l1 - &l2).norm() * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn dual_components_are_midpoint_concave() {
        let spec = spec1(1.0, -0.3, 0.8, (-1.5, 1.5), (-0.5, 1.0));
        let sm = smoothing(&spec, 0.6);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let la = vec(&[rng.gen_range(-3.0..3.0)]);
            let lb = vec(&[rng.gen_range(-3.0..3.0)]);
            let mid = 0.5 * (&la + &lb);
            let half = |f: &dyn Fn(&DVector<f64>) -> f64| (f(&la) + f(&lb)) * 0.5;
            let d1g = |l: &DVector<f64>| d1_gamma_value(&spec, &sm, l);
            let d2 = |l: &DVector<f64>| d2_value(&spec, l).unwrap();
            let d = |l: &DVector<f64>| {
                d1_value(&spec, l).unwrap() + d2_value(&spec, l).unwrap() + spec.c().dot(l)
            };
            assert!(d1g(&mid) >= half(&|l| d1g(l)) - 1e-12);
            assert!(d2(&mid) >= half(&|l| d2(l)) - 1e-12);
            assert!(d(&mid) >= half(&|l| d(l)) - 1e-12);
        }
    }

    #[test]
    fn weak_duality_on_seeded_pairs() {
        let spec = spec1(1.0, 1.0, 1.0, (-2.0, 2.0), (0.0, 0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let lam = vec(&[rng.gen_range(-3.0..3.0)]);
            let d = d1_value(&spec, &lam).unwrap() + d2_value(&spec, &lam).unwrap() + spec.c().dot(&lam);
            // Any feasible primal pair dominates the dual value.
            let u = rng.gen_range(-2.0..2.0);
            let v = spec.v_set().clip(0, u); // enforce v ∈ V; Au + Bv − c need not vanish
            let x = crate::model::PrimalPoint::new(vec(&[u]), vec(&[v]));
            if spec.feasibility_gap(&x) < 1e-12 {
                assert!(d <= spec.objective(&x) + 1e-10);
            }
        }
        // And at the known optimum of the scalar instance, d(λ*) = f*.
        let d_star = d1_value(&spec, &vec(&[-0.5])).unwrap()
            + d2_value(&spec, &vec(&[-0.5])).unwrap()
            + spec.c().dot(&vec(&[-0.5]));
        assert_relative_eq!(d_star, 0.125, max_relative = 1e-12);
    }

    #[test]
    fn surrogate_basics() {
        let spec = spec1(1.0, 0.4, 1.2, (-2.0, 2.0), (0.0, 1.0));
        let sm = smoothing(&spec, 0.5);
        let lam_hat = vec(&[0.3]);

        // Zero displacement returns the anchor value.
        let q0 = quad_surrogate(&spec, &sm, &lam_hat, &lam_hat, 3.0);
        assert_relative_eq!(q0, d1_gamma_value(&spec, &sm, &lam_hat));

        // At L = L_γ the surrogate under-estimates d¹_γ everywhere.
        let lip = sm.lipschitz_smoothed();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..100 {
            let lam = vec(&[rng.gen_range(-3.0..3.0)]);
            let q = quad_surrogate(&spec, &sm, &lam, &lam_hat, lip);
            assert!(q <= d1_gamma_value(&spec, &sm, &lam) + 1e-10);
        }

        // Doubling L can only lower the surrogate away from the anchor.
        let lam = vec(&[1.1]);
        assert!(
            quad_surrogate(&spec, &sm, &lam, &lam_hat, 2.0 * lip)
                <= quad_surrogate(&spec, &sm, &lam, &lam_hat, lip)
        );
    }

    #[test]
    fn smoothed_argmin_agrees_with_grid_in_2d() {
        let spec = ProblemSpec::new(
            DMatrix::from_row_slice(2, 2, &[0.9, -0.2, 0.1, 1.1]),
            -DMatrix::identity(2, 2),
            DVector::zeros(2),
            QuadraticObjective::new(vec(&[1.0, 0.5]), vec(&[0.3, -0.2])).unwrap(),
            None,
            BoxSet::symmetric(2, 1.0).unwrap(),
            BoxSet::symmetric(2, 1.0).unwrap(),
        )
        .unwrap();
        let sm = smoothing(&spec, 0.4);
        let lam = vec(&[0.7, -0.3]);
        let u = smoothed_u_argmin(&spec, &sm, &lam);
        let s = spec.a_mat().transpose() * &lam;
        let obj = |x: &DVector<f64>| {
            spec.g().value(x) - s.dot(x) + 0.2 * x.norm_squared()
        };
        // 1e-4-resolution grid over the box.
        let mut best = f64::INFINITY;
        let mut best_x = DVector::zeros(2);
        let steps = 2000; // 2·10³ per axis = 4·10⁶ cells at step 1e-3; 1e-4 along each line below
        for i in 0..=steps {
            for j in 0..=steps {
                let x = vec(&[
                    -1.0 + 2.0 * (i as f64) / (steps as f64),
                    -1.0 + 2.0 * (j as f64) / (steps as f64),
                ]);
                let v = obj(&x);
                if v < best {
                    best = v;
                    best_x = x;
                }
            }
        }
        assert!((u[0] - best_x[0]).abs() < 1e-3 && (u[1] - best_x[1]).abs() < 1e-3);
    }
}
