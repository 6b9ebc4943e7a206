//! Problem template and basic numerics.
//!
//! The template is the linearly constrained separable program
//!
//! ```text
//!     minimize   g(u) + h(v)
//!     subject to A·u + B·v = c,   u ∈ U,   v ∈ V,
//! ```
//!
//! where `g(u) = ½‖D·u − q‖²` with diagonal `D ⪰ 0`, `U` and `V` are boxes,
//! and `h` is either the zero indicator of `V` or (after a side swap) another
//! diagonal quadratic. `BᵀB` must be diagonal so that the penalized
//! v-subproblem splits coordinatewise.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A box `{ x : lower ≤ x ≤ upper }` with IEEE infinities as free bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl BoxSet {
    /// Builds a box, requiring `lower[i] ≤ upper[i]` everywhere. A coordinate
    /// may be free on either or both sides.
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch(format!(
                "box bounds have lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..lower.len() {
            // NaN fails this comparison too, which is what we want.
            if !(lower[i] <= upper[i]) {
                return Err(Error::BadBounds(i));
            }
        }
        Ok(BoxSet { lower, upper })
    }

    /// The symmetric box `[-r, r]^dim`; `r = +∞` yields the free box.
    pub fn symmetric(dim: usize, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::BadConfig(format!("box radius must be positive, got {r}")));
        }
        Ok(BoxSet {
            lower: DVector::from_element(dim, -r),
            upper: DVector::from_element(dim, r),
        })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }

    /// True iff every coordinate has both bounds finite.
    pub fn is_bounded(&self) -> bool {
        (0..self.dim()).all(|i| self.lower[i].is_finite() && self.upper[i].is_finite())
    }

    /// Membership up to an absolute per-coordinate slack.
    pub fn contains(&self, x: &DVector<f64>, tol: f64) -> bool {
        x.len() == self.dim()
            && (0..x.len()).all(|i| x[i] >= self.lower[i] - tol && x[i] <= self.upper[i] + tol)
    }

    /// Coordinatewise clip of `x` onto the box.
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(x.len(), |i, _| self.clip(i, x[i]))
    }

    /// Clip a single coordinate.
    pub fn clip(&self, i: usize, x: f64) -> f64 {
        x.max(self.lower[i]).min(self.upper[i])
    }

    /// Midpoint of coordinate `i` (finite only for bounded coordinates).
    pub fn midpoint(&self, i: usize) -> f64 {
        0.5 * (self.lower[i] + self.upper[i])
    }
}

/// The separable quadratic `½‖D·x − q‖²` with diagonal `D ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    diag: DVector<f64>,
    shift: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(diag: DVector<f64>, shift: DVector<f64>) -> Result<Self> {
        if diag.len() != shift.len() {
            return Err(Error::DimensionMismatch(format!(
                "diag has length {}, shift has length {}",
                diag.len(),
                shift.len()
            )));
        }
        for i in 0..diag.len() {
            if !(diag[i] >= 0.0) || !shift[i].is_finite() || !diag[i].is_finite() {
                return Err(Error::BadConfig(format!(
                    "objective needs finite shift and diag ≥ 0; coordinate {i} has diag {} shift {}",
                    diag[i], shift[i]
                )));
            }
        }
        Ok(QuadraticObjective { diag, shift })
    }

    /// The identically-zero quadratic on `dim` coordinates.
    pub fn zero(dim: usize) -> Self {
        QuadraticObjective {
            diag: DVector::zeros(dim),
            shift: DVector::zeros(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &DVector<f64> {
        &self.diag
    }

    pub fn shift(&self) -> &DVector<f64> {
        &self.shift
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim() {
            let r = self.diag[i] * x[i] - self.shift[i];
            acc += r * r;
        }
        0.5 * acc
    }

    /// Strong-convexity modulus `μ = min_i diag[i]²`; zero iff some entry is 0.
    pub fn mu(&self) -> f64 {
        self.diag.iter().map(|d| d * d).fold(f64::INFINITY, f64::min)
    }

    pub fn is_zero(&self) -> bool {
        self.diag.iter().all(|&d| d == 0.0) && self.shift.iter().all(|&s| s == 0.0)
    }
}

/// A primal pair `x = (u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalPoint {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
}

impl PrimalPoint {
    pub fn new(u: DVector<f64>, v: DVector<f64>) -> Self {
        PrimalPoint { u, v }
    }

    pub fn zeros(p1: usize, p2: usize) -> Self {
        PrimalPoint {
            u: DVector::zeros(p1),
            v: DVector::zeros(p2),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().all(|x| x.is_finite()) && self.v.iter().all(|x| x.is_finite())
    }
}

/// Absolute slack for box-membership tests. Iterates come from exact clipping,
/// so only rounding noise from the averaging recursion has to be absorbed.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// One validated instance of the problem template.
///
/// `h` on the v-side is `h_quad + indicator(V)` where `h_quad` is `None` in
/// the basic class (h is exactly the zero indicator) and becomes the original
/// `g` after [`ProblemSpec::swapped`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    a_mat: DMatrix<f64>,
    b_mat: DMatrix<f64>,
    c: DVector<f64>,
    g: QuadraticObjective,
    h_quad: Option<QuadraticObjective>,
    u_set: BoxSet,
    v_set: BoxSet,
    /// Diagonal of BᵀB, cached at validation time.
    beta: DVector<f64>,
}

impl ProblemSpec {
    /// Builds and validates an instance. See [`ProblemSpec::validated`] for
    /// the exact set of checks.
    pub fn new(
        a_mat: DMatrix<f64>,
        b_mat: DMatrix<f64>,
        c: DVector<f64>,
        g: QuadraticObjective,
        h_quad: Option<QuadraticObjective>,
        u_set: BoxSet,
        v_set: BoxSet,
    ) -> Result<Self> {
        let beta = DVector::zeros(b_mat.ncols());
        ProblemSpec {
            a_mat,
            b_mat,
            c,
            g,
            h_quad,
            u_set,
            v_set,
            beta,
        }
        .validated()
    }

    /// Checks every structural invariant and returns the spec unchanged (so
    /// validation is idempotent):
    ///
    /// * dimensions consistent across A, B, c, g, U, V;
    /// * BᵀB diagonal (the v-subproblem must split coordinatewise);
    /// * V bounded (h carries an indicator, so d² must stay finite);
    /// * at least one smoothing route open: strongly convex g or bounded U.
    pub fn validated(mut self) -> Result<Self> {
        let n = self.a_mat.nrows();
        let p1 = self.a_mat.ncols();
        let p2 = self.b_mat.ncols();
        if self.b_mat.nrows() != n || self.c.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "A is {}×{}, B is {}×{}, c has length {}",
                n,
                p1,
                self.b_mat.nrows(),
                p2,
                self.c.len()
            )));
        }
        if self.g.dim() != p1 || self.u_set.dim() != p1 {
            return Err(Error::DimensionMismatch(format!(
                "u-side expects dimension {p1}: g has {}, U has {}",
                self.g.dim(),
                self.u_set.dim()
            )));
        }
        if self.v_set.dim() != p2 {
            return Err(Error::DimensionMismatch(format!(
                "v-side expects dimension {p2}: V has {}",
                self.v_set.dim()
            )));
        }
        if let Some(hq) = &self.h_quad {
            if hq.dim() != p2 {
                return Err(Error::DimensionMismatch(format!(
                    "v-side expects dimension {p2}: h has {}",
                    hq.dim()
                )));
            }
        }

        let btb = self.b_mat.transpose() * &self.b_mat;
        let scale = btb.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for i in 0..p2 {
            for j in 0..p2 {
                if i != j && btb[(i, j)].abs() > 1e-10 * scale.max(1.0) {
                    return Err(Error::UnsupportedB);
                }
            }
        }
        self.beta = DVector::from_fn(p2, |i, _| btb[(i, i)]);

        if !self.v_set.is_bounded() {
            return Err(Error::UnboundedV);
        }
        if self.g.mu() == 0.0 && !self.u_set.is_bounded() {
            return Err(Error::NotSmoothable);
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.a_mat.nrows()
    }

    pub fn p1(&self) -> usize {
        self.a_mat.ncols()
    }

    pub fn p2(&self) -> usize {
        self.b_mat.ncols()
    }

    pub fn a_mat(&self) -> &DMatrix<f64> {
        &self.a_mat
    }

    pub fn b_mat(&self) -> &DMatrix<f64> {
        &self.b_mat
    }

    pub fn c(&self) -> &DVector<f64> {
        &self.c
    }

    pub fn g(&self) -> &QuadraticObjective {
        &self.g
    }

    /// The smooth part of h, present only on swapped specs.
    pub fn h_quad(&self) -> Option<&QuadraticObjective> {
        self.h_quad.as_ref()
    }

    /// True in the basic class: h is exactly the zero indicator of V.
    pub fn h_is_zero_indicator(&self) -> bool {
        self.h_quad.is_none()
    }

    pub fn u_set(&self) -> &BoxSet {
        &self.u_set
    }

    pub fn v_set(&self) -> &BoxSet {
        &self.v_set
    }

    /// Diagonal of BᵀB.
    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    /// Whether the exact (unsmoothed) u-side operators are available.
    pub fn strongly_convex_eligible(&self) -> bool {
        self.g.mu() > 0.0
    }

    pub fn u_bounded(&self) -> bool {
        self.u_set.is_bounded()
    }

    /// Exchanges the roles of the two sides: the new u-side is the old
    /// v-side and vice versa. Useful when V has the smaller prox-diameter;
    /// valid only when AᵀA is diagonal (the old A becomes the new B) and U
    /// is bounded (it becomes the new V).
    pub fn swapped(self) -> Result<Self> {
        let p1 = self.p1();
        let p2 = self.p2();
        let new_g = self.h_quad.unwrap_or_else(|| QuadraticObjective::zero(p2));
        let new_h = if self.g.is_zero() { None } else { Some(self.g) };
        ProblemSpec::new(
            self.b_mat,
            self.a_mat,
            self.c,
            new_g,
            new_h,
            self.v_set,
            self.u_set.clone(),
        )
        .map_err(|e| match e {
            // A becomes the new coupling matrix; report the failure in the
            // caller's terms.
            Error::UnboundedV if !self.u_set.is_bounded() => Error::UnboundedV,
            other => other,
        })
        .and_then(|s| {
            debug_assert_eq!(s.p1(), p2);
            debug_assert_eq!(s.p2(), p1);
            Ok(s)
        })
    }

    /// `f(x) = g(u) + h(v)`, with indicator semantics: `+∞` when `v` leaves V
    /// by more than [`MEMBERSHIP_TOL`]. The u-box is a domain constraint that
    /// iterates satisfy by construction, so it is not re-checked here.
    pub fn objective(&self, x: &PrimalPoint) -> f64 {
        if !self.v_set.contains(&x.v, MEMBERSHIP_TOL) {
            return f64::INFINITY;
        }
        let mut val = self.g.value(&x.u);
        if let Some(hq) = &self.h_quad {
            val += hq.value(&x.v);
        }
        val
    }

    /// Euclidean norm of the coupling residual `A·u + B·v − c`.
    pub fn feasibility_gap(&self, x: &PrimalPoint) -> f64 {
        (&self.a_mat * &x.u + &self.b_mat * &x.v - &self.c).norm()
    }
}

/// Spectral norm `‖M‖₂` via power iteration on `MᵀM`.
///
/// The start vector is the normalized all-ones vector; if the iteration lands
/// exactly in the kernel it restarts from the largest row of `MᵀM`, which is
/// never in the kernel of a nonzero PSD matrix. Convergence is declared when
/// the eigen-residual drops below `1e-11·θ` or the Rayleigh quotient θ
/// stagnates within `1e-14` three times in a row.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    const MAX_ITER: usize = 10_000;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::DimensionMismatch("spectral norm of an empty matrix".into()));
    }
    let gram = m.transpose() * m;
    let p = gram.nrows();
    let mut v = DVector::from_element(p, 1.0 / (p as f64).sqrt());
    let mut theta_prev = f64::NAN;
    let mut stagnant = 0u32;
    for _ in 0..MAX_ITER {
        let mut w = &gram * &v;
        let norm_w = w.norm();
        if norm_w == 0.0 {
            // v sits exactly in the kernel. Restart from the largest row of
            // the Gram matrix; if that row is zero too the matrix is zero.
            let (imax, _) = (0..p)
                .map(|i| (i, gram.row(i).norm()))
                .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            let row = gram.row(imax).transpose();
            let rn = row.norm();
            if rn == 0.0 {
                return Ok(0.0);
            }
            w = row / rn;
            v = w;
            continue;
        }
        v = w / norm_w;
        let mv = &gram * &v;
        let theta = v.dot(&mv);
        let resid = (&mv - theta * &v).norm();
        if resid <= 1e-11 * theta.max(f64::MIN_POSITIVE) {
            return Ok(theta.max(0.0).sqrt());
        }
        if (theta - theta_prev).abs() <= 1e-14 * theta.max(1.0) {
            stagnant += 1;
            if stagnant >= 3 {
                return Ok(theta.max(0.0).sqrt());
            }
        } else {
            stagnant = 0;
        }
        theta_prev = theta;
    }
    Err(Error::NonConvergence(MAX_ITER))
}

/// Prox-diameter `D_U = sup_{u∈U} ½‖u − center‖²`, which for a box is
/// attained at a vertex: `½ Σ_i max((upper_i−c_i)², (lower_i−c_i)²)`.
pub fn prox_diameter(u_set: &BoxSet, center: &DVector<f64>) -> Result<f64> {
    if center.len() != u_set.dim() {
        return Err(Error::DimensionMismatch(format!(
            "prox center has length {}, box has dimension {}",
            center.len(),
            u_set.dim()
        )));
    }
    let mut acc = 0.0;
    for i in 0..u_set.dim() {
        if !u_set.lower()[i].is_finite() || !u_set.upper()[i].is_finite() {
            return Err(Error::UnboundedSet(i));
        }
        let lo = u_set.lower()[i] - center[i];
        let hi = u_set.upper()[i] - center[i];
        acc += (hi * hi).max(lo * lo);
    }
    Ok(0.5 * acc)
}

/// Slack reformulation of the box-constrained projection QP
///
/// ```text
///     minimize ½‖D·u − q‖²  subject to  a ≤ A·u ≤ b,  ‖u‖_∞ ≤ r,
/// ```
///
/// introducing `v = A·u`: the template instance has `B = −I`, `c = 0`,
/// `U = [−r, r]^p1` and `V = [a, b]`. Pass `r = +∞` for an unconstrained u.
pub fn reformulate_qp(
    d: &DVector<f64>,
    q: &DVector<f64>,
    a_mat: &DMatrix<f64>,
    a_lower: &DVector<f64>,
    b_upper: &DVector<f64>,
    r: f64,
) -> Result<ProblemSpec> {
    let n = a_mat.nrows();
    let p1 = a_mat.ncols();
    if a_lower.len() != n || b_upper.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "A has {n} rows but the range bounds have lengths {} and {}",
            a_lower.len(),
            b_upper.len()
        )));
    }
    for i in 0..n {
        if a_lower[i] >= b_upper[i] {
            return Err(Error::BadBounds(i));
        }
    }
    let g = QuadraticObjective::new(d.clone(), q.clone())?;
    let u_set = BoxSet::symmetric(p1, r)?;
    let v_set = BoxSet::new(a_lower.clone(), b_upper.clone())?;
    ProblemSpec::new(
        a_mat.clone(),
        -DMatrix::identity(n, n),
        DVector::zeros(n),
        g,
        None,
        u_set,
        v_set,
    )
}

/// Smoothing data for the u-side prox-function `p(u) = ½‖u − center‖²`
/// (strong convexity modulus `μ_p = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingSetup {
    center: DVector<f64>,
    mu_p: f64,
    gamma: f64,
    d_u: f64,
    norm_a: f64,
    lipschitz_smoothed: f64,
    lipschitz_base: f64,
}

impl SmoothingSetup {
    /// Computes the prox-diameter and `‖A‖` for `spec` and freezes the
    /// derived Lipschitz constants `L_γ = ‖A‖²/(γ·μ_p)` and `L = ‖A‖²/μ_p`.
    pub fn new(spec: &ProblemSpec, center: DVector<f64>, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::BadConfig(format!("smoothing parameter must be positive, got {gamma}")));
        }
        let d_u = prox_diameter(spec.u_set(), &center)?;
        let norm_a = spectral_norm(spec.a_mat())?;
        let mu_p = 1.0;
        Ok(SmoothingSetup {
            center,
            mu_p,
            gamma,
            d_u,
            norm_a,
            lipschitz_smoothed: norm_a * norm_a / (gamma * mu_p),
            lipschitz_base: norm_a * norm_a / mu_p,
        })
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn mu_p(&self) -> f64 {
        self.mu_p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Prox-diameter D_U of the u-box around the center.
    pub fn d_u(&self) -> f64 {
        self.d_u
    }

    pub fn norm_a(&self) -> f64 {
        self.norm_a
    }

    /// Gradient Lipschitz constant of the smoothed dual component,
    /// `‖A‖²/(γ·μ_p)`.
    pub fn lipschitz_smoothed(&self) -> f64 {
        self.lipschitz_smoothed
    }

    /// `‖A‖²/μ_p`, the γ-free constant entering the worst-case bounds.
    pub fn lipschitz_base(&self) -> f64 {
        self.lipschitz_base
    }
}
