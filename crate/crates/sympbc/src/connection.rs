//! Symplectic connection on a chart with a variable form `Ω(x)`.
//!
//! The connection adapted to a closed nondegenerate 2-form
//! `ω(x)(u, v) = (Ω(x) u, v)` is
//!
//! ```text
//! Γ(x)(h, ξ) = -Ω(x)⁻¹ c,    c_i = (∂_i Ω(x) ξ, h),
//! ```
//!
//! the unique reading of the covector `w ↦ ∂_w ω(x)(ξ, h)` under which
//! parallel transport along a curve,
//! `dξ/dt = Γ(x(t))(dx/dt, ξ)`, conserves all pairings
//! `ω(x(t))(ξ_1(t), ξ_2(t))` whenever `dω = 0`. Transport therefore
//! carries a computable certificate: the report returns the largest
//! pairing drift over the transported frame, and for the classical RK4
//! integrator used here the drift decays like `steps⁻⁴`.
//!
//! The module also provides the Kato transport of a path of orthogonal
//! projectors (generator `[P', P]`, yielding an orthogonal `U` with
//! `P(1)U = U P(0)`) and Lagrangian frame fields along rays: the basis
//! of a Lagrangian subspace is transported along `t ↦ t·l`, certified to
//! stay tangent, and completed to a symplectic frame at `l` through the
//! dual-basis system of [`crate::symplin::symplectic_dual_basis`].

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::symplin::{self, classify_subspace, Subspace, SymplecticForm};

/// Tolerance for Kato transport orthogonality and intertwining at the
/// reference step count `10⁴`.
pub const KATO_TOL: f64 = 1e-6;
/// Tolerance for ray-transport tangency certification.
pub const RAY_TOL: f64 = 1e-6;
/// Relative tolerance for the sampled closedness check of `dω`.
pub const CLOSED_TOL: f64 = 1e-6;
/// Tolerance for the projector-path invariants `P² = P = Pᵀ`.
pub const PROJ_PATH_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("form is degenerate or not exactly skew at parameter {at}")]
    DegenerateForm { at: f64 },
    #[error("form field is not closed: sampled dω residual {residual:.3e} exceeds {tol:.3e}")]
    NotClosed { residual: f64, tol: f64 },
    #[error("projector rank jumps along the path: rank {rank_found} at t = {t} (started at {rank_start})")]
    RankJump { t: f64, rank_start: usize, rank_found: usize },
    #[error("projector path violates P² = P = Pᵀ at t = {t} (residual {residual:.3e})")]
    NotAProjector { t: f64, residual: f64 },
    #[error("ray-transport invariance violated: residual {residual:.3e} exceeds {tol:.3e}; the subspace is not Lagrangian for the field along the ray")]
    InvarianceViolation { residual: f64, tol: f64 },
    #[error(transparent)]
    Symplin(#[from] symplin::SymplinError),
}

type MatrixField = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type MatrixFieldDerivative = Arc<dyn Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync>;

/// A variable symplectic form `x ↦ Ω(x)` on `R^{2m}`.
///
/// The optional analytic derivative returns the directional derivatives
/// `∂_i Ω(x)` for each coordinate direction; when absent they are
/// formed by central differences with step `∛ε · (1 + ‖x‖)`.
#[derive(Clone)]
pub struct FormField {
    dim: usize,
    omega_at: MatrixField,
    d_omega_at: Option<MatrixFieldDerivative>,
}

impl std::fmt::Debug for FormField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormField").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl FormField {
    pub fn new(
        dim: usize,
        omega_at: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self, ConnectionError> {
        if dim == 0 || dim % 2 != 0 {
            return Err(ConnectionError::InvalidArgument(format!(
                "form field dimension must be even and positive, got {dim}"
            )));
        }
        Ok(FormField { dim, omega_at: Arc::new(omega_at), d_omega_at: None })
    }

    /// Attaches an analytic derivative `x ↦ [∂_1 Ω(x), ..., ∂_{2m} Ω(x)]`.
    pub fn with_derivative(
        mut self,
        d_omega_at: impl Fn(&DVector<f64>) -> Vec<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.d_omega_at = Some(Arc::new(d_omega_at));
        self
    }

    /// The constant canonical field `Ω(x) ≡ [[0, I], [-I, 0]]`.
    pub fn canonical(m: usize) -> Self {
        let omega = SymplecticForm::standard(m).expect("m >= 1").omega().clone();
        FormField::constant(omega).expect("canonical form is valid")
    }

    /// A constant field with an exact zero derivative.
    pub fn constant(omega: DMatrix<f64>) -> Result<Self, ConnectionError> {
        let form = SymplecticForm::new(omega)
            .map_err(|e| ConnectionError::InvalidArgument(e.to_string()))?;
        let dim = form.dim();
        let omega = form.omega().clone();
        let zeros: Vec<DMatrix<f64>> = (0..dim).map(|_| DMatrix::zeros(dim, dim)).collect();
        Ok(FormField {
            dim,
            omega_at: Arc::new(move |_| omega.clone()),
            d_omega_at: Some(Arc::new(move |_| zeros.clone())),
        })
    }

    /// `α(x) · Ω_can` for the polynomial
    /// `α(x) = c + Σ l_i x_i + Σ q_i x_i²`, with analytic derivatives.
    pub fn scalar_scaled(
        m: usize,
        constant: f64,
        linear: Vec<f64>,
        quadratic_diag: Vec<f64>,
    ) -> Result<Self, ConnectionError> {
        let dim = 2 * m;
        if linear.len() != dim || quadratic_diag.len() != dim {
            return Err(ConnectionError::InvalidArgument(format!(
                "scalar-scaled field on R^{dim} needs {dim} linear and quadratic coefficients"
            )));
        }
        let omega_can = SymplecticForm::standard(m)
            .map_err(|e| ConnectionError::InvalidArgument(e.to_string()))?
            .omega()
            .clone();
        let alpha = {
            let (linear, quadratic) = (linear.clone(), quadratic_diag.clone());
            move |x: &DVector<f64>| {
                let mut a = constant;
                for i in 0..x.len() {
                    a += linear[i] * x[i] + quadratic[i] * x[i] * x[i];
                }
                a
            }
        };
        let omega_for_values = omega_can.clone();
        let field = FormField::new(dim, move |x| &omega_for_values * alpha(x))?;
        Ok(field.with_derivative(move |x| {
            (0..dim)
                .map(|i| &omega_can * (linear[i] + 2.0 * quadratic_diag[i] * x[i]))
                .collect()
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates `Ω(x)`, enforcing exact skewness and invertibility.
    pub fn omega_at(&self, x: &DVector<f64>) -> Result<DMatrix<f64>, ConnectionError> {
        let omega = (self.omega_at)(x);
        if omega.nrows() != self.dim || omega.ncols() != self.dim {
            return Err(ConnectionError::InvalidArgument(format!(
                "form callable returned a {}x{} matrix in dimension {}",
                omega.nrows(),
                omega.ncols(),
                self.dim
            )));
        }
        for i in 0..self.dim {
            for j in 0..self.dim {
                if omega[(i, j)] + omega[(j, i)] != 0.0 {
                    return Err(ConnectionError::DegenerateForm { at: f64::NAN });
                }
            }
        }
        Ok(omega)
    }

    /// Directional derivatives `∂_i Ω(x)`, analytic or by central
    /// differences.
    pub fn d_omega_at(&self, x: &DVector<f64>) -> Result<Vec<DMatrix<f64>>, ConnectionError> {
        if let Some(d) = &self.d_omega_at {
            let ds = d(x);
            if ds.len() != self.dim {
                return Err(ConnectionError::InvalidArgument(format!(
                    "derivative callable returned {} slices, expected {}",
                    ds.len(),
                    self.dim
                )));
            }
            return Ok(ds);
        }
        let h = f64::EPSILON.cbrt() * (1.0 + x.norm());
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let op = (self.omega_at)(&xp);
            let om = (self.omega_at)(&xm);
            out.push((op - om) / (2.0 * h));
        }
        Ok(out)
    }

    /// `ω(x)(u, v) = (Ω(x) u, v)`.
    pub fn pairing(&self, x: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64, ConnectionError> {
        Ok((self.omega_at(x)? * u).dot(v))
    }

    /// Sampled finite-difference exterior derivative: the largest cyclic
    /// sum `∂_i ω_{jk} + ∂_j ω_{ki} + ∂_k ω_{ij}` over all index triples
    /// at the given point.
    pub fn d_omega_residual(&self, x: &DVector<f64>) -> Result<(f64, f64), ConnectionError> {
        let d = self.d_omega_at(x)?;
        // ω_{jk}(x) = (Ω(x) e_j, e_k) = Ω_{kj}(x)
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for sl in &d {
            scale = scale.max(sl.amax());
        }
        let n = self.dim;
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let cyc = d[i][(k, j)] + d[j][(i, k)] + d[k][(j, i)];
                    worst = worst.max(cyc.abs());
                }
            }
        }
        Ok((worst, scale))
    }
}

/// A parametrized `C¹` curve with velocity.
#[derive(Clone)]
pub struct Curve {
    x_at: Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>,
    dx_at: Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>,
    a: f64,
    b: f64,
}

impl std::fmt::Debug for Curve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Curve").field("a", &self.a).field("b", &self.b).finish_non_exhaustive()
    }
}

impl Curve {
    pub fn new(
        x_at: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
        dx_at: impl Fn(f64) -> DVector<f64> + Send + Sync + 'static,
        interval: (f64, f64),
    ) -> Result<Self, ConnectionError> {
        let (a, b) = interval;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(ConnectionError::InvalidArgument(format!(
                "curve interval [{a}, {b}] is not a proper finite interval"
            )));
        }
        let c = Curve { x_at: Arc::new(x_at), dx_at: Arc::new(dx_at), a, b };
        c.spot_check()?;
        Ok(c)
    }

    /// Straight segment from `from` to `to` on `[0, 1]`.
    pub fn segment(from: DVector<f64>, to: DVector<f64>) -> Result<Self, ConnectionError> {
        if from.len() != to.len() {
            return Err(ConnectionError::InvalidArgument(
                "segment endpoints have different dimensions".into(),
            ));
        }
        let dir = &to - &from;
        let dir2 = dir.clone();
        Curve::new(
            move |t| &from + &dir * t,
            move |_| dir2.clone(),
            (0.0, 1.0),
        )
    }

    fn spot_check(&self) -> Result<(), ConnectionError> {
        let h = f64::EPSILON.cbrt();
        let mut scale = 1.0f64;
        let mut worst = 0.0f64;
        for k in 1..=7 {
            let t = self.a + (self.b - self.a) * k as f64 / 8.0;
            let x = (self.x_at)(t);
            let dx = (self.dx_at)(t);
            if !x.iter().all(|c| c.is_finite()) || !dx.iter().all(|c| c.is_finite()) {
                return Err(ConnectionError::InvalidArgument(
                    "curve callables returned non-finite values".into(),
                ));
            }
            let step = h * (1.0 + t.abs());
            let fd = ((self.x_at)(t + step) - (self.x_at)(t - step)) / (2.0 * step);
            worst = worst.max((fd - &dx).norm());
            scale = scale.max(dx.norm());
        }
        if worst > 1e-4 * scale {
            return Err(ConnectionError::InvalidArgument(format!(
                "curve velocity disagrees with finite differences of the position \
                 (residual {worst:.3e} vs scale {scale:.3e})"
            )));
        }
        Ok(())
    }

    pub fn start(&self) -> DVector<f64> {
        (self.x_at)(self.a)
    }

    pub fn end(&self) -> DVector<f64> {
        (self.x_at)(self.b)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn position(&self, t: f64) -> DVector<f64> {
        (self.x_at)(t)
    }

    pub fn velocity(&self, t: f64) -> DVector<f64> {
        (self.dx_at)(t)
    }
}

/// A list of tangent vectors anchored at a base point.
#[derive(Debug, Clone)]
pub struct Frame {
    pub base: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl Frame {
    pub fn new(base: DVector<f64>, vectors: DMatrix<f64>) -> Result<Self, ConnectionError> {
        if vectors.nrows() != base.len() {
            return Err(ConnectionError::InvalidArgument(format!(
                "frame vectors live in R^{} but the base point in R^{}",
                vectors.nrows(),
                base.len()
            )));
        }
        Ok(Frame { base, vectors })
    }

    pub fn len(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.ncols() == 0
    }
}

/// Conservation certificate of a parallel transport.
#[derive(Debug, Clone)]
pub struct ConservationReport {
    /// `ω(x(a))(ξ_i, ξ_j)` before transport.
    pub pairing_start: DMatrix<f64>,
    /// `ω(x(b))(ξ_i, ξ_j)` after transport.
    pub pairing_end: DMatrix<f64>,
    /// Largest `|end - start|` over all pairs.
    pub max_drift: f64,
    /// Sampled closedness residual of the field and its scale.
    pub closedness_residual: f64,
}

/// `Γ(x)(h, ξ)`: the connection applied to a direction and a vector.
pub fn christoffel(
    field: &FormField,
    x: &DVector<f64>,
    h: &DVector<f64>,
    xi: &DVector<f64>,
) -> Result<DVector<f64>, ConnectionError> {
    let op = christoffel_operator(field, x, h)?;
    Ok(op * xi)
}

/// The matrix `ξ ↦ Γ(x)(h, ξ)`: `-Ω(x)⁻¹ C` with
/// `C_{ij} = Σ_r (∂_i Ω)_{rj} h_r`.
pub fn christoffel_operator(
    field: &FormField,
    x: &DVector<f64>,
    h: &DVector<f64>,
) -> Result<DMatrix<f64>, ConnectionError> {
    let n = field.dim();
    let omega = field.omega_at(x)?;
    let d = field.d_omega_at(x)?;
    let mut c = DMatrix::zeros(n, n);
    for i in 0..n {
        // row i of C: (∂_i Ω)ᵀ h gives the entries over j
        let row = d[i].transpose() * h;
        for j in 0..n {
            c[(i, j)] = row[j];
        }
    }
    let inv = omega
        .lu()
        .solve(&c)
        .ok_or(ConnectionError::DegenerateForm { at: f64::NAN })?;
    Ok(-inv)
}

/// Parallel transport of a frame along a curve by classical RK4 with
/// uniform steps, together with the conservation certificate.
pub fn parallel_transport(
    field: &FormField,
    curve: &Curve,
    frame: &Frame,
    steps: usize,
) -> Result<(Frame, ConservationReport), ConnectionError> {
    if steps == 0 {
        return Err(ConnectionError::InvalidArgument("steps must be positive".into()));
    }
    if frame.vectors.nrows() != field.dim() {
        return Err(ConnectionError::InvalidArgument(format!(
            "frame dimension {} does not match the field dimension {}",
            frame.vectors.nrows(),
            field.dim()
        )));
    }
    let (a, b) = curve.interval();
    let start = curve.start();
    if (&frame.base - &start).norm() > 1e-9 * (1.0 + start.norm()) {
        return Err(ConnectionError::InvalidArgument(
            "frame is not based at the curve start".into(),
        ));
    }
    let closedness_residual = check_closedness_along(field, |rng| {
        let t = rng.gen_range(a..b);
        curve.position(t)
    })?;

    let gamma = |t: f64, y: &DMatrix<f64>| -> Result<DMatrix<f64>, ConnectionError> {
        let x = curve.position(t);
        let op = christoffel_operator(field, &x, &curve.velocity(t)).map_err(|e| match e {
            ConnectionError::DegenerateForm { .. } => ConnectionError::DegenerateForm { at: t },
            other => other,
        })?;
        Ok(op * y)
    };

    let mut y = frame.vectors.clone();
    let dt = (b - a) / steps as f64;
    for k in 0..steps {
        let t = a + k as f64 * dt;
        let k1 = gamma(t, &y)?;
        let k2 = gamma(t + 0.5 * dt, &(&y + &k1 * (0.5 * dt)))?;
        let k3 = gamma(t + 0.5 * dt, &(&y + &k2 * (0.5 * dt)))?;
        let k4 = gamma(t + dt, &(&y + &k3 * dt))?;
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }

    let pairing_start = gram(field, &start, &frame.vectors)?;
    let end = curve.end();
    let pairing_end = gram(field, &end, &y)?;
    let max_drift = (&pairing_end - &pairing_start).amax();
    let transported = Frame::new(end, y)?;
    Ok((
        transported,
        ConservationReport { pairing_start, pairing_end, max_drift, closedness_residual },
    ))
}

fn gram(
    field: &FormField,
    x: &DVector<f64>,
    vectors: &DMatrix<f64>,
) -> Result<DMatrix<f64>, ConnectionError> {
    let omega = field.omega_at(x)?;
    Ok((omega * vectors).transpose() * vectors)
}

/// Samples the finite-difference exterior derivative at 20 points drawn
/// by the supplied sampler; rejects the field when `dω` does not vanish.
fn check_closedness_along(
    field: &FormField,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> DVector<f64>,
) -> Result<f64, ConnectionError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1ab1e);
    let mut worst = 0.0f64;
    let mut scale = 1.0f64;
    for _ in 0..20 {
        let x = sample(&mut rng);
        let (res, sc) = field.d_omega_residual(&x)?;
        worst = worst.max(res);
        scale = scale.max(sc);
    }
    let tol = CLOSED_TOL * scale;
    if worst > tol {
        return Err(ConnectionError::NotClosed { residual: worst, tol });
    }
    Ok(worst)
}

// ---------------------------------------------------------------------
// Kato transport of projector paths.
// ---------------------------------------------------------------------

/// A path of orthogonal projectors on `[0, 1]`.
#[derive(Clone)]
pub struct ProjectorPath {
    n: usize,
    p_at: Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>,
    dp_at: Option<Arc<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>>,
}

impl std::fmt::Debug for ProjectorPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectorPath").field("n", &self.n).finish_non_exhaustive()
    }
}

impl ProjectorPath {
    pub fn new(n: usize, p_at: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        ProjectorPath { n, p_at: Arc::new(p_at), dp_at: None }
    }

    pub fn with_derivative(
        mut self,
        dp_at: impl Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.dp_at = Some(Arc::new(dp_at));
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn projector(&self, t: f64) -> DMatrix<f64> {
        (self.p_at)(t)
    }

    /// `P'(t)`, analytic or by central differences.
    pub fn derivative(&self, t: f64) -> DMatrix<f64> {
        if let Some(dp) = &self.dp_at {
            return dp(t);
        }
        let h = f64::EPSILON.cbrt() * (1.0 + t.abs());
        ((self.p_at)(t + h) - (self.p_at)(t - h)) / (2.0 * h)
    }

    fn validate_at(&self, t: f64) -> Result<usize, ConnectionError> {
        let p = self.projector(t);
        let sym = (&p - p.transpose()).amax();
        let idem = (&p * &p - &p).amax();
        let residual = sym.max(idem);
        if residual > PROJ_PATH_TOL {
            return Err(ConnectionError::NotAProjector { t, residual });
        }
        let sv = symplin::singular_values(&p);
        Ok(sv.iter().filter(|&&s| s > 0.5).count())
    }
}

/// Result of a Kato transport.
#[derive(Debug, Clone)]
pub struct KatoReport {
    /// The transported isomorphism `U(1)`.
    pub u: DMatrix<f64>,
    /// `‖UᵀU - I‖₂`.
    pub orthogonality_residual: f64,
    /// `‖P(1)U - U P(0)‖₂`.
    pub intertwining_residual: f64,
}

/// Integrates `dU/dt = [P'(t), P(t)] U` with RK4 from `U(0) = I`,
/// checking the projector invariants and rank constancy along the way.
pub fn kato_transport(path: &ProjectorPath, steps: usize) -> Result<KatoReport, ConnectionError> {
    if steps == 0 {
        return Err(ConnectionError::InvalidArgument("steps must be positive".into()));
    }
    let n = path.dim();
    let rank0 = path.validate_at(0.0)?;
    let generator = |t: f64| -> DMatrix<f64> {
        let p = path.projector(t);
        let dp = path.derivative(t);
        &dp * &p - &p * &dp
    };
    let mut u = DMatrix::<f64>::identity(n, n);
    let dt = 1.0 / steps as f64;
    // rank is checked on a coarse grid plus every step start for short runs
    let check_every = (steps / 64).max(1);
    for k in 0..steps {
        let t = k as f64 * dt;
        if k % check_every == 0 {
            let r = path.validate_at(t)?;
            if r != rank0 {
                return Err(ConnectionError::RankJump { t, rank_start: rank0, rank_found: r });
            }
        }
        let k1 = generator(t) * &u;
        let k2 = generator(t + 0.5 * dt) * (&u + &k1 * (0.5 * dt));
        let k3 = generator(t + 0.5 * dt) * (&u + &k2 * (0.5 * dt));
        let k4 = generator(t + dt) * (&u + &k3 * dt);
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    let rank1 = path.validate_at(1.0)?;
    if rank1 != rank0 {
        return Err(ConnectionError::RankJump { t: 1.0, rank_start: rank0, rank_found: rank1 });
    }
    let orthogonality_residual =
        symplin::spectral_norm(&(u.transpose() * &u - DMatrix::<f64>::identity(n, n)));
    let p1 = path.projector(1.0);
    let p0 = path.projector(0.0);
    let intertwining_residual = symplin::spectral_norm(&(&p1 * &u - &u * &p0));
    Ok(KatoReport { u, orthogonality_residual, intertwining_residual })
}

// ---------------------------------------------------------------------
// Lagrangian frame fields along rays.
// ---------------------------------------------------------------------

/// A certified symplectic frame at one ray endpoint.
#[derive(Debug, Clone)]
pub struct RayFrame {
    pub point: DVector<f64>,
    /// Transported basis of the Lagrangian subspace, tangent to it.
    pub e: DMatrix<f64>,
    /// Completed dual vectors with `ω(l)(e_i, f_j) = δ_{ij}`.
    pub f: DMatrix<f64>,
    /// Largest distance of a transported e-vector from the subspace.
    pub tangency_residual: f64,
    /// Largest `|ω(l)(e_i, f_j) - δ_{ij}|`.
    pub duality_residual: f64,
    /// Largest `|ω(l)(e_i, e_j)|` and `|ω(l)(f_i, f_j)|`.
    pub isotropy_residual: f64,
}

/// Transports the bases of a Lagrangian subspace and of a complementary
/// Lagrangian along the rays `t ↦ t·l`, certifies tangency, and
/// completes a symplectic frame at each requested point.
pub fn lagrangian_frame_field(
    field: &FormField,
    l_hat: &Subspace,
    f0: &DMatrix<f64>,
    points: &[DVector<f64>],
    steps: usize,
) -> Result<Vec<RayFrame>, ConnectionError> {
    let n = field.dim();
    let m = n / 2;
    if l_hat.ambient_dim() != n || l_hat.dim() != m {
        return Err(ConnectionError::InvalidArgument(format!(
            "subspace must be {m}-dimensional in R^{n}"
        )));
    }
    if f0.nrows() != n || f0.ncols() != m {
        return Err(ConnectionError::InvalidArgument(format!(
            "complementary basis must be {n}x{m}"
        )));
    }
    let origin = DVector::zeros(n);
    let form0 = SymplecticForm::new(field.omega_at(&origin)?)
        .map_err(|e| ConnectionError::InvalidArgument(e.to_string()))?;
    for (name, basis) in [("l_hat", l_hat.basis()), ("f0", f0)] {
        let class = classify_subspace(&form0, &Subspace::new(basis.clone())?)?;
        if !class.is_lagrangian() {
            return Err(ConnectionError::InvalidArgument(format!(
                "{name} is not Lagrangian at the origin (verdict {})",
                class.kind.as_str()
            )));
        }
    }

    let proj = l_hat.projector();
    let mut frames = Vec::with_capacity(points.len());
    for l in points {
        if l.len() != n {
            return Err(ConnectionError::InvalidArgument(format!(
                "point dimension {} does not match the field dimension {n}",
                l.len()
            )));
        }
        let off = (l - &proj * l).norm();
        if off > RAY_TOL * (1.0 + l.norm()) {
            return Err(ConnectionError::InvalidArgument(format!(
                "point is not inside the Lagrangian subspace (offset {off:.3e})"
            )));
        }
        // ω(tl) must vanish on the subspace along the whole ray.
        let mut restriction = 0.0f64;
        for k in 0..=4 {
            let x = l * (k as f64 / 4.0);
            let omega = field.omega_at(&x)?;
            let pair = (&omega * l_hat.basis()).transpose() * l_hat.basis();
            restriction = restriction.max(pair.amax());
        }
        let scale = 1.0 + l.norm();
        if restriction > RAY_TOL * scale {
            return Err(ConnectionError::InvarianceViolation {
                residual: restriction,
                tol: RAY_TOL * scale,
            });
        }

        let (e_l, f_l) = if l.norm() == 0.0 {
            (l_hat.basis().clone(), f0.clone())
        } else {
            let curve = Curve::segment(origin.clone(), l.clone())?;
            let mut joint = DMatrix::zeros(n, 2 * m);
            joint.view_mut((0, 0), (n, m)).copy_from(l_hat.basis());
            joint.view_mut((0, m), (n, m)).copy_from(f0);
            let frame = Frame::new(origin.clone(), joint)?;
            let (moved, _) = parallel_transport(field, &curve, &frame, steps)?;
            (
                moved.vectors.view((0, 0), (n, m)).into_owned(),
                moved.vectors.view((0, m), (n, m)).into_owned(),
            )
        };

        // (A.27): transported subspace vectors stay tangent to it.
        let mut tangency_residual = 0.0f64;
        for c in 0..m {
            let col = e_l.column(c).into_owned();
            let res = (&col - &proj * &col).norm() / col.norm().max(1e-300);
            tangency_residual = tangency_residual.max(res);
        }
        if tangency_residual > RAY_TOL {
            return Err(ConnectionError::InvarianceViolation {
                residual: tangency_residual,
                tol: RAY_TOL,
            });
        }

        // Complete to a symplectic frame at l: solve the dual-basis
        // system against ω(l) and orient so that ω(e_i, f_j) = δ_ij.
        let form_l = SymplecticForm::new(field.omega_at(l)?)
            .map_err(|_| ConnectionError::DegenerateForm { at: f64::NAN })?;
        let mut gram = DMatrix::zeros(m, m);
        for k in 0..m {
            for s in 0..m {
                gram[(k, s)] =
                    form_l.pairing(&f_l.column(k).into_owned(), &e_l.column(s).into_owned());
            }
        }
        let a = gram
            .lu()
            .solve(&DMatrix::identity(m, m))
            .ok_or(symplin::SymplinError::TransversalityFailure)?;
        let f_dual = -(&f_l * a.transpose());

        let mut duality_residual = 0.0f64;
        let mut isotropy_residual = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let ef = form_l.pairing(&e_l.column(i).into_owned(), &f_dual.column(j).into_owned());
                let delta = if i == j { 1.0 } else { 0.0 };
                duality_residual = duality_residual.max((ef - delta).abs());
                let ee = form_l.pairing(&e_l.column(i).into_owned(), &e_l.column(j).into_owned());
                let ff =
                    form_l.pairing(&f_dual.column(i).into_owned(), &f_dual.column(j).into_owned());
                isotropy_residual = isotropy_residual.max(ee.abs()).max(ff.abs());
            }
        }
        frames.push(RayFrame {
            point: l.clone(),
            e: e_l,
            f: f_dual,
            tangency_residual,
            duality_residual,
            isotropy_residual,
        });
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn conservation_field() -> FormField {
        // (1 + x₁²/2) · Ω_can on R²
        FormField::scalar_scaled(1, 1.0, vec![0.0, 0.0], vec![0.5, 0.0]).unwrap()
    }

    fn fd_only(field: &FormField) -> FormField {
        let mut f = field.clone();
        f.d_omega_at = None;
        f
    }

    #[test]
    fn christoffel_vanishes_for_constant_field() {
        let field = FormField::canonical(2);
        let x = DVector::from_column_slice(&[0.3, -0.2, 1.0, 0.5]);
        let h = DVector::from_column_slice(&[1.0, 2.0, -1.0, 0.3]);
        let xi = DVector::from_column_slice(&[0.5, -0.5, 0.25, 1.0]);
        let g = christoffel(&field, &x, &h, &xi).unwrap();
        assert_eq!(g.amax(), 0.0);
    }

    #[test]
    fn christoffel_matches_symbolic_gradient_for_scalar_field() {
        // Ω(x) = α(x) J with J = [[0,1],[-1,0]] gives
        // Γ(h, ξ) = ((Jξ, h)/α) · J∇α.
        let field = conservation_field();
        let xs = [
            DVector::from_column_slice(&[0.4, -0.7]),
            DVector::from_column_slice(&[-1.2, 0.3]),
        ];
        let h = DVector::from_column_slice(&[0.8, -0.1]);
        let xi = DVector::from_column_slice(&[-0.6, 1.1]);
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        for x in &xs {
            let alpha = 1.0 + 0.5 * x[0] * x[0];
            let grad = DVector::from_column_slice(&[x[0], 0.0]);
            let jxi = &j * &xi;
            let expected = &j * &grad * (jxi.dot(&h) / alpha);
            let got = christoffel(&field, x, &h, &xi).unwrap();
            assert_relative_eq!((got.clone() - &expected).norm(), 0.0, epsilon = 1e-12);
            // finite-difference derivative path agrees at fd accuracy
            let got_fd = christoffel(&fd_only(&field), x, &h, &xi).unwrap();
            assert!((got_fd - &expected).norm() < 1e-8);
        }
    }

    #[test]
    fn christoffel_antisymmetry_in_direction_and_vector() {
        let field = conservation_field();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let x = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let h = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let xi = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
            let a = christoffel(&field, &x, &h, &xi).unwrap();
            let b = christoffel(&field, &x, &xi, &h).unwrap();
            assert!((a + b).norm() < 1e-12);
        }
    }

    #[test]
    fn flat_transport_is_bitwise_identity() {
        let field = FormField::canonical(1);
        let curve = Curve::segment(
            DVector::from_column_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[1.0, 0.5]),
        )
        .unwrap();
        let vectors = DMatrix::from_row_slice(2, 2, &[1.0, 0.25, -0.5, 2.0]);
        let frame = Frame::new(curve.start(), vectors.clone()).unwrap();
        let (moved, report) = parallel_transport(&field, &curve, &frame, 13).unwrap();
        assert_eq!(moved.vectors, vectors);
        assert_eq!(report.max_drift, 0.0);
    }

    #[test]
    fn transport_matches_closed_form_solution() {
        // On the segment (0,0) -> (1,0) with α = 1 + t²/2 the transported
        // e₂-component scales by 1/α, so e₂ arrives as (0, 2/3).
        let field = conservation_field();
        let curve = Curve::segment(
            DVector::from_column_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[1.0, 0.0]),
        )
        .unwrap();
        let frame = Frame::new(curve.start(), DMatrix::identity(2, 2)).unwrap();
        let (moved, report) = parallel_transport(&field, &curve, &frame, 400).unwrap();
        assert_relative_eq!(moved.vectors[(0, 0)], 1.0, epsilon = 1e-10);
        assert_relative_eq!(moved.vectors[(1, 0)], 0.0, epsilon = 1e-10);
        assert_relative_eq!(moved.vectors[(0, 1)], 0.0, epsilon = 1e-10);
        assert_relative_eq!(moved.vectors[(1, 1)], 2.0 / 3.0, epsilon = 1e-10);
        assert!(report.max_drift < 1e-10);
    }

    #[test]
    fn conservation_drift_decays_at_fourth_order() {
        let field = conservation_field();
        let curve = Curve::segment(
            DVector::from_column_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[1.0, 0.0]),
        )
        .unwrap();
        let frame = Frame::new(curve.start(), DMatrix::identity(2, 2)).unwrap();
        let drift = |steps: usize| {
            parallel_transport(&field, &curve, &frame, steps).unwrap().1.max_drift
        };
        let (d1, d2) = (drift(50), drift(100));
        let ratio = d1 / d2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio} outside [12, 20]");
    }

    #[test]
    fn holonomy_around_square_is_symplectic() {
        let field = conservation_field();
        let corners = [
            DVector::from_column_slice(&[0.0, 0.0]),
            DVector::from_column_slice(&[1.0, 0.0]),
            DVector::from_column_slice(&[1.0, 1.0]),
            DVector::from_column_slice(&[0.0, 1.0]),
            DVector::from_column_slice(&[0.0, 0.0]),
        ];
        let mut vectors = DMatrix::<f64>::identity(2, 2);
        for w in corners.windows(2) {
            let curve = Curve::segment(w[0].clone(), w[1].clone()).unwrap();
            let frame = Frame::new(w[0].clone(), vectors.clone()).unwrap();
            let (moved, _) = parallel_transport(&field, &curve, &frame, 200).unwrap();
            vectors = moved.vectors;
        }
        // holonomy H preserves ω at the base point
        let x0 = DVector::from_column_slice(&[0.0, 0.0]);
        let omega0 = field.omega_at(&x0).unwrap();
        let before = (&omega0 * DMatrix::<f64>::identity(2, 2)).transpose()
            * DMatrix::<f64>::identity(2, 2);
        let after = (&omega0 * &vectors).transpose() * &vectors;
        assert!((after - before).amax() < 1e-8);
    }

    #[test]
    fn transport_rejects_non_closed_field() {
        // ω₁₂ = 1 + x₃, ω₃₄ = 1: dω has the constant component
        // ∂₃ω₁₂ = 1, so the sampled check must reject the field.
        let field = FormField::new(4, |x| {
            let mut m = DMatrix::zeros(4, 4);
            let a = 1.0 + x[2];
            m[(0, 1)] = a;
            m[(1, 0)] = -a;
            m[(2, 3)] = 1.0;
            m[(3, 2)] = -1.0;
            m
        })
        .unwrap();
        let curve = Curve::segment(DVector::zeros(4), DVector::from_column_slice(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        let frame = Frame::new(curve.start(), DMatrix::identity(4, 4)).unwrap();
        assert!(matches!(
            parallel_transport(&field, &curve, &frame, 10),
            Err(ConnectionError::NotClosed { .. })
        ));
    }

    #[test]
    fn transport_accepts_closed_variable_field_in_r4() {
        // ω = d(x₁(1 + x₃²/4) dx₂ + x₃ dx₄) is exact, hence closed.
        let field = FormField::new(4, |x| {
            let mut m = DMatrix::zeros(4, 4);
            let c12 = 1.0 + x[2] * x[2] / 4.0;
            let c32 = x[0] * x[2] / 2.0;
            // Ω encodes ω(u, v) = uᵀ C v with (Ωu, v) = uᵀΩᵀv, so Ω = Cᵀ.
            m[(1, 0)] = c12;
            m[(0, 1)] = -c12;
            m[(1, 2)] = c32;
            m[(2, 1)] = -c32;
            m[(3, 2)] = 1.0;
            m[(2, 3)] = -1.0;
            m
        })
        .unwrap();
        let curve = Curve::segment(
            DVector::zeros(4),
            DVector::from_column_slice(&[0.5, 0.2, 0.4, -0.3]),
        )
        .unwrap();
        let frame = Frame::new(curve.start(), DMatrix::identity(4, 4)).unwrap();
        let (_, report) = parallel_transport(&field, &curve, &frame, 400).unwrap();
        assert!(report.max_drift < 1e-8, "drift {}", report.max_drift);
    }

    #[test]
    fn kato_constant_projector_is_identity() {
        let p0 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let path = ProjectorPath::new(2, move |_| p0.clone());
        let rep = kato_transport(&path, 100).unwrap();
        assert_eq!(rep.u, DMatrix::identity(2, 2));
        assert_eq!(rep.orthogonality_residual, 0.0);
    }

    #[test]
    fn kato_rotating_rank_one_projector_gives_rotation() {
        let theta = FRAC_PI_2;
        let path = ProjectorPath::new(2, move |t| {
            let (c, s) = ((theta * t).cos(), (theta * t).sin());
            DMatrix::from_row_slice(2, 2, &[c * c, c * s, c * s, s * s])
        });
        let rep = kato_transport(&path, 10_000).unwrap();
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(symplin::spectral_norm(&(&rep.u - &rot)) <= 1e-6);
        assert!(rep.orthogonality_residual <= 1e-8);
        assert!(rep.intertwining_residual <= 1e-8);
    }

    #[test]
    fn kato_intertwining_on_conjugated_paths() {
        // P(t) = R(t) P₀ R(t)ᵀ for a rotation path in R^4 keeps rank
        // constant by construction.
        let mut p0 = DMatrix::zeros(4, 4);
        p0[(0, 0)] = 1.0;
        p0[(2, 2)] = 1.0;
        let rot = |t: f64| {
            let (c1, s1) = ((0.9 * t).cos(), (0.9 * t).sin());
            let (c2, s2) = ((0.4 * t).cos(), (0.4 * t).sin());
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    c1, -s1, 0.0, 0.0, //
                    s1, c1, 0.0, 0.0, //
                    0.0, 0.0, c2, -s2, //
                    0.0, 0.0, s2, c2,
                ],
            )
        };
        let path = ProjectorPath::new(4, move |t| {
            let r = rot(t);
            &r * &p0 * r.transpose()
        });
        let rep = kato_transport(&path, 4000).unwrap();
        assert!(rep.orthogonality_residual <= 1e-8);
        assert!(rep.intertwining_residual <= 1e-8);
    }

    #[test]
    fn kato_rejects_rank_jump() {
        // rank grows from 1 to 2 past t = 1/2
        let path = ProjectorPath::new(2, |t| {
            if t < 0.5 {
                DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])
            } else {
                DMatrix::identity(2, 2)
            }
        });
        assert!(matches!(
            kato_transport(&path, 128),
            Err(ConnectionError::RankJump { .. })
        ));
    }

    #[test]
    fn frame_field_constant_form_returns_frame_at_origin() {
        let field = FormField::canonical(1);
        let l_hat = Subspace::coordinate_plane(2, &[0]);
        let f0 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let points = vec![
            DVector::from_column_slice(&[0.5, 0.0]),
            DVector::from_column_slice(&[-1.0, 0.0]),
        ];
        let frames = lagrangian_frame_field(&field, &l_hat, &f0, &points, 100).unwrap();
        for fr in &frames {
            assert_eq!(fr.e, l_hat.basis().clone());
            // ω(e₁, f) = δ requires f = -Ω_can e₂ orientation
            assert!(fr.duality_residual <= 1e-12);
            assert!(fr.tangency_residual <= 1e-12);
        }
        // same completed frame at every point
        assert_eq!(frames[0].f, frames[1].f);
    }

    #[test]
    fn frame_field_scalar_field_certifies_symplectic_frames() {
        let field = conservation_field();
        let l_hat = Subspace::coordinate_plane(2, &[0]);
        let f0 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let points = vec![
            DVector::from_column_slice(&[0.8, 0.0]),
            DVector::from_column_slice(&[0.25, 0.0]),
        ];
        let frames = lagrangian_frame_field(&field, &l_hat, &f0, &points, 500).unwrap();
        for fr in &frames {
            assert!(fr.tangency_residual <= 1e-8, "{}", fr.tangency_residual);
            assert!(fr.duality_residual <= 1e-8, "{}", fr.duality_residual);
            assert!(fr.isotropy_residual <= 1e-8, "{}", fr.isotropy_residual);
        }
    }

    #[test]
    fn frame_field_rejects_point_outside_subspace() {
        let field = FormField::canonical(1);
        let l_hat = Subspace::coordinate_plane(2, &[0]);
        let f0 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let points = vec![DVector::from_column_slice(&[0.5, 0.5])];
        assert!(matches!(
            lagrangian_frame_field(&field, &l_hat, &f0, &points, 100),
            Err(ConnectionError::InvalidArgument(_))
        ));
    }
}
