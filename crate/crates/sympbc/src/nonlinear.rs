//! The discretized model operator `F(u) = -u'' + g(u)` on `[0, 1]` and
//! the certificates that make its boundary-condition theory checkable.
//!
//! Grid functions live on `n` uniform nodes with `h = 1/(n-1)`. The
//! second derivative uses the 3-point interior stencil and 4-point
//! one-sided stencils at the endpoints; the discrete trace quadruple
//! uses 3-point one-sided first derivatives, so every certificate
//! converges at `O(h²)`. The zero-trace grid functions play the role of
//! the minimal domain: leaves of the translation group
//! `G(ζ, v) = {x + v, F(x + v)}` are exactly the equal-trace classes,
//! and boundary maps lifted through the trace are constant along
//! leaves by construction.
//!
//! A nonlinear boundary condition `Θ̂ : R⁴ → R²` is locally
//! self-adjoint at a trace `η` when `Θ̂'(η)` is surjective and
//! `Θ̂'(η) Ω̂⁻¹ Θ̂'(η)ᵀ = 0`; its kernel then spans a Lagrangian plane
//! of the boundary form. [`solve_bvp_lsa`] solves `-u'' + g(u) = f`
//! under such a condition with damped Newton and assembles a
//! certificate: Newton convergence, the sampled condition check at and
//! around the solution trace, and a continuum Green-identity residual
//! on analytic functions spanning the linearized kernel.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::boundary::{self, BoundaryForm, TestFunction, TraceVector};
use crate::quad::GaussLegendre;
use crate::symplin::{self, classify_subspace, Subspace};

/// Residual tolerance for the sampled local-self-adjointness check.
pub const LSA_TOL: f64 = 1e-9;
/// Tolerance on the solver certificate residuals.
pub const CERT_TOL: f64 = 1e-6;
/// Newton residual tolerance (max norm).
pub const NEWTON_TOL: f64 = 1e-10;
/// Newton iteration cap.
pub const NEWTON_MAX_ITER: usize = 50;
/// Smallest admissible Newton damping factor.
pub const NEWTON_DAMPING_FLOOR: f64 = 1.0 / (1 << 20) as f64;
/// Tolerance for comparing leaf identifiers (trace quadruples).
pub const LEAF_TOL: f64 = 1e-9;
/// Relative tolerance for Jacobian/finite-difference consistency.
pub const FD_CHECK_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum NonlinearError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("test function must have a vanishing trace quadruple (trace norm {residual:.3e})")]
    InvalidTestFunction { residual: f64 },
    #[error("point is not on the graph of the operator (interior residual {residual:.3e})")]
    NotOnGraph { residual: f64 },
    #[error("Newton did not converge in {iterations} iterations (last residual {last_residual:.3e})")]
    NoConvergence { iterations: usize, last_residual: f64, residual_history: Vec<f64> },
    #[error("boundary condition is not locally self-adjoint near the solution (residual {residual:.3e} vs tol {tol:.3e})")]
    NotLocallySelfAdjoint { residual: f64, tol: f64 },
    #[error(transparent)]
    Boundary(#[from] boundary::BoundaryError),
    #[error(transparent)]
    Symplin(#[from] symplin::SymplinError),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The grid realization of `F(u) = -u'' + g(u)`.
#[derive(Clone)]
pub struct ModelOperator {
    n: usize,
    h: f64,
    g: ScalarFn,
    dg: ScalarFn,
    x0: DVector<f64>,
}

impl std::fmt::Debug for ModelOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelOperator").field("n", &self.n).finish_non_exhaustive()
    }
}

impl ModelOperator {
    pub fn new(
        n: usize,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, NonlinearError> {
        if n < 8 {
            return Err(NonlinearError::InvalidArgument(format!(
                "grid needs at least 8 nodes, got {n}"
            )));
        }
        Ok(ModelOperator {
            n,
            h: 1.0 / (n - 1) as f64,
            g: Arc::new(g),
            dg: Arc::new(dg),
            x0: DVector::zeros(n),
        })
    }

    /// Replaces the distinguished base point (default: zero).
    pub fn with_base_point(mut self, x0: DVector<f64>) -> Result<Self, NonlinearError> {
        if x0.len() != self.n {
            return Err(NonlinearError::InvalidArgument(format!(
                "base point has {} nodes, grid has {}",
                x0.len(),
                self.n
            )));
        }
        if !self.apply(&x0).iter().all(|v| v.is_finite()) {
            return Err(NonlinearError::InvalidArgument(
                "operator is not finite at the base point".into(),
            ));
        }
        self.x0 = x0;
        Ok(self)
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn base_point(&self) -> &DVector<f64> {
        &self.x0
    }

    pub fn grid(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.h).collect()
    }

    /// Samples a function on the grid.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| f(i as f64 * self.h))
    }

    pub fn g_at(&self, u: f64) -> f64 {
        (self.g)(u)
    }

    pub fn dg_at(&self, u: f64) -> f64 {
        (self.dg)(u)
    }

    /// `-x''` on the grid: 3-point interior, 4-point one-sided ends.
    pub fn neg_second_difference(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let h2 = self.h * self.h;
        let mut y = DVector::zeros(n);
        y[0] = -(2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) / h2;
        for i in 1..n - 1 {
            y[i] = (-x[i - 1] + 2.0 * x[i] - x[i + 1]) / h2;
        }
        y[n - 1] = -(2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) / h2;
        y
    }

    /// `F(x) = -x'' + g(x)`.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = self.neg_second_difference(x);
        for i in 0..self.n {
            y[i] += (self.g)(x[i]);
        }
        y
    }

    /// The linearization `D(x) v = -v'' + g'(x)·v` applied to `v`.
    pub fn apply_linearized(&self, x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut y = self.neg_second_difference(v);
        for i in 0..self.n {
            y[i] += (self.dg)(x[i]) * v[i];
        }
        y
    }

    /// Dense matrix of `D(x)`.
    pub fn linearized_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let h2 = self.h * self.h;
        let mut a = DMatrix::zeros(n, n);
        a[(0, 0)] = -2.0 / h2;
        a[(0, 1)] = 5.0 / h2;
        a[(0, 2)] = -4.0 / h2;
        a[(0, 3)] = 1.0 / h2;
        for i in 1..n - 1 {
            a[(i, i - 1)] = -1.0 / h2;
            a[(i, i)] = 2.0 / h2;
            a[(i, i + 1)] = -1.0 / h2;
        }
        a[(n - 1, n - 1)] = -2.0 / h2;
        a[(n - 1, n - 2)] = 5.0 / h2;
        a[(n - 1, n - 3)] = -4.0 / h2;
        a[(n - 1, n - 4)] = 1.0 / h2;
        for i in 0..n {
            a[(i, i)] += (self.dg)(x[i]);
        }
        a
    }

    /// Trapezoidal inner product `(u, v)_h`.
    pub fn inner(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let n = self.n;
        let mut acc = 0.5 * (u[0] * v[0] + u[n - 1] * v[n - 1]);
        for i in 1..n - 1 {
            acc += u[i] * v[i];
        }
        self.h * acc
    }

    /// Product-space pairing `(a, b)_2 = (a₁, b₁)_h + (a₂, b₂)_h`.
    pub fn inner2(&self, a: (&DVector<f64>, &DVector<f64>), b: (&DVector<f64>, &DVector<f64>)) -> f64 {
        self.inner(a.0, b.0) + self.inner(a.1, b.1)
    }

    /// Discrete trace quadruple with 3-point one-sided derivatives.
    pub fn trace_of(&self, x: &DVector<f64>) -> TraceVector {
        let n = self.n;
        let du0 = (-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * self.h);
        let du1 = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) / (2.0 * self.h);
        TraceVector { u0: x[0], du0, u1: x[n - 1], du1 }
    }

    /// The `4 x n` matrix of the trace map.
    pub fn trace_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let mut t = DMatrix::zeros(4, n);
        t[(0, 0)] = 1.0;
        t[(1, 0)] = -3.0 / (2.0 * self.h);
        t[(1, 1)] = 4.0 / (2.0 * self.h);
        t[(1, 2)] = -1.0 / (2.0 * self.h);
        t[(2, n - 1)] = 1.0;
        t[(3, n - 1)] = 3.0 / (2.0 * self.h);
        t[(3, n - 2)] = -4.0 / (2.0 * self.h);
        t[(3, n - 3)] = 1.0 / (2.0 * self.h);
        t
    }

    /// Residual of the zero-trace conditions for `v`.
    pub fn trace_residual(&self, v: &DVector<f64>) -> f64 {
        let t = self.trace_of(v);
        t.as_vector().amax()
    }

    fn require_zero_trace(&self, v: &DVector<f64>) -> Result<(), NonlinearError> {
        let residual = self.trace_residual(v);
        let scale = 1.0 + v.amax() / self.h;
        if residual > LEAF_TOL * scale {
            return Err(NonlinearError::InvalidTestFunction { residual });
        }
        Ok(())
    }

    /// Forces the four discrete trace constraints to hold exactly by
    /// adjusting the constrained nodes (`v[1] = v[2]/4` and mirrored).
    pub fn make_zero_trace(&self, v: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut w = v.clone();
        w[0] = 0.0;
        w[n - 1] = 0.0;
        w[1] = w[2] / 4.0;
        w[n - 2] = w[n - 3] / 4.0;
        w
    }

    /// Orthonormal basis of the discrete zero-trace subspace.
    pub fn zero_trace_basis(&self) -> DMatrix<f64> {
        symplin::nullspace(&self.trace_matrix())
    }

    /// Graphs of the linearization at `x` restricted to the zero-trace
    /// subspace (minimal) and on the full grid space (maximal), as
    /// subspaces of `R^{2n}`.
    pub fn linearized_graphs(&self, x: &DVector<f64>) -> Result<(Subspace, Subspace), NonlinearError> {
        let n = self.n;
        let d = self.linearized_matrix(x);
        let z = self.zero_trace_basis();
        let k = z.ncols();
        let mut min_basis = DMatrix::zeros(2 * n, k);
        min_basis.view_mut((0, 0), (n, k)).copy_from(&z);
        min_basis.view_mut((n, 0), (n, k)).copy_from(&(&d * &z));
        let mut max_basis = DMatrix::zeros(2 * n, n);
        max_basis.view_mut((0, 0), (n, n)).copy_from(&DMatrix::identity(n, n));
        max_basis.view_mut((n, 0), (n, n)).copy_from(&d);
        Ok((Subspace::new(min_basis)?, Subspace::new(max_basis)?))
    }
}

/// A point `ζ = {x, F(x)}` of the discrete graph manifold.
#[derive(Debug, Clone)]
pub struct GraphPoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl GraphPoint {
    /// Assembles the graph point over `x`.
    pub fn over(op: &ModelOperator, x: DVector<f64>) -> Result<Self, NonlinearError> {
        if x.len() != op.grid_size() {
            return Err(NonlinearError::InvalidArgument(format!(
                "grid function has {} nodes, operator grid has {}",
                x.len(),
                op.grid_size()
            )));
        }
        let y = op.apply(&x);
        Ok(GraphPoint { x, y })
    }

    /// Checks `y = F(x)` on interior nodes.
    pub fn validate(&self, op: &ModelOperator) -> Result<(), NonlinearError> {
        let assembled = op.apply(&self.x);
        let mut worst = 0.0f64;
        for i in 1..op.grid_size() - 1 {
            worst = worst.max((self.y[i] - assembled[i]).abs());
        }
        let scale = 1.0 + assembled.amax();
        if worst > 1e-12 * scale {
            return Err(NonlinearError::NotOnGraph { residual: worst });
        }
        Ok(())
    }
}

/// Leaf identifier: the trace quadruple of the first component.
#[derive(Debug, Clone, Copy)]
pub struct LeafId {
    pub trace: TraceVector,
}

impl LeafId {
    pub fn of(op: &ModelOperator, zeta: &GraphPoint) -> Self {
        LeafId { trace: op.trace_of(&zeta.x) }
    }
}

/// Largest symmetry defect `|(D(x)v, w)_h - (v, D(x)w)_h|` over the
/// supplied zero-trace pairs.
pub fn gateaux_symmetry_check(
    op: &ModelOperator,
    x: &DVector<f64>,
    pairs: &[(DVector<f64>, DVector<f64>)],
) -> Result<f64, NonlinearError> {
    let mut worst = 0.0f64;
    for (v, w) in pairs {
        op.require_zero_trace(v)?;
        op.require_zero_trace(w)?;
        let dv = op.apply_linearized(x, v);
        let dw = op.apply_linearized(x, w);
        worst = worst.max((op.inner(&dv, w) - op.inner(v, &dw)).abs());
    }
    Ok(worst)
}

/// The translation group action `G(ζ, v) = {x + v, F(x + v)}` for a
/// zero-trace `v`.
pub fn group_action(
    op: &ModelOperator,
    zeta: &GraphPoint,
    v: &DVector<f64>,
) -> Result<GraphPoint, NonlinearError> {
    zeta.validate(op)?;
    op.require_zero_trace(v)?;
    GraphPoint::over(op, &zeta.x + v)
}

/// Leaves are equal-trace classes: true iff the trace quadruples agree
/// within the leaf tolerance.
pub fn same_leaf(op: &ModelOperator, z1: &GraphPoint, z2: &GraphPoint) -> bool {
    let t1 = op.trace_of(&z1.x).as_vector();
    let t2 = op.trace_of(&z2.x).as_vector();
    let scale = 1.0 + t1.amax().max(t2.amax());
    (t1 - t2).amax() <= LEAF_TOL * scale
}

/// Line integral of the rotated graph field
/// `η_v(ζ) = {-D(pr₁ζ)v, v}` around the triangle with the given
/// vertices, by Gauss–Legendre in each segment parameter. Vanishes for
/// closed contours because the field is exact.
pub fn contour_integrability_check(
    op: &ModelOperator,
    v: &DVector<f64>,
    triangle: &[GraphPoint; 3],
    nodes_per_side: usize,
) -> Result<f64, NonlinearError> {
    op.require_zero_trace(v)?;
    for zeta in triangle {
        zeta.validate(op)?;
    }
    let rule = GaussLegendre::new(nodes_per_side.max(2));
    let mut total = 0.0;
    for k in 0..3 {
        let a = &triangle[k];
        let b = &triangle[(k + 1) % 3];
        let dx = &b.x - &a.x;
        let dy = &b.y - &a.y;
        total += rule.integrate(0.0, 1.0, |t| {
            let xt = &a.x * (1.0 - t) + &b.x * t;
            let dv = op.apply_linearized(&xt, v);
            -op.inner(&dv, &dx) + op.inner(v, &dy)
        });
    }
    Ok(total.abs())
}

/// Telescoping potential `Ψ(ζ, v) = (v, F(pr₁ζ) - pr₂ζ)_h` of the
/// rotated graph field; the independent oracle for the contour check.
pub fn contour_potential(op: &ModelOperator, zeta: &GraphPoint, v: &DVector<f64>) -> f64 {
    let fx = op.apply(&zeta.x);
    op.inner(v, &(fx - &zeta.y))
}

/// Central-difference symplecticity defect of the group action: the
/// flow derivative is approximated along graph curves through `ζ` with
/// velocities `h_i = {w_i, D(x)w_i}` and compared with the exact
/// pairing `(J h₁, h₂)_2`. The defect decays like `eps²` and is
/// dominated by the differencing bias.
pub fn flow_symplectomorphism_check(
    op: &ModelOperator,
    zeta: &GraphPoint,
    v: &DVector<f64>,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
    eps: f64,
) -> Result<f64, NonlinearError> {
    zeta.validate(op)?;
    op.require_zero_trace(v)?;
    if !(eps > 0.0) {
        return Err(NonlinearError::InvalidArgument("eps must be positive".into()));
    }
    let shifted = &zeta.x + v;
    let flow_derivative = |w: &DVector<f64>| -> (DVector<f64>, DVector<f64>) {
        let fp = op.apply(&(&shifted + &(w * eps)));
        let fm = op.apply(&(&shifted - &(w * eps)));
        (w.clone(), (fp - fm) / (2.0 * eps))
    };
    let gh1 = flow_derivative(w1);
    let gh2 = flow_derivative(w2);
    let h1 = (w1.clone(), op.apply_linearized(&zeta.x, w1));
    let h2 = (w2.clone(), op.apply_linearized(&zeta.x, w2));
    // (J a, b)_2 = (a₁, b₂)_h - (a₂, b₁)_h
    let lhs = op.inner(&gh1.0, &gh2.1) - op.inner(&gh1.1, &gh2.0);
    let rhs = op.inner(&h1.0, &h2.1) - op.inner(&h1.1, &h2.0);
    Ok((lhs - rhs).abs())
}

/// A nonlinear boundary condition `Θ̂ : R⁴ → R²` with its Jacobian.
#[derive(Clone)]
pub struct NonlinearBC {
    theta_hat: Arc<dyn Fn(&TraceVector) -> [f64; 2] + Send + Sync>,
    jac: Arc<dyn Fn(&TraceVector) -> DMatrix<f64> + Send + Sync>,
}

impl std::fmt::Debug for NonlinearBC {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NonlinearBC").finish_non_exhaustive()
    }
}

impl NonlinearBC {
    pub fn new(
        theta_hat: impl Fn(&TraceVector) -> [f64; 2] + Send + Sync + 'static,
        jac: impl Fn(&TraceVector) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        NonlinearBC { theta_hat: Arc::new(theta_hat), jac: Arc::new(jac) }
    }

    /// The linear condition `Θ η = 0` for a `2 x 4` matrix.
    pub fn linear(theta: DMatrix<f64>) -> Result<Self, NonlinearError> {
        if theta.nrows() != 2 || theta.ncols() != 4 {
            return Err(NonlinearError::InvalidArgument(format!(
                "linear boundary condition needs a 2x4 matrix, got {}x{}",
                theta.nrows(),
                theta.ncols()
            )));
        }
        let t = theta.clone();
        Ok(NonlinearBC::new(
            move |eta| {
                let r = &t * eta.as_vector();
                [r[0], r[1]]
            },
            move |_| theta.clone(),
        ))
    }

    pub fn eval(&self, eta: &TraceVector) -> [f64; 2] {
        (self.theta_hat)(eta)
    }

    pub fn jacobian(&self, eta: &TraceVector) -> DMatrix<f64> {
        (self.jac)(eta)
    }

    /// Verifies the Jacobian against central differences of the map at
    /// the given traces; returns the worst relative defect.
    pub fn validate_at(&self, etas: &[TraceVector]) -> Result<f64, NonlinearError> {
        let step = f64::EPSILON.cbrt();
        let mut worst = 0.0f64;
        for eta in etas {
            let j = self.jacobian(eta);
            if j.nrows() != 2 || j.ncols() != 4 {
                return Err(NonlinearError::InvalidArgument(
                    "boundary condition Jacobian must be 2x4".into(),
                ));
            }
            let base = eta.as_vector();
            let scale = 1.0 + symplin::spectral_norm(&j);
            for k in 0..4 {
                let h = step * (1.0 + base[k].abs());
                let mut p = base.clone();
                let mut m = base.clone();
                p[k] += h;
                m[k] -= h;
                let tp = self.eval(&TraceVector::from_vector(&p)?);
                let tm = self.eval(&TraceVector::from_vector(&m)?);
                for r in 0..2 {
                    let fd = (tp[r] - tm[r]) / (2.0 * h);
                    worst = worst.max((fd - j[(r, k)]).abs() / scale);
                }
            }
        }
        if worst > FD_CHECK_TOL {
            return Err(NonlinearError::InvalidArgument(format!(
                "boundary-condition Jacobian disagrees with finite differences (relative defect {worst:.3e})"
            )));
        }
        Ok(worst)
    }
}

/// The lifted boundary map `Θ(ζ) = Θ̂(trace(pr₁ζ))`, constant along
/// leaves by construction.
#[derive(Debug, Clone)]
pub struct LiftedBc {
    bc: NonlinearBC,
}

/// Lifts a trace-space boundary map to graph points.
pub fn lift_bc(bc: &NonlinearBC) -> LiftedBc {
    LiftedBc { bc: bc.clone() }
}

impl LiftedBc {
    pub fn eval(&self, op: &ModelOperator, zeta: &GraphPoint) -> [f64; 2] {
        self.bc.eval(&op.trace_of(&zeta.x))
    }
}

/// Per-trace outcome of the local-self-adjointness conditions.
#[derive(Debug, Clone)]
pub struct LsaPointReport {
    pub trace: TraceVector,
    pub jacobian_rank: usize,
    /// `‖Θ̂'(η) Ω̂⁻¹ Θ̂'(η)ᵀ‖₂`.
    pub product_residual: f64,
    pub product_tol: f64,
    /// Cross-check: the kernel of `Θ̂'(η)` is a Lagrangian plane.
    pub kernel_lagrangian: bool,
    pub passes: bool,
}

/// Verdict of [`check_lsa_conditions`].
#[derive(Debug, Clone)]
pub struct LsaReport {
    pub passes: bool,
    pub max_residual: f64,
    pub points: Vec<LsaPointReport>,
}

/// Checks surjectivity of `Θ̂'` and the vanishing of
/// `Θ̂' Ω̂⁻¹ (Θ̂')ᵀ` at each sampled trace; the kernel of a passing
/// Jacobian spans a Lagrangian tangent plane (verified through the
/// subspace classifier).
pub fn check_lsa_conditions(
    bc: &NonlinearBC,
    sample_traces: &[TraceVector],
) -> Result<LsaReport, NonlinearError> {
    bc.validate_at(sample_traces)?;
    let form = BoundaryForm::standard();
    let omega_inv = form.symplectic_form().omega_inv();
    let mut points = Vec::with_capacity(sample_traces.len());
    let mut all_pass = true;
    let mut max_residual = 0.0f64;
    for eta in sample_traces {
        let j = bc.jacobian(eta);
        let rank = symplin::rank(&j);
        let product = &j * omega_inv * j.transpose();
        let product_residual = symplin::spectral_norm(&product);
        let jn = symplin::spectral_norm(&j);
        let product_tol = LSA_TOL * (1.0 + jn * jn);
        let kernel = Subspace::new(symplin::nullspace(&j))?;
        let kernel_lagrangian =
            classify_subspace(form.symplectic_form(), &kernel)?.is_lagrangian();
        let passes = rank == 2 && product_residual <= product_tol;
        all_pass &= passes;
        max_residual = max_residual.max(product_residual);
        points.push(LsaPointReport {
            trace: *eta,
            jacobian_rank: rank,
            product_residual,
            product_tol,
            kernel_lagrangian,
            passes,
        });
    }
    Ok(LsaReport { passes: all_pass, max_residual, points })
}

/// Certificate attached to a BVP solution.
#[derive(Debug, Clone)]
pub struct BvpCertificate {
    /// (i) Newton convergence.
    pub iterations: usize,
    pub final_residual: f64,
    pub newton_tol: f64,
    /// (ii) sampled condition check at and around the solution trace.
    pub lsa_residual: f64,
    pub lsa_tol: f64,
    /// (iii) continuum Green residual on the linearized-kernel pair and
    /// the kernel pairing itself.
    pub green_residual: f64,
    pub kernel_pairing: f64,
    pub cert_tol: f64,
    /// All three clauses hold.
    pub passes: bool,
}

/// A certified solution of `-u'' + g(u) = f` under `Θ̂(trace u) = 0`.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub grid: Vec<f64>,
    pub u: DVector<f64>,
    pub certificate: BvpCertificate,
}

/// Adjustable knobs of the BVP solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub newton_tol: f64,
    pub max_iterations: usize,
    pub damping_floor: f64,
    pub cert_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            newton_tol: NEWTON_TOL,
            max_iterations: NEWTON_MAX_ITER,
            damping_floor: NEWTON_DAMPING_FLOOR,
            cert_tol: CERT_TOL,
        }
    }
}

/// [`solve_bvp_lsa_with`] under the default options.
pub fn solve_bvp_lsa(
    op: &ModelOperator,
    bc: &NonlinearBC,
    f: &DVector<f64>,
) -> Result<BvpSolution, NonlinearError> {
    solve_bvp_lsa_with(op, bc, f, &SolverOptions::default())
}

/// Solves the two-point problem by damped Newton on the 3-point stencil
/// with the two boundary rows `Θ̂(trace u) = 0`, then certifies local
/// self-adjointness at the solution.
pub fn solve_bvp_lsa_with(
    op: &ModelOperator,
    bc: &NonlinearBC,
    f: &DVector<f64>,
    options: &SolverOptions,
) -> Result<BvpSolution, NonlinearError> {
    let n = op.grid_size();
    if f.len() != n {
        return Err(NonlinearError::InvalidArgument(format!(
            "forcing has {} nodes, grid has {n}",
            f.len()
        )));
    }
    let h2 = op.step() * op.step();
    let trace_matrix = op.trace_matrix();

    // Reject conditions that fail the local-self-adjointness check
    // already at the initial trace; the full neighborhood check runs
    // again at the solution.
    let initial_check = check_lsa_conditions(bc, &[op.trace_of(op.base_point())])?;
    if !initial_check.passes {
        let tol = initial_check.points.iter().map(|p| p.product_tol).fold(0.0, f64::max);
        return Err(NonlinearError::NotLocallySelfAdjoint {
            residual: initial_check.max_residual,
            tol,
        });
    }

    let residual = |u: &DVector<f64>| -> DVector<f64> {
        let mut r = DVector::zeros(n);
        let theta = bc.eval(&op.trace_of(u));
        r[0] = theta[0];
        r[n - 1] = theta[1];
        for i in 1..n - 1 {
            r[i] = (-u[i - 1] + 2.0 * u[i] - u[i + 1]) / h2 + op.g_at(u[i]) - f[i];
        }
        r
    };
    let jacobian = |u: &DVector<f64>| -> DMatrix<f64> {
        let mut jm = DMatrix::zeros(n, n);
        let jbc = bc.jacobian(&op.trace_of(u)) * &trace_matrix;
        jm.set_row(0, &jbc.row(0).into_owned());
        jm.set_row(n - 1, &jbc.row(1).into_owned());
        for i in 1..n - 1 {
            jm[(i, i - 1)] = -1.0 / h2;
            jm[(i, i)] = 2.0 / h2 + op.dg_at(u[i]);
            jm[(i, i + 1)] = -1.0 / h2;
        }
        jm
    };

    let mut u = op.base_point().clone();
    let mut history = Vec::new();
    let mut rn = residual(&u).amax();
    history.push(rn);
    let mut iterations = 0;
    while rn > options.newton_tol {
        if iterations >= options.max_iterations {
            return Err(NonlinearError::NoConvergence {
                iterations,
                last_residual: rn,
                residual_history: history,
            });
        }
        let r = residual(&u);
        let delta = jacobian(&u).lu().solve(&(-&r)).ok_or_else(|| {
            NonlinearError::NoConvergence {
                iterations,
                last_residual: rn,
                residual_history: history.clone(),
            }
        })?;
        let mut lambda = 1.0f64;
        let mut accepted = false;
        while lambda >= options.damping_floor {
            let candidate = &u + &delta * lambda;
            let cn = residual(&candidate).amax();
            if cn < rn {
                u = candidate;
                rn = cn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        iterations += 1;
        history.push(rn);
        if !accepted {
            return Err(NonlinearError::NoConvergence {
                iterations,
                last_residual: rn,
                residual_history: history,
            });
        }
    }

    // (ii) condition check at the solution trace and a ring around it.
    let eta_star = op.trace_of(&u);
    let mut samples = vec![eta_star];
    let radius = 0.1 * (1.0 + eta_star.as_vector().amax());
    for k in 0..4 {
        for sign in [-1.0, 1.0] {
            let mut p = eta_star.as_vector();
            p[k] += sign * radius;
            samples.push(TraceVector::from_vector(&p)?);
        }
    }
    let lsa = check_lsa_conditions(bc, &samples)?;
    let lsa_tol = lsa.points.iter().map(|p| p.product_tol).fold(0.0, f64::max);
    if !lsa.passes {
        return Err(NonlinearError::NotLocallySelfAdjoint {
            residual: lsa.max_residual,
            tol: lsa_tol,
        });
    }

    // (iii) continuum Green evidence on the linearized kernel.
    let jac_star = bc.jacobian(&eta_star);
    let kernel = symplin::nullspace(&jac_star);
    let (green_residual, kernel_pairing) = if kernel.ncols() == 2 {
        let k1 = TraceVector::from_vector(&kernel.column(0).into_owned())?;
        let k2 = TraceVector::from_vector(&kernel.column(1).into_owned())?;
        let v = TestFunction::hermite_cubic(&k1);
        let w = TestFunction::hermite_cubic(&k2);
        let rule = GaussLegendre::new(64);
        let grid = op.grid();
        let u_interp = |t: f64| -> f64 {
            let pos = (t / op.step()).floor();
            let i = (pos as usize).min(n - 2);
            let s = (t - grid[i]) / op.step();
            u[i] * (1.0 - s) + u[i + 1] * s
        };
        let c = |t: f64| op.dg_at(u_interp(t));
        let lv_w = rule.integrate_unit(|t| (-v.second_derivative(t) + c(t) * v.value(t)) * w.value(t));
        let v_lw = rule.integrate_unit(|t| v.value(t) * (-w.second_derivative(t) + c(t) * w.value(t)));
        let pairing = boundary::boundary_form(&k1, &k2);
        ((lv_w - v_lw - pairing).abs(), pairing.abs())
    } else {
        (f64::INFINITY, f64::INFINITY)
    };

    let passes = rn <= options.newton_tol
        && green_residual <= options.cert_tol
        && kernel_pairing <= options.cert_tol;
    Ok(BvpSolution {
        grid: op.grid(),
        u,
        certificate: BvpCertificate {
            iterations,
            final_residual: rn,
            newton_tol: options.newton_tol,
            lsa_residual: lsa.max_residual,
            lsa_tol,
            green_residual,
            kernel_pairing,
            cert_tol: options.cert_tol,
            passes,
        },
    })
}

/// Report of [`antiderivative_consistency`].
#[derive(Debug, Clone)]
pub struct AntiderivativeReport {
    /// `|Φ_path1(x)(v) - Φ_path2(x)(v)|`.
    pub path_difference: f64,
    /// `|Φ(x)(v) - (v, -x'' + g(x))|` along the first path.
    pub graph_residual: f64,
    pub phi_path1: f64,
    pub phi_path2: f64,
    /// Natural magnitude of the compared quantities.
    pub scale: f64,
}

/// Evaluates the antiderivative functional
/// `Φ(x)(v) = (v, F(x₀)) + ∫ (D(γ(s))v, γ'(s)) ds` along two polyline
/// paths of analytic functions from the base point to `x`, plus the
/// defect against the graph pairing `(v, -x'' + g(x))`.
///
/// All pairings are continuum `L²` integrals on analytic callables, so
/// a zero-trace `v` makes the summation-by-parts step exact and both
/// residuals sit at quadrature precision.
pub fn antiderivative_consistency(
    op: &ModelOperator,
    x: &TestFunction,
    v: &TestFunction,
    path1: &[TestFunction],
    path2: &[TestFunction],
    t_nodes: usize,
    s_nodes: usize,
) -> Result<AntiderivativeReport, NonlinearError> {
    let eta = boundary::trace(v)?;
    let trace_norm = eta.as_vector().amax();
    if trace_norm > LEAF_TOL {
        return Err(NonlinearError::InvalidTestFunction { residual: trace_norm });
    }
    if path1.is_empty() || path2.is_empty() {
        return Err(NonlinearError::InvalidArgument("paths must be non-empty".into()));
    }
    let sample_distance = |f: &TestFunction, g: &TestFunction| -> f64 {
        (0..=8)
            .map(|k| {
                let t = k as f64 / 8.0;
                (f.value(t) - g.value(t)).abs()
            })
            .fold(0.0, f64::max)
    };
    let start_gap = sample_distance(&path1[0], &path2[0]);
    let end_gap = sample_distance(path1.last().unwrap(), x).max(sample_distance(path2.last().unwrap(), x));
    if start_gap > 1e-9 || end_gap > 1e-9 {
        return Err(NonlinearError::InvalidArgument(format!(
            "paths must share the base point and end at x (gaps {start_gap:.3e}, {end_gap:.3e})"
        )));
    }

    let t_rule = GaussLegendre::new(t_nodes.max(2));
    let s_rule = GaussLegendre::new(s_nodes.max(2));
    // (v, F(w)) with F(w) = -w'' + g(w)
    let pair_with_f = |w: &TestFunction| -> f64 {
        t_rule.integrate_unit(|t| v.value(t) * (-w.second_derivative(t) + op.g_at(w.value(t))))
    };
    // (D(γ)v, δ) = ∫ (-v'' + g'(γ) v) δ dt
    let pair_linearized = |gamma: &TestFunction, delta: &TestFunction| -> f64 {
        t_rule.integrate_unit(|t| {
            (-v.second_derivative(t) + op.dg_at(gamma.value(t)) * v.value(t)) * delta.value(t)
        })
    };
    let phi_along = |path: &[TestFunction]| -> f64 {
        let mut phi = pair_with_f(&path[0]);
        for seg in path.windows(2) {
            let delta = TestFunction::affine_combination(-1.0, &seg[0], 1.0, &seg[1]);
            phi += s_rule.integrate(0.0, 1.0, |s| {
                let gamma = TestFunction::affine_combination(1.0 - s, &seg[0], s, &seg[1]);
                pair_linearized(&gamma, &delta)
            });
        }
        phi
    };

    let phi_path1 = phi_along(path1);
    let phi_path2 = phi_along(path2);
    let graph_value = pair_with_f(x);
    let scale = 1.0 + phi_path1.abs().max(phi_path2.abs()).max(graph_value.abs());
    Ok(AntiderivativeReport {
        path_difference: (phi_path1 - phi_path2).abs(),
        graph_residual: (phi_path1 - graph_value).abs(),
        phi_path1,
        phi_path2,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cubic_op(n: usize) -> ModelOperator {
        ModelOperator::new(n, |u| u * u * u, |u| 3.0 * u * u).unwrap()
    }

    fn linear_op(n: usize) -> ModelOperator {
        ModelOperator::new(n, |_| 0.0, |_| 0.0).unwrap()
    }

    fn zero_trace_bump(op: &ModelOperator) -> DVector<f64> {
        op.make_zero_trace(&op.sample(|t| (t * (1.0 - t)).powi(2)))
    }

    #[test]
    fn trace_of_sampled_quadratic() {
        let op = linear_op(64);
        let x = op.sample(|t| t * t);
        let tr = op.trace_of(&x);
        assert_relative_eq!(tr.u0, 0.0, epsilon = 1e-13);
        assert_relative_eq!(tr.du0, 0.0, epsilon = 1e-12);
        assert_relative_eq!(tr.u1, 1.0, epsilon = 1e-13);
        // one-sided 3-point derivative is exact on quadratics
        assert_relative_eq!(tr.du1, 2.0, epsilon = 1e-11);
    }

    #[test]
    fn make_zero_trace_is_exact() {
        let op = cubic_op(48);
        let v = zero_trace_bump(&op);
        assert_eq!(op.trace_residual(&v), 0.0);
    }

    #[test]
    fn gateaux_symmetry_for_laplacian_and_cubic() {
        for op in [linear_op(64), cubic_op(64)] {
            let x = op.sample(|t| (2.0 * t).sin());
            let v = zero_trace_bump(&op);
            let w = op.make_zero_trace(&op.sample(|t| t * t * (1.0 - t).powi(3)));
            let dv = op.apply_linearized(&x, &v);
            let scale = op.inner(&dv, &dv).sqrt() * op.inner(&w, &w).sqrt() + 1.0;
            let worst = gateaux_symmetry_check(&op, &x, &[(v.clone(), w), (v.clone(), v.clone())])
                .unwrap();
            assert!(worst <= 1e-10 * scale, "worst {worst:.3e} vs scale {scale:.3e}");
        }
    }

    #[test]
    fn gateaux_rejects_nonzero_trace() {
        let op = linear_op(32);
        let x = op.sample(|_| 0.0);
        let bad = op.sample(|t| t);
        assert!(matches!(
            gateaux_symmetry_check(&op, &x, &[(bad.clone(), bad)]),
            Err(NonlinearError::InvalidTestFunction { .. })
        ));
    }

    #[test]
    fn group_action_law_and_identity() {
        let op = cubic_op(48);
        let zeta = GraphPoint::over(&op, op.sample(|t| t * (1.0 - t))).unwrap();
        let v1 = zero_trace_bump(&op);
        let v2 = op.make_zero_trace(&op.sample(|t| (std::f64::consts::PI * t).sin().powi(3)));

        let id = group_action(&op, &zeta, &DVector::zeros(48)).unwrap();
        assert_eq!(id.x, zeta.x);
        assert_eq!(id.y, zeta.y);

        let left = group_action(&op, &group_action(&op, &zeta, &v1).unwrap(), &v2).unwrap();
        let right = group_action(&op, &zeta, &(&v1 + &v2)).unwrap();
        // associativity of grid addition, up to reordering rounding
        assert!((&left.x - &right.x).amax() <= 4.0 * f64::EPSILON * right.x.amax());

        // pr₂ is F of pr₁ by construction
        left.validate(&op).unwrap();
    }

    #[test]
    fn leaves_are_equal_trace_classes() {
        let op = cubic_op(48);
        let zeta = GraphPoint::over(&op, op.sample(|t| t * (1.0 - t))).unwrap();
        let moved = group_action(&op, &zeta, &zero_trace_bump(&op)).unwrap();
        assert!(same_leaf(&op, &zeta, &moved));
        assert!(same_leaf(&op, &zeta, &zeta));

        let shifted = GraphPoint::over(&op, &zeta.x + op.sample(|t| t * t)).unwrap();
        assert!(!same_leaf(&op, &zeta, &shifted));
    }

    #[test]
    fn contour_integral_vanishes() {
        let op = cubic_op(48);
        let v = zero_trace_bump(&op);
        let z1 = GraphPoint::over(&op, op.sample(|t| t * (1.0 - t))).unwrap();
        let z2 = GraphPoint::over(&op, op.sample(|t| (2.0 * t).sin())).unwrap();
        let z3 = GraphPoint::over(&op, op.sample(|t| 0.3 * t + 0.1)).unwrap();
        let scale = 1.0
            + contour_potential(&op, &z2, &v).abs()
            + op.inner(&v, &v).sqrt() * (op.apply(&z1.x).amax() + z1.y.amax());

        // degenerate triangle: repeated vertex
        let degenerate = contour_integrability_check(&op, &v, &[z1.clone(), z2.clone(), z2.clone()], 32).unwrap();
        assert!(degenerate <= 1e-12 * scale);

        let full = contour_integrability_check(&op, &v, &[z1, z2, z3], 32).unwrap();
        assert!(full <= 1e-10 * scale, "loop {full:.3e} vs scale {scale:.3e}");
    }

    #[test]
    fn contour_linear_case_is_exact() {
        let op = linear_op(48);
        let v = zero_trace_bump(&op);
        let z1 = GraphPoint::over(&op, op.sample(|t| t)).unwrap();
        let z2 = GraphPoint::over(&op, op.sample(|t| 1.0 - t)).unwrap();
        let z3 = GraphPoint::over(&op, op.sample(|t| t * t)).unwrap();
        let loop_value = contour_integrability_check(&op, &v, &[z1, z2, z3], 8).unwrap();
        assert!(loop_value <= 1e-12);
    }

    #[test]
    fn flow_check_linear_is_exact_and_cubic_scales_quadratically() {
        let op_lin = linear_op(48);
        let v = zero_trace_bump(&op_lin);
        let w1 = op_lin.sample(|t| (std::f64::consts::PI * t).sin());
        let w2 = op_lin.sample(|t| 1.0 + t);
        let zeta = GraphPoint::over(&op_lin, op_lin.sample(|t| t * (1.0 - t))).unwrap();
        let r = flow_symplectomorphism_check(&op_lin, &zeta, &v, &w1, &w2, 1e-2).unwrap();
        let scale = op_lin.apply_linearized(&zeta.x, &w1).amax() * w2.amax();
        assert!(r <= 1e-10 * scale, "linear residual {r:.3e}");

        let op = cubic_op(48);
        let v = zero_trace_bump(&op);
        let zeta = GraphPoint::over(&op, op.sample(|t| t * (1.0 - t))).unwrap();
        let r1 = flow_symplectomorphism_check(&op, &zeta, &v, &w1, &w2, 1e-2).unwrap();
        let r2 = flow_symplectomorphism_check(&op, &zeta, &v, &w1, &w2, 5e-3).unwrap();
        let r3 = flow_symplectomorphism_check(&op, &zeta, &v, &w1, &w2, 2.5e-3).unwrap();
        assert!(r1 > r2 && r2 > r3, "not monotone: {r1:.3e} {r2:.3e} {r3:.3e}");
        assert_relative_eq!(r1 / r2, 4.0, epsilon = 0.2);
        assert_relative_eq!(r2 / r3, 4.0, epsilon = 0.2);
    }

    #[test]
    fn lifted_bc_is_leaf_constant_exactly() {
        let op = cubic_op(48);
        let bc = NonlinearBC::new(
            |eta| [eta.du0 - eta.u0.sin(), eta.du1 - eta.u1.powi(3)],
            |eta| {
                DMatrix::from_row_slice(
                    2,
                    4,
                    &[-eta.u0.cos(), 1.0, 0.0, 0.0, 0.0, 0.0, -3.0 * eta.u1 * eta.u1, 1.0],
                )
            },
        );
        let lifted = lift_bc(&bc);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zeta = GraphPoint::over(&op, op.sample(|t| (1.5 * t).cos())).unwrap();
        for _ in 0..100 {
            let raw = DVector::from_fn(48, |_, _| rng.gen_range(-1.0..1.0));
            let v = op.make_zero_trace(&raw);
            let moved = group_action(&op, &zeta, &v).unwrap();
            let a = lifted.eval(&op, &moved);
            let b = lifted.eval(&op, &zeta);
            let tol = 64.0 * f64::EPSILON * (1.0 + zeta.x.amax() / op.step());
            assert!((a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol,
                "leaf constancy violated: {a:?} vs {b:?}");
        }
    }

    #[test]
    fn lifted_bc_example_value() {
        let op = cubic_op(64);
        // ζ with trace (0, 1, 0, -1) under Θ̂ = (u0' - sin u0, u1' - u1³)
        let zeta = GraphPoint::over(&op, op.sample(|t| (std::f64::consts::PI * t).sin() / std::f64::consts::PI)).unwrap();
        let tr = op.trace_of(&zeta.x);
        assert_relative_eq!(tr.du0, 1.0, epsilon = 1e-3);
        assert_relative_eq!(tr.du1, -1.0, epsilon = 1e-3);
        let bc = NonlinearBC::new(
            |eta| [eta.du0 - eta.u0.sin(), eta.du1 - eta.u1.powi(3)],
            |eta| {
                DMatrix::from_row_slice(
                    2,
                    4,
                    &[-eta.u0.cos(), 1.0, 0.0, 0.0, 0.0, 0.0, -3.0 * eta.u1 * eta.u1, 1.0],
                )
            },
        );
        let lifted = lift_bc(&bc);
        let value = lifted.eval(&op, &zeta);
        assert_relative_eq!(value[0], 1.0, epsilon = 1e-3);
        assert_relative_eq!(value[1], -1.0, epsilon = 1e-3);
    }

    #[test]
    fn lsa_conditions_separated_pass_coupled_fail() {
        let separated = NonlinearBC::new(
            |eta| [eta.du0 - eta.u0.sin(), eta.du1 - eta.u1.powi(3)],
            |eta| {
                DMatrix::from_row_slice(
                    2,
                    4,
                    &[-eta.u0.cos(), 1.0, 0.0, 0.0, 0.0, 0.0, -3.0 * eta.u1 * eta.u1, 1.0],
                )
            },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let traces: Vec<TraceVector> = (0..25)
            .map(|_| {
                TraceVector::new(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(-2.0..2.0),
                )
                .unwrap()
            })
            .collect();
        let rep = check_lsa_conditions(&separated, &traces).unwrap();
        assert!(rep.passes);
        assert!(rep.points.iter().all(|p| p.kernel_lagrangian));

        // Θ̂ = (u0 - u1, u0'): the product picks up a ±1 off-diagonal.
        let coupled = NonlinearBC::linear(DMatrix::from_row_slice(
            2,
            4,
            &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        ))
        .unwrap();
        let rep = check_lsa_conditions(&coupled, &traces).unwrap();
        assert!(!rep.passes);
        assert!(rep.max_residual > 0.5);

        // linear Dirichlet passes and reduces to the linear classifier
        let dirichlet = NonlinearBC::linear(DMatrix::from_row_slice(
            2,
            4,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ))
        .unwrap();
        assert!(check_lsa_conditions(&dirichlet, &traces).unwrap().passes);
    }

    #[test]
    fn lsa_invariant_under_invertible_reparametrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let traces: Vec<TraceVector> = (0..10)
            .map(|_| {
                TraceVector::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
                .unwrap()
            })
            .collect();
        for _ in 0..20 {
            let theta = DMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
            let bc = NonlinearBC::linear(theta.clone()).unwrap();
            let m = DMatrix::from_row_slice(
                2,
                2,
                &[
                    rng.gen_range(1.0..2.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(1.0..2.0) + 1.0,
                ],
            );
            let composed = NonlinearBC::linear(&m * &theta).unwrap();
            let a = check_lsa_conditions(&bc, &traces).unwrap();
            let b = check_lsa_conditions(&composed, &traces).unwrap();
            assert_eq!(a.passes, b.passes);
            for (pa, pb) in a.points.iter().zip(&b.points) {
                assert_eq!(pa.passes, pb.passes);
            }
        }
    }

    #[test]
    fn lsa_agrees_with_linear_classifier() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let traces = [TraceVector::new(0.0, 0.0, 0.0, 0.0).unwrap()];
        for _ in 0..20 {
            let theta = DMatrix::from_fn(2, 4, |_, _| rng.gen_range(-1.0..1.0));
            let bc = NonlinearBC::linear(theta.clone()).unwrap();
            let lsa = check_lsa_conditions(&bc, &traces).unwrap();
            let cls = boundary::classify_bc(&theta).unwrap();
            assert_eq!(
                lsa.passes,
                cls.verdict == boundary::BcVerdict::SelfAdjoint,
                "theta {theta}"
            );
        }
    }

    fn manufactured_bc() -> NonlinearBC {
        // Θ̂ = (u0' - sin u0 - c₀, u1' - u1³ - c₁) satisfied by cos t
        let c0 = -(1.0f64.sin());
        let c1 = -(1.0f64.sin()) - 1.0f64.cos().powi(3);
        NonlinearBC::new(
            move |eta| {
                [
                    eta.du0 - eta.u0.sin() - c0,
                    eta.du1 - eta.u1.powi(3) - c1,
                ]
            },
            |eta| {
                DMatrix::from_row_slice(
                    2,
                    4,
                    &[-eta.u0.cos(), 1.0, 0.0, 0.0, 0.0, 0.0, -3.0 * eta.u1 * eta.u1, 1.0],
                )
            },
        )
    }

    #[test]
    fn bvp_linear_dirichlet_matches_closed_form() {
        let pi = std::f64::consts::PI;
        let op = linear_op(128);
        let bc = NonlinearBC::linear(DMatrix::from_row_slice(
            2,
            4,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ))
        .unwrap();
        let f = op.sample(|t| pi * pi * (pi * t).sin());
        let sol = solve_bvp_lsa(&op, &bc, &f).unwrap();
        let exact = op.sample(|t| (pi * t).sin());
        let err = (&sol.u - &exact).amax();
        let h = op.step();
        assert!(err <= 2.0 * pi * pi * h * h, "err {err:.3e} at h {h:.3e}");
        assert!(sol.certificate.passes);
    }

    #[test]
    fn bvp_manufactured_cosine_converges_at_second_order() {
        let bc = manufactured_bc();
        let mut errors = Vec::new();
        for n in [64usize, 128, 256] {
            let op = cubic_op(n);
            let f = op.sample(|t| t.cos() + t.cos().powi(3));
            let sol = solve_bvp_lsa(&op, &bc, &f).unwrap();
            assert!(sol.certificate.iterations <= 10, "iterations {}", sol.certificate.iterations);
            assert!(sol.certificate.passes);
            assert!(sol.certificate.green_residual <= 1e-6);
            let exact = op.sample(|t| t.cos());
            errors.push(((&sol.u - &exact).amax(), op.step()));
        }
        for w in errors.windows(2) {
            let (e1, h1) = w[0];
            let (e2, h2) = w[1];
            let expected = (h1 / h2) * (h1 / h2);
            let ratio = e1 / e2;
            assert!(
                (ratio / expected - 1.0).abs() <= 0.15,
                "ratio {ratio:.3} vs expected {expected:.3}"
            );
        }
    }

    #[test]
    fn bvp_rejects_non_lsa_condition() {
        let op = cubic_op(64);
        let coupled = NonlinearBC::linear(DMatrix::from_row_slice(
            2,
            4,
            &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        ))
        .unwrap();
        let f = op.sample(|t| t.cos());
        assert!(matches!(
            solve_bvp_lsa(&op, &coupled, &f),
            Err(NonlinearError::NotLocallySelfAdjoint { .. })
        ));
    }

    #[test]
    fn antiderivative_routes_agree_for_cubic_model() {
        let op = cubic_op(64);
        let x = TestFunction::polynomial(&[0.0, 1.0, -1.0]); // t(1-t)
        let v = TestFunction::polynomial(&[0.0, 0.0, 1.0, -2.0, 1.0]); // t²(1-t)²
        let zero = TestFunction::polynomial(&[0.0]);
        let mid = TestFunction::polynomial(&[0.1, 0.2, -0.3]);
        let path1 = vec![zero.clone(), x.clone()];
        let path2 = vec![zero, mid, x.clone()];
        let rep = antiderivative_consistency(&op, &x, &v, &path1, &path2, 64, 16).unwrap();
        assert!(rep.path_difference <= 1e-9 * rep.scale, "{rep:?}");
        assert!(rep.graph_residual <= 1e-9 * rep.scale, "{rep:?}");
    }

    #[test]
    fn antiderivative_base_point_is_exact() {
        let op = cubic_op(64);
        let zero = TestFunction::polynomial(&[0.0]);
        let v = TestFunction::polynomial(&[0.0, 0.0, 1.0, -2.0, 1.0]);
        let path = vec![zero.clone()];
        let rep = antiderivative_consistency(&op, &zero, &v, &path, &path, 64, 8).unwrap();
        assert_eq!(rep.path_difference, 0.0);
        assert_eq!(rep.graph_residual, 0.0);
    }

    #[test]
    fn antiderivative_linear_model_is_path_independent_exactly() {
        let op = linear_op(64);
        let x = TestFunction::polynomial(&[0.0, 0.3, 0.4, -0.5]);
        let v = TestFunction::polynomial(&[0.0, 0.0, 1.0, -2.0, 1.0]);
        let zero = TestFunction::polynomial(&[0.0]);
        let mid = TestFunction::polynomial(&[0.0, -1.0, 0.7]);
        let rep = antiderivative_consistency(
            &op,
            &x,
            &v,
            &[zero.clone(), x.clone()],
            &[zero, mid, x.clone()],
            64,
            8,
        )
        .unwrap();
        assert!(rep.path_difference <= 1e-12 * rep.scale);
        assert!(rep.graph_residual <= 1e-12 * rep.scale);
    }

    #[test]
    fn graph_defect_of_discrete_laplacian_is_two() {
        for n in [32usize, 64] {
            let op = linear_op(n);
            let zero = op.sample(|_| 0.0);
            let (min_g, max_g) = op.linearized_graphs(&zero).unwrap();
            assert_eq!(max_g.dim() - min_g.dim(), 4);
            assert_eq!(symplin::graph_defect(&min_g, &max_g).unwrap(), 2);
        }
    }

    #[test]
    fn reduced_pairing_matches_trace_form_at_second_order() {
        // For tangent pairs {w, D(x)w} the ambient pairing (Jh₁, h₂)₂
        // is the discrete Green identity: zero for zero-trace pairs,
        // and -ĵ(η₁, η₂) + O(h²) for general analytic pairs.
        let check = |n: usize| -> (f64, f64) {
            let op = cubic_op(n);
            let x = op.sample(|t| (1.3 * t).cos());
            let w1 = op.sample(|t| t * t);
            let w2 = op.sample(|t| (2.0 * t).sin());
            let h1 = (w1.clone(), op.apply_linearized(&x, &w1));
            let h2 = (w2.clone(), op.apply_linearized(&x, &w2));
            let ambient = op.inner(&h1.0, &h2.1) - op.inner(&h1.1, &h2.0);
            let jhat = boundary::boundary_form(&op.trace_of(&w1), &op.trace_of(&w2));
            ((ambient + jhat).abs(), op.step())
        };
        let (e1, h1) = check(64);
        let (e2, h2) = check(128);
        assert!(e1 < 1e-2);
        let ratio = e1 / e2;
        let expected = (h1 / h2) * (h1 / h2);
        assert!((ratio / expected - 1.0).abs() < 0.3, "ratio {ratio:.3}");

        // zero-trace tangents pair to zero at rounding level
        let op = cubic_op(64);
        let x = op.sample(|t| (1.3 * t).cos());
        let v1 = op.make_zero_trace(&op.sample(|t| (t * (1.0 - t)).powi(2)));
        let v2 = op.make_zero_trace(&op.sample(|t| t.powi(3) * (1.0 - t).powi(2)));
        let h1 = (v1.clone(), op.apply_linearized(&x, &v1));
        let h2 = (v2.clone(), op.apply_linearized(&x, &v2));
        let ambient = op.inner(&h1.0, &h2.1) - op.inner(&h1.1, &h2.0);
        let scale = 1.0 + h1.1.amax() * h2.0.amax();
        assert!(ambient.abs() <= 1e-10 * scale);
    }
}
