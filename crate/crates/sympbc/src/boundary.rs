//! Boundary calculus for second-order operators on `[0, 1]`.
//!
//! For `l u = -u''` the Green identity
//!
//! ```text
//! (lu, v) - (u, lv) = (u v' - u' v)|_1 - (u v' - u' v)|_0
//! ```
//!
//! turns the quadruple `η_u = (u(0), u'(0), u(1), u'(1))` of boundary
//! data into a symplectic vector: the right-hand side is `η_uᵀ Ω̂ η_v`
//! for the fixed skew matrix [`BoundaryForm::standard`]. The sign above
//! is the direct integration-by-parts sign, and it is pinned by an
//! explicit quadrature oracle ([`green_residual`]); classification
//! verdicts do not depend on the global sign of the form.
//!
//! Linear boundary conditions `Θ η = 0` are then classified by the
//! Lagrangian kernel test of [`crate::symplin`]: self-adjoint iff
//! `ker Θ` is Lagrangian for `Ω̂`, symmetric-only iff it is isotropic
//! but smaller, and not symmetric otherwise. Calkin systems
//! `v_1, ..., v_m` are checked for independence of their traces and for
//! the vanishing of the boundary pairing `⟨v_i, v_j⟩`, computed both by
//! quadrature and through `Ω̂`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::quad::GaussLegendre;
use crate::symplin::{
    self, classify_subspace, lagrangian_kernel_test, KernelPresentation, Subspace, SubspaceKind,
    SymplecticForm,
};

/// Verdict tolerance on boundary residuals.
pub const VERDICT_TOL: f64 = 1e-9;
/// Relative tolerance for the derivative-consistency spot check of
/// [`TestFunction`] callables.
pub const FD_CHECK_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum BoundaryError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("trace failure: function or derivative is not finite at an endpoint")]
    TraceFailure,
    #[error("Calkin system has {got} vectors but the model operator has defect {defect}")]
    TooManyVectors { got: usize, defect: usize },
    #[error(transparent)]
    Symplin(#[from] symplin::SymplinError),
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The boundary quadruple `(u(0+), u'(0+), u(1-), u'(1-))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceVector {
    pub u0: f64,
    pub du0: f64,
    pub u1: f64,
    pub du1: f64,
}

impl TraceVector {
    pub fn new(u0: f64, du0: f64, u1: f64, du1: f64) -> Result<Self, BoundaryError> {
        let t = TraceVector { u0, du0, u1, du1 };
        if t.as_vector().iter().all(|c| c.is_finite()) {
            Ok(t)
        } else {
            Err(BoundaryError::TraceFailure)
        }
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&[self.u0, self.du0, self.u1, self.du1])
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self, BoundaryError> {
        if v.len() != 4 {
            return Err(BoundaryError::InvalidArgument(format!(
                "trace vector needs 4 components, got {}",
                v.len()
            )));
        }
        TraceVector::new(v[0], v[1], v[2], v[3])
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }
}

/// A smooth function on `[0, 1]` given by analytic callables for its
/// value and first two derivatives. Explicit derivatives keep all
/// Green-identity computations at quadrature precision; no numerical
/// differentiation happens inside integrals.
#[derive(Clone)]
pub struct TestFunction {
    u: Callable,
    du: Callable,
    ddu: Callable,
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction").finish_non_exhaustive()
    }
}

impl TestFunction {
    /// Wraps value/derivative callables, spot-checking that `du` is the
    /// central finite difference of `u` at interior sample points.
    pub fn new(
        u: impl Fn(f64) -> f64 + Send + Sync + 'static,
        du: impl Fn(f64) -> f64 + Send + Sync + 'static,
        ddu: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self, BoundaryError> {
        let f = TestFunction {
            u: Arc::new(u),
            du: Arc::new(du),
            ddu: Arc::new(ddu),
        };
        f.check_derivative_consistency()?;
        Ok(f)
    }

    fn check_derivative_consistency(&self) -> Result<(), BoundaryError> {
        let h = f64::EPSILON.cbrt();
        let mut scale = 1.0f64;
        let mut worst = 0.0f64;
        for k in 1..=9 {
            let t = k as f64 / 10.0;
            let fd = ((self.u)(t + h) - (self.u)(t - h)) / (2.0 * h);
            let d = (self.du)(t);
            if !fd.is_finite() || !d.is_finite() {
                return Err(BoundaryError::InvalidArgument(
                    "test function is not finite on (0, 1)".into(),
                ));
            }
            worst = worst.max((fd - d).abs());
            scale = scale.max(d.abs());
        }
        if worst > FD_CHECK_TOL * scale {
            return Err(BoundaryError::InvalidArgument(format!(
                "derivative callable disagrees with finite differences of the value callable \
                 (residual {worst:.3e} vs scale {scale:.3e})"
            )));
        }
        Ok(())
    }

    /// Polynomial `Σ c_k t^k` from its coefficient list, with exact
    /// derivative coefficients.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        fn eval(c: &[f64], t: f64) -> f64 {
            c.iter().rev().fold(0.0, |acc, &a| acc * t + a)
        }
        fn derive(c: &[f64]) -> Vec<f64> {
            c.iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| k as f64 * a)
                .collect()
        }
        let c0: Vec<f64> = coeffs.to_vec();
        let c1 = derive(&c0);
        let c2 = derive(&c1);
        let (a0, a1, a2) = (c0.clone(), c1.clone(), c2.clone());
        TestFunction {
            u: Arc::new(move |t| eval(&a0, t)),
            du: Arc::new(move |t| eval(&a1, t)),
            ddu: Arc::new(move |t| eval(&a2, t)),
        }
    }

    /// The unique cubic with the given trace quadruple.
    pub fn hermite_cubic(trace: &TraceVector) -> Self {
        // p = a H00 + b H10 + c H01 + d H11 in the Hermite basis on [0,1]
        let (a, b, c, d) = (trace.u0, trace.du0, trace.u1, trace.du1);
        let c3 = 2.0 * a + b - 2.0 * c + d;
        let c2 = -3.0 * a - 2.0 * b + 3.0 * c - d;
        TestFunction::polynomial(&[a, b, c2, c3])
    }

    /// `((t-a)(b-t))^3` inside `(a, b)`, zero outside; a C² bump with
    /// vanishing trace quadruple.
    pub fn bump(a: f64, b: f64) -> Self {
        assert!(a < b, "bump needs a < b");
        let scale = ((b - a) / 2.0).powi(6);
        let q = move |t: f64| (t - a) * (b - t);
        let dq = move |t: f64| a + b - 2.0 * t;
        let inside = move |t: f64| t > a && t < b;
        TestFunction {
            u: Arc::new(move |t| if inside(t) { q(t).powi(3) / scale } else { 0.0 }),
            du: Arc::new(move |t| {
                if inside(t) {
                    3.0 * q(t).powi(2) * dq(t) / scale
                } else {
                    0.0
                }
            }),
            ddu: Arc::new(move |t| {
                if inside(t) {
                    (6.0 * q(t) * dq(t) * dq(t) - 6.0 * q(t).powi(2)) / scale
                } else {
                    0.0
                }
            }),
        }
    }

    /// Pointwise combination `α f + β g`.
    pub fn affine_combination(alpha: f64, f: &TestFunction, beta: f64, g: &TestFunction) -> Self {
        let (fu, fdu, fddu) = (f.u.clone(), f.du.clone(), f.ddu.clone());
        let (gu, gdu, gddu) = (g.u.clone(), g.du.clone(), g.ddu.clone());
        TestFunction {
            u: Arc::new(move |t| alpha * fu(t) + beta * gu(t)),
            du: Arc::new(move |t| alpha * fdu(t) + beta * gdu(t)),
            ddu: Arc::new(move |t| alpha * fddu(t) + beta * gddu(t)),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        (self.u)(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        (self.du)(t)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        (self.ddu)(t)
    }

    /// `l u = -u''` evaluated at `t`.
    pub fn apply_l(&self, t: f64) -> f64 {
        -(self.ddu)(t)
    }
}

/// Boundary trace of a test function.
pub fn trace(u: &TestFunction) -> Result<TraceVector, BoundaryError> {
    TraceVector::new(u.value(0.0), u.derivative(0.0), u.value(1.0), u.derivative(1.0))
}

/// The fixed symplectic form `Ω̂` on trace space `R^4`.
#[derive(Debug, Clone)]
pub struct BoundaryForm {
    /// The matrix of the quadratic form in the `ηᵀ Ω̂ ξ` sense.
    display: DMatrix<f64>,
    /// The same pairing in the crate-wide `(Ωu, v)` convention, which
    /// stores the transpose.
    form: SymplecticForm,
}

impl BoundaryForm {
    /// `ĵ(η_u, η_v) = η_uᵀ Ω̂ η_v = (u v' - u' v)|_1 - (u v' - u' v)|_0`,
    /// blockwise `[[0,-1],[1,0]]` at the left endpoint and
    /// `[[0,1],[-1,0]]` at the right one. Satisfies `Ω̂² = -I`.
    pub fn standard() -> Self {
        let display = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, -1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, -1.0, 0.0,
            ],
        );
        let form = SymplecticForm::new(display.transpose())
            .expect("standard boundary form is valid");
        debug_assert!({
            let sq = &display * &display;
            let diff = sq + DMatrix::<f64>::identity(4, 4);
            symplin::spectral_norm(&diff) == 0.0
        });
        BoundaryForm { display, form }
    }

    /// The matrix `Ω̂` of the form in the `ηᵀ Ω̂ ξ` sense.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.display
    }

    /// The pairing as a [`SymplecticForm`] for the subspace calculus.
    pub fn symplectic_form(&self) -> &SymplecticForm {
        &self.form
    }

    /// Evaluates `ĵ(η, ξ) = ηᵀ Ω̂ ξ`.
    pub fn pairing(&self, eta: &TraceVector, xi: &TraceVector) -> f64 {
        self.form.pairing(&eta.as_vector(), &xi.as_vector())
    }
}

impl Default for BoundaryForm {
    fn default() -> Self {
        BoundaryForm::standard()
    }
}

/// `ĵ(η, ξ)` for the standard boundary form.
pub fn boundary_form(eta: &TraceVector, xi: &TraceVector) -> f64 {
    BoundaryForm::standard().pairing(eta, xi)
}

/// Green-identity defect `|(lu, v) - (u, lv) - ĵ(η_u, η_v)|` with
/// `l = -d²/dt²` and Gauss–Legendre quadrature of `quad_nodes` points.
pub fn green_residual(
    u: &TestFunction,
    v: &TestFunction,
    quad_nodes: usize,
) -> Result<f64, BoundaryError> {
    if quad_nodes < 2 {
        return Err(BoundaryError::InvalidArgument(
            "green_residual needs at least 2 quadrature nodes".into(),
        ));
    }
    let rule = GaussLegendre::new(quad_nodes);
    let lu_v = rule.integrate_unit(|t| u.apply_l(t) * v.value(t));
    let u_lv = rule.integrate_unit(|t| u.value(t) * v.apply_l(t));
    let eta = trace(u)?;
    let xi = trace(v)?;
    Ok((lu_v - u_lv - boundary_form(&eta, &xi)).abs())
}

/// The bilinear pairing `⟨u, v⟩ = (lu, v) - (u, lv)` by quadrature.
pub fn bilinear_pairing(u: &TestFunction, v: &TestFunction, quad_nodes: usize) -> f64 {
    let rule = GaussLegendre::new(quad_nodes);
    let lu_v = rule.integrate_unit(|t| u.apply_l(t) * v.value(t));
    let u_lv = rule.integrate_unit(|t| u.value(t) * v.apply_l(t));
    lu_v - u_lv
}

/// A candidate Calkin system `v_1, ..., v_m`.
#[derive(Debug, Clone)]
pub struct CalkinSystem {
    vs: Vec<TestFunction>,
}

impl CalkinSystem {
    pub fn new(vs: Vec<TestFunction>) -> Self {
        CalkinSystem { vs }
    }

    pub fn len(&self) -> usize {
        self.vs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vs.is_empty()
    }

    pub fn functions(&self) -> &[TestFunction] {
        &self.vs
    }
}

/// Which Calkin Theorem clause failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalkinClause {
    /// (a) traces linearly independent (independence modulo the minimal
    /// domain, which is exactly the zero-trace set).
    Independence,
    /// (b) all mutual pairings `⟨v_i, v_j⟩` vanish.
    Pairing,
    /// The quadrature and trace-form routes for `⟨v_i, v_j⟩` disagree;
    /// the supplied callables are inconsistent.
    DualRouteMismatch,
}

impl CalkinClause {
    pub fn as_str(&self) -> &'static str {
        match self {
            CalkinClause::Independence => "independence",
            CalkinClause::Pairing => "pairing",
            CalkinClause::DualRouteMismatch => "dual_route_mismatch",
        }
    }
}

/// Outcome of a Calkin system check.
#[derive(Debug, Clone)]
pub struct CalkinReport {
    pub passes: bool,
    pub failed_clause: Option<CalkinClause>,
    /// Trace quadruples of the system, one row per function.
    pub trace_matrix: DMatrix<f64>,
    pub trace_rank: usize,
    /// Pairings `⟨v_i, v_j⟩` via quadrature.
    pub pairing_quadrature: DMatrix<f64>,
    /// Pairings via the boundary form on traces.
    pub pairing_boundary: DMatrix<f64>,
    /// Largest disagreement between the two pairing routes.
    pub agreement_residual: f64,
    /// Largest `|⟨v_i, v_j⟩|` (boundary route).
    pub max_pairing: f64,
    /// Induced boundary condition: rows `Ω̂ᵀ η_{v_i}`, describing
    /// `D = {f : ⟨f, v_i⟩ = 0}` of clause (c).
    pub induced_theta: DMatrix<f64>,
}

/// Checks Calkin Theorem clauses (a) and (b) for a system of at most
/// `defect = 2` functions and emits the induced boundary condition.
pub fn calkin_check(
    sys: &CalkinSystem,
    form: &BoundaryForm,
    quad_nodes: usize,
) -> Result<CalkinReport, BoundaryError> {
    const DEFECT: usize = 2;
    let m = sys.len();
    if m > DEFECT {
        return Err(BoundaryError::TooManyVectors { got: m, defect: DEFECT });
    }
    if quad_nodes < 2 {
        return Err(BoundaryError::InvalidArgument(
            "calkin_check needs at least 2 quadrature nodes".into(),
        ));
    }
    let traces: Vec<TraceVector> = sys
        .functions()
        .iter()
        .map(trace)
        .collect::<Result<_, _>>()?;
    let mut trace_matrix = DMatrix::zeros(m, 4);
    for (i, t) in traces.iter().enumerate() {
        trace_matrix.set_row(i, &t.as_vector().transpose());
    }
    let trace_rank = symplin::rank(&trace_matrix);

    let mut pairing_quadrature = DMatrix::zeros(m, m);
    let mut pairing_boundary = DMatrix::zeros(m, m);
    let mut agreement_residual = 0.0f64;
    let mut max_pairing = 0.0f64;
    let mut scale = 1.0f64;
    for i in 0..m {
        for j in 0..m {
            let q = bilinear_pairing(&sys.functions()[i], &sys.functions()[j], quad_nodes);
            let b = form.pairing(&traces[i], &traces[j]);
            pairing_quadrature[(i, j)] = q;
            pairing_boundary[(i, j)] = b;
            agreement_residual = agreement_residual.max((q - b).abs());
            max_pairing = max_pairing.max(b.abs());
            scale = scale.max(traces[i].norm() * traces[j].norm());
        }
    }

    let mut induced_theta = DMatrix::zeros(m, 4);
    for (i, t) in traces.iter().enumerate() {
        let row = form.matrix().transpose() * t.as_vector();
        induced_theta.set_row(i, &row.transpose());
    }

    let independent = trace_rank == m;
    let agrees = agreement_residual <= 1e-10 * scale;
    let pairs_vanish = max_pairing <= VERDICT_TOL * scale;
    let failed_clause = if !independent {
        Some(CalkinClause::Independence)
    } else if !agrees {
        Some(CalkinClause::DualRouteMismatch)
    } else if !pairs_vanish {
        Some(CalkinClause::Pairing)
    } else {
        None
    };
    Ok(CalkinReport {
        passes: failed_clause.is_none(),
        failed_clause,
        trace_matrix,
        trace_rank,
        pairing_quadrature,
        pairing_boundary,
        agreement_residual,
        max_pairing,
        induced_theta,
    })
}

/// Classification of a linear boundary condition `Θ η = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcVerdict {
    SelfAdjoint,
    SymmetricOnly,
    NotSymmetric,
}

impl BcVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            BcVerdict::SelfAdjoint => "self_adjoint",
            BcVerdict::SymmetricOnly => "symmetric_only",
            BcVerdict::NotSymmetric => "not_symmetric",
        }
    }
}

/// Verdict with the residuals it was decided on.
#[derive(Debug, Clone)]
pub struct BcClassification {
    pub verdict: BcVerdict,
    pub kernel_dim: usize,
    pub theta_rank: usize,
    pub isotropy_residual: f64,
    pub coisotropy_residual: f64,
    /// `‖Θ Ω̂⁻¹ Θᵀ‖₂` when the presentation has exactly 2 rows.
    pub product_residual: Option<f64>,
}

/// Classifies a `p x 4` boundary condition matrix. Two-row presentations
/// go through the Lagrangian kernel test; other shapes classify the
/// computed kernel directly.
pub fn classify_bc(theta: &DMatrix<f64>) -> Result<BcClassification, BoundaryError> {
    if theta.ncols() != 4 {
        return Err(BoundaryError::InvalidArgument(format!(
            "boundary condition matrix needs 4 columns, got {}",
            theta.ncols()
        )));
    }
    if !theta.iter().all(|c| c.is_finite()) {
        return Err(BoundaryError::InvalidArgument(
            "boundary condition matrix has non-finite entries".into(),
        ));
    }
    let form = BoundaryForm::standard();
    let theta_rank = symplin::rank(theta);
    let (class, product_residual) = if theta.nrows() == 2 {
        let pres = KernelPresentation::new(theta.clone())?;
        let rep = lagrangian_kernel_test(form.symplectic_form(), &pres)?;
        (rep.class, Some(rep.product_residual))
    } else {
        let kernel = Subspace::new(symplin::nullspace(theta))?;
        (classify_subspace(form.symplectic_form(), &kernel)?, None)
    };
    let verdict = match class.kind {
        SubspaceKind::Lagrangian => BcVerdict::SelfAdjoint,
        SubspaceKind::IsotropicOnly => BcVerdict::SymmetricOnly,
        _ => BcVerdict::NotSymmetric,
    };
    Ok(BcClassification {
        verdict,
        kernel_dim: class.dim,
        theta_rank,
        isotropy_residual: class.isotropy_residual,
        coisotropy_residual: class.coisotropy_residual,
        product_residual,
    })
}
