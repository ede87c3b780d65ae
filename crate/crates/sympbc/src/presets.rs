//! Named presets shared by the command-line front end and the examples:
//! classical boundary conditions, model nonlinearities, built-in form
//! fields, and forcing terms.

use nalgebra::{DMatrix, DVector};

use crate::connection::FormField;
use crate::nonlinear::{ModelOperator, NonlinearBC, NonlinearError};
use serde_json::{json, Value};

/// The classical linear boundary-condition table as `2 x 4` matrices on
/// the trace quadruple `(u(0), u'(0), u(1), u'(1))`.
pub fn linear_bc_matrix(name: &str, alpha: f64, beta: f64) -> Option<DMatrix<f64>> {
    let rows: [f64; 8] = match name {
        "dirichlet" => [1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        "neumann" => [0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        "periodic" => [1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0],
        "antiperiodic" => [1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0],
        "robin" => [alpha, -1.0, 0.0, 0.0, 0.0, 0.0, beta, -1.0],
        "initial" => [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        _ => return None,
    };
    Some(DMatrix::from_row_slice(2, 4, &rows))
}

/// Nonlinear (or linear) boundary conditions by name.
///
/// `sine_cubic` is the separated condition
/// `(u'(0) - sin u(0) - c₀, u'(1) - u(1)³ - c₁)`, locally self-adjoint
/// at every trace.
pub fn boundary_condition(name: &str, c0: f64, c1: f64) -> Result<NonlinearBC, NonlinearError> {
    if let Some(theta) = linear_bc_matrix(name, c0, c1) {
        return NonlinearBC::linear(theta);
    }
    match name {
        "sine_cubic" => Ok(NonlinearBC::new(
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
                    &[
                        -eta.u0.cos(),
                        1.0,
                        0.0,
                        0.0,
                        0.0,
                        0.0,
                        -3.0 * eta.u1 * eta.u1,
                        1.0,
                    ],
                )
            },
        )),
        other => Err(NonlinearError::InvalidArgument(format!(
            "unknown boundary condition preset '{other}'"
        ))),
    }
}

/// The constants making `u*(t) = cos t` satisfy the `sine_cubic`
/// condition; the manufactured-solution benchmark.
pub fn manufactured_cos_constants() -> (f64, f64) {
    let c0 = -(1.0f64.sin());
    let c1 = -(1.0f64.sin()) - 1.0f64.cos().powi(3);
    (c0, c1)
}

/// Model nonlinearities by name.
pub fn nonlinearity(name: &str) -> Option<(fn(f64) -> f64, fn(f64) -> f64)> {
    match name {
        "linear" => Some((|_| 0.0, |_| 0.0)),
        "cubic" => Some((|u| u * u * u, |u| 3.0 * u * u)),
        "sine" => Some((|u| u.sin(), |u| u.cos())),
        _ => None,
    }
}

/// Builds the model operator for a named nonlinearity.
pub fn model_operator(n: usize, g_name: &str) -> Result<ModelOperator, NonlinearError> {
    let (g, dg) = nonlinearity(g_name).ok_or_else(|| {
        NonlinearError::InvalidArgument(format!("unknown nonlinearity '{g_name}'"))
    })?;
    ModelOperator::new(n, g, dg)
}

/// Named forcing terms on the grid.
pub fn forcing(name: &str, op: &ModelOperator) -> Option<DVector<f64>> {
    let pi = std::f64::consts::PI;
    match name {
        "zero" => Some(op.sample(|_| 0.0)),
        // -u'' for u = sin(πt)
        "pi2_sin" => Some(op.sample(move |t| pi * pi * (pi * t).sin())),
        // -u'' + u³ for u = cos t
        "cos_cubic" => Some(op.sample(|t| t.cos() + t.cos().powi(3))),
        _ => None,
    }
}

/// Built-in form fields for the transport and frame commands.
pub fn form_field(
    name: &str,
    dim: usize,
    constant: f64,
    linear: Vec<f64>,
    quadratic_diag: Vec<f64>,
) -> Result<FormField, String> {
    if dim == 0 || dim % 2 != 0 {
        return Err(format!("field dimension must be even and positive, got {dim}"));
    }
    match name {
        "canonical" => Ok(FormField::canonical(dim / 2)),
        "scalar_scaled" => {
            FormField::scalar_scaled(dim / 2, constant, linear, quadratic_diag)
                .map_err(|e| e.to_string())
        }
        other => Err(format!("unknown form field '{other}'")),
    }
}

/// Machine-readable catalog of every preset and its parameters.
pub fn catalog() -> Value {
    json!({
        "boundary_conditions": {
            "dirichlet": {"params": {}},
            "neumann": {"params": {}},
            "periodic": {"params": {}},
            "antiperiodic": {"params": {}},
            "robin": {"params": {"alpha": "real", "beta": "real"}},
            "initial": {"params": {}},
            "sine_cubic": {"params": {"c0": "real", "c1": "real"}}
        },
        "nonlinearities": {
            "linear": {"g": "0"},
            "cubic": {"g": "u^3"},
            "sine": {"g": "sin(u)"}
        },
        "form_fields": {
            "canonical": {"params": {"dim": "even integer"}},
            "scalar_scaled": {"params": {
                "dim": "even integer",
                "constant": "real",
                "linear": "array of dim reals",
                "quadratic_diag": "array of dim reals"
            }}
        },
        "forcings": {
            "zero": {"f": "0"},
            "pi2_sin": {"f": "pi^2 sin(pi t)"},
            "cos_cubic": {"f": "cos(t) + cos(t)^3"}
        }
    })
}
