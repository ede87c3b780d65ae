//! The translation group on the graph of `F(u) = -u'' + u^3` and its
//! certificates: leaves as equal-trace classes, leaf-constant lifted
//! boundary maps, the vanishing contour integral, the central-difference
//! symplecticity defect, and antiderivative path independence.
//!
//! ```bash
//! cargo run --example group_action_leaves
//! ```

use nalgebra::DMatrix;
use sympbc::boundary::TestFunction;
use sympbc::nonlinear::{
    antiderivative_consistency, contour_integrability_check, flow_symplectomorphism_check,
    group_action, lift_bc, same_leaf, GraphPoint, ModelOperator, NonlinearBC,
};

fn main() {
    let n = 64;
    let op = ModelOperator::new(n, |u| u * u * u, |u| 3.0 * u * u).unwrap();
    let zeta = GraphPoint::over(&op, op.sample(|t| t * (1.0 - t))).unwrap();
    let v = op.make_zero_trace(&op.sample(|t| (t * (1.0 - t)).powi(2)));

    let moved = group_action(&op, &zeta, &v).unwrap();
    println!("translate by zero-trace bump stays on leaf: {}", same_leaf(&op, &zeta, &moved));

    let bc = NonlinearBC::linear(DMatrix::from_row_slice(
        2,
        4,
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    ))
    .unwrap();
    let lifted = lift_bc(&bc);
    let a = lifted.eval(&op, &zeta);
    let b = lifted.eval(&op, &moved);
    println!("lifted map along the leaf: {a:?} -> {b:?}");

    let z2 = GraphPoint::over(&op, op.sample(|t| (2.0 * t).sin())).unwrap();
    let z3 = GraphPoint::over(&op, op.sample(|t| 0.3 * t + 0.1)).unwrap();
    let loop_integral =
        contour_integrability_check(&op, &v, &[zeta.clone(), z2, z3], 32).unwrap();
    println!("triangle contour integral: {loop_integral:.3e}");

    let w1 = op.sample(|t| (std::f64::consts::PI * t).sin());
    let w2 = op.sample(|t| 1.0 + t);
    println!("flow symplecticity defect (central differences):");
    for eps in [1e-2, 5e-3, 2.5e-3] {
        let r = flow_symplectomorphism_check(&op, &zeta, &v, &w1, &w2, eps).unwrap();
        println!("  eps = {eps:>8.1e}  residual = {r:.6e}");
    }

    let x = TestFunction::polynomial(&[0.0, 1.0, -1.0]);
    let vb = TestFunction::polynomial(&[0.0, 0.0, 1.0, -2.0, 1.0]);
    let zero = TestFunction::polynomial(&[0.0]);
    let mid = TestFunction::polynomial(&[0.1, 0.2, -0.3]);
    let rep = antiderivative_consistency(
        &op,
        &x,
        &vb,
        &[zero.clone(), x.clone()],
        &[zero, mid, x.clone()],
        64,
        16,
    )
    .unwrap();
    println!(
        "antiderivative: path difference {:.3e}, graph residual {:.3e}",
        rep.path_difference, rep.graph_residual
    );
}
