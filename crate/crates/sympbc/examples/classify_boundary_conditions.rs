//! Classify the classical boundary-condition table for `-u''` on [0, 1].
//!
//! ```bash
//! cargo run --example classify_boundary_conditions
//! ```

use nalgebra::DMatrix;
use sympbc::boundary::classify_bc;
use sympbc::presets::linear_bc_matrix;

fn main() {
    println!("{:<14} {:>14} {:>12} {:>12}", "condition", "verdict", "iso", "coiso");
    for name in ["dirichlet", "neumann", "periodic", "antiperiodic", "robin", "initial"] {
        let theta = linear_bc_matrix(name, 2.0, -0.5).unwrap();
        let c = classify_bc(&theta).unwrap();
        println!(
            "{:<14} {:>14} {:>12.2e} {:>12.2e}",
            name,
            c.verdict.as_str(),
            c.isotropy_residual,
            c.coisotropy_residual
        );
    }

    // An over-determined presentation whose kernel is the single line
    // span(e2): isotropic but too small to be Lagrangian.
    let overdetermined = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            0.0, 0.0, 0.0, 0.0,
        ],
    );
    let c = classify_bc(&overdetermined).unwrap();
    println!(
        "{:<14} {:>14} (kernel dim {})",
        "overdetermined",
        c.verdict.as_str(),
        c.kernel_dim
    );
}
