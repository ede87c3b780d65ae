//! Lagrangian frame fields along rays: transport the basis of a
//! Lagrangian line and its complement along `t -> t l`, certify
//! tangency, and complete to a symplectic frame at each point.
//!
//! ```bash
//! cargo run --example lagrangian_frames
//! ```

use nalgebra::{DMatrix, DVector};
use sympbc::connection::{lagrangian_frame_field, FormField};
use sympbc::symplin::Subspace;

fn main() {
    let field = FormField::scalar_scaled(1, 1.0, vec![0.2, 0.0], vec![0.5, 0.0]).unwrap();
    let l_hat = Subspace::coordinate_plane(2, &[0]);
    let f0 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
    let points = vec![
        DVector::from_column_slice(&[0.25, 0.0]),
        DVector::from_column_slice(&[0.5, 0.0]),
        DVector::from_column_slice(&[1.0, 0.0]),
    ];
    let frames = lagrangian_frame_field(&field, &l_hat, &f0, &points, 1000).unwrap();
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>22}",
        "l", "tangency", "duality", "isotropy", "frame f"
    );
    for fr in &frames {
        println!(
            "{:>8.3} {:>12.2e} {:>12.2e} {:>12.2e}   [{:+.5}, {:+.5}]",
            fr.point[0],
            fr.tangency_residual,
            fr.duality_residual,
            fr.isotropy_residual,
            fr.f[(0, 0)],
            fr.f[(1, 0)]
        );
    }
}
