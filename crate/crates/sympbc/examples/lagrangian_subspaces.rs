//! Tour of the symplectic linear algebra: subspace classification,
//! ω-complements, Lagrangian kernel tests, and dual bases.
//!
//! ```bash
//! cargo run --example lagrangian_subspaces
//! ```

use nalgebra::DMatrix;
use sympbc::symplin::{
    classify_subspace, lagrangian_kernel_test, omega_complement, symplectic_dual_basis,
    KernelPresentation, Subspace, SymplecticForm,
};

fn main() {
    let form = SymplecticForm::standard(2).unwrap();

    for (label, axes) in [
        ("position plane span(e1, e2)", vec![0usize, 1]),
        ("line span(e1)", vec![0]),
        ("three-plane span(e1, e2, e3)", vec![0, 1, 2]),
    ] {
        let l = Subspace::coordinate_plane(4, &axes);
        let c = classify_subspace(&form, &l).unwrap();
        let comp = omega_complement(&form, &l).unwrap();
        println!(
            "{label:<30} -> {:<16} dim {} complement dim {}",
            c.kind.as_str(),
            c.dim,
            comp.dim()
        );
    }

    // Kernel presentation: two independent conditions cutting out a
    // Lagrangian plane iff Θ Ω⁻¹ Θᵀ = 0.
    let theta = KernelPresentation::new(DMatrix::from_row_slice(
        2,
        4,
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
    ))
    .unwrap();
    let rep = lagrangian_kernel_test(&form, &theta).unwrap();
    println!(
        "kernel test: verdict {} rank {} product residual {:.2e}",
        rep.class.kind.as_str(),
        rep.theta_rank,
        rep.product_residual
    );

    // Complete e = span(e1, e2) to a symplectic basis against the
    // vertical Lagrangian.
    let e = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let f0 = DMatrix::from_column_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let dual = symplectic_dual_basis(&form, &e, &f0).unwrap();
    println!("dual basis (columns):");
    for r in 0..4 {
        println!("  [{:+.3} {:+.3}]", dual[(r, 0)], dual[(r, 1)]);
    }
    for i in 0..2 {
        for s in 0..2 {
            let w = form.pairing(&dual.column(i).into_owned(), &e.column(s).into_owned());
            print!("  omega(f~{i}, e{s}) = {w:+.3}");
        }
    }
    println!();
}
