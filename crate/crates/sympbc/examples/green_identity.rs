//! Verify the Green identity `(lu, v) - (u, lv) = ĵ(η_u, η_v)` by
//! quadrature for polynomial, compactly supported, and trigonometric
//! test functions.
//!
//! ```bash
//! cargo run --example green_identity
//! ```

use std::f64::consts::PI;
use sympbc::boundary::{boundary_form, green_residual, trace, TestFunction};

fn main() {
    let t2 = TestFunction::polynomial(&[0.0, 0.0, 1.0]);
    let t3 = TestFunction::polynomial(&[0.0, 0.0, 0.0, 1.0]);
    let bump_a = TestFunction::bump(0.25, 0.75);
    let bump_b = TestFunction::bump(0.25, 0.5);
    let sin_pi = TestFunction::new(
        |t| (PI * t).sin(),
        |t| PI * (PI * t).cos(),
        |t| -PI * PI * (PI * t).sin(),
    )
    .unwrap();
    let cos_pi = TestFunction::new(
        |t| (PI * t).cos(),
        |t| -PI * (PI * t).sin(),
        |t| -PI * PI * (PI * t).cos(),
    )
    .unwrap();

    let pairs: [(&str, &TestFunction, &TestFunction); 3] = [
        ("t^2 vs t^3", &t2, &t3),
        ("bump vs bump", &bump_a, &bump_b),
        ("sin(pi t) vs cos(pi t)", &sin_pi, &cos_pi),
    ];
    println!("{:<24} {:>14} {:>14}", "pair", "j-hat value", "green residual");
    for (label, u, v) in pairs {
        let value = boundary_form(&trace(u).unwrap(), &trace(v).unwrap());
        let residual = green_residual(u, v, 64).unwrap();
        println!("{label:<24} {value:>14.6e} {residual:>14.3e}");
    }
}
