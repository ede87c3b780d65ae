//! Kato transport of a rotating rank-one projector: the generator
//! `[P', P]` yields an orthogonal map intertwining the endpoints, and
//! for the quarter-turn path the result is the rotation by pi/2.
//!
//! ```bash
//! cargo run --example kato_projector_transport
//! ```

use nalgebra::DMatrix;
use std::f64::consts::FRAC_PI_2;
use sympbc::connection::{kato_transport, ProjectorPath};

fn main() {
    let theta = FRAC_PI_2;
    let path = ProjectorPath::new(2, move |t| {
        let (c, s) = ((theta * t).cos(), (theta * t).sin());
        DMatrix::from_row_slice(2, 2, &[c * c, c * s, c * s, s * s])
    });
    let report = kato_transport(&path, 10_000).unwrap();
    println!("U(1) =");
    for r in 0..2 {
        println!("  [{:+.8} {:+.8}]", report.u[(r, 0)], report.u[(r, 1)]);
    }
    let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    println!("distance to R(pi/2):      {:.3e}", (&report.u - rot).norm());
    println!("orthogonality residual:   {:.3e}", report.orthogonality_residual);
    println!("intertwining residual:    {:.3e}", report.intertwining_residual);
}
