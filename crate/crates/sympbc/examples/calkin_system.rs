//! Check a Calkin system for the model operator and print the induced
//! boundary condition.
//!
//! The system `v1 = -t(1-t)^2`, `v2 = t^2(t-1)` has independent traces
//! with vanishing mutual pairing, and induces the Dirichlet condition.
//!
//! ```bash
//! cargo run --example calkin_system
//! ```

use sympbc::boundary::{calkin_check, BoundaryForm, CalkinSystem, TestFunction, TraceVector};

fn run(label: &str, sys: CalkinSystem) {
    let rep = calkin_check(&sys, &BoundaryForm::standard(), 64).unwrap();
    println!("== {label}");
    println!("  passes: {}", rep.passes);
    if let Some(clause) = rep.failed_clause {
        println!("  failed clause: {}", clause.as_str());
    }
    println!("  trace rank: {}", rep.trace_rank);
    println!("  max pairing: {:.3e}", rep.max_pairing);
    println!("  route agreement: {:.3e}", rep.agreement_residual);
    println!("  induced theta:");
    for i in 0..rep.induced_theta.nrows() {
        let r = rep.induced_theta.row(i);
        println!("    [{:+.3} {:+.3} {:+.3} {:+.3}]", r[0], r[1], r[2], r[3]);
    }
}

fn main() {
    let v1 = TestFunction::polynomial(&[0.0, -1.0, 2.0, -1.0]);
    let v2 = TestFunction::polynomial(&[0.0, 0.0, -1.0, 1.0]);
    run("dirichlet-inducing system", CalkinSystem::new(vec![v1.clone(), v2]));

    run("dependent traces", CalkinSystem::new(vec![v1.clone(), v1.clone()]));

    let w = TestFunction::hermite_cubic(&TraceVector::new(1.0, 0.0, 0.0, 0.0).unwrap());
    run("pairing violation", CalkinSystem::new(vec![v1, w]));
}
