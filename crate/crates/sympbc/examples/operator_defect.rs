//! Defect of the discrete `-u''` from the dimension gap between its
//! minimal (zero-trace) and maximal graphs: always 2, matching the four
//! boundary degrees of freedom.
//!
//! ```bash
//! cargo run --example operator_defect
//! ```

use sympbc::nonlinear::ModelOperator;
use sympbc::symplin::graph_defect;

fn main() {
    println!("{:>6} {:>10} {:>10} {:>8}", "n", "dim(min)", "dim(max)", "defect");
    for n in [16usize, 32, 64, 128] {
        let op = ModelOperator::new(n, |_| 0.0, |_| 0.0).unwrap();
        let zero = op.sample(|_| 0.0);
        let (min_g, max_g) = op.linearized_graphs(&zero).unwrap();
        let defect = graph_defect(&min_g, &max_g).unwrap();
        println!("{n:>6} {:>10} {:>10} {defect:>8}", min_g.dim(), max_g.dim());
    }
}
