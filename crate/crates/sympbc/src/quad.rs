//! Gauss–Legendre quadrature on finite intervals.
//!
//! Nodes are the roots of the Legendre polynomial `P_n`, found by Newton
//! iteration on the three-term recurrence; weights are the classical
//! `w_i = 2 / ((1 - x_i^2) P_n'(x_i)^2)`. An `n`-point rule integrates
//! polynomials up to degree `2n - 1` exactly, which is what keeps the
//! Green-identity and antiderivative residuals of the other modules at
//! rounding level on the polynomial test corpus.

/// A Gauss–Legendre rule with nodes and weights on the reference
/// interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule. Panics if `n == 0`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (_, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes (never, by construction).
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes on `[-1, 1]`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights matching [`Self::nodes`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        half * acc
    }

    /// Nodes mapped to `[a, b]`, paired with the mapped weights.
    pub fn mapped(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    /// Composite integration across consecutive panels delimited by
    /// `breakpoints`, applying the rule on each panel.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(&self, breakpoints: &[f64], mut f: F) -> f64 {
        breakpoints
            .windows(2)
            .map(|p| self.integrate(p[0], p[1], &mut f))
            .sum()
    }

    /// Composite rule on `[0, 1]` split at the quarter points. The test
    /// corpus of compactly supported piecewise polynomials has its seams
    /// on quarter points, so those integrands are panelwise polynomial
    /// and integrate exactly.
    pub fn integrate_unit<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate_panels(&[0.0, 0.25, 0.5, 0.75, 1.0], f)
    }
}

/// Evaluates `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // P_n'(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let d = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_rule_matches_closed_form() {
        let q = GaussLegendre::new(2);
        let r = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(q.nodes()[0], -r, epsilon = 1e-14);
        assert_relative_eq!(q.nodes()[1], r, epsilon = 1e-14);
        assert_relative_eq!(q.weights()[0], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [2usize, 5, 8, 16, 64] {
            let q = GaussLegendre::new(n);
            let deg = 2 * n - 1;
            // integral of t^deg over [0,1] is 1/(deg+1)
            let val = q.integrate(0.0, 1.0, |t| t.powi(deg as i32));
            assert_relative_eq!(val, 1.0 / (deg as f64 + 1.0), epsilon = 1e-12);
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1usize, 3, 17, 128] {
            let q = GaussLegendre::new(n);
            let total: f64 = q.weights().iter().sum();
            assert_relative_eq!(total, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn trig_integral_at_spectral_accuracy() {
        let q = GaussLegendre::new(64);
        let val = q.integrate(0.0, 1.0, |t| (std::f64::consts::PI * t).sin());
        assert_relative_eq!(val, 2.0 / std::f64::consts::PI, epsilon = 1e-14);
    }
}
