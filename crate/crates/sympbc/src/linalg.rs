//! One-sided Jacobi SVD for the dense rank and span decisions.
//!
//! The orthogonalization sweeps act on column pairs until all mutual
//! angles vanish, which computes small singular values with high
//! relative accuracy; that robustness is what the `1e-10`-level rank
//! thresholds elsewhere in the crate rely on.

use nalgebra::DMatrix;

/// Left singular vectors and singular values, sorted descending.
///
/// `u` has one column per input column; columns whose singular value is
/// exactly zero are zero vectors and are skipped by the mask selections
/// downstream.
pub(crate) struct JacobiSvd {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
}

pub(crate) fn jacobi_svd(a: &DMatrix<f64>) -> JacobiSvd {
    let m = a.nrows();
    let n = a.ncols();
    let mut w = a.clone();
    if n > 1 {
        let tol = 1e-15;
        let max_sweeps = 64;
        for _ in 0..max_sweeps {
            let mut off = 0.0f64;
            for i in 0..n - 1 {
                for j in i + 1..n {
                    let ci = w.column(i).into_owned();
                    let cj = w.column(j).into_owned();
                    let aii = ci.dot(&ci);
                    let ajj = cj.dot(&cj);
                    let aij = ci.dot(&cj);
                    if aii == 0.0 || ajj == 0.0 {
                        continue;
                    }
                    let rel = aij.abs() / (aii * ajj).sqrt();
                    off = off.max(rel);
                    if rel <= tol {
                        continue;
                    }
                    let tau = (ajj - aii) / (2.0 * aij);
                    let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for r in 0..m {
                        let vi = w[(r, i)];
                        let vj = w[(r, j)];
                        w[(r, i)] = c * vi - s * vj;
                        w[(r, j)] = s * vi + c * vj;
                    }
                }
            }
            if off <= tol {
                break;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|c| w.column(c).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    let mut u = DMatrix::zeros(m, n);
    let mut sigma = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        if s > 0.0 {
            let col = w.column(src) / s;
            u.set_column(dst, &col);
        }
    }
    JacobiSvd { u, sigma }
}
