//! Reference solvers for integration tests. They share no code with the
//! library's LARS or QR routines.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Covariance-update coordinate descent for
/// `||y - Xb||² + 2λ Σ pen_j |b_j|`. Stops when a full sweep moves no
/// coordinate by more than `tol`.
pub fn cd_lasso(x: &DMatrix<f64>, y: &[f64], pen: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let (n, m) = x.shape();
    let gram = DMatrix::from_fn(m, m, |i, j| {
        (0..n).map(|r| x[(r, i)] * x[(r, j)]).sum::<f64>()
    });
    let xty: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|r| x[(r, j)] * y[r]).sum())
        .collect();
    let mut b = vec![0.0; m];
    for _ in 0..2_000_000 {
        let mut moved: f64 = 0.0;
        for j in 0..m {
            let partial: f64 = xty[j]
                - (0..m)
                    .filter(|&k| k != j)
                    .map(|k| gram[(j, k)] * b[k])
                    .sum::<f64>();
            let thr = lambda * pen[j];
            let new = (partial.abs() - thr).max(0.0) * partial.signum() / gram[(j, j)];
            moved = moved.max((new - b[j]).abs());
            b[j] = new;
        }
        if moved < tol {
            break;
        }
    }
    b
}

/// Largest relative violation of the Lasso optimality conditions at `lambda`:
/// `x_j'r = λ pen_j sign(b_j)` on the support and `|x_j'r| ≤ λ pen_j` off it.
pub fn kkt_violation(x: &DMatrix<f64>, y: &[f64], pen: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let (n, m) = x.shape();
    let r: Vec<f64> = (0..n)
        .map(|i| y[i] - (0..m).map(|j| x[(i, j)] * beta[j]).sum::<f64>())
        .collect();
    let mut worst: f64 = 0.0;
    for j in 0..m {
        let c: f64 = (0..n).map(|i| x[(i, j)] * r[i]).sum();
        let bound = lambda * pen[j];
        let v = if beta[j] != 0.0 {
            (c - bound * beta[j].signum()).abs()
        } else {
            (c.abs() - bound).max(0.0)
        };
        worst = worst.max(v / bound);
    }
    worst
}
