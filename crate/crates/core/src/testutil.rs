//! Oracles shared by unit tests. Deliberately independent of the QR and LARS
//! code paths they are used to check.

use nalgebra::DMatrix;

/// Solves the normal equations `X'X b = X'y` by Gauss–Jordan elimination
/// with partial pivoting.
pub fn normal_equations(x: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    let m = x.ncols();
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = (0..x.nrows()).map(|r| x[(r, i)] * x[(r, j)]).sum();
        }
        a[i][m] = (0..x.nrows()).map(|r| x[(r, i)] * y[r]).sum();
    }
    for c in 0..m {
        let piv = (c..m)
            .max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))
            .unwrap();
        a.swap(c, piv);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..m).map(|i| a[i][m] / a[i][i]).collect()
}

/// Residual sum of squares of `y` on `x` using [`normal_equations`].
pub fn rss_oracle(x: &DMatrix<f64>, y: &[f64]) -> (Vec<f64>, f64) {
    let b = normal_equations(x, y);
    let rss = (0..x.nrows())
        .map(|r| {
            let fit: f64 = (0..x.ncols()).map(|c| x[(r, c)] * b[c]).sum();
            (y[r] - fit).powi(2)
        })
        .sum();
    (b, rss)
}

/// Coordinate descent on `||y - Xb||² + 2λ Σ pen_j |b_j|`, run until the
/// largest coordinate change drops below `tol`. Zero penalties are allowed.
pub fn lasso_cd(x: &DMatrix<f64>, y: &[f64], pen: &[f64], lambda: f64, tol: f64) -> Vec<f64> {
    let (n, m) = x.shape();
    let mut b = vec![0.0; m];
    let mut r = y.to_vec();
    let sq: Vec<f64> = (0..m).map(|j| x.column(j).norm_squared()).collect();
    for _sweep in 0..1_000_000 {
        let mut max_change: f64 = 0.0;
        for j in 0..m {
            let xj = x.column(j);
            let rho: f64 = (0..n).map(|i| xj[i] * r[i]).sum::<f64>() + sq[j] * b[j];
            let thr = lambda * pen[j];
            let new = if rho > thr {
                (rho - thr) / sq[j]
            } else if rho < -thr {
                (rho + thr) / sq[j]
            } else {
                0.0
            };
            let d = new - b[j];
            if d != 0.0 {
                for i in 0..n {
                    r[i] -= xj[i] * d;
                }
                b[j] = new;
            }
            max_change = max_change.max(d.abs());
        }
        if max_change < tol {
            break;
        }
    }
    b
}
