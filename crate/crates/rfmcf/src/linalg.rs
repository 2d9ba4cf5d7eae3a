//! Dense helpers for the tiny symmetric matrices (n <= 4) that ambient metrics
//! and induced metrics produce. Gauss-Jordan inversion with partial pivoting and
//! a Jacobi eigenvalue sweep are plenty at these sizes.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Inverse of a small square matrix by Gauss-Jordan with partial pivoting.
pub fn inverse(m: &Array2<f64>) -> Result<Array2<f64>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut inv = Array2::<f64>::eye(n);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[[r, col]].abs() > a[[piv, col]].abs() {
                piv = r;
            }
        }
        let p = a[[piv, col]];
        if p.abs() < 1e-300 {
            return Err(Error::DegenerateMetric {
                eigen: p,
                tol: 1e-300,
            });
        }
        if piv != col {
            for c in 0..n {
                a.swap([piv, c], [col, c]);
                inv.swap([piv, c], [col, c]);
            }
        }
        let d = a[[col, col]];
        for c in 0..n {
            a[[col, c]] /= d;
            inv[[col, c]] /= d;
        }
        for r in 0..n {
            if r != col {
                let f = a[[r, col]];
                if f != 0.0 {
                    for c in 0..n {
                        a[[r, c]] -= f * a[[col, c]];
                        inv[[r, c]] -= f * inv[[col, c]];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Eigenvalues of a small symmetric matrix via cyclic Jacobi sweeps.
pub fn sym_eigenvalues(m: &Array2<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    for _sweep in 0..64 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Determinant of a small square matrix (Gauss elimination, partial pivoting).
pub fn det(m: &Array2<f64>) -> f64 {
    let n = m.nrows();
    let mut a = m.clone();
    let mut d = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[[r, col]].abs() > a[[piv, col]].abs() {
                piv = r;
            }
        }
        if a[[piv, col]] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap([piv, c], [col, c]);
            }
            d = -d;
        }
        d *= a[[col, col]];
        for r in col + 1..n {
            let f = a[[r, col]] / a[[col, col]];
            for c in col..n {
                a[[r, c]] -= f * a[[col, c]];
            }
        }
    }
    d
}
