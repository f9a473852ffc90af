//! Small dense real linear algebra: Householder least squares and a cyclic
//! Jacobi eigenvalue routine.

use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, sqrt};

/// Relative threshold on the diagonal of R below which a column-equilibrated
/// design matrix is treated as rank deficient.
pub const DEFAULT_RCOND: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
}

/// Solves min ‖Xβ − y‖₂ for a row-major `rows × cols` design by Householder
/// QR on the column-equilibrated matrix.
///
/// Returns `None` when the design is rank deficient at relative tolerance
/// `rcond` (measured on the equilibrated R factor).
pub fn least_squares(
    design: &[f64],
    rhs: &[f64],
    rows: usize,
    cols: usize,
    rcond: f64,
) -> Option<LeastSquares> {
    assert_eq!(design.len(), rows * cols);
    assert_eq!(rhs.len(), rows);
    if rows < cols {
        return None;
    }
    if cols == 0 {
        let rss = rhs.iter().map(|y| y * y).sum();
        return Some(LeastSquares {
            coefficients: Vec::new(),
            residuals: rhs.to_vec(),
            rss,
        });
    }

    // Column-major copy, each column scaled to unit norm.
    let mut a = vec![0.0; rows * cols];
    let mut scale = vec![0.0; cols];
    for c in 0..cols {
        let mut norm2 = 0.0;
        for r in 0..rows {
            let x = design[r * cols + c];
            a[c * rows + r] = x;
            norm2 += x * x;
        }
        let norm = sqrt(norm2);
        if norm == 0.0 || !norm.is_finite() {
            return None;
        }
        scale[c] = norm;
        for r in 0..rows {
            a[c * rows + r] /= norm;
        }
    }

    let mut b = rhs.to_vec();
    let mut rdiag = vec![0.0; cols];
    for j in 0..cols {
        let (head, tail) = a.split_at_mut((j + 1) * rows);
        let col = &mut head[j * rows..];
        let norm = sqrt(col[j..].iter().map(|x| x * x).sum::<f64>());
        if norm == 0.0 {
            return None;
        }
        let alpha = if col[j] > 0.0 { -norm } else { norm };
        let v0 = col[j] - alpha;
        let vnorm2 = norm * norm - col[j] * col[j] + v0 * v0;
        col[j] = v0;
        rdiag[j] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let v = &col[j..];
        for l in 0..(cols - j - 1) {
            let other = &mut tail[l * rows + j..(l + 1) * rows];
            let dot: f64 = v.iter().zip(other.iter()).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vnorm2;
            for (o, x) in other.iter_mut().zip(v) {
                *o -= f * x;
            }
        }
        let bt = &mut b[j..];
        let dot: f64 = v.iter().zip(bt.iter()).map(|(x, y)| x * y).sum();
        let f = 2.0 * dot / vnorm2;
        for (o, x) in bt.iter_mut().zip(v) {
            *o -= f * x;
        }
    }

    let rmax = rdiag.iter().fold(0.0f64, |m, &x| m.max(fabs(x)));
    if rdiag.iter().any(|&x| fabs(x) <= rcond * rmax) {
        return None;
    }

    // Back substitution; R[j][l] for l > j lives in column l, row j.
    let mut beta = vec![0.0; cols];
    for j in (0..cols).rev() {
        let mut acc = b[j];
        for l in (j + 1)..cols {
            acc -= a[l * rows + j] * beta[l];
        }
        beta[j] = acc / rdiag[j];
    }
    for (c, s) in beta.iter_mut().zip(&scale) {
        *c /= s;
    }

    let mut residuals = Vec::with_capacity(rows);
    let mut rss = 0.0;
    for r in 0..rows {
        let fit: f64 = design[r * cols..(r + 1) * cols]
            .iter()
            .zip(&beta)
            .map(|(x, c)| x * c)
            .sum();
        let e = rhs[r] - fit;
        rss += e * e;
        residuals.push(e);
    }
    Some(LeastSquares {
        coefficients: beta,
        residuals,
        rss,
    })
}

/// Eigenvalues of a real symmetric row-major `n × n` matrix by cyclic
/// Jacobi rotations. The input is overwritten. Order is unspecified.
pub fn symmetric_eigenvalues(m: &mut [f64], n: usize) -> Vec<f64> {
    assert_eq!(m.len(), n * n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q] * m[p * n + q])
            .sum();
        let diag: f64 = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (fabs(theta) + sqrt(theta * theta + 1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fit() {
        // y = 2x + 1
        let xs = [0.0, 1.0, 2.0, 3.0];
        let design: Vec<f64> = xs.iter().flat_map(|&x| [x, 1.0]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let fit = least_squares(&design, &y, 4, 2, DEFAULT_RCOND).unwrap();
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-12);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!(fit.rss < 1e-24);
    }

    #[test]
    fn collinear_columns_are_rejected() {
        let design = [1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        assert!(least_squares(&design, &[1.0, 2.0, 3.0], 3, 2, DEFAULT_RCOND).is_none());
    }

    #[test]
    fn badly_scaled_columns_still_solve() {
        let xs: Vec<f64> = (0..50).map(|i| 1e-7 * libm::sin(i as f64)).collect();
        let design: Vec<f64> = xs.iter().flat_map(|&x| [x, 1.0]).collect();
        let y: Vec<f64> = xs.iter().map(|x| 3.0 * x + 0.25).collect();
        let fit = least_squares(&design, &y, 50, 2, DEFAULT_RCOND).unwrap();
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn jacobi_two_by_two() {
        let mut m = [2.0, 1.0, 1.0, 2.0];
        let mut e = symmetric_eigenvalues(&mut m, 2);
        e.sort_by(f64::total_cmp);
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 3.0).abs() < 1e-14);
    }
}
