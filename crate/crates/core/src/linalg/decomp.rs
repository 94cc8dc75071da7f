//! Dense kernels: Householder orthonormalization, cyclic Jacobi
//! eigendecomposition and orthonormal completion.

use super::Matrix;

/// Orthonormal basis of the column space of `y` (m×l, m ≥ l) as the thin `Q`
/// factor of a Householder QR. The result always has `l` orthonormal
/// columns, even when `y` is rank deficient.
pub fn orthonormal_basis(y: &Matrix) -> Matrix {
    let (m, l) = y.shape();
    assert!(m >= l, "orthonormal_basis needs rows >= cols, got {m}x{l}");
    let mut a = y.clone();
    let mut reflectors: Vec<(Vec<f64>, f64)> = Vec::with_capacity(l);

    for k in 0..l {
        let mut v: Vec<f64> = (k..m).map(|i| a[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            reflectors.push((v, 0.0));
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        let beta = if vtv == 0.0 { 0.0 } else { 2.0 / vtv };
        for j in k..l {
            let s: f64 = v.iter().enumerate().map(|(p, vp)| vp * a[(k + p, j)]).sum();
            for (p, vp) in v.iter().enumerate() {
                a[(k + p, j)] -= beta * s * vp;
            }
        }
        reflectors.push((v, beta));
    }

    let mut q = Matrix::from_fn(m, l, |i, j| if i == j { 1.0 } else { 0.0 });
    for (k, (v, beta)) in reflectors.iter().enumerate().rev() {
        if *beta == 0.0 {
            continue;
        }
        for j in 0..l {
            let s: f64 = v.iter().enumerate().map(|(p, vp)| vp * q[(k + p, j)]).sum();
            for (p, vp) in v.iter().enumerate() {
                q[(k + p, j)] -= beta * s * vp;
            }
        }
    }
    q
}

/// Eigenpairs of a symmetric matrix, values non-increasing, vectors as
/// columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi eigensolver. Each eigenvector's largest-magnitude
/// coordinate is made non-negative; equal eigenvalues keep their
/// diagonal order.
pub fn symmetric_eigen(a: &Matrix) -> SymmetricEigen {
    let n = a.rows();
    assert_eq!(n, a.cols(), "symmetric_eigen needs a square matrix");
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let total: f64 = a.as_slice().iter().map(|x| x * x).sum();

    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off == 0.0 || off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[(y, y)].total_cmp(&a[(x, x)]));
    let values = order.iter().map(|&j| a[(j, j)]).collect();
    let mut vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    fix_signs(&mut vectors);
    SymmetricEigen { values, vectors }
}

/// Flips each column so its largest-magnitude coordinate is non-negative.
/// Returns which columns were flipped.
pub fn fix_signs(m: &mut Matrix) -> Vec<bool> {
    let (rows, cols) = m.shape();
    (0..cols)
        .map(|j| {
            let mut best = 0.0f64;
            let mut sign = 1.0;
            for i in 0..rows {
                let x = m[(i, j)];
                if x.abs() > best {
                    best = x.abs();
                    sign = x.signum();
                }
            }
            if sign < 0.0 {
                for i in 0..rows {
                    m[(i, j)] = -m[(i, j)];
                }
                true
            } else {
                false
            }
        })
        .collect()
}

/// Extends the orthonormal columns of `basis` to `cols` orthonormal columns
/// by greedily orthogonalizing standard basis vectors.
pub fn complete_orthonormal(basis: &Matrix, cols: usize) -> Matrix {
    let (m, have) = basis.shape();
    assert!(cols <= m && have <= cols);
    let mut filled: Vec<Vec<f64>> = (0..have).map(|j| basis.col(j)).collect();
    let extra = complement_vectors(&filled, m, cols - have);
    filled.extend(extra);
    let mut out = Matrix::zeros(m, cols);
    for (j, c) in filled.iter().enumerate() {
        out.set_col(j, c);
    }
    out
}

/// `count` unit vectors of length `m` orthogonal to `existing` and to each
/// other.
pub(crate) fn complement_vectors(existing: &[Vec<f64>], m: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(existing.len() + count <= m);
    let mut all: Vec<Vec<f64>> = existing.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for e in 0..m {
            let mut v = vec![0.0; m];
            v[e] = 1.0;
            orthogonalize(&mut v, &all);
            let norm = norm2(&v);
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, mut v) = best.expect("m >= 1");
        v.iter_mut().for_each(|x| *x /= norm);
        all.push(v.clone());
        out.push(v);
    }
    out
}

/// Two passes of classical Gram–Schmidt against unit vectors `basis`.
pub(crate) fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let d: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= d * qi;
            }
        }
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest absolute deviation of `QᵀQ` from the identity.
pub fn orthonormality_error(q: &Matrix) -> f64 {
    q.t_matmul(q).max_abs_diff(&Matrix::identity(q.cols()))
}

/// Solves the symmetric positive definite system `a · x = b` by Cholesky.
pub fn cholesky_solve(a: &Matrix, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[(i, k)] * y[k]).sum();
        y[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[(k, i)] * x[k]).sum();
        x[i] = (y[i] - s) / l[(i, i)];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_of_rank_deficient_block() {
        let y = Matrix::from_rows(&[
            vec![1.0, 2.0, 0.0],
            vec![2.0, 4.0, 0.0],
            vec![0.0, 0.0, 0.0],
            vec![1.0, 2.0, 0.0],
        ])
        .unwrap();
        let q = orthonormal_basis(&y);
        assert_eq!(q.shape(), (4, 3));
        assert!(orthonormality_error(&q) < 1e-14);
        // first column spans y's first column
        let c0 = q.col(0);
        let dot: f64 = c0.iter().zip(y.col(0)).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn eigen_of_2x2() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = symmetric_eigen(&a);
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((e.vectors[(0, 0)] - h).abs() < 1e-14);
        assert!((e.vectors[(1, 0)] - h).abs() < 1e-14);
        assert!(orthonormality_error(&e.vectors) < 1e-14);
    }

    #[test]
    fn eigen_reconstructs() {
        let a = Matrix::from_fn(6, 6, |i, j| 1.0 / (1.0 + i as f64 + j as f64));
        let e = symmetric_eigen(&a);
        let back = e
            .vectors
            .matmul(&Matrix::from_diag(&e.values))
            .matmul(&e.vectors.transpose());
        assert!(back.max_abs_diff(&a) < 1e-13);
        assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn completion() {
        let q = Matrix::from_rows(&[vec![0.6], vec![0.8], vec![0.0]]).unwrap();
        let full = complete_orthonormal(&q, 3);
        assert!(orthonormality_error(&full) < 1e-14);
        assert_eq!(full.col(0), q.col(0));
        let from_nothing = complete_orthonormal(&Matrix::zeros(3, 0), 2);
        assert!(orthonormality_error(&from_nothing) < 1e-14);
    }

    #[test]
    fn cholesky() {
        let a = Matrix::from_rows(&[vec![4.0, 2.0], vec![2.0, 3.0]]).unwrap();
        let x = cholesky_solve(&a, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-14);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-14);
        assert!(cholesky_solve(&Matrix::zeros(2, 2), &[1.0, 1.0]).is_none());
    }
}
