//! Randomized truncated SVD.
//!
//! A Gaussian sketch `Y = A·G` captures the dominant column space of `A`;
//! the small matrix `B = Qᵀ·A` is then decomposed exactly through the
//! eigendecomposition of `B·Bᵀ`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::decomp::{complement_vectors, fix_signs, norm2, orthogonalize, orthonormal_basis, symmetric_eigen};
use super::{LinearOperator, Matrix};
use crate::error::{Error, Result};

pub const DEFAULT_OVERSAMPLE: usize = 10;
pub const DEFAULT_POWER_ITERS: usize = 2;
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Singular values at or below this fraction of σ₁ are zero.
const ZERO_SIGMA_RATIO: f64 = 1e-12;

/// Rank-k factors `U_k`, `Σ_k`, `V_k` with `A ≈ U_k·Σ_k·V_kᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorModel {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

impl FactorModel {
    pub fn new(u: Matrix, sigma: Vec<f64>, v: Matrix) -> Result<Self> {
        let k = sigma.len();
        if u.cols() != k || v.cols() != k {
            return Err(Error::dims(
                format!("{k} factor columns"),
                format!("U has {}, V has {}", u.cols(), v.cols()),
            ));
        }
        Ok(Self { u, sigma, v })
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn u(&self) -> &Matrix {
        &self.u
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    /// `U_k·Σ_k·V_kᵀ`
    pub fn reconstruct(&self) -> Matrix {
        self.u.scale_cols(&self.sigma).matmul(&self.v.transpose())
    }

    /// Rows of `V_k·Σ_k`: one latent vector per column of the input.
    pub fn column_vectors(&self) -> Matrix {
        self.v.scale_cols(&self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SsvdParams {
    pub rank: usize,
    pub oversample: usize,
    pub power_iters: usize,
    pub seed: u64,
}

impl SsvdParams {
    pub fn new(rank: usize, seed: u64) -> Self {
        Self {
            rank,
            oversample: DEFAULT_OVERSAMPLE,
            power_iters: DEFAULT_POWER_ITERS,
            seed,
        }
    }

    pub fn oversample(mut self, oversample: usize) -> Self {
        self.oversample = oversample;
        self
    }

    pub fn power_iters(mut self, power_iters: usize) -> Self {
        self.power_iters = power_iters;
        self
    }
}

/// n×l standard Gaussian matrix, filled row-major from a ChaCha8 stream.
pub fn gaussian_sketch(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

/// Randomized SVD with sketch width `rank + oversample`, truncated to `rank`.
///
/// Zero singular values (≤ 1e-12·σ₁) get an arbitrary orthonormal completion
/// in `V`. Each left singular vector's largest-magnitude coordinate is
/// non-negative, with the matching right vector flipped along with it.
pub fn ssvd<A: LinearOperator + ?Sized>(a: &A, params: &SsvdParams) -> Result<FactorModel> {
    let (m, n) = (a.nrows(), a.ncols());
    let k = params.rank;
    let limit = m.min(n);
    if k == 0 || k > limit {
        return Err(Error::InvalidRank(format!("rank {k} outside 1..={limit} for a {m}x{n} matrix")));
    }
    let width = k + params.oversample;
    if width > limit {
        return Err(Error::InvalidRank(format!(
            "sketch width {k}+{} exceeds min(m, n) = {limit}",
            params.oversample
        )));
    }

    let g = gaussian_sketch(n, width, params.seed);
    let mut y = a.apply(&g);
    for _ in 0..params.power_iters {
        let q = orthonormal_basis(&y);
        let z = orthonormal_basis(&a.apply_transpose(&q));
        y = a.apply(&z);
    }
    let q = orthonormal_basis(&y);
    let bt = a.apply_transpose(&q); // Bᵀ, n×width
    let eig = symmetric_eigen(&bt.t_matmul(&bt));

    let top = eig.vectors.leading_cols(k);
    let mut sigma: Vec<f64> = eig.values[..k].iter().map(|&l| l.max(0.0).sqrt()).collect();
    let cutoff = sigma[0] * ZERO_SIGMA_RATIO;
    for s in &mut sigma {
        if *s <= cutoff {
            *s = 0.0;
        }
    }

    let mut u = q.matmul(&top);
    let bx = bt.matmul(&top);
    let mut v_cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut missing = Vec::new();
    for j in 0..k {
        if sigma[j] == 0.0 {
            missing.push(j);
            v_cols.push(Vec::new());
            continue;
        }
        let mut col: Vec<f64> = bx.col(j).into_iter().map(|x| x / sigma[j]).collect();
        // Columns with tiny σ lose orthogonality through the squared
        // spectrum of B·Bᵀ; re-orthogonalizing restores it.
        let accepted: Vec<Vec<f64>> = v_cols.iter().filter(|c| !c.is_empty()).cloned().collect();
        orthogonalize(&mut col, &accepted);
        let norm = norm2(&col);
        if norm > 0.5 {
            col.iter_mut().for_each(|x| *x /= norm);
            v_cols.push(col);
        } else {
            missing.push(j);
            v_cols.push(Vec::new());
        }
    }
    if !missing.is_empty() {
        let accepted: Vec<Vec<f64>> = v_cols.iter().filter(|c| !c.is_empty()).cloned().collect();
        let fill = complement_vectors(&accepted, n, missing.len());
        for (j, col) in missing.into_iter().zip(fill) {
            v_cols[j] = col;
        }
    }
    let mut v = Matrix::zeros(n, k);
    for (j, col) in v_cols.iter().enumerate() {
        v.set_col(j, col);
    }

    let flipped = fix_signs(&mut u);
    for (j, f) in flipped.into_iter().enumerate() {
        if f {
            for i in 0..n {
                v[(i, j)] = -v[(i, j)];
            }
        }
    }
    FactorModel::new(u, sigma, v)
}

/// Rank-k SVD with the default oversampling (clipped to fit the matrix) and
/// power iterations, seeded with [`DEFAULT_SEED`].
pub fn truncated_svd<A: LinearOperator + ?Sized>(a: &A, k: usize) -> Result<FactorModel> {
    truncated_svd_seeded(a, k, DEFAULT_SEED)
}

pub fn truncated_svd_seeded<A: LinearOperator + ?Sized>(a: &A, k: usize, seed: u64) -> Result<FactorModel> {
    let limit = a.nrows().min(a.ncols());
    let oversample = DEFAULT_OVERSAMPLE.min(limit.saturating_sub(k));
    ssvd(a, &SsvdParams::new(k, seed).oversample(oversample))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::decomp::orthonormality_error;

    #[test]
    fn identity_3x3() {
        let a = Matrix::identity(3);
        let f = ssvd(&a, &SsvdParams::new(3, 1).oversample(0)).unwrap();
        for s in f.sigma() {
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(f.reconstruct().max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn diag_rank_one() {
        let a = Matrix::from_diag(&[3.0, 2.0]);
        // oversampling clipped to the matrix makes the sketch span everything
        let f = truncated_svd(&a, 1).unwrap();
        assert!((f.sigma()[0] - 3.0).abs() < 1e-10);
        let expected = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(f.reconstruct().max_abs_diff(&expected) < 1e-8);
    }

    #[test]
    fn zero_matrix_is_padded() {
        let a = Matrix::zeros(4, 3);
        let f = ssvd(&a, &SsvdParams::new(2, 3).oversample(1)).unwrap();
        assert_eq!(f.sigma(), &[0.0, 0.0]);
        assert!(orthonormality_error(f.u()) < 1e-12);
        assert!(orthonormality_error(f.v()) < 1e-12);
    }

    #[test]
    fn rank_errors() {
        let a = Matrix::identity(3);
        assert!(matches!(ssvd(&a, &SsvdParams::new(0, 1)), Err(Error::InvalidRank(_))));
        assert!(matches!(ssvd(&a, &SsvdParams::new(4, 1)), Err(Error::InvalidRank(_))));
        assert!(matches!(
            ssvd(&a, &SsvdParams::new(2, 1).oversample(2)),
            Err(Error::InvalidRank(_))
        ));
    }

    #[test]
    fn sketch_is_seeded() {
        assert_eq!(gaussian_sketch(5, 3, 9), gaussian_sketch(5, 3, 9));
        assert_ne!(gaussian_sketch(5, 3, 9), gaussian_sketch(5, 3, 10));
    }

    #[test]
    fn exact_rank_two() {
        let a = Matrix::from_fn(12, 9, |i, j| ((i * 9 + j) as f64 * 0.37).sin());
        let x = Matrix::from_fn(12, 2, |i, j| ((i + 2 * j) as f64).sin());
        let y = Matrix::from_fn(2, 9, |i, j| ((3 * i + j) as f64).cos());
        let r2 = x.matmul(&y);
        let f = truncated_svd(&r2, 2).unwrap();
        let err = f.reconstruct().sub(&r2).frobenius_norm() / r2.frobenius_norm();
        assert!(err <= 1e-8, "{err}");
        let full = truncated_svd(&a, 9).unwrap();
        let err = full.reconstruct().sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(err <= 1e-8, "{err}");
        assert!(orthonormality_error(full.v()) < 1e-8);
    }

    #[test]
    fn rank_deficient_at_full_rank() {
        let x = Matrix::from_fn(10, 2, |i, j| ((i * 7 + j) as f64).sin());
        let y = Matrix::from_fn(2, 6, |i, j| ((i + 5 * j) as f64).cos());
        let a = x.matmul(&y);
        let f = truncated_svd(&a, 6).unwrap();
        assert!(orthonormality_error(f.u()) < 1e-8);
        assert!(orthonormality_error(f.v()) < 1e-8);
        let err = f.reconstruct().sub(&a).frobenius_norm() / a.frobenius_norm();
        assert!(err <= 1e-8, "{err}");
    }
}
