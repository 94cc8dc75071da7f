//! Principal component analysis through the covariance eigendecomposition.

use super::decomp::symmetric_eigen;
use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// variables × k, orthonormal columns.
    components: Matrix,
    eigenvalues: Vec<f64>,
    /// Every eigenvalue of the covariance, non-increasing.
    spectrum: Vec<f64>,
}

impl PcaModel {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Scores `(X − mean)·components`.
    pub fn project(&self, x: &Matrix) -> Result<Matrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::dims(format!("{} columns", self.mean.len()), x.cols()));
        }
        let centered = Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - self.mean[j]);
        Ok(centered.matmul(&self.components))
    }

    /// `scores·componentsᵀ + mean`.
    pub fn reconstruct(&self, scores: &Matrix) -> Result<Matrix> {
        if scores.cols() != self.k() {
            return Err(Error::dims(format!("{} score columns", self.k()), scores.cols()));
        }
        let mut out = scores.matmul(&self.components.transpose());
        for i in 0..out.rows() {
            for (v, m) in out.row_mut(i).iter_mut().zip(&self.mean) {
                *v += m;
            }
        }
        Ok(out)
    }
}

/// Column means of `x` (observations × variables).
pub fn column_means(x: &Matrix) -> Vec<f64> {
    let n = x.rows() as f64;
    (0..x.cols())
        .map(|j| (0..x.rows()).map(|i| x[(i, j)]).sum::<f64>() / n)
        .collect()
}

/// Sample covariance `XcᵀXc / (obs − 1)` of the centered data.
pub fn covariance(x: &Matrix) -> Matrix {
    let mean = column_means(x);
    let centered = Matrix::from_fn(x.rows(), x.cols(), |i, j| x[(i, j)] - mean[j]);
    let mut c = centered.t_matmul(&centered);
    let denom = (x.rows() - 1) as f64;
    for i in 0..c.rows() {
        c.row_mut(i).iter_mut().for_each(|v| *v /= denom);
    }
    c
}

/// Fits `k` principal axes: center, take the covariance, keep the top-k
/// eigenvectors (largest-magnitude coordinate positive).
pub fn pca(x: &Matrix, k: usize) -> Result<PcaModel> {
    if x.rows() < 2 {
        return Err(Error::InsufficientData(format!(
            "PCA needs at least 2 observations, got {}",
            x.rows()
        )));
    }
    if k == 0 || k > x.cols() {
        return Err(Error::InvalidRank(format!("k = {k} outside 1..={}", x.cols())));
    }
    let mean = column_means(x);
    let eig = symmetric_eigen(&covariance(x));
    Ok(PcaModel {
        mean,
        components: eig.vectors.leading_cols(k),
        eigenvalues: eig.values[..k].to_vec(),
        spectrum: eig.values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_axis() {
        let x = Matrix::from_rows(&[vec![-1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let m = pca(&x, 1).unwrap();
        assert!((m.eigenvalues()[0] - 2.0).abs() < 1e-14);
        assert!((m.components()[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(m.components()[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn errors() {
        let one = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(pca(&one, 1), Err(Error::InsufficientData(_))));
        let two = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(pca(&two, 3), Err(Error::InvalidRank(_))));
        let m = pca(&two, 1).unwrap();
        assert!(m.project(&Matrix::zeros(1, 3)).is_err());
        assert!(m.reconstruct(&Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn constant_column_restored() {
        let x = Matrix::from_rows(&[
            vec![1.0, 7.0, 0.5],
            vec![2.0, 7.0, -0.5],
            vec![4.0, 7.0, 1.5],
            vec![3.0, 7.0, 0.0],
        ])
        .unwrap();
        let m = pca(&x, 2).unwrap();
        for j in 0..2 {
            assert!(m.components()[(1, j)].abs() < 1e-12);
        }
        let back = m.reconstruct(&m.project(&x).unwrap()).unwrap();
        for i in 0..4 {
            assert_eq!(back[(i, 1)], 7.0);
        }
    }
}
