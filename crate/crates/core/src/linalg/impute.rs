use super::{Matrix, SparseMatrix};
use crate::error::{Error, Result};

/// Fill rule for unobserved cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputeStrategy {
    /// Column mean; empty columns use the global mean.
    ItemMean,
    /// Row mean; empty rows use the global mean.
    UserMean,
    GlobalMean,
    Zero,
}

/// Dense copy of `sparse` with observed cells kept and missing cells filled.
pub fn impute_missing(sparse: &SparseMatrix, strategy: ImputeStrategy) -> Result<Matrix> {
    if sparse.nnz() == 0 {
        return Err(Error::InsufficientData("cannot impute an empty matrix".into()));
    }
    let global = (0..sparse.rows())
        .flat_map(|i| sparse.row(i).iter().map(|&(_, v)| v))
        .sum::<f64>()
        / sparse.nnz() as f64;
    let mean_or_global = |cells: &[(usize, f64)]| {
        if cells.is_empty() {
            global
        } else {
            cells.iter().map(|&(_, v)| v).sum::<f64>() / cells.len() as f64
        }
    };
    let mut out = match strategy {
        ImputeStrategy::Zero => Matrix::zeros(sparse.rows(), sparse.cols()),
        ImputeStrategy::GlobalMean => Matrix::from_fn(sparse.rows(), sparse.cols(), |_, _| global),
        ImputeStrategy::ItemMean => {
            let means: Vec<f64> = (0..sparse.cols()).map(|j| mean_or_global(sparse.col(j))).collect();
            Matrix::from_fn(sparse.rows(), sparse.cols(), |_, j| means[j])
        }
        ImputeStrategy::UserMean => {
            let means: Vec<f64> = (0..sparse.rows()).map(|i| mean_or_global(sparse.row(i))).collect();
            Matrix::from_fn(sparse.rows(), sparse.cols(), |i, _| means[i])
        }
    };
    for i in 0..sparse.rows() {
        for &(j, v) in sparse.row(i) {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}
