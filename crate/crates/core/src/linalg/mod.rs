//! Dense and sparse numerics: randomized truncated SVD, PCA, HOSVD and
//! missing-value imputation.

pub mod decomp;
mod impute;
mod matrix;
mod pca;
mod svd;
mod tensor;

pub use decomp::{cholesky_solve, orthonormality_error, symmetric_eigen, SymmetricEigen};
pub use impute::{impute_missing, ImputeStrategy};
pub use matrix::{LinearOperator, Matrix, SparseMatrix};
pub use pca::{covariance, pca, PcaModel};
pub use svd::{
    gaussian_sketch, ssvd, truncated_svd, truncated_svd_seeded, FactorModel, SsvdParams,
    DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS, DEFAULT_SEED,
};
pub use tensor::{hosvd, mode_fold, mode_product, mode_unfold, tucker_reconstruct, Mode, Tensor3, TuckerModel};
