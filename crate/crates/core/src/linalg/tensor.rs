//! Third-order tensors, mode-n unfoldings, mode products and HOSVD.
//!
//! Unfolding convention (0-based): the mode-1 unfolding places
//! `T[i1, i2, i3]` at `(i1, i3·I2 + i2)`, and modes 2 and 3 follow
//! cyclically: `(i2, i1·I3 + i3)` and `(i3, i2·I1 + i1)`.

use super::decomp::complete_orthonormal;
use super::svd::{ssvd, SsvdParams, DEFAULT_OVERSAMPLE, DEFAULT_POWER_ITERS};
use super::Matrix;
use crate::error::{Error, Result};

/// Unfolding axis, 1-based as in `A₍₁₎`, `A₍₂₎`, `A₍₃₎`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
    Three,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::One, Mode::Two, Mode::Three];

    pub fn from_index(mode: usize) -> Result<Mode> {
        match mode {
            1 => Ok(Mode::One),
            2 => Ok(Mode::Two),
            3 => Ok(Mode::Three),
            other => Err(Error::InvalidArgument(format!("mode {other} not in 1..=3"))),
        }
    }

    fn axis(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 1,
            Mode::Three => 2,
        }
    }

    /// (row axis, slow column axis, fast column axis)
    fn axes(self) -> (usize, usize, usize) {
        match self {
            Mode::One => (0, 2, 1),
            Mode::Two => (1, 0, 2),
            Mode::Three => (2, 1, 0),
        }
    }
}

/// Dense I₁×I₂×I₃ tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.iter().product()],
        }
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(dims);
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for l in 0..dims[2] {
                    let v = f(i, j, l);
                    t.set(i, j, l, v);
                }
            }
        }
        t
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, l: usize) -> usize {
        debug_assert!(i < self.dims[0] && j < self.dims[1] && l < self.dims[2]);
        (i * self.dims[1] + j) * self.dims[2] + l
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.data[self.offset(i, j, l)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, l: usize, v: f64) {
        let o = self.offset(i, j, l);
        self.data[o] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &Tensor3) -> Tensor3 {
        assert_eq!(self.dims, other.dims);
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.dims, other.dims);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Mode-`mode` unfolding `A₍ₛ₎` of size `I_s × (product of the other dims)`.
pub fn mode_unfold(t: &Tensor3, mode: Mode) -> Matrix {
    let (row, slow, fast) = mode.axes();
    let d = t.dims;
    let mut m = Matrix::zeros(d[row], d[slow] * d[fast]);
    let mut idx = [0usize; 3];
    for r in 0..d[row] {
        idx[row] = r;
        for s in 0..d[slow] {
            idx[slow] = s;
            for f in 0..d[fast] {
                idx[fast] = f;
                m[(r, s * d[fast] + f)] = t.get(idx[0], idx[1], idx[2]);
            }
        }
    }
    m
}

/// Inverse of [`mode_unfold`].
pub fn mode_fold(m: &Matrix, mode: Mode, dims: [usize; 3]) -> Result<Tensor3> {
    let (row, slow, fast) = mode.axes();
    if m.rows() != dims[row] || m.cols() != dims[slow] * dims[fast] {
        return Err(Error::dims(
            format!("{}x{}", dims[row], dims[slow] * dims[fast]),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    let mut t = Tensor3::zeros(dims);
    let mut idx = [0usize; 3];
    for r in 0..dims[row] {
        idx[row] = r;
        for s in 0..dims[slow] {
            idx[slow] = s;
            for f in 0..dims[fast] {
                idx[fast] = f;
                t.set(idx[0], idx[1], idx[2], m[(r, s * dims[fast] + f)]);
            }
        }
    }
    Ok(t)
}

/// `T ×ₛ M`: the result's mode-s unfolding is `M · A₍ₛ₎`.
pub fn mode_product(t: &Tensor3, m: &Matrix, mode: Mode) -> Result<Tensor3> {
    let axis = mode.axis();
    if m.cols() != t.dims[axis] {
        return Err(Error::dims(
            format!("{} matrix columns", t.dims[axis]),
            m.cols(),
        ));
    }
    let mut dims = t.dims;
    dims[axis] = m.rows();
    mode_fold(&m.matmul(&mode_unfold(t, mode)), mode, dims)
}

/// Core `S` and factors `U⁽¹⁾, U⁽²⁾, U⁽³⁾` with `T ≈ S ×₁ U⁽¹⁾ ×₂ U⁽²⁾ ×₃ U⁽³⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct TuckerModel {
    core: Tensor3,
    factors: [Matrix; 3],
}

impl TuckerModel {
    pub fn new(core: Tensor3, factors: [Matrix; 3]) -> Result<Self> {
        for (s, f) in factors.iter().enumerate() {
            if f.cols() != core.dims[s] {
                return Err(Error::dims(
                    format!("factor {} with {} columns", s + 1, core.dims[s]),
                    f.cols(),
                ));
            }
        }
        Ok(Self { core, factors })
    }

    pub fn core(&self) -> &Tensor3 {
        &self.core
    }

    pub fn factor(&self, mode: Mode) -> &Matrix {
        &self.factors[mode.axis()]
    }

    pub fn ranks(&self) -> [usize; 3] {
        self.core.dims
    }

    /// Shape of the tensor this model reconstructs.
    pub fn dims(&self) -> [usize; 3] {
        [self.factors[0].rows(), self.factors[1].rows(), self.factors[2].rows()]
    }

    /// Norms of the rows of the core's mode-`mode` unfolding (the mode's
    /// singular values for an HOSVD core).
    pub fn mode_weights(&self, mode: Mode) -> Vec<f64> {
        let unfolded = mode_unfold(&self.core, mode);
        (0..unfolded.rows())
            .map(|r| unfolded.row(r).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// One reconstructed cell without materializing the tensor.
    pub fn cell(&self, i: usize, j: usize, l: usize) -> f64 {
        let [r1, r2, r3] = self.core.dims;
        let (u1, u2, u3) = (self.factors[0].row(i), self.factors[1].row(j), self.factors[2].row(l));
        let mut sum = 0.0;
        for a in 0..r1 {
            if u1[a] == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for b in 0..r2 {
                let mut acc = 0.0;
                for c in 0..r3 {
                    acc += self.core.get(a, b, c) * u3[c];
                }
                inner += acc * u2[b];
            }
            sum += inner * u1[a];
        }
        sum
    }
}

/// `S ×₁ U⁽¹⁾ ×₂ U⁽²⁾ ×₃ U⁽³⁾`.
pub fn tucker_reconstruct(model: &TuckerModel) -> Tensor3 {
    let mut t = model.core.clone();
    for mode in Mode::ALL {
        t = mode_product(&t, model.factor(mode), mode).expect("factor shapes checked on construction");
    }
    t
}

/// Leading `rank` left singular vectors of `a` through the randomized SVD;
/// ranks beyond `min(rows, cols)` are completed orthonormally.
fn leading_left_vectors(a: &Matrix, rank: usize, seed: u64) -> Result<Matrix> {
    let limit = a.rows().min(a.cols());
    let k = rank.min(limit);
    let params = SsvdParams {
        rank: k,
        oversample: DEFAULT_OVERSAMPLE.min(limit - k),
        power_iters: DEFAULT_POWER_ITERS,
        seed,
    };
    let u = ssvd(a, &params)?.u().clone();
    if k == rank {
        Ok(u)
    } else {
        Ok(complete_orthonormal(&u, rank))
    }
}

/// Truncated HOSVD: `U⁽ˢ⁾` holds the top `r_s` left singular vectors of the
/// mode-s unfolding, and the core is `T ×₁ U⁽¹⁾ᵀ ×₂ U⁽²⁾ᵀ ×₃ U⁽³⁾ᵀ`.
pub fn hosvd(t: &Tensor3, ranks: [usize; 3], seed: u64) -> Result<TuckerModel> {
    for (s, (&r, &d)) in ranks.iter().zip(&t.dims).enumerate() {
        if r == 0 || r > d {
            return Err(Error::InvalidRank(format!("mode-{} rank {r} outside 1..={d}", s + 1)));
        }
    }
    let mut factors = Vec::with_capacity(3);
    for (s, mode) in Mode::ALL.into_iter().enumerate() {
        let unfolded = mode_unfold(t, mode);
        factors.push(leading_left_vectors(&unfolded, ranks[s], seed.wrapping_add(s as u64))?);
    }
    let mut core = t.clone();
    for (mode, u) in Mode::ALL.into_iter().zip(&factors) {
        core = mode_product(&core, &u.transpose(), mode)?;
    }
    let [f1, f2, f3]: [Matrix; 3] = factors.try_into().expect("three factors");
    TuckerModel::new(core, [f1, f2, f3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::decomp::orthonormality_error;

    fn counting() -> Tensor3 {
        // T[i,j,l] = 4(i−1)+2(j−1)+l with 1-based indices
        Tensor3::from_fn([2, 2, 2], |i, j, l| (4 * i + 2 * j + l + 1) as f64)
    }

    #[test]
    fn unfold_mode1_enumerated() {
        let a = mode_unfold(&counting(), Mode::One);
        assert_eq!(a.shape(), (2, 4));
        // column (i3)·I2 + i2
        for i in 0..2 {
            for j in 0..2 {
                for l in 0..2 {
                    assert_eq!(a[(i, l * 2 + j)], (4 * i + 2 * j + l + 1) as f64);
                }
            }
        }
        assert_eq!(a.row(0), &[1.0, 3.0, 2.0, 4.0]);
        assert_eq!(a.row(1), &[5.0, 7.0, 6.0, 8.0]);
    }

    #[test]
    fn unfold_cyclic_modes() {
        let t = Tensor3::from_fn([2, 3, 4], |i, j, l| (100 * i + 10 * j + l) as f64);
        let a2 = mode_unfold(&t, Mode::Two);
        let a3 = mode_unfold(&t, Mode::Three);
        assert_eq!(a2.shape(), (3, 8));
        assert_eq!(a3.shape(), (4, 6));
        assert_eq!(a2[(2, 4 + 3)], t.get(1, 2, 3));
        assert_eq!(a3[(3, 2 * 2 + 1)], t.get(1, 2, 3));
    }

    #[test]
    fn scalar_tensor() {
        let t = Tensor3::from_fn([1, 1, 1], |_, _, _| 2.5);
        for mode in Mode::ALL {
            assert_eq!(mode_unfold(&t, mode).as_slice(), &[2.5]);
        }
        let p = mode_product(&t, &Matrix::from_rows(&[vec![3.0]]).unwrap(), Mode::One).unwrap();
        assert_eq!(p.get(0, 0, 0), 7.5);
    }

    #[test]
    fn fold_inverts_unfold() {
        let t = Tensor3::from_fn([3, 2, 4], |i, j, l| ((i * 11 + j * 5 + l * 3) as f64).sin());
        for mode in Mode::ALL {
            assert_eq!(mode_fold(&mode_unfold(&t, mode), mode, t.dims()).unwrap(), t);
        }
        assert!(mode_fold(&Matrix::zeros(2, 2), Mode::One, [3, 2, 4]).is_err());
        assert!(Mode::from_index(4).is_err());
    }

    #[test]
    fn product_with_identity() {
        let t = Tensor3::from_fn([3, 2, 4], |i, j, l| (i + 2 * j + 3 * l) as f64);
        for (s, mode) in Mode::ALL.into_iter().enumerate() {
            let id = Matrix::identity(t.dims()[s]);
            assert_eq!(mode_product(&t, &id, mode).unwrap(), t);
        }
        assert!(mode_product(&t, &Matrix::identity(5), Mode::One).is_err());
    }

    #[test]
    fn outer_product_core() {
        let a = [0.6, 0.8, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 0.28, 0.96];
        let scale = 2.0;
        let t = Tensor3::from_fn([3, 2, 3], |i, j, l| scale * a[i] * b[j] * c[l]);
        let m = hosvd(&t, [1, 1, 1], 3).unwrap();
        assert_eq!(m.core().dims(), [1, 1, 1]);
        assert!((m.core().get(0, 0, 0).abs() - scale).abs() < 1e-10);
        assert!(tucker_reconstruct(&m).max_abs_diff(&t) < 1e-8);
    }

    #[test]
    fn full_rank_is_lossless() {
        let t = Tensor3::from_fn([3, 4, 2], |i, j, l| ((i * 7 + j * 3 + l * 13) as f64).cos());
        let m = hosvd(&t, [3, 4, 2], 11).unwrap();
        for mode in Mode::ALL {
            assert!(orthonormality_error(m.factor(mode)) < 1e-8);
        }
        let err = tucker_reconstruct(&m).sub(&t).frobenius_norm() / t.frobenius_norm();
        assert!(err < 1e-8, "{err}");
        assert!((m.cell(2, 3, 1) - t.get(2, 3, 1)).abs() < 1e-10);
    }

    #[test]
    fn rank_beyond_unfolding_is_completed() {
        // mode-1 unfolding is 6x4, rank 6 needs completion
        let t = Tensor3::from_fn([6, 2, 2], |i, j, l| ((i + 1) * (j + 2) + l) as f64);
        let m = hosvd(&t, [6, 2, 2], 1).unwrap();
        assert!(orthonormality_error(m.factor(Mode::One)) < 1e-8);
        assert!(tucker_reconstruct(&m).max_abs_diff(&t) < 1e-8);
    }

    #[test]
    fn rank_errors() {
        let t = Tensor3::zeros([2, 2, 2]);
        assert!(hosvd(&t, [0, 1, 1], 0).is_err());
        assert!(hosvd(&t, [1, 3, 1], 0).is_err());
    }

    #[test]
    fn identity_factors_and_zero_core() {
        let t = Tensor3::from_fn([2, 3, 2], |i, j, l| (i * 6 + j * 2 + l) as f64);
        let id = TuckerModel::new(
            t.clone(),
            [Matrix::identity(2), Matrix::identity(3), Matrix::identity(2)],
        )
        .unwrap();
        assert_eq!(tucker_reconstruct(&id), t);
        let zero = TuckerModel::new(
            Tensor3::zeros([1, 1, 1]),
            [Matrix::zeros(4, 1), Matrix::zeros(3, 1), Matrix::zeros(2, 1)],
        )
        .unwrap();
        assert_eq!(tucker_reconstruct(&zero), Tensor3::zeros([4, 3, 2]));
    }
}
