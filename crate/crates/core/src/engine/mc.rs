//! Multi-criteria pipeline: impute the rating tensor, denoise it with a
//! truncated HOSVD, form per-criterion item neighborhoods, predict each
//! criterion and combine the criteria into an overall rating.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_solve, hosvd, impute_missing, ImputeStrategy, Matrix, Mode, Tensor3, TuckerModel};
use crate::model::{CriteriaTensor, Dataset, RatingScale};
use crate::similarity::{
    item_similarity_matrix, ItemSimilarity, LatentSimilarity, SimilarityKind, SimilarityStore,
};

use super::neighborhood::{predict_single, NeighborhoodSpec, Prediction};

/// Default cap on dense tensor cells (users × items × slices).
pub const DEFAULT_CELL_BUDGET: usize = 200_000_000;

const RIDGE: f64 = 1e-6;

/// Where per-criterion item similarities are measured.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SimSpace {
    /// Cosine between item vectors of the HOSVD model, one set per criterion.
    #[default]
    Latent,
    /// A rating-based measure over the denoised values at observed cells.
    Reconstructed,
}

impl SimSpace {
    pub fn name(self) -> &'static str {
        match self {
            SimSpace::Latent => "latent",
            SimSpace::Reconstructed => "reconstructed",
        }
    }
}

impl fmt::Display for SimSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latent" => Ok(SimSpace::Latent),
            "reconstructed" => Ok(SimSpace::Reconstructed),
            other => Err(Error::InvalidArgument(format!("unknown similarity space {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    /// HOSVD ranks for (users, items, slices).
    pub ranks: [usize; 3],
    /// Center each item's slice columns before the decomposition.
    pub pca_option: bool,
    pub sim_space: SimSpace,
    /// Rating-based measure for the reconstructed space.
    pub kind: SimilarityKind,
    pub neighborhood: NeighborhoodSpec,
    /// Defaults to the measure's own minimum.
    pub min_co_ratings: Option<usize>,
    pub seed: u64,
    pub cell_budget: usize,
}

impl McConfig {
    pub fn new(ranks: [usize; 3], seed: u64) -> Self {
        Self {
            ranks,
            pca_option: true,
            sim_space: SimSpace::Latent,
            kind: SimilarityKind::Pearson,
            neighborhood: NeighborhoodSpec::default(),
            min_co_ratings: None,
            seed,
            cell_budget: DEFAULT_CELL_BUDGET,
        }
    }

    pub fn pca_option(mut self, on: bool) -> Self {
        self.pca_option = on;
        self
    }

    pub fn sim_space(mut self, space: SimSpace) -> Self {
        self.sim_space = space;
        self
    }

    pub fn kind(mut self, kind: SimilarityKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn neighborhood(mut self, spec: NeighborhoodSpec) -> Self {
        self.neighborhood = spec;
        self
    }

    pub fn min_co_ratings(mut self, n: usize) -> Self {
        self.min_co_ratings = Some(n);
        self
    }

    pub fn cell_budget(mut self, cells: usize) -> Self {
        self.cell_budget = cells;
        self
    }

    /// The measure actually used per criterion.
    pub fn effective_kind(&self) -> SimilarityKind {
        match self.sim_space {
            SimSpace::Latent => SimilarityKind::LatentCosine,
            SimSpace::Reconstructed => self.kind,
        }
    }
}

/// `R₀ ≈ w₀ + Σ wᵢ·Rᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationWeights {
    weights: Vec<f64>,
    fallback: bool,
}

impl AggregationWeights {
    pub fn new(intercept: f64, criteria: &[f64]) -> Self {
        let mut weights = Vec::with_capacity(criteria.len() + 1);
        weights.push(intercept);
        weights.extend_from_slice(criteria);
        Self { weights, fallback: false }
    }

    /// `(0, 1/k, …, 1/k)`.
    pub fn equal(k: usize) -> Self {
        let mut w = Self::new(0.0, &vec![1.0 / k as f64; k]);
        w.fallback = true;
        w
    }

    pub fn intercept(&self) -> f64 {
        self.weights[0]
    }

    pub fn criteria(&self) -> &[f64] {
        &self.weights[1..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }

    /// Set when the fit had too few cells and equal weights were used.
    pub fn is_fallback(&self) -> bool {
        self.fallback
    }
}

/// Least squares of the overall rating on `(1, R₁, …, R_k)` over the training
/// cells, with a small ridge on the Gram matrix. Fewer than k+1 cells gives
/// equal weights.
pub fn fit_aggregation(train: &CriteriaTensor) -> AggregationWeights {
    let k = train.k();
    let p = k + 1;
    if train.len() < p {
        log::warn!("{} training cells for {p} aggregation weights; using equal weights", train.len());
        return AggregationWeights::equal(k);
    }
    let mut gram = Matrix::zeros(p, p);
    let mut rhs = vec![0.0; p];
    let mut x = vec![1.0; p];
    for (_, cell) in train.cells() {
        x[1..].copy_from_slice(&cell[1..]);
        for a in 0..p {
            rhs[a] += x[a] * cell[0];
            for b in 0..p {
                gram[(a, b)] += x[a] * x[b];
            }
        }
    }
    for a in 0..p {
        gram[(a, a)] += RIDGE;
    }
    match cholesky_solve(&gram, &rhs) {
        Some(w) if w.iter().all(|v| v.is_finite()) => AggregationWeights::new(w[0], &w[1..]),
        _ => {
            log::warn!("singular aggregation system; using equal weights");
            AggregationWeights::equal(k)
        }
    }
}

/// `w₀ + Σ wᵢ·predᵢ`, clamped to the scale.
pub fn aggregate_overall(weights: &AggregationWeights, criteria: &[f64], scale: &RatingScale) -> Result<f64> {
    if criteria.len() != weights.criteria().len() {
        return Err(Error::dims(
            format!("{} criterion predictions", weights.criteria().len()),
            criteria.len(),
        ));
    }
    let sum: f64 = weights.criteria().iter().zip(criteria).map(|(w, c)| w * c).sum();
    Ok(scale.clamp(weights.intercept() + sum))
}

/// Dense users × items × (k+1) tensor with each slice's missing cells set to
/// the item's mean in that slice.
pub fn impute_tensor(t: &CriteriaTensor) -> Result<Tensor3> {
    let (m, n, slices) = (t.num_users(), t.num_items(), t.k() + 1);
    let mut out = Tensor3::zeros([m, n, slices]);
    for s in 0..slices {
        let slice = if s == 0 { t.overall_slice() } else { t.criteria_slice(s)? };
        let dense = impute_missing(&slice.to_sparse_matrix(), ImputeStrategy::ItemMean)?;
        for u in 0..m {
            for (i, &v) in dense.row(u).iter().enumerate() {
                out.set(u, i, s, v);
            }
        }
    }
    Ok(out)
}

/// Item similarities of one criterion slice.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceSimilarity {
    Store(SimilarityStore),
    Latent(LatentSimilarity),
}

impl ItemSimilarity for SliceSimilarity {
    fn num_items(&self) -> usize {
        match self {
            SliceSimilarity::Store(s) => s.num_items(),
            SliceSimilarity::Latent(l) => l.num_items(),
        }
    }

    fn similarity(&self, a: usize, b: usize) -> Option<f64> {
        match self {
            SliceSimilarity::Store(s) => s.similarity(a, b),
            SliceSimilarity::Latent(l) => l.similarity(a, b),
        }
    }

    fn for_each_neighbor(&self, a: usize, f: &mut dyn FnMut(usize, f64)) {
        match self {
            SliceSimilarity::Store(s) => s.for_each_neighbor(a, f),
            SliceSimilarity::Latent(l) => l.for_each_neighbor(a, f),
        }
    }
}

/// Criterion predictions for one (user, item) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct McPrediction {
    pub user: usize,
    pub item: usize,
    pub overall: f64,
    pub criteria: Vec<f64>,
    /// Neighbors used per criterion; 0 where the denoised value stood in.
    pub support: Vec<usize>,
}

impl McPrediction {
    /// Every criterion came from a neighborhood.
    pub fn is_supported(&self) -> bool {
        self.support.iter().all(|&s| s > 0)
    }
}

#[derive(Debug, Clone)]
pub struct McModel {
    config: McConfig,
    tucker: TuckerModel,
    /// Per-(item, slice) means removed before the decomposition.
    means: Option<Vec<f64>>,
    overall: Dataset,
    slices: Vec<Dataset>,
    similarities: Vec<SliceSimilarity>,
    weights: AggregationWeights,
}

/// Per-criterion item vectors: row i of `U⁽²⁾·G_cᵀ`, where `G_c` is the core
/// contracted with row c of `U⁽³⁾`. Their cosines equal the cosines of the
/// model's reconstructed item columns in slice c.
fn slice_item_vectors(tucker: &TuckerModel, slice: usize) -> Matrix {
    let [r1, r2, r3] = tucker.ranks();
    let core = tucker.core();
    let u3 = tucker.factor(Mode::Three).row(slice);
    let g = Matrix::from_fn(r1, r2, |a, b| (0..r3).map(|c| core.get(a, b, c) * u3[c]).sum());
    tucker.factor(Mode::Two).matmul(&g.transpose())
}

/// Builds the model from training data.
pub fn build_mc_model(t: &CriteriaTensor, config: &McConfig) -> Result<McModel> {
    if t.is_empty() {
        return Err(Error::InsufficientData("empty rating tensor".into()));
    }
    let slices_n = t.k() + 1;
    let cells = t
        .num_users()
        .checked_mul(t.num_items())
        .and_then(|c| c.checked_mul(slices_n))
        .unwrap_or(usize::MAX);
    if cells > config.cell_budget {
        return Err(Error::MemoryBudget {
            cells,
            budget: config.cell_budget,
        });
    }
    if config.sim_space == SimSpace::Reconstructed && config.kind == SimilarityKind::LatentCosine {
        return Err(Error::InvalidArgument(
            "the reconstructed space needs a rating-based measure".into(),
        ));
    }

    let mut dense = impute_tensor(t)?;
    let [m, n, _] = dense.dims();
    let means = if config.pca_option {
        let mut means = vec![0.0; n * slices_n];
        for i in 0..n {
            for s in 0..slices_n {
                let mean = (0..m).map(|u| dense.get(u, i, s)).sum::<f64>() / m as f64;
                means[i * slices_n + s] = mean;
                for u in 0..m {
                    dense.set(u, i, s, dense.get(u, i, s) - mean);
                }
            }
        }
        Some(means)
    } else {
        None
    };
    let tucker = hosvd(&dense, config.ranks, config.seed)?;
    drop(dense);

    let mut model = McModel {
        config: config.clone(),
        tucker,
        means,
        overall: t.overall_slice(),
        slices: (1..slices_n).map(|c| t.criteria_slice(c)).collect::<Result<_>>()?,
        similarities: Vec::new(),
        weights: fit_aggregation(t),
    };
    let min_co = config.min_co_ratings.unwrap_or(config.kind.default_min_co_ratings());
    for c in 1..slices_n {
        let sims = match config.sim_space {
            SimSpace::Latent => SliceSimilarity::Latent(LatentSimilarity::new(slice_item_vectors(&model.tucker, c))),
            SimSpace::Reconstructed => {
                let raw = &model.slices[c - 1];
                let scale = raw.scale();
                let denoised = raw
                    .cells()
                    .map(|(u, i, _)| ((u, i), scale.clamp(model.denoised(u, i, c))))
                    .collect();
                let ds = Dataset::from_cells(raw.users().clone(), raw.items().clone(), denoised, scale.clone())?;
                SliceSimilarity::Store(item_similarity_matrix(&ds, config.kind, min_co)?)
            }
        };
        model.similarities.push(sims);
    }
    Ok(model)
}

impl McModel {
    pub fn config(&self) -> &McConfig {
        &self.config
    }

    pub fn tucker(&self) -> &TuckerModel {
        &self.tucker
    }

    pub fn weights(&self) -> &AggregationWeights {
        &self.weights
    }

    /// Per-(item, slice) means, item-major, when the PCA option is on.
    pub fn means(&self) -> Option<&[f64]> {
        self.means.as_deref()
    }

    pub fn k(&self) -> usize {
        self.slices.len()
    }

    pub fn scale(&self) -> &RatingScale {
        self.overall.scale()
    }

    /// Overall ratings of the training data.
    pub fn overall(&self) -> &Dataset {
        &self.overall
    }

    /// Training ratings of criterion `c` (1-based).
    pub fn criterion(&self, c: usize) -> Option<&Dataset> {
        c.checked_sub(1).and_then(|i| self.slices.get(i))
    }

    /// Similarities of criterion `c` (1-based).
    pub fn similarities(&self, c: usize) -> Option<&SliceSimilarity> {
        c.checked_sub(1).and_then(|i| self.similarities.get(i))
    }

    /// Reconstructed value of slice `s` (0 = overall), means restored.
    pub fn denoised(&self, user: usize, item: usize, slice: usize) -> f64 {
        let mean = self
            .means
            .as_ref()
            .map_or(0.0, |m| m[item * (self.k() + 1) + slice]);
        self.tucker.cell(user, item, slice) + mean
    }

    pub fn denoised_tensor(&self) -> Tensor3 {
        Tensor3::from_fn(self.tucker.dims(), |u, i, s| self.denoised(u, i, s))
    }

    /// Neighborhood prediction per criterion; a criterion without neighbors
    /// takes the denoised cell value instead.
    pub fn predict_criteria(&self, user: usize, item: usize) -> Result<(Vec<f64>, Vec<usize>)> {
        if user >= self.overall.num_users() || item >= self.overall.num_items() {
            return Err(Error::InvalidArgument(format!("no cell ({user}, {item}) in the model")));
        }
        let mut values = Vec::with_capacity(self.k());
        let mut support = Vec::with_capacity(self.k());
        for (c, (data, sims)) in self.slices.iter().zip(&self.similarities).enumerate() {
            match predict_single(data, sims, &self.config.neighborhood, user, item) {
                Some(p) => {
                    values.push(p.value);
                    support.push(p.support);
                }
                None => {
                    values.push(self.scale().clamp(self.denoised(user, item, c + 1)));
                    support.push(0);
                }
            }
        }
        Ok((values, support))
    }

    pub fn predict(&self, user: usize, item: usize) -> Result<McPrediction> {
        let (criteria, support) = self.predict_criteria(user, item)?;
        let overall = aggregate_overall(&self.weights, &criteria, self.scale())?;
        Ok(McPrediction {
            user,
            item,
            overall,
            criteria,
            support,
        })
    }

    /// `None` when either id is absent from the training data.
    pub fn predict_ids(&self, user_id: &str, item_id: &str) -> Option<McPrediction> {
        let u = self.overall.users().index_of(user_id)?;
        let i = self.overall.items().index_of(item_id)?;
        self.predict(u, i).ok()
    }

    /// Top `n` items the user has not rated, by predicted overall rating.
    /// Items where some criterion has no neighborhood are left out.
    pub fn recommend(&self, user: usize, n: usize) -> Vec<Prediction> {
        if user >= self.overall.num_users() || n == 0 {
            return Vec::new();
        }
        let mut preds: Vec<Prediction> = (0..self.overall.num_items())
            .filter(|&i| self.overall.rating(user, i).is_none())
            .filter_map(|i| self.predict(user, i).ok())
            .filter(McPrediction::is_supported)
            .map(|p| Prediction {
                user,
                item: p.item,
                value: p.overall,
                support: p.support.iter().copied().min().unwrap_or(0),
            })
            .collect();
        preds.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.item.cmp(&b.item)));
        preds.truncate(n);
        preds
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CriteriaRecord;

    fn tensor(rows: &[(&str, &str, &[f64], f64)]) -> CriteriaTensor {
        let k = rows[0].2.len();
        let recs: Vec<_> = rows
            .iter()
            .map(|&(u, i, c, o)| CriteriaRecord::new(u, i, c.to_vec(), o))
            .collect();
        CriteriaTensor::from_records(&recs, k, RatingScale::five_star()).unwrap().0
    }

    #[test]
    fn aggregation_exact_dependence() {
        let t = tensor(&[
            ("a", "x", &[1.0, 5.0], 1.0),
            ("a", "y", &[2.0, 3.0], 2.0),
            ("b", "x", &[4.0, 4.0], 4.0),
            ("b", "y", &[5.0, 1.0], 5.0),
            ("c", "x", &[3.0, 2.0], 3.0),
        ]);
        let w = fit_aggregation(&t);
        assert!(!w.is_fallback());
        assert!(w.intercept().abs() < 1e-6, "{w:?}");
        assert!((w.criteria()[0] - 1.0).abs() < 1e-6, "{w:?}");
        assert!(w.criteria()[1].abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn aggregation_fallback() {
        let t = tensor(&[("a", "x", &[1.0, 5.0, 3.0, 3.0], 3.0), ("b", "x", &[2.0, 2.0, 2.0, 2.0], 2.0)]);
        let w = fit_aggregation(&t);
        assert!(w.is_fallback());
        assert_eq!(w.as_slice(), &[0.0, 0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn aggregate_examples() {
        let scale = RatingScale::letter13();
        let w = AggregationWeights::equal(4);
        assert_eq!(aggregate_overall(&w, &[4.0; 4], &scale).unwrap(), 4.0);
        let heavy = AggregationWeights::new(0.4, &[1.0]);
        assert_eq!(aggregate_overall(&heavy, &[13.0], &scale).unwrap(), 13.0);
        assert!(aggregate_overall(&w, &[4.0; 3], &scale).is_err());
    }

    #[test]
    fn memory_guard() {
        let t = tensor(&[("a", "x", &[1.0], 1.0), ("b", "y", &[2.0], 2.0)]);
        let err = build_mc_model(&t, &McConfig::new([1, 1, 1], 0).cell_budget(7)).unwrap_err();
        assert!(matches!(err, Error::MemoryBudget { cells: 8, budget: 7 }));
    }

    #[test]
    fn imputation_uses_item_means() {
        let t = tensor(&[("a", "x", &[1.0], 2.0), ("b", "x", &[3.0], 4.0), ("c", "y", &[5.0], 5.0)]);
        let dense = impute_tensor(&t).unwrap();
        assert_eq!(dense.dims(), [3, 2, 2]);
        assert_eq!(dense.get(2, 0, 0), 3.0);
        assert_eq!(dense.get(2, 0, 1), 2.0);
        assert_eq!(dense.get(0, 1, 1), 5.0);
    }

    #[test]
    fn identical_neighbors_give_their_ratings() {
        // v rated x and y identically on every criterion; t is like x for u
        let t = tensor(&[
            ("u", "x", &[2.0, 4.0], 3.0),
            ("u", "t", &[2.0, 4.0], 3.0),
            ("w", "x", &[5.0, 1.0], 3.0),
            ("w", "t", &[5.0, 1.0], 3.0),
            ("v", "x", &[3.0, 5.0], 4.0),
        ]);
        let config = McConfig::new([3, 2, 3], 1).pca_option(false);
        let model = build_mc_model(&t, &config).unwrap();
        let (u, x) = (t.users().index_of("v").unwrap(), t.items().index_of("t").unwrap());
        let (values, support) = model.predict_criteria(u, x).unwrap();
        assert_eq!(support, vec![1, 1]);
        assert!((values[0] - 3.0).abs() < 1e-12 && (values[1] - 5.0).abs() < 1e-12, "{values:?}");
        assert!(model.predict_criteria(9, 0).is_err());
    }
}
