//! Item-item similarity measures, criteria-vector distances and the sparse
//! symmetric similarity store used by the neighborhood predictor.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{FactorModel, Matrix, Mode, TuckerModel};
use crate::model::{Dataset, IdIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilarityKind {
    Pearson,
    Euclidean,
    LogLikelihood,
    Tanimoto,
    AdjustedCosine,
    Cosine,
    LatentCosine,
}

impl SimilarityKind {
    pub const ALL: [SimilarityKind; 7] = [
        SimilarityKind::Pearson,
        SimilarityKind::Euclidean,
        SimilarityKind::LogLikelihood,
        SimilarityKind::Tanimoto,
        SimilarityKind::AdjustedCosine,
        SimilarityKind::Cosine,
        SimilarityKind::LatentCosine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SimilarityKind::Pearson => "pearson",
            SimilarityKind::Euclidean => "euclidean",
            SimilarityKind::LogLikelihood => "loglikelihood",
            SimilarityKind::Tanimoto => "tanimoto",
            SimilarityKind::AdjustedCosine => "adjusted-cosine",
            SimilarityKind::Cosine => "cosine",
            SimilarityKind::LatentCosine => "latent",
        }
    }

    /// Tanimoto and log-likelihood look only at who rated, not at values.
    pub fn is_set_based(self) -> bool {
        matches!(self, SimilarityKind::Tanimoto | SimilarityKind::LogLikelihood)
    }

    pub fn default_min_co_ratings(self) -> usize {
        if self.is_set_based() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "pearson" => SimilarityKind::Pearson,
            "euclidean" => SimilarityKind::Euclidean,
            "loglikelihood" | "log-likelihood" => SimilarityKind::LogLikelihood,
            "tanimoto" => SimilarityKind::Tanimoto,
            "adjusted-cosine" | "adjusted_cosine" => SimilarityKind::AdjustedCosine,
            "cosine" => SimilarityKind::Cosine,
            "latent" | "latent-cosine" | "latent_cosine" => SimilarityKind::LatentCosine,
            other => return Err(Error::InvalidArgument(format!("unknown similarity {other:?}"))),
        })
    }
}

/// How Euclidean distance maps to similarity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EuclideanMode {
    /// `1 / (1 + d / √c)` for c co-raters.
    #[default]
    Normalized,
    /// `1 / (1 + d)`.
    Raw,
}

/// One user who rated both items of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoRating {
    pub user: usize,
    pub rating_a: f64,
    pub rating_b: f64,
}

fn for_each_co_rating(a: &[(usize, f64)], b: &[(usize, f64)], mut f: impl FnMut(usize, f64, f64)) {
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        let (ua, ra) = a[x];
        let (ub, rb) = b[y];
        if ua < ub {
            x += 1;
        } else if ub < ua {
            y += 1;
        } else {
            f(ua, ra, rb);
            x += 1;
            y += 1;
        }
    }
}

pub fn co_ratings(d: &Dataset, a: usize, b: usize) -> Vec<CoRating> {
    let mut out = Vec::new();
    for_each_co_rating(d.item_ratings(a), d.item_ratings(b), |user, rating_a, rating_b| {
        out.push(CoRating { user, rating_a, rating_b })
    });
    out
}

/// Centered sums of squares this small relative to the raw energy count as
/// zero; denoised inputs are only constant up to rounding.
const DEGENERATE_RATIO: f64 = 1e-12;

fn correlation(sxy: f64, sxx: f64, syy: f64, ex: f64, ey: f64) -> Option<f64> {
    if sxx <= DEGENERATE_RATIO * ex || syy <= DEGENERATE_RATIO * ey || sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

fn pearson_of(co: &[CoRating]) -> Option<f64> {
    if co.len() < 2 {
        return None;
    }
    let n = co.len() as f64;
    let mx = co.iter().map(|c| c.rating_a).sum::<f64>() / n;
    let my = co.iter().map(|c| c.rating_b).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy, mut ex, mut ey) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for c in co {
        let (dx, dy) = (c.rating_a - mx, c.rating_b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
        ex += c.rating_a * c.rating_a;
        ey += c.rating_b * c.rating_b;
    }
    correlation(sxy, sxx, syy, ex, ey)
}

fn adjusted_cosine_of(co: &[CoRating], means: &[f64]) -> Option<f64> {
    let (mut sxy, mut sxx, mut syy, mut ex, mut ey) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for c in co {
        let m = means[c.user];
        let (dx, dy) = (c.rating_a - m, c.rating_b - m);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
        ex += c.rating_a * c.rating_a;
        ey += c.rating_b * c.rating_b;
    }
    correlation(sxy, sxx, syy, ex, ey)
}

fn euclidean_of(co: &[CoRating], mode: EuclideanMode) -> Option<f64> {
    if co.is_empty() {
        return None;
    }
    let d = co
        .iter()
        .map(|c| (c.rating_a - c.rating_b).powi(2))
        .sum::<f64>()
        .sqrt();
    Some(match mode {
        EuclideanMode::Normalized => 1.0 / (1.0 + d / (co.len() as f64).sqrt()),
        EuclideanMode::Raw => 1.0 / (1.0 + d),
    })
}

/// Sample Pearson correlation over co-raters; `None` with fewer than two
/// co-raters or a constant side.
pub fn pearson(d: &Dataset, a: usize, b: usize) -> Option<f64> {
    pearson_of(&co_ratings(d, a, b))
}

/// Cosine of co-ratings centered on each user's mean over all their ratings.
pub fn adjusted_cosine(d: &Dataset, a: usize, b: usize) -> Option<f64> {
    adjusted_cosine_of(&co_ratings(d, a, b), &user_means(d))
}

pub fn euclidean_sim(d: &Dataset, a: usize, b: usize, mode: EuclideanMode) -> Option<f64> {
    euclidean_of(&co_ratings(d, a, b), mode)
}

/// Cosine of the full item columns, missing ratings counted as zero.
pub fn cosine(d: &Dataset, a: usize, b: usize) -> Option<f64> {
    let na = d.item_ratings(a).iter().map(|&(_, r)| r * r).sum::<f64>();
    let nb = d.item_ratings(b).iter().map(|&(_, r)| r * r).sum::<f64>();
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let mut dot = 0.0;
    for_each_co_rating(d.item_ratings(a), d.item_ratings(b), |_, x, y| dot += x * y);
    Some((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

fn intersection_size(a: &[(usize, f64)], b: &[(usize, f64)]) -> usize {
    let mut n = 0;
    for_each_co_rating(a, b, |_, _, _| n += 1);
    n
}

/// |Uₐ ∩ U_b| / |Uₐ ∪ U_b| over rater sets; 0 for an empty union.
pub fn tanimoto(d: &Dataset, a: usize, b: usize) -> f64 {
    let (ra, rb) = (d.item_ratings(a), d.item_ratings(b));
    let both = intersection_size(ra, rb);
    let union = ra.len() + rb.len() - both;
    if union == 0 {
        0.0
    } else {
        both as f64 / union as f64
    }
}

/// 2×2 contingency table `(k11, k12, k21, k22)` of two rater sets.
pub fn llr_counts(d: &Dataset, a: usize, b: usize, total_users: usize) -> (u64, u64, u64, u64) {
    let (ra, rb) = (d.item_ratings(a), d.item_ratings(b));
    let both = intersection_size(ra, rb);
    let union = ra.len() + rb.len() - both;
    (
        both as u64,
        (ra.len() - both) as u64,
        (rb.len() - both) as u64,
        total_users.saturating_sub(union) as u64,
    )
}

/// G-statistic `2·Σ k·ln(k·N / (row·col))` with `0·ln 0 = 0`.
pub fn log_likelihood_ratio(k11: u64, k12: u64, k21: u64, k22: u64) -> f64 {
    let n = (k11 + k12 + k21 + k22) as f64;
    let rows = [(k11 + k12) as f64, (k21 + k22) as f64];
    let cols = [(k11 + k21) as f64, (k12 + k22) as f64];
    let cells = [[k11, k12], [k21, k22]];
    let mut sum = 0.0;
    for (r, row) in cells.iter().enumerate() {
        for (c, &k) in row.iter().enumerate() {
            if k > 0 {
                let k = k as f64;
                sum += k * (k * n / (rows[r] * cols[c])).ln();
            }
        }
    }
    (2.0 * sum).max(0.0)
}

pub fn llr_to_similarity(llr: f64) -> f64 {
    1.0 - 1.0 / (1.0 + llr)
}

/// `1 − 1/(1 + LLR)` of the rater-set contingency table.
pub fn loglikelihood(d: &Dataset, a: usize, b: usize, total_users: usize) -> f64 {
    let (k11, k12, k21, k22) = llr_counts(d, a, b, total_users);
    llr_to_similarity(log_likelihood_ratio(k11, k12, k21, k22))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMetric {
    Manhattan,
    Euclidean,
    Chebyshev,
}

pub fn criteria_distance(v: &[f64], w: &[f64], metric: DistanceMetric) -> Result<f64> {
    if v.len() != w.len() {
        return Err(Error::dims(format!("{} criteria", v.len()), format!("{}", w.len())));
    }
    let diffs = v.iter().zip(w).map(|(a, b)| (a - b).abs());
    Ok(match metric {
        DistanceMetric::Manhattan => diffs.sum(),
        DistanceMetric::Euclidean => diffs.map(|x| x * x).sum::<f64>().sqrt(),
        DistanceMetric::Chebyshev => diffs.fold(0.0, f64::max),
    })
}

pub fn distance_to_similarity(dist: f64) -> Result<f64> {
    // NaN fails too
    if dist.is_nan() || dist < 0.0 {
        return Err(Error::InvalidArgument(format!("negative distance {dist}")));
    }
    Ok(1.0 / (1.0 + dist))
}

/// Per-user mean over all ratings; 0 for users with none.
pub fn user_means(d: &Dataset) -> Vec<f64> {
    (0..d.num_users()).map(|u| d.user_mean(u).unwrap_or(0.0)).collect()
}

/// Source of item-item similarities for neighborhood prediction.
pub trait ItemSimilarity: Sync {
    fn num_items(&self) -> usize;

    fn similarity(&self, a: usize, b: usize) -> Option<f64>;

    /// Calls `f(b, sim)` for every item `b ≠ a` with a defined similarity,
    /// in ascending `b`.
    fn for_each_neighbor(&self, a: usize, f: &mut dyn FnMut(usize, f64)) {
        for b in 0..self.num_items() {
            if b != a {
                if let Some(s) = self.similarity(a, b) {
                    f(b, s);
                }
            }
        }
    }
}

/// Rating-based measure bound to one dataset.
#[derive(Debug, Clone)]
pub struct PairMeasure<'a> {
    data: &'a Dataset,
    kind: SimilarityKind,
    euclidean_mode: EuclideanMode,
    means: Vec<f64>,
}

impl<'a> PairMeasure<'a> {
    pub fn new(data: &'a Dataset, kind: SimilarityKind) -> Result<Self> {
        if kind == SimilarityKind::LatentCosine {
            return Err(Error::InvalidArgument(
                "latent similarity needs a factor model, not a rating matrix".into(),
            ));
        }
        let means = if kind == SimilarityKind::AdjustedCosine {
            user_means(data)
        } else {
            Vec::new()
        };
        Ok(Self {
            data,
            kind,
            euclidean_mode: EuclideanMode::default(),
            means,
        })
    }

    pub fn euclidean_mode(mut self, mode: EuclideanMode) -> Self {
        self.euclidean_mode = mode;
        self
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    /// Similarity and co-rater count of items `a` and `b`.
    pub fn pair(&self, a: usize, b: usize) -> (Option<f64>, usize) {
        let d = self.data;
        match self.kind {
            SimilarityKind::Tanimoto => {
                let co = intersection_size(d.item_ratings(a), d.item_ratings(b));
                (Some(tanimoto(d, a, b)), co)
            }
            SimilarityKind::LogLikelihood => {
                let counts = llr_counts(d, a, b, d.num_users());
                let llr = log_likelihood_ratio(counts.0, counts.1, counts.2, counts.3);
                (Some(llr_to_similarity(llr)), counts.0 as usize)
            }
            SimilarityKind::Cosine => {
                let co = intersection_size(d.item_ratings(a), d.item_ratings(b));
                (cosine(d, a, b), co)
            }
            _ => {
                let co = co_ratings(d, a, b);
                let sim = match self.kind {
                    SimilarityKind::Pearson => pearson_of(&co),
                    SimilarityKind::AdjustedCosine => adjusted_cosine_of(&co, &self.means),
                    SimilarityKind::Euclidean => euclidean_of(&co, self.euclidean_mode),
                    _ => unreachable!("handled above"),
                };
                (sim, co.len())
            }
        }
    }
}

/// Sparse symmetric item×item similarities, diagonal excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityStore {
    kind: SimilarityKind,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SimilarityStore {
    /// Builds from unordered pairs `(a, b, sim)` with `a ≠ b`; each pair is
    /// mirrored.
    pub fn from_pairs(
        kind: SimilarityKind,
        num_items: usize,
        pairs: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows = vec![Vec::new(); num_items];
        for (a, b, s) in pairs {
            if a >= num_items || b >= num_items {
                return Err(Error::dims(format!("items below {num_items}"), format!("({a}, {b})")));
            }
            if a == b || !s.is_finite() {
                return Err(Error::InvalidArgument(format!("bad similarity entry ({a}, {b}, {s})")));
            }
            rows[a].push((b, s));
            rows[b].push((a, s));
        }
        for row in &mut rows {
            row.sort_by_key(|&(b, _)| b);
            row.dedup_by_key(|&mut (b, _)| b);
        }
        Ok(Self { kind, rows })
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }

    pub fn get(&self, a: usize, b: usize) -> Option<f64> {
        let row = self.rows.get(a)?;
        row.binary_search_by_key(&b, |&(j, _)| j).ok().map(|p| row[p].1)
    }

    /// Neighbors of `a` sorted by item index.
    pub fn neighbors(&self, a: usize) -> &[(usize, f64)] {
        self.rows.get(a).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of unordered pairs.
    pub fn num_pairs(&self) -> usize {
        self.rows.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Pairs `(a, b, sim)` with `a < b`, ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, row)| row.iter().filter(move |&&(b, _)| b > a).map(move |&(b, s)| (a, b, s)))
    }

    /// `item_a,item_b,kind,value` lines using external ids.
    pub fn to_csv(&self, items: &IdIndex) -> String {
        let mut out = String::from("item_a,item_b,kind,value\n");
        for (a, b, s) in self.pairs() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                items.id(a).unwrap_or("?"),
                items.id(b).unwrap_or("?"),
                self.kind,
                s
            );
        }
        out
    }
}

impl ItemSimilarity for SimilarityStore {
    fn num_items(&self) -> usize {
        self.rows.len()
    }

    fn similarity(&self, a: usize, b: usize) -> Option<f64> {
        self.get(a, b)
    }

    fn for_each_neighbor(&self, a: usize, f: &mut dyn FnMut(usize, f64)) {
        for &(b, s) in self.neighbors(a) {
            f(b, s);
        }
    }
}

/// All defined pairwise similarities with at least `min_co_ratings`
/// co-raters. Rows are computed in parallel; the result does not depend on
/// the thread count.
pub fn item_similarity_matrix(d: &Dataset, kind: SimilarityKind, min_co_ratings: usize) -> Result<SimilarityStore> {
    item_similarity_matrix_with(&PairMeasure::new(d, kind)?, d.num_items(), min_co_ratings)
}

pub fn item_similarity_matrix_with(
    measure: &PairMeasure<'_>,
    num_items: usize,
    min_co_ratings: usize,
) -> Result<SimilarityStore> {
    let upper: Vec<Vec<(usize, f64)>> = (0..num_items)
        .into_par_iter()
        .map(|a| {
            ((a + 1)..num_items)
                .filter_map(|b| match measure.pair(a, b) {
                    (Some(s), co) if co >= min_co_ratings && co > 0 => Some((b, s)),
                    _ => None,
                })
                .collect()
        })
        .collect();
    SimilarityStore::from_pairs(
        measure.kind(),
        num_items,
        upper
            .into_iter()
            .enumerate()
            .flat_map(|(a, row)| row.into_iter().map(move |(b, s)| (a, b, s))),
    )
}

/// Cosine similarity between latent item vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSimilarity {
    vectors: Matrix,
    norms: Vec<f64>,
}

impl LatentSimilarity {
    /// One row per item.
    pub fn new(vectors: Matrix) -> Self {
        let norms = (0..vectors.rows())
            .map(|i| vectors.row(i).iter().map(|x| x * x).sum::<f64>().sqrt())
            .collect();
        Self { vectors, norms }
    }

    /// Rows of `V_k·Σ_k`.
    pub fn from_factor_model(model: &FactorModel) -> Self {
        Self::new(model.column_vectors())
    }

    /// Rows of the item factor, each column scaled by the core's mode-2 weight.
    pub fn from_tucker(model: &TuckerModel) -> Self {
        Self::new(model.factor(Mode::Two).scale_cols(&model.mode_weights(Mode::Two)))
    }

    pub fn vectors(&self) -> &Matrix {
        &self.vectors
    }
}

impl ItemSimilarity for LatentSimilarity {
    fn num_items(&self) -> usize {
        self.vectors.rows()
    }

    fn similarity(&self, a: usize, b: usize) -> Option<f64> {
        latent_cosine(self, a, b)
    }
}

/// `None` for a zero latent vector or an index past the model.
pub fn latent_cosine(model: &LatentSimilarity, a: usize, b: usize) -> Option<f64> {
    let (na, nb) = (*model.norms.get(a)?, *model.norms.get(b)?);
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    let dot: f64 = model
        .vectors
        .row(a)
        .iter()
        .zip(model.vectors.row(b))
        .map(|(x, y)| x * y)
        .sum();
    Some((dot / (na * nb)).clamp(-1.0, 1.0))
}
