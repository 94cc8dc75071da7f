//! Benchmark protocol: split, train on the training part, predict every test
//! cell, rank Top-N lists per test user, and report.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::metrics::{bias, mae, precision_recall_f1, rmse, PredictionPair};
use super::report::EvalReport;
use crate::engine::{build_mc_model, predict_single, recommend_top_n, McConfig, NeighborhoodSpec};
use crate::error::{Error, Result};
use crate::ingest::{
    density_filter, parse_movielens, parse_multicriteria, split_train_test, DensityFilterSpec, SplitSpec,
};
use crate::linalg::{impute_missing, truncated_svd_seeded, ImputeStrategy};
use crate::model::{CriteriaRecord, CriteriaTensor, Dataset, IdIndex, Rated, RatingRecord, RatingScale};
use crate::similarity::{
    item_similarity_matrix_with, EuclideanMode, ItemSimilarity, LatentSimilarity, PairMeasure, SimilarityKind,
};

pub const DEFAULT_TOP_N: usize = 10;
pub const DEFAULT_LATENT_RANK: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub dataset: String,
    pub kind: SimilarityKind,
    pub train_fraction: f64,
    pub seed: u64,
    pub top_n: usize,
    /// Defaults to the scale's threshold.
    pub relevance_threshold: Option<f64>,
    pub min_co_ratings: Option<usize>,
    pub euclidean_mode: EuclideanMode,
    pub neighborhood: NeighborhoodSpec,
    /// Rank of the SVD behind the latent measure.
    pub latent_rank: usize,
    pub density: DensityFilterSpec,
}

impl BenchmarkConfig {
    pub fn new(kind: SimilarityKind, train_fraction: f64, seed: u64) -> Self {
        Self {
            dataset: String::new(),
            kind,
            train_fraction,
            seed,
            top_n: DEFAULT_TOP_N,
            relevance_threshold: None,
            min_co_ratings: None,
            euclidean_mode: EuclideanMode::default(),
            neighborhood: NeighborhoodSpec::default(),
            latent_rank: DEFAULT_LATENT_RANK,
            density: DensityFilterSpec::default(),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::from(e).with_context(format!("reading {}", path.display())))
}

fn label(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn optional(r: Result<f64>) -> Option<f64> {
    r.ok()
}

struct Ranking {
    precision: f64,
    recall: f64,
    f1: f64,
    catalog_coverage: f64,
    users: usize,
}

/// Averages precision and recall over test users known in training that
/// have at least one relevant test item; F1 is taken of the averages.
fn ranking_metrics<R: Rated + Sync>(
    users: &IdIndex,
    items: &IdIndex,
    test: &[R],
    rating: impl Fn(&R) -> f64,
    threshold: f64,
    recommend: impl Fn(usize) -> Vec<usize> + Sync,
) -> Ranking {
    let mut interesting: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for r in test {
        if let Some(u) = users.index_of(r.user_id()) {
            if rating(r) >= threshold {
                interesting.entry(u).or_default().push(r.item_id());
            }
        }
    }
    let per_user: Vec<(f64, f64, Vec<usize>)> = interesting
        .par_iter()
        .map(|(&u, relevant)| {
            let rec = recommend(u);
            let ids: Vec<&str> = rec.iter().map(|&i| items.id(i).expect("indexed item")).collect();
            let (p, r, _) = precision_recall_f1(&ids, relevant);
            (p, r, rec)
        })
        .collect();
    let n = per_user.len();
    let mut seen = BTreeSet::new();
    let (mut p_sum, mut r_sum) = (0.0, 0.0);
    for (p, r, rec) in &per_user {
        p_sum += p;
        r_sum += r;
        seen.extend(rec.iter().copied());
    }
    let (precision, recall) = if n == 0 { (0.0, 0.0) } else { (p_sum / n as f64, r_sum / n as f64) };
    Ranking {
        precision,
        recall,
        f1: super::metrics::f1(precision, recall),
        catalog_coverage: if items.is_empty() { 0.0 } else { seen.len() as f64 / items.len() as f64 },
        users: n,
    }
}

/// Similarity source of a single-criterion benchmark.
pub fn build_similarity(train: &Dataset, config: &BenchmarkConfig) -> Result<Box<dyn ItemSimilarity>> {
    if config.kind == SimilarityKind::LatentCosine {
        let dense = impute_missing(&train.to_sparse_matrix(), ImputeStrategy::ItemMean)?;
        let rank = config.latent_rank.min(dense.rows().min(dense.cols()));
        let model = truncated_svd_seeded(&dense, rank, config.seed)?;
        return Ok(Box::new(LatentSimilarity::from_factor_model(&model)));
    }
    let min_co = config.min_co_ratings.unwrap_or(config.kind.default_min_co_ratings());
    let measure = PairMeasure::new(train, config.kind)?.euclidean_mode(config.euclidean_mode);
    Ok(Box::new(item_similarity_matrix_with(&measure, train.num_items(), min_co)?))
}

/// Runs the single-criterion protocol on in-memory records.
pub fn run_benchmark_records(records: &[RatingRecord], scale: &RatingScale, config: &BenchmarkConfig) -> Result<EvalReport> {
    let records = density_filter(records, config.density);
    let (train, test) = split_train_test(&records, SplitSpec::new(config.train_fraction, config.seed)?);
    let (train, _) = Dataset::from_records(&train, scale.clone())?;
    let sims = build_similarity(&train, config)?;
    let sims = sims.as_ref();

    let predicted: Vec<Option<f64>> = test
        .par_iter()
        .map(|r| {
            let u = train.users().index_of(&r.user_id)?;
            let i = train.items().index_of(&r.item_id)?;
            predict_single(&train, sims, &config.neighborhood, u, i).map(|p| p.value)
        })
        .collect();
    let pairs: Vec<PredictionPair> = test
        .iter()
        .zip(&predicted)
        .filter_map(|(r, p)| p.map(|p| PredictionPair::new(p, r.overall)))
        .collect();

    let threshold = config.relevance_threshold.unwrap_or(scale.default_relevance_threshold());
    let ranking = ranking_metrics(train.users(), train.items(), &test, |r| r.overall, threshold, |u| {
        recommend_top_n(&train, sims, &config.neighborhood, u, config.top_n)
            .into_iter()
            .map(|p| p.item)
            .collect()
    });

    Ok(EvalReport {
        dataset: config.dataset.clone(),
        similarity: config.kind.name().to_owned(),
        train_fraction: config.train_fraction,
        seed: config.seed,
        ranks: None,
        pair_count: test.len(),
        no_prediction_count: test.len() - pairs.len(),
        mae: optional(mae(&pairs)),
        rmse: optional(rmse(&pairs)),
        bias: optional(bias(&pairs)),
        precision: ranking.precision,
        recall: ranking.recall,
        f1: ranking.f1,
        prediction_coverage: if test.is_empty() { 0.0 } else { pairs.len() as f64 / test.len() as f64 },
        catalog_coverage: ranking.catalog_coverage,
        ranked_users: ranking.users,
        ..Default::default()
    })
}

/// Runs the single-criterion protocol on a MovieLens-format file.
pub fn run_benchmark(path: &Path, config: &BenchmarkConfig) -> Result<EvalReport> {
    let records = parse_movielens(&read(path)?).map_err(|e| e.with_context(path.display().to_string()))?;
    let mut config = config.clone();
    if config.dataset.is_empty() {
        config.dataset = label(path);
    }
    run_benchmark_records(&records, &RatingScale::five_star(), &config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McBenchmarkConfig {
    pub dataset: String,
    /// Model settings; its seed also drives the split.
    pub mc: McConfig,
    pub train_fraction: f64,
    pub top_n: usize,
    pub relevance_threshold: Option<f64>,
    pub density: DensityFilterSpec,
}

impl McBenchmarkConfig {
    pub fn new(mc: McConfig, train_fraction: f64) -> Self {
        Self {
            dataset: String::new(),
            mc,
            train_fraction,
            top_n: DEFAULT_TOP_N,
            relevance_threshold: None,
            density: DensityFilterSpec::default(),
        }
    }
}

/// Runs the multi-criteria protocol. MAE and RMSE cover test cells where
/// every criterion had a neighborhood; cells completed from the denoised
/// tensor are counted separately.
pub fn run_mc_benchmark_records(
    records: &[CriteriaRecord],
    k: usize,
    scale: &RatingScale,
    config: &McBenchmarkConfig,
) -> Result<EvalReport> {
    let records = density_filter(records, config.density);
    let (train, test) = split_train_test(&records, SplitSpec::new(config.train_fraction, config.mc.seed)?);
    let (tensor, _) = CriteriaTensor::from_records(&train, k, scale.clone())?;
    let model = build_mc_model(&tensor, &config.mc)?;
    let global = model.overall().global_mean().unwrap_or(scale.min_value());

    let predicted: Vec<_> = test
        .par_iter()
        .map(|r| model.predict_ids(&r.user_id, &r.item_id))
        .collect();
    let mut pairs = Vec::new();
    let mut baseline = Vec::new();
    let mut all_known = Vec::new();
    let mut per_criterion: Vec<Vec<PredictionPair>> = vec![Vec::new(); k];
    let mut fallback_count = 0;
    for (r, p) in test.iter().zip(&predicted) {
        let Some(p) = p else { continue };
        all_known.push(PredictionPair::new(p.overall, r.overall));
        if !p.is_supported() {
            fallback_count += 1;
            continue;
        }
        pairs.push(PredictionPair::new(p.overall, r.overall));
        baseline.push(PredictionPair::new(global, r.overall));
        for (c, (&pc, &rc)) in p.criteria.iter().zip(&r.criteria).enumerate() {
            per_criterion[c].push(PredictionPair::new(pc, rc));
        }
    }

    let threshold = config.relevance_threshold.unwrap_or(scale.default_relevance_threshold());
    let users = model.overall().users().clone();
    let items = model.overall().items().clone();
    let ranking = ranking_metrics(&users, &items, &test, |r| r.overall, threshold, |u| {
        model.recommend(u, config.top_n).into_iter().map(|p| p.item).collect()
    });

    Ok(EvalReport {
        dataset: config.dataset.clone(),
        similarity: config.mc.effective_kind().name().to_owned(),
        train_fraction: config.train_fraction,
        seed: config.mc.seed,
        ranks: Some(config.mc.ranks),
        pair_count: test.len(),
        no_prediction_count: test.len() - pairs.len(),
        mae: optional(mae(&pairs)),
        rmse: optional(rmse(&pairs)),
        bias: optional(bias(&pairs)),
        precision: ranking.precision,
        recall: ranking.recall,
        f1: ranking.f1,
        prediction_coverage: if test.is_empty() { 0.0 } else { pairs.len() as f64 / test.len() as f64 },
        catalog_coverage: ranking.catalog_coverage,
        ranked_users: ranking.users,
        baseline_mae: optional(mae(&baseline)),
        criteria_mae: per_criterion.iter().map(|p| optional(mae(p))).collect(),
        fallback_count,
        mae_with_fallback: optional(mae(&all_known)),
    })
}

/// Runs the multi-criteria protocol on a `user,item,c1..ck,overall` file.
pub fn run_mc_benchmark(path: &Path, k: usize, scale: &RatingScale, config: &McBenchmarkConfig) -> Result<EvalReport> {
    let records =
        parse_multicriteria(&read(path)?, k, scale).map_err(|e| e.with_context(path.display().to_string()))?;
    let mut config = config.clone();
    if config.dataset.is_empty() {
        config.dataset = label(path);
    }
    run_mc_benchmark_records(&records, k, scale, &config)
}

/// One line of a sweep file.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub dataset: String,
    pub kind: SimilarityKind,
    pub train_fraction: f64,
    pub seed: u64,
}

/// Parses `dataset kind fraction seed` lines (whitespace or comma
/// separated); blank lines and `#` comments are skipped.
pub fn parse_sweep_config(text: &str) -> Result<Vec<SweepEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::Parse { line: n + 1, message: m };
        let f: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
        if f.len() != 4 {
            return Err(err(format!("expected `dataset kind fraction seed`, found {} fields", f.len())));
        }
        out.push(SweepEntry {
            dataset: f[0].to_owned(),
            kind: f[1].parse().map_err(|e: Error| err(e.to_string()))?,
            train_fraction: f[2].parse().map_err(|_| err(format!("bad fraction {:?}", f[2])))?,
            seed: f[3].parse().map_err(|_| err(format!("bad seed {:?}", f[3])))?,
        });
    }
    Ok(out)
}

/// Runs every entry with the remaining settings from `base`; each dataset
/// file is read once.
pub fn run_sweep(entries: &[SweepEntry], base: &BenchmarkConfig) -> Result<Vec<EvalReport>> {
    let mut cache: HashMap<&str, Vec<RatingRecord>> = HashMap::new();
    let mut out = Vec::with_capacity(entries.len());
    for e in entries {
        if !cache.contains_key(e.dataset.as_str()) {
            let path = Path::new(&e.dataset);
            let records = parse_movielens(&read(path)?).map_err(|err| err.with_context(e.dataset.clone()))?;
            cache.insert(&e.dataset, records);
        }
        let config = BenchmarkConfig {
            dataset: label(Path::new(&e.dataset)),
            kind: e.kind,
            train_fraction: e.train_fraction,
            seed: e.seed,
            ..base.clone()
        };
        out.push(run_benchmark_records(&cache[e.dataset.as_str()], &RatingScale::five_star(), &config)?);
    }
    Ok(out)
}
