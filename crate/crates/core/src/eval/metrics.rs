use std::collections::HashSet;
use std::hash::Hash;

use crate::error::{Error, Result};

/// Predicted and true rating of one test cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionPair {
    pub p: f64,
    pub r: f64,
}

impl PredictionPair {
    pub fn new(p: f64, r: f64) -> Self {
        Self { p, r }
    }
}

fn nonempty(pairs: &[PredictionPair], what: &str) -> Result<f64> {
    if pairs.is_empty() {
        Err(Error::InsufficientData(format!("{what} of an empty pair set")))
    } else {
        Ok(pairs.len() as f64)
    }
}

/// Mean absolute error.
pub fn mae(pairs: &[PredictionPair]) -> Result<f64> {
    let n = nonempty(pairs, "MAE")?;
    Ok(pairs.iter().map(|x| (x.p - x.r).abs()).sum::<f64>() / n)
}

pub fn rmse(pairs: &[PredictionPair]) -> Result<f64> {
    let n = nonempty(pairs, "RMSE")?;
    Ok((pairs.iter().map(|x| (x.p - x.r).powi(2)).sum::<f64>() / n).sqrt())
}

/// Mean signed error `Σ (p − r) / n`.
pub fn bias(pairs: &[PredictionPair]) -> Result<f64> {
    let n = nonempty(pairs, "bias")?;
    Ok(pairs.iter().map(|x| x.p - x.r).sum::<f64>() / n)
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// `(precision, recall, f1)` of a recommendation list against the relevant
/// set. Empty inputs give 0 rather than an error.
pub fn precision_recall_f1<T: Eq + Hash>(recommended: &[T], interesting: &[T]) -> (f64, f64, f64) {
    let rec: HashSet<&T> = recommended.iter().collect();
    let int: HashSet<&T> = interesting.iter().collect();
    let hits = rec.intersection(&int).count() as f64;
    let precision = if rec.is_empty() { 0.0 } else { hits / rec.len() as f64 };
    let recall = if int.is_empty() { 0.0 } else { hits / int.len() as f64 };
    // 2pr/(p+r) reduces to 2·hits/(|rec| + |int|), which avoids rounding
    let f1 = if hits == 0.0 { 0.0 } else { 2.0 * hits / (rec.len() + int.len()) as f64 };
    (precision, recall, f1)
}

/// `(made / attempted, |recommendable| / |catalog|)`.
pub fn coverage(attempted: usize, made: usize, catalog: usize, recommendable: usize) -> Result<(f64, f64)> {
    if attempted == 0 {
        return Err(Error::InsufficientData("coverage of zero attempts".into()));
    }
    if made > attempted {
        return Err(Error::InvalidArgument(format!("{made} predictions from {attempted} attempts")));
    }
    let catalog_coverage = if catalog == 0 { 0.0 } else { recommendable as f64 / catalog as f64 };
    Ok((made as f64 / attempted as f64, catalog_coverage))
}
