use std::fmt::Write as _;

/// Metrics of one experiment plus the settings that produced them. Error
/// metrics are `None` when nothing was predicted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub similarity: String,
    pub train_fraction: f64,
    pub seed: u64,
    pub ranks: Option<[usize; 3]>,
    /// Test cells attempted.
    pub pair_count: usize,
    pub no_prediction_count: usize,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub bias: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub prediction_coverage: f64,
    pub catalog_coverage: f64,
    /// Users scored for precision and recall.
    pub ranked_users: usize,
    /// Multi-criteria runs only: MAE of the training global mean on the
    /// same pairs.
    pub baseline_mae: Option<f64>,
    /// Multi-criteria runs only: per-criterion MAE.
    pub criteria_mae: Vec<Option<f64>>,
    /// Multi-criteria runs only: pairs where some criterion fell back to the
    /// denoised value, and the MAE over all known pairs including them.
    pub fallback_count: usize,
    pub mae_with_fallback: Option<f64>,
}

fn metric(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), |x| format!("{x:.4}"))
}

fn ranks(r: Option<[usize; 3]>) -> String {
    r.map_or_else(|| "NA".to_owned(), |[a, b, c]| format!("{a}x{b}x{c}"))
}

pub const CSV_HEADER: &str = "dataset,similarity,train_fraction,seed,ranks,pairs,no_prediction,mae,rmse,bias,precision,recall,f1,prediction_coverage,catalog_coverage,baseline_mae,mae_with_fallback,fallback_count,criteria_mae";

impl EvalReport {
    pub fn predicted_count(&self) -> usize {
        self.pair_count - self.no_prediction_count
    }

    /// One `key=value` per line.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k}={v}");
        };
        kv("dataset", self.dataset.clone());
        kv("similarity", self.similarity.clone());
        kv("train_fraction", self.train_fraction.to_string());
        kv("seed", self.seed.to_string());
        kv("ranks", ranks(self.ranks));
        kv("pairs", self.pair_count.to_string());
        kv("no_prediction", self.no_prediction_count.to_string());
        kv("mae", metric(self.mae));
        kv("rmse", metric(self.rmse));
        kv("bias", metric(self.bias));
        kv("precision", format!("{:.4}", self.precision));
        kv("recall", format!("{:.4}", self.recall));
        kv("f1", format!("{:.4}", self.f1));
        kv("prediction_coverage", format!("{:.4}", self.prediction_coverage));
        kv("catalog_coverage", format!("{:.4}", self.catalog_coverage));
        kv("ranked_users", self.ranked_users.to_string());
        if self.ranks.is_some() {
            kv("baseline_mae", metric(self.baseline_mae));
            kv("mae_with_fallback", metric(self.mae_with_fallback));
            kv("fallback_count", self.fallback_count.to_string());
            for (c, m) in self.criteria_mae.iter().enumerate() {
                kv(&format!("mae_c{}", c + 1), metric(*m));
            }
        }
        out
    }

    /// Row matching [`CSV_HEADER`].
    pub fn to_csv_row(&self) -> String {
        let criteria = self.criteria_mae.iter().map(|m| metric(*m)).collect::<Vec<_>>().join(";");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{},{},{},{}",
            self.dataset,
            self.similarity,
            self.train_fraction,
            self.seed,
            ranks(self.ranks),
            self.pair_count,
            self.no_prediction_count,
            metric(self.mae),
            metric(self.rmse),
            metric(self.bias),
            self.precision,
            self.recall,
            self.f1,
            self.prediction_coverage,
            self.catalog_coverage,
            metric(self.baseline_mae),
            metric(self.mae_with_fallback),
            self.fallback_count,
            criteria,
        )
    }
}
