use std::cmp::Ordering;

use crate::model::Dataset;
use crate::similarity::ItemSimilarity;

/// Sums of |sim| below this give no prediction.
const MIN_WEIGHT: f64 = 1e-12;

/// Which of a user's rated items may vote on a target item.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NeighborhoodSpec {
    /// Keep only the most similar neighbors; `None` keeps all.
    pub max_neighbors: Option<usize>,
    /// Neighbors below this similarity are dropped.
    pub min_similarity: Option<f64>,
    /// Admit neighbors with sim ≤ 0 (weighted by |sim| in the denominator).
    pub include_negative: bool,
}

impl NeighborhoodSpec {
    pub fn max_neighbors(mut self, n: usize) -> Self {
        self.max_neighbors = Some(n.max(1));
        self
    }

    pub fn min_similarity(mut self, t: f64) -> Self {
        self.min_similarity = Some(t);
        self
    }

    pub fn include_negative(mut self, yes: bool) -> Self {
        self.include_negative = yes;
        self
    }

    pub fn admits(&self, sim: f64) -> bool {
        (self.include_negative || sim > 0.0) && self.min_similarity.is_none_or(|t| sim >= t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub user: usize,
    pub item: usize,
    /// Clamped to the rating scale.
    pub value: f64,
    /// Neighbors that contributed.
    pub support: usize,
}

/// Item-based predictor over one rating matrix and one similarity source.
#[derive(Clone, Copy)]
pub struct ItemBasedPredictor<'a> {
    data: &'a Dataset,
    sims: &'a dyn ItemSimilarity,
    spec: NeighborhoodSpec,
}

impl<'a> ItemBasedPredictor<'a> {
    pub fn new(data: &'a Dataset, sims: &'a dyn ItemSimilarity, spec: NeighborhoodSpec) -> Self {
        Self { data, sims, spec }
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn spec(&self) -> NeighborhoodSpec {
        self.spec
    }

    pub fn predict(&self, user: usize, item: usize) -> Option<Prediction> {
        predict_single(self.data, self.sims, &self.spec, user, item)
    }

    pub fn predict_ids(&self, user_id: &str, item_id: &str) -> Option<Prediction> {
        let u = self.data.users().index_of(user_id)?;
        let i = self.data.items().index_of(item_id)?;
        self.predict(u, i)
    }

    pub fn recommend(&self, user: usize, n: usize) -> Vec<Prediction> {
        recommend_top_n(self.data, self.sims, &self.spec, user, n)
    }
}

fn finish(data: &Dataset, user: usize, item: usize, num: f64, den: f64, support: usize) -> Option<Prediction> {
    if support == 0 || den < MIN_WEIGHT {
        return None;
    }
    Some(Prediction {
        user,
        item,
        value: data.scale().clamp(num / den),
        support,
    })
}

/// Weighted mean of the user's ratings on items similar to `item`:
/// `Σ sim·r / Σ |sim|` over the admitted neighborhood, clamped to the scale.
/// Sums run in ascending neighbor index, so the result does not depend on
/// the order neighbors are found in.
pub fn predict_single(
    data: &Dataset,
    sims: &dyn ItemSimilarity,
    spec: &NeighborhoodSpec,
    user: usize,
    item: usize,
) -> Option<Prediction> {
    if user >= data.num_users() || item >= sims.num_items() {
        return None;
    }
    let mut hood: Vec<(usize, f64, f64)> = data
        .user_ratings(user)
        .iter()
        .filter(|&&(j, _)| j != item)
        .filter_map(|&(j, r)| sims.similarity(item, j).filter(|&s| spec.admits(s)).map(|s| (j, s, r)))
        .collect();
    if let Some(n) = spec.max_neighbors {
        if hood.len() > n {
            hood.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            hood.truncate(n);
            hood.sort_by_key(|&(j, _, _)| j);
        }
    }
    let (mut num, mut den) = (0.0, 0.0);
    for &(_, s, r) in &hood {
        num += s * r;
        den += s.abs();
    }
    finish(data, user, item, num, den, hood.len())
}

fn rank(a: &Prediction, b: &Prediction) -> Ordering {
    b.value.total_cmp(&a.value).then(a.item.cmp(&b.item))
}

/// Top `n` unrated items by prediction, ties broken by ascending item index.
/// Unknown users get an empty list.
pub fn recommend_top_n(
    data: &Dataset,
    sims: &dyn ItemSimilarity,
    spec: &NeighborhoodSpec,
    user: usize,
    n: usize,
) -> Vec<Prediction> {
    if user >= data.num_users() || n == 0 {
        return Vec::new();
    }
    let rated = data.user_ratings(user);
    let num_items = sims.num_items().min(data.num_items());
    let mut is_rated = vec![false; num_items];
    for &(j, _) in rated {
        if j < num_items {
            is_rated[j] = true;
        }
    }
    let mut preds: Vec<Prediction> = if spec.max_neighbors.is_some() {
        (0..num_items)
            .filter(|&i| !is_rated[i])
            .filter_map(|i| predict_single(data, sims, spec, user, i))
            .collect()
    } else {
        // Scatter each rated item's votes onto its neighbors. Votes reach a
        // candidate in ascending rated-item order, matching predict_single.
        let mut num = vec![0.0; num_items];
        let mut den = vec![0.0; num_items];
        let mut support = vec![0usize; num_items];
        for &(j, r) in rated {
            sims.for_each_neighbor(j, &mut |c, s| {
                if c < num_items && !is_rated[c] && spec.admits(s) {
                    num[c] += s * r;
                    den[c] += s.abs();
                    support[c] += 1;
                }
            });
        }
        (0..num_items)
            .filter(|&c| !is_rated[c])
            .filter_map(|c| finish(data, user, c, num[c], den[c], support[c]))
            .collect()
    };
    preds.sort_by(rank);
    preds.truncate(n);
    preds
}
