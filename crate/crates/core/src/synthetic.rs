//! Generator for multi-criteria rating data with known block structure.
//!
//! Users and items are split into clusters; every (user cluster, item cluster)
//! pair has one profile of k criterion values, and the overall rating is the
//! mean of the criteria. Without noise the full tensor is exactly low rank:
//! at most (user clusters, item clusters, k) along the three modes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::model::{CriteriaRecord, RatingScale};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub users: usize,
    pub items: usize,
    pub k: usize,
    pub user_clusters: usize,
    pub item_clusters: usize,
    /// Probability that a (user, item) cell is observed.
    pub density: f64,
    /// Standard deviation of Gaussian noise added to every observed value.
    pub noise_sd: f64,
    pub seed: u64,
    pub scale: RatingScale,
}

impl SyntheticSpec {
    pub fn new(users: usize, items: usize, k: usize, seed: u64) -> Self {
        Self {
            users,
            items,
            k,
            user_clusters: 3,
            item_clusters: 4,
            density: 0.3,
            noise_sd: 0.0,
            seed,
            scale: RatingScale::letter13(),
        }
    }

    fn preset(users: usize, items: usize, ratings: usize, seed: u64) -> Self {
        let mut spec = Self::new(users, items, 4, seed);
        spec.density = ratings as f64 / (users as f64 * items as f64);
        spec
    }

    /// 429 users, 491 items, about 18,405 ratings.
    pub fn ym20(seed: u64) -> Self {
        Self::preset(429, 491, 18_405, seed)
    }

    /// 1,827 users, 1,471 items, about 48,026 ratings.
    pub fn ym10(seed: u64) -> Self {
        Self::preset(1_827, 1_471, 48_026, seed)
    }

    /// 5,978 users, 3,079 items, about 82,599 ratings.
    pub fn ym5(seed: u64) -> Self {
        Self::preset(5_978, 3_079, 82_599, seed)
    }

    pub fn clusters(mut self, user_clusters: usize, item_clusters: usize) -> Self {
        self.user_clusters = user_clusters;
        self.item_clusters = item_clusters;
        self
    }

    pub fn density(mut self, density: f64) -> Self {
        self.density = density;
        self
    }

    pub fn noise(mut self, noise_sd: f64) -> Self {
        self.noise_sd = noise_sd;
        self
    }

    pub fn scale(mut self, scale: RatingScale) -> Self {
        self.scale = scale;
        self
    }

    /// Tucker ranks of the noiseless, fully observed tensor.
    pub fn true_ranks(&self) -> [usize; 3] {
        [
            self.user_clusters.min(self.users),
            self.item_clusters.min(self.items),
            self.k,
        ]
    }

    pub fn user_cluster(&self, u: usize) -> usize {
        u % self.user_clusters
    }

    pub fn item_cluster(&self, i: usize) -> usize {
        i % self.item_clusters
    }

    fn validate(&self) -> Result<()> {
        if self.users == 0 || self.items == 0 || self.k == 0 {
            return Err(Error::InvalidArgument("users, items and k must be positive".into()));
        }
        if self.user_clusters == 0 || self.item_clusters == 0 {
            return Err(Error::InvalidArgument("cluster counts must be positive".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidArgument(format!("density {} not in (0, 1]", self.density)));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise {}", self.noise_sd)));
        }
        Ok(())
    }
}

/// Noiseless criterion profiles, indexed `[user cluster][item cluster][criterion]`.
pub fn cluster_profiles(spec: &SyntheticSpec) -> Vec<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (lo, hi) = (spec.scale.min_value(), spec.scale.max_value());
    let margin = (hi - lo) / 8.0;
    (0..spec.user_clusters)
        .map(|_| {
            (0..spec.item_clusters)
                .map(|_| (0..spec.k).map(|_| rng.random_range(lo + margin..=hi - margin)).collect())
                .collect()
        })
        .collect()
}

/// Draws the observed cells. Ids are `u<n>` and `m<n>`; users and items with
/// no observed cell are absent from the output.
pub fn generate(spec: &SyntheticSpec) -> Result<Vec<CriteriaRecord>> {
    spec.validate()?;
    let profiles = cluster_profiles(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1));
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut out = Vec::new();
    for u in 0..spec.users {
        for i in 0..spec.items {
            if rng.random::<f64>() >= spec.density {
                continue;
            }
            let base = &profiles[spec.user_cluster(u)][spec.item_cluster(i)];
            let mut jitter = |v: f64| {
                if spec.noise_sd > 0.0 {
                    spec.scale.clamp(v + noise.sample(&mut rng))
                } else {
                    v
                }
            };
            let overall = jitter(base.iter().sum::<f64>() / spec.k as f64);
            let criteria: Vec<f64> = base.iter().map(|&v| jitter(v)).collect();
            out.push(CriteriaRecord::new(format!("u{u}"), format!("m{i}"), criteria, overall));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overall_is_criteria_mean_without_noise() {
        let recs = generate(&SyntheticSpec::new(20, 15, 4, 3)).unwrap();
        assert!(!recs.is_empty());
        for r in &recs {
            let mean = r.criteria.iter().sum::<f64>() / 4.0;
            assert!((r.overall - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_and_in_scale() {
        let spec = SyntheticSpec::new(30, 20, 3, 9).noise(0.5);
        let a = generate(&spec).unwrap();
        assert_eq!(a, generate(&spec).unwrap());
        for r in &a {
            assert!(spec.scale.contains(r.overall));
            assert!(r.criteria.iter().all(|&c| spec.scale.contains(c)));
        }
    }

    #[test]
    fn density_close_to_target() {
        let spec = SyntheticSpec::new(100, 100, 2, 1).density(0.2);
        let n = generate(&spec).unwrap().len() as f64;
        // binomial sd = 40
        assert!((n - 2000.0).abs() < 200.0, "{n}");
    }

    #[test]
    fn presets() {
        let s = SyntheticSpec::ym20(0);
        assert_eq!((s.users, s.items, s.k), (429, 491, 4));
        assert!((s.density * 429.0 * 491.0 - 18_405.0).abs() < 1e-6);
        assert!(generate(&SyntheticSpec::new(3, 3, 1, 0).density(0.0)).is_err());
    }
}
