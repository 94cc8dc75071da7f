use std::collections::{BTreeMap, BTreeSet};

use mcrec_core::engine::{aggregate_overall, predict_single, recommend_top_n, AggregationWeights, NeighborhoodSpec};
use mcrec_core::eval::{f1, mae, precision_recall_f1, rmse, PredictionPair};
use mcrec_core::ingest::{density_filter, split_train_test, DensityFilterSpec, SplitSpec};
use mcrec_core::model::{Dataset, RatingRecord, RatingScale};
use mcrec_core::similarity::{
    criteria_distance, item_similarity_matrix, DistanceMetric, ItemSimilarity, SimilarityKind,
};
use proptest::prelude::*;

fn cells() -> impl Strategy<Value = BTreeMap<(u8, u8), u8>> {
    prop::collection::btree_map((0u8..8, 0u8..10), 1u8..=5, 1..60)
}

fn records(cells: &BTreeMap<(u8, u8), u8>) -> Vec<RatingRecord> {
    cells
        .iter()
        .map(|(&(u, i), &r)| RatingRecord::new(format!("u{u}"), format!("i{i}"), r as f64))
        .collect()
}

fn dataset(cells: &BTreeMap<(u8, u8), u8>) -> Dataset {
    Dataset::from_records(&records(cells), RatingScale::five_star()).unwrap().0
}

const RATING_KINDS: [SimilarityKind; 6] = [
    SimilarityKind::Pearson,
    SimilarityKind::Euclidean,
    SimilarityKind::LogLikelihood,
    SimilarityKind::Tanimoto,
    SimilarityKind::AdjustedCosine,
    SimilarityKind::Cosine,
];

fn in_range(kind: SimilarityKind, s: f64) -> bool {
    match kind {
        SimilarityKind::Tanimoto => (0.0..=1.0).contains(&s),
        SimilarityKind::Euclidean => s > 0.0 && s <= 1.0,
        SimilarityKind::LogLikelihood => (0.0..1.0).contains(&s),
        _ => (-1.0..=1.0).contains(&s),
    }
}

/// Repeats single-record removals until every user and item meets the thresholds.
fn brute_force_filter(records: &[RatingRecord], spec: DensityFilterSpec) -> BTreeSet<(String, String)> {
    let mut kept: BTreeSet<(String, String)> = records.iter().map(|r| (r.user_id.clone(), r.item_id.clone())).collect();
    loop {
        let count = |by_user: bool, id: &str, set: &BTreeSet<(String, String)>| {
            set.iter().filter(|(u, i)| if by_user { u == id } else { i == id }).count()
        };
        let victim = kept
            .iter()
            .find(|(u, i)| count(true, u, &kept) < spec.min_user_ratings || count(false, i, &kept) < spec.min_item_ratings)
            .cloned();
        match victim {
            Some(v) => {
                kept.remove(&v);
            }
            None => return kept,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn similarities_are_symmetric_and_bounded(c in cells()) {
        let d = dataset(&c);
        for kind in RATING_KINDS {
            let store = item_similarity_matrix(&d, kind, kind.default_min_co_ratings()).unwrap();
            for a in 0..d.num_items() {
                prop_assert_eq!(store.similarity(a, a), None);
                for b in 0..d.num_items() {
                    let s = store.similarity(a, b);
                    prop_assert_eq!(s, store.similarity(b, a));
                    if let Some(s) = s {
                        prop_assert!(in_range(kind, s), "{} gave {}", kind, s);
                    }
                }
            }
        }
    }

    #[test]
    fn density_filter_is_the_fixpoint(c in cells(), mu in 0usize..5, mi in 0usize..5) {
        let recs = records(&c);
        let spec = DensityFilterSpec::new(mu, mi);
        let once = density_filter(&recs, spec);
        prop_assert_eq!(&density_filter(&once, spec), &once);
        let got: BTreeSet<(String, String)> = once.iter().map(|r| (r.user_id.clone(), r.item_id.clone())).collect();
        prop_assert_eq!(got, brute_force_filter(&recs, spec));
    }

    #[test]
    fn split_is_an_order_free_partition(c in cells(), f in 0.05f64..0.95, seed in any::<u64>()) {
        let recs = records(&c);
        let spec = SplitSpec::new(f, seed).unwrap();
        let (train, test) = split_train_test(&recs, spec);
        prop_assert_eq!(train.len() + test.len(), recs.len());
        let key = |r: &RatingRecord| (r.user_id.clone(), r.item_id.clone());
        let tr: BTreeSet<_> = train.iter().map(key).collect();
        let te: BTreeSet<_> = test.iter().map(key).collect();
        prop_assert!(tr.is_disjoint(&te));
        let mut reversed = recs.clone();
        reversed.reverse();
        let (train2, _) = split_train_test(&reversed, spec);
        prop_assert_eq!(tr, train2.iter().map(key).collect::<BTreeSet<_>>());
    }

    #[test]
    fn predictions_stay_on_scale_and_ignore_record_order(c in cells(), neg in any::<bool>(), top in 0usize..4) {
        let d = dataset(&c);
        let mut recs = records(&c);
        recs.reverse();
        let shuffled = Dataset::from_records(&recs, RatingScale::five_star()).unwrap().0;
        let mut spec = NeighborhoodSpec::default().include_negative(neg);
        if top > 0 {
            spec = spec.max_neighbors(top);
        }
        let sims = item_similarity_matrix(&d, SimilarityKind::Pearson, 2).unwrap();
        let sims2 = item_similarity_matrix(&shuffled, SimilarityKind::Pearson, 2).unwrap();
        for u in 0..d.num_users() {
            for i in 0..d.num_items() {
                let p = predict_single(&d, &sims, &spec, u, i);
                if let Some(p) = p {
                    prop_assert!((1.0..=5.0).contains(&p.value) && p.support >= 1);
                }
                // bounded neighborhoods break similarity ties by internal index
                if top > 0 {
                    continue;
                }
                let uid = d.users().id(u).unwrap();
                let iid = d.items().id(i).unwrap();
                let q = predict_single(
                    &shuffled,
                    &sims2,
                    &spec,
                    shuffled.users().index_of(uid).unwrap(),
                    shuffled.items().index_of(iid).unwrap(),
                );
                prop_assert_eq!(p.is_some(), q.is_some());
                if let (Some(p), Some(q)) = (p, q) {
                    prop_assert!((p.value - q.value).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn top_n_matches_predict_all_and_sort(c in cells(), n in 1usize..6, top in 0usize..3) {
        let d = dataset(&c);
        let sims = item_similarity_matrix(&d, SimilarityKind::Euclidean, 2).unwrap();
        let spec = if top == 0 { NeighborhoodSpec::default() } else { NeighborhoodSpec::default().max_neighbors(top) };
        for u in 0..d.num_users() {
            let mut want: Vec<(usize, f64)> = (0..d.num_items())
                .filter(|&i| d.rating(u, i).is_none())
                .filter_map(|i| predict_single(&d, &sims, &spec, u, i).map(|p| (i, p.value)))
                .collect();
            want.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            want.truncate(n);
            let got: Vec<(usize, f64)> = recommend_top_n(&d, &sims, &spec, u, n).iter().map(|p| (p.item, p.value)).collect();
            prop_assert_eq!(got, want);
        }
    }

    #[test]
    fn error_metrics_are_ordered_and_order_free(xs in prop::collection::vec((1.0f64..5.0, 1.0f64..5.0), 1..40)) {
        let pairs: Vec<PredictionPair> = xs.iter().map(|&(p, r)| PredictionPair::new(p, r)).collect();
        let (m, r) = (mae(&pairs).unwrap(), rmse(&pairs).unwrap());
        prop_assert!(m <= r + 1e-15);
        let mut rev = pairs.clone();
        rev.reverse();
        prop_assert!((mae(&rev).unwrap() - m).abs() < 1e-12);
        prop_assert!((rmse(&rev).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn f1_lies_between_min_and_twice_min(rec in prop::collection::btree_set(0u8..20, 0..10), int in prop::collection::btree_set(0u8..20, 0..10)) {
        let rec: Vec<u8> = rec.into_iter().collect();
        let int: Vec<u8> = int.into_iter().collect();
        let (p, r, f) = precision_recall_f1(&rec, &int);
        prop_assert!((0.0..=1.0).contains(&f));
        let lo = p.min(r);
        prop_assert!(f <= 2.0 * lo + 1e-15);
        prop_assert!(f >= lo - 1e-15);
        prop_assert!((f - f1(p, r)).abs() < 1e-12);
    }

    #[test]
    fn aggregation_is_monotone_with_non_negative_weights(
        w in prop::collection::vec(0.0f64..1.0, 4),
        base in prop::collection::vec(1.0f64..13.0, 4),
        c in 0usize..4,
        bump in 0.0f64..3.0,
    ) {
        let weights = AggregationWeights::new(0.5, &w);
        let scale = RatingScale::letter13();
        let before = aggregate_overall(&weights, &base, &scale).unwrap();
        let mut raised = base.clone();
        raised[c] += bump;
        let after = aggregate_overall(&weights, &raised, &scale).unwrap();
        prop_assert!(after >= before);
        prop_assert!((1.0..=13.0).contains(&after));
    }

    #[test]
    fn criteria_distances_follow_norm_order(v in prop::collection::vec(1.0f64..13.0, 4), w in prop::collection::vec(1.0f64..13.0, 4)) {
        let m = criteria_distance(&v, &w, DistanceMetric::Manhattan).unwrap();
        let e = criteria_distance(&v, &w, DistanceMetric::Euclidean).unwrap();
        let c = criteria_distance(&v, &w, DistanceMetric::Chebyshev).unwrap();
        prop_assert!(c <= e + 1e-12 && e <= m + 1e-12);
    }
}
