//! Rating domain types: scales, records, the sparse user×item [`Dataset`] and
//! the user×item×(k+1) [`CriteriaTensor`].

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;

/// Grade ladder of the 13-level letter scale, worst to best.
pub const LETTER13_GRADES: [&str; 13] = [
    "F", "D-", "D", "D+", "C-", "C", "C+", "B-", "B", "B+", "A-", "A", "A+",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RatingScale {
    min_value: f64,
    max_value: f64,
    levels: usize,
    grade_labels: Option<Vec<String>>,
}

impl RatingScale {
    pub fn new(min_value: f64, max_value: f64, levels: usize) -> Result<Self> {
        if !(min_value.is_finite() && max_value.is_finite()) || min_value >= max_value {
            return Err(Error::InvalidScale(format!(
                "min {min_value} must be below max {max_value}"
            )));
        }
        if levels < 2 {
            return Err(Error::InvalidScale(format!("{levels} levels")));
        }
        Ok(Self {
            min_value,
            max_value,
            levels,
            grade_labels: None,
        })
    }

    /// A scale whose levels are named by `labels` (worst first), numbered
    /// `min_value`, `min_value + 1`, ...
    pub fn with_grades(min_value: f64, labels: &[&str]) -> Result<Self> {
        let levels = labels.len();
        let mut scale = Self::new(min_value, min_value + levels as f64 - 1.0, levels)?;
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let unique: IndexSet<&String> = owned.iter().collect();
        if unique.len() != owned.len() {
            return Err(Error::InvalidScale("duplicate grade label".into()));
        }
        scale.grade_labels = Some(owned);
        Ok(scale)
    }

    /// The 1–5 star scale of MovieLens.
    pub fn five_star() -> Self {
        Self::new(1.0, 5.0, 5).expect("valid scale")
    }

    /// The 13-level `F` .. `A+` scale, `F` = 1.
    pub fn letter13() -> Self {
        Self::with_grades(1.0, &LETTER13_GRADES).expect("valid scale")
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn max_value(&self) -> f64 {
        self.max_value
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn grade_labels(&self) -> Option<&[String]> {
        self.grade_labels.as_deref()
    }

    pub fn contains(&self, value: f64) -> bool {
        value >= self.min_value && value <= self.max_value
    }

    pub fn check(&self, value: f64) -> Result<f64> {
        if self.contains(value) {
            Ok(value)
        } else {
            Err(Error::OutOfScale {
                value,
                min: self.min_value,
                max: self.max_value,
            })
        }
    }

    pub fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.min_value, self.max_value)
    }

    /// Rating at or above which an item counts as relevant: 4 on the 1–5
    /// scale, 9 on the 13-level scale.
    pub fn default_relevance_threshold(&self) -> f64 {
        if self.levels == 13 {
            self.min_value + 8.0
        } else {
            self.max_value - (self.max_value - self.min_value) / 4.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatingRecord {
    pub user_id: String,
    pub item_id: String,
    pub overall: f64,
    pub timestamp: Option<i64>,
}

impl RatingRecord {
    pub fn new(user_id: impl Into<String>, item_id: impl Into<String>, overall: f64) -> Self {
        Self {
            user_id: user_id.into(),
            item_id: item_id.into(),
            overall,
            timestamp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaRecord {
    pub user_id: String,
    pub item_id: String,
    /// R₁ … R_k.
    pub criteria: Vec<f64>,
    /// R₀.
    pub overall: f64,
}

impl CriteriaRecord {
    pub fn new(
        user_id: impl Into<String>,
        item_id: impl Into<String>,
        criteria: Vec<f64>,
        overall: f64,
    ) -> Self {
        Self {
            user_id: user_id.into(),
            item_id: item_id.into(),
            criteria,
            overall,
        }
    }

    pub fn overall_record(&self) -> RatingRecord {
        RatingRecord::new(self.user_id.clone(), self.item_id.clone(), self.overall)
    }
}

/// Anything keyed by an external (user, item) pair.
pub trait Rated {
    fn user_id(&self) -> &str;
    fn item_id(&self) -> &str;
}

impl Rated for RatingRecord {
    fn user_id(&self) -> &str {
        &self.user_id
    }
    fn item_id(&self) -> &str {
        &self.item_id
    }
}

impl Rated for CriteriaRecord {
    fn user_id(&self) -> &str {
        &self.user_id
    }
    fn item_id(&self) -> &str {
        &self.item_id
    }
}

/// Bijection between external ids and dense indices, assigned in
/// first-appearance order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IdIndex {
    ids: IndexSet<String>,
}

impl IdIndex {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: &str) -> usize {
        if let Some(idx) = self.ids.get_index_of(id) {
            return idx;
        }
        self.ids.insert_full(id.to_owned()).0
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.get_index_of(id)
    }

    pub fn id(&self, index: usize) -> Option<&str> {
        self.ids.get_index(index).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }
}

/// Counts gathered while building a [`Dataset`] or [`CriteriaTensor`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub records: usize,
    /// Later (user, item) repeats that replaced an earlier value.
    pub duplicates: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetStats {
    pub users: usize,
    pub items: usize,
    pub ratings: usize,
    pub density: f64,
}

impl fmt::Display for DatasetStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "users={} items={} ratings={}",
            self.users, self.items, self.ratings
        )
    }
}

/// Sparse m×n matrix of overall ratings with per-user and per-item views.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    users: IdIndex,
    items: IdIndex,
    by_user: Vec<Vec<(usize, f64)>>,
    by_item: Vec<Vec<(usize, f64)>>,
    scale: RatingScale,
    len: usize,
}

impl Dataset {
    pub fn empty(scale: RatingScale) -> Self {
        Self {
            users: IdIndex::new(),
            items: IdIndex::new(),
            by_user: Vec::new(),
            by_item: Vec::new(),
            scale,
            len: 0,
        }
    }

    /// Builds a dataset; a repeated (user, item) keeps the last value.
    pub fn from_records(records: &[RatingRecord], scale: RatingScale) -> Result<(Self, IngestReport)> {
        let mut users = IdIndex::new();
        let mut items = IdIndex::new();
        let mut cells = BTreeMap::new();
        let mut duplicates = 0;
        for r in records {
            scale.check(r.overall)?;
            let u = users.insert(&r.user_id);
            let i = items.insert(&r.item_id);
            if cells.insert((u, i), r.overall).is_some() {
                duplicates += 1;
            }
        }
        let report = IngestReport {
            records: records.len(),
            duplicates,
        };
        Ok((Self::from_cells(users, items, cells, scale)?, report))
    }

    /// Builds from dense-index cells over existing index maps.
    pub fn from_cells(
        users: IdIndex,
        items: IdIndex,
        cells: BTreeMap<(usize, usize), f64>,
        scale: RatingScale,
    ) -> Result<Self> {
        let mut by_user = vec![Vec::new(); users.len()];
        let mut by_item = vec![Vec::new(); items.len()];
        for (&(u, i), &v) in &cells {
            if u >= users.len() || i >= items.len() {
                return Err(Error::dims(
                    format!("indices below ({}, {})", users.len(), items.len()),
                    format!("({u}, {i})"),
                ));
            }
            scale.check(v)?;
            by_user[u].push((i, v));
            by_item[i].push((u, v));
        }
        // BTreeMap order keeps both views sorted by the secondary index.
        Ok(Self {
            users,
            items,
            by_user,
            by_item,
            scale,
            len: cells.len(),
        })
    }

    pub fn users(&self) -> &IdIndex {
        &self.users
    }

    pub fn items(&self) -> &IdIndex {
        &self.items
    }

    pub fn scale(&self) -> &RatingScale {
        &self.scale
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Ratings of user `u` sorted by item index.
    pub fn user_ratings(&self, u: usize) -> &[(usize, f64)] {
        self.by_user.get(u).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Ratings of item `i` sorted by user index.
    pub fn item_ratings(&self, i: usize) -> &[(usize, f64)] {
        self.by_item.get(i).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn rating(&self, u: usize, i: usize) -> Option<f64> {
        let row = self.user_ratings(u);
        row.binary_search_by_key(&i, |&(j, _)| j).ok().map(|p| row[p].1)
    }

    pub fn user_mean(&self, u: usize) -> Option<f64> {
        let row = self.user_ratings(u);
        if row.is_empty() {
            None
        } else {
            Some(row.iter().map(|&(_, v)| v).sum::<f64>() / row.len() as f64)
        }
    }

    pub fn global_mean(&self) -> Option<f64> {
        if self.len == 0 {
            return None;
        }
        let sum: f64 = self.by_user.iter().flatten().map(|&(_, v)| v).sum();
        Some(sum / self.len as f64)
    }

    /// Iterates `(user, item, rating)` in user-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.by_user
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&(i, v)| (u, i, v)))
    }

    pub fn records(&self) -> Vec<RatingRecord> {
        self.cells()
            .map(|(u, i, v)| {
                RatingRecord::new(
                    self.users.id(u).expect("indexed user"),
                    self.items.id(i).expect("indexed item"),
                    v,
                )
            })
            .collect()
    }

    pub fn stats(&self) -> DatasetStats {
        let (users, items, ratings) = (self.num_users(), self.num_items(), self.len);
        let density = if users == 0 || items == 0 {
            0.0
        } else {
            ratings as f64 / (users as f64 * items as f64)
        };
        DatasetStats {
            users,
            items,
            ratings,
            density,
        }
    }

    pub fn to_sparse_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.num_users(), self.num_items(), self.cells())
            .expect("dataset cells are in range")
    }
}

/// Sparse user×item×(k+1) tensor; slice 0 holds the overall rating.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaTensor {
    users: IdIndex,
    items: IdIndex,
    k: usize,
    cells: BTreeMap<(usize, usize), Vec<f64>>,
    scale: RatingScale,
}

impl CriteriaTensor {
    /// Every record must carry exactly `k` criteria; partial cells are rejected.
    pub fn from_records(
        records: &[CriteriaRecord],
        k: usize,
        scale: RatingScale,
    ) -> Result<(Self, IngestReport)> {
        if k == 0 {
            return Err(Error::InvalidArgument("criteria count must be at least 1".into()));
        }
        let mut users = IdIndex::new();
        let mut items = IdIndex::new();
        let mut cells = BTreeMap::new();
        let mut duplicates = 0;
        for r in records {
            if r.criteria.len() != k {
                return Err(Error::dims(
                    format!("{k} criteria"),
                    format!("{} for ({}, {})", r.criteria.len(), r.user_id, r.item_id),
                ));
            }
            let mut values = Vec::with_capacity(k + 1);
            values.push(scale.check(r.overall)?);
            for &c in &r.criteria {
                values.push(scale.check(c)?);
            }
            let u = users.insert(&r.user_id);
            let i = items.insert(&r.item_id);
            if cells.insert((u, i), values).is_some() {
                duplicates += 1;
            }
        }
        let report = IngestReport {
            records: records.len(),
            duplicates,
        };
        Ok((
            Self {
                users,
                items,
                k,
                cells,
                scale,
            },
            report,
        ))
    }

    pub fn users(&self) -> &IdIndex {
        &self.users
    }

    pub fn items(&self) -> &IdIndex {
        &self.items
    }

    pub fn scale(&self) -> &RatingScale {
        &self.scale
    }

    /// Number of criteria, excluding the overall slice.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `[R₀, R₁, …, R_k]` of cell (u, i).
    pub fn cell(&self, u: usize, i: usize) -> Option<&[f64]> {
        self.cells.get(&(u, i)).map(Vec::as_slice)
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> + '_ {
        self.cells.iter().map(|(&key, v)| (key, v.as_slice()))
    }

    pub fn records(&self) -> Vec<CriteriaRecord> {
        self.cells
            .iter()
            .map(|(&(u, i), v)| {
                CriteriaRecord::new(
                    self.users.id(u).expect("indexed user"),
                    self.items.id(i).expect("indexed item"),
                    v[1..].to_vec(),
                    v[0],
                )
            })
            .collect()
    }

    fn slice(&self, s: usize) -> Dataset {
        let cells = self.cells.iter().map(|(&key, v)| (key, v[s])).collect();
        Dataset::from_cells(self.users.clone(), self.items.clone(), cells, self.scale.clone())
            .expect("tensor cells are validated on construction")
    }

    /// Slice 0 (overall ratings) as a dataset over the same index maps.
    pub fn overall_slice(&self) -> Dataset {
        self.slice(0)
    }

    /// Slice `c` for 1 ≤ c ≤ k.
    pub fn criteria_slice(&self, c: usize) -> Result<Dataset> {
        if c == 0 || c > self.k {
            return Err(Error::CriterionOutOfBounds { index: c, k: self.k });
        }
        Ok(self.slice(c))
    }
}
