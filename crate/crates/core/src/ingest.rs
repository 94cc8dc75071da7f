//! Rating file parsers, grade mapping, density filtering and seeded
//! train/test splits.
//!
//! Two formats are read:
//!
//! * MovieLens: `user<TAB>item<TAB>rating<TAB>timestamp`, no header, 1–5 scale.
//! * Multi-criteria CSV: `user,item,c1,…,ck,overall`, optional `#` header
//!   lines; values are numbers or grade labels of the scale.
//!
//! Both accept LF and CRLF line endings.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CriteriaRecord, Rated, RatingRecord, RatingScale};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    train_fraction: f64,
    seed: u64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Result<Self> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "train fraction {train_fraction} not in (0, 1)"
            )));
        }
        Ok(Self { train_fraction, seed })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DensityFilterSpec {
    pub min_user_ratings: usize,
    pub min_item_ratings: usize,
}

impl DensityFilterSpec {
    pub fn new(min_user_ratings: usize, min_item_ratings: usize) -> Self {
        Self {
            min_user_ratings,
            min_item_ratings,
        }
    }
}

fn lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.strip_suffix('\r').unwrap_or(l)))
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses MovieLens `u.data`-style text.
pub fn parse_movielens(source: &str) -> Result<Vec<RatingRecord>> {
    let scale = RatingScale::five_star();
    let mut out = Vec::new();
    for (n, line) in lines(source) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(parse_err(n, format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let overall: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(n, format!("bad rating {:?}", fields[2])))?;
        let timestamp: i64 = fields[3]
            .trim()
            .parse()
            .map_err(|_| parse_err(n, format!("bad timestamp {:?}", fields[3])))?;
        scale.check(overall).map_err(|e| parse_err(n, e.to_string()))?;
        out.push(RatingRecord {
            user_id: fields[0].trim().to_owned(),
            item_id: fields[1].trim().to_owned(),
            overall,
            timestamp: Some(timestamp),
        });
    }
    Ok(out)
}

/// Numeric value of a grade label (`F` = 1 … `A+` = 13 on the letter scale).
pub fn grade_to_number(grade: &str, scale: &RatingScale) -> Result<f64> {
    scale
        .grade_labels()
        .and_then(|labels| labels.iter().position(|g| g == grade))
        .map(|p| scale.min_value() + p as f64)
        .ok_or_else(|| Error::UnknownGrade(grade.to_owned()))
}

fn parse_value(field: &str, scale: &RatingScale) -> Result<f64> {
    let field = field.trim();
    let value = match field.parse::<f64>() {
        Ok(v) => v,
        Err(_) => grade_to_number(field, scale)?,
    };
    scale.check(value)
}

/// Parses multi-criteria CSV with `k` criteria per line.
pub fn parse_multicriteria(source: &str, k: usize, scale: &RatingScale) -> Result<Vec<CriteriaRecord>> {
    let mut out = Vec::new();
    for (n, line) in lines(source) {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != k + 3 {
            return Err(parse_err(
                n,
                format!("expected {} comma-separated fields, found {}", k + 3, fields.len()),
            ));
        }
        let mut values = Vec::with_capacity(k + 1);
        for f in &fields[2..] {
            values.push(parse_value(f, scale).map_err(|e| parse_err(n, e.to_string()))?);
        }
        let overall = values.pop().expect("k + 1 values");
        out.push(CriteriaRecord::new(fields[0].trim(), fields[1].trim(), values, overall));
    }
    Ok(out)
}

fn fmt_value(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

pub fn write_movielens(records: &[RatingRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.user_id,
            r.item_id,
            fmt_value(r.overall),
            r.timestamp.unwrap_or(0)
        );
    }
    out
}

pub fn write_multicriteria(records: &[CriteriaRecord]) -> String {
    let mut out = String::new();
    if let Some(first) = records.first() {
        let crit: Vec<String> = (1..=first.criteria.len()).map(|c| format!("c{c}")).collect();
        let _ = writeln!(out, "#user,item,{},overall", crit.join(","));
    }
    for r in records {
        let _ = write!(out, "{},{}", r.user_id, r.item_id);
        for &c in &r.criteria {
            let _ = write!(out, ",{}", fmt_value(c));
        }
        let _ = writeln!(out, ",{}", fmt_value(r.overall));
    }
    out
}

/// Drops users and items below the rating-count thresholds, repeating until
/// nothing changes. Each round removes users first, then items.
pub fn density_filter<R: Rated + Clone>(records: &[R], spec: DensityFilterSpec) -> Vec<R> {
    let mut keep: Vec<bool> = vec![true; records.len()];
    loop {
        let mut changed = false;

        let mut user_counts: HashMap<&str, usize> = HashMap::new();
        for (r, _) in records.iter().zip(&keep).filter(|(_, &k)| k) {
            *user_counts.entry(r.user_id()).or_default() += 1;
        }
        for (r, k) in records.iter().zip(keep.iter_mut()) {
            if *k && user_counts[r.user_id()] < spec.min_user_ratings {
                *k = false;
                changed = true;
            }
        }

        let mut item_counts: HashMap<&str, usize> = HashMap::new();
        for (r, _) in records.iter().zip(&keep).filter(|(_, &k)| k) {
            *item_counts.entry(r.item_id()).or_default() += 1;
        }
        for (r, k) in records.iter().zip(keep.iter_mut()) {
            if *k && item_counts[r.item_id()] < spec.min_item_ratings {
                *k = false;
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }
    records
        .iter()
        .zip(keep)
        .filter(|&(_, k)| k)
        .map(|(r, _)| r.clone())
        .collect()
}

fn fnv1a(bytes: impl IntoIterator<Item = u8>, mut hash: u64) -> u64 {
    for b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0100_0000_01b3);
    }
    hash
}

/// Uniform draw in [0, 1) determined by `(seed, user, item)` alone.
pub fn split_draw(seed: u64, user_id: &str, item_id: &str) -> f64 {
    let key = fnv1a(
        user_id.bytes().chain([0xff]).chain(item_id.bytes()),
        0xcbf2_9ce4_8422_2325,
    );
    let mut rng_seed = [0u8; 32];
    rng_seed[..8].copy_from_slice(&seed.to_le_bytes());
    rng_seed[8..16].copy_from_slice(&key.to_le_bytes());
    ChaCha8Rng::from_seed(rng_seed).random::<f64>()
}

/// Assigns each record to train with probability `train_fraction`. The
/// assignment depends only on the seed and the record's (user, item) key, so
/// it does not change with input order.
pub fn split_train_test<R: Rated + Clone>(records: &[R], spec: SplitSpec) -> (Vec<R>, Vec<R>) {
    records
        .iter()
        .cloned()
        .partition(|r| split_draw(spec.seed, r.user_id(), r.item_id()) < spec.train_fraction)
}

/// Distinct users and items in a record set.
pub fn distinct_counts<R: Rated>(records: &[R]) -> (usize, usize) {
    let users: HashSet<&str> = records.iter().map(Rated::user_id).collect();
    let items: HashSet<&str> = records.iter().map(Rated::item_id).collect();
    (users.len(), items.len())
}
