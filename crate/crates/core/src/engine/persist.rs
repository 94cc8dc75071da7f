//! Plain-text model dump and summary.
//!
//! The dump starts with a `mcrec-model <version>` header and settings, then
//! the core tensor and factor matrices row-major, the removed means, and per
//! criterion either similarity triples `a b value` or latent item vectors.
//! Floats use Rust's shortest round-trip formatting, so reading a dump back
//! gives bit-identical values.

use std::fmt::Write as _;
use std::str::{FromStr, Lines};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Mode, Tensor3};

use super::mc::{McModel, SliceSimilarity};

pub const SCHEMA_VERSION: u32 = 1;
const MAGIC: &str = "mcrec-model";

/// Per-criterion similarity section of a dump.
#[derive(Debug, Clone, PartialEq)]
pub enum DumpedSimilarity {
    Triples(Vec<(usize, usize, f64)>),
    Latent(Matrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelDump {
    pub version: u32,
    pub users: Vec<String>,
    pub items: Vec<String>,
    pub k: usize,
    pub ranks: [usize; 3],
    pub pca_option: bool,
    pub sim_space: String,
    pub kind: String,
    pub weights: Vec<f64>,
    pub core: Tensor3,
    pub factors: [Matrix; 3],
    pub means: Option<Vec<f64>>,
    pub similarities: Vec<DumpedSimilarity>,
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn write_matrix(out: &mut String, label: &str, m: &Matrix) {
    let _ = writeln!(out, "{label} {} {}", m.rows(), m.cols());
    for r in 0..m.rows() {
        let _ = writeln!(out, "{}", join(m.row(r)));
    }
}

impl McModel {
    /// Human-readable `key=value` report.
    pub fn summary(&self) -> String {
        let c = self.config();
        let mut out = String::new();
        let _ = writeln!(out, "users={}", self.overall().num_users());
        let _ = writeln!(out, "items={}", self.overall().num_items());
        let _ = writeln!(out, "ratings={}", self.overall().len());
        let _ = writeln!(out, "criteria={}", self.k());
        let _ = writeln!(out, "ranks={},{},{}", c.ranks[0], c.ranks[1], c.ranks[2]);
        let _ = writeln!(out, "pca_option={}", if c.pca_option { "on" } else { "off" });
        let _ = writeln!(out, "sim_space={}", c.sim_space);
        let _ = writeln!(out, "similarity={}", c.effective_kind());
        let w = self.weights().as_slice();
        let _ = writeln!(out, "weights={}", w.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(","));
        let _ = writeln!(out, "weights_fallback={}", self.weights().is_fallback());
        for crit in 1..=self.k() {
            if let Some(SliceSimilarity::Store(s)) = self.similarities(crit) {
                let _ = writeln!(out, "similarity_pairs_c{crit}={}", s.num_pairs());
            }
        }
        out
    }

    /// Versioned text dump; see the module docs for the layout.
    pub fn dump(&self) -> String {
        let c = self.config();
        let mut out = String::new();
        let _ = writeln!(out, "{MAGIC} {SCHEMA_VERSION}");
        let _ = writeln!(out, "k {}", self.k());
        let _ = writeln!(out, "ranks {} {} {}", c.ranks[0], c.ranks[1], c.ranks[2]);
        let _ = writeln!(out, "pca_option {}", if c.pca_option { "on" } else { "off" });
        let _ = writeln!(out, "sim_space {}", c.sim_space);
        let _ = writeln!(out, "kind {}", c.effective_kind());
        let _ = writeln!(out, "weights {}", join(self.weights().as_slice()));
        let _ = writeln!(out, "users {}", self.overall().num_users());
        for id in self.overall().users().iter() {
            let _ = writeln!(out, "{id}");
        }
        let _ = writeln!(out, "items {}", self.overall().num_items());
        for id in self.overall().items().iter() {
            let _ = writeln!(out, "{id}");
        }
        let core = self.tucker().core();
        let [r1, r2, r3] = core.dims();
        let _ = writeln!(out, "core {r1} {r2} {r3}");
        let _ = writeln!(out, "{}", join(core.as_slice()));
        for (s, mode) in Mode::ALL.into_iter().enumerate() {
            write_matrix(&mut out, &format!("factor {}", s + 1), self.tucker().factor(mode));
        }
        match self.means() {
            Some(m) => {
                let _ = writeln!(out, "means {}", m.len());
                let _ = writeln!(out, "{}", join(m));
            }
            None => {
                let _ = writeln!(out, "means 0");
            }
        }
        for crit in 1..=self.k() {
            match self.similarities(crit).expect("criterion in range") {
                SliceSimilarity::Store(store) => {
                    let _ = writeln!(out, "similarities {crit} triples {}", store.num_pairs());
                    for (a, b, v) in store.pairs() {
                        let _ = writeln!(out, "{a} {b} {v}");
                    }
                }
                SliceSimilarity::Latent(l) => {
                    write_matrix(&mut out, &format!("similarities {crit} latent"), l.vectors());
                }
            }
        }
        let _ = writeln!(out, "end");
        out
    }
}

struct Reader<'a> {
    lines: Lines<'a>,
    line: usize,
}

impl<'a> Reader<'a> {
    fn next(&mut self) -> Result<&'a str> {
        self.line += 1;
        self.lines
            .next()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .ok_or_else(|| self.err("unexpected end of dump"))
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next()?;
        let mut fields = line.split_whitespace();
        let mut words = key.split_whitespace();
        for w in words.by_ref() {
            if fields.next() != Some(w) {
                return Err(self.err(format!("expected {key:?}")));
            }
        }
        Ok(fields.collect())
    }

    fn parse<T: FromStr>(&self, field: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("bad value {field:?}")))
    }

    fn numbers(&mut self, expected: usize) -> Result<Vec<f64>> {
        let line = self.next()?;
        let values = line
            .split_whitespace()
            .map(|f| self.parse::<f64>(f))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != expected {
            return Err(self.err(format!("expected {expected} values, found {}", values.len())));
        }
        Ok(values)
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let fields = self.keyed(key)?;
        match fields.as_slice() {
            [n] => self.parse(n),
            _ => Err(self.err(format!("expected one count after {key:?}"))),
        }
    }

    fn matrix_body(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.numbers(cols)?);
        }
        Matrix::from_vec(rows, cols, data)
    }

    fn shape(&self, fields: &[&str]) -> Result<(usize, usize)> {
        match fields {
            [r, c] => Ok((self.parse(r)?, self.parse(c)?)),
            _ => Err(self.err("expected rows and cols")),
        }
    }
}

impl ModelDump {
    pub fn parse(text: &str) -> Result<Self> {
        let mut r = Reader {
            lines: text.lines(),
            line: 0,
        };
        let header = r.keyed(MAGIC)?;
        let version: u32 = match header.as_slice() {
            [v] => r.parse(v)?,
            _ => return Err(r.err("missing schema version")),
        };
        if version != SCHEMA_VERSION {
            return Err(r.err(format!("unsupported schema version {version}")));
        }
        let k = r.count("k")?;
        let rank_fields = r.keyed("ranks")?;
        if rank_fields.len() != 3 {
            return Err(r.err("expected three ranks"));
        }
        let ranks = [r.parse(rank_fields[0])?, r.parse(rank_fields[1])?, r.parse(rank_fields[2])?];
        let pca_option = match r.keyed("pca_option")?.as_slice() {
            ["on"] => true,
            ["off"] => false,
            _ => return Err(r.err("pca_option must be on or off")),
        };
        let sim_space = r.keyed("sim_space")?.join(" ");
        let kind = r.keyed("kind")?.join(" ");
        let weights = r
            .keyed("weights")?
            .iter()
            .map(|f| r.parse::<f64>(f))
            .collect::<Result<Vec<_>>>()?;
        let n_users = r.count("users")?;
        let users = (0..n_users).map(|_| r.next().map(str::to_owned)).collect::<Result<_>>()?;
        let n_items = r.count("items")?;
        let items = (0..n_items).map(|_| r.next().map(str::to_owned)).collect::<Result<_>>()?;

        let core_fields = r.keyed("core")?;
        if core_fields.len() != 3 {
            return Err(r.err("expected core dims"));
        }
        let dims = [r.parse(core_fields[0])?, r.parse(core_fields[1])?, r.parse(core_fields[2])?];
        let values = r.numbers(dims[0] * dims[1] * dims[2])?;
        let mut idx = 0;
        let core = Tensor3::from_fn(dims, |_, _, _| {
            idx += 1;
            values[idx - 1]
        });

        let mut factors = Vec::with_capacity(3);
        for s in 1..=3 {
            let fields = r.keyed(&format!("factor {s}"))?;
            let (rows, cols) = r.shape(&fields)?;
            factors.push(r.matrix_body(rows, cols)?);
        }
        let n_means = r.count("means")?;
        let means = if n_means == 0 { None } else { Some(r.numbers(n_means)?) };

        let mut similarities = Vec::with_capacity(k);
        for c in 1..=k {
            let fields = r.keyed(&format!("similarities {c}"))?;
            match fields.as_slice() {
                ["triples", n] => {
                    let n: usize = r.parse(n)?;
                    let mut triples = Vec::with_capacity(n);
                    for _ in 0..n {
                        let line = r.next()?;
                        let f: Vec<&str> = line.split_whitespace().collect();
                        if f.len() != 3 {
                            return Err(r.err("expected `a b value`"));
                        }
                        triples.push((r.parse(f[0])?, r.parse(f[1])?, r.parse(f[2])?));
                    }
                    similarities.push(DumpedSimilarity::Triples(triples));
                }
                ["latent", rows, cols] => {
                    let (rows, cols) = r.shape(&[rows, cols])?;
                    similarities.push(DumpedSimilarity::Latent(r.matrix_body(rows, cols)?));
                }
                _ => return Err(r.err("expected triples or latent section")),
            }
        }
        r.keyed("end")?;
        let [f1, f2, f3]: [Matrix; 3] = factors.try_into().expect("three factors");
        Ok(Self {
            version,
            users,
            items,
            k,
            ranks,
            pca_option,
            sim_space,
            kind,
            weights,
            core,
            factors: [f1, f2, f3],
            means,
            similarities,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::mc::{build_mc_model, McConfig, SimSpace};
    use crate::model::{CriteriaTensor, RatingScale};
    use crate::synthetic::{generate, SyntheticSpec};

    fn model(space: SimSpace) -> McModel {
        let recs = generate(&SyntheticSpec::new(12, 10, 2, 4).density(0.5).noise(0.3)).unwrap();
        let (t, _) = CriteriaTensor::from_records(&recs, 2, RatingScale::letter13()).unwrap();
        build_mc_model(&t, &McConfig::new([3, 3, 2], 7).sim_space(space)).unwrap()
    }

    #[test]
    fn dump_round_trips_bitwise() {
        for space in [SimSpace::Latent, SimSpace::Reconstructed] {
            let m = model(space);
            let d = ModelDump::parse(&m.dump()).unwrap();
            assert_eq!(d.version, SCHEMA_VERSION);
            assert_eq!(&d.core, m.tucker().core());
            assert_eq!(&d.factors[1], m.tucker().factor(Mode::Two));
            assert_eq!(d.weights, m.weights().as_slice());
            assert_eq!(d.users.len(), m.overall().num_users());
            assert_eq!(d.similarities.len(), 2);
            if let (DumpedSimilarity::Triples(t), Some(SliceSimilarity::Store(s))) = (&d.similarities[0], m.similarities(1)) {
                assert_eq!(t, &s.pairs().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn bad_dumps() {
        assert!(ModelDump::parse("").is_err());
        assert!(ModelDump::parse("mcrec-model 99\n").is_err());
        let text = model(SimSpace::Latent).dump();
        let truncated: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(matches!(ModelDump::parse(&truncated), Err(Error::Parse { .. })));
    }

    #[test]
    fn summary_lists_settings() {
        let s = model(SimSpace::Reconstructed).summary();
        assert!(s.contains("ranks=3,3,2\n"), "{s}");
        assert!(s.contains("similarity=pearson\n"));
        assert!(s.contains("similarity_pairs_c1="));
    }
}
