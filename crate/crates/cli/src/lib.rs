//! `mcrec` command line: dataset inspection, filtering, splitting,
//! decomposition, evaluation sweeps and recommendation lists.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use mcrec_core::engine::{build_mc_model, recommend_top_n, McConfig, NeighborhoodSpec, SimSpace};
use mcrec_core::eval::{
    build_similarity, parse_sweep_config, run_benchmark_records, run_mc_benchmark_records, run_sweep,
    BenchmarkConfig, McBenchmarkConfig, SweepEntry, CSV_HEADER, DEFAULT_LATENT_RANK,
};
use mcrec_core::ingest::{
    density_filter, parse_movielens, parse_multicriteria, split_train_test, write_movielens,
    write_multicriteria, DensityFilterSpec, SplitSpec,
};
use mcrec_core::linalg::{impute_missing, truncated_svd_seeded, ImputeStrategy};
use mcrec_core::model::{CriteriaRecord, CriteriaTensor, Dataset, RatingRecord, RatingScale};
use mcrec_core::similarity::{EuclideanMode, SimilarityKind};
use mcrec_core::synthetic::{generate, SyntheticSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mcrec", version, about = "Multi-criteria item-based collaborative filtering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print user, item and rating counts.
    Stats(StatsArgs),
    /// Drop sparse users and items until every one meets the thresholds.
    Filter(FilterArgs),
    /// Split ratings into train and test files.
    Split(SplitArgs),
    /// Factor the rating matrix (SVD) or tensor (HOSVD) and print a summary.
    Decompose(DecomposeArgs),
    /// Item-based CF on the overall ratings: MAE, RMSE, precision, recall.
    Evaluate(EvaluateArgs),
    /// Evaluate every similarity × train-fraction combination as CSV.
    Sweep(SweepArgs),
    /// Top-N unrated items for one user.
    Recommend(RecommendArgs),
    /// Evaluate the multi-criteria HOSVD pipeline.
    McEvaluate(McEvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// TAB-separated `user item rating timestamp`.
    Movielens,
    /// Comma-separated `user,item,c1..ck,overall`.
    McCsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    #[value(name = "1-5")]
    FiveStar,
    /// F, D-, … A+ mapped to 1 … 13.
    Letter13,
}

impl ScaleArg {
    fn scale(self) -> RatingScale {
        match self {
            ScaleArg::FiveStar => RatingScale::five_star(),
            ScaleArg::Letter13 => RatingScale::letter13(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimArg {
    Pearson,
    Euclidean,
    Loglikelihood,
    Tanimoto,
    AdjustedCosine,
    Cosine,
    Latent,
}

impl SimArg {
    fn kind(self) -> SimilarityKind {
        match self {
            SimArg::Pearson => SimilarityKind::Pearson,
            SimArg::Euclidean => SimilarityKind::Euclidean,
            SimArg::Loglikelihood => SimilarityKind::LogLikelihood,
            SimArg::Tanimoto => SimilarityKind::Tanimoto,
            SimArg::AdjustedCosine => SimilarityKind::AdjustedCosine,
            SimArg::Cosine => SimilarityKind::Cosine,
            SimArg::Latent => SimilarityKind::LatentCosine,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimSpaceArg {
    Latent,
    Reconstructed,
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Rating file.
    #[arg(long, value_name = "PATH", required_unless_present = "synthetic")]
    pub input: Option<PathBuf>,
    /// Generate multi-criteria data instead: ym20, ym10, ym5 or USERS,ITEMS,K.
    #[arg(long, value_name = "SPEC", conflicts_with = "input")]
    pub synthetic: Option<String>,
    /// Noise standard deviation for --synthetic.
    #[arg(long, value_name = "SD", default_value_t = 0.0)]
    pub noise: f64,
    /// Observed-cell probability for --synthetic.
    #[arg(long, value_name = "P")]
    pub density: Option<f64>,
    #[arg(long, value_enum, default_value = "movielens")]
    pub format: Format,
    /// Criteria per record for mc-csv.
    #[arg(long, value_name = "K", default_value_t = 4)]
    pub criteria: usize,
    /// Rating scale for mc-csv; movielens is always 1-5.
    #[arg(long, value_enum, default_value = "letter13")]
    pub scale: ScaleArg,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub min_user: usize,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub min_item: usize,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Seed for --synthetic.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Seed for --synthetic.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    /// Destination file; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_name = "F", default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, value_name = "S", required = true)]
    pub seed: Option<u64>,
    /// Writes PATH.train and PATH.test.
    #[arg(long, value_name = "PATH", required = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// HOSVD ranks (users, items, slices); movielens uses the first as SVD rank.
    #[arg(long, value_name = "R1,R2,R3")]
    pub ranks: Option<String>,
    #[arg(long, value_enum, default_value = "on")]
    pub pca_option: Switch,
    #[arg(long, value_enum, default_value = "latent")]
    pub sim_space: SimSpaceArg,
}

#[derive(Debug, Clone, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "pearson")]
    pub sim: SimArg,
    #[arg(long, value_name = "S", required = true)]
    pub seed: Option<u64>,
    /// Writes the model dump here.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RankingArgs {
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub top_n: usize,
    /// Ratings at or above this are relevant; defaults to 4 on 1-5, 9 on letter13.
    #[arg(long, value_name = "T")]
    pub relevance_threshold: Option<f64>,
    /// Worker threads.
    #[arg(long, value_name = "W", default_value_t = 1)]
    pub threads: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EuclideanArg {
    /// 1 / (1 + d/√c) over c co-ratings.
    Normalized,
    /// 1 / (1 + d).
    Raw,
}

/// Neighborhood and measure options of single-criterion CF.
#[derive(Debug, Clone, Args)]
pub struct CfArgs {
    #[arg(long, value_enum, default_value = "normalized")]
    pub euclidean_mode: EuclideanArg,
    /// Let negatively correlated items vote.
    #[arg(long)]
    pub include_negative: bool,
    /// Keep only the N most similar neighbors per prediction.
    #[arg(long, value_name = "N")]
    pub max_neighbors: Option<usize>,
    /// Drop neighbors less similar than this.
    #[arg(long, value_name = "S")]
    pub min_similarity: Option<f64>,
    /// Minimum co-rating users for a similarity to count.
    #[arg(long, value_name = "N")]
    pub min_co_ratings: Option<usize>,
}

impl CfArgs {
    fn apply(&self, config: &mut BenchmarkConfig) {
        config.euclidean_mode = match self.euclidean_mode {
            EuclideanArg::Normalized => EuclideanMode::Normalized,
            EuclideanArg::Raw => EuclideanMode::Raw,
        };
        config.neighborhood = config.neighborhood.include_negative(self.include_negative);
        if let Some(n) = self.max_neighbors {
            config.neighborhood = config.neighborhood.max_neighbors(n);
        }
        if let Some(t) = self.min_similarity {
            config.neighborhood = config.neighborhood.min_similarity(t);
        }
        config.min_co_ratings = self.min_co_ratings;
    }
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "pearson")]
    pub sim: SimArg,
    #[arg(long, value_name = "F", default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, value_name = "S", required = true)]
    pub seed: Option<u64>,
    /// SVD rank for --sim latent (first value used).
    #[arg(long, value_name = "R1,R2,R3")]
    pub ranks: Option<String>,
    #[command(flatten)]
    pub cf: CfArgs,
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// MovieLens file for the grid.
    #[arg(long, value_name = "PATH", required_unless_present = "config")]
    pub input: Option<PathBuf>,
    #[arg(long, value_name = "F,F,...", default_value = "0.7,0.8")]
    pub fractions: String,
    #[arg(long, value_name = "KIND,...", default_value = "pearson,euclidean,loglikelihood,tanimoto")]
    pub sims: String,
    #[arg(long, value_name = "S", required_unless_present = "config")]
    pub seed: Option<u64>,
    /// Experiment file, one `dataset kind fraction seed` per line; replaces the grid.
    #[arg(long, value_name = "PATH", conflicts_with = "input")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub min_user: usize,
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub min_item: usize,
    #[command(flatten)]
    pub cf: CfArgs,
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RecommendArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// External user id.
    #[arg(long, value_name = "ID")]
    pub user: String,
    #[arg(long, value_enum, default_value = "pearson")]
    pub sim: SimArg,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub top_n: usize,
    /// Required for mc-csv input, --synthetic and --sim latent.
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "W", default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct McEvaluateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Measure for --sim-space reconstructed.
    #[arg(long, value_enum, default_value = "pearson")]
    pub sim: SimArg,
    #[arg(long, value_name = "F", default_value_t = 0.8)]
    pub train_fraction: f64,
    #[arg(long, value_name = "S", required = true)]
    pub seed: Option<u64>,
    /// Keep only the N most similar neighbors per prediction.
    #[arg(long, value_name = "N")]
    pub max_neighbors: Option<usize>,
    /// Drop neighbors less similar than this.
    #[arg(long, value_name = "S")]
    pub min_similarity: Option<f64>,
    #[command(flatten)]
    pub ranking: RankingArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

/// Failure of a command: bad usage (exit 1) or bad data (exit 2).
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<mcrec_core::Error> for Failure {
    fn from(e: mcrec_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

pub fn command() -> clap::Command {
    Cli::command()
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            EXIT_DATA
        }
    }
}

fn emit(output: Option<&Path>, text: &str) -> Outcome<()> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn thread_pool(threads: usize) -> Outcome<rayon::ThreadPool> {
    if threads == 0 {
        return Err(Failure::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Data(e.to_string()))
}

fn parse_ranks(text: &str) -> Outcome<Vec<usize>> {
    let ranks: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("--ranks expects positive integers, got {text:?}")))?;
    if ranks.is_empty() || ranks.len() > 3 || ranks.contains(&0) {
        return Err(Failure::Usage(format!("--ranks expects one to three positive integers, got {text:?}")));
    }
    Ok(ranks)
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> Outcome<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse::<T>().map_err(|_| Failure::Usage(format!("bad value {s:?} in {flag}"))))
        .collect()
}

fn synthetic_spec(text: &str, seed: Option<u64>, noise: f64) -> Outcome<SyntheticSpec> {
    let seed = seed.ok_or_else(|| Failure::Usage("--synthetic needs --seed".into()))?;
    let spec = match text {
        "ym20" => SyntheticSpec::ym20(seed),
        "ym10" => SyntheticSpec::ym10(seed),
        "ym5" => SyntheticSpec::ym5(seed),
        custom => match parse_list::<usize>(custom, "--synthetic")?.as_slice() {
            &[users, items, k] => SyntheticSpec::new(users, items, k, seed),
            _ => return Err(Failure::Usage(format!("unrecognized --synthetic value {custom:?}"))),
        },
    };
    Ok(spec.noise(noise))
}

/// Loaded ratings: single-criterion, or multi-criteria with k and scale.
enum Loaded {
    Single(Vec<RatingRecord>),
    Multi(Vec<CriteriaRecord>, usize, RatingScale),
}

impl Loaded {
    fn overall(&self) -> Vec<RatingRecord> {
        match self {
            Loaded::Single(r) => r.clone(),
            Loaded::Multi(r, _, _) => r.iter().map(CriteriaRecord::overall_record).collect(),
        }
    }

    fn scale(&self) -> RatingScale {
        match self {
            Loaded::Single(_) => RatingScale::five_star(),
            Loaded::Multi(_, _, s) => s.clone(),
        }
    }
}

fn load(args: &InputArgs, seed: Option<u64>) -> Outcome<Loaded> {
    let filter = DensityFilterSpec::new(args.min_user, args.min_item);
    if let Some(spec) = &args.synthetic {
        let mut spec = synthetic_spec(spec, seed, args.noise)?;
        spec.k = if args.criteria == 0 { spec.k } else { args.criteria };
        spec.scale = args.scale.scale();
        if let Some(p) = args.density {
            spec.density = p;
        }
        let records = generate(&spec)?;
        return Ok(Loaded::Multi(density_filter(&records, filter), spec.k, spec.scale));
    }
    let path = args.input.as_ref().ok_or_else(|| Failure::Usage("--input is required".into()))?;
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("reading {}: {e}", path.display())))?;
    let in_file = |e: mcrec_core::Error| Failure::Data(format!("{}: {e}", path.display()));
    Ok(match args.format {
        Format::Movielens => Loaded::Single(density_filter(&parse_movielens(&text).map_err(in_file)?, filter)),
        Format::McCsv => {
            let scale = args.scale.scale();
            let records = parse_multicriteria(&text, args.criteria, &scale).map_err(in_file)?;
            Loaded::Multi(density_filter(&records, filter), args.criteria, scale)
        }
    })
}

fn label(args: &InputArgs) -> String {
    if let Some(s) = &args.synthetic {
        return format!("synthetic:{s}");
    }
    args.input
        .as_ref()
        .and_then(|p| p.file_name())
        .map_or_else(String::new, |n| n.to_string_lossy().into_owned())
}

fn dispatch(command: Command) -> Outcome<()> {
    match command {
        Command::Stats(a) => stats(&a),
        Command::Filter(a) => filter(&a),
        Command::Split(a) => split(&a),
        Command::Decompose(a) => decompose(&a),
        Command::Evaluate(a) => {
            let pool = thread_pool(a.ranking.threads)?;
            pool.install(|| evaluate(&a))
        }
        Command::Sweep(a) => {
            let pool = thread_pool(a.ranking.threads)?;
            pool.install(|| sweep(&a))
        }
        Command::Recommend(a) => {
            let pool = thread_pool(a.threads)?;
            pool.install(|| recommend(&a))
        }
        Command::McEvaluate(a) => {
            let pool = thread_pool(a.ranking.threads)?;
            pool.install(|| mc_evaluate(&a))
        }
    }
}

fn stats(a: &StatsArgs) -> Outcome<()> {
    let loaded = load(&a.input, a.seed)?;
    let (d, _) = Dataset::from_records(&loaded.overall(), loaded.scale())?;
    let s = d.stats();
    let mut out = format!("{s}\ndensity={:.4}\n", s.density);
    if let Loaded::Multi(_, k, _) = &loaded {
        let _ = writeln!(out, "criteria={k}");
    }
    emit(None, &out)
}

fn filter(a: &FilterArgs) -> Outcome<()> {
    let text = match load(&a.input, a.seed)? {
        Loaded::Single(r) => write_movielens(&r),
        Loaded::Multi(r, _, _) => write_multicriteria(&r),
    };
    emit(a.output.as_deref(), &text)
}

fn split(a: &SplitArgs) -> Outcome<()> {
    let spec = SplitSpec::new(a.train_fraction, a.seed.expect("required by the parser"))
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let out = a.output.as_ref().expect("required by the parser");
    let suffixed = |s: &str| {
        let mut p = out.clone().into_os_string();
        p.push(s);
        PathBuf::from(p)
    };
    let (train_text, test_text, n_train, n_test) = match load(&a.input, a.seed)? {
        Loaded::Single(r) => {
            let (tr, te) = split_train_test(&r, spec);
            (write_movielens(&tr), write_movielens(&te), tr.len(), te.len())
        }
        Loaded::Multi(r, _, _) => {
            let (tr, te) = split_train_test(&r, spec);
            (write_multicriteria(&tr), write_multicriteria(&te), tr.len(), te.len())
        }
    };
    emit(Some(&suffixed(".train")), &train_text)?;
    emit(Some(&suffixed(".test")), &test_text)?;
    emit(None, &format!("train={n_train} test={n_test}\n"))
}

fn mc_config(model: &ModelArgs, sim: SimArg, seed: u64, k: usize, users: usize, items: usize) -> Outcome<McConfig> {
    let ranks = match &model.ranks {
        Some(text) => match parse_ranks(text)?.as_slice() {
            &[r1, r2, r3] => [r1, r2, r3],
            _ => return Err(Failure::Usage("--ranks needs R1,R2,R3 for multi-criteria data".into())),
        },
        None => [10.min(users), 10.min(items), k + 1],
    };
    let space = match model.sim_space {
        SimSpaceArg::Latent => SimSpace::Latent,
        SimSpaceArg::Reconstructed => SimSpace::Reconstructed,
    };
    if space == SimSpace::Reconstructed && sim == SimArg::Latent {
        return Err(Failure::Usage("--sim-space reconstructed needs a rating-based --sim".into()));
    }
    Ok(McConfig::new(ranks, seed)
        .pca_option(model.pca_option == Switch::On)
        .sim_space(space)
        .kind(sim.kind()))
}

fn decompose(a: &DecomposeArgs) -> Outcome<()> {
    let seed = a.seed.expect("required by the parser");
    match load(&a.input, a.seed)? {
        Loaded::Single(records) => {
            let (d, _) = Dataset::from_records(&records, RatingScale::five_star())?;
            let rank = match &a.model.ranks {
                Some(text) => parse_ranks(text)?[0],
                None => DEFAULT_LATENT_RANK,
            };
            let dense = impute_missing(&d.to_sparse_matrix(), ImputeStrategy::ItemMean)?;
            let model = truncated_svd_seeded(&dense, rank, seed)?;
            let sigma: Vec<String> = model.sigma().iter().map(|s| format!("{s:.4}")).collect();
            let err = model.reconstruct().sub(&dense).frobenius_norm() / dense.frobenius_norm();
            let mut out = format!("{}\nrank={rank}\nsigma={}\nrelative_error={err:.4}\n", d.stats(), sigma.join(","));
            if let Some(path) = &a.output {
                let v = model.v();
                let _ = writeln!(out, "factors_written={}", path.display());
                let mut dump = format!("mcrec-svd 1\nrank {rank}\nsigma {}\n", join(model.sigma()));
                for (label, m) in [("u", model.u()), ("v", v)] {
                    let _ = writeln!(dump, "{label} {} {}", m.rows(), m.cols());
                    for r in 0..m.rows() {
                        let _ = writeln!(dump, "{}", join(m.row(r)));
                    }
                }
                emit(Some(path), &dump)?;
            }
            emit(None, &out)
        }
        Loaded::Multi(records, k, scale) => {
            let (t, _) = CriteriaTensor::from_records(&records, k, scale)?;
            let config = mc_config(&a.model, a.sim, seed, k, t.num_users(), t.num_items())?;
            let model = build_mc_model(&t, &config)?;
            if let Some(path) = &a.output {
                emit(Some(path), &model.dump())?;
            }
            emit(None, &model.summary())
        }
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn evaluate(a: &EvaluateArgs) -> Outcome<()> {
    let seed = a.seed.expect("required by the parser");
    let loaded = load(&a.input, a.seed)?;
    let mut config = BenchmarkConfig::new(a.sim.kind(), a.train_fraction, seed);
    config.dataset = label(&a.input);
    config.top_n = a.ranking.top_n;
    config.relevance_threshold = a.ranking.relevance_threshold;
    if let Some(text) = &a.ranks {
        config.latent_rank = parse_ranks(text)?[0];
    }
    a.cf.apply(&mut config);
    check_fraction(a.train_fraction)?;
    let report = run_benchmark_records(&loaded.overall(), &loaded.scale(), &config)?;
    emit(a.output.as_deref(), &report.to_key_values())
}

fn check_fraction(f: f64) -> Outcome<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Failure::Usage(format!("--train-fraction {f} must lie strictly between 0 and 1")))
    }
}

fn sweep(a: &SweepArgs) -> Outcome<()> {
    let entries = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("reading {}: {e}", path.display())))?;
            parse_sweep_config(&text)?
        }
        None => {
            let input = a.input.as_ref().expect("required by the parser");
            let seed = a.seed.expect("required by the parser");
            let kinds: Vec<SimArg> = a
                .sims
                .split(',')
                .map(|s| SimArg::from_str(s.trim(), true).map_err(|_| Failure::Usage(format!("unknown similarity {s:?}"))))
                .collect::<Outcome<_>>()?;
            let fractions: Vec<f64> = parse_list(&a.fractions, "--fractions")?;
            let mut entries = Vec::new();
            for &f in &fractions {
                check_fraction(f)?;
                for &k in &kinds {
                    entries.push(SweepEntry {
                        dataset: input.display().to_string(),
                        kind: k.kind(),
                        train_fraction: f,
                        seed,
                    });
                }
            }
            entries
        }
    };
    let mut base = BenchmarkConfig::new(SimilarityKind::Pearson, 0.8, 0);
    base.top_n = a.ranking.top_n;
    base.relevance_threshold = a.ranking.relevance_threshold;
    base.density = DensityFilterSpec::new(a.min_user, a.min_item);
    a.cf.apply(&mut base);
    let reports = run_sweep(&entries, &base)?;
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    emit(a.output.as_deref(), &out)
}

fn recommend(a: &RecommendArgs) -> Outcome<()> {
    if a.top_n == 0 {
        return Err(Failure::Usage("--top-n must be at least 1".into()));
    }
    let randomized = a.input.synthetic.is_some() || a.input.format == Format::McCsv || a.sim == SimArg::Latent;
    if randomized && a.seed.is_none() {
        return Err(Failure::Usage("this input needs --seed".into()));
    }
    let seed = a.seed.unwrap_or(0);
    let lines: Vec<(String, f64)> = match load(&a.input, a.seed)? {
        Loaded::Single(records) => {
            let (d, _) = Dataset::from_records(&records, RatingScale::five_star())?;
            let u = d
                .users()
                .index_of(&a.user)
                .ok_or_else(|| Failure::Data(format!("unknown user {:?}", a.user)))?;
            let mut config = BenchmarkConfig::new(a.sim.kind(), 0.5, seed);
            if let Some(text) = &a.model.ranks {
                config.latent_rank = parse_ranks(text)?[0];
            }
            let sims = build_similarity(&d, &config)?;
            recommend_top_n(&d, sims.as_ref(), &NeighborhoodSpec::default(), u, a.top_n)
                .into_iter()
                .map(|p| (d.items().id(p.item).expect("indexed item").to_owned(), p.value))
                .collect()
        }
        Loaded::Multi(records, k, scale) => {
            let (t, _) = CriteriaTensor::from_records(&records, k, scale)?;
            let u = t
                .users()
                .index_of(&a.user)
                .ok_or_else(|| Failure::Data(format!("unknown user {:?}", a.user)))?;
            let config = mc_config(&a.model, a.sim, seed, k, t.num_users(), t.num_items())?;
            let model = build_mc_model(&t, &config)?;
            model
                .recommend(u, a.top_n)
                .into_iter()
                .map(|p| (t.items().id(p.item).expect("indexed item").to_owned(), p.value))
                .collect()
        }
    };
    let mut out = String::new();
    for (rank, (item, value)) in lines.iter().enumerate() {
        let _ = writeln!(out, "{}\t{item}\t{value:.4}", rank + 1);
    }
    emit(a.output.as_deref(), &out)
}

fn mc_evaluate(a: &McEvaluateArgs) -> Outcome<()> {
    let seed = a.seed.expect("required by the parser");
    check_fraction(a.train_fraction)?;
    let (records, k, scale) = match load(&a.input, a.seed)? {
        Loaded::Multi(r, k, s) => (r, k, s),
        Loaded::Single(_) => return Err(Failure::Usage("mc-evaluate needs --format mc-csv or --synthetic".into())),
    };
    let (t, _) = CriteriaTensor::from_records(&records, k, scale.clone())?;
    let mut mc = mc_config(&a.model, a.sim, seed, k, t.num_users(), t.num_items())?;
    if let Some(n) = a.max_neighbors {
        mc.neighborhood = mc.neighborhood.max_neighbors(n);
    }
    if let Some(t) = a.min_similarity {
        mc.neighborhood = mc.neighborhood.min_similarity(t);
    }
    let mut config = McBenchmarkConfig::new(mc, a.train_fraction);
    config.dataset = label(&a.input);
    config.top_n = a.ranking.top_n;
    config.relevance_threshold = a.ranking.relevance_threshold;
    let report = run_mc_benchmark_records(&records, k, &scale, &config)?;
    emit(a.output.as_deref(), &report.to_key_values())
}
