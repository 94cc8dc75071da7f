use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mcrec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcrec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// 24 users × 18 items, two taste groups, about two thirds filled.
fn movielens_fixture(dir: &Path) -> PathBuf {
    let mut text = String::new();
    for u in 0..24u32 {
        for i in 0..18u32 {
            if (u + 2 * i) % 3 == 0 {
                continue;
            }
            let liked = (u % 2) == (i % 2);
            let r = if liked { 4 + (u + i) % 2 } else { 1 + (u * i) % 3 };
            text.push_str(&format!("{}\t{}\t{r}\t{}\n", u + 1, i + 1, 880000000 + u * 100 + i));
        }
    }
    let path = dir.join("u.data");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn help_lists_every_flag() {
    let cmd = mcrec_cli::command();
    for sub in cmd.get_subcommands() {
        let name = sub.get_name();
        let help = stdout(&mcrec(&[name, "--help"]));
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                assert!(help.contains(&format!("--{long}")), "{name} help lacks --{long}");
            }
        }
    }
    let top = mcrec(&["--help"]);
    assert_eq!(top.status.code(), Some(0));
    for verb in ["stats", "filter", "split", "decompose", "evaluate", "sweep", "recommend", "mc-evaluate"] {
        assert!(stdout(&top).contains(verb), "missing verb {verb}");
    }
}

#[test]
fn documented_flag_names_exist() {
    let cmd = mcrec_cli::command();
    let longs: Vec<String> = cmd
        .get_subcommands()
        .flat_map(|s| s.get_arguments().filter_map(|a| a.get_long().map(str::to_owned)).collect::<Vec<_>>())
        .collect();
    for flag in [
        "input",
        "format",
        "criteria",
        "scale",
        "min-user",
        "min-item",
        "train-fraction",
        "seed",
        "sim",
        "ranks",
        "pca-option",
        "sim-space",
        "top-n",
        "relevance-threshold",
        "threads",
        "output",
    ] {
        assert!(longs.iter().any(|l| l == flag), "no --{flag}");
    }
}

#[test]
fn usage_and_data_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let input = input.to_str().unwrap();
    assert_eq!(mcrec(&["stats", "--input", input, "--bogus"]).status.code(), Some(1));
    assert_eq!(mcrec(&["evaluate", "--input", input]).status.code(), Some(1), "seed is mandatory");
    assert_eq!(mcrec(&["stats", "--input", "/no/such/file"]).status.code(), Some(2));
    let bad = dir.path().join("bad.data");
    fs::write(&bad, "1\t2\tseven\t0\n").unwrap();
    let o = mcrec(&["stats", "--input", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    let o = mcrec(&["evaluate", "--input", input, "--seed", "1", "--train-fraction", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(mcrec(&["--version"]).status.code(), Some(0));
}

#[test]
fn stats_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let o = mcrec(&["stats", "--input", input.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let ratings = fs::read_to_string(&input).unwrap().lines().count();
    assert!(text.starts_with(&format!("users=24 items=18 ratings={ratings}\n")), "{text}");
    assert!(text.contains("density="));
}

#[test]
fn split_partitions_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let prefix = dir.path().join("part");
    let args = [
        "split",
        "--input",
        input.to_str().unwrap(),
        "--train-fraction",
        "0.7",
        "--seed",
        "9",
        "--output",
        prefix.to_str().unwrap(),
    ];
    assert_eq!(mcrec(&args).status.code(), Some(0));
    let train = fs::read_to_string(dir.path().join("part.train")).unwrap();
    let test = fs::read_to_string(dir.path().join("part.test")).unwrap();
    let mut all: Vec<&str> = train.lines().chain(test.lines()).collect();
    all.sort_unstable();
    let original = fs::read_to_string(&input).unwrap();
    let mut want: Vec<&str> = original.lines().collect();
    want.sort_unstable();
    assert_eq!(all, want);
    assert!(!train.is_empty() && !test.is_empty());
    assert_eq!(mcrec(&args).status.code(), Some(0));
    assert_eq!(fs::read_to_string(dir.path().join("part.train")).unwrap(), train);
}

#[test]
fn filter_drops_sparse_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let out = dir.path().join("dense.data");
    let o = mcrec(&[
        "filter",
        "--input",
        input.to_str().unwrap(),
        "--min-user",
        "13",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let kept = fs::read_to_string(out).unwrap();
    assert!(kept.lines().count() < fs::read_to_string(&input).unwrap().lines().count());
}

#[test]
fn evaluate_is_deterministic_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let run = |threads: &str| {
        let o = mcrec(&["evaluate", "--input", input.to_str().unwrap(), "--seed", "4", "--threads", threads]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let one = run("1");
    assert!(one.contains("mae=") && one.contains("precision="));
    assert_eq!(one, run("1"));
    assert_eq!(one, run("4"));
}

#[test]
fn sweep_grid_has_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let o = mcrec(&[
        "sweep",
        "--input",
        input.to_str().unwrap(),
        "--fractions",
        "0.7,0.8",
        "--sims",
        "pearson,euclidean,loglikelihood,tanimoto",
        "--seed",
        "42",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("dataset,similarity,train_fraction"));
    assert!(lines[1].contains(",pearson,0.7,42,"));
    assert!(lines[8].contains(",tanimoto,0.8,42,"));

    let config = dir.path().join("grid.txt");
    fs::write(&config, format!("# one run\n{} cosine 0.75 3\n", input.display())).unwrap();
    let o = mcrec(&["sweep", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 2);
}

#[test]
fn recommend_lists_unrated_items() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let input = input.to_str().unwrap();
    let o = mcrec(&["recommend", "--input", input, "--user", "1", "--top-n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').collect()).collect();
    assert!(!rows.is_empty() && rows.len() <= 3);
    let rated: Vec<String> = fs::read_to_string(input)
        .unwrap()
        .lines()
        .filter(|l| l.starts_with("1\t"))
        .map(|l| l.split('\t').nth(1).unwrap().to_owned())
        .collect();
    for (n, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (n + 1).to_string());
        assert!(!rated.iter().any(|r| r == row[1]));
    }
    assert_eq!(mcrec(&["recommend", "--input", input, "--user", "nobody"]).status.code(), Some(2));
    assert_eq!(mcrec(&["recommend", "--input", input, "--user", "1", "--sim", "latent"]).status.code(), Some(1));
    let o = mcrec(&["recommend", "--input", input, "--user", "1", "--sim", "latent", "--ranks", "4", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn decompose_prints_singular_values_and_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let input = movielens_fixture(dir.path());
    let out = dir.path().join("svd.txt");
    let o = mcrec(&[
        "decompose",
        "--input",
        input.to_str().unwrap(),
        "--ranks",
        "3",
        "--seed",
        "1",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let sigma: Vec<f64> = text
        .lines()
        .find_map(|l| l.strip_prefix("sigma="))
        .unwrap()
        .split(',')
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(sigma.len(), 3);
    assert!(sigma.windows(2).all(|w| w[0] >= w[1]));
    assert!(fs::read_to_string(out).unwrap().starts_with("mcrec-svd 1\n"));
}

#[test]
fn multi_criteria_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("mc.csv");
    let o = mcrec(&[
        "filter",
        "--synthetic",
        "40,30,4",
        "--seed",
        "5",
        "--format",
        "mc-csv",
        "--output",
        data.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let data = data.to_str().unwrap();
    let base = ["--input", data, "--format", "mc-csv", "--criteria", "4", "--scale", "letter13"];

    let o = mcrec(&[&["stats"][..], &base[..]].concat());
    assert!(stdout(&o).contains("criteria=4"));

    let dump = dir.path().join("model.txt");
    let o = mcrec(&[
        &["decompose"][..],
        &base[..],
        &["--ranks", "3,4,5", "--seed", "1", "--output", dump.to_str().unwrap()][..],
    ]
    .concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("ranks=3,4,5"));
    assert!(fs::read_to_string(&dump).unwrap().starts_with("mcrec-model"));

    let eval = |extra: &[&str]| {
        let o = mcrec(&[&["mc-evaluate"][..], &base[..], &["--seed", "2", "--ranks", "3,4,5"][..], extra].concat());
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        stdout(&o)
    };
    let latent = eval(&[]);
    assert!(latent.contains("baseline_mae=") && latent.contains("mae_c4="));
    assert_eq!(latent, eval(&["--threads", "3"]));
    let recon = eval(&["--sim-space", "reconstructed", "--pca-option", "off", "--sim", "adjusted-cosine"]);
    assert!(recon.contains("similarity=adjusted-cosine"));

    let o = mcrec(&[&["recommend"][..], &base[..], &["--user", "u1", "--ranks", "3,4,5"][..]].concat());
    assert_eq!(o.status.code(), Some(1), "mc recommend needs a seed");
    let o = mcrec(&[&["recommend"][..], &base[..], &["--user", "u1", "--ranks", "3,4,5", "--seed", "3"][..]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let o = mcrec(&["mc-evaluate", "--input", data, "--seed", "1"]);
    assert_ne!(o.status.code(), Some(0), "movielens parse of a csv file must fail");
}
