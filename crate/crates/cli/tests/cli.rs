use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn c2v(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_c2v"))
        .args(args)
        .env_remove("C2V_WORDNET_DIR")
        .output()
        .expect("binary runs")
}

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const DESK: &[&str] = &[
    "--dim",
    "50",
    "--epochs",
    "5",
    "--lr",
    "1.0",
    "--window-full",
    "--bucket",
    "100000",
    "--seed",
    "42",
];

/// extract, clean, split and train into `dir`; returns (model, test corpus).
fn prepare(dir: &Path) -> (PathBuf, PathBuf) {
    let corpus = dir.join("corpus.txt");
    let clean = dir.join("clean.txt");
    let (train, test) = (dir.join("train.txt"), dir.join("test.txt"));
    let model = dir.join("m.c2v");
    let sql = data("synthetic/schemas.sql");
    assert!(c2v(&["extract", s(&sql), "-o", s(&corpus)]).status.success());
    assert!(c2v(&["clean", "-i", s(&corpus), "-o", s(&clean)]).status.success());
    assert!(c2v(&[
        "split-dataset",
        "-i",
        s(&clean),
        "--train",
        s(&train),
        "--test",
        s(&test)
    ])
    .status
    .success());
    let mut args = vec!["train", "--corpus", s(&train), "--model", s(&model)];
    args.extend_from_slice(DESK);
    let o = c2v(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    (model, test)
}

#[test]
fn no_arguments_prints_usage_and_exits_1() {
    let o = c2v(&[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Usage"), "{}", stderr(&o));
}

#[test]
fn unknown_subcommand_and_conflicting_flags_exit_1() {
    assert_eq!(c2v(&["frobnicate"]).status.code(), Some(1));
    let o = c2v(&[
        "train",
        "--corpus",
        "c.txt",
        "--model",
        "m.c2v",
        "--window",
        "3",
        "--window-full",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(
        c2v(&[
            "split-dataset",
            "-i",
            "x",
            "--train",
            "a",
            "--test",
            "b",
            "--fraction",
            "1.5"
        ])
        .status
        .code(),
        Some(1)
    );
}

#[test]
fn help_exits_0() {
    let o = c2v(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("suggest"));
}

#[test]
fn missing_input_exits_2_naming_the_path() {
    let o = c2v(&["train", "--corpus", "missing.txt", "--model", "m.c2v"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.txt"), "{}", stderr(&o));
}

#[test]
fn failed_runs_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("corpus.txt");
    fs::write(&bad, "users\n").unwrap();
    let model = dir.path().join("m.c2v");
    let o = c2v(&["train", "--corpus", s(&bad), "--model", s(&model)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("corpus.txt:1"), "{}", stderr(&o));
    let nested = dir.path().join("nope/out.txt");
    let o = c2v(&["extract", s(&data("synthetic/schemas.sql")), "-o", s(&nested)]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn extract_reads_stdin() {
    use std::io::Write;
    let mut child = Command::new(env!("CARGO_BIN_EXE_c2v"))
        .arg("extract")
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"CREATE TABLE authors (authorID INT, name VARCHAR(10), address TEXT);")
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    assert_eq!(stdout(&o), "authors authorid name address\n");
}

#[test]
fn split_and_wnsim() {
    let o = c2v(&["split", "holidaydates"]);
    assert_eq!(stdout(&o), "holiday dates\n");
    let o = c2v(&["wnsim", "holiday", "event", "--wordnet-dir", s(&data("wordnet-3.0"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "0.142857\n");
}

#[test]
fn wordnet_dir_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_c2v"))
        .args(["wnsim", "dog", "cat"])
        .env("C2V_WORDNET_DIR", "/no/such/wordnet")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("/no/such/wordnet"), "{}", stderr(&o));
}

#[test]
fn suggest_eval_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let (model, test) = prepare(dir.path());
    assert!(dir.path().join("m.c2i").is_file());

    let o = c2v(&[
        "suggest",
        "--model",
        s(&model),
        "--columns",
        "id,calendarid,name,eventdate,locutionid",
        "--k",
        "1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 1);
    let (name, score) = out.trim_end().split_once('\t').unwrap();
    assert!(!name.is_empty());
    assert!(score.parse::<f64>().unwrap().abs() <= 1.0);
    assert_eq!(
        c2v(&["suggest", "--model", s(&model), "--columns", "id", "--k", "0"])
            .status
            .code(),
        Some(1)
    );

    let out_dir = dir.path().join("eval");
    let o = c2v(&[
        "eval",
        "--model",
        s(&model),
        "--test",
        s(&test),
        "--out",
        s(&out_dir),
        "--wordnet-dir",
        s(&data("wordnet-3.0")),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("median f1"));
    let results = fs::read_to_string(out_dir.join("results.tsv")).unwrap();
    assert_eq!(
        results.lines().count(),
        fs::read_to_string(&test).unwrap().lines().count()
    );
    assert!(results.lines().all(|l| l.split('\t').count() == 5));
    assert_eq!(
        fs::read_to_string(out_dir.join("cdf.tsv")).unwrap().lines().count(),
        101
    );

    // a second run over fresh files is byte-identical
    let dir2 = tempfile::tempdir().unwrap();
    let (model2, _) = prepare(dir2.path());
    assert!(fs::read(&model).unwrap() == fs::read(&model2).unwrap());
    for f in ["corpus.txt", "clean.txt", "train.txt", "test.txt", "m.c2i"] {
        assert!(
            fs::read(dir.path().join(f)).unwrap() == fs::read(dir2.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn pipeline_runs_from_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(
        &conf,
        format!(
            "# test run\nsql = {}\nout_dir = out\nwordnet_dir = {}\ndim = 20\nepochs = 2\nbucket = 20000\nlearning_rate = 1.0\n",
            s(&data("synthetic/schemas.sql")),
            s(&data("wordnet-3.0"))
        ),
    )
    .unwrap();
    let o = c2v(&["pipeline", "--config", s(&conf)]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in [
        "corpus.txt",
        "clean.txt",
        "rejections.tsv",
        "train.txt",
        "test.txt",
        "model.c2v",
        "model.c2i",
        "results.tsv",
        "cdf.tsv",
        "summary.txt",
    ] {
        assert!(dir.path().join("out").join(f).is_file(), "{f}");
    }
    assert_eq!(
        fs::read_to_string(dir.path().join("out/test.txt"))
            .unwrap()
            .lines()
            .count(),
        20
    );

    fs::write(&conf, "sql = nowhere.sql\n").unwrap();
    let o = c2v(&["pipeline", "--config", s(&conf)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("nowhere.sql"));
}
