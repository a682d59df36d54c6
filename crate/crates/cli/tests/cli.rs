use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sparse_isotonic::algorithms::SparseFit;
use sparse_isotonic::exact::brute_force_binary;
use sparse_isotonic::model::{ActiveSet, Dataset, NoiseModel};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn siso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_siso")).args(args).output().expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn fit_matches_the_recorded_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let tiny = fixture("tiny.csv");
    let stdout =
        ok(&siso(&["fit", "--data", p(&tiny), "--method", "ipir", "--s", "1", "--model", "input", "--out", p(&out)]));
    assert!(stdout.contains("active [1] objective 1"), "{stdout}");
    let fit = SparseFit::from_json(std::fs::File::open(&out).unwrap()).unwrap();
    assert_eq!(fit.active().one_based(), vec![1]);
    assert_eq!(fit.objective(), 1.0);

    let expected = std::fs::read_to_string(fixture("tiny_expected.txt")).unwrap();
    assert!(expected.contains("active=1") && expected.contains("objective=1"));
    let ds = Dataset::read_csv(std::fs::File::open(&tiny).unwrap(), NoiseModel::NoisyInput).unwrap();
    let best = (0..3)
        .map(|k| brute_force_binary(&ds, &ActiveSet::new(vec![k], 3).unwrap()).unwrap().objective)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(best, 1.0);
}

#[test]
fn fit_rejects_zero_sparsity_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let r = siso(&["fit", "--data", p(&fixture("tiny.csv")), "--s", "0", "--model", "input", "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("s >= 1"));
    assert!(!out.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0, "no temporary files left behind");
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit.json");
    let r = siso(&["fit", "--data", p(&fixture("bad.csv")), "--s", "1", "--model", "input", "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!out.exists());
    let r = siso(&["fit", "--data", p(&fixture("tiny.csv")), "--s", "1", "--model", "output", "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(0));
    let r = siso(&["fit", "--data", p(&fixture("missing.csv")), "--s", "1", "--model", "input", "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn predict_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = fixture("two_points.csv");
    for (rule, expected) in [("min", "prediction\n0.2\n0\n0.7\n"), ("max", "prediction\n0.7\n0.2\n1\n")] {
        let fit = dir.path().join(format!("{rule}.json"));
        ok(&siso(&["fit", "--data", p(&data), "--s", "2", "--model", "output", "--rule", rule, "--out", p(&fit)]));
        let preds = dir.path().join(format!("{rule}.csv"));
        ok(&siso(&["predict", "--fit", p(&fit), "--points", p(&fixture("query.csv")), "--out", p(&preds)]));
        assert_eq!(std::fs::read_to_string(&preds).unwrap(), expected, "rule {rule}");
    }
    let fit = dir.path().join("min.json");
    let r = siso(&["predict", "--fit", p(&fit), "--points", p(&fixture("tiny.csv"))]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn predictions_round_trip_through_json() {
    let dir = tempfile::tempdir().unwrap();
    let fit_path = dir.path().join("fit.json");
    let tiny = fixture("tiny.csv");
    ok(&siso(&["fit", "--data", p(&tiny), "--s", "2", "--model", "input", "--rule", "max", "--out", p(&fit_path)]));
    let cli = ok(&siso(&["predict", "--fit", p(&fit_path), "--points", p(&tiny)]));
    let fit = SparseFit::from_json(std::fs::File::open(&fit_path).unwrap()).unwrap();
    let ds = Dataset::read_csv(std::fs::File::open(&tiny).unwrap(), NoiseModel::NoisyInput).unwrap();
    let mut expected = String::from("prediction\n");
    for v in fit.predict_dataset(&ds).unwrap() {
        expected.push_str(&format!("{v}\n"));
    }
    assert_eq!(cli, expected);
}

#[test]
fn recover_with_exclusions_and_lp_dump() {
    let dir = tempfile::tempdir().unwrap();
    let tiny = fixture("tiny.csv");
    let ex = fixture("exclusions.csv");
    let found = ok(&siso(&["recover", "--data", p(&tiny), "--s", "2", "--model", "input", "--exclusions", p(&ex)]));
    let idx: Vec<usize> = found.trim().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(idx.len(), 2);
    assert!(!(idx.contains(&1) && idx.contains(&3)), "{idx:?}");

    let lp = dir.path().join("lp.txt");
    ok(&siso(&[
        "recover",
        "--data",
        p(&tiny),
        "--s",
        "1",
        "--model",
        "input",
        "--method",
        "lpsr",
        "--dump-lp",
        p(&lp),
    ]));
    let text = std::fs::read_to_string(&lp).unwrap();
    assert!(text.starts_with("# variables") && text.contains("\nmin: "), "{text}");

    let r = siso(&[
        "recover",
        "--data",
        p(&tiny),
        "--s",
        "1",
        "--model",
        "input",
        "--method",
        "lpsr",
        "--exclusions",
        p(&ex),
    ]);
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn noiseless_bench_recovers_everything() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let details = dir.path().join("details.json");
    let stdout =
        ok(&siso(&["bench", "--config", p(&fixture("noiseless.cfg")), "--out", p(&out), "--details", p(&details)]));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(stdout, csv);
    assert_eq!(csv, "n,IPIR d=5,LPSR d=5,S-LPSR d=5\n200,100,100,100\n");
    assert!(std::fs::read_to_string(&details).unwrap().contains("\"recovered\""));
}

#[test]
fn bench_budget_guard() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("table.csv");
    let r = siso(&["bench", "--config", p(&fixture("huge.cfg")), "--out", p(&out)]);
    assert_eq!(r.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn count_subcommand() {
    let chain = ok(&siso(&["count", "--points", p(&fixture("chain.csv"))]));
    assert_eq!(chain, "n,m,count\n3,2,4\n");
    let three = ok(&siso(&["count", "--points", p(&fixture("chain.csv")), "--m", "3"]));
    assert_eq!(three, "n,m,count\n3,3,10\n");
    let sweep = ok(&siso(&["count", "--n", "8", "--d", "2", "--trials", "200"]));
    let lines: Vec<&str> = sweep.lines().collect();
    assert_eq!(lines[0], "n,d,trials,mean_count,lower,upper,within");
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")), "{sweep}");
    let r = siso(&["count", "--n", "40", "--d", "2", "--trials", "1"]);
    assert_eq!(r.status.code(), Some(3));
}

#[test]
fn help_documents_exit_codes() {
    let help = ok(&siso(&["--help"]));
    assert!(help.contains("Exit status") && help.contains("3  size or budget guard"));
}
