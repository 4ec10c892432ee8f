use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use umd_cli::ingest::{ingest_csv, DataFormat, Delimiter, IngestError, IngestOptions};

fn umd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umd")).args(args).output().expect("spawn umd")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SWEEP: &str = r#"
[problem]
kind = "least-squares"
samples = 50
features = 20
seed = 1

[set]
kind = "ball"
radius = 0.5

[run]
policies = ["md", "da", "gold5"]
step-sizes = [0.5, 1.0, 1e6]
step-unit = "smooth"
horizon = 200
"#;

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap();
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn ingest_last_column_target() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "d.csv", "1,2,5\n0,1,3\n1,1,4\n");
    let d = ingest_csv(Path::new(&path), &DataFormat::LastColumnTarget, &IngestOptions::default()).unwrap();
    assert_eq!((d.samples(), d.feature_count()), (3, 2));
    assert_eq!(d.features().data(), &[1.0, 2.0, 0.0, 1.0, 1.0, 1.0]);
    assert_eq!(d.targets().as_slice(), &[5.0, 3.0, 4.0]);

    let scaled = IngestOptions {
        feature_scale: 1e-3,
        ..IngestOptions::default()
    };
    let d = ingest_csv(Path::new(&path), &DataFormat::LastColumnTarget, &scaled).unwrap();
    assert_eq!(d.features().data(), &[1e-3, 2e-3, 0.0, 1e-3, 1e-3, 1e-3]);
    assert_eq!(d.targets().as_slice(), &[5.0, 3.0, 4.0]);
}

#[test]
fn ingest_errors_name_the_line() {
    let dir = TempDir::new().unwrap();
    let path = write(dir.path(), "r.csv", "1,2,5\n0,1,3\n1,4\n");
    let err = ingest_csv(Path::new(&path), &DataFormat::LastColumnTarget, &IngestOptions::default()).unwrap_err();
    assert!(matches!(err, IngestError::Ragged { line: 3, expected: 3, got: 2, .. }), "{err}");
    assert!(err.to_string().contains(":3:"), "{err}");

    let path = write(dir.path(), "p.csv", "1,2,5\n0,x,3\n");
    let err = ingest_csv(Path::new(&path), &DataFormat::LastColumnTarget, &IngestOptions::default()).unwrap_err();
    assert!(matches!(err, IngestError::Parse { line: 2, column: 2, .. }), "{err}");
}

#[test]
fn ingest_separate_labels_with_whitespace() {
    let dir = TempDir::new().unwrap();
    let x = write(dir.path(), "x.data", "10 20 \n30  40\n");
    let y = write(dir.path(), "y.labels", "1\n-1\n");
    let options = IngestOptions {
        delimiter: Delimiter::Whitespace,
        feature_scale: 1e-3,
        ..IngestOptions::default()
    };
    let d = ingest_csv(Path::new(&x), &DataFormat::SeparateLabels(y.into()), &options).unwrap();
    assert_eq!(d.features().data(), &[10e-3, 20e-3, 30e-3, 40e-3]);
    assert_eq!(d.targets().as_slice(), &[1.0, -1.0]);

    let short = write(dir.path(), "short.labels", "1\n");
    let err = ingest_csv(Path::new(&x), &DataFormat::SeparateLabels(short.into()), &options).unwrap_err();
    assert!(matches!(err, IngestError::Shape { .. }), "{err}");
}

#[test]
fn sweep_writes_nine_traces_and_a_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let out = dir.path().join("out");
    let o = umd(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names.len(), 10, "{names:?}");
    assert!(names.contains(&"summary.csv".to_string()));
    for name in names.iter().filter(|n| *n != "summary.csv") {
        let rows = read_csv(&out.join(name));
        assert_eq!(rows[0].join(","), "t,f,gap,theta_norm,branch,res_I,res_II");
        assert_eq!(rows.len(), 1 + 201, "{name}");
    }
    let summary = read_csv(&out.join("summary.csv"));
    assert_eq!(summary.len(), 10);
    let f_star: f64 = summary[1][5].parse().unwrap();
    for row in &summary[1..] {
        assert_eq!(row[2], "ok");
        let rows = read_csv(&out.join(format!("{}__{}.csv", row[0], row[1])));
        // The gap column is exactly f - f_star on the parsed values.
        for r in &rows[1..] {
            let f: f64 = r[1].parse().unwrap();
            let gap: f64 = r[2].parse().unwrap();
            assert_eq!(gap, f - f_star);
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sweep.toml", SWEEP);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = umd(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--certify"]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let mut count = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        count += 1;
    }
    assert_eq!(count, 10);
}

#[test]
fn zero_objective_has_zero_gap() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "zero.toml",
        r#"
[problem]
kind = "zero"
dim = 4

[set]
kind = "ball"
radius = 1.0

[run]
policies = ["md", "da", "gold1", "quasi-da", "quasi-md"]
step-sizes = [0.1, 10.0]
horizon = 20
theta1 = [0.3, -2.0, 0.0, 1.0]
certify = true
"#,
    );
    let out = dir.path().join("out");
    let o = umd(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut traces = 0;
    for entry in fs::read_dir(&out).unwrap() {
        let path = entry.unwrap().path();
        if path.file_name().unwrap() == "summary.csv" {
            continue;
        }
        for r in &read_csv(&path)[1..] {
            assert_eq!(r[2], "0e0", "{path:?}");
        }
        traces += 1;
    }
    assert_eq!(traces, 10);
}

#[test]
fn unknown_regularizer_kind_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let text = format!("{SWEEP}\n[regularizer]\nkind = \"huber\"\n");
    let cfg = write(dir.path(), "bad.toml", &text);
    let o = umd(&["sweep", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("huber"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_missing_files_have_distinct_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "typo.toml", &SWEEP.replace("horizon", "horizn"));
    let o = umd(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("horizn"));

    let missing = dir.path().join("missing.toml");
    let o = umd(&["sweep", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));

    let o = umd(&["sweep"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn a_failing_cell_does_not_stop_the_sweep() {
    let dir = TempDir::new().unwrap();
    // Elastic net has no mirror map, so MD fails while DA runs.
    let cfg = write(
        dir.path(),
        "mixed.toml",
        r#"
[problem]
kind = "least-squares"
samples = 10
features = 3

[regularizer]
kind = "elastic-net"

[run]
policies = ["md", "da"]
step-sizes = [0.01]
horizon = 5
f-star = 0.0
"#,
    );
    let out = dir.path().join("out");
    let o = umd(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cell md"), "{}", stderr(&o));
    assert!(out.join("da__1e-2.csv").exists());
    let summary = read_csv(&out.join("summary.csv"));
    assert_eq!((summary[1][2].as_str(), summary[2][2].as_str()), ("failed", "ok"));
}

#[test]
fn csv_problems_resolve_relative_to_the_config() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "d.csv", "1,2,5\n0,1,3\n1,1,4\n2,0,1\n");
    let cfg = write(
        dir.path(),
        "csv.toml",
        r#"
[problem]
kind = "least-squares"
source = "csv"
path = "d.csv"
format = "last-column-target"

[run]
policies = ["aumd", "da"]
step-sizes = [1.0]
step-unit = "smooth"
horizon = 3
"#,
    );
    let out = dir.path().join("out");
    let o = umd(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read_csv(&out.join("summary.csv")).len(), 2);
}

#[test]
fn vi_and_regret_subcommands_emit_summaries() {
    let dir = TempDir::new().unwrap();
    let vi = write(
        dir.path(),
        "vi.toml",
        r#"
[problem]
kind = "bilinear"
payoff = [[2.0, -1.0], [-1.0, 1.0]]

[regularizer]
kind = "entropy"

[vi]
variant = "dual-extrapolation"
gamma = 0.25
horizon = 500
certify = true
"#,
    );
    let out = dir.path().join("vi");
    let o = umd(&["vi", "--config", &vi, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = read_csv(&out.join("vi_summary.csv"));
    let gap: f64 = s[1][3].parse().unwrap();
    assert!((0.0..0.05).contains(&gap), "gap {gap}");

    let regret = write(
        dir.path(),
        "regret.toml",
        r#"
[set]
kind = "simplex"
dim = 5

[regularizer]
kind = "entropy"

[regret]
adversary = "alternating"
payoff = [1.0, 0.0, -1.0, 0.5, 0.0]
horizon = 200
"#,
    );
    let out = dir.path().join("regret");
    let o = umd(&["regret", "--config", &regret, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = read_csv(&out.join("regret_summary.csv"));
    let (r, b): (f64, f64) = (s[1][3].parse().unwrap(), s[1][4].parse().unwrap());
    assert!(r <= b, "regret {r} above bound {b}");
    assert_eq!(read_csv(&out.join("regret.csv")).len(), 201);
}

#[test]
fn selftest_passes() {
    let o = umd(&["selftest", "--seed", "7"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
}
