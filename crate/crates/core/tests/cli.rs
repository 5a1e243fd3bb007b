use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SPEC: &str = r#"
name = "cli"
trials = 4
base_seed = 3

[problem]
kind = "royal_road"
length = 16
block = 4

[[algorithm]]
label = "NADE"
algorithm = "nade"
population = 40
hidden = 16
evals = 2000

[[algorithm]]
label = "GA"
algorithm = "ga"
population = 40
evals = 2000
"#;

fn nneda(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nneda"))
        .args(args)
        .output()
        .unwrap()
}

fn run_into(spec: &Path, out: &Path, jobs: &str) {
    let o = nneda(&[
        "run",
        spec.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "-j",
        jobs,
        "--save-models",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC).unwrap();
    run_into(&spec, &dir.path().join("a"), "1");
    run_into(&spec, &dir.path().join("b"), "2");
    for f in [
        "records.csv",
        "trials.csv",
        "summary.csv",
        "models/NADE_trial2.model",
    ] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs");
    }
}

#[test]
fn summary_matches_trials_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC).unwrap();
    let out = dir.path().join("out");
    run_into(&spec, &out, "1");

    let mut trials = csv::Reader::from_path(out.join("trials.csv")).unwrap();
    let h = trials.headers().unwrap().clone();
    let col = |name: &str| h.iter().position(|c| c == name).unwrap();
    let (alg, best, success) = (col("algorithm"), col("best_fitness"), col("success"));
    let rows: Vec<csv::StringRecord> = trials.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);

    let mut summary = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let sh = summary.headers().unwrap().clone();
    let scol = |name: &str| sh.iter().position(|c| c == name).unwrap();
    let srows: Vec<csv::StringRecord> = summary.records().map(Result::unwrap).collect();
    assert_eq!(srows.len(), 2);
    for s in &srows {
        let mine: Vec<&csv::StringRecord> = rows
            .iter()
            .filter(|r| r[alg] == s[scol("algorithm")])
            .collect();
        assert_eq!(mine.len(), 4);
        let xs: Vec<f64> = mine.iter().map(|r| r[best].parse().unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / 4.0;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0).sqrt();
        let wins = mine.iter().filter(|r| &r[success] == "true").count();
        let close =
            |a: f64, b: &str| (a - b.parse::<f64>().unwrap()).abs() <= 1e-5 * a.abs().max(1.0);
        assert!(close(mean, &s[scol("mean")]));
        assert!(close(sd, &s[scol("sd")]));
        assert!(close(
            xs.iter().copied().fold(f64::MIN, f64::max),
            &s[scol("max")]
        ));
        assert!(close(25.0 * wins as f64, &s[scol("success_pct")]));
    }

    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    assert!(records.starts_with("algorithm,trial,generation,evals,best_fitness\n"));
}

#[test]
fn bad_config_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        SPEC.replace("population = 40\nhidden", "population = 0\nhidden"),
    )
    .unwrap();
    let o = nneda(&[
        "run",
        spec.to_str().unwrap(),
        "-o",
        dir.path().join("x").to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    let v: serde_json::Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
    assert_eq!(v["error"], "config");
    assert!(v["message"].as_str().unwrap().contains("population"));

    let o = nneda(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert!(!o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(v["error"].is_string());
}

#[test]
fn sample_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(&spec, SPEC).unwrap();
    let out = dir.path().join("out");
    run_into(&spec, &out, "1");
    let model = out.join("models/NADE_trial0.model");
    let samples = dir.path().join("s.csv");
    let p = |x: &Path| x.to_str().unwrap().to_string();

    let o = nneda(&[
        "sample",
        &p(&model),
        "200",
        "--seed",
        "5",
        "--spec",
        &p(&spec),
        "-o",
        &p(&samples),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&samples).unwrap().lines().count(), 201);

    let cov = dir.path().join("cov.csv");
    let o = nneda(&[
        "analyze",
        "cov",
        "--samples",
        &p(&samples),
        "--group",
        "ones:0-3",
        "--group",
        "zeros:4-7",
        "-o",
        &p(&cov),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&cov).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "group,mean,ones:0-3,zeros:4-7"
    );
    assert_eq!(text.lines().count(), 3);

    let div = dir.path().join("div.csv");
    let o = nneda(&[
        "analyze",
        "diversity",
        "--samples",
        &p(&samples),
        "--k",
        "3",
        "-o",
        &p(&div),
    ]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(&div).unwrap().lines().count(), 201);

    let o = nneda(&[
        "analyze",
        "clamp",
        "--model",
        &p(&model),
        "--clamp",
        "0-3=1",
        "--samples",
        "500",
        "--group",
        "ones:0-3",
        "-o",
        &p(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let groups = fs::read_to_string(dir.path().join("analysis_clamp_groups.csv")).unwrap();
    assert_eq!(groups.lines().nth(1).unwrap(), "ones:0-3,1");
}

#[test]
fn grid_writes_ranked_cells_and_winner() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.toml");
    fs::write(
        &spec,
        r#"
name = "g"
base_seed = 1
grid_trials = 2

[problem]
kind = "one_max"
length = 30

[[algorithm]]
label = "GA"
algorithm = "ga"
population = 30
evals = 1500
grid = { mutation_rate = [0.5, 0.03] }
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = nneda(&["grid", spec.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    let lines: Vec<&str> = grid.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("GA,1,mutation_rate=0.03,"));
    let best = fs::read_to_string(out.join("best_GA.toml")).unwrap();
    assert!(best.contains("mutation_rate = 0.03"));
}
