use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_newton-radon")
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs").join(name)
}

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join(name)).unwrap()).unwrap()
}

fn write_spec(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn analyze_example_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["analyze", spec("example2.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(dir.path(), "analysis.json");
    assert_eq!(v["d"], "3");
    assert_eq!(v["o"], 0);
    assert_eq!(v["g"], "1/3");
    assert_eq!(v["k"], "1");
    assert_eq!(v["vertices"], serde_json::json!([["0", "6"], ["6", "0"]]));
    assert_eq!(v["regions"]["case"], "subcritical");
    assert_eq!(v["slice"]["excluded_line"]["offset"], "1/4");
}

#[test]
fn slice_of_example_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["slice", spec("example1_l3.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(dir.path(), "slice.json");
    assert_eq!(
        v["vertices"],
        serde_json::json!([["0", "0"], ["1/2", "1/4"], ["3/4", "1/2"], ["1", "1"]])
    );
}

#[test]
fn region_classification_and_weighted_profile() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "region",
            spec("example1_weighted.toml").to_str().unwrap(),
            "--classify",
            "0.5,0.25,-0.5",
            "--classify",
            "0.5,0.5,0.9",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(dir.path(), "regions.json");
    assert_eq!(v["g"], "1/6");
    assert_eq!(v["k"], "3/2");
    assert_eq!(v["classifications"][0]["verdict"], "provably-bounded");
    // alpha > 0: only the diagonal obstruction is available
    assert_eq!(v["classifications"][1]["verdict"], "provably-unbounded");
    assert_eq!(v["classifications"][1]["witness"]["kind"], "diagonal-obstruction");
}

#[test]
fn sublevel_fit_for_the_quarter_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify-sublevel", spec("circle.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(dir.path(), "sublevel.json");
    assert!((v["a0_hat"].as_f64().unwrap() - 1.0).abs() < 0.05, "{v}");
    assert_eq!(v["d0_hat"], 0);
    assert_eq!(v["consistent_with_prediction"], true);
    let csv = std::fs::read_to_string(dir.path().join("sublevel.csv")).unwrap();
    assert_eq!(csv.lines().count(), 14);
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_spec(dir.path(), "bad.toml", "dimension = 2\nterms = [{ exps = [1, 0], coeff = \"1\" }]\n");
    let o = run(dir.path(), &["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("second order"), "{err}");

    let bad = write_spec(
        dir.path(),
        "alpha.toml",
        "dimension = 1\nterms = [{ exps = [2], coeff = \"1\" }]\n[[block]]\nvars = [1]\nalpha = 1\n",
    );
    assert_eq!(run(dir.path(), &["analyze", bad.to_str().unwrap()]).status.code(), Some(2));
    let o = run(dir.path(), &["region", spec("example2.toml").to_str().unwrap(), "--classify", "1.5,0.2,0"]);
    assert_eq!(o.status.code(), Some(2));
}

fn small_sharpness(dir: &Path, s: &str) -> PathBuf {
    write_spec(
        dir,
        "small.toml",
        &format!(
            "dimension = 1\nterms = [{{ exps = [3], coeff = \"1\" }}]\n[sharpness]\ns = \"{s}\"\nr = [\"1/2\", \"1/4\", \"1/8\", \"1/16\"]\ngrid = [256, 1024]\nhalf_widths = [2, 32]\nn_box = 4\nmax_doublings = 0\n"
        ),
    )
}

#[test]
fn sharpness_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let p = small_sharpness(dir.path(), "1/10");
    let o = run(dir.path(), &["verify-sharpness", p.to_str().unwrap(), "--s", "1/10", "--s", "-1/10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(dir.path(), "sharpness.json");
    assert_eq!(v[0]["verdict"], "growth-observed");
    assert_eq!(v[0]["predicted_exponent"], "-3/10");
    assert_eq!(v[1]["verdict"], "no-growth");
    // s = 0 sits on the plane: flat ratios are inconclusive
    let o = run(dir.path(), &["verify-sharpness", p.to_str().unwrap(), "--s", "0"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn svg_export() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["export", spec("example2.toml").to_str().unwrap(), "--svg"]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["regions.svg", "slice.svg"] {
        let text = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(text.starts_with("<svg") && text.contains("<polygon"));
    }
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("env-out");
    let o = Command::new(bin())
        .env("NEWTON_RADON_OUT", &target)
        .args(["slice", spec("example1_l3.toml").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(target.join("slice.json").exists());
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let small = small_sharpness(dir.path(), "1/10");
    let cases: Vec<(Vec<String>, Vec<&str>)> = vec![
        (vec!["analyze".into(), spec("parabola.toml").display().to_string()], vec!["analysis.json"]),
        (vec!["region".into(), spec("example2.toml").display().to_string()], vec!["regions.json"]),
        (vec!["slice".into(), spec("example2.toml").display().to_string()], vec!["slice.json"]),
        (
            vec!["verify-sublevel".into(), spec("circle.toml").display().to_string(), "--seed".into(), "11".into()],
            vec!["sublevel.json", "sublevel.csv"],
        ),
        (vec!["verify-sharpness".into(), small.display().to_string()], vec!["sharpness.json", "sharpness.csv"]),
        (vec!["export".into(), spec("example2.toml").display().to_string(), "--svg".into()], vec!["regions.svg", "slice.svg"]),
    ];
    for (args, files) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        assert!(run(&a, &args).status.success());
        assert!(run(&b, &args).status.success());
        for f in files {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
        }
    }
}
