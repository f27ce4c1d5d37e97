//! End-to-end runs of the `orbitcount` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orbitcount")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn temp_model(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("orbitcount-{}-{name}.model", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

const SAMPLE: &str = "\
[model]
name = full2
b = 0
n_removed = 1
vertices = 2
[edge] from=1 to=1 roof=1.0 class=0
[edge] from=1 to=2 roof=1.0 class=1
[edge] from=2 to=1 roof=1.0 class=0
[edge] from=2 to=2 roof=1.0 class=1
[removed] cycle = 2
";

#[test]
fn count_and_predict_examples() {
    let out = run(&[
        "--builtin",
        "full2",
        "--include-removed",
        "count",
        "--T",
        "3",
        "--delta",
        "3",
        "--rho",
        "0",
        "--alpha",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "T,delta,target_class,exact\n3.0,3.0,1,3\n");
    let out = run(&["--builtin", "full2", "predict", "--T", "10", "--rho", "0.5"]);
    let text = stdout(&out);
    let predicted: f64 = text.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((predicted - 18.637).abs() < 1e-3, "{text}");
}

#[test]
fn model_file_matches_builtin() {
    let path = temp_model("sample", SAMPLE);
    let from_file =
        run(&["--model", path.to_str().unwrap(), "sweep", "--Tmin", "4", "--Tmax", "9", "--step", "1", "--rho", "0.5"]);
    let builtin = run(&["--builtin", "full2", "sweep", "--Tmin", "4", "--Tmax", "9", "--step", "1", "--rho", "0.5"]);
    assert!(from_file.status.success());
    assert_eq!(stdout(&from_file), stdout(&builtin));
    let text = stdout(&builtin);
    assert!(text.starts_with("T,delta,target_class,exact,predicted,ratio\n"));
    assert_eq!(text.lines().count(), 7);
    std::fs::remove_file(path).unwrap();
}

#[test]
fn output_is_deterministic() {
    let args = ["--builtin", "bench3", "chebotarev", "--quotient", "z2xz3", "--n", "9"];
    let [a, b] = [run(&args), run(&args)];
    assert_eq!(a.stdout, b.stdout);
    let seq = run(&["--sequential", "--builtin", "bench3", "chebotarev", "--quotient", "z2xz3", "--n", "9"]);
    assert_eq!(a.stdout, seq.stdout);
}

#[test]
fn show_round_trips() {
    for name in ["full2", "goldenmean", "bench3"] {
        let shown = stdout(&run(&["--builtin", name, "show"]));
        let path = temp_model(name, &shown);
        let again = run(&["--model", path.to_str().unwrap(), "show"]);
        assert_eq!(stdout(&again), shown);
        std::fs::remove_file(path).unwrap();
    }
}

#[test]
fn exit_codes() {
    let bad = temp_model("bad", &SAMPLE.replace("cycle = 2", "cycle = 1,2,1,2"));
    let out = run(&["--model", bad.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("repetition"));
    std::fs::remove_file(bad).unwrap();
    assert_eq!(run(&["--builtin", "nope", "validate"]).status.code(), Some(2));
    assert_eq!(run(&["--builtin", "full2", "entropy", "--rho", "1"]).status.code(), Some(3));
    assert_eq!(run(&["--builtin", "full2", "margulis", "--T", "100"]).status.code(), Some(2));
    assert_eq!(run(&["--builtin", "full2", "validate"]).status.code(), Some(0));
}

#[test]
fn equidist_and_pressure_tables() {
    let out =
        run(&["--builtin", "full2", "equidist", "--T", "12", "--rho", "0.5", "--obs", "1,1,1,1", "--obs", "edges"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 6, "{text}");
    assert!(text.lines().nth(1).unwrap().starts_with("1.0;1.0;1.0;1.0,1.0,1.0,"));
    let out = run(&["--builtin", "full2", "pressure", "--u", "0"]);
    assert_eq!(
        stdout(&out).lines().nth(1).unwrap().split(',').take(3).collect::<Vec<_>>(),
        ["0.0", "0.6931471805599453", "0.5"]
    );
}
