use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rpptu");

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn rpptu")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn solve_appendix() {
    let out = run(&["solve", fixture("appendix.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["status"], "optimal");
    assert_eq!(json["objective"], 22);
    assert_eq!(json["per_agent"].as_array().unwrap().len(), 2);
}

#[test]
fn exhausted_budget_exits_two() {
    let dir = tempdir();
    let inst = dir.join("inst.json");
    let gen = run(&[
        "gen",
        "--vertices",
        "12",
        "--ratio",
        "1.6",
        "--beta",
        "0.5",
        "--seed",
        "3",
        "-o",
        inst.to_str().unwrap(),
    ]);
    assert!(gen.status.success());
    let out = run(&["solve", inst.to_str().unwrap(), "--node-budget", "1", "--no-cuts"]);
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["status"], "gap");
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(run(&["solve"]).status.code(), Some(64));
    assert_eq!(run(&["solve", "x.json", "--paths", "sideways"]).status.code(), Some(64));
    assert_eq!(run(&["bench", "--cells", "0.5:8"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_file_is_an_error() {
    let out = run(&["solve", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/instance.json"));
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--vertices", "20", "--ratio", "1.2", "--beta", "0.3", "--seed", "7"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["gen", "--vertices", "20", "--ratio", "1.2", "--beta", "0.3", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn verify_appendix_passes() {
    let out = run(&["verify", fixture("appendix.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["dimension"]["computed"], 20);
    assert_eq!(json["pass"], true);
}

#[test]
fn bench_writes_csv() {
    let out = run(&["bench", "--cells", "0.5:5:1.6", "--count", "2", "--node-budget", "50"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "beta,V,A,variant,OPT,NODES,TIME_s,nCP");
    assert_eq!(lines.len(), 3);
}

#[test]
fn solve_side_outputs() {
    let dir = tempdir();
    let (lp, dot, sol) = (dir.join("root.lp"), dir.join("g.dot"), dir.join("sol.json"));
    let out = run(&[
        "solve",
        fixture("appendix.json").to_str().unwrap(),
        "--gantt",
        "--dump-lp",
        lp.to_str().unwrap(),
        "--dump-replicated",
        dot.to_str().unwrap(),
        "-o",
        sol.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("agent  1 |"));
    assert!(std::fs::read_to_string(lp).unwrap().starts_with("\\"));
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
    assert!(std::fs::read_to_string(sol).unwrap().contains("\"objective\": 22"));
}

fn tempdir() -> PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir =
        std::env::temp_dir().join(format!("rpptu-cli-{}-{}", std::process::id(), NEXT.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
