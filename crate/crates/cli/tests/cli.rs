use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn discode(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_discode")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn records(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).expect("one JSON record per line")).collect()
}

#[test]
fn gallery_entry_passes_with_complete_rows() {
    let out = discode(&["gallery", "--entry", "legendre"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = records(&stdout(&out));
    assert!(!rows.is_empty());
    for r in &rows {
        for field in ["key", "quantity", "value", "tolerance", "pass", "claim"] {
            assert!(r.get(field).is_some(), "row without {field}: {r}");
        }
        assert_eq!(r["pass"], Value::Bool(true));
    }
    let keys: Vec<&str> = rows.iter().map(|r| r["key"].as_str().unwrap()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&discode(&["gallery", "--entry", "nonesuch"])), 2);
    assert_eq!(code(&discode(&[])), 2);
    assert_eq!(code(&discode(&["gallery", "--r-max", "1.5"])), 2);
    assert_eq!(code(&discode(&["--help"])), 0);
    assert_eq!(code(&discode(&["gallery", "--entry", "legendre", "--audit-tol", "1e-300"])), 1);

    let dir = TempDir::new().unwrap();
    let nodes = write(&dir, "n.txt", "0.1 0\n0.2 0\n");
    let targets = write(&dir, "t.txt", "1e300 0\n-1e300 0\n");
    assert_eq!(code(&discode(&["construct", "interp", "--nodes", s(&nodes), "--targets", s(&targets)])), 3);
    let missing = dir.path().join("absent.txt");
    assert_eq!(code(&discode(&["construct", "zeros", "--lambda", s(&missing)])), 2);
    let bad = write(&dir, "bad.txt", "0.1 zero\n");
    assert_eq!(code(&discode(&["construct", "zeros", "--lambda", s(&bad)])), 2);
}

#[test]
fn constructions_from_files() {
    let dir = TempDir::new().unwrap();
    let lambda = write(&dir, "zeros.txt", "# two zeros\n0.4 0\n-0.4 0\n");
    let out = discode(&["construct", "zeros", "--lambda", s(&lambda)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let spec = write(&dir, "spec.txt", "0.5 0 neutral\n0 -0.5 attractive\n");
    let out = discode(&["construct", "fixed-typed", "--spec", s(&spec), "--format", "table"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.lines().next().unwrap().starts_with("key"));
    assert!(text.contains("multiplier"));

    let nodes = write(&dir, "n.txt", "0.1 0.2\n-0.3 0.1\n0 -0.5\n");
    let targets = write(&dir, "t.txt", "1 0\n0 1\n-0.5 0.25\n");
    let trace = dir.path().join("trace.tsv");
    let out = discode(&["construct", "interp", "--nodes", s(&nodes), "--targets", s(&targets), "--trace-out", s(&trace)]);
    assert_eq!(code(&out), 0);
    assert!(std::fs::read_to_string(&trace).unwrap().lines().count() > 8);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.toml", "format = \"table\"\nradial-count = 16\nangular-count = 64\n");
    let table = discode(&["--config", s(&cfg), "gallery", "--entry", "legendre"]);
    assert_eq!(code(&table), 0);
    assert!(stdout(&table).starts_with("key"));
    let jsonl = discode(&["--config", s(&cfg), "gallery", "--entry", "legendre", "--format", "jsonl"]);
    assert_eq!(code(&jsonl), 0);
    records(&stdout(&jsonl));

    let unknown = write(&dir, "bad.toml", "colour = \"red\"\n");
    assert_eq!(code(&discode(&["--config", s(&unknown), "gallery"])), 2);
}

#[test]
fn output_flag_and_determinism() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("report.jsonl");
    let args = ["identities", "--entry", "legendre", "--points", "40"];
    let a = discode(&args);
    let b = discode(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(stdout(&a), stdout(&b));

    let mut with_out = args.to_vec();
    with_out.extend(["-o", s(&target)]);
    let c = discode(&with_out);
    assert_eq!(code(&c), 0);
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&target).unwrap(), stdout(&a));

    let seeded = ["identities", "--entry", "legendre", "--points", "40", "--seed", "9"];
    let s1 = discode(&seeded);
    assert_eq!(stdout(&s1), stdout(&discode(&seeded)));
    assert_ne!(stdout(&s1), stdout(&a));
}

#[test]
fn measures_and_paths() {
    let out = discode(&["measures", "--littlewood-paley", "--f", "monomial:2"]);
    assert_eq!(code(&out), 0);
    let out = discode(&["measures", "--entry", "thm1_i", "--p", "0.25", "--growth", "--alpha", "2", "--expect", "growing"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert_eq!(code(&discode(&["measures", "--entry", "legendre"])), 2);

    let dir = TempDir::new().unwrap();
    let ex = write(&dir, "ex.txt", "0 0 0.2\n");
    let verts = dir.path().join("path.txt");
    let out = discode(&["paths", "--start", "-0.5,0", "--target", "0.5,0", "--exclusions", s(&ex), "--trace-out", s(&verts)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let pts = discode::formats::parse_point_list(&std::fs::read_to_string(&verts).unwrap()).unwrap();
    assert!(pts.len() > 2);
    assert!(pts.iter().all(|z| discode::geometry::pseudo_hyperbolic(*z, 0.0.into()) >= 0.2 - 1e-12));
}
