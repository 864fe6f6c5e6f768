use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bd")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Self {
            dir: TempDir::new().unwrap(),
        };
        f.write("p3.txt", "0 1\n1 2\n");
        f.write("c4.txt", "# square\n0 1\n1 2\n2 3\n3 0\n");
        f.write("split.txt", "0 1\n2 3\n");
        f
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn build(&self, graph: &str, strategy: &str, out: &str) -> Output {
        bd(&["build", "-g", s(&self.path(graph)), "--strategy", strategy, "-o", s(&self.path(out))])
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_reports_height_and_entries() {
    let f = Fixture::new();
    let out = f.build("p3.txt", "separator", "p3.bdix");
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "n"), "3");
    assert_eq!(field(&text, "m"), "2");
    assert_eq!(field(&text, "h"), "2");
    assert_eq!(field(&text, "entries"), "5");
    let bytes: u64 = field(&text, "bytes").parse().unwrap();
    assert_eq!(bytes, fs::metadata(f.path("p3.bdix")).unwrap().len());

    let out = f.build("p3.txt", "min-degree", "p3m.bdix");
    let text = stdout(&out);
    assert_eq!(field(&text, "h"), "3");
    assert_eq!(field(&text, "entries"), "6");
}

#[test]
fn disconnected_graph_fails() {
    let f = Fixture::new();
    let out = f.build("split.txt", "separator", "x.bdix");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("disconnected"));
}

#[test]
fn tree_dump_lists_every_vertex() {
    let f = Fixture::new();
    let tree = f.path("tree.txt");
    let out = bd(&[
        "build",
        "-g",
        s(&f.path("p3.txt")),
        "-o",
        s(&f.path("p3.bdix")),
        "--tree-out",
        s(&tree),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(tree).unwrap(), "1 1 0 3\n0 1 1 1\n2 1 2 1\n");
}

#[test]
fn query_single_pair_and_pairs_file() {
    let f = Fixture::new();
    f.build("p3.txt", "separator", "p3.bdix");
    let idx = f.path("p3.bdix");
    let out = bd(&["query", "-i", s(&idx), "-p", "0", "2"]);
    assert!(out.status.success());
    let row: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(row["s"], "0");
    assert_eq!(row["t"], "2");
    assert!((row["bd"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert!(row["micros"].as_f64().unwrap() >= 0.0);
    assert!(stdout(&out).starts_with(r#"{"s":"0","t":"2","bd":2.0,"micros":"#));

    let pairs = f.write("pairs.txt", "0 1\n\n0 2\n");
    let out = bd(&["query", "-i", s(&idx), "--pairs", s(&pairs), "--out", "csv"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0], "s,t,bd,micros");
    assert!(lines[1].starts_with("0,1,0.666666666666666"));
    assert!(lines[2].starts_with("0,2,2.0,"));
}

#[test]
fn unknown_label_is_a_usage_error() {
    let f = Fixture::new();
    f.build("p3.txt", "separator", "p3.bdix");
    let out = bd(&["query", "-i", s(&f.path("p3.bdix")), "-p", "0", "zz"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
    let out = bd(&["query", "-i", s(&f.path("p3.bdix"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = bd(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn corrupt_index_is_an_input_error() {
    let f = Fixture::new();
    f.build("p3.txt", "separator", "p3.bdix");
    let mut bytes = fs::read(f.path("p3.bdix")).unwrap();
    bytes[0] = b'Z';
    fs::write(f.path("bad.bdix"), bytes).unwrap();
    let out = bd(&["query", "-i", s(&f.path("bad.bdix")), "-p", "0", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));
}

#[test]
fn bench_is_seeded_and_accurate() {
    let f = Fixture::new();
    f.build("p3.txt", "separator", "p3.bdix");
    let (idx, graph) = (f.path("p3.bdix"), f.path("p3.txt"));
    let args = ["bench", "-i", s(&idx), "-g", s(&graph), "-k", "3", "--seed", "42"];
    let out = bd(&args);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(field(&text, "seed"), "42");
    assert_eq!(field(&text, "samples"), "3");
    let err: f64 = field(&text, "max_relative_error").parse().unwrap();
    assert!(err <= 1e-9);

    let args = ["bench", "-i", s(&idx), "-g", s(&graph), "-k", "10"];
    assert_eq!(bd(&args).status.code(), Some(1));
}

#[test]
fn validate_passes_on_small_graphs() {
    let f = Fixture::new();
    for graph in ["p3.txt", "c4.txt"] {
        for strategy in ["separator", "min-degree"] {
            let out = bd(&["validate", "-g", s(&f.path(graph)), "--strategy", strategy, "--all-pairs"]);
            let text = stdout(&out);
            assert!(out.status.success(), "{text}");
            assert_eq!(text.matches("PASS").count(), 3, "{text}");
        }
    }
}

#[test]
fn validate_names_the_vertex_of_a_mismatched_index() {
    let f = Fixture::new();
    f.write("p3w.txt", "0 1 1\n1 2 2\n");
    f.build("p3.txt", "separator", "p3.bdix");
    let out = bd(&["validate", "-g", s(&f.path("p3w.txt")), "-i", s(&f.path("p3.bdix"))]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("FAIL") && text.contains("vertex 2"), "{text}");
}

#[test]
fn validate_refuses_large_graphs() {
    let f = Fixture::new();
    let edges: String = (1..5000).map(|i| format!("{} {}\n", i - 1, i)).collect();
    f.write("big.txt", &edges);
    let out = bd(&["validate", "-g", s(&f.path("big.txt"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("4096"));
}

#[test]
fn centrality_ranks_edges() {
    let f = Fixture::new();
    f.build("p3.txt", "separator", "p3.bdix");
    let out = bd(&["centrality", "-i", s(&f.path("p3.bdix")), "-g", s(&f.path("p3.txt")), "--top", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "u,w,bd");
    assert!(rows[1].starts_with("0,1,0.66666666666666"));
    assert!(rows[2].starts_with("1,2,0.66666666666666"));

    f.build("c4.txt", "min-degree", "c4.bdix");
    let out = bd(&["centrality", "-i", s(&f.path("c4.bdix")), "-g", s(&f.path("c4.txt")), "--top", "4"]);
    let text = stdout(&out);
    let scores: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(scores.len(), 4);
    assert!(scores.iter().all(|&b| (b - 5.0 / 16.0).abs() < 1e-12));

    let out = bd(&["centrality", "-i", s(&f.path("p3.bdix")), "-g", s(&f.path("c4.txt"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn removal_report_prints_connectivity() {
    let f = Fixture::new();
    f.build("p3.txt", "separator", "p3.bdix");
    let (idx, graph) = (f.path("p3.bdix"), f.path("p3.txt"));
    let args = [
        "centrality",
        "-i",
        s(&idx),
        "-g",
        s(&graph),
        "--removal-report",
        "0.5",
        "--seed",
        "3",
    ];
    let first = stdout(&bd(&args));
    assert_eq!(first, stdout(&bd(&args)));
    assert_eq!(field(&first, "removed_edges"), "1");
    assert_eq!(field(&first, "components"), "2");
    assert_eq!(field(&first, "lcc_fraction"), "0.666667");
}

#[test]
fn stats_matches_build() {
    let f = Fixture::new();
    let built = stdout(&f.build("c4.txt", "separator", "c4.bdix"));
    let stats = stdout(&bd(&["stats", "-i", s(&f.path("c4.bdix"))]));
    for key in ["n", "h", "s_avg", "entries", "bytes"] {
        assert_eq!(field(&built, key), field(&stats, key), "{key}");
    }
}

#[test]
fn dimacs_input() {
    let f = Fixture::new();
    f.write("p3.gr", "c path\np sp 3 4\na 1 2 1\na 2 1 1\na 2 3 1\na 3 2 1\n");
    let out = bd(&["build", "-g", s(&f.path("p3.gr")), "--format", "dimacs", "-o", s(&f.path("g.bdix"))]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = bd(&["query", "-i", s(&f.path("g.bdix")), "-p", "1", "3"]);
    let row: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert!((row["bd"].as_f64().unwrap() - 2.0).abs() < 1e-12);
}
