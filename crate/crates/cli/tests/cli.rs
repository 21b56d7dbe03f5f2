use std::path::Path;
use std::process::{Command, Output};

fn crossgraph(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crossgraph"))
        .args(args)
        .env("CROSSGRAPH_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const CONFIG: &str = r#"
seed = 11
horizon = 512
replicates = 2

[graph]
kind = "disjoint_cliques"
sizes = [2, 2, 2, 2]

[contexts]
num_contexts = 3

[env]
kind = "stochastic_gap"

[algo]
kind = "unknown"
iota = 0.1
"#;

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn graph_info_matches_graph_module() {
    let o = crossgraph(&["graph-info", "--spec", "cliques:4x4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in ["K = 16", "alpha = 4", "strongly_observable = true", "edges = 64"] {
        assert!(text.contains(line), "{text}");
    }

    let dir = tempfile::tempdir().unwrap();
    let adj = dir.path().join("g.txt");
    std::fs::write(&adj, "0 1\n1\n2 0\n").unwrap();
    let o = crossgraph(&["graph-info", "--file", adj.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("K = 3") && text.contains("alpha = 2") && text.contains("edges = 5"), "{text}");
}

#[test]
fn graph_info_flags_missing_self_loop() {
    let dir = tempfile::tempdir().unwrap();
    let adj = dir.path().join("g.txt");
    std::fs::write(&adj, "1\n1\n").unwrap();
    let o = crossgraph(&["graph-info", "--file", adj.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("strongly_observable = false"));
}

#[test]
fn run_writes_reports_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let out = dir.path().join("out");
    let o = crossgraph(&["run", "-c", &cfg, "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["report.json", "curves.csv", "config.toml", "trace_r0.ndjson", "trace_r1.ndjson"] {
        assert!(out.join(name).exists(), "missing {name}");
    }
    let curves = std::fs::read_to_string(out.join("curves.csv")).unwrap();
    assert!(curves.starts_with("algo,replicate,t,cum_regret_expected,cum_regret_realized"));
    let trace = std::fs::read_to_string(out.join("trace_r0.ndjson")).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["record"], "header");
    let rounds = trace.lines().filter(|l| l.contains("\"record\":\"round\"")).count();
    assert_eq!(rounds, 512);

    // Same seed, same bytes.
    let out2 = dir.path().join("out2");
    assert!(crossgraph(&["run", "-c", &cfg, "-o", out2.to_str().unwrap()]).status.success());
    for name in ["report.json", "trace_r1.ndjson"] {
        assert_eq!(
            std::fs::read(out.join(name)).unwrap(),
            std::fs::read(out2.join(name)).unwrap()
        );
    }
}

#[test]
fn config_errors_exit_nonzero_with_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("num_contexts = 3", "num_contexts = 3\nbogus = 1"));
    let o = crossgraph(&["run", "-c", &cfg, "-o", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("contexts.bogus"));

    let cfg = write_config(dir.path(), &CONFIG.replace("seed = 11\n", ""));
    let o = crossgraph(&["run", "-c", &cfg]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_reports_slope_and_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let o = crossgraph(&["sweep", "-c", &cfg, "--axis", "T", "--values", "256,512,1024"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("T,")).count(), 3);
    assert!(text.contains("unknown: slope"), "{text}");

    let out = dir.path().join("sw");
    let o = crossgraph(&[
        "sweep", "-c", &cfg, "--axis", "M", "--values", "2,8", "--algos", "unknown,uniform", "-o",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("uniform: regret ratio"), "{text}");
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn sweep_alpha_needs_clique_graph() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &CONFIG.replace(
            "kind = \"disjoint_cliques\"\nsizes = [2, 2, 2, 2]",
            "kind = \"erdos_renyi\"\nnum_arms = 8\nedge_prob = 0.3",
        ),
    );
    let o = crossgraph(&["sweep", "-c", &cfg, "--axis", "alpha", "--values", "1,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn quick_verify_passes() {
    let o = crossgraph(&["verify", "--level", "quick"]);
    let text = stdout(&o);
    assert!(o.status.success(), "{text}");
    assert!(!text.contains("[FAIL]"));
    assert!(text.contains("0 failed"));
}
