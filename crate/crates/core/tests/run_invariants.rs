use crossgraph::config::parse_config_str;
use crossgraph::harness::{run, run_replicates, AlgoSpec, RunConfig, Summary};
use crossgraph::verify::desk_schedule;
use crossgraph::{GraphSpec, PlayBranch};

fn cliques(count: usize, size: usize) -> GraphSpec {
    GraphSpec::DisjointCliques {
        sizes: vec![size; count],
    }
}

fn unknown() -> AlgoSpec {
    AlgoSpec::Unknown(desk_schedule())
}

#[test]
fn uniform_play_regret_matches_closed_form() {
    // Uniform play pays gap (K - 1) / K per round against the true best arm.
    let (t, k) = (2000, 8);
    let mut c = RunConfig::new(5, t, cliques(2, 4), 3, AlgoSpec::Uniform);
    c.replicates = 30;
    c.record_trace = false;
    let outs = run_replicates(&c).unwrap();
    let s = Summary::of(&outs.iter().map(|o| o.report.expected).collect::<Vec<_>>());
    let target = t as f64 * 0.2 * (k - 1) as f64 / k as f64;
    assert!(
        (s.mean - target).abs() <= 3.0 * s.stderr,
        "mean {} target {} se {}",
        s.mean,
        target,
        s.stderr
    );
}

#[test]
fn zero_horizon_is_empty() {
    for algo in [AlgoSpec::by_name("known").unwrap(), AlgoSpec::Uniform] {
        let c = RunConfig::new(1, 0, cliques(2, 2), 2, algo);
        let out = run(&c, 0).unwrap();
        assert_eq!(out.report.expected, 0.0);
        assert_eq!(out.report.realized, 0.0);
        assert!(out.trace.unwrap().rounds.is_empty());
    }
}

#[test]
fn epoch_count_is_horizon_over_epoch_len() {
    for t in [1024, 4096] {
        let c = RunConfig::new(2, t, cliques(4, 4), 4, unknown());
        let trace = run(&c, 0).unwrap().trace.unwrap();
        let l = trace.header.params.unwrap().epoch_len;
        assert_eq!(t % l, 0);
        assert_eq!(trace.epochs.len(), t / l);
        assert_eq!(trace.rounds.len(), t);
        for (i, e) in trace.epochs.iter().enumerate() {
            assert_eq!(e.epoch, i + 1);
            assert_eq!(e.start_round, i * l);
        }
    }
}

#[test]
fn per_context_regret_partitions_total() {
    for algo in ["known", "unknown", "per_context_exp3g", "pooled_exp3g"] {
        let mut spec = AlgoSpec::by_name(algo).unwrap();
        if algo == "unknown" {
            spec = unknown();
        }
        let c = RunConfig::new(9, 2048, cliques(4, 4), 5, spec);
        let r = run(&c, 1).unwrap().report;
        let sum: f64 = r.per_context_expected.iter().sum();
        assert!((sum - r.expected).abs() <= 1e-9 * r.expected.abs().max(1.0), "{algo}");
        let last = r.curve.last().unwrap();
        assert_eq!(last.t, 2048);
        assert_eq!(last.expected, r.expected);
        assert_eq!(last.realized, r.realized);
    }
}

#[test]
fn expected_and_realized_regret_agree() {
    for algo in [unknown(), AlgoSpec::by_name("pooled_exp3g").unwrap()] {
        let mut c = RunConfig::new(21, 4096, cliques(4, 4), 8, algo);
        c.replicates = 20;
        c.record_trace = false;
        let outs = run_replicates(&c).unwrap();
        let e: Vec<f64> = outs.iter().map(|o| o.report.expected).collect();
        let r: Vec<f64> = outs.iter().map(|o| o.report.realized).collect();
        let diffs: Vec<f64> = e.iter().zip(&r).map(|(a, b)| a - b).collect();
        let d = Summary::of(&diffs);
        assert!(d.mean.abs() <= 3.0 * d.stderr, "{} vs se {}", d.mean, d.stderr);
        let (se, sr) = (Summary::of(&e), Summary::of(&r));
        assert!(se.std < sr.std, "expected std {} realized std {}", se.std, sr.std);
    }
}

#[test]
fn traces_are_deterministic_per_seed() {
    let c = RunConfig::new(77, 1024, cliques(4, 2), 3, unknown());
    let a = run(&c, 2).unwrap().trace.unwrap().to_ndjson().unwrap();
    let b = run(&c, 2).unwrap().trace.unwrap().to_ndjson().unwrap();
    assert_eq!(a, b);
    let other = run(&c, 3).unwrap().trace.unwrap().to_ndjson().unwrap();
    assert_ne!(a, other);

    // Thread count does not leak into results.
    let mut c = c;
    c.replicates = 4;
    let par: Vec<Vec<u8>> = run_replicates(&c)
        .unwrap()
        .into_iter()
        .map(|o| o.trace.unwrap().to_ndjson().unwrap())
        .collect();
    for (r, bytes) in par.iter().enumerate() {
        assert_eq!(bytes, &run(&c, r).unwrap().trace.unwrap().to_ndjson().unwrap());
    }
}

#[test]
fn snapshot_rounds_are_backed_by_a_violating_arm() {
    // Large η with small epochs makes p drift far from s_e, so the
    // snapshot branch fires often.
    let text = r#"
seed = 4
horizon = 2048
diagnostics = true

[graph]
kind = "erdos_renyi"
num_arms = 8
edge_prob = 0.3

[contexts]
num_contexts = 3
probs = [0.5, 0.3, 0.2]

[env]
kind = "stochastic_gap"
gap = 0.4

[algo]
kind = "unknown"
params = "manual"
iota = 0.01
epoch_len = 64
gamma = 0.2
eta = 0.2
"#;
    let c = parse_config_str(text).unwrap();
    let trace = run(&c, 0).unwrap().trace.unwrap();
    let flagged = trace
        .rounds
        .iter()
        .filter(|r| r.branch == PlayBranch::Snapshot)
        .count();
    assert!(flagged > 0);
    assert_eq!(trace.snapshot_rejection_rounds(), flagged);
    let mismatches: usize = trace
        .epochs
        .iter()
        .map(|e| e.diagnostics.as_ref().unwrap().branch_mismatches.unwrap())
        .sum();
    assert_eq!(mismatches, 0);
}

#[test]
fn played_distribution_is_the_recorded_one() {
    let c = RunConfig::new(3, 512, cliques(2, 3), 4, unknown());
    let trace = run(&c, 0).unwrap().trace.unwrap();
    for r in &trace.rounds {
        assert!((r.played.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(r.played[r.arm] > 0.0);
    }
}
