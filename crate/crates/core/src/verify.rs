//! Self-checks shared by the test suite and the command line.
//!
//! Each check returns a [`CheckOutcome`]; nothing here panics on a failed
//! check. Monte Carlo checks compare against closed forms computed from the
//! exact context distribution, with a `3·SE` band per compared quantity.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::environment::{reveal, ContextDistribution, LossOracle};
use crate::graph::{build_graph, independence_number, FeedbackGraph, GraphSpec};
use crate::harness::{
    fit_scaling, graph_inverse_bound, graph_inverse_sum, run, run_aggregate, AlgoSpec, RunConfig,
    UnknownParams,
};
use crate::known::KnownDistLearner;
use crate::reference::{conflict_masks_naive, independence_number_brute};
use crate::rng::{derive_seed, sim_rng, SimRng};
use crate::simplex::{exp_weights, CumulativeLoss, SimplexVector};
use crate::unknown::{exact_importance, EpochSetup, ParamSchedule, UnknownDistLearner};
use crate::{Learner, Result};

/// Confidence level used by the desk-scale schedule.
pub const DESK_IOTA: f64 = 0.1;
/// Multiplier on `γ` used by the desk-scale schedule.
pub const DESK_TUNED_SCALE: f64 = 0.02;
/// Reduced confidence level for the concentration-event check.
pub const EVENT_IOTA: f64 = 6.0;

/// The epoch learner schedule used by the scaling checks.
pub fn desk_schedule() -> UnknownParams {
    UnknownParams {
        tuned_scale: DESK_TUNED_SCALE,
        iota: Some(DESK_IOTA),
        ..UnknownParams::default()
    }
}

/// `K = 16` arms in `alpha` equal cliques, stochastic gap `0.2`, 20 replicates.
pub fn scaling_config(seed: u64, horizon: usize, num_contexts: usize, alpha: usize, algo: AlgoSpec) -> RunConfig {
    let graph = GraphSpec::equal_cliques(16, alpha).expect("alpha divides 16");
    let mut c = RunConfig::new(seed, horizon, graph, num_contexts, algo);
    c.replicates = 20;
    c.record_trace = false;
    c
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.seconds
        )
    }
}

fn timed(id: &'static str, title: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> CheckOutcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CheckOutcome {
        id,
        title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Level {
    Quick,
    Full,
}

impl std::str::FromStr for Level {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(crate::Error::Params(format!("unknown level `{other}` (quick or full)"))),
        }
    }
}

/// Runs the checks of `level` in order.
pub fn run_level(level: Level, seed: u64) -> Vec<CheckOutcome> {
    let mut out = vec![
        check_known_unbiased(100_000, seed),
        check_used_feedback(100_000, seed),
        check_pair_increment_mean(100_000, seed, 1.5),
        check_w_hat_unbiased(10_000, seed),
        check_graph_inverse(100, seed),
        check_independence_oracle(500, seed),
    ];
    match level {
        Level::Quick => out.push(check_determinism(&quick_configs(seed))),
        Level::Full => {
            out.push(check_concentration_events(8, seed));
            out.push(check_rejection_inactivity(seed));
            out.push(check_horizon_scaling(seed));
            out.push(check_context_independence(seed));
            out.push(check_alpha_scaling(seed));
            out.push(check_determinism(&acceptance_configs(seed)));
        }
    }
    out
}

/// Running mean and variance of one quantity.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n
    }

    fn stderr(&self) -> f64 {
        let m = self.mean();
        let var = ((self.sum_sq / self.n - m * m) * self.n / (self.n - 1.0)).max(0.0);
        (var / self.n).sqrt()
    }
}

/// `|mean − target| / SE`, with exact agreement required when `SE = 0`.
fn z_score(m: &Moments, target: f64) -> f64 {
    let diff = (m.mean() - target).abs();
    let se = m.stderr();
    if se == 0.0 {
        if diff <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / se
    }
}

fn random_table(rng: &mut SimRng, rows: usize, m: usize, k: usize, constant: bool) -> Result<LossOracle> {
    let first: Vec<Vec<f64>> = (0..m).map(|_| (0..k).map(|_| rng.gen::<f64>()).collect()).collect();
    let tensor = (0..rows)
        .map(|_| {
            if constant {
                first.clone()
            } else {
                (0..m).map(|_| (0..k).map(|_| rng.gen::<f64>()).collect()).collect()
            }
        })
        .collect();
    LossOracle::table(tensor)
}

fn skewed_contexts() -> ContextDistribution {
    ContextDistribution::new(vec![0.1, 0.2, 0.3, 0.4]).expect("valid distribution")
}

/// Cross-learning estimates `ℓ̃_t,c(a)` of the known-distribution learner
/// average to the true losses, for every context and arm.
pub fn check_known_unbiased(replays: usize, seed: u64) -> CheckOutcome {
    timed("C1", "estimator unbiasedness (known distribution)", || {
        let mut worst: f64 = 0.0;
        let mut cells = 0;
        for (i, spec) in ["loops:8", "er:8:0.3"].iter().enumerate() {
            let mut rng = sim_rng(derive_seed(seed, 101, i as u64));
            let graph = Arc::new(build_graph(&spec.parse()?, rng.gen())?);
            let nu = skewed_contexts();
            let mut base = KnownDistLearner::new(graph.clone(), nu.clone(), 0.1)?;
            for c in 0..4 {
                let totals = (0..8).map(|_| 20.0 * rng.gen::<f64>()).collect();
                base.set_cumulative(c, CumulativeLoss::from_totals(totals)?)?;
            }
            let oracle = random_table(&mut rng, 1, 4, 8, true)?;
            let mut stats = vec![vec![Moments::default(); 8]; 4];
            for _ in 0..replays {
                let mut l = base.clone();
                let c = nu.sample(&mut rng);
                let d = l.act(0, c, &mut rng)?;
                let r = reveal(&oracle, &graph, 0, d.arm)?;
                l.observe(&r, &mut rng)?;
                for (cc, row) in stats.iter_mut().enumerate() {
                    let before = base.cumulative(cc).totals();
                    let after = l.cumulative(cc).totals();
                    for (a, m) in row.iter_mut().enumerate() {
                        m.push(after[a] - before[a]);
                    }
                }
            }
            for (c, row) in stats.iter().enumerate() {
                for (a, m) in row.iter().enumerate() {
                    worst = worst.max(z_score(m, oracle.value(0, c, a)));
                    cells += 1;
                }
            }
        }
        Ok((
            worst <= 3.0,
            format!("max |mean - loss| / SE = {worst:.2} over {cells} cells, {replays} replays per graph"),
        ))
    })
}

struct PairFixture {
    graph: Arc<FeedbackGraph>,
    nu: ContextDistribution,
    oracle: LossOracle,
    learner: UnknownDistLearner,
}

/// A frozen epoch-3 state on an 8-arm random graph with 4 skewed contexts.
///
/// `p` is a mild tilt of random losses and each `s_e` a random reweighting
/// of it, so both the FTRL and the snapshot branches occur.
fn pair_fixture(seed: u64, epoch_len: usize) -> Result<PairFixture> {
    let mut rng = sim_rng(derive_seed(seed, 102, 0));
    let graph = Arc::new(build_graph(&"er:8:0.3".parse()?, rng.gen())?);
    let nu = skewed_contexts();
    let params = ParamSchedule::manual(EVENT_IOTA, epoch_len, 0.05, 0.05)?;
    let (k, m) = (8, 4);
    let mut cum = Vec::new();
    let mut snapshot = Vec::new();
    let mut next_snapshot = Vec::new();
    for _ in 0..m {
        let totals: Vec<f64> = (0..k).map(|_| 10.0 * rng.gen::<f64>()).collect();
        let p = exp_weights(&totals, params.eta)?;
        let s: Vec<f64> = p
            .as_slice()
            .iter()
            .map(|x| x * (2.0 * rng.gen::<f64>() - 1.0).exp())
            .collect();
        snapshot.push(SimplexVector::from_unnormalized(s)?);
        next_snapshot.push(SimplexVector::from_unnormalized(
            (0..k).map(|_| 0.2 + rng.gen::<f64>()).collect(),
        )?);
        cum.push(CumulativeLoss::from_totals(totals)?);
    }
    let w = exact_importance(&graph, &snapshot, nu.probs());
    let w_hat = w.iter().map(|x| x * (0.8 + 0.4 * rng.gen::<f64>())).collect();
    let oracle = random_table(&mut rng, epoch_len, m, k, true)?;
    let learner = UnknownDistLearner::frozen(
        graph.clone(),
        params,
        EpochSetup {
            epoch: 3,
            start_round: 0,
            snapshot,
            next_snapshot,
            w_hat,
            cum,
        },
    )?;
    Ok(PairFixture {
        graph,
        nu,
        oracle,
        learner,
    })
}

struct PairStats {
    used: Vec<usize>,
    increments: Vec<Vec<Moments>>,
    replays: usize,
}

fn pair_replays(fx: &PairFixture, replays: usize, seed: u64) -> Result<PairStats> {
    let mut rng = sim_rng(derive_seed(seed, 103, 0));
    let (m, k) = (fx.nu.num_contexts(), fx.graph.num_arms());
    let mut used = vec![0; k];
    let mut increments = vec![vec![Moments::default(); k]; m];
    for _ in 0..replays {
        let mut l = fx.learner.clone();
        let contexts = [fx.nu.sample(&mut rng), fx.nu.sample(&mut rng)];
        let outcome = l.step_pair(contexts, &fx.oracle, &mut rng)?;
        for &a in &outcome.record.used {
            used[a] += 1;
        }
        for (c, row) in increments.iter_mut().enumerate() {
            let before = fx.learner.cumulative(c).totals();
            let after = l.cumulative(c).totals();
            for (a, mo) in row.iter_mut().enumerate() {
                mo.push(after[a] - before[a]);
            }
        }
    }
    Ok(PairStats {
        used,
        increments,
        replays,
    })
}

/// Each pair uses the loss of arm `a` with probability exactly `w_e(a)`.
pub fn check_used_feedback(replays: usize, seed: u64) -> CheckOutcome {
    timed("C2", "used-feedback marginal (unknown distribution)", || {
        let fx = pair_fixture(seed, 32)?;
        let stats = pair_replays(&fx, replays, seed)?;
        let w = exact_importance(&fx.graph, fx.learner.snapshot(), fx.nu.probs());
        let n = stats.replays as f64;
        let mut worst: f64 = 0.0;
        for (a, &count) in stats.used.iter().enumerate() {
            let rate = count as f64 / n;
            let se = (w[a] * (1.0 - w[a]) / n).sqrt();
            worst = worst.max((rate - w[a]).abs() / se);
        }
        Ok((
            worst <= 3.0,
            format!("max |rate - w_e| / SE = {worst:.2} over {} arms, {replays} pair replays", w.len()),
        ))
    })
}

/// The mean per-pair increment of `cum[c][a]` is `2 ℓ_c(a) w_e(a) / (ŵ_e(a) + factor·γ)`.
///
/// The learner uses `factor = 1.5`; any other factor should fail.
pub fn check_pair_increment_mean(replays: usize, seed: u64, gamma_factor: f64) -> CheckOutcome {
    timed("A2", "loss-estimate conditional mean (unknown distribution)", || {
        let fx = pair_fixture(seed, 32)?;
        let stats = pair_replays(&fx, replays, seed)?;
        let w = exact_importance(&fx.graph, fx.learner.snapshot(), fx.nu.probs());
        let gamma = fx.learner.params().gamma;
        let mut worst: f64 = 0.0;
        for (c, row) in stats.increments.iter().enumerate() {
            for (a, mo) in row.iter().enumerate() {
                let target = 2.0 * fx.oracle.value(0, c, a) * w[a]
                    / (fx.learner.w_hat()[a] + gamma_factor * gamma);
                worst = worst.max(z_score(mo, target));
            }
        }
        Ok((
            worst <= 3.0,
            format!("max |mean - target| / SE = {worst:.2} with denominator w_hat + {gamma_factor} gamma"),
        ))
    })
}

/// `ŵ_{e+1}` built over one epoch averages to the exact `w_{e+1}`.
pub fn check_w_hat_unbiased(replays: usize, seed: u64) -> CheckOutcome {
    timed("C3", "w_hat unbiasedness", || {
        let epoch_len = 32;
        let fx = pair_fixture(seed, epoch_len)?;
        let target = exact_importance(&fx.graph, fx.learner.next_snapshot(), fx.nu.probs());
        let mut rng = sim_rng(derive_seed(seed, 104, 0));
        let mut stats = vec![Moments::default(); target.len()];
        for _ in 0..replays {
            let mut l = fx.learner.clone();
            for _ in 0..epoch_len / 2 {
                let contexts = [fx.nu.sample(&mut rng), fx.nu.sample(&mut rng)];
                l.step_pair(contexts, &fx.oracle, &mut rng)?;
            }
            for (m, x) in stats.iter_mut().zip(l.w_hat_next()) {
                m.push(*x);
            }
        }
        let worst = stats
            .iter()
            .zip(&target)
            .map(|(m, t)| z_score(m, *t))
            .fold(0.0, f64::max);
        Ok((
            worst <= 3.0,
            format!("max |mean - w_(e+1)| / SE = {worst:.2} over {} arms, {replays} epoch replays", target.len()),
        ))
    })
}

/// `K = 16`, `α = 4`, `M = 8`, `T = 2^14` with `ι = 6` in the theorem formulas.
pub fn event_config(seed: u64, replicates: usize) -> RunConfig {
    let algo = AlgoSpec::Unknown(UnknownParams {
        tuned_scale: 1.0,
        iota: Some(EVENT_IOTA),
        ..UnknownParams::default()
    });
    let mut c = scaling_config(seed, 1 << 14, 8, 4, algo);
    c.replicates = replicates;
    c.diagnostics = true;
    c.record_trace = true;
    c
}

/// Frequencies of the events `F_e`, `L_e`, and the `β_e` range on good epochs.
pub fn check_concentration_events(replicates: usize, seed: u64) -> CheckOutcome {
    timed("C4", "concentration-event frequencies", || {
        let config = event_config(seed, replicates);
        let k = 16.0;
        let (mut f_hits, mut f_n, mut l_hits, mut l_n) = (0usize, 0usize, 0usize, 0usize);
        let mut beta_checked = 0;
        let mut beta_violations = 0;
        let mut branch_mismatches = 0;
        for r in 0..replicates {
            let out = run(&config, r)?;
            let trace = out.trace.expect("trace recorded");
            for e in &trace.epochs {
                let d = e.diagnostics.as_ref().expect("diagnostics recorded");
                l_n += 1;
                l_hits += d.l_event as usize;
                branch_mismatches += d.branch_mismatches.unwrap_or(0);
                if let Some(f) = d.f_event {
                    f_n += 1;
                    f_hits += f as usize;
                    if f && d.gamma_condition {
                        beta_checked += 1;
                        let (lo, hi) = (d.beta_min.unwrap_or(1.0), d.beta_max.unwrap_or(1.0));
                        if !(0.5..=2.0).contains(&lo) || !(0.5..=2.0).contains(&hi) {
                            beta_violations += 1;
                        }
                    }
                }
            }
        }
        let rate = |hits: usize, n: usize| {
            let p = hits as f64 / n.max(1) as f64;
            (p, (p * (1.0 - p) / n.max(1) as f64).sqrt())
        };
        let (pf, sef) = rate(f_hits, f_n);
        let (pl, sel) = rate(l_hits, l_n);
        let f_bound = 1.0 - 2.0 * k * (-EVENT_IOTA).exp() - 3.0 * sef;
        let l_bound = 1.0 - k * (-EVENT_IOTA).exp() - 3.0 * sel;
        let passed = f_n >= 200
            && pf >= f_bound
            && pl >= l_bound
            && beta_checked > 0
            && beta_violations == 0
            && branch_mismatches == 0;
        Ok((
            passed,
            format!(
                "P(F) = {pf:.4} >= {f_bound:.4} over {f_n} epochs; P(L) = {pl:.4} >= {l_bound:.4} over {l_n}; \
                 beta in [1/2, 2] on {beta_checked} epochs with {beta_violations} violations; \
                 {branch_mismatches} branch-flag mismatches"
            ),
        ))
    })
}

/// Fraction of rounds played from the snapshot, desk schedule, `T = 2^14`.
pub fn check_rejection_inactivity(seed: u64) -> CheckOutcome {
    timed("C5", "rejection inactivity", || {
        let agg = run_aggregate(&scaling_config(seed, 1 << 14, 8, 4, AlgoSpec::Unknown(desk_schedule())))?;
        let frac = agg.rejection_fraction.mean;
        Ok((frac <= 0.05, format!("mean fraction of rounds with q != p = {frac:.4} (<= 0.05)")))
    })
}

pub const HORIZONS: [usize; 5] = [1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16];

fn horizon_slope(seed: u64, params: UnknownParams) -> Result<(f64, Vec<f64>)> {
    let mut points = Vec::new();
    for t in HORIZONS {
        let agg = run_aggregate(&scaling_config(seed, t, 8, 4, AlgoSpec::Unknown(params.clone())))?;
        points.push((t as f64, agg.expected.mean));
    }
    let fit = fit_scaling(&points)?;
    Ok((fit.slope, points.iter().map(|p| p.1).collect()))
}

/// Log-log slope of expected-form regret in `T`; the unscaled theorem
/// confidence level is reported alongside for reference.
pub fn check_horizon_scaling(seed: u64) -> CheckOutcome {
    timed("C6", "T-scaling", || {
        let (slope, means) = horizon_slope(seed, desk_schedule())?;
        let literal = UnknownParams {
            tuned_scale: DESK_TUNED_SCALE,
            ..UnknownParams::default()
        };
        let (literal_slope, _) = horizon_slope(seed, literal)?;
        let means: Vec<String> = means.iter().map(|m| format!("{m:.0}")).collect();
        Ok((
            (0.35..=0.65).contains(&slope),
            format!(
                "slope {slope:.3} in [0.35, 0.65], mean regret [{}]; theorem iota gives slope {literal_slope:.3}",
                means.join(", ")
            ),
        ))
    })
}

/// Regret at `M = 64` over `M = 4`: flat for the epoch learner, growing for
/// per-context graph bandits.
pub fn check_context_independence(seed: u64) -> CheckOutcome {
    timed("C7", "M-independence", || {
        let ratio = |algo: AlgoSpec| -> Result<(f64, f64, f64)> {
            let a = run_aggregate(&scaling_config(seed, 1 << 14, 4, 4, algo.clone()))?;
            let b = run_aggregate(&scaling_config(seed, 1 << 14, 64, 4, algo))?;
            Ok((a.expected.mean, b.expected.mean, b.expected.mean / a.expected.mean))
        };
        let (u4, u64_, ru) = ratio(AlgoSpec::Unknown(desk_schedule()))?;
        let (p4, p64, rp) = ratio(AlgoSpec::by_name("per_context_exp3g")?)?;
        Ok((
            ru <= 2.0 && rp >= 2.0,
            format!(
                "unknown {u4:.0} -> {u64_:.0} (ratio {ru:.2} <= 2); per_context_exp3g {p4:.0} -> {p64:.0} (ratio {rp:.2} >= 2)"
            ),
        ))
    })
}

/// Regret over `α ∈ {1, 2, 4, 8}`: nondecreasing within one standard error
/// of the difference, log-log slope in `[0.2, 0.8]`.
pub fn check_alpha_scaling(seed: u64) -> CheckOutcome {
    timed("C8", "alpha-scaling", || {
        let mut rows = Vec::new();
        for alpha in [1, 2, 4, 8] {
            let agg = run_aggregate(&scaling_config(seed, 1 << 14, 8, alpha, AlgoSpec::Unknown(desk_schedule())))?;
            rows.push((alpha as f64, agg.expected.mean, agg.expected.stderr));
        }
        let monotone = rows
            .windows(2)
            .all(|w| w[1].1 >= w[0].1 - (w[0].2.powi(2) + w[1].2.powi(2)).sqrt());
        let fit = fit_scaling(&rows.iter().map(|r| (r.0, r.1)).collect::<Vec<_>>())?;
        let shown: Vec<String> = rows.iter().map(|r| format!("{:.0}±{:.0}", r.1, r.2)).collect();
        Ok((
            monotone && (0.2..=0.8).contains(&fit.slope),
            format!(
                "means [{}], monotone = {monotone}, slope {:.3} in [0.2, 0.8]",
                shown.join(", "),
                fit.slope
            ),
        ))
    })
}

/// Random directed graph on `k` arms with edge probability `p` (no self-loops added).
fn random_out_lists(rng: &mut SimRng, k: usize, p: f64) -> Vec<Vec<usize>> {
    (0..k)
        .map(|a| (0..k).filter(|&b| b != a && rng.gen::<f64>() < p).collect())
        .collect()
}

/// `Σ_i x_i / x(N_in(i)) ≤ 4α ln(4K/(αε))` on random self-looped graphs.
pub fn check_graph_inverse(graphs: usize, seed: u64) -> CheckOutcome {
    timed("C9", "graph-inverse inequality", || {
        let eps = 1e-3;
        let mut rng = sim_rng(derive_seed(seed, 109, 0));
        let mut violations = 0;
        let mut mismatches = 0;
        let mut tightest: f64 = 0.0;
        for _ in 0..graphs {
            let k = rng.gen_range(2..=16);
            let p = rng.gen::<f64>();
            let mut out = random_out_lists(&mut rng, k, p);
            for (a, targets) in out.iter_mut().enumerate() {
                targets.push(a);
            }
            let alpha = independence_number_brute(&conflict_masks_naive(&out));
            // Heavy-tailed weights so some arms sit near the floor ε.
            let raw: Vec<f64> = (0..k).map(|_| rng.gen::<f64>().powf(8.0)).collect();
            let total: f64 = raw.iter().sum();
            let x: Vec<f64> = raw.iter().map(|r| eps + (1.0 - k as f64 * eps) * r / total).collect();
            let lhs: f64 = (0..k)
                .map(|i| {
                    let observed: f64 = (0..k).filter(|&j| out[j].contains(&i)).map(|j| x[j]).sum();
                    x[i] / observed
                })
                .sum();
            let bound = graph_inverse_bound(k, alpha, eps);
            tightest = tightest.max(lhs / bound);
            violations += (lhs > bound) as usize;
            let graph = FeedbackGraph::from_out_neighbors(out)?;
            mismatches += ((graph_inverse_sum(&graph, &x) - lhs).abs() > 1e-9 * lhs) as usize;
        }
        Ok((
            violations == 0 && mismatches == 0,
            format!(
                "{violations} violations over {graphs} graphs, max lhs/bound = {tightest:.3}, {mismatches} evaluation mismatches"
            ),
        ))
    })
}

/// Branch and bound against `2^K` enumeration.
pub fn check_independence_oracle(graphs: usize, seed: u64) -> CheckOutcome {
    timed("C10", "independence-number oracle equivalence", || {
        let mut rng = sim_rng(derive_seed(seed, 110, 0));
        let mut mismatches = 0;
        for _ in 0..graphs {
            let k = rng.gen_range(1..=16);
            let p = rng.gen::<f64>();
            let out = random_out_lists(&mut rng, k, p);
            let fast = independence_number(&out)?;
            let slow = independence_number_brute(&conflict_masks_naive(&out));
            mismatches += (fast != slow) as usize;
        }
        Ok((mismatches == 0, format!("{mismatches} mismatches over {graphs} random graphs")))
    })
}

fn quick_configs(seed: u64) -> Vec<RunConfig> {
    ["known", "unknown", "per_context_exp3g", "pooled_exp3g", "uniform"]
        .iter()
        .map(|name| {
            let algo = match *name {
                "unknown" => AlgoSpec::Unknown(desk_schedule()),
                other => AlgoSpec::by_name(other).expect("known algorithm"),
            };
            let mut c = scaling_config(seed, 1 << 10, 4, 4, algo);
            c.replicates = 2;
            c.record_trace = true;
            c.diagnostics = *name == "unknown";
            c
        })
        .collect()
}

/// Every configuration run by the scaling and event checks.
pub fn acceptance_configs(seed: u64) -> Vec<RunConfig> {
    let unknown = || AlgoSpec::Unknown(desk_schedule());
    let mut configs = vec![event_config(seed, 1), scaling_config(seed, 1 << 14, 8, 4, unknown())];
    for t in HORIZONS {
        configs.push(scaling_config(seed, t, 8, 4, unknown()));
    }
    for m in [4, 64] {
        configs.push(scaling_config(seed, 1 << 14, m, 4, unknown()));
        configs.push(scaling_config(seed, 1 << 14, m, 4, AlgoSpec::PerContextExp3g {
            eta: None,
            gamma_ix: None,
        }));
    }
    for alpha in [1, 2, 4, 8] {
        configs.push(scaling_config(seed, 1 << 14, 8, alpha, unknown()));
    }
    for c in &mut configs {
        c.record_trace = true;
    }
    configs.dedup();
    configs
}

/// Two runs of each configuration serialize to identical trace bytes.
pub fn check_determinism(configs: &[RunConfig]) -> CheckOutcome {
    timed("C11", "determinism", || {
        let mut differing = 0;
        let mut bytes = 0;
        for c in configs {
            let a = run(c, 0)?.trace.expect("trace recorded").to_ndjson()?;
            let b = run(c, 0)?.trace.expect("trace recorded").to_ndjson()?;
            bytes += a.len();
            differing += (a != b) as usize;
        }
        Ok((
            differing == 0,
            format!("{differing} of {} configurations differ ({bytes} trace bytes compared)", configs.len()),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments() {
        let mut m = Moments::default();
        for x in [1.0, 2.0, 3.0, 4.0] {
            m.push(x);
        }
        assert_eq!(m.mean(), 2.5);
        assert!((m.stderr() - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_needs_exact_agreement() {
        let mut m = Moments::default();
        m.push(0.5);
        m.push(0.5);
        assert_eq!(z_score(&m, 0.5), 0.0);
        assert!(z_score(&m, 0.6).is_infinite());
    }

    #[test]
    fn removing_gamma_from_the_denominator_is_caught() {
        assert!(check_pair_increment_mean(20_000, 5, 1.5).passed);
        assert!(!check_pair_increment_mean(20_000, 5, 0.0).passed);
    }

    #[test]
    fn level_names() {
        assert_eq!("quick".parse::<Level>().unwrap(), Level::Quick);
        assert!("slow".parse::<Level>().is_err());
    }
}
