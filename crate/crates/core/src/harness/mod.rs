//! Runs, traces and regret reports.
//!
//! A run samples every context up front, drives one learner through the
//! protocol, and scores it against the best fixed context-to-arm policy in
//! hindsight. Two regret forms are reported: the realized loss of the drawn
//! arms, and the expected form `Σ_t ⟨q_t − π*, ℓ_t⟩` over the exact
//! distributions played, which carries no arm-sampling noise.

mod diagnostics;
mod fit;
mod spec;
mod sweep;

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use diagnostics::{
    complete_uniform_lhs, diagnostics_epoch, frequency_event, graph_inverse_bound, graph_inverse_sum,
    EpochDiagnostics,
};
pub use fit::{fit_scaling, ScalingFit};
pub use spec::{AlgoSpec, ContextSpec, EnvSpec, EpochLenMode, OpposingSpec, RunConfig, UnknownParams};
pub use sweep::{sweep, SweepAxis, SweepReport, SweepRow};

use crate::baselines::BaselineLearner;
use crate::environment::{reveal, ContextDistribution, LossOracle};
use crate::graph::FeedbackGraph;
use crate::known::KnownDistLearner;
use crate::rng::{derive_seed, sim_rng, stream};
use crate::unknown::{EpochRecord, ParamSchedule, UnknownDistLearner};
use crate::{Error, Learner, PlayBranch, Result};

/// Best policy in hindsight: `π*_c = argmin_a Σ_{t: c_t = c} ℓ_t,c(a)`.
///
/// Ties go to the lowest arm; contexts that never occur get arm 0.
pub fn best_policy(oracle: &LossOracle, contexts: &[usize], horizon: usize) -> Vec<usize> {
    let k = oracle.num_arms();
    let mut totals = vec![vec![0.0; k]; oracle.num_contexts()];
    for (t, &c) in contexts.iter().take(horizon).enumerate() {
        for (a, total) in totals[c].iter_mut().enumerate() {
            *total += oracle.value(t, c, a);
        }
    }
    totals.iter().map(|row| argmin(row)).collect()
}

fn argmin(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate() {
        if *x < xs[best] {
            best = i;
        }
    }
    best
}

/// One round of a trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    pub context: usize,
    pub arm: usize,
    pub branch: PlayBranch,
    /// The exact distribution `q_t,c_t` the arm was drawn from.
    pub played: Vec<f64>,
    pub loss: f64,
    pub expected_loss: f64,
}

/// Per-epoch trace entry of the epoch learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochTrace {
    pub epoch: usize,
    pub start_round: usize,
    pub w_hat: Vec<f64>,
    /// Hex digests of `s_e` per context.
    pub snapshot_digests: Vec<String>,
    pub rejections: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<EpochDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub algo: String,
    pub replicate: usize,
    pub seed: u64,
    pub horizon: usize,
    pub num_arms: usize,
    pub num_contexts: usize,
    pub alpha: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub rounds: Vec<RoundRecord>,
    pub epochs: Vec<EpochTrace>,
    pub policy: Vec<usize>,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TraceLine<'a> {
    Header(&'a TraceHeader),
    Round(&'a RoundRecord),
    Epoch(&'a EpochTrace),
    Policy { best_arms: &'a [usize] },
}

impl Trace {
    /// Newline-delimited JSON: a header, every round, every epoch, then the comparator policy.
    pub fn write_ndjson<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = |rec: TraceLine<'_>| -> Result<()> {
            serde_json::to_writer(&mut out, &rec)?;
            out.write_all(b"\n")?;
            Ok(())
        };
        line(TraceLine::Header(&self.header))?;
        for r in &self.rounds {
            line(TraceLine::Round(r))?;
        }
        for e in &self.epochs {
            line(TraceLine::Epoch(e))?;
        }
        line(TraceLine::Policy {
            best_arms: &self.policy,
        })
    }

    pub fn to_ndjson(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_ndjson(&mut buf)?;
        Ok(buf)
    }

    pub fn snapshot_rejection_rounds(&self) -> usize {
        self.rounds
            .iter()
            .filter(|r| r.branch == PlayBranch::Snapshot)
            .count()
    }
}

/// Point on a cumulative regret curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Rounds completed.
    pub t: usize,
    pub expected: f64,
    pub realized: f64,
}

/// Regret of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub algo: String,
    pub replicate: usize,
    pub horizon: usize,
    /// `Σ_t ℓ_t,c_t(A_t) − ℓ_t,c_t(π*_c_t)`.
    pub realized: f64,
    /// `Σ_t ⟨q_t,c_t − π*_c_t, ℓ_t,c_t⟩`.
    pub expected: f64,
    /// Expected-form regret restricted to the rounds of each context.
    pub per_context_expected: Vec<f64>,
    pub policy: Vec<usize>,
    pub rejection_rounds: usize,
    pub curve: Vec<CurvePoint>,
}

/// Mean and spread of one metric across replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                std: 0.0,
                stderr: 0.0,
                n,
            };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        let std = var.sqrt();
        Self {
            mean,
            std,
            stderr: std / (n as f64).sqrt(),
            n,
        }
    }
}

/// Replicate-level aggregate of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub algo: String,
    pub expected: Summary,
    pub realized: Summary,
    pub rejection_fraction: Summary,
    pub replicates: Vec<RegretReport>,
}

impl AggregateReport {
    pub fn from_reports(replicates: Vec<RegretReport>) -> Self {
        let pick = |f: fn(&RegretReport) -> f64| {
            Summary::of(&replicates.iter().map(f).collect::<Vec<_>>())
        };
        Self {
            algo: replicates.first().map(|r| r.algo.clone()).unwrap_or_default(),
            expected: pick(|r| r.expected),
            realized: pick(|r| r.realized),
            rejection_fraction: pick(|r| {
                r.rejection_rounds as f64 / r.horizon.max(1) as f64
            }),
            replicates,
        }
    }

    /// Long-format CSV: `algo,replicate,t,cum_regret_expected,cum_regret_realized`.
    pub fn write_curves_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["algo", "replicate", "t", "cum_regret_expected", "cum_regret_realized"])?;
        for r in &self.replicates {
            for p in &r.curve {
                w.serialize((&r.algo, r.replicate, p.t, p.expected, p.realized))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Output of one replicate.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RegretReport,
    pub trace: Option<Trace>,
    pub epoch_records: Option<Vec<EpochRecord>>,
}

/// Everything a replicate needs, resolved from the configuration.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub graph: Arc<FeedbackGraph>,
    pub nu: ContextDistribution,
    pub horizon: usize,
    pub algo: ResolvedAlgo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedAlgo {
    Known { eta: f64 },
    Unknown(ParamSchedule),
    Baseline(crate::baselines::BaselineKind),
}

impl ResolvedAlgo {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Known { .. } => "known",
            Self::Unknown(_) => "unknown",
            Self::Baseline(kind) => kind.name(),
        }
    }
}

enum Agent {
    Known(KnownDistLearner),
    Unknown(UnknownDistLearner),
    Baseline(BaselineLearner),
}

impl Agent {
    fn learner(&mut self) -> &mut dyn Learner {
        match self {
            Agent::Known(l) => l,
            Agent::Unknown(l) => l,
            Agent::Baseline(l) => l,
        }
    }
}

fn digest(values: &[f64]) -> String {
    let words: Vec<u64> = values.iter().map(|x| x.to_bits()).collect();
    format!("{:016x}", crate::rng::hash_words(&words))
}

/// Seed of replicate `replicate` under master seed `seed`.
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    derive_seed(seed, stream::REPLICATE, replicate as u64)
}

/// Runs replicate `replicate` of `config`.
pub fn run(config: &RunConfig, replicate: usize) -> Result<RunOutput> {
    let resolved = config.resolve()?;
    run_resolved(config, &resolved, replicate)
}

/// Runs every replicate in parallel; results are ordered by replicate index.
pub fn run_replicates(config: &RunConfig) -> Result<Vec<RunOutput>> {
    let resolved = config.resolve()?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| run_resolved(config, &resolved, r))
        .collect()
}

/// Aggregate regret over all replicates (traces are not kept).
pub fn run_aggregate(config: &RunConfig) -> Result<AggregateReport> {
    let mut quiet = config.clone();
    quiet.record_trace = false;
    quiet.diagnostics = false;
    let reports = run_replicates(&quiet)?
        .into_iter()
        .map(|o| o.report)
        .collect();
    Ok(AggregateReport::from_reports(reports))
}

pub fn run_resolved(config: &RunConfig, resolved: &Resolved, replicate: usize) -> Result<RunOutput> {
    let rep_seed = replicate_seed(config.seed, replicate);
    let oracle = config.env.build(
        resolved.nu.num_contexts(),
        resolved.graph.num_arms(),
        resolved.horizon,
        derive_seed(rep_seed, stream::ENVIRONMENT, 0),
    )?;
    let graph = resolved.graph.clone();
    let horizon = resolved.horizon;
    let m = resolved.nu.num_contexts();

    let mut context_rng = sim_rng(derive_seed(rep_seed, stream::CONTEXTS, 0));
    let contexts: Vec<usize> = (0..horizon)
        .map(|_| resolved.nu.sample(&mut context_rng))
        .collect();
    let mut rng = sim_rng(derive_seed(rep_seed, stream::LEARNER, 0));

    let mut agent = match resolved.algo {
        ResolvedAlgo::Known { eta } => {
            Agent::Known(KnownDistLearner::new(graph.clone(), resolved.nu.clone(), eta)?)
        }
        ResolvedAlgo::Unknown(params) => {
            params.validate_horizon(horizon)?;
            let mut l = UnknownDistLearner::new(graph.clone(), m, params)?;
            if config.diagnostics || config.record_trace {
                l.record_epochs();
            }
            Agent::Unknown(l)
        }
        ResolvedAlgo::Baseline(kind) => {
            Agent::Baseline(BaselineLearner::new(kind, graph.clone(), m)?)
        }
    };

    let stride = config.curve_stride(horizon);
    let mut learner_expected = Vec::with_capacity(horizon);
    let mut learner_realized = Vec::with_capacity(horizon);
    let mut rounds = Vec::new();
    let mut rejection_rounds = 0;
    for (t, &c) in contexts.iter().enumerate() {
        let abort = |e: Error| Error::Run {
            round: t,
            source: Box::new(e),
        };
        let learner = agent.learner();
        let decision = learner.act(t, c, &mut rng).map_err(abort)?;
        let row = oracle.row(t, c);
        let expected_loss = decision.played.dot(&row);
        let loss = row[decision.arm];
        let r = reveal(&oracle, &graph, t, decision.arm).map_err(abort)?;
        learner.observe(&r, &mut rng).map_err(abort)?;
        if decision.branch == PlayBranch::Snapshot {
            rejection_rounds += 1;
        }
        learner_expected.push(expected_loss);
        learner_realized.push(loss);
        if config.record_trace {
            rounds.push(RoundRecord {
                t,
                context: c,
                arm: decision.arm,
                branch: decision.branch,
                played: decision.played.into_inner(),
                loss,
                expected_loss,
            });
        }
    }

    let policy = best_policy(&oracle, &contexts, horizon);
    let mut per_context = vec![0.0; m];
    let (mut expected, mut realized) = (0.0, 0.0);
    let mut curve = Vec::new();
    for (t, &c) in contexts.iter().enumerate() {
        let comparator = oracle.value(t, c, policy[c]);
        let e = learner_expected[t] - comparator;
        expected += e;
        realized += learner_realized[t] - comparator;
        per_context[c] += e;
        if (t + 1) % stride == 0 || t + 1 == horizon {
            curve.push(CurvePoint {
                t: t + 1,
                expected,
                realized,
            });
        }
    }

    let mut epoch_records = None;
    let mut epochs = Vec::new();
    let mut header_params = None;
    if let Agent::Unknown(l) = &mut agent {
        l.finish()?;
        header_params = Some(*l.params());
        if let Some(records) = l.take_epoch_records() {
            let diags = if config.diagnostics {
                Some(diagnostics_epoch(
                    &records,
                    (!rounds.is_empty()).then_some(rounds.as_slice()),
                    &oracle,
                    &resolved.nu,
                    &graph,
                    l.params(),
                    config.diagnostics_iota,
                )?)
            } else {
                None
            };
            for (i, rec) in records.iter().enumerate() {
                epochs.push(EpochTrace {
                    epoch: rec.epoch,
                    start_round: rec.start_round,
                    w_hat: rec.w_hat.clone(),
                    snapshot_digests: rec.snapshot.iter().map(|s| digest(s.as_slice())).collect(),
                    rejections: rec.rejections,
                    diagnostics: diags.as_ref().map(|d| d[i].clone()),
                });
            }
            epoch_records = Some(records);
        }
    }

    let algo = resolved.algo.name().to_string();
    let trace = config.record_trace.then(|| Trace {
        header: TraceHeader {
            algo: algo.clone(),
            replicate,
            seed: config.seed,
            horizon,
            num_arms: graph.num_arms(),
            num_contexts: m,
            alpha: graph.alpha(),
            params: header_params,
            eta: match resolved.algo {
                ResolvedAlgo::Known { eta } => Some(eta),
                _ => None,
            },
        },
        rounds,
        epochs,
        policy: policy.clone(),
    });
    Ok(RunOutput {
        report: RegretReport {
            algo,
            replicate,
            horizon,
            realized,
            expected,
            per_context_expected: per_context,
            policy,
            rejection_rounds,
            curve,
        },
        trace,
        epoch_records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::best_policy_brute;

    #[test]
    fn best_policy_examples() {
        // Single context, arm sums 3, 1, 2.
        let tensor = vec![
            vec![vec![1.0, 0.0, 1.0]],
            vec![vec![1.0, 1.0, 0.0]],
            vec![vec![1.0, 0.0, 1.0]],
        ];
        let oracle = LossOracle::table(tensor).unwrap();
        assert_eq!(best_policy(&oracle, &[0, 0, 0], 3), vec![1]);

        let flat = LossOracle::table(vec![vec![vec![0.5; 4]; 3]; 5]).unwrap();
        assert_eq!(best_policy(&flat, &[0, 1, 2, 0, 1], 5), vec![0, 0, 0]);
        // Context 2 never drawn.
        assert_eq!(best_policy(&flat, &[0, 1, 1, 0, 1], 5), vec![0, 0, 0]);
    }

    #[test]
    fn best_policy_matches_enumeration_on_random_table() {
        let mut rng = sim_rng(77);
        use rand::Rng;
        let tensor: Vec<Vec<Vec<f64>>> = (0..5)
            .map(|_| (0..3).map(|_| (0..4).map(|_| rng.gen::<f64>()).collect()).collect())
            .collect();
        let contexts: Vec<usize> = (0..5).map(|_| rng.gen_range(0..3)).collect();
        let oracle = LossOracle::table(tensor.clone()).unwrap();
        assert_eq!(
            best_policy(&oracle, &contexts, 5),
            best_policy_brute(&tensor, &contexts, 3)
        );
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((s.stderr - s.std / 2.0).abs() < 1e-12);
        assert_eq!(Summary::of(&[]).n, 0);
    }
}
