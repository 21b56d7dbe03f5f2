//! Cross-learning FTRL when the context distribution is unknown.
//!
//! The horizon is cut into epochs of `L` rounds (epochs are numbered from 1).
//! During epoch `e` the probability of *using* the loss of arm `a` is pinned
//! to `w_e(a) = E_c[s_e,c(N_in(a)) / 2]`, where `s_e` is a frozen copy of
//! the FTRL distributions taken at the end of epoch `e - 2`:
//!
//! - play `q = p` when `p(a) ≥ s_e(a) / 2` for every arm, else `q = s_e`;
//! - keep a revealed loss of `a` with probability `s_e(N_in(a)) / (2 q(N_in(a)))`.
//!
//! Rounds are grouped in pairs sharing one FTRL distribution. A random
//! permutation sends one round of each pair to the estimate `ŵ_{e+1}` of the
//! next epoch's observation rate and the other to the loss estimate
//! `2 ℓ / (ŵ_e(a) + 3γ/2)`, fed to every context. Epoch 1 plays uniformly and
//! only accumulates `ŵ_2`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::environment::{LossOracle, Reveal};
use crate::graph::FeedbackGraph;
use crate::rng::SimRng;
use crate::simplex::{exp_weights, sample_arm, CumulativeLoss, SimplexVector};
use crate::{Decision, Error, Learner, PlayBranch, Result};

/// Parameters `(ι, L, γ, η)` of the epoch learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSchedule {
    pub iota: f64,
    pub epoch_len: usize,
    pub gamma: f64,
    pub eta: f64,
    pub tuned_scale: f64,
}

/// Rounds to the nearest even integer (ties up), clamped to `[2, max]`.
fn nearest_even(x: f64, max: usize) -> usize {
    let max = max.max(2);
    let half = (x / 2.0).round().min((max / 2) as f64);
    (2 * half as usize).clamp(2, max)
}

fn check_schedule_inputs(num_arms: usize, horizon: usize, alpha: usize) -> Result<()> {
    if num_arms < 2 || horizon < 4 || alpha < 1 {
        return Err(Error::Params(format!(
            "schedule needs K >= 2, T >= 4, alpha >= 1 (got K={num_arms}, T={horizon}, alpha={alpha})"
        )));
    }
    Ok(())
}

impl ParamSchedule {
    /// The theorem schedule: `ι = 2 ln(8KT²)`, `L = sqrt(ι α T / ln K)` (nearest
    /// even integer in `[2, T/2]`), `γ = s · 16ι / L`, `η = γ / (2(2Lγ + ι))`.
    pub fn schedule_params(
        num_arms: usize,
        horizon: usize,
        alpha: usize,
        tuned_scale: f64,
    ) -> Result<Self> {
        check_schedule_inputs(num_arms, horizon, alpha)?;
        let iota = 2.0 * (8.0 * num_arms as f64 * (horizon as f64).powi(2)).ln();
        Self::with_iota(num_arms, horizon, alpha, tuned_scale, iota)
    }

    /// The theorem formulas with an explicit confidence level `ι`.
    pub fn with_iota(
        num_arms: usize,
        horizon: usize,
        alpha: usize,
        tuned_scale: f64,
        iota: f64,
    ) -> Result<Self> {
        check_schedule_inputs(num_arms, horizon, alpha)?;
        if !(tuned_scale > 0.0 && tuned_scale.is_finite()) || !(iota > 0.0 && iota.is_finite()) {
            return Err(Error::Params(format!(
                "tuned_scale {tuned_scale} and iota {iota} must be positive"
            )));
        }
        let raw = (iota * alpha as f64 * horizon as f64 / (num_arms as f64).ln()).sqrt();
        let epoch_len = nearest_even(raw, horizon / 2);
        Self::from_epoch_len(iota, epoch_len, tuned_scale)
    }

    /// `γ` and `η` for a given epoch length.
    pub fn from_epoch_len(iota: f64, epoch_len: usize, tuned_scale: f64) -> Result<Self> {
        let l = epoch_len as f64;
        let gamma = tuned_scale * 16.0 * iota / l;
        let eta = gamma / (2.0 * (2.0 * l * gamma + iota));
        Self::manual(iota, epoch_len, gamma, eta).map(|p| Self { tuned_scale, ..p })
    }

    pub fn manual(iota: f64, epoch_len: usize, gamma: f64, eta: f64) -> Result<Self> {
        if epoch_len < 2 || epoch_len % 2 != 0 {
            return Err(Error::Params(format!(
                "epoch length must be even and >= 2, got {epoch_len}"
            )));
        }
        for (name, x) in [("gamma", gamma), ("eta", eta), ("iota", iota)] {
            if !(x > 0.0 && x.is_finite()) {
                return Err(Error::Params(format!("{name} must be positive, got {x}")));
            }
        }
        Ok(Self {
            iota,
            epoch_len,
            gamma,
            eta,
            tuned_scale: 1.0,
        })
    }

    /// Checks that `horizon` is a whole number of epochs.
    pub fn validate_horizon(&self, horizon: usize) -> Result<()> {
        if horizon % self.epoch_len != 0 {
            let l = self.epoch_len;
            let below = (horizon / l) * l;
            let above = below + l;
            let suggested = if below >= l && horizon - below < above - horizon {
                below
            } else {
                above
            };
            return Err(Error::HorizonNotMultiple {
                horizon,
                epoch_len: l,
                suggested,
            });
        }
        Ok(())
    }

    /// Moves `L` to the nearest even divisor of `horizon` and recomputes `γ, η`.
    pub fn fit_to_horizon(&self, horizon: usize) -> Result<Self> {
        let target = self.epoch_len as f64;
        let best = (2..=horizon / 2)
            .step_by(2)
            .filter(|l| horizon % l == 0)
            .min_by(|a, b| {
                let da = (*a as f64 / target).ln().abs();
                let db = (*b as f64 / target).ln().abs();
                da.total_cmp(&db)
            })
            .ok_or_else(|| {
                Error::Params(format!("horizon {horizon} has no even divisor <= T/2"))
            })?;
        Self::from_epoch_len(self.iota, best, self.tuned_scale)
    }

    pub fn num_epochs(&self, horizon: usize) -> usize {
        horizon / self.epoch_len
    }
}

/// Play distribution: `p` if `p(a) ≥ s(a)/2` for every arm, else the snapshot `s`.
pub fn rejection_distribution(p: &SimplexVector, snapshot: &SimplexVector) -> (SimplexVector, PlayBranch) {
    let keeps = p
        .as_slice()
        .iter()
        .zip(snapshot.as_slice())
        .all(|(pa, sa)| *pa >= sa / 2.0);
    if keeps {
        (p.clone(), PlayBranch::Ftrl)
    } else {
        (snapshot.clone(), PlayBranch::Snapshot)
    }
}

/// Probability of keeping a revealed loss of `arm`: `s(N_in(a)) / (2 q(N_in(a)))`, clamped to `[0, 1]`.
pub fn accept_probability(
    snapshot: &SimplexVector,
    played: &SimplexVector,
    graph: &FeedbackGraph,
    arm: usize,
) -> Result<f64> {
    let s = graph.neighborhood_mass(snapshot, arm)?;
    let q = graph.neighborhood_mass(played, arm)?;
    if q <= 0.0 {
        return Err(Error::Protocol(format!(
            "arm {arm} has zero in-neighborhood mass under the played distribution"
        )));
    }
    Ok((s / (2.0 * q)).clamp(0.0, 1.0))
}

/// Exact `w(a) = E_c[s_c(N_in(a)) / 2]` for snapshots `s` under context probabilities `nu`.
pub fn exact_importance(graph: &FeedbackGraph, snapshots: &[SimplexVector], nu: &[f64]) -> Vec<f64> {
    let k = graph.num_arms();
    let mut mixture = vec![0.0; k];
    for (s, &p) in snapshots.iter().zip(nu) {
        for (m, x) in mixture.iter_mut().zip(s.as_slice()) {
            *m += p * x;
        }
    }
    graph.in_masses(&mixture).into_iter().map(|x| x / 2.0).collect()
}

/// Per-pair bookkeeping kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub frequency_round: usize,
    pub frequency_context: usize,
    pub loss_round: usize,
    pub loss_context: usize,
    pub loss_arm: usize,
    /// Revealed arms of the loss round whose Bernoulli draw kept the loss.
    pub used: Vec<usize>,
}

/// Everything the learner did in one epoch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub start_round: usize,
    /// `s_e` per context.
    pub snapshot: Vec<SimplexVector>,
    /// `s_{e+1}` per context (the FTRL distributions at the start of the epoch).
    pub next_snapshot: Vec<SimplexVector>,
    /// `ŵ_e` (all zeros in epoch 1, where no losses are estimated).
    pub w_hat: Vec<f64>,
    /// `ŵ_{e+1}` as accumulated during this epoch.
    pub w_hat_next: Vec<f64>,
    pub pairs: Vec<PairRecord>,
    pub rejections: usize,
}

#[derive(Debug, Clone)]
struct RoundState {
    round: usize,
    context: usize,
    arm: usize,
    played: SimplexVector,
    reveal: Option<Reveal>,
}

/// Frozen starting point for an epoch `e ≥ 2`.
#[derive(Debug, Clone)]
pub struct EpochSetup {
    pub epoch: usize,
    pub start_round: usize,
    pub snapshot: Vec<SimplexVector>,
    pub next_snapshot: Vec<SimplexVector>,
    pub w_hat: Vec<f64>,
    pub cum: Vec<CumulativeLoss>,
}

/// The epoch learner and its state.
#[derive(Debug, Clone)]
pub struct UnknownDistLearner {
    graph: Arc<FeedbackGraph>,
    params: ParamSchedule,
    epoch: usize,
    epoch_start: usize,
    round: usize,
    snapshot: Vec<SimplexVector>,
    next_snapshot: Vec<SimplexVector>,
    snapshot_in: Vec<Vec<f64>>,
    next_snapshot_in: Vec<Vec<f64>>,
    w_hat: Vec<f64>,
    w_hat_next: Vec<f64>,
    cum: Vec<CumulativeLoss>,
    pending: Option<RoundState>,
    first_of_pair: Option<RoundState>,
    rejections: usize,
    total_rejections: usize,
    pairs: Vec<PairRecord>,
    records: Option<Vec<EpochRecord>>,
}

/// The two rounds of a pair, as played.
#[derive(Debug, Clone)]
pub struct PairOutcome {
    pub decisions: [Decision; 2],
    pub record: PairRecord,
}

impl UnknownDistLearner {
    pub fn new(graph: Arc<FeedbackGraph>, num_contexts: usize, params: ParamSchedule) -> Result<Self> {
        let params = ParamSchedule::manual(params.iota, params.epoch_len, params.gamma, params.eta)
            .map(|p| ParamSchedule {
                tuned_scale: params.tuned_scale,
                ..p
            })?;
        if num_contexts == 0 {
            return Err(Error::Params("need at least one context".into()));
        }
        let k = graph.num_arms();
        let uniform = vec![SimplexVector::uniform(k); num_contexts];
        let mut learner = Self {
            params,
            epoch: 1,
            epoch_start: 0,
            round: 0,
            snapshot_in: Vec::new(),
            next_snapshot_in: Vec::new(),
            snapshot: uniform.clone(),
            next_snapshot: uniform,
            w_hat: vec![0.0; k],
            w_hat_next: vec![0.0; k],
            cum: vec![CumulativeLoss::zeros(k); num_contexts],
            pending: None,
            first_of_pair: None,
            rejections: 0,
            total_rejections: 0,
            pairs: Vec::new(),
            records: None,
            graph,
        };
        learner.refresh_in_masses();
        Ok(learner)
    }

    /// A learner positioned at the start of epoch `setup.epoch ≥ 2`.
    pub fn frozen(graph: Arc<FeedbackGraph>, params: ParamSchedule, setup: EpochSetup) -> Result<Self> {
        let m = setup.cum.len();
        let k = graph.num_arms();
        let dims_ok = setup.epoch >= 2
            && m > 0
            && setup.snapshot.len() == m
            && setup.next_snapshot.len() == m
            && setup.w_hat.len() == k
            && setup.cum.iter().all(|c| c.len() == k)
            && setup.snapshot.iter().chain(&setup.next_snapshot).all(|s| s.len() == k);
        if !dims_ok {
            return Err(Error::Params("inconsistent frozen epoch state".into()));
        }
        let mut learner = Self::new(graph, m, params)?;
        learner.epoch = setup.epoch;
        learner.epoch_start = setup.start_round;
        learner.round = setup.start_round;
        learner.snapshot = setup.snapshot;
        learner.next_snapshot = setup.next_snapshot;
        learner.w_hat = setup.w_hat;
        learner.cum = setup.cum;
        learner.refresh_in_masses();
        Ok(learner)
    }

    fn refresh_in_masses(&mut self) {
        let g = &self.graph;
        self.snapshot_in = self.snapshot.iter().map(|s| g.in_masses(s.as_slice())).collect();
        self.next_snapshot_in = self
            .next_snapshot
            .iter()
            .map(|s| g.in_masses(s.as_slice()))
            .collect();
    }

    /// Keep per-epoch records for diagnostics.
    pub fn record_epochs(&mut self) {
        self.records.get_or_insert_with(Vec::new);
    }

    /// Epoch records so far; the current epoch is included once complete.
    pub fn epoch_records(&self) -> Option<&[EpochRecord]> {
        self.records.as_deref()
    }

    pub fn take_epoch_records(&mut self) -> Option<Vec<EpochRecord>> {
        self.records.take()
    }

    pub fn params(&self) -> &ParamSchedule {
        &self.params
    }

    pub fn graph(&self) -> &Arc<FeedbackGraph> {
        &self.graph
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// Next round to be played.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn num_contexts(&self) -> usize {
        self.cum.len()
    }

    pub fn snapshot(&self) -> &[SimplexVector] {
        &self.snapshot
    }

    pub fn next_snapshot(&self) -> &[SimplexVector] {
        &self.next_snapshot
    }

    pub fn w_hat(&self) -> &[f64] {
        &self.w_hat
    }

    pub fn w_hat_next(&self) -> &[f64] {
        &self.w_hat_next
    }

    pub fn cumulative(&self, context: usize) -> &CumulativeLoss {
        &self.cum[context]
    }

    /// Rounds (over the whole run) that were played from the snapshot.
    pub fn total_rejections(&self) -> usize {
        self.total_rejections
    }

    /// `p_t,c` from the current cumulative estimates.
    pub fn distribution(&self, context: usize) -> SimplexVector {
        exp_weights(self.cum[context].totals(), self.params.eta)
            .expect("cumulative estimates stay finite")
    }

    /// Loss-estimate denominator `ŵ_e(a) + 3γ/2`.
    pub fn denominator(&self, arm: usize) -> f64 {
        self.w_hat[arm] + 1.5 * self.params.gamma
    }

    fn rounds_in_epoch(&self) -> usize {
        self.round - self.epoch_start
    }

    pub fn epoch_complete(&self) -> bool {
        self.rounds_in_epoch() == self.params.epoch_len && self.pending.is_none()
    }

    /// Fixes `s_{e+2}` from the current estimates, promotes `ŵ_{e+1}`, and
    /// advances to epoch `e + 1`.
    pub fn end_epoch(&mut self) -> Result<()> {
        if !self.epoch_complete() {
            return Err(Error::Protocol(format!(
                "epoch {} ended after {} of {} rounds",
                self.epoch,
                self.rounds_in_epoch(),
                self.params.epoch_len
            )));
        }
        let fixed: Vec<SimplexVector> = (0..self.num_contexts())
            .map(|c| self.distribution(c))
            .collect();
        if let Some(records) = self.records.as_mut() {
            records.push(EpochRecord {
                epoch: self.epoch,
                start_round: self.epoch_start,
                snapshot: self.snapshot.clone(),
                next_snapshot: self.next_snapshot.clone(),
                w_hat: self.w_hat.clone(),
                w_hat_next: self.w_hat_next.clone(),
                pairs: std::mem::take(&mut self.pairs),
                rejections: self.rejections,
            });
        }
        self.pairs.clear();
        self.snapshot = std::mem::replace(&mut self.next_snapshot, fixed);
        self.w_hat = std::mem::replace(&mut self.w_hat_next, vec![0.0; self.graph.num_arms()]);
        self.refresh_in_masses();
        self.rejections = 0;
        self.epoch += 1;
        self.epoch_start = self.round;
        Ok(())
    }

    /// Closes the final epoch so its record is available (no further play).
    pub fn finish(&mut self) -> Result<()> {
        if self.epoch_complete() {
            self.end_epoch()?;
        }
        Ok(())
    }

    /// Plays the uniform first epoch on the given contexts.
    pub fn run_first_epoch(
        &mut self,
        contexts: &[usize],
        oracle: &LossOracle,
        rng: &mut SimRng,
    ) -> Result<Vec<Decision>> {
        if self.epoch != 1 || self.rounds_in_epoch() != 0 {
            return Err(Error::Protocol("first epoch already started".into()));
        }
        if contexts.len() != self.params.epoch_len {
            return Err(Error::DimensionMismatch {
                expected: self.params.epoch_len,
                actual: contexts.len(),
            });
        }
        let mut out = Vec::with_capacity(contexts.len());
        for &c in contexts {
            let t = self.round;
            let d = self.act(t, c, rng)?;
            let r = crate::environment::reveal(oracle, &self.graph, t, d.arm)?;
            self.observe(&r, rng)?;
            out.push(d);
        }
        Ok(out)
    }

    /// Plays both rounds of a pair (epoch ≥ 2) and finalizes it.
    pub fn step_pair(
        &mut self,
        contexts: [usize; 2],
        oracle: &LossOracle,
        rng: &mut SimRng,
    ) -> Result<PairOutcome> {
        if self.epoch_complete() {
            self.end_epoch()?;
        }
        if self.epoch < 2 || self.rounds_in_epoch() % 2 != 0 {
            return Err(Error::Protocol(format!(
                "step_pair outside a pair boundary (epoch {}, offset {})",
                self.epoch,
                self.rounds_in_epoch()
            )));
        }
        let mut decisions = Vec::with_capacity(2);
        for c in contexts {
            let t = self.round;
            let d = self.act(t, c, rng)?;
            let r = crate::environment::reveal(oracle, &self.graph, t, d.arm)?;
            self.observe(&r, rng)?;
            decisions.push(d);
        }
        let record = self.pairs.last().cloned().expect("pair was just finalized");
        let [a, b]: [Decision; 2] = decisions.try_into().expect("two decisions");
        Ok(PairOutcome {
            decisions: [a, b],
            record,
        })
    }

    fn finalize_pair(&mut self, first: RoundState, second: RoundState, rng: &mut SimRng) {
        let l = self.params.epoch_len as f64;
        let (freq, loss) = if rng.gen::<bool>() {
            (first, second)
        } else {
            (second, first)
        };
        for (acc, s) in self
            .w_hat_next
            .iter_mut()
            .zip(&self.next_snapshot_in[freq.context])
        {
            *acc += s / l;
        }
        let reveal = loss.reveal.as_ref().expect("observed round has a reveal");
        let snap_in = &self.snapshot_in[loss.context];
        let mut used = Vec::new();
        for (a, losses) in reveal.iter() {
            let q_in = self.graph.in_mass(loss.played.as_slice(), a);
            // a ∈ N_out(A) and the self-loop of A put A ∈ N_in(a), so q_in > 0.
            let accept = (snap_in[a] / (2.0 * q_in)).clamp(0.0, 1.0);
            if rng.gen::<f64>() < accept {
                used.push(a);
                let denom = self.denominator(a);
                for (cum, &x) in self.cum.iter_mut().zip(losses) {
                    cum.add(a, 2.0 * x / denom);
                }
            }
        }
        self.pairs.push(PairRecord {
            frequency_round: freq.round,
            frequency_context: freq.context,
            loss_round: loss.round,
            loss_context: loss.context,
            loss_arm: loss.arm,
            used,
        });
    }
}

impl Learner for UnknownDistLearner {
    fn name(&self) -> &'static str {
        "unknown"
    }

    fn act(&mut self, round: usize, context: usize, rng: &mut SimRng) -> Result<Decision> {
        if self.epoch_complete() {
            self.end_epoch()?;
        }
        if round != self.round || self.pending.is_some() {
            return Err(Error::RoundOrder {
                expected: self.round,
                actual: round,
            });
        }
        if context >= self.num_contexts() {
            return Err(Error::IndexOutOfRange {
                what: "context",
                index: context,
                limit: self.num_contexts(),
            });
        }
        let (played, branch) = if self.epoch == 1 {
            (self.snapshot[context].clone(), PlayBranch::Ftrl)
        } else {
            // Estimates only change when a pair is finalized, so both rounds
            // of a pair see the same FTRL distributions.
            let p = self.distribution(context);
            rejection_distribution(&p, &self.snapshot[context])
        };
        if branch == PlayBranch::Snapshot {
            self.rejections += 1;
            self.total_rejections += 1;
        }
        let arm = sample_arm(&played, rng);
        self.pending = Some(RoundState {
            round,
            context,
            arm,
            played: played.clone(),
            reveal: None,
        });
        Ok(Decision {
            arm,
            played,
            branch,
        })
    }

    fn observe(&mut self, reveal: &Reveal, rng: &mut SimRng) -> Result<()> {
        let mut state = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("observe called without a pending action".into()))?;
        if reveal.round != state.round || reveal.played_arm != state.arm {
            return Err(Error::Protocol(format!(
                "reveal for round {} arm {} does not match round {} arm {}",
                reveal.round, reveal.played_arm, state.round, state.arm
            )));
        }
        self.round += 1;
        if self.epoch == 1 {
            let l = self.params.epoch_len as f64;
            for (acc, s) in self
                .w_hat_next
                .iter_mut()
                .zip(&self.next_snapshot_in[state.context])
            {
                *acc += s / (2.0 * l);
            }
            return Ok(());
        }
        state.reveal = Some(reveal.clone());
        match self.first_of_pair.take() {
            None => self.first_of_pair = Some(state),
            Some(first) => self.finalize_pair(first, state, rng),
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{reveal, ContextDistribution};
    use crate::graph::build_graph;
    use crate::rng::sim_rng;

    #[test]
    fn single_arm_schedule_is_an_error() {
        assert!(ParamSchedule::with_iota(1, 1024, 1, 0.02, 0.1).is_err());
        assert!(ParamSchedule::schedule_params(1, 1024, 1, 1.0).is_err());
        assert_eq!(nearest_even(f64::INFINITY, 64), 64);
    }

    fn graph(spec: &str) -> Arc<FeedbackGraph> {
        Arc::new(build_graph(&spec.parse().unwrap(), 0).unwrap())
    }

    #[test]
    fn theorem_schedule_values() {
        let p = ParamSchedule::schedule_params(16, 4096, 4, 1.0).unwrap();
        let iota = 2.0 * (8.0 * 16.0 * 4096f64.powi(2)).ln();
        assert!((p.iota - iota).abs() < 1e-12);
        assert!((p.iota - 42.98).abs() < 0.01);
        let raw = (iota * 4.0 * 4096.0 / 16f64.ln()).sqrt();
        assert!((raw - 503.937).abs() < 0.001);
        assert_eq!(p.epoch_len, 504);
        assert!((p.gamma - 16.0 * iota / 504.0).abs() < 1e-12);
        let eta = p.gamma / (2.0 * (2.0 * 504.0 * p.gamma + iota));
        assert!((p.eta - eta).abs() < 1e-15);
    }

    #[test]
    fn schedule_scales_with_alpha_and_tuning() {
        let one = ParamSchedule::schedule_params(16, 1 << 16, 1, 1.0).unwrap();
        let all = ParamSchedule::schedule_params(16, 1 << 16, 16, 1.0).unwrap();
        let ratio = all.epoch_len as f64 / one.epoch_len as f64;
        assert!((ratio - 4.0).abs() < 0.01, "{ratio}");

        let base = ParamSchedule::schedule_params(16, 4096, 4, 1.0).unwrap();
        let tuned = ParamSchedule::schedule_params(16, 4096, 4, 0.01).unwrap();
        assert_eq!(tuned.epoch_len, base.epoch_len);
        assert!((tuned.gamma - 0.01 * base.gamma).abs() < 1e-15);
        let l = tuned.epoch_len as f64;
        let eta = tuned.gamma / (2.0 * (2.0 * l * tuned.gamma + tuned.iota));
        assert!((tuned.eta - eta).abs() < 1e-18);
    }

    #[test]
    fn schedule_rejects_small_problems() {
        assert!(ParamSchedule::schedule_params(1, 100, 1, 1.0).is_err());
        assert!(ParamSchedule::schedule_params(4, 3, 1, 1.0).is_err());
        assert!(ParamSchedule::schedule_params(4, 100, 0, 1.0).is_err());
        assert!(ParamSchedule::manual(1.0, 3, 0.1, 0.1).is_err());
    }

    #[test]
    fn horizon_validation_suggests_nearest_multiple() {
        let p = ParamSchedule::manual(1.0, 504, 0.1, 0.01).unwrap();
        match p.validate_horizon(1000) {
            Err(Error::HorizonNotMultiple { suggested, .. }) => assert_eq!(suggested, 1008),
            other => panic!("{other:?}"),
        }
        assert!(p.validate_horizon(1008).is_ok());
        match p.validate_horizon(100) {
            Err(Error::HorizonNotMultiple { suggested, .. }) => assert_eq!(suggested, 504),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fit_to_horizon_picks_an_even_divisor() {
        let p = ParamSchedule::schedule_params(16, 1 << 14, 4, 1.0).unwrap();
        let fitted = p.fit_to_horizon(1 << 14).unwrap();
        assert_eq!(fitted.epoch_len, 1024);
        assert!(fitted.validate_horizon(1 << 14).is_ok());
        assert!((fitted.gamma - 16.0 * p.iota / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn rejection_examples() {
        let s = SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let (q, b) = rejection_distribution(&s, &s);
        assert_eq!((q, b), (s.clone(), PlayBranch::Ftrl));
        let p = SimplexVector::new(vec![0.05, 0.45, 0.5]).unwrap();
        let (q, b) = rejection_distribution(&p, &s);
        assert_eq!((q, b), (s.clone(), PlayBranch::Snapshot));
    }

    #[test]
    fn accept_probability_examples() {
        let g = graph("loops:3");
        let s = SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        for a in 0..3 {
            assert!((accept_probability(&s, &s, &g, a).unwrap() - 0.5).abs() < 1e-15);
        }
        let q = SimplexVector::new(vec![0.3, 0.2, 0.5]).unwrap();
        assert!((accept_probability(&s, &q, &g, 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let g = graph("complete:3");
        assert!((accept_probability(&s, &q, &g, 1).unwrap() - 0.5).abs() < 1e-15);
    }

    fn run_rounds(
        learner: &mut UnknownDistLearner,
        oracle: &LossOracle,
        nu: &ContextDistribution,
        rounds: usize,
        rng: &mut SimRng,
    ) {
        for _ in 0..rounds {
            let t = learner.round();
            let c = nu.sample(rng);
            let d = learner.act(t, c, rng).unwrap();
            let r = reveal(oracle, learner.graph(), t, d.arm).unwrap();
            learner.observe(&r, rng).unwrap();
        }
    }

    #[test]
    fn first_epoch_importance_is_closed_form() {
        for (spec, expected) in [("loops:8", 1.0 / 16.0), ("complete:8", 0.5)] {
            let g = graph(spec);
            let params = ParamSchedule::manual(1.0, 10, 0.1, 0.1).unwrap();
            let mut l = UnknownDistLearner::new(g, 3, params).unwrap();
            let oracle = LossOracle::stochastic_gap(3, 8, 0.5, 0.2, 0).unwrap();
            let mut rng = sim_rng(5);
            l.run_first_epoch(&[0, 1, 2, 2, 1, 0, 0, 0, 1, 2], &oracle, &mut rng)
                .unwrap();
            assert!(l.epoch_complete());
            for w in l.w_hat_next() {
                assert!((w - expected).abs() < 1e-12, "{spec}: {w}");
            }
            assert!((0..3).all(|c| l.cumulative(c).totals().iter().all(|x| *x == 0.0)));
        }
        let g = graph("cliques:3,1");
        let params = ParamSchedule::manual(1.0, 4, 0.1, 0.1).unwrap();
        let mut l = UnknownDistLearner::new(g, 1, params).unwrap();
        let oracle = LossOracle::stochastic_gap(1, 4, 0.5, 0.2, 0).unwrap();
        l.run_first_epoch(&[0; 4], &oracle, &mut sim_rng(1)).unwrap();
        assert_eq!(l.w_hat_next(), &[3.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0]);
    }

    #[test]
    fn epochs_roll_snapshots_forward() {
        let g = graph("cliques:2,2");
        let params = ParamSchedule::manual(1.0, 4, 0.05, 0.3).unwrap();
        let mut l = UnknownDistLearner::new(g, 2, params).unwrap();
        l.record_epochs();
        let oracle = LossOracle::stochastic_gap(2, 4, 0.6, 0.4, 3).unwrap();
        let nu = ContextDistribution::uniform(2);
        let mut rng = sim_rng(8);
        run_rounds(&mut l, &oracle, &nu, 4, &mut rng);
        assert!(matches!(l.end_epoch(), Ok(())));
        assert_eq!(l.epoch(), 2);
        // s_3 is fixed from zero estimates.
        assert_eq!(l.next_snapshot()[0], SimplexVector::uniform(4));
        assert!(l.w_hat().iter().all(|w| (w - 0.25).abs() < 1e-12));
        run_rounds(&mut l, &oracle, &nu, 3, &mut rng);
        assert!(l.end_epoch().is_err());
        run_rounds(&mut l, &oracle, &nu, 1, &mut rng);
        let frozen_s3 = l.next_snapshot().to_vec();
        let expected_s4: Vec<SimplexVector> = (0..2).map(|c| l.distribution(c)).collect();
        l.end_epoch().unwrap();
        assert_eq!(l.snapshot(), frozen_s3.as_slice());
        assert_eq!(l.next_snapshot(), expected_s4.as_slice());
        let records = l.epoch_records().unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[1].pairs.len(), 2);
        // Snapshots recorded for epoch 2 are never mutated afterwards.
        assert_eq!(records[1].snapshot, vec![SimplexVector::uniform(4); 2]);
    }

    #[test]
    fn zero_losses_never_move_estimates() {
        let g = graph("er:6:0.4");
        let params = ParamSchedule::manual(1.0, 6, 0.05, 0.3).unwrap();
        let mut l = UnknownDistLearner::new(g, 3, params).unwrap();
        let oracle = LossOracle::table(vec![vec![vec![0.0; 6]; 3]; 36]).unwrap();
        let nu = ContextDistribution::uniform(3);
        let mut rng = sim_rng(8);
        run_rounds(&mut l, &oracle, &nu, 36, &mut rng);
        assert!((0..3).all(|c| l.cumulative(c).totals().iter().all(|x| *x == 0.0)));
        l.finish().unwrap();
        assert_eq!(l.next_snapshot()[0], SimplexVector::uniform(6));
    }

    #[test]
    fn loss_estimates_use_the_frozen_denominator() {
        let g = graph("complete:2");
        let params = ParamSchedule::manual(1.0, 2, 0.1, 0.2).unwrap();
        let setup = EpochSetup {
            epoch: 3,
            start_round: 4,
            snapshot: vec![SimplexVector::uniform(2)],
            next_snapshot: vec![SimplexVector::uniform(2)],
            w_hat: vec![0.3, 0.5],
            cum: vec![CumulativeLoss::zeros(2)],
        };
        let mut l = UnknownDistLearner::frozen(g, params, setup).unwrap();
        let oracle = LossOracle::table(vec![vec![vec![1.0, 1.0]]; 6]).unwrap();
        let mut rng = sim_rng(0);
        let out = l.step_pair([0, 0], &oracle, &mut rng).unwrap();
        // Complete graph, q = p = s: accept with probability exactly 1/2.
        for &a in &out.record.used {
            let expected = 2.0 / (l.w_hat()[a] + 0.15);
            assert!((l.cumulative(0).totals()[a] - expected).abs() < 1e-12);
        }
        assert!(l.epoch_complete());
    }

    #[test]
    fn step_pair_rejects_first_epoch() {
        let g = graph("loops:3");
        let params = ParamSchedule::manual(1.0, 4, 0.1, 0.2).unwrap();
        let mut l = UnknownDistLearner::new(g, 1, params).unwrap();
        let oracle = LossOracle::stochastic_gap(1, 3, 0.5, 0.2, 0).unwrap();
        assert!(l.step_pair([0, 0], &oracle, &mut sim_rng(0)).is_err());
    }

    #[test]
    fn exact_importance_uniform_snapshot() {
        let g = graph("loops:4");
        let snaps = vec![SimplexVector::uniform(4); 3];
        let w = exact_importance(&g, &snaps, &[0.2, 0.3, 0.5]);
        assert!(w.iter().all(|x| (x - 1.0 / 8.0).abs() < 1e-12));
    }
}
