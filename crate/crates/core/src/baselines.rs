//! Reference learners that do not cross-learn.
//!
//! The graph-bandit baselines only ever read the realized context's row of a
//! reveal, so they embody the world without cross-learning: an independent
//! exponential-weights state per context, or one pooled state that ignores
//! the context altogether.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::environment::Reveal;
use crate::graph::FeedbackGraph;
use crate::rng::SimRng;
use crate::simplex::{exp_weights, sample_arm, CumulativeLoss, SimplexVector};
use crate::{Decision, Error, Learner, PlayBranch, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaselineKind {
    PerContextExp3g { eta: f64, gamma_ix: f64 },
    PooledExp3g { eta: f64, gamma_ix: f64 },
    Uniform,
}

impl BaselineKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::PerContextExp3g { .. } => "per_context_exp3g",
            Self::PooledExp3g { .. } => "pooled_exp3g",
            Self::Uniform => "uniform",
        }
    }
}

/// `scale · sqrt(ln K / (α n))` for a state expected to see `n` rounds.
pub fn default_rate(num_arms: usize, alpha: usize, rounds_per_state: f64, scale: f64) -> f64 {
    let log_k = (num_arms.max(2) as f64).ln();
    scale * (log_k / (alpha.max(1) as f64 * rounds_per_state.max(1.0))).sqrt()
}

#[derive(Debug, Clone)]
pub struct BaselineLearner {
    kind: BaselineKind,
    graph: Arc<FeedbackGraph>,
    num_contexts: usize,
    states: Vec<CumulativeLoss>,
    round: usize,
    pending: Option<(usize, usize, SimplexVector)>,
}

impl BaselineLearner {
    pub fn new(kind: BaselineKind, graph: Arc<FeedbackGraph>, num_contexts: usize) -> Result<Self> {
        let num_states = match kind {
            BaselineKind::PerContextExp3g { eta, gamma_ix }
            | BaselineKind::PooledExp3g { eta, gamma_ix } => {
                if !(eta > 0.0 && eta.is_finite()) || !(gamma_ix >= 0.0 && gamma_ix.is_finite()) {
                    return Err(Error::Params(format!(
                        "baseline needs eta > 0 and gamma_ix >= 0 (got {eta}, {gamma_ix})"
                    )));
                }
                if matches!(kind, BaselineKind::PerContextExp3g { .. }) {
                    num_contexts
                } else {
                    1
                }
            }
            BaselineKind::Uniform => 0,
        };
        if num_contexts == 0 {
            return Err(Error::Params("need at least one context".into()));
        }
        let k = graph.num_arms();
        Ok(Self {
            kind,
            states: vec![CumulativeLoss::zeros(k); num_states],
            graph,
            num_contexts,
            round: 0,
            pending: None,
        })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    fn state_index(&self, context: usize) -> usize {
        match self.kind {
            BaselineKind::PerContextExp3g { .. } => context,
            _ => 0,
        }
    }

    /// Cumulative estimates of the state serving `context` (empty for uniform play).
    pub fn cumulative(&self, context: usize) -> Option<&CumulativeLoss> {
        self.states.get(self.state_index(context))
    }

    pub fn distribution(&self, context: usize) -> SimplexVector {
        match self.kind {
            BaselineKind::PerContextExp3g { eta, .. } | BaselineKind::PooledExp3g { eta, .. } => {
                exp_weights(self.states[self.state_index(context)].totals(), eta)
                    .expect("cumulative estimates stay finite")
            }
            BaselineKind::Uniform => SimplexVector::uniform(self.graph.num_arms()),
        }
    }
}

impl Learner for BaselineLearner {
    fn name(&self) -> &'static str {
        self.kind.name()
    }

    fn act(&mut self, round: usize, context: usize, rng: &mut SimRng) -> Result<Decision> {
        if round != self.round || self.pending.is_some() {
            return Err(Error::RoundOrder {
                expected: self.round,
                actual: round,
            });
        }
        if context >= self.num_contexts {
            return Err(Error::IndexOutOfRange {
                what: "context",
                index: context,
                limit: self.num_contexts,
            });
        }
        let p = self.distribution(context);
        let arm = sample_arm(&p, rng);
        self.pending = Some((context, arm, p.clone()));
        Ok(Decision {
            arm,
            played: p,
            branch: PlayBranch::Ftrl,
        })
    }

    fn observe(&mut self, reveal: &Reveal, _rng: &mut SimRng) -> Result<()> {
        let (context, arm, p) = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("observe called without a pending action".into()))?;
        if reveal.round != self.round || reveal.played_arm != arm {
            return Err(Error::Protocol("reveal does not match the pending action".into()));
        }
        self.round += 1;
        let gamma_ix = match self.kind {
            BaselineKind::PerContextExp3g { gamma_ix, .. }
            | BaselineKind::PooledExp3g { gamma_ix, .. } => gamma_ix,
            BaselineKind::Uniform => return Ok(()),
        };
        let idx = self.state_index(context);
        for (a, losses) in reveal.iter() {
            // Only the realized context's row: no cross-learning.
            let observe_prob = self.graph.in_mass(p.as_slice(), a);
            self.states[idx].add(a, losses[context] / (observe_prob + gamma_ix));
        }
        Ok(())
    }
}
