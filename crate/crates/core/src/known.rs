//! Cross-learning FTRL when the context distribution `ν` is known.
//!
//! Each context runs exponential weights on its own cumulative estimates.
//! After playing `A_t`, every context `c` and every revealed arm `a` receive
//! `ℓ_t,c(a) / w_t(a)`, where `w_t(a) = E_{c~ν}[p_t,c(N_in(a))]` is the exact
//! probability that arm `a` is observed this round.

use std::sync::Arc;

use crate::environment::{ContextDistribution, Reveal};
use crate::graph::FeedbackGraph;
use crate::rng::SimRng;
use crate::simplex::{exp_weights, sample_arm, CumulativeLoss, SimplexVector};
use crate::{Decision, Error, Learner, PlayBranch, Result};

/// Default learning rate `scale · sqrt(ln K / (α T))`.
pub fn default_learning_rate(num_arms: usize, alpha: usize, horizon: usize, scale: f64) -> f64 {
    let log_k = (num_arms.max(2) as f64).ln();
    scale * (log_k / (alpha.max(1) as f64 * horizon.max(1) as f64)).sqrt()
}

#[derive(Debug, Clone)]
pub struct KnownDistLearner {
    graph: Arc<FeedbackGraph>,
    nu: ContextDistribution,
    eta: f64,
    cum: Vec<CumulativeLoss>,
    round: usize,
    pending: Option<usize>,
}

impl KnownDistLearner {
    pub fn new(graph: Arc<FeedbackGraph>, nu: ContextDistribution, eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Params(format!("learning rate {eta}")));
        }
        let k = graph.num_arms();
        let cum = vec![CumulativeLoss::zeros(k); nu.num_contexts()];
        Ok(Self {
            graph,
            nu,
            eta,
            cum,
            round: 0,
            pending: None,
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.eta
    }

    /// Number of completed rounds.
    pub fn round(&self) -> usize {
        self.round
    }

    pub fn cumulative(&self, context: usize) -> &CumulativeLoss {
        &self.cum[context]
    }

    /// Overwrites the cumulative estimates of one context (for frozen-state experiments).
    pub fn set_cumulative(&mut self, context: usize, cum: CumulativeLoss) -> Result<()> {
        if cum.len() != self.graph.num_arms() {
            return Err(Error::DimensionMismatch {
                expected: self.graph.num_arms(),
                actual: cum.len(),
            });
        }
        self.cum[context] = cum;
        Ok(())
    }

    /// `p_t,c`.
    pub fn distribution(&self, context: usize) -> SimplexVector {
        exp_weights(self.cum[context].totals(), self.eta)
            .expect("cumulative estimates stay finite")
    }

    /// `w_t(a)` for every arm, from the current (pre-update) distributions.
    pub fn importances(&self) -> Vec<f64> {
        let k = self.graph.num_arms();
        let mut mixture = vec![0.0; k];
        for (c, &nu_c) in self.nu.probs().iter().enumerate() {
            if nu_c == 0.0 {
                continue;
            }
            let p = self.distribution(c);
            for (m, x) in mixture.iter_mut().zip(p.as_slice()) {
                *m += nu_c * x;
            }
        }
        self.graph.in_masses(&mixture)
    }

    /// `w_t(arm)`.
    pub fn known_importance(&self, arm: usize) -> f64 {
        self.importances()[arm]
    }

    /// The estimate `ℓ̃_t,c(a)` for every revealed `(a, c)`, given importances `w`.
    pub fn estimates(&self, reveal: &Reveal, w: &[f64]) -> Result<Vec<(usize, Vec<f64>)>> {
        reveal
            .iter()
            .map(|(a, losses)| {
                if w[a] <= 0.0 {
                    return Err(Error::ZeroImportance {
                        arm: a,
                        round: reveal.round,
                    });
                }
                Ok((a, losses.iter().map(|l| l / w[a]).collect()))
            })
            .collect()
    }
}

impl Learner for KnownDistLearner {
    fn name(&self) -> &'static str {
        "known"
    }

    fn act(&mut self, round: usize, context: usize, rng: &mut SimRng) -> Result<Decision> {
        if round != self.round || self.pending.is_some() {
            return Err(Error::RoundOrder {
                expected: self.round,
                actual: round,
            });
        }
        let p = self.distribution(context);
        let arm = sample_arm(&p, rng);
        self.pending = Some(arm);
        Ok(Decision {
            arm,
            played: p,
            branch: PlayBranch::Ftrl,
        })
    }

    fn observe(&mut self, reveal: &Reveal, _rng: &mut SimRng) -> Result<()> {
        let played = self.pending.take().ok_or_else(|| {
            Error::Protocol("observe called without a pending action".into())
        })?;
        if reveal.round != self.round || reveal.played_arm != played {
            return Err(Error::Protocol(format!(
                "reveal for round {} arm {} does not match round {} arm {played}",
                reveal.round, reveal.played_arm, self.round
            )));
        }
        let w = self.importances();
        for (a, estimates) in self.estimates(reveal, &w)? {
            for (cum, x) in self.cum.iter_mut().zip(estimates) {
                cum.add(a, x);
            }
        }
        self.round += 1;
        Ok(())
    }
}
