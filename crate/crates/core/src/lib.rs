//! Cross-learning contextual bandits with graph feedback.
//!
//! Every round a context is drawn i.i.d. from a fixed distribution, the
//! learner plays an arm, and the environment reveals the losses of every
//! out-neighbor of the played arm under *every* context. The crate provides:
//!
//! - [`graph`]: feedback graphs, generators and exact independence numbers;
//! - [`simplex`]: the exponential-weights kernel and categorical sampling;
//! - [`environment`]: oblivious loss oracles, context distributions and reveals;
//! - [`known`]: the learner for a known context distribution;
//! - [`unknown`]: the epoch-based learner for an unknown context distribution;
//! - [`baselines`]: graph bandits that do not cross-learn, plus uniform play;
//! - [`harness`]: runs, regret reports, sweeps, scaling fits and diagnostics;
//! - [`config`]: the TOML run configuration;
//! - [`verify`]: the property/acceptance checks shared by tests and the CLI.

pub mod baselines;
pub mod config;
pub mod environment;
mod error;
pub mod graph;
pub mod harness;
pub mod known;
pub mod reference;
pub mod rng;
pub mod simplex;
pub mod unknown;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{FeedbackGraph, GraphSpec};
pub use simplex::{CumulativeLoss, SimplexVector};

/// A learner driven one round at a time by the harness.
///
/// `act` is called once the context of round `round` is known; `observe`
/// receives the cross-learning reveal of that same round.
pub trait Learner {
    fn name(&self) -> &'static str;

    fn act(
        &mut self,
        round: usize,
        context: usize,
        rng: &mut rng::SimRng,
    ) -> Result<Decision>;

    fn observe(&mut self, reveal: &environment::Reveal, rng: &mut rng::SimRng) -> Result<()>;
}

/// Which distribution a round was actually played from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayBranch {
    /// The learner's own FTRL distribution.
    Ftrl,
    /// The epoch snapshot fallback (rejection branch).
    Snapshot,
}

/// The outcome of [`Learner::act`].
#[derive(Debug, Clone)]
pub struct Decision {
    pub arm: usize,
    /// The exact distribution the arm was drawn from.
    pub played: SimplexVector,
    pub branch: PlayBranch,
}
