use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Resolved, ResolvedAlgo};
use crate::baselines::{default_rate, BaselineKind};
use crate::environment::{
    read_opposing_bids, seeded_opposing_bids, ContextDistribution, LossOracle,
};
use crate::graph::{build_graph, GraphSpec};
use crate::known::default_learning_rate;
use crate::rng::{derive_seed, stream};
use crate::unknown::ParamSchedule;
use crate::{Error, Result};

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// A complete, reproducible experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every random stream is derived from it.
    pub seed: u64,
    pub horizon: usize,
    #[serde(default = "one")]
    pub replicates: usize,
    /// Compute per-epoch diagnostics for the epoch learner.
    #[serde(default)]
    pub diagnostics: bool,
    /// Confidence level used by the diagnostics (defaults to the learner's `ι`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics_iota: Option<f64>,
    #[serde(default = "yes")]
    pub record_trace: bool,
    /// Number of points on the cumulative regret curve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub graph: GraphSpec,
    pub contexts: ContextSpec,
    pub env: EnvSpec,
    pub algo: AlgoSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub num_contexts: usize,
    /// Context probabilities; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
}

impl ContextSpec {
    pub fn uniform(num_contexts: usize) -> Self {
        Self {
            num_contexts,
            probs: None,
        }
    }

    pub fn distribution(&self) -> Result<ContextDistribution> {
        match &self.probs {
            None if self.num_contexts == 0 => Err(Error::Params("need at least one context".into())),
            None => Ok(ContextDistribution::uniform(self.num_contexts)),
            Some(p) if p.len() != self.num_contexts => Err(Error::DimensionMismatch {
                expected: self.num_contexts,
                actual: p.len(),
            }),
            Some(p) => ContextDistribution::new(p.clone()),
        }
    }
}

fn default_base() -> f64 {
    0.5
}

fn default_gap() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    StochasticGap {
        #[serde(default = "default_base")]
        base: f64,
        #[serde(default = "default_gap")]
        gap: f64,
    },
    AdversarialShift {
        #[serde(default = "default_base")]
        base: f64,
        #[serde(default = "default_gap")]
        gap: f64,
    },
    /// First-price auctions. Values default to an even grid over the
    /// contexts and bids to an even grid over the arms.
    Auction {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        values: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bids: Option<Vec<f64>>,
        #[serde(default)]
        opposing: OpposingSpec,
    },
    /// A loss table on disk (`.bin` for the binary layout, CSV otherwise).
    Table { path: PathBuf },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum OpposingSpec {
    #[default]
    Seeded,
    File { file: PathBuf },
}

fn grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

impl EnvSpec {
    pub fn build(&self, num_contexts: usize, num_arms: usize, horizon: usize, seed: u64) -> Result<LossOracle> {
        let oracle = match self {
            EnvSpec::StochasticGap { base, gap } => {
                LossOracle::stochastic_gap(num_contexts, num_arms, *base, *gap, seed)?
            }
            EnvSpec::AdversarialShift { base, gap } => LossOracle::adversarial_shift(
                num_contexts,
                num_arms,
                horizon.max(1),
                *base,
                *gap,
                seed,
            )?,
            EnvSpec::Auction {
                values,
                bids,
                opposing,
            } => {
                let values = values.clone().unwrap_or_else(|| grid(num_contexts));
                let bids = bids.clone().unwrap_or_else(|| grid(num_arms));
                let opposing = match opposing {
                    OpposingSpec::Seeded => seeded_opposing_bids(horizon, seed),
                    OpposingSpec::File { file } => read_opposing_bids(file)?,
                };
                LossOracle::auction(values, bids, opposing)?
            }
            EnvSpec::Table { path } => {
                if path.extension().is_some_and(|e| e == "bin") {
                    LossOracle::read_table_binary(path)?
                } else {
                    LossOracle::read_table_csv(path)?
                }
            }
        };
        if oracle.num_contexts() != num_contexts || oracle.num_arms() != num_arms {
            return Err(Error::Oracle(format!(
                "environment is {} contexts x {} arms but the run has {num_contexts} x {num_arms}",
                oracle.num_contexts(),
                oracle.num_arms()
            )));
        }
        if let Some(h) = oracle.horizon() {
            if h < horizon {
                return Err(Error::Oracle(format!(
                    "environment defines {h} rounds but the horizon is {horizon}"
                )));
            }
        }
        Ok(oracle)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    #[default]
    Auto,
    Manual,
}

/// What to do when the horizon is not a whole number of epochs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochLenMode {
    /// Move `L` to the nearest even divisor of `T`.
    #[default]
    Fit,
    /// Reject the configuration and suggest a compliant horizon.
    Strict,
}

fn default_tuned_scale() -> f64 {
    0.02
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnknownParams {
    #[serde(default)]
    pub params: ParamMode,
    #[serde(default = "default_tuned_scale")]
    pub tuned_scale: f64,
    #[serde(default)]
    pub epoch_len_mode: EpochLenMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iota: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epoch_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

impl Default for UnknownParams {
    fn default() -> Self {
        Self {
            params: ParamMode::Auto,
            tuned_scale: default_tuned_scale(),
            epoch_len_mode: EpochLenMode::Fit,
            iota: None,
            epoch_len: None,
            gamma: None,
            eta: None,
        }
    }
}

impl UnknownParams {
    pub fn resolve(&self, num_arms: usize, horizon: usize, alpha: usize) -> Result<ParamSchedule> {
        let schedule = match self.params {
            ParamMode::Manual => {
                let missing = |name: &str| Error::Config {
                    path: format!("algo.{name}"),
                    message: "required when params = \"manual\"".into(),
                };
                ParamSchedule::manual(
                    self.iota.ok_or_else(|| missing("iota"))?,
                    self.epoch_len.ok_or_else(|| missing("epoch_len"))?,
                    self.gamma.ok_or_else(|| missing("gamma"))?,
                    self.eta.ok_or_else(|| missing("eta"))?,
                )?
            }
            ParamMode::Auto => {
                for (name, set) in [("gamma", self.gamma.is_some()), ("eta", self.eta.is_some())] {
                    if set {
                        return Err(Error::Config {
                            path: format!("algo.{name}"),
                            message: "only allowed when params = \"manual\"".into(),
                        });
                    }
                }
                let base = match self.iota {
                    Some(iota) => {
                        ParamSchedule::with_iota(num_arms, horizon, alpha, self.tuned_scale, iota)?
                    }
                    None => ParamSchedule::schedule_params(num_arms, horizon, alpha, self.tuned_scale)?,
                };
                match self.epoch_len {
                    Some(l) => ParamSchedule::from_epoch_len(base.iota, l, self.tuned_scale)?,
                    None => base,
                }
            }
        };
        let fitted = self.params == ParamMode::Auto
            && self.epoch_len.is_none()
            && self.epoch_len_mode == EpochLenMode::Fit;
        if fitted && horizon % schedule.epoch_len != 0 {
            return schedule.fit_to_horizon(horizon);
        }
        schedule.validate_horizon(horizon)?;
        Ok(schedule)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlgoSpec {
    /// Cross-learning with the context distribution given to the learner.
    Known {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta_scale: Option<f64>,
    },
    Unknown(UnknownParams),
    PerContextExp3g {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_ix: Option<f64>,
    },
    PooledExp3g {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gamma_ix: Option<f64>,
    },
    Uniform,
}

impl AlgoSpec {
    /// The algorithm named `name` with default parameters.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "known" => Self::Known {
                eta: None,
                eta_scale: None,
            },
            "unknown" => Self::Unknown(UnknownParams::default()),
            "per_context_exp3g" => Self::PerContextExp3g {
                eta: None,
                gamma_ix: None,
            },
            "pooled_exp3g" => Self::PooledExp3g {
                eta: None,
                gamma_ix: None,
            },
            "uniform" => Self::Uniform,
            other => return Err(Error::Params(format!("unknown algorithm `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Known { .. } => "known",
            Self::Unknown(_) => "unknown",
            Self::PerContextExp3g { .. } => "per_context_exp3g",
            Self::PooledExp3g { .. } => "pooled_exp3g",
            Self::Uniform => "uniform",
        }
    }
}

impl RunConfig {
    /// A stochastic-gap configuration with defaults for everything optional.
    pub fn new(seed: u64, horizon: usize, graph: GraphSpec, num_contexts: usize, algo: AlgoSpec) -> Self {
        Self {
            seed,
            horizon,
            replicates: 1,
            diagnostics: false,
            diagnostics_iota: None,
            record_trace: true,
            curve_points: None,
            output: None,
            graph,
            contexts: ContextSpec::uniform(num_contexts),
            env: EnvSpec::StochasticGap {
                base: default_base(),
                gap: default_gap(),
            },
            algo,
        }
    }

    pub(super) fn curve_stride(&self, horizon: usize) -> usize {
        let points = self.curve_points.unwrap_or(128).max(1);
        horizon.div_ceil(points).max(1)
    }

    /// Builds the graph, checks it, and resolves algorithm parameters.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.replicates == 0 {
            return Err(Error::Config {
                path: "replicates".into(),
                message: "must be at least 1".into(),
            });
        }
        let graph = build_graph(&self.graph, derive_seed(self.seed, stream::GRAPH, 0))?;
        if !graph.has_all_self_loops() {
            let arm = (0..graph.num_arms()).find(|&a| !graph.has_self_loop(a)).unwrap_or(0);
            return Err(Error::MissingSelfLoop(arm));
        }
        if !graph.is_strongly_observable() {
            return Err(Error::NotStronglyObservable);
        }
        let nu = self.contexts.distribution()?;
        let k = graph.num_arms();
        let alpha = graph.alpha();
        let t = self.horizon;
        let m = nu.num_contexts();
        let baseline = |eta: Option<f64>, gamma_ix: Option<f64>, per_state: f64| {
            let eta = eta.unwrap_or_else(|| default_rate(k, alpha, per_state, 1.0));
            (eta, gamma_ix.unwrap_or(eta))
        };
        let algo = match &self.algo {
            AlgoSpec::Known { eta, eta_scale } => ResolvedAlgo::Known {
                eta: eta.unwrap_or_else(|| {
                    default_learning_rate(k, alpha, t, eta_scale.unwrap_or(1.0))
                }),
            },
            AlgoSpec::Unknown(p) => ResolvedAlgo::Unknown(p.resolve(k, t, alpha)?),
            AlgoSpec::PerContextExp3g { eta, gamma_ix } => {
                let (eta, gamma_ix) = baseline(*eta, *gamma_ix, t as f64 / m as f64);
                ResolvedAlgo::Baseline(BaselineKind::PerContextExp3g { eta, gamma_ix })
            }
            AlgoSpec::PooledExp3g { eta, gamma_ix } => {
                let (eta, gamma_ix) = baseline(*eta, *gamma_ix, t as f64);
                ResolvedAlgo::Baseline(BaselineKind::PooledExp3g { eta, gamma_ix })
            }
            AlgoSpec::Uniform => ResolvedAlgo::Baseline(BaselineKind::Uniform),
        };
        Ok(Resolved {
            graph: Arc::new(graph),
            nu,
            horizon: t,
            algo,
        })
    }
}
