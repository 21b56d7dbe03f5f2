use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{fit_scaling, run_aggregate, AlgoSpec, RunConfig, ScalingFit, Summary};
use crate::graph::GraphSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    #[serde(rename = "T")]
    Horizon,
    #[serde(rename = "M")]
    Contexts,
    #[serde(rename = "alpha")]
    Alpha,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Horizon => "T",
            SweepAxis::Contexts => "M",
            SweepAxis::Alpha => "alpha",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "T" | "t" | "horizon" => Ok(Self::Horizon),
            "M" | "m" | "contexts" => Ok(Self::Contexts),
            "alpha" => Ok(Self::Alpha),
            other => Err(Error::Params(format!("unknown sweep axis `{other}` (T, M or alpha)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: usize,
    pub algo: String,
    pub expected: Summary,
    pub realized: Summary,
    pub rejection_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgoTrend {
    pub algo: String,
    /// Log-log slope of mean expected regret (T and alpha axes).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
    /// Mean regret at the last value over the first (M axis).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub values: Vec<usize>,
    pub rows: Vec<SweepRow>,
    pub trends: Vec<AlgoTrend>,
}

impl SweepReport {
    pub fn rows_for<'a>(&'a self, algo: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.algo == algo)
    }

    pub fn trend(&self, algo: &str) -> Option<&AlgoTrend> {
        self.trends.iter().find(|t| t.algo == algo)
    }

    /// Aggregate CSV, one row per (value, algorithm).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "axis",
            "value",
            "algo",
            "mean_regret_expected",
            "stderr_expected",
            "std_expected",
            "mean_regret_realized",
            "stderr_realized",
            "replicates",
            "rejection_fraction",
        ])?;
        for r in &self.rows {
            w.serialize((
                self.axis.to_string(),
                r.value,
                &r.algo,
                r.expected.mean,
                r.expected.stderr,
                r.expected.std,
                r.realized.mean,
                r.realized.stderr,
                r.expected.n,
                r.rejection_fraction,
            ))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `config` with the swept quantity set to `value`.
pub fn apply_axis(config: &RunConfig, axis: SweepAxis, value: usize) -> Result<RunConfig> {
    let mut c = config.clone();
    match axis {
        SweepAxis::Horizon => c.horizon = value,
        SweepAxis::Contexts => {
            if c.contexts.probs.is_some() {
                return Err(Error::Params(
                    "an M sweep needs uniform contexts (drop contexts.probs)".into(),
                ));
            }
            if matches!(&c.env, crate::harness::EnvSpec::Auction { values: Some(_), .. }) {
                return Err(Error::Params(
                    "an M sweep cannot use explicit auction values".into(),
                ));
            }
            c.contexts.num_contexts = value;
        }
        SweepAxis::Alpha => {
            let k = match &c.graph {
                GraphSpec::DisjointCliques { sizes } => sizes.iter().sum(),
                GraphSpec::CompleteWithSelfLoops { num_arms } | GraphSpec::SelfLoopsOnly { num_arms } => {
                    *num_arms
                }
                other => {
                    return Err(Error::Params(format!(
                        "an alpha sweep needs a clique family graph, not `{other}`"
                    )))
                }
            };
            c.graph = GraphSpec::equal_cliques(k, value)?;
        }
    }
    Ok(c)
}

/// Runs `config` (once per algorithm in `algos`, or its own algorithm when
/// `algos` is empty) at every axis value, replicates in parallel.
pub fn sweep(config: &RunConfig, axis: SweepAxis, values: &[usize], algos: &[AlgoSpec]) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::Params("sweep needs at least one value".into()));
    }
    let algos: Vec<AlgoSpec> = if algos.is_empty() {
        vec![config.algo.clone()]
    } else {
        algos.to_vec()
    };
    let mut rows = Vec::new();
    for algo in &algos {
        for &v in values {
            let mut c = apply_axis(config, axis, v)?;
            c.algo = algo.clone();
            let agg = run_aggregate(&c)?;
            rows.push(SweepRow {
                value: v,
                algo: algo.name().to_string(),
                expected: agg.expected,
                realized: agg.realized,
                rejection_fraction: agg.rejection_fraction.mean,
            });
        }
    }
    let trends = algos
        .iter()
        .map(|algo| {
            let name = algo.name();
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.algo == name)
                .map(|r| (r.value as f64, r.expected.mean))
                .collect();
            let (fit, ratio) = match axis {
                SweepAxis::Contexts => {
                    let ratio = match (pts.first(), pts.last()) {
                        (Some(a), Some(b)) if pts.len() >= 2 => Some(b.1 / a.1),
                        _ => None,
                    };
                    (None, ratio)
                }
                _ => (fit_scaling(&pts).ok(), None),
            };
            AlgoTrend {
                algo: name.to_string(),
                fit,
                ratio,
            }
        })
        .collect();
    Ok(SweepReport {
        axis,
        values: values.to_vec(),
        rows,
        trends,
    })
}
