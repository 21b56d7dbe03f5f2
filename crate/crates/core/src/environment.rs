//! Context distributions, oblivious loss oracles and the cross-learning reveal.
//!
//! Rounds are indexed from 0. Every loss `ℓ_t,c(a)` is a pure function of
//! the oracle (including its seed) and `(t, c, a)`, so the adversary is
//! oblivious and queries never change state.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::FeedbackGraph;
use crate::rng::{hash_words, unit_from_hash};
use crate::simplex::{sample_arm, SimplexVector};
use crate::{Error, Result};

/// The i.i.d. context distribution `ν` over `M` contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextDistribution(SimplexVector);

impl ContextDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Ok(Self(SimplexVector::new(probs)?))
    }

    pub fn uniform(num_contexts: usize) -> Self {
        Self(SimplexVector::uniform(num_contexts))
    }

    pub fn num_contexts(&self) -> usize {
        self.0.len()
    }

    pub fn probs(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn prob(&self, context: usize) -> f64 {
        self.0[context]
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_arm(&self.0, rng)
    }

    /// Expectation over contexts of a per-context quantity.
    pub fn expect(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        self.probs()
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(c, p)| p * f(c))
            .sum()
    }
}

/// An oblivious adversary: a fixed loss tensor `ℓ_t,c(a) ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossOracle {
    num_contexts: usize,
    num_arms: usize,
    kind: OracleKind,
}

#[derive(Debug, Clone, PartialEq)]
enum OracleKind {
    /// Bernoulli losses with fixed means `means[c * K + a]`.
    StochasticGap { means: Vec<f64>, seed: u64 },
    /// Bernoulli losses whose best arm per context changes every `segment_len` rounds.
    AdversarialShift {
        horizon: usize,
        segment_len: usize,
        /// `best[segment * M + c]`.
        best: Vec<usize>,
        base: f64,
        gap: f64,
        seed: u64,
    },
    Auction {
        values: Vec<f64>,
        bids: Vec<f64>,
        opposing: Vec<f64>,
    },
    /// Explicit tensor `data[(t * M + c) * K + a]`.
    Table { horizon: usize, data: Vec<f64> },
}

fn bernoulli(seed: u64, t: usize, c: usize, a: usize, mean: f64) -> f64 {
    let u = unit_from_hash(hash_words(&[seed, t as u64, c as u64, a as u64]));
    if u < mean {
        1.0
    } else {
        0.0
    }
}

/// Best arm of `context` under seed `seed` (same for every `M`).
fn seeded_best_arm(seed: u64, salt: u64, context: usize, num_arms: usize) -> usize {
    (hash_words(&[seed, salt, context as u64]) % num_arms as u64) as usize
}

fn check_unit(what: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Oracle(format!("{what} {x} outside [0, 1]")))
    }
}

fn check_sorted(what: &str, xs: &[f64]) -> Result<()> {
    if xs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Oracle(format!("{what} grid is not sorted ascending")));
    }
    xs.iter().try_for_each(|&x| check_unit(what, x))
}

impl LossOracle {
    /// Bernoulli losses with per-(context, arm) means (`means[c][a]`).
    pub fn stochastic(means: Vec<Vec<f64>>, seed: u64) -> Result<Self> {
        let num_contexts = means.len();
        let num_arms = means.first().map_or(0, Vec::len);
        if num_contexts == 0 || num_arms == 0 || means.iter().any(|r| r.len() != num_arms) {
            return Err(Error::Oracle("means must be a nonempty M x K matrix".into()));
        }
        let flat: Vec<f64> = means.into_iter().flatten().collect();
        flat.iter().try_for_each(|&m| check_unit("mean", m))?;
        Ok(Self {
            num_contexts,
            num_arms,
            kind: OracleKind::StochasticGap { means: flat, seed },
        })
    }

    /// Every context has one best arm with mean `base - gap`; the rest have mean `base`.
    ///
    /// The best arm of context `c` depends only on `(seed, c)`, so growing `M`
    /// keeps the structure of the existing contexts.
    pub fn stochastic_gap(
        num_contexts: usize,
        num_arms: usize,
        base: f64,
        gap: f64,
        seed: u64,
    ) -> Result<Self> {
        check_unit("base mean", base)?;
        check_unit("best mean", base - gap)?;
        let means = (0..num_contexts)
            .map(|c| {
                let best = seeded_best_arm(seed, 0, c, num_arms.max(1));
                (0..num_arms)
                    .map(|a| if a == best { base - gap } else { base })
                    .collect()
            })
            .collect();
        Self::stochastic(means, seed)
    }

    /// Like [`stochastic_gap`](Self::stochastic_gap) but the best arm of every
    /// context is redrawn at each `⌈T/4⌉` boundary.
    pub fn adversarial_shift(
        num_contexts: usize,
        num_arms: usize,
        horizon: usize,
        base: f64,
        gap: f64,
        seed: u64,
    ) -> Result<Self> {
        if num_contexts == 0 || num_arms == 0 || horizon == 0 {
            return Err(Error::Oracle("empty adversarial oracle".into()));
        }
        check_unit("base mean", base)?;
        check_unit("best mean", base - gap)?;
        let segment_len = horizon.div_ceil(4);
        let best = (0..4)
            .flat_map(|s| {
                (0..num_contexts).map(move |c| seeded_best_arm(seed, 1 + s as u64, c, num_arms))
            })
            .collect();
        Ok(Self {
            num_contexts,
            num_arms,
            kind: OracleKind::AdversarialShift {
                horizon,
                segment_len,
                best,
                base,
                gap,
                seed,
            },
        })
    }

    /// First-price auction losses; see [`auction_losses`].
    pub fn auction(values: Vec<f64>, bids: Vec<f64>, opposing: Vec<f64>) -> Result<Self> {
        auction_losses(values, bids, opposing)
    }

    /// Explicit loss tensor indexed `[t][c][a]`.
    pub fn table(tensor: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let horizon = tensor.len();
        let num_contexts = tensor.first().map_or(0, Vec::len);
        let num_arms = tensor
            .first()
            .and_then(|r| r.first())
            .map_or(0, Vec::len);
        if horizon == 0 || num_contexts == 0 || num_arms == 0 {
            return Err(Error::Oracle("empty loss table".into()));
        }
        let mut data = Vec::with_capacity(horizon * num_contexts * num_arms);
        for slice in tensor {
            if slice.len() != num_contexts || slice.iter().any(|r| r.len() != num_arms) {
                return Err(Error::Oracle("ragged loss table".into()));
            }
            data.extend(slice.into_iter().flatten());
        }
        Self::table_flat(horizon, num_contexts, num_arms, data)
    }

    fn table_flat(horizon: usize, num_contexts: usize, num_arms: usize, data: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(data.len(), horizon * num_contexts * num_arms);
        data.iter().try_for_each(|&x| check_unit("loss", x))?;
        Ok(Self {
            num_contexts,
            num_arms,
            kind: OracleKind::Table { horizon, data },
        })
    }

    pub fn num_contexts(&self) -> usize {
        self.num_contexts
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    /// Number of rounds the oracle defines, if bounded.
    pub fn horizon(&self) -> Option<usize> {
        match &self.kind {
            OracleKind::StochasticGap { .. } => None,
            OracleKind::AdversarialShift { horizon, .. } | OracleKind::Table { horizon, .. } => {
                Some(*horizon)
            }
            OracleKind::Auction { opposing, .. } => Some(opposing.len()),
        }
    }

    /// Mean loss of `(c, a)` for stochastic oracles.
    pub fn mean(&self, t: usize, c: usize, a: usize) -> Option<f64> {
        match &self.kind {
            OracleKind::StochasticGap { means, .. } => Some(means[c * self.num_arms + a]),
            OracleKind::AdversarialShift {
                segment_len,
                best,
                base,
                gap,
                ..
            } => {
                let s = t / segment_len;
                Some(if best[s * self.num_contexts + c] == a {
                    base - gap
                } else {
                    *base
                })
            }
            _ => None,
        }
    }

    /// `ℓ_t,c(a)` with index validation.
    pub fn loss(&self, t: usize, c: usize, a: usize) -> Result<f64> {
        if let Some(h) = self.horizon() {
            if t >= h {
                return Err(Error::IndexOutOfRange {
                    what: "round",
                    index: t,
                    limit: h,
                });
            }
        }
        if c >= self.num_contexts {
            return Err(Error::IndexOutOfRange {
                what: "context",
                index: c,
                limit: self.num_contexts,
            });
        }
        if a >= self.num_arms {
            return Err(Error::IndexOutOfRange {
                what: "arm",
                index: a,
                limit: self.num_arms,
            });
        }
        Ok(self.value(t, c, a))
    }

    /// `ℓ_t,c(a)` for indices already known to be in range.
    #[inline]
    pub fn value(&self, t: usize, c: usize, a: usize) -> f64 {
        match &self.kind {
            OracleKind::StochasticGap { means, seed } => {
                bernoulli(*seed, t, c, a, means[c * self.num_arms + a])
            }
            OracleKind::AdversarialShift { seed, .. } => {
                let mean = self.mean(t, c, a).unwrap_or(0.0);
                bernoulli(*seed, t, c, a, mean)
            }
            OracleKind::Auction {
                values,
                bids,
                opposing,
            } => auction_loss(values[c], bids[a], opposing[t]),
            OracleKind::Table { data, .. } => {
                data[(t * self.num_contexts + c) * self.num_arms + a]
            }
        }
    }

    /// All arms' losses of round `t` under context `c`.
    pub fn row(&self, t: usize, c: usize) -> Vec<f64> {
        (0..self.num_arms).map(|a| self.value(t, c, a)).collect()
    }

    /// Reads a table oracle from CSV with header `t,c,a,loss`; every cell must be present.
    pub fn read_table_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            t: usize,
            c: usize,
            a: usize,
            loss: f64,
        }
        let mut rows = Vec::new();
        for row in csv::Reader::from_path(path)?.deserialize() {
            let row: Row = row?;
            rows.push(row);
        }
        let dim = |f: fn(&Row) -> usize| rows.iter().map(f).max().map_or(0, |m| m + 1);
        let (horizon, m, k) = (dim(|r| r.t), dim(|r| r.c), dim(|r| r.a));
        let mut data = vec![f64::NAN; horizon * m * k];
        for r in &rows {
            data[(r.t * m + r.c) * k + r.a] = r.loss;
        }
        if data.is_empty() || data.iter().any(|x| x.is_nan()) {
            return Err(Error::Oracle(format!(
                "loss table {} does not cover every (t, c, a)",
                path.display()
            )));
        }
        Self::table_flat(horizon, m, k, data)
    }

    /// Writes a table oracle (or the first `horizon` rounds of any oracle) as CSV.
    pub fn write_table_csv(&self, path: &Path, horizon: usize) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "c", "a", "loss"])?;
        for t in 0..horizon {
            for c in 0..self.num_contexts {
                for a in 0..self.num_arms {
                    w.serialize((t, c, a, self.loss(t, c, a)?))?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the binary tensor format written by [`write_table_binary`](Self::write_table_binary).
    pub fn read_table_binary(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 28 || &bytes[..4] != TABLE_MAGIC {
            return Err(Error::Oracle(format!("{} is not a loss tensor", path.display())));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[4 + 8 * i..12 + 8 * i].try_into().unwrap());
        let (horizon, m, k) = (word(0) as usize, word(1) as usize, word(2) as usize);
        let body = &bytes[28..];
        if body.len() != horizon * m * k * 8 {
            return Err(Error::Oracle(format!(
                "{}: expected {} losses",
                path.display(),
                horizon * m * k
            )));
        }
        let data = body
            .chunks_exact(8)
            .map(|ch| f64::from_le_bytes(ch.try_into().unwrap()))
            .collect();
        Self::table_flat(horizon, m, k, data)
    }

    /// Binary tensor: magic `XLGT`, then `T, M, K` as little-endian u64,
    /// then `T·M·K` little-endian f64 in `(t, c, a)` order.
    pub fn write_table_binary(&self, path: &Path, horizon: usize) -> Result<()> {
        let mut out = Vec::with_capacity(28 + horizon * self.num_contexts * self.num_arms * 8);
        out.extend_from_slice(TABLE_MAGIC);
        for n in [horizon, self.num_contexts, self.num_arms] {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        for t in 0..horizon {
            for c in 0..self.num_contexts {
                for a in 0..self.num_arms {
                    out.extend_from_slice(&self.loss(t, c, a)?.to_le_bytes());
                }
            }
        }
        std::fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }
}

const TABLE_MAGIC: &[u8; 4] = b"XLGT";

/// Loss of bidding `bid` with private value `value` against highest opposing bid `opposing`.
///
/// Utility `u = (value - bid) · I(bid ≥ opposing)` is clamped to `[-1, 1]`
/// and mapped to `(1 - u) / 2`, so losing costs 0.5 and overbidding wins cost more.
pub fn auction_loss(value: f64, bid: f64, opposing: f64) -> f64 {
    let utility = if bid >= opposing { value - bid } else { 0.0 };
    (1.0 - utility.clamp(-1.0, 1.0)) / 2.0
}

/// Builds the first-price auction oracle: contexts are private values,
/// arms are bids, and round `t` faces the highest opposing bid `opposing[t]`.
///
/// Pair with the ordered-triangular graph: winning at a bid implies winning at
/// every higher bid, and the loss of every context is a function of the
/// outcome alone.
pub fn auction_losses(values: Vec<f64>, bids: Vec<f64>, opposing: Vec<f64>) -> Result<LossOracle> {
    if values.is_empty() || bids.is_empty() || opposing.is_empty() {
        return Err(Error::Oracle("empty auction grid".into()));
    }
    check_sorted("value", &values)?;
    check_sorted("bid", &bids)?;
    opposing
        .iter()
        .try_for_each(|&m| check_unit("opposing bid", m))?;
    Ok(LossOracle {
        num_contexts: values.len(),
        num_arms: bids.len(),
        kind: OracleKind::Auction {
            values,
            bids,
            opposing,
        },
    })
}

/// Opposing bids drawn uniformly from `[0, 1)`, deterministic in `seed`.
pub fn seeded_opposing_bids(horizon: usize, seed: u64) -> Vec<f64> {
    (0..horizon)
        .map(|t| unit_from_hash(hash_words(&[seed, 0xB1D, t as u64])))
        .collect()
}

/// Reads opposing bids from CSV: one value per row, optional header `bid`.
pub fn read_opposing_bids(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)?;
    let mut bids = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let field = record.get(0).unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(x) => bids.push(x),
            Err(_) if i == 0 => continue,
            Err(_) => return Err(Error::Oracle(format!("bad opposing bid `{field}`"))),
        }
    }
    Ok(bids)
}

/// The cross-learning feedback of one round: for every out-neighbor of the
/// played arm, its loss under every context.
#[derive(Debug, Clone, PartialEq)]
pub struct Reveal {
    pub round: usize,
    pub played_arm: usize,
    /// `out_neighbors(played_arm)`, ascending.
    pub arms: Vec<usize>,
    /// `losses[i][c]` is `ℓ_round,c(arms[i])`.
    pub losses: Vec<Vec<f64>>,
}

impl Reveal {
    /// Loss of `arm` under `context`, if `arm` was revealed.
    pub fn loss(&self, arm: usize, context: usize) -> Option<f64> {
        self.arms
            .binary_search(&arm)
            .ok()
            .map(|i| self.losses[i][context])
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.arms
            .iter()
            .copied()
            .zip(self.losses.iter().map(Vec::as_slice))
    }
}

/// Produces exactly the feedback set `out_neighbors(played_arm) × contexts`.
pub fn reveal(oracle: &LossOracle, graph: &FeedbackGraph, t: usize, played_arm: usize) -> Result<Reveal> {
    if played_arm >= graph.num_arms() {
        return Err(Error::ArmOutOfRange {
            arm: played_arm,
            num_arms: graph.num_arms(),
        });
    }
    if graph.num_arms() != oracle.num_arms() {
        return Err(Error::DimensionMismatch {
            expected: graph.num_arms(),
            actual: oracle.num_arms(),
        });
    }
    let arms = graph.out_neighbors(played_arm).to_vec();
    // Validates the round index once.
    oracle.loss(t, 0, played_arm)?;
    let losses = arms
        .iter()
        .map(|&a| (0..oracle.num_contexts()).map(|c| oracle.value(t, c, a)).collect())
        .collect();
    Ok(Reveal {
        round: t,
        played_arm,
        arms,
        losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};
    use crate::rng::sim_rng;

    #[test]
    fn context_sampling() {
        let nu = ContextDistribution::new(vec![0.0, 0.0, 1.0]).unwrap();
        let mut rng = sim_rng(3);
        assert!((0..500).all(|_| nu.sample(&mut rng) == 2));

        let n = 100_000;
        let nu = ContextDistribution::uniform(8);
        let mut counts = [0usize; 8];
        for _ in 0..n {
            counts[nu.sample(&mut rng)] += 1;
        }
        let tol = 3.0 * (0.125f64 * 0.875 / n as f64).sqrt();
        for c in counts {
            assert!((c as f64 / n as f64 - 0.125).abs() <= tol);
        }

        let draw = |seed| {
            let mut rng = sim_rng(seed);
            (0..50).map(|_| nu.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
    }

    #[test]
    fn table_oracle_returns_stored_values() {
        let tensor = vec![
            vec![vec![0.1, 0.2], vec![0.3, 0.4]],
            vec![vec![0.5, 0.6], vec![0.7, 0.8]],
        ];
        let oracle = LossOracle::table(tensor.clone()).unwrap();
        for (t, slice) in tensor.iter().enumerate() {
            for (c, row) in slice.iter().enumerate() {
                for (a, &x) in row.iter().enumerate() {
                    assert_eq!(oracle.loss(t, c, a).unwrap(), x);
                }
            }
        }
        assert!(oracle.loss(2, 0, 0).is_err());
        assert!(oracle.loss(0, 2, 0).is_err());
        assert!(oracle.loss(0, 0, 2).is_err());
        assert!(LossOracle::table(vec![vec![vec![1.5]]]).is_err());
    }

    #[test]
    fn stochastic_means_converge() {
        let means = vec![vec![0.2, 0.7], vec![0.5, 0.05]];
        let oracle = LossOracle::stochastic(means.clone(), 42).unwrap();
        let n = 100_000;
        for (c, row) in means.iter().enumerate() {
            for (a, &mu) in row.iter().enumerate() {
                let mean = (0..n).map(|t| oracle.value(t, c, a)).sum::<f64>() / n as f64;
                let se = (mu * (1.0 - mu) / n as f64).sqrt();
                assert!((mean - mu).abs() <= 3.0 * se, "c={c} a={a} {mean} vs {mu}");
            }
        }
    }

    #[test]
    fn losses_are_deterministic() {
        let oracle = LossOracle::stochastic_gap(4, 6, 0.5, 0.2, 9).unwrap();
        let first: Vec<f64> = (0..100).map(|t| oracle.value(t, t % 4, t % 6)).collect();
        let again: Vec<f64> = (0..100).rev().map(|t| oracle.value(t, t % 4, t % 6)).collect();
        assert_eq!(first, again.into_iter().rev().collect::<Vec<_>>());
    }

    #[test]
    fn gap_structure_is_stable_in_m() {
        let small = LossOracle::stochastic_gap(4, 16, 0.5, 0.2, 3).unwrap();
        let large = LossOracle::stochastic_gap(64, 16, 0.5, 0.2, 3).unwrap();
        for c in 0..4 {
            for a in 0..16 {
                assert_eq!(small.mean(0, c, a), large.mean(0, c, a));
            }
        }
    }

    #[test]
    fn adversarial_shift_segments() {
        let oracle = LossOracle::adversarial_shift(2, 5, 100, 0.5, 0.3, 1).unwrap();
        let best = |t| (0..5).find(|&a| oracle.mean(t, 0, a) == Some(0.2)).unwrap();
        assert_eq!(best(0), best(24));
        assert_eq!(oracle.horizon(), Some(100));
        for t in 0..100 {
            assert_eq!((0..5).filter(|&a| oracle.mean(t, 1, a) == Some(0.2)).count(), 1);
        }
    }

    #[test]
    fn auction_loss_examples() {
        assert_eq!(auction_loss(0.4, 0.4, 0.3), 0.5);
        assert_eq!(auction_loss(0.9, 0.2, 0.5), 0.5);
        assert_eq!(auction_loss(1.0, 0.0, 0.0), 0.0);
        // Losing the auction: zero utility.
        assert_eq!(auction_loss(1.0, 0.0, 0.3), 0.5);
        // Overbidding and winning costs more than losing.
        assert_eq!(auction_loss(0.0, 1.0, 0.0), 1.0);
    }

    #[test]
    fn auction_oracle_validates_grids() {
        assert!(auction_losses(vec![0.5, 0.2], vec![0.1], vec![0.3]).is_err());
        assert!(auction_losses(vec![0.2], vec![0.6, 0.1], vec![0.3]).is_err());
        assert!(auction_losses(vec![0.2], vec![0.1], vec![1.3]).is_err());
        let oracle = auction_losses(vec![0.25, 1.0], vec![0.0, 0.5], vec![0.0, 0.7]).unwrap();
        assert_eq!(oracle.loss(0, 1, 0).unwrap(), 0.0);
        assert_eq!(oracle.loss(1, 1, 1).unwrap(), 0.5);
        assert_eq!(oracle.horizon(), Some(2));
    }

    #[test]
    fn reveal_covers_out_neighborhood_only() {
        let oracle = LossOracle::stochastic_gap(3, 6, 0.5, 0.2, 1).unwrap();
        let complete = build_graph(&GraphSpec::CompleteWithSelfLoops { num_arms: 6 }, 0).unwrap();
        let r = reveal(&oracle, &complete, 7, 2).unwrap();
        assert_eq!(r.arms, (0..6).collect::<Vec<_>>());
        for a in 0..6 {
            for c in 0..3 {
                assert_eq!(r.loss(a, c), Some(oracle.value(7, c, a)));
            }
        }
        let loops = build_graph(&GraphSpec::SelfLoopsOnly { num_arms: 6 }, 0).unwrap();
        let r = reveal(&oracle, &loops, 7, 2).unwrap();
        assert_eq!(r.arms, vec![2]);
        assert_eq!(r.losses[0].len(), 3);
        let cliques = build_graph(&GraphSpec::DisjointCliques { sizes: vec![2, 4] }, 0).unwrap();
        let r = reveal(&oracle, &cliques, 7, 3).unwrap();
        assert_eq!(r.arms, vec![2, 3, 4, 5]);
        assert_eq!(r.loss(0, 0), None);
        assert!(reveal(&oracle, &cliques, 7, 6).is_err());
    }

    #[test]
    fn table_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let oracle = LossOracle::stochastic_gap(2, 3, 0.5, 0.2, 5).unwrap();
        let csv_path = dir.path().join("t.csv");
        oracle.write_table_csv(&csv_path, 4).unwrap();
        let bin_path = dir.path().join("t.bin");
        oracle.write_table_binary(&bin_path, 4).unwrap();
        let a = LossOracle::read_table_csv(&csv_path).unwrap();
        let b = LossOracle::read_table_binary(&bin_path).unwrap();
        assert_eq!(a, b);
        for t in 0..4 {
            assert_eq!(a.row(t, 1), oracle.row(t, 1));
        }
        std::fs::write(&csv_path, "t,c,a,loss\n0,0,0,0.5\n0,0,1,0.5\n1,0,0,0.1\n").unwrap();
        assert!(LossOracle::read_table_csv(&csv_path).is_err());
    }

    #[test]
    fn opposing_bids_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bids.csv");
        std::fs::write(&path, "bid\n0.25\n0.75\n").unwrap();
        assert_eq!(read_opposing_bids(&path).unwrap(), vec![0.25, 0.75]);
        let seeded = seeded_opposing_bids(10, 4);
        assert_eq!(seeded, seeded_opposing_bids(10, 4));
        assert!(seeded.iter().all(|b| (0.0..1.0).contains(b)));
    }
}
