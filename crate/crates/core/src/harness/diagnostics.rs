//! Per-epoch checks of the epoch learner, computed with knowledge of `ν`.
//!
//! The learner never sees `ν`; here the exact observation rates
//! `w_e(a) = E_c[s_e,c(N_in(a)) / 2]` are available in closed form, so the
//! concentration events, the denominator ratio `β_e` and the counterfactual
//! distributions built from pseudo-estimates can be audited epoch by epoch.

use serde::{Deserialize, Serialize};

use super::RoundRecord;
use crate::environment::{ContextDistribution, LossOracle};
use crate::graph::FeedbackGraph;
use crate::simplex::{tilt, SimplexVector};
use crate::unknown::{exact_importance, EpochRecord, ParamSchedule};
use crate::{PlayBranch, Result};

const BRANCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochDiagnostics {
    pub epoch: usize,
    /// Exact `w_e`.
    pub exact_w: Vec<f64>,
    pub w_hat: Vec<f64>,
    /// `|ŵ_e − w_e| ≤ 2 max(sqrt(w_e ι / L), ι / L)` for all arms (undefined in epoch 1).
    pub f_event: Option<bool>,
    /// The same check for the estimate `ŵ_{e+1}` built during this epoch.
    pub f_next_event: bool,
    /// `max_{c,a} Σ ℓ̃ ≤ L + ι/γ`.
    pub l_event: bool,
    /// Every event so far held.
    pub q_so_far: bool,
    pub max_pseudo_sum: f64,
    pub pseudo_bound: f64,
    /// `γ ≥ 4ι/L`.
    pub gamma_condition: bool,
    /// Range of `β_e(a) = (w_e(a) + γ) / (ŵ_e(a) + 3γ/2)`.
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    /// `min p_t,c(a) / s_e,c(a)` over pairs, contexts and arms.
    pub min_p_over_snapshot: Option<f64>,
    /// Range of `p̃_t,c(a) / p_t,c(a)`.
    pub p_tilde_ratio_min: Option<f64>,
    pub p_tilde_ratio_max: Option<f64>,
    /// `max_t Σ_a p̄_t(a) / (w_e(a) + γ)` with `p̄_t = E_c[p̃_t,c]`.
    pub graph_inverse_lhs_max: Option<f64>,
    /// Pairs in which each arm's loss was used.
    pub used_counts: Vec<usize>,
    pub rejections: usize,
    /// Rounds whose branch flag disagrees with the reconstructed FTRL distribution.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch_mismatches: Option<usize>,
}

/// `|ŵ − w| ≤ 2 max(sqrt(w ι / L), ι / L)` for every arm.
pub fn frequency_event(w_hat: &[f64], w: &[f64], iota: f64, epoch_len: usize) -> bool {
    let l = epoch_len as f64;
    w_hat
        .iter()
        .zip(w)
        .all(|(h, w)| (h - w).abs() <= 2.0 * (w * iota / l).sqrt().max(iota / l))
}

fn range(lo: &mut Option<f64>, hi: &mut Option<f64>, x: f64) {
    *lo = Some(lo.map_or(x, |v: f64| v.min(x)));
    *hi = Some(hi.map_or(x, |v: f64| v.max(x)));
}

/// Diagnostics for every recorded epoch.
///
/// `rounds`, when given, enables the branch audit: each round flagged as
/// played from the snapshot must have an arm with `p(a) < s_e(a)/2`, and
/// each other round none.
pub fn diagnostics_epoch(
    records: &[EpochRecord],
    rounds: Option<&[RoundRecord]>,
    oracle: &LossOracle,
    nu: &ContextDistribution,
    graph: &FeedbackGraph,
    params: &ParamSchedule,
    iota: Option<f64>,
) -> Result<Vec<EpochDiagnostics>> {
    let iota = iota.unwrap_or(params.iota);
    let (l, gamma, eta) = (params.epoch_len, params.gamma, params.eta);
    let k = graph.num_arms();
    let m = nu.num_contexts();
    let mut q_so_far = true;
    let mut out = Vec::with_capacity(records.len());
    for rec in records {
        let w = exact_importance(graph, &rec.snapshot, nu.probs());
        let w_next = exact_importance(graph, &rec.next_snapshot, nu.probs());
        let first = rec.epoch == 1;
        let f_event = (!first).then(|| frequency_event(&rec.w_hat, &w, iota, l));
        let f_next_event = frequency_event(&rec.w_hat_next, &w_next, iota, l);

        let (mut beta_min, mut beta_max) = (None, None);
        if !first {
            for a in 0..k {
                range(
                    &mut beta_min,
                    &mut beta_max,
                    (w[a] + gamma) / (rec.w_hat[a] + 1.5 * gamma),
                );
            }
        }

        // Running sums of pseudo-estimates (ℓ̃, exact denominator) and actual estimates (ℓ̂).
        let mut pseudo = vec![vec![0.0; k]; m];
        let mut actual = vec![vec![0.0; k]; m];
        let mut used_counts = vec![0; k];
        let (mut ratio_lo, mut ratio_hi) = (None, None);
        let mut min_p_over_s: Option<f64> = None;
        let mut lhs_max: Option<f64> = None;
        let mut mismatches = rounds.map(|_| 0usize);
        for pair in &rec.pairs {
            let mut mixture = vec![0.0; k];
            let mut flags = Vec::with_capacity(m);
            for c in 0..m {
                let base = &rec.next_snapshot[c];
                let p = tilt(base, &actual[c], eta)?;
                let p_tilde = tilt(base, &pseudo[c], eta)?;
                let s = &rec.snapshot[c];
                let mut violates = false;
                let mut near = false;
                for a in 0..k {
                    if s[a] > 0.0 {
                        let r = p[a] / s[a];
                        min_p_over_s = Some(min_p_over_s.map_or(r, |v| v.min(r)));
                        violates |= p[a] < s[a] / 2.0;
                        near |= (p[a] - s[a] / 2.0).abs() <= BRANCH_TOL;
                    }
                    if p[a] > 0.0 {
                        range(&mut ratio_lo, &mut ratio_hi, p_tilde[a] / p[a]);
                    }
                    mixture[a] += nu.prob(c) * p_tilde[a];
                }
                flags.push((violates, near));
            }
            let lhs: f64 = (0..k).map(|a| mixture[a] / (w[a] + gamma)).sum();
            lhs_max = Some(lhs_max.map_or(lhs, |v| v.max(lhs)));

            if let (Some(rounds), Some(count)) = (rounds, mismatches.as_mut()) {
                for t in [pair.frequency_round, pair.loss_round] {
                    if let Some(r) = rounds.get(t) {
                        let (violates, near) = flags[r.context];
                        let flagged = r.branch == PlayBranch::Snapshot;
                        if flagged != violates && !near {
                            *count += 1;
                        }
                    }
                }
            }

            for &a in &pair.used {
                used_counts[a] += 1;
                for c in 0..m {
                    let loss = oracle.value(pair.loss_round, c, a);
                    pseudo[c][a] += 2.0 * loss / (w[a] + gamma);
                    actual[c][a] += 2.0 * loss / (rec.w_hat[a] + 1.5 * gamma);
                }
            }
        }

        let max_pseudo_sum = pseudo
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max);
        let pseudo_bound = l as f64 + iota / gamma;
        let l_event = max_pseudo_sum <= pseudo_bound;
        q_so_far &= f_event.unwrap_or(true) && l_event;
        out.push(EpochDiagnostics {
            epoch: rec.epoch,
            exact_w: w,
            w_hat: rec.w_hat.clone(),
            f_event,
            f_next_event,
            l_event,
            q_so_far,
            max_pseudo_sum,
            pseudo_bound,
            gamma_condition: gamma >= 4.0 * iota / l as f64,
            beta_min,
            beta_max,
            min_p_over_snapshot: min_p_over_s,
            p_tilde_ratio_min: ratio_lo,
            p_tilde_ratio_max: ratio_hi,
            graph_inverse_lhs_max: lhs_max,
            used_counts,
            rejections: rec.rejections,
            branch_mismatches: mismatches,
        });
    }
    Ok(out)
}

/// `Σ_i x_i / x(N_in(i))` for weights `x` on the arms of `graph`.
pub fn graph_inverse_sum(graph: &FeedbackGraph, weights: &[f64]) -> f64 {
    (0..graph.num_arms())
        .map(|i| weights[i] / graph.in_mass(weights, i))
        .sum()
}

/// `4 α ln(4K / (α ε))`.
pub fn graph_inverse_bound(num_arms: usize, alpha: usize, epsilon: f64) -> f64 {
    let a = alpha as f64;
    4.0 * a * (4.0 * num_arms as f64 / (a * epsilon)).ln()
}

/// Uniform weights on a complete graph: `K (1/K) / (1/2 + γ)`.
pub fn complete_uniform_lhs(num_arms: usize, gamma: f64) -> f64 {
    let p = SimplexVector::uniform(num_arms);
    p.as_slice().iter().map(|x| x / (0.5 + gamma)).sum()
}
