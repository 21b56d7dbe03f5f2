//! Slow, obviously-correct reference computations.
//!
//! These share no code with the production paths they check and are used by
//! the test suites and by `crossgraph verify`.

/// Maximum independent set size by enumerating all `2^K` subsets.
///
/// `masks[v]` holds the arms conflicting with `v` (symmetric, no self bit).
pub fn independence_number_brute(masks: &[u64]) -> usize {
    let k = masks.len();
    assert!(k <= 24, "enumeration oracle limited to 24 arms");
    let mut independent = vec![false; 1 << k];
    independent[0] = true;
    let mut best = 0;
    for s in 1usize..(1 << k) {
        let v = s.trailing_zeros() as usize;
        let rest = s & (s - 1);
        independent[s] = independent[rest] && (masks[v] & rest as u64) == 0;
        if independent[s] {
            best = best.max(s.count_ones() as usize);
        }
    }
    best
}

/// Conflict masks straight from out-neighbor lists: `a ~ b` iff `a → b` or `b → a`, `a ≠ b`.
pub fn conflict_masks_naive(out: &[Vec<usize>]) -> Vec<u64> {
    let k = out.len();
    (0..k)
        .map(|a| {
            (0..k)
                .filter(|&b| b != a && (out[a].contains(&b) || out[b].contains(&a)))
                .fold(0u64, |m, b| m | (1 << b))
        })
        .collect()
}

/// Per-context argmin of summed losses by direct enumeration over arms.
///
/// `losses[t][c][a]`; `contexts[t]` is the realized context of round `t`.
pub fn best_policy_brute(losses: &[Vec<Vec<f64>>], contexts: &[usize], num_contexts: usize) -> Vec<usize> {
    (0..num_contexts)
        .map(|c| {
            let rounds: Vec<usize> = (0..contexts.len()).filter(|&t| contexts[t] == c).collect();
            if rounds.is_empty() {
                return 0;
            }
            let k = losses[rounds[0]][c].len();
            let mut best = 0;
            let mut best_total = f64::INFINITY;
            for a in 0..k {
                let total: f64 = rounds.iter().map(|&t| losses[t][c][a]).sum();
                if total < best_total {
                    best_total = total;
                    best = a;
                }
            }
            best
        })
        .collect()
}

/// Ordinary least squares slope of `ys` on `xs`, computed from centered sums.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
