//! Feedback graphs over arms.
//!
//! Playing arm `a` reveals the losses of every arm in `out_neighbors(a)`.
//! Membership is purely edge-determined: `a ∈ out_neighbors(a)` iff `a`
//! has a self-loop. All generators put a self-loop on every arm.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::sim_rng;
use crate::simplex::SimplexVector;
use crate::{Error, Result};

/// Largest arm count accepted by [`independence_number`].
pub const MAX_EXACT_ARMS: usize = 64;

/// Directed feedback graph with cached independence number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackGraph {
    out_neighbors: Vec<Vec<usize>>,
    in_neighbors: Vec<Vec<usize>>,
    alpha: usize,
    strongly_observable: bool,
}

impl FeedbackGraph {
    /// Builds a graph from per-arm out-neighbor lists, computing `alpha` exactly.
    ///
    /// Lists are sorted and deduplicated. Self-loops are not required here;
    /// [`build_graph`] enforces them.
    pub fn from_out_neighbors(out: Vec<Vec<usize>>) -> Result<Self> {
        let out = normalize(out)?;
        let alpha = independence_number(&out)?;
        Ok(Self::assemble(out, alpha))
    }

    /// Builds a graph whose independence number is known by construction.
    ///
    /// Used for families above [`MAX_EXACT_ARMS`]; the caller is trusted.
    pub fn with_known_alpha(out: Vec<Vec<usize>>, alpha: usize) -> Result<Self> {
        let out = normalize(out)?;
        if alpha == 0 || alpha > out.len() {
            return Err(Error::Params(format!(
                "independence number {alpha} outside [1, {}]",
                out.len()
            )));
        }
        Ok(Self::assemble(out, alpha))
    }

    fn assemble(out: Vec<Vec<usize>>, alpha: usize) -> Self {
        let k = out.len();
        let mut incoming = vec![Vec::new(); k];
        for (a, targets) in out.iter().enumerate() {
            for &b in targets {
                incoming[b].push(a);
            }
        }
        let strongly_observable = strongly_observable(&out, &incoming);
        Self {
            out_neighbors: out,
            in_neighbors: incoming,
            alpha,
            strongly_observable,
        }
    }

    pub fn num_arms(&self) -> usize {
        self.out_neighbors.len()
    }

    pub fn out_neighbors(&self, arm: usize) -> &[usize] {
        &self.out_neighbors[arm]
    }

    pub fn in_neighbors(&self, arm: usize) -> &[usize] {
        &self.in_neighbors[arm]
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn is_strongly_observable(&self) -> bool {
        self.strongly_observable
    }

    pub fn has_self_loop(&self, arm: usize) -> bool {
        self.out_neighbors[arm].binary_search(&arm).is_ok()
    }

    pub fn has_all_self_loops(&self) -> bool {
        (0..self.num_arms()).all(|a| self.has_self_loop(a))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.out_neighbors[from].binary_search(&to).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.out_neighbors.iter().map(Vec::len).sum()
    }

    /// `p(N_in(arm))`: the probability of observing `arm` when playing from `p`.
    pub fn neighborhood_mass(&self, p: &SimplexVector, arm: usize) -> Result<f64> {
        if p.len() != self.num_arms() {
            return Err(Error::DimensionMismatch {
                expected: self.num_arms(),
                actual: p.len(),
            });
        }
        if arm >= self.num_arms() {
            return Err(Error::ArmOutOfRange {
                arm,
                num_arms: self.num_arms(),
            });
        }
        Ok(self.in_mass(p.as_slice(), arm))
    }

    /// Unchecked `Σ_{a' ∈ N_in(arm)} weights(a')`.
    #[inline]
    pub fn in_mass(&self, weights: &[f64], arm: usize) -> f64 {
        self.in_neighbors[arm].iter().map(|&b| weights[b]).sum()
    }

    /// In-neighborhood masses for every arm.
    pub fn in_masses(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.num_arms()).map(|a| self.in_mass(weights, a)).collect()
    }

    /// Symmetric conflict masks (`a ~ b` iff an edge joins them in either direction).
    pub fn conflict_masks(&self) -> Result<Vec<u64>> {
        conflict_masks(&self.out_neighbors)
    }

    /// Adjacency in the custom-file format: line `i` lists the out-neighbors of arm `i`.
    pub fn to_adjacency_text(&self) -> String {
        let mut s = String::new();
        for targets in &self.out_neighbors {
            let line: Vec<String> = targets.iter().map(usize::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

fn normalize(mut out: Vec<Vec<usize>>) -> Result<Vec<Vec<usize>>> {
    let k = out.len();
    if k == 0 {
        return Err(Error::EmptyGraph);
    }
    for targets in &mut out {
        if let Some(&bad) = targets.iter().find(|&&b| b >= k) {
            return Err(Error::ArmOutOfRange {
                arm: bad,
                num_arms: k,
            });
        }
        targets.sort_unstable();
        targets.dedup();
    }
    Ok(out)
}

/// Every arm has a self-loop, or is observed by every other arm.
fn strongly_observable(out: &[Vec<usize>], incoming: &[Vec<usize>]) -> bool {
    let k = out.len();
    (0..k).all(|a| {
        let ins = &incoming[a];
        ins.binary_search(&a).is_ok() || (0..k).filter(|&b| b != a).all(|b| ins.contains(&b))
    })
}

/// Whether `graph` satisfies the strong-observability condition.
pub fn is_strongly_observable(graph: &FeedbackGraph) -> bool {
    strongly_observable(&graph.out_neighbors, &graph.in_neighbors)
}

fn conflict_masks(out: &[Vec<usize>]) -> Result<Vec<u64>> {
    let k = out.len();
    if k > MAX_EXACT_ARMS {
        return Err(Error::IndependenceBudget {
            num_arms: k,
            max: MAX_EXACT_ARMS,
        });
    }
    let mut masks = vec![0u64; k];
    for (a, targets) in out.iter().enumerate() {
        for &b in targets {
            if a != b {
                masks[a] |= 1 << b;
                masks[b] |= 1 << a;
            }
        }
    }
    Ok(masks)
}

/// Exact independence number by branch and bound.
///
/// Two arms conflict when an edge joins them in either direction. The bound
/// at each node is a greedy clique cover of the remaining candidates: an
/// independent set takes at most one arm from each clique.
pub fn independence_number(out: &[Vec<usize>]) -> Result<usize> {
    if out.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let masks = conflict_masks(out)?;
    let all = if out.len() == 64 {
        u64::MAX
    } else {
        (1u64 << out.len()) - 1
    };
    let mut best = 0;
    branch(&masks, all, 0, &mut best);
    Ok(best)
}

fn branch(masks: &[u64], candidates: u64, size: usize, best: &mut usize) {
    if candidates == 0 {
        *best = (*best).max(size);
        return;
    }
    if size + clique_cover_bound(masks, candidates) <= *best {
        return;
    }
    // Pick the candidate with the most conflicts among the candidates.
    let mut pivot = 0;
    let mut pivot_degree = 0;
    let mut rest = candidates;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let d = (masks[v] & candidates).count_ones();
        if d >= pivot_degree {
            pivot_degree = d;
            pivot = v;
        }
    }
    if pivot_degree == 0 {
        *best = (*best).max(size + candidates.count_ones() as usize);
        return;
    }
    let bit = 1u64 << pivot;
    branch(masks, candidates & !bit & !masks[pivot], size + 1, best);
    branch(masks, candidates & !bit, size, best);
}

fn clique_cover_bound(masks: &[u64], candidates: u64) -> usize {
    // Each clique is stored as the intersection of its members' neighborhoods
    // so membership tests are one AND.
    let mut cliques: Vec<u64> = Vec::new();
    let mut rest = candidates;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let bit = 1u64 << v;
        match cliques.iter_mut().find(|common| **common & bit != 0) {
            Some(common) => *common &= masks[v],
            None => cliques.push(masks[v]),
        }
    }
    cliques.len()
}

/// Graph families used in experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    CompleteWithSelfLoops { num_arms: usize },
    SelfLoopsOnly { num_arms: usize },
    DisjointCliques { sizes: Vec<usize> },
    ErdosRenyi { num_arms: usize, edge_prob: f64 },
    /// `b → b'` iff `b' ≥ b`: winning at a bid implies winning at every higher bid.
    OrderedTriangular { num_arms: usize },
    Custom { path: PathBuf },
}

impl GraphSpec {
    /// `count` equal cliques over `num_arms` arms (`num_arms` must divide evenly).
    pub fn equal_cliques(num_arms: usize, count: usize) -> Result<Self> {
        if count == 0 || num_arms % count != 0 {
            return Err(Error::GraphSpec(format!(
                "{num_arms} arms cannot be split into {count} equal cliques"
            )));
        }
        Ok(Self::DisjointCliques {
            sizes: vec![num_arms / count; count],
        })
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::CompleteWithSelfLoops { num_arms } => write!(f, "complete:{num_arms}"),
            Self::SelfLoopsOnly { num_arms } => write!(f, "loops:{num_arms}"),
            Self::DisjointCliques { sizes } => {
                let parts: Vec<String> = sizes.iter().map(usize::to_string).collect();
                write!(f, "cliques:{}", parts.join(","))
            }
            Self::ErdosRenyi {
                num_arms,
                edge_prob,
            } => write!(f, "er:{num_arms}:{edge_prob}"),
            Self::OrderedTriangular { num_arms } => write!(f, "triangular:{num_arms}"),
            Self::Custom { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// Compact spec syntax used by the CLI:
/// `complete:K`, `loops:K`, `cliques:NxS` (N cliques of size S),
/// `cliques:s1,s2,...`, `er:K:p`, `triangular:K`, `file:PATH`.
impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::GraphSpec(s.to_string());
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        let int = |x: &str| x.trim().parse::<usize>().map_err(|_| bad());
        Ok(match kind {
            "complete" => Self::CompleteWithSelfLoops { num_arms: int(rest)? },
            "loops" => Self::SelfLoopsOnly { num_arms: int(rest)? },
            "triangular" => Self::OrderedTriangular { num_arms: int(rest)? },
            "cliques" => {
                if let Some((n, size)) = rest.split_once('x') {
                    Self::DisjointCliques {
                        sizes: vec![int(size)?; int(n)?],
                    }
                } else {
                    Self::DisjointCliques {
                        sizes: rest.split(',').map(int).collect::<Result<_>>()?,
                    }
                }
            }
            "er" => {
                let (k, p) = rest.split_once(':').ok_or_else(bad)?;
                Self::ErdosRenyi {
                    num_arms: int(k)?,
                    edge_prob: p.trim().parse().map_err(|_| bad())?,
                }
            }
            "file" => Self::Custom {
                path: PathBuf::from(rest),
            },
            _ => return Err(bad()),
        })
    }
}

/// Builds the graph described by `spec`; deterministic in `(spec, seed)`.
pub fn build_graph(spec: &GraphSpec, seed: u64) -> Result<FeedbackGraph> {
    let graph = match spec {
        GraphSpec::CompleteWithSelfLoops { num_arms } => {
            let k = nonzero(*num_arms)?;
            FeedbackGraph::with_known_alpha(vec![(0..k).collect(); k], 1)?
        }
        GraphSpec::SelfLoopsOnly { num_arms } => {
            let k = nonzero(*num_arms)?;
            FeedbackGraph::with_known_alpha((0..k).map(|a| vec![a]).collect(), k)?
        }
        GraphSpec::DisjointCliques { sizes } => {
            if sizes.contains(&0) {
                return Err(Error::GraphSpec("clique of size zero".into()));
            }
            let k = nonzero(sizes.iter().sum())?;
            let mut out = vec![Vec::new(); k];
            let mut start = 0;
            for &size in sizes {
                for a in start..start + size {
                    out[a] = (start..start + size).collect();
                }
                start += size;
            }
            FeedbackGraph::with_known_alpha(out, sizes.len())?
        }
        GraphSpec::ErdosRenyi {
            num_arms,
            edge_prob,
        } => {
            let k = nonzero(*num_arms)?;
            if !(0.0..=1.0).contains(edge_prob) {
                return Err(Error::GraphSpec(format!("edge probability {edge_prob}")));
            }
            let mut rng = sim_rng(seed);
            let out = (0..k)
                .map(|a| {
                    (0..k)
                        .filter(|&b| b == a || rng.gen::<f64>() < *edge_prob)
                        .collect()
                })
                .collect();
            FeedbackGraph::from_out_neighbors(out)?
        }
        GraphSpec::OrderedTriangular { num_arms } => {
            let k = nonzero(*num_arms)?;
            FeedbackGraph::with_known_alpha((0..k).map(|a| (a..k).collect()).collect(), 1)?
        }
        GraphSpec::Custom { path } => {
            let graph = read_adjacency(path)?;
            if let Some(a) = (0..graph.num_arms()).find(|&a| !graph.has_self_loop(a)) {
                return Err(Error::MissingSelfLoop(a));
            }
            graph
        }
    };
    Ok(graph)
}

fn nonzero(k: usize) -> Result<usize> {
    if k == 0 {
        Err(Error::EmptyGraph)
    } else {
        Ok(k)
    }
}

/// Parses the plain-text adjacency format (line `i` = out-neighbors of arm `i`).
pub fn parse_adjacency(text: &str) -> Result<FeedbackGraph> {
    let out = text
        .lines()
        .map(|line| {
            line.split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>()
                        .map_err(|_| Error::GraphSpec(format!("bad arm index `{tok}`")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    FeedbackGraph::from_out_neighbors(out)
}

pub fn read_adjacency(path: &Path) -> Result<FeedbackGraph> {
    parse_adjacency(&std::fs::read_to_string(path)?)
}
