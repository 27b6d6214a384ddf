//! Partitioning Around Medoids.
//!
//! Steepest-descent swap search: every sweep evaluates all
//! (medoid, non-medoid) exchanges, applies the one with the most negative
//! cost change and stops when no exchange improves the clustering. The
//! cost is the sum of Euclidean distances from every node to its medoid.
//!
//! Initial medoids are drawn without replacement by a partial
//! Fisher-Yates shuffle driven by ChaCha8 seeded with [`PamConfig::seed`],
//! so a seed fully determines the run.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::{point_distance, Node, NodeId, Point};

#[derive(Debug, Error, PartialEq)]
pub enum PamError {
    #[error("medoid set is empty")]
    EmptyMedoids,
    #[error("medoid {0} is not a node of the input set")]
    UnknownMedoid(NodeId),
    #[error("medoid {0} listed twice")]
    DuplicateMedoid(NodeId),
    #[error("{0} is not a current medoid")]
    NotAMedoid(NodeId),
    #[error("{0} is already a medoid")]
    AlreadyMedoid(NodeId),
    #[error("node {0} is not in the input set")]
    UnknownNode(NodeId),
    #[error("k = {k} is invalid for {n} nodes")]
    InvalidK { k: usize, n: usize },
}

fn default_max_sweeps() -> usize {
    1000
}

fn default_matrix_threshold() -> usize {
    4096
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PamConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    /// Above this many nodes distances are computed on demand instead of
    /// being cached in an n×n matrix.
    #[serde(default = "default_matrix_threshold")]
    pub matrix_threshold: usize,
}

impl Default for PamConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            max_sweeps: default_max_sweeps(),
            matrix_threshold: default_matrix_threshold(),
        }
    }
}

/// Medoids, node membership and total distance cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Sorted ascending.
    pub medoid_ids: Vec<NodeId>,
    pub assignment: BTreeMap<NodeId, NodeId>,
    pub total_cost_m: f64,
}

impl Clustering {
    pub fn k(&self) -> usize {
        self.medoid_ids.len()
    }

    /// Member ids per medoid, in medoid order.
    pub fn members(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        let mut groups: BTreeMap<NodeId, Vec<NodeId>> =
            self.medoid_ids.iter().map(|&m| (m, Vec::new())).collect();
        for (&node, &medoid) in &self.assignment {
            groups.entry(medoid).or_default().push(node);
        }
        groups.into_iter().collect()
    }
}

/// Result of a PAM run together with its per-sweep history.
#[derive(Debug, Clone)]
pub struct PamRun {
    pub clustering: Clustering,
    /// Cost after initialization, then after each applied swap.
    pub sweep_costs: Vec<f64>,
    pub converged: bool,
}

/// Swaps must beat the current cost by this relative amount to count as
/// an improvement; below it the change is rounding noise.
pub const IMPROVEMENT_RTOL: f64 = 1e-12;

enum Distances {
    Matrix { n: usize, d: Vec<f64> },
    OnDemand(Vec<Point>),
}

impl Distances {
    fn new(points: Vec<Point>, threshold: usize) -> Self {
        let n = points.len();
        if n > threshold {
            return Distances::OnDemand(points);
        }
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = point_distance(points[i], points[j]);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Distances::Matrix { n, d }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            Distances::Matrix { n, d } => d[i * n + j],
            Distances::OnDemand(p) => point_distance(p[i], p[j]),
        }
    }
}

/// Working state over node indices; `medoids` is kept sorted by node id.
struct State<'a> {
    ids: &'a [NodeId],
    dist: &'a Distances,
    medoids: Vec<usize>,
    nearest: Vec<usize>,
    near_d: Vec<f64>,
    second_d: Vec<f64>,
    /// Position in `medoids` of each medoid node index.
    slot: Vec<usize>,
    cost: f64,
}

impl<'a> State<'a> {
    fn new(ids: &'a [NodeId], dist: &'a Distances, mut medoids: Vec<usize>) -> Self {
        medoids.sort_by_key(|&m| ids[m]);
        let n = ids.len();
        let mut s = State {
            ids,
            dist,
            medoids,
            nearest: vec![0; n],
            near_d: vec![0.0; n],
            second_d: vec![0.0; n],
            slot: vec![usize::MAX; n],
            cost: 0.0,
        };
        s.reassign();
        s
    }

    fn reassign(&mut self) {
        self.slot.fill(usize::MAX);
        for (pos, &m) in self.medoids.iter().enumerate() {
            self.slot[m] = pos;
        }
        let mut cost = 0.0;
        for j in 0..self.ids.len() {
            let (mut best, mut best_d, mut second) = (usize::MAX, f64::INFINITY, f64::INFINITY);
            // medoids are in id order, strict comparison keeps the lowest id on ties
            for &m in &self.medoids {
                let d = self.dist.get(j, m);
                if d < best_d {
                    second = best_d;
                    best = m;
                    best_d = d;
                } else if d < second {
                    second = d;
                }
            }
            self.nearest[j] = best;
            self.near_d[j] = best_d;
            self.second_d[j] = second;
            cost += best_d;
        }
        self.cost = cost;
    }

    /// Exact change in total cost if `out` is replaced by `candidate`.
    #[cfg(test)]
    fn delta(&self, out: usize, candidate: usize) -> f64 {
        let mut delta = 0.0;
        for j in 0..self.ids.len() {
            let dc = self.dist.get(j, candidate);
            let after = if self.nearest[j] == out {
                dc.min(self.second_d[j])
            } else {
                dc.min(self.near_d[j])
            };
            delta += after - self.near_d[j];
        }
        delta
    }

    fn is_medoid(&self, i: usize) -> bool {
        self.medoids.contains(&i)
    }

    /// Change in total cost of swapping `candidate` in for each medoid, in
    /// `self.medoids` order, from one pass over the nodes.
    ///
    /// Nodes not served by the removed medoid contribute `min(dc - near, 0)`
    /// whichever medoid leaves, so that part is shared; nodes of the removed
    /// medoid fall back to `min(dc, second)` instead.
    fn deltas_for(&self, candidate: usize) -> Vec<f64> {
        let k = self.medoids.len();
        let mut shared = 0.0;
        let mut own = vec![0.0; k];
        for j in 0..self.ids.len() {
            let dc = self.dist.get(j, candidate);
            let near = self.near_d[j];
            let gain = (dc - near).min(0.0);
            shared += gain;
            let slot = self.slot[self.nearest[j]];
            own[slot] += dc.min(self.second_d[j]) - near - gain;
        }
        own.into_iter().map(|o| shared + o).collect()
    }

    /// Most negative swap, ties to the smallest (out id, in id).
    fn best_swap(&self) -> Option<(f64, usize, usize)> {
        let n = self.ids.len();
        let candidates: Vec<usize> = (0..n).filter(|&c| !self.is_medoid(c)).collect();
        let eval = |&c: &usize| {
            self.deltas_for(c)
                .into_iter()
                .zip(&self.medoids)
                .map(|(d, &m)| (d, m, c))
                .reduce(|a, b| self.better(a, b))
        };
        // parallel only pays off once a sweep is a few million distance lookups
        if candidates.len() * n > 1_000_000 {
            candidates
                .par_iter()
                .filter_map(eval)
                .reduce_with(|a, b| self.better(a, b))
        } else {
            candidates
                .iter()
                .filter_map(eval)
                .reduce(|a, b| self.better(a, b))
        }
    }

    fn better(&self, a: (f64, usize, usize), b: (f64, usize, usize)) -> (f64, usize, usize) {
        let order =
            a.0.total_cmp(&b.0)
                .then(self.ids[a.1].cmp(&self.ids[b.1]))
                .then(self.ids[a.2].cmp(&self.ids[b.2]));
        if order.is_le() {
            a
        } else {
            b
        }
    }

    fn swap(&mut self, out: usize, candidate: usize) {
        let pos = self.medoids.iter().position(|&m| m == out).unwrap();
        self.medoids[pos] = candidate;
        let ids = self.ids;
        self.medoids.sort_by_key(|&m| ids[m]);
        self.reassign();
    }

    fn to_clustering(&self) -> Clustering {
        Clustering {
            medoid_ids: self.medoids.iter().map(|&m| self.ids[m]).collect(),
            assignment: (0..self.ids.len())
                .map(|j| (self.ids[j], self.ids[self.nearest[j]]))
                .collect(),
            total_cost_m: self.cost,
        }
    }
}

fn prepare(nodes: &[Node], threshold: usize) -> (Vec<NodeId>, Distances) {
    let ids = nodes.iter().map(|n| n.id).collect();
    let points = nodes.iter().map(Node::point).collect();
    (ids, Distances::new(points, threshold))
}

fn medoid_indices(nodes: &[Node], medoid_ids: &[NodeId]) -> Result<Vec<usize>, PamError> {
    if medoid_ids.is_empty() {
        return Err(PamError::EmptyMedoids);
    }
    let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, n)| (n.id, i)).collect();
    let mut out = Vec::with_capacity(medoid_ids.len());
    for id in medoid_ids {
        let i = *index.get(id).ok_or(PamError::UnknownMedoid(*id))?;
        if out.contains(&i) {
            return Err(PamError::DuplicateMedoid(*id));
        }
        out.push(i);
    }
    Ok(out)
}

/// Assign every node to its nearest medoid.
pub fn assign(nodes: &[Node], medoid_ids: &[NodeId]) -> Result<Clustering, PamError> {
    let medoids = medoid_indices(nodes, medoid_ids)?;
    let (ids, dist) = prepare(nodes, 0);
    Ok(State::new(&ids, &dist, medoids).to_clustering())
}

/// Cost after replacing `out_medoid` with `in_candidate` minus cost before,
/// both from a full reassignment. Negative values are improvements.
pub fn swap_cost(
    nodes: &[Node],
    current: &Clustering,
    out_medoid: NodeId,
    in_candidate: NodeId,
) -> Result<f64, PamError> {
    if !current.medoid_ids.contains(&out_medoid) {
        return Err(PamError::NotAMedoid(out_medoid));
    }
    if current.medoid_ids.contains(&in_candidate) {
        return Err(PamError::AlreadyMedoid(in_candidate));
    }
    if !nodes.iter().any(|n| n.id == in_candidate) {
        return Err(PamError::UnknownNode(in_candidate));
    }
    let before = assign(nodes, &current.medoid_ids)?;
    let swapped: Vec<NodeId> = current
        .medoid_ids
        .iter()
        .map(|&m| if m == out_medoid { in_candidate } else { m })
        .collect();
    let after = assign(nodes, &swapped)?;
    Ok(after.total_cost_m - before.total_cost_m)
}

fn initial_medoids(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// Cluster `nodes` into `k` groups.
pub fn pam(nodes: &[Node], k: usize, cfg: &PamConfig) -> Result<Clustering, PamError> {
    pam_traced(nodes, k, cfg).map(|run| run.clustering)
}

/// [`pam`] with the cost history of every sweep.
pub fn pam_traced(nodes: &[Node], k: usize, cfg: &PamConfig) -> Result<PamRun, PamError> {
    let n = nodes.len();
    if k < 1 || k > n {
        return Err(PamError::InvalidK { k, n });
    }
    let (ids, dist) = prepare(nodes, cfg.matrix_threshold);
    let mut state = State::new(&ids, &dist, initial_medoids(n, k, cfg.seed));
    let mut sweep_costs = vec![state.cost];
    let mut converged = false;
    for _ in 0..cfg.max_sweeps.max(1) {
        match state.best_swap() {
            Some((delta, out, c)) if delta < -IMPROVEMENT_RTOL * state.cost => {
                state.swap(out, c);
                sweep_costs.push(state.cost);
            }
            _ => {
                converged = true;
                break;
            }
        }
    }
    Ok(PamRun {
        clustering: state.to_clustering(),
        sweep_costs,
        converged,
    })
}
