//! Node attacks: static hyperdegree-targeted removal and the dynamic
//! load-redistribution cascade.
//!
//! Every node starts with load `d^β` and capacity `(1 + α)·d^β`. A failed
//! node splits its current load evenly over the hyperedges that can still
//! carry it, and each such hyperedge splits its share evenly over its alive
//! members. Recipients pushed above capacity fail in turn. Failures are
//! processed from a FIFO queue; all increments caused by one failure are
//! computed against the state before that failure and applied together.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::hypergraph::{lcc_fraction, recompute_edge_liveness, ActivityMask, Hypergraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    /// Redundancy capacity ratio, `> 0`.
    pub alpha: f64,
    /// Load index.
    pub beta: f64,
}

impl Default for CascadeParams {
    fn default() -> Self {
        CascadeParams {
            alpha: 0.5,
            beta: 1.0,
        }
    }
}

impl CascadeParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidConfig(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidConfig(format!("beta must be finite, got {beta}")));
        }
        Ok(CascadeParams { alpha, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttackSpec {
    Static,
    Dynamic(CascadeParams),
}

impl AttackSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AttackSpec::Static => "static",
            AttackSpec::Dynamic(_) => "dynamic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeState {
    pub mask: ActivityMask,
    pub load: Vec<f64>,
    pub capacity: Vec<f64>,
    /// Non-latched hyperedges containing each node.
    pub live_edge_count: Vec<usize>,
    /// Alive members of each hyperedge.
    pub live_member_count: Vec<usize>,
    /// Failed nodes whose load has not been redistributed yet.
    pub pending: VecDeque<usize>,
    /// Every node in the order it was marked failed.
    pub failure_log: Vec<usize>,
}

/// Intact cascade state with `L_i = d_i^β` and `R_i = (1 + α) L_i`.
///
/// Isolated nodes carry no load.
pub fn init_cascade(h: &Hypergraph, params: &CascadeParams) -> CascadeState {
    let degrees = h.hyperdegrees();
    let load: Vec<f64> = degrees
        .iter()
        .map(|&d| if d == 0 { 0.0 } else { (d as f64).powf(params.beta) })
        .collect();
    let capacity = load.iter().map(|l| (1.0 + params.alpha) * l).collect();
    CascadeState {
        mask: ActivityMask::all_alive(h),
        load,
        capacity,
        live_edge_count: degrees,
        live_member_count: h.cardinalities(),
        pending: VecDeque::new(),
        failure_log: Vec::new(),
    }
}

impl CascadeState {
    /// Marks `v` failed and enqueues it. No-op for nodes already failed.
    pub fn mark_failed(&mut self, h: &Hypergraph, v: usize) {
        if !self.mask.node_alive[v] {
            return;
        }
        self.mask.node_alive[v] = false;
        for &e in &h.incidence_lists()[v] {
            self.live_member_count[e] -= 1;
        }
        self.pending.push_back(v);
        self.failure_log.push(v);
    }

    /// Redistributes the current load of the failed node `i`.
    ///
    /// Channels are the non-latched hyperedges of `i` that still have an
    /// alive member; with no channel the load is dropped. Afterwards every
    /// hyperedge of `i` left with at most one alive member is latched failed.
    pub fn fail_and_redistribute(&mut self, h: &Hypergraph, i: usize) {
        debug_assert!(!self.mask.node_alive[i]);
        let load = std::mem::take(&mut self.load[i]);
        let incident = &h.incidence_lists()[i];

        let channels = incident
            .iter()
            .filter(|&&e| !self.mask.edge_latched[e] && self.live_member_count[e] >= 1)
            .count();
        if channels > 0 && load != 0.0 {
            let per_edge = load / channels as f64;
            let mut received: Vec<(usize, f64)> = Vec::new();
            for &e in incident {
                if self.mask.edge_latched[e] || self.live_member_count[e] == 0 {
                    continue;
                }
                let delta = per_edge / self.live_member_count[e] as f64;
                for &j in &h.edges()[e] {
                    if self.mask.node_alive[j] {
                        received.push((j, delta));
                    }
                }
            }
            received.sort_by_key(|&(j, _)| j);
            let mut overloaded = Vec::new();
            for (j, delta) in received {
                self.load[j] += delta;
                if self.load[j] > self.capacity[j] && overloaded.last() != Some(&j) {
                    overloaded.push(j);
                }
            }
            for j in overloaded {
                self.mark_failed(h, j);
            }
        }

        for &e in incident {
            if !self.mask.edge_latched[e] && self.live_member_count[e] <= 1 {
                self.latch_edge(h, e);
            }
        }
    }

    fn latch_edge(&mut self, h: &Hypergraph, e: usize) {
        self.mask.edge_latched[e] = true;
        self.mask.edge_alive[e] = false;
        for &v in &h.edges()[e] {
            self.live_edge_count[v] -= 1;
        }
    }

    /// Processes the queue until it is empty.
    pub fn propagate(&mut self, h: &Hypergraph) {
        while let Some(i) = self.pending.pop_front() {
            self.fail_and_redistribute(h, i);
        }
    }

    /// Hyperdegree counting only currently alive hyperedges.
    pub fn current_hyperdegree(&self, h: &Hypergraph, v: usize) -> usize {
        h.incidence_lists()[v]
            .iter()
            .filter(|&&e| !self.mask.edge_latched[e] && self.live_member_count[e] >= 2)
            .count()
    }

    pub fn lcc_fraction(&self, h: &Hypergraph) -> f64 {
        lcc_fraction(h, &self.mask)
    }

    pub fn total_alive_load(&self) -> f64 {
        self.load
            .iter()
            .zip(&self.mask.node_alive)
            .filter(|(_, &alive)| alive)
            .map(|(l, _)| l)
            .sum()
    }
}

/// Attacks `attacked` (seeded in ascending id order) and runs the cascade
/// to quiescence on a fresh intact state.
pub fn run_cascade(h: &Hypergraph, attacked: &[usize], params: &CascadeParams) -> Result<CascadeState> {
    let mut seeds = attacked.to_vec();
    seeds.sort_unstable();
    seeds.dedup();
    if let Some(&id) = seeds.iter().find(|&&v| v >= h.num_nodes()) {
        return Err(Error::OutOfRangeId {
            id,
            num_nodes: h.num_nodes(),
        });
    }
    let mut state = init_cascade(h, params);
    for v in seeds {
        state.mark_failed(h, v);
    }
    state.propagate(h);
    state.mask = recompute_edge_liveness(h, state.mask);
    Ok(state)
}

/// All node ids by initial hyperdegree, highest first, ties by ascending id.
pub fn static_attack_order(h: &Hypergraph) -> Vec<usize> {
    let degrees = h.hyperdegrees();
    let mut order: Vec<usize> = (0..h.num_nodes()).collect();
    order.sort_by(|&a, &b| degrees[b].cmp(&degrees[a]).then(a.cmp(&b)));
    order
}

/// Sequential failure order under repeated targeted attacks with cascades.
///
/// Repeatedly attacks the alive node of highest current hyperdegree (ties by
/// lowest id) on one evolving state and appends it followed by the nodes its
/// cascade brought down, in failure order.
pub fn dynamic_failure_order(h: &Hypergraph, params: &CascadeParams) -> Vec<usize> {
    let mut state = init_cascade(h, params);
    while state.failure_log.len() < h.num_nodes() {
        let target = (0..h.num_nodes())
            .filter(|&v| state.mask.node_alive[v])
            .max_by(|&a, &b| {
                state
                    .current_hyperdegree(h, a)
                    .cmp(&state.current_hyperdegree(h, b))
                    .then(b.cmp(&a))
            })
            .expect("an alive node remains");
        state.mark_failed(h, target);
        state.propagate(h);
    }
    state.failure_log
}

pub fn validate_order(h: &Hypergraph, order: &[usize]) -> Result<()> {
    crate::hypergraph::check_bijection(order, h.num_nodes()).map_err(|_| Error::InvalidOrder)
}

/// Number of attacked nodes for attack fraction `rho`: `round(rho·N)` clamped to `[0, N]`.
pub fn attacked_count(num_nodes: usize, rho: f64) -> usize {
    let q = (rho * num_nodes as f64).round();
    if q.is_nan() || q <= 0.0 {
        0
    } else {
        (q as usize).min(num_nodes)
    }
}

/// LCC fraction after attacking the first `q` entries of `order`.
///
/// `order` must already be validated.
pub fn percolation_at_count(h: &Hypergraph, q: usize, attack: &AttackSpec, order: &[usize]) -> f64 {
    let attacked = &order[..q.min(order.len())];
    match attack {
        AttackSpec::Static => {
            let mask = ActivityMask::with_dead_nodes(h, attacked).expect("order validated");
            lcc_fraction(h, &mask)
        }
        AttackSpec::Dynamic(params) => run_cascade(h, attacked, params)
            .expect("order validated")
            .lcc_fraction(h),
    }
}

/// `s(rho)`: LCC fraction after attacking a fraction `rho` of the nodes.
pub fn percolation_sample(h: &Hypergraph, rho: f64, attack: &AttackSpec, order: &[usize]) -> Result<f64> {
    validate_order(h, order)?;
    Ok(percolation_at_count(h, attacked_count(h.num_nodes(), rho), attack, order))
}
