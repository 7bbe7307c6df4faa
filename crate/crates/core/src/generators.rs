//! Seeded synthetic hypergraph families.
//!
//! All randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`), a
//! counter-based generator with a fixed, platform-independent output stream.
//! Attempt `i` of a generation uses stream `i` of the generator seeded with
//! the configured seed, so retries never reuse randomness.
//!
//! Edge counts for the probability-parameterised families match the pairwise
//! density of the clique expansion: a graph with connection probability `p`
//! has `p·C(n,2)` pairs in expectation, and a hyperedge of mean cardinality
//! `k̄` covers about `k̄(k̄−1)/2` of them, so
//! `M = round(p·C(n,2)·2 / (k̄(k̄−1)))`.
//!
//! Emitted hypergraphs are connected. ER, SBM and UF join leftover components
//! with bridging hyperedges drawn from the family's cardinality law; WS
//! retries instead, and SF is connected by construction.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{components_within, Hypergraph};

pub const MAX_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "ER")]
    Er,
    #[serde(rename = "WS")]
    Ws,
    #[serde(rename = "SF")]
    Sf,
    #[serde(rename = "SBM")]
    Sbm,
    #[serde(rename = "UF")]
    Uf,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::Er, Family::Ws, Family::Sf, Family::Sbm, Family::Uf];

    pub fn name(self) -> &'static str {
        match self {
            Family::Er => "ER",
            Family::Ws => "WS",
            Family::Sf => "SF",
            Family::Sbm => "SBM",
            Family::Uf => "UF",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown family {s:?}")))
    }
}

/// Inclusive range hyperedge sizes are drawn from uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityRange {
    pub min: usize,
    pub max: usize,
}

impl Default for CardinalityRange {
    fn default() -> Self {
        CardinalityRange { min: 2, max: 5 }
    }
}

impl CardinalityRange {
    pub fn fixed(k: usize) -> Self {
        CardinalityRange { min: k, max: k }
    }

    pub fn mean(&self) -> f64 {
        (self.min + self.max) as f64 / 2.0
    }

    fn validate(&self) -> Result<()> {
        if self.min < 2 || self.max < self.min {
            return Err(Error::InvalidConfig(format!(
                "cardinality range {}..={} must satisfy 2 <= min <= max",
                self.min, self.max
            )));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng, available: usize) -> usize {
        rng.gen_range(self.min..=self.max).min(available)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum FamilyParams {
    #[serde(rename = "ER")]
    Er { p: f64, cardinality: CardinalityRange },
    #[serde(rename = "WS")]
    Ws { k_nn: usize, p_rw: f64 },
    #[serde(rename = "SF")]
    Sf { m: usize, cardinality: CardinalityRange },
    #[serde(rename = "SBM")]
    Sbm {
        communities: usize,
        p_in: f64,
        p_out: f64,
        cardinality: CardinalityRange,
    },
    #[serde(rename = "UF")]
    Uf { p: f64, k: usize },
}

impl FamilyParams {
    pub fn defaults(family: Family) -> Self {
        let cardinality = CardinalityRange::default();
        match family {
            Family::Er => FamilyParams::Er { p: 0.05, cardinality },
            Family::Ws => FamilyParams::Ws { k_nn: 10, p_rw: 0.5 },
            Family::Sf => FamilyParams::Sf { m: 5, cardinality },
            Family::Sbm => FamilyParams::Sbm {
                communities: 5,
                p_in: 0.1,
                p_out: 0.01,
                cardinality,
            },
            Family::Uf => FamilyParams::Uf { p: 0.05, k: 5 },
        }
    }

    pub fn family(&self) -> Family {
        match self {
            FamilyParams::Er { .. } => Family::Er,
            FamilyParams::Ws { .. } => Family::Ws,
            FamilyParams::Sf { .. } => Family::Sf,
            FamilyParams::Sbm { .. } => Family::Sbm,
            FamilyParams::Uf { .. } => Family::Uf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub num_nodes: usize,
    pub seed: u64,
    pub params: FamilyParams,
}

impl GeneratorConfig {
    pub fn new(family: Family, num_nodes: usize, seed: u64) -> Self {
        GeneratorConfig {
            num_nodes,
            seed,
            params: FamilyParams::defaults(family),
        }
    }

    pub fn family(&self) -> Family {
        self.params.family()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes;
        if n < 1 {
            return Err(Error::InvalidConfig("num_nodes must be >= 1".into()));
        }
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {p} is not a probability")))
            }
        };
        match self.params {
            FamilyParams::Er { p, cardinality } => {
                prob("p", p)?;
                cardinality.validate()
            }
            FamilyParams::Ws { k_nn, p_rw } => {
                prob("p_rw", p_rw)?;
                if k_nn < 2 || k_nn % 2 != 0 || k_nn >= n {
                    return Err(Error::InvalidConfig(format!(
                        "k_nn = {k_nn} must be even, >= 2 and < num_nodes = {n}"
                    )));
                }
                Ok(())
            }
            FamilyParams::Sf { m, cardinality } => {
                cardinality.validate()?;
                if m < 1 || n < m.max(2) {
                    return Err(Error::InvalidConfig(format!("m = {m} needs 1 <= m and max(m, 2) <= num_nodes")));
                }
                Ok(())
            }
            FamilyParams::Sbm {
                communities,
                p_in,
                p_out,
                cardinality,
            } => {
                prob("p_in", p_in)?;
                prob("p_out", p_out)?;
                cardinality.validate()?;
                if communities < 1 || communities > n {
                    return Err(Error::InvalidConfig(format!(
                        "communities = {communities} must be in 1..={n}"
                    )));
                }
                Ok(())
            }
            FamilyParams::Uf { p, k } => {
                prob("p", p)?;
                if k < 2 || k > n {
                    return Err(Error::InvalidConfig(format!("k = {k} must satisfy 2 <= k <= num_nodes = {n}")));
                }
                Ok(())
            }
        }
    }

    pub fn generate(&self) -> Result<Hypergraph> {
        self.validate()?;
        let n = self.num_nodes;
        with_retries(self.seed, n, |rng| match self.params {
            FamilyParams::Er { p, cardinality } => er_attempt(n, p, cardinality, rng),
            FamilyParams::Ws { k_nn, p_rw } => Ok(Some(ws_attempt(n, k_nn, p_rw, rng))),
            FamilyParams::Sf { m, cardinality } => Ok(Some(sf_attempt(n, m, cardinality, rng))),
            FamilyParams::Sbm {
                communities,
                p_in,
                p_out,
                cardinality,
            } => sbm_attempt(n, communities, p_in, p_out, cardinality, rng, true),
            FamilyParams::Uf { p, k } => er_attempt(n, p, CardinalityRange::fixed(k), rng),
        })
    }
}

pub fn gen_er(num_nodes: usize, p: f64, cardinality: CardinalityRange, seed: u64) -> Result<Hypergraph> {
    GeneratorConfig {
        num_nodes,
        seed,
        params: FamilyParams::Er { p, cardinality },
    }
    .generate()
}

pub fn gen_ws(num_nodes: usize, k_nn: usize, p_rw: f64, seed: u64) -> Result<Hypergraph> {
    GeneratorConfig {
        num_nodes,
        seed,
        params: FamilyParams::Ws { k_nn, p_rw },
    }
    .generate()
}

pub fn gen_sf(num_nodes: usize, m: usize, cardinality: CardinalityRange, seed: u64) -> Result<Hypergraph> {
    GeneratorConfig {
        num_nodes,
        seed,
        params: FamilyParams::Sf { m, cardinality },
    }
    .generate()
}

pub fn gen_sbm(
    num_nodes: usize,
    communities: usize,
    p_in: f64,
    p_out: f64,
    cardinality: CardinalityRange,
    seed: u64,
) -> Result<Hypergraph> {
    GeneratorConfig {
        num_nodes,
        seed,
        params: FamilyParams::Sbm {
            communities,
            p_in,
            p_out,
            cardinality,
        },
    }
    .generate()
}

pub fn gen_uf(num_nodes: usize, p: f64, k: usize, seed: u64) -> Result<Hypergraph> {
    GeneratorConfig {
        num_nodes,
        seed,
        params: FamilyParams::Uf { p, k },
    }
    .generate()
}

/// `round(p·C(n,2)·2 / (k̄(k̄−1)))`.
pub fn density_matched_edge_count(n: usize, p: f64, mean_cardinality: f64) -> usize {
    let pairs = (n * n.saturating_sub(1)) as f64 / 2.0;
    (p * pairs * 2.0 / (mean_cardinality * (mean_cardinality - 1.0))).round() as usize
}

/// Community index of every node: contiguous blocks of near-equal size.
pub fn community_of(num_nodes: usize, communities: usize) -> Vec<usize> {
    (0..num_nodes).map(|v| v * communities / num_nodes).collect()
}

fn attempt_rng(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// Runs `attempt` on fresh streams until it yields a connected hypergraph.
/// `Ok(None)` marks an attempt that produced nothing usable.
fn with_retries<F>(seed: u64, n: usize, mut attempt: F) -> Result<Hypergraph>
where
    F: FnMut(&mut ChaCha8Rng) -> Result<Option<Vec<Vec<usize>>>>,
{
    for i in 0..MAX_ATTEMPTS {
        let mut rng = attempt_rng(seed, i);
        if let Some(edges) = attempt(&mut rng)? {
            let h = Hypergraph::from_canonical(n, edges);
            if h.is_connected() {
                return Ok(h);
            }
        }
    }
    Err(Error::DisconnectedRetryExceeded { attempts: MAX_ATTEMPTS })
}

fn distinct_edge_capacity(n: usize, card: CardinalityRange) -> f64 {
    let binom = |n: usize, k: usize| -> f64 {
        if k > n {
            return 0.0;
        }
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    };
    (card.min..=card.max).map(|k| binom(n, k)).sum()
}

/// Appends `target` new distinct hyperedges drawn uniformly inside `universe`.
fn sample_uniform_edges(
    universe: &[usize],
    target: usize,
    card: CardinalityRange,
    rng: &mut ChaCha8Rng,
    seen: &mut HashSet<Vec<usize>>,
    edges: &mut Vec<Vec<usize>>,
) -> Result<()> {
    let n = universe.len();
    if target == 0 {
        return Ok(());
    }
    if n < 2 || (target as f64) > distinct_edge_capacity(n, card) {
        return Err(Error::InvalidConfig(format!(
            "{target} distinct hyperedges do not fit on {n} nodes"
        )));
    }
    let mut added = 0;
    while added < target {
        let k = card.draw(rng, n);
        let mut members: Vec<usize> = index::sample(rng, n, k).into_iter().map(|i| universe[i]).collect();
        members.sort_unstable();
        if seen.insert(members.clone()) {
            edges.push(members);
            added += 1;
        }
    }
    Ok(())
}

/// Joins the components of `universe` with bridging hyperedges until it is
/// connected. Each bridge holds one node of the second component, one node
/// outside it, and uniform fill from the rest of the universe.
fn bridge_components(
    num_nodes: usize,
    universe: &[usize],
    card: CardinalityRange,
    rng: &mut ChaCha8Rng,
    seen: &mut HashSet<Vec<usize>>,
    edges: &mut Vec<Vec<usize>>,
) {
    loop {
        let components = components_within(num_nodes, edges, universe);
        if components.len() <= 1 {
            return;
        }
        let inside = &components[1];
        let outside: Vec<usize> = components
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != 1)
            .flat_map(|(_, comp)| comp.iter().copied())
            .collect();
        let a = inside[rng.gen_range(0..inside.len())];
        let b = outside[rng.gen_range(0..outside.len())];
        let k = card.draw(rng, universe.len());
        let rest: Vec<usize> = universe.iter().copied().filter(|&v| v != a && v != b).collect();
        let mut members = vec![a, b];
        members.extend(index::sample(rng, rest.len(), k - 2).into_iter().map(|i| rest[i]));
        members.sort_unstable();
        seen.insert(members.clone());
        edges.push(members);
    }
}

fn er_attempt(
    n: usize,
    p: f64,
    card: CardinalityRange,
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<Vec<usize>>>> {
    let universe: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    if !density_block(n, &universe, p, card, rng, &mut seen, &mut edges)? {
        return Ok(None);
    }
    Ok(Some(edges))
}

/// Density-matched sampling plus bridging inside one block. Returns false
/// when the block needs edges but the density rule yields none.
fn density_block(
    num_nodes: usize,
    universe: &[usize],
    p: f64,
    card: CardinalityRange,
    rng: &mut ChaCha8Rng,
    seen: &mut HashSet<Vec<usize>>,
    edges: &mut Vec<Vec<usize>>,
) -> Result<bool> {
    let target = density_matched_edge_count(universe.len(), p, card.mean());
    if target == 0 {
        return Ok(universe.len() <= 1);
    }
    sample_uniform_edges(universe, target, card, rng, seen, edges)?;
    bridge_components(num_nodes, universe, card, rng, seen, edges);
    Ok(true)
}

const DUPLICATE_REDRAWS: usize = 10;

fn ws_attempt(n: usize, k_nn: usize, p_rw: f64, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let half = k_nn / 2;
    let mut seen = HashSet::new();
    let mut edges = Vec::with_capacity(n);
    for anchor in 0..n {
        let lattice: Vec<usize> = (0..=half).map(|j| (anchor + j) % n).collect();
        let mut chosen = lattice.clone();
        for _ in 0..DUPLICATE_REDRAWS {
            let mut members = lattice.clone();
            for slot in 1..members.len() {
                if rng.gen::<f64>() < p_rw {
                    members[slot] = usize::MAX;
                    let mut fresh = rng.gen_range(0..n);
                    while members.contains(&fresh) {
                        fresh = rng.gen_range(0..n);
                    }
                    members[slot] = fresh;
                }
            }
            members.sort_unstable();
            chosen = members;
            if !seen.contains(&chosen) {
                break;
            }
        }
        seen.insert(chosen.clone());
        edges.push(chosen);
    }
    edges
}

fn sf_attempt(n: usize, m: usize, card: CardinalityRange, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let seed_size = m.max(2);
    let mut degree = vec![0usize; n];
    let mut edges = vec![(0..seed_size).collect::<Vec<_>>()];
    for d in degree.iter_mut().take(seed_size) {
        *d += 1;
    }
    for newcomer in seed_size..n {
        let mut own: HashSet<Vec<usize>> = HashSet::new();
        for _ in 0..m {
            let mut members = Vec::new();
            for _ in 0..DUPLICATE_REDRAWS {
                let k = card.draw(rng, newcomer + 1);
                members = preferential_pick(&degree[..newcomer], k - 1, rng);
                members.push(newcomer);
                members.sort_unstable();
                if !own.contains(&members) {
                    break;
                }
            }
            for &v in &members {
                degree[v] += 1;
            }
            own.insert(members.clone());
            edges.push(members);
        }
    }
    edges
}

/// `count` distinct indices drawn with probability proportional to `degree + 1`.
fn preferential_pick(degree: &[usize], count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::with_capacity(count);
    let mut total: usize = degree.iter().map(|d| d + 1).sum();
    for _ in 0..count {
        let mut ticket = rng.gen_range(0..total);
        let mut choice = 0;
        for (v, d) in degree.iter().enumerate() {
            if picked.contains(&v) {
                continue;
            }
            if ticket <= *d {
                choice = v;
                break;
            }
            ticket -= d + 1;
        }
        total -= degree[choice] + 1;
        picked.push(choice);
    }
    picked
}

fn sbm_attempt(
    n: usize,
    communities: usize,
    p_in: f64,
    p_out: f64,
    card: CardinalityRange,
    rng: &mut ChaCha8Rng,
    bridge_globally: bool,
) -> Result<Option<Vec<Vec<usize>>>> {
    let block = community_of(n, communities);
    let members_of: Vec<Vec<usize>> = (0..communities)
        .map(|c| (0..n).filter(|&v| block[v] == c).collect())
        .collect();
    let mut seen = HashSet::new();
    let mut edges = Vec::new();
    for nodes in &members_of {
        if !density_block(n, nodes, p_in, card, rng, &mut seen, &mut edges)? {
            return Ok(None);
        }
    }

    let intra_pairs: usize = members_of.iter().map(|b| b.len() * b.len().saturating_sub(1) / 2).sum();
    let cross_pairs = n * (n - 1) / 2 - intra_pairs;
    let cross_target = (p_out * cross_pairs as f64 * 2.0 / (card.mean() * (card.mean() - 1.0))).round() as usize;
    let mut added = 0;
    let mut draws = 0;
    while added < cross_target {
        draws += 1;
        if draws > 1000 * cross_target {
            return Err(Error::InvalidConfig("cannot place inter-community hyperedges".into()));
        }
        let a = rng.gen_range(0..communities);
        let mut b = rng.gen_range(0..communities - 1);
        if b >= a {
            b += 1;
        }
        let pool: Vec<usize> = members_of[a].iter().chain(&members_of[b]).copied().collect();
        let k = card.draw(rng, pool.len());
        let first = members_of[a][rng.gen_range(0..members_of[a].len())];
        let second = members_of[b][rng.gen_range(0..members_of[b].len())];
        let rest: Vec<usize> = pool.into_iter().filter(|&v| v != first && v != second).collect();
        let mut members = vec![first, second];
        members.extend(index::sample(rng, rest.len(), k - 2).into_iter().map(|i| rest[i]));
        members.sort_unstable();
        if seen.insert(members.clone()) {
            edges.push(members);
            added += 1;
        }
    }

    if bridge_globally && p_out > 0.0 {
        let universe: Vec<usize> = (0..n).collect();
        bridge_components(n, &universe, card, rng, &mut seen, &mut edges);
    }
    Ok(Some(edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::static_attack_order;

    fn pair_density(h: &Hypergraph, keep: impl Fn(usize, usize) -> bool) -> (usize, usize) {
        let n = h.num_nodes();
        let mut covered = vec![false; n * n];
        for e in h.edges() {
            for (i, &u) in e.iter().enumerate() {
                for &v in &e[i + 1..] {
                    covered[u * n + v] = true;
                }
            }
        }
        let mut hit = 0;
        let mut total = 0;
        for u in 0..n {
            for v in u + 1..n {
                if keep(u, v) {
                    total += 1;
                    hit += covered[u * n + v] as usize;
                }
            }
        }
        (hit, total)
    }

    fn assert_valid(h: &Hypergraph) {
        assert!(h.is_connected());
        for e in h.edges() {
            assert!(e.len() >= 2);
            assert!(e.windows(2).all(|w| w[0] < w[1]));
            assert!(*e.last().unwrap() < h.num_nodes());
        }
    }

    #[test]
    fn er_edge_count_and_density() {
        assert_eq!(density_matched_edge_count(200, 0.05, 3.5), 227);
        let card = CardinalityRange::default();
        let mut density = 0.0;
        for seed in 0..100 {
            let h = gen_er(200, 0.05, card, seed).unwrap();
            assert_valid(&h);
            assert!(h.num_edges() >= 227);
            let (hit, total) = pair_density(&h, |_, _| true);
            density += hit as f64 / total as f64;
        }
        density /= 100.0;
        assert!((density - 0.05).abs() <= 0.2 * 0.05, "density {density}");
    }

    #[test]
    fn er_complete_pairs() {
        let h = gen_er(5, 1.0, CardinalityRange::fixed(2), 3).unwrap();
        assert_eq!(h.num_edges(), 10);
        assert_eq!(pair_density(&h, |_, _| true), (10, 10));
    }

    #[test]
    fn er_without_edges_cannot_connect() {
        assert_eq!(
            gen_er(3, 0.0, CardinalityRange::default(), 1),
            Err(Error::DisconnectedRetryExceeded { attempts: MAX_ATTEMPTS })
        );
        assert!(matches!(
            gen_er(3, 1.5, CardinalityRange::default(), 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn ws_lattice_and_rewiring() {
        let h = gen_ws(200, 10, 0.0, 9).unwrap();
        assert_eq!(h.num_edges(), 200);
        assert!(h.cardinalities().iter().all(|&c| c == 6));
        for (i, e) in h.edges().iter().enumerate() {
            let mut expected: Vec<usize> = (0..=5).map(|j| (i + j) % 200).collect();
            expected.sort_unstable();
            assert_eq!(e, &expected);
        }
        assert!(h.hyperdegrees().iter().all(|&d| d == 6));
        assert_eq!(static_attack_order(&h), (0..200).collect::<Vec<_>>());

        let cycle = gen_ws(6, 2, 0.0, 0).unwrap();
        let expected: Vec<Vec<usize>> = (0..6).map(|i| {
            let mut e = vec![i, (i + 1) % 6];
            e.sort_unstable();
            e
        }).collect();
        assert_eq!(cycle.edges(), expected.as_slice());

        let rewired = gen_ws(50, 4, 1.0, 5).unwrap();
        assert_valid(&rewired);
        for (anchor, e) in rewired.edges().iter().enumerate() {
            assert!(e.contains(&anchor));
            assert_eq!(e.len(), 3);
        }
        assert_ne!(rewired, gen_ws(50, 4, 0.0, 5).unwrap());
        assert!(gen_ws(10, 3, 0.1, 0).is_err());
        assert!(gen_ws(10, 10, 0.1, 0).is_err());
    }

    #[test]
    fn sf_counts_and_hubs() {
        let h = gen_sf(200, 5, CardinalityRange::default(), 1).unwrap();
        assert_eq!(h.num_edges(), 1 + 195 * 5);
        assert_valid(&h);

        let small = gen_sf(6, 1, CardinalityRange::default(), 4).unwrap();
        assert_eq!(small.edges()[0], vec![0, 1]);
        assert_eq!(small.num_edges(), 5);
        for (t, e) in small.edges().iter().enumerate().skip(1) {
            assert!(e.contains(&(t + 1)));
            assert!(e.iter().all(|&v| v <= t + 1));
        }

        // Spearman correlation between arrival rank (earlier = larger) and hyperdegree.
        let mut mean_rho = 0.0;
        for seed in 0..100 {
            let h = gen_sf(200, 5, CardinalityRange::default(), seed).unwrap();
            let rank_deg = ranks(&h.hyperdegrees().iter().map(|&d| d as f64).collect::<Vec<_>>());
            let rank_age = ranks(&(0..200).map(|v| -(v as f64)).collect::<Vec<_>>());
            mean_rho += pearson(&rank_deg, &rank_age);
        }
        assert!(mean_rho / 100.0 > 0.0);
    }

    fn ranks(values: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..values.len()).collect();
        idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
        let mut ranks = vec![0.0; values.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0;
            for &k in &idx[i..=j] {
                ranks[k] = avg;
            }
            i = j + 1;
        }
        ranks
    }

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn sbm_modularity() {
        let card = CardinalityRange::default();
        let block = community_of(200, 5);
        let (mut intra, mut inter) = (0.0, 0.0);
        for seed in 0..50 {
            let h = gen_sbm(200, 5, 0.1, 0.01, card, seed).unwrap();
            assert_valid(&h);
            let (hit, total) = pair_density(&h, |u, v| block[u] == block[v]);
            intra += hit as f64 / total as f64;
            let (hit, total) = pair_density(&h, |u, v| block[u] != block[v]);
            inter += hit as f64 / total as f64;
        }
        assert!(intra >= 5.0 * inter, "intra {intra} inter {inter}");
    }

    #[test]
    fn sbm_single_block_is_er() {
        let card = CardinalityRange::default();
        for seed in 0..5 {
            assert_eq!(gen_sbm(60, 1, 0.2, 0.05, card, seed).unwrap(), gen_er(60, 0.2, card, seed).unwrap());
        }
    }

    #[test]
    fn sbm_without_cross_probability_stays_inside_blocks() {
        let card = CardinalityRange::default();
        let block = community_of(100, 4);
        let mut rng = attempt_rng(11, 0);
        let edges = sbm_attempt(100, 4, 0.3, 0.0, card, &mut rng, true).unwrap().unwrap();
        assert!(!edges.is_empty());
        for e in &edges {
            assert!(e.iter().all(|&v| block[v] == block[e[0]]));
        }
        assert!(matches!(
            gen_sbm(100, 4, 0.3, 0.0, card, 11),
            Err(Error::DisconnectedRetryExceeded { .. })
        ));
    }

    #[test]
    fn uf_fixed_cardinality() {
        let h = gen_uf(200, 0.05, 5, 2).unwrap();
        assert_valid(&h);
        assert!(h.cardinalities().iter().all(|&c| c == 5));
        assert!(h.num_edges() >= density_matched_edge_count(200, 0.05, 5.0));

        let full = gen_uf(5, 1.0, 5, 0).unwrap();
        assert_eq!(full.edges(), &[vec![0, 1, 2, 3, 4]]);
        assert!(matches!(gen_uf(4, 0.05, 5, 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn deterministic_across_calls() {
        for family in Family::ALL {
            let cfg = GeneratorConfig::new(family, 80, 42);
            assert_eq!(cfg.generate().unwrap(), cfg.generate().unwrap(), "{family:?}");
            let other = GeneratorConfig { seed: 43, ..cfg };
            assert_ne!(cfg.generate().unwrap(), other.generate().unwrap(), "{family:?}");
        }
    }

    #[test]
    fn family_names_round_trip() {
        for family in Family::ALL {
            assert_eq!(family.name().parse::<Family>().unwrap(), family);
        }
        assert!("xx".parse::<Family>().is_err());
    }
}
