//! Immutable hypergraph storage, incidence queries and connectivity.
//!
//! Node ids are `0..num_nodes`. Every hyperedge is stored as a strictly
//! ascending list of member ids with at least two members. Duplicate
//! hyperedges are allowed: degrees and all downstream computations treat
//! the edge list as a multiset.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    num_nodes: usize,
    edges: Vec<Vec<usize>>,
    /// Incident edge indices per node, ascending.
    incidence: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Builds a hypergraph from raw member lists.
    ///
    /// Members are sorted and deduplicated inside each edge; the order of the
    /// edges themselves is preserved.
    pub fn from_edge_list<E, I>(num_nodes: usize, raw_edges: E) -> Result<Self>
    where
        E: IntoIterator<Item = I>,
        I: AsRef<[usize]>,
    {
        let mut edges = Vec::new();
        for (index, raw) in raw_edges.into_iter().enumerate() {
            let mut members = raw.as_ref().to_vec();
            if let Some(&id) = members.iter().find(|&&id| id >= num_nodes) {
                return Err(Error::OutOfRangeId { id, num_nodes });
            }
            members.sort_unstable();
            members.dedup();
            if members.len() < 2 {
                return Err(Error::EdgeTooSmall {
                    index,
                    cardinality: members.len(),
                });
            }
            edges.push(members);
        }
        Ok(Self::from_canonical(num_nodes, edges))
    }

    /// Caller guarantees every edge is sorted, in range and has ≥ 2 members.
    pub(crate) fn from_canonical(num_nodes: usize, edges: Vec<Vec<usize>>) -> Self {
        let mut incidence = vec![Vec::new(); num_nodes];
        for (e, members) in edges.iter().enumerate() {
            debug_assert!(members.len() >= 2);
            debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
            for &v in members {
                incidence[v].push(e);
            }
        }
        Hypergraph {
            num_nodes,
            edges,
            incidence,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<&[usize]> {
        self.edges
            .get(e)
            .map(Vec::as_slice)
            .ok_or(Error::OutOfRangeIndex {
                index: e,
                len: self.edges.len(),
            })
    }

    /// Edges containing `v`, ascending by edge index.
    pub fn incident_edges(&self, v: usize) -> Result<&[usize]> {
        self.incidence
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::OutOfRangeId {
                id: v,
                num_nodes: self.num_nodes,
            })
    }

    pub fn hyperdegree(&self, v: usize) -> Result<usize> {
        self.incident_edges(v).map(<[usize]>::len)
    }

    pub fn cardinality(&self, e: usize) -> Result<usize> {
        self.edge(e).map(<[usize]>::len)
    }

    /// Hyperdegree of every node, indexed by node id.
    pub fn hyperdegrees(&self) -> Vec<usize> {
        self.incidence.iter().map(Vec::len).collect()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.edges.iter().map(Vec::len).collect()
    }

    pub(crate) fn incidence_lists(&self) -> &[Vec<usize>] {
        &self.incidence
    }

    /// Relabels node `v` as `perm[v]`. Edge order is preserved.
    pub fn permute(&self, perm: &[usize]) -> Result<Hypergraph> {
        check_bijection(perm, self.num_nodes)?;
        let edges = self
            .edges
            .iter()
            .map(|members| {
                let mut mapped: Vec<usize> = members.iter().map(|&v| perm[v]).collect();
                mapped.sort_unstable();
                mapped
            })
            .collect();
        Ok(Self::from_canonical(self.num_nodes, edges))
    }

    /// Edge lists sorted lexicographically; equal for hypergraphs with equal
    /// edge multisets regardless of edge order.
    pub fn sorted_edge_multiset(&self) -> Vec<Vec<usize>> {
        let mut edges = self.edges.clone();
        edges.sort();
        edges
    }

    /// Fraction of all `num_nodes` nodes lying in the largest component of
    /// the intact hypergraph.
    pub fn intact_lcc_fraction(&self) -> f64 {
        lcc_fraction(self, &ActivityMask::all_alive(self))
    }

    pub fn is_connected(&self) -> bool {
        self.num_nodes > 0 && largest_component_size(self, &ActivityMask::all_alive(self)) == self.num_nodes
    }
}

pub(crate) fn check_bijection(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::NotABijection);
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::NotABijection);
        }
    }
    Ok(())
}

/// Inverse of a permutation given as `perm[old] = new`.
pub fn invert_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    check_bijection(perm, perm.len())?;
    let mut inverse = vec![0; perm.len()];
    for (old, &new) in perm.iter().enumerate() {
        inverse[new] = old;
    }
    Ok(inverse)
}

/// Alive flags for nodes and hyperedges.
///
/// `edge_latched` records edges force-failed by a cascade; once latched an
/// edge stays dead no matter how many of its members are alive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityMask {
    pub node_alive: Vec<bool>,
    pub edge_alive: Vec<bool>,
    pub edge_latched: Vec<bool>,
}

impl ActivityMask {
    pub fn all_alive(h: &Hypergraph) -> Self {
        ActivityMask {
            node_alive: vec![true; h.num_nodes()],
            edge_alive: vec![true; h.num_edges()],
            edge_latched: vec![false; h.num_edges()],
        }
    }

    /// Intact mask with the given nodes marked dead; edge liveness recomputed.
    pub fn with_dead_nodes(h: &Hypergraph, dead: &[usize]) -> Result<Self> {
        let mut mask = Self::all_alive(h);
        for &v in dead {
            if v >= h.num_nodes() {
                return Err(Error::OutOfRangeId {
                    id: v,
                    num_nodes: h.num_nodes(),
                });
            }
            mask.node_alive[v] = false;
        }
        Ok(recompute_edge_liveness(h, mask))
    }

    pub fn alive_node_count(&self) -> usize {
        self.node_alive.iter().filter(|&&a| a).count()
    }

    fn matches(&self, h: &Hypergraph) -> bool {
        self.node_alive.len() == h.num_nodes()
            && self.edge_alive.len() == h.num_edges()
            && self.edge_latched.len() == h.num_edges()
    }
}

/// Marks each edge alive iff it has at least two alive members and was not
/// latched failed.
pub fn recompute_edge_liveness(h: &Hypergraph, mut mask: ActivityMask) -> ActivityMask {
    assert!(mask.matches(h), "activity mask does not match hypergraph");
    for (e, members) in h.edges().iter().enumerate() {
        let alive = members.iter().filter(|&&v| mask.node_alive[v]).count();
        mask.edge_alive[e] = alive >= 2 && !mask.edge_latched[e];
    }
    mask
}

/// Size of the largest set of alive nodes connected through alive edges,
/// divided by the original node count.
pub fn lcc_fraction(h: &Hypergraph, mask: &ActivityMask) -> f64 {
    if h.num_nodes() == 0 {
        return 0.0;
    }
    largest_component_size(h, mask) as f64 / h.num_nodes() as f64
}

pub(crate) fn largest_component_size(h: &Hypergraph, mask: &ActivityMask) -> usize {
    let mut dsu = DisjointSets::new(h.num_nodes());
    for (e, members) in h.edges().iter().enumerate() {
        if !mask.edge_alive[e] {
            continue;
        }
        let mut alive = members.iter().copied().filter(|&v| mask.node_alive[v]);
        if let Some(first) = alive.next() {
            for v in alive {
                dsu.union(first, v);
            }
        }
    }
    let mut sizes = vec![0usize; h.num_nodes()];
    let mut best = 0;
    for v in 0..h.num_nodes() {
        if mask.node_alive[v] {
            let root = dsu.find(v);
            sizes[root] += 1;
            best = best.max(sizes[root]);
        }
    }
    best
}

/// Connected components of the intact hypergraph restricted to `universe`
/// (edges must lie within it), each sorted, ordered by smallest member.
pub(crate) fn components_within(
    num_nodes: usize,
    edges: &[Vec<usize>],
    universe: &[usize],
) -> Vec<Vec<usize>> {
    let mut dsu = DisjointSets::new(num_nodes);
    for members in edges {
        for w in members.windows(2) {
            dsu.union(w[0], w[1]);
        }
    }
    let mut sorted = universe.to_vec();
    sorted.sort_unstable();
    let mut slot = vec![usize::MAX; num_nodes];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for v in sorted {
        let root = dsu.find(v);
        if slot[root] == usize::MAX {
            slot[root] = components.len();
            components.push(Vec::new());
        }
        components[slot[root]].push(v);
    }
    components
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
