//! Hypergraph Weisfeiler-Lehman color refinement.
//!
//! Each iteration first relabels every hyperedge from its previous label and
//! the multiset of its members' previous labels, then relabels every node
//! from its previous label and the multiset of its incident hyperedges' new
//! labels. Signatures are interned exactly: within an iteration the distinct
//! signatures are sorted and a label is the rank of its signature. Labels
//! therefore never collide and do not depend on node or edge input order.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

pub type Label = u32;

/// Previous label plus the sorted multiset of neighbour labels.
pub type Signature = (Label, Vec<Label>);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WlColoring {
    /// `node_labels[k][v]`: label of node `v` after iteration `k`.
    pub node_labels: Vec<Vec<Label>>,
    pub edge_labels: Vec<Vec<Label>>,
    /// Signature → label tables, one per iteration (empty for iteration 0).
    pub intern_table: Vec<InternTable>,
    /// Whether the last iteration reproduced the previous partition.
    pub stable: bool,
}

impl WlColoring {
    /// Number of recorded iterations besides iteration 0.
    pub fn iterations(&self) -> usize {
        self.node_labels.len() - 1
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InternTable {
    pub edges: BTreeMap<Signature, Label>,
    pub nodes: BTreeMap<Signature, Label>,
}

/// Canonical label counts of one iteration, sorted by label.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Histogram {
    pub nodes: Vec<(Label, usize)>,
    pub edges: Vec<(Label, usize)>,
}

impl Histogram {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for part in [&self.nodes, &self.edges] {
            out.extend((part.len() as u64).to_le_bytes());
            for &(label, count) in part {
                out.extend(label.to_le_bytes());
                out.extend((count as u64).to_le_bytes());
            }
        }
        out
    }
}

fn count_labels(labels: &[Label]) -> Vec<(Label, usize)> {
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts.into_iter().collect()
}

fn distinct(labels: &[Label]) -> usize {
    count_labels(labels).len()
}

pub fn histogram(coloring: &WlColoring, iter: usize) -> Result<Histogram> {
    let available = coloring.node_labels.len();
    if iter >= available {
        return Err(Error::OutOfRangeIteration { iter, available });
    }
    Ok(Histogram {
        nodes: count_labels(&coloring.node_labels[iter]),
        edges: count_labels(&coloring.edge_labels[iter]),
    })
}

/// Refines one or more hypergraphs in lockstep over shared intern tables.
struct JointRefinement<'g> {
    graphs: Vec<&'g Hypergraph>,
    colorings: Vec<WlColoring>,
}

impl<'g> JointRefinement<'g> {
    fn new(graphs: Vec<&'g Hypergraph>, initial: Option<Vec<Vec<Label>>>) -> Self {
        let colorings = graphs
            .iter()
            .enumerate()
            .map(|(i, h)| WlColoring {
                node_labels: vec![initial
                    .as_ref()
                    .map(|init| init[i].clone())
                    .unwrap_or_else(|| vec![0; h.num_nodes()])],
                edge_labels: vec![vec![0; h.num_edges()]],
                intern_table: vec![InternTable::default()],
                stable: false,
            })
            .collect();
        JointRefinement { graphs, colorings }
    }

    fn joint_counts(&self, iter: usize) -> (usize, usize) {
        let nodes: Vec<Label> = self.colorings.iter().flat_map(|c| c.node_labels[iter].clone()).collect();
        let edges: Vec<Label> = self.colorings.iter().flat_map(|c| c.edge_labels[iter].clone()).collect();
        (distinct(&nodes), distinct(&edges))
    }

    /// Runs one iteration; returns true once the joint partition is stable.
    fn step(&mut self) -> bool {
        let k = self.colorings[0].node_labels.len() - 1;

        let edge_sigs: Vec<Vec<Signature>> = self
            .graphs
            .iter()
            .zip(&self.colorings)
            .map(|(h, c)| {
                h.edges()
                    .iter()
                    .enumerate()
                    .map(|(e, members)| {
                        let mut neighbours: Vec<Label> = members.iter().map(|&v| c.node_labels[k][v]).collect();
                        neighbours.sort_unstable();
                        (c.edge_labels[k][e], neighbours)
                    })
                    .collect()
            })
            .collect();
        let edge_table = intern(&edge_sigs);
        let new_edges: Vec<Vec<Label>> = edge_sigs
            .iter()
            .map(|sigs| sigs.iter().map(|s| edge_table[s]).collect())
            .collect();

        let node_sigs: Vec<Vec<Signature>> = self
            .graphs
            .iter()
            .zip(&self.colorings)
            .zip(&new_edges)
            .map(|((h, c), edges)| {
                (0..h.num_nodes())
                    .map(|v| {
                        let mut neighbours: Vec<Label> =
                            h.incidence_lists()[v].iter().map(|&e| edges[e]).collect();
                        neighbours.sort_unstable();
                        (c.node_labels[k][v], neighbours)
                    })
                    .collect()
            })
            .collect();
        let node_table = intern(&node_sigs);

        for (i, c) in self.colorings.iter_mut().enumerate() {
            c.node_labels.push(node_sigs[i].iter().map(|s| node_table[s]).collect());
            c.edge_labels.push(new_edges[i].clone());
            c.intern_table.push(InternTable {
                edges: edge_table.clone(),
                nodes: node_table.clone(),
            });
        }

        let stable = self.joint_counts(k + 1) == self.joint_counts(k);
        if stable {
            for c in &mut self.colorings {
                c.stable = true;
            }
        }
        stable
    }
}

fn intern(signatures: &[Vec<Signature>]) -> BTreeMap<Signature, Label> {
    let mut table: BTreeMap<Signature, Label> = signatures.iter().flatten().map(|s| (s.clone(), 0)).collect();
    for (rank, label) in table.values_mut().enumerate() {
        *label = rank as Label;
    }
    table
}

/// Refines `h` for at most `max_iters` iterations, stopping early once the
/// partition is stable. Iteration 0 labels every node and edge 0.
pub fn hwl_refine(h: &Hypergraph, max_iters: usize) -> WlColoring {
    hwl_refine_seeded(h, None, max_iters).expect("no initial labels to validate")
}

/// Like [`hwl_refine`] with caller-provided iteration-0 node labels.
pub fn hwl_refine_seeded(h: &Hypergraph, initial: Option<&[Label]>, max_iters: usize) -> Result<WlColoring> {
    if let Some(init) = initial {
        if init.len() != h.num_nodes() {
            return Err(Error::ShapeMismatch(format!(
                "{} initial labels for {} nodes",
                init.len(),
                h.num_nodes()
            )));
        }
    }
    let mut run = JointRefinement::new(vec![h], initial.map(|init| vec![init.to_vec()]));
    for _ in 0..max_iters {
        if run.step() {
            break;
        }
    }
    Ok(run.colorings.pop().expect("one coloring"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NonIsomorphic,
    PossiblyIsomorphic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistinguishReport {
    pub verdict: Verdict,
    /// Per iteration: (distinct node labels, distinct edge labels) of each graph.
    pub sizes: Vec<[(usize, usize); 2]>,
}

pub fn hwl_distinguish(h1: &Hypergraph, h2: &Hypergraph) -> Verdict {
    hwl_distinguish_report(h1, h2).verdict
}

/// Joint refinement of both hypergraphs with shared tables, comparing
/// canonical histograms after every iteration.
pub fn hwl_distinguish_report(h1: &Hypergraph, h2: &Hypergraph) -> DistinguishReport {
    let mut sizes = Vec::new();
    if h1.num_nodes() != h2.num_nodes() || h1.num_edges() != h2.num_edges() {
        return DistinguishReport {
            verdict: Verdict::NonIsomorphic,
            sizes,
        };
    }
    let mut run = JointRefinement::new(vec![h1, h2], None);
    let record = |run: &JointRefinement, k: usize, sizes: &mut Vec<[(usize, usize); 2]>| {
        let size = |c: &WlColoring| (distinct(&c.node_labels[k]), distinct(&c.edge_labels[k]));
        sizes.push([size(&run.colorings[0]), size(&run.colorings[1])]);
    };
    record(&run, 0, &mut sizes);
    let limit = h1.num_nodes() + h1.num_edges() + 1;
    for k in 1..=limit {
        let stable = run.step();
        record(&run, k, &mut sizes);
        let a = histogram(&run.colorings[0], k).expect("recorded");
        let b = histogram(&run.colorings[1], k).expect("recorded");
        if a != b {
            return DistinguishReport {
                verdict: Verdict::NonIsomorphic,
                sizes,
            };
        }
        if stable {
            break;
        }
    }
    DistinguishReport {
        verdict: Verdict::PossiblyIsomorphic,
        sizes,
    }
}
