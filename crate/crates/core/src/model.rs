//! Hypergraph isomorphism network surrogate for robustness regression.
//!
//! Node inputs (3 features) and edge inputs (1 feature) are lifted to width
//! `W` by dedicated two-layer MLPs. Each of the `L` layers then updates every
//! hyperedge from its own state and the sum of its members' states, and
//! afterwards every node from its own state and the sum of its incident
//! hyperedges' new states:
//!
//! ```text
//! h_e' = MLP_e((1 + ε_e) h_e + Σ_{v ∈ e} h_v)
//! h_v' = MLP_v((1 + ε_v) h_v + Σ_{e ∋ v} h_e')
//! ```
//!
//! The embedding concatenates `[Σ_v h_v, Σ_e h_e]` over all layers and a
//! two-layer head maps it to a scalar. Gradients are derived by hand and
//! checked against finite differences in the tests.
//!
//! All sums run in ascending node or edge id order, so results do not depend
//! on thread scheduling.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::validate_order;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

pub const NODE_FEATURES: usize = 3;
pub const EDGE_FEATURES: usize = 1;

const FORMAT_TAG: &str = "hyperrobust-model";
const FORMAT_VERSION: u32 = 1;

/// Model inputs. Node columns are normalized hyperdegree, normalized mean
/// incident cardinality and normalized attack rank; the single edge column is
/// normalized cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub node_features: Array2<f64>,
    pub edge_features: Array2<f64>,
}

impl FeatureSet {
    /// Every feature set to 1. Used wherever only structure should matter.
    pub fn constant(h: &Hypergraph) -> Self {
        FeatureSet {
            node_features: Array2::ones((h.num_nodes(), NODE_FEATURES)),
            edge_features: Array2::ones((h.num_edges(), EDGE_FEATURES)),
        }
    }

    /// Moves the row of node `v` to `perm[v]`, matching [`Hypergraph::permute`].
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        crate::hypergraph::check_bijection(perm, self.node_features.nrows())?;
        let mut node_features = Array2::zeros(self.node_features.raw_dim());
        for (v, row) in self.node_features.rows().into_iter().enumerate() {
            node_features.row_mut(perm[v]).assign(&row);
        }
        Ok(FeatureSet {
            node_features,
            edge_features: self.edge_features.clone(),
        })
    }

    fn check(&self, h: &Hypergraph) -> Result<()> {
        let expect = [
            ("node", self.node_features.dim(), (h.num_nodes(), NODE_FEATURES)),
            ("edge", self.edge_features.dim(), (h.num_edges(), EDGE_FEATURES)),
        ];
        for (kind, got, want) in expect {
            if got != want {
                return Err(Error::ShapeMismatch(format!(
                    "{kind} features are {}x{}, expected {}x{}",
                    got.0, got.1, want.0, want.1
                )));
            }
        }
        Ok(())
    }
}

/// Builds the standard features; `order` is the attack sequence, so the
/// first attacked node gets rank feature 0.
pub fn build_features(h: &Hypergraph, order: &[usize]) -> Result<FeatureSet> {
    validate_order(h, order)?;
    let n = h.num_nodes();
    let degrees = h.hyperdegrees();
    let cards = h.cardinalities();
    let max_degree = degrees.iter().copied().max().unwrap_or(0) as f64;
    let max_card = cards.iter().copied().max().unwrap_or(0) as f64;
    let rank_scale = if n > 1 { (n - 1) as f64 } else { 1.0 };

    let mut node_features = Array2::zeros((n, NODE_FEATURES));
    for v in 0..n {
        if max_degree > 0.0 {
            node_features[[v, 0]] = degrees[v] as f64 / max_degree;
        }
        let incident = &h.incidence_lists()[v];
        if !incident.is_empty() {
            let mean = incident.iter().map(|&e| cards[e] as f64).sum::<f64>() / incident.len() as f64;
            node_features[[v, 1]] = mean / max_card;
        }
    }
    for (rank, &v) in order.iter().enumerate() {
        node_features[[v, 2]] = rank as f64 / rank_scale;
    }
    let edge_features = Array2::from_shape_fn((h.num_edges(), EDGE_FEATURES), |(e, _)| cards[e] as f64 / max_card);
    Ok(FeatureSet {
        node_features,
        edge_features,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AggregationMode {
    /// Sums with learnable ε.
    #[default]
    InjectiveSum,
    /// Arithmetic means with ε fixed at 0. Not injective on multisets.
    MeanAblation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub layers: usize,
    pub width: usize,
    pub aggregation: AggregationMode,
}

impl Default for Architecture {
    fn default() -> Self {
        Architecture {
            layers: 3,
            width: 64,
            aggregation: AggregationMode::InjectiveSum,
        }
    }
}

impl Architecture {
    pub fn embedding_len(&self) -> usize {
        2 * self.layers * self.width
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.width == 0 {
            return Err(Error::InvalidConfig(format!(
                "layers and width must be >= 1, got {} and {}",
                self.layers, self.width
            )));
        }
        Ok(())
    }
}

/// Affine map `x Wᵀ + b` applied to each row of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    /// `fan_out × fan_in`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Linear {
    fn build(fan_in: usize, fan_out: usize, draw: &mut dyn FnMut(f64) -> f64) -> Self {
        let bound = 1.0 / (fan_in as f64).sqrt();
        Linear {
            weight: Array2::from_shape_fn((fan_out, fan_in), |_| draw(bound)),
            bias: Array1::from_shape_fn(fan_out, |_| draw(bound)),
        }
    }

    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut y = x.dot(&self.weight.t());
        y += &self.bias;
        y
    }
}

/// `Linear → ReLU → Linear`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    pub hidden: Linear,
    pub output: Linear,
}

#[derive(Debug)]
struct MlpTrace {
    input: Array2<f64>,
    pre: Array2<f64>,
    act: Array2<f64>,
}

impl Mlp {
    fn build(fan_in: usize, hidden: usize, fan_out: usize, draw: &mut dyn FnMut(f64) -> f64) -> Self {
        Mlp {
            hidden: Linear::build(fan_in, hidden, draw),
            output: Linear::build(hidden, fan_out, draw),
        }
    }

    fn forward(&self, input: Array2<f64>) -> (Array2<f64>, MlpTrace) {
        let pre = self.hidden.apply(&input);
        let act = pre.mapv(|z| z.max(0.0));
        let out = self.output.apply(&act);
        (out, MlpTrace { input, pre, act })
    }

    /// Accumulates parameter gradients into `grad` and returns d/d input.
    fn backward(&self, trace: &MlpTrace, d_out: &Array2<f64>, grad: &mut Mlp) -> Array2<f64> {
        grad.output.weight += &d_out.t().dot(&trace.act);
        grad.output.bias += &d_out.sum_axis(Axis(0));
        let mut d_pre = d_out.dot(&self.output.weight);
        d_pre.zip_mut_with(&trace.pre, |d, &z| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
        grad.hidden.weight += &d_pre.t().dot(&trace.input);
        grad.hidden.bias += &d_pre.sum_axis(Axis(0));
        d_pre.dot(&self.hidden.weight)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub edge_mlp: Mlp,
    pub node_mlp: Mlp,
    pub eps_edge: f64,
    pub eps_node: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub arch: Architecture,
    /// Seed the weights were initialized from.
    pub seed: u64,
    pub init_mlp_node: Mlp,
    pub init_mlp_edge: Mlp,
    pub layers: Vec<LayerParams>,
    pub head: Mlp,
}

/// Visits every tensor of a [`ModelParameters`] in the canonical order,
/// pushing shared or mutable views into `$out`.
macro_rules! walk_tensors {
    ($params:expr, $out:ident, $view:ident, $slice:ident, $iter:ident, $one:path, $($m:tt)?) => {{
        fn linear<'a>(prefix: String, l: &'a $($m)? Linear, out: &mut Vec<$view<'a>>) {
            let (ws, bs) = (l.weight.shape().to_vec(), l.bias.shape().to_vec());
            out.push($view { name: format!("{prefix}.weight"), shape: ws, data: l.weight.$slice().expect("standard layout") });
            out.push($view { name: format!("{prefix}.bias"), shape: bs, data: l.bias.$slice().expect("standard layout") });
        }
        fn mlp<'a>(prefix: &str, m: &'a $($m)? Mlp, out: &mut Vec<$view<'a>>) {
            linear(format!("{prefix}.hidden"), &$($m)? m.hidden, out);
            linear(format!("{prefix}.output"), &$($m)? m.output, out);
        }
        let p = $params;
        mlp("init_mlp_node", &$($m)? p.init_mlp_node, &mut $out);
        mlp("init_mlp_edge", &$($m)? p.init_mlp_edge, &mut $out);
        for (l, layer) in p.layers.$iter().enumerate() {
            mlp(&format!("layers.{l}.edge_mlp"), &$($m)? layer.edge_mlp, &mut $out);
            mlp(&format!("layers.{l}.node_mlp"), &$($m)? layer.node_mlp, &mut $out);
            $out.push($view { name: format!("layers.{l}.eps_edge"), shape: vec![1], data: $one(&$($m)? layer.eps_edge) });
            $out.push($view { name: format!("layers.{l}.eps_node"), shape: vec![1], data: $one(&$($m)? layer.eps_node) });
        }
        mlp("head", &$($m)? p.head, &mut $out);
    }};
}

/// Named view of one parameter tensor, in the fixed visiting order.
pub struct TensorRef<'a> {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: &'a [f64],
}

struct TensorMut<'a> {
    name: String,
    shape: Vec<usize>,
    data: &'a mut [f64],
}

impl ModelParameters {
    fn build(arch: Architecture, seed: u64, draw: &mut dyn FnMut(f64) -> f64) -> Self {
        let w = arch.width;
        let init_mlp_node = Mlp::build(NODE_FEATURES, w, w, draw);
        let init_mlp_edge = Mlp::build(EDGE_FEATURES, w, w, draw);
        let layers = (0..arch.layers)
            .map(|_| LayerParams {
                edge_mlp: Mlp::build(w, w, w, draw),
                node_mlp: Mlp::build(w, w, w, draw),
                eps_edge: 0.0,
                eps_node: 0.0,
            })
            .collect();
        let head = Mlp::build(arch.embedding_len(), w, 1, draw);
        ModelParameters {
            arch,
            seed,
            init_mlp_node,
            init_mlp_edge,
            layers,
            head,
        }
    }

    /// Uniform `±1/√fan_in` weights and biases, ε = 0.
    pub fn init(arch: Architecture, seed: u64) -> Result<Self> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::build(arch, seed, &mut |bound| rng.gen_range(-bound..bound)))
    }

    /// All-zero parameters of the given shape; the gradient accumulator.
    pub fn zeros(arch: Architecture) -> Self {
        Self::build(arch, 0, &mut |_| 0.0)
    }

    fn zeros_like(&self) -> Self {
        let mut z = Self::zeros(self.arch);
        z.seed = self.seed;
        z
    }

    fn tensors_mut(&mut self) -> Vec<TensorMut<'_>> {
        let mut out = Vec::new();
        walk_tensors!(self, out, TensorMut, as_slice_mut, iter_mut, std::slice::from_mut, mut);
        out
    }

    /// Every tensor in a fixed order: init MLPs, layers, head.
    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        walk_tensors!(self, out, TensorRef, as_slice, iter, std::slice::from_ref,);
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.tensors().iter().flat_map(|t| t.data.iter().copied()).collect()
    }

    /// # Panics
    /// If `flat` does not hold exactly [`Self::num_parameters`] values.
    pub fn load_flat(&mut self, flat: &[f64]) {
        let mut rest = flat;
        for t in self.tensors_mut() {
            let (head, tail) = rest.split_at(t.data.len());
            t.data.copy_from_slice(head);
            rest = tail;
        }
        assert!(rest.is_empty(), "flat parameter vector too long");
    }

    fn add_assign(&mut self, other: &ModelParameters) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.data.iter_mut().zip(src.data) {
                *d += s;
            }
        }
    }

    /// Serializes architecture metadata and every tensor as one JSON document.
    pub fn to_json(&self) -> String {
        let doc = ModelDocument {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            layers: self.arch.layers,
            width: self.arch.width,
            aggregation: self.arch.aggregation,
            seed: self.seed,
            num_parameters: self.num_parameters(),
            tensors: self
                .tensors()
                .into_iter()
                .map(|t| TensorRecord {
                    name: t.name,
                    shape: t.shape,
                    data: t.data.to_vec(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string(&doc).expect("model document serializes");
        text.push('\n');
        text
    }

    /// Parses a document written by [`Self::to_json`], checking every tensor
    /// name and shape against the declared architecture.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if doc.format != FORMAT_TAG || doc.version != FORMAT_VERSION {
            return Err(Error::Parse(format!(
                "unsupported format {:?} version {}",
                doc.format, doc.version
            )));
        }
        let arch = Architecture {
            layers: doc.layers,
            width: doc.width,
            aggregation: doc.aggregation,
        };
        arch.validate()?;
        let mut params = Self::zeros(arch);
        params.seed = doc.seed;
        let slots = params.tensors_mut();
        if slots.len() != doc.tensors.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} tensors, found {}",
                slots.len(),
                doc.tensors.len()
            )));
        }
        for (slot, record) in slots.into_iter().zip(&doc.tensors) {
            if slot.name != record.name || slot.shape != record.shape || slot.data.len() != record.data.len() {
                return Err(Error::ShapeMismatch(format!(
                    "tensor {} {:?} does not match expected {} {:?}",
                    record.name, record.shape, slot.name, slot.shape
                )));
            }
            if let Some(bad) = record.data.iter().find(|x| !x.is_finite()) {
                return Err(Error::Parse(format!("non-finite value {bad} in {}", record.name)));
            }
            slot.data.copy_from_slice(&record.data);
        }
        Ok(params)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    layers: usize,
    width: usize,
    aggregation: AggregationMode,
    seed: u64,
    num_parameters: usize,
    tensors: Vec<TensorRecord>,
}

#[derive(Serialize, Deserialize)]
struct TensorRecord {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Σ (or mean) of node states over each edge's members, one row per edge.
fn gather_members(h: &Hypergraph, node_states: &Array2<f64>, mode: AggregationMode) -> Array2<f64> {
    let mut out = Array2::zeros((h.num_edges(), node_states.ncols()));
    for (e, members) in h.edges().iter().enumerate() {
        let mut row = out.row_mut(e);
        for &v in members {
            row += &node_states.row(v);
        }
        if mode == AggregationMode::MeanAblation {
            row /= members.len() as f64;
        }
    }
    out
}

/// Σ (or mean) of edge states over each node's incident edges. Isolated
/// nodes receive zeros.
fn gather_incident(h: &Hypergraph, edge_states: &Array2<f64>, mode: AggregationMode) -> Array2<f64> {
    let mut out = Array2::zeros((h.num_nodes(), edge_states.ncols()));
    for (v, incident) in h.incidence_lists().iter().enumerate() {
        let mut row = out.row_mut(v);
        for &e in incident {
            row += &edge_states.row(e);
        }
        if mode == AggregationMode::MeanAblation && !incident.is_empty() {
            row /= incident.len() as f64;
        }
    }
    out
}

/// Adjoint of [`gather_members`]: adds each edge's gradient to its members.
fn scatter_members(h: &Hypergraph, d_edges: &Array2<f64>, mode: AggregationMode, d_nodes: &mut Array2<f64>) {
    for (e, members) in h.edges().iter().enumerate() {
        let weight = match mode {
            AggregationMode::InjectiveSum => 1.0,
            AggregationMode::MeanAblation => 1.0 / members.len() as f64,
        };
        for &v in members {
            d_nodes.row_mut(v).scaled_add(weight, &d_edges.row(e));
        }
    }
}

/// Adjoint of [`gather_incident`].
fn scatter_incident(h: &Hypergraph, d_nodes: &Array2<f64>, mode: AggregationMode, d_edges: &mut Array2<f64>) {
    for (v, incident) in h.incidence_lists().iter().enumerate() {
        let weight = match mode {
            AggregationMode::InjectiveSum => 1.0,
            AggregationMode::MeanAblation => 1.0 / incident.len() as f64,
        };
        for &e in incident {
            d_edges.row_mut(e).scaled_add(weight, &d_nodes.row(v));
        }
    }
}

/// Edge-to-node messages before any MLP: row `v` is the sum (or mean) of
/// `edge_states` over the edges incident to `v`.
pub fn edge_to_node_messages(h: &Hypergraph, edge_states: &Array2<f64>, mode: AggregationMode) -> Result<Array2<f64>> {
    if edge_states.nrows() != h.num_edges() {
        return Err(Error::ShapeMismatch(format!(
            "{} edge states for {} edges",
            edge_states.nrows(),
            h.num_edges()
        )));
    }
    Ok(gather_incident(h, edge_states, mode))
}

struct LayerTrace {
    edge_prev: Array2<f64>,
    node_prev: Array2<f64>,
    edge_mlp: MlpTrace,
    node_mlp: MlpTrace,
}

struct ForwardTrace {
    init_node: MlpTrace,
    init_edge: MlpTrace,
    layers: Vec<LayerTrace>,
    head: MlpTrace,
    embedding: Array1<f64>,
    prediction: f64,
}

fn self_weights(layer: &LayerParams, mode: AggregationMode) -> (f64, f64) {
    match mode {
        AggregationMode::InjectiveSum => (1.0 + layer.eps_edge, 1.0 + layer.eps_node),
        AggregationMode::MeanAblation => (1.0, 1.0),
    }
}

fn forward_traced(h: &Hypergraph, feats: &FeatureSet, params: &ModelParameters) -> Result<ForwardTrace> {
    feats.check(h)?;
    let mode = params.arch.aggregation;
    let w = params.arch.width;
    let (mut node, init_node) = params.init_mlp_node.forward(feats.node_features.clone());
    let (mut edge, init_edge) = params.init_mlp_edge.forward(feats.edge_features.clone());
    let mut embedding = Array1::zeros(params.arch.embedding_len());
    let mut layers = Vec::with_capacity(params.layers.len());

    for (l, layer) in params.layers.iter().enumerate() {
        let (c_edge, c_node) = self_weights(layer, mode);
        let edge_in = &edge * c_edge + gather_members(h, &node, mode);
        let (edge_new, edge_mlp) = layer.edge_mlp.forward(edge_in);
        let node_in = &node * c_node + gather_incident(h, &edge_new, mode);
        let (node_new, node_mlp) = layer.node_mlp.forward(node_in);

        let offset = 2 * l * w;
        embedding
            .slice_mut(s![offset..offset + w])
            .assign(&node_new.sum_axis(Axis(0)));
        embedding
            .slice_mut(s![offset + w..offset + 2 * w])
            .assign(&edge_new.sum_axis(Axis(0)));

        layers.push(LayerTrace {
            edge_prev: std::mem::replace(&mut edge, edge_new),
            node_prev: std::mem::replace(&mut node, node_new),
            edge_mlp,
            node_mlp,
        });
    }

    let head_in = embedding.clone().insert_axis(Axis(0));
    let (out, head) = params.head.forward(head_in);
    Ok(ForwardTrace {
        init_node,
        init_edge,
        layers,
        head,
        embedding,
        prediction: out[[0, 0]],
    })
}

fn add_row(matrix: &mut Array2<f64>, row: ArrayView1<'_, f64>) {
    *matrix += &row;
}

/// Reverse pass for one sample, given d loss / d prediction.
fn backward(h: &Hypergraph, params: &ModelParameters, trace: &ForwardTrace, d_pred: f64, grad: &mut ModelParameters) {
    let mode = params.arch.aggregation;
    let w = params.arch.width;
    let d_head = Array2::from_elem((1, 1), d_pred);
    let d_embedding = params.head.backward(&trace.head, &d_head, &mut grad.head);
    let d_embedding = d_embedding.row(0);

    let mut d_node = Array2::zeros((h.num_nodes(), w));
    let mut d_edge = Array2::zeros((h.num_edges(), w));
    for l in (0..params.layers.len()).rev() {
        let layer = &params.layers[l];
        let lt = &trace.layers[l];
        let (c_edge, c_node) = self_weights(layer, mode);
        let offset = 2 * l * w;
        add_row(&mut d_node, d_embedding.slice(s![offset..offset + w]));
        add_row(&mut d_edge, d_embedding.slice(s![offset + w..offset + 2 * w]));

        let d_node_in = layer.node_mlp.backward(&lt.node_mlp, &d_node, &mut grad.layers[l].node_mlp);
        scatter_incident(h, &d_node_in, mode, &mut d_edge);
        let d_edge_in = layer.edge_mlp.backward(&lt.edge_mlp, &d_edge, &mut grad.layers[l].edge_mlp);

        if mode == AggregationMode::InjectiveSum {
            grad.layers[l].eps_node += (&d_node_in * &lt.node_prev).sum();
            grad.layers[l].eps_edge += (&d_edge_in * &lt.edge_prev).sum();
        }
        let mut d_node_prev = d_node_in * c_node;
        scatter_members(h, &d_edge_in, mode, &mut d_node_prev);
        d_node = d_node_prev;
        d_edge = d_edge_in * c_edge;
    }

    params.init_mlp_node.backward(&trace.init_node, &d_node, &mut grad.init_mlp_node);
    params.init_mlp_edge.backward(&trace.init_edge, &d_edge, &mut grad.init_mlp_edge);
}

/// Unclamped prediction and the `2·L·W` embedding.
pub fn forward(h: &Hypergraph, feats: &FeatureSet, params: &ModelParameters) -> Result<(f64, Array1<f64>)> {
    let trace = forward_traced(h, feats, params)?;
    Ok((trace.prediction, trace.embedding))
}

pub fn embedding(h: &Hypergraph, feats: &FeatureSet, params: &ModelParameters) -> Result<Array1<f64>> {
    forward(h, feats, params).map(|(_, emb)| emb)
}

/// Builds features from `order`, runs the model and clamps to `[0, 1]`.
pub fn predict(h: &Hypergraph, order: &[usize], params: &ModelParameters) -> Result<f64> {
    predict_with_features(h, &build_features(h, order)?, params)
}

pub fn predict_with_features(h: &Hypergraph, feats: &FeatureSet, params: &ModelParameters) -> Result<f64> {
    forward(h, feats, params).map(|(y, _)| y.clamp(0.0, 1.0))
}

/// One labeled training example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub hypergraph: Hypergraph,
    pub features: FeatureSet,
    pub label: f64,
}

/// Mean squared error of unclamped predictions and its gradient.
///
/// Per-sample gradients are computed in parallel and summed in batch order,
/// so the result is independent of the thread count.
pub fn loss_and_grad(batch: &[&Sample], params: &ModelParameters) -> Result<(f64, ModelParameters)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scale = 1.0 / batch.len() as f64;
    let parts: Vec<(f64, ModelParameters)> = batch
        .par_iter()
        .map(|sample| {
            let trace = forward_traced(&sample.hypergraph, &sample.features, params)?;
            let residual = trace.prediction - sample.label;
            let mut grad = params.zeros_like();
            backward(&sample.hypergraph, params, &trace, 2.0 * residual * scale, &mut grad);
            Ok((residual * residual, grad))
        })
        .collect::<Result<_>>()?;

    let mut total = params.zeros_like();
    let mut loss = 0.0;
    for (sq, grad) in &parts {
        loss += sq;
        total.add_assign(grad);
    }
    Ok((loss * scale, total))
}

/// Mean squared error of unclamped predictions.
pub fn mean_squared_error(samples: &[&Sample], params: &ModelParameters) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let errors: Vec<f64> = samples
        .par_iter()
        .map(|s| forward(&s.hypergraph, &s.features, params).map(|(y, _)| (y - s.label).powi(2)))
        .collect::<Result<_>>()?;
    Ok(errors.iter().sum::<f64>() / samples.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub eta_max: f64,
    pub eta_min: f64,
    /// Epochs per half cosine period.
    pub t_max: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    /// Share of the dataset held out for model selection; 0 disables it.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            eta_max: 1e-3,
            eta_min: 1e-5,
            t_max: 200,
            epochs: 200,
            batch_size: 32,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            validation_fraction: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eta_min >= 0.0 && self.eta_min <= self.eta_max && self.eta_max.is_finite()) {
            return bad(format!("need 0 <= eta_min <= eta_max, got {} and {}", self.eta_min, self.eta_max));
        }
        if self.epochs == 0 || self.t_max == 0 || self.batch_size == 0 {
            return bad("epochs, t_max and batch_size must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad(format!("moment coefficients must be in [0, 1), got {} and {}", self.beta1, self.beta2));
        }
        if !(self.weight_decay >= 0.0 && self.adam_epsilon > 0.0) {
            return bad("weight_decay must be >= 0 and adam_epsilon > 0".into());
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!("validation_fraction must be in [0, 1), got {}", self.validation_fraction));
        }
        Ok(())
    }
}

/// `η_min + ½(η_max − η_min)(1 + cos(π t / T))`, written as a convex
/// combination so that the endpoints and midpoint come out exact.
pub fn cosine_lr(t_cur: usize, cfg: &TrainConfig) -> f64 {
    let w = 0.5 * (1.0 + (std::f64::consts::PI * (t_cur as f64 / cfg.t_max as f64)).cos());
    cfg.eta_max * w + cfg.eta_min * (1.0 - w)
}

/// Adam with decoupled weight decay over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct AdamW {
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    weight_decay: f64,
}

impl AdamW {
    pub fn new(len: usize, cfg: &TrainConfig) -> Self {
        AdamW {
            m: vec![0.0; len],
            v: vec![0.0; len],
            step: 0,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            epsilon: cfg.adam_epsilon,
            weight_decay: cfg.weight_decay,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] *= 1.0 - lr * self.weight_decay;
            params[i] -= lr * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean squared error over the epoch's mini-batches, before each update.
    pub loss: f64,
    pub lr: f64,
    pub validation_loss: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: ModelParameters,
    pub history: Vec<EpochRecord>,
    /// Epoch whose parameters were returned when validating.
    pub best_epoch: Option<usize>,
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mini-batch AdamW training from a fresh initialization seeded by
/// `cfg.seed`. With a validation split the parameters of the epoch with the
/// lowest validation error are returned, otherwise the final ones.
pub fn train(dataset: &[Sample], arch: Architecture, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut indices: Vec<usize> = (0..dataset.len()).collect();
    let n_val = (cfg.validation_fraction * dataset.len() as f64).floor() as usize;
    if n_val > 0 {
        indices.shuffle(&mut rng_stream(cfg.seed, 2));
    }
    let (val_idx, train_idx) = indices.split_at(n_val);
    if train_idx.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let validation: Vec<&Sample> = val_idx.iter().map(|&i| &dataset[i]).collect();
    let mut order: Vec<usize> = train_idx.to_vec();
    order.sort_unstable();

    let mut params = ModelParameters::init(arch, cfg.seed)?;
    let mut flat = params.to_flat();
    let mut opt = AdamW::new(flat.len(), cfg);
    let mut shuffle_rng = rng_stream(cfg.seed, 1);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, ModelParameters)> = None;

    for epoch in 0..cfg.epochs {
        let lr = cosine_lr(epoch % cfg.t_max, cfg);
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<&Sample> = chunk.iter().map(|&i| &dataset[i]).collect();
            let (loss, grad) = loss_and_grad(&batch, &params)?;
            epoch_loss += loss * chunk.len() as f64;
            opt.step(&mut flat, &grad.to_flat(), lr);
            params.load_flat(&flat);
        }
        let validation_loss = if validation.is_empty() {
            None
        } else {
            Some(mean_squared_error(&validation, &params)?)
        };
        if let Some(v) = validation_loss {
            if best.as_ref().is_none_or(|(b, _, _)| v < *b) {
                best = Some((v, epoch, params.clone()));
            }
        }
        history.push(EpochRecord {
            epoch,
            loss: epoch_loss / order.len() as f64,
            lr,
            validation_loss,
        });
    }

    Ok(match best {
        Some((_, epoch, best_params)) => TrainOutcome {
            params: best_params,
            history,
            best_epoch: Some(epoch),
        },
        None => TrainOutcome {
            params,
            history,
            best_epoch: None,
        },
    })
}
