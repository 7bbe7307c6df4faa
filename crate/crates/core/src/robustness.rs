//! Robustness labels.
//!
//! `R` is either the discrete average of the percolation curve over all
//! removal counts, or its integral over the attack fraction computed with
//! adaptive Simpson quadrature. The percolation function factors through the
//! integer removal count, so samples are memoized per count.

use std::collections::HashMap;

use crate::cascade::{attacked_count, percolation_at_count, static_attack_order, validate_order, AttackSpec};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Memoizing evaluator of the percolation curve of one hypergraph.
pub struct PercolationSampler<'a> {
    h: &'a Hypergraph,
    attack: AttackSpec,
    order: Vec<usize>,
    memo: HashMap<usize, f64>,
}

impl<'a> PercolationSampler<'a> {
    pub fn new(h: &'a Hypergraph, attack: AttackSpec, order: Vec<usize>) -> Result<Self> {
        validate_order(h, &order)?;
        Ok(PercolationSampler {
            h,
            attack,
            order,
            memo: HashMap::new(),
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.h.num_nodes()
    }

    /// `s(q)`: LCC fraction after attacking the first `q` nodes of the order.
    pub fn at_count(&mut self, q: usize) -> f64 {
        let q = q.min(self.h.num_nodes());
        let (h, attack, order) = (self.h, &self.attack, &self.order);
        *self
            .memo
            .entry(q)
            .or_insert_with(|| percolation_at_count(h, q, attack, order))
    }

    /// `s(rho)`, through `q = round(rho·N)`.
    pub fn at_fraction(&mut self, rho: f64) -> f64 {
        self.at_count(attacked_count(self.h.num_nodes(), rho))
    }

    /// Number of distinct attack simulations performed so far.
    pub fn evaluations(&self) -> usize {
        self.memo.len()
    }
}

/// `(1/N) Σ_{q=1..N} s(q)`.
pub fn robustness_discrete(sampler: &mut PercolationSampler<'_>) -> f64 {
    let n = sampler.num_nodes();
    if n == 0 {
        return 0.0;
    }
    (1..=n).map(|q| sampler.at_count(q)).sum::<f64>() / n as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute acceptance tolerance at the root interval.
    pub epsilon: f64,
    /// Maximum number of bisection levels.
    pub d_max: u32,
    /// Target model error the tolerance was derived from.
    pub delta_pred: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig::from_target_error(5e-3).expect("valid default")
    }
}

impl QuadratureConfig {
    /// Tolerance 50 times stricter than the expected surrogate error.
    pub fn from_target_error(delta_pred: f64) -> Result<Self> {
        Self::with_epsilon(delta_pred / 50.0, 10).map(|mut cfg| {
            cfg.delta_pred = delta_pred;
            cfg
        })
    }

    pub fn with_epsilon(epsilon: f64, d_max: u32) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig(format!("epsilon must be > 0, got {epsilon}")));
        }
        if d_max < 1 {
            return Err(Error::InvalidConfig("d_max must be at least 1".into()));
        }
        Ok(QuadratureConfig {
            epsilon,
            d_max,
            delta_pred: epsilon * 50.0,
        })
    }
}

/// `(y − x)/6 · [s(x) + 4 s((x+y)/2) + s(y)]`.
pub fn simpson_estimate<F: FnMut(f64) -> f64>(mut s: F, x: f64, y: f64) -> f64 {
    let m = 0.5 * (x + y);
    simpson_from_values(x, y, s(x), s(m), s(y))
}

fn simpson_from_values(x: f64, y: f64, fx: f64, fm: f64, fy: f64) -> f64 {
    (y - x) / 6.0 * (fx + 4.0 * fm + fy)
}

/// An interval whose fine estimate entered the result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub a: f64,
    pub b: f64,
    pub depth: u32,
    /// Returned because the depth cap was hit rather than the tolerance met.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Calls to the integrand (before any memoization on the caller side).
    pub integrand_calls: usize,
    /// Deepest recursive call; the root call is depth 0.
    pub max_depth: u32,
    pub leaves: Vec<Leaf>,
}

/// Adaptive Simpson quadrature of `s` over `[a, b]`.
///
/// An interval accepts its two-half estimate when the coarse/fine
/// discrepancy is below its local tolerance; otherwise each half is refined
/// with half the tolerance. Calls at depth `d_max − 1` return the fine
/// estimate unconditionally, so abscissae lie on a grid of `2^(d_max+1)`
/// cells.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut s: F, a: f64, b: f64, cfg: &QuadratureConfig) -> Quadrature {
    assert!(a <= b, "adaptive_simpson needs a <= b");
    let mut run = Run {
        s: &mut s,
        calls: 0,
        max_depth: 0,
        d_max: cfg.d_max,
        leaves: Vec::new(),
    };
    let fa = run.eval(a);
    let fm = run.eval(0.5 * (a + b));
    let fb = run.eval(b);
    let whole = simpson_from_values(a, b, fa, fm, fb);
    let value = run.refine(a, b, fa, fm, fb, whole, cfg.epsilon, 0);
    Quadrature {
        value,
        integrand_calls: run.calls,
        max_depth: run.max_depth,
        leaves: run.leaves,
    }
}

struct Run<'f, F> {
    s: &'f mut F,
    calls: usize,
    max_depth: u32,
    d_max: u32,
    leaves: Vec<Leaf>,
}

impl<F: FnMut(f64) -> f64> Run<'_, F> {
    fn eval(&mut self, x: f64) -> f64 {
        self.calls += 1;
        (self.s)(x)
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(&mut self, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        self.max_depth = self.max_depth.max(depth);
        let m = 0.5 * (a + b);
        let flm = self.eval(0.5 * (a + m));
        let frm = self.eval(0.5 * (m + b));
        let left = simpson_from_values(a, m, fa, flm, fm);
        let right = simpson_from_values(m, b, fm, frm, fb);
        let fine = left + right;
        let error = (whole - fine).abs();
        let capped = depth + 1 >= self.d_max;
        if error < tol || capped {
            self.leaves.push(Leaf {
                a,
                b,
                depth,
                capped: capped && error >= tol,
            });
            return fine;
        }
        let half = 0.5 * tol;
        self.refine(a, m, fa, flm, fm, left, half, depth + 1) + self.refine(m, b, fm, frm, fb, right, half, depth + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Label {
    pub r: f64,
    /// Distinct attack simulations performed.
    pub eval_count: usize,
}

/// Integral robustness of `h` under `attack`, with nodes attacked in
/// descending initial hyperdegree.
pub fn label_hypergraph(h: &Hypergraph, attack: AttackSpec, cfg: &QuadratureConfig) -> Result<Label> {
    let mut sampler = PercolationSampler::new(h, attack, static_attack_order(h))?;
    let quad = adaptive_simpson(|rho| sampler.at_fraction(rho), 0.0, 1.0, cfg);
    Ok(Label {
        r: quad.value,
        eval_count: sampler.evaluations(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::CascadeParams;
    use proptest::prelude::*;

    fn k4_edge() -> Hypergraph {
        Hypergraph::from_edge_list(4, [[0usize, 1, 2, 3]]).unwrap()
    }

    #[test]
    fn discrete_k4_single_edge() {
        let g = k4_edge();
        let mut s = PercolationSampler::new(&g, AttackSpec::Static, vec![0, 1, 2, 3]).unwrap();
        assert_eq!((1..=4).map(|q| s.at_count(q)).collect::<Vec<_>>(), vec![0.75, 0.5, 0.25, 0.0]);
        assert_eq!(robustness_discrete(&mut s), 0.375);
        assert_eq!(s.evaluations(), 4);
    }

    #[test]
    fn discrete_single_node() {
        let g = Hypergraph::from_edge_list(1, Vec::<Vec<usize>>::new()).unwrap();
        let mut s = PercolationSampler::new(&g, AttackSpec::Static, vec![0]).unwrap();
        assert_eq!(robustness_discrete(&mut s), 0.0);
    }

    #[test]
    fn discrete_chain_against_enumeration() {
        // Path 0-1-2-3 of pair edges, endpoints attacked last.
        let g = Hypergraph::from_edge_list(4, [[0usize, 1], [1, 2], [2, 3]]).unwrap();
        let order = vec![1, 2, 0, 3];
        let mut s = PercolationSampler::new(&g, AttackSpec::Static, order.clone()).unwrap();
        let r = robustness_discrete(&mut s);

        // Oracle: explicit component search over the removal sequence.
        let mut total = 0.0;
        for q in 1..=4 {
            let dead: Vec<usize> = order[..q].to_vec();
            let alive: Vec<usize> = (0..4).filter(|v| !dead.contains(v)).collect();
            let mut best = 0;
            let mut seen = vec![false; 4];
            for &start in &alive {
                if seen[start] {
                    continue;
                }
                let mut stack = vec![start];
                let mut size = 0;
                seen[start] = true;
                while let Some(v) = stack.pop() {
                    size += 1;
                    for w in [v.wrapping_sub(1), v + 1] {
                        if w < 4 && alive.contains(&w) && !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
                best = best.max(size);
            }
            total += best as f64 / 4.0;
        }
        assert_eq!(r, total / 4.0);
        assert_eq!(r, (0.5 + 0.25 + 0.25 + 0.0) / 4.0);
    }

    #[test]
    fn simpson_examples() {
        assert_eq!(simpson_estimate(|_| 1.0, 0.0, 1.0), 1.0);
        assert_eq!(simpson_estimate(|x| x, 0.0, 1.0), 0.5);
        assert!((simpson_estimate(|x| x * x, 0.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((simpson_estimate(|x| x * x * x, 0.0, 2.0) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_examples() {
        let cfg = QuadratureConfig::with_epsilon(1e-4, 10).unwrap();
        let q = adaptive_simpson(|x| (1.0 - x) * (1.0 - x), 0.0, 1.0, &cfg);
        assert!((q.value - 1.0 / 3.0).abs() <= 1e-4);

        let q = adaptive_simpson(|_| 0.7, 0.0, 2.0, &cfg);
        assert_eq!(q.value, 0.7 * 2.0);
        assert_eq!(q.max_depth, 0);
        assert_eq!(q.integrand_calls, 5);
    }

    #[test]
    fn step_refines_near_discontinuity() {
        let cfg = QuadratureConfig::with_epsilon(1e-4, 10).unwrap();
        let q = adaptive_simpson(|x| if x < 0.5 { 1.0 } else { 0.0 }, 0.0, 1.0, &cfg);
        let finest = 0.5f64.powi(cfg.d_max as i32 + 1);
        assert!((q.value - 0.5).abs() <= cfg.epsilon + finest, "{}", q.value);
        assert_eq!(q.max_depth, cfg.d_max - 1);
        for leaf in q.leaves.iter().filter(|l| l.depth == q.max_depth) {
            let width = leaf.b - leaf.a;
            assert!(leaf.a <= 0.5 + width && 0.5 - width <= leaf.b, "deep leaf away from the jump: {leaf:?}");
        }
        assert!(q.leaves.iter().any(|l| l.capped));
        assert!(q.integrand_calls <= 2usize.pow(cfg.d_max + 1) + 1);
    }

    #[test]
    fn eps_derivation() {
        for delta in [5e-3, 1e-2, 1e-3, 2.5e-3, 0.05] {
            let cfg = QuadratureConfig::from_target_error(delta).unwrap();
            assert_eq!(cfg.epsilon * 50.0, delta);
            assert_eq!(cfg.d_max, 10);
        }
        let cfg = QuadratureConfig::default();
        assert_eq!(cfg.delta_pred, 5e-3);
        assert!((cfg.epsilon - 1e-4).abs() < 1e-18);
        assert!(QuadratureConfig::with_epsilon(0.0, 10).is_err());
        assert!(QuadratureConfig::with_epsilon(1e-4, 0).is_err());
    }

    #[test]
    fn label_matches_discrete_on_k4() {
        let g = k4_edge();
        let cfg = QuadratureConfig::default();
        let label = label_hypergraph(&g, AttackSpec::Static, &cfg).unwrap();
        assert!((label.r - 0.375).abs() <= cfg.epsilon + 1.0 / 8.0, "{}", label.r);
        assert!(label.eval_count <= 5);
        assert!(label.eval_count <= 2usize.pow(cfg.d_max + 1) + 1);

        let relaxed = AttackSpec::Dynamic(CascadeParams::new(1e6, 1.0).unwrap());
        let dyn_label = label_hypergraph(&g, relaxed, &cfg).unwrap();
        assert!((dyn_label.r - label.r).abs() <= cfg.epsilon);
    }

    proptest! {
        #[test]
        fn cubics_exact_at_root(c in proptest::array::uniform4(-5.0f64..5.0)) {
            let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
            let exact = c[0] + c[1] / 2.0 + c[2] / 3.0 + c[3] / 4.0;
            let q = adaptive_simpson(f, 0.0, 1.0, &QuadratureConfig::default());
            prop_assert!((q.value - exact).abs() <= 1e-12);
            prop_assert_eq!(q.max_depth, 0);
        }

        #[test]
        fn result_within_sample_range(levels in proptest::collection::vec(0.0f64..1.0, 1..12)) {
            let k = levels.len();
            let f = |x: f64| levels[((x * k as f64) as usize).min(k - 1)];
            let (lo, hi) = levels.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            let q = adaptive_simpson(f, 0.0, 1.0, &QuadratureConfig::default());
            prop_assert!(q.value >= lo - 1e-12 && q.value <= hi + 1e-12);
        }
    }
}
