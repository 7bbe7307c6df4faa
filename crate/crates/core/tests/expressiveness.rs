//! The model can never separate what HWL refinement cannot: whenever random
//! parameters separate two embeddings, `hwl_distinguish` must say so too.

use hyperrobust::hwl::{hwl_distinguish, Verdict};
use hyperrobust::model::{embedding, Architecture, FeatureSet, ModelParameters};
use hyperrobust::Hypergraph;
use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hypergraph(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Hypergraph {
    let edges: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let k = rng.gen_range(2..=n.min(4));
            (0..n).choose_multiple(rng, k)
        })
        .collect();
    Hypergraph::from_edge_list(n, edges).unwrap()
}

fn separated(a: &Hypergraph, b: &Hypergraph, params: &[ModelParameters]) -> usize {
    params
        .iter()
        .filter(|p| {
            let ea = embedding(a, &FeatureSet::constant(a), p).unwrap();
            let eb = embedding(b, &FeatureSet::constant(b), p).unwrap();
            (&ea - &eb).mapv(|x| x * x).sum().sqrt() > 1e-6
        })
        .count()
}

#[test]
fn model_separation_implies_hwl_separation() {
    let arch = Architecture::default();
    let params: Vec<ModelParameters> = (0..100).map(|s| ModelParameters::init(arch, s).unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut model_separates, mut permuted_pairs) = (0, 0);
    for i in 0..200 {
        let n = rng.gen_range(3..=6);
        let m = rng.gen_range(1..=3);
        let a = random_hypergraph(&mut rng, n, m);
        let b = if i % 4 == 0 {
            permuted_pairs += 1;
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            a.permute(&perm).unwrap()
        } else {
            random_hypergraph(&mut rng, n, m)
        };
        let count = separated(&a, &b, &params);
        if count >= 95 {
            model_separates += 1;
            assert_eq!(hwl_distinguish(&a, &b), Verdict::NonIsomorphic, "pair {i}: {a:?} vs {b:?}");
        }
        if hwl_distinguish(&a, &b) == Verdict::PossiblyIsomorphic {
            assert_eq!(count, 0, "pair {i}: model separated an HWL-equivalent pair");
        }
    }
    assert_eq!(permuted_pairs, 50);
    assert!(model_separates > 50, "only {model_separates} separated pairs");
}
