use std::collections::HashMap;

use leafgrowth::combinatorics::{catalan_u128, split_prob_f};
use leafgrowth::rng::{stream, Purpose};
use leafgrowth::stats::chi_square_gof;
use leafgrowth::tree::{enumerate_all, remy_sample};
use leafgrowth::PlaneBinaryTree;
use proptest::prelude::*;

#[test]
fn remy_is_uniform_on_size_four() {
    let trees = enumerate_all(4).unwrap();
    let index: HashMap<String, usize> = trees.iter().enumerate().map(|(i, t)| (t.encode(), i)).collect();
    let mut rng = stream(2024, 0, Purpose::Tree);
    let mut counts = vec![0u64; trees.len()];
    for _ in 0..100_000 {
        counts[index[&remy_sample(4, &mut rng).encode()]] += 1;
    }
    let probs = vec![1.0 / 14.0; 14];
    let r = chi_square_gof(&counts, &probs);
    assert!(r.p_value > 1e-3, "{r:?}");
}

#[test]
fn remy_profile_frequencies_at_size_hundred() {
    let mut rng = stream(7, 0, Purpose::Tree);
    let draws = 40_000;
    let mut counts = vec![0u64; 100];
    for _ in 0..draws {
        counts[remy_sample(100, &mut rng).profile().unwrap().a] += 1;
    }
    for (a, &c) in counts.iter().enumerate() {
        let p = split_prob_f(a, 99 - a);
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        // Leave room for the 100 simultaneous comparisons.
        assert!((c as f64 / draws as f64 - p).abs() < 4.5 * se + 1e-9, "a = {a}");
    }
}

#[test]
fn remy_size_one_is_unique() {
    let mut rng = stream(1, 0, Purpose::Tree);
    for _ in 0..100 {
        assert_eq!(remy_sample(1, &mut rng).encode(), "(()())");
    }
}

#[test]
fn enumeration_of_size_eight() {
    let trees = enumerate_all(8).unwrap();
    assert_eq!(trees.len() as u128, catalan_u128(8));
    let mut words: Vec<String> = trees.iter().map(|t| t.encode()).collect();
    words.sort();
    words.dedup();
    assert_eq!(words.len(), 1430);
    for t in &trees {
        assert_eq!(PlaneBinaryTree::decode(&t.encode()).unwrap(), *t);
    }
}

fn arb_tree() -> impl Strategy<Value = PlaneBinaryTree> {
    (0usize..60, any::<u64>()).prop_map(|(n, seed)| remy_sample(n, &mut stream(seed, 0, Purpose::Tree)))
}

proptest! {
    #[test]
    fn round_trip_and_counts(t in arb_tree()) {
        t.validate().unwrap();
        prop_assert_eq!(t.n_leaves(), t.n_internal() + 1);
        let back: PlaneBinaryTree = t.encode().parse().unwrap();
        prop_assert_eq!(&back, &t);
    }

    #[test]
    fn grow_touches_only_the_path(t in arb_tree(), pick in any::<prop::sample::Index>()) {
        let leaves = t.leaves();
        let l = leaves[pick.index(leaves.len())];
        let before = t.cached_sizes();
        let mut g = t.clone();
        g.grow(l).unwrap();
        g.validate().unwrap();
        prop_assert_eq!(g.n_internal(), t.n_internal() + 1);
        prop_assert_eq!(g.n_leaves(), t.n_leaves() + 1);
        let mut on_path = vec![false; t.n_nodes()];
        let mut v = Some(l);
        while let Some(u) = v {
            on_path[u.index()] = true;
            v = t.parent(u);
        }
        let after = g.cached_sizes();
        for i in 0..t.n_nodes() {
            if on_path[i] {
                prop_assert_eq!(after[i], before[i] + 1);
            } else {
                prop_assert_eq!(after[i], before[i]);
            }
        }
    }

    #[test]
    fn decode_rejects_truncations(t in arb_tree(), cut in 1usize..200) {
        let w = t.encode();
        let cut = cut.min(w.len() - 1);
        prop_assert!(PlaneBinaryTree::decode(&w[..cut]).is_err());
    }
}
