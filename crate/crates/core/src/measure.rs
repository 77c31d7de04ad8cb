//! The leaf-growth measure `ν_t` of a tree and two independent samplers.
//!
//! A leaf's mass is the product of `C(a_i, b_i)` over the splits on its
//! ancestral path, where `a_i` is the size of the side containing the leaf.
//! Masses are kept as logarithms; for small trees an exact rational copy is
//! kept as well.

use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::combinatorics::{c_weight, c_weight_f, ExactRational};
use crate::tree::{NodeId, PlaneBinaryTree};

/// Trees up to this size get exact rational masses.
pub const EXACT_CAP: usize = 30;

#[derive(Clone, Debug)]
pub struct LeafMeasure {
    leaves: Vec<NodeId>,
    log_mass: Vec<f64>,
    exact: Option<Vec<ExactRational>>,
}

impl LeafMeasure {
    /// Leaves in preorder.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn log_masses(&self) -> &[f64] {
        &self.log_mass
    }

    pub fn masses(&self) -> Vec<f64> {
        self.log_mass.iter().map(|l| l.exp()).collect()
    }

    pub fn exact_masses(&self) -> Option<&[ExactRational]> {
        self.exact.as_deref()
    }

    /// Preorder position of a leaf.
    pub fn position(&self, leaf: NodeId) -> Option<usize> {
        self.leaves.iter().position(|&l| l == leaf)
    }

    pub fn log_mass_of(&self, leaf: NodeId) -> Option<f64> {
        self.position(leaf).map(|i| self.log_mass[i])
    }

    /// Total mass by log-sum-exp; one up to rounding.
    pub fn total(&self) -> f64 {
        log_sum_exp(&self.log_mass).exp()
    }

    /// `ν(l) / μ(l)` where `μ` is uniform on the leaves.
    pub fn density_vs_uniform(&self) -> Vec<f64> {
        let k = self.leaves.len() as f64;
        self.log_mass.iter().map(|l| (l + k.ln()).exp()).collect()
    }

    pub fn extremes(&self) -> MassExtremes {
        let mut argmin = 0;
        let mut argmax = 0;
        for (i, &l) in self.log_mass.iter().enumerate() {
            if l < self.log_mass[argmin] {
                argmin = i;
            }
            if l > self.log_mass[argmax] {
                argmax = i;
            }
        }
        let exact = self.exact.as_ref().map(|ex| {
            let lo = ex.iter().min().cloned().expect("non-empty");
            let hi = ex.iter().max().cloned().expect("non-empty");
            (lo, hi)
        });
        MassExtremes {
            min: self.log_mass[argmin].exp(),
            max: self.log_mass[argmax].exp(),
            argmin: self.leaves[argmin],
            argmax: self.leaves[argmax],
            exact,
        }
    }

    /// CSV with one row per leaf in preorder.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("leaf,mass,log_mass,density\n");
        let density = self.density_vs_uniform();
        for (i, (&l, d)) in self.log_mass.iter().zip(density).enumerate() {
            let _ = writeln!(out, "{i},{:e},{l},{d}", l.exp());
        }
        out
    }

    pub fn to_dot(&self, tree: &PlaneBinaryTree) -> String {
        let mut slot = vec![f64::NAN; tree.n_nodes()];
        for (&leaf, &l) in self.leaves.iter().zip(&self.log_mass) {
            slot[leaf.index()] = l.exp();
        }
        tree.to_dot(Some(|v: NodeId| slot[v.index()]))
    }
}

#[derive(Clone, Debug)]
pub struct MassExtremes {
    pub min: f64,
    pub max: f64,
    pub argmin: NodeId,
    pub argmax: NodeId,
    /// Exact `(min, max)` when the measure carries rationals.
    pub exact: Option<(ExactRational, ExactRational)>,
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Leaf-growth measure of `t`; exact rationals are included when
/// `t.n_internal() <= EXACT_CAP`.
pub fn compute_measure(t: &PlaneBinaryTree) -> LeafMeasure {
    let exact_mode = t.n_internal() <= EXACT_CAP;
    let mut leaves = Vec::with_capacity(t.n_leaves());
    let mut log_mass = Vec::with_capacity(t.n_leaves());
    let mut exact = exact_mode.then(|| Vec::with_capacity(t.n_leaves()));

    let mut stack = vec![(t.root(), 0.0f64, exact_mode.then(ExactRational::one))];
    while let Some((v, lm, ex)) = stack.pop() {
        match t.children(v) {
            None => {
                leaves.push(v);
                log_mass.push(lm);
                if let (Some(out), Some(ex)) = (exact.as_mut(), ex) {
                    out.push(ex);
                }
            }
            Some((l, r)) => {
                let (a, b) = (t.subtree_size(l), t.subtree_size(r));
                let ex_r = ex.as_ref().map(|e| e * c_weight(b, a));
                let ex_l = ex.map(|e| e * c_weight(a, b));
                stack.push((r, lm + c_weight_f(b, a).ln(), ex_r));
                stack.push((l, lm + c_weight_f(a, b).ln(), ex_l));
            }
        }
    }
    LeafMeasure { leaves, log_mass, exact }
}

/// Smallest and largest leaf masses of `ν_t`.
pub fn mass_extremes(t: &PlaneBinaryTree) -> MassExtremes {
    compute_measure(t).extremes()
}

/// Uniform measure on the leaves of `t`.
pub fn uniform_measure(t: &PlaneBinaryTree) -> LeafMeasure {
    let leaves = t.leaves();
    let k = leaves.len();
    let log_mass = vec![-(k as f64).ln(); k];
    let exact = (t.n_internal() <= EXACT_CAP)
        .then(|| vec![BigRational::new(1.into(), (k as u64).into()); k]);
    LeafMeasure { leaves, log_mass, exact }
}

/// Outcome of a root-to-leaf descent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Descent {
    pub leaf: NodeId,
    /// `ln ν_t(leaf)`, the sum of `ln C` along the path.
    pub log_mass: f64,
    pub depth: usize,
}

/// Draws a leaf from `ν_t` by descending from the root, entering the left
/// subtree of an `(a, b)` split with probability `C(a, b)`.
pub fn sample_leaf_descent<R: Rng + ?Sized>(t: &PlaneBinaryTree, rng: &mut R) -> Descent {
    let mut v = t.root();
    let mut log_mass = 0.0;
    let mut depth = 0;
    while let Some((l, r)) = t.children(v) {
        let (a, b) = (t.subtree_size(l), t.subtree_size(r));
        let c = c_weight_f(a, b);
        if rng.random::<f64>() < c {
            log_mass += c.ln();
            v = l;
        } else {
            log_mass += c_weight_f(b, a).ln();
            v = r;
        }
        depth += 1;
    }
    Descent { leaf: v, log_mass, depth }
}

/// Internal nodes with children before parents, left before right.
fn postorder_internal(t: &PlaneBinaryTree) -> Vec<NodeId> {
    let mut order = Vec::with_capacity(t.n_internal());
    let mut stack = vec![t.root()];
    while let Some(v) = stack.pop() {
        if let Some((l, r)) = t.children(v) {
            order.push(v);
            stack.push(l);
            stack.push(r);
        }
    }
    order.reverse();
    order
}

/// Result of one token game; `pile[v]` is the size of the movable pile
/// formed at internal vertex `v`.
#[derive(Clone, Debug)]
pub struct TokenGame {
    pub winner: NodeId,
    pub piles: Vec<(NodeId, u64)>,
}

/// Plays the token game on `t`: every leaf starts with one token carrying
/// its own label, and at each internal vertex (in postorder) the piles of
/// the two children play a best-of-three. The winning label survives with
/// `n_l + n_r + 1` tokens.
pub fn play_token_game<R: Rng + ?Sized>(t: &PlaneBinaryTree, rng: &mut R) -> TokenGame {
    let mut pile: Vec<(NodeId, u64)> = (0..t.n_nodes()).map(|_| (t.root(), 0)).collect();
    for leaf in t.leaves() {
        pile[leaf.index()] = (leaf, 1);
    }
    let mut piles = Vec::with_capacity(t.n_internal());
    for v in postorder_internal(t) {
        let (l, r) = t.children(v).expect("internal");
        let (label_l, mut n_l) = pile[l.index()];
        let (label_r, mut n_r) = pile[r.index()];
        let mut wins_l = 0;
        for _ in 0..3 {
            if rng.random_range(0..n_l + n_r) < n_l {
                n_l += 1;
                wins_l += 1;
            } else {
                n_r += 1;
            }
        }
        let label = if wins_l >= 2 { label_l } else { label_r };
        pile[v.index()] = (label, n_l + n_r - 2);
        piles.push((v, n_l + n_r - 2));
    }
    TokenGame { winner: pile[t.root().index()].0, piles }
}

/// Draws a leaf from `ν_t` with the token game.
pub fn sample_leaf_token_game<R: Rng + ?Sized>(t: &PlaneBinaryTree, rng: &mut R) -> NodeId {
    play_token_game(t, rng).winner
}

/// Exact probability that the player with `n_l` tokens wins at least two of
/// three matches, by enumerating all eight outcome sequences.
pub fn match_win_probability(n_l: u64, n_r: u64) -> ExactRational {
    let mut total = ExactRational::zero();
    for outcome in 0u8..8 {
        let (mut l, mut r) = (n_l, n_r);
        let mut p = ExactRational::one();
        let mut wins = 0;
        for k in 0..3 {
            let den = (l + r) as i64;
            if outcome >> k & 1 == 1 {
                p *= BigRational::new((l as i64).into(), den.into());
                l += 1;
                wins += 1;
            } else {
                p *= BigRational::new((r as i64).into(), den.into());
                r += 1;
            }
        }
        if wins >= 2 {
            total += p;
        }
    }
    total
}

/// Exact law of the token game's winning leaf, in leaf preorder, computed by
/// propagating label distributions bottom-up through the match outcomes.
pub fn token_game_law_exact(t: &PlaneBinaryTree) -> Vec<ExactRational> {
    let mut dist: Vec<Vec<(NodeId, ExactRational)>> = vec![Vec::new(); t.n_nodes()];
    let mut tokens = vec![0u64; t.n_nodes()];
    for leaf in t.leaves() {
        dist[leaf.index()] = vec![(leaf, ExactRational::one())];
        tokens[leaf.index()] = 1;
    }
    for v in postorder_internal(t) {
        let (l, r) = t.children(v).expect("internal");
        let (n_l, n_r) = (tokens[l.index()], tokens[r.index()]);
        let w = match_win_probability(n_l, n_r);
        let lose = ExactRational::one() - &w;
        let mut merged = std::mem::take(&mut dist[l.index()]);
        for (_, p) in merged.iter_mut() {
            *p *= &w;
        }
        merged.extend(std::mem::take(&mut dist[r.index()]).into_iter().map(|(x, p)| (x, p * &lose)));
        dist[v.index()] = merged;
        tokens[v.index()] = n_l + n_r + 1;
    }
    let law = std::mem::take(&mut dist[t.root().index()]);
    t.leaves()
        .into_iter()
        .map(|leaf| law.iter().find(|(x, _)| *x == leaf).map(|(_, p)| p.clone()).unwrap_or_default())
        .collect()
}
