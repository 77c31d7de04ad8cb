//! The growth chain: each step grows the current tree at a leaf drawn from
//! its leaf-growth measure, so the tree stays uniform at every size.

use std::collections::HashMap;

use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::combinatorics::{catalan, ExactRational};
use crate::error::{Error, Result};
use crate::measure::{compute_measure, sample_leaf_descent, Descent};
use crate::rng::{stream, Purpose, SimRng};
use crate::stats::pearson;
use crate::tree::{enumerate_all, remy_sample, PlaneBinaryTree};
use crate::GAMMA;

/// Default cap on chain length.
pub const GROWTH_CAP: usize = 1_000_000;
/// Largest `n` for the exact pushforward check.
pub const PUSHFORWARD_CAP: usize = 7;
/// Largest size for which full mass vectors are computed.
pub const FULL_MEASURE_CAP: usize = 100_000;

/// What a checkpoint records about `T_n` and its `ν`-sampled leaf.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckpointRecord {
    pub n: usize,
    /// `−log M_n`, where `M_n` is the mass of the sampled leaf.
    pub log_mass: f64,
    pub leaf_height: usize,
    /// Internal path length of `T_n`.
    pub path_length: u64,
}

#[derive(Clone, Debug)]
pub struct GrowthState<R = SimRng> {
    tree: PlaneBinaryTree,
    path_length: u64,
    rng: R,
}

impl<R: Rng> GrowthState<R> {
    pub fn new(rng: R) -> Self {
        GrowthState { tree: PlaneBinaryTree::leaf(), path_length: 0, rng }
    }

    pub fn tree(&self) -> &PlaneBinaryTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n_internal()
    }

    pub fn path_length(&self) -> u64 {
        self.path_length
    }

    pub fn into_tree(self) -> PlaneBinaryTree {
        self.tree
    }

    /// Samples a leaf of the current tree without growing it.
    pub fn sample(&mut self) -> CheckpointRecord {
        let d = sample_leaf_descent(&self.tree, &mut self.rng);
        self.record(&d)
    }

    fn record(&self, d: &Descent) -> CheckpointRecord {
        CheckpointRecord {
            n: self.n(),
            log_mass: -d.log_mass,
            leaf_height: d.depth,
            path_length: self.path_length,
        }
    }

    /// One step `T_n → T_{n+1}`; the record describes the leaf of `T_n`
    /// that was grown.
    pub fn step(&mut self) -> CheckpointRecord {
        let d = sample_leaf_descent(&self.tree, &mut self.rng);
        let rec = self.record(&d);
        self.tree.grow(d.leaf).expect("descent ends at a leaf");
        self.path_length += d.depth as u64;
        rec
    }
}

/// Runs one chain from the single leaf to size `n_target`, recording at
/// every size in `checkpoints` (sizes above `n_target` are ignored).
pub fn run<R: Rng>(n_target: usize, checkpoints: &[usize], rng: R) -> Result<Vec<CheckpointRecord>> {
    run_with_cap(n_target, checkpoints, rng, GROWTH_CAP).map(|(records, _)| records)
}

pub fn run_with_cap<R: Rng>(
    n_target: usize,
    checkpoints: &[usize],
    rng: R,
    cap: usize,
) -> Result<(Vec<CheckpointRecord>, GrowthState<R>)> {
    if n_target > cap {
        return Err(Error::AboveCap { what: "growth chain length", n: n_target, cap });
    }
    let mut marks = vec![false; n_target + 1];
    for &c in checkpoints {
        if c <= n_target {
            marks[c] = true;
        }
    }
    let mut state = GrowthState::new(rng);
    let mut records = Vec::new();
    for mark in &marks[..n_target] {
        let rec = state.step();
        if *mark {
            records.push(rec);
        }
    }
    if marks[n_target] {
        records.push(state.sample());
    }
    Ok((records, state))
}

/// Independent chains for `replicas` replicas, each on its own stream.
pub fn run_replicas(
    n_target: usize,
    checkpoints: &[usize],
    replicas: usize,
    master_seed: u64,
) -> Result<Vec<Vec<CheckpointRecord>>> {
    if n_target > GROWTH_CAP {
        return Err(Error::AboveCap { what: "growth chain length", n: n_target, cap: GROWTH_CAP });
    }
    (0..replicas)
        .into_par_iter()
        .map(|r| run(n_target, checkpoints, stream(master_seed, r as u64, Purpose::Growth)))
        .collect()
}

/// Grows a chain to size `n` and returns the tree.
pub fn grow_to<R: Rng>(n: usize, rng: R) -> PlaneBinaryTree {
    let mut state = GrowthState::new(rng);
    for _ in 0..n {
        state.step();
    }
    state.into_tree()
}

/// Maximum of `|Σ_t (1/Cat(n)) Σ_l ν_t(l) 1{grow(t, l) = t'} − 1/Cat(n+1)|`
/// over `t' ∈ T_{n+1}`, in exact arithmetic.
pub fn uniformity_pushforward_exact(n: usize) -> Result<ExactRational> {
    if n > PUSHFORWARD_CAP {
        return Err(Error::AboveCap { what: "pushforward check size", n, cap: PUSHFORWARD_CAP });
    }
    let weight = catalan(n).recip();
    let mut law: HashMap<String, ExactRational> =
        enumerate_all(n + 1)?.iter().map(|t| (t.encode(), ExactRational::zero())).collect();
    for t in enumerate_all(n)? {
        let m = compute_measure(&t);
        let masses = m.exact_masses().expect("exact below cap");
        for (&leaf, mass) in m.leaves().iter().zip(masses) {
            let key = t.grown(leaf)?.encode();
            let slot = law
                .get_mut(&key)
                .ok_or_else(|| Error::InvalidTree(format!("grown tree {key} is not in T_{}", n + 1)))?;
            *slot += mass * &weight;
        }
    }
    let target = catalan(n + 1).recip();
    Ok(law.values().map(|p| (p - &target).abs()).max().unwrap_or_default())
}

/// Counts of end states of `runs` chains grown to size `n`, in the order of
/// `enumerate_all(n)`.
pub fn end_state_counts(n: usize, runs: usize, master_seed: u64) -> Result<Vec<u64>> {
    let trees = enumerate_all(n)?;
    let index: HashMap<String, usize> = trees.iter().enumerate().map(|(i, t)| (t.encode(), i)).collect();
    let hits: Vec<usize> = (0..runs)
        .into_par_iter()
        .map(|r| index[&grow_to(n, stream(master_seed, r as u64, Purpose::Growth)).encode()])
        .collect();
    let mut counts = vec![0; trees.len()];
    for h in hits {
        counts[h] += 1;
    }
    Ok(counts)
}

/// Monte-Carlo estimate, over uniform trees of size `n`, of the `ν`-mass of
/// the leaves whose mass lies in `[n^{−γ−ε}, n^{−γ+ε}]`, for each `ε`.
pub fn mass_concentration_profile(n: usize, replicas: usize, eps: &[f64], master_seed: u64) -> Result<Vec<f64>> {
    if n > FULL_MEASURE_CAP {
        return Err(Error::AboveCap { what: "full-measure tree size", n, cap: FULL_MEASURE_CAP });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("mass concentration needs n >= 2, got {n}")));
    }
    let ln_n = (n as f64).ln();
    let per_replica: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(master_seed, r as u64, Purpose::Tree);
            let m = compute_measure(&remy_sample(n, &mut rng));
            eps.iter()
                .map(|e| {
                    let (lo, hi) = (-(GAMMA + e) * ln_n, -(GAMMA - e) * ln_n);
                    m.log_masses().iter().filter(|&&l| l >= lo && l <= hi).map(|l| l.exp()).sum()
                })
                .collect()
        })
        .collect();
    Ok((0..eps.len())
        .map(|j| per_replica.iter().map(|v| v[j]).sum::<f64>() / replicas as f64)
        .collect())
}

/// Statistic compared between two times of one chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
pub enum MixingStatistic {
    /// Internal path length scaled by `k^{−3/2}`.
    #[default]
    PathLength,
    /// Height scaled by `k^{−1/2}`.
    Height,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingResult {
    pub m: usize,
    pub n: usize,
    pub replicas: usize,
    pub correlation: f64,
    /// `(1 − r²)/√(replicas − 1)`.
    pub std_error: f64,
}

fn statistic(state: &GrowthState<SimRng>, which: MixingStatistic) -> f64 {
    let k = state.n().max(1) as f64;
    match which {
        MixingStatistic::PathLength => state.path_length() as f64 / k.powf(1.5),
        MixingStatistic::Height => state.tree().height() as f64 / k.sqrt(),
    }
}

/// Sample correlation of a statistic of `T_m` and of `T_n` on the same
/// chain, over independent chains.
pub fn mixing_correlation(
    m: usize,
    n: usize,
    replicas: usize,
    which: MixingStatistic,
    master_seed: u64,
) -> Result<MixingResult> {
    if m > n || m == 0 {
        return Err(Error::InvalidArgument(format!("mixing needs 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if n > GROWTH_CAP {
        return Err(Error::AboveCap { what: "growth chain length", n, cap: GROWTH_CAP });
    }
    if replicas < 3 {
        return Err(Error::InvalidArgument(format!("mixing needs at least 3 replicas, got {replicas}")));
    }
    let pairs: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut state = GrowthState::new(stream(master_seed, r as u64, Purpose::Growth));
            for _ in 0..m {
                state.step();
            }
            let early = statistic(&state, which);
            for _ in m..n {
                state.step();
            }
            (early, statistic(&state, which))
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let correlation = if m == n { 1.0 } else { pearson(&xs, &ys) };
    let std_error = (1.0 - correlation * correlation) / ((replicas - 1) as f64).sqrt();
    Ok(MixingResult { m, n, replicas, correlation, std_error })
}
