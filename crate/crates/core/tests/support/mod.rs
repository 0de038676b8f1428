//! Reference implementations used only by tests. They favour obviousness
//! over speed and share no code with the library beyond its public types.

#![allow(dead_code)]

use rand::Rng;
use rmrl_core::measures::{block_diversity, PartitionCountConfig};
use rmrl_core::trajectory::StateVec;

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += (x - y) * (x - y);
    }
    acc.sqrt()
}

/// Minimum total cost over every monotone alignment path from `(0, 0)` to
/// `(n-1, m-1)`, found by walking each path. Costs are non-negative, so a
/// partial path already at or above the best total is abandoned.
pub fn dtw_by_paths(a: &[StateVec], b: &[StateVec]) -> f64 {
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| euclid(x.values(), y.values())).collect())
        .collect();
    let mut best = f64::INFINITY;
    walk(&cost, 0, 0, 0.0, &mut best);
    best
}

fn walk(cost: &[Vec<f64>], i: usize, j: usize, acc: f64, best: &mut f64) {
    let acc = cost[i][j] + acc;
    if acc >= *best {
        return;
    }
    let (n, m) = (cost.len(), cost[0].len());
    if i + 1 == n && j + 1 == m {
        if acc < *best {
            *best = acc;
        }
        return;
    }
    if i + 1 < n {
        walk(cost, i + 1, j, acc, best);
    }
    if j + 1 < m {
        walk(cost, i, j + 1, acc, best);
    }
    if i + 1 < n && j + 1 < m {
        walk(cost, i + 1, j + 1, acc, best);
    }
}

/// Tries all `2^(n-1)` cuts of the trajectory into contiguous blocks and
/// returns the largest number of qualifying blocks in any of them.
pub fn phi_by_partitions(traj: &[StateVec], cfg: &PartitionCountConfig) -> usize {
    let n = traj.len();
    let qualifies = |s: usize, e: usize| {
        e - s >= cfg.block_width && block_diversity(&cfg.metric, &traj[s..e]).unwrap() < cfg.alpha
    };
    let mut best = 0;
    for mask in 0u32..(1 << (n - 1)) {
        let mut start = 0;
        let mut count = 0;
        for cut in 1..=n {
            if cut == n || mask & (1 << (cut - 1)) != 0 {
                if qualifies(start, cut) {
                    count += 1;
                }
                start = cut;
            }
        }
        best = best.max(count);
    }
    best
}

/// Textbook GAE written as explicit discounted sums of TD residuals, with no
/// backward recursion. `cut[t]` stops the sum after step `t`; `next_value[t]`
/// is the bootstrap used for step `t`'s residual.
pub fn gae_by_sums(rewards: &[f64], values: &[f64], next_value: &[f64], cut: &[bool], gamma: f64, tau: f64) -> Vec<f64> {
    let n = rewards.len();
    let delta: Vec<f64> = (0..n).map(|t| rewards[t] + gamma * next_value[t] - values[t]).collect();
    (0..n)
        .map(|t| {
            let mut sum = 0.0;
            let mut w = 1.0;
            for k in t..n {
                sum += w * delta[k];
                if cut[k] {
                    break;
                }
                w *= gamma * tau;
            }
            sum
        })
        .collect()
}

pub fn random_seq<R: Rng>(rng: &mut R, len: usize, dim: usize) -> Vec<StateVec> {
    (0..len)
        .map(|_| StateVec::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
        .collect()
}

/// Bounded 2-D random walk: a uniformly random heading each step, reflected
/// back into the unit square.
pub fn random_walk<R: Rng>(rng: &mut R, len: usize, step: f64) -> Vec<[f64; 2]> {
    let mut p = [rng.random_range(0.2..0.8), rng.random_range(0.2..0.8)];
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        for (c, d) in p.iter_mut().zip([theta.cos(), theta.sin()]) {
            *c += step * d;
            if *c < 0.0 {
                *c = -*c;
            }
            if *c > 1.0 {
                *c = 2.0 - *c;
            }
        }
        out.push(p);
    }
    out
}

/// A random walk that freezes in place from `freeze_at` to the end.
pub fn frozen_after<R: Rng>(rng: &mut R, len: usize, step: f64, freeze_at: usize) -> Vec<[f64; 2]> {
    let mut walk = random_walk(rng, len, step);
    let hold = walk[freeze_at.saturating_sub(1).min(len - 1)];
    for p in &mut walk[freeze_at..] {
        *p = hold;
    }
    walk
}
