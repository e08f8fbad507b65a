//! Contextual-bandit grouping: tabular Q-learning over bucketized viewer
//! features.
//!
//! Each user's action is a group slot at their serving station. Rewards are
//! utility deltas reported by an injected evaluator (in production, the
//! twin-side emulation), so the table learns which slot suits which kind of
//! viewer. The table is meant to persist across windows: later calls warm-
//! start from everything earlier calls learned.

use super::{grouping_from_keys, Grouping, UserFeature, FEATURE_DIMS};
use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::HashMap;

/// Bins per feature dimension when bucketizing.
const BUCKET_BINS: u64 = 3;

/// Hyperparameters for [`cluster_rl`].
#[derive(Debug, Clone, Copy)]
pub struct RlConfig {
    /// Group slots available at each station.
    pub g_max_per_bs: usize,
    /// Full passes over the (shuffled) user list.
    pub episodes: usize,
    /// Step size of the running value estimate.
    pub learning_rate: f64,
    /// Exploration probability at the first and last episode; decays
    /// linearly in between.
    pub epsilon_start: f64,
    pub epsilon_end: f64,
}

impl Default for RlConfig {
    fn default() -> Self {
        RlConfig {
            g_max_per_bs: 8,
            episodes: 40,
            learning_rate: 0.5,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
        }
    }
}

/// Running value estimates per (feature bucket, action), with visit counts.
#[derive(Debug, Clone, Default)]
pub struct QTable {
    values: HashMap<(u64, usize), f64>,
    counts: HashMap<(u64, usize), u64>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Value estimate; unvisited cells read as zero.
    pub fn value(&self, bucket: u64, action: usize) -> f64 {
        self.values.get(&(bucket, action)).copied().unwrap_or(0.0)
    }

    pub fn visits(&self, bucket: u64, action: usize) -> u64 {
        self.counts.get(&(bucket, action)).copied().unwrap_or(0)
    }

    /// Exponential-recency update `Q += eta * (reward - Q)`.
    pub fn update(&mut self, bucket: u64, action: usize, reward: f64, eta: f64) {
        let q = self.values.entry((bucket, action)).or_insert(0.0);
        *q += eta * (reward - *q);
        *self.counts.entry((bucket, action)).or_insert(0) += 1;
    }

    /// Number of visited (bucket, action) cells.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Maps a normalized feature vector to a discrete context id: three bins
/// per dimension, read as a base-3 number.
pub fn bucketize(feature: &UserFeature) -> u64 {
    let mut id: u64 = 0;
    for &v in &feature.values {
        let bin = ((v.clamp(0.0, 1.0) * BUCKET_BINS as f64) as u64).min(BUCKET_BINS - 1);
        id = id * BUCKET_BINS + bin;
    }
    debug_assert!(FEATURE_DIMS as u32 * 2 < 64, "bucket id fits in u64");
    id
}

/// Picks one of `actions` for the given context: uniformly with probability
/// `epsilon`, greedily otherwise. Greedy ties resolve to the action listed
/// first (callers list group slots in ascending order, so ties go to the
/// lowest slot).
pub fn epsilon_greedy<R: Rng>(
    q: &QTable,
    bucket: u64,
    actions: &[usize],
    epsilon: f64,
    rng: &mut R,
) -> usize {
    assert!(!actions.is_empty(), "no actions to choose from");
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        return actions[rng.gen_range(0..actions.len())];
    }
    let mut best = actions[0];
    for &a in &actions[1..] {
        if q.value(bucket, a) > q.value(bucket, best) {
            best = a;
        }
    }
    best
}

/// Assembles a grouping from per-user slot choices: users sharing a slot at
/// the same station form one group, and slots nobody chose simply produce
/// no group.
pub fn grouping_from_actions(
    slots: &[usize],
    bs_of: &[usize],
    g_max_per_bs: usize,
) -> Result<Grouping> {
    let pairs: Vec<(usize, usize)> = slots
        .iter()
        .zip(bs_of)
        .map(|(&slot, &bs)| (bs * g_max_per_bs + slot, bs))
        .collect();
    grouping_from_keys(&pairs)
}

/// Learned grouping: hill-climbs the assignment with ε-greedy moves whose
/// rewards are utility deltas, then reads the final grouping greedily from
/// the table.
///
/// `utility` scores a candidate grouping (higher is better); it is only
/// called when a move actually changes the grouping, since an unchanged
/// grouping has a delta of exactly zero. Deterministic for a fixed seed,
/// table, and evaluator.
pub fn cluster_rl<R, F>(
    features: &[UserFeature],
    bs_of: &[usize],
    config: &RlConfig,
    q: &mut QTable,
    mut utility: F,
    rng: &mut R,
) -> Result<Grouping>
where
    R: Rng,
    F: FnMut(&Grouping) -> Result<f64>,
{
    if features.is_empty() {
        return Err(Error::NoUsers);
    }
    assert!(config.g_max_per_bs >= 1, "need at least one group slot");
    assert!(config.episodes >= 1, "need at least one episode");
    let n = features.len();
    let buckets: Vec<u64> = features.iter().map(bucketize).collect();
    let actions_of = |bs: usize| -> Vec<usize> {
        (0..config.g_max_per_bs)
            .map(|g| bs * config.g_max_per_bs + g)
            .collect()
    };

    // Start from the table's current greedy choice (slot 0 everywhere when
    // the table is cold).
    let mut slots: Vec<usize> = (0..n)
        .map(|u| {
            let acts = actions_of(bs_of[u]);
            let a = epsilon_greedy(q, buckets[u], &acts, 0.0, rng);
            a - bs_of[u] * config.g_max_per_bs
        })
        .collect();
    let initial = grouping_from_actions(&slots, bs_of, config.g_max_per_bs)?;
    let mut current_utility = utility(&initial)?;

    for episode in 0..config.episodes {
        let progress = episode as f64 / (config.episodes - 1).max(1) as f64;
        let epsilon =
            config.epsilon_start - (config.epsilon_start - config.epsilon_end) * progress;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        for &u in &order {
            let acts = actions_of(bs_of[u]);
            let action = epsilon_greedy(q, buckets[u], &acts, epsilon, rng);
            let slot = action - bs_of[u] * config.g_max_per_bs;
            if slot == slots[u] {
                // Keeping the user where they are cannot change the
                // grouping, so the delta is zero without emulating.
                q.update(buckets[u], action, 0.0, config.learning_rate);
                continue;
            }
            let mut proposal = slots.clone();
            proposal[u] = slot;
            let next = grouping_from_actions(&proposal, bs_of, config.g_max_per_bs)?;
            let next_utility = utility(&next)?;
            let reward = next_utility - current_utility;
            q.update(buckets[u], action, reward, config.learning_rate);
            slots = proposal;
            current_utility = next_utility;
        }
    }

    // Final pass: pure exploitation of everything learned.
    let final_slots: Vec<usize> = (0..n)
        .map(|u| {
            let acts = actions_of(bs_of[u]);
            epsilon_greedy(q, buckets[u], &acts, 0.0, rng) - bs_of[u] * config.g_max_per_bs
        })
        .collect();
    grouping_from_actions(&final_slots, bs_of, config.g_max_per_bs)
}
