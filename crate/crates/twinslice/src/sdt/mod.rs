//! Slice digital twin: once per management window it clusters users into
//! multicast groups (a learned policy plus two baselines) and reserves slice
//! bandwidth and compute per group (a convex solver plus two baselines).

mod dbscan;
mod heuristic;
mod reserve;
mod rl;

pub use self::dbscan::{cluster_dbscan, dbscan_labels, DbscanParams};
pub use self::heuristic::cluster_heuristic;
pub use self::reserve::{
    reservation_objective, reserve_bnb, reserve_convex, reserve_historical, water_fill,
    ReservationDemand, SliceReservation,
};
pub use self::rl::{bucketize, cluster_rl, epsilon_greedy, grouping_from_actions, QTable, RlConfig};

use crate::domain::N_TYPES;
use crate::error::{Error, Result};
use crate::udt::UdtAbstraction;

/// Dimensions of the clustering feature space: position (2), preference per
/// type (8), expected swipe index per type (8), channel quality (1).
pub const FEATURE_DIMS: usize = 2 + 2 * N_TYPES + 1;

/// Normalized clustering features of one user; every component lies in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct UserFeature {
    pub user: usize,
    pub values: [f64; FEATURE_DIMS],
}

/// Builds the feature vectors the clusterers see, from twin abstractions.
///
/// Positions normalize by the area, expected swipe outcomes by the outcome
/// space `S + 1`, and channel quality by the cohort's best observed channel
/// (an empty cohort or an all-zero channel column yields zeros there).
pub fn build_user_features(
    abstractions: &[UdtAbstraction],
    area_m: [f64; 2],
    n_segments: usize,
) -> Vec<UserFeature> {
    let eta_max = abstractions
        .iter()
        .map(|a| a.est_spectral_bps_hz)
        .fold(0.0f64, f64::max);
    abstractions
        .iter()
        .map(|a| {
            let mut values = [0.0f64; FEATURE_DIMS];
            values[0] = (a.est_position.0 / area_m[0].max(f64::MIN_POSITIVE)).clamp(0.0, 1.0);
            values[1] = (a.est_position.1 / area_m[1].max(f64::MIN_POSITIVE)).clamp(0.0, 1.0);
            for t in 0..N_TYPES {
                values[2 + t] = a.preference.get(t).copied().unwrap_or(0.0).clamp(0.0, 1.0);
                let pmf = a.swipe_pmf_by_type.get(t);
                let expected: f64 = pmf.map_or(0.0, |p| {
                    p.iter()
                        .enumerate()
                        .map(|(i, &prob)| (i + 1) as f64 * prob)
                        .sum()
                });
                values[2 + N_TYPES + t] = (expected / (n_segments + 1) as f64).clamp(0.0, 1.0);
            }
            values[2 + 2 * N_TYPES] = if eta_max > 0.0 {
                (a.est_spectral_bps_hz / eta_max).clamp(0.0, 1.0)
            } else {
                0.0
            };
            UserFeature {
                user: a.user,
                values,
            }
        })
        .collect()
}

/// One multicast group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupInfo {
    pub id: usize,
    /// Station every member is served from.
    pub bs: usize,
    pub members: Vec<usize>,
}

/// A complete partition of users into groups, each pinned to one station.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    /// `assignment[user]` = group id.
    pub assignment: Vec<usize>,
    pub groups: Vec<GroupInfo>,
}

/// Marker for "not assigned yet" inside builders.
pub(crate) const UNASSIGNED: usize = usize::MAX;

impl Grouping {
    /// Validates and assembles a grouping from a dense assignment.
    ///
    /// Group ids must cover `0..group_bs.len()` with no empty group, and
    /// every user must be assigned.
    pub fn from_assignment(assignment: Vec<usize>, group_bs: &[usize]) -> Result<Self> {
        let n_groups = group_bs.len();
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_groups];
        for (user, &g) in assignment.iter().enumerate() {
            if g == UNASSIGNED {
                return Err(Error::UnassignedUser(user));
            }
            if g >= n_groups {
                return Err(Error::UnknownGroup(g));
            }
            members[g].push(user);
        }
        if let Some(empty) = members.iter().position(|m| m.is_empty()) {
            return Err(Error::EmptyGroup(empty));
        }
        let groups = members
            .into_iter()
            .zip(group_bs)
            .enumerate()
            .map(|(id, (members, &bs))| GroupInfo { id, bs, members })
            .collect();
        Ok(Grouping { assignment, groups })
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }
}

/// Folds `(key, bs)` pairs — one per user, in user order — into a dense
/// grouping: each distinct pair becomes a group on first appearance.
pub(crate) fn grouping_from_keys<K: Eq + std::hash::Hash + Copy>(
    pairs: &[(K, usize)],
) -> Result<Grouping> {
    let mut ids: std::collections::HashMap<(K, usize), usize> = std::collections::HashMap::new();
    let mut group_bs = Vec::new();
    let mut assignment = Vec::with_capacity(pairs.len());
    for &(key, bs) in pairs {
        let next = group_bs.len();
        let id = *ids.entry((key, bs)).or_insert_with(|| {
            group_bs.push(bs);
            next
        });
        assignment.push(id);
    }
    Grouping::from_assignment(assignment, &group_bs)
}
