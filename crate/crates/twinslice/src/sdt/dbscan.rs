//! Density-based grouping of viewer features.
//!
//! A from-scratch DBSCAN over the normalized feature vectors: dense
//! neighborhoods become groups, sparse outliers fall back to singleton
//! groups, and every resulting cluster is split by serving base station so
//! a group never straddles two cells.

use super::{grouping_from_keys, Grouping, UserFeature, FEATURE_DIMS};
use crate::error::Result;

/// Density parameters: neighborhood radius and the minimum population
/// (including the point itself) that makes a point a core point.
#[derive(Debug, Clone, Copy)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

fn sq_dist(a: &[f64; FEATURE_DIMS], b: &[f64; FEATURE_DIMS]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Raw DBSCAN labels: `Some(cluster)` with clusters numbered from 0 in
/// discovery order, `None` for noise.
///
/// Points are visited in index order; a core point's neighborhood (which
/// includes the point itself) seeds a breadth-first expansion, and border
/// points join the first cluster that reaches them.
pub fn dbscan_labels(points: &[[f64; FEATURE_DIMS]], params: DbscanParams) -> Vec<Option<usize>> {
    let n = points.len();
    let eps_sq = params.eps * params.eps;
    let neighbors = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| sq_dist(&points[i], &points[j]) <= eps_sq)
            .collect()
    };
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next_cluster = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seed = neighbors(i);
        if seed.len() < params.min_pts {
            continue; // noise, unless a later cluster claims it as border
        }
        let cluster = next_cluster;
        next_cluster += 1;
        labels[i] = Some(cluster);
        let mut queue: Vec<usize> = seed;
        let mut head = 0;
        while head < queue.len() {
            let j = queue[head];
            head += 1;
            if labels[j].is_none() {
                labels[j] = Some(cluster);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let reach = neighbors(j);
            if reach.len() >= params.min_pts {
                queue.extend(reach);
            }
        }
    }
    labels
}

/// Group viewers by feature density.
///
/// Noise points become singleton groups; each dense cluster is split by its
/// members' serving base stations. Group ids are dense and follow first
/// appearance in user order.
pub fn cluster_dbscan(
    features: &[UserFeature],
    bs_of: &[usize],
    params: DbscanParams,
) -> Result<Grouping> {
    let points: Vec<[f64; FEATURE_DIMS]> = features.iter().map(|f| f.values).collect();
    let labels = dbscan_labels(&points, params);
    // Key: cluster id, or a unique `n + u` for noise user u so outliers can
    // never merge with anyone. The station half of the pair keeps clusters
    // from straddling cells.
    let n = features.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .map(|u| (labels[u].unwrap_or(n + u), bs_of[u]))
        .collect();
    grouping_from_keys(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feat(user: usize, head: &[f64]) -> UserFeature {
        let mut values = [0.0; FEATURE_DIMS];
        values[..head.len()].copy_from_slice(head);
        UserFeature { user, values }
    }

    #[test]
    fn two_blobs_become_two_clusters() {
        let mut points = Vec::new();
        for k in 0..4 {
            points.push(feat(k, &[0.01 * k as f64, 0.0]));
        }
        for k in 0..4 {
            points.push(feat(4 + k, &[0.9 + 0.01 * k as f64, 0.0]));
        }
        let raw: Vec<_> = points.iter().map(|f| f.values).collect();
        let labels = dbscan_labels(&raw, DbscanParams { eps: 0.1, min_pts: 3 });
        assert!(labels.iter().all(|l| l.is_some()));
        assert_eq!(labels[0], labels[3]);
        assert_eq!(labels[4], labels[7]);
        assert_ne!(labels[0], labels[4]);
    }

    #[test]
    fn lone_point_is_noise_and_becomes_a_singleton_group() {
        let points = vec![
            feat(0, &[0.0]),
            feat(1, &[0.01]),
            feat(2, &[0.02]),
            feat(3, &[5.0]),
        ];
        let raw: Vec<_> = points.iter().map(|f| f.values).collect();
        let labels = dbscan_labels(&raw, DbscanParams { eps: 0.1, min_pts: 3 });
        assert_eq!(labels[3], None);
        let grouping =
            cluster_dbscan(&points, &[0, 0, 0, 0], DbscanParams { eps: 0.1, min_pts: 3 }).unwrap();
        assert_eq!(grouping.n_groups(), 2);
        assert_eq!(grouping.assignment[0], grouping.assignment[1]);
        assert_ne!(grouping.assignment[3], grouping.assignment[0]);
    }

    #[test]
    fn clusters_never_straddle_base_stations() {
        let points: Vec<UserFeature> = (0..6)
            .map(|u| feat(u, &[0.001 * u as f64]))
            .collect();
        let grouping = cluster_dbscan(
            &points,
            &[0, 0, 0, 1, 1, 1],
            DbscanParams { eps: 0.5, min_pts: 2 },
        )
        .unwrap();
        assert_eq!(grouping.n_groups(), 2, "one dense cluster, two cells");
        for g in &grouping.groups {
            let stations: Vec<usize> = g.members.iter().map(|&_u| g.bs).collect();
            assert!(stations.iter().all(|&s| s == g.bs));
        }
        assert_eq!(grouping.groups[0].members, vec![0, 1, 2]);
        assert_eq!(grouping.groups[1].members, vec![3, 4, 5]);
    }

    /// Textbook reference: independently recompute labels with an
    /// unoptimized three-pass algorithm and compare as partitions
    /// (label names may differ; noise must match exactly).
    fn reference_dbscan(points: &[[f64; FEATURE_DIMS]], params: DbscanParams) -> Vec<Option<usize>> {
        let n = points.len();
        let eps_sq = params.eps * params.eps;
        let mut labels: Vec<Option<usize>> = vec![None; n];
        let mut visited = vec![false; n];
        let mut cluster = 0usize;
        for p in 0..n {
            if visited[p] {
                continue;
            }
            visited[p] = true;
            let mut seeds: Vec<usize> = (0..n)
                .filter(|&q| sq_dist(&points[p], &points[q]) <= eps_sq)
                .collect();
            if seeds.len() < params.min_pts {
                continue;
            }
            labels[p] = Some(cluster);
            let mut idx = 0;
            while idx < seeds.len() {
                let q = seeds[idx];
                idx += 1;
                if !visited[q] {
                    visited[q] = true;
                    let reach: Vec<usize> = (0..n)
                        .filter(|&r| sq_dist(&points[q], &points[r]) <= eps_sq)
                        .collect();
                    if reach.len() >= params.min_pts {
                        for r in reach {
                            if !seeds.contains(&r) {
                                seeds.push(r);
                            }
                        }
                    }
                }
                if labels[q].is_none() {
                    labels[q] = Some(cluster);
                }
            }
            cluster += 1;
        }
        labels
    }

    fn normalize(labels: &[Option<usize>]) -> Vec<Option<usize>> {
        let mut map = std::collections::HashMap::new();
        labels
            .iter()
            .map(|l| {
                l.map(|c| {
                    let next = map.len();
                    *map.entry(c).or_insert(next)
                })
            })
            .collect()
    }

    #[test]
    fn labels_agree_with_an_independent_reference() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(5..25);
            let points: Vec<[f64; FEATURE_DIMS]> = (0..n)
                .map(|_| {
                    let mut v = [0.0; FEATURE_DIMS];
                    for x in v.iter_mut().take(3) {
                        *x = rng.gen_range(0.0..1.0);
                    }
                    v
                })
                .collect();
            let params = DbscanParams {
                eps: rng.gen_range(0.05..0.4),
                min_pts: rng.gen_range(2..5),
            };
            let ours = normalize(&dbscan_labels(&points, params));
            let reference = normalize(&reference_dbscan(&points, params));
            assert_eq!(ours, reference, "n={n} params={params:?}");
        }
    }
}
