//! The per-window resource schedule handed from the planning side to the
//! physical network: bandwidth per group per slot, compute per group, cache
//! placement, a sensing placeholder, and the abstraction level in force.

use super::AbstractionLevel;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Boolean cache placement over (video, version) pairs and hosting nodes.
///
/// Node 0 is the edge server; nodes 1.. are base stations. The default
/// placement pins every version of every video at the edge server, which is
/// where transcode-to-deliver happens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CachePlacement {
    pub n_videos: usize,
    pub n_versions: usize,
    /// `placed[node][video * n_versions + version]`.
    pub placed: Vec<Vec<bool>>,
}

impl CachePlacement {
    /// Everything cached at the edge server, nothing at the stations.
    pub fn all_at_edge(n_videos: usize, n_versions: usize, n_bs: usize) -> Self {
        let mut placed = vec![vec![true; n_videos * n_versions]];
        placed.extend(std::iter::repeat_with(|| vec![false; n_videos * n_versions]).take(n_bs));
        CachePlacement {
            n_videos,
            n_versions,
            placed,
        }
    }

    /// Whether `version` of `video` sits on `node`.
    pub fn is_cached(&self, node: usize, video: usize, version: usize) -> bool {
        self.placed[node][video * self.n_versions + version]
    }
}

/// One window's concrete resource plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSchedule {
    /// Bandwidth per group per slot, Hz: `bandwidth_hz[group][slot]`.
    pub bandwidth_hz: Vec<Vec<f64>>,
    /// Cache placement in force.
    pub cache: CachePlacement,
    /// Edge compute reserved per group, ops/s.
    pub compute_ops: Vec<f64>,
    /// Sensing/telemetry share per group (held for completeness; playback
    /// does not consume it).
    pub sensing: Vec<f64>,
    /// Abstraction level the twins operate at.
    pub level: AbstractionLevel,
}

impl ResourceSchedule {
    /// Validates shape and ranges: non-negative entries, consistent slot
    /// counts, per-slot bandwidth totals within the pooled reservation.
    pub fn validate(&self, pooled_bandwidth_hz: f64) -> Result<()> {
        let n_slots = self.bandwidth_hz.first().map_or(0, Vec::len);
        for (g, row) in self.bandwidth_hz.iter().enumerate() {
            if row.len() != n_slots {
                return Err(Error::OutOfRange {
                    field: format!("bandwidth_hz[{g}]"),
                    detail: format!("ragged slot count {} != {n_slots}", row.len()),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::OutOfRange {
                    field: format!("bandwidth_hz[{g}]"),
                    detail: format!("negative or non-finite entry {bad}"),
                });
            }
        }
        if self.compute_ops.len() != self.bandwidth_hz.len()
            || self.sensing.len() != self.bandwidth_hz.len()
        {
            return Err(Error::OutOfRange {
                field: "compute_ops/sensing".into(),
                detail: "per-group vectors must match the group count".into(),
            });
        }
        if let Some(bad) = self
            .compute_ops
            .iter()
            .chain(self.sensing.iter())
            .find(|v| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::OutOfRange {
                field: "compute_ops/sensing".into(),
                detail: format!("negative or non-finite entry {bad}"),
            });
        }
        let tol = 1e-6 * pooled_bandwidth_hz.max(1.0);
        for k in 0..n_slots {
            let total: f64 = self.bandwidth_hz.iter().map(|row| row[k]).sum();
            if total > pooled_bandwidth_hz + tol {
                return Err(Error::OutOfRange {
                    field: format!("bandwidth_hz[..][{k}]"),
                    detail: format!("slot total {total} exceeds pool {pooled_bandwidth_hz}"),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schedule(bandwidth_hz: Vec<Vec<f64>>) -> ResourceSchedule {
        let groups = bandwidth_hz.len();
        ResourceSchedule {
            bandwidth_hz,
            cache: CachePlacement::all_at_edge(4, 2, 1),
            compute_ops: vec![1.0; groups],
            sensing: vec![0.0; groups],
            level: AbstractionLevel::DistributionParams,
        }
    }

    #[test]
    fn all_at_edge_pins_everything_on_node_zero() {
        let c = CachePlacement::all_at_edge(3, 4, 2);
        for video in 0..3 {
            for version in 0..4 {
                assert!(c.is_cached(0, video, version));
                assert!(!c.is_cached(1, video, version));
                assert!(!c.is_cached(2, video, version));
            }
        }
    }

    #[test]
    fn within_pool_schedule_passes() {
        let s = schedule(vec![vec![3.0, 2.0], vec![1.0, 2.0]]);
        s.validate(4.0).unwrap();
    }

    #[test]
    fn slot_total_above_pool_fails() {
        let s = schedule(vec![vec![3.0], vec![2.0]]);
        assert!(matches!(s.validate(4.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn negative_bandwidth_fails() {
        let s = schedule(vec![vec![-1.0]]);
        assert!(matches!(s.validate(4.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn ragged_rows_fail() {
        let s = schedule(vec![vec![1.0, 1.0], vec![1.0]]);
        assert!(matches!(s.validate(4.0), Err(Error::OutOfRange { .. })));
    }
}
