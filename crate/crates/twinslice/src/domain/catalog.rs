//! Synthetic short-video catalog.
//!
//! Videos are generated, not sampled: content types rotate round-robin so
//! every type holds an equal share, every video carries the same duration
//! and the same quality ladder, and the transcode cost of a segment scales
//! with the bitrate it is delivered at.

use super::N_TYPES;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Human-readable names of the eight content types.
pub const VIDEO_TYPE_NAMES: [&str; N_TYPES] = [
    "entertainment",
    "games",
    "food",
    "sports",
    "science",
    "dance",
    "travel",
    "news",
];

/// Catalog generation knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CatalogParams {
    /// Number of videos to generate.
    pub n_videos: usize,
    /// Duration of every video, seconds.
    pub duration_s: f64,
    /// Segment length, seconds.
    pub segment_len_s: f64,
    /// Quality ladder, bits/s, strictly increasing.
    pub bitrate_ladder_bps: Vec<f64>,
    /// Edge compute spent per delivered bit (transcode-to-deliver model).
    pub compute_ops_per_bit: f64,
}

impl Default for CatalogParams {
    fn default() -> Self {
        CatalogParams {
            n_videos: 1000,
            duration_s: 15.0,
            segment_len_s: 1.0,
            bitrate_ladder_bps: vec![1.5e6, 4.5e6, 15.0e6, 45.0e6],
            compute_ops_per_bit: 1.0,
        }
    }
}

/// One short video.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Video {
    pub id: usize,
    /// Content type, 0..[`N_TYPES`].
    pub type_index: usize,
    pub duration_s: f64,
    pub segment_len_s: f64,
    /// Bitrate of each quality version, bits/s, strictly increasing.
    pub versions_bps: Vec<f64>,
    /// Edge compute to deliver one segment at each version, ops.
    pub compute_cost_ops: Vec<f64>,
}

impl Video {
    /// Number of segments in the video.
    pub fn n_segments(&self) -> usize {
        (self.duration_s / self.segment_len_s).round() as usize
    }

    /// Size of one segment at `version`, bits.
    pub fn segment_bits(&self, version: usize) -> f64 {
        self.versions_bps[version] * self.segment_len_s
    }
}

/// The full generated catalog.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VideoCatalog {
    pub videos: Vec<Video>,
    pub params: CatalogParams,
}

impl VideoCatalog {
    /// Top rung of the quality ladder, bits/s.
    pub fn max_bitrate_bps(&self) -> f64 {
        *self
            .params
            .bitrate_ladder_bps
            .last()
            .expect("catalog construction enforces a non-empty ladder")
    }

    /// Number of quality versions per video.
    pub fn n_versions(&self) -> usize {
        self.params.bitrate_ladder_bps.len()
    }
}

/// Checks a quality ladder: non-empty, positive, strictly increasing.
pub(crate) fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.is_empty() {
        return Err(Error::BadLadder("ladder is empty".into()));
    }
    for (i, &r) in ladder.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::BadLadder(format!("rung {i} is {r}")));
        }
        if i > 0 && r <= ladder[i - 1] {
            return Err(Error::BadLadder(format!(
                "rung {i} ({r}) does not exceed rung {} ({})",
                i - 1,
                ladder[i - 1]
            )));
        }
    }
    Ok(())
}

/// Generates the catalog.
///
/// Types rotate round-robin over video ids, so with `n_videos` a multiple of
/// [`N_TYPES`] every type holds exactly `n_videos / N_TYPES` videos. The
/// result is fully determined by `params`.
pub fn build_catalog(params: &CatalogParams) -> Result<VideoCatalog> {
    if params.n_videos == 0 {
        return Err(Error::OutOfRange {
            field: "catalog.n_videos".into(),
            detail: "need at least one video".into(),
        });
    }
    if !(params.duration_s > 0.0) || !(params.segment_len_s > 0.0) {
        return Err(Error::OutOfRange {
            field: "catalog.duration_s/segment_len_s".into(),
            detail: "durations must be positive".into(),
        });
    }
    if params.duration_s < params.segment_len_s {
        return Err(Error::OutOfRange {
            field: "catalog.segment_len_s".into(),
            detail: "segment longer than the video".into(),
        });
    }
    if !(params.compute_ops_per_bit >= 0.0) {
        return Err(Error::OutOfRange {
            field: "catalog.compute_ops_per_bit".into(),
            detail: "must be non-negative".into(),
        });
    }
    validate_ladder(&params.bitrate_ladder_bps)?;

    let cost_per_version: Vec<f64> = params
        .bitrate_ladder_bps
        .iter()
        .map(|r| r * params.segment_len_s * params.compute_ops_per_bit)
        .collect();

    let videos = (0..params.n_videos)
        .map(|id| Video {
            id,
            type_index: id % N_TYPES,
            duration_s: params.duration_s,
            segment_len_s: params.segment_len_s,
            versions_bps: params.bitrate_ladder_bps.clone(),
            compute_cost_ops: cost_per_version.clone(),
        })
        .collect();

    Ok(VideoCatalog {
        videos,
        params: params.clone(),
    })
}
