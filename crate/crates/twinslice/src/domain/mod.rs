//! Shared vocabulary of the simulator: service classes, the video catalog,
//! scenario configuration, and the per-window resource schedule.

mod catalog;
mod config;
mod schedule;

pub use self::catalog::{build_catalog, CatalogParams, Video, VideoCatalog, VIDEO_TYPE_NAMES};
pub use self::config::{
    validate_scenario, KpiConfig, NetworkConfig, PlaybackConfig, ScenarioConfig, SdtConfig,
    SwipeGenConfig, TimeConfig, UdtConfig,
};
pub use self::schedule::{CachePlacement, ResourceSchedule};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Number of content types in the catalog.
pub const N_TYPES: usize = 8;

/// The three compared slice-management schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    /// Learned grouping plus convex reservation (the hybrid pipeline).
    Proposed,
    /// Density-based grouping plus discretized exact reservation.
    Optimization,
    /// Key-based grouping plus history-proportional reservation.
    Heuristic,
}

impl SchemeId {
    /// Stable lower-case name used in CSV output and CLI flags.
    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::Optimization => "optimization",
            SchemeId::Heuristic => "heuristic",
        }
    }
}

/// Service classes the slice could host. Only short video drives the
/// simulation; the other two document requirement rows for context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceKind {
    ShortVideo,
    ImmersiveVr,
    Holographic,
}

/// Media components a service streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MediaComponent {
    Segments,
    Tiles2d,
    Tiles3d,
}

/// Bandwidth/latency envelope of one service class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceProfile {
    pub kind: ServiceKind,
    /// Sustained delivery rate the service needs at its top quality, bits/s.
    pub required_rate_bps: f64,
    /// End-to-end delay budget, seconds.
    pub latency_budget_s: f64,
    /// Media components the service streams.
    pub components: Vec<MediaComponent>,
}

impl ServiceProfile {
    /// Short-form video: seconds-scale latency tolerance, 45 Mbps top rung.
    pub fn short_video() -> Self {
        ServiceProfile {
            kind: ServiceKind::ShortVideo,
            required_rate_bps: 45.0e6,
            latency_budget_s: 5.0,
            components: vec![MediaComponent::Segments, MediaComponent::Tiles3d],
        }
    }

    /// Immersive VR: tile streams with a tight motion-to-photon budget.
    pub fn immersive_vr() -> Self {
        ServiceProfile {
            kind: ServiceKind::ImmersiveVr,
            required_rate_bps: 100.0e6,
            latency_budget_s: 0.010,
            components: vec![MediaComponent::Tiles2d, MediaComponent::Tiles3d],
        }
    }

    /// Holographic rendering: volumetric tiles, the tightest budget.
    pub fn holographic() -> Self {
        ServiceProfile {
            kind: ServiceKind::Holographic,
            required_rate_bps: 100.0e6,
            latency_budget_s: 0.005,
            components: vec![MediaComponent::Tiles3d],
        }
    }

    /// Sanity-checks the profile.
    pub fn validate(&self) -> Result<()> {
        if !(self.required_rate_bps > 0.0) {
            return Err(Error::OutOfRange {
                field: "required_rate_bps".into(),
                detail: format!("{} must be positive", self.required_rate_bps),
            });
        }
        if !(self.latency_budget_s > 0.0) {
            return Err(Error::OutOfRange {
                field: "latency_budget_s".into(),
                detail: format!("{} must be positive", self.latency_budget_s),
            });
        }
        if self.components.is_empty() {
            return Err(Error::MissingField("components".into()));
        }
        Ok(())
    }
}

/// How far a twin compresses raw observations before sharing them.
///
/// Higher levels ship less data and cost more twin-side processing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum AbstractionLevel {
    /// Raw time-stamped samples.
    RawSamples,
    /// Windowed histograms.
    WindowedHistograms,
    /// Fitted distribution parameters.
    DistributionParams,
    /// A single distilled feature vector.
    DistilledFeatures,
}

impl AbstractionLevel {
    /// Numeric level, 0..=3.
    pub fn level(self) -> u8 {
        match self {
            AbstractionLevel::RawSamples => 0,
            AbstractionLevel::WindowedHistograms => 1,
            AbstractionLevel::DistributionParams => 2,
            AbstractionLevel::DistilledFeatures => 3,
        }
    }

    /// Parses a numeric level.
    pub fn from_level(level: u8) -> Result<Self> {
        match level {
            0 => Ok(AbstractionLevel::RawSamples),
            1 => Ok(AbstractionLevel::WindowedHistograms),
            2 => Ok(AbstractionLevel::DistributionParams),
            3 => Ok(AbstractionLevel::DistilledFeatures),
            other => Err(Error::OutOfRange {
                field: "abstraction_level".into(),
                detail: format!("{other} not in 0..=3"),
            }),
        }
    }
}

impl TryFrom<u8> for AbstractionLevel {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        AbstractionLevel::from_level(v).map_err(|e| e.to_string())
    }
}

impl From<AbstractionLevel> for u8 {
    fn from(l: AbstractionLevel) -> u8 {
        l.level()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_profiles_are_valid() {
        for p in [
            ServiceProfile::short_video(),
            ServiceProfile::immersive_vr(),
            ServiceProfile::holographic(),
        ] {
            p.validate().unwrap();
        }
    }

    #[test]
    fn profile_rejects_nonpositive_rate() {
        let mut p = ServiceProfile::short_video();
        p.required_rate_bps = 0.0;
        assert!(matches!(p.validate(), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn abstraction_levels_round_trip() {
        for l in 0..=3u8 {
            assert_eq!(AbstractionLevel::from_level(l).unwrap().level(), l);
        }
        assert!(AbstractionLevel::from_level(4).is_err());
    }

    #[test]
    fn short_video_is_the_segment_service() {
        let p = ServiceProfile::short_video();
        assert!(p.components.contains(&MediaComponent::Segments));
        assert!(p.latency_budget_s >= 1.0, "short video tolerates seconds");
    }
}
