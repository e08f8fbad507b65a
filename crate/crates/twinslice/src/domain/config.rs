//! Scenario configuration: the single file that pins down a whole experiment.
//!
//! The on-disk format is TOML (key/value text with nested tables). Every key
//! is optional — an empty file yields the default scenario — but unknown keys
//! are rejected so a typo cannot silently fall back to a default.

use super::catalog::{validate_ladder, CatalogParams};
use super::{AbstractionLevel, SchemeId};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Radio footprint and population of the physical network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Number of users (each with a twin).
    pub n_users: usize,
    /// Number of base stations.
    pub n_bs: usize,
    /// Service area, meters (x, y).
    pub area_m: [f64; 2],
    /// Downlink transmit power, dBm.
    pub tx_power_dbm: f64,
    /// Noise power spectral density, dBm/Hz.
    pub noise_dbm_hz: f64,
    /// Pedestrian speed range, km/h (min, max).
    pub speed_kmh: [f64; 2],
    /// Total sliceable downlink bandwidth, Hz.
    pub total_bandwidth_hz: f64,
    /// Total edge compute, ops/s.
    pub total_compute_ops: f64,
    /// Log-normal shadowing standard deviation, dB (0 disables).
    pub shadowing_sigma_db: f64,
    /// Radius around the home station users are dropped in, meters.
    pub user_drop_radius_m: f64,
    /// Reference bandwidth at which channel quality is observed, Hz.
    pub probe_bandwidth_hz: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_users: 60,
            n_bs: 2,
            area_m: [2000.0, 1200.0],
            tx_power_dbm: 12.0,
            noise_dbm_hz: -174.0,
            speed_kmh: [2.0, 5.0],
            total_bandwidth_hz: 8.0e7,
            total_compute_ops: 2.5e8,
            shadowing_sigma_db: 8.0,
            user_drop_radius_m: 250.0,
            probe_bandwidth_hz: 1.0e7,
        }
    }
}

/// The two timescales and the experiment length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    /// Small timescale (allocation slot), seconds.
    pub small_ts_s: u32,
    /// Large timescale (grouping/reservation window), seconds.
    pub large_ts_s: u32,
    /// Number of large windows to simulate.
    pub sim_windows: u32,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            small_ts_s: 1,
            large_ts_s: 60,
            sim_windows: 20,
        }
    }
}

/// Ground-truth swipe behavior generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SwipeGenConfig {
    /// Per-segment quit probability range (drawn per user per type).
    pub p_range: [f64; 2],
    /// Watch-to-completion probability range.
    pub q_range: [f64; 2],
    /// Concentration of the preference draw (smaller = more peaked).
    pub preference_alpha: f64,
}

impl Default for SwipeGenConfig {
    fn default() -> Self {
        SwipeGenConfig {
            p_range: [0.08, 0.40],
            q_range: [0.05, 0.35],
            preference_alpha: 0.5,
        }
    }
}

/// Twin-side data collection knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UdtConfig {
    /// Ring-buffer capacity per attribute.
    pub ring_capacity: usize,
    /// Fastest collection period, seconds.
    pub t_min_s: f64,
    /// Slowest collection period, seconds.
    pub t_max_s: f64,
    /// Required synchronization frequency per attribute, Hz.
    pub required_sync_hz: f64,
    /// Additive smoothing weight of the swipe estimator.
    pub smoothing_lambda: f64,
}

impl Default for UdtConfig {
    fn default() -> Self {
        UdtConfig {
            ring_capacity: 512,
            t_min_s: 1.0,
            t_max_s: 10.0,
            required_sync_hz: 0.5,
            smoothing_lambda: 1.0,
        }
    }
}

/// Slice-twin decision knobs: grouping and reservation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SdtConfig {
    /// Group slots available per base station to the learned clusterer.
    pub g_max_per_bs: usize,
    /// Learning episodes on a cold table (first window).
    pub rl_episodes: usize,
    /// Learning episodes on a warm table (subsequent windows).
    pub rl_episodes_warm: usize,
    /// Step size of the tabular value update.
    pub learning_rate: f64,
    /// Neighborhood radius of the density clusterer.
    pub dbscan_eps: f64,
    /// Core-point threshold of the density clusterer (self included).
    pub dbscan_min_pts: usize,
    /// Grid points per group for the discretized reservation search.
    pub bnb_grid_points: usize,
    /// Videos per group playlist.
    pub recommend_k: usize,
    /// Reservation cap as a multiple of estimated demand.
    pub headroom: f64,
}

impl Default for SdtConfig {
    fn default() -> Self {
        SdtConfig {
            g_max_per_bs: 4,
            rl_episodes: 64,
            rl_episodes_warm: 12,
            learning_rate: 0.5,
            dbscan_eps: 0.4,
            dbscan_min_pts: 3,
            bnb_grid_points: 240,
            recommend_k: 12,
            headroom: 2.0,
        }
    }
}

/// Scoring weights and constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KpiConfig {
    /// Weight of twin freshness in the holistic value.
    pub alpha: f64,
    /// Weight of slice utility in the holistic value.
    pub beta: f64,
    /// Weight of twin operation cost in the holistic value.
    pub gamma: f64,
    /// Resource-usage penalty inside the utility term.
    pub gamma_r: f64,
    /// Stall penalty inside per-user satisfaction.
    pub mu_stall: f64,
    /// Twin operation cost per abstraction level.
    pub c_op: f64,
    /// Abstraction level the twins run at (0..=3).
    pub abstraction_level: AbstractionLevel,
}

impl Default for KpiConfig {
    fn default() -> Self {
        KpiConfig {
            alpha: 0.3,
            beta: 1.0,
            gamma: 0.2,
            gamma_r: 0.25,
            mu_stall: 0.5,
            c_op: 0.1,
            abstraction_level: AbstractionLevel::DistributionParams,
        }
    }
}

/// Player behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaybackConfig {
    /// Segments a player may hold ahead of its playhead.
    pub buffer_cap_segments: usize,
}

impl Default for PlaybackConfig {
    fn default() -> Self {
        PlaybackConfig {
            buffer_cap_segments: 5,
        }
    }
}

/// The complete scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Master seed; every stochastic concern derives a substream from it.
    pub seed: u64,
    /// Schemes to run when the command line does not override them.
    pub schemes: Vec<SchemeId>,
    pub network: NetworkConfig,
    pub time: TimeConfig,
    pub catalog: CatalogParams,
    pub swipe: SwipeGenConfig,
    pub udt: UdtConfig,
    pub sdt: SdtConfig,
    pub kpi: KpiConfig,
    pub playback: PlaybackConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 0,
            schemes: vec![
                SchemeId::Proposed,
                SchemeId::Optimization,
                SchemeId::Heuristic,
            ],
            network: NetworkConfig::default(),
            time: TimeConfig::default(),
            catalog: CatalogParams::default(),
            swipe: SwipeGenConfig::default(),
            udt: UdtConfig::default(),
            sdt: SdtConfig::default(),
            kpi: KpiConfig::default(),
            playback: PlaybackConfig::default(),
        }
    }
}

impl ScenarioConfig {
    /// Slots per large window.
    pub fn slots_per_window(&self) -> usize {
        (self.time.large_ts_s / self.time.small_ts_s) as usize
    }

    /// Slot length, seconds.
    pub fn slot_len_s(&self) -> f64 {
        f64::from(self.time.small_ts_s)
    }

    /// Window length, seconds.
    pub fn window_len_s(&self) -> f64 {
        f64::from(self.time.large_ts_s)
    }

    /// Checks every field against its legal range.
    pub fn validate(&self) -> Result<()> {
        fn positive(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    field: field.into(),
                    detail: format!("{v} must be positive and finite"),
                })
            }
        }
        fn non_negative(field: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::OutOfRange {
                    field: field.into(),
                    detail: format!("{v} must be non-negative and finite"),
                })
            }
        }

        let n = &self.network;
        if n.n_users == 0 {
            return Err(Error::OutOfRange {
                field: "network.n_users".into(),
                detail: "need at least one user".into(),
            });
        }
        if n.n_bs == 0 {
            return Err(Error::OutOfRange {
                field: "network.n_bs".into(),
                detail: "need at least one base station".into(),
            });
        }
        positive("network.area_m[0]", n.area_m[0])?;
        positive("network.area_m[1]", n.area_m[1])?;
        if !n.tx_power_dbm.is_finite() || !n.noise_dbm_hz.is_finite() {
            return Err(Error::OutOfRange {
                field: "network.tx_power_dbm/noise_dbm_hz".into(),
                detail: "powers must be finite".into(),
            });
        }
        if !(n.speed_kmh[0] > 0.0 && n.speed_kmh[1] >= n.speed_kmh[0]) {
            return Err(Error::OutOfRange {
                field: "network.speed_kmh".into(),
                detail: format!("{:?} must satisfy 0 < min <= max", n.speed_kmh),
            });
        }
        positive("network.total_bandwidth_hz", n.total_bandwidth_hz)?;
        positive("network.total_compute_ops", n.total_compute_ops)?;
        non_negative("network.shadowing_sigma_db", n.shadowing_sigma_db)?;
        positive("network.user_drop_radius_m", n.user_drop_radius_m)?;
        positive("network.probe_bandwidth_hz", n.probe_bandwidth_hz)?;

        let t = &self.time;
        if t.small_ts_s == 0 || t.large_ts_s == 0 {
            return Err(Error::OutOfRange {
                field: "time.small_ts_s/large_ts_s".into(),
                detail: "timescales must be positive".into(),
            });
        }
        if t.large_ts_s % t.small_ts_s != 0 {
            return Err(Error::InconsistentTimescales {
                small_ts: t.small_ts_s,
                large_ts: t.large_ts_s,
            });
        }
        if t.sim_windows == 0 {
            return Err(Error::OutOfRange {
                field: "time.sim_windows".into(),
                detail: "need at least one window".into(),
            });
        }

        validate_ladder(&self.catalog.bitrate_ladder_bps)?;
        if self.catalog.n_videos == 0 {
            return Err(Error::OutOfRange {
                field: "catalog.n_videos".into(),
                detail: "need at least one video".into(),
            });
        }

        let s = &self.swipe;
        for (name, range) in [("swipe.p_range", s.p_range), ("swipe.q_range", s.q_range)] {
            if !(range[0] <= range[1]) {
                return Err(Error::OutOfRange {
                    field: name.into(),
                    detail: format!("{range:?} must satisfy min <= max"),
                });
            }
        }
        if !(s.p_range[0] > 0.0 && s.p_range[1] <= 1.0) {
            return Err(Error::OutOfRange {
                field: "swipe.p_range".into(),
                detail: format!("{:?} must lie in (0, 1]", s.p_range),
            });
        }
        if !(s.q_range[0] >= 0.0 && s.q_range[1] <= 1.0) {
            return Err(Error::OutOfRange {
                field: "swipe.q_range".into(),
                detail: format!("{:?} must lie in [0, 1]", s.q_range),
            });
        }
        positive("swipe.preference_alpha", s.preference_alpha)?;

        let u = &self.udt;
        if u.ring_capacity < 2 {
            return Err(Error::OutOfRange {
                field: "udt.ring_capacity".into(),
                detail: "need at least two slots".into(),
            });
        }
        positive("udt.t_min_s", u.t_min_s)?;
        positive("udt.t_max_s", u.t_max_s)?;
        if u.t_min_s > u.t_max_s {
            return Err(Error::OutOfRange {
                field: "udt.t_min_s".into(),
                detail: format!("{} exceeds t_max_s {}", u.t_min_s, u.t_max_s),
            });
        }
        positive("udt.required_sync_hz", u.required_sync_hz)?;
        non_negative("udt.smoothing_lambda", u.smoothing_lambda)?;

        let d = &self.sdt;
        for (name, v) in [
            ("sdt.g_max_per_bs", d.g_max_per_bs),
            ("sdt.dbscan_min_pts", d.dbscan_min_pts),
            ("sdt.recommend_k", d.recommend_k),
        ] {
            if v == 0 {
                return Err(Error::OutOfRange {
                    field: name.into(),
                    detail: "must be at least 1".into(),
                });
            }
        }
        if d.bnb_grid_points < 2 {
            return Err(Error::OutOfRange {
                field: "sdt.bnb_grid_points".into(),
                detail: "need at least two grid points".into(),
            });
        }
        positive("sdt.learning_rate", d.learning_rate)?;
        positive("sdt.dbscan_eps", d.dbscan_eps)?;
        if !(d.headroom >= 1.0) {
            return Err(Error::OutOfRange {
                field: "sdt.headroom".into(),
                detail: format!("{} must be at least 1", d.headroom),
            });
        }

        let k = &self.kpi;
        for (name, v) in [
            ("kpi.alpha", k.alpha),
            ("kpi.beta", k.beta),
            ("kpi.gamma", k.gamma),
            ("kpi.gamma_r", k.gamma_r),
            ("kpi.mu_stall", k.mu_stall),
            ("kpi.c_op", k.c_op),
        ] {
            non_negative(name, v)?;
        }

        if self.playback.buffer_cap_segments == 0 {
            return Err(Error::OutOfRange {
                field: "playback.buffer_cap_segments".into(),
                detail: "player needs room for at least one segment".into(),
            });
        }
        Ok(())
    }
}

/// Parses and validates a scenario from TOML text.
///
/// Missing keys take their defaults; unknown keys are rejected.
pub fn validate_scenario(raw: &str) -> Result<ScenarioConfig> {
    let config: ScenarioConfig = toml::from_str(raw).map_err(|e| {
        let msg = e.to_string();
        // Surface missing-field problems under their own variant; TOML's
        // message names the field in backticks.
        if let Some(field) = msg
            .split("missing field `")
            .nth(1)
            .and_then(|rest| rest.split('`').next())
        {
            Error::MissingField(field.to_string())
        } else {
            Error::Scenario(msg.trim().replace('\n', " "))
        }
    })?;
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_the_default_scenario() {
        let c = validate_scenario("").unwrap();
        assert_eq!(c.network.n_users, 60);
        assert_eq!(c.network.n_bs, 2);
        assert_eq!(c.network.tx_power_dbm, 12.0);
        assert_eq!(c.network.noise_dbm_hz, -174.0);
        assert_eq!(c.network.speed_kmh, [2.0, 5.0]);
        assert_eq!(c.time.sim_windows, 20);
        assert_eq!(c.catalog.n_videos, 1000);
        assert_eq!(c, ScenarioConfig::default());
    }

    #[test]
    fn nested_overrides_apply() {
        let c = validate_scenario("[network]\nn_users = 12\n").unwrap();
        assert_eq!(c.network.n_users, 12);
        assert_eq!(c.network.n_bs, 2, "untouched keys keep defaults");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = validate_scenario("[network]\nn_userz = 12\n").unwrap_err();
        assert!(matches!(err, Error::Scenario(_)), "got {err:?}");
        assert!(err.to_string().contains("n_userz"), "got: {err}");
    }

    #[test]
    fn zero_bandwidth_is_out_of_range() {
        let err = validate_scenario("[network]\ntotal_bandwidth_hz = 0.0\n").unwrap_err();
        match err {
            Error::OutOfRange { field, .. } => assert_eq!(field, "network.total_bandwidth_hz"),
            other => panic!("expected OutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn indivisible_timescales_are_rejected() {
        let err = validate_scenario("[time]\nsmall_ts_s = 7\nlarge_ts_s = 60\n").unwrap_err();
        assert!(matches!(
            err,
            Error::InconsistentTimescales {
                small_ts: 7,
                large_ts: 60
            }
        ));
    }

    #[test]
    fn bad_ladder_is_rejected_at_validation() {
        let err =
            validate_scenario("[catalog]\nbitrate_ladder_bps = [2e6, 2e6]\n").unwrap_err();
        assert!(matches!(err, Error::BadLadder(_)));
    }

    #[test]
    fn scheme_list_parses_kebab_names() {
        let c = validate_scenario("schemes = [\"proposed\", \"heuristic\"]\n").unwrap();
        assert_eq!(c.schemes, vec![SchemeId::Proposed, SchemeId::Heuristic]);
    }

    #[test]
    fn abstraction_level_out_of_range_is_rejected() {
        let err = validate_scenario("[kpi]\nabstraction_level = 4\n").unwrap_err();
        assert!(err.to_string().contains("abstraction_level"), "got: {err}");
    }

    #[test]
    fn speed_range_must_be_ordered() {
        let err = validate_scenario("[network]\nspeed_kmh = [5.0, 2.0]\n").unwrap_err();
        assert!(matches!(err, Error::OutOfRange { .. }));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let c = ScenarioConfig::default();
        let text = toml::to_string(&c).unwrap();
        let back = validate_scenario(&text).unwrap();
        assert_eq!(c, back);
    }
}
