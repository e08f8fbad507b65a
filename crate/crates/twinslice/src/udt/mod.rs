//! User digital twins: per-user data pools and the models built from them.
//!
//! A twin holds one ring buffer per sensed attribute (position, channel
//! quality, swipe events, engagement signals), tracks how fresh each ring is
//! against a required synchronization rate, and — once per management window
//! — compresses the pool into an abstraction: estimated position and channel,
//! a preference vector, and per-type swipe distributions. Collection periods
//! adapt per attribute: unimportant, stable attributes are sampled lazily,
//! important or drifting ones eagerly.

mod estimators;

pub use self::estimators::{
    adapt_collection_period, column_drift, estimate_preference, estimate_swipe_distribution,
    feature_importance_pca,
};

use crate::domain::UdtConfig;
use crate::error::{Error, Result};
use crate::physnet::{nearest_bs, BaseStation};
use std::collections::VecDeque;

/// Sensed attributes a twin synchronizes, in ring order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Attribute {
    Position,
    ChannelQuality,
    SwipeEvents,
    PreferenceSignals,
}

impl Attribute {
    pub const ALL: [Attribute; 4] = [
        Attribute::Position,
        Attribute::ChannelQuality,
        Attribute::SwipeEvents,
        Attribute::PreferenceSignals,
    ];

    pub fn index(self) -> usize {
        match self {
            Attribute::Position => 0,
            Attribute::ChannelQuality => 1,
            Attribute::SwipeEvents => 2,
            Attribute::PreferenceSignals => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::Position => "position",
            Attribute::ChannelQuality => "channel_quality",
            Attribute::SwipeEvents => "swipe_events",
            Attribute::PreferenceSignals => "preference_signals",
        }
    }
}

/// One timestamped sample entering a twin's pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Position { x_m: f64, y_m: f64 },
    ChannelQuality { spectral_bps_hz: f64 },
    Swipe { type_index: usize, outcome: usize },
    Preference { type_index: usize, watch_s: f64 },
}

impl Observation {
    pub fn attribute(&self) -> Attribute {
        match self {
            Observation::Position { .. } => Attribute::Position,
            Observation::ChannelQuality { .. } => Attribute::ChannelQuality,
            Observation::Swipe { .. } => Attribute::SwipeEvents,
            Observation::Preference { .. } => Attribute::PreferenceSignals,
        }
    }
}

/// Synchronization health of one attribute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreshnessState {
    pub attribute: Attribute,
    /// Samples per second achieved over the lookback horizon.
    pub achieved_hz: f64,
    pub required_hz: f64,
    /// Seconds since the newest sample; infinite when the ring is empty.
    pub age_s: f64,
}

/// Mean per-attribute sync ratio, each capped at one: over-sampling one
/// attribute cannot repay starving another.
pub fn freshness_value(pairs: &[(f64, f64)]) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    pairs
        .iter()
        .map(|&(achieved, required)| {
            if required <= 0.0 {
                1.0
            } else {
                (achieved / required).min(1.0)
            }
        })
        .sum::<f64>()
        / pairs.len() as f64
}

/// Ring-buffered sample pool of one user twin.
#[derive(Debug, Clone, PartialEq)]
pub struct UdtPool {
    cap: usize,
    /// (t, (x, y))
    pub positions: VecDeque<(f64, (f64, f64))>,
    /// (t, spectral efficiency bps/Hz)
    pub channel: VecDeque<(f64, f64)>,
    /// (t, type, outcome)
    pub swipes: VecDeque<(f64, usize, usize)>,
    /// (t, type, watch seconds)
    pub preferences: VecDeque<(f64, usize, f64)>,
    last_ts: [f64; 4],
}

impl UdtPool {
    pub fn new(ring_capacity: usize) -> Self {
        UdtPool {
            cap: ring_capacity.max(1),
            positions: VecDeque::new(),
            channel: VecDeque::new(),
            swipes: VecDeque::new(),
            preferences: VecDeque::new(),
            last_ts: [f64::NEG_INFINITY; 4],
        }
    }

    /// Appends one sample; rings overwrite their oldest entry when full, and
    /// time may never run backwards within an attribute.
    pub fn ingest(&mut self, t_s: f64, obs: Observation) -> Result<()> {
        let a = obs.attribute();
        let last = self.last_ts[a.index()];
        if t_s < last {
            return Err(Error::NonMonotonicTimestamp {
                attribute: a.name(),
                last,
                got: t_s,
            });
        }
        self.last_ts[a.index()] = t_s;
        match obs {
            Observation::Position { x_m, y_m } => push_ring(&mut self.positions, self.cap, (t_s, (x_m, y_m))),
            Observation::ChannelQuality { spectral_bps_hz } => {
                push_ring(&mut self.channel, self.cap, (t_s, spectral_bps_hz))
            }
            Observation::Swipe { type_index, outcome } => {
                push_ring(&mut self.swipes, self.cap, (t_s, type_index, outcome))
            }
            Observation::Preference { type_index, watch_s } => {
                push_ring(&mut self.preferences, self.cap, (t_s, type_index, watch_s))
            }
        }
        Ok(())
    }

    pub fn len(&self, a: Attribute) -> usize {
        match a {
            Attribute::Position => self.positions.len(),
            Attribute::ChannelQuality => self.channel.len(),
            Attribute::SwipeEvents => self.swipes.len(),
            Attribute::PreferenceSignals => self.preferences.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        Attribute::ALL.iter().all(|&a| self.len(a) == 0)
    }

    fn timestamps(&self, a: Attribute) -> Box<dyn Iterator<Item = f64> + '_> {
        match a {
            Attribute::Position => Box::new(self.positions.iter().map(|e| e.0)),
            Attribute::ChannelQuality => Box::new(self.channel.iter().map(|e| e.0)),
            Attribute::SwipeEvents => Box::new(self.swipes.iter().map(|e| e.0)),
            Attribute::PreferenceSignals => Box::new(self.preferences.iter().map(|e| e.0)),
        }
    }

    /// Samples per second landed in `(now - horizon, now]`.
    pub fn achieved_hz(&self, a: Attribute, now_s: f64, horizon_s: f64) -> f64 {
        if horizon_s <= 0.0 {
            return 0.0;
        }
        let from = now_s - horizon_s;
        let n = self
            .timestamps(a)
            .filter(|&t| t > from && t <= now_s)
            .count();
        n as f64 / horizon_s
    }

    /// Seconds since the newest sample of `a`; infinite for an empty ring.
    pub fn age_s(&self, a: Attribute, now_s: f64) -> f64 {
        let last = self.last_ts[a.index()];
        if last == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            now_s - last
        }
    }

    pub fn freshness(&self, now_s: f64, horizon_s: f64, required_hz: f64) -> Vec<FreshnessState> {
        Attribute::ALL
            .iter()
            .map(|&a| FreshnessState {
                attribute: a,
                achieved_hz: self.achieved_hz(a, now_s, horizon_s),
                required_hz,
                age_s: self.age_s(a, now_s),
            })
            .collect()
    }

    /// Mean capped sync ratio over all attributes.
    pub fn freshness_ratio(&self, now_s: f64, horizon_s: f64, required_hz: f64) -> f64 {
        let pairs: Vec<(f64, f64)> = self
            .freshness(now_s, horizon_s, required_hz)
            .iter()
            .map(|f| (f.achieved_hz, f.required_hz))
            .collect();
        freshness_value(&pairs)
    }

    /// Pools the rings into a feature matrix for importance analysis: columns
    /// are x, y, spectral efficiency, swipe outcome, watch seconds; rows pair
    /// the newest `K` entries of every ring, `K` being the shortest ring.
    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        let k = Attribute::ALL
            .iter()
            .map(|&a| self.len(a))
            .min()
            .unwrap_or(0);
        let mut rows = Vec::with_capacity(k);
        for i in 0..k {
            let p = self.positions[self.positions.len() - k + i];
            let c = self.channel[self.channel.len() - k + i];
            let s = self.swipes[self.swipes.len() - k + i];
            let w = self.preferences[self.preferences.len() - k + i];
            rows.push(vec![p.1 .0, p.1 .1, c.1, s.2 as f64, w.2]);
        }
        rows
    }
}

fn push_ring<T>(ring: &mut VecDeque<T>, cap: usize, value: T) {
    if ring.len() == cap {
        ring.pop_front();
    }
    ring.push_back(value);
}

/// Maps feature-matrix columns to the attribute each one senses.
const COLUMN_ATTRIBUTE: [Attribute; 5] = [
    Attribute::Position,
    Attribute::Position,
    Attribute::ChannelQuality,
    Attribute::SwipeEvents,
    Attribute::PreferenceSignals,
];

/// One user's digital twin: the pool plus its collection schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTwin {
    pub user: usize,
    pub pool: UdtPool,
    /// Current collection period per attribute, seconds.
    pub periods_s: [f64; 4],
}

impl UserTwin {
    pub fn new(user: usize, config: &UdtConfig) -> Self {
        UserTwin {
            user,
            pool: UdtPool::new(config.ring_capacity),
            periods_s: [config.t_min_s; 4],
        }
    }

    pub fn ingest(&mut self, t_s: f64, obs: Observation) -> Result<()> {
        self.pool.ingest(t_s, obs)
    }

    /// Re-tunes the per-attribute collection periods from pooled importance
    /// and drift. With too little data every period falls back to the
    /// eager end: a twin that knows nothing should look often.
    pub fn refresh_periods(&mut self, config: &UdtConfig) {
        let rows = self.pool.feature_matrix();
        let Ok(importance) = feature_importance_pca(&rows) else {
            self.periods_s = [config.t_min_s; 4];
            return;
        };
        let drift = column_drift(&rows);
        for (ai, a) in Attribute::ALL.iter().enumerate() {
            let mut imp = 0.0;
            let mut drf: f64 = 0.0;
            for (col, owner) in COLUMN_ATTRIBUTE.iter().enumerate() {
                if owner == a {
                    imp += importance[col];
                    drf = drf.max(drift[col]);
                }
            }
            self.periods_s[ai] =
                adapt_collection_period(imp, drf, config.t_min_s, config.t_max_s);
        }
    }

    /// Compresses the pool into the window abstraction handed to the
    /// infrastructure twin.
    pub fn abstraction(
        &self,
        now_s: f64,
        horizon_s: f64,
        config: &UdtConfig,
        stations: &[BaseStation],
        n_types: usize,
        n_segments: usize,
    ) -> UdtAbstraction {
        let est_position = self
            .pool
            .positions
            .back()
            .map(|e| e.1)
            .unwrap_or((0.0, 0.0));
        let est_spectral_bps_hz = if self.pool.channel.is_empty() {
            1.0
        } else {
            self.pool.channel.iter().map(|e| e.1).sum::<f64>() / self.pool.channel.len() as f64
        };
        UdtAbstraction {
            user: self.user,
            est_position,
            nearest_bs: nearest_bs(est_position, stations),
            est_spectral_bps_hz,
            preference: estimate_preference(&self.pool, n_types),
            swipe_pmf_by_type: estimate_swipe_distribution(
                &self.pool,
                n_types,
                n_segments,
                config.smoothing_lambda,
            ),
            freshness_ratio: self
                .pool
                .freshness_ratio(now_s, horizon_s, config.required_sync_hz),
            periods_s: self.periods_s,
        }
    }
}

/// What a user twin reports upward once per window.
#[derive(Debug, Clone, PartialEq)]
pub struct UdtAbstraction {
    pub user: usize,
    pub est_position: (f64, f64),
    /// Nearest station to the estimated position.
    pub nearest_bs: usize,
    /// Mean observed spectral efficiency at the probe bandwidth, bps/Hz.
    pub est_spectral_bps_hz: f64,
    /// Estimated watch-share per content type; sums to one.
    pub preference: Vec<f64>,
    /// Estimated swipe distribution per type over outcomes `1..=S+1`.
    pub swipe_pmf_by_type: Vec<Vec<f64>>,
    /// Mean capped sync ratio over the twin's attributes.
    pub freshness_ratio: f64,
    pub periods_s: [f64; 4],
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn freshness_caps_each_attribute_before_averaging() {
        // One attribute at half its required rate, one over-synced: the
        // surplus does not compensate, so the mean is 0.75.
        let v = freshness_value(&[(1.0, 2.0), (3.0, 2.0)]);
        assert!((v - 0.75).abs() < 1e-12, "{v}");
    }

    #[test]
    fn freshness_of_an_empty_pool_is_zero() {
        let pool = UdtPool::new(16);
        assert_eq!(pool.freshness_ratio(10.0, 10.0, 0.5), 0.0);
        assert_eq!(pool.age_s(Attribute::Position, 10.0), f64::INFINITY);
    }

    #[test]
    fn achieved_rate_counts_only_the_horizon() {
        let mut pool = UdtPool::new(64);
        for t in 0..20 {
            pool.ingest(t as f64, Observation::ChannelQuality { spectral_bps_hz: 1.0 })
                .unwrap();
        }
        // (9, 19] holds ten samples over a ten-second horizon.
        let f = pool.achieved_hz(Attribute::ChannelQuality, 19.0, 10.0);
        assert!((f - 1.0).abs() < 1e-12);
        // A later "now" with no new samples sees a lower rate.
        let f = pool.achieved_hz(Attribute::ChannelQuality, 24.0, 10.0);
        assert!((f - 0.5).abs() < 1e-12);
    }

    #[test]
    fn time_must_not_run_backwards_per_attribute() {
        let mut pool = UdtPool::new(16);
        pool.ingest(5.0, Observation::Position { x_m: 0.0, y_m: 0.0 })
            .unwrap();
        let err = pool
            .ingest(4.0, Observation::Position { x_m: 1.0, y_m: 1.0 })
            .unwrap_err();
        match err {
            Error::NonMonotonicTimestamp { attribute, last, got } => {
                assert_eq!(attribute, "position");
                assert_eq!(last, 5.0);
                assert_eq!(got, 4.0);
            }
            other => panic!("unexpected: {other}"),
        }
        // Other attributes keep their own clocks.
        pool.ingest(4.0, Observation::ChannelQuality { spectral_bps_hz: 2.0 })
            .unwrap();
        // Equal timestamps are fine (several events in one slot).
        pool.ingest(5.0, Observation::Position { x_m: 1.0, y_m: 1.0 })
            .unwrap();
    }

    #[test]
    fn rings_overwrite_their_oldest_entry() {
        let mut pool = UdtPool::new(3);
        for t in 0..5 {
            pool.ingest(
                t as f64,
                Observation::Swipe { type_index: 0, outcome: t + 1 },
            )
            .unwrap();
        }
        assert_eq!(pool.swipes.len(), 3);
        assert_eq!(pool.swipes.front().unwrap().2, 3, "two oldest evicted");
        assert_eq!(pool.swipes.back().unwrap().2, 5);
    }

    #[test]
    fn feature_matrix_aligns_the_newest_entries() {
        let mut pool = UdtPool::new(16);
        for t in 0..4 {
            let tf = t as f64;
            pool.ingest(tf, Observation::Position { x_m: tf, y_m: -tf }).unwrap();
            pool.ingest(tf, Observation::ChannelQuality { spectral_bps_hz: 2.0 * tf }).unwrap();
        }
        pool.ingest(3.0, Observation::Swipe { type_index: 1, outcome: 4 }).unwrap();
        pool.ingest(3.0, Observation::Preference { type_index: 1, watch_s: 3.5 }).unwrap();
        let rows = pool.feature_matrix();
        assert_eq!(rows.len(), 1, "shortest ring bounds the matrix");
        assert_eq!(rows[0], vec![3.0, -3.0, 6.0, 4.0, 3.5]);
    }

    #[test]
    fn twin_abstraction_reports_latest_position_and_mean_channel() {
        let config = UdtConfig::default();
        let mut twin = UserTwin::new(7, &config);
        let stations = crate::physnet::station_layout(2, [1000.0, 600.0]);
        for t in 0..10 {
            let tf = t as f64;
            twin.ingest(tf, Observation::Position { x_m: 100.0 + tf, y_m: 300.0 }).unwrap();
            twin.ingest(tf, Observation::ChannelQuality { spectral_bps_hz: 4.0 }).unwrap();
        }
        let a = twin.abstraction(10.0, 10.0, &config, &stations, 8, 15);
        assert_eq!(a.user, 7);
        assert_eq!(a.est_position, (109.0, 300.0));
        assert_eq!(a.nearest_bs, 0);
        assert!((a.est_spectral_bps_hz - 4.0).abs() < 1e-12);
        assert_eq!(a.preference.len(), 8);
        assert!((a.preference.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert_eq!(a.swipe_pmf_by_type.len(), 8);
        assert_eq!(a.swipe_pmf_by_type[0].len(), 16);
    }

    #[test]
    fn starved_twin_falls_back_to_eager_collection() {
        let config = UdtConfig::default();
        let mut twin = UserTwin::new(0, &config);
        twin.refresh_periods(&config);
        assert_eq!(twin.periods_s, [config.t_min_s; 4]);
    }
}
