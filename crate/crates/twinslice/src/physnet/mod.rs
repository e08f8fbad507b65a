//! The physical network: ground truth that the twins observe and the
//! schedules act on. Users walk waypoint loops around their home station,
//! watch multicast streams, and let go of videos according to their private
//! swipe laws.

mod mobility;
mod playback;
mod radio;
mod swipe;

pub use self::mobility::step_mobility;
pub use self::playback::{
    simulate_window, GroupTraffic, GroupWindowPlan, PlaybackReport, SlotSample, UserPlayback,
    WindowPlan,
};
pub use self::radio::{
    link_rate_bps, multicast_rate_bps, path_loss_db, rate_from_probe, spectral_efficiency,
};
pub use self::swipe::{
    expected_watched_segments, generate_swipe, swipe_pmf, SwipeParams, SwipeSource,
};

use crate::domain::{ScenarioConfig, VideoCatalog, N_TYPES};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::sync::Arc;

/// A fixed downlink transmitter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    pub position: (f64, f64),
}

/// A segment sitting in a player buffer, not yet watched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BufferedSegment {
    pub video: usize,
    /// 1-based segment index.
    pub segment: usize,
    pub version: usize,
}

/// What a player is currently consuming.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Playhead {
    pub video: usize,
    /// 1-based segment index being watched next.
    pub segment: usize,
    /// Seconds already consumed of that segment.
    pub progress_s: f64,
}

/// Ground-truth state of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserState {
    pub id: usize,
    pub position: (f64, f64),
    /// Closed waypoint loop the user walks.
    pub waypoints: Vec<(f64, f64)>,
    /// Index of the waypoint currently steered toward.
    pub next_waypoint: usize,
    pub speed_mps: f64,
    /// Nearest station after the last mobility step (ties to the lower id).
    pub serving_bs: usize,
    /// Private content preference over types; sums to one.
    pub true_preference: Vec<f64>,
    /// Private swipe law per content type.
    pub swipe: Vec<SwipeSource>,
    /// Slow fading offset applied to every link of this user, dB.
    pub shadowing_db: f64,
    /// Delivered-but-unwatched segments, in delivery order.
    pub buffer: VecDeque<BufferedSegment>,
    /// Current consumption point, if any video is active for this user.
    pub playhead: Option<Playhead>,
    /// Segments of the active video this user will watch before letting go.
    pub active_quota: usize,
    /// Done with the active video (swiped or completed), waiting for the
    /// group to move on.
    pub idle: bool,
}

impl UserState {
    /// Clears all playback state (used at window boundaries when groups are
    /// re-formed).
    pub fn reset_playback(&mut self) {
        self.buffer.clear();
        self.playhead = None;
        self.active_quota = 0;
        self.idle = false;
    }
}

/// Radio environment shared by all links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioEnv {
    pub tx_power_dbm: f64,
    pub noise_dbm_hz: f64,
    /// Bandwidth at which channel quality is observed by the twins, Hz.
    pub probe_bandwidth_hz: f64,
}

/// The whole physical scene.
#[derive(Debug, Clone)]
pub struct World {
    pub users: Vec<UserState>,
    pub base_stations: Vec<BaseStation>,
    pub catalog: Arc<VideoCatalog>,
    pub radio: RadioEnv,
    pub time_s: f64,
}

impl World {
    /// Path loss from `bs` to `user`, shadowing included, dB.
    pub fn path_loss_to(&self, user: usize, bs: usize) -> f64 {
        let u = &self.users[user];
        let b = &self.base_stations[bs];
        let d = dist(u.position, b.position);
        path_loss_db(d) + u.shadowing_db
    }

    /// Link rate from `bs` to `user` over `bandwidth_hz`, bits/s.
    pub fn link_rate_to(&self, user: usize, bs: usize, bandwidth_hz: f64) -> f64 {
        link_rate_bps(
            self.radio.tx_power_dbm,
            self.path_loss_to(user, bs),
            self.radio.noise_dbm_hz,
            bandwidth_hz,
        )
    }

    /// Spectral efficiency the user observes at the probe bandwidth toward
    /// their serving station — the channel-quality sample twins collect.
    pub fn probe_efficiency(&self, user: usize) -> f64 {
        let bs = self.users[user].serving_bs;
        spectral_efficiency(
            self.radio.tx_power_dbm,
            self.path_loss_to(user, bs),
            self.radio.noise_dbm_hz,
            self.radio.probe_bandwidth_hz,
        )
    }
}

pub(crate) fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Nearest station to a position; ties resolve to the lower id.
pub fn nearest_bs(position: (f64, f64), stations: &[BaseStation]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for s in stations {
        let d = dist(position, s.position);
        if d < best_d {
            best_d = d;
            best = s.id;
        }
    }
    best
}

/// Deterministic station layout: evenly spaced along the horizontal midline.
pub fn station_layout(n_bs: usize, area_m: [f64; 2]) -> Vec<BaseStation> {
    (0..n_bs)
        .map(|id| BaseStation {
            id,
            position: (
                area_m[0] * (id as f64 + 1.0) / (n_bs as f64 + 1.0),
                area_m[1] / 2.0,
            ),
        })
        .collect()
}

/// Builds the ground-truth world from the scenario and the world substream.
///
/// Users drop uniformly in a disc around their home station (round-robin over
/// stations), walk a private waypoint loop, and carry private preferences
/// (Dirichlet-style draw) plus per-type swipe laws tilted by preference:
/// better-liked types are quit more slowly and completed more often.
pub fn init_world(
    config: &ScenarioConfig,
    catalog: Arc<VideoCatalog>,
    rng: &mut ChaCha12Rng,
) -> World {
    let net = &config.network;
    let base_stations = station_layout(net.n_bs, net.area_m);
    let gamma = Gamma::new(config.swipe.preference_alpha, 1.0)
        .expect("validated preference_alpha is positive");
    let shadow = if net.shadowing_sigma_db > 0.0 {
        Some(Normal::new(0.0, net.shadowing_sigma_db).expect("validated sigma"))
    } else {
        None
    };

    let mut users = Vec::with_capacity(net.n_users);
    for id in 0..net.n_users {
        let home = base_stations[id % net.n_bs].position;
        let drop_in_disc = |rng: &mut ChaCha12Rng| -> (f64, f64) {
            let angle = rng.gen::<f64>() * std::f64::consts::TAU;
            let radius = net.user_drop_radius_m * rng.gen::<f64>().sqrt();
            (
                (home.0 + radius * angle.cos()).clamp(0.0, net.area_m[0]),
                (home.1 + radius * angle.sin()).clamp(0.0, net.area_m[1]),
            )
        };
        let position = drop_in_disc(rng);
        let n_waypoints = 4 + (rng.gen::<f64>() * 4.0) as usize;
        let waypoints: Vec<(f64, f64)> = (0..n_waypoints).map(|_| drop_in_disc(rng)).collect();
        let speed_kmh = net.speed_kmh[0] + rng.gen::<f64>() * (net.speed_kmh[1] - net.speed_kmh[0]);

        let mut pref: Vec<f64> = (0..N_TYPES).map(|_| gamma.sample(rng).max(1e-12)).collect();
        let total: f64 = pref.iter().sum();
        for p in &mut pref {
            *p /= total;
        }
        let max_pref = pref.iter().copied().fold(f64::MIN, f64::max);

        let [p_lo, p_hi] = config.swipe.p_range;
        let [q_lo, q_hi] = config.swipe.q_range;
        let swipe = (0..N_TYPES)
            .map(|t| {
                // Liked types are abandoned more slowly and finished more
                // often; a jitter keeps users individual.
                let liking = pref[t] / max_pref;
                let jitter_p = 0.9 + 0.2 * rng.gen::<f64>();
                let jitter_q = 0.9 + 0.2 * rng.gen::<f64>();
                let p = (p_hi - (p_hi - p_lo) * liking) * jitter_p;
                let q = (q_lo + (q_hi - q_lo) * liking) * jitter_q;
                SwipeSource::Parametric(SwipeParams {
                    p: p.clamp(p_lo.min(1e-3), 1.0),
                    q: q.clamp(0.0, 1.0),
                })
            })
            .collect();

        let shadowing_db = shadow.map_or(0.0, |d| d.sample(rng));
        let serving_bs = nearest_bs(position, &base_stations);
        users.push(UserState {
            id,
            position,
            waypoints,
            next_waypoint: 0,
            speed_mps: speed_kmh / 3.6,
            serving_bs,
            true_preference: pref,
            swipe,
            shadowing_db,
            buffer: VecDeque::new(),
            playhead: None,
            active_quota: 0,
            idle: false,
        });
    }

    World {
        users,
        base_stations,
        catalog,
        radio: RadioEnv {
            tx_power_dbm: net.tx_power_dbm,
            noise_dbm_hz: net.noise_dbm_hz,
            probe_bandwidth_hz: net.probe_bandwidth_hz,
        },
        time_s: 0.0,
    }
}
