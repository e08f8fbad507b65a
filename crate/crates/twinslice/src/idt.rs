//! Infrastructure twin: turns per-user twin abstractions into per-group
//! demand forecasts, schedules slot-level bandwidth inside a window's
//! reservations, and emulates candidate groupings ahead of time to score
//! them.
//!
//! Everything here runs on *estimated* state — the twins' beliefs — never on
//! ground truth. That is the point of the architecture: planning quality is
//! limited by twin fidelity, which the experiment measures.

use crate::domain::{ScenarioConfig, VideoCatalog};
use crate::error::{Error, Result};
use crate::kpi;
use crate::physnet::{
    nearest_bs, path_loss_db, rate_from_probe, simulate_window, spectral_efficiency,
    station_layout, GroupWindowPlan, RadioEnv, SwipeSource, UserState, WindowPlan, World,
};
use crate::rng::{substream, Stream};
use crate::sdt::{reserve_convex, Grouping, ReservationDemand};
use crate::udt::UdtAbstraction;
use std::sync::Arc;

/// Forecast resource needs of one multicast group for the next window.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDemand {
    pub group: usize,
    pub n_members: usize,
    /// Expected streaming consumption at the chosen rung, bits/s.
    pub expected_bandwidth_bps: f64,
    /// Expected transcode load for the same stream, ops/s.
    pub expected_compute_ops_per_s: f64,
    /// Mean expected watched fraction of a video, per content type.
    pub watch_fraction_by_type: Vec<f64>,
    /// Weakest member's estimated channel quality at the probe bandwidth.
    pub min_spectral_bps_hz: f64,
    /// Ladder rung the forecast assumes the group streams at.
    pub chosen_version: usize,
}

/// Top-k videos by mean member preference for the video's type; ties break
/// toward the lower video id. This list is both the demand forecast's and
/// the actual window's playlist.
pub fn recommend_playlist(
    members: &[usize],
    abstractions: &[UdtAbstraction],
    catalog: &VideoCatalog,
    k: usize,
) -> Result<Vec<usize>> {
    if members.is_empty() {
        return Err(Error::NoUsers);
    }
    for &m in members {
        if m >= abstractions.len() {
            return Err(Error::UnknownUser(m));
        }
    }
    let mut scored: Vec<(f64, usize)> = catalog
        .videos
        .iter()
        .map(|v| {
            let mean: f64 = members
                .iter()
                .map(|&m| {
                    abstractions[m]
                        .preference
                        .get(v.type_index)
                        .copied()
                        .unwrap_or(0.0)
                })
                .sum::<f64>()
                / members.len() as f64;
            (mean, v.id)
        })
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    Ok(scored.into_iter().take(k).map(|(_, id)| id).collect())
}

/// Aggregates member twins into one demand forecast.
///
/// The multicast stream plays at the highest rung whose bitrate fits the
/// weakest member's estimated link rate at `reference_bandwidth_hz` (lowest
/// rung when none fits). Expected consumption scales that rung's bitrate by
/// how much of each playlist video the members are expected to actually
/// watch before swiping away.
pub fn aggregate_group_demand(
    group: usize,
    members: &[usize],
    abstractions: &[UdtAbstraction],
    playlist: &[usize],
    catalog: &VideoCatalog,
    reference_bandwidth_hz: f64,
    probe_bandwidth_hz: f64,
) -> Result<GroupDemand> {
    if members.is_empty() {
        return Err(Error::EmptyGroup(group));
    }
    for &m in members {
        if m >= abstractions.len() {
            return Err(Error::UnknownUser(m));
        }
    }
    for &v in playlist {
        if v >= catalog.videos.len() {
            return Err(Error::OutOfRange {
                field: "playlist".into(),
                detail: format!("video {v} not in the catalog"),
            });
        }
    }
    let n_types = abstractions[members[0]].preference.len();
    let n_segments = catalog
        .videos
        .iter()
        .map(|v| v.n_segments())
        .max()
        .unwrap_or(1);

    // Mean expected watched fraction per type, averaged over members.
    let watch_fraction_by_type: Vec<f64> = (0..n_types)
        .map(|t| {
            members
                .iter()
                .map(|&m| {
                    let pmf = &abstractions[m].swipe_pmf_by_type[t];
                    crate::physnet::expected_watched_segments(pmf, n_segments)
                        / n_segments as f64
                })
                .sum::<f64>()
                / members.len() as f64
        })
        .collect();

    // Weakest member's estimated link rate at the reference bandwidth picks
    // the rung the whole group can follow.
    let min_eta = members
        .iter()
        .map(|&m| abstractions[m].est_spectral_bps_hz)
        .fold(f64::INFINITY, f64::min);
    let min_rate =
        rate_from_probe(min_eta.max(0.0), probe_bandwidth_hz, reference_bandwidth_hz);
    let ladder = &catalog.videos[0].versions_bps;
    let chosen_version = ladder
        .iter()
        .rposition(|&r| r <= min_rate)
        .unwrap_or(0);

    // Average the per-video forecast over the playlist.
    let (mut bw, mut ops) = (0.0, 0.0);
    if !playlist.is_empty() {
        for &vid in playlist {
            let video = &catalog.videos[vid];
            let fraction = watch_fraction_by_type[video.type_index];
            bw += video.versions_bps[chosen_version] * fraction;
            ops += video.compute_cost_ops[chosen_version] / video.segment_len_s * fraction;
        }
        bw /= playlist.len() as f64;
        ops /= playlist.len() as f64;
    }
    Ok(GroupDemand {
        group,
        n_members: members.len(),
        expected_bandwidth_bps: bw,
        expected_compute_ops_per_s: ops,
        watch_fraction_by_type,
        min_spectral_bps_hz: min_eta,
        chosen_version,
    })
}

/// Converts a bits/s demand forecast into the pool units reservations use:
/// Hz for bandwidth (via the estimated link efficiency at the reference
/// bandwidth) and ops/s for compute (already pool units).
pub fn demand_to_reservation(
    demand: &GroupDemand,
    reference_bandwidth_hz: f64,
    probe_bandwidth_hz: f64,
) -> ReservationDemand {
    let rate = rate_from_probe(
        demand.min_spectral_bps_hz.max(0.0),
        probe_bandwidth_hz,
        reference_bandwidth_hz,
    );
    let bps_per_hz = if reference_bandwidth_hz > 0.0 {
        rate / reference_bandwidth_hz
    } else {
        0.0
    };
    let bandwidth_hz = if bps_per_hz > 1e-12 {
        demand.expected_bandwidth_bps / bps_per_hz
    } else {
        0.0
    };
    ReservationDemand {
        group: demand.group,
        bandwidth_hz,
        compute_ops_per_s: demand.expected_compute_ops_per_s,
        weight: demand.n_members as f64,
    }
}

/// Splits each window slot's pooled bandwidth across groups in proportion to
/// their modeled remaining backlog.
///
/// The pool is the sum of all reservations. A group with no backlog takes
/// only its own reservation's worth of idle allocation; a backlogged group
/// may borrow idle capacity, but its running total is capped at its own
/// reservation's cumulative share plus one slot of slack, so borrowing is a
/// transient, not a lease.
///
/// Returns `bandwidth_hz[group][slot]`.
pub fn allocate_small_timescale(
    reserved_bandwidth_hz: &[f64],
    demands: &[GroupDemand],
    n_slots: usize,
    slot_len_s: f64,
    probe_bandwidth_hz: f64,
) -> Result<Vec<Vec<f64>>> {
    let n = reserved_bandwidth_hz.len();
    if demands.len() < n {
        return Err(Error::UnknownGroup(demands.len()));
    }
    for (i, d) in demands.iter().enumerate() {
        if d.group != i || i >= n {
            return Err(Error::UnknownGroup(d.group));
        }
    }
    if n_slots == 0 || !(slot_len_s > 0.0) {
        return Err(Error::OutOfRange {
            field: "n_slots/slot_len_s".into(),
            detail: "slot grid must be non-empty with positive slots".into(),
        });
    }
    let dt = slot_len_s;
    let window_s = n_slots as f64 * dt;
    let pool: f64 = reserved_bandwidth_hz.iter().sum();
    let mut backlog: Vec<f64> = demands
        .iter()
        .map(|d| d.expected_bandwidth_bps * window_s)
        .collect();
    let mut used_hz_s = vec![0.0f64; n];
    let mut out = vec![vec![0.0f64; n_slots]; n];

    for k in 0..n_slots {
        // Headroom left under the cumulative cap, expressed in Hz for this
        // slot: reservation through slot k, plus one slot of slack.
        let avail: Vec<f64> = (0..n)
            .map(|g| {
                ((reserved_bandwidth_hz[g] * dt * (k as f64 + 2.0) - used_hz_s[g]) / dt).max(0.0)
            })
            .collect();
        let mut share = vec![0.0f64; n];
        let active: Vec<usize> = (0..n).filter(|&g| backlog[g] > 1e-9).collect();
        if active.is_empty() {
            // Nothing forecast to send: every group idles on its own
            // reservation.
            for g in 0..n {
                share[g] = reserved_bandwidth_hz[g].min(avail[g]);
            }
        } else {
            let mut left = pool;
            let mut candidates = active;
            while left > 1e-9 && !candidates.is_empty() {
                let weight_sum: f64 = candidates.iter().map(|&g| backlog[g]).sum();
                if weight_sum <= 0.0 {
                    break;
                }
                let mut still_open = Vec::new();
                let mut spent = 0.0;
                for &g in &candidates {
                    let want = left * backlog[g] / weight_sum;
                    let room = avail[g] - share[g];
                    if want >= room - 1e-12 {
                        share[g] = avail[g];
                        spent += room;
                    } else {
                        share[g] += want;
                        spent += want;
                        still_open.push(g);
                    }
                }
                let everyone_open = still_open.len() == candidates.len();
                left -= spent;
                candidates = still_open;
                if everyone_open {
                    break; // nobody hit a cap: the pool is fully placed
                }
            }
        }
        for g in 0..n {
            used_hz_s[g] += share[g] * dt;
            if share[g] > 0.0 {
                let drained = rate_from_probe(
                    demands[g].min_spectral_bps_hz.max(0.0),
                    probe_bandwidth_hz,
                    share[g],
                ) * dt;
                backlog[g] = (backlog[g] - drained).max(0.0);
            }
            out[g][k] = share[g];
        }
    }
    Ok(out)
}

/// Slot grid the emulator runs on: coarser than the physical network's, so
/// scoring a candidate grouping costs a fraction of living through it.
const EMULATION_SLOTS: usize = 12;

/// Scores a candidate grouping by running the full planning pipeline —
/// demand forecast, reservation, slot allocation — and then playing the
/// plan against a twin-built world for `horizon_windows` windows.
///
/// A pure function of its inputs: the twin world is rebuilt from the
/// abstractions on every call and all randomness derives from `seed`, so
/// the same candidate always scores the same. Higher is better.
/// Signal-to-noise ratio, dB, implied by a spectral efficiency (inverse of
/// the capacity formula). A dead channel maps to a very large attenuation
/// rather than a singularity.
fn snr_db_from_eta(eta: f64) -> f64 {
    10.0 * (2f64.powf(eta.max(0.0)) - 1.0).max(1e-30).log10()
}

pub fn emulate_utility(
    grouping: &Grouping,
    total_bandwidth_hz: f64,
    total_compute_ops_per_s: f64,
    abstractions: &[UdtAbstraction],
    catalog: &Arc<VideoCatalog>,
    config: &ScenarioConfig,
    horizon_windows: usize,
    seed: u64,
) -> Result<f64> {
    assert!(horizon_windows >= 1, "need at least one window to emulate");
    let n_groups = grouping.n_groups();
    let reference_bw = total_bandwidth_hz / n_groups.max(1) as f64;
    let probe_hz = config.network.probe_bandwidth_hz;

    // Forecast each group's demand from its members' twins.
    let mut playlists = Vec::with_capacity(n_groups);
    let mut demands = Vec::with_capacity(n_groups);
    for info in &grouping.groups {
        if info.members.is_empty() {
            return Err(Error::EmptyGroup(info.id));
        }
        let playlist =
            recommend_playlist(&info.members, abstractions, catalog, config.sdt.recommend_k)?;
        let demand = aggregate_group_demand(
            info.id,
            &info.members,
            abstractions,
            &playlist,
            catalog,
            reference_bw,
            probe_hz,
        )?;
        playlists.push(playlist);
        demands.push(demand);
    }

    // Reserve and schedule exactly as the production pipeline would.
    let reservation_demands: Vec<ReservationDemand> = demands
        .iter()
        .map(|d| demand_to_reservation(d, reference_bw, probe_hz))
        .collect();
    let reservation = reserve_convex(
        &reservation_demands,
        total_bandwidth_hz,
        total_compute_ops_per_s,
        config.sdt.headroom,
    )?;
    let window_s = config.time.large_ts_s as f64;
    let n_slots = EMULATION_SLOTS.min(config.slots_per_window().max(1));
    let slot_len_s = window_s / n_slots as f64;
    let bandwidth = allocate_small_timescale(
        &reservation.bandwidth_hz,
        &demands,
        n_slots,
        slot_len_s,
        probe_hz,
    )?;

    // A disposable world built purely from twin beliefs: estimated
    // positions (static — the twin does not guess future movement),
    // estimated preferences, estimated swipe laws. Each replica carries the
    // shadowing offset that makes its distance-implied channel reproduce the
    // twin's channel estimate at the serving station, so emulated link rates
    // follow what the twin believes about the user.
    let stations = station_layout(config.network.n_bs, config.network.area_m);
    let users: Vec<UserState> = abstractions
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let serving = nearest_bs(a.est_position, &stations);
            let b = stations[serving].position;
            let d = ((a.est_position.0 - b.0).powi(2) + (a.est_position.1 - b.1).powi(2)).sqrt();
            let eta_pos = spectral_efficiency(
                config.network.tx_power_dbm,
                path_loss_db(d),
                config.network.noise_dbm_hz,
                probe_hz,
            );
            let shadowing_db = snr_db_from_eta(eta_pos) - snr_db_from_eta(a.est_spectral_bps_hz);
            UserState {
                id: i,
                position: a.est_position,
                waypoints: Vec::new(),
                next_waypoint: 0,
                speed_mps: 0.0,
                serving_bs: serving,
                true_preference: a.preference.clone(),
                swipe: a
                    .swipe_pmf_by_type
                    .iter()
                    .map(|pmf| SwipeSource::Empirical(pmf.clone()))
                    .collect(),
                shadowing_db,
                buffer: std::collections::VecDeque::new(),
                playhead: None,
                active_quota: 0,
                idle: false,
            }
        })
        .collect();
    let mut world = World {
        users,
        base_stations: stations,
        catalog: Arc::clone(catalog),
        radio: RadioEnv {
            tx_power_dbm: config.network.tx_power_dbm,
            noise_dbm_hz: config.network.noise_dbm_hz,
            probe_bandwidth_hz: probe_hz,
        },
        time_s: 0.0,
    };
    let plan = WindowPlan {
        slot_len_s,
        n_slots,
        buffer_cap_segments: config.playback.buffer_cap_segments,
        groups: grouping
            .groups
            .iter()
            .enumerate()
            .map(|(g, info)| GroupWindowPlan {
                group: info.id,
                bs: info.bs,
                members: info.members.clone(),
                playlist: playlists[g].clone(),
                bandwidth_hz: bandwidth[g].clone(),
                compute_ops_per_s: reservation.compute_ops_per_s[g],
            })
            .collect(),
    };

    let mut rng = substream(seed, Stream::Emulation);
    let mut total = 0.0;
    for _ in 0..horizon_windows {
        let report = simulate_window(&mut world, &plan, &mut rng)?;
        let sats: Vec<f64> = (0..abstractions.len())
            .map(|u| kpi::user_satisfaction(&report, u, catalog, config.kpi.mu_stall))
            .collect::<Result<_>>()?;
        let (bw_frac, ops_frac) =
            kpi::window_usage_fractions(&report, total_bandwidth_hz, total_compute_ops_per_s);
        total += kpi::system_utility(&sats, bw_frac, ops_frac, config.kpi.gamma_r)?;
    }
    Ok(total / horizon_windows as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_catalog, CatalogParams, N_TYPES};
    use crate::sdt::GroupInfo;

    /// A hand-built abstraction: always at `pos`, channel quality `eta`,
    /// uniform preference, and a point-mass swipe law at `outcome` for every
    /// type (outcome `S+1` means "always completes").
    fn abstraction(user: usize, pos: (f64, f64), eta: f64, outcome: usize, s: usize) -> UdtAbstraction {
        let mut pmf = vec![0.0; s + 1];
        pmf[outcome - 1] = 1.0;
        UdtAbstraction {
            user,
            est_position: pos,
            nearest_bs: 0,
            est_spectral_bps_hz: eta,
            preference: vec![1.0 / N_TYPES as f64; N_TYPES],
            swipe_pmf_by_type: vec![pmf; N_TYPES],
            freshness_ratio: 1.0,
            periods_s: [1.0; 4],
        }
    }

    fn one_rung_catalog(bps: f64) -> VideoCatalog {
        build_catalog(&CatalogParams {
            n_videos: 16,
            duration_s: 15.0,
            segment_len_s: 1.0,
            bitrate_ladder_bps: vec![bps],
            compute_ops_per_bit: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn members_who_never_swipe_demand_the_full_bitrate() {
        let catalog = one_rung_catalog(45.0e6);
        let abs = vec![abstraction(0, (0.0, 0.0), 4.0, 16, 15)];
        let d = aggregate_group_demand(0, &[0], &abs, &[0, 1], &catalog, 1.0e7, 1.0e7).unwrap();
        assert!((d.expected_bandwidth_bps - 45.0e6).abs() < 1e-6, "{d:?}");
        assert_eq!(d.chosen_version, 0);
        assert_eq!(d.n_members, 1);
    }

    #[test]
    fn swiping_after_one_of_fifteen_segments_demands_a_fifteenth() {
        let catalog = one_rung_catalog(45.0e6);
        let abs = vec![
            abstraction(0, (0.0, 0.0), 4.0, 1, 15),
            abstraction(1, (0.0, 0.0), 4.0, 1, 15),
        ];
        let d = aggregate_group_demand(0, &[0, 1], &abs, &[0], &catalog, 1.0e7, 1.0e7).unwrap();
        assert!(
            (d.expected_bandwidth_bps - 45.0e6 / 15.0).abs() < 1e-6,
            "{}",
            d.expected_bandwidth_bps
        );
    }

    #[test]
    fn expected_watch_length_averages_the_members() {
        // Point masses at 5 and 10 segments of 15 → mean watched length is
        // 7.5 segments.
        let catalog = one_rung_catalog(45.0e6);
        let abs = vec![
            abstraction(0, (0.0, 0.0), 4.0, 5, 15),
            abstraction(1, (0.0, 0.0), 4.0, 10, 15),
        ];
        let d = aggregate_group_demand(0, &[0, 1], &abs, &[0], &catalog, 1.0e7, 1.0e7).unwrap();
        let watched_segments = d.watch_fraction_by_type[0] * 15.0;
        assert!((watched_segments - 7.5).abs() < 1e-12);
        assert!((d.expected_bandwidth_bps - 45.0e6 * 0.5).abs() < 1e-6);
    }

    #[test]
    fn version_follows_the_weakest_member() {
        let catalog = build_catalog(&CatalogParams::default()).unwrap();
        // eta 4 bps/Hz at 1e7 Hz reference → ~40 Mbps; eta 0.2 → ~2 Mbps.
        let strong = abstraction(0, (0.0, 0.0), 4.0, 16, 15);
        let weak = abstraction(1, (0.0, 0.0), 0.2, 16, 15);
        let abs = vec![strong, weak];
        let alone =
            aggregate_group_demand(0, &[0], &abs, &[0], &catalog, 1.0e7, 1.0e7).unwrap();
        let together =
            aggregate_group_demand(0, &[0, 1], &abs, &[0], &catalog, 1.0e7, 1.0e7).unwrap();
        assert!(alone.chosen_version > together.chosen_version);
        assert_eq!(together.chosen_version, 0, "fallback is the lowest rung");
        assert!((together.min_spectral_bps_hz - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_group_and_unknown_member_are_rejected() {
        let catalog = one_rung_catalog(1.0e6);
        let abs = vec![abstraction(0, (0.0, 0.0), 1.0, 1, 15)];
        assert!(matches!(
            aggregate_group_demand(3, &[], &abs, &[0], &catalog, 1.0e7, 1.0e7),
            Err(Error::EmptyGroup(3))
        ));
        assert!(matches!(
            aggregate_group_demand(0, &[5], &abs, &[0], &catalog, 1.0e7, 1.0e7),
            Err(Error::UnknownUser(5))
        ));
    }

    #[test]
    fn adding_a_fully_watching_member_never_lowers_demand() {
        use rand::{Rng, SeedableRng};
        let catalog = build_catalog(&CatalogParams::default()).unwrap();
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(41);
        for _ in 0..25 {
            let n = rng.gen_range(1..5);
            let mut abs: Vec<UdtAbstraction> = (0..n)
                .map(|u| abstraction(u, (0.0, 0.0), rng.gen_range(0.5..4.0), rng.gen_range(1..=16), 15))
                .collect();
            let members: Vec<usize> = (0..n).collect();
            let before =
                aggregate_group_demand(0, &members, &abs, &[0, 1, 2], &catalog, 1.0e7, 1.0e7)
                    .unwrap();
            // The newcomer watches everything and has the best channel seen.
            let best_eta = abs
                .iter()
                .map(|a| a.est_spectral_bps_hz)
                .fold(0.0f64, f64::max);
            abs.push(abstraction(n, (0.0, 0.0), best_eta, 16, 15));
            let mut grown = members.clone();
            grown.push(n);
            let after =
                aggregate_group_demand(0, &grown, &abs, &[0, 1, 2], &catalog, 1.0e7, 1.0e7)
                    .unwrap();
            assert!(
                after.expected_bandwidth_bps >= before.expected_bandwidth_bps - 1e-9,
                "{} < {}",
                after.expected_bandwidth_bps,
                before.expected_bandwidth_bps
            );
        }
    }

    #[test]
    fn playlist_ranks_by_mean_preference_with_id_ties() {
        let catalog = build_catalog(&CatalogParams {
            n_videos: 24,
            ..CatalogParams::default()
        })
        .unwrap();
        let mut a = abstraction(0, (0.0, 0.0), 1.0, 16, 15);
        a.preference = vec![0.0; N_TYPES];
        a.preference[2] = 0.7;
        a.preference[5] = 0.3;
        let abs = vec![a];
        let playlist = recommend_playlist(&[0], &abs, &catalog, 4).unwrap();
        // Videos of type 2 are ids 2, 10, 18 (round-robin typing); then the
        // best type-5 video by id.
        assert_eq!(playlist, vec![2, 10, 18, 5]);
        assert!(matches!(
            recommend_playlist(&[], &abs, &catalog, 4),
            Err(Error::NoUsers)
        ));
    }

    fn flat_demand(group: usize, bps: f64, eta: f64) -> GroupDemand {
        GroupDemand {
            group,
            n_members: 1,
            expected_bandwidth_bps: bps,
            expected_compute_ops_per_s: bps,
            watch_fraction_by_type: vec![1.0; N_TYPES],
            min_spectral_bps_hz: eta,
            chosen_version: 0,
        }
    }

    #[test]
    fn lone_group_takes_the_whole_reservation_every_slot() {
        let demands = [flat_demand(0, 1.0e6, 2.0)];
        let alloc = allocate_small_timescale(&[5.0e6], &demands, 4, 1.0, 1.0e7).unwrap();
        assert_eq!(alloc[0], vec![5.0e6; 4]);
    }

    #[test]
    fn slot_shares_follow_backlog_proportions() {
        // Backlogs 2:1:1 with equal reservations and negligible drain → the
        // first slot splits the pool 0.5 / 0.25 / 0.25.
        let demands = [
            flat_demand(0, 2.0e9, 1e-6),
            flat_demand(1, 1.0e9, 1e-6),
            flat_demand(2, 1.0e9, 1e-6),
        ];
        let b = [1.0e6, 1.0e6, 1.0e6];
        let alloc = allocate_small_timescale(&b, &demands, 2, 1.0, 1.0e7).unwrap();
        let pool = 3.0e6;
        assert!((alloc[0][0] - 0.50 * pool).abs() < 1e-3, "{:?}", alloc[0]);
        assert!((alloc[1][0] - 0.25 * pool).abs() < 1e-3);
        assert!((alloc[2][0] - 0.25 * pool).abs() < 1e-3);
    }

    #[test]
    fn idle_groups_lend_and_borrowing_is_transient() {
        let demands = [flat_demand(0, 0.0, 1.0), flat_demand(1, 1.0e9, 1e-6)];
        let b = [1.0e6, 1.0e6];
        let alloc = allocate_small_timescale(&b, &demands, 3, 1.0, 1.0e7).unwrap();
        // Slot 0: the idle group's share flows to the busy one (one-slot
        // burst up to 2× its reservation).
        assert!((alloc[1][0] - 2.0e6).abs() < 1e-3, "{:?}", alloc[1]);
        assert_eq!(alloc[0][0], 0.0);
        // From slot 1 on the cumulative cap claws the loan back.
        assert!((alloc[1][1] - 1.0e6).abs() < 1e-3, "{:?}", alloc[1]);
        assert!((alloc[1][2] - 1.0e6).abs() < 1e-3);
    }

    #[test]
    fn cumulative_allocation_never_exceeds_reservation_plus_one_slot() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for _ in 0..30 {
            let n = rng.gen_range(1..5);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0e5..5.0e6)).collect();
            let demands: Vec<GroupDemand> = (0..n)
                .map(|g| {
                    flat_demand(
                        g,
                        rng.gen_range(0.0..1.0e7),
                        rng.gen_range(0.1..6.0),
                    )
                })
                .collect();
            let n_slots = rng.gen_range(1..20);
            let dt = 1.0;
            let alloc = allocate_small_timescale(&b, &demands, n_slots, dt, 1.0e7).unwrap();
            let pool: f64 = b.iter().sum();
            for k in 0..n_slots {
                let slot_total: f64 = (0..n).map(|g| alloc[g][k]).sum();
                assert!(slot_total <= pool * (1.0 + 1e-9), "slot {k} oversubscribed");
            }
            for g in 0..n {
                let cum: f64 = alloc[g].iter().sum::<f64>() * dt;
                let cap = b[g] * (n_slots as f64 * dt + dt);
                assert!(cum <= cap * (1.0 + 1e-9) + 1e-6, "group {g}: {cum} > {cap}");
            }
        }
    }

    #[test]
    fn uncovered_reserved_group_is_an_unknown_group() {
        let demands = [flat_demand(0, 1.0, 1.0)];
        let err = allocate_small_timescale(&[1.0, 1.0], &demands, 2, 1.0, 1.0e7).unwrap_err();
        assert!(matches!(err, Error::UnknownGroup(1)));
        let mislabeled = [flat_demand(3, 1.0, 1.0)];
        let err = allocate_small_timescale(&[1.0], &mislabeled, 2, 1.0, 1.0e7).unwrap_err();
        assert!(matches!(err, Error::UnknownGroup(3)));
    }

    /// Scenario for the emulator tests: one station, three identical users
    /// some way out, a bandwidth pool that comfortably carries one shared
    /// stream but strains three copies of it.
    fn emulation_setup() -> (ScenarioConfig, Arc<VideoCatalog>, Vec<UdtAbstraction>) {
        let mut config = ScenarioConfig::default();
        config.network.n_users = 3;
        config.network.n_bs = 1;
        config.network.area_m = [1000.0, 600.0];
        config.network.total_bandwidth_hz = 4.5e6;
        config.network.total_compute_ops = 1.0e9;
        let catalog = Arc::new(build_catalog(&config.catalog).unwrap());
        // 400 m from the station at (500, 300); eta ≈ 6 bps/Hz at the probe.
        let abs: Vec<UdtAbstraction> = (0..3)
            .map(|u| abstraction(u, (900.0, 300.0), 6.0, 16, catalog.videos[0].n_segments()))
            .collect();
        (config, catalog, abs)
    }

    #[test]
    fn merging_identical_users_beats_separate_streams() {
        let (config, catalog, abs) = emulation_setup();
        let merged = Grouping::from_assignment(vec![0, 0, 0], &[0]).unwrap();
        let split = Grouping::from_assignment(vec![0, 1, 2], &[0, 0, 0]).unwrap();
        let score = |g: &Grouping| {
            emulate_utility(
                g,
                config.network.total_bandwidth_hz,
                config.network.total_compute_ops,
                &abs,
                &catalog,
                &config,
                1,
                7,
            )
            .unwrap()
        };
        let merged_utility = score(&merged);
        let split_utility = score(&split);
        assert!(
            merged_utility >= split_utility,
            "one shared stream {merged_utility} should beat three copies {split_utility}"
        );
    }

    #[test]
    fn emulation_is_a_pure_function_of_its_inputs() {
        let (config, catalog, abs) = emulation_setup();
        let grouping = Grouping::from_assignment(vec![0, 0, 1], &[0, 0]).unwrap();
        let run = || {
            emulate_utility(
                &grouping,
                config.network.total_bandwidth_hz,
                config.network.total_compute_ops,
                &abs,
                &catalog,
                &config,
                2,
                99,
            )
            .unwrap()
        };
        assert_eq!(run().to_bits(), run().to_bits(), "bit-identical replays");
    }

    #[test]
    fn empty_partition_cell_propagates() {
        let (config, catalog, abs) = emulation_setup();
        let broken = Grouping {
            assignment: vec![0, 0, 0],
            groups: vec![
                GroupInfo {
                    id: 0,
                    bs: 0,
                    members: vec![0, 1, 2],
                },
                GroupInfo {
                    id: 1,
                    bs: 0,
                    members: vec![],
                },
            ],
        };
        let err = emulate_utility(
            &broken,
            config.network.total_bandwidth_hz,
            config.network.total_compute_ops,
            &abs,
            &catalog,
            &config,
            1,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmptyGroup(1)));
    }
}
