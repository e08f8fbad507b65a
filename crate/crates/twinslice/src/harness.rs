//! Experiment orchestration: runs the two-timescale control loop for every
//! (scheme, seed) cell, collects per-window metrics, and renders them as CSV.
//!
//! A *cell* is one complete simulation: a world drawn from the seed, one
//! twin per user bootstrapped from it, and `time.sim_windows` rounds of
//!
//! 1. refresh twin collection periods and build abstractions,
//! 2. group users (learned, density-based, or key-based, per scheme),
//! 3. forecast per-group demand and reserve slice resources for the window,
//! 4. split each reservation across slots,
//! 5. play the window out on the network,
//! 6. feed the resulting traces back into the twins at their adapted
//!    cadences, and score the window.
//!
//! Cells are independent and may run in parallel; results are sorted by
//! (scheme, seed) afterwards so rendered output is reproducible byte for
//! byte regardless of scheduling.

use crate::domain::{build_catalog, ScenarioConfig, SchemeId, N_TYPES};
use crate::error::{Error, Result};
use crate::idt::{
    aggregate_group_demand, allocate_small_timescale, demand_to_reservation, emulate_utility,
    recommend_playlist,
};
use crate::kpi;
use crate::physnet::{init_world, simulate_window, GroupWindowPlan, WindowPlan};
use crate::rng::{substream, Stream};
use crate::sdt::{
    build_user_features, cluster_dbscan, cluster_heuristic, cluster_rl, reserve_bnb,
    reserve_convex, reserve_historical, DbscanParams, GroupInfo, QTable, ReservationDemand,
    RlConfig, UserFeature,
};
use crate::udt::{Attribute, Observation, UserTwin};
use rayon::prelude::*;
use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

/// Per-user playback outcome of one window, kept for the optional trace.
#[derive(Debug, Clone, PartialEq)]
pub struct UserTraceRow {
    pub user: usize,
    pub group: usize,
    pub delivered_bits: f64,
    pub stall_s: f64,
    pub watch_s: f64,
    pub swipes: usize,
}

/// Everything measured about one window of one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowRecord {
    pub window: usize,
    pub n_groups: usize,
    /// Satisfaction per user, indexed by user id.
    pub satisfaction: Vec<f64>,
    /// Fraction of the bandwidth pool actually used over the window.
    pub bw_frac: f64,
    /// Fraction of the compute pool actually used over the window.
    pub compute_frac: f64,
    /// Mean twin freshness ratio, measured at the end of the window.
    pub freshness: f64,
    /// Slice utility of the window.
    pub q: f64,
    /// Twin operation cost charged for the window.
    pub r: f64,
    /// Holistic value of the window.
    pub v: f64,
    /// Bandwidth reserved per group, Hz (audit trail for conservation checks).
    pub reserved_bandwidth_hz: Vec<f64>,
    /// Compute reserved per group, ops/s.
    pub reserved_compute_ops: Vec<f64>,
    /// Bits each group actually delivered.
    pub group_bits_sent: Vec<f64>,
    /// Bit capacity each group's granted bandwidth amounted to.
    pub group_capacity_bits: Vec<f64>,
    /// Largest single segment each group shipped, bits.
    pub group_max_segment_bits: Vec<f64>,
    pub per_user: Vec<UserTraceRow>,
}

/// End-of-cell state of one twin attribute, for the optional twin report.
#[derive(Debug, Clone, PartialEq)]
pub struct TwinSnapshotRow {
    pub user: usize,
    pub attribute: &'static str,
    /// Age of the newest sample, seconds.
    pub age_s: f64,
    /// Achieved synchronization frequency over the last window, Hz.
    pub achieved_hz: f64,
    /// Collection period the twin had adapted to, seconds.
    pub period_s: f64,
}

/// Result of one (scheme, seed) cell. A failed cell keeps the windows that
/// completed and records the failure; it never poisons sibling cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub scheme: SchemeId,
    pub seed: u64,
    pub windows: Vec<WindowRecord>,
    pub twin_snapshot: Vec<TwinSnapshotRow>,
    pub error: Option<String>,
}

/// All cells of one experiment, sorted by (scheme, seed).
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub cells: Vec<CellResult>,
    pub n_users: usize,
}

impl RunMetrics {
    /// True if any cell failed.
    pub fn has_errors(&self) -> bool {
        self.cells.iter().any(|c| c.error.is_some())
    }

    fn cells_of(&self, scheme: SchemeId) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(move |c| c.scheme == scheme)
    }

    /// Every per-user satisfaction sample of a scheme, across seeds and
    /// windows.
    pub fn satisfaction_values(&self, scheme: SchemeId) -> Vec<f64> {
        self.cells_of(scheme)
            .flat_map(|c| c.windows.iter())
            .flat_map(|w| w.satisfaction.iter().copied())
            .collect()
    }

    /// Per-window resource consumption of a scheme: the mean of the
    /// bandwidth and compute usage fractions.
    pub fn consumption_values(&self, scheme: SchemeId) -> Vec<f64> {
        self.cells_of(scheme)
            .flat_map(|c| c.windows.iter())
            .map(|w| (w.bw_frac + w.compute_frac) / 2.0)
            .collect()
    }

    /// Per-window holistic value of a scheme.
    pub fn value_values(&self, scheme: SchemeId) -> Vec<f64> {
        self.cells_of(scheme)
            .flat_map(|c| c.windows.iter())
            .map(|w| w.v)
            .collect()
    }

    /// Per-window twin freshness of a scheme.
    pub fn freshness_values(&self, scheme: SchemeId) -> Vec<f64> {
        self.cells_of(scheme)
            .flat_map(|c| c.windows.iter())
            .map(|w| w.freshness)
            .collect()
    }
}

fn scheme_rank(scheme: SchemeId) -> u8 {
    match scheme {
        SchemeId::Proposed => 0,
        SchemeId::Optimization => 1,
        SchemeId::Heuristic => 2,
    }
}

/// Runs every (scheme, seed) cell of an experiment.
///
/// Cells run in parallel; the returned metrics are sorted by (scheme, seed)
/// so downstream rendering is order-independent. A cell failure is recorded
/// in that cell's `error` field rather than aborting the run.
pub fn run_experiment(
    config: &ScenarioConfig,
    schemes: &[SchemeId],
    seeds: &[u64],
) -> Result<RunMetrics> {
    config.validate()?;
    if schemes.is_empty() {
        return Err(Error::OutOfRange {
            field: "schemes".into(),
            detail: "need at least one scheme".into(),
        });
    }
    if seeds.is_empty() {
        return Err(Error::OutOfRange {
            field: "seeds".into(),
            detail: "need at least one seed".into(),
        });
    }
    let jobs: Vec<(SchemeId, u64)> = schemes
        .iter()
        .flat_map(|&s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let mut cells: Vec<CellResult> = jobs
        .par_iter()
        .map(|&(scheme, seed)| run_cell(config, scheme, seed))
        .collect();
    cells.sort_by(|a, b| {
        (scheme_rank(a.scheme), a.seed).cmp(&(scheme_rank(b.scheme), b.seed))
    });
    Ok(RunMetrics {
        cells,
        n_users: config.network.n_users,
    })
}

/// Runs one (scheme, seed) cell, capturing any failure in the result.
pub fn run_cell(config: &ScenarioConfig, scheme: SchemeId, seed: u64) -> CellResult {
    let mut windows = Vec::new();
    match run_cell_inner(config, scheme, seed, &mut windows) {
        Ok(twin_snapshot) => CellResult {
            scheme,
            seed,
            windows,
            twin_snapshot,
            error: None,
        },
        Err(e) => CellResult {
            scheme,
            seed,
            windows,
            twin_snapshot: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// The grouping key the key-based scheme files its traffic history under:
/// (serving station, dominant content type of the group).
fn history_key(info: &GroupInfo, features: &[UserFeature]) -> (usize, usize) {
    let first = info.members[0];
    let prefs = &features[first].values[2..2 + N_TYPES];
    let mut top = 0;
    for (t, &p) in prefs.iter().enumerate() {
        if p > prefs[top] {
            top = t;
        }
    }
    (info.bs, top)
}

fn run_cell_inner(
    config: &ScenarioConfig,
    scheme: SchemeId,
    seed: u64,
    windows: &mut Vec<WindowRecord>,
) -> Result<Vec<TwinSnapshotRow>> {
    let catalog = Arc::new(build_catalog(&config.catalog)?);
    let n_segments = catalog
        .videos
        .iter()
        .map(|v| v.n_segments())
        .max()
        .unwrap_or(1);
    let mut world_rng = substream(seed, Stream::World);
    let mut world = init_world(config, Arc::clone(&catalog), &mut world_rng);
    let mut swipe_rng = substream(seed, Stream::Swipe);
    let mut explore_rng = substream(seed, Stream::Exploration);

    let n = config.network.n_users;
    let window_s = config.window_len_s();
    let n_slots = config.slots_per_window();
    let slot_len = config.slot_len_s();
    let b_total = config.network.total_bandwidth_hz;
    let p_total = config.network.total_compute_ops;
    let probe_hz = config.network.probe_bandwidth_hz;
    let stations = world.base_stations.clone();
    let r_cost = kpi::operation_cost(config.kpi.abstraction_level, config.kpi.c_op);

    // Bootstrap each twin with one position and one channel sample taken at
    // deployment time, then start the per-attribute collection clocks.
    let mut twins: Vec<UserTwin> = (0..n).map(|u| UserTwin::new(u, &config.udt)).collect();
    let mut next_due: Vec<[f64; 2]> = vec![[0.0; 2]; n];
    for u in 0..n {
        let pos = world.users[u].position;
        twins[u].ingest(world.time_s, Observation::Position { x_m: pos.0, y_m: pos.1 })?;
        let eta = world.probe_efficiency(u);
        twins[u].ingest(world.time_s, Observation::ChannelQuality { spectral_bps_hz: eta })?;
        next_due[u] = [
            world.time_s + twins[u].periods_s[Attribute::Position.index()],
            world.time_s + twins[u].periods_s[Attribute::ChannelQuality.index()],
        ];
    }

    // Learned state persists across windows: the value table warm-starts
    // later windows, and the key-based scheme accumulates per-key traffic.
    let mut q_table = QTable::new();
    let mut traffic_history: HashMap<(usize, usize), Vec<f64>> = HashMap::new();

    for w in 0..config.time.sim_windows as usize {
        let now = world.time_s;

        // 1. Twin refresh and abstraction.
        let abstractions: Vec<_> = twins
            .iter_mut()
            .map(|t| {
                t.refresh_periods(&config.udt);
                t.abstraction(now, window_s, &config.udt, &stations, N_TYPES, n_segments)
            })
            .collect();
        let features = build_user_features(&abstractions, config.network.area_m, n_segments);
        let bs_of: Vec<usize> = abstractions.iter().map(|a| a.nearest_bs).collect();

        // 2. Grouping.
        let grouping = match scheme {
            SchemeId::Proposed => {
                let rl = RlConfig {
                    g_max_per_bs: config.sdt.g_max_per_bs,
                    episodes: if w == 0 {
                        config.sdt.rl_episodes
                    } else {
                        config.sdt.rl_episodes_warm
                    },
                    learning_rate: config.sdt.learning_rate,
                    ..RlConfig::default()
                };
                cluster_rl(
                    &features,
                    &bs_of,
                    &rl,
                    &mut q_table,
                    |g| emulate_utility(g, b_total, p_total, &abstractions, &catalog, config, 1, seed),
                    &mut explore_rng,
                )?
            }
            SchemeId::Optimization => cluster_dbscan(
                &features,
                &bs_of,
                DbscanParams {
                    eps: config.sdt.dbscan_eps,
                    min_pts: config.sdt.dbscan_min_pts,
                },
            )?,
            SchemeId::Heuristic => cluster_heuristic(&features, &bs_of)?,
        };
        let n_groups = grouping.n_groups();

        // 3. Demand forecast and reservation.
        let reference_bw = b_total / n_groups.max(1) as f64;
        let mut playlists = Vec::with_capacity(n_groups);
        let mut demands = Vec::with_capacity(n_groups);
        for info in &grouping.groups {
            let playlist =
                recommend_playlist(&info.members, &abstractions, &catalog, config.sdt.recommend_k)?;
            demands.push(aggregate_group_demand(
                info.id,
                &info.members,
                &abstractions,
                &playlist,
                &catalog,
                reference_bw,
                probe_hz,
            )?);
            playlists.push(playlist);
        }
        let reservation_demands: Vec<ReservationDemand> = demands
            .iter()
            .map(|d| demand_to_reservation(d, reference_bw, probe_hz))
            .collect();
        let history_keys: Vec<(usize, usize)> = grouping
            .groups
            .iter()
            .map(|info| history_key(info, &features))
            .collect();
        let reservation = match scheme {
            SchemeId::Proposed => {
                reserve_convex(&reservation_demands, b_total, p_total, config.sdt.headroom)?
            }
            SchemeId::Optimization => reserve_bnb(
                &reservation_demands,
                b_total,
                p_total,
                config.sdt.headroom,
                b_total / config.sdt.bnb_grid_points as f64,
            )?,
            SchemeId::Heuristic => {
                let histories: Vec<Vec<f64>> = history_keys
                    .iter()
                    .map(|k| traffic_history.get(k).cloned().unwrap_or_default())
                    .collect();
                reserve_historical(&histories, b_total, p_total)
            }
        };

        // 4. Slot-level allocation inside each reservation.
        let bandwidth =
            allocate_small_timescale(&reservation.bandwidth_hz, &demands, n_slots, slot_len, probe_hz)?;

        // 5. Play the window out on the physical network.
        for u in &mut world.users {
            u.reset_playback();
        }
        let plan = WindowPlan {
            slot_len_s: slot_len,
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
        let report = simulate_window(&mut world, &plan, &mut swipe_rng)?;

        // 6. Feed traces back into the twins. Sensed attributes are sampled
        // at each twin's adapted cadence; viewing events always arrive.
        for u in 0..n {
            let up = report.user(u).ok_or(Error::UnknownUser(u))?;
            for s in &up.samples {
                if s.t_s + 1e-9 >= next_due[u][0] {
                    twins[u].ingest(
                        s.t_s,
                        Observation::Position { x_m: s.position.0, y_m: s.position.1 },
                    )?;
                    next_due[u][0] = s.t_s + twins[u].periods_s[Attribute::Position.index()];
                }
                if s.t_s + 1e-9 >= next_due[u][1] {
                    twins[u].ingest(
                        s.t_s,
                        Observation::ChannelQuality {
                            spectral_bps_hz: s.probe_efficiency_bps_hz,
                        },
                    )?;
                    next_due[u][1] = s.t_s + twins[u].periods_s[Attribute::ChannelQuality.index()];
                }
            }
            for e in &up.swipes {
                twins[u].ingest(
                    e.t_s,
                    Observation::Swipe { type_index: e.type_index, outcome: e.outcome },
                )?;
            }
            for p in &up.preference_signals {
                twins[u].ingest(
                    p.t_s,
                    Observation::Preference { type_index: p.type_index, watch_s: p.watch_s },
                )?;
            }
        }

        // 7. Score the window. Freshness is read after ingestion, at the
        // moment the next control decision would see the twins.
        let now_end = world.time_s;
        let mut satisfaction = Vec::with_capacity(n);
        for u in 0..n {
            satisfaction.push(kpi::user_satisfaction(&report, u, &catalog, config.kpi.mu_stall)?);
        }
        let (bw_frac, compute_frac) = kpi::window_usage_fractions(&report, b_total, p_total);
        let q = kpi::system_utility(&satisfaction, bw_frac, compute_frac, config.kpi.gamma_r)?;
        let freshness = twins
            .iter()
            .map(|t| t.pool.freshness_ratio(now_end, window_s, config.udt.required_sync_hz))
            .sum::<f64>()
            / n as f64;
        let v = kpi::holistic_dt_value(
            config.kpi.alpha,
            config.kpi.beta,
            config.kpi.gamma,
            freshness,
            q,
            r_cost,
        );

        if scheme == SchemeId::Heuristic {
            for (g, key) in history_keys.iter().enumerate() {
                traffic_history
                    .entry(*key)
                    .or_default()
                    .push(report.groups[g].bits_sent);
            }
        }

        let per_user = report
            .users
            .iter()
            .map(|up| UserTraceRow {
                user: up.user,
                group: up.group,
                delivered_bits: up.delivered_bits,
                stall_s: up.stall_s,
                watch_s: up.watch_s,
                swipes: up.swipes.len(),
            })
            .collect();
        windows.push(WindowRecord {
            window: w,
            n_groups,
            satisfaction,
            bw_frac,
            compute_frac,
            freshness,
            q,
            r: r_cost,
            v,
            reserved_bandwidth_hz: reservation.bandwidth_hz.clone(),
            reserved_compute_ops: reservation.compute_ops_per_s.clone(),
            group_bits_sent: report.groups.iter().map(|g| g.bits_sent).collect(),
            group_capacity_bits: report.groups.iter().map(|g| g.capacity_bits).collect(),
            group_max_segment_bits: report.groups.iter().map(|g| g.max_segment_bits).collect(),
            per_user,
        });
    }

    let t_end = world.time_s;
    let snapshot = twins
        .iter()
        .flat_map(|t| {
            Attribute::ALL.into_iter().map(move |a| TwinSnapshotRow {
                user: t.user,
                attribute: a.name(),
                age_s: t.pool.age_s(a, t_end),
                achieved_hz: t.pool.achieved_hz(a, t_end, window_s),
                period_s: t.periods_s[a.index()],
            })
        })
        .collect();
    Ok(snapshot)
}

/// Five-number summary plus mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

/// Linear-interpolation quantile of an ascending slice: rank `(n-1)p` is
/// split between its two neighboring order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level must be in [0, 1]");
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Box statistics of a batch of metric values.
pub fn summarize(values: &[f64]) -> Result<BoxStats> {
    if values.is_empty() {
        return Err(Error::EmptyMetrics);
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("metric values must be orderable"));
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let std = if n <= 1 {
        0.0
    } else {
        (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    };
    Ok(BoxStats {
        min: v[0],
        q1: quantile_sorted(&v, 0.25),
        median: quantile_sorted(&v, 0.50),
        q3: quantile_sorted(&v, 0.75),
        max: v[n - 1],
        mean,
        std,
    })
}

/// Quotes a CSV field if it contains a delimiter, quote, or newline.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Formats a float with the shortest representation that round-trips, so
/// rendered files are bit-faithful to the computed values.
fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

const METRICS_HEADER: &str =
    "scheme,seed,window,user,satisfaction,groups,bw_frac,compute_frac,freshness,Q,R,V,error";

/// Renders the per-user metric rows. Every (window, user) pair of a
/// successful cell yields one row; a failed cell yields one row whose metric
/// fields are empty and whose `error` field carries the message.
pub fn metrics_csv(metrics: &RunMetrics) -> String {
    let mut out = String::from("# schema v1\n");
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for cell in &metrics.cells {
        for wr in &cell.windows {
            for (user, s) in wr.satisfaction.iter().enumerate() {
                let fields = [
                    cell.scheme.name().to_string(),
                    cell.seed.to_string(),
                    wr.window.to_string(),
                    user.to_string(),
                    fmt_f64(*s),
                    wr.n_groups.to_string(),
                    fmt_f64(wr.bw_frac),
                    fmt_f64(wr.compute_frac),
                    fmt_f64(wr.freshness),
                    fmt_f64(wr.q),
                    fmt_f64(wr.r),
                    fmt_f64(wr.v),
                    String::new(),
                ];
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
        if let Some(e) = &cell.error {
            let mut fields = vec![cell.scheme.name().to_string(), cell.seed.to_string()];
            fields.extend(std::iter::repeat(String::new()).take(10));
            fields.push(csv_field(e));
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

/// Renders box statistics per (scheme, metric). Metrics: `satisfaction`
/// (per user per window), `consumption` (mean of the two usage fractions,
/// per window), and `value` (per window).
pub fn summary_csv(metrics: &RunMetrics) -> Result<String> {
    let mut out = String::from("# schema v1\n");
    out.push_str("scheme,metric,min,q1,median,q3,max,mean,std\n");
    let mut seen = Vec::new();
    for cell in &metrics.cells {
        if !seen.contains(&cell.scheme) {
            seen.push(cell.scheme);
        }
    }
    for scheme in seen {
        let batches = [
            ("satisfaction", metrics.satisfaction_values(scheme)),
            ("consumption", metrics.consumption_values(scheme)),
            ("value", metrics.value_values(scheme)),
        ];
        for (name, values) in batches {
            // A scheme whose every cell failed has no rows; leave it out of
            // the summary instead of failing the whole write (the failures
            // are already recorded in metrics.csv).
            if values.is_empty() {
                continue;
            }
            let s = summarize(&values)?;
            let fields = [
                scheme.name().to_string(),
                name.to_string(),
                fmt_f64(s.min),
                fmt_f64(s.q1),
                fmt_f64(s.median),
                fmt_f64(s.q3),
                fmt_f64(s.max),
                fmt_f64(s.mean),
                fmt_f64(s.std),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    Ok(out)
}

/// Renders the optional per-user playback trace.
pub fn trace_csv(metrics: &RunMetrics) -> String {
    let mut out = String::from("# schema v1\n");
    out.push_str("scheme,seed,window,user,group,delivered_bits,stall_s,watch_s,swipes\n");
    for cell in &metrics.cells {
        for wr in &cell.windows {
            for row in &wr.per_user {
                let fields = [
                    cell.scheme.name().to_string(),
                    cell.seed.to_string(),
                    wr.window.to_string(),
                    row.user.to_string(),
                    row.group.to_string(),
                    fmt_f64(row.delivered_bits),
                    fmt_f64(row.stall_s),
                    fmt_f64(row.watch_s),
                    row.swipes.to_string(),
                ];
                out.push_str(&fields.join(","));
                out.push('\n');
            }
        }
    }
    out
}

/// Renders the optional end-of-cell twin state report.
pub fn twin_snapshot_csv(metrics: &RunMetrics) -> String {
    let mut out = String::from("# schema v1\n");
    out.push_str("scheme,seed,user,attribute,age_s,achieved_hz,period_s\n");
    for cell in &metrics.cells {
        for row in &cell.twin_snapshot {
            let fields = [
                cell.scheme.name().to_string(),
                cell.seed.to_string(),
                row.user.to_string(),
                row.attribute.to_string(),
                fmt_f64(row.age_s),
                fmt_f64(row.achieved_hz),
                fmt_f64(row.period_s),
            ];
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

/// Writes `metrics.csv` and `summary.csv` into `out_dir` (created if
/// missing); with `with_trace` also writes `trace.csv` and `twins.csv`.
pub fn write_outputs(metrics: &RunMetrics, out_dir: &Path, with_trace: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("metrics.csv"), metrics_csv(metrics))?;
    std::fs::write(out_dir.join("summary.csv"), summary_csv(metrics)?)?;
    if with_trace {
        std::fs::write(out_dir.join("trace.csv"), trace_csv(metrics))?;
        std::fs::write(out_dir.join("twins.csv"), twin_snapshot_csv(metrics))?;
    }
    Ok(())
}
