//! Scoring: per-user satisfaction, slice utility, twin operation cost, and
//! the holistic value that weighs all three.

use crate::domain::{AbstractionLevel, VideoCatalog};
use crate::error::{Error, Result};
use crate::physnet::PlaybackReport;

/// Log-shaped perceptual quality of a delivered bitrate, 0 at zero rate and
/// 1 at the catalog's top rung.
pub fn perceptual_quality(version_bps: f64, max_bps: f64) -> f64 {
    if max_bps <= 0.0 {
        return 0.0;
    }
    (1.0 + version_bps.max(0.0)).ln() / (1.0 + max_bps).ln()
}

/// Satisfaction of one user over a window: mean perceptual quality of the
/// segments they watched, minus a stall penalty, clamped to `[0, 1]`.
///
/// A user who watched nothing scores zero.
pub fn user_satisfaction(
    report: &PlaybackReport,
    user: usize,
    catalog: &VideoCatalog,
    mu_stall: f64,
) -> Result<f64> {
    let up = report.user(user).ok_or(Error::UnknownUser(user))?;
    let max_bps = catalog.max_bitrate_bps();
    let quality = if up.watched.is_empty() {
        0.0
    } else {
        up.watched
            .iter()
            .map(|&(video, _, version)| {
                perceptual_quality(catalog.videos[video].versions_bps[version], max_bps)
            })
            .sum::<f64>()
            / up.watched.len() as f64
    };
    let stall_frac = if report.window_s > 0.0 {
        up.stall_s / report.window_s
    } else {
        0.0
    };
    Ok((quality - mu_stall * stall_frac).clamp(0.0, 1.0))
}

/// Measured resource-usage fractions of one window: bandwidth-time actually
/// spent transmitting over the total pool, and compute consumed over the
/// total pool.
pub fn window_usage_fractions(
    report: &PlaybackReport,
    total_bandwidth_hz: f64,
    total_compute_ops_per_s: f64,
) -> (f64, f64) {
    let t = report.window_s.max(f64::MIN_POSITIVE);
    let busy: f64 = report.groups.iter().map(|g| g.busy_hz_s).sum();
    let ops: f64 = report.groups.iter().map(|g| g.ops_used).sum();
    (
        busy / (total_bandwidth_hz * t).max(f64::MIN_POSITIVE),
        ops / (total_compute_ops_per_s * t).max(f64::MIN_POSITIVE),
    )
}

/// Slice utility: mean satisfaction minus a penalty on the mean of the two
/// usage fractions.
pub fn system_utility(
    satisfactions: &[f64],
    bw_frac: f64,
    compute_frac: f64,
    gamma_r: f64,
) -> Result<f64> {
    if satisfactions.is_empty() {
        return Err(Error::NoUsers);
    }
    let mean = satisfactions.iter().sum::<f64>() / satisfactions.len() as f64;
    Ok(mean - gamma_r * (bw_frac + compute_frac) / 2.0)
}

/// Twin operation cost of running at an abstraction level.
pub fn operation_cost(level: AbstractionLevel, c_op: f64) -> f64 {
    c_op * level.level() as f64
}

/// The holistic value of a twin-managed window:
/// `alpha * freshness + beta * utility - gamma * cost`.
pub fn holistic_dt_value(
    alpha: f64,
    beta: f64,
    gamma: f64,
    freshness_ratio: f64,
    utility: f64,
    cost: f64,
) -> f64 {
    alpha * freshness_ratio + beta * utility - gamma * cost
}
