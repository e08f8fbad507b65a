//! Radio link model: log-distance path loss and Shannon-capacity link rates.
//!
//! ```
//! use twinslice::physnet::{link_rate_bps, path_loss_db};
//!
//! // One kilometer of macro-cell path loss.
//! assert!((path_loss_db(1000.0) - 128.1).abs() < 1e-9);
//!
//! // 27 dBm over that loss in 10 MHz of -174 dBm/Hz noise: about 15.6 Mbps.
//! let rate = link_rate_bps(27.0, path_loss_db(1000.0), -174.0, 10.0e6);
//! assert!((rate - 15.6e6).abs() / 15.6e6 < 1e-2);
//! ```

use crate::error::{Error, Result};

/// Log-distance macro-cell path loss, dB. Distances clamp at one meter.
pub fn path_loss_db(distance_m: f64) -> f64 {
    let d_km = distance_m.max(1.0) / 1000.0;
    128.1 + 37.6 * d_km.log10()
}

/// Shannon-capacity link rate over `bandwidth_hz`, bits/s.
///
/// Noise power integrates the spectral density over the bandwidth, so
/// widening the channel also admits more noise.
pub fn link_rate_bps(
    tx_power_dbm: f64,
    path_loss_db: f64,
    noise_dbm_hz: f64,
    bandwidth_hz: f64,
) -> f64 {
    if bandwidth_hz <= 0.0 {
        return 0.0;
    }
    let noise_dbm = noise_dbm_hz + 10.0 * bandwidth_hz.log10();
    let snr_db = tx_power_dbm - path_loss_db - noise_dbm;
    bandwidth_hz * (1.0 + 10f64.powf(snr_db / 10.0)).log2()
}

/// Spectral efficiency (bits/s/Hz) at the given bandwidth; the quantity the
/// twins observe and plan with.
pub fn spectral_efficiency(
    tx_power_dbm: f64,
    path_loss_db: f64,
    noise_dbm_hz: f64,
    bandwidth_hz: f64,
) -> f64 {
    if bandwidth_hz <= 0.0 {
        return 0.0;
    }
    link_rate_bps(tx_power_dbm, path_loss_db, noise_dbm_hz, bandwidth_hz) / bandwidth_hz
}

/// Rate at `bandwidth_hz` of a link whose spectral efficiency was observed at
/// `probe_hz`. Scales the underlying SNR by the bandwidth ratio (same signal
/// power spread over more noise) before re-applying the capacity formula.
pub fn rate_from_probe(eta_probe: f64, probe_hz: f64, bandwidth_hz: f64) -> f64 {
    if bandwidth_hz <= 0.0 || probe_hz <= 0.0 || eta_probe <= 0.0 {
        return 0.0;
    }
    let snr_probe = 2f64.powf(eta_probe) - 1.0;
    let snr = snr_probe * probe_hz / bandwidth_hz;
    bandwidth_hz * (1.0 + snr).log2()
}

/// A multicast stream is pinned to its slowest member.
pub fn multicast_rate_bps(group: usize, member_rates_bps: &[f64]) -> Result<f64> {
    if member_rates_bps.is_empty() {
        return Err(Error::EmptyGroup(group));
    }
    Ok(member_rates_bps.iter().copied().fold(f64::INFINITY, f64::min))
}
