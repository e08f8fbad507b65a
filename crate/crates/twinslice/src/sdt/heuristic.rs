//! Interest-bucket grouping baseline.
//!
//! Viewers are grouped by the coarsest useful key: (serving station,
//! favorite content type). Cheap and stateless, it over-fragments whenever
//! tastes are diverse, which is exactly the failure mode richer schemes are
//! measured against.

use super::{grouping_from_keys, Grouping, UserFeature};
use crate::domain::N_TYPES;
use crate::error::Result;

/// Group viewers by (serving station, strongest preference type).
///
/// Preference ties resolve to the lowest type index.
pub fn cluster_heuristic(features: &[UserFeature], bs_of: &[usize]) -> Result<Grouping> {
    let pairs: Vec<(usize, usize)> = features
        .iter()
        .zip(bs_of)
        .map(|(f, &bs)| {
            let prefs = &f.values[2..2 + N_TYPES];
            let mut top = 0usize;
            for (t, &p) in prefs.iter().enumerate() {
                if p > prefs[top] {
                    top = t;
                }
            }
            (top, bs)
        })
        .collect();
    grouping_from_keys(&pairs)
}
