//! Waypoint mobility: each user walks their private loop at constant speed
//! and hands over to the nearest station after every step.

use super::{dist, nearest_bs, BaseStation, UserState};

/// Advances one user by `dt_s` seconds along their waypoint loop and updates
/// the serving station.
///
/// The user moves in straight lines toward the next waypoint; leftover travel
/// budget carries into the following leg, and the loop wraps around. A user
/// with fewer than two distinct waypoints (or zero speed) stays put.
pub fn step_mobility(user: &mut UserState, stations: &[BaseStation], dt_s: f64) {
    let mut budget = user.speed_mps * dt_s;
    if user.waypoints.len() >= 2 && budget > 0.0 {
        // Guard against degenerate loops where every waypoint coincides.
        let mut hops = 0usize;
        let max_hops = 4 * user.waypoints.len();
        while budget > 1e-12 && hops < max_hops {
            let target = user.waypoints[user.next_waypoint];
            let leg = dist(user.position, target);
            if leg <= budget {
                user.position = target;
                budget -= leg;
                user.next_waypoint = (user.next_waypoint + 1) % user.waypoints.len();
                hops += 1;
            } else {
                let f = budget / leg;
                user.position = (
                    user.position.0 + (target.0 - user.position.0) * f,
                    user.position.1 + (target.1 - user.position.1) * f,
                );
                budget = 0.0;
            }
        }
    }
    user.serving_bs = nearest_bs(user.position, stations);
}
