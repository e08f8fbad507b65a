//! Slice resource reservation: a member-weighted log-utility water-filler,
//! a grid-restricted branch-and-bound variant, and a history-proportional
//! baseline.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// What one group asks the slice for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservationDemand {
    pub group: usize,
    /// Bandwidth that would carry the group's expected traffic, Hz.
    pub bandwidth_hz: f64,
    /// Compute rate that would transcode it, ops/s.
    pub compute_ops_per_s: f64,
    /// Members served — the weight of this group in the objective.
    pub weight: f64,
}

/// Reserved resources, aligned with the demand slice that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceReservation {
    pub bandwidth_hz: Vec<f64>,
    pub compute_ops_per_s: Vec<f64>,
}

/// The reservation objective: `sum_g w_g * ln(1 + b_g / d_g)`.
///
/// Zero-demand groups contribute nothing (they are never allocated).
pub fn reservation_objective(weights: &[f64], demands: &[f64], alloc: &[f64]) -> f64 {
    weights
        .iter()
        .zip(demands)
        .zip(alloc)
        .map(|((&w, &d), &b)| {
            if d > 0.0 && w > 0.0 {
                w * (1.0 + b / d).ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Water-filling maximizer of [`reservation_objective`] under a budget and
/// per-group caps of `headroom` times demand.
///
/// The stationarity condition gives `b_g = clamp(w_g/nu - d_g, 0, cap_g)`
/// for a water level `nu` found by bisection until the budget matches to a
/// relative `1e-6`. If every cap fits in the budget the allocation saturates
/// demand (`b_g = cap_g`) without search.
pub fn water_fill(weights: &[f64], demands: &[f64], budget: f64, headroom: f64) -> Vec<f64> {
    let n = demands.len();
    let caps: Vec<f64> = demands.iter().map(|&d| (headroom * d).max(0.0)).collect();
    if budget <= 0.0 || n == 0 {
        return vec![0.0; n];
    }
    let cap_total: f64 = caps.iter().sum();
    if cap_total <= budget {
        return caps;
    }
    let fill = |nu: f64| -> Vec<f64> {
        weights
            .iter()
            .zip(demands)
            .zip(&caps)
            .map(|((&w, &d), &cap)| {
                if d <= 0.0 || w <= 0.0 {
                    0.0
                } else {
                    (w / nu - d).clamp(0.0, cap)
                }
            })
            .collect()
    };
    // Σb(nu) falls from Σcaps (nu→0) to 0 (nu ≥ max w/d); bracket so that
    // `lo` overshoots and `hi` undershoots, then bisect. The result is
    // always taken from the under side, so the budget is never exceeded.
    let mut hi = weights
        .iter()
        .zip(demands)
        .filter(|&(_, &d)| d > 0.0)
        .map(|(&w, &d)| w / d)
        .fold(0.0f64, f64::max)
        .max(1e-300);
    let mut lo = hi;
    while fill(lo).iter().sum::<f64>() < budget {
        lo /= 2.0;
        if lo < 1e-300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let total: f64 = fill(mid).iter().sum();
        if total > budget {
            lo = mid;
        } else {
            hi = mid;
            if budget - total <= 1e-6 * budget {
                break;
            }
        }
    }
    fill(hi)
}

/// Optimal slice reservation: water-fills the bandwidth pool against
/// bandwidth demands and the compute pool against compute demands, both
/// weighted by member counts.
pub fn reserve_convex(
    demands: &[ReservationDemand],
    total_bandwidth_hz: f64,
    total_compute_ops_per_s: f64,
    headroom: f64,
) -> Result<SliceReservation> {
    if demands.is_empty() {
        return Err(Error::EmptyDemands);
    }
    let w: Vec<f64> = demands.iter().map(|d| d.weight).collect();
    let d_bw: Vec<f64> = demands.iter().map(|d| d.bandwidth_hz).collect();
    let d_ops: Vec<f64> = demands.iter().map(|d| d.compute_ops_per_s).collect();
    Ok(SliceReservation {
        bandwidth_hz: water_fill(&w, &d_bw, total_bandwidth_hz, headroom),
        compute_ops_per_s: water_fill(&w, &d_ops, total_compute_ops_per_s, headroom),
    })
}

/// A search node ordered by bound (then by age for determinism).
struct Node {
    bound: f64,
    id: u64,
    level: usize,
    used: f64,
    partial_objective: f64,
    alloc: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .partial_cmp(&other.bound)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.id.cmp(&self.id))
    }
}

/// Best-bound-first branch-and-bound over allocations restricted to
/// multiples of `step`, bounded by the continuous water-filling relaxation
/// of the not-yet-fixed groups.
/// Upper limit on branch-and-bound node expansions. Within the limit the
/// search is exact; past it, the best allocation found so far is returned
/// (never worse than the grid-rounded continuous solution it starts from).
const BNB_NODE_BUDGET: usize = 50_000;

/// Upper limit on the open-node frontier, bounding memory the same way the
/// node budget bounds time.
const BNB_HEAP_CAP: usize = 500_000;

fn bnb_grid(weights: &[f64], demands: &[f64], budget: f64, headroom: f64, step: f64) -> Vec<f64> {
    let n = demands.len();
    if budget <= 0.0 || step <= 0.0 {
        return vec![0.0; n];
    }
    // Branch on large demands first; the relaxation then tightens quickest.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        demands[b]
            .partial_cmp(&demands[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });

    let relax = |level: usize, remaining: f64| -> f64 {
        let rest: Vec<usize> = order[level..].to_vec();
        let w: Vec<f64> = rest.iter().map(|&i| weights[i]).collect();
        let d: Vec<f64> = rest.iter().map(|&i| demands[i]).collect();
        let b = water_fill(&w, &d, remaining, headroom);
        reservation_objective(&w, &d, &b)
    };

    // Seed the incumbent with the continuous optimum rounded down to the
    // grid: a feasible point that prunes most of the tree up front.
    let mut best_alloc: Vec<f64> = water_fill(weights, demands, budget, headroom)
        .iter()
        .map(|b| (b / step).floor() * step)
        .collect();
    let mut best_objective = reservation_objective(weights, demands, &best_alloc);

    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;
    heap.push(Node {
        bound: relax(0, budget) * (1.0 + 1e-9) + 1e-12,
        id: 0,
        level: 0,
        used: 0.0,
        partial_objective: 0.0,
        alloc: vec![0.0; n],
    });
    let mut expanded = 0usize;
    while let Some(node) = heap.pop() {
        expanded += 1;
        if expanded > BNB_NODE_BUDGET || heap.len() > BNB_HEAP_CAP {
            break; // out of budget: the incumbent is the answer
        }
        if node.bound <= best_objective {
            break; // best-first: nothing left can beat the incumbent
        }
        if node.level == n {
            if node.partial_objective > best_objective {
                best_objective = node.partial_objective;
                best_alloc = node.alloc;
            }
            continue;
        }
        let g = order[node.level];
        let cap = (headroom * demands[g]).max(0.0);
        let remaining = budget - node.used;
        let max_steps = ((cap.min(remaining) / step) + 1e-9).floor() as usize;
        for k in 0..=max_steps {
            let b = k as f64 * step;
            let gain = if demands[g] > 0.0 && weights[g] > 0.0 {
                weights[g] * (1.0 + b / demands[g]).ln()
            } else {
                0.0
            };
            let objective = node.partial_objective + gain;
            let bound =
                objective + relax(node.level + 1, remaining - b) * (1.0 + 1e-9) + 1e-12;
            if bound <= best_objective {
                continue;
            }
            let mut alloc = node.alloc.clone();
            alloc[g] = b;
            next_id += 1;
            heap.push(Node {
                bound,
                id: next_id,
                level: node.level + 1,
                used: node.used + b,
                partial_objective: objective,
                alloc,
            });
        }
    }
    best_alloc
}

/// Grid-restricted reservation by branch-and-bound.
///
/// Bandwidth is searched in multiples of `delta_hz`; the compute pool reuses
/// the same grid resolution scaled to its own size. A grid finer than 10 000
/// points per group is refused.
pub fn reserve_bnb(
    demands: &[ReservationDemand],
    total_bandwidth_hz: f64,
    total_compute_ops_per_s: f64,
    headroom: f64,
    delta_hz: f64,
) -> Result<SliceReservation> {
    if demands.is_empty() {
        return Err(Error::EmptyDemands);
    }
    const MAX_POINTS: usize = 10_000;
    if delta_hz <= 0.0 {
        return Err(Error::OutOfRange {
            field: "delta_hz".into(),
            detail: "grid step must be positive".into(),
        });
    }
    let points = (total_bandwidth_hz / delta_hz).ceil() as usize;
    if total_bandwidth_hz / delta_hz > MAX_POINTS as f64 * (1.0 + 1e-12) {
        return Err(Error::GridTooFine {
            points,
            max: MAX_POINTS,
        });
    }
    let w: Vec<f64> = demands.iter().map(|d| d.weight).collect();
    let d_bw: Vec<f64> = demands.iter().map(|d| d.bandwidth_hz).collect();
    let d_ops: Vec<f64> = demands.iter().map(|d| d.compute_ops_per_s).collect();
    let delta_ops = if total_bandwidth_hz > 0.0 {
        delta_hz * total_compute_ops_per_s / total_bandwidth_hz
    } else {
        delta_hz
    };
    Ok(SliceReservation {
        bandwidth_hz: bnb_grid(&w, &d_bw, total_bandwidth_hz, headroom, delta_hz),
        compute_ops_per_s: bnb_grid(&w, &d_ops, total_compute_ops_per_s, headroom, delta_ops),
    })
}

/// History-proportional baseline: each group's share follows its mean past
/// traffic. Groups without history get the cohort's mean (uniform when
/// nobody has history yet); both pools split by the same shares.
pub fn reserve_historical(
    histories: &[Vec<f64>],
    total_bandwidth_hz: f64,
    total_compute_ops_per_s: f64,
) -> SliceReservation {
    let n = histories.len();
    if n == 0 {
        return SliceReservation {
            bandwidth_hz: vec![],
            compute_ops_per_s: vec![],
        };
    }
    let observed: Vec<Option<f64>> = histories
        .iter()
        .map(|h| {
            if h.is_empty() {
                None
            } else {
                Some(h.iter().sum::<f64>() / h.len() as f64)
            }
        })
        .collect();
    let known: Vec<f64> = observed.iter().flatten().copied().collect();
    let neutral = if known.is_empty() {
        1.0
    } else {
        (known.iter().sum::<f64>() / known.len() as f64).max(f64::MIN_POSITIVE)
    };
    let means: Vec<f64> = observed
        .iter()
        .map(|m| m.unwrap_or(neutral).max(0.0))
        .collect();
    let total: f64 = means.iter().sum();
    let shares: Vec<f64> = if total <= 0.0 {
        vec![1.0 / n as f64; n]
    } else {
        means.iter().map(|m| m / total).collect()
    };
    SliceReservation {
        bandwidth_hz: shares.iter().map(|s| s * total_bandwidth_hz).collect(),
        compute_ops_per_s: shares
            .iter()
            .map(|s| s * total_compute_ops_per_s)
            .collect(),
    }
}
