//! Estimators a user twin runs over its pool: swipe-law recovery, preference
//! recovery, pooled feature importance, drift, and the adaptive collection
//! period built from the last two.

use super::UdtPool;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Additively smoothed swipe distribution per content type.
///
/// For a video of `n_segments` the outcome space is `1..=n_segments + 1`
/// (the last value meaning "watched to the end"). Each observed outcome adds
/// a count; `lambda` pseudo-counts per outcome keep unseen outcomes alive, so
/// an empty pool yields the uniform distribution.
pub fn estimate_swipe_distribution(
    pool: &UdtPool,
    n_types: usize,
    n_segments: usize,
    lambda: f64,
) -> Vec<Vec<f64>> {
    let n_out = n_segments + 1;
    let mut counts = vec![vec![0.0f64; n_out]; n_types];
    let mut totals = vec![0.0f64; n_types];
    for &(_, type_index, outcome) in &pool.swipes {
        if type_index < n_types && (1..=n_out).contains(&outcome) {
            counts[type_index][outcome - 1] += 1.0;
            totals[type_index] += 1.0;
        }
    }
    counts
        .iter()
        .zip(&totals)
        .map(|(c, &n)| {
            let denom = n + lambda * n_out as f64;
            c.iter().map(|&ci| (ci + lambda) / denom).collect()
        })
        .collect()
}

/// Watch-time share per content type; uniform when nothing was watched yet.
pub fn estimate_preference(pool: &UdtPool, n_types: usize) -> Vec<f64> {
    let mut seconds = vec![0.0f64; n_types];
    for &(_, type_index, watch_s) in &pool.preferences {
        if type_index < n_types {
            seconds[type_index] += watch_s.max(0.0);
        }
    }
    let total: f64 = seconds.iter().sum();
    if total <= 0.0 {
        vec![1.0 / n_types as f64; n_types]
    } else {
        seconds.iter().map(|s| s / total).collect()
    }
}

/// Variance-explained importance of each pooled feature column.
///
/// Columns are standardized, the correlation matrix is eigendecomposed, and
/// column `d` scores the eigenvalue-weighted share of its squared loadings:
/// `sum_k λ_k w_kd² / sum_k λ_k`. Scores of live columns sum to one;
/// zero-variance columns carry no information and score zero. Needs at least
/// two rows.
pub fn feature_importance_pca(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    if rows.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: rows.len(),
        });
    }
    let n = rows.len();
    let d = rows[0].len();
    let mut mean = vec![0.0f64; d];
    for r in rows {
        for (m, &v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let mut std = vec![0.0f64; d];
    for r in rows {
        for j in 0..d {
            std[j] += (r[j] - mean[j]).powi(2);
        }
    }
    for s in &mut std {
        *s = (*s / n as f64).sqrt();
    }
    let live: Vec<usize> = (0..d).filter(|&j| std[j] > 1e-12).collect();
    let mut importance = vec![0.0f64; d];
    if live.is_empty() {
        return Ok(importance);
    }

    let dl = live.len();
    let mut corr = DMatrix::zeros(dl, dl);
    for (a, &ja) in live.iter().enumerate() {
        for (b, &jb) in live.iter().enumerate() {
            let mut c = 0.0;
            for r in rows {
                c += (r[ja] - mean[ja]) * (r[jb] - mean[jb]);
            }
            corr[(a, b)] = c / (n as f64 * std[ja] * std[jb]);
        }
    }
    let eig = SymmetricEigen::new(corr);
    let total: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    if total <= 0.0 {
        return Ok(importance);
    }
    for (a, &ja) in live.iter().enumerate() {
        let mut s = 0.0;
        for k in 0..dl {
            s += eig.eigenvalues[k].max(0.0) * eig.eigenvectors[(a, k)].powi(2);
        }
        importance[ja] = s / total;
    }
    Ok(importance)
}

/// Standardized half-to-half mean shift per column: how much the recent half
/// of the pool disagrees with the older half, in units of the column's
/// spread. Zero for fewer than two rows or a flat column.
pub fn column_drift(rows: &[Vec<f64>]) -> Vec<f64> {
    if rows.len() < 2 {
        return rows.first().map_or(Vec::new(), |r| vec![0.0; r.len()]);
    }
    let d = rows[0].len();
    let half = rows.len() / 2;
    let (older, newer) = rows.split_at(half);
    (0..d)
        .map(|j| {
            let m_old: f64 = older.iter().map(|r| r[j]).sum::<f64>() / older.len() as f64;
            let m_new: f64 = newer.iter().map(|r| r[j]).sum::<f64>() / newer.len() as f64;
            let mean: f64 = rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64;
            let var: f64 =
                rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / rows.len() as f64;
            (m_new - m_old).abs() / (var.sqrt() + 1e-9)
        })
        .collect()
}

/// Collection period for one attribute.
///
/// Important attributes are sampled near the fast end, unimportant ones near
/// the slow end — unless they drift, which pulls the period back down:
/// `t_min + (t_max - t_min) * (1 - importance) * exp(-drift)`, clamped.
pub fn adapt_collection_period(importance: f64, drift: f64, t_min_s: f64, t_max_s: f64) -> f64 {
    let span = (t_max_s - t_min_s).max(0.0);
    let raw = t_min_s + span * (1.0 - importance.clamp(0.0, 1.0)) * (-drift.max(0.0)).exp();
    raw.clamp(t_min_s, t_max_s)
}
