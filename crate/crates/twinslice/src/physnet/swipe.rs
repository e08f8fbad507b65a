//! Viewer letting-go behavior: when a viewer abandons a video.
//!
//! A swipe outcome for an `S`-segment video is an integer in `1..=S+1`:
//! values `1..=S` mean the viewer quit after that many segments, and `S+1`
//! is the completion atom — they watched to the end. Ground-truth viewers
//! follow a truncated geometric with a completion atom; twin-side emulation
//! replays whatever empirical distribution the twin estimated.

use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

/// Parameters of the ground-truth swipe law for one (viewer, type) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwipeParams {
    /// Per-segment quit probability, in (0, 1].
    pub p: f64,
    /// Probability of watching to completion, in [0, 1].
    pub q: f64,
}

/// Closed-form outcome distribution over `1..=S+1` (index `s-1` holds
/// outcome `s`; the last entry is the completion atom).
pub fn swipe_pmf(params: SwipeParams, n_segments: usize) -> Vec<f64> {
    let s_max = n_segments;
    let p = params.p.clamp(1e-12, 1.0);
    let q = params.q.clamp(0.0, 1.0);
    let mut pmf = vec![0.0; s_max + 1];
    pmf[s_max] = q;
    // Geometric over 1..=S, renormalized to the non-completion mass.
    let tail = 1.0 - (1.0 - p).powi(s_max as i32);
    if tail > 0.0 {
        for s in 1..=s_max {
            pmf[s - 1] = (1.0 - q) * p * (1.0 - p).powi(s as i32 - 1) / tail;
        }
    } else {
        // p == 0 limit: uniform over the early-quit outcomes.
        for s in 1..=s_max {
            pmf[s - 1] = (1.0 - q) / s_max as f64;
        }
    }
    pmf
}

/// Draws one swipe outcome in `1..=n_segments+1` from the ground-truth law.
///
/// Consumes exactly one uniform draw, by inverse transform.
pub fn generate_swipe(params: SwipeParams, n_segments: usize, rng: &mut ChaCha12Rng) -> usize {
    let p = params.p.clamp(1e-12, 1.0);
    let q = params.q.clamp(0.0, 1.0);
    let u: f64 = rng.gen();
    if u < q {
        return n_segments + 1;
    }
    // Map the residual uniformly into the truncated geometric.
    let u = ((u - q) / (1.0 - q).max(f64::MIN_POSITIVE)).clamp(0.0, 1.0 - 1e-16);
    if p >= 1.0 {
        return 1;
    }
    let tail = 1.0 - (1.0 - p).powi(n_segments as i32);
    let s = ((1.0 - u * tail).ln() / (1.0 - p).ln()).ceil() as usize;
    s.clamp(1, n_segments)
}

/// Where a viewer's outcomes come from during playback.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SwipeSource {
    /// Ground truth: the parametric law.
    Parametric(SwipeParams),
    /// Twin emulation: an estimated pmf over `1..=S+1` (length `S+1`).
    Empirical(Vec<f64>),
}

impl SwipeSource {
    /// Draws one outcome in `1..=n_segments+1`. Consumes one uniform draw.
    pub fn sample(&self, n_segments: usize, rng: &mut ChaCha12Rng) -> usize {
        match self {
            SwipeSource::Parametric(params) => generate_swipe(*params, n_segments, rng),
            SwipeSource::Empirical(pmf) => {
                let u: f64 = rng.gen();
                let total: f64 = pmf.iter().sum();
                if total <= 0.0 {
                    return n_segments + 1;
                }
                let mut acc = 0.0;
                for (i, &m) in pmf.iter().enumerate() {
                    acc += m / total;
                    if u < acc {
                        return (i + 1).min(n_segments + 1);
                    }
                }
                n_segments + 1
            }
        }
    }
}

/// Expected number of segments actually watched under a pmf over `1..=S+1`
/// (completion watches all `S`).
pub fn expected_watched_segments(pmf: &[f64], n_segments: usize) -> f64 {
    let mut e = 0.0;
    for (i, &m) in pmf.iter().enumerate() {
        let outcome = i + 1;
        let watched = outcome.min(n_segments);
        e += m * watched as f64;
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Stream};

    const S: usize = 15;

    #[test]
    fn pmf_sums_to_one() {
        for (p, q) in [(0.3, 0.2), (0.05, 0.0), (1.0, 0.5), (0.9, 1.0)] {
            let pmf = swipe_pmf(SwipeParams { p, q }, S);
            let total: f64 = pmf.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "p={p} q={q}: {total}");
            assert_eq!(pmf.len(), S + 1);
        }
    }

    #[test]
    fn certain_completion_always_lands_on_the_atom() {
        let params = SwipeParams { p: 0.3, q: 1.0 };
        let pmf = swipe_pmf(params, S);
        assert_eq!(pmf[S], 1.0);
        let mut rng = substream(1, Stream::Swipe);
        for _ in 0..200 {
            assert_eq!(generate_swipe(params, S, &mut rng), S + 1);
        }
    }

    #[test]
    fn immediate_quitter_always_swipes_after_segment_one() {
        let params = SwipeParams { p: 1.0, q: 0.0 };
        let pmf = swipe_pmf(params, S);
        assert_eq!(pmf[0], 1.0);
        let mut rng = substream(2, Stream::Swipe);
        for _ in 0..200 {
            assert_eq!(generate_swipe(params, S, &mut rng), 1);
        }
    }

    #[test]
    fn sampling_matches_the_pmf_in_the_large_sample_limit() {
        let params = SwipeParams { p: 0.25, q: 0.2 };
        let pmf = swipe_pmf(params, S);
        let mut rng = substream(3, Stream::Swipe);
        let n = 200_000;
        let mut counts = vec![0usize; S + 1];
        for _ in 0..n {
            counts[generate_swipe(params, S, &mut rng) - 1] += 1;
        }
        let tv: f64 = counts
            .iter()
            .zip(&pmf)
            .map(|(&c, &m)| (c as f64 / n as f64 - m).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 5e-3, "total variation {tv} too large for n={n}");
    }

    #[test]
    fn empirical_source_replays_a_point_mass() {
        let mut pmf = vec![0.0; S + 1];
        pmf[4] = 1.0; // always outcome 5
        let src = SwipeSource::Empirical(pmf);
        let mut rng = substream(4, Stream::Swipe);
        for _ in 0..50 {
            assert_eq!(src.sample(S, &mut rng), 5);
        }
    }

    #[test]
    fn expected_watch_treats_completion_as_full_watch() {
        let mut pmf = vec![0.0; S + 1];
        pmf[S] = 1.0;
        assert_eq!(expected_watched_segments(&pmf, S), S as f64);
        let mut pmf = vec![0.0; S + 1];
        pmf[0] = 1.0;
        assert_eq!(expected_watched_segments(&pmf, S), 1.0);
    }

    #[test]
    fn draws_are_deterministic_per_stream() {
        let params = SwipeParams { p: 0.2, q: 0.1 };
        let run = || {
            let mut rng = substream(9, Stream::Swipe);
            (0..32)
                .map(|_| generate_swipe(params, S, &mut rng))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }
}
