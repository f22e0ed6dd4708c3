//! Sampling the stationary measure ν on K.
//!
//! With `z_k = g_1 ⋯ g_k`, `g_j = (x_j, n_j)` and `M_k = n_1 + ⋯ + n_k`, the
//! boundary point is the limit of
//!
//! `z_k · 0 = x_1 + ϖ^{M_1} x_2 + ϖ^{M_2} x_3 + ⋯`,
//!
//! which converges when the drift `E[n]` is positive. A term only touches
//! positions `≥ M_{k-1} + v(x_k)`, so once the exponent path stays above
//! `M − A` (with `A` the lowest valuation among the increments) the digits on
//! `[lo, M)` are final. Whether the path comes back down is bounded by the
//! Lundberg inequality `P(dip of depth d) ≤ exp(−θ* d)`, where `θ* > 0`
//! solves `E[exp(−θ n)] = 1`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{FieldContext, XiElem};
use crate::error::{Error, Result};
use crate::measures::SparseMeasure;
use crate::rational::to_f64;

use super::ball::{BallKey, BallMeasure};
use super::rng::{derive_seed, rng_from_seed, StepSampler, WalkRng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GuardParams {
    /// Consecutive steps the path must stay above the freezing line.
    pub patience: u32,
    /// Upper bound allowed for the probability of a later dip.
    pub eps: f64,
    pub max_steps: u64,
}

impl Default for GuardParams {
    fn default() -> Self {
        GuardParams { patience: 4, eps: 1e-9, max_steps: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundaryDiagnostics {
    pub stop_time: u64,
    pub dip_bound: f64,
    /// 1 when the point left `ϖ^lo O`, else 0; averaged over samples in
    /// aggregate reports.
    pub escape_mass: f64,
    pub final_exponent: i64,
}

/// Precomputed data of a drift-positive step measure.
#[derive(Clone, Debug)]
pub struct BoundarySampler {
    sampler: StepSampler,
    min_valuation: Option<i64>,
    theta_star: f64,
}

impl BoundarySampler {
    pub fn new(t: &SparseMeasure) -> Result<Self> {
        let drift = t.z_drift();
        if drift <= num_traits::Zero::zero() {
            return Err(Error::precondition(format!(
                "boundary sampling needs positive drift Σ n τ(n), got {drift}"
            )));
        }
        let sampler = StepSampler::new(t)?;
        let min_valuation = t.weights().keys().filter_map(|g| g.x.valuation()).min();
        let law: Vec<(i64, f64)> = t.iter().map(|(g, w)| (g.n, to_f64(w))).collect();
        Ok(BoundarySampler { sampler, min_valuation, theta_star: lundberg_exponent(&law) })
    }

    /// θ* (infinite when no step decreases the exponent).
    pub fn theta_star(&self) -> f64 {
        self.theta_star
    }

    /// `P(min_{j ≥ k} M_j ≤ line | M_k = m)` bound.
    fn dip_bound(&self, m: i64, line: i64) -> f64 {
        if self.theta_star.is_infinite() {
            0.0
        } else {
            (-self.theta_star * (m - line) as f64).exp()
        }
    }

    /// Runs one walk until the digits below `top` are frozen. Returns the
    /// truncated point `Σ ϖ^{M_{k-1}} x_k` (terms at positions `≥ top`
    /// dropped).
    pub fn point(&self, top: i64, rng: &mut WalkRng, guard: &GuardParams) -> Result<(XiElem, u64, f64, i64)> {
        let ctx = self.sampler.elems()[0].ctx();
        let mut acc = XiElem::zero(ctx);
        let Some(a) = self.min_valuation else {
            return Ok((acc, 0, 0.0, 0));
        };
        let line = top - a - 1;
        let mut m = 0i64;
        let mut streak = 0u32;
        let mut k = 0u64;
        loop {
            if m > line {
                streak += 1;
                let bound = self.dip_bound(m, line);
                if streak >= guard.patience && bound < guard.eps {
                    return Ok((acc, k, bound, m));
                }
            } else {
                streak = 0;
            }
            if k >= guard.max_steps {
                return Err(Error::Budget(format!(
                    "boundary sample not frozen after {k} steps: exponent {m}, positions below {} settled, need {top}",
                    m + a
                )));
            }
            let g = self.sampler.sample(rng);
            if let Some(v) = g.x.valuation() {
                if m + v < top {
                    acc = &acc + &g.x.scale_pow(m);
                }
            }
            m += g.n;
            k += 1;
        }
    }
}

/// θ* > 0 with `Σ P(n) e^{−θ n} = 1`, by bisection; the lower end of the final
/// bracket is returned so that the dip bound stays an upper bound.
pub fn lundberg_exponent(law: &[(i64, f64)]) -> f64 {
    if law.iter().all(|(n, _)| *n >= 0) {
        return f64::INFINITY;
    }
    let f = |theta: f64| law.iter().map(|(n, p)| p * (-theta * *n as f64).exp()).sum::<f64>() - 1.0;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    // f < 0 just right of 0 because the drift is positive
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// One boundary draw at ball resolution `[lo, top)`; `None` means the point
/// has valuation below `lo`.
pub fn sample_boundary(
    t: &SparseMeasure,
    window: (i64, i64),
    seed: u64,
    guard: &GuardParams,
) -> Result<(Option<BallKey>, BoundaryDiagnostics)> {
    let sampler = BoundarySampler::new(t)?;
    sample_with(&sampler, window, seed, guard)
}

fn sample_with(
    sampler: &BoundarySampler,
    (lo, top): (i64, i64),
    seed: u64,
    guard: &GuardParams,
) -> Result<(Option<BallKey>, BoundaryDiagnostics)> {
    let mut rng = rng_from_seed(seed);
    let (x, stop_time, dip_bound, final_exponent) = sampler.point(top, &mut rng, guard)?;
    let key = x.digits(lo, top);
    let escape_mass = if key.is_none() { 1.0 } else { 0.0 };
    Ok((key, BoundaryDiagnostics { stop_time, dip_bound, escape_mass, final_exponent }))
}

/// Aggregate diagnostics of an empirical run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalDiagnostics {
    pub samples: u64,
    pub max_stop_time: u64,
    pub mean_stop_time: f64,
    pub max_dip_bound: f64,
    pub escape_mass: f64,
}

/// Histogram of `n_samples` boundary draws, draw `i` seeded with
/// `derive_seed(seed, i)`. Counts are merged as integers, so the result does
/// not depend on the number of worker threads.
pub fn empirical_stationary(
    t: &SparseMeasure,
    n_samples: u64,
    window: (i64, i64),
    seed: u64,
    guard: &GuardParams,
) -> Result<(BallMeasure, EmpiricalDiagnostics)> {
    let sampler = BoundarySampler::new(t)?;
    let ctx: FieldContext = t.ctx();
    const CHUNK: u64 = 4096;
    let chunks = n_samples.div_ceil(CHUNK);
    let partials: Vec<Result<Tally>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::default();
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let (key, d) = sample_with(&sampler, window, derive_seed(seed, i), guard)?;
                *tally.counts.entry(key).or_insert(0) += 1;
                tally.max_stop = tally.max_stop.max(d.stop_time);
                tally.sum_stop += d.stop_time as u128;
                tally.max_dip = tally.max_dip.max(d.dip_bound);
            }
            Ok(tally)
        })
        .collect();
    let mut total = Tally::default();
    for p in partials {
        total.merge(p?);
    }
    let m = BallMeasure::from_counts(ctx, window.0, window.1, &total.counts)?;
    let diag = EmpiricalDiagnostics {
        samples: n_samples,
        max_stop_time: total.max_stop,
        mean_stop_time: total.sum_stop as f64 / n_samples.max(1) as f64,
        max_dip_bound: total.max_dip,
        escape_mass: to_f64(m.escape_mass()),
    };
    Ok((m, diag))
}

#[derive(Default)]
struct Tally {
    counts: BTreeMap<Option<BallKey>, u64>,
    max_stop: u64,
    sum_stop: u128,
    max_dip: f64,
}

impl Tally {
    fn merge(&mut self, other: Tally) {
        for (k, c) in other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.max_stop = self.max_stop.max(other.max_stop);
        self.sum_stop += other.sum_stop;
        self.max_dip = self.max_dip.max(other.max_dip);
    }
}
