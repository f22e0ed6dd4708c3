//! Statistics of stationary measures and walks: the stationarity residual,
//! O-invariance and positivity, the contraction curve and the coupling moment.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::XiElem;
use crate::error::{Error, Result};
use crate::measures::{act_ball, SparseMeasure};
use crate::rational::{to_f64, Rational};

use super::ball::{Ball, BallMeasure};
use super::boundary::{BoundarySampler, GuardParams};
use super::path::sample_path;
use super::rng::{derive_seed, rng_from_seed};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    /// `½ Σ_B |ν̂(B) − (τ * ν̂)(B)|` over in-window balls.
    pub tv: f64,
    #[serde(skip)]
    pub tv_exact: Rational,
    /// `escape(τ * ν̂) − escape(ν̂)`.
    pub escape_delta: f64,
}

/// Distance between `nu_hat` and `t * nu_hat` at ball resolution.
pub fn stationarity_residual(t: &SparseMeasure, nu_hat: &BallMeasure) -> Result<Residual> {
    let pushed = act_ball(t, nu_hat)?;
    let tv = nu_hat.tv_distance(&pushed)?;
    Ok(Residual {
        tv: to_f64(&tv),
        tv_exact: tv,
        escape_delta: to_f64(&(pushed.escape_mass() - nu_hat.escape_mass())),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CosetStats {
    /// Digits on `[lo, 0)` naming the O-coset.
    pub coset: String,
    pub mass: f64,
    /// `(max − min) / max` over the level-M balls of the coset.
    pub deviation: f64,
    /// Pearson statistic of the counts against uniformity, when the sample
    /// size is known.
    pub chi_square: Option<f64>,
    pub dof: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub level: i64,
    pub max_deviation: f64,
    /// Deviation within O itself.
    pub o_deviation: f64,
    /// Smallest mass over the level-M balls in O.
    pub min_o_mass: f64,
    #[serde(skip)]
    pub min_o_mass_exact: Rational,
    pub o_positive: bool,
    pub cosets: Vec<CosetStats>,
}

/// O-invariance and positivity statistics. Needs `lo ≤ 0 < M`.
pub fn invariance_stats(nu_hat: &BallMeasure) -> Result<InvarianceReport> {
    let (lo, level) = (nu_hat.lo(), nu_hat.level());
    if lo > 0 || level <= 0 {
        return Err(Error::precondition(format!("invariance statistics need lo ≤ 0 < M, got [{lo}, {level})")));
    }
    let split = (-lo) as usize;
    let q = nu_hat.ctx().q();
    let per_coset = (q as u64).pow(level as u32);
    let mut groups: BTreeMap<Vec<u32>, Vec<Rational>> = BTreeMap::new();
    groups.insert(vec![0; split], Vec::new());
    for (k, w) in nu_hat.masses() {
        groups.entry(k[..split].to_vec()).or_default().push(w.clone());
    }
    let mut cosets = Vec::new();
    for (prefix, mut ws) in groups {
        ws.resize(per_coset as usize, Rational::zero());
        let max = ws.iter().max().cloned().unwrap_or_else(Rational::zero);
        let min = ws.iter().min().cloned().unwrap_or_else(Rational::zero);
        let mass = ws.iter().fold(Rational::zero(), |a, w| a + w);
        let deviation = if max.is_zero() { 0.0 } else { to_f64(&((&max - &min) / &max)) };
        let chi_square = nu_hat.samples().filter(|_| mass.is_positive()).map(|n| {
            let n = Rational::from_integer(n.into());
            let expected = &mass * &n / Rational::from_integer(per_coset.into());
            let stat = ws.iter().fold(Rational::zero(), |a, w| {
                let d = w * &n - &expected;
                a + &d * &d / &expected
            });
            to_f64(&stat)
        });
        let digits: Vec<String> = prefix.iter().map(|d| d.to_string()).collect();
        cosets.push(CosetStats {
            coset: digits.join(if q > 10 { "." } else { "" }),
            mass: to_f64(&mass),
            deviation,
            chi_square,
            dof: per_coset - 1,
        });
    }
    let o_keys = nu_hat.o_window_keys();
    let min_o = o_keys.iter().map(|k| nu_hat.mass(k)).min().unwrap_or_else(Rational::zero);
    let o_name = "0".repeat(split);
    let o_deviation = cosets.iter().find(|c| c.coset == o_name).map(|c| c.deviation).unwrap_or(0.0);
    Ok(InvarianceReport {
        level,
        max_deviation: cosets.iter().map(|c| c.deviation).fold(0.0, f64::max),
        o_deviation,
        min_o_mass: to_f64(&min_o),
        o_positive: min_o.is_positive(),
        min_o_mass_exact: min_o,
        cosets,
    })
}

/// Pearson statistic of a sampled `nu_hat` against an exact measure on the
/// same window; returns `(statistic, degrees of freedom)`.
pub fn chi_square_against(nu_hat: &BallMeasure, exact: &BallMeasure) -> Result<(f64, u64)> {
    nu_hat.check_same_window(exact)?;
    let n = nu_hat
        .samples()
        .ok_or_else(|| Error::precondition("chi-square needs a sampled measure"))?;
    let n = Rational::from_integer(n.into());
    let mut stat = Rational::zero();
    let mut cells = 0u64;
    for (k, p) in exact.masses() {
        let e = p * &n;
        let d = nu_hat.mass(k) * &n - &e;
        stat += &d * &d / e;
        cells += 1;
    }
    Ok((to_f64(&stat), cells.saturating_sub(1)))
}

/// Mean over `n_trials` of `max_{a<b} |z_j y_a − z_j y_b|` for `j = 0..=n`,
/// with `y_1..y_k` independent draws from the stationary measure and `z_j`
/// an independent walk.
///
/// Trial `i` uses `derive_seed(seed, i)`; its children `0..k` seed the draws
/// and child `k` the walk. Boundary points are truncated at position
/// `precision`.
pub fn contraction_stat(
    t: &SparseMeasure,
    n: usize,
    k: usize,
    n_trials: u64,
    seed: u64,
    precision: i64,
    guard: &GuardParams,
) -> Result<Vec<f64>> {
    contraction_curve(t, t, n, k, n_trials, seed, precision, guard)
}

/// [`contraction_stat`] with the points drawn from the stationary measure of
/// `draws` while the walk follows `t`.
#[allow(clippy::too_many_arguments)]
pub fn contraction_curve(
    t: &SparseMeasure,
    draws: &SparseMeasure,
    n: usize,
    k: usize,
    n_trials: u64,
    seed: u64,
    precision: i64,
    guard: &GuardParams,
) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::precondition("contraction statistic needs k ≥ 2"));
    }
    t.ctx().check(&draws.ctx())?;
    let sampler = BoundarySampler::new(draws)?;
    let per_trial: Vec<Result<Vec<f64>>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let trial_seed = derive_seed(seed, i);
            let ys = (0..k)
                .map(|j| {
                    let mut rng = rng_from_seed(derive_seed(trial_seed, j as u64));
                    sampler.point(precision, &mut rng, guard).map(|p| p.0)
                })
                .collect::<Result<Vec<XiElem>>>()?;
            let path = sample_path(t, n, derive_seed(trial_seed, k as u64))?;
            Ok(path
                .partials
                .iter()
                .map(|z| {
                    let images: Vec<XiElem> = ys.iter().map(|y| z.act(y)).collect();
                    let mut best = 0.0f64;
                    for a in 0..k {
                        for b in a + 1..k {
                            best = best.max((&images[a] - &images[b]).abs());
                        }
                    }
                    best
                })
                .collect())
        })
        .collect();
    let mut curve = vec![0.0; n + 1];
    for trial in per_trial {
        for (c, v) in curve.iter_mut().zip(trial?) {
            *c += v;
        }
    }
    Ok(curve.into_iter().map(|c| c / n_trials as f64).collect())
}

/// Least-squares fit of `log y_j = log c + j log ρ` over `from..=to`;
/// returns `(c, ρ)`.
pub fn fit_geometric(curve: &[f64], from: usize, to: usize) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = (from..=to.min(curve.len().saturating_sub(1)))
        .filter(|j| curve[*j] > 0.0)
        .map(|j| (j as f64, curve[j].ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::precondition("geometric fit needs two positive points"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    Ok(((my - slope * mx).exp(), slope.exp()))
}

/// Monte Carlo estimate of `E[ν̂(z_n⁻¹ A) · ν̂(z_n⁻¹ B)]`, summed exactly.
pub fn coupling_moment(
    t: &SparseMeasure,
    nu_hat: &BallMeasure,
    n: usize,
    a: &Ball,
    b: &Ball,
    n_trials: u64,
    seed: u64,
) -> Result<f64> {
    if n_trials == 0 {
        return Err(Error::precondition("coupling moment needs at least one trial"));
    }
    let terms: Vec<Result<Rational>> = (0..n_trials)
        .into_par_iter()
        .map(|i| {
            let z = sample_path(t, n, derive_seed(seed, i))?.endpoint().inverse();
            let pull = |ball: &Ball| Ball::new(z.act(&ball.center), ball.level + z.n);
            Ok(nu_hat.mass_of_ball(&pull(a)) * nu_hat.mass_of_ball(&pull(b)))
        })
        .collect();
    let mut acc = Rational::zero();
    for term in terms {
        acc += term?;
    }
    Ok(to_f64(&(acc / Rational::from_integer(n_trials.into()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FieldContext, GroupElem};
    use crate::measures::{e_bs, e_lamp};

    #[test]
    fn e_lamp_haar_is_a_fixed_point() {
        for m in 1..=8 {
            let xi = BallMeasure::haar_o(e_lamp().ctx(), 0, m).unwrap();
            assert!(stationarity_residual(&e_lamp(), &xi).unwrap().tv_exact.is_zero());
        }
    }

    #[test]
    fn moved_point_mass_has_residual_one() {
        let ctx = FieldContext::lamplighter(2).unwrap();
        let t = SparseMeasure::point(GroupElem::parse(ctx, "(0:1 | 1)").unwrap());
        let xi = BallMeasure::point(ctx, 0, 2, vec![0, 0]).unwrap();
        assert_eq!(stationarity_residual(&t, &xi).unwrap().tv, 1.0);
    }

    #[test]
    fn invariance_of_haar_and_point() {
        let ctx = FieldContext::baumslag_solitar(2).unwrap();
        let r = invariance_stats(&BallMeasure::haar_o(ctx, -1, 3).unwrap()).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert_eq!(r.min_o_mass, 1.0 / 8.0);
        let r = invariance_stats(&BallMeasure::point(ctx, -1, 3, vec![0, 1, 0, 0]).unwrap()).unwrap();
        assert_eq!(r.max_deviation, 1.0);
        assert!(!r.o_positive);
    }

    #[test]
    fn e_lamp_contracts_by_half() {
        let curve = contraction_stat(&e_lamp(), 10, 3, 50, 9, 30, &GuardParams::default()).unwrap();
        for j in 1..=10 {
            assert_eq!(curve[j], curve[0] / f64::powi(2.0, j as i32));
        }
        let (_, rho) = fit_geometric(&curve, 1, 10).unwrap();
        assert!((rho - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_does_not_contract() {
        let id = SparseMeasure::identity(e_bs().ctx());
        let curve = contraction_curve(&id, &e_bs(), 12, 4, 30, 1, 20, &GuardParams::default()).unwrap();
        assert!(curve[0] > 0.0);
        assert!(curve.iter().all(|c| *c == curve[0]));
    }

    #[test]
    fn coupling_moment_for_e_lamp() {
        let t = e_lamp();
        let ctx = t.ctx();
        let nu = BallMeasure::haar_o(ctx, 0, 4).unwrap();
        let zero_ball = Ball::new(XiElem::zero(ctx), 1);
        let one_ball = Ball::new(XiElem::one(ctx), 1);
        let m0 = coupling_moment(&t, &nu, 0, &zero_ball, &one_ball, 10, 1).unwrap();
        assert_eq!(m0, 0.25);
        let same = coupling_moment(&t, &nu, 30, &zero_ball, &zero_ball, 4000, 2).unwrap();
        assert!((same - 0.5).abs() < 4.0 * (0.25f64 / 4000.0).sqrt(), "{same}");
        let disjoint = coupling_moment(&t, &nu, 30, &zero_ball, &one_ball, 4000, 3).unwrap();
        assert_eq!(disjoint, 0.0);
    }
}
