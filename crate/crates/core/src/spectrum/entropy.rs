//! Furstenberg entropy at ball resolution, and the Shannon entropy of
//! convolution powers as an independent entropy-rate estimate.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::SparseMeasure;
use crate::rational::{format_rational, to_f64, Rational};
use crate::walk::{Ball, BallMeasure};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FurstenbergEstimate {
    pub level: i64,
    pub estimate: f64,
    /// `(ratio, weight)` pairs: the estimate is `Σ weight · (−log ratio)`.
    pub terms: Vec<(String, String)>,
    /// Mass `Σ τ(γ) ν̂(B)` over balls whose image leaves the window; these
    /// balls are left out of the estimate.
    pub truncated_mass: f64,
    /// Escape mass of ν̂, not covered by the estimate.
    pub escape_mass: f64,
    /// `|estimate − estimate one level coarser|`, when that level exists.
    pub refinement_gap: Option<f64>,
}

/// `Σ_γ τ(γ) Σ_B ν̂(B) · (−log[ν̂(γB) / ν̂(B)])` with ν̂ coarsened to `level`.
pub fn furstenberg_entropy(t: &SparseMeasure, nu_hat: &BallMeasure, level: i64) -> Result<FurstenbergEstimate> {
    t.ctx().check(&nu_hat.ctx())?;
    let nu = coarsen_to(nu_hat, level)?;
    let (estimate, terms, truncated) = entropy_at(t, &nu)?;
    let refinement_gap = if level - 1 > nu.lo() {
        let coarser = nu.coarsen()?;
        Some((entropy_at(t, &coarser)?.0 - estimate).abs())
    } else {
        None
    };
    Ok(FurstenbergEstimate {
        level,
        estimate,
        terms: terms.iter().map(|(r, w)| (format_rational(r), format_rational(w))).collect(),
        truncated_mass: to_f64(&truncated),
        escape_mass: to_f64(nu.escape_mass()),
        refinement_gap,
    })
}

fn coarsen_to(nu: &BallMeasure, level: i64) -> Result<BallMeasure> {
    if level > nu.level() || level <= nu.lo() {
        return Err(Error::precondition(format!(
            "entropy level {level} outside ({}, {}]",
            nu.lo(),
            nu.level()
        )));
    }
    let mut out = nu.clone();
    while out.level() > level {
        out = out.coarsen()?;
    }
    Ok(out)
}

type Terms = BTreeMap<Rational, Rational>;

fn entropy_at(t: &SparseMeasure, nu: &BallMeasure) -> Result<(f64, Terms, Rational)> {
    let mut terms = Terms::new();
    let mut truncated = Rational::zero();
    for (g, tw) in t.iter() {
        for (key, w) in nu.masses() {
            let image = Ball::new(g.act(&nu.center(key)), nu.level() + g.n);
            if !image.center.in_ball(nu.lo()) {
                truncated += tw * w;
                continue;
            }
            let m = nu.mass_of_ball(&image);
            if !m.is_positive() {
                return Err(Error::precondition(format!(
                    "ν̂ vanishes on the image of ball {} under {g}",
                    nu.format_key(key)
                )));
            }
            *terms.entry(m / w).or_insert_with(Rational::zero) += tw * w;
        }
    }
    let h = terms.iter().map(|(r, w)| -to_f64(w) * ln_rational(r)).sum();
    Ok((h, terms, truncated))
}

/// `ln(r)` for a positive rational, stable for huge numerators/denominators.
fn ln_rational(r: &Rational) -> f64 {
    if r.is_one() {
        return 0.0;
    }
    big_ln(r.numer()) - big_ln(r.denom())
}

fn big_ln(n: &num_bigint::BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return to_f64(&Rational::from_integer(n.clone())).ln();
    }
    let shift = bits - 64;
    let top: num_bigint::BigInt = n >> shift;
    to_f64(&Rational::from_integer(top)).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerEntropy {
    pub n: u32,
    pub entropy: f64,
    pub increment: f64,
    pub support: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerEntropyReport {
    pub steps: Vec<PowerEntropy>,
    /// Set when the element budget stopped the computation early.
    pub truncated: bool,
}

impl PowerEntropyReport {
    /// Mean of the last `k` increments.
    pub fn tail_average(&self, k: usize) -> Option<f64> {
        let k = k.min(self.steps.len());
        if k == 0 {
            return None;
        }
        Some(self.steps[self.steps.len() - k..].iter().map(|s| s.increment).sum::<f64>() / k as f64)
    }
}

/// Exact `τ^{*n}` for `n = 1..=n_max` and their Shannon entropies. Stops
/// early, with `truncated` set, once a power would exceed `max_support`
/// elements.
pub fn conv_power_entropy(t: &SparseMeasure, n_max: u32, max_support: usize) -> Result<PowerEntropyReport> {
    t.require_probability("conv_power_entropy")?;
    let mut power = SparseMeasure::identity(t.ctx());
    let mut prev = 0.0;
    let mut steps = Vec::new();
    for n in 1..=n_max {
        if power.len().saturating_mul(t.len()) > max_support {
            return Ok(PowerEntropyReport { steps, truncated: true });
        }
        power = power.convolve(t)?;
        let entropy = shannon(&power);
        steps.push(PowerEntropy { n, entropy, increment: entropy - prev, support: power.len() });
        prev = entropy;
    }
    Ok(PowerEntropyReport { steps, truncated: false })
}

/// `−Σ w log w`, grouping equal weights so that uniform measures come out
/// as exactly `log(size)`.
pub fn shannon(t: &SparseMeasure) -> f64 {
    let mut by_weight: BTreeMap<&Rational, u64> = BTreeMap::new();
    for w in t.weights().values() {
        *by_weight.entry(w).or_insert(0) += 1;
    }
    by_weight
        .iter()
        .map(|(w, c)| -to_f64(&(*w * Rational::from_integer((*c).into()))) * ln_rational(w))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{e_bs, e_lamp};
    use std::f64::consts::LN_2;

    #[test]
    fn e_lamp_entropy_is_log_2() {
        let t = e_lamp();
        for m in 1..=6 {
            let nu = BallMeasure::haar_o(t.ctx(), 0, m).unwrap();
            let h = furstenberg_entropy(&t, &nu, m).unwrap();
            assert_eq!(h.estimate, LN_2);
            assert_eq!(h.terms, vec![("1/2".to_string(), "1".to_string())]);
        }
        let nu = BallMeasure::haar_o(t.ctx(), 0, 5).unwrap();
        let h2 = furstenberg_entropy(&t.convolve(&t).unwrap(), &nu, 5).unwrap();
        assert_eq!(h2.estimate, 2.0 * LN_2);
    }

    #[test]
    fn identity_has_zero_entropy() {
        let t = e_lamp();
        let nu = BallMeasure::haar_o(t.ctx(), -1, 3).unwrap();
        assert_eq!(furstenberg_entropy(&SparseMeasure::identity(t.ctx()), &nu, 3).unwrap().estimate, 0.0);
    }

    #[test]
    fn power_entropies() {
        let r = conv_power_entropy(&e_lamp(), 12, 1 << 20).unwrap();
        for s in &r.steps {
            assert!((s.entropy - s.n as f64 * LN_2).abs() < 1e-12);
            assert_eq!(s.support, 1 << s.n);
        }
        let ctx = e_bs().ctx();
        let g = crate::algebra::GroupElem::parse(ctx, "(1 | 2)").unwrap();
        let r = conv_power_entropy(&SparseMeasure::point(g), 5, 100).unwrap();
        assert!(r.steps.iter().all(|s| s.entropy == 0.0));
        let r = conv_power_entropy(&e_bs(), 30, 100).unwrap();
        assert!(r.truncated);
    }
}
