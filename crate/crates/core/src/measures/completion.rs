//! The Hecke completion τ ↦ θ_τ at coset resolution.
//!
//! H = K ⋊ ⟨ϖ⟩ and L = O ⋊ {1}. A bi-L-invariant measure on H is determined by
//! its image θ̄ on H/L ≅ Γ/Λ, each coset carrying a translate of Haar measure
//! on L. So θ_τ is represented by the coset measure θ̄_τ = α_*τ.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algebra::{CosetKey, GroupElem};
use crate::error::{Error, Result};

use super::sparse::{CosetMeasure, SparseMeasure};

/// θ̄_τ, defined on absorbing τ only.
pub fn theta_of(t: &SparseMeasure) -> Result<CosetMeasure> {
    let check = t.is_absorbing();
    if let Some(w) = check.witness {
        return Err(Error::precondition(format!("measure is not Λ-absorbing: {w}")));
    }
    Ok(t.pushforward_coset())
}

/// The union of the Λ-orbits of `keys`.
pub fn lambda_saturation<'a>(keys: impl IntoIterator<Item = &'a CosetKey>) -> BTreeSet<CosetKey> {
    let mut out = BTreeSet::new();
    let mut labels = BTreeSet::new();
    for k in keys {
        if labels.insert(k.orbit_label()) {
            out.extend(k.lambda_orbit());
        }
    }
    out
}

/// Checks `supp θ_τ = L ρ(supp τ) L` at coset resolution: the support of θ̄
/// equals the Λ-saturation of the keys of `supp τ`.
pub fn support_is_saturated(t: &SparseMeasure, theta: &CosetMeasure) -> bool {
    let keys: Vec<CosetKey> = t.weights().keys().map(GroupElem::coset_key).collect();
    lambda_saturation(&keys) == theta.support()
}

/// Result of the bounded search for spread-outness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadOutReport {
    pub radius: u32,
    pub level: i64,
    pub window_lo: i64,
    /// Keys `[level | r]` with `v(r) ≥ window_lo`.
    pub window_keys: u64,
    pub reached: u64,
    /// `true` certifies that the window is reached; `false` is inconclusive.
    pub covered: bool,
}

/// Semi-decision for spread-outness: collects the coset keys of all products
/// of at most `radius` elements of `supp τ` and checks whether they cover
/// every coset `[level | r]` with `v(r) ≥ window_lo`.
pub fn spread_out_check(t: &SparseMeasure, radius: u32, level: i64, window_lo: i64) -> Result<SpreadOutReport> {
    if window_lo > level {
        return Err(Error::precondition("spread-out window needs window_lo ≤ level"));
    }
    let ctx = t.ctx();
    let mut frontier: BTreeSet<GroupElem> = BTreeSet::new();
    frontier.insert(GroupElem::identity(ctx));
    let mut reached: BTreeSet<CosetKey> = BTreeSet::new();
    let mut seen = frontier.clone();
    for _ in 0..radius {
        let mut next = BTreeSet::new();
        for g in &frontier {
            for h in t.weights().keys() {
                let p = g.mul(h);
                if seen.insert(p.clone()) {
                    next.insert(p);
                }
            }
        }
        for g in &next {
            let k = g.coset_key();
            if k.n == level && k.r.in_ball(window_lo) {
                reached.insert(k);
            }
        }
        frontier = next;
    }
    let window_keys = (ctx.q() as u64).saturating_pow((level - window_lo) as u32);
    let reached = reached.len() as u64;
    Ok(SpreadOutReport {
        radius,
        level,
        window_lo,
        window_keys,
        reached,
        covered: reached == window_keys,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{FieldContext, XiElem};
    use crate::measures::{e_bs, e_lamp};
    use crate::rational::rat;

    #[test]
    fn theta_of_identity_is_haar_on_l() {
        let ctx = FieldContext::baumslag_solitar(2).unwrap();
        let theta = theta_of(&SparseMeasure::identity(ctx)).unwrap();
        assert_eq!(theta.weight(&CosetKey::new(0, &XiElem::zero(ctx))), rat(1, 1));
        assert_eq!(theta.support().len(), 1);
    }

    #[test]
    fn theta_of_e_lamp_and_e_bs() {
        let theta = theta_of(&e_lamp()).unwrap();
        assert_eq!(theta.support().len(), 2);
        assert!(theta.iter().all(|(k, w)| k.n == 1 && *w == rat(1, 2)));
        let t = e_bs();
        let theta = theta_of(&t).unwrap();
        assert!(support_is_saturated(&t, &theta));
        assert_eq!(t.z_drift(), theta.z_drift());
    }

    #[test]
    fn non_absorbing_is_rejected() {
        let ctx = FieldContext::lamplighter(2).unwrap();
        let t = SparseMeasure::point(GroupElem::parse(ctx, "(0:1 | 1)").unwrap());
        assert!(matches!(theta_of(&t), Err(Error::Precondition(_))));
    }

    #[test]
    fn e_lamp_reaches_level_windows() {
        let r = spread_out_check(&e_lamp(), 3, 3, 0).unwrap();
        assert!(r.covered);
        assert_eq!(r.reached, 8);
    }
}
