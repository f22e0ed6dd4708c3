//! Constructors producing Λ-absorbing measures.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Signed, Zero};

use crate::algebra::{digit_tuples, FieldContext, GroupElem, XiElem};
use crate::error::{Error, Result};
use crate::rational::Rational;

use super::sparse::SparseMeasure;

/// A finitely supported measure on Ξ (the translation part only).
pub type PointMeasure = BTreeMap<XiElem, Rational>;

/// The three-step construction: push τ to Γ/Λ, average over Λ-orbits, then
/// lift through the canonical section with `r` uniform on
/// `S_Λ = {λ_γ : γ ∈ supp τ}`:
///
/// `τ̃(γ) = τ̂(γΛ) · r(λ_γ)`.
///
/// The output is absorbing and its support contains `supp τ`. Orbits at level
/// `n` have `q^n` elements, so the support grows accordingly.
pub fn absorb_lift(t: &SparseMeasure) -> Result<SparseMeasure> {
    t.require_probability("absorb_lift")?;
    let ctx = t.ctx();
    let averaged = t.pushforward_coset().orbit_average();
    let mut lambdas = BTreeSet::new();
    for g in t.weights().keys() {
        lambdas.insert(g.decompose()?.1);
    }
    let share = Rational::new(1.into(), lambdas.len().into());
    let mut out = SparseMeasure::empty(ctx);
    for (key, w) in averaged.iter() {
        let beta = key.section();
        for lam in &lambdas {
            out.add_mass(beta.mul(lam), w * &share);
        }
    }
    Ok(out)
}

/// `τ̃(γ) = (1/|A_n|) Σ_{a ∈ A_n} τ(aγ)` with `A_n` the digit representatives
/// of `Ξ_o / ϖ^{max(n,0)} Ξ_o`. Valid because Ξ is abelian.
pub fn commuting_average(t: &SparseMeasure) -> Result<SparseMeasure> {
    t.require_probability("commuting_average")?;
    let ctx = t.ctx();
    let mut reps: BTreeMap<i64, Vec<XiElem>> = BTreeMap::new();
    let mut out = SparseMeasure::empty(ctx);
    for (g, w) in t.iter() {
        let width = g.n.max(0);
        let a_set = reps
            .entry(width)
            .or_insert_with(|| translation_reps(ctx, width));
        let share = w / Rational::from_integer(a_set.len().into());
        for a in a_set.iter() {
            // mass of aγ = g lands on γ = (x - a, n)
            out.add_mass(GroupElem::new(&g.x - a, g.n), share.clone());
        }
    }
    Ok(out)
}

/// Representatives `Σ_{0 ≤ j < width} d_j ϖ^j` of `Ξ_o / ϖ^width Ξ_o`.
pub fn translation_reps(ctx: FieldContext, width: i64) -> Vec<XiElem> {
    digit_tuples(ctx.q(), width.max(0) as usize)
        .into_iter()
        .map(|d| XiElem::from_digits(ctx, 0, &d))
        .collect()
}

/// The two-level drift measure
///
/// `τ(x, ϖ) = δ · (1/q) Σ_{t ∈ T} κ(x + t)` and `τ(x, ϖ^{-1}) = (1-δ)·τ₋(x)`.
///
/// The representatives of `Ξ_o / ϖ Ξ_o` are taken as `T = -S`, so `τ₁` is
/// κ translated by a uniform digit.
///
/// With `κ = τ₋ = δ_0`, `q = 2`, `δ = 3/4` this is E-BS.
pub fn affine_step_measure(
    ctx: FieldContext,
    kappa: &PointMeasure,
    t_minus: &PointMeasure,
    delta: &Rational,
) -> Result<SparseMeasure> {
    if !crate::rational::is_unit_interval_open(delta) {
        return Err(Error::precondition(format!("delta = {delta} is not in (0, 1)")));
    }
    for (name, m) in [("kappa", kappa), ("t_minus", t_minus)] {
        let total = m.values().fold(Rational::zero(), |a, w| a + w);
        if !total.is_one() || m.values().any(|w| w.is_negative()) {
            return Err(Error::precondition(format!("{name} is not a probability measure (total {total})")));
        }
        for x in m.keys() {
            ctx.check(&x.ctx())?;
        }
    }
    let q = Rational::from_integer(ctx.q().into());
    let up = delta / &q;
    let down = Rational::one() - delta;
    let mut out = SparseMeasure::empty(ctx);
    for (y, w) in kappa {
        for s in ctx.digit_set() {
            out.add_mass(GroupElem::new(y + &s, 1), w * &up);
        }
    }
    for (x, w) in t_minus {
        out.add_mass(GroupElem::new(x.clone(), -1), w * &down);
    }
    Ok(out)
}

/// E-LAMP: uniform on `{(0, ϖ), (x_o, ϖ)}` over F_2((t)).
pub fn e_lamp() -> SparseMeasure {
    let ctx = FieldContext::lamplighter(2).expect("2 is prime");
    SparseMeasure::uniform(ctx, ctx.digit_set().into_iter().map(|s| GroupElem::new(s, 1)))
        .expect("nonempty")
}

/// E-BS: `(3/4)·uniform{(0, ϖ), (1, ϖ)} + (1/4)·δ_{(0, ϖ^{-1})}` over Q_2.
pub fn e_bs() -> SparseMeasure {
    let ctx = FieldContext::baumslag_solitar(2).expect("2 is prime");
    let zero = XiElem::zero(ctx);
    let mut dirac = PointMeasure::new();
    dirac.insert(zero, Rational::one());
    affine_step_measure(ctx, &dirac, &dirac, &crate::rational::rat(3, 4)).expect("valid E-BS parameters")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn lift_of_single_lamp_step_is_e_lamp() {
        let ctx = FieldContext::lamplighter(2).unwrap();
        let t = SparseMeasure::point(GroupElem::new(XiElem::one(ctx), 1));
        assert_eq!(absorb_lift(&t).unwrap(), e_lamp());
        assert_eq!(commuting_average(&t).unwrap(), e_lamp());
    }

    #[test]
    fn lift_in_carry_mode() {
        let ctx = FieldContext::baumslag_solitar(2).unwrap();
        let g = GroupElem::parse(ctx, "(3 | 1)").unwrap();
        let lifted = absorb_lift(&SparseMeasure::point(g.clone())).unwrap();
        assert!(lifted.is_absorbing().absorbing);
        assert!(lifted.weights().contains_key(&g));
        // λ_g = (1, 0), so the lift is (1/2)δ_{(0,1)(1,0)} + (1/2)δ_{(1,1)(1,0)}
        assert_eq!(lifted.weight(&GroupElem::parse(ctx, "(2 | 1)").unwrap()), rat(1, 2));
        assert_eq!(lifted.weight(&g), rat(1, 2));
    }

    #[test]
    fn already_absorbing_is_fixed() {
        assert_eq!(absorb_lift(&e_lamp()).unwrap(), e_lamp());
        let ctx = FieldContext::baumslag_solitar(3).unwrap();
        let t = SparseMeasure::point(GroupElem::parse(ctx, "(1/3 | -2)").unwrap());
        assert_eq!(commuting_average(&t).unwrap(), t);
    }

    #[test]
    fn e_bs_from_affine_constructor() {
        let t = e_bs();
        let ctx = t.ctx();
        assert_eq!(t.len(), 3);
        assert_eq!(t.weight(&GroupElem::parse(ctx, "(1 | 1)").unwrap()), rat(3, 8));
        assert_eq!(t.weight(&GroupElem::parse(ctx, "(0 | 1)").unwrap()), rat(3, 8));
        assert_eq!(t.weight(&GroupElem::parse(ctx, "(0 | -1)").unwrap()), rat(1, 4));
        assert!(t.is_absorbing().absorbing);
        assert_eq!(t.z_drift(), rat(1, 2));
    }

    #[test]
    fn symmetric_delta_has_zero_drift() {
        let ctx = FieldContext::lamplighter(3).unwrap();
        let mut k = PointMeasure::new();
        k.insert(XiElem::parse(ctx, "-1:2").unwrap(), rat(1, 3));
        k.insert(XiElem::parse(ctx, "2:1").unwrap(), rat(2, 3));
        let t = affine_step_measure(ctx, &k, &k, &rat(1, 2)).unwrap();
        assert!(t.z_drift().is_zero());
        assert!(t.is_absorbing().absorbing);
        assert!(affine_step_measure(ctx, &k, &k, &rat(1, 1)).is_err());
    }
}
