//! The action of measures on Γ and on Γ/Λ on ball measures over K.

use num_traits::Zero;

use crate::algebra::{digit_tuples, GroupElem};
use crate::error::{Error, Result};
use crate::rational::{pow_rat, Rational};
use crate::walk::{BallKey, BallMeasure};

use super::sparse::{CosetMeasure, SparseMeasure};

/// Pushes one ball of `xi` through `g` and adds `mass` times the image to
/// `out`.
///
/// For `n ≥ 0` the image ball sits inside one level-M ball. For `n < 0` it is
/// a union of `q^{-n}` level-M balls that share the mass equally. Pieces with
/// valuation below `lo` go to the escape mass.
fn push_ball(out: &mut BallMeasure, g: &GroupElem, key: &BallKey, mass: &Rational) {
    let (lo, level) = (out.lo(), out.level());
    let image = g.act(&out.center(key));
    if g.n >= 0 {
        match out.key_of(&image) {
            Some(k) => out.add_mass(k, mass.clone()),
            None => out.add_escape(mass.clone()),
        }
        return;
    }
    let q = out.ctx().q();
    let image_level = level + g.n;
    let share = mass * pow_rat(&Rational::from_integer(q.into()), g.n);
    let base = image.residue_below(image_level);
    if image_level > lo {
        let Some(prefix) = base.digits(lo, image_level) else {
            out.add_escape(mass.clone());
            return;
        };
        for tail in digit_tuples(q, (-g.n) as usize) {
            out.add_mass([&prefix[..], &tail[..]].concat(), share.clone());
        }
    } else {
        // the image ball is larger than the window: only its sub-balls with
        // zero digits on [image_level, lo) stay inside
        if !base.is_zero() {
            out.add_escape(mass.clone());
            return;
        }
        let inside = digit_tuples(q, (level - lo) as usize);
        let escaped = mass - &share * Rational::from_integer(inside.len().into());
        for k in inside {
            out.add_mass(k, share.clone());
        }
        out.add_escape(escaped);
    }
}

/// `g · xi` at ball resolution; the escape mass of `xi` stays escaped.
pub fn act_ball_elem(g: &GroupElem, xi: &BallMeasure) -> Result<BallMeasure> {
    xi.ctx().check(&g.ctx())?;
    let mut out = empty_like(xi)?;
    for (k, w) in xi.masses() {
        push_ball(&mut out, g, k, w);
    }
    out.add_escape(xi.escape_mass().clone());
    Ok(out)
}

/// `τ * ξ = Σ_g τ(g) · (g ξ)` at ball resolution.
pub fn act_ball(t: &SparseMeasure, xi: &BallMeasure) -> Result<BallMeasure> {
    t.ctx().check(&xi.ctx())?;
    let mut out = empty_like(xi)?;
    for (g, tw) in t.iter() {
        for (k, w) in xi.masses() {
            push_ball(&mut out, g, k, &(tw * w));
        }
    }
    out.add_escape(xi.escape_mass() * t.total());
    Ok(out)
}

/// `θ_τ * ξ = Σ_c θ̄(c) · (β(c) ξ)`, valid for L-invariant ξ.
pub fn act_ball_coset(theta: &CosetMeasure, xi: &BallMeasure) -> Result<BallMeasure> {
    theta.ctx().check(&xi.ctx())?;
    if let Some(w) = xi.l_invariance_witness()? {
        return Err(Error::precondition(format!("ball measure is not L-invariant: {w}")));
    }
    let mut out = empty_like(xi)?;
    for (c, tw) in theta.iter() {
        let beta = c.section();
        for (k, w) in xi.masses() {
            push_ball(&mut out, &beta, k, &(tw * w));
        }
    }
    out.add_escape(xi.escape_mass() * theta.total());
    Ok(out)
}

fn empty_like(xi: &BallMeasure) -> Result<BallMeasure> {
    let out = BallMeasure::new(xi.ctx(), xi.lo(), xi.level())?;
    debug_assert!(out.escape_mass().is_zero());
    Ok(out)
}
