//! The Hecke completion θ_τ of an absorbing measure and the identities it
//! satisfies: equal z-drift, Λ-saturated support, and equal action on
//! L-invariant ball measures.
//!
//! cargo run --example completion

use hecke_walk::algebra::FieldContext;
use hecke_walk::measures::{
    act_ball, act_ball_coset, e_bs, e_lamp, spread_out_check, support_is_saturated, theta_of,
};
use hecke_walk::walk::BallMeasure;

fn main() -> hecke_walk::Result<()> {
    for t in [e_lamp(), e_bs()] {
        let ctx: FieldContext = t.ctx();
        let theta = theta_of(&t)?;
        println!("τ = {t}");
        println!("  θ̄_τ has {} cosets, Λ-invariant: {}", theta.support().len(), theta.is_lambda_invariant());
        println!("  z-drift τ = {}, θ = {}", t.z_drift(), theta.z_drift());
        println!("  support saturated: {}", support_is_saturated(&t, &theta));

        let xi = BallMeasure::haar_o(ctx, -1, 3)?;
        let by_elements = act_ball(&t, &xi)?;
        let by_cosets = act_ball_coset(&theta, &xi)?;
        println!("  τ * m_O = θ_τ * m_O at level 3: {}", by_elements == by_cosets);

        let spread = spread_out_check(&t, 4, 2, -1)?;
        println!("  cosets [2 | r] reached within 4 steps: {}/{}", spread.reached, spread.window_keys);
    }
    Ok(())
}
