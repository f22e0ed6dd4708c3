//! Build Λ-absorbing measures three ways and check them exactly.
//!
//! cargo run --example absorbing

use hecke_walk::algebra::{FieldContext, GroupElem, XiElem};
use hecke_walk::measures::{absorb_lift, affine_step_measure, commuting_average, e_bs, PointMeasure, SparseMeasure};
use hecke_walk::rational::rat;

fn main() -> hecke_walk::Result<()> {
    let ctx = FieldContext::baumslag_solitar(2)?;

    // a single step (1 | 1) is not absorbing: its coset orbit is hit unevenly
    let step = SparseMeasure::point(GroupElem::parse(ctx, "(1 | 1)")?);
    let check = step.is_absorbing();
    println!("δ(1|1) absorbing: {} (witness {:?})", check.absorbing, check.witness);

    for (name, m) in [("absorb_lift", absorb_lift(&step)?), ("commuting_average", commuting_average(&step)?)] {
        println!("{name}: {m}");
        println!("  absorbing: {}, z-drift {}", m.is_absorbing().absorbing, m.z_drift());
    }

    // the affine step with κ = τ₋ = δ_0 and δ = 3/4 is exactly E-BS
    let mut delta0 = PointMeasure::new();
    delta0.insert(XiElem::zero(ctx), rat(1, 1));
    let affine = affine_step_measure(ctx, &delta0, &delta0, &rat(3, 4))?;
    println!("affine step = E-BS: {}", affine == e_bs());

    // absorbing measures form a monoid under convolution
    let two = affine.convolve(&absorb_lift(&step)?)?;
    println!("product of absorbing measures absorbing: {}", two.is_absorbing().absorbing);
    Ok(())
}
