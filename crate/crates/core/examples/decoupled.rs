//! Additive characters in exact cyclotomic arithmetic, and the decoupled
//! pair (1, 1 + ϖ) whose twisted correlations all vanish.
//!
//! cargo run --release --example decoupled

use hecke_walk::algebra::{FieldContext, Mode, XiElem};
use hecke_walk::characters::{decouple_integral, eval_character, verify_decoupled_grid, CharacterSpec};

fn main() -> hecke_walk::Result<()> {
    let ctx = FieldContext::new(3, Mode::Carry)?;
    let spec = CharacterSpec::standard(ctx);
    for s in ["1/9", "2/27", "1"] {
        let x = XiElem::parse(ctx, s)?;
        println!("λ({s}) = {}", eval_character(&spec, &x)?);
    }

    let one = XiElem::one(ctx);
    let z2 = &one + &ctx.uniformizer();
    let y = XiElem::zero(ctx);
    println!("(1, 1+ϖ), y = 0, m = 0: {}", decouple_integral(&spec, &one, &z2, &y, 0)?.value);
    println!("control (1, 1), y = 0, m = 0: {}", decouple_integral(&spec, &one, &one, &y, 0)?.value);

    for q in [2, 3, 5] {
        for mode in [Mode::Carry, Mode::Modular] {
            let ctx = FieldContext::new(q, mode)?;
            let spec = CharacterSpec::standard(ctx);
            let one = XiElem::one(ctx);
            let z2 = &one + &ctx.uniformizer();
            let r = verify_decoupled_grid(&spec, &one, &z2, (-3, 4), 1 << 16)?;
            println!("q = {q} {mode:?}: {} integrals, all zero: {}", r.entries.len(), r.all_zero);
        }
    }
    Ok(())
}
