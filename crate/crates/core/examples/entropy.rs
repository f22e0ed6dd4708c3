//! Two entropy estimates: the Furstenberg entropy of a stationary measure at
//! ball resolution, and increments of the Shannon entropy of τ^{*n}.
//!
//! cargo run --release --example entropy

use hecke_walk::measures::{e_bs, e_lamp};
use hecke_walk::spectrum::{conv_power_entropy, furstenberg_entropy};
use hecke_walk::walk::{empirical_stationary, BallMeasure, GuardParams};

fn main() -> hecke_walk::Result<()> {
    // E-LAMP: ν = m_O, and both estimates equal log 2
    let lamp = e_lamp();
    let haar = BallMeasure::haar_o(lamp.ctx(), 0, 6)?;
    println!("E-LAMP Furstenberg entropy: {}", furstenberg_entropy(&lamp, &haar, 6)?.estimate);
    let powers = conv_power_entropy(&lamp, 10, 1 << 16)?;
    println!("E-LAMP entropy increments: {:?}", powers.steps.iter().map(|s| s.increment).collect::<Vec<_>>());

    // E-BS: ν is only known through samples
    let bs = e_bs();
    let (nu, _) = empirical_stationary(&bs, 100_000, (-2, 3), 1, &GuardParams::default())?;
    let h = furstenberg_entropy(&bs, &nu, 3)?;
    println!("E-BS Furstenberg entropy ≈ {:.4} (truncated mass {:.4})", h.estimate, h.truncated_mass);
    let powers = conv_power_entropy(&bs, 14, 1 << 20)?;
    for s in &powers.steps {
        println!("  n = {:2}: |supp| = {:6}, H(τ^n) − H(τ^(n−1)) = {:.4}", s.n, s.support, s.increment);
    }
    Ok(())
}
