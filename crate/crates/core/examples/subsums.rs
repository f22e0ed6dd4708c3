//! Subset sums of a non-increasing series: classification, enumeration of
//! truncated sums, and membership certificates.
//!
//! cargo run --example subsums

use hecke_walk::rational::rat;
use hecke_walk::spectrum::{subsum_classify, subsum_enumerate, subsum_member, BetaSeq};

fn main() -> hecke_walk::Result<()> {
    for descriptor in ["geometric:a=1,rho=1/2", "geometric:a=1,rho=1/3", "list:1,1/2,1/3+geometric:a=1/9,rho=1/3"] {
        let beta = BetaSeq::parse(descriptor)?;
        let report = subsum_classify(&beta, 6)?;
        println!("{beta}: {:?}, B0 = {}", report.classification, report.b0);
    }

    let cantor = BetaSeq::geometric(rat(1, 1), rat(1, 3))?;
    let sums = subsum_enumerate(&cantor, 4)?;
    println!("sums of 1, 1/3, 1/9, 1/27: {:?}", sums.to_vec().iter().map(|s| s.to_string()).collect::<Vec<_>>());
    for target in [rat(4, 3), rat(3, 4), rat(1, 2)] {
        println!("{target} ∈ SubSum? {:?}", subsum_member(&cantor, &target, 20)?);
    }
    Ok(())
}
