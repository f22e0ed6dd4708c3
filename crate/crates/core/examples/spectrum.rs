//! A random walk whose boundary entropy spectrum is a prescribed subsum set:
//! plan the weights, then read off the entropy of a sub-boundary.
//!
//! cargo run --example spectrum

use std::collections::BTreeSet;

use hecke_walk::measures::e_bs;
use hecke_walk::rational::rat;
use hecke_walk::spectrum::{plan_spectrum, sigma_k_measure, spectrum_value, BetaSeq};

fn main() -> hecke_walk::Result<()> {
    let beta = BetaSeq::geometric(rat(1, 3), rat(1, 3))?;
    let plan = plan_spectrum(&beta, &rat(7, 10))?;
    plan.check_invariants(32).map_err(hecke_walk::Error::Invariant)?;
    println!("h(σ) = {}, N = {}, ε = {}", plan.h_sigma(), plan.big_n(), plan.eps());
    for k in 1..=4 {
        println!("k = {k}: p_k ≈ {:.4}, q_k ≈ {:.4}", to_f(&plan.p(k)), to_f(&plan.q(k)));
    }

    let subset: BTreeSet<usize> = [1, 3, 4].into_iter().collect();
    let v = spectrum_value(&plan, &subset, 8)?;
    println!("entropy of the {{1,3,4}} sub-boundary: {} (cross-check agrees: {})", v.value, v.value == v.cross_check);

    let sigma_2 = sigma_k_measure(&plan, 2, &e_bs())?;
    println!("σ_2 built from E-BS has {} atoms", sigma_2.len());
    Ok(())
}

fn to_f(r: &hecke_walk::rational::Rational) -> f64 {
    hecke_walk::rational::to_f64(r)
}
