//! Sampling the Furstenberg boundary: walk paths, the empirical stationary
//! measure of E-BS, its O-invariance, and the contraction rate of the walk.
//!
//! cargo run --release --example boundary

use hecke_walk::measures::e_bs;
use hecke_walk::walk::{
    contraction_stat, empirical_stationary, fit_geometric, invariance_stats, sample_path, stationarity_residual,
    GuardParams,
};

fn main() -> hecke_walk::Result<()> {
    let t = e_bs();
    let guard = GuardParams::default();

    let path = sample_path(&t, 12, 7)?;
    println!("exponents along a path: {:?}", path.exponents());

    let (nu, diag) = empirical_stationary(&t, 50_000, (-2, 3), 7, &guard)?;
    println!("{} samples, mean stopping time {:.1}, escape mass {:.4}", diag.samples, diag.mean_stop_time, diag.escape_mass);
    println!("stationarity residual (TV): {:.4}", stationarity_residual(&t, &nu)?.tv);
    let inv = invariance_stats(&nu)?;
    println!("O-deviation {:.4}, min ball mass in O {:.4}", inv.o_deviation, inv.min_o_mass);

    let curve = contraction_stat(&t, 24, 4, 2_000, 7, 40, &guard)?;
    let (_, ratio) = fit_geometric(&curve, 3, 24)?;
    println!("contraction ratio {ratio:.4} (E[2^-n] = 0.875)");
    Ok(())
}
