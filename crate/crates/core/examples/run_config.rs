//! Driving the batch front end from code: build a run configuration, execute
//! it, and render the report the CLI would write.
//!
//! cargo run --example run_config

use hecke_walk::cli::{execute, render, ContextConfig, RunConfig, Subcommand};
use hecke_walk::algebra::Mode;

fn main() -> hecke_walk::Result<()> {
    let mut config = RunConfig::new(Subcommand::CheckAbsorbing);
    config.context = Some(ContextConfig { q: 2, mode: Mode::Modular });
    config.inputs.measure = Some("(0 | 1)@1/2, (1 | 1)@1/2".into());
    println!("config:\n{}", config.to_json()?);

    let outcome = execute(&config)?;
    print!("{}", render(&config, &outcome)?);
    println!("exit code: {}", outcome.status.exit_code());

    let mut subsum = RunConfig::new(Subcommand::Subsum);
    subsum.inputs.beta = Some("geometric:a=1,rho=1/2".into());
    subsum.inputs.op = Some("classify".into());
    subsum.budgets.truncation = 3;
    print!("{}", render(&subsum, &execute(&subsum)?)?);
    Ok(())
}
