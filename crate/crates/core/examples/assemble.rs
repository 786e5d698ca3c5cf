//! Assembles the stabilized system and reports its size and band structure.

use sdfem_green::assembly::Discretization;
use sdfem_green::{ProblemSpec, StabilizationConfig};

fn main() -> sdfem_green::Result<()> {
    let problem = ProblemSpec::preset("constant-f", 1e-4, 1.0, 1.0, 1.0)?;
    let disc = Discretization::for_problem(problem, 48, StabilizationConfig::default(), true)?;
    let system = disc.assemble(4)?;
    let (kl, ku) = system.matrix.bandwidths();
    println!(
        "unknowns {}, nonzeros {}",
        system.dimension(),
        system.matrix.nnz()
    );
    println!("bandwidths lower {kl}, upper {ku}");
    println!(
        "||A||_inf = {:.4e}, ||F||_inf = {:.4e}",
        system.matrix.norm_inf(),
        system.load.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    );
    Ok(())
}
