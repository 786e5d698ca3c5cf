//! Energy-norm errors for u = sin(pi x) sin(pi y) under mesh refinement.

use sdfem_green::assembly::Discretization;
use sdfem_green::norms::energy_error;
use sdfem_green::problem::SineProduct;
use sdfem_green::solver::solve_system;
use sdfem_green::{ProblemSpec, StabilizationConfig};

fn main() -> sdfem_green::Result<()> {
    println!("{:>4} {:>14} {:>8}", "N", "error", "rate");
    let mut prev: Option<f64> = None;
    for n in [12, 24, 48, 96] {
        let problem = ProblemSpec::preset("manufactured-sine", 1e-4, 1.0, 1.0, 1.0)?;
        let disc = Discretization::for_problem(problem, n, StabilizationConfig::default(), true)?;
        let system = disc.assemble(4)?;
        let (u, _) = solve_system(&system)?;
        let err = energy_error(&disc, &SineProduct, &u, 6)?;
        let rate = prev.map_or(String::new(), |p| format!("{:.3}", (p / err).log2()));
        println!("{n:>4} {err:>14.6e} {rate:>8}");
        prev = Some(err);
    }
    Ok(())
}
