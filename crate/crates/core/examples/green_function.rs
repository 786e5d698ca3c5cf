//! Discrete Green's functions for the two standard anchors.

use sdfem_green::assembly::Discretization;
use sdfem_green::harness::Placement;
use sdfem_green::norms::energy_norm_sq;
use sdfem_green::solver::{SolveMethod, SystemSolver};
use sdfem_green::{ProblemSpec, StabilizationConfig};

fn main() -> sdfem_green::Result<()> {
    let problem = ProblemSpec::preset("zero-f", 1e-4, 1.0, 1.0, 1.0)?;
    let disc = Discretization::for_problem(problem, 48, StabilizationConfig::default(), true)?;
    let system = disc.assemble(4)?;
    let solver = SystemSolver::new(&system, SolveMethod::BandedLu)?;
    for placement in [Placement::CenterOmegaS, Placement::MidOmegaX] {
        let (i, j) = placement.node(&disc.mesh);
        let (g, report) = solver.green(&system, &disc.mesh, (i, j))?;
        println!(
            "{placement} ({i},{j}) in {}: G(x*) = {:.6}, max|G| = {:.6}, |||G|||^2 = {:.6}, residual {:.1e}",
            placement.region(&disc.mesh)?,
            g.values[disc.mesh.node_index(i, j)],
            g.max_abs(),
            energy_norm_sq(&disc, &g)?,
            report.residual_inf
        );
    }
    Ok(())
}
