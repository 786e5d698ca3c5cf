//! Samples the weight function and prints its measured constants.

use sdfem_green::harness::Placement;
use sdfem_green::weight::weight_property_report;
use sdfem_green::{ShishkinMesh, WeightSpec};

fn main() -> sdfem_green::Result<()> {
    let (eps, n) = (1e-4, 48);
    let mesh = ShishkinMesh::from_problem(eps, 1.0, n, true)?;
    let (i, j) = Placement::CenterOmegaS.node(&mesh);
    for k in [1.0, 4.0, 16.0] {
        let spec = WeightSpec::new((mesh.x_coords[i], mesh.y_coords[j]), eps, n, k, true)?;
        let r = weight_property_report(&spec, &mesh, 100)?;
        println!(
            "k={k:>4}: sigma=({:.4}, {:.4}) omega in [{:.4}, {:.4}], element ratio {:.4}, constants {:.3?}",
            spec.sigma_x, spec.sigma_y, r.omega_min, r.omega_max, r.max_inverse_ratio, r.derivative_constants
        );
    }
    Ok(())
}
