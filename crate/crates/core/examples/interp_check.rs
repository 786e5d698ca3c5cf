//! Anisotropic interpolation error constants per subdomain.

use sdfem_green::mesh::Region;
use sdfem_green::norms::interpolation_error_report;
use sdfem_green::problem::SineProduct;
use sdfem_green::ShishkinMesh;

fn main() -> sdfem_green::Result<()> {
    for n in [12, 24, 48] {
        let mesh = ShishkinMesh::from_problem(1e-4, 1.0, n, true)?;
        let report = interpolation_error_report(&SineProduct, &mesh, 2.0, 10)?;
        for region in Region::ALL {
            if let Some([r0, r1, r2]) = report.max_ratios(region) {
                println!("N={n:>3} {region:>8}: {r0:.4} {r1:.4} {r2:.4}");
            }
        }
    }
    Ok(())
}
