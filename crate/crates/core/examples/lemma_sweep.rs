//! Weighted coercivity and interpolation defect along the k grid.

use sdfem_green::harness::{k_sweep, Placement, Settings};

fn main() -> sdfem_green::Result<()> {
    let settings = Settings::default();
    for placement in [Placement::CenterOmegaS, Placement::MidOmegaX] {
        let sweep = k_sweep(&settings, 1e-4, 48, placement)?;
        println!("{placement}: k0 = {:?}", sweep.threshold());
        for r in &sweep.rows {
            let q = &r.quantities;
            println!(
                "  k={:>4} a_w/|||G|||_w^2 = {:.4} |defect|/|||G|||_w^2 = {:.4} identity {:.1e} quad {:.1e}",
                r.k,
                q.coercivity_ratio(),
                q.defect_ratio(),
                q.duality_residual(),
                q.quadrature_rel_diff
            );
        }
    }
    Ok(())
}
