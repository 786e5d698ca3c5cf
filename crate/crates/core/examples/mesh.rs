//! Builds a Shishkin mesh and prints its transition points and step sizes.

use sdfem_green::mesh::Region;
use sdfem_green::ShishkinMesh;

fn main() -> sdfem_green::Result<()> {
    let mesh = ShishkinMesh::from_problem(1e-4, 1.0, 24, true)?;
    let t = &mesh.transition;
    println!(
        "lambda_x = {:.6e}, lambda_y = {:.6e}",
        t.lambda_x, t.lambda_y
    );
    println!(
        "H_x = {:.4e}, h_x = {:.4e}",
        mesh.coarse_hx(),
        mesh.fine_hx()
    );
    println!(
        "H_y = {:.4e}, h_y = {:.4e}",
        mesh.coarse_hy(),
        mesh.fine_hy()
    );
    for region in Region::ALL {
        let count = mesh
            .triangles
            .iter()
            .filter(|tri| tri.region == region)
            .count();
        println!("{region:>8}: {count} triangles");
    }
    Ok(())
}
