//! Green's function energy growth with N, written as CSV and plotted.

use std::fs::File;

use sdfem_green::harness::{emit_plot, green_scaling_study, Settings};

fn main() -> sdfem_green::Result<()> {
    let settings = Settings {
        n: vec![12, 24, 48, 96],
        k: vec![16.0],
        out: std::env::temp_dir().join("sdfem-scaling"),
        ..Settings::default()
    };
    let study = green_scaling_study(&settings);
    for r in &study.rows {
        println!(
            "N={:>3} {:>8}: ratio {:.4e}, margin {:.4e}",
            r.n,
            r.region,
            r.ratio,
            r.margin()
        );
    }
    std::fs::create_dir_all(&settings.out)?;
    let csv = settings.out.join("scaling.csv");
    study.write_csv(File::create(&csv)?)?;
    let svg = settings.out.join("scaling.svg");
    emit_plot(&csv, &svg, "N", "ratio", true, true)?;
    println!("wrote {} and {}", csv.display(), svg.display());
    Ok(())
}
