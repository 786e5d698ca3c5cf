//! Empirical coercivity constant for several stabilization strengths.

use sdfem_green::harness::{coercivity_check, Settings};

fn main() -> sdfem_green::Result<()> {
    for cstar in [0.0, 0.25, 1.0, 4.0] {
        let settings = Settings {
            epsilon: vec![1e-4, 1e-6],
            n: vec![12, 24],
            cstar,
            ..Settings::default()
        };
        let report = coercivity_check(&settings)?;
        println!(
            "C* = {cstar:>4}: min a(v,v)/|||v|||^2 = {:.6}",
            report.min_ratio()
        );
    }
    Ok(())
}
