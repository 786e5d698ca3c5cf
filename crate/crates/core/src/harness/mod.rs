//! End-to-end studies, CSV output and plotting.

pub mod commands;
mod config;
pub mod plot;
pub mod studies;

use std::fmt;
use std::str::FromStr;

pub use config::Settings;
pub use plot::emit_plot;
pub use studies::{
    coercivity_check, green_scaling_study, k_sweep, CoercivityReport, KSweep, ScalingRow,
    ScalingStudy, SweepRow,
};

use crate::error::{Error, Result};
use crate::mesh::{Region, ShishkinMesh};

/// Float formatting used in every CSV file: 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Where the Green's function is anchored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Interior node nearest `(1/2, 1/2)`.
    CenterOmegaS,
    /// Interior node nearest `(1 - lambda_x / 2, 1/2)`.
    MidOmegaX,
    Explicit(usize, usize),
}

impl Placement {
    pub fn node(&self, mesh: &ShishkinMesh) -> (usize, usize) {
        match *self {
            Placement::CenterOmegaS => mesh.nearest_interior_node(0.5, 0.5),
            Placement::MidOmegaX => {
                mesh.nearest_interior_node(1.0 - 0.5 * mesh.transition.lambda_x, 0.5)
            }
            Placement::Explicit(i, j) => (i, j),
        }
    }

    /// Region of the anchor node (shared boundaries go to the refined side).
    pub fn region(&self, mesh: &ShishkinMesh) -> Result<Region> {
        let (i, j) = self.node(mesh);
        if i == 0 || j == 0 || i >= mesh.n || j >= mesh.n {
            return Err(Error::NotInteriorNode(i, j));
        }
        crate::mesh::classify_point(&mesh.transition, mesh.x_coords[i], mesh.y_coords[j])
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Placement::CenterOmegaS => f.write_str("center-s"),
            Placement::MidOmegaX => f.write_str("mid-x"),
            Placement::Explicit(i, j) => write!(f, "{i}:{j}"),
        }
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "center-s" | "center-omega-s" | "center-Ωs" | "center" => Ok(Placement::CenterOmegaS),
            "mid-x" | "mid-omega-x" | "mid-Ωx" => Ok(Placement::MidOmegaX),
            other => {
                let (i, j) = other.split_once(':').ok_or_else(|| {
                    Error::InvalidParameter(format!("unknown placement `{other}`"))
                })?;
                let parse = |v: &str| {
                    v.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidParameter(format!("bad node index `{v}`")))
                };
                Ok(Placement::Explicit(parse(i)?, parse(j)?))
            }
        }
    }
}
