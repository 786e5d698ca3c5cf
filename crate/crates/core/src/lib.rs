//! Streamline-diffusion finite elements on Shishkin triangular meshes.
//!
//! The crate solves the convection-diffusion-reaction problem
//! `-eps * Lap(u) + b u_x + c u = f` on the unit square with homogeneous
//! Dirichlet data, computes the discrete Green's function of the stabilized
//! scheme, and measures the weighted-norm quantities used to bound it.
//!
//! Module map:
//!
//! * [`problem`]: coefficients, right-hand sides and manufactured solutions.
//! * [`mesh`]: piecewise-uniform layer-adapted triangulation.
//! * [`quadrature`]: symmetric triangle rules up to degree 10.
//! * [`assembly`]: stabilized bilinear form, load vector, nodal functions.
//! * [`solver`]: banded LU and BiCGSTAB/ILU(0) for the primal and transposed systems.
//! * [`norms`]: energy norm, nodal interpolation, anisotropic interpolation diagnostics.
//! * [`weight`]: exponential weight, weighted energy norm, weight-property and lemma quantities.
//! * [`harness`]: studies, CSV output, SVG plots, config files.

pub mod assembly;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod norms;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod weight;

pub use assembly::{FEFunction, SparseSystem, StabilizationConfig};
pub use error::{Error, Result};
pub use mesh::{Region, ShishkinMesh, TransitionParams, Triangle, TriangleKind};
pub use problem::ProblemSpec;
pub use weight::WeightSpec;
