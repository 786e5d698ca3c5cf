//! Assembly of the streamline-diffusion system on P1 elements.
//!
//! For constant coefficients every element contribution has a closed form:
//!
//! ```text
//! a_K(phi_j, phi_i) = eps |K| grad(phi_j).grad(phi_i)
//!                   + b d_x(phi_j) |K| / 3
//!                   + c |K| (1 + [i == j]) / 12
//!                   + delta_K b^2 d_x(phi_j) d_x(phi_i) |K|
//!                   + delta_K c b d_x(phi_i) |K| / 3
//! ```
//!
//! The stabilization drops `-eps Lap(u)` because it vanishes on linear elements.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, Region, ShishkinMesh, Triangle};
use crate::problem::ProblemSpec;
use crate::quadrature::{integrate_with, triangle_rule};
use crate::sparse::CsrMatrix;

pub const DEFAULT_C_STAR: f64 = 0.25;
pub const DEFAULT_LOAD_DEGREE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilizationConfig {
    pub c_star: f64,
}

impl Default for StabilizationConfig {
    fn default() -> Self {
        Self {
            c_star: DEFAULT_C_STAR,
        }
    }
}

impl StabilizationConfig {
    pub fn new(c_star: f64) -> Result<Self> {
        if !(c_star >= 0.0 && c_star.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "C* must be >= 0, got {c_star}"
            )));
        }
        Ok(Self { c_star })
    }
}

/// `C* / N` on the coarse-in-x regions, zero in the outflow layer.
pub fn stabilization_delta(region: Region, n: usize, config: &StabilizationConfig) -> f64 {
    if region.is_x_refined() {
        0.0
    } else {
        config.c_star / n as f64
    }
}

/// Closed-form element matrix; `m[a][b] = a_K(phi_b, phi_a)` for local vertices `a`, `b`.
pub fn element_matrix(
    geom: &ElementGeometry,
    delta: f64,
    epsilon: f64,
    b: f64,
    c: f64,
) -> [[f64; 3]; 3] {
    let area = geom.area;
    let g = &geom.grads;
    let mut m = [[0.0; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        for (bb, entry) in row.iter_mut().enumerate() {
            let diffusion = epsilon * area * (g[bb][0] * g[a][0] + g[bb][1] * g[a][1]);
            let convection = b * g[bb][0] * area / 3.0;
            let reaction = c * area * if a == bb { 1.0 / 6.0 } else { 1.0 / 12.0 };
            let stab =
                delta * b * b * g[bb][0] * g[a][0] * area + delta * c * b * g[a][0] * area / 3.0;
            *entry = diffusion + convection + reaction + stab;
        }
    }
    m
}

/// A nodal P1 function over all `(N+1)^2` mesh nodes.
///
/// Members of the discrete space vanish on the boundary; interpolants of
/// general fields may not, see [`FEFunction::vanishes_on_boundary`].
#[derive(Debug, Clone, PartialEq)]
pub struct FEFunction {
    pub n: usize,
    pub values: Vec<f64>,
}

impl FEFunction {
    pub fn zeros(mesh: &ShishkinMesh) -> Self {
        Self {
            n: mesh.n,
            values: vec![0.0; mesh.num_nodes()],
        }
    }

    pub fn from_nodal(mesh: &ShishkinMesh, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.num_nodes() {
            return Err(Error::InvalidParameter(format!(
                "expected {} nodal values, got {}",
                mesh.num_nodes(),
                values.len()
            )));
        }
        Ok(Self { n: mesh.n, values })
    }

    /// The hat function of `node`.
    pub fn hat(mesh: &ShishkinMesh, node: usize) -> Self {
        let mut f = Self::zeros(mesh);
        f.values[node] = 1.0;
        f
    }

    pub fn check_mesh(&self, mesh: &ShishkinMesh) -> Result<()> {
        if self.n != mesh.n || self.values.len() != mesh.num_nodes() {
            return Err(Error::MeshMismatch {
                expected: mesh.n,
                found: self.n,
            });
        }
        Ok(())
    }

    pub fn vanishes_on_boundary(&self, mesh: &ShishkinMesh) -> bool {
        (0..mesh.num_nodes())
            .filter(|&k| mesh.is_boundary_node(k))
            .all(|k| self.values[k] == 0.0)
    }

    pub fn local_values(&self, t: &Triangle) -> [f64; 3] {
        t.vertices.map(|v| self.values[v])
    }

    /// Constant gradient on one element.
    pub fn gradient(&self, t: &Triangle, geom: &ElementGeometry) -> [f64; 2] {
        let u = self.local_values(t);
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += u[k] * geom.grads[k][0];
            g[1] += u[k] * geom.grads[k][1];
        }
        g
    }

    pub fn eval_bary(&self, t: &Triangle, bary: [f64; 3]) -> f64 {
        let u = self.local_values(t);
        u[0] * bary[0] + u[1] * bary[1] + u[2] * bary[2]
    }

    pub fn scale(&self, alpha: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Mesh, problem and stabilization bundled together.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: ShishkinMesh,
    pub problem: ProblemSpec,
    pub config: StabilizationConfig,
}

impl Discretization {
    pub fn new(mesh: ShishkinMesh, problem: ProblemSpec, config: StabilizationConfig) -> Self {
        Self {
            mesh,
            problem,
            config,
        }
    }

    /// Builds the mesh from the problem coefficients.
    pub fn for_problem(
        problem: ProblemSpec,
        n: usize,
        config: StabilizationConfig,
        strict: bool,
    ) -> Result<Self> {
        if strict {
            problem.check_assumption(n)?;
        }
        let mesh = ShishkinMesh::from_problem(problem.epsilon, problem.beta, n, strict)?;
        Ok(Self::new(mesh, problem, config))
    }

    pub fn delta(&self, t: &Triangle) -> f64 {
        stabilization_delta(t.region, self.mesh.n, &self.config)
    }

    pub fn element_matrix(&self, t: &Triangle) -> [[f64; 3]; 3] {
        let geom = self.mesh.geometry(t);
        element_matrix(
            &geom,
            self.delta(t),
            self.problem.epsilon,
            self.problem.b,
            self.problem.c,
        )
    }

    /// `a_SD(u, v)` as a sum of element contributions.
    pub fn bilinear(&self, u: &FEFunction, v: &FEFunction) -> Result<f64> {
        u.check_mesh(&self.mesh)?;
        v.check_mesh(&self.mesh)?;
        let parts: Vec<f64> = self
            .mesh
            .triangles
            .par_iter()
            .map(|t| {
                let m = self.element_matrix(t);
                let ul = u.local_values(t);
                let vl = v.local_values(t);
                let mut s = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        s += vl[a] * m[a][b] * ul[b];
                    }
                }
                s
            })
            .collect();
        Ok(parts.iter().sum())
    }

    /// Per-element load contributions `int_K f (phi_a + delta_K b d_x phi_a)`.
    pub fn element_load(&self, t: &Triangle, degree: usize) -> Result<[f64; 3]> {
        let rule = triangle_rule(degree)?;
        let geom = self.mesh.geometry(t);
        let delta = self.delta(t);
        let b = self.problem.b;
        let mut out = [0.0; 3];
        for (a, o) in out.iter_mut().enumerate() {
            let gx = geom.grads[a][0];
            *o = integrate_with(rule, &geom, |bary, x, y| {
                self.problem.f(x, y) * (bary[a] + delta * b * gx)
            });
        }
        Ok(out)
    }

    pub fn assemble(&self, load_degree: usize) -> Result<SparseSystem> {
        triangle_rule(load_degree)?;
        let mesh = &self.mesh;
        let mut node_to_dof = vec![None; mesh.num_nodes()];
        let mut dof_to_node = Vec::new();
        for node in 0..mesh.num_nodes() {
            if !mesh.is_boundary_node(node) {
                node_to_dof[node] = Some(dof_to_node.len());
                dof_to_node.push(node);
            }
        }
        let dim = dof_to_node.len();

        let local: Vec<([[f64; 3]; 3], [f64; 3])> = mesh
            .triangles
            .par_iter()
            .map(|t| Ok((self.element_matrix(t), self.element_load(t, load_degree)?)))
            .collect::<Result<_>>()?;

        let mut triplets = Vec::with_capacity(9 * mesh.triangles.len());
        let mut load = vec![0.0; dim];
        for (t, (m, f)) in mesh.triangles.iter().zip(&local) {
            for a in 0..3 {
                let Some(row) = node_to_dof[t.vertices[a]] else {
                    continue;
                };
                load[row] += f[a];
                for b in 0..3 {
                    if let Some(col) = node_to_dof[t.vertices[b]] {
                        triplets.push((row, col, m[a][b]));
                    }
                }
            }
        }
        Ok(SparseSystem {
            n: mesh.n,
            matrix: CsrMatrix::from_triplets(dim, dim, &triplets),
            load,
            dof_to_node,
            node_to_dof,
        })
    }
}

/// `A[i][j] = a_SD(phi_j, phi_i)` over interior nodes, plus the load vector.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub n: usize,
    pub matrix: CsrMatrix,
    pub load: Vec<f64>,
    pub dof_to_node: Vec<usize>,
    pub node_to_dof: Vec<Option<usize>>,
}

impl SparseSystem {
    pub fn dimension(&self) -> usize {
        self.dof_to_node.len()
    }

    pub fn to_function(&self, dofs: &[f64]) -> FEFunction {
        let mut values = vec![0.0; self.node_to_dof.len()];
        for (&node, &v) in self.dof_to_node.iter().zip(dofs) {
            values[node] = v;
        }
        FEFunction { n: self.n, values }
    }

    pub fn dofs(&self, f: &FEFunction) -> Vec<f64> {
        self.dof_to_node
            .iter()
            .map(|&node| f.values[node])
            .collect()
    }
}

/// Free-function form of [`Discretization::assemble`].
pub fn assemble_system(
    mesh: &ShishkinMesh,
    problem: &ProblemSpec,
    config: &StabilizationConfig,
    load_degree: usize,
) -> Result<SparseSystem> {
    Discretization::new(mesh.clone(), problem.clone(), *config).assemble(load_degree)
}

/// Free-function form of [`Discretization::bilinear`].
pub fn bilinear_apply(disc: &Discretization, u: &FEFunction, v: &FEFunction) -> Result<f64> {
    disc.bilinear(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{transition_params, ShishkinMesh, DEFAULT_RHO};

    fn uniform_disc(eps: f64) -> Discretization {
        let t = transition_params(1.0, 1.0, 6, DEFAULT_RHO, false).unwrap();
        let mesh = ShishkinMesh::build(&t).unwrap();
        let problem = ProblemSpec::preset("constant-f", eps, 1.0, 1.0, 1.0).unwrap();
        Discretization::new(mesh, problem, StabilizationConfig::default())
    }

    #[test]
    fn delta_values() {
        let cfg = StabilizationConfig::new(0.25).unwrap();
        assert!(
            (stabilization_delta(Region::OmegaS, 24, &cfg) - 0.010_416_666_666_666_666).abs()
                < 1e-17
        );
        assert!(
            (stabilization_delta(Region::OmegaY, 96, &cfg) - 2.604_166_666_666_666_5e-3).abs()
                < 1e-17
        );
        assert_eq!(stabilization_delta(Region::OmegaX, 96, &cfg), 0.0);
        assert_eq!(stabilization_delta(Region::OmegaXy, 12, &cfg), 0.0);
        assert!(StabilizationConfig::new(-1.0).is_err());
    }

    #[test]
    fn reaction_and_convection_blocks() {
        let geom = ElementGeometry::from_coords([[0.1, 0.2], [0.4, 0.2], [0.1, 0.3]]);
        let reaction = element_matrix(&geom, 0.0, 0.0, 0.0, 2.0);
        let a = geom.area;
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j {
                    2.0 * a / 6.0
                } else {
                    2.0 * a / 12.0
                };
                assert!((reaction[i][j] - expected).abs() < 1e-17);
            }
        }
        let conv = element_matrix(&geom, 0.0, 0.0, 1.5, 0.0);
        for j in 0..3 {
            for i in 0..3 {
                assert!((conv[i][j] - 1.5 * geom.grads[j][0] * a / 3.0).abs() < 1e-16);
            }
        }
    }

    #[test]
    fn pure_diffusion_reaction_is_spd() {
        let mut d = uniform_disc(1e-2);
        d.problem.b = 0.0;
        d.config.c_star = 0.0;
        let sys = d.assemble(4).unwrap();
        let a = &sys.matrix;
        for r in 0..a.nrows {
            for (c, v) in a.row(r) {
                assert!((v - a.get(c, r)).abs() < 1e-15);
            }
        }
        // Cholesky-free check: x^T A x > 0 for a handful of vectors
        for s in 0..5 {
            let x: Vec<f64> = (0..a.nrows)
                .map(|k| ((k * 7 + s * 3) % 11) as f64 - 5.0)
                .collect();
            let ax = a.matvec(&x);
            assert!(x.iter().zip(&ax).map(|(p, q)| p * q).sum::<f64>() > 0.0);
        }
    }

    #[test]
    fn sparsity_pattern() {
        let d = uniform_disc(1e-2);
        let sys = d.assemble(4).unwrap();
        assert_eq!(sys.dimension(), 25);
        let a = &sys.matrix;
        for r in 0..a.nrows {
            assert!(a.row(r).count() <= 7);
            for (c, _) in a.row(r) {
                assert!(a.row(c).any(|(cc, _)| cc == r), "pattern not symmetric");
            }
        }
    }

    #[test]
    fn zero_trial_function() {
        let d = uniform_disc(1e-2);
        let node = d.mesh.node_index(3, 3);
        let v = FEFunction::hat(&d.mesh, node);
        assert_eq!(d.bilinear(&FEFunction::zeros(&d.mesh), &v).unwrap(), 0.0);
    }

    #[test]
    fn mesh_mismatch_rejected() {
        let d = uniform_disc(1e-2);
        let bad = FEFunction {
            n: 12,
            values: vec![0.0; 169],
        };
        assert!(matches!(
            d.bilinear(&bad, &bad),
            Err(Error::MeshMismatch { .. })
        ));
    }

    #[test]
    fn matrix_entries_are_bilinear_of_hats() {
        let d = uniform_disc(1e-2);
        let sys = d.assemble(4).unwrap();
        for (i, &ni) in sys.dof_to_node.iter().enumerate().step_by(4) {
            for (j, &nj) in sys.dof_to_node.iter().enumerate().step_by(3) {
                let v = d
                    .bilinear(&FEFunction::hat(&d.mesh, nj), &FEFunction::hat(&d.mesh, ni))
                    .unwrap();
                assert!((v - sys.matrix.get(i, j)).abs() < 1e-15);
            }
        }
    }
}
