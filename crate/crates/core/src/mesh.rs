//! Piecewise-uniform Shishkin triangulation of the unit square.
//!
//! The x-direction has `N/2` coarse intervals on `[0, 1 - lambda_x]` and `N/2`
//! fine ones on `[1 - lambda_x, 1]`. The y-direction has fine bands of `N/3`
//! intervals on `[0, lambda_y]` and `[1 - lambda_y, 1]` around a coarse middle
//! band. Each rectangle is cut by its anti-diagonal into a lower-left `K1` and
//! an upper-right `K2`.

use std::fmt;

use crate::error::{Error, Result};

pub const DEFAULT_RHO: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionParams {
    pub n: usize,
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub rho: f64,
    pub capped_x: bool,
    pub capped_y: bool,
}

/// `lambda_x = min(1/2, rho eps/beta ln N)`, `lambda_y = min(1/3, rho sqrt(eps) ln N)`.
///
/// In strict mode either cap saturating is an error, as is `eps > 1/N`.
pub fn transition_params(
    epsilon: f64,
    beta: f64,
    n: usize,
    rho: f64,
    strict: bool,
) -> Result<TransitionParams> {
    check_mesh_size(n)?;
    if !(epsilon > 0.0 && beta > 0.0 && rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need eps, beta, rho > 0; got eps={epsilon}, beta={beta}, rho={rho}"
        )));
    }
    let ln_n = (n as f64).ln();
    let raw_x = rho * (epsilon / beta) * ln_n;
    let raw_y = rho * epsilon.sqrt() * ln_n;
    let capped_x = raw_x >= 0.5;
    let capped_y = raw_y >= 1.0 / 3.0;
    if strict {
        if epsilon > 1.0 / n as f64 {
            return Err(Error::AssumptionViolated { epsilon, n });
        }
        if capped_x {
            return Err(Error::CappedTransition("lambda_x"));
        }
        if capped_y {
            return Err(Error::CappedTransition("lambda_y"));
        }
    }
    Ok(TransitionParams {
        n,
        lambda_x: raw_x.min(0.5),
        lambda_y: raw_y.min(1.0 / 3.0),
        rho,
        capped_x,
        capped_y,
    })
}

fn check_mesh_size(n: usize) -> Result<()> {
    if n == 0 || !n.is_multiple_of(6) {
        return Err(Error::InvalidMeshSize(n));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `[0, 1-lx] x [ly, 1-ly]`, coarse in both directions.
    OmegaS,
    /// `[1-lx, 1] x [ly, 1-ly]`, exponential outflow layer.
    OmegaX,
    /// `[0, 1-lx] x ([0, ly] u [1-ly, 1])`, characteristic layers.
    OmegaY,
    /// Corner pieces where both refinements meet.
    OmegaXy,
}

impl Region {
    pub const ALL: [Region; 4] = [
        Region::OmegaS,
        Region::OmegaX,
        Region::OmegaY,
        Region::OmegaXy,
    ];

    fn from_flags(x_fine: bool, y_fine: bool) -> Self {
        match (x_fine, y_fine) {
            (false, false) => Region::OmegaS,
            (true, false) => Region::OmegaX,
            (false, true) => Region::OmegaY,
            (true, true) => Region::OmegaXy,
        }
    }

    pub fn is_x_refined(self) -> bool {
        matches!(self, Region::OmegaX | Region::OmegaXy)
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::OmegaS => "OmegaS",
            Region::OmegaX => "OmegaX",
            Region::OmegaY => "OmegaY",
            Region::OmegaXy => "OmegaXY",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Subdomain of a point. Shared boundary lines go to the refined side.
pub fn classify_point(transition: &TransitionParams, x: f64, y: f64) -> Result<Region> {
    if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
        return Err(Error::PointOutsideDomain(x, y));
    }
    let x_fine = x >= 1.0 - transition.lambda_x;
    let y_fine = y <= transition.lambda_y || y >= 1.0 - transition.lambda_y;
    Ok(Region::from_flags(x_fine, y_fine))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleKind {
    /// Vertices `(x_i, y_j), (x_{i+1}, y_j), (x_i, y_{j+1})`.
    K1,
    /// Vertices `(x_i, y_{j+1}), (x_{i+1}, y_j), (x_{i+1}, y_{j+1})`.
    K2,
}

impl TriangleKind {
    pub fn name(self) -> &'static str {
        match self {
            TriangleKind::K1 => "K1",
            TriangleKind::K2 => "K2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triangle {
    pub kind: TriangleKind,
    pub cell: (usize, usize),
    pub vertices: [usize; 3],
    pub region: Region,
}

/// Geometry of one element: vertex coordinates, area and the constant
/// gradients of the three barycentric (hat) functions.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub coords: [[f64; 2]; 3],
    pub area: f64,
    pub grads: [[f64; 2]; 3],
    pub hx: f64,
    pub hy: f64,
}

impl ElementGeometry {
    pub fn from_coords(coords: [[f64; 2]; 3]) -> Self {
        let [p0, p1, p2] = coords;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let area = 0.5 * det.abs();
        // grad(lambda_k) = rot90(p_{k+2} - p_{k+1}) / det
        let mut grads = [[0.0; 2]; 3];
        for (k, g) in grads.iter_mut().enumerate() {
            let a = coords[(k + 1) % 3];
            let b = coords[(k + 2) % 3];
            *g = [(a[1] - b[1]) / det, (b[0] - a[0]) / det];
        }
        let xs = coords.map(|p| p[0]);
        let ys = coords.map(|p| p[1]);
        let span = |v: [f64; 3]| {
            v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
        };
        Self {
            coords,
            area,
            grads,
            hx: span(xs),
            hy: span(ys),
        }
    }

    /// Physical point for barycentric coordinates `bary`.
    pub fn point(&self, bary: [f64; 3]) -> (f64, f64) {
        let mut x = 0.0;
        let mut y = 0.0;
        for k in 0..3 {
            x += bary[k] * self.coords[k][0];
            y += bary[k] * self.coords[k][1];
        }
        (x, y)
    }

    pub fn barycenter(&self) -> (f64, f64) {
        self.point([1.0 / 3.0; 3])
    }
}

/// Builds the mesh for `n` intervals per direction; `n` must match `transition.n`.
pub fn build_mesh(n: usize, transition: &TransitionParams) -> Result<ShishkinMesh> {
    check_mesh_size(n)?;
    if n != transition.n {
        return Err(Error::InvalidParameter(format!(
            "transition parameters were computed for N = {}, not {n}",
            transition.n
        )));
    }
    ShishkinMesh::build(transition)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShishkinMesh {
    pub n: usize,
    pub x_coords: Vec<f64>,
    pub y_coords: Vec<f64>,
    pub triangles: Vec<Triangle>,
    pub transition: TransitionParams,
}

impl ShishkinMesh {
    /// Builds the mesh. Triangle `2 (j N + i)` is `K1` of cell `(i, j)`, the next one `K2`.
    pub fn build(transition: &TransitionParams) -> Result<Self> {
        let n = transition.n;
        check_mesh_size(n)?;
        let lx = transition.lambda_x;
        let ly = transition.lambda_y;
        if !(lx > 0.0 && lx <= 0.5 && ly > 0.0 && ly <= 1.0 / 3.0) {
            return Err(Error::InvalidParameter(format!(
                "transition parameters out of range: lambda_x={lx}, lambda_y={ly}"
            )));
        }

        let half = n / 2;
        let third = n / 3;
        let coarse_x = (1.0 - lx) / half as f64;
        let fine_x = lx / half as f64;
        let x_coords: Vec<f64> = (0..=n)
            .map(|i| match i {
                _ if i == n => 1.0,
                _ if i < half => i as f64 * coarse_x,
                _ => (1.0 - lx) + (i - half) as f64 * fine_x,
            })
            .collect();

        let coarse_y = (1.0 - 2.0 * ly) / third as f64;
        let fine_y = ly / third as f64;
        let y_coords: Vec<f64> = (0..=n)
            .map(|j| match j {
                _ if j == n => 1.0,
                _ if j < third => j as f64 * fine_y,
                _ if j < 2 * third => ly + (j - third) as f64 * coarse_y,
                _ => (1.0 - ly) + (j - 2 * third) as f64 * fine_y,
            })
            .collect();

        let stride = n + 1;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            let y_fine = j < third || j >= 2 * third;
            for i in 0..n {
                let region = Region::from_flags(i >= half, y_fine);
                let ll = j * stride + i;
                let lr = ll + 1;
                let ul = ll + stride;
                let ur = ul + 1;
                triangles.push(Triangle {
                    kind: TriangleKind::K1,
                    cell: (i, j),
                    vertices: [ll, lr, ul],
                    region,
                });
                triangles.push(Triangle {
                    kind: TriangleKind::K2,
                    cell: (i, j),
                    vertices: [ul, lr, ur],
                    region,
                });
            }
        }

        Ok(Self {
            n,
            x_coords,
            y_coords,
            triangles,
            transition: *transition,
        })
    }

    /// Convenience: transition parameters followed by [`ShishkinMesh::build`].
    pub fn from_problem(epsilon: f64, beta: f64, n: usize, strict: bool) -> Result<Self> {
        let t = transition_params(epsilon, beta, n, DEFAULT_RHO, strict)?;
        Self::build(&t)
    }

    pub fn num_nodes(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.n + 1) + i
    }

    /// `(i, j)` grid indices of a node.
    pub fn node_ij(&self, node: usize) -> (usize, usize) {
        (node % (self.n + 1), node / (self.n + 1))
    }

    pub fn node_coords(&self, node: usize) -> (f64, f64) {
        let (i, j) = self.node_ij(node);
        (self.x_coords[i], self.y_coords[j])
    }

    pub fn is_boundary_node(&self, node: usize) -> bool {
        let (i, j) = self.node_ij(node);
        i == 0 || j == 0 || i == self.n || j == self.n
    }

    pub fn geometry(&self, t: &Triangle) -> ElementGeometry {
        ElementGeometry::from_coords(t.vertices.map(|v| {
            let (x, y) = self.node_coords(v);
            [x, y]
        }))
    }

    /// Coarse x spacing `H_x = 2 (1 - lambda_x) / N`.
    pub fn coarse_hx(&self) -> f64 {
        self.x_coords[1] - self.x_coords[0]
    }

    /// Fine x spacing `h_x = 2 lambda_x / N`.
    pub fn fine_hx(&self) -> f64 {
        2.0 * self.transition.lambda_x / self.n as f64
    }

    /// Coarse y spacing `H_y = 3 (1 - 2 lambda_y) / N`.
    pub fn coarse_hy(&self) -> f64 {
        3.0 * (1.0 - 2.0 * self.transition.lambda_y) / self.n as f64
    }

    /// Fine y spacing `h_y = 3 lambda_y / N`.
    pub fn fine_hy(&self) -> f64 {
        3.0 * self.transition.lambda_y / self.n as f64
    }

    /// Interior node nearest to `(x, y)`; ties go to the lower index.
    pub fn nearest_interior_node(&self, x: f64, y: f64) -> (usize, usize) {
        let nearest = |coords: &[f64], t: f64| {
            (1..self.n)
                .min_by(|&a, &b| {
                    (coords[a] - t)
                        .abs()
                        .partial_cmp(&(coords[b] - t).abs())
                        .unwrap()
                })
                .unwrap()
        };
        (nearest(&self.x_coords, x), nearest(&self.y_coords, y))
    }

    /// Indices of the triangles having `node` as a vertex.
    pub fn triangles_around(&self, node: usize) -> Vec<usize> {
        let (i, j) = self.node_ij(node);
        let mut out = Vec::with_capacity(6);
        for cj in j.saturating_sub(1)..=j.min(self.n - 1) {
            for ci in i.saturating_sub(1)..=i.min(self.n - 1) {
                let base = 2 * (cj * self.n + ci);
                for id in [base, base + 1] {
                    if self.triangles[id].vertices.contains(&node) {
                        out.push(id);
                    }
                }
            }
        }
        out
    }
}
