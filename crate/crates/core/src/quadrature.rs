//! Fully symmetric quadrature on triangles.
//!
//! Rules are built from the collapsed (Duffy) tensor product of Gauss-Legendre
//! rules and then averaged over the six permutations of the barycentric
//! coordinates, so every rule is invariant under the symmetry group of the
//! triangle. A degree-`d` rule integrates all polynomials of total degree `<= d`
//! exactly.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::mesh::ElementGeometry;

pub const MIN_DEGREE: usize = 2;
pub const MAX_DEGREE: usize = 10;

#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub degree: usize,
    /// Barycentric coordinates of the nodes.
    pub points: Vec<[f64; 3]>,
    /// Weights normalised to sum to one (multiply by the element area).
    pub weights: Vec<f64>,
}

impl TriangleRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Newton from the Chebyshev-like initial guess
        let mut t = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        nodes[k] = 0.5 * (1.0 - t);
        weights[k] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

fn build_rule(degree: usize) -> TriangleRule {
    // p(u, v (1 - u)) (1 - u) has degree <= d + 1 in u and <= d in v
    let n = (degree + 3) / 2;
    let (nodes, gw) = gauss_legendre_unit(n);
    let mut points = Vec::with_capacity(6 * n * n);
    let mut weights = Vec::with_capacity(6 * n * n);
    for (iu, &u) in nodes.iter().enumerate() {
        for (iv, &v) in nodes.iter().enumerate() {
            let x = u;
            let y = v * (1.0 - u);
            let w = 2.0 * gw[iu] * gw[iv] * (1.0 - u) / 6.0;
            let l = [1.0 - x - y, x, y];
            for perm in [
                [0, 1, 2],
                [0, 2, 1],
                [1, 0, 2],
                [1, 2, 0],
                [2, 0, 1],
                [2, 1, 0],
            ] {
                points.push([l[perm[0]], l[perm[1]], l[perm[2]]]);
                weights.push(w);
            }
        }
    }
    TriangleRule {
        degree,
        points,
        weights,
    }
}

/// The cached rule of the given degree.
pub fn triangle_rule(degree: usize) -> Result<&'static TriangleRule> {
    static RULES: OnceLock<Vec<TriangleRule>> = OnceLock::new();
    if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
        return Err(Error::UnsupportedQuadratureDegree(degree));
    }
    let rules = RULES.get_or_init(|| (0..=MAX_DEGREE).map(build_rule).collect());
    Ok(&rules[degree])
}

/// Integral of `integrand(x, y)` over the element.
pub fn quadrature_integrate<F>(geom: &ElementGeometry, integrand: F, degree: usize) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let rule = triangle_rule(degree)?;
    Ok(integrate_with(rule, geom, |_, x, y| integrand(x, y)))
}

/// Applies `rule` to an integrand that also receives the barycentric coordinates.
pub fn integrate_with<F>(rule: &TriangleRule, geom: &ElementGeometry, integrand: F) -> f64
where
    F: Fn([f64; 3], f64, f64) -> f64,
{
    let mut sum = 0.0;
    for (bary, w) in rule.points.iter().zip(&rule.weights) {
        let (x, y) = geom.point(*bary);
        sum += w * integrand(*bary, x, y);
    }
    geom.area * sum
}
