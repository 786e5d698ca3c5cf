//! Energy norm, nodal interpolation and anisotropic interpolation diagnostics.

use rayon::prelude::*;

use crate::assembly::{Discretization, FEFunction};
use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, Region, ShishkinMesh};
use crate::problem::SmoothField;
use crate::quadrature::{integrate_with, triangle_rule};

/// Default quadrature degree for non-polynomial integrands and the degree it is checked against.
pub const DEFAULT_DEGREE: usize = 6;
pub const CHECK_DEGREE: usize = 10;

/// Squared energy norm `eps |v|_1^2 + ||v||^2 + sum_K delta_K ||b v_x||_K^2`, exact on P1.
pub fn energy_norm_sq(disc: &Discretization, v: &FEFunction) -> Result<f64> {
    v.check_mesh(&disc.mesh)?;
    let eps = disc.problem.epsilon;
    let b = disc.problem.b;
    let parts: Vec<f64> = disc
        .mesh
        .triangles
        .par_iter()
        .map(|t| {
            let geom = disc.mesh.geometry(t);
            let g = v.gradient(t, &geom);
            let vl = v.local_values(t);
            let sum: f64 = vl.iter().sum();
            let sq: f64 = vl.iter().map(|x| x * x).sum();
            let mass = geom.area / 12.0 * (sq + sum * sum);
            let delta = disc.delta(t);
            geom.area * (eps * (g[0] * g[0] + g[1] * g[1]) + delta * b * b * g[0] * g[0]) + mass
        })
        .collect();
    Ok(parts.iter().sum())
}

pub fn energy_norm(disc: &Discretization, v: &FEFunction) -> Result<f64> {
    energy_norm_sq(disc, v).map(f64::sqrt)
}

/// Energy norm of `u - v` for a smooth `u`, by element quadrature of the given degree.
pub fn energy_error(
    disc: &Discretization,
    u: &dyn SmoothField,
    v: &FEFunction,
    degree: usize,
) -> Result<f64> {
    v.check_mesh(&disc.mesh)?;
    let rule = triangle_rule(degree)?;
    let eps = disc.problem.epsilon;
    let b = disc.problem.b;
    let parts: Vec<f64> = disc
        .mesh
        .triangles
        .par_iter()
        .map(|t| {
            let geom = disc.mesh.geometry(t);
            let g = v.gradient(t, &geom);
            let delta = disc.delta(t);
            integrate_with(rule, &geom, |bary, x, y| {
                let ex = u.derivative(1, 0, x, y) - g[0];
                let ey = u.derivative(0, 1, x, y) - g[1];
                let e = u.value(x, y) - v.eval_bary(t, bary);
                eps * (ex * ex + ey * ey) + e * e + delta * b * b * ex * ex
            })
        })
        .collect();
    Ok(parts.iter().sum::<f64>().sqrt())
}

/// Piecewise-linear interpolant matching `w` at every node, boundary included.
pub fn nodal_interpolant<F>(w: F, mesh: &ShishkinMesh) -> FEFunction
where
    F: Fn(f64, f64) -> f64,
{
    let values = (0..mesh.num_nodes())
        .map(|node| {
            let (x, y) = mesh.node_coords(node);
            w(x, y)
        })
        .collect();
    FEFunction { n: mesh.n, values }
}

/// Exponent of an `L^p` norm; `p = inf` is evaluated by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Self::Infinity)
        } else if p > 1.0 && p.is_finite() {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidParameter(format!(
                "need p in (1, inf], got {p}"
            )))
        }
    }
}

/// Sampling points for sup norms: the 12 non-vertex points of the order-4
/// barycentric lattice, the centroid, and the three vertices. The result is a
/// lower bound of the true supremum.
pub fn sup_sample_points() -> Vec<[f64; 3]> {
    let mut pts = Vec::new();
    for i in 0..=4 {
        for j in 0..=(4 - i) {
            let k = 4 - i - j;
            pts.push([i as f64 / 4.0, j as f64 / 4.0, k as f64 / 4.0]);
        }
    }
    pts.push([1.0 / 3.0; 3]);
    pts
}

/// Element `L^p` norms of several integrands evaluated at the same points.
fn element_lp_norms<const M: usize, F>(
    geom: &ElementGeometry,
    p: NormExponent,
    degree: usize,
    f: F,
) -> Result<[f64; M]>
where
    F: Fn([f64; 3], f64, f64) -> [f64; M],
{
    match p {
        NormExponent::Infinity => {
            let mut out = [0.0f64; M];
            for bary in sup_sample_points() {
                let (x, y) = geom.point(bary);
                for (o, v) in out.iter_mut().zip(f(bary, x, y)) {
                    *o = o.max(v.abs());
                }
            }
            Ok(out)
        }
        NormExponent::Finite(p) => {
            let rule = triangle_rule(degree)?;
            let mut out = [0.0; M];
            for (bary, w) in rule.points.iter().zip(&rule.weights) {
                let (x, y) = geom.point(*bary);
                for (o, v) in out.iter_mut().zip(f(*bary, x, y)) {
                    *o += w * v.abs().powf(p);
                }
            }
            Ok(out.map(|s| (geom.area * s).powf(1.0 / p)))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementInterpolation {
    pub element: usize,
    pub region: Region,
    /// `||w - w_I||`, `||(w - w_I)_x||`, `||(w - w_I)_y||` on the element.
    pub errors: [f64; 3],
    /// Matching anisotropic bounds (without the generic constant):
    /// `hx^2 ||w_xx|| + hx hy ||w_xy|| + hy^2 ||w_yy||`,
    /// `hx ||w_xx|| + hy ||w_xy||`, `hx ||w_xy|| + hy ||w_yy||`.
    pub bounds: [f64; 3],
    /// `errors / bounds`, the empirical constant (0 when both vanish).
    pub ratios: [f64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationReport {
    pub p: NormExponent,
    pub elements: Vec<ElementInterpolation>,
}

impl InterpolationReport {
    /// Worst ratio per error kind over elements of `region`.
    pub fn max_ratios(&self, region: Region) -> Option<[f64; 3]> {
        let mut it = self
            .elements
            .iter()
            .filter(|e| e.region == region)
            .peekable();
        it.peek()?;
        Some(it.fold([0.0; 3], |acc, e| {
            [
                acc[0].max(e.ratios[0]),
                acc[1].max(e.ratios[1]),
                acc[2].max(e.ratios[2]),
            ]
        }))
    }

    pub fn overall_max(&self) -> [f64; 3] {
        self.elements.iter().fold([0.0; 3], |acc, e| {
            [
                acc[0].max(e.ratios[0]),
                acc[1].max(e.ratios[1]),
                acc[2].max(e.ratios[2]),
            ]
        })
    }
}

fn ratio(err: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        err / bound
    } else {
        0.0
    }
}

/// Per-element interpolation errors against the anisotropic bounds.
pub fn interpolation_error_report(
    w: &dyn SmoothField,
    mesh: &ShishkinMesh,
    p: f64,
    degree: usize,
) -> Result<InterpolationReport> {
    let p = NormExponent::new(p)?;
    triangle_rule(degree)?;
    let interp = nodal_interpolant(|x, y| w.value(x, y), mesh);
    let elements = mesh
        .triangles
        .par_iter()
        .enumerate()
        .map(|(id, t)| {
            let geom = mesh.geometry(t);
            let gi = interp.gradient(t, &geom);
            let errors = element_lp_norms(&geom, p, degree, |bary, x, y| {
                [
                    w.value(x, y) - interp.eval_bary(t, bary),
                    w.derivative(1, 0, x, y) - gi[0],
                    w.derivative(0, 1, x, y) - gi[1],
                ]
            })?;
            let [dxx, dxy, dyy] = element_lp_norms(&geom, p, degree, |_, x, y| {
                [
                    w.derivative(2, 0, x, y),
                    w.derivative(1, 1, x, y),
                    w.derivative(0, 2, x, y),
                ]
            })?;
            let (hx, hy) = (geom.hx, geom.hy);
            let bounds = [
                hx * hx * dxx + hx * hy * dxy + hy * hy * dyy,
                hx * dxx + hy * dxy,
                hx * dxy + hy * dyy,
            ];
            Ok(ElementInterpolation {
                element: id,
                region: t.region,
                errors,
                bounds,
                ratios: [
                    ratio(errors[0], bounds[0]),
                    ratio(errors[1], bounds[1]),
                    ratio(errors[2], bounds[2]),
                ],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InterpolationReport { p, elements })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::StabilizationConfig;
    use crate::mesh::{transition_params, DEFAULT_RHO};
    use crate::problem::{ProblemSpec, Quadratic, SineProduct};

    fn uniform_disc() -> Discretization {
        let t = transition_params(1.0, 1.0, 6, DEFAULT_RHO, false).unwrap();
        let mesh = ShishkinMesh::build(&t).unwrap();
        let problem = ProblemSpec::preset("constant-f", 1e-2, 1.0, 1.0, 1.0).unwrap();
        Discretization::new(mesh, problem, StabilizationConfig::default())
    }

    #[test]
    fn zero_and_homogeneity() {
        let d = uniform_disc();
        assert_eq!(energy_norm(&d, &FEFunction::zeros(&d.mesh)).unwrap(), 0.0);
        let v = nodal_interpolant(|x, y| x * (1.0 - x) * y * (1.0 - y), &d.mesh);
        let n1 = energy_norm(&d, &v).unwrap();
        let n2 = energy_norm(&d, &v.scale(-3.0)).unwrap();
        assert!((n2 - 3.0 * n1).abs() < 1e-14);
    }

    #[test]
    fn galerkin_form_equals_energy_norm_without_stabilization() {
        let mut d = uniform_disc();
        d.config.c_star = 0.0;
        let v = nodal_interpolant(
            |x, y| (x * (1.0 - x)).sqrt() * y * (1.0 - y) * (3.0 * x).cos(),
            &d.mesh,
        );
        let a = d.bilinear(&v, &v).unwrap();
        let e = energy_norm_sq(&d, &v).unwrap();
        assert!((a - e).abs() < 1e-14 * e);
    }

    #[test]
    fn interpolant_reproduces_linear() {
        let m = ShishkinMesh::from_problem(1e-4, 1.0, 12, true).unwrap();
        let w = Quadratic::linear(0.0, 2.0, 3.0);
        let i = nodal_interpolant(|x, y| w.value(x, y), &m);
        for t in m.triangles.iter().step_by(7) {
            let geom = m.geometry(t);
            for bary in sup_sample_points() {
                let (x, y) = geom.point(bary);
                assert!((i.eval_bary(t, bary) - w.value(x, y)).abs() < 1e-14);
            }
        }
        let rep = interpolation_error_report(&w, &m, 2.0, 6).unwrap();
        assert!(rep
            .elements
            .iter()
            .all(|e| e.errors.iter().all(|&v| v < 1e-12)));
        assert_eq!(rep.overall_max(), [0.0; 3]);
    }

    #[test]
    fn interpolant_matches_nodes() {
        let m = ShishkinMesh::from_problem(1e-4, 1.0, 24, true).unwrap();
        let i = nodal_interpolant(|x, y| SineProduct.value(x, y), &m);
        for node in 0..m.num_nodes() {
            let (x, y) = m.node_coords(node);
            assert_eq!(i.values[node], SineProduct.value(x, y));
        }
    }

    #[test]
    fn rejects_p_at_most_one() {
        let m = ShishkinMesh::from_problem(1e-4, 1.0, 12, true).unwrap();
        assert!(interpolation_error_report(&SineProduct, &m, 1.0, 6).is_err());
        assert!(interpolation_error_report(&SineProduct, &m, 0.5, 6).is_err());
        assert!(interpolation_error_report(&SineProduct, &m, f64::INFINITY, 6).is_ok());
    }

    #[test]
    fn degree_escalation_converges() {
        let m = ShishkinMesh::from_problem(1e-4, 1.0, 12, true).unwrap();
        let worst = |deg| {
            let lo = interpolation_error_report(&SineProduct, &m, 2.0, deg).unwrap();
            let hi = interpolation_error_report(&SineProduct, &m, 2.0, CHECK_DEGREE).unwrap();
            lo.elements
                .iter()
                .zip(&hi.elements)
                .flat_map(|(a, b)| {
                    (0..3).map(move |k| (a.errors[k] - b.errors[k]).abs() / b.errors[k])
                })
                .fold(0.0f64, f64::max)
        };
        let (d6, d8) = (worst(6), worst(8));
        assert!(d6 < 1e-3, "{d6}");
        assert!(d8 < 1e-6 && d8 < d6 / 100.0, "{d8} vs {d6}");
    }
}
