//! Exponential weight anchored at a mesh node and the weighted quantities
//! used to bound the discrete Green's function.
//!
//! With `xi = (x - x*) / sigma_x`, `eta = (y - y*) / sigma_y` and
//! `g(r) = 2 / (1 + e^r)`:
//!
//! ```text
//! omega(x, y) = g(xi) g(eta) g(-eta)
//! 1 / omega   = (1 + e^xi) / 2 * (1 + cosh(eta)) / 2
//! ```
//!
//! Derivatives of both are closed forms in `e^xi`, `sinh(eta)` and `cosh(eta)`.

use rayon::prelude::*;

use crate::assembly::{Discretization, FEFunction};
use crate::error::{Error, Result};
use crate::mesh::{ElementGeometry, ShishkinMesh, Triangle};
use crate::norms::{energy_norm_sq, nodal_interpolant, sup_sample_points, CHECK_DEGREE};
use crate::quadrature::{integrate_with, triangle_rule};

/// Relative agreement required between the working and the check quadrature degree.
pub const QUADRATURE_GATE: f64 = 1e-6;

pub const DEFAULT_K_GRID: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

/// `sigma_x = k max(1/N, eps ln^2 N)`.
///
/// `sigma_y = k / sqrt(N)` for `eps <= N^-2`, otherwise
/// `k max(N^{-3/2} eps^{-1/2}, eps^{1/2})`. Outside `eps <= 1/N` the second
/// branch is used, and strict mode rejects the input.
pub fn sigma_params(epsilon: f64, n: usize, k: f64, strict: bool) -> Result<(f64, f64)> {
    if !(k > 0.0 && epsilon > 0.0) || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "need k > 0, eps > 0, N > 0; got k={k}, eps={epsilon}, N={n}"
        )));
    }
    let nf = n as f64;
    if strict && epsilon > 1.0 / nf {
        return Err(Error::AssumptionViolated { epsilon, n });
    }
    let ln_n = nf.ln();
    let sigma_x = k * (1.0 / nf).max(epsilon * ln_n * ln_n);
    let sigma_y = if epsilon <= 1.0 / (nf * nf) {
        k / nf.sqrt()
    } else {
        k * (nf.powf(-1.5) / epsilon.sqrt()).max(epsilon.sqrt())
    };
    Ok((sigma_x, sigma_y))
}

/// `g(r) = 2 / (1 + e^r)` and its first two derivatives, evaluated without overflow.
pub fn g_derivs(r: f64) -> [f64; 3] {
    if r > 0.0 {
        let t = (-r).exp();
        let d = 1.0 + t;
        [
            2.0 * t / d,
            -2.0 * t / (d * d),
            -2.0 * t * (t - 1.0) / (d * d * d),
        ]
    } else {
        let s = r.exp();
        let d = 1.0 + s;
        [
            2.0 / d,
            -2.0 * s / (d * d),
            -2.0 * s * (1.0 - s) / (d * d * d),
        ]
    }
}

/// Values and derivatives of `1/omega` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseWeightJet {
    pub value: f64,
    pub dx: f64,
    pub dy: f64,
    pub dxx: f64,
    pub dxy: f64,
    pub dyy: f64,
}

impl InverseWeightJet {
    pub fn laplacian(&self) -> f64 {
        self.dxx + self.dyy
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightSpec {
    pub star: (f64, f64),
    pub k: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
}

impl WeightSpec {
    pub fn new(star: (f64, f64), epsilon: f64, n: usize, k: f64, strict: bool) -> Result<Self> {
        let (sigma_x, sigma_y) = sigma_params(epsilon, n, k, strict)?;
        Ok(Self {
            star,
            k,
            sigma_x,
            sigma_y,
        })
    }

    pub fn with_sigmas(star: (f64, f64), k: f64, sigma_x: f64, sigma_y: f64) -> Self {
        Self {
            star,
            k,
            sigma_x,
            sigma_y,
        }
    }

    fn scaled(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.star.0) / self.sigma_x,
            (y - self.star.1) / self.sigma_y,
        )
    }

    /// `omega` at a point.
    pub fn omega(&self, x: f64, y: f64) -> f64 {
        let (xi, eta) = self.scaled(x, y);
        g_derivs(xi)[0] * g_derivs(eta)[0] * g_derivs(-eta)[0]
    }

    /// `d^{l+m} omega / dx^l dy^m`, `l + m <= 2`.
    pub fn omega_derivative(&self, x: f64, y: f64, l: usize, m: usize) -> Result<f64> {
        if l + m > 2 {
            return Err(Error::DerivativeOrder(l, m));
        }
        let (xi, eta) = self.scaled(x, y);
        let gx = g_derivs(xi);
        let gp = g_derivs(eta);
        let gm = g_derivs(-eta);
        // h(eta) = g(eta) g(-eta)
        let h = match m {
            0 => gp[0] * gm[0],
            1 => gp[1] * gm[0] - gp[0] * gm[1],
            _ => gp[2] * gm[0] - 2.0 * gp[1] * gm[1] + gp[0] * gm[2],
        };
        Ok(gx[l] * h / (self.sigma_x.powi(l as i32) * self.sigma_y.powi(m as i32)))
    }

    /// All derivatives of `1/omega` up to order two.
    pub fn inverse_jet(&self, x: f64, y: f64) -> InverseWeightJet {
        let (xi, eta) = self.scaled(x, y);
        let e = xi.exp();
        let a = 0.5 * (1.0 + e);
        let a1 = 0.5 * e;
        let b = 0.5 * (1.0 + eta.cosh());
        let b1 = 0.5 * eta.sinh();
        let b2 = 0.5 * eta.cosh();
        let (sx, sy) = (self.sigma_x, self.sigma_y);
        InverseWeightJet {
            value: a * b,
            dx: a1 * b / sx,
            dy: a * b1 / sy,
            dxx: a1 * b / (sx * sx),
            dxy: a1 * b1 / (sx * sy),
            dyy: a * b2 / (sy * sy),
        }
    }

    /// `d^{l+m} (1/omega) / dx^l dy^m`, `l + m <= 2`.
    pub fn inverse_derivative(&self, x: f64, y: f64, l: usize, m: usize) -> Result<f64> {
        let j = self.inverse_jet(x, y);
        Ok(match (l, m) {
            (0, 0) => j.value,
            (1, 0) => j.dx,
            (0, 1) => j.dy,
            (2, 0) => j.dxx,
            (1, 1) => j.dxy,
            (0, 2) => j.dyy,
            _ => return Err(Error::DerivativeOrder(l, m)),
        })
    }
}

/// `omega` (`inverse = false`) or `1/omega` (`inverse = true`) derivative.
pub fn weight_eval(
    spec: &WeightSpec,
    x: f64,
    y: f64,
    l: usize,
    m: usize,
    inverse: bool,
) -> Result<f64> {
    if inverse {
        spec.inverse_derivative(x, y, l, m)
    } else {
        spec.omega_derivative(x, y, l, m)
    }
}

/// An integral computed at two quadrature degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckedIntegral {
    pub value: f64,
    pub check: f64,
    pub degree: usize,
    pub check_degree: usize,
}

impl CheckedIntegral {
    pub fn rel_diff(&self) -> f64 {
        let scale = self.value.abs().max(self.check.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.value - self.check).abs() / scale
        }
    }

    pub fn gate(self) -> Result<Self> {
        let rel_diff = self.rel_diff();
        if rel_diff > QUADRATURE_GATE {
            return Err(Error::QuadratureDisagreement {
                low: self.degree,
                high: self.check_degree,
                rel_diff,
            });
        }
        Ok(self)
    }
}

/// Sum over elements of a per-point integrand, in element order.
fn integrate_elements<F>(disc: &Discretization, degree: usize, f: &F) -> Result<f64>
where
    F: Fn(&Triangle, &ElementGeometry, f64, [f64; 3], f64, f64) -> f64 + Sync,
{
    let rule = triangle_rule(degree)?;
    let parts: Vec<f64> = disc
        .mesh
        .triangles
        .par_iter()
        .map(|t| {
            let geom = disc.mesh.geometry(t);
            let delta = disc.delta(t);
            integrate_with(rule, &geom, |bary, x, y| f(t, &geom, delta, bary, x, y))
        })
        .collect();
    Ok(parts.iter().sum())
}

fn checked<F>(disc: &Discretization, degree: usize, f: F) -> Result<CheckedIntegral>
where
    F: Fn(&Triangle, &ElementGeometry, f64, [f64; 3], f64, f64) -> f64 + Sync,
{
    let value = integrate_elements(disc, degree, &f)?;
    let check = if degree == CHECK_DEGREE {
        value
    } else {
        integrate_elements(disc, CHECK_DEGREE, &f)?
    };
    Ok(CheckedIntegral {
        value,
        check,
        degree,
        check_degree: CHECK_DEGREE,
    })
}

fn quadrature_gate(rel_diff: f64, degree: usize) -> Result<()> {
    if rel_diff > QUADRATURE_GATE {
        return Err(Error::QuadratureDisagreement {
            low: degree,
            high: CHECK_DEGREE,
            rel_diff,
        });
    }
    Ok(())
}

/// Squared weighted energy norm of `g`, with its degree-10 check value.
/// Fails if the two disagree beyond [`QUADRATURE_GATE`].
///
/// ```text
/// eps ||w^{-1/2} G_x||^2 + eps ||w^{-1/2} G_y||^2 + b/2 ||(w^{-1})_x^{1/2} G||^2
///   + c ||w^{-1/2} G||^2 + sum_K b^2 delta_K ||w^{-1/2} G_x||_K^2
/// ```
pub fn weighted_energy_norm_sq(
    g: &FEFunction,
    spec: &WeightSpec,
    disc: &Discretization,
    degree: usize,
) -> Result<CheckedIntegral> {
    weighted_energy_norm_sq_unchecked(g, spec, disc, degree)?.gate()
}

/// [`weighted_energy_norm_sq`] without the agreement gate.
pub fn weighted_energy_norm_sq_unchecked(
    g: &FEFunction,
    spec: &WeightSpec,
    disc: &Discretization,
    degree: usize,
) -> Result<CheckedIntegral> {
    g.check_mesh(&disc.mesh)?;
    if degree < 4 {
        return Err(Error::InvalidParameter(format!(
            "weighted norm needs quadrature degree >= 4, got {degree}"
        )));
    }
    let (eps, b, c) = (disc.problem.epsilon, disc.problem.b, disc.problem.c);
    checked(disc, degree, |t, geom, delta, bary, x, y| {
        let w = spec.inverse_jet(x, y);
        let grad = g.gradient(t, geom);
        let gv = g.eval_bary(t, bary);
        // (w^-1)_x is positive in closed form; clamp guards rounding only
        let wx = w.dx.max(0.0);
        w.value
            * (eps * (grad[0] * grad[0] + grad[1] * grad[1])
                + c * gv * gv
                + b * b * delta * grad[0] * grad[0])
            + 0.5 * b * wx * gv * gv
    })
}

pub fn weighted_energy_norm(
    g: &FEFunction,
    spec: &WeightSpec,
    disc: &Discretization,
    degree: usize,
) -> Result<f64> {
    weighted_energy_norm_sq(g, spec, disc, degree).map(|v| v.value.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightPropertyReport {
    pub samples: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Samples with `omega <= 0` or `omega >= 8`.
    pub range_violations: usize,
    /// Samples with `(1/omega)_x <= 0`.
    pub sign_violations: usize,
    pub omega_at_star: f64,
    /// Largest per-element `max/min` of `1/omega` and of `(1/omega)_x`.
    pub max_inverse_ratio: f64,
    pub max_inverse_dx_ratio: f64,
    /// Largest per-element ratio of the above to `exp(h_x/sigma_x + h_y/sigma_y)`.
    pub max_ratio_over_lipschitz: f64,
    /// `sup |d^{l+m} omega| sigma_x^l sigma_y^m / omega` for
    /// `(l, m) = (1,0), (0,1), (2,0), (1,1), (0,2)`.
    pub derivative_constants: [f64; 5],
    /// `sup |d^{l+m} omega| sigma_x^{l-1} sigma_y^m / |omega_x|` for
    /// `(l, m) = (1,0), (2,0), (1,1)`.
    pub x_derivative_constants: [f64; 3],
    /// `min omega` over the triangles having the anchor as a vertex.
    pub min_omega_near_star: f64,
}

const DERIV_ORDERS: [(usize, usize); 5] = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)];
const X_DERIV_ORDERS: [(usize, usize); 3] = [(1, 0), (2, 0), (1, 1)];

/// Samples the weight on a `density x density` grid over the closed unit
/// square and at lattice points of every element.
///
/// Fails hard if `0 < omega < 8` or `(1/omega)_x > 0` is violated anywhere.
pub fn weight_property_report(
    spec: &WeightSpec,
    mesh: &ShishkinMesh,
    density: usize,
) -> Result<WeightPropertyReport> {
    if density < 2 {
        return Err(Error::InvalidParameter(
            "sample density must be >= 2".into(),
        ));
    }
    let grid: Vec<(f64, f64)> = (0..density)
        .flat_map(|a| {
            (0..density).map(move |b| {
                (
                    a as f64 / (density - 1) as f64,
                    b as f64 / (density - 1) as f64,
                )
            })
        })
        .collect();

    let mut omega_min = f64::INFINITY;
    let mut omega_max = f64::NEG_INFINITY;
    let mut range_violations = 0;
    let mut sign_violations = 0;
    let mut derivative_constants = [0.0f64; 5];
    let mut x_derivative_constants = [0.0f64; 3];
    let (sx, sy) = (spec.sigma_x, spec.sigma_y);
    for &(x, y) in &grid {
        let w = spec.omega(x, y);
        omega_min = omega_min.min(w);
        omega_max = omega_max.max(w);
        if !(w > 0.0 && w < 8.0) {
            range_violations += 1;
        }
        if !(spec.inverse_jet(x, y).dx > 0.0) {
            sign_violations += 1;
        }
        for (c, &(l, m)) in derivative_constants.iter_mut().zip(&DERIV_ORDERS) {
            let d = spec.omega_derivative(x, y, l, m)?;
            *c = c.max(d.abs() * sx.powi(l as i32) * sy.powi(m as i32) / w);
        }
        let wx = spec.omega_derivative(x, y, 1, 0)?.abs();
        if wx > 0.0 {
            for (c, &(l, m)) in x_derivative_constants.iter_mut().zip(&X_DERIV_ORDERS) {
                let d = spec.omega_derivative(x, y, l, m)?;
                *c = c.max(d.abs() * sx.powi(l as i32 - 1) * sy.powi(m as i32) / wx);
            }
        }
    }
    if range_violations > 0 {
        return Err(Error::WeightProperty(format!(
            "0 < omega < 8 fails at {range_violations} samples"
        )));
    }
    if sign_violations > 0 {
        return Err(Error::WeightProperty(format!(
            "(1/omega)_x > 0 fails at {sign_violations} samples"
        )));
    }

    let lattice = sup_sample_points();
    let ratios: Vec<(f64, f64, f64)> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            let geom = mesh.geometry(t);
            let (mut vmin, mut vmax) = (f64::INFINITY, 0.0f64);
            let (mut dmin, mut dmax) = (f64::INFINITY, 0.0f64);
            for bary in &lattice {
                let (x, y) = geom.point(*bary);
                let j = spec.inverse_jet(x, y);
                vmin = vmin.min(j.value);
                vmax = vmax.max(j.value);
                dmin = dmin.min(j.dx);
                dmax = dmax.max(j.dx);
            }
            let lip = (geom.hx / sx + geom.hy / sy).exp();
            let (rv, rd) = (vmax / vmin, dmax / dmin);
            (rv, rd, rv.max(rd) / lip)
        })
        .collect();
    let max_inverse_ratio = ratios.iter().map(|r| r.0).fold(0.0, f64::max);
    let max_inverse_dx_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_ratio_over_lipschitz = ratios.iter().map(|r| r.2).fold(0.0, f64::max);

    let star_node = mesh.nearest_interior_node(spec.star.0, spec.star.1);
    let star_node = mesh.node_index(star_node.0, star_node.1);
    let mut min_omega_near_star = f64::INFINITY;
    for id in mesh.triangles_around(star_node) {
        let geom = mesh.geometry(&mesh.triangles[id]);
        for bary in &lattice {
            let (x, y) = geom.point(*bary);
            min_omega_near_star = min_omega_near_star.min(spec.omega(x, y));
        }
    }

    Ok(WeightPropertyReport {
        samples: grid.len(),
        omega_min,
        omega_max,
        range_violations,
        sign_violations,
        omega_at_star: spec.omega(spec.star.0, spec.star.1),
        max_inverse_ratio,
        max_inverse_dx_ratio,
        max_ratio_over_lipschitz,
        derivative_constants,
        x_derivative_constants,
        min_omega_near_star,
    })
}

/// Weighted quantities of one Green's function.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaQuantities {
    /// `a_SD(w^{-1} G, G)`.
    pub a_w: f64,
    /// `(w^{-1} G)(x*)`.
    pub point_val: f64,
    /// `a_SD(E, G)` with `E = (w^{-1} G)^I - w^{-1} G`.
    pub defect: f64,
    pub weighted_norm_sq: f64,
    pub energy_norm_sq: f64,
    /// Largest relative disagreement between the working and check degrees.
    pub quadrature_rel_diff: f64,
}

impl LemmaQuantities {
    pub fn coercivity_ratio(&self) -> f64 {
        self.a_w / self.weighted_norm_sq
    }

    pub fn defect_ratio(&self) -> f64 {
        self.defect.abs() / self.weighted_norm_sq
    }

    /// `a_w + defect - point_val`, which vanishes because the interpolant lies
    /// in the discrete space; relative to the largest of the three terms.
    pub fn duality_residual(&self) -> f64 {
        let scale = self
            .a_w
            .abs()
            .max(self.defect.abs())
            .max(self.point_val.abs());
        (self.a_w + self.defect - self.point_val).abs() / scale
    }

    /// `|||G|||^2 / |||G|||_w^2`, at most 8 when `c >= 1`.
    pub fn norm_ratio(&self) -> f64 {
        self.energy_norm_sq / self.weighted_norm_sq
    }
}

/// Stabilized-form integrand for trial `u` (value, gradient, laplacian) against `G`.
#[allow(clippy::too_many_arguments)]
#[inline]
fn form_integrand(
    eps: f64,
    b: f64,
    c: f64,
    delta: f64,
    u: f64,
    ux: f64,
    uy: f64,
    u_lap: f64,
    gv: f64,
    gx: f64,
    gy: f64,
) -> f64 {
    eps * (ux * gx + uy * gy)
        + (b * ux + c * u) * gv
        + delta * (-eps * u_lap + b * ux + c * u) * b * gx
}

/// Fails if any of the weighted integrals disagrees between the working and
/// check degrees beyond [`QUADRATURE_GATE`].
pub fn lemma_quantities(
    g: &FEFunction,
    spec: &WeightSpec,
    disc: &Discretization,
    degree: usize,
) -> Result<LemmaQuantities> {
    let q = lemma_quantities_unchecked(g, spec, disc, degree)?;
    quadrature_gate(q.quadrature_rel_diff, degree)?;
    Ok(q)
}

/// [`lemma_quantities`] without the agreement gate; the disagreement is
/// left in `quadrature_rel_diff`.
pub fn lemma_quantities_unchecked(
    g: &FEFunction,
    spec: &WeightSpec,
    disc: &Discretization,
    degree: usize,
) -> Result<LemmaQuantities> {
    g.check_mesh(&disc.mesh)?;
    let (eps, b, c) = (disc.problem.epsilon, disc.problem.b, disc.problem.c);
    let weighted_product = |x: f64, y: f64, gv: f64, grad: [f64; 2]| {
        let w = spec.inverse_jet(x, y);
        let u = w.value * gv;
        let ux = w.dx * gv + w.value * grad[0];
        let uy = w.dy * gv + w.value * grad[1];
        let lap = w.laplacian() * gv + 2.0 * (w.dx * grad[0] + w.dy * grad[1]);
        (u, ux, uy, lap)
    };

    let a_w = checked(disc, degree, |t, geom, delta, bary, x, y| {
        let grad = g.gradient(t, geom);
        let gv = g.eval_bary(t, bary);
        let (u, ux, uy, lap) = weighted_product(x, y, gv, grad);
        form_integrand(eps, b, c, delta, u, ux, uy, lap, gv, grad[0], grad[1])
    })?;

    // (w^{-1} G)^I: nodal values w^{-1}(node) G(node)
    let inv = nodal_interpolant(|x, y| spec.inverse_jet(x, y).value, &disc.mesh);
    let interp = FEFunction {
        n: g.n,
        values: inv
            .values
            .iter()
            .zip(&g.values)
            .map(|(w, gv)| w * gv)
            .collect(),
    };
    let defect = checked(disc, degree, |t, geom, delta, bary, x, y| {
        let grad = g.gradient(t, geom);
        let gv = g.eval_bary(t, bary);
        let (u, ux, uy, lap) = weighted_product(x, y, gv, grad);
        let gi = interp.gradient(t, geom);
        let iv = interp.eval_bary(t, bary);
        form_integrand(
            eps,
            b,
            c,
            delta,
            iv - u,
            gi[0] - ux,
            gi[1] - uy,
            -lap,
            gv,
            grad[0],
            grad[1],
        )
    })?;

    let wnorm = weighted_energy_norm_sq_unchecked(g, spec, disc, degree)?;
    let point_val = {
        let (i, j) = disc.mesh.nearest_interior_node(spec.star.0, spec.star.1);
        let node = disc.mesh.node_index(i, j);
        spec.inverse_jet(spec.star.0, spec.star.1).value * g.values[node]
    };

    Ok(LemmaQuantities {
        a_w: a_w.value,
        point_val,
        defect: defect.value,
        weighted_norm_sq: wnorm.value,
        energy_norm_sq: energy_norm_sq(disc, g)?,
        quadrature_rel_diff: a_w.rel_diff().max(defect.rel_diff()).max(wnorm.rel_diff()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> WeightSpec {
        WeightSpec::with_sigmas((0.4, 0.55), 2.0, 0.07, 0.2)
    }

    #[test]
    fn sigma_examples() {
        let (sx, sy) = sigma_params(1e-6, 96, 2.0, true).unwrap();
        assert!((sy - 0.204_124_145).abs() < 1e-8);
        assert!((sx - 0.020_833_333_333).abs() < 1e-11);
        let (sx, sy) = sigma_params(1e-3, 96, 1.0, true).unwrap();
        assert!((sy - 0.033_619_9).abs() < 1e-6);
        assert!((sx - 0.020_833_3).abs() < 1e-6);
        assert!(sigma_params(0.1, 12, 1.0, true).is_err());
        assert!(sigma_params(0.1, 12, 1.0, false).is_ok());
    }

    #[test]
    fn sigma_y_branches_meet() {
        for n in [6usize, 12, 48, 96, 192] {
            let eps = 1.0 / (n * n) as f64;
            let nf = n as f64;
            let k = 3.0;
            let first = k / nf.sqrt();
            let second = k * (nf.powf(-1.5) / eps.sqrt()).max(eps.sqrt());
            assert!((first - second).abs() < 1e-14 * first);
            let (_, sy) = sigma_params(eps, n, k, true).unwrap();
            assert!((sy - first).abs() < 1e-14 * first);
        }
    }

    #[test]
    fn g_values() {
        assert!((g_derivs(1.0)[0] - 0.537_882_842_739_990).abs() < 1e-14);
        assert_eq!(g_derivs(0.0), [1.0, -0.5, 0.0]);
        // large arguments neither overflow nor produce NaN
        for r in [-800.0, -40.0, 40.0, 800.0] {
            assert!(g_derivs(r).iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn weight_is_one_at_anchor() {
        let s = spec();
        assert_eq!(s.omega(0.4, 0.55), 1.0);
        assert_eq!(s.inverse_jet(0.4, 0.55).value, 1.0);
    }

    #[test]
    fn rejects_third_derivatives() {
        let s = spec();
        assert!(matches!(
            weight_eval(&s, 0.1, 0.1, 2, 1, false),
            Err(Error::DerivativeOrder(2, 1))
        ));
        assert!(weight_eval(&s, 0.1, 0.1, 0, 3, true).is_err());
    }

    #[test]
    fn omega_derivatives_match_finite_differences() {
        let s = spec();
        let h = 1e-5;
        for &(x, y) in &[(0.1, 0.2), (0.45, 0.5), (0.9, 0.95)] {
            let f = |x: f64, y: f64| s.omega(x, y);
            let dx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let dy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
            let dxx = (f(x + h, y) - 2.0 * f(x, y) + f(x - h, y)) / (h * h);
            let dxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
                / (4.0 * h * h);
            let dyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
            let tol = |v: f64| 1e-5 * (1.0 + v.abs());
            for ((l, m), fd) in [
                ((1, 0), dx),
                ((0, 1), dy),
                ((2, 0), dxx),
                ((1, 1), dxy),
                ((0, 2), dyy),
            ] {
                let exact = s.omega_derivative(x, y, l, m).unwrap();
                assert!(
                    (exact - fd).abs() < tol(exact) * 10.0,
                    "({l},{m}) at ({x},{y}): {exact} vs {fd}"
                );
            }
        }
    }

    #[test]
    fn inverse_jet_matches_quotient_rule() {
        let s = spec();
        for &(x, y) in &[(0.05, 0.9), (0.4, 0.3), (0.99, 0.01)] {
            let w = s.omega(x, y);
            let d = |l, m| s.omega_derivative(x, y, l, m).unwrap();
            let (wx, wy) = (d(1, 0), d(0, 1));
            let j = s.inverse_jet(x, y);
            let rel = |a: f64, b: f64| (a - b).abs() / (1e-300 + b.abs());
            assert!(rel(j.value, 1.0 / w) < 1e-12);
            assert!(rel(j.dx, -wx / (w * w)) < 1e-11);
            assert!(rel(j.dy, -wy / (w * w)) < 1e-11);
            assert!(rel(j.dxx, 2.0 * wx * wx / w.powi(3) - d(2, 0) / (w * w)) < 1e-10);
            assert!(rel(j.dxy, 2.0 * wx * wy / w.powi(3) - d(1, 1) / (w * w)) < 1e-10);
            assert!(rel(j.dyy, 2.0 * wy * wy / w.powi(3) - d(0, 2) / (w * w)) < 1e-10);
        }
    }
}
