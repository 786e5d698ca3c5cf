use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{fmt17, Placement, Settings};
use crate::assembly::{Discretization, FEFunction, StabilizationConfig};
use crate::error::Result;
use crate::mesh::Region;
use crate::norms::energy_norm_sq;
use crate::problem::ProblemSpec;
use crate::solver::SystemSolver;
use crate::weight::{
    lemma_quantities_unchecked, weighted_energy_norm_sq_unchecked, LemmaQuantities, WeightSpec,
    QUADRATURE_GATE,
};

/// Per-row random stream, independent of which other rows exist.
fn row_rng(seed: u64, epsilon: f64, n: usize) -> ChaCha8Rng {
    let mix =
        seed ^ epsilon.to_bits().rotate_left(17) ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ChaCha8Rng::seed_from_u64(mix)
}

/// Discretization of the configured preset at one `(eps, N)`.
pub fn discretization(settings: &Settings, epsilon: f64, n: usize) -> Result<Discretization> {
    let problem = ProblemSpec::preset(
        &settings.preset,
        epsilon,
        settings.b,
        settings.c,
        settings.beta,
    )?;
    let config = StabilizationConfig::new(settings.cstar)?;
    Discretization::for_problem(problem, n, config, settings.strict)
}

/// Growth reference for the Green's function energy: `N^2 sigma_x` for
/// anchors coarse in x, `N ln N` in the outflow layer.
pub fn scaling_bound(region: Region, n: usize, sigma_x: f64) -> f64 {
    let nf = n as f64;
    if region.is_x_refined() {
        nf * nf.ln()
    } else {
        nf * nf * sigma_x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub epsilon: f64,
    pub k: f64,
    pub placement: Placement,
    pub region: Region,
    pub enorm_sq: f64,
    pub wnorm_sq: f64,
    pub bound: f64,
    pub ratio: f64,
    /// `|G(x*)|` for the point-value estimate.
    pub point_val: f64,
    pub quadrature_rel_diff: f64,
}

impl ScalingRow {
    /// `8 |||G|||_w^2 - |||G|||^2`.
    pub fn margin(&self) -> f64 {
        8.0 * self.wnorm_sq - self.enorm_sq
    }

    /// Empirical constant `max(0, |G(x*)| - |||G|||_w^2 / 16) / bound`.
    pub fn point_constant(&self) -> f64 {
        (self.point_val.abs() - self.wnorm_sq / 16.0).max(0.0) / self.bound
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    pub failures: Vec<String>,
}

impl ScalingStudy {
    pub const HEADER: &'static str = "N,epsilon,k,region,enorm_sq,wnorm_sq,bound,ratio";

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.n,
                fmt17(r.epsilon),
                fmt17(r.k),
                r.region,
                fmt17(r.enorm_sq),
                fmt17(r.wnorm_sq),
                fmt17(r.bound),
                fmt17(r.ratio)
            )?;
        }
        Ok(())
    }

    /// Theorem-1 margins and point-value constants.
    pub fn write_margin_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "N,epsilon,k,region,margin,point_val,point_constant,quad_rel_diff"
        )?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.n,
                fmt17(r.epsilon),
                fmt17(r.k),
                r.region,
                fmt17(r.margin()),
                fmt17(r.point_val),
                fmt17(r.point_constant()),
                fmt17(r.quadrature_rel_diff)
            )?;
        }
        Ok(())
    }

    /// Rows for one placement, ordered by N.
    /// Rows whose weighted norm fails the quadrature agreement gate.
    pub fn quadrature_failures(&self) -> Vec<&ScalingRow> {
        self.rows
            .iter()
            .filter(|r| r.quadrature_rel_diff > QUADRATURE_GATE)
            .collect()
    }

    pub fn series(&self, placement: Placement) -> Vec<&ScalingRow> {
        let mut v: Vec<_> = self
            .rows
            .iter()
            .filter(|r| r.placement == placement)
            .collect();
        v.sort_by_key(|r| r.n);
        v
    }
}

fn scaling_rows(settings: &Settings, epsilon: f64, n: usize) -> Result<Vec<ScalingRow>> {
    let disc = discretization(settings, epsilon, n)?;
    let system = disc.assemble(settings.load_degree)?;
    let solver = SystemSolver::new(&system, settings.method)?;
    let mut rows = Vec::new();
    for &placement in &settings.placements {
        let star = placement.node(&disc.mesh);
        let region = placement.region(&disc.mesh)?;
        let (g, _) = solver.green(&system, &disc.mesh, star)?;
        let enorm_sq = energy_norm_sq(&disc, &g)?;
        let point_val = g.values[disc.mesh.node_index(star.0, star.1)];
        let star_xy = (disc.mesh.x_coords[star.0], disc.mesh.y_coords[star.1]);
        for &k in &settings.k {
            let spec = WeightSpec::new(star_xy, epsilon, n, k, settings.strict)?;
            let w = weighted_energy_norm_sq_unchecked(&g, &spec, &disc, settings.quad_degree)?;
            let bound = scaling_bound(region, n, spec.sigma_x);
            rows.push(ScalingRow {
                n,
                epsilon,
                k,
                placement,
                region,
                enorm_sq,
                wnorm_sq: w.value,
                bound,
                ratio: enorm_sq / bound,
                point_val,
                quadrature_rel_diff: w.rel_diff(),
            });
        }
    }
    Ok(rows)
}

/// Green's function energy growth over every `(eps, N)` pair of the settings.
/// Study points run concurrently; rows come back in settings order and a
/// failing point is recorded without stopping the others.
pub fn green_scaling_study(settings: &Settings) -> ScalingStudy {
    let points: Vec<(f64, usize)> = settings
        .epsilon
        .iter()
        .flat_map(|&e| settings.n.iter().map(move |&n| (e, n)))
        .collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(e, n)| (e, n, scaling_rows(settings, e, n)))
        .collect();
    let mut study = ScalingStudy::default();
    for (e, n, r) in results {
        match r {
            Ok(rows) => study.rows.extend(rows),
            Err(err) => study.failures.push(format!("eps={e}, N={n}: {err}")),
        }
    }
    study
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoercivityEntry {
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub min_ratio: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoercivityReport {
    pub entries: Vec<CoercivityEntry>,
}

impl CoercivityReport {
    pub const THRESHOLD: f64 = 0.5 - 1e-10;

    pub fn min_ratio(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.min_ratio)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn passed(&self) -> bool {
        self.min_ratio() >= Self::THRESHOLD
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "N,epsilon,trials,min_ratio")?;
        for e in &self.entries {
            writeln!(
                w,
                "{},{},{},{}",
                e.n,
                fmt17(e.epsilon),
                e.trials,
                fmt17(e.min_ratio)
            )?;
        }
        Ok(())
    }
}

/// `a_SD(v, v) / |||v|||^2` for one nodal vector.
pub fn coercivity_ratio(disc: &Discretization, v: &FEFunction) -> Result<f64> {
    Ok(disc.bilinear(v, v)? / energy_norm_sq(disc, v)?)
}

/// Minimum of `a_SD(v, v) / |||v|||^2` over seeded random interior vectors
/// (uniform in `[-1, 1]`) for each `(eps, N)` of the settings.
pub fn coercivity_check(settings: &Settings) -> Result<CoercivityReport> {
    let mut entries = Vec::new();
    for &epsilon in &settings.epsilon {
        for &n in &settings.n {
            let disc = discretization(settings, epsilon, n)?;
            let mut rng = row_rng(settings.seed, epsilon, n);
            let mut min_ratio = f64::INFINITY;
            for _ in 0..settings.trials {
                let mut v = FEFunction::zeros(&disc.mesh);
                for node in 0..disc.mesh.num_nodes() {
                    if !disc.mesh.is_boundary_node(node) {
                        v.values[node] = rng.gen_range(-1.0..1.0);
                    }
                }
                min_ratio = min_ratio.min(coercivity_ratio(&disc, &v)?);
            }
            entries.push(CoercivityEntry {
                n,
                epsilon,
                trials: settings.trials,
                min_ratio,
            });
        }
    }
    Ok(CoercivityReport { entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub epsilon: f64,
    pub k: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    pub region: Region,
    pub quantities: LemmaQuantities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSweep {
    pub rows: Vec<SweepRow>,
}

impl KSweep {
    pub const HEADER: &'static str =
        "N,epsilon,k,sigma_x,sigma_y,a_w,point_val,defect,wnorm_sq,enorm_sq,lemma4_ratio,lemma6_ratio";

    /// Smallest `k` of the sweep from which on both
    /// `a_w / |||G|||_w^2 >= 1/4` and `|defect| / |||G|||_w^2 <= 1/16` hold.
    pub fn threshold(&self) -> Option<f64> {
        let mut k0 = None;
        for r in self.rows.iter().rev() {
            let q = &r.quantities;
            if q.coercivity_ratio() >= 0.25 && q.defect_ratio() <= 1.0 / 16.0 {
                k0 = Some(r.k);
            } else {
                break;
            }
        }
        k0
    }

    /// Rows whose weighted integrals fail the quadrature agreement gate.
    pub fn quadrature_failures(&self) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.quantities.quadrature_rel_diff > QUADRATURE_GATE)
            .collect()
    }

    pub fn row(&self, k: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", Self::HEADER)?;
        for r in &self.rows {
            let q = &r.quantities;
            let fields = [
                r.k,
                r.sigma_x,
                r.sigma_y,
                q.a_w,
                q.point_val,
                q.defect,
                q.weighted_norm_sq,
                q.energy_norm_sq,
                q.coercivity_ratio(),
                q.defect_ratio(),
            ]
            .map(fmt17);
            writeln!(w, "{},{},{}", r.n, fmt17(r.epsilon), fields.join(","))?;
        }
        Ok(())
    }
}

/// Lemma quantities of one Green's function over the `k` grid (ascending).
pub fn k_sweep(
    settings: &Settings,
    epsilon: f64,
    n: usize,
    placement: Placement,
) -> Result<KSweep> {
    let disc = discretization(settings, epsilon, n)?;
    let system = disc.assemble(settings.load_degree)?;
    let solver = SystemSolver::new(&system, settings.method)?;
    let star = placement.node(&disc.mesh);
    let region = placement.region(&disc.mesh)?;
    let (g, _) = solver.green(&system, &disc.mesh, star)?;
    let star_xy = (disc.mesh.x_coords[star.0], disc.mesh.y_coords[star.1]);
    let mut ks = settings.k.clone();
    ks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rows = ks
        .iter()
        .map(|&k| {
            let spec = WeightSpec::new(star_xy, epsilon, n, k, settings.strict)?;
            Ok(SweepRow {
                n,
                epsilon,
                k,
                sigma_x: spec.sigma_x,
                sigma_y: spec.sigma_y,
                region,
                quantities: lemma_quantities_unchecked(&g, &spec, &disc, settings.quad_degree)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KSweep { rows })
}
