//! One function per CLI subcommand. Each writes its files under `settings.out`
//! and returns an [`Outcome`] whose `passed` flag drives the exit code.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::studies::discretization;
use super::{coercivity_check, fmt17, green_scaling_study, k_sweep, Placement, Settings};
use crate::error::{Error, Result};
use crate::mesh::{Region, ShishkinMesh};
use crate::norms::{energy_error, interpolation_error_report, CHECK_DEGREE};
use crate::problem::SineProduct;
use crate::solver::SystemSolver;
use crate::weight::{weight_property_report, WeightSpec, QUADRATURE_GATE};

/// Identity residual allowed for the lemma quantities.
pub const DUALITY_GATE: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub passed: bool,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            ..Default::default()
        }
    }

    fn say(&mut self, line: impl Into<String>) {
        self.lines.push(line.into());
    }

    fn fail(&mut self, line: impl Into<String>) {
        self.passed = false;
        self.lines.push(format!("FAIL: {}", line.into()));
    }

    fn create(&mut self, dir: &Path, name: &str) -> Result<BufWriter<File>> {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let f = File::create(&path)?;
        self.files.push(path);
        Ok(BufWriter::new(f))
    }
}

/// Anchor nodes: an explicit `(i, j)` wins over the placement list.
fn anchors(settings: &Settings, star: Option<(usize, usize)>) -> Vec<Placement> {
    match star {
        Some((i, j)) => vec![Placement::Explicit(i, j)],
        None => settings.placements.clone(),
    }
}

fn write_nodal<W: Write>(mut w: W, mesh: &ShishkinMesh, values: &[f64]) -> std::io::Result<()> {
    writeln!(w, "i,j,x,y,value")?;
    for (node, v) in values.iter().enumerate() {
        let (i, j) = mesh.node_ij(node);
        let (x, y) = mesh.node_coords(node);
        writeln!(w, "{i},{j},{},{},{}", fmt17(x), fmt17(y), fmt17(*v))?;
    }
    w.flush()
}

/// Nodes, triangles and the transition summary.
pub fn mesh(settings: &Settings) -> Result<Outcome> {
    let mut out = Outcome::new();
    let (eps, n) = (settings.first_epsilon(), settings.first_n());
    let mesh = ShishkinMesh::from_problem(eps, settings.beta, n, settings.strict)?;
    let t = &mesh.transition;
    let mut w = out.create(&settings.out, "nodes.csv")?;
    writeln!(w, "id,i,j,x,y")?;
    for node in 0..mesh.num_nodes() {
        let (i, j) = mesh.node_ij(node);
        let (x, y) = mesh.node_coords(node);
        writeln!(w, "{node},{i},{j},{},{}", fmt17(x), fmt17(y))?;
    }
    w.flush()?;
    let mut w = out.create(&settings.out, "triangles.csv")?;
    writeln!(w, "id,kind,i,j,v0,v1,v2,region")?;
    for (id, tri) in mesh.triangles.iter().enumerate() {
        let [v0, v1, v2] = tri.vertices;
        writeln!(
            w,
            "{id},{},{},{},{v0},{v1},{v2},{}",
            tri.kind.name(),
            tri.cell.0,
            tri.cell.1,
            tri.region
        )?;
    }
    w.flush()?;
    out.say(format!("N = {n}"));
    out.say(format!(
        "lambda_x = {}{}",
        fmt17(t.lambda_x),
        if t.capped_x { " (capped)" } else { "" }
    ));
    out.say(format!(
        "lambda_y = {}{}",
        fmt17(t.lambda_y),
        if t.capped_y { " (capped)" } else { "" }
    ));
    out.say(format!(
        "H_x = {}, h_x = {}",
        fmt17(mesh.coarse_hx()),
        fmt17(mesh.fine_hx())
    ));
    out.say(format!(
        "H_y = {}, h_y = {}",
        fmt17(mesh.coarse_hy()),
        fmt17(mesh.fine_hy())
    ));
    out.say(format!(
        "{} nodes, {} triangles",
        mesh.num_nodes(),
        mesh.triangles.len()
    ));
    Ok(out)
}

/// Assembles the system; with `dump`, writes `matrix.txt` and `load.csv`.
pub fn assemble(settings: &Settings, dump: bool) -> Result<Outcome> {
    let mut out = Outcome::new();
    let disc = discretization(settings, settings.first_epsilon(), settings.first_n())?;
    let system = disc.assemble(settings.load_degree)?;
    let (kl, ku) = system.matrix.bandwidths();
    out.say(format!(
        "dimension {}, nnz {}, bandwidths ({kl}, {ku})",
        system.dimension(),
        system.matrix.nnz()
    ));
    if dump {
        let mut w = out.create(&settings.out, "matrix.txt")?;
        for r in 0..system.matrix.nrows {
            for (c, v) in system.matrix.row(r) {
                writeln!(w, "{r} {c} {}", fmt17(v))?;
            }
        }
        w.flush()?;
        let mut w = out.create(&settings.out, "load.csv")?;
        writeln!(w, "row,node,value")?;
        for (r, (v, node)) in system.load.iter().zip(&system.dof_to_node).enumerate() {
            writeln!(w, "{r},{node},{}", fmt17(*v))?;
        }
        w.flush()?;
    }
    Ok(out)
}

/// Solves the configured problem for every `(eps, N)`; reports the energy error when the exact solution is known.
pub fn solve(settings: &Settings) -> Result<Outcome> {
    let mut out = Outcome::new();
    for &eps in &settings.epsilon {
        for &n in &settings.n {
            let disc = discretization(settings, eps, n)?;
            let system = disc.assemble(settings.load_degree)?;
            let solver = SystemSolver::new(&system, settings.method)?;
            let (u, report) = solver.solve(&system)?;
            let name = format!("solution_eps{eps:e}_N{n}.csv");
            write_nodal(out.create(&settings.out, &name)?, &disc.mesh, &u.values)?;
            let mut line = format!(
                "eps={eps:e} N={n}: residual {:.3e} ({}, {} it)",
                report.residual_inf, report.method, report.iterations
            );
            if let Some(exact) = &disc.problem.exact {
                let err = energy_error(&disc, exact.as_ref(), &u, settings.quad_degree)?;
                line.push_str(&format!(", energy error {}", fmt17(err)));
            }
            out.say(line);
        }
    }
    Ok(out)
}

/// Discrete Green's functions; gated on `||A^T G - e||_inf <= 1e-10`.
pub fn green(settings: &Settings, star: Option<(usize, usize)>) -> Result<Outcome> {
    let mut out = Outcome::new();
    for &eps in &settings.epsilon {
        for &n in &settings.n {
            let disc = discretization(settings, eps, n)?;
            let system = disc.assemble(settings.load_degree)?;
            let solver = SystemSolver::new(&system, settings.method)?;
            for placement in anchors(settings, star) {
                let (i, j) = placement.node(&disc.mesh);
                let region = placement.region(&disc.mesh)?;
                let (g, report) = solver.green(&system, &disc.mesh, (i, j))?;
                let name = format!("green_eps{eps:e}_N{n}_{i}_{j}.csv");
                write_nodal(out.create(&settings.out, &name)?, &disc.mesh, &g.values)?;
                let line = format!(
                    "eps={eps:e} N={n} star=({i},{j}) in {region}: residual {:.3e}, G(x*) = {}",
                    report.residual_inf,
                    fmt17(g.values[disc.mesh.node_index(i, j)])
                );
                if report.residual_inf <= 1e-10 {
                    out.say(line);
                } else {
                    out.fail(line);
                }
            }
        }
    }
    Ok(out)
}

/// Interpolation errors of `sin(pi x) sin(pi y)` against the anisotropic bounds,
/// integrated with the highest-degree rule.
pub fn interp_check(settings: &Settings) -> Result<Outcome> {
    let mut out = Outcome::new();
    let mut summary = out.create(&settings.out, "interp_summary.csv")?;
    writeln!(summary, "N,epsilon,region,elements,ratio,ratio_x,ratio_y")?;
    for &eps in &settings.epsilon {
        for &n in &settings.n {
            let mesh = ShishkinMesh::from_problem(eps, settings.beta, n, settings.strict)?;
            let report = interpolation_error_report(&SineProduct, &mesh, settings.p, CHECK_DEGREE)?;
            let mut w = out.create(&settings.out, &format!("interp_eps{eps:e}_N{n}.csv"))?;
            writeln!(
                w,
                "element,region,err,err_x,err_y,bound,bound_x,bound_y,ratio,ratio_x,ratio_y"
            )?;
            for e in &report.elements {
                let nums: Vec<String> = e
                    .errors
                    .iter()
                    .chain(&e.bounds)
                    .chain(&e.ratios)
                    .map(|v| fmt17(*v))
                    .collect();
                writeln!(w, "{},{},{}", e.element, e.region, nums.join(","))?;
            }
            w.flush()?;
            for region in Region::ALL {
                let count = report
                    .elements
                    .iter()
                    .filter(|e| e.region == region)
                    .count();
                if let Some(r) = report.max_ratios(region) {
                    writeln!(
                        summary,
                        "{n},{},{region},{count},{},{},{}",
                        fmt17(eps),
                        fmt17(r[0]),
                        fmt17(r[1]),
                        fmt17(r[2])
                    )?;
                    out.say(format!(
                        "eps={eps:e} N={n} {region}: max ratios {:.4} {:.4} {:.4}",
                        r[0], r[1], r[2]
                    ));
                }
            }
        }
    }
    summary.flush()?;
    Ok(out)
}

/// Weight-function property checks; violations of positivity, the upper
/// bound or the sign of `(1/omega)_x` fail the command.
pub fn weights(settings: &Settings, star: Option<(usize, usize)>) -> Result<Outcome> {
    let mut out = Outcome::new();
    let mut w = out.create(&settings.out, "weights.csv")?;
    writeln!(
        w,
        "N,epsilon,k,star_i,star_j,sigma_x,sigma_y,omega_min,omega_max,omega_at_star,max_inverse_ratio,max_inverse_dx_ratio,max_ratio_over_lipschitz,c10,c01,c20,c11,c02,cx10,cx20,cx11,min_omega_near_star"
    )?;
    for &eps in &settings.epsilon {
        for &n in &settings.n {
            let mesh = ShishkinMesh::from_problem(eps, settings.beta, n, settings.strict)?;
            for placement in anchors(settings, star) {
                let (i, j) = placement.node(&mesh);
                placement.region(&mesh)?;
                let xy = (mesh.x_coords[i], mesh.y_coords[j]);
                for &k in &settings.k {
                    let spec = WeightSpec::new(xy, eps, n, k, settings.strict)?;
                    let tag = format!("eps={eps:e} N={n} star=({i},{j}) k={k}");
                    match weight_property_report(&spec, &mesh, settings.density) {
                        Ok(r) => {
                            let mut nums = vec![
                                spec.sigma_x,
                                spec.sigma_y,
                                r.omega_min,
                                r.omega_max,
                                r.omega_at_star,
                                r.max_inverse_ratio,
                                r.max_inverse_dx_ratio,
                                r.max_ratio_over_lipschitz,
                            ];
                            nums.extend(r.derivative_constants);
                            nums.extend(r.x_derivative_constants);
                            nums.push(r.min_omega_near_star);
                            let nums: Vec<String> = nums.into_iter().map(fmt17).collect();
                            writeln!(w, "{n},{},{k},{i},{j},{}", fmt17(eps), nums.join(","))?;
                            let line = format!(
                                "{tag}: omega in [{:.4}, {:.4}], omega(x*) = {}, ratio/lipschitz {:.4}",
                                r.omega_min,
                                r.omega_max,
                                fmt17(r.omega_at_star),
                                r.max_ratio_over_lipschitz
                            );
                            if (r.omega_at_star - 1.0).abs() <= 1e-14 {
                                out.say(line);
                            } else {
                                out.fail(line);
                            }
                        }
                        Err(e @ Error::WeightProperty(_)) => out.fail(format!("{tag}: {e}")),
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(out)
}

/// `k` sweep of the lemma quantities; gated on the duality identity and the quadrature agreement.
pub fn lemmas(settings: &Settings, star: Option<(usize, usize)>) -> Result<Outcome> {
    let mut out = Outcome::new();
    let mut w = out.create(&settings.out, "lemmas.csv")?;
    let mut header_written = false;
    for &eps in &settings.epsilon {
        for &n in &settings.n {
            for placement in anchors(settings, star) {
                let sweep = k_sweep(settings, eps, n, placement)?;
                let mut buf = Vec::new();
                sweep.write_csv(&mut buf)?;
                let text = String::from_utf8_lossy(&buf);
                let body = if header_written {
                    text.split_once('\n').map(|(_, b)| b).unwrap_or("")
                } else {
                    &text
                };
                w.write_all(body.as_bytes())?;
                header_written = true;
                let k0 = sweep
                    .threshold()
                    .map_or("none".to_string(), |k| k.to_string());
                out.say(format!("eps={eps:e} N={n} {placement}: k0 = {k0}"));
                for r in &sweep.rows {
                    let q = &r.quantities;
                    if q.duality_residual() > DUALITY_GATE {
                        out.fail(format!(
                            "k={}: duality residual {:.3e}",
                            r.k,
                            q.duality_residual()
                        ));
                    }
                    if q.quadrature_rel_diff > QUADRATURE_GATE {
                        out.fail(format!(
                            "k={}: quadrature disagreement {:.3e}",
                            r.k, q.quadrature_rel_diff
                        ));
                    }
                }
            }
        }
    }
    w.flush()?;
    Ok(out)
}

/// Green's function energy scaling study; gated on the `8 |||G|||_w^2 >= |||G|||^2`
/// margin and the quadrature agreement.
pub fn study(settings: &Settings) -> Result<Outcome> {
    let mut out = Outcome::new();
    let study = green_scaling_study(settings);
    study.write_csv(out.create(&settings.out, "scaling.csv")?)?;
    study.write_margin_csv(out.create(&settings.out, "scaling_margin.csv")?)?;
    for f in &study.failures {
        out.fail(f.clone());
    }
    for r in study.quadrature_failures() {
        out.fail(format!(
            "eps={:e} N={} k={} {}: quadrature disagreement {:.3e}",
            r.epsilon, r.n, r.k, r.placement, r.quadrature_rel_diff
        ));
    }
    for r in &study.rows {
        let line = format!(
            "eps={:e} N={} k={} {}: ratio {:.4e}, margin {:.4e}",
            r.epsilon,
            r.n,
            r.k,
            r.region,
            r.ratio,
            r.margin()
        );
        if r.margin() < 0.0 {
            out.fail(line);
        } else {
            out.say(line);
        }
    }
    Ok(out)
}

/// Empirical coercivity constant over seeded random vectors.
pub fn coercivity(settings: &Settings) -> Result<Outcome> {
    let mut out = Outcome::new();
    let report = coercivity_check(settings)?;
    report.write_csv(out.create(&settings.out, "coercivity.csv")?)?;
    for e in &report.entries {
        out.say(format!(
            "eps={:e} N={}: min ratio {} over {} trials",
            e.epsilon,
            e.n,
            fmt17(e.min_ratio),
            e.trials
        ));
    }
    if !report.passed() {
        out.fail(format!("min ratio {} below 1/2", report.min_ratio()));
    }
    Ok(out)
}

/// SVG plot of two CSV columns.
pub fn plot(
    csv: &Path,
    svg: &Path,
    x_column: &str,
    y_column: &str,
    log_x: bool,
    log_y: bool,
) -> Result<Outcome> {
    let mut out = Outcome::new();
    if let Some(dir) = svg.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let count = super::emit_plot(csv, svg, x_column, y_column, log_x, log_y)?;
    out.files.push(svg.to_path_buf());
    out.say(format!("{count} points"));
    Ok(out)
}
