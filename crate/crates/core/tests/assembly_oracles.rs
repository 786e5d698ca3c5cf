use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sdfem_green::assembly::{element_matrix, Discretization, FEFunction, StabilizationConfig};
use sdfem_green::mesh::ElementGeometry;
use sdfem_green::norms::energy_norm_sq;
use sdfem_green::problem::ProblemSpec;
use sdfem_green::quadrature::{integrate_with, triangle_rule};
use sdfem_green::solver::solve_system;

fn disc(eps: f64, n: usize) -> Discretization {
    let p = ProblemSpec::preset("manufactured-sine", eps, 1.0, 1.0, 1.0).unwrap();
    Discretization::for_problem(p, n, StabilizationConfig::default(), true).unwrap()
}

fn random_interior(d: &Discretization, rng: &mut ChaCha8Rng) -> FEFunction {
    let mut f = FEFunction::zeros(&d.mesh);
    for node in 0..d.mesh.num_nodes() {
        if !d.mesh.is_boundary_node(node) {
            f.values[node] = rng.gen_range(-1.0..1.0);
        }
    }
    f
}

/// `a_SD(u, v)` integrated pointwise from the two P1 functions.
fn brute_force_form(d: &Discretization, u: &FEFunction, v: &FEFunction) -> f64 {
    let rule = triangle_rule(4).unwrap();
    let (eps, b, c) = (d.problem.epsilon, d.problem.b, d.problem.c);
    d.mesh
        .triangles
        .iter()
        .map(|t| {
            let g = d.mesh.geometry(t);
            let (gu, gv) = (u.gradient(t, &g), v.gradient(t, &g));
            let delta = d.delta(t);
            integrate_with(rule, &g, |bary, _, _| {
                let (uv, vv) = (u.eval_bary(t, bary), v.eval_bary(t, bary));
                eps * (gu[0] * gv[0] + gu[1] * gv[1])
                    + (b * gu[0] + c * uv) * vv
                    + delta * (b * gu[0] + c * uv) * b * gv[0]
            })
        })
        .sum()
}

fn brute_force_energy(d: &Discretization, v: &FEFunction) -> f64 {
    let rule = triangle_rule(4).unwrap();
    let (eps, b, c) = (d.problem.epsilon, d.problem.b, d.problem.c);
    d.mesh
        .triangles
        .iter()
        .map(|t| {
            let g = d.mesh.geometry(t);
            let gv = v.gradient(t, &g);
            let delta = d.delta(t);
            integrate_with(rule, &g, |bary, _, _| {
                let vv = v.eval_bary(t, bary);
                eps * (gv[0] * gv[0] + gv[1] * gv[1]) + c * vv * vv + delta * b * b * gv[0] * gv[0]
            })
        })
        .sum()
}

#[test]
fn bilinear_form_matches_pointwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (eps, n) in [(1e-3, 12), (1e-4, 24), (1e-8, 36)] {
        let d = disc(eps, n);
        for _ in 0..5 {
            let (u, v) = (random_interior(&d, &mut rng), random_interior(&d, &mut rng));
            let oracle = brute_force_form(&d, &u, &v);
            let fast = d.bilinear(&u, &v).unwrap();
            assert!(
                (oracle - fast).abs() <= 1e-12 * oracle.abs().max(1.0),
                "{oracle} vs {fast}"
            );
            let e_oracle = brute_force_energy(&d, &v);
            let e_fast = energy_norm_sq(&d, &v).unwrap();
            assert!(
                (e_oracle - e_fast).abs() <= 1e-12 * e_oracle,
                "{e_oracle} vs {e_fast}"
            );
        }
    }
}

#[test]
fn hat_functions_reproduce_matrix_entries() {
    let d = disc(1e-4, 12);
    let system = d.assemble(4).unwrap();
    for r in (0..system.dimension()).step_by(7) {
        for (col, value) in system.matrix.row(r) {
            let test = FEFunction::hat(&d.mesh, system.dof_to_node[r]);
            let trial = FEFunction::hat(&d.mesh, system.dof_to_node[col]);
            let oracle = brute_force_form(&d, &trial, &test);
            assert!((oracle - value).abs() <= 1e-12 * value.abs().max(1e-6));
        }
    }
}

#[test]
fn solution_satisfies_galerkin_equations() {
    let d = disc(1e-4, 24);
    let system = d.assemble(4).unwrap();
    let (u, _) = solve_system(&system).unwrap();
    let scale = system.load.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (dof, &node) in system.dof_to_node.iter().enumerate() {
        let phi = FEFunction::hat(&d.mesh, node);
        let lhs = d.bilinear(&u, &phi).unwrap();
        assert!((lhs - system.load[dof]).abs() <= 1e-10 * (1.0 + scale));
    }
}

#[test]
fn convection_is_antisymmetric() {
    let d = disc(1e-4, 12);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let v = random_interior(&d, &mut rng);
        let s: f64 = d
            .mesh
            .triangles
            .iter()
            .map(|t| {
                let m = element_matrix(&d.mesh.geometry(t), 0.0, 0.0, 1.7, 0.0);
                let vl = v.local_values(t);
                (0..3)
                    .flat_map(|a| (0..3).map(move |b| (a, b)))
                    .map(|(a, b)| vl[a] * m[a][b] * vl[b])
                    .sum::<f64>()
            })
            .sum();
        assert!(s.abs() < 1e-13, "{s}");
    }
}

fn triangle() -> impl Strategy<Value = [[f64; 2]; 3]> {
    prop::array::uniform3(prop::array::uniform2(-2.0..2.0f64)).prop_filter("degenerate", |c| {
        let det =
            (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
        det.abs() > 1e-3
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn closed_form_matches_quadrature(
        coords in triangle(),
        delta in 0.0..0.2f64,
        log_eps in -8.0..0.0f64,
        b in 0.5..3.0f64,
        c in 0.1..3.0f64,
    ) {
        let eps = 10f64.powf(log_eps);
        let geom = ElementGeometry::from_coords(coords);
        let m = element_matrix(&geom, delta, eps, b, c);
        let rule = triangle_rule(10).unwrap();
        let g = geom.grads;
        let scale = m.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
        for a in 0..3 {
            for bb in 0..3 {
                let q = integrate_with(rule, &geom, |bary, _, _| {
                    eps * (g[bb][0] * g[a][0] + g[bb][1] * g[a][1])
                        + (b * g[bb][0] + c * bary[bb]) * (bary[a] + delta * b * g[a][0])
                });
                prop_assert!((q - m[a][bb]).abs() <= 1e-12 * scale);
            }
        }
    }
}
