use proptest::prelude::*;
use sdfem_green::mesh::{classify_point, transition_params, ShishkinMesh, TriangleKind};

fn mesh_inputs() -> impl Strategy<Value = (usize, f64)> {
    (1usize..=16).prop_flat_map(|m| {
        let n = 6 * m;
        // eps small enough that neither transition point is capped
        let top = (1.0 / n as f64)
            .min(1.0 / (7.5 * (n as f64).ln()).powi(2))
            .log10();
        (Just(n), (-9.0..top).prop_map(|e: f64| 10f64.powf(e)))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn builds_are_bit_identical((n, eps) in mesh_inputs()) {
        let a = ShishkinMesh::from_problem(eps, 1.0, n, true).unwrap();
        let b = ShishkinMesh::from_problem(eps, 1.0, n, true).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn step_sizes_take_two_values((n, eps) in mesh_inputs()) {
        let m = ShishkinMesh::from_problem(eps, 1.0, n, true).unwrap();
        let (hx_c, hx_f, hy_c, hy_f) = (m.coarse_hx(), m.fine_hx(), m.coarse_hy(), m.fine_hy());
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-15;
        for w in m.x_coords.windows(2) {
            let h = w[1] - w[0];
            prop_assert!(h > 0.0 && (close(h, hx_c) || close(h, hx_f)));
        }
        for w in m.y_coords.windows(2) {
            let h = w[1] - w[0];
            prop_assert!(h > 0.0 && (close(h, hy_c) || close(h, hy_f)));
        }
        let nf = n as f64;
        for big in [hx_c, hy_c] {
            prop_assert!(big >= 1.0 / nf - 1e-15 && big <= 3.0 / nf + 1e-15);
        }
    }

    #[test]
    fn regions_are_consistent((n, eps) in mesh_inputs()) {
        let m = ShishkinMesh::from_problem(eps, 1.0, n, true).unwrap();
        let mut area = 0.0;
        for pair in m.triangles.chunks(2) {
            prop_assert_eq!(pair[0].kind, TriangleKind::K1);
            prop_assert_eq!(pair[1].kind, TriangleKind::K2);
            prop_assert_eq!(pair[0].region, pair[1].region);
        }
        for t in &m.triangles {
            let g = m.geometry(t);
            let (x, y) = g.barycenter();
            prop_assert_eq!(classify_point(&m.transition, x, y).unwrap(), t.region);
            prop_assert!(g.area > 0.0);
            area += g.area;
        }
        prop_assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transition_nodes_are_exact((n, eps) in mesh_inputs()) {
        let t = transition_params(eps, 1.0, n, 2.5, true).unwrap();
        let m = ShishkinMesh::build(&t).unwrap();
        prop_assert_eq!(m.x_coords[n / 2], 1.0 - t.lambda_x);
        prop_assert_eq!(m.y_coords[n / 3], t.lambda_y);
        prop_assert_eq!(m.y_coords[2 * n / 3], 1.0 - t.lambda_y);
        prop_assert_eq!(m.x_coords[n], 1.0);
    }
}
