use fracheat_core::*;
use proptest::prelude::*;

fn unit(theta: f64) -> Vec<f64> {
    vec![theta.cos(), theta.sin()]
}

proptest! {
    #[test]
    fn reflection_is_an_isometry(th in 0.0..6.3f64, lam in -2.0..2.0f64,
        x in prop::array::uniform2(-5.0..5.0f64), y in prop::array::uniform2(-5.0..5.0f64)) {
        let cfg = PlaneConfig::new(unit(th), lam).unwrap();
        let (rx, ry) = (reflect(&x, &cfg), reflect(&y, &cfg));
        let d = ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        let dr = ((rx[0] - ry[0]).powi(2) + (rx[1] - ry[1]).powi(2)).sqrt();
        prop_assert!((d - dr).abs() <= 1e-12);
    }

    #[test]
    fn mirror_points_are_farther(th in 0.0..6.3f64, lam in -2.0..2.0f64,
        a in prop::array::uniform2(-5.0..5.0f64), b in prop::array::uniform2(-5.0..5.0f64)) {
        let cfg = PlaneConfig::new(unit(th), lam).unwrap();
        prop_assume!(cfg.in_half_space(&a) && cfg.in_half_space(&b));
        let yl = reflect(&b, &cfg);
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        let dl = ((a[0] - yl[0]).powi(2) + (a[1] - yl[1]).powi(2)).sqrt();
        prop_assert!(d < dl);
    }

    #[test]
    fn w_lambda_is_antisymmetric_on_pairs(vals in prop::collection::vec(-1.0..1.0f64, 7 * 7),
        j in 1i64..8, axis in 0usize..2, sign in prop::bool::ANY) {
        let k = 4i64;
        let h = 0.25;
        let mut nodes = Vec::new();
        for a in -k + 1..k {
            for b in -k + 1..k {
                nodes.push(vec![a, b]);
            }
        }
        let u = Solution::from_values(nodes, vals, h);
        let lambda = -(j as f64) * h / 2.0;
        let cfg = PlaneConfig::axis(2, axis, if sign { 1.0 } else { -1.0 }, lambda);
        let data = w_lambda_field(&u, &cfg).unwrap();
        for (idx, &w) in data.nodes.iter().zip(&data.w_values) {
            let r = data.reflected_index(idx);
            prop_assert_eq!(w, u.node_value(&r) - u.node_value(idx));
            prop_assert_eq!(w + (u.node_value(idx) - u.node_value(&r)), 0.0);
        }
    }
}

fn torsion_solution(shift: f64) -> (BallProblem, Solution) {
    let p = FracParams::new(1, 0.5).unwrap();
    let prob = BallProblem::new(p, 1.0 / 64.0, Nonlinearity::one()).unwrap();
    let asm = assemble_dirichlet_matrix(&prob, &QuadratureScheme::default()).unwrap();
    let sol = solve_steady(&prob, &asm, &PicardConfig::default()).unwrap();
    if shift == 0.0 {
        return (prob, sol);
    }
    let g = profiles::shifted_torsion(1, 0.5, &[shift]);
    let vals = sol.nodes.iter().map(|i| g.eval(&prob.coords(i))).collect();
    let shifted = Solution::from_values(sol.nodes.clone(), vals, sol.h);
    (prob, shifted)
}

#[test]
fn torsion_solution_moving_plane_diagnostics() {
    let (prob, sol) = torsion_solution(0.0);
    let data = w_lambda_field(&sol, &PlaneConfig::axis(1, 0, 1.0, -0.5)).unwrap();
    for (idx, &w) in data.nodes.iter().zip(&data.w_values) {
        let x = prob.coords(idx)[0];
        assert!(w >= 0.0);
        if x > -1.0 + 1e-12 && x < -0.5 - 1e-12 {
            assert!(w > 0.0, "w({x}) = {w}");
        }
    }
    let res = residual_field(&prob, &sol, &QuadratureScheme::default()).unwrap();
    let tol = tol_geom_from_residual(&res);
    assert!(tol > 0.0 && tol < 0.05, "tol_geom {tol}");
    let rep = narrow_region_check(&sol, &[-0.9, -0.7, -0.5, -0.3, -0.1], &[1.0], tol).unwrap();
    assert!(rep.records.iter().all(|r| r.pass));
    assert!(rep.records.windows(2).all(|w| w[0].lambda < w[1].lambda));
    let sweep = narrow_region_check(&sol, &half_grid_sweep(sol.h), &[1.0], tol).unwrap();
    assert!(sweep.reaches_origin && sweep.lambda_star >= -sol.h);
    assert!(sweep.symmetry_defect <= 1e-12);
    assert_eq!(sweep.monotonicity_violations, 0);
}

#[test]
fn shifted_torsion_is_flagged() {
    let (prob, sol) = torsion_solution(0.0);
    let tol =
        tol_geom_from_residual(&residual_field(&prob, &sol, &QuadratureScheme::default()).unwrap());
    let (_, shifted) = torsion_solution(0.2);
    let rep = narrow_region_check(&shifted, &half_grid_sweep(shifted.h), &[-1.0], tol).unwrap();
    assert!(rep.records.iter().any(|r| !r.pass && r.min_w < -tol));
    assert!(!rep.reaches_origin);
}
