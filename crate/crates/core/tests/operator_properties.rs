use std::f64::consts::PI;

use fracheat_core::profiles::{plane_wave, space_bump, spacetime_cutoff, time_cutoff};
use fracheat_core::{
    fractional_laplacian_pointwise, marchaud_left, marchaud_right, master_operator_pointwise,
    truncation_tail_bound, FracParams, QuadratureScheme, SpaceField, SpaceTimeField,
    SpaceTimePoint, TimeField,
};
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

fn principal_pow(re: f64, im: f64, s: f64) -> (f64, f64) {
    let m = (re * re + im * im).sqrt();
    if m == 0.0 {
        return (0.0, 0.0);
    }
    let arg = im.atan2(re);
    let r = m.powf(s);
    (r * (s * arg).cos(), r * (s * arg).sin())
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn constants_are_annihilated(c in -2.0f64..2.0, s in 0.25f64..0.9, n in 1usize..=2) {
        let p = FracParams::new(n, s).unwrap();
        let sch = QuadratureScheme::default();
        let u = SpaceTimeField::constant(n, c);
        let q = SpaceTimePoint::new(vec![0.3; n], -0.2);
        let v = master_operator_pointwise(&u, &q, &p, &sch).unwrap();
        prop_assert!(v.value.abs() <= v.est_error);
        let g = SpaceField::new(n, move |_| c).with_sup_bound(c.abs()).with_length_scale(f64::INFINITY);
        let v = fractional_laplacian_pointwise(&g, &q.x, &p, &sch).unwrap();
        prop_assert!(v.value.abs() <= v.est_error);
        let h = TimeField::new(move |_| c).with_sup_bound(c.abs());
        let v = marchaud_left(&h, 0.7, s, &sch).unwrap();
        prop_assert!(v.value.abs() <= v.est_error);
        let v = marchaud_right(&h, 0.7, s, &sch).unwrap();
        prop_assert!(v.value.abs() <= v.est_error);
    }

    #[test]
    fn master_operator_is_linear(
        a in -2.0f64..2.0, b in -2.0f64..2.0,
        c1 in -0.5f64..0.5, c2 in -0.5f64..0.5,
        x in -0.4f64..0.4, t in -0.2f64..0.2,
    ) {
        let p = FracParams::new(1, 0.5).unwrap();
        let sch = QuadratureScheme::default();
        let u = spacetime_cutoff(&[c1], 0.0, 1.0);
        let v = spacetime_cutoff(&[c2], 0.1, 0.8);
        let w = SpaceTimeField::combine(a, &u, b, &v).unwrap();
        let q = SpaceTimePoint::new(vec![x], t);
        let ou = master_operator_pointwise(&u, &q, &p, &sch).unwrap();
        let ov = master_operator_pointwise(&v, &q, &p, &sch).unwrap();
        let ow = master_operator_pointwise(&w, &q, &p, &sch).unwrap();
        let budget = 2.0 * (ow.est_error + a.abs() * ou.est_error + b.abs() * ov.est_error);
        prop_assert!((ow.value - a * ou.value - b * ov.value).abs() <= budget);
    }

    #[test]
    fn time_reversal_duality(t0 in -1.0f64..1.0, w in 0.5f64..2.0, s in 0.25f64..0.8, t in -0.5f64..0.5) {
        let sch = QuadratureScheme::default();
        let psi = time_cutoff(t0, w, 1.0);
        let right = marchaud_right(&psi, t, s, &sch).unwrap();
        let left = marchaud_left(&psi.reflected_about(t), t, s, &sch).unwrap();
        prop_assert!((right.value - left.value).abs() <= 2.0 * sch.target_tol);
    }

    #[test]
    fn time_independent_reduction(
        c in -0.5f64..0.5, r in 0.5f64..1.5, amp in 0.2f64..2.0, x in -0.5f64..0.5, s in 0.25f64..0.8,
    ) {
        let p = FracParams::new(1, s).unwrap();
        let sch = QuadratureScheme::default();
        let g = space_bump(&[c], r, amp);
        let fl = fractional_laplacian_pointwise(&g, &[x], &p, &sch).unwrap();
        let m = master_operator_pointwise(&g.extend_in_time(), &SpaceTimePoint::new(vec![x], 0.3), &p, &sch).unwrap();
        prop_assert!((fl.value - m.value).abs() <= fl.est_error + m.est_error,
            "fl {:?} master {:?}", fl, m);
    }

    #[test]
    fn space_independent_reduction(t0 in -1.0f64..1.0, w in 0.5f64..2.0, s in 0.25f64..0.8, t in -0.5f64..0.5) {
        let p = FracParams::new(2, s).unwrap();
        let sch = QuadratureScheme::default();
        let h = time_cutoff(t0, w, 1.5);
        let ml = marchaud_left(&h, t, s, &sch).unwrap();
        let m = master_operator_pointwise(&h.extend_in_space(2), &SpaceTimePoint::new(vec![0.1, 0.2], t), &p, &sch).unwrap();
        prop_assert!((ml.value - m.value).abs() <= ml.est_error + m.est_error);
    }

    #[test]
    fn tail_bound_is_sound_for_waves(
        a in -1.0f64..1.0, xi1 in -1.0f64..1.0, xi2 in -1.0f64..1.0,
        rho1 in -1.0f64..1.0, rho2 in -1.0f64..1.0, s in 0.3f64..0.8,
    ) {
        let p = FracParams::new(1, s).unwrap();
        let u = SpaceTimeField::combine(0.5, &plane_wave(&[xi1], rho1), a, &plane_wave(&[xi2], rho2)).unwrap();
        let q = SpaceTimePoint::new(vec![0.1], 0.0);
        let big = QuadratureScheme { r_max: 2e3, target_tol: 10.0, ..QuadratureScheme::default() };
        let small = QuadratureScheme { r_max: 1e3, ..big };
        let hi = master_operator_pointwise(&u, &q, &p, &big).unwrap();
        let lo = master_operator_pointwise(&u, &q, &p, &small).unwrap();
        let bound = truncation_tail_bound(u.sup_bound.unwrap(), small.r_max, s);
        prop_assert!((hi.value - lo.value).abs() <= bound);
    }

    #[test]
    fn tail_bound_is_sound_for_bumps(c in -0.5f64..0.5, r in 0.5f64..1.5, amp in 0.2f64..2.0, s in 0.3f64..0.8) {
        let p = FracParams::new(1, s).unwrap();
        let u = space_bump(&[c], r, amp).extend_in_time();
        let q = SpaceTimePoint::new(vec![0.1], 0.0);
        let big = QuadratureScheme { r_max: 2e4, target_tol: 10.0, ..QuadratureScheme::default() };
        let small = QuadratureScheme { r_max: 1e4, ..big };
        let hi = master_operator_pointwise(&u, &q, &p, &big).unwrap();
        let lo = master_operator_pointwise(&u, &q, &p, &small).unwrap();
        let bound = truncation_tail_bound(amp, small.r_max, s);
        prop_assert!((hi.value - lo.value).abs() <= bound);
    }
}

#[test]
fn plane_waves_match_principal_symbol() {
    // the a-priori tail bound at r_max = 1e4 is loose for small s
    let sch = QuadratureScheme {
        r_max: 1e4,
        target_tol: 0.5,
        ..QuadratureScheme::default()
    };
    for s in [0.25, 0.5, 0.75] {
        let p = FracParams::new(1, s).unwrap();
        for xi in [-1.0, 0.0, 1.0] {
            for rho in [-1.0, 0.0, 1.0] {
                if xi == 0.0 && rho == 0.0 {
                    continue;
                }
                let u = plane_wave(&[xi], rho);
                let v =
                    master_operator_pointwise(&u, &SpaceTimePoint::new(vec![0.0], 0.0), &p, &sch)
                        .unwrap();
                let (want, _) = principal_pow(xi * xi, rho, s);
                let rel = (v.value - want).abs() / want.abs();
                assert!(rel <= 1e-3, "s={s} ξ={xi} ρ={rho}: {} vs {want}", v.value);
            }
        }
    }
}

#[test]
fn plane_wave_phase_is_respected() {
    // at x = π/4 the sine part of the symbol contributes
    let s = 0.5;
    let p = FracParams::new(1, s).unwrap();
    let sch = QuadratureScheme {
        r_max: 1e4,
        target_tol: 0.1,
        ..QuadratureScheme::default()
    };
    let u = plane_wave(&[1.0], 1.0);
    let x = PI / 4.0;
    let v = master_operator_pointwise(&u, &SpaceTimePoint::new(vec![x], 0.0), &p, &sch).unwrap();
    let (re, im) = principal_pow(1.0, 1.0, s);
    let want = re * x.cos() - im * x.sin();
    assert!((v.value - want).abs() < 1e-3, "{} vs {want}", v.value);
}

#[test]
fn two_dimensional_plane_wave() {
    let p = FracParams::new(2, 0.5).unwrap();
    let sch = QuadratureScheme {
        r_max: 1e2,
        target_tol: 0.2,
        ..QuadratureScheme::default()
    };
    let u = plane_wave(&[1.0, -1.0], 0.5);
    let v =
        master_operator_pointwise(&u, &SpaceTimePoint::new(vec![0.0, 0.0], 0.0), &p, &sch).unwrap();
    let (want, _) = principal_pow(2.0, 0.5, 0.5);
    assert!(
        (v.value - want).abs() / want < 1e-3,
        "{} vs {want}",
        v.value
    );
}

fn local_heat_fd(u: &SpaceTimeField, x: f64, t: f64) -> f64 {
    let h = 1e-3;
    let ut = (u.eval(&[x], t + h) - u.eval(&[x], t - h)) / (2.0 * h);
    let uxx = (u.eval(&[x + h], t) - 2.0 * u.eval(&[x], t) + u.eval(&[x - h], t)) / (h * h);
    ut - uxx
}

#[test]
fn local_limit_as_order_tends_to_one() {
    let u = spacetime_cutoff(&[0.0], 0.0, 1.0);
    let (x, t) = (0.2, 0.1);
    let target = local_heat_fd(&u, x, t);
    let sch = QuadratureScheme::default();
    let mut errs = Vec::new();
    for s in [0.9, 0.95, 0.99] {
        let p = FracParams::new(1, s).unwrap();
        let v = master_operator_pointwise(&u, &SpaceTimePoint::new(vec![x], t), &p, &sch).unwrap();
        errs.push((v.value - target).abs());
    }
    assert!(
        errs[0] > errs[1] && errs[1] > errs[2],
        "{errs:?} target {target}"
    );
}
