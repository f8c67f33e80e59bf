//! Scenario dispatch. Module errors end the run and land in the report.

use std::time::Instant;

use fracheat_core::profiles::{
    gaussian_bump, plane_wave, polynomial_cutoff, shifted_torsion, space_bump, time_cutoff,
    torsion_constant, torsion_profile,
};
use fracheat_core::{
    assemble_dirichlet_matrix, fractional_laplacian_pointwise, half_grid_sweep,
    liouville_nullspace_dimension, marchaud_left, master_operator_pointwise, min_nonzero_symbol,
    narrow_region_check, probe_sample_points, project_onto_kernel, random_antisymmetric_field,
    residual_field, solve_steady, spacetime_symbol, tol_geom_from_residual, unbounded_mp_probe,
    verify_lemma_scaling, BallProblem, Complex64, CutoffKind, Error, FracParams, GridField,
    Nonlinearity, PlaneConfig, QuadratureScheme, Solution, SpaceTimeField, SpaceTimePoint,
    TorusGrid,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{GridSpec, Scenario, ScenarioConfig};
use crate::output::config_hash;
use crate::report::{CheckRecord, RunReport, Series};

type Outcome = (Vec<CheckRecord>, Vec<Series>, serde_json::Value);

/// Execute the scenario; never panics on numerical failure.
pub fn run_scenario(cfg: &ScenarioConfig) -> RunReport {
    let start = Instant::now();
    let result = cfg
        .params()
        .map_err(|e| Error::Domain(e.to_string()))
        .and_then(|p| match cfg.scenario {
            Scenario::Eval => eval(cfg, &p),
            Scenario::ReduceCheck => reduce_check(cfg, &p),
            Scenario::LemmaScaling => lemma_scaling(cfg, &p),
            Scenario::SolveBall => solve_ball(cfg, &p),
            Scenario::MovingPlanes => moving_planes(cfg, &p),
            Scenario::Liouville => liouville(cfg, &p),
        });
    let (records, series, details, error) = match result {
        Ok((r, s, d)) => (r, s, d, None),
        Err(e) => (
            Vec::new(),
            Vec::new(),
            serde_json::Value::Null,
            Some(e.to_string()),
        ),
    };
    let mut report = RunReport {
        scenario: cfg.scenario,
        config: cfg.clone(),
        config_hash: config_hash(cfg),
        records,
        wall_time_s: start.elapsed().as_secs_f64(),
        artifacts: Vec::new(),
        error,
        details,
        pass: false,
        series,
    };
    report.finalize();
    report
}

fn rng(cfg: &ScenarioConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).unwrap_or(serde_json::Value::Null)
}

fn registry_field(cfg: &ScenarioConfig) -> fracheat_core::Result<SpaceTimeField> {
    let n = cfg.n;
    let first_axis = |v: f64| {
        let mut d = vec![0.0; n];
        d[0] = v;
        d
    };
    Ok(match cfg.field.as_deref().unwrap_or("gaussian-bump") {
        "gaussian-bump" => gaussian_bump(n),
        "plane-wave" => plane_wave(
            &cfg.xi.clone().unwrap_or_else(|| first_axis(1.0)),
            cfg.rho.unwrap_or(1.0),
        ),
        "torsion-profile" => torsion_profile(n, cfg.s).extend_in_time(),
        "shifted-torsion" => {
            shifted_torsion(n, cfg.s, &first_axis(cfg.shift.unwrap_or(0.2))).extend_in_time()
        }
        "custom-polynomial-cutoff" => polynomial_cutoff(n, cfg.coeffs.as_deref().unwrap_or(&[1.0])),
        other => return Err(Error::Domain(format!("unknown field '{other}'"))),
    })
}

fn eval(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<Outcome> {
    let point = cfg
        .point
        .clone()
        .ok_or_else(|| Error::Domain("eval needs a point".into()))?;
    let (x, t) = point.split_at(cfg.n);
    let q = SpaceTimePoint::new(x.to_vec(), t[0]);
    let u = registry_field(cfg)?;
    let sch = if cfg.field.as_deref() == Some("plane-wave") {
        wave_scheme(&cfg.scheme)
    } else {
        cfg.scheme
    };
    let v = master_operator_pointwise(&u, &q, p, &sch)?;
    let mut records = vec![CheckRecord::at_most(
        "est-error",
        v.est_error,
        sch.target_tol,
    )];
    match cfg.field.as_deref() {
        Some("plane-wave") => {
            let xi = cfg.xi.clone().unwrap_or_else(|| {
                let mut d = vec![0.0; cfg.n];
                d[0] = 1.0;
                d
            });
            let rho = cfg.rho.unwrap_or(1.0);
            let phase: f64 = xi.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + rho * q.t;
            let want = (spacetime_symbol(&xi, rho, cfg.s) * Complex64::from_polar(1.0, phase)).re;
            records.push(CheckRecord::at_most(
                "plane-wave-symbol",
                (v.value - want).abs(),
                v.est_error + 1e-3 * want.abs(),
            ));
        }
        Some("torsion-profile") if x.iter().map(|a| a * a).sum::<f64>() < 1.0 => {
            records.push(CheckRecord::at_most(
                "torsion-identity",
                (v.value - 1.0).abs(),
                sch.target_tol,
            ));
        }
        _ => {}
    }
    let mut s = Series::new(
        "eval.csv",
        "operator value at the configured point",
        &["value", "est_error"],
    );
    s.push(vec![v.value, v.est_error]);
    Ok((records, vec![s], json(&v)))
}

/// Scheme for globally defined oscillatory fields, whose far tail is costly to resolve.
fn wave_scheme(sch: &QuadratureScheme) -> QuadratureScheme {
    QuadratureScheme {
        r_max: sch.r_max.min(1e4),
        target_tol: sch.target_tol.max(0.5),
        ..*sch
    }
}

fn reduce_check(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<Outcome> {
    let n = cfg.n;
    let s = cfg.s;
    let sch = &cfg.scheme;
    let mut rng = rng(cfg);
    let mut series = Series::new(
        "reduce.csv",
        "check 0 master-vs-laplacian, 1 master-vs-marchaud, 2 constant-annihilation, 3 spectral-plane-wave",
        &["check", "sample", "master", "reference", "allowed"],
    );
    let mut worst = [0.0f64; 4];
    for k in 0..cfg.samples {
        let c: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let radius = rng.random_range(0.5..1.5);
        let amp = rng.random_range(0.2..2.0);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let t = rng.random_range(-0.5..0.5);
        let g = space_bump(&c, radius, amp);
        let fl = fractional_laplacian_pointwise(&g, &x, p, sch)?;
        let m = master_operator_pointwise(
            &g.extend_in_time(),
            &SpaceTimePoint::new(x.clone(), t),
            p,
            sch,
        )?;
        let allowed = fl.est_error + m.est_error;
        worst[0] = worst[0].max((m.value - fl.value).abs() / allowed);
        series.push(vec![0.0, k as f64, m.value, fl.value, allowed]);

        let t0 = rng.random_range(-1.0..1.0);
        let width = rng.random_range(0.5..2.0);
        let h = time_cutoff(t0, width, amp);
        let ml = marchaud_left(&h, t, s, sch)?;
        let m = master_operator_pointwise(
            &h.extend_in_space(n),
            &SpaceTimePoint::new(x.clone(), t),
            p,
            sch,
        )?;
        let allowed = ml.est_error + m.est_error;
        worst[1] = worst[1].max((m.value - ml.value).abs() / allowed);
        series.push(vec![1.0, k as f64, m.value, ml.value, allowed]);

        let level = rng.random_range(-2.0..2.0);
        let m = master_operator_pointwise(
            &SpaceTimeField::constant(n, level),
            &SpaceTimePoint::new(x.clone(), t),
            p,
            sch,
        )?;
        worst[2] = worst[2].max(m.value.abs() / m.est_error.max(f64::MIN_POSITIVE));
        series.push(vec![2.0, k as f64, m.value, 0.0, m.est_error]);

        let xi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = rng.random_range(-1.0..1.0);
        let m = master_operator_pointwise(
            &plane_wave(&xi, rho),
            &SpaceTimePoint::new(vec![0.0; n], 0.0),
            p,
            &wave_scheme(sch),
        )?;
        let want = spacetime_symbol(&xi, rho, s).re;
        worst[3] = worst[3].max((m.value - want).abs() / want.abs());
        series.push(vec![3.0, k as f64, m.value, want, 1e-3 * want.abs()]);
    }
    let records = vec![
        CheckRecord::at_most("master-vs-laplacian", worst[0], 1.0),
        CheckRecord::at_most("master-vs-marchaud", worst[1], 1.0),
        CheckRecord::at_most("constant-annihilation", worst[2], 1.0),
        CheckRecord::at_most("spectral-plane-wave", worst[3], 1e-3),
    ];
    Ok((records, vec![series], serde_json::Value::Null))
}

fn lemma_scaling(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<Outcome> {
    let kind = cfg.kind.unwrap_or(CutoffKind::TimeCutoff);
    let r_list = cfg
        .r_list
        .clone()
        .unwrap_or_else(|| vec![0.5, 1.0, 2.0, 4.0, 5.0]);
    let fit = verify_lemma_scaling(kind, &r_list, p, &cfg.scheme)?;
    let mut series = Series::new(
        "scaling.csv",
        "log r against log sup|op(cutoff_r)|",
        &["log_r", "log_m"],
    );
    for pt in &fit.points {
        series.push(vec![pt.r.ln(), pt.sup.ln()]);
    }
    let records = vec![CheckRecord::with_pass(
        "slope-vs-minus-2s",
        fit.slope,
        0.15,
        (fit.slope + 2.0 * cfg.s).abs() <= 0.15,
    )];
    Ok((records, vec![series], json(&fit)))
}

struct BallRun {
    problem: BallProblem,
    solution: Solution,
    consistency_defect: f64,
}

fn solve(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<BallRun> {
    let spec = cfg.problem();
    let f = Nonlinearity::from_name(&spec.f, spec.coeffs.as_deref())?;
    let problem = BallProblem::new(*p, spec.h, f)?;
    let asm = assemble_dirichlet_matrix(&problem, &cfg.scheme)?;
    let solution = solve_steady(&problem, &asm, &cfg.picard)?;
    solution.require_converged()?;
    Ok(BallRun {
        problem,
        solution,
        consistency_defect: asm.consistency_defect,
    })
}

fn ball_records(cfg: &ScenarioConfig, run: &BallRun) -> Vec<CheckRecord> {
    let sol = &run.solution;
    let (defect, violations) = fracheat_core::symmetry_and_monotonicity_report(sol, 0.0);
    let mut records = vec![
        CheckRecord::at_most("picard-residual", sol.residual_inf, cfg.picard.tol),
        CheckRecord::at_most("symmetry-defect", defect, 1e-12),
        CheckRecord::at_most("monotonicity-violations", violations as f64, 0.0),
        CheckRecord::at_most("consistency-defect", run.consistency_defect, 5e-2),
    ];
    if cfg.problem().f == "one" {
        let c = torsion_constant(cfg.n, cfg.s);
        let mut x = vec![0.0; cfg.n];
        records.push(CheckRecord::at_most(
            "u0-vs-closed-form",
            (sol.interpolate(&x) - c).abs(),
            0.02,
        ));
        x[0] = 0.6;
        let want = c * 0.64f64.powf(cfg.s);
        let plus = (sol.interpolate(&x) - want).abs();
        x[0] = -0.6;
        let minus = (sol.interpolate(&x) - want).abs();
        records.push(CheckRecord::at_most(
            "u06-vs-closed-form",
            plus.max(minus),
            0.02,
        ));
    }
    records
}

fn profile_series(run: &BallRun) -> Series {
    let sol = &run.solution;
    let k = run.problem.half_count();
    let mut s = Series::new(
        "profile.csv",
        "radial profile u(r) along the first axis",
        &["r", "u"],
    );
    for i in 0..=k {
        let mut idx = vec![0i64; sol.dim()];
        idx[0] = i;
        s.push(vec![i as f64 * sol.h, sol.node_value(&idx)]);
    }
    s
}

fn solve_ball(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<Outcome> {
    let run = solve(cfg, p)?;
    let records = ball_records(cfg, &run);
    Ok((records, vec![profile_series(&run)], json(&run.solution)))
}

fn moving_planes(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<Outcome> {
    let n = cfg.n;
    let run = solve(cfg, p)?;
    let sol = &run.solution;
    let residual = residual_field(&run.problem, sol, &cfg.scheme)?;
    let tol_geom = tol_geom_from_residual(&residual);
    let direction = cfg.direction.clone().unwrap_or_else(|| {
        let mut d = vec![0.0; n];
        d[0] = 1.0;
        d
    });
    let mut lambdas = half_grid_sweep(sol.h);
    lambdas.extend(cfg.lambdas.iter().flatten().copied());
    let report = narrow_region_check(sol, &lambdas, &direction, tol_geom)?;
    let failing = report.records.iter().filter(|r| !r.pass).count();
    let mut records = ball_records(cfg, &run);
    records.push(CheckRecord::at_least(
        "lambda-star",
        report.lambda_star,
        -sol.h,
    ));
    records.push(CheckRecord::at_most("failing-lambdas", failing as f64, 0.0));

    // sensitivity: the translated closed form must be flagged from the far side
    let shift = cfg.shift.unwrap_or(0.2);
    let g = shifted_torsion(
        n,
        cfg.s,
        &direction.iter().map(|d| shift * d).collect::<Vec<_>>(),
    );
    let vals = sol
        .nodes
        .iter()
        .map(|i| g.eval(&run.problem.coords(i)))
        .collect();
    let shifted = Solution::from_values(sol.nodes.clone(), vals, sol.h);
    let opposite: Vec<f64> = direction.iter().map(|d| -d).collect();
    let shifted_report = narrow_region_check(&shifted, &lambdas, &opposite, tol_geom)?;
    let worst = shifted_report
        .records
        .iter()
        .map(|r| r.min_w)
        .fold(f64::INFINITY, f64::min);
    records.push(CheckRecord::with_pass(
        "shifted-torsion-flagged",
        worst,
        -tol_geom,
        shifted_report.records.iter().any(|r| !r.pass),
    ));

    let mut candidates = 0usize;
    if cfg.probe_fields > 0 {
        let mut rng = rng(cfg);
        let plane = PlaneConfig::new(direction.clone(), 0.0)?;
        let pts = probe_sample_points(
            &plane,
            3.5,
            if n == 1 { 28 } else { 8 },
            -2.0,
            2.0,
            if n == 1 { 17 } else { 5 },
        );
        for _ in 0..cfg.probe_fields {
            let w = random_antisymmetric_field(&mut rng, &plane);
            if unbounded_mp_probe(&w, &plane, &pts, p, &cfg.scheme)?.counterexample_candidate {
                candidates += 1;
            }
        }
        records.push(CheckRecord::at_most(
            "counterexample-candidates",
            candidates as f64,
            0.0,
        ));
    }

    let mut series = Series::new(
        "lambda_minw.csv",
        "plane offset against min of w over the half space",
        &["lambda", "min_w"],
    );
    for r in &report.records {
        series.push(vec![r.lambda, r.min_w]);
    }
    let details = serde_json::json!({ "report": report, "shifted_report": shifted_report, "counterexample_candidates": candidates });
    Ok((records, vec![series, profile_series(&run)], details))
}

fn liouville(cfg: &ScenarioConfig, p: &FracParams) -> fracheat_core::Result<Outcome> {
    let spec = cfg.grid.unwrap_or(GridSpec {
        nx: 32,
        nt: 32,
        lx: 2.0 * std::f64::consts::PI,
        lt: 2.0 * std::f64::consts::PI,
    });
    let grid = TorusGrid::new(cfg.n, spec.nx, spec.lx, spec.nt, spec.lt)?;
    let dim = liouville_nullspace_dimension(&grid, p);
    let gap = min_nonzero_symbol(&grid, p);
    let mut rng = rng(cfg);
    let values: Vec<f64> = (0..grid.len())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let data = GridField::new(grid, values)?;
    let proj = project_onto_kernel(&data, p)?;
    let spread = proj.field.spread();
    let records = vec![
        CheckRecord::with_pass("nullspace-dim", dim as f64, 1.0, dim == 1),
        CheckRecord::at_most("projection-spread", spread, 1e-10),
        CheckRecord::with_pass("symbol-gap", gap, 0.0, gap > 0.0),
    ];
    let mut series = Series::new(
        "liouville.csv",
        "torus grid, kernel dimension, smallest nonzero symbol modulus, spread of projected data",
        &[
            "nx",
            "nt",
            "nullspace_dim",
            "min_nonzero_symbol",
            "projection_spread",
        ],
    );
    series.push(vec![
        spec.nx as f64,
        spec.nt as f64,
        dim as f64,
        gap,
        spread,
    ]);
    Ok((
        records,
        vec![series],
        serde_json::json!({ "nullspace_dim": dim, "min_nonzero_symbol": gap }),
    ))
}
