//! Reflections, comparison functions and maximum-principle diagnostics for
//! the method of moving planes.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Exterior, SpaceField, SpaceTimeField, TimeField};
use crate::kernel::{FracParams, SpaceTimePoint};
use crate::operator::{
    gaussian_mean, lag_operator, marchaud_left, master_operator_pointwise, spatial_rules,
    OperatorValue, QuadratureScheme, SpatialRule, HERMITE_REACH,
};
use crate::profiles::{bump_phi, eta_profile, spacetime_cutoff, time_cutoff};
use crate::rules::gauss_legendre;
use crate::solver::Solution;

/// The hyperplane {x · e = λ} with half-space Σ_λ = {x · e < λ}.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneConfig {
    pub direction: Vec<f64>,
    pub lambda: f64,
}

impl PlaneConfig {
    pub fn new(direction: Vec<f64>, lambda: f64) -> Result<Self> {
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "plane direction must be a unit vector, |e| = {norm}"
            )));
        }
        Ok(Self { direction, lambda })
    }

    /// The plane with normal ±e_axis.
    pub fn axis(n: usize, axis: usize, sign: f64, lambda: f64) -> Self {
        let mut direction = vec![0.0; n];
        direction[axis] = sign.signum();
        Self { direction, lambda }
    }

    pub fn height(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.direction).map(|(a, b)| a * b).sum()
    }

    /// Strictly inside Σ_λ.
    pub fn in_half_space(&self, x: &[f64]) -> bool {
        self.height(x) < self.lambda
    }

    /// The grid axis and sign when the direction is ±e_k.
    fn grid_axis(&self) -> Option<(usize, i64)> {
        let mut found = None;
        for (k, &v) in self.direction.iter().enumerate() {
            if v == 1.0 || v == -1.0 {
                if found.is_some() {
                    return None;
                }
                found = Some((k, v as i64));
            } else if v != 0.0 {
                return None;
            }
        }
        found
    }
}

/// x^λ = x + 2(λ − x·e) e.
pub fn reflect(x: &[f64], cfg: &PlaneConfig) -> Vec<f64> {
    let c = 2.0 * (cfg.lambda - cfg.height(x));
    x.iter()
        .zip(&cfg.direction)
        .map(|(a, e)| a + c * e)
        .collect()
}

/// Nearest plane offset with 2λ/h an integer.
pub fn snap_lambda(lambda: f64, h: f64) -> f64 {
    (2.0 * lambda / h).round() * h / 2.0
}

/// w_λ = u(x^λ) − u(x) on the grid nodes of Σ_λ ∩ [−1, 1]ⁿ.
#[derive(Debug, Clone, Serialize)]
pub struct ReflectionData {
    pub lambda: f64,
    pub direction: Vec<f64>,
    pub nodes: Vec<Vec<i64>>,
    pub w_values: Vec<f64>,
    #[serde(skip)]
    axis: usize,
    #[serde(skip)]
    shift: i64,
    #[serde(skip)]
    sign: i64,
}

impl ReflectionData {
    /// Index of the reflected node.
    pub fn reflected_index(&self, idx: &[i64]) -> Vec<i64> {
        let mut out = idx.to_vec();
        out[self.axis] = self.sign * self.shift - idx[self.axis];
        out
    }
}

fn half_count(u: &Solution) -> i64 {
    (1.0 / u.h).round() as i64
}

fn grid_nodes(n: usize, k: i64) -> Vec<Vec<i64>> {
    match n {
        1 => (-k..=k).map(|i| vec![i]).collect(),
        _ => (-k..=k)
            .flat_map(|i| (-k..=k).map(move |j| vec![i, j]))
            .collect(),
    }
}

/// Comparison function for a discrete ball solution.
pub fn w_lambda_field(u: &Solution, cfg: &PlaneConfig) -> Result<ReflectionData> {
    let n = u.dim();
    if cfg.direction.len() != n {
        return Err(Error::Shape("plane and solution dimensions differ".into()));
    }
    let (axis, sign) = cfg.grid_axis().ok_or_else(|| {
        Error::Alignment(
            "plane normal must be a coordinate axis for node-to-node reflection".into(),
        )
    })?;
    let scaled = 2.0 * cfg.lambda / u.h;
    if (scaled - scaled.round()).abs() > 1e-9 {
        return Err(Error::Alignment(format!(
            "λ = {} is not a multiple of h/2 = {}; try {}",
            cfg.lambda,
            u.h / 2.0,
            snap_lambda(cfg.lambda, u.h)
        )));
    }
    let shift = scaled.round() as i64;
    let k = half_count(u);
    let mut nodes = Vec::new();
    let mut w_values = Vec::new();
    let data0 = ReflectionData {
        lambda: cfg.lambda,
        direction: cfg.direction.clone(),
        nodes: Vec::new(),
        w_values: Vec::new(),
        axis,
        shift,
        sign,
    };
    for idx in grid_nodes(n, k) {
        // x·e < λ  ⇔  sign·i < shift/2
        if 2 * sign * idx[axis] < shift {
            let r = data0.reflected_index(&idx);
            w_values.push(u.node_value(&r) - u.node_value(&idx));
            nodes.push(idx);
        }
    }
    Ok(ReflectionData {
        nodes,
        w_values,
        ..data0
    })
}

/// One plane position of a sweep.
#[derive(Debug, Clone, Serialize)]
pub struct LambdaRecord {
    pub lambda: f64,
    pub min_w: f64,
    pub argmin: Vec<f64>,
    pub strict_positive_interior: bool,
    pub pass: bool,
}

/// Sweep results with the symmetry and monotonicity diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct MovingPlaneReport {
    pub direction: Vec<f64>,
    pub records: Vec<LambdaRecord>,
    /// Largest tested λ such that every tested λ′ ≤ λ passes; −1 when none does.
    pub lambda_star: f64,
    pub tol_geom: f64,
    pub symmetry_defect: f64,
    pub monotonicity_violations: usize,
    /// The plane reached the origin: lambda_star ≥ −h.
    pub reaches_origin: bool,
}

/// Every plane offset λ = −j·h/2 in (−1, 0).
pub fn half_grid_sweep(h: f64) -> Vec<f64> {
    let m = (2.0 / h).round() as i64;
    (1..m).rev().map(|j| -(j as f64) * h / 2.0).collect()
}

/// Ten times the median of a nodal residual, the default geometric tolerance.
pub fn tol_geom_from_residual(residual: &[f64]) -> f64 {
    let mut v: Vec<f64> = residual.iter().copied().filter(|r| r.is_finite()).collect();
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    10.0 * v[v.len() / 2]
}

/// Check min w_λ ≥ −tol_geom on Σ_λ for each λ in `lambdas`, moving along `direction`.
/// Each λ is snapped to the nearest multiple of h/2 and recorded as snapped.
pub fn narrow_region_check(
    u: &Solution,
    lambdas: &[f64],
    direction: &[f64],
    tol_geom: f64,
) -> Result<MovingPlaneReport> {
    let mut sorted: Vec<f64> = lambdas.iter().map(|&l| snap_lambda(l, u.h)).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    let mut records = Vec::with_capacity(sorted.len());
    for &lambda in &sorted {
        if !(lambda > -1.0 && lambda < 0.0) {
            continue;
        }
        let cfg = PlaneConfig::new(direction.to_vec(), lambda)?;
        let data = w_lambda_field(u, &cfg)?;
        let mut min_w = f64::INFINITY;
        let mut argmin = Vec::new();
        let mut strict = true;
        for (idx, &w) in data.nodes.iter().zip(&data.w_values) {
            let x: Vec<f64> = idx.iter().map(|&i| i as f64 * u.h).collect();
            if w < min_w {
                min_w = w;
                argmin = x.clone();
            }
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if r2 < 1.0 - 1e-12 && w <= 0.0 {
                strict = false;
            }
        }
        if data.nodes.is_empty() {
            min_w = 0.0;
        }
        records.push(LambdaRecord {
            lambda,
            min_w,
            argmin,
            strict_positive_interior: strict,
            pass: min_w >= -tol_geom,
        });
    }
    let mut lambda_star = -1.0;
    for r in &records {
        if !r.pass {
            break;
        }
        lambda_star = r.lambda;
    }
    let (symmetry_defect, monotonicity_violations) = symmetry_and_monotonicity_report(u, 0.0);
    Ok(MovingPlaneReport {
        direction: direction.to_vec(),
        records,
        lambda_star,
        tol_geom,
        symmetry_defect,
        monotonicity_violations,
        reaches_origin: lambda_star >= -u.h,
    })
}

fn symmetry_images(idx: &[i64]) -> Vec<Vec<i64>> {
    match idx.len() {
        1 => vec![vec![idx[0]], vec![-idx[0]]],
        _ => {
            let (a, b) = (idx[0], idx[1]);
            let mut out = Vec::with_capacity(8);
            for (p, q) in [(a, b), (b, a)] {
                for sp in [1, -1] {
                    for sq in [1, -1] {
                        out.push(vec![sp * p, sq * q]);
                    }
                }
            }
            out
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// (symmetry defect over reflection orbits, count of radial pairs with u(r₁) ≤ u(r₂) − tol).
pub fn symmetry_and_monotonicity_report(u: &Solution, tol: f64) -> (f64, usize) {
    let n = u.dim();
    let k = half_count(u);
    let mut defect: f64 = 0.0;
    for idx in &u.nodes {
        let vals: Vec<f64> = symmetry_images(idx)
            .iter()
            .map(|i| u.node_value(i))
            .collect();
        let (lo, hi) = vals
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        defect = defect.max(hi - lo);
    }
    let dirs: Vec<Vec<i64>> = match n {
        1 => vec![vec![1], vec![-1]],
        _ => {
            let mut d = Vec::new();
            for a in -k..=k {
                for b in -k..=k {
                    if (a, b) != (0, 0) && gcd(a, b) == 1 {
                        d.push(vec![a, b]);
                    }
                }
            }
            d
        }
    };
    let r2max = k * k;
    let mut violations = 0;
    for d in dirs {
        let mut j = 0i64;
        loop {
            let p1: Vec<i64> = d.iter().map(|v| v * j).collect();
            let p2: Vec<i64> = d.iter().map(|v| v * (j + 1)).collect();
            if p2.iter().map(|v| v * v).sum::<i64>() >= r2max {
                break;
            }
            if u.node_value(&p1) <= u.node_value(&p2) - tol {
                violations += 1;
            }
            j += 1;
        }
    }
    (defect, violations)
}

/// η((t − t_k)/r²): 1 within r²/2 of t_k, 0 beyond r².
pub fn build_cutoff_eta(t_k: f64, r: f64) -> Result<TimeField> {
    if !(r > 0.0) {
        return Err(Error::Domain(format!(
            "cutoff radius must be positive, got {r}"
        )));
    }
    Ok(time_cutoff(t_k, r * r, 1.0))
}

/// Φ(x) = φ(2(x − x_k)/r_k) − φ(2(x^λ − x_k)/r_k).
pub fn build_antisym_bump(x_k: &[f64], r_k: f64, cfg: &PlaneConfig) -> Result<SpaceField> {
    if !(r_k > 0.0) {
        return Err(Error::Domain(format!(
            "bump radius must be positive, got {r_k}"
        )));
    }
    if x_k.len() != cfg.direction.len() {
        return Err(Error::Shape(
            "bump center and plane dimensions differ".into(),
        ));
    }
    let dist = (cfg.lambda - cfg.height(x_k)).abs();
    if dist < 0.5 * r_k {
        return Err(Error::Overlap(format!(
            "bumps of radius {} around x_k and its reflection intersect (plane distance {dist})",
            0.5 * r_k
        )));
    }
    let c = x_k.to_vec();
    let cr = reflect(x_k, cfg);
    let mid: Vec<f64> = c.iter().zip(&cr).map(|(a, b)| 0.5 * (a + b)).collect();
    let cfg2 = cfg.clone();
    let scale = 4.0 / (r_k * r_k);
    let cc = c.clone();
    let f = move |x: &[f64]| {
        let xr = reflect(x, &cfg2);
        let d1: f64 = x.iter().zip(&cc).map(|(a, b)| (a - b) * (a - b)).sum();
        let d2: f64 = xr.iter().zip(&cc).map(|(a, b)| (a - b) * (a - b)).sum();
        bump_phi(d1 * scale) - bump_phi(d2 * scale)
    };
    Ok(SpaceField::new(c.len(), f)
        .with_exterior(Exterior::ZeroOutsideBall {
            center: mid,
            radius: dist + 0.5 * r_k,
        })
        .with_sup_bound(1.0)
        .with_length_scale(r_k / 8.0))
}

/// Fixed deterministic sample near `center` used for the antisymmetry spot check.
fn antisymmetry_samples(n: usize, center: &[f64], spread: f64, t0: f64) -> Vec<(Vec<f64>, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..64)
        .map(|_| {
            let x = (0..n)
                .map(|k| center[k] + spread * rng.random_range(-1.0..1.0))
                .collect();
            (x, t0 + spread * rng.random_range(-1.0..1.0))
        })
        .collect()
}

fn check_antisymmetry(w: &SpaceTimeField, cfg: &PlaneConfig, q: &SpaceTimePoint) -> Result<()> {
    for (x, t) in antisymmetry_samples(w.dim(), &q.x, 2.0, q.t) {
        let d = w.eval(&x, t) + w.eval(&reflect(&x, cfg), t);
        if d.abs() > 1e-10 {
            return Err(Error::Antisymmetry(d.abs()));
        }
    }
    Ok(())
}

const FOLD_CUT: f64 = 6.5;

/// Composite Gauss–Legendre nodes on [a, b] with panels no wider than `width`.
fn panel_nodes(a: f64, b: f64, width: f64, gl: &crate::rules::Rule) -> (Vec<f64>, Vec<f64>) {
    if b <= a {
        return (Vec::new(), Vec::new());
    }
    let panels = ((b - a) / width).ceil().clamp(1.0, 4000.0) as usize;
    let step = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * gl.len());
    let mut weights = Vec::with_capacity(panels * gl.len());
    for j in 0..panels {
        let mid = a + (j as f64 + 0.5) * step;
        for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
            nodes.push(mid + 0.5 * step * z);
            weights.push(0.5 * step * w);
        }
    }
    (nodes, weights)
}

/// F(r) = ∫_{Σ_λ} w(y, t − r) [G_r(x − y) − G_r(x − y^λ)] dy in the scaled variable z.
fn folded_mean(
    w: &SpaceTimeField,
    cfg: &PlaneConfig,
    q: &SpaceTimePoint,
    r: f64,
    refine: bool,
    near: &SpatialRule,
) -> Result<f64> {
    let n = q.x.len();
    let tau = q.t - r;
    let root = r.sqrt();
    let zeta_star = (cfg.lambda - cfg.height(&q.x)) / (2.0 * root);
    if zeta_star >= FOLD_CUT && 2.0 * root <= HERMITE_REACH * w.length_scale {
        // reflected Gaussian and half-space cut are below e^{−42}
        return gaussian_mean(w, &q.x, tau, r, near);
    }
    let gl = gauss_legendre(if refine { 8 } else { 6 });
    let base: f64 = if refine { 0.25 } else { 0.4 };
    let width = base.min(w.length_scale / (2.0 * root) * if refine { 0.35 } else { 0.5 });
    // orthonormal frame: e first, then the remaining axes
    let e = &cfg.direction;
    let mut frame = vec![e.clone()];
    if n == 2 {
        frame.push(vec![-e[1], e[0]]);
    }
    let (lo_support, hi_support) = match &w.exterior {
        Exterior::ZeroOutsideBall { center, radius } => {
            let proj: Vec<f64> = frame
                .iter()
                .map(|f| {
                    f.iter()
                        .zip(center)
                        .zip(&q.x)
                        .map(|((a, c), x)| a * (c - x))
                        .sum::<f64>()
                })
                .collect();
            (
                proj.iter()
                    .map(|p| (p - radius) / (2.0 * root))
                    .collect::<Vec<_>>(),
                proj.iter()
                    .map(|p| (p + radius) / (2.0 * root))
                    .collect::<Vec<_>>(),
            )
        }
        Exterior::Global => (vec![f64::NEG_INFINITY; n], vec![f64::INFINITY; n]),
    };
    let za = (-FOLD_CUT).max(lo_support[0]);
    let zb = zeta_star.min(FOLD_CUT).min(hi_support[0]);
    let (zn, zw) = panel_nodes(za, zb, width, &gl);
    // transverse Gaussian weight is e^{−p²}/√π in 2-D and trivial in 1-D
    let (pn, pw) = if n == 2 {
        panel_nodes(
            (-FOLD_CUT).max(lo_support[1]),
            FOLD_CUT.min(hi_support[1]),
            width,
            &gl,
        )
    } else {
        (vec![0.0], vec![1.0])
    };
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    let mut y = vec![0.0; n];
    let mut acc = 0.0;
    for (&zeta, &wz) in zn.iter().zip(&zw) {
        let bracket = (-zeta * zeta).exp() - (-(zeta - 2.0 * zeta_star).powi(2)).exp();
        if bracket == 0.0 {
            continue;
        }
        for (&p, &wp) in pn.iter().zip(&pw) {
            for k in 0..n {
                let transverse = if n == 2 { p * frame[1][k] } else { 0.0 };
                y[k] = q.x[k] + 2.0 * root * (zeta * frame[0][k] + transverse);
            }
            let g = if n == 2 {
                inv_sqrt_pi * (-p * p).exp()
            } else {
                1.0
            };
            acc += wz * wp * g * bracket * w.eval(&y, tau);
        }
    }
    Ok(acc * inv_sqrt_pi)
}

/// Both quadratures of the operator at a point of Σ_λ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FoldComparison {
    pub whole: OperatorValue,
    pub folded: OperatorValue,
    pub residual: f64,
    /// whole.est_error + folded.est_error.
    pub combined_tolerance: f64,
}

/// Operator in folded form over Σ_λ, using w(y^λ) = −w(y).
pub fn folded_operator(
    w: &SpaceTimeField,
    cfg: &PlaneConfig,
    q: &SpaceTimePoint,
    p: &FracParams,
    sch: &QuadratureScheme,
) -> Result<OperatorValue> {
    sch.validate()?;
    q.check_dim(p)?;
    if !cfg.in_half_space(&q.x) {
        return Err(Error::Domain(
            "evaluation point must lie strictly inside Σ_λ".into(),
        ));
    }
    check_antisymmetry(w, cfg, q)?;
    let sup = w
        .sup_bound
        .ok_or_else(|| Error::Admissibility("field lacks a sup bound".into()))?;
    let horizon = w.time_support.map(|(lo, _)| q.t - lo);
    if matches!(horizon, Some(h) if h <= 0.0) {
        return Ok(OperatorValue {
            value: 0.0,
            est_error: crate::operator::truncation_tail_bound(sup, sch.r_max, p.s()),
        });
    }
    let (coarse, fine) = spatial_rules(sch);
    lag_operator(
        w.eval_at(q),
        p.s(),
        sch,
        horizon,
        w.time_scale,
        sup,
        |r, refine| folded_mean(w, cfg, q, r, refine, if refine { &fine } else { &coarse }),
    )
}

/// |whole-space quadrature − folded quadrature| at q.
pub fn antisymmetric_fold_residual(
    w: &SpaceTimeField,
    cfg: &PlaneConfig,
    q: &SpaceTimePoint,
    p: &FracParams,
    sch: &QuadratureScheme,
) -> Result<FoldComparison> {
    let folded = folded_operator(w, cfg, q, p, sch)?;
    let whole = master_operator_pointwise(w, q, p, sch)?;
    Ok(FoldComparison {
        whole,
        folded,
        residual: (whole.value - folded.value).abs(),
        combined_tolerance: whole.est_error + folded.est_error,
    })
}

/// Which cutoff family a scaling check dilates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffKind {
    TimeCutoff,
    SpacetimeCutoff,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScalingPoint {
    pub r: f64,
    pub sup: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingFit {
    pub kind: CutoffKind,
    pub s: f64,
    pub slope: f64,
    pub intercept: f64,
    pub points: Vec<ScalingPoint>,
    /// slope within 0.15 of −2s.
    pub pass: bool,
}

// scale-covariant sample positions in units of r and r²
const TIME_SAMPLES: [f64; 9] = [-0.95, -0.8, -0.65, -0.5, -0.3, 0.0, 0.5, 0.75, 0.95];
const SPACE_SAMPLES: [f64; 4] = [0.0, 0.2, 0.45, 0.7];

/// Fit log sup |operator of the r-dilated cutoff| against log r.
pub fn verify_lemma_scaling(
    kind: CutoffKind,
    r_list: &[f64],
    p: &FracParams,
    sch: &QuadratureScheme,
) -> Result<ScalingFit> {
    let mut rs = r_list.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rs.dedup();
    if rs.len() < 4 || rs[0] <= 0.0 || rs[rs.len() - 1] < 10.0 * rs[0] * (1.0 - 1e-12) {
        return Err(Error::Domain(
            "need at least 4 distinct positive radii spanning a decade".into(),
        ));
    }
    let s = p.s();
    let points: Vec<ScalingPoint> = rs
        .par_iter()
        .map(|&r| -> Result<ScalingPoint> {
            let values: Vec<OperatorValue> = match kind {
                CutoffKind::TimeCutoff => {
                    let eta = build_cutoff_eta(0.0, r)?;
                    TIME_SAMPLES
                        .iter()
                        .map(|&tau| marchaud_left(&eta, tau * r * r, s, sch))
                        .collect::<Result<_>>()?
                }
                CutoffKind::SpacetimeCutoff => {
                    let n = p.n();
                    let phi = spacetime_cutoff(&vec![0.0; n], 0.0, r);
                    let mut out = Vec::new();
                    for &xs in &SPACE_SAMPLES {
                        for &tau in &TIME_SAMPLES[2..7] {
                            let mut x = vec![0.0; n];
                            x[0] = xs * r;
                            let q = SpaceTimePoint::new(x, tau * r * r);
                            out.push(master_operator_pointwise(&phi, &q, p, sch)?);
                        }
                    }
                    out
                }
            };
            let best = values.iter().cloned().fold(
                OperatorValue {
                    value: 0.0,
                    est_error: 0.0,
                },
                |a, v| {
                    if v.value.abs() > a.value.abs() {
                        v
                    } else {
                        a
                    }
                },
            );
            Ok(ScalingPoint {
                r,
                sup: best.value.abs(),
                est_error: best.est_error,
            })
        })
        .collect::<Result<_>>()?;
    for pt in &points {
        if pt.sup <= pt.est_error {
            return Err(Error::Fit(format!(
                "sup {:.3e} at r = {} is below its quadrature error {:.3e}",
                pt.sup, pt.r, pt.est_error
            )));
        }
    }
    let xs: Vec<f64> = points.iter().map(|p| p.r.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.sup.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Ok(ScalingFit {
        kind,
        s,
        slope,
        intercept,
        points,
        pass: (slope + 2.0 * s).abs() <= 0.15,
    })
}

/// One evaluation of the probe.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeSample {
    pub x: Vec<f64>,
    pub t: f64,
    pub w: f64,
    pub op: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    /// Sampled points of Σ_λ where w > 0.
    pub positive_points: Vec<ProbeSample>,
    /// Positive points where op(w) > tol, i.e. where the hypothesis fails.
    pub hypothesis_violations: usize,
    pub max_w: f64,
    pub tol: f64,
    /// Every positive point satisfies op(w) ≤ tol while max w > 10·tol.
    pub counterexample_candidate: bool,
}

/// Lattice of Σ_λ × [t_lo, t_hi]: depths d·(j + 1/2) below the plane, `steps` times.
pub fn probe_sample_points(
    cfg: &PlaneConfig,
    depth: f64,
    layers: usize,
    t_lo: f64,
    t_hi: f64,
    steps: usize,
) -> Vec<SpaceTimePoint> {
    let n = cfg.direction.len();
    let dz = depth / layers as f64;
    let dt = if steps > 1 {
        (t_hi - t_lo) / (steps - 1) as f64
    } else {
        0.0
    };
    let tangent: Vec<Vec<f64>> = if n == 2 {
        vec![vec![-cfg.direction[1], cfg.direction[0]]]
    } else {
        Vec::new()
    };
    let offsets: Vec<f64> = if n == 2 {
        (0..layers)
            .map(|j| -depth + 2.0 * dz * (j as f64 + 0.5))
            .collect()
    } else {
        vec![0.0]
    };
    let mut pts = Vec::new();
    for j in 0..layers {
        let d = dz * (j as f64 + 0.5);
        for &o in &offsets {
            let x: Vec<f64> = (0..n)
                .map(|k| {
                    (cfg.lambda - d) * cfg.direction[k] + tangent.first().map_or(0.0, |t| o * t[k])
                })
                .collect();
            for i in 0..steps {
                pts.push(SpaceTimePoint::new(x.clone(), t_lo + dt * i as f64));
            }
        }
    }
    pts
}

/// Falsification probe for the maximum principle on Σ_λ.
pub fn unbounded_mp_probe(
    w: &SpaceTimeField,
    cfg: &PlaneConfig,
    sample_points: &[SpaceTimePoint],
    p: &FracParams,
    sch: &QuadratureScheme,
) -> Result<ProbeReport> {
    if w.sup_bound.is_none() {
        return Err(Error::Admissibility("probe needs a bounded field".into()));
    }
    let tol = sch.target_tol;
    let inside: Vec<&SpaceTimePoint> = sample_points
        .iter()
        .filter(|q| cfg.in_half_space(&q.x))
        .collect();
    let max_w = inside
        .iter()
        .map(|q| w.eval_at(q))
        .fold(f64::NEG_INFINITY, f64::max);
    let positive_points: Vec<ProbeSample> = inside
        .par_iter()
        .filter(|q| w.eval_at(q) > 0.0)
        .map(|q| {
            let v = master_operator_pointwise(w, q, p, sch)?;
            Ok(ProbeSample {
                x: q.x.clone(),
                t: q.t,
                w: w.eval_at(q),
                op: v.value,
                est_error: v.est_error,
            })
        })
        .collect::<Result<_>>()?;
    let hypothesis_violations = positive_points.iter().filter(|s| s.op > tol).count();
    let counterexample_candidate =
        !positive_points.is_empty() && hypothesis_violations == 0 && max_w > 10.0 * tol;
    Ok(ProbeReport {
        positive_points,
        hypothesis_violations,
        max_w: if max_w.is_finite() { max_w } else { 0.0 },
        tol,
        counterexample_candidate,
    })
}

/// A random smooth bounded field, odd about T_λ, built from reflected bump pairs.
pub fn random_antisymmetric_field(rng: &mut impl Rng, cfg: &PlaneConfig) -> SpaceTimeField {
    let n = cfg.direction.len();
    let terms = rng.random_range(1..=3);
    let mut parts = Vec::with_capacity(terms);
    let mut sup = 0.0;
    let mut ell = f64::INFINITY;
    let mut t_lo = f64::INFINITY;
    let mut t_hi = f64::NEG_INFINITY;
    let mut reach: f64 = 0.0;
    for _ in 0..terms {
        let radius = rng.random_range(0.3..1.0);
        let depth = rng.random_range(0.5 * radius..2.0);
        // center at distance `depth` on the Σ_λ side, offset transversally
        let mut c: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let hgt = cfg.height(&c);
        for (ck, ek) in c.iter_mut().zip(&cfg.direction) {
            *ck += (cfg.lambda - depth - hgt) * ek;
        }
        let amp: f64 = rng.random_range(-1.0..1.0);
        let t0 = rng.random_range(-0.5..0.5);
        let width = rng.random_range(0.3..1.5);
        sup += amp.abs();
        ell = ell.min(radius / 4.0);
        t_lo = t_lo.min(t0 - width);
        t_hi = t_hi.max(t0 + width);
        reach = reach.max(depth + radius + c.iter().map(|v| v * v).sum::<f64>().sqrt());
        parts.push((c, radius, amp, t0, width));
    }
    let cfg2 = cfg.clone();
    let mut center = cfg.direction.clone();
    center.iter_mut().for_each(|v| *v *= cfg.lambda);
    SpaceTimeField::new(n, move |x, t| {
        let xr = reflect(x, &cfg2);
        parts
            .iter()
            .map(|(c, rad, amp, t0, width)| {
                let inv = 1.0 / (rad * rad);
                let d1: f64 = x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                let d2: f64 = xr.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum();
                amp * eta_profile((t - t0) / width) * (bump_phi(d1 * inv) - bump_phi(d2 * inv))
            })
            .sum()
    })
    .with_exterior(Exterior::ZeroOutsideBall {
        center,
        radius: reach + 1.0,
    })
    .with_sup_bound(sup)
    .with_length_scale(ell)
    .with_time_support(t_lo, t_hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflection_examples() {
        let cfg = PlaneConfig::new(vec![1.0, 0.0], -0.2).unwrap();
        let y = reflect(&[0.3, 0.1], &cfg);
        assert!((y[0] + 0.7).abs() < 1e-15 && y[1] == 0.1);
        assert_eq!(reflect(&[-0.2, 5.0], &cfg), vec![-0.2, 5.0]);
        assert!(PlaneConfig::new(vec![1.0, 1.0], 0.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let th: f64 = rng.random_range(0.0..2.0 * PI);
            let cfg =
                PlaneConfig::new(vec![th.cos(), th.sin()], rng.random_range(-1.0..1.0)).unwrap();
            let x = vec![rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let back = reflect(&reflect(&x, &cfg), &cfg);
            assert!(back.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-14));
        }
    }

    #[test]
    fn snapping_and_sweep() {
        let h = 1.0 / 64.0;
        let l = snap_lambda(-0.9, h);
        assert!(((2.0 * l / h) - (2.0 * l / h).round()).abs() < 1e-12);
        assert!((l + 0.9).abs() <= h / 4.0);
        let sweep = half_grid_sweep(0.25);
        assert_eq!(
            sweep,
            vec![-0.875, -0.75, -0.625, -0.5, -0.375, -0.25, -0.125]
        );
    }

    #[test]
    fn eta_cutoff_properties() {
        let eta = build_cutoff_eta(1.0, 0.5).unwrap();
        assert_eq!(eta.eval(1.0), 1.0);
        assert_eq!(eta.eval(1.0 + 0.26), 0.0);
        assert_eq!(eta.eval(1.0 + 0.12), 1.0);
        for i in 0..10_000 {
            let v = eta.eval(0.5 + i as f64 * 1e-4);
            assert!((0.0..=1.0).contains(&v));
        }
        assert!(build_cutoff_eta(0.0, 0.0).is_err());
    }

    #[test]
    fn antisymmetric_bump_properties() {
        let cfg = PlaneConfig::new(vec![1.0, 0.0], 0.0).unwrap();
        let xk = [-1.0, 0.3];
        let phi = build_antisym_bump(&xk, 1.0, &cfg).unwrap();
        assert_eq!(phi.eval(&xk), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let x = vec![rng.random_range(-2.0..2.0), rng.random_range(-1.0..1.5)];
            assert!((phi.eval(&x) + phi.eval(&reflect(&x, &cfg))).abs() <= 1e-14);
            let d1 = ((x[0] - xk[0]).powi(2) + (x[1] - xk[1]).powi(2)).sqrt();
            let d2 = ((x[0] + xk[0]).powi(2) + (x[1] - xk[1]).powi(2)).sqrt();
            if d1 >= 0.5 && d2 >= 0.5 {
                assert_eq!(phi.eval(&x), 0.0);
            }
        }
        assert!(matches!(
            build_antisym_bump(&[-0.3, 0.0], 1.0, &cfg),
            Err(Error::Overlap(_))
        ));
    }

    fn line_solution(values: impl Fn(f64) -> f64, k: i64) -> Solution {
        let h = 1.0 / k as f64;
        let nodes: Vec<Vec<i64>> = (-k + 1..k).map(|i| vec![i]).collect();
        let vals = nodes.iter().map(|i| values(i[0] as f64 * h)).collect();
        Solution::from_values(nodes, vals, h)
    }

    #[test]
    fn w_lambda_examples() {
        let u = line_solution(|x| (1.0 - x * x).sqrt(), 32);
        let even = w_lambda_field(&u, &PlaneConfig::axis(1, 0, 1.0, 0.0)).unwrap();
        assert!(even.w_values.iter().all(|&w| w == 0.0));
        let data = w_lambda_field(&u, &PlaneConfig::axis(1, 0, 1.0, -0.5)).unwrap();
        assert!(data.w_values.iter().all(|&w| w >= 0.0));
        for (idx, &w) in data.nodes.iter().zip(&data.w_values) {
            let x = idx[0] as f64 / 32.0;
            if x > -1.0 && x < -0.5 {
                assert!(w > 0.0);
            }
            // antisymmetry on the pair (x, x^λ)
            let r = data.reflected_index(idx);
            let w_r = u.node_value(idx) - u.node_value(&r);
            assert_eq!(w + w_r, 0.0);
        }
        assert!(matches!(
            w_lambda_field(&u, &PlaneConfig::axis(1, 0, 1.0, -0.51)),
            Err(Error::Alignment(_))
        ));
    }

    #[test]
    fn zero_field_passes_everywhere() {
        let u = line_solution(|_| 0.0, 16);
        let rep = narrow_region_check(&u, &half_grid_sweep(u.h), &[1.0], 0.0).unwrap();
        assert!(rep.records.iter().all(|r| r.pass && r.min_w == 0.0));
        assert!(rep.reaches_origin);
    }

    #[test]
    fn noise_breaks_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let clean = line_solution(|x| (1.0 - x * x).sqrt(), 64);
        let (d, v) = symmetry_and_monotonicity_report(&clean, 0.0);
        assert_eq!((d, v), (0.0, 0));
        let noise: Vec<f64> = (0..129)
            .map(|_| 1e-3 * rng.random_range(-1.0..1.0))
            .collect();
        let noisy = line_solution(
            |x| (1.0 - x * x).sqrt() + noise[((x + 1.0) * 64.0).round() as usize],
            64,
        );
        let (d, v) = symmetry_and_monotonicity_report(&noisy, 0.0);
        assert!(d > 0.0 && v > 0);
    }

    #[test]
    fn shifted_profile_fails_from_the_far_side() {
        let u = line_solution(|x| (1.0 - (x - 0.2) * (x - 0.2)).max(0.0).sqrt(), 64);
        let sweep = half_grid_sweep(u.h);
        let plus = narrow_region_check(&u, &sweep, &[1.0], 0.02).unwrap();
        let minus = narrow_region_check(&u, &sweep, &[-1.0], 0.02).unwrap();
        assert!(plus.records.iter().all(|r| r.pass));
        assert!(minus.records.iter().any(|r| !r.pass));
        assert!(!minus.reaches_origin);
    }

    fn p1(s: f64) -> FracParams {
        FracParams::new(1, s).unwrap()
    }

    #[test]
    fn fold_matches_whole_space_on_a_sine_profile() {
        let cfg = PlaneConfig::axis(1, 0, 1.0, 0.0);
        let sch = QuadratureScheme::default();
        let w = SpaceTimeField::new(1, |x, t| (PI * x[0]).sin() * eta_profile(t))
            .with_sup_bound(1.0)
            .with_length_scale(0.3)
            .with_time_support(-1.0, 1.0);
        let q = SpaceTimePoint::new(vec![-0.35], 0.2);
        let c = antisymmetric_fold_residual(&w, &cfg, &q, &p1(0.5), &sch).unwrap();
        assert!(c.residual <= 2.0 * sch.target_tol);
        assert!(c.residual <= 2.0 * c.combined_tolerance);
        let zero = SpaceTimeField::constant(1, 0.0).with_sup_bound(0.0);
        let z = antisymmetric_fold_residual(&zero, &cfg, &q, &p1(0.5), &sch).unwrap();
        assert_eq!(z.residual, 0.0);
    }

    #[test]
    fn fold_rejects_non_antisymmetric_fields() {
        let cfg = PlaneConfig::axis(1, 0, 1.0, 0.0);
        let even = SpaceTimeField::new(1, |x, _| (-x[0] * x[0]).exp()).with_sup_bound(1.0);
        let q = SpaceTimePoint::new(vec![-0.5], 0.0);
        let r = folded_operator(&even, &cfg, &q, &p1(0.5), &QuadratureScheme::default());
        assert!(matches!(r, Err(Error::Antisymmetry(_))));
        let outside = SpaceTimePoint::new(vec![0.5], 0.0);
        let odd = SpaceTimeField::new(1, |x, _| x[0].tanh()).with_sup_bound(1.0);
        assert!(
            folded_operator(&odd, &cfg, &outside, &p1(0.5), &QuadratureScheme::default()).is_err()
        );
    }

    #[test]
    fn zero_minimum_gives_nonpositive_operator() {
        let cfg = PlaneConfig::axis(1, 0, 1.0, 0.0);
        let sch = QuadratureScheme::default();
        for (xk, qx, s) in [(-1.0, -2.0, 0.5), (-0.8, -0.2, 0.25), (-1.5, -0.4, 0.75)] {
            let phi = build_antisym_bump(&[xk], 1.0, &cfg).unwrap();
            let w = phi.extend_in_time();
            let q = SpaceTimePoint::new(vec![qx], 0.0);
            assert_eq!(w.eval_at(&q), 0.0);
            let v = folded_operator(&w, &cfg, &q, &p1(s), &sch).unwrap();
            assert!(v.value < 0.0 && v.value + v.est_error <= 0.0, "{v:?}");
        }
    }

    #[test]
    fn probe_examples() {
        let cfg = PlaneConfig::axis(1, 0, 1.0, 0.0);
        let sch = QuadratureScheme::default();
        let pts = probe_sample_points(&cfg, 3.0, 12, -1.0, 1.0, 3);
        // −Φ about x_k equals Φ about the mirror point
        let neg = build_antisym_bump(&[1.0], 1.0, &cfg)
            .unwrap()
            .extend_in_time();
        let r = unbounded_mp_probe(&neg, &cfg, &pts, &p1(0.5), &sch).unwrap();
        assert!(r.positive_points.is_empty() && !r.counterexample_candidate);
        // positive maximum on Σ_λ: the operator is positive there
        let pos = build_antisym_bump(&[-1.0], 1.0, &cfg)
            .unwrap()
            .extend_in_time();
        let at_max = SpaceTimePoint::new(vec![-1.0], 0.0);
        let r = unbounded_mp_probe(&pos, &cfg, &[at_max], &p1(0.5), &sch).unwrap();
        assert_eq!(r.positive_points.len(), 1);
        assert!(r.positive_points[0].op > 0.0);
        assert_eq!(r.hypothesis_violations, 1);
        assert!(!r.counterexample_candidate);
    }

    #[test]
    fn random_fields_are_antisymmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let th: f64 = rng.random_range(0.0..2.0 * PI);
            let cfg =
                PlaneConfig::new(vec![th.cos(), th.sin()], rng.random_range(-1.0..1.0)).unwrap();
            let w = random_antisymmetric_field(&mut rng, &cfg);
            for _ in 0..50 {
                let x = vec![rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
                let t = rng.random_range(-2.0..2.0);
                assert!((w.eval(&x, t) + w.eval(&reflect(&x, &cfg), t)).abs() <= 1e-14);
                assert!(w.eval(&x, t).abs() <= w.sup_bound.unwrap());
            }
        }
    }

    #[test]
    fn time_cutoff_doubling() {
        let sch = QuadratureScheme::default();
        let fit = verify_lemma_scaling(
            CutoffKind::TimeCutoff,
            &[0.5, 1.0, 2.0, 4.0, 5.0],
            &p1(0.5),
            &sch,
        )
        .unwrap();
        assert!(fit.pass && (fit.slope + 1.0).abs() <= 0.15);
        for w in fit.points.windows(2).filter(|w| w[1].r == 2.0 * w[0].r) {
            let ratio = w[1].sup / w[0].sup;
            assert!((ratio / 0.5 - 1.0).abs() <= 0.1);
        }
        assert!(
            verify_lemma_scaling(CutoffKind::TimeCutoff, &[1.0, 2.0, 3.0], &p1(0.5), &sch).is_err()
        );
        assert!(verify_lemma_scaling(
            CutoffKind::TimeCutoff,
            &[1.0, 2.0, 3.0, 4.0],
            &p1(0.5),
            &sch
        )
        .is_err());
    }

    #[test]
    fn spacetime_cutoff_slope_quarter() {
        let sch = QuadratureScheme::default();
        let fit = verify_lemma_scaling(
            CutoffKind::SpacetimeCutoff,
            &[0.5, 1.0, 2.0, 5.0],
            &p1(0.25),
            &sch,
        )
        .unwrap();
        assert!(fit.pass && (fit.slope + 0.5).abs() <= 0.15, "{}", fit.slope);
    }
}
