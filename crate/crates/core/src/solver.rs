//! Collocation solver for (−Δ)^s u = f(u) in the unit ball with zero exterior data.
//!
//! A time-independent solution of this problem solves the master equation for
//! every t. Row i of the collocation matrix applies the fractional Laplacian
//! to the piecewise-multilinear interpolant of the nodal values at node x_i:
//! outside B_{h/2}(x_i) the interpolant is integrated exactly along rays, and
//! inside the ball a second-order Taylor term with the discrete Laplacian is
//! used. Entries depend on the node offset only through (|k|, |l|) sorted, so
//! the matrix commutes exactly with every symmetry of the grid.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Exterior, SpaceField};
use crate::gamma::gamma;
use crate::kernel::FracParams;
use crate::operator::{fractional_laplacian_pointwise, QuadratureScheme};
use crate::profiles::torsion_profile;
use crate::rules::gauss_legendre;
use crate::spline::TensorSpline;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const FD_STEP: f64 = 1e-4;
const FD_TOL: f64 = 1e-5;
// interior region where the torsion consistency defect is measured
const DEFECT_RADIUS: f64 = 0.8;

/// A nonlinearity f with its derivative and the recorded hypothesis checks.
#[derive(Clone)]
pub struct Nonlinearity {
    f: ScalarFn,
    f_prime: ScalarFn,
    pub provenance: String,
    /// f(0) ≥ 0 and f′(0) ≤ 0.
    pub hypothesis_ok: bool,
    /// Largest |f′ − centered difference of f| on the [0, 2] sample grid.
    pub derivative_defect: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("Nonlinearity")
            .field("provenance", &self.provenance)
            .field("hypothesis_ok", &self.hypothesis_ok)
            .field("derivative_defect", &self.derivative_defect)
            .finish()
    }
}

impl Nonlinearity {
    pub fn new<F, G>(f: F, f_prime: G, provenance: impl Into<String>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let hypothesis_ok = f(0.0) >= 0.0 && f_prime(0.0) <= 0.0;
        let derivative_defect = (0..=200)
            .map(|i| {
                let u = i as f64 * 0.01;
                let fd = (f(u + FD_STEP) - f(u - FD_STEP)) / (2.0 * FD_STEP);
                (fd - f_prime(u)).abs()
            })
            .fold(0.0, f64::max);
        Self {
            f: Arc::new(f),
            f_prime: Arc::new(f_prime),
            provenance: provenance.into(),
            hypothesis_ok,
            derivative_defect,
        }
    }

    pub fn derivative_ok(&self) -> bool {
        self.derivative_defect <= FD_TOL
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, |_| 0.0, "f(u) = 0")
    }

    pub fn one() -> Self {
        Self::new(|_| 1.0, |_| 0.0, "f(u) = 1")
    }

    pub fn one_minus_half_u() -> Self {
        Self::new(|u| 1.0 - 0.5 * u, |_| -0.5, "f(u) = 1 - u/2")
    }

    /// f(u) = Σ c_k u^k.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let c = coeffs.to_vec();
        let d: Vec<f64> = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| k as f64 * v)
            .collect();
        let text = c
            .iter()
            .enumerate()
            .map(|(k, v)| format!("{v}*u^{k}"))
            .collect::<Vec<_>>()
            .join(" + ");
        Self::new(
            move |u| c.iter().rev().fold(0.0, |acc, a| acc * u + a),
            move |u| d.iter().rev().fold(0.0, |acc, a| acc * u + a),
            format!(
                "f(u) = {}",
                if text.is_empty() {
                    "0".to_string()
                } else {
                    text
                }
            ),
        )
    }

    /// Registry lookup: "zero", "one", "one-minus-half-u", "custom-polynomial".
    pub fn from_name(name: &str, coeffs: Option<&[f64]>) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "one" => Ok(Self::one()),
            "one-minus-half-u" => Ok(Self::one_minus_half_u()),
            "custom-polynomial" => coeffs.map(Self::polynomial).ok_or_else(|| {
                Error::Domain("custom-polynomial needs a coefficient list".into())
            }),
            other => Err(Error::Domain(format!(
                "unknown nonlinearity '{other}'; expected zero, one, one-minus-half-u or custom-polynomial"
            ))),
        }
    }

    /// f on [0, ∞), continued by its tangent at 0 below.
    pub fn eval(&self, u: f64) -> f64 {
        if u >= 0.0 {
            (self.f)(u)
        } else {
            (self.f)(0.0) + (self.f_prime)(0.0) * u
        }
    }

    pub fn derivative(&self, u: f64) -> f64 {
        (self.f_prime)(u.max(0.0))
    }
}

/// Uniform grid of spacing h = 1/K on [−1, 1]ⁿ; nodes with |x| ≥ 1 carry zero.
#[derive(Debug, Clone)]
pub struct BallProblem {
    pub params: FracParams,
    k: i64,
    pub f: Nonlinearity,
}

impl BallProblem {
    pub fn new(params: FracParams, h: f64, f: Nonlinearity) -> Result<Self> {
        if !(1..=2).contains(&params.n()) {
            return Err(Error::Unsupported(format!(
                "the ball solver handles n ∈ {{1, 2}}, got n = {}",
                params.n()
            )));
        }
        if !(h > 0.0) {
            return Err(Error::Domain(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        let k = (1.0 / h).round();
        if k < 2.0 || (k * h - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!(
                "grid spacing must be 1/K for an integer K ≥ 2, got h = {h}"
            )));
        }
        Ok(Self {
            params,
            k: k as i64,
            f,
        })
    }

    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    /// K = 1/h; node indices run over −K..=K on each axis.
    pub fn half_count(&self) -> i64 {
        self.k
    }

    pub fn per_axis(&self) -> usize {
        (2 * self.k + 1) as usize
    }

    pub fn is_interior(&self, idx: &[i64]) -> bool {
        let r2: i64 = idx.iter().map(|v| v * v).sum();
        r2 < self.k * self.k
    }

    /// Interior node indices in lexicographic order.
    pub fn interior_nodes(&self) -> Vec<Vec<i64>> {
        let k = self.k;
        let mut out = Vec::new();
        match self.n() {
            1 => out.extend((-k..=k).map(|i| vec![i]).filter(|v| self.is_interior(v))),
            _ => {
                for i in -k..=k {
                    for j in -k..=k {
                        if self.is_interior(&[i, j]) {
                            out.push(vec![i, j]);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn coords(&self, idx: &[i64]) -> Vec<f64> {
        let h = self.h();
        idx.iter().map(|&i| i as f64 * h).collect()
    }
}

/// ∫_{ρ ≥ h/2} hat_k(ρω) ρ^{−1−2s} dρ for the multilinear hat centered at k·h.
fn ray_hat_integral(k: &[i64], h: f64, omega: &[f64], s: f64) -> f64 {
    let p = -1.0 - 2.0 * s;
    let start = 0.5 * h;
    let mut breaks = vec![start];
    let mut far = start;
    for (d, (&kd, &w)) in k.iter().zip(omega).enumerate() {
        let _ = d;
        if w.abs() < 1e-300 {
            // coordinate stays at 0 along the ray
            if kd.abs() >= 1 {
                return 0.0;
            }
            continue;
        }
        for c in [kd - 1, kd, kd + 1] {
            let rho = c as f64 * h / w;
            if rho > start {
                breaks.push(rho);
                far = far.max(rho);
            }
        }
    }
    if far <= start {
        return 0.0;
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut total = 0.0;
    for seg in breaks.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        // hat factors (α + βρ) on this segment
        let (mut c0, mut c1, mut c2) = (1.0, 0.0, 0.0);
        let mut inside = true;
        for (&kd, &w) in k.iter().zip(omega) {
            let t = mid * w / h - kd as f64;
            if t.abs() >= 1.0 {
                inside = false;
                break;
            }
            let (alpha, beta) = if t >= 0.0 {
                (1.0 + kd as f64, -w / h)
            } else {
                (1.0 - kd as f64, w / h)
            };
            let (n0, n1, n2) = (c0 * alpha, c0 * beta + c1 * alpha, c1 * beta + c2 * alpha);
            c0 = n0;
            c1 = n1;
            c2 = n2;
        }
        if !inside {
            continue;
        }
        total += c0 * prim(p, a, b) + c1 * prim(p + 1.0, a, b) + c2 * prim(p + 2.0, a, b);
    }
    total
}

/// ∫_a^b z^p dz for 0 < a < b.
fn prim(p: f64, a: f64, b: f64) -> f64 {
    if (p + 1.0).abs() < 1e-14 {
        (b / a).ln()
    } else {
        (b.powf(p + 1.0) - a.powf(p + 1.0)) / (p + 1.0)
    }
}

fn angle_breaks_2d(k: i64, l: i64) -> Vec<f64> {
    let mut verts = Vec::new();
    for a in -1..=1 {
        for b in -1..=1 {
            let (x, y) = ((k + a) as f64, (l + b) as f64);
            if x != 0.0 || y != 0.0 {
                verts.push(y.atan2(x));
            }
        }
    }
    if k.abs() <= 1 && l.abs() <= 1 {
        let mut out: Vec<f64> = verts.into_iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
        out.extend([0.0, 0.5 * PI, PI, 1.5 * PI, 2.0 * PI]);
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    } else {
        let c = (l as f64).atan2(k as f64);
        let mut out: Vec<f64> = verts
            .into_iter()
            .map(|t| c + (t - c + PI).rem_euclid(2.0 * PI) - PI)
            .collect();
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }
}

/// W_k = ∫_{|z| > h/2} hat_k(z) |z|^{−n−2s} dz.
fn offset_weight(k: &[i64], h: f64, s: f64, theta_rule: &crate::rules::Rule) -> f64 {
    match k.len() {
        1 => ray_hat_integral(k, h, &[1.0], s) + ray_hat_integral(k, h, &[-1.0], s),
        _ => {
            let br = angle_breaks_2d(k[0], k[1]);
            let mut total = 0.0;
            for w in br.windows(2) {
                let (a, b) = (w[0], w[1]);
                if b - a < 1e-15 {
                    continue;
                }
                total += theta_rule
                    .integrate(a, b, |th| ray_hat_integral(k, h, &[th.cos(), th.sin()], s));
            }
            total
        }
    }
}

fn canonical(off: &[i64]) -> (i64, i64) {
    match off.len() {
        1 => (off[0].abs(), 0),
        _ => {
            let (a, b) = (off[0].abs(), off[1].abs());
            (a.max(b), a.min(b))
        }
    }
}

fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// The collocation matrix over interior nodes with its diagnostics.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub matrix: DMatrix<f64>,
    pub nodes: Vec<Vec<i64>>,
    /// max |A·torsion − 1| over nodes with |x| ≤ 0.8.
    pub consistency_defect: f64,
    /// Count of positive off-diagonal or nonpositive diagonal entries.
    pub sign_violations: usize,
}

/// Assemble the collocation matrix of (−Δ)^s with zero exterior data.
pub fn assemble_dirichlet_matrix(
    problem: &BallProblem,
    sch: &QuadratureScheme,
) -> Result<Assembly> {
    sch.validate()?;
    let n = problem.n();
    let s = problem.params.s();
    let h = problem.h();
    let a_ns = problem.params.constants().a_ns;
    let nodes = problem.interior_nodes();
    if nodes.is_empty() {
        return Err(Error::GridTooCoarse("no interior nodes".into()));
    }
    let kk = problem.half_count();
    let span = 2 * kk;
    let mut canon: Vec<(i64, i64)> = Vec::new();
    for a in 0..=span {
        for b in 0..=if n == 1 { 0 } else { a } {
            canon.push((a, b));
        }
    }
    let theta = gauss_legendre(12);
    let table: HashMap<(i64, i64), f64> = canon
        .par_iter()
        .map(|&(a, b)| {
            let off: Vec<i64> = if n == 1 { vec![a] } else { vec![a, b] };
            ((a, b), offset_weight(&off, h, s, &theta))
        })
        .collect();
    let area = sphere_area(n);
    let diag_far = area * (0.5 * h).powf(-2.0 * s) / (2.0 * s);
    let tau = area * (0.5 * h).powf(2.0 - 2.0 * s) / ((2.0 - 2.0 * s) * 2.0 * n as f64 * h * h);
    let m = nodes.len();
    let rows: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|xi| {
            let mut row = vec![0.0; m];
            for (j, xj) in nodes.iter().enumerate() {
                let off: Vec<i64> = xj.iter().zip(xi).map(|(a, b)| a - b).collect();
                let dist1: i64 = off.iter().map(|v| v.abs()).sum();
                let mut v = -table[&canonical(&off)];
                if dist1 == 0 {
                    v += diag_far + 2.0 * n as f64 * tau;
                } else if dist1 == 1 {
                    v -= tau;
                }
                row[j] = a_ns * v;
            }
            row
        })
        .collect();
    let matrix = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    let mut sign_violations = 0;
    for i in 0..m {
        for j in 0..m {
            let v = matrix[(i, j)];
            if (i == j && v <= 0.0) || (i != j && v > 0.0) {
                sign_violations += 1;
            }
        }
    }
    let torsion = torsion_profile(n, s);
    let samples = DVector::from_iterator(m, nodes.iter().map(|i| torsion.eval(&problem.coords(i))));
    let image = &matrix * samples;
    let consistency_defect = nodes
        .iter()
        .enumerate()
        .filter(|(_, i)| {
            problem.coords(i).iter().map(|v| v * v).sum::<f64>()
                <= DEFECT_RADIUS * DEFECT_RADIUS + 1e-12
        })
        .map(|(k, _)| (image[k] - 1.0).abs())
        .fold(0.0, f64::max);
    let limit = 10.0 * sch.target_tol;
    if consistency_defect > limit {
        return Err(Error::GridTooCoarse(format!(
            "near-diagonal consistency defect {consistency_defect:.3e} exceeds {limit:.3e}; refine h"
        )));
    }
    Ok(Assembly {
        matrix,
        nodes,
        consistency_defect,
        sign_violations,
    })
}

/// Damped Picard parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    pub theta: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            theta: 0.8,
            max_iter: 200,
            tol: 1e-8,
        }
    }
}

/// Nodal solution on the interior of the ball.
#[derive(Debug, Clone, Serialize)]
pub struct Solution {
    pub nodes: Vec<Vec<i64>>,
    pub values: Vec<f64>,
    pub h: f64,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Some iterate went below zero and used the tangent continuation of f.
    pub negative_iterate: bool,
    /// Every final nodal value is ≥ 0.
    pub nonnegative: bool,
    #[serde(skip)]
    index: HashMap<Vec<i64>, usize>,
}

impl Solution {
    pub fn from_values(nodes: Vec<Vec<i64>>, values: Vec<f64>, h: f64) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(k, v)| (v.clone(), k))
            .collect();
        let nonnegative = values.iter().all(|&v| v >= 0.0);
        Self {
            nodes,
            values,
            h,
            residual_inf: 0.0,
            iterations: 0,
            converged: true,
            negative_iterate: false,
            nonnegative,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.nodes.first().map_or(1, |v| v.len())
    }

    /// Nodal value, zero at exterior nodes.
    pub fn node_value(&self, idx: &[i64]) -> f64 {
        self.index.get(idx).map_or(0.0, |&k| self.values[k])
    }

    pub fn require_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NoConvergence {
                iterations: self.iterations,
                residual: self.residual_inf,
            })
        }
    }

    /// Piecewise-multilinear interpolant of the nodal values.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let base: Vec<i64> = x.iter().map(|v| (v / self.h).floor() as i64).collect();
        let frac: Vec<f64> = x
            .iter()
            .zip(&base)
            .map(|(v, b)| v / self.h - *b as f64)
            .collect();
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = Vec::with_capacity(n);
            for d in 0..n {
                let hi = (corner >> d) & 1 == 1;
                w *= if hi { frac[d] } else { 1.0 - frac[d] };
                idx.push(base[d] + hi as i64);
            }
            if w != 0.0 {
                acc += w * self.node_value(&idx);
            }
        }
        acc
    }

    /// The interpolant as a space field with zero exterior data.
    pub fn to_field(&self) -> SpaceField {
        let me = self.clone();
        let n = self.dim();
        let sup = self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        SpaceField::new(n, move |x| me.interpolate(x))
            .with_exterior(Exterior::unit_ball(n))
            .with_sup_bound(sup)
            .with_length_scale(self.h)
    }
}

/// Solve A u = f(u) by damped Picard iteration with one LU factorization.
pub fn solve_steady(
    problem: &BallProblem,
    assembly: &Assembly,
    cfg: &PicardConfig,
) -> Result<Solution> {
    if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
        return Err(Error::Domain(format!(
            "damping θ must lie in (0, 1], got {}",
            cfg.theta
        )));
    }
    let m = assembly.nodes.len();
    let lu = assembly.matrix.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::SingularMatrix);
    }
    let mut negative = false;
    let rhs = |u: &DVector<f64>, neg: &mut bool| {
        DVector::from_iterator(
            m,
            u.iter().map(|&v| {
                if v < 0.0 {
                    *neg = true;
                }
                problem.f.eval(v)
            }),
        )
    };
    let solve = |b: &DVector<f64>| lu.solve(b).ok_or(Error::SingularMatrix);
    let zero = DVector::zeros(m);
    let mut u = solve(&rhs(&zero, &mut negative))?;
    let mut iterations = 1;
    let mut best = (f64::INFINITY, u.clone());
    let converged = loop {
        let fu = rhs(&u, &mut negative);
        let res = (&assembly.matrix * &u - &fu).amax();
        if res < best.0 {
            best = (res, u.clone());
        }
        if res <= cfg.tol {
            break true;
        }
        if iterations >= cfg.max_iter {
            break false;
        }
        let target = solve(&fu)?;
        u += cfg.theta * (target - &u);
        iterations += 1;
    };
    let (residual_inf, u) = best;
    let mut sol = Solution::from_values(
        assembly.nodes.clone(),
        u.iter().cloned().collect(),
        problem.h(),
    );
    sol.residual_inf = residual_inf;
    sol.iterations = iterations;
    sol.converged = converged;
    sol.negative_iterate = negative;
    Ok(sol)
}

/// Natural cubic spline through the nodal values (zero outside the ball).
pub fn spline_field(problem: &BallProblem, solution: &Solution) -> SpaceField {
    let n = problem.n();
    let k = problem.half_count();
    let m = problem.per_axis();
    let mut values = Vec::with_capacity(m.pow(n as u32));
    match n {
        1 => values.extend((-k..=k).map(|i| solution.node_value(&[i]))),
        _ => {
            for i in -k..=k {
                for j in -k..=k {
                    values.push(solution.node_value(&[i, j]));
                }
            }
        }
    }
    let sup = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let spline = TensorSpline::new(n, m, -1.0, problem.h(), values);
    // natural cubic splines overshoot nodal data by a bounded factor
    SpaceField::new(n, move |x| spline.eval(x))
        .with_exterior(Exterior::unit_ball(n))
        .with_sup_bound(2.0 * sup)
        .with_length_scale(2.0 * problem.h())
}

/// |(−Δ)^s S u − f(u)| at interior nodes, with S the spline interpolant and the
/// operator evaluated by pointwise quadrature.
pub fn residual_field(
    problem: &BallProblem,
    solution: &Solution,
    sch: &QuadratureScheme,
) -> Result<Vec<f64>> {
    if solution.nodes.len() != problem.interior_nodes().len() || solution.dim() != problem.n() {
        return Err(Error::Shape(
            "solution does not match the problem grid".into(),
        ));
    }
    let field = spline_field(problem, solution);
    // a diagnostic: report the value whatever its quadrature estimate
    let sch = QuadratureScheme {
        target_tol: f64::INFINITY,
        ..*sch
    };
    solution
        .nodes
        .par_iter()
        .zip(solution.values.par_iter())
        .map(|(idx, &u)| {
            let x = problem.coords(idx);
            let v = fractional_laplacian_pointwise(&field, &x, &problem.params, &sch)?;
            Ok((v.value - problem.f.eval(u)).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(n: usize, s: f64, h: f64, f: Nonlinearity) -> BallProblem {
        BallProblem::new(FracParams::new(n, s).unwrap(), h, f).unwrap()
    }

    #[test]
    fn nonlinearity_checks() {
        assert!(Nonlinearity::one().hypothesis_ok);
        assert!(Nonlinearity::one_minus_half_u().hypothesis_ok);
        assert!(!Nonlinearity::polynomial(&[-1.0]).hypothesis_ok);
        assert!(!Nonlinearity::polynomial(&[0.0, 1.0]).hypothesis_ok);
        let p = Nonlinearity::polynomial(&[1.0, -0.5, 0.25, -0.1]);
        assert!(p.derivative_ok());
        let bad = Nonlinearity::new(|u| u * u, |_| 0.0, "wrong derivative");
        assert!(!bad.derivative_ok());
        assert_eq!(Nonlinearity::one_minus_half_u().eval(-2.0), 2.0);
        assert!(Nonlinearity::from_name("custom-polynomial", None).is_err());
        assert!(Nonlinearity::from_name("cubic", None).is_err());
    }

    #[test]
    fn problem_validation() {
        let p = FracParams::new(1, 0.5).unwrap();
        assert!(BallProblem::new(p, 0.3, Nonlinearity::one()).is_err());
        assert!(
            BallProblem::new(FracParams::new(3, 0.5).unwrap(), 0.25, Nonlinearity::one()).is_err()
        );
        let b = BallProblem::new(p, 0.125, Nonlinearity::one()).unwrap();
        assert_eq!(b.per_axis(), 17);
        assert_eq!(b.interior_nodes().len(), 15);
    }

    #[test]
    fn weights_form_a_partition_of_unity() {
        // Σ_k W_k = ∫_{|z| > h/2} |z|^{−n−2s} dz
        for (n, s) in [(1, 0.3), (1, 0.75), (2, 0.5), (2, 0.25)] {
            let h = 0.1;
            let theta = gauss_legendre(12);
            let reach = 400;
            let mut total = 0.0;
            if n == 1 {
                for k in -reach..=reach {
                    total += offset_weight(&[k], h, s, &theta);
                }
            } else {
                for k in -60i64..=60 {
                    for l in -60i64..=60 {
                        total += offset_weight(&[k, l], h, s, &theta);
                    }
                }
            }
            let far = (reach as f64 * h).max(6.0 * h);
            let exact = sphere_area(n) * (0.5 * h).powf(-2.0 * s) / (2.0 * s);
            let missing = if n == 1 {
                2.0 * (reach as f64 * h).powf(-2.0 * s) / (2.0 * s)
            } else {
                // the grid square of side 2·60h misses at most the exterior of its inscribed disc
                sphere_area(2) * (60.0 * h).powf(-2.0 * s) / (2.0 * s)
            };
            let _ = far;
            assert!(
                total <= exact * (1.0 + 1e-10),
                "n={n} s={s}: {total} > {exact}"
            );
            assert!(
                total >= exact - missing - 1e-8 * exact,
                "n={n} s={s}: {total} vs {exact}"
            );
        }
    }

    #[test]
    fn one_dimensional_weights_match_closed_form() {
        // W_0 = 2∫_{h/2}^{h} (1 − z/h) z^{−1−2s} dz
        let (h, s) = (0.05, 0.5);
        let theta = gauss_legendre(12);
        let w0 = offset_weight(&[0], h, s, &theta);
        let exact = 2.0 * (prim(-2.0, 0.5 * h, h) - prim(-1.0, 0.5 * h, h) / h);
        assert!((w0 - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn matrix_is_reflection_equivariant() {
        let prob = problem(2, 0.5, 0.125, Nonlinearity::one());
        let sch = QuadratureScheme {
            target_tol: 0.1,
            ..QuadratureScheme::default()
        };
        let asm = assemble_dirichlet_matrix(&prob, &sch).unwrap();
        let pos: HashMap<Vec<i64>, usize> = asm
            .nodes
            .iter()
            .enumerate()
            .map(|(k, v)| (v.clone(), k))
            .collect();
        type Map = fn(&[i64]) -> Vec<i64>;
        let maps: [Map; 3] = [
            |v| vec![-v[0], v[1]],
            |v| vec![v[0], -v[1]],
            |v| vec![v[1], v[0]],
        ];
        for map in maps {
            for (i, a) in asm.nodes.iter().enumerate() {
                for (j, b) in asm.nodes.iter().enumerate() {
                    let (si, sj) = (pos[&map(a)], pos[&map(b)]);
                    assert_eq!(asm.matrix[(si, sj)], asm.matrix[(i, j)]);
                }
            }
        }
        assert_eq!(asm.sign_violations, 0);
    }

    #[test]
    fn constant_vector_maps_to_positive_values() {
        let prob = problem(1, 0.5, 1.0 / 32.0, Nonlinearity::one());
        let asm = assemble_dirichlet_matrix(&prob, &QuadratureScheme::default()).unwrap();
        let ones = DVector::from_element(asm.nodes.len(), 1.0);
        assert!((&asm.matrix * ones).iter().all(|&v| v > 0.0));
    }

    #[test]
    fn zero_source_gives_zero_solution() {
        let prob = problem(1, 0.5, 1.0 / 16.0, Nonlinearity::zero());
        let asm = assemble_dirichlet_matrix(&prob, &QuadratureScheme::default()).unwrap();
        let sol = solve_steady(&prob, &asm, &PicardConfig::default()).unwrap();
        assert!(sol.values.iter().all(|&v| v == 0.0));
        assert_eq!(sol.residual_inf, 0.0);
        let res = residual_field(&prob, &sol, &QuadratureScheme::default()).unwrap();
        assert!(res.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_source_converges_in_one_step() {
        let prob = problem(1, 0.5, 1.0 / 32.0, Nonlinearity::one());
        let asm = assemble_dirichlet_matrix(&prob, &QuadratureScheme::default()).unwrap();
        let sol = solve_steady(&prob, &asm, &PicardConfig::default()).unwrap();
        assert!(sol.converged);
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn non_convergence_is_reported() {
        let prob = problem(1, 0.5, 1.0 / 16.0, Nonlinearity::one_minus_half_u());
        let asm = assemble_dirichlet_matrix(&prob, &QuadratureScheme::default()).unwrap();
        let cfg = PicardConfig {
            max_iter: 2,
            tol: 1e-14,
            ..PicardConfig::default()
        };
        let sol = solve_steady(&prob, &asm, &cfg).unwrap();
        assert!(!sol.converged);
        assert!(matches!(
            sol.require_converged(),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let prob = problem(1, 0.9, 0.5, Nonlinearity::one());
        let sch = QuadratureScheme {
            target_tol: 1e-4,
            ..QuadratureScheme::default()
        };
        assert!(matches!(
            assemble_dirichlet_matrix(&prob, &sch),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn interpolant_reproduces_nodes() {
        let nodes = vec![vec![-1], vec![0], vec![1]];
        let sol = Solution::from_values(nodes, vec![0.5, 1.0, 0.5], 0.5);
        assert_eq!(sol.interpolate(&[0.0]), 1.0);
        assert!((sol.interpolate(&[0.25]) - 0.75).abs() < 1e-15);
        assert!((sol.interpolate(&[-0.75]) - 0.25).abs() < 1e-15);
    }
}
