//! Pointwise evaluation of (∂t − Δ)^s and its one-variable reductions.
//!
//! The space-time operator is evaluated through the Gaussian (semigroup)
//! form obtained from y = x + 2√r z:
//!
//! ```text
//! (∂t−Δ)^s u(x,t) = 1/|Γ(−s)| ∫₀^∞ r^{−1−s} [u(x,t) − E_z u(x + 2√r z, t − r)] dr
//! ```
//!
//! where E_z is the mean under the density π^{−n/2} e^{−|z|²}. The lag
//! integral runs over geometric cells with Gauss–Legendre nodes in log r;
//! the piece below `r_min` is closed with the local slope of the integrand
//! and the piece above `r_max` is extrapolated from the last decade. The
//! fractional Laplacian uses the time-integrated kernel A_{n,s}|x−y|^{−n−2s}
//! with the pairing y ↔ 2x − y along rays.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Exterior, SpaceField, SpaceTimeField, TimeField};
use crate::gamma::gamma;
use crate::kernel::{check_order, gamma_abs_neg, FracParams, SpaceTimePoint};
use crate::rules::{gauss_hermite_normalized, gauss_legendre, Rule};

/// Resolution of the lag and spatial quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureScheme {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes_per_decade: usize,
    pub hermite_order: usize,
    pub target_tol: f64,
}

impl Default for QuadratureScheme {
    fn default() -> Self {
        Self {
            r_min: 1e-6,
            r_max: 1e12,
            nodes_per_decade: 16,
            hermite_order: 20,
            target_tol: 1e-2,
        }
    }
}

impl QuadratureScheme {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return Err(Error::Domain(format!(
                "need 0 < r_min < r_max, got r_min = {}, r_max = {}",
                self.r_min, self.r_max
            )));
        }
        if self.nodes_per_decade < 4 {
            return Err(Error::Domain("nodes_per_decade must be at least 4".into()));
        }
        if self.hermite_order < 4 {
            return Err(Error::Domain("hermite_order must be at least 4".into()));
        }
        if !(self.target_tol > 0.0) {
            return Err(Error::Domain("target_tol must be positive".into()));
        }
        Ok(())
    }
}

/// A quadrature result with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorValue {
    pub value: f64,
    pub est_error: f64,
}

/// 2 M r_max^{−s} / (s |Γ(−s)|): bound on the discarded lag tail.
pub fn truncation_tail_bound(sup_bound: f64, r_max: f64, s: f64) -> f64 {
    if sup_bound == 0.0 {
        return 0.0;
    }
    let g = gamma(1.0 - s) / s;
    2.0 * sup_bound * r_max.powf(-s) / (s * g)
}

const MAX_CELLS: usize = 2_000_000;
const LAG_GL_POINTS: usize = 4;
// Hermite is used while 2√r / ℓ stays below this
pub(crate) const HERMITE_REACH: f64 = 0.5;
const GAUSS_CUT: f64 = 6.5;
const GRADING_LEVELS: usize = 12;

/// Cells `[a, b]` of a geometric grid on `[lo, hi]`.
fn geometric_cells(lo: f64, hi: f64, per_decade: usize) -> Vec<(f64, f64)> {
    let mut cells = Vec::new();
    if !(hi > lo) {
        return cells;
    }
    let ratio = 10f64.powf(1.0 / per_decade as f64);
    let mut a = lo;
    let mut k = 1;
    loop {
        let b = lo * ratio.powi(k);
        if b >= hi * (1.0 - 1e-12) {
            cells.push((a, hi));
            break;
        }
        cells.push((a, b));
        a = b;
        k += 1;
    }
    cells
}

/// Split cells lying below `horizon` so no cell is wider than `width`.
fn cap_width(cells: Vec<(f64, f64)>, width: f64, horizon: f64) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(cells.len());
    for (a, b) in cells {
        if a < horizon && b - a > width {
            let m = ((b - a) / width).ceil() as usize;
            if out.len() + m > MAX_CELLS {
                return Err(Error::Resolution(format!(
                    "lag grid exceeds {MAX_CELLS} cells; lower r_max or the declared oscillation scale"
                )));
            }
            let step = (b - a) / m as f64;
            for j in 0..m {
                let lo = a + j as f64 * step;
                let hi = if j + 1 == m { b } else { lo + step };
                out.push((lo, hi));
            }
        } else {
            out.push((a, b));
        }
    }
    Ok(out)
}

/// Insert breakpoints and grade cells geometrically toward each of them.
fn graded_cells(cells: Vec<(f64, f64)>, breaks: &[f64]) -> Vec<(f64, f64)> {
    if breaks.is_empty() {
        return cells;
    }
    let mut edges: Vec<f64> = Vec::with_capacity(cells.len() + breaks.len() + 1);
    if let Some(&(a, _)) = cells.first() {
        edges.push(a);
    }
    edges.extend(cells.iter().map(|c| c.1));
    let (lo, hi) = (edges[0], *edges.last().unwrap());
    for &b in breaks {
        if b > lo && b < hi {
            edges.push(b);
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
    edges.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs());
    let is_break = |v: f64| {
        breaks
            .iter()
            .any(|&b| (v - b).abs() <= 1e-13 * b.abs().max(1e-300))
    };
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        match (is_break(a), is_break(b)) {
            (false, false) => out.push((a, b)),
            (true, false) => grade_toward_left(a, b, &mut out),
            (false, true) => grade_toward_right(a, b, &mut out),
            (true, true) => {
                let m = 0.5 * (a + b);
                grade_toward_left(a, m, &mut out);
                grade_toward_right(m, b, &mut out);
            }
        }
    }
    out
}

fn grade_toward_right(a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let len = b - a;
    let mut lo = a;
    for k in 1..=GRADING_LEVELS {
        let hi = b - len * 0.5f64.powi(k as i32);
        out.push((lo, hi));
        lo = hi;
    }
    out.push((lo, b));
}

fn grade_toward_left(a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
    let len = b - a;
    let mut pts = vec![a];
    for k in (1..=GRADING_LEVELS).rev() {
        pts.push(a + len * 0.5f64.powi(k as i32));
    }
    pts.push(b);
    for w in pts.windows(2) {
        out.push((w[0], w[1]));
    }
}

/// How the integral is closed beyond the last cell.
#[derive(Clone, Copy)]
enum Tail {
    /// The averaged term vanishes beyond this point.
    Vanishing(f64),
    /// Extrapolate the averaged term by its weighted mean over the last decade.
    Extrapolated(f64),
}

/// ∫ w^{−1−p} [center − avg(w)] dw over (0, ∞), with D(w) = L w^k + M w^{k+m} + … at 0.
struct PowerIntegral {
    p: f64,
    inner_order: f64,
    inner_step: f64,
    w_min: f64,
}

struct PowerSum {
    value: f64,
    inner_err: f64,
}

impl PowerIntegral {
    fn run<F>(
        &self,
        center: f64,
        cells: &[(f64, f64)],
        gl: &Rule,
        tail: Tail,
        mut avg: F,
    ) -> Result<PowerSum>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let p = self.p;
        let mut body = 0.0;
        let mut first: Vec<(f64, f64)> = Vec::new();
        let (mut num, mut den) = (0.0, 0.0);
        let end = match tail {
            Tail::Vanishing(e) | Tail::Extrapolated(e) => e,
        };
        let decade = end / 10.0;
        for (ci, &(a, b)) in cells.iter().enumerate() {
            let (la, lb) = (a.ln(), b.ln());
            let half = 0.5 * (lb - la);
            let mid = 0.5 * (la + lb);
            for (&z, &wt) in gl.nodes.iter().zip(&gl.weights) {
                let v = mid + half * z;
                let w = v.exp();
                let e = avg(w)?;
                let d = center - e;
                let weight = wt * half * (-p * v).exp();
                body += weight * d;
                if ci == 0 {
                    first.push((w, d));
                }
                if a >= decade {
                    num += weight * e;
                    den += weight;
                }
            }
        }
        let (inner, inner_err) = if first.len() >= 2 {
            // D(w) ≈ L w^k + M w^{k+m} through the outermost nodes of the first cell
            let (k, m) = (self.inner_order, self.inner_step);
            let (wa, da) = first[0];
            let (wb, db) = first[first.len() - 1];
            let (a1, a2) = (wa.powf(k), wa.powf(k + m));
            let (b1, b2) = (wb.powf(k), wb.powf(k + m));
            let det = a1 * b2 - a2 * b1;
            let l = (da * b2 - db * a2) / det;
            let mm = (a1 * db - b1 * da) / det;
            let lead = l * self.w_min.powf(k - p) / (k - p);
            let next = mm * self.w_min.powf(k + m - p) / (k + m - p);
            (lead + next, next.abs())
        } else {
            (0.0, 0.0)
        };
        let tail_val = match tail {
            Tail::Vanishing(e) => center * e.powf(-p) / p,
            Tail::Extrapolated(e) => {
                let mean = if den > 0.0 { num / den } else { 0.0 };
                (center - mean) * e.powf(-p) / p
            }
        };
        // when there are no cells the whole range [w_min, end] is analytic
        let gap = if cells.is_empty() && end > self.w_min {
            center * (self.w_min.powf(-p) - end.powf(-p)) / p
        } else {
            0.0
        };
        Ok(PowerSum {
            value: body + inner + tail_val + gap,
            inner_err,
        })
    }
}

/// Per-pass spatial resolution.
pub(crate) struct SpatialRule {
    hermite: Rule,
    panel: Rule,
    panel_width: f64,
    trap_factor: f64,
}

/// Coarse and fine spatial rules of the master operator.
pub(crate) fn spatial_rules(sch: &QuadratureScheme) -> (SpatialRule, SpatialRule) {
    (
        SpatialRule::new(sch.hermite_order, 6, 0.5, 2.2),
        SpatialRule::new(sch.hermite_order + sch.hermite_order / 2, 8, 0.375, 3.0),
    )
}

impl SpatialRule {
    fn new(hermite_order: usize, panel_points: usize, panel_width: f64, trap_factor: f64) -> Self {
        Self {
            hermite: gauss_hermite_normalized(hermite_order),
            panel: gauss_legendre(panel_points),
            panel_width,
            trap_factor,
        }
    }
}

/// Visit every node of a tensor rule given per-axis nodes and weights.
fn tensor_sum<F: FnMut(&[f64]) -> f64>(axes: &[(Vec<f64>, Vec<f64>)], mut f: F) -> f64 {
    let n = axes.len();
    if axes.iter().any(|a| a.0.is_empty()) {
        return 0.0;
    }
    let mut idx = vec![0usize; n];
    let mut pt: Vec<f64> = axes.iter().map(|a| a.0[0]).collect();
    let mut total = 0.0;
    loop {
        let w: f64 = (0..n).map(|k| axes[k].1[idx[k]]).product();
        if w != 0.0 {
            total += w * f(&pt);
        }
        let mut k = 0;
        loop {
            if k == n {
                return total;
            }
            idx[k] += 1;
            if idx[k] < axes[k].0.len() {
                pt[k] = axes[k].0[idx[k]];
                break;
            }
            idx[k] = 0;
            pt[k] = axes[k].0[0];
            k += 1;
        }
    }
}

/// E_z u(x + 2√r z, τ).
pub(crate) fn gaussian_mean(
    u: &SpaceTimeField,
    x: &[f64],
    tau: f64,
    r: f64,
    rule: &SpatialRule,
) -> Result<f64> {
    if let Some((lo, hi)) = u.time_support {
        if tau <= lo || tau >= hi {
            return Ok(0.0);
        }
    }
    if u.length_scale.is_infinite() {
        return Ok(u.eval(x, tau));
    }
    let n = x.len();
    let scale = 2.0 * r.sqrt();
    let reach = scale / u.length_scale;
    if reach <= HERMITE_REACH {
        let axes: Vec<_> = x
            .iter()
            .map(|&xi| {
                (
                    rule.hermite.nodes.iter().map(|z| xi + scale * z).collect(),
                    rule.hermite.weights.clone(),
                )
            })
            .collect();
        return Ok(tensor_sum(&axes, |y| u.eval(y, tau)));
    }
    match &u.exterior {
        Exterior::ZeroOutsideBall { center, radius } => {
            // integrate over the support in y with the heat density
            let width = GAUSS_CUT * scale;
            let norm = 1.0 / (4.0 * PI * r).sqrt();
            let panel_w = rule.panel_width * u.length_scale.min(4.0 * r.sqrt());
            let mut axes = Vec::with_capacity(n);
            for k in 0..n {
                let lo = (center[k] - radius).max(x[k] - width);
                let hi = (center[k] + radius).min(x[k] + width);
                if lo >= hi {
                    return Ok(0.0);
                }
                let panels = (((hi - lo) / panel_w).ceil() as usize).clamp(2, 128);
                let step = (hi - lo) / panels as f64;
                let mut nodes = Vec::with_capacity(panels * rule.panel.len());
                let mut weights = Vec::with_capacity(nodes.capacity());
                for j in 0..panels {
                    let a = lo + j as f64 * step;
                    let mid = a + 0.5 * step;
                    for (&z, &w) in rule.panel.nodes.iter().zip(&rule.panel.weights) {
                        let y = mid + 0.5 * step * z;
                        let d = x[k] - y;
                        nodes.push(y);
                        weights.push(w * 0.5 * step * norm * (-d * d / (4.0 * r)).exp());
                    }
                }
                axes.push((nodes, weights));
            }
            Ok(tensor_sum(&axes, |y| u.eval(y, tau)))
        }
        Exterior::Global => {
            let m = ((rule.trap_factor * (reach + 12.0)).ceil() as usize) | 1;
            if (m as f64).powi(n as i32) > (1u64 << 22) as f64 {
                return Err(Error::Resolution(format!(
                    "globally defined field needs {m}^{n} spatial nodes at r = {r:.3e}; lower r_max"
                )));
            }
            let h = 2.0 * GAUSS_CUT / (m - 1) as f64;
            let zs: Vec<f64> = (0..m).map(|j| -GAUSS_CUT + j as f64 * h).collect();
            let ws: Vec<f64> = zs.iter().map(|z| (-z * z).exp()).collect();
            let tot: f64 = ws.iter().sum();
            let ws: Vec<f64> = ws.iter().map(|w| w / tot).collect();
            let axes: Vec<_> = x
                .iter()
                .map(|&xi| (zs.iter().map(|z| xi + scale * z).collect(), ws.clone()))
                .collect();
            Ok(tensor_sum(&axes, |y| u.eval(y, tau)))
        }
    }
}

fn require_bound(m: Option<f64>) -> Result<f64> {
    m.ok_or_else(|| {
        Error::Admissibility("field lacks a sup bound, the lag tail cannot be bounded".into())
    })
}

fn finish(
    value: f64,
    coarse: f64,
    inner_err: f64,
    tail: f64,
    sch: &QuadratureScheme,
) -> Result<OperatorValue> {
    let est = (value - coarse).abs() + inner_err + tail;
    if !value.is_finite() {
        return Err(Error::Resolution(
            "quadrature produced a non-finite value".into(),
        ));
    }
    if est > sch.target_tol {
        return Err(Error::Tolerance {
            est,
            target: sch.target_tol,
        });
    }
    Ok(OperatorValue {
        value,
        est_error: est,
    })
}

struct LagPass {
    per_decade: usize,
    cap: Option<f64>,
}

fn lag_cells(sch: &QuadratureScheme, end: f64, pass: &LagPass) -> Result<Vec<(f64, f64)>> {
    let cells = geometric_cells(sch.r_min, end, pass.per_decade);
    match pass.cap {
        Some(w) => cap_width(cells, w, end),
        None => Ok(cells),
    }
}

/// Lag integral 1/|Γ(−s)| ∫ r^{−1−s}[center − avg(r)] dr on coarse and refined grids.
pub(crate) fn lag_operator<F>(
    center: f64,
    s: f64,
    sch: &QuadratureScheme,
    horizon: Option<f64>,
    time_scale: Option<f64>,
    sup: f64,
    mut avg: F,
) -> Result<OperatorValue>
where
    F: FnMut(f64, bool) -> Result<f64>,
{
    let g = gamma_abs_neg(s)?;
    let (end, tail) = match horizon {
        Some(h) if h < sch.r_max => (h.max(sch.r_min), Tail::Vanishing(h.max(sch.r_min))),
        _ => (sch.r_max, Tail::Extrapolated(sch.r_max)),
    };
    let gl = gauss_legendre(LAG_GL_POINTS);
    let integral = PowerIntegral {
        p: s,
        inner_order: 1.0,
        inner_step: 1.0,
        w_min: sch.r_min,
    };
    let mut results = [0.0f64; 2];
    let mut inner_err = 0.0;
    for (i, refine) in [false, true].into_iter().enumerate() {
        let pass = LagPass {
            per_decade: sch.nodes_per_decade * if refine { 2 } else { 1 },
            cap: time_scale.map(|t| if refine { 0.5 * t } else { t }),
        };
        let cells = lag_cells(sch, end, &pass)?;
        let sum = integral.run(center, &cells, &gl, tail, |r| avg(r, refine))?;
        results[i] = sum.value / g;
        inner_err = sum.inner_err / g;
    }
    finish(
        results[1],
        results[0],
        inner_err,
        truncation_tail_bound(sup, sch.r_max, s),
        sch,
    )
}

/// (∂t − Δ)^s u at `q` through the Gaussian-average form.
pub fn master_operator_pointwise(
    u: &SpaceTimeField,
    q: &SpaceTimePoint,
    p: &FracParams,
    sch: &QuadratureScheme,
) -> Result<OperatorValue> {
    sch.validate()?;
    q.check_dim(p)?;
    if u.dim() != p.n() {
        return Err(Error::Shape(format!(
            "field dimension {} but n = {}",
            u.dim(),
            p.n()
        )));
    }
    let sup = require_bound(u.sup_bound)?;
    let center = u.eval_at(q);
    let horizon = u.time_support.map(|(lo, _)| q.t - lo);
    if let Some(h) = horizon {
        if h <= 0.0 {
            // the whole history vanishes, and so does u(q)
            return finish(
                0.0,
                0.0,
                0.0,
                truncation_tail_bound(sup, sch.r_max, p.s()),
                sch,
            );
        }
    }
    let (coarse, fine) = spatial_rules(sch);
    lag_operator(
        center,
        p.s(),
        sch,
        horizon,
        u.time_scale,
        sup,
        |r, refine| {
            let rule = if refine { &fine } else { &coarse };
            gaussian_mean(u, &q.x, q.t - r, r, rule)
        },
    )
}

/// Marchaud left derivative (1/|Γ(−s)|) ∫_{−∞}^t (h(t) − h(τ)) (t − τ)^{−1−s} dτ.
pub fn marchaud_left(
    h: &TimeField,
    t: f64,
    s: f64,
    sch: &QuadratureScheme,
) -> Result<OperatorValue> {
    check_order(s)?;
    sch.validate()?;
    let sup = require_bound(h.sup_bound)?;
    let horizon = h.support.map(|(lo, _)| t - lo);
    if matches!(horizon, Some(hz) if hz <= 0.0) {
        return finish(0.0, 0.0, 0.0, truncation_tail_bound(sup, sch.r_max, s), sch);
    }
    lag_operator(h.eval(t), s, sch, horizon, h.time_scale, sup, |r, _| {
        Ok(h.eval(t - r))
    })
}

/// Marchaud right derivative (1/|Γ(−s)|) ∫_t^∞ (ψ(t) − ψ(τ)) (τ − t)^{−1−s} dτ.
pub fn marchaud_right(
    psi: &TimeField,
    t: f64,
    s: f64,
    sch: &QuadratureScheme,
) -> Result<OperatorValue> {
    check_order(s)?;
    sch.validate()?;
    let sup = require_bound(psi.sup_bound)?;
    let horizon = psi.support.map(|(_, hi)| hi - t);
    if matches!(horizon, Some(hz) if hz <= 0.0) {
        return finish(0.0, 0.0, 0.0, truncation_tail_bound(sup, sch.r_max, s), sch);
    }
    lag_operator(psi.eval(t), s, sch, horizon, psi.time_scale, sup, |r, _| {
        Ok(psi.eval(t + r))
    })
}

/// Directions on the half sphere with weights summing to |S^{n−1}|/2.
fn half_sphere_rule(n: usize, refine: bool) -> Result<Vec<(Vec<f64>, f64)>> {
    match n {
        1 => Ok(vec![(vec![1.0], 1.0)]),
        2 => {
            let panels = if refine { 24 } else { 16 };
            let gl = gauss_legendre(6);
            let step = PI / panels as f64;
            let mut out = Vec::new();
            for j in 0..panels {
                let mid = (j as f64 + 0.5) * step;
                for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
                    let th = mid + 0.5 * step * z;
                    out.push((vec![th.cos(), th.sin()], w * 0.5 * step));
                }
            }
            Ok(out)
        }
        3 => {
            let (nm, nphi) = if refine { (12, 36) } else { (8, 24) };
            let gl = gauss_legendre(nm);
            let mut out = Vec::new();
            for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
                let mu = 0.5 * (z + 1.0);
                let sn = (1.0 - mu * mu).sqrt();
                for k in 0..nphi {
                    let ph = 2.0 * PI * k as f64 / nphi as f64;
                    out.push((
                        vec![sn * ph.cos(), sn * ph.sin(), mu],
                        0.5 * w * 2.0 * PI / nphi as f64,
                    ));
                }
            }
            Ok(out)
        }
        _ => Err(Error::Unsupported(format!(
            "pointwise fractional Laplacian is implemented for n ≤ 3, got n = {n}"
        ))),
    }
}

fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0)
}

/// (−Δ)^s g at `x` via the time-integrated kernel A_{n,s}|x − y|^{−n−2s}.
pub fn fractional_laplacian_pointwise(
    g: &SpaceField,
    x: &[f64],
    p: &FracParams,
    sch: &QuadratureScheme,
) -> Result<OperatorValue> {
    sch.validate()?;
    let n = p.n();
    if g.dim() != n || x.len() != n {
        return Err(Error::Shape(format!(
            "field dimension {}, point dimension {}, n = {n}",
            g.dim(),
            x.len()
        )));
    }
    let sup = require_bound(g.sup_bound)?;
    let s = p.s();
    let two_s = 2.0 * s;
    let a_ns = p.constants().a_ns;
    let rho_min = 2.0 * sch.r_min.sqrt();
    let rho_max = 2.0 * sch.r_max.sqrt();
    let center = 2.0 * g.eval(x);
    let gl = gauss_legendre(LAG_GL_POINTS);
    let integral = PowerIntegral {
        p: two_s,
        inner_order: 2.0,
        inner_step: 2.0,
        w_min: rho_min,
    };
    let mut results = [0.0f64; 2];
    let mut inner_err = 0.0;
    for (i, refine) in [false, true].into_iter().enumerate() {
        let per_decade = sch.nodes_per_decade * if refine { 2 } else { 1 };
        let cap = g.length_scale / if refine { 4.0 } else { 2.0 };
        let mut total = 0.0;
        let mut total_inner = 0.0;
        let mut ypos = vec![0.0; n];
        let mut yneg = vec![0.0; n];
        for (omega, wdir) in half_sphere_rule(n, refine)? {
            let neg: Vec<f64> = omega.iter().map(|v| -v).collect();
            let mut breaks = g.exterior.ray_crossings(x, &omega);
            breaks.extend(g.exterior.ray_crossings(x, &neg));
            let compact = !matches!(g.exterior, Exterior::Global);
            let (end, tail) = if compact {
                let h = breaks.iter().cloned().fold(0.0, f64::max);
                if h <= rho_min {
                    // both half-rays stay in the zero region beyond ρ_min
                    (rho_min, Tail::Vanishing(rho_min))
                } else {
                    let e = h.min(rho_max);
                    (
                        e,
                        if h < rho_max {
                            Tail::Vanishing(e)
                        } else {
                            Tail::Extrapolated(e)
                        },
                    )
                }
            } else {
                (rho_max, Tail::Extrapolated(rho_max))
            };
            let cells = geometric_cells(rho_min, end, per_decade);
            let cells = graded_cells(cells, &breaks);
            let cells = if cap.is_finite() {
                cap_width(cells, cap, end)?
            } else {
                cells
            };
            let sum = integral.run(center, &cells, &gl, tail, |rho| {
                for k in 0..n {
                    ypos[k] = x[k] + rho * omega[k];
                    yneg[k] = x[k] - rho * omega[k];
                }
                Ok(g.eval(&ypos) + g.eval(&yneg))
            })?;
            total += wdir * sum.value;
            total_inner += wdir * sum.inner_err;
        }
        results[i] = a_ns * total;
        inner_err = a_ns * total_inner;
    }
    let native = 2.0 * sup * a_ns * sphere_area(n) * rho_max.powf(-two_s) / two_s;
    let tail = truncation_tail_bound(sup, sch.r_max, s).max(native);
    finish(results[1], results[0], inner_err, tail, sch)
}
