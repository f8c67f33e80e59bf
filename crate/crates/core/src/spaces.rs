//! Membership in the slowly increasing class and parabolic Hölder probes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::kernel::FracParams;
use crate::rules::gauss_legendre;

/// Outcome of the truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Member,
    Diverges,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub verdict: Verdict,
    pub radii: Vec<f64>,
    pub estimates: Vec<f64>,
}

const LAG_FLOOR: f64 = 1e-8;
const LAG_PER_DECADE: usize = 8;
const MAX_SPATIAL_NODES: usize = 1 << 20;
const CONVERGED: f64 = 1e-3;

/// Truncated weighted integral over |x| ≤ R, 0 < t − τ ≤ R².
fn truncated_integral(u: &SpaceTimeField, t: f64, p: &FracParams, radius: f64) -> f64 {
    let n = p.n();
    let expo = n as f64 / 2.0 + 1.0 + p.s();
    let gl = gauss_legendre(4);
    let r_hi = radius * radius;
    let decades = (r_hi / LAG_FLOOR).log10();
    let cells = ((decades * LAG_PER_DECADE as f64).ceil() as usize).max(1);
    let (la, lb) = (LAG_FLOOR.ln(), r_hi.ln());
    let dv = (lb - la) / cells as f64;
    let mut total = 0.0;
    for c in 0..cells {
        let mid = la + (c as f64 + 0.5) * dv;
        for (&z, &w) in gl.nodes.iter().zip(&gl.weights) {
            let r = (mid + 0.5 * dv * z).exp();
            let inner = spatial_integral(u, t - r, r, radius, n);
            total += w * 0.5 * dv * r * inner / (1.0 + r.powf(expo));
        }
    }
    total
}

/// ∫_{|x| ≤ R} |u(x, τ)| e^{−|x|²/4r} dx by a tensor trapezoid rule.
fn spatial_integral(u: &SpaceTimeField, tau: f64, r: f64, radius: f64, n: usize) -> f64 {
    // below r = 1/8 growth slower than e^{|x|²} is swamped outside 8 widths
    let half = if r <= 0.125 {
        radius.min(16.0 * r.sqrt())
    } else {
        radius
    };
    let mut dx = (0.5 * r.sqrt()).min(u.length_scale / 4.0).min(half / 8.0);
    let mut m = ((2.0 * half / dx).ceil() as usize).max(2) + 1;
    while m.pow(n as u32) > MAX_SPATIAL_NODES {
        dx *= 1.5;
        m = ((2.0 * half / dx).ceil() as usize).max(2) + 1;
    }
    let h = 2.0 * half / (m - 1) as f64;
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; n];
    let mut acc = 0.0;
    let r2max = radius * radius;
    loop {
        let mut w = 1.0;
        let mut x2 = 0.0;
        for k in 0..n {
            x[k] = -half + idx[k] as f64 * h;
            x2 += x[k] * x[k];
            if idx[k] == 0 || idx[k] == m - 1 {
                w *= 0.5;
            }
        }
        if x2 <= r2max {
            acc += w * u.eval(&x, tau).abs() * (-x2 / (4.0 * r)).exp();
        }
        let mut k = 0;
        loop {
            if k == n {
                return acc * h.powi(n as i32);
            }
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Evaluate the defining integral of the slowly increasing class on a ladder of truncations.
pub fn slowly_increasing_membership(
    u: &SpaceTimeField,
    t: f64,
    p: &FracParams,
    truncation_ladder: &[f64],
) -> MembershipReport {
    let estimates: Vec<f64> = truncation_ladder
        .iter()
        .map(|&r| truncated_integral(u, t, p, r))
        .collect();
    let verdict = classify(&estimates, u.sup_bound.is_some());
    MembershipReport {
        verdict,
        radii: truncation_ladder.to_vec(),
        estimates,
    }
}

fn classify(est: &[f64], bounded: bool) -> Verdict {
    if est.iter().any(|v| !v.is_finite()) {
        return Verdict::Diverges;
    }
    if bounded {
        return Verdict::Member;
    }
    if est.len() < 2 {
        return Verdict::Inconclusive;
    }
    let (a, b) = (est[est.len() - 2], est[est.len() - 1]);
    if (b - a).abs() <= CONVERGED * b.abs() || (a == 0.0 && b == 0.0) {
        return Verdict::Member;
    }
    let inc: Vec<f64> = est.windows(2).map(|w| w[1] - w[0]).collect();
    if inc.len() >= 2 && inc.iter().all(|&d| d > 0.0) && inc.windows(2).all(|w| w[1] > w[0]) {
        return Verdict::Diverges;
    }
    Verdict::Inconclusive
}

/// Axis-aligned box in space-time.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Largest sampled ratio |u(x,t) − u(y,τ)| / (|x − y| + |t − τ|^{1/2})^{2α}.
pub fn parabolic_holder_seminorm(
    u: &SpaceTimeField,
    sample_box: &SpaceTimeBox,
    alpha: f64,
    pair_budget: usize,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(Error::Domain(format!(
            "α must lie in (0, 1/2], got {alpha}"
        )));
    }
    let n = sample_box.lo.len();
    if sample_box.hi.len() != n || u.dim() != n {
        return Err(Error::Shape("box and field dimensions differ".into()));
    }
    let degenerate = sample_box.t_hi <= sample_box.t_lo
        || sample_box
            .lo
            .iter()
            .zip(&sample_box.hi)
            .any(|(a, b)| b <= a);
    if degenerate {
        return Err(Error::Degenerate("sample box has zero volume".into()));
    }
    // m^{n+1} points give about m^{2(n+1)}/2 pairs
    let dims = (n + 1) as f64;
    let pts_budget = (2.0 * pair_budget as f64).sqrt();
    let m = (pts_budget.powf(1.0 / dims).floor() as usize).max(2);
    let coord = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (m - 1) as f64;
    let total = m.pow(n as u32 + 1);
    let mut samples = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut x = Vec::with_capacity(n);
        for k in 0..n {
            x.push(coord(sample_box.lo[k], sample_box.hi[k], rem % m));
            rem /= m;
        }
        let t = coord(sample_box.t_lo, sample_box.t_hi, rem % m);
        let v = u.eval(&x, t);
        samples.push((x, t, v));
    }
    let mut best: f64 = 0.0;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let (xa, ta, va) = &samples[i];
            let (xb, tb, vb) = &samples[j];
            let dx: f64 = xa
                .iter()
                .zip(xb)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let dist = dx + (ta - tb).abs().sqrt();
            best = best.max((va - vb).abs() / dist.powf(2.0 * alpha));
        }
    }
    Ok(best)
}
