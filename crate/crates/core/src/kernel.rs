//! Fractional parameters, normalization constants and the space-time heat kernel.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{gamma, ln_gamma};

/// Space dimension `n` and fractional order `s ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct FracParams {
    n: usize,
    s: f64,
    constants: KernelConstants,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    s: f64,
}

impl TryFrom<RawParams> for FracParams {
    type Error = Error;
    fn try_from(raw: RawParams) -> Result<Self> {
        FracParams::new(raw.n, raw.s)
    }
}

impl From<FracParams> for RawParams {
    fn from(p: FracParams) -> Self {
        RawParams { n: p.n, s: p.s }
    }
}

/// Derived constants of the operator for a given `(n, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConstants {
    /// C_{n,s} = 1 / ((4π)^{n/2} |Γ(−s)|)
    pub c_ns: f64,
    /// A_{n,s} = 4^s Γ(n/2 + s) / (π^{n/2} |Γ(−s)|), the fractional Laplacian constant.
    pub a_ns: f64,
    pub gamma_abs_neg_s: f64,
}

impl FracParams {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be at least 1".into()));
        }
        check_order(s)?;
        let g = gamma_abs_neg(s)?;
        let half_n = n as f64 / 2.0;
        let c_ns = 1.0 / ((4.0 * PI).powf(half_n) * g);
        let log_a = s * 4f64.ln() + ln_gamma(half_n + s) - half_n * PI.ln() - g.ln();
        let constants = KernelConstants {
            c_ns,
            a_ns: log_a.exp(),
            gamma_abs_neg_s: g,
        };
        Ok(Self { n, s, constants })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn constants(&self) -> &KernelConstants {
        &self.constants
    }

    /// Same order, different dimension.
    pub fn with_dim(&self, n: usize) -> Result<Self> {
        Self::new(n, self.s)
    }
}

pub(crate) fn check_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("s must lie in (0,1), got {s}")));
    }
    Ok(())
}

/// A point `(x, t)` of ℝⁿ × ℝ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: Vec<f64>,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }

    pub fn check_dim(&self, p: &FracParams) -> Result<()> {
        if self.x.len() != p.n() {
            return Err(Error::Shape(format!(
                "point has {} space coordinates, parameters say n = {}",
                self.x.len(),
                p.n()
            )));
        }
        Ok(())
    }
}

/// |Γ(−s)| = Γ(1 − s) / s.
pub fn gamma_abs_neg(s: f64) -> Result<f64> {
    check_order(s)?;
    Ok(gamma(1.0 - s) / s)
}

pub fn normalization_constant(p: &FracParams) -> f64 {
    p.constants.c_ns
}

/// C_{n,s} r^{−(n/2+1+s)} exp(−|dx|²/(4r)), evaluated in log space.
pub fn heat_kernel(dx: &[f64], r: f64, p: &FracParams) -> Result<f64> {
    if !(r >= f64::MIN_POSITIVE) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "time lag r must be positive, got {r}"
        )));
    }
    let d2: f64 = dx.iter().map(|v| v * v).sum();
    let e = p.n as f64 / 2.0 + 1.0 + p.s;
    let log_k = p.constants.c_ns.ln() - e * r.ln() - d2 / (4.0 * r);
    let k = log_k.exp();
    if !k.is_finite() {
        return Err(Error::Domain(format!("kernel overflows at r = {r:e}")));
    }
    Ok(k)
}

/// ∫₀^∞ heat_kernel(d, r) dr = A_{n,s} d^{−(n+2s)}.
pub fn integrated_time_kernel(d: f64, p: &FracParams) -> Result<f64> {
    if !(d >= f64::MIN_POSITIVE) || !d.is_finite() {
        return Err(Error::Domain(format!(
            "distance d must be positive, got {d}"
        )));
    }
    let v = (p.constants.a_ns.ln() - (p.n as f64 + 2.0 * p.s) * d.ln()).exp();
    if !v.is_finite() {
        return Err(Error::Domain(format!("kernel overflows at d = {d:e}")));
    }
    Ok(v)
}
