//! Evaluatable fields with declared exterior rule and bounds.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::SpaceTimePoint;

pub type SpaceTimeFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How a field extends beyond its region of interest.
#[derive(Debug, Clone, PartialEq)]
pub enum Exterior {
    /// Defined by its formula on all of ℝⁿ.
    Global,
    /// Identically zero outside the closed ball; evaluations there short-circuit to 0.
    ZeroOutsideBall { center: Vec<f64>, radius: f64 },
}

impl Exterior {
    pub fn unit_ball(n: usize) -> Self {
        Exterior::ZeroOutsideBall {
            center: vec![0.0; n],
            radius: 1.0,
        }
    }

    /// True when a point lies in the region where the exterior rule zeroes the field.
    pub fn is_exterior(&self, x: &[f64]) -> bool {
        match self {
            Exterior::Global => false,
            Exterior::ZeroOutsideBall { center, radius } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                d2 >= radius * radius
            }
        }
    }

    /// Positive ρ at which `x + ρ ω` crosses the boundary sphere.
    pub fn ray_crossings(&self, x: &[f64], omega: &[f64]) -> Vec<f64> {
        match self {
            Exterior::Global => Vec::new(),
            Exterior::ZeroOutsideBall { center, radius } => {
                let b: f64 = omega
                    .iter()
                    .zip(x.iter().zip(center))
                    .map(|(w, (a, c))| w * (a - c))
                    .sum();
                let c0: f64 = x
                    .iter()
                    .zip(center)
                    .map(|(a, c)| (a - c) * (a - c))
                    .sum::<f64>()
                    - radius * radius;
                let disc = b * b - c0;
                if disc <= 0.0 {
                    return Vec::new();
                }
                let sq = disc.sqrt();
                [-b - sq, -b + sq]
                    .into_iter()
                    .filter(|&r| r > 0.0)
                    .collect()
            }
        }
    }

    fn bounding_union(a: &Exterior, b: &Exterior) -> Exterior {
        match (a, b) {
            (
                Exterior::ZeroOutsideBall {
                    center: c1,
                    radius: r1,
                },
                Exterior::ZeroOutsideBall {
                    center: c2,
                    radius: r2,
                },
            ) => {
                let d: f64 = c1
                    .iter()
                    .zip(c2)
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum::<f64>()
                    .sqrt();
                if d + r2 <= *r1 {
                    return a.clone();
                }
                if d + r1 <= *r2 {
                    return b.clone();
                }
                // enclose both balls around c1
                Exterior::ZeroOutsideBall {
                    center: c1.clone(),
                    radius: r1.max(d + r2),
                }
            }
            _ => Exterior::Global,
        }
    }
}

/// Declared parabolic Hölder class `C^{space, time}`; metadata only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderTag {
    pub space: f64,
    pub time: f64,
}

impl HolderTag {
    pub const SMOOTH: HolderTag = HolderTag {
        space: f64::INFINITY,
        time: f64::INFINITY,
    };
}

/// A function u(x, t) on ℝⁿ × ℝ with the metadata the quadratures need.
///
/// `length_scale` is the spatial scale on which the field varies (infinite
/// for fields constant in space). `time_scale`, when set, is the scale of
/// temporal oscillation and caps the lag-cell width. `time_support`, when
/// set, is an interval outside of which the field vanishes identically.
#[derive(Clone)]
pub struct SpaceTimeField {
    dim: usize,
    func: SpaceTimeFn,
    pub exterior: Exterior,
    pub sup_bound: Option<f64>,
    pub smoothness: HolderTag,
    pub length_scale: f64,
    pub time_scale: Option<f64>,
    pub time_support: Option<(f64, f64)>,
}

impl fmt::Debug for SpaceTimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceTimeField")
            .field("dim", &self.dim)
            .field("exterior", &self.exterior)
            .field("sup_bound", &self.sup_bound)
            .field("length_scale", &self.length_scale)
            .field("time_scale", &self.time_scale)
            .field("time_support", &self.time_support)
            .finish()
    }
}

impl SpaceTimeField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64], f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            func: Arc::new(f),
            exterior: Exterior::Global,
            sup_bound: None,
            smoothness: HolderTag::SMOOTH,
            length_scale: 1.0,
            time_scale: None,
            time_support: None,
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut u = Self::new(dim, move |_, _| c);
        u.sup_bound = Some(c.abs());
        u.length_scale = f64::INFINITY;
        u
    }

    pub fn with_exterior(mut self, e: Exterior) -> Self {
        self.exterior = e;
        self
    }

    pub fn with_sup_bound(mut self, m: f64) -> Self {
        self.sup_bound = Some(m);
        self
    }

    pub fn with_length_scale(mut self, l: f64) -> Self {
        self.length_scale = l;
        self
    }

    pub fn with_time_scale(mut self, t: f64) -> Self {
        self.time_scale = Some(t);
        self
    }

    pub fn with_time_support(mut self, lo: f64, hi: f64) -> Self {
        self.time_support = Some((lo, hi));
        self
    }

    pub fn with_smoothness(mut self, tag: HolderTag) -> Self {
        self.smoothness = tag;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        if let Some((lo, hi)) = self.time_support {
            if t <= lo || t >= hi {
                return 0.0;
            }
        }
        if self.exterior.is_exterior(x) {
            return 0.0;
        }
        (self.func)(x, t)
    }

    pub fn eval_at(&self, q: &SpaceTimePoint) -> f64 {
        self.eval(&q.x, q.t)
    }

    /// Spot-check the declared bound on sample points.
    pub fn check_sup_bound(&self, samples: &[SpaceTimePoint]) -> Result<()> {
        let Some(m) = self.sup_bound else {
            return Err(Error::Admissibility(
                "field has no declared sup bound".into(),
            ));
        };
        for q in samples {
            let v = self.eval_at(q);
            if !(v.abs() <= m * (1.0 + 1e-12)) {
                return Err(Error::Admissibility(format!(
                    "|u| = {} exceeds declared bound {m} at x = {:?}, t = {}",
                    v.abs(),
                    q.x,
                    q.t
                )));
            }
        }
        Ok(())
    }

    /// a·u + b·v with merged metadata.
    pub fn combine(a: f64, u: &SpaceTimeField, b: f64, v: &SpaceTimeField) -> Result<Self> {
        if u.dim != v.dim {
            return Err(Error::Shape(format!("dimensions {} and {}", u.dim, v.dim)));
        }
        let (fu, fv) = (u.clone(), v.clone());
        let mut w = SpaceTimeField::new(u.dim, move |x, t| a * fu.eval(x, t) + b * fv.eval(x, t));
        w.exterior = Exterior::bounding_union(&u.exterior, &v.exterior);
        w.sup_bound = match (u.sup_bound, v.sup_bound) {
            (Some(m1), Some(m2)) => Some(a.abs() * m1 + b.abs() * m2),
            _ => None,
        };
        w.length_scale = u.length_scale.min(v.length_scale);
        w.time_scale = match (u.time_scale, v.time_scale) {
            (Some(p), Some(q)) => Some(p.min(q)),
            (p, q) => p.or(q),
        };
        w.time_support = match (u.time_support, v.time_support) {
            (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.max(h2))),
            _ => None,
        };
        w.smoothness = HolderTag {
            space: u.smoothness.space.min(v.smoothness.space),
            time: u.smoothness.time.min(v.smoothness.time),
        };
        Ok(w)
    }
}

/// A function of space only.
#[derive(Clone)]
pub struct SpaceField {
    dim: usize,
    func: SpaceFn,
    pub exterior: Exterior,
    pub sup_bound: Option<f64>,
    pub length_scale: f64,
}

impl fmt::Debug for SpaceField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpaceField")
            .field("dim", &self.dim)
            .field("exterior", &self.exterior)
            .field("sup_bound", &self.sup_bound)
            .field("length_scale", &self.length_scale)
            .finish()
    }
}

impl SpaceField {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            dim,
            func: Arc::new(f),
            exterior: Exterior::Global,
            sup_bound: None,
            length_scale: 1.0,
        }
    }

    pub fn with_exterior(mut self, e: Exterior) -> Self {
        self.exterior = e;
        self
    }

    pub fn with_sup_bound(mut self, m: f64) -> Self {
        self.sup_bound = Some(m);
        self
    }

    pub fn with_length_scale(mut self, l: f64) -> Self {
        self.length_scale = l;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.exterior.is_exterior(x) {
            return 0.0;
        }
        (self.func)(x)
    }

    /// The time-constant extension u(x, t) = g(x).
    pub fn extend_in_time(&self) -> SpaceTimeField {
        let g = self.clone();
        let mut u = SpaceTimeField::new(self.dim, move |x, _| g.eval(x));
        u.exterior = self.exterior.clone();
        u.sup_bound = self.sup_bound;
        u.length_scale = self.length_scale;
        u
    }
}

/// A function of time only.
#[derive(Clone)]
pub struct TimeField {
    func: TimeFn,
    pub sup_bound: Option<f64>,
    pub time_scale: Option<f64>,
    pub support: Option<(f64, f64)>,
}

impl fmt::Debug for TimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeField")
            .field("sup_bound", &self.sup_bound)
            .field("time_scale", &self.time_scale)
            .field("support", &self.support)
            .finish()
    }
}

impl TimeField {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            func: Arc::new(f),
            sup_bound: None,
            time_scale: None,
            support: None,
        }
    }

    pub fn with_sup_bound(mut self, m: f64) -> Self {
        self.sup_bound = Some(m);
        self
    }

    pub fn with_time_scale(mut self, t: f64) -> Self {
        self.time_scale = Some(t);
        self
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }

    pub fn eval(&self, t: f64) -> f64 {
        if let Some((lo, hi)) = self.support {
            if t <= lo || t >= hi {
                return 0.0;
            }
        }
        (self.func)(t)
    }

    /// τ ↦ h(2t₀ − τ).
    pub fn reflected_about(&self, t0: f64) -> TimeField {
        let h = self.clone();
        let mut out = TimeField::new(move |t| h.eval(2.0 * t0 - t));
        out.sup_bound = self.sup_bound;
        out.time_scale = self.time_scale;
        out.support = self.support.map(|(lo, hi)| (2.0 * t0 - hi, 2.0 * t0 - lo));
        out
    }

    /// The space-constant extension u(x, t) = h(t).
    pub fn extend_in_space(&self, dim: usize) -> SpaceTimeField {
        let h = self.clone();
        let mut u = SpaceTimeField::new(dim, move |_, t| h.eval(t));
        u.sup_bound = self.sup_bound;
        u.length_scale = f64::INFINITY;
        u.time_scale = self.time_scale;
        u.time_support = self.support;
        u
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exterior_short_circuits() {
        let u = SpaceTimeField::new(2, |_, _| 7.0).with_exterior(Exterior::unit_ball(2));
        assert_eq!(u.eval(&[0.9, 0.5], 0.0), 0.0);
        assert_eq!(u.eval(&[0.1, 0.1], 0.0), 7.0);
    }

    #[test]
    fn ray_crossings_of_unit_ball() {
        let e = Exterior::unit_ball(2);
        let c = e.ray_crossings(&[0.5, 0.0], &[1.0, 0.0]);
        assert_eq!(c.len(), 1);
        assert!((c[0] - 0.5).abs() < 1e-15);
        let c = e.ray_crossings(&[-2.0, 0.0], &[1.0, 0.0]);
        assert_eq!(c.len(), 2);
        assert!(e.ray_crossings(&[0.0, 2.0], &[1.0, 0.0]).is_empty());
    }

    #[test]
    fn sup_bound_spot_check() {
        let u = SpaceTimeField::new(1, |x, _| x[0]).with_sup_bound(1.0);
        let ok = vec![SpaceTimePoint::new(vec![0.5], 0.0)];
        let bad = vec![SpaceTimePoint::new(vec![1.5], 0.0)];
        assert!(u.check_sup_bound(&ok).is_ok());
        assert!(u.check_sup_bound(&bad).is_err());
        let v = SpaceTimeField::new(1, |x, _| x[0]);
        assert!(v.check_sup_bound(&ok).is_err());
    }

    #[test]
    fn time_reflection() {
        let h = TimeField::new(|t| t).with_support(-1.0, 2.0);
        let r = h.reflected_about(0.5);
        assert_eq!(r.eval(0.0), 1.0);
        assert_eq!(r.support, Some((-1.0, 2.0)));
    }
}
