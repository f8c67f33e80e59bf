//! Smooth profiles and closed-form reference functions.

use crate::field::{Exterior, SpaceField, SpaceTimeField, TimeField};
use crate::gamma::gamma;

/// φ(z) = e^{1 + 1/(|z|² − 1)} inside the unit ball, 0 outside; φ(0) = 1.
pub fn bump_phi(z2: f64) -> f64 {
    if z2 >= 1.0 {
        0.0
    } else {
        (1.0 + 1.0 / (z2 - 1.0)).exp()
    }
}

fn smooth_step_base(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// C^∞ step: 0 for u ≤ 0, 1 for u ≥ 1.
pub fn smooth_step(u: f64) -> f64 {
    let a = smooth_step_base(u);
    let b = smooth_step_base(1.0 - u);
    a / (a + b)
}

/// η(τ): 1 on |τ| ≤ 1/2, 0 on |τ| ≥ 1, smooth in between with values in [0, 1].
pub fn eta_profile(tau: f64) -> f64 {
    let a = tau.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        smooth_step(2.0 * (1.0 - a))
    }
}

/// Constant c with (−Δ)^s [c (1 − |x|²)_+^s] = 1 in the unit ball.
pub fn torsion_constant(n: usize, s: f64) -> f64 {
    let h = n as f64 / 2.0;
    gamma(h) / (4f64.powf(s) * gamma(1.0 + s) * gamma(h + s))
}

/// The torsion function of the unit ball, zero outside.
pub fn torsion_profile(n: usize, s: f64) -> SpaceField {
    let c = torsion_constant(n, s);
    SpaceField::new(n, move |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        c * (1.0 - r2).max(0.0).powf(s)
    })
    .with_exterior(Exterior::unit_ball(n))
    .with_sup_bound(c)
    .with_length_scale(0.25)
}

/// The torsion profile translated by `shift`, restricted to the unit ball.
pub fn shifted_torsion(n: usize, s: f64, shift: &[f64]) -> SpaceField {
    let c = torsion_constant(n, s);
    let shift = shift.to_vec();
    SpaceField::new(n, move |x| {
        let r2: f64 = x.iter().zip(&shift).map(|(v, d)| (v - d) * (v - d)).sum();
        c * (1.0 - r2).max(0.0).powf(s)
    })
    .with_exterior(Exterior::unit_ball(n))
    .with_sup_bound(c)
    .with_length_scale(0.25)
}

/// a·φ((x − c)/R).
pub fn space_bump(center: &[f64], radius: f64, amplitude: f64) -> SpaceField {
    let c = center.to_vec();
    let n = c.len();
    let inv = 1.0 / (radius * radius);
    let cc = c.clone();
    SpaceField::new(n, move |x| {
        let r2: f64 = x.iter().zip(&cc).map(|(v, d)| (v - d) * (v - d)).sum();
        amplitude * bump_phi(r2 * inv)
    })
    .with_exterior(Exterior::ZeroOutsideBall { center: c, radius })
    .with_sup_bound(amplitude.abs())
    .with_length_scale(radius / 4.0)
}

/// a·η((t − t₀)/w).
pub fn time_cutoff(t0: f64, width: f64, amplitude: f64) -> TimeField {
    TimeField::new(move |t| amplitude * eta_profile((t - t0) / width))
        .with_sup_bound(amplitude.abs())
        .with_support(t0 - width, t0 + width)
}

/// φ((x − c)/R)·η((t − t₀)/R²), the parabolically scaled space-time cutoff.
pub fn spacetime_cutoff(center: &[f64], t0: f64, radius: f64) -> SpaceTimeField {
    let c = center.to_vec();
    let cc = c.clone();
    let inv = 1.0 / (radius * radius);
    let width = radius * radius;
    SpaceTimeField::new(c.len(), move |x, t| {
        let r2: f64 = x.iter().zip(&cc).map(|(v, d)| (v - d) * (v - d)).sum();
        bump_phi(r2 * inv) * eta_profile((t - t0) / width)
    })
    .with_exterior(Exterior::ZeroOutsideBall { center: c, radius })
    .with_sup_bound(1.0)
    .with_length_scale(radius / 4.0)
    .with_time_support(t0 - width, t0 + width)
}

/// cos(ξ·x + ρt).
pub fn plane_wave(xi: &[f64], rho: f64) -> SpaceTimeField {
    let k = xi.to_vec();
    let kn: f64 = k.iter().map(|v| v * v).sum::<f64>().sqrt();
    let kk = k.clone();
    let mut u = SpaceTimeField::new(k.len(), move |x, t| {
        let ph: f64 = x.iter().zip(&kk).map(|(a, b)| a * b).sum::<f64>() + rho * t;
        ph.cos()
    })
    .with_sup_bound(1.0)
    .with_length_scale(if kn > 0.0 { 1.0 / kn } else { f64::INFINITY });
    if rho != 0.0 {
        u = u.with_time_scale(1.0 / rho.abs());
    }
    u
}

/// e^{−|x|²} e^{−t²}, truncated to zero where it is below double precision.
pub fn gaussian_bump(n: usize) -> SpaceTimeField {
    const CUT: f64 = 6.5;
    SpaceTimeField::new(n, |x, t| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        (-r2 - t * t).exp()
    })
    .with_exterior(Exterior::ZeroOutsideBall {
        center: vec![0.0; n],
        radius: CUT,
    })
    .with_sup_bound(1.0)
    .with_length_scale(0.5)
    .with_time_support(-CUT, CUT)
}

/// p(|x|²)·φ(x/2)·η(t/4) with p given by its coefficients.
pub fn polynomial_cutoff(n: usize, coeffs: &[f64]) -> SpaceTimeField {
    let c = coeffs.to_vec();
    // |x|² ≤ 4 on the support
    let bound: f64 = c
        .iter()
        .enumerate()
        .map(|(k, v)| v.abs() * 4f64.powi(k as i32))
        .sum();
    SpaceTimeField::new(n, move |x, t| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let p = c.iter().rev().fold(0.0, |acc, a| acc * r2 + a);
        p * bump_phi(r2 / 4.0) * eta_profile(t / 4.0)
    })
    .with_exterior(Exterior::ZeroOutsideBall {
        center: vec![0.0; n],
        radius: 2.0,
    })
    .with_sup_bound(bound)
    .with_length_scale(0.5)
    .with_time_support(-4.0, 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_values() {
        assert_eq!(bump_phi(0.0), 1.0);
        assert_eq!(bump_phi(1.0), 0.0);
        assert_eq!(eta_profile(0.0), 1.0);
        assert_eq!(eta_profile(0.5), 1.0);
        assert_eq!(eta_profile(1.0), 0.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        for i in 0..10_000 {
            let v = eta_profile(-1.5 + 3.0 * i as f64 / 9999.0);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn torsion_constant_half_order_line() {
        assert!((torsion_constant(1, 0.5) - 1.0).abs() < 1e-14);
        let u = torsion_profile(1, 0.5);
        assert!((u.eval(&[0.6]) - 0.8).abs() < 1e-14);
        assert_eq!(u.eval(&[1.0]), 0.0);
    }
}
