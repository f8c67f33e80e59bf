//! Discrete Fourier realization of (∂t − Δ)^s on a periodic space-time grid.
//!
//! Modes are e^{i(ξ·x + ρt)}; the operator acts by the principal-branch
//! multiplier (iρ + |ξ|²)^s. Left Marchaud derivatives carry (iρ)^s and right
//! ones (−iρ)^s.

use std::f64::consts::PI;

pub use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{check_order, FracParams};

/// Principal-branch z^s with Arg z ∈ (−π, π]; 0^s = 0.
pub fn principal_pow(z: Complex64, s: f64) -> Complex64 {
    let m = z.norm();
    if m == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(m.powf(s), s * z.im.atan2(z.re))
}

/// (−iρ)^s, the multiplier of the right Marchaud derivative.
pub fn marchaud_symbol(rho: f64, s: f64) -> Complex64 {
    principal_pow(Complex64::new(0.0, -rho), s)
}

/// (iρ + |ξ|²)^s.
pub fn spacetime_symbol(xi: &[f64], rho: f64, s: f64) -> Complex64 {
    let k2: f64 = xi.iter().map(|v| v * v).sum();
    principal_pow(Complex64::new(k2, rho), s)
}

/// n space axes of `nx` points on [−L_x/2, L_x/2) and `nt` time points on [−L_t/2, L_t/2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    pub n: usize,
    pub nx: usize,
    pub lx: f64,
    pub nt: usize,
    pub lt: f64,
}

impl TorusGrid {
    pub fn new(n: usize, nx: usize, lx: f64, nt: usize, lt: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("space dimension must be positive".into()));
        }
        for (name, v) in [("N_x", nx), ("N_t", nt)] {
            if v < 8 || v % 2 != 0 {
                return Err(Error::Domain(format!(
                    "{name} must be even and at least 8, got {v}"
                )));
            }
        }
        if !(lx > 0.0 && lt > 0.0) {
            return Err(Error::Domain("periods must be positive".into()));
        }
        Ok(Self { n, nx, lx, nt, lt })
    }

    pub fn len(&self) -> usize {
        self.nx.pow(self.n as u32) * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis lengths, space axes first and time last.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.nx; self.n];
        s.push(self.nt);
        s
    }

    /// Multi-index of a flat index; time varies fastest.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let shape = self.shape();
        let mut idx = vec![0; shape.len()];
        for a in (0..shape.len()).rev() {
            idx[a] = flat % shape[a];
            flat /= shape[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        self.shape()
            .iter()
            .zip(idx)
            .fold(0, |acc, (&m, &i)| acc * m + i)
    }

    /// Coordinates (x, t) of a multi-index.
    pub fn point(&self, idx: &[usize]) -> (Vec<f64>, f64) {
        let x = idx[..self.n]
            .iter()
            .map(|&i| -0.5 * self.lx + i as f64 * self.lx / self.nx as f64)
            .collect();
        let t = -0.5 * self.lt + idx[self.n] as f64 * self.lt / self.nt as f64;
        (x, t)
    }

    fn wavenumber(index: usize, count: usize, period: f64) -> f64 {
        let k = if index <= count / 2 {
            index as f64
        } else {
            index as f64 - count as f64
        };
        2.0 * PI * k / period
    }

    /// Frequencies (ξ, ρ) of a mode multi-index; Nyquist indices map to +π N/L.
    pub fn frequency(&self, idx: &[usize]) -> (Vec<f64>, f64) {
        let xi = idx[..self.n]
            .iter()
            .map(|&i| Self::wavenumber(i, self.nx, self.lx))
            .collect();
        (xi, Self::wavenumber(idx[self.n], self.nt, self.lt))
    }

    /// Operator multiplier of a mode, real on the time-Nyquist plane.
    pub fn multiplier(&self, idx: &[usize], s: f64) -> Complex64 {
        let (xi, rho) = self.frequency(idx);
        let sym = spacetime_symbol(&xi, rho, s);
        if idx[self.n] == self.nt / 2 {
            // the conjugate partner shares this ρ, so only the real part is consistent
            Complex64::new(sym.re, 0.0)
        } else {
            sym
        }
    }
}

/// Real samples over a torus grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub values: Vec<f64>,
    pub grid: TorusGrid,
}

impl GridField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { values, grid })
    }

    pub fn from_fn<F: Fn(&[f64], f64) -> f64>(grid: TorusGrid, f: F) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, t) = grid.point(&grid.unravel(k));
                f(&x, t)
            })
            .collect();
        Self { values, grid }
    }

    /// Periodic shift by `cells` along `axis`: out[i] = self[i − cells].
    pub fn shifted(&self, axis: usize, cells: isize) -> Self {
        let shape = self.grid.shape();
        let m = shape[axis] as isize;
        let mut out = vec![0.0; self.values.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            let mut idx = self.grid.unravel(k);
            idx[axis] = (idx[axis] as isize - cells).rem_euclid(m) as usize;
            *slot = self.values[self.grid.ravel(&idx)];
        }
        Self {
            values: out,
            grid: self.grid,
        }
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn spread(&self) -> f64 {
        let (lo, hi) = self
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        hi - lo
    }
}

/// Output of a spectral application.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub field: GridField,
    /// Largest imaginary part discarded after the inverse transform.
    pub imag_residue: f64,
}

fn transform(grid: &TorusGrid, data: &mut [Complex64], inverse: bool) {
    let shape = grid.shape();
    let mut planner = FftPlanner::new();
    let total = data.len();
    let mut stride = 1;
    for axis in (0..shape.len()).rev() {
        let m = shape[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(m)
        } else {
            planner.plan_fft_forward(m)
        };
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let block = stride * m;
        for base in (0..total).step_by(block) {
            for off in 0..stride {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + off + j * stride];
                }
                fft.process(&mut line);
                for (j, v) in line.iter().enumerate() {
                    data[base + off + j * stride] = *v;
                }
            }
        }
        stride *= m;
    }
    if inverse {
        let scale = 1.0 / total as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

fn check_grid(grid: &TorusGrid, p: &FracParams) -> Result<()> {
    if grid.n != p.n() {
        return Err(Error::Shape(format!(
            "grid has n = {} but parameters have n = {}",
            grid.n,
            p.n()
        )));
    }
    Ok(())
}

fn filter<F: Fn(&[usize]) -> Complex64>(f: &GridField, mult: F) -> SpectralResult {
    let grid = f.grid;
    let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    transform(&grid, &mut data, false);
    for (k, v) in data.iter_mut().enumerate() {
        *v *= mult(&grid.unravel(k));
    }
    transform(&grid, &mut data, true);
    let imag_residue = data.iter().fold(0.0f64, |a, v| a.max(v.im.abs()));
    SpectralResult {
        field: GridField {
            values: data.iter().map(|v| v.re).collect(),
            grid,
        },
        imag_residue,
    }
}

/// Multiply every mode by (iρ + |ξ|²)^s.
pub fn apply_operator_spectral(f: &GridField, p: &FracParams) -> Result<SpectralResult> {
    check_grid(&f.grid, p)?;
    let s = p.s();
    Ok(filter(f, |idx| f.grid.multiplier(idx, s)))
}

/// Multiply every mode by the left Marchaud multiplier (iρ)^s, ignoring space.
pub fn apply_marchaud_left_spectral(f: &GridField, s: f64) -> Result<SpectralResult> {
    check_order(s)?;
    let grid = f.grid;
    Ok(filter(f, |idx| {
        let (_, rho) = grid.frequency(idx);
        let sym = principal_pow(Complex64::new(0.0, rho), s);
        if idx[grid.n] == grid.nt / 2 {
            Complex64::new(sym.re, 0.0)
        } else {
            sym
        }
    }))
}

/// Number of modes where the multiplier vanishes.
pub fn liouville_nullspace_dimension(grid: &TorusGrid, p: &FracParams) -> usize {
    (0..grid.len())
        .filter(|&k| grid.multiplier(&grid.unravel(k), p.s()).norm() == 0.0)
        .count()
}

/// Smallest multiplier magnitude over modes outside the kernel.
pub fn min_nonzero_symbol(grid: &TorusGrid, p: &FracParams) -> f64 {
    (0..grid.len())
        .map(|k| grid.multiplier(&grid.unravel(k), p.s()).norm())
        .filter(|&m| m > 0.0)
        .fold(f64::INFINITY, f64::min)
}

/// Keep only the kernel modes of the operator.
pub fn project_onto_kernel(f: &GridField, p: &FracParams) -> Result<SpectralResult> {
    check_grid(&f.grid, p)?;
    let s = p.s();
    Ok(filter(f, |idx| {
        if f.grid.multiplier(idx, s).norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}
