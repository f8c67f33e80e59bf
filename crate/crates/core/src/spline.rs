//! Natural cubic spline interpolation on uniform tensor grids (n ≤ 2).

/// Second derivatives of the natural cubic spline through equispaced `u`.
pub fn natural_second_derivatives(u: &[f64], h: f64) -> Vec<f64> {
    let m = u.len();
    let mut out = vec![0.0; m];
    if m < 3 {
        return out;
    }
    // Thomas solve of M_{i−1} + 4M_i + M_{i+1} = 6 δ²u_i / h², M_0 = M_{m−1} = 0
    let k = m - 2;
    let mut c = vec![0.0; k];
    let mut d = vec![0.0; k];
    for i in 0..k {
        let rhs = 6.0 * (u[i + 2] - 2.0 * u[i + 1] + u[i]) / (h * h);
        if i == 0 {
            c[0] = 1.0 / 4.0;
            d[0] = rhs / 4.0;
        } else {
            let den = 4.0 - c[i - 1];
            c[i] = 1.0 / den;
            d[i] = (rhs - d[i - 1]) / den;
        }
    }
    for i in (0..k).rev() {
        out[i + 1] = d[i] - if i + 1 < k { c[i] * out[i + 2] } else { 0.0 };
    }
    out
}

/// Tensor natural cubic spline on [lo, lo + (m−1)h]ⁿ with n ∈ {1, 2}.
#[derive(Debug, Clone)]
pub struct TensorSpline {
    n: usize,
    m: usize,
    lo: f64,
    h: f64,
    u: Vec<f64>,
    mx: Vec<f64>,
    my: Vec<f64>,
    mxy: Vec<f64>,
}

fn cell_basis(t: f64, h: f64) -> [f64; 4] {
    // weights of u_i, u_{i+1}, M_i, M_{i+1} at local coordinate t ∈ [0, 1]
    let a = 1.0 - t;
    let b = t;
    [
        a,
        b,
        (a * a * a - a) * h * h / 6.0,
        (b * b * b - b) * h * h / 6.0,
    ]
}

impl TensorSpline {
    /// `values` are row-major with the last axis fastest.
    pub fn new(n: usize, m: usize, lo: f64, h: f64, values: Vec<f64>) -> Self {
        assert!(n == 1 || n == 2, "tensor splines support n ≤ 2");
        assert_eq!(values.len(), m.pow(n as u32));
        if n == 1 {
            let mx = natural_second_derivatives(&values, h);
            return Self {
                n,
                m,
                lo,
                h,
                u: values,
                mx,
                my: Vec::new(),
                mxy: Vec::new(),
            };
        }
        let along_last = |data: &[f64]| {
            let mut out = vec![0.0; data.len()];
            for r in 0..m {
                let row = &data[r * m..(r + 1) * m];
                out[r * m..(r + 1) * m].copy_from_slice(&natural_second_derivatives(row, h));
            }
            out
        };
        let along_first = |data: &[f64]| {
            let mut out = vec![0.0; data.len()];
            let mut col = vec![0.0; m];
            for c in 0..m {
                for r in 0..m {
                    col[r] = data[r * m + c];
                }
                for (r, v) in natural_second_derivatives(&col, h).into_iter().enumerate() {
                    out[r * m + c] = v;
                }
            }
            out
        };
        let my = along_last(&values);
        let mx = along_first(&values);
        let mxy = along_first(&my);
        Self {
            n,
            m,
            lo,
            h,
            u: values,
            mx,
            my,
            mxy,
        }
    }

    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let s = (x - self.lo) / self.h;
        if s < 0.0 || s > (self.m - 1) as f64 {
            return None;
        }
        let i = (s.floor() as usize).min(self.m - 2);
        Some((i, s - i as f64))
    }

    /// Value at `x`; zero outside the grid box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        if self.n == 1 {
            let Some((i, t)) = self.locate(x[0]) else {
                return 0.0;
            };
            let w = cell_basis(t, self.h);
            return w[0] * self.u[i]
                + w[1] * self.u[i + 1]
                + w[2] * self.mx[i]
                + w[3] * self.mx[i + 1];
        }
        let (Some((i, tx)), Some((j, ty))) = (self.locate(x[0]), self.locate(x[1])) else {
            return 0.0;
        };
        let wx = cell_basis(tx, self.h);
        let wy = cell_basis(ty, self.h);
        let m = self.m;
        let mut acc = 0.0;
        for (a, di) in [(0usize, 0usize), (1, 1)] {
            for (b, dj) in [(0usize, 0usize), (1, 1)] {
                let k = (i + di) * m + (j + dj);
                acc += wx[a] * wy[b] * self.u[k]
                    + wx[a + 2] * wy[b] * self.mx[k]
                    + wx[a] * wy[b + 2] * self.my[k]
                    + wx[a + 2] * wy[b + 2] * self.mxy[k];
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_cubics() {
        let m = 21;
        let h = 0.1;
        let f = |x: f64| 0.3 * x * x * x - x + 1.0;
        let vals: Vec<f64> = (0..m).map(|i| f(-1.0 + i as f64 * h)).collect();
        let sp = TensorSpline::new(1, m, -1.0, h, vals.clone());
        for (i, v) in vals.iter().enumerate() {
            assert!((sp.eval(&[-1.0 + i as f64 * h]) - v).abs() < 1e-13);
        }
        // natural end conditions perturb cubics only near the ends
        assert!((sp.eval(&[0.05]) - f(0.05)).abs() < 1e-4);
        assert_eq!(sp.eval(&[1.5]), 0.0);
    }

    #[test]
    fn tensor_product_interpolates() {
        let m = 17;
        let h = 0.125;
        let f = |x: f64, y: f64| (x * 1.3).sin() * (0.7 * y).cos();
        let mut vals = Vec::new();
        for i in 0..m {
            for j in 0..m {
                vals.push(f(-1.0 + i as f64 * h, -1.0 + j as f64 * h));
            }
        }
        let sp = TensorSpline::new(2, m, -1.0, h, vals);
        assert!((sp.eval(&[0.25, -0.5]) - f(0.25, -0.5)).abs() < 1e-13);
        assert!((sp.eval(&[0.31, -0.47]) - f(0.31, -0.47)).abs() < 1e-4);
    }
}
