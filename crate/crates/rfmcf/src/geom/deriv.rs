//! Grid differentiation and quadrature for the three parameter domains in
//! play: periodic curves on `[0, 2pi)`, open curves on a closed interval,
//! and half-offset profile grids on `(0, pi)` whose boundary behavior is
//! encoded by reflection parity at the two poles.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

/// Reflection parity of an axisymmetric grid series at the poles. The rule
/// for geometric fields: a component with `q` profile-direction indices has
/// parity `(-1)^q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// Spectral differentiation of periodic series on the uniform grid
/// `sigma_j = 2 pi j / N`.
pub struct SpectralDiff {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SpectralDiff {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    fn transform(&self, data: &[f64], scale: impl Fn(i64) -> Complex<f64>) -> Vec<f64> {
        let n = self.n;
        assert_eq!(data.len(), n);
        let mut buf: Vec<Complex<f64>> = data.iter().map(|&x| Complex::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        for (k, v) in buf.iter_mut().enumerate() {
            let kk = if k <= n / 2 {
                k as i64
            } else {
                k as i64 - n as i64
            };
            *v *= scale(kk);
        }
        self.inv.process(&mut buf);
        buf.iter().map(|v| v.re / n as f64).collect()
    }

    pub fn d1(&self, data: &[f64]) -> Vec<f64> {
        let nyq = (self.n / 2) as i64;
        self.transform(data, |k| {
            if self.n % 2 == 0 && k == nyq {
                Complex::new(0.0, 0.0)
            } else {
                Complex::new(0.0, k as f64)
            }
        })
    }

    pub fn d2(&self, data: &[f64]) -> Vec<f64> {
        self.transform(data, |k| Complex::new(-((k * k) as f64), 0.0))
    }
}

/// Finite-difference weights for the `m`-th derivative at `z` from samples
/// at `xs`, by Fornberg's recursion.
pub fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > m);
    let mut c = vec![vec![0.0f64; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|row| row[m]).collect()
}

/// Fourth-order derivatives of an open-interval series on a uniform grid,
/// with one-sided windows near the ends.
pub fn open_deriv(data: &[f64], h: f64, m: usize) -> Vec<f64> {
    let n = data.len();
    let w = 6.min(n);
    let mut out = vec![0.0; n];
    for j in 0..n {
        let start = j.saturating_sub(w / 2).min(n - w);
        let xs: Vec<f64> = (0..w).map(|k| ((start + k) as f64 - j as f64) * h).collect();
        let wts = fornberg_weights(0.0, &xs, m);
        out[j] = (0..w).map(|k| wts[k] * data[start + k]).sum();
    }
    out
}

/// Derivatives on the half-offset profile grid `sigma_j = (j + 1/2) h`,
/// `h = pi / N`, using two reflected ghost values at each pole.
pub fn profile_deriv(data: &[f64], h: f64, parity: Parity, m: usize) -> Vec<f64> {
    let n = data.len();
    assert!(n >= 4);
    let s0 = parity.sign();
    let get = |j: isize| -> f64 {
        if j < 0 {
            s0 * data[(-1 - j) as usize]
        } else if j >= n as isize {
            s0 * data[2 * n - 1 - j as usize]
        } else {
            data[j as usize]
        }
    };
    let (w, hp): (&[f64], f64) = match m {
        1 => (&[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0], h),
        2 => (
            &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            h * h,
        ),
        _ => panic!("profile derivatives support orders 1 and 2"),
    };
    (0..n as isize)
        .map(|j| {
            let s: f64 = w
                .iter()
                .enumerate()
                .map(|(k, &c)| c * get(j + k as isize - 2))
                .sum();
            s / hp
        })
        .collect()
}

/// `h * sum` on a full period; spectrally accurate for smooth periodic data.
pub fn trapezoid_periodic(data: &[f64], h: f64) -> f64 {
    h * data.iter().sum::<f64>()
}

/// Endpoint-corrected trapezoid rule on an open interval, fourth order. The
/// correction uses one-sided five-point derivative estimates at both ends.
pub fn trapezoid_open(data: &[f64], h: f64) -> f64 {
    let n = data.len();
    assert!(n >= 5);
    let base = h * (data.iter().sum::<f64>() - 0.5 * (data[0] + data[n - 1]));
    let xs: Vec<f64> = (0..5).map(|k| k as f64 * h).collect();
    let wl = fornberg_weights(0.0, &xs, 1);
    let dl: f64 = (0..5).map(|k| wl[k] * data[k]).sum();
    let dr: f64 = (0..5).map(|k| -wl[k] * data[n - 1 - k]).sum();
    base - h * h / 12.0 * (dr - dl)
}

/// Endpoint-corrected midpoint rule on the half-offset profile grid. The
/// correction term vanishes identically for even-parity integrands.
pub fn midpoint_profile(data: &[f64], h: f64, parity: Parity) -> f64 {
    let base = h * data.iter().sum::<f64>();
    match parity {
        Parity::Even => base,
        Parity::Odd => {
            let n = data.len();
            assert!(n >= 5);
            let xs: Vec<f64> = (0..5).map(|k| (k as f64 + 0.5) * h).collect();
            let w0 = fornberg_weights(0.0, &xs, 1);
            let d0: f64 = (0..5).map(|k| w0[k] * data[k]).sum();
            let dpi: f64 = (0..5).map(|k| -w0[k] * data[n - 1 - k]).sum();
            base + h * h / 24.0 * (dpi - d0)
        }
    }
}

/// Solve a cyclic tridiagonal system with constant corner couplings:
/// row `i` reads `a[i] x[i-1] + b[i] x[i] + c[i] x[i+1] = r[i]` with wrapped
/// indices. Uses the Sherman-Morrison splitting over a Thomas solve.
pub fn cyclic_tridiagonal(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    assert!(n >= 3);
    let gamma = -b[0];
    let mut bb = b.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= a[0] * c[n - 1] / gamma;
    let x = thomas(a, &bb, c, r);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = c[n - 1];
    let z = thomas(a, &bb, c, &u);
    let fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
    (0..n).map(|i| x[i] - fact * z[i]).collect()
}

fn thomas(a: &[f64], b: &[f64], c: &[f64], r: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut rp = vec![0.0; n];
    cp[0] = c[0] / b[0];
    rp[0] = r[0] / b[0];
    for i in 1..n {
        let m = b[i] - a[i] * cp[i - 1];
        cp[i] = c[i] / m;
        rp[i] = (r[i] - a[i] * rp[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = rp[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = rp[i] - cp[i] * x[i + 1];
    }
    x
}

/// Periodic cubic spline through `values[j]` at `sigma_j = 2 pi j / N`,
/// evaluated at arbitrary parameters (wrapped into the period).
pub struct PeriodicSpline {
    values: Vec<f64>,
    m2: Vec<f64>,
    h: f64,
}

impl PeriodicSpline {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let h = std::f64::consts::TAU / n as f64;
        let a = vec![1.0; n];
        let b = vec![4.0; n];
        let c = vec![1.0; n];
        let r: Vec<f64> = (0..n)
            .map(|j| {
                6.0 / (h * h)
                    * (values[(j + 1) % n] - 2.0 * values[j] + values[(j + n - 1) % n])
            })
            .collect();
        let m2 = cyclic_tridiagonal(&a, &b, &c, &r);
        Self {
            values: values.to_vec(),
            m2,
            h,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.values.len();
        let period = std::f64::consts::TAU;
        let mut t = s % period;
        if t < 0.0 {
            t += period;
        }
        let j = ((t / self.h) as usize).min(n - 1);
        let jp = (j + 1) % n;
        let xl = j as f64 * self.h;
        let u = t - xl;
        let v = self.h - u;
        let h = self.h;
        self.m2[j] * v * v * v / (6.0 * h)
            + self.m2[jp] * u * u * u / (6.0 * h)
            + (self.values[j] / h - self.m2[j] * h / 6.0) * v
            + (self.values[jp] / h - self.m2[jp] * h / 6.0) * u
    }
}
