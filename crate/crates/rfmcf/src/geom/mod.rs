//! Discretized immersed hypersurfaces.
//!
//! Three parameter domains cover everything the laboratory flows or probes:
//! closed curves sampled on a uniform periodic grid over `[0, 2pi)`, open
//! curves on a closed interval, and axisymmetric surfaces of revolution
//! stored as a half-offset profile `(rho(sigma), z(sigma))` over `(0, pi)`
//! with the rotation axis along `z`. Profiles keep the poles off the grid;
//! reflection parity supplies the ghost values every stencil needs there.

pub mod deriv;
pub mod extrinsic;
pub mod identities;
pub mod intrinsic;

use ndarray::Array2;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use deriv::{Parity, SpectralDiff};

/// Parameter domain of an immersion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Periodic curve, `sigma_j = 2 pi j / N`, ambient dimension 2.
    ClosedCurve,
    /// Open curve on `[s0, s1]`, `sigma_j = s0 + j (s1 - s0) / (N - 1)`.
    OpenCurve { s0: f64, s1: f64 },
    /// Surface of revolution, `sigma_j = (j + 1/2) pi / N`, ambient
    /// dimension 3, nodes stored as `(rho, z)`.
    Profile,
}

/// A discretized immersion: node coordinates plus the parameter domain.
#[derive(Debug, Clone)]
pub struct Immersion {
    pub domain: Domain,
    /// `(N, 2)`: chart coordinates for curves, `(rho, z)` for profiles.
    pub nodes: Array2<f64>,
}

impl Immersion {
    pub fn closed_curve(nodes: Array2<f64>) -> Result<Self> {
        if nodes.nrows() < 16 {
            return Err(Error::TooCoarse {
                got: nodes.nrows(),
                min: 16,
            });
        }
        if nodes.ncols() != 2 {
            return Err(Error::BadShape("closed curves live in 2d charts".into()));
        }
        Ok(Self {
            domain: Domain::ClosedCurve,
            nodes,
        })
    }

    pub fn open_curve(nodes: Array2<f64>, s0: f64, s1: f64) -> Result<Self> {
        if nodes.nrows() < 8 {
            return Err(Error::TooCoarse {
                got: nodes.nrows(),
                min: 8,
            });
        }
        if nodes.ncols() != 2 || !(s1 > s0) {
            return Err(Error::BadShape("open curve needs 2d nodes and s1 > s0".into()));
        }
        Ok(Self {
            domain: Domain::OpenCurve { s0, s1 },
            nodes,
        })
    }

    pub fn profile(nodes: Array2<f64>) -> Result<Self> {
        if nodes.nrows() < 8 {
            return Err(Error::TooCoarse {
                got: nodes.nrows(),
                min: 8,
            });
        }
        if nodes.ncols() != 2 {
            return Err(Error::BadShape("profiles store (rho, z) pairs".into()));
        }
        if nodes.column(0).iter().any(|&r| r <= 0.0) {
            return Err(Error::BadShape(
                "profile radii must be positive away from the poles".into(),
            ));
        }
        Ok(Self {
            domain: Domain::Profile,
            nodes,
        })
    }

    /// Round circle, counterclockwise, so the inward normal convention
    /// applies directly.
    pub fn circle(center: [f64; 2], r: f64, n: usize) -> Self {
        let mut nodes = Array2::zeros((n, 2));
        for j in 0..n {
            let s = TAU * j as f64 / n as f64;
            nodes[[j, 0]] = center[0] + r * s.cos();
            nodes[[j, 1]] = center[1] + r * s.sin();
        }
        Self {
            domain: Domain::ClosedCurve,
            nodes,
        }
    }

    /// Graph curve `(x, f(x))` over `[x0, x1]`, parameterized by `x`.
    pub fn open_graph(x0: f64, x1: f64, n: usize, f: impl Fn(f64) -> f64) -> Self {
        let mut nodes = Array2::zeros((n, 2));
        let h = (x1 - x0) / (n - 1) as f64;
        for j in 0..n {
            let x = x0 + j as f64 * h;
            nodes[[j, 0]] = x;
            nodes[[j, 1]] = f(x);
        }
        Self {
            domain: Domain::OpenCurve { s0: x0, s1: x1 },
            nodes,
        }
    }

    /// Round sphere profile of radius `r` centered at `(0, 0, z0)`, running
    /// from the north pole (`sigma = 0`) to the south pole.
    pub fn sphere_profile(r: f64, z0: f64, n: usize) -> Self {
        Self::radial_profile(n, |_s| r, z0)
    }

    /// Profile `r(sigma) (sin sigma, cos sigma)` for a positive radius
    /// function that is smooth and even at both poles.
    pub fn radial_profile(n: usize, r_of: impl Fn(f64) -> f64, z0: f64) -> Self {
        let mut nodes = Array2::zeros((n, 2));
        let h = PI / n as f64;
        for j in 0..n {
            let s = (j as f64 + 0.5) * h;
            let r = r_of(s);
            nodes[[j, 0]] = r * s.sin();
            nodes[[j, 1]] = z0 + r * s.cos();
        }
        Self {
            domain: Domain::Profile,
            nodes,
        }
    }

    /// Sphere perturbed by a second Legendre mode:
    /// `r(sigma) = r (1 + eps (3 cos^2 sigma - 1) / 2)`.
    pub fn perturbed_sphere_profile(r: f64, eps: f64, n: usize) -> Self {
        Self::radial_profile(n, move |s| {
            let c = s.cos();
            r * (1.0 + eps * 0.5 * (3.0 * c * c - 1.0))
        }, 0.0)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.nrows()
    }

    /// Hypersurface dimension: 1 for curves, 2 for profiles.
    pub fn m(&self) -> usize {
        match self.domain {
            Domain::Profile => 2,
            _ => 1,
        }
    }

    /// Ambient chart dimension the immersion expects.
    pub fn ambient_dim(&self) -> usize {
        match self.domain {
            Domain::Profile => 3,
            _ => 2,
        }
    }

    /// Parameter spacing.
    pub fn h(&self) -> f64 {
        let n = self.n_nodes() as f64;
        match self.domain {
            Domain::ClosedCurve => TAU / n,
            Domain::OpenCurve { s0, s1 } => (s1 - s0) / (n - 1.0),
            Domain::Profile => PI / n,
        }
    }

    pub fn sigma(&self, j: usize) -> f64 {
        match self.domain {
            Domain::ClosedCurve => TAU * j as f64 / self.n_nodes() as f64,
            Domain::OpenCurve { s0, .. } => s0 + j as f64 * self.h(),
            Domain::Profile => (j as f64 + 0.5) * self.h(),
        }
    }

    /// Ambient chart coordinates of node `j`: profiles embed as
    /// `(rho, 0, z)` in the meridian plane.
    pub fn ambient_point(&self, j: usize) -> Vec<f64> {
        match self.domain {
            Domain::Profile => vec![self.nodes[[j, 0]], 0.0, self.nodes[[j, 1]]],
            _ => vec![self.nodes[[j, 0]], self.nodes[[j, 1]]],
        }
    }

    /// Apply a chart map to every node (profiles map their meridian plane).
    pub fn map_nodes(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let mut out = self.clone();
        for j in 0..self.n_nodes() {
            let p = self.ambient_point(j);
            let q = f(&p);
            match self.domain {
                Domain::Profile => {
                    out.nodes[[j, 0]] = q[0];
                    out.nodes[[j, 1]] = q[2];
                }
                _ => {
                    out.nodes[[j, 0]] = q[0];
                    out.nodes[[j, 1]] = q[1];
                }
            }
        }
        out
    }

    /// Signed chart area of a closed curve (shoelace); positive means
    /// counterclockwise.
    pub fn chart_signed_area(&self) -> f64 {
        let n = self.n_nodes();
        let mut acc = 0.0;
        for j in 0..n {
            let k = (j + 1) % n;
            acc += self.nodes[[j, 0]] * self.nodes[[k, 1]]
                - self.nodes[[k, 0]] * self.nodes[[j, 1]];
        }
        0.5 * acc
    }

    /// Chart volume enclosed by a profile surface: `pi * int rho^2 z' dsigma`
    /// in absolute value.
    pub fn chart_enclosed_volume(&self, ops: &SigmaOps) -> f64 {
        let z: Vec<f64> = self.nodes.column(1).to_vec();
        let rho: Vec<f64> = self.nodes.column(0).to_vec();
        let zp = ops.d1(&z, Parity::Even);
        let integrand: Vec<f64> = (0..self.n_nodes())
            .map(|j| rho[j] * rho[j] * zp[j])
            .collect();
        (PI * ops.integrate(&integrand, Parity::Odd)).abs()
    }
}

/// Grid differentiation and quadrature matched to one immersion's domain.
pub enum SigmaOps {
    Spectral(SpectralDiff),
    Open { h: f64 },
    Profile { h: f64 },
}

impl SigmaOps {
    pub fn for_immersion(imm: &Immersion) -> Self {
        match imm.domain {
            Domain::ClosedCurve => SigmaOps::Spectral(SpectralDiff::new(imm.n_nodes())),
            Domain::OpenCurve { .. } => SigmaOps::Open { h: imm.h() },
            Domain::Profile => SigmaOps::Profile { h: imm.h() },
        }
    }

    /// First parameter derivative. `parity` matters only on profile grids.
    pub fn d1(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        match self {
            SigmaOps::Spectral(op) => op.d1(f),
            SigmaOps::Open { h } => deriv::open_deriv(f, *h, 1),
            SigmaOps::Profile { h } => deriv::profile_deriv(f, *h, parity, 1),
        }
    }

    pub fn d2(&self, f: &[f64], parity: Parity) -> Vec<f64> {
        match self {
            SigmaOps::Spectral(op) => op.d2(f),
            SigmaOps::Open { h } => deriv::open_deriv(f, *h, 2),
            SigmaOps::Profile { h } => deriv::profile_deriv(f, *h, parity, 2),
        }
    }

    /// Integral of a grid series over the parameter domain.
    pub fn integrate(&self, f: &[f64], parity: Parity) -> f64 {
        match self {
            SigmaOps::Spectral(op) => deriv::trapezoid_periodic(f, TAU / op.len() as f64),
            SigmaOps::Open { h } => deriv::trapezoid_open(f, *h),
            SigmaOps::Profile { h } => deriv::midpoint_profile(f, *h, parity),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_is_counterclockwise_with_correct_area() {
        let c = Immersion::circle([0.3, -0.2], 1.5, 128);
        let a = c.chart_signed_area();
        assert!(a > 0.0);
        // Shoelace is exact on the inscribed polygon.
        let polygon = 0.5 * 128.0 * 1.5 * 1.5 * (TAU / 128.0).sin();
        assert_abs_diff_eq!(a, polygon, epsilon = 1e-12);
    }

    #[test]
    fn sphere_profile_encloses_its_ball() {
        let p = Immersion::sphere_profile(1.0, 0.0, 64);
        let ops = SigmaOps::for_immersion(&p);
        let v = p.chart_enclosed_volume(&ops);
        assert_abs_diff_eq!(v, 4.0 * PI / 3.0, epsilon = 1e-5);
    }

    #[test]
    fn profile_rejects_nonpositive_radius() {
        let mut nodes = Array2::zeros((16, 2));
        for j in 0..16 {
            nodes[[j, 0]] = -1.0;
        }
        assert!(Immersion::profile(nodes).is_err());
    }
}
