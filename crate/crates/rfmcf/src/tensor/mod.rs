//! Pointwise curvature engine.
//!
//! Everything downstream (hypersurface geometry, flow stepping, monitors,
//! action functionals) consumes curvature data through one pipeline: a metric
//! jet at a chart point is contracted into Christoffel symbols, the lowered
//! Riemann tensor, its first covariant derivative, Ricci, and scalar
//! curvature. Jets come either from closed-form background formulas or from
//! finite differences of a metric evaluation ([`fd::fd_jet`]); the pipeline
//! itself never knows which.
//!
//! Sign convention: `R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms} + ...`,
//! so the round sphere has positive scalar curvature.

pub mod fd;

use ndarray::{Array1, Array2, Array3, Array4, Array5};

use crate::error::{Error, Result};
use crate::linalg;

/// Metric components and their coordinate derivatives at one chart point.
///
/// Index layout: `dg[[c,a,b]] = d_c g_ab`, `d2g[[d,c,a,b]] = d_d d_c g_ab`,
/// `d3g[[e,d,c,a,b]] = d_e d_d d_c g_ab`, `dtg[[a,b]] = d_t g_ab`.
pub struct RawJet {
    pub g: Array2<f64>,
    pub dg: Array3<f64>,
    pub d2g: Array4<f64>,
    pub d3g: Array5<f64>,
    pub dtg: Array2<f64>,
}

/// Validated metric jet with the inverse metric attached.
pub struct MetricJet {
    pub n: usize,
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub dg: Array3<f64>,
    pub d2g: Array4<f64>,
    pub d3g: Array5<f64>,
    pub dtg: Array2<f64>,
}

impl MetricJet {
    pub fn from_raw(raw: RawJet) -> Result<Self> {
        let n = raw.g.nrows();
        let eigs = linalg::sym_eigenvalues(&raw.g);
        let max_eig = eigs.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        let tol = 1e-13 * max_eig;
        if eigs[0] <= tol {
            return Err(Error::DegenerateMetric {
                eigen: eigs[0],
                tol,
            });
        }
        let g_inv = linalg::inverse(&raw.g)?;
        Ok(Self {
            n,
            g: raw.g,
            g_inv,
            dg: raw.dg,
            d2g: raw.d2g,
            d3g: raw.d3g,
            dtg: raw.dtg,
        })
    }
}

/// Scalar field jet at a chart point: value, gradient, coordinate Hessian
/// (plain second partials, not yet covariant), and time derivative.
#[derive(Debug, Clone)]
pub struct ScalarJet {
    pub value: f64,
    pub d1: Array1<f64>,
    pub d2: Array2<f64>,
    pub dt: f64,
}

impl ScalarJet {
    pub fn zero(n: usize) -> Self {
        Self {
            value: 0.0,
            d1: Array1::zeros(n),
            d2: Array2::zeros((n, n)),
            dt: 0.0,
        }
    }
}

/// All curvature data the rest of the crate consumes at one point:
/// Christoffel symbols, lowered Riemann tensor and its covariant derivative,
/// Ricci and its covariant derivative, scalar curvature and its gradient,
/// plus the metric, its inverse, and its time derivative for contractions.
pub struct CurvatureBundle {
    pub n: usize,
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    pub dtg: Array2<f64>,
    /// `chris[[a,b,c]] = Gamma^a_bc`
    pub chris: Array3<f64>,
    /// `riemann[[a,b,c,d]] = R_abcd`
    pub riemann: Array4<f64>,
    /// `nabla_riemann[[m,a,b,c,d]] = (nabla_m R)_abcd`
    pub nabla_riemann: Array5<f64>,
    pub ric: Array2<f64>,
    /// `nabla_ric[[m,b,d]] = (nabla_m Ric)_bd`
    pub nabla_ric: Array3<f64>,
    pub scalar: f64,
    pub nabla_scalar: Array1<f64>,
}

/// Christoffel symbols alone; enough for flow right-hand sides, where the
/// full Riemann contraction would be wasted work.
pub fn christoffel(jet: &MetricJet) -> Array3<f64> {
    let n = jet.n;
    let mut chris = Array3::<f64>::zeros((n, n, n));
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let mut s = 0.0;
                for m in 0..n {
                    s += jet.g_inv[[a, m]]
                        * (jet.dg[[b, m, c]] + jet.dg[[c, m, b]] - jet.dg[[m, b, c]]);
                }
                chris[[a, b, c]] = 0.5 * s;
            }
        }
    }
    chris
}

impl CurvatureBundle {
    pub fn from_jet(jet: &MetricJet) -> Self {
        let n = jet.n;
        let gi = &jet.g_inv;

        // S[m][b][c] = d_b g_mc + d_c g_mb - d_m g_bc and its derivatives.
        let mut s3 = Array3::<f64>::zeros((n, n, n));
        for m in 0..n {
            for b in 0..n {
                for c in 0..n {
                    s3[[m, b, c]] = jet.dg[[b, m, c]] + jet.dg[[c, m, b]] - jet.dg[[m, b, c]];
                }
            }
        }
        let mut ds = Array4::<f64>::zeros((n, n, n, n));
        for d in 0..n {
            for m in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        ds[[d, m, b, c]] = jet.d2g[[d, b, m, c]] + jet.d2g[[d, c, m, b]]
                            - jet.d2g[[d, m, b, c]];
                    }
                }
            }
        }
        let mut d2s = Array5::<f64>::zeros((n, n, n, n, n));
        for e in 0..n {
            for d in 0..n {
                for m in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            d2s[[e, d, m, b, c]] = jet.d3g[[e, d, b, m, c]]
                                + jet.d3g[[e, d, c, m, b]]
                                - jet.d3g[[e, d, m, b, c]];
                        }
                    }
                }
            }
        }

        // Inverse-metric derivatives from d(g^-1) = -g^-1 (dg) g^-1.
        let mut dginv = Array3::<f64>::zeros((n, n, n));
        for d in 0..n {
            for a in 0..n {
                for e in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        for k in 0..n {
                            acc += gi[[a, m]] * jet.dg[[d, m, k]] * gi[[k, e]];
                        }
                    }
                    dginv[[d, a, e]] = -acc;
                }
            }
        }
        let mut d2ginv = Array4::<f64>::zeros((n, n, n, n));
        for e in 0..n {
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut acc = 0.0;
                        for m in 0..n {
                            for k in 0..n {
                                acc += dginv[[e, a, m]] * jet.dg[[d, m, k]] * gi[[k, b]]
                                    + gi[[a, m]] * jet.d2g[[e, d, m, k]] * gi[[k, b]]
                                    + gi[[a, m]] * jet.dg[[d, m, k]] * dginv[[e, k, b]];
                            }
                        }
                        d2ginv[[e, d, a, b]] = -acc;
                    }
                }
            }
        }

        // Christoffel symbols and their first and second partials.
        let mut chris = Array3::<f64>::zeros((n, n, n));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for m in 0..n {
                        acc += gi[[a, m]] * s3[[m, b, c]];
                    }
                    chris[[a, b, c]] = 0.5 * acc;
                }
            }
        }
        let mut dchris = Array4::<f64>::zeros((n, n, n, n));
        for d in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut acc = 0.0;
                        for m in 0..n {
                            acc += dginv[[d, a, m]] * s3[[m, b, c]] + gi[[a, m]] * ds[[d, m, b, c]];
                        }
                        dchris[[d, a, b, c]] = 0.5 * acc;
                    }
                }
            }
        }
        let mut d2chris = Array5::<f64>::zeros((n, n, n, n, n));
        for e in 0..n {
            for d in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        for c in 0..n {
                            let mut acc = 0.0;
                            for m in 0..n {
                                acc += d2ginv[[e, d, a, m]] * s3[[m, b, c]]
                                    + dginv[[d, a, m]] * ds[[e, m, b, c]]
                                    + dginv[[e, a, m]] * ds[[d, m, b, c]]
                                    + gi[[a, m]] * d2s[[e, d, m, b, c]];
                            }
                            d2chris[[e, d, a, b, c]] = 0.5 * acc;
                        }
                    }
                }
            }
        }

        // Riemann tensor with the upper first slot, and its partial derivative.
        let mut riem_up = Array4::<f64>::zeros((n, n, n, n));
        for r in 0..n {
            for s in 0..n {
                for m in 0..n {
                    for nn in 0..n {
                        let mut acc = dchris[[m, r, nn, s]] - dchris[[nn, r, m, s]];
                        for l in 0..n {
                            acc += chris[[r, m, l]] * chris[[l, nn, s]]
                                - chris[[r, nn, l]] * chris[[l, m, s]];
                        }
                        riem_up[[r, s, m, nn]] = acc;
                    }
                }
            }
        }
        let mut driem_up = Array5::<f64>::zeros((n, n, n, n, n));
        for e in 0..n {
            for r in 0..n {
                for s in 0..n {
                    for m in 0..n {
                        for nn in 0..n {
                            let mut acc = d2chris[[e, m, r, nn, s]] - d2chris[[e, nn, r, m, s]];
                            for l in 0..n {
                                acc += dchris[[e, r, m, l]] * chris[[l, nn, s]]
                                    + chris[[r, m, l]] * dchris[[e, l, nn, s]]
                                    - dchris[[e, r, nn, l]] * chris[[l, m, s]]
                                    - chris[[r, nn, l]] * dchris[[e, l, m, s]];
                            }
                            driem_up[[e, r, s, m, nn]] = acc;
                        }
                    }
                }
            }
        }

        // Lower the first slot, then convert the partial derivative to a
        // covariant one with four connection corrections.
        let mut riemann = Array4::<f64>::zeros((n, n, n, n));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let mut acc = 0.0;
                        for r in 0..n {
                            acc += jet.g[[a, r]] * riem_up[[r, b, c, d]];
                        }
                        riemann[[a, b, c, d]] = acc;
                    }
                }
            }
        }
        let mut nabla_riemann = Array5::<f64>::zeros((n, n, n, n, n));
        for m in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let mut acc = 0.0;
                            for r in 0..n {
                                acc += jet.dg[[m, a, r]] * riem_up[[r, b, c, d]]
                                    + jet.g[[a, r]] * driem_up[[m, r, b, c, d]];
                            }
                            for e in 0..n {
                                acc -= chris[[e, m, a]] * riemann[[e, b, c, d]]
                                    + chris[[e, m, b]] * riemann[[a, e, c, d]]
                                    + chris[[e, m, c]] * riemann[[a, b, e, d]]
                                    + chris[[e, m, d]] * riemann[[a, b, c, e]];
                            }
                            nabla_riemann[[m, a, b, c, d]] = acc;
                        }
                    }
                }
            }
        }

        let mut ric = Array2::<f64>::zeros((n, n));
        for b in 0..n {
            for d in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for c in 0..n {
                        acc += gi[[a, c]] * riemann[[a, b, c, d]];
                    }
                }
                ric[[b, d]] = acc;
            }
        }
        let mut nabla_ric = Array3::<f64>::zeros((n, n, n));
        for m in 0..n {
            for b in 0..n {
                for d in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        for c in 0..n {
                            acc += gi[[a, c]] * nabla_riemann[[m, a, b, c, d]];
                        }
                    }
                    nabla_ric[[m, b, d]] = acc;
                }
            }
        }

        let mut scalar = 0.0;
        for b in 0..n {
            for d in 0..n {
                scalar += gi[[b, d]] * ric[[b, d]];
            }
        }
        let mut nabla_scalar = Array1::<f64>::zeros(n);
        for m in 0..n {
            let mut acc = 0.0;
            for b in 0..n {
                for d in 0..n {
                    acc += gi[[b, d]] * nabla_ric[[m, b, d]];
                }
            }
            nabla_scalar[m] = acc;
        }

        Self {
            n,
            g: jet.g.clone(),
            g_inv: jet.g_inv.clone(),
            dtg: jet.dtg.clone(),
            chris,
            riemann,
            nabla_riemann,
            ric,
            nabla_ric,
            scalar,
            nabla_scalar,
        }
    }

    /// Metric inner product of two vectors.
    pub fn ip(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                acc += self.g[[a, b]] * u[a] * v[b];
            }
        }
        acc
    }

    /// Lower an index: `(g v)_a`.
    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.g[[a, b]] * v[b]).sum())
            .collect()
    }

    /// `Gamma^a_bc u^b v^c` for each `a`.
    pub fn chris_of(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for a in 0..self.n {
            let mut acc = 0.0;
            for b in 0..self.n {
                for c in 0..self.n {
                    acc += self.chris[[a, b, c]] * u[b] * v[c];
                }
            }
            out[a] = acc;
        }
        out
    }

    /// `R(u, v, w, z)` with all slots lowered.
    pub fn riem_of(&self, u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                for c in 0..self.n {
                    for d in 0..self.n {
                        acc += self.riemann[[a, b, c, d]] * u[a] * v[b] * w[c] * z[d];
                    }
                }
            }
        }
        acc
    }

    /// `(nabla_m R)(u, v, w, z)` contracted against a direction `m`.
    pub fn nabla_riem_of(&self, m: &[f64], u: &[f64], v: &[f64], w: &[f64], z: &[f64]) -> f64 {
        let mut acc = 0.0;
        for mm in 0..self.n {
            for a in 0..self.n {
                for b in 0..self.n {
                    for c in 0..self.n {
                        for d in 0..self.n {
                            acc += self.nabla_riemann[[mm, a, b, c, d]]
                                * m[mm]
                                * u[a]
                                * v[b]
                                * w[c]
                                * z[d];
                        }
                    }
                }
            }
        }
        acc
    }

    /// `Ric(u, v)`.
    pub fn ric_of(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                acc += self.ric[[a, b]] * u[a] * v[b];
            }
        }
        acc
    }

    /// `(nabla_m Ric)(u, v)` contracted against a direction `m`.
    pub fn nabla_ric_of(&self, m: &[f64], u: &[f64], v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for mm in 0..self.n {
            for a in 0..self.n {
                for b in 0..self.n {
                    acc += self.nabla_ric[[mm, a, b]] * m[mm] * u[a] * v[b];
                }
            }
        }
        acc
    }

    /// Directional derivative of the scalar curvature.
    pub fn nabla_scalar_along(&self, v: &[f64]) -> f64 {
        (0..self.n).map(|m| self.nabla_scalar[m] * v[m]).sum()
    }

    /// Covariant Hessian of a scalar field.
    pub fn hessian(&self, f: &ScalarJet) -> Array2<f64> {
        let n = self.n;
        let mut h = Array2::<f64>::zeros((n, n));
        for a in 0..n {
            for b in 0..n {
                let mut acc = f.d2[[a, b]];
                for c in 0..n {
                    acc -= self.chris[[c, a, b]] * f.d1[c];
                }
                h[[a, b]] = acc;
            }
        }
        h
    }

    /// Laplace-Beltrami of a scalar field.
    pub fn laplacian(&self, f: &ScalarJet) -> f64 {
        let h = self.hessian(f);
        let mut acc = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                acc += self.g_inv[[a, b]] * h[[a, b]];
            }
        }
        acc
    }

    /// Squared gradient norm `g^ab d_a f d_b f`.
    pub fn grad_norm2(&self, f: &ScalarJet) -> f64 {
        let mut acc = 0.0;
        for a in 0..self.n {
            for b in 0..self.n {
                acc += self.g_inv[[a, b]] * f.d1[a] * f.d1[b];
            }
        }
        acc
    }

    /// Raise an index: `(g^-1 w)^a` for a covector `w`.
    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| self.g_inv[[a, b]] * w[b]).sum())
            .collect()
    }

    /// Max-abs residual of the Ricci flow equation `d_t g + 2 Ric = 0`.
    pub fn ricci_flow_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.n {
            for b in 0..self.n {
                worst = worst.max((self.dtg[[a, b]] + 2.0 * self.ric[[a, b]]).abs());
            }
        }
        worst
    }

    /// Max-abs residual of the contracted second Bianchi identity
    /// `g^am (nabla_m Ric)_ab - (1/2) nabla_b R = 0`.
    pub fn bianchi_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in 0..self.n {
            let mut div = 0.0;
            for a in 0..self.n {
                for m in 0..self.n {
                    div += self.g_inv[[a, m]] * self.nabla_ric[[m, a, b]];
                }
            }
            worst = worst.max((div - 0.5 * self.nabla_scalar[b]).abs());
        }
        worst
    }

    /// Max-abs violation of the algebraic Riemann symmetries and the first
    /// Bianchi identity.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let r = &self.riemann;
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        worst = worst.max((r[[a, b, c, d]] + r[[b, a, c, d]]).abs());
                        worst = worst.max((r[[a, b, c, d]] + r[[a, b, d, c]]).abs());
                        worst = worst.max((r[[a, b, c, d]] - r[[c, d, a, b]]).abs());
                        worst = worst
                            .max((r[[a, b, c, d]] + r[[a, c, d, b]] + r[[a, d, b, c]]).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Soliton family a background claims to belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonClass {
    Steady,
    Shrinking,
    None,
}

/// Residuals of the gradient soliton structure at one point: the max-abs
/// entry of `Ric + Hess f - (c / 2t) g` (with `c = 0` steady, `c = -1`
/// shrinking) and the potential equation `d_t f - |grad f|^2`.
pub fn soliton_residuals(
    bundle: &CurvatureBundle,
    f: &ScalarJet,
    class: SolitonClass,
    t: f64,
) -> Result<(f64, f64)> {
    let c = match class {
        SolitonClass::Steady => 0.0,
        SolitonClass::Shrinking => -1.0,
        SolitonClass::None => {
            return Err(Error::WrongSolitonClass {
                monitor: "soliton-structure".into(),
                class: "none".into(),
            })
        }
    };
    let hess = bundle.hessian(f);
    let lambda = if c == 0.0 { 0.0 } else { c / (2.0 * t) };
    let mut tensor = 0.0f64;
    for a in 0..bundle.n {
        for b in 0..bundle.n {
            tensor = tensor
                .max((bundle.ric[[a, b]] + hess[[a, b]] - lambda * bundle.g[[a, b]]).abs());
        }
    }
    let feqn = (f.dt - bundle.grad_norm2(f)).abs();
    Ok((tensor, feqn))
}

/// Residual of the conjugate heat equation `d_t u = -Lap u + R u` for a
/// positive density `u` on an evolving background.
pub fn conjugate_heat_residual(bundle: &CurvatureBundle, u: &ScalarJet) -> f64 {
    u.dt + bundle.laplacian(u) - bundle.scalar * u.value
}

#[cfg(test)]
mod tests {
    use super::fd::{fd_jet, FdOrder};
    use super::*;
    use approx::assert_abs_diff_eq;

    fn flat_jet(n: usize) -> MetricJet {
        let raw = RawJet {
            g: Array2::eye(n),
            dg: Array3::zeros((n, n, n)),
            d2g: Array4::zeros((n, n, n, n)),
            d3g: Array5::zeros((n, n, n, n, n)),
            dtg: Array2::zeros((n, n)),
        };
        MetricJet::from_raw(raw).unwrap()
    }

    #[test]
    fn flat_space_is_exactly_flat() {
        for n in 2..=3 {
            let b = CurvatureBundle::from_jet(&flat_jet(n));
            assert_eq!(b.scalar, 0.0);
            assert!(b.riemann.iter().all(|&x| x == 0.0));
            assert!(b.nabla_riemann.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn round_sphere_polar_chart_curvature() {
        let r = 1.7;
        let sphere = move |x: &[f64], _t: f64| {
            let theta = x[0];
            ndarray::array![[r * r, 0.0], [0.0, r * r * theta.sin().powi(2)]]
        };
        let jet = MetricJet::from_raw(fd_jet(&sphere, &[1.0, 0.4], 0.0, FdOrder::Four, 1e-3))
            .unwrap();
        let b = CurvatureBundle::from_jet(&jet);
        assert_abs_diff_eq!(b.scalar, 2.0 / (r * r), epsilon = 1e-9);
        for a in 0..2 {
            for c in 0..2 {
                assert_abs_diff_eq!(b.ric[[a, c]], b.g[[a, c]] / (r * r), epsilon = 1e-9);
            }
        }
        // Constant curvature: nabla R = 0, Bianchi and symmetries hold.
        assert!(b.nabla_scalar.iter().all(|&x| x.abs() < 1e-5));
        assert!(b.bianchi_residual() < 1e-5);
        assert!(b.symmetry_residual() < 1e-9);
    }

    /// Rotationally symmetric steady soliton plane: conformal factor
    /// `a / (1 + a |x|^2)` with `a = exp(-4t)`, potential `-log(1 + a |x|^2)`.
    fn cigar_metric(x: &[f64], t: f64) -> Array2<f64> {
        let a = (-4.0 * t).exp();
        let s = 1.0 + a * (x[0] * x[0] + x[1] * x[1]);
        let w = a / s;
        ndarray::array![[w, 0.0], [0.0, w]]
    }

    fn cigar_potential_jet(x: &[f64], t: f64) -> ScalarJet {
        let a = (-4.0 * t).exp();
        let r2 = x[0] * x[0] + x[1] * x[1];
        let s = 1.0 + a * r2;
        let mut d1 = Array1::zeros(2);
        let mut d2 = Array2::zeros((2, 2));
        for c in 0..2 {
            d1[c] = -2.0 * a * x[c] / s;
            for d in 0..2 {
                let kron = if c == d { 1.0 } else { 0.0 };
                d2[[c, d]] = -2.0 * a * kron / s + 4.0 * a * a * x[c] * x[d] / (s * s);
            }
        }
        ScalarJet {
            value: -s.ln(),
            d1,
            d2,
            dt: 4.0 * a * r2 / s,
        }
    }

    #[test]
    fn cigar_soliton_structure_from_finite_differences() {
        let p = [0.7, -0.3];
        let t = 0.1;
        let jet =
            MetricJet::from_raw(fd_jet(&cigar_metric, &p, t, FdOrder::Four, 1e-3)).unwrap();
        let b = CurvatureBundle::from_jet(&jet);

        let a = (-4.0 * t).exp();
        let s = 1.0 + a * (p[0] * p[0] + p[1] * p[1]);
        assert_abs_diff_eq!(b.scalar, 4.0 / s, epsilon = 1e-8);
        assert!(b.ricci_flow_residual() < 1e-8);

        let f = cigar_potential_jet(&p, t);
        let (tensor, feqn) = soliton_residuals(&b, &f, SolitonClass::Steady, t).unwrap();
        assert!(tensor < 1e-8, "soliton tensor residual {tensor}");
        assert!(feqn < 1e-12, "potential equation residual {feqn}");

        assert!(b.bianchi_residual() < 1e-5);
        assert!(b.symmetry_residual() < 1e-8);
    }

    #[test]
    fn generic_conformal_metric_satisfies_identities() {
        let conf = |x: &[f64], _t: f64| {
            let phi = 0.3 * x[0].sin() * (2.0 * x[1]).cos() + 0.1 * x[1];
            let w = (2.0 * phi).exp();
            ndarray::array![[w, 0.0], [0.0, w]]
        };
        let jet =
            MetricJet::from_raw(fd_jet(&conf, &[0.4, -0.2], 0.0, FdOrder::Four, 1e-3)).unwrap();
        let b = CurvatureBundle::from_jet(&jet);
        assert!(b.symmetry_residual() < 1e-8);
        assert!(b.bianchi_residual() < 1e-5);
    }

    #[test]
    fn degenerate_metric_is_rejected() {
        let raw = RawJet {
            g: ndarray::array![[1.0, 1.0], [1.0, 1.0]],
            dg: Array3::zeros((2, 2, 2)),
            d2g: Array4::zeros((2, 2, 2, 2)),
            d3g: Array5::zeros((2, 2, 2, 2, 2)),
            dtg: Array2::zeros((2, 2)),
        };
        assert!(MetricJet::from_raw(raw).is_err());
    }

    #[test]
    fn translating_density_solves_conjugate_heat_equation() {
        // Flat metric, potential l . x + t |l|^2, density u = exp(-f).
        let l = [0.3, -0.8];
        let x = [1.1, 0.2];
        let t = 0.6;
        let b = CurvatureBundle::from_jet(&flat_jet(2));
        let fval: f64 = l[0] * x[0] + l[1] * x[1] + t * (l[0] * l[0] + l[1] * l[1]);
        let u = (-fval).exp();
        let mut d1 = Array1::zeros(2);
        let mut d2 = Array2::zeros((2, 2));
        for a in 0..2 {
            d1[a] = -l[a] * u;
            for c in 0..2 {
                d2[[a, c]] = l[a] * l[c] * u;
            }
        }
        let ujet = ScalarJet {
            value: u,
            d1,
            d2,
            dt: -(l[0] * l[0] + l[1] * l[1]) * u,
        };
        assert_abs_diff_eq!(conjugate_heat_residual(&b, &ujet), 0.0, epsilon = 1e-14);
    }
}
