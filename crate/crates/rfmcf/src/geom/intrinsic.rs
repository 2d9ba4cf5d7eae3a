//! Covariant calculus on the induced metric of a discretized hypersurface.
//!
//! Curves carry a one-dimensional induced metric `E(sigma)`; profiles carry
//! the diagonal metric `diag(E(sigma), G(sigma))` of an axisymmetric
//! surface, where every field depends on `sigma` alone and the parity rule
//! from [`super::deriv`] governs pole reflection: a component with `q`
//! sigma-indices is even for even `q`, odd otherwise.

use ndarray::{Array2, Array3, Array4};

use super::deriv::Parity;
use super::extrinsic::CoreGeom;
use super::SigmaOps;

fn par(q: usize) -> Parity {
    if q % 2 == 0 {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// Christoffel symbols of the induced metric and the intrinsic scalar
/// curvature, per node.
pub struct IntrinsicCalc {
    pub m: usize,
    pub nn: usize,
    pub gamma: Vec<Array2<f64>>,
    pub gamma_inv: Vec<Array2<f64>>,
    /// `chris[node][[k, i, j]]` = induced-metric Christoffel symbol.
    pub chris: Vec<Array3<f64>>,
    /// Intrinsic scalar curvature (zero for curves).
    pub rhat: Vec<f64>,
}

impl IntrinsicCalc {
    pub fn build(core: &CoreGeom, ops: &SigmaOps) -> Self {
        let m = core.m;
        let nn = core.nn;
        let e: Vec<f64> = core.gamma.iter().map(|g| g[[0, 0]]).collect();
        let de = ops.d1(&e, Parity::Even);
        let mut chris = vec![Array3::<f64>::zeros((m, m, m)); nn];
        let mut rhat = vec![0.0; nn];
        if m == 1 {
            for j in 0..nn {
                chris[j][[0, 0, 0]] = de[j] / (2.0 * e[j]);
            }
        } else {
            let g2: Vec<f64> = core.gamma.iter().map(|g| g[[1, 1]]).collect();
            let dg2 = ops.d1(&g2, Parity::Even);
            for j in 0..nn {
                chris[j][[0, 0, 0]] = de[j] / (2.0 * e[j]);
                chris[j][[0, 1, 1]] = -dg2[j] / (2.0 * e[j]);
                chris[j][[1, 0, 1]] = dg2[j] / (2.0 * g2[j]);
                chris[j][[1, 1, 0]] = chris[j][[1, 0, 1]];
            }
            // Gauss curvature of diag(E, G): K = -(2 sqrt(EG))^{-1}
            // d_sigma( G' / sqrt(EG) ), doubled for the scalar curvature.
            let w: Vec<f64> = (0..nn).map(|j| dg2[j] / (e[j] * g2[j]).sqrt()).collect();
            let dw = ops.d1(&w, Parity::Even);
            for j in 0..nn {
                rhat[j] = -dw[j] / (e[j] * g2[j]).sqrt();
            }
        }
        Self {
            m,
            nn,
            gamma: core.gamma.clone(),
            gamma_inv: core.gamma_inv.clone(),
            chris,
            rhat,
        }
    }

    /// Gradient covector `d_i f` of an even scalar series.
    pub fn grad_scalar(&self, ops: &SigmaOps, f: &[f64]) -> Vec<Vec<f64>> {
        let df = ops.d1(f, Parity::Even);
        (0..self.nn)
            .map(|j| {
                let mut w = vec![0.0; self.m];
                w[0] = df[j];
                w
            })
            .collect()
    }

    /// Covariant Hessian of an even scalar series.
    pub fn hess_scalar(&self, ops: &SigmaOps, f: &[f64]) -> Vec<Array2<f64>> {
        let df = ops.d1(f, Parity::Even);
        let d2f = ops.d2(f, Parity::Even);
        (0..self.nn)
            .map(|j| {
                let mut h = Array2::<f64>::zeros((self.m, self.m));
                for i in 0..self.m {
                    for k in 0..self.m {
                        let dd = if i == 0 && k == 0 { d2f[j] } else { 0.0 };
                        h[[i, k]] = dd - self.chris[j][[0, i, k]] * df[j];
                    }
                }
                h
            })
            .collect()
    }

    /// Laplace-Beltrami of an even scalar series.
    pub fn laplacian_scalar(&self, ops: &SigmaOps, f: &[f64]) -> Vec<f64> {
        let h = self.hess_scalar(ops, f);
        (0..self.nn)
            .map(|j| {
                let mut acc = 0.0;
                for i in 0..self.m {
                    for k in 0..self.m {
                        acc += self.gamma_inv[j][[i, k]] * h[j][[i, k]];
                    }
                }
                acc
            })
            .collect()
    }

    /// Sigma-derivative of each component of a per-node 1-form, with the
    /// parity each component carries.
    fn d_sigma_oneform(&self, ops: &SigmaOps, w: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.m]; self.nn];
        for c in 0..self.m {
            let series: Vec<f64> = w.iter().map(|v| v[c]).collect();
            let q = usize::from(c == 0);
            let d = ops.d1(&series, par(q));
            for j in 0..self.nn {
                out[j][c] = d[j];
            }
        }
        out
    }

    /// Covariant derivative of a 1-form: `(nabla w)_{i j} = d_i w_j - Gamma^k_{ij} w_k`.
    pub fn cov_d_oneform(&self, ops: &SigmaOps, w: &[Vec<f64>]) -> Vec<Array2<f64>> {
        let dw = self.d_sigma_oneform(ops, w);
        (0..self.nn)
            .map(|j| {
                let mut out = Array2::<f64>::zeros((self.m, self.m));
                for i in 0..self.m {
                    for k in 0..self.m {
                        let dd = if i == 0 { dw[j][k] } else { 0.0 };
                        let mut acc = dd;
                        for l in 0..self.m {
                            acc -= self.chris[j][[l, i, k]] * w[j][l];
                        }
                        out[[i, k]] = acc;
                    }
                }
                out
            })
            .collect()
    }

    fn d_sigma_2tensor(&self, ops: &SigmaOps, b: &[Array2<f64>]) -> Vec<Array2<f64>> {
        let mut out = vec![Array2::<f64>::zeros((self.m, self.m)); self.nn];
        for i in 0..self.m {
            for k in 0..self.m {
                let series: Vec<f64> = b.iter().map(|v| v[[i, k]]).collect();
                let q = usize::from(i == 0) + usize::from(k == 0);
                let d = ops.d1(&series, par(q));
                for j in 0..self.nn {
                    out[j][[i, k]] = d[j];
                }
            }
        }
        out
    }

    /// Covariant derivative of a symmetric 2-tensor:
    /// `U_{k i j} = d_k B_ij - Gamma^l_{ki} B_lj - Gamma^l_{kj} B_il`.
    pub fn cov_d_2tensor(&self, ops: &SigmaOps, b: &[Array2<f64>]) -> Vec<Array3<f64>> {
        let db = self.d_sigma_2tensor(ops, b);
        (0..self.nn)
            .map(|j| {
                let mut u = Array3::<f64>::zeros((self.m, self.m, self.m));
                for k in 0..self.m {
                    for i in 0..self.m {
                        for l in 0..self.m {
                            let dd = if k == 0 { db[j][[i, l]] } else { 0.0 };
                            let mut acc = dd;
                            for p in 0..self.m {
                                acc -= self.chris[j][[p, k, i]] * b[j][[p, l]]
                                    + self.chris[j][[p, k, l]] * b[j][[i, p]];
                            }
                            u[[k, i, l]] = acc;
                        }
                    }
                }
                u
            })
            .collect()
    }

    /// Trace of the covariant derivative: `(div B)_j = gamma^{ik} U_{i k j}`.
    pub fn div_2tensor(&self, ops: &SigmaOps, b: &[Array2<f64>]) -> Vec<Vec<f64>> {
        let u = self.cov_d_2tensor(ops, b);
        (0..self.nn)
            .map(|j| {
                (0..self.m)
                    .map(|l| {
                        let mut acc = 0.0;
                        for i in 0..self.m {
                            for k in 0..self.m {
                                acc += self.gamma_inv[j][[i, k]] * u[j][[i, k, l]];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect()
    }

    /// Rough Laplacian of a symmetric 2-tensor:
    /// `(Lap B)_{ij} = gamma^{kl} (nabla_k nabla_l B)_{ij}`.
    pub fn laplacian_2tensor(&self, ops: &SigmaOps, b: &[Array2<f64>]) -> Vec<Array2<f64>> {
        let u = self.cov_d_2tensor(ops, b);
        // Sigma-derivative of U with per-component parity.
        let mut du = vec![Array3::<f64>::zeros((self.m, self.m, self.m)); self.nn];
        for k in 0..self.m {
            for i in 0..self.m {
                for l in 0..self.m {
                    let series: Vec<f64> = u.iter().map(|v| v[[k, i, l]]).collect();
                    let q = usize::from(k == 0) + usize::from(i == 0) + usize::from(l == 0);
                    let d = ops.d1(&series, par(q));
                    for j in 0..self.nn {
                        du[j][[k, i, l]] = d[j];
                    }
                }
            }
        }
        (0..self.nn)
            .map(|j| {
                let mut w4 = Array4::<f64>::zeros((self.m, self.m, self.m, self.m));
                for k in 0..self.m {
                    for l in 0..self.m {
                        for i in 0..self.m {
                            for p in 0..self.m {
                                let dd = if k == 0 { du[j][[l, i, p]] } else { 0.0 };
                                let mut acc = dd;
                                for q in 0..self.m {
                                    acc -= self.chris[j][[q, k, l]] * u[j][[q, i, p]]
                                        + self.chris[j][[q, k, i]] * u[j][[l, q, p]]
                                        + self.chris[j][[q, k, p]] * u[j][[l, i, q]];
                                }
                                w4[[k, l, i, p]] = acc;
                            }
                        }
                    }
                }
                let mut out = Array2::<f64>::zeros((self.m, self.m));
                for i in 0..self.m {
                    for p in 0..self.m {
                        let mut acc = 0.0;
                        for k in 0..self.m {
                            for l in 0..self.m {
                                acc += self.gamma_inv[j][[k, l]] * w4[[k, l, i, p]];
                            }
                        }
                        out[[i, p]] = acc;
                    }
                }
                out
            })
            .collect()
    }
}
