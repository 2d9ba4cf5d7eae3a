//! Pointwise identities between ambient curvature and hypersurface
//! geometry, evaluated as residual series on the grid. Every function
//! returns one value per node (a max-abs over free indices where the
//! identity is tensorial); exact satisfaction means residuals at the
//! discretization error of the grid derivatives involved.

use ndarray::Array2;

use super::extrinsic::SurfaceData;
use super::intrinsic::IntrinsicCalc;
use super::{Immersion, SigmaOps};
use crate::backgrounds::Background;
use crate::error::Result;
use crate::tensor::{CurvatureBundle, ScalarJet};

/// A scalar field restricted to the surface: value series plus the ambient
/// first and second derivative contractions against the adapted frame.
pub struct RestrictedScalar {
    pub val: Vec<f64>,
    pub e0_d: Vec<f64>,
    pub grad_t: Vec<Vec<f64>>,
    pub hess_tt: Vec<Array2<f64>>,
    pub hess_0t: Vec<Vec<f64>>,
}

impl SurfaceData {
    /// The soliton potential as a [`RestrictedScalar`].
    pub fn restricted_potential(&self) -> RestrictedScalar {
        RestrictedScalar {
            val: self.f_val.clone(),
            e0_d: self.e0_f.clone(),
            grad_t: self.grad_f_t.clone(),
            hess_tt: self.hess_f_tt.clone(),
            hess_0t: self.hess_f_0t.clone(),
        }
    }
}

/// Restrict an arbitrary ambient scalar jet to the surface.
pub fn restrict_scalar(
    imm: &Immersion,
    bg: &Background,
    t: f64,
    data: &SurfaceData,
    jet_of: &dyn Fn(&[f64], f64) -> ScalarJet,
) -> Result<RestrictedScalar> {
    let nn = imm.n_nodes();
    let m = imm.m();
    let n = bg.n();
    let mut out = RestrictedScalar {
        val: Vec::with_capacity(nn),
        e0_d: Vec::with_capacity(nn),
        grad_t: Vec::with_capacity(nn),
        hess_tt: Vec::with_capacity(nn),
        hess_0t: Vec::with_capacity(nn),
    };
    for j in 0..nn {
        let x = imm.ambient_point(j);
        let bundle = CurvatureBundle::from_jet(&bg.metric_jet(&x, t)?);
        let jet = jet_of(&x, t);
        let hess = bundle.hessian(&jet);
        let e0 = &data.core.e0[j];
        let ts = &data.core.tangents[j];
        let hc = |u: &[f64], v: &[f64]| {
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    acc += hess[[a, b]] * u[a] * v[b];
                }
            }
            acc
        };
        out.val.push(jet.value);
        out.e0_d.push((0..n).map(|a| jet.d1[a] * e0[a]).sum());
        out.grad_t
            .push((0..m).map(|i| (0..n).map(|a| jet.d1[a] * ts[i][a]).sum()).collect());
        let mut htt = Array2::<f64>::zeros((m, m));
        for i in 0..m {
            for k in 0..m {
                htt[[i, k]] = hc(&ts[i], &ts[k]);
            }
        }
        out.hess_tt.push(htt);
        out.hess_0t.push((0..m).map(|i| hc(e0, &ts[i])).collect());
    }
    Ok(out)
}

fn maxabs(vals: impl IntoIterator<Item = f64>) -> f64 {
    vals.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `R(e0, T_i, T_j, T_k) = (nabla_j A)_{ik} - (nabla_k A)_{ij}`.
pub fn codazzi_full(data: &SurfaceData, calc: &IntrinsicCalc, ops: &SigmaOps) -> Vec<f64> {
    let m = calc.m;
    let u = calc.cov_d_2tensor(ops, &data.core.a);
    (0..calc.nn)
        .map(|nj| {
            let mut worst = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let lhs = data.riem_0ttt[nj][[i, j, k]];
                        let rhs = u[nj][[j, i, k]] - u[nj][[k, i, j]];
                        worst = worst.max((lhs - rhs).abs());
                    }
                }
            }
            worst
        })
        .collect()
}

/// `Ric(e0, T_j) = (grad H)_j - (div A)_j`.
pub fn codazzi_trace(data: &SurfaceData, calc: &IntrinsicCalc, ops: &SigmaOps) -> Vec<f64> {
    let grad_h = calc.grad_scalar(ops, &data.core.h_mean);
    let div_a = calc.div_2tensor(ops, &data.core.a);
    (0..calc.nn)
        .map(|j| {
            maxabs((0..calc.m).map(|i| data.ric0t[j][i] - (grad_h[j][i] - div_a[j][i])))
        })
        .collect()
}

/// Ambient Hessian restricted tangentially:
/// `Hess(T_i, T_j) = (intrinsic Hess)_{ij} - A_ij e0(phi)`.
pub fn hessian_restriction(
    data: &SurfaceData,
    calc: &IntrinsicCalc,
    ops: &SigmaOps,
    phi: &RestrictedScalar,
) -> Vec<f64> {
    let ihess = calc.hess_scalar(ops, &phi.val);
    (0..calc.nn)
        .map(|j| {
            let mut worst = 0.0f64;
            for i in 0..calc.m {
                for k in 0..calc.m {
                    let rhs = ihess[j][[i, k]] - data.core.a[j][[i, k]] * phi.e0_d[j];
                    worst = worst.max((phi.hess_tt[j][[i, k]] - rhs).abs());
                }
            }
            worst
        })
        .collect()
}

/// Ambient Hessian in the mixed slot:
/// `Hess(e0, T_i) = (grad e0(phi))_i + A_i^k (grad phi)_k`.
pub fn normal_gradient_restriction(
    data: &SurfaceData,
    calc: &IntrinsicCalc,
    ops: &SigmaOps,
    phi: &RestrictedScalar,
) -> Vec<f64> {
    let grad_e0phi = calc.grad_scalar(ops, &phi.e0_d);
    (0..calc.nn)
        .map(|j| {
            let mut worst = 0.0f64;
            for i in 0..calc.m {
                let mut mixed = 0.0;
                for k in 0..calc.m {
                    for l in 0..calc.m {
                        mixed += calc.gamma_inv[j][[k, l]]
                            * data.core.a[j][[i, l]]
                            * phi.grad_t[j][k];
                    }
                }
                let rhs = grad_e0phi[j][i] + mixed;
                worst = worst.max((phi.hess_0t[j][i] - rhs).abs());
            }
            worst
        })
        .collect()
}

/// The commutation identity between the intrinsic Hessian of the mean
/// curvature and the rough Laplacian of the second fundamental form, with
/// all ambient curvature correction terms.
pub fn simons(data: &SurfaceData, calc: &IntrinsicCalc, ops: &SigmaOps) -> Vec<f64> {
    let m = calc.m;
    let hess_h = calc.hess_scalar(ops, &data.core.h_mean);
    let lap_a = calc.laplacian_2tensor(ops, &data.core.a);
    let dric0t = calc.cov_d_oneform(ops, &data.ric0t);
    (0..calc.nn)
        .map(|nj| {
            let gi = &calc.gamma_inv[nj];
            let a = &data.core.a[nj];
            let h = data.core.h_mean[nj];
            let a2 = data.core.a_norm2[nj];
            let mut worst = 0.0f64;
            for i in 0..m {
                for j in 0..m {
                    let mut rhs = lap_a[nj][[i, j]]
                        + dric0t[nj][[i, j]]
                        + dric0t[nj][[j, i]]
                        - data.nab0_ric_tt[nj][[i, j]]
                        - a[[i, j]] * data.ric00[nj]
                        - h * data.riem_0t0t[nj][[i, j]]
                        + a2 * a[[i, j]]
                        + data.nab0_riem_0t0t[nj][[i, j]];
                    for k in 0..m {
                        for l in 0..m {
                            rhs += gi[[k, l]]
                                * (a[[l, i]] * data.riem_0t0t[nj][[k, j]]
                                    + a[[l, j]] * data.riem_0t0t[nj][[k, i]]
                                    - h * a[[l, i]] * a[[j, k]]);
                            for p in 0..m {
                                for q in 0..m {
                                    rhs += 2.0
                                        * gi[[k, p]]
                                        * gi[[l, q]]
                                        * a[[p, q]]
                                        * data.riem_tttt[nj][[k, i, l, j]];
                                }
                            }
                        }
                    }
                    worst = worst.max((hess_h[nj][[i, j]] - rhs).abs());
                }
            }
            worst
        })
        .collect()
}

/// Two trace identities tying ambient and intrinsic curvature together:
/// the tangential Ricci trace against the ambient scalar curvature, and the
/// Gauss equation for the intrinsic scalar curvature.
pub fn gauss_traces(data: &SurfaceData, calc: &IntrinsicCalc) -> (Vec<f64>, Vec<f64>) {
    let m = calc.m;
    let mut res_ric = Vec::with_capacity(calc.nn);
    let mut res_gauss = Vec::with_capacity(calc.nn);
    for j in 0..calc.nn {
        let gi = &calc.gamma_inv[j];
        let mut tr_ric = 0.0;
        let mut tang = 0.0;
        for i in 0..m {
            for k in 0..m {
                tr_ric += gi[[i, k]] * data.ric_tt[j][[i, k]];
                for p in 0..m {
                    for q in 0..m {
                        tang += gi[[i, k]] * gi[[p, q]] * data.riem_tttt[j][[i, p, k, q]];
                    }
                }
            }
        }
        res_ric.push(tr_ric - 0.5 * (data.scalar[j] + tang));
        let h = data.core.h_mean[j];
        res_gauss.push(calc.rhat[j] - (tang + h * h - data.core.a_norm2[j]));
    }
    (res_ric, res_gauss)
}

/// Differential Harnack expression for the flow, with the time derivative
/// of the mean curvature replaced by its spatial evolution form:
/// `Z = Lap H + 2 <A, Ric> + |A|^2 H + nab0 Ric(e0,e0)
///      - 2 <grad f, grad H> + A(grad f, grad f) + 2 Ric(e0, grad f)
///      - e0(R)/2 - H Ric(e0,e0)`.
pub fn harnack(data: &SurfaceData, calc: &IntrinsicCalc, ops: &SigmaOps) -> Vec<f64> {
    let m = calc.m;
    let lap_h = calc.laplacian_scalar(ops, &data.core.h_mean);
    let grad_h = calc.grad_scalar(ops, &data.core.h_mean);
    (0..calc.nn)
        .map(|j| {
            let gi = &calc.gamma_inv[j];
            let a = &data.core.a[j];
            let h = data.core.h_mean[j];
            let df = &data.grad_f_t[j];
            // Raise the tangential potential gradient.
            let dfu: Vec<f64> = (0..m)
                .map(|i| (0..m).map(|k| gi[[i, k]] * df[k]).sum())
                .collect();
            let mut z = lap_h[j] + data.core.a_norm2[j] * h + data.nab0_ric00[j]
                - 0.5 * data.e0_scalar[j]
                - h * data.ric00[j];
            for i in 0..m {
                z += 2.0 * data.ric0t[j][i] * dfu[i];
                for k in 0..m {
                    z += a[[i, k]] * dfu[i] * dfu[k] - 2.0 * gi[[i, k]] * df[i] * grad_h[j][k];
                    for p in 0..m {
                        for q in 0..m {
                            z += 2.0 * gi[[i, p]] * gi[[k, q]] * a[[p, q]]
                                * data.ric_tt[j][[i, k]];
                        }
                    }
                }
            }
            z
        })
        .collect()
}

/// Residuals of the two restricted soliton identities that hold on a
/// soliton configuration (`H + e0 f = 0`): the tangential one
/// `Ric_ij + Hess_ij f + H A_ij = lambda gamma_ij` and the mixed one
/// `Ric(e0, T_i) - (grad H)_i + A_i^k (grad f)_k = 0`, where `lambda` is
/// the soliton constant of the background (zero when steady).
pub fn soliton_restricted(
    data: &SurfaceData,
    calc: &IntrinsicCalc,
    ops: &SigmaOps,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let m = calc.m;
    let ihess_f = calc.hess_scalar(ops, &data.f_val);
    let grad_h = calc.grad_scalar(ops, &data.core.h_mean);
    let mut r1 = Vec::with_capacity(calc.nn);
    let mut r2 = Vec::with_capacity(calc.nn);
    for j in 0..calc.nn {
        let a = &data.core.a[j];
        let gi = &calc.gamma_inv[j];
        let h = data.core.h_mean[j];
        r1.push(maxabs((0..m).flat_map(|i| {
            let rtt = &data.ric_tt[j];
            let ih = &ihess_f[j];
            let gamma = &calc.gamma[j];
            (0..m)
                .map(|k| rtt[[i, k]] + ih[[i, k]] + h * a[[i, k]] - lambda * gamma[[i, k]])
                .collect::<Vec<_>>()
        })));
        r2.push(maxabs((0..m).map(|i| {
            let mut mixed = 0.0;
            for k in 0..m {
                for l in 0..m {
                    mixed += gi[[k, l]] * a[[i, l]] * data.grad_f_t[j][k];
                }
            }
            data.ric0t[j][i] - grad_h[j][i] + mixed
        })));
    }
    (r1, r2)
}
