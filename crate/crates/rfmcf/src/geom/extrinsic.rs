//! Extrinsic geometry of a discretized immersion inside a background:
//! induced metric, inward unit normal, second fundamental form, mean
//! curvature, and every ambient curvature contraction the evolution
//! identities consume.

use ndarray::{Array2, Array3, Array4};

use super::deriv::Parity;
use super::{Domain, Immersion, SigmaOps};
use crate::backgrounds::Background;
use crate::error::{Error, Result};
use crate::tensor::{christoffel, CurvatureBundle, MetricJet};

/// First and second fundamental forms plus the frame, per node. This is all
/// a flow right-hand side needs.
pub struct CoreGeom {
    pub m: usize,
    pub nn: usize,
    /// Induced metric, its inverse, and `sqrt(det)` per node.
    pub gamma: Vec<Array2<f64>>,
    pub gamma_inv: Vec<Array2<f64>>,
    pub sqrt_det: Vec<f64>,
    /// Second fundamental form with respect to the inward unit normal.
    pub a: Vec<Array2<f64>>,
    pub h_mean: Vec<f64>,
    pub a_norm2: Vec<f64>,
    /// Inward unit normal and coordinate tangents, ambient components.
    pub e0: Vec<Vec<f64>>,
    pub tangents: Vec<Vec<Vec<f64>>>,
    /// Hypersurface measure = `area_factor * sqrt_det * dsigma`.
    pub area_factor: f64,
}

/// Everything the identity and monitor layers need at one time slice:
/// the core geometry plus ambient curvature and potential restrictions.
pub struct SurfaceData {
    pub core: CoreGeom,
    /// Ambient scalar curvature and its derivative along the normal.
    pub scalar: Vec<f64>,
    pub e0_scalar: Vec<f64>,
    /// Ricci contractions: normal-normal, normal-tangent, tangent-tangent.
    pub ric00: Vec<f64>,
    pub ric0t: Vec<Vec<f64>>,
    pub ric_tt: Vec<Array2<f64>>,
    /// Riemann contractions: `R(e0, T_i, e0, T_j)`, `R(e0, T_i, T_j, T_k)`,
    /// and the fully tangential block.
    pub riem_0t0t: Vec<Array2<f64>>,
    pub riem_0ttt: Vec<Array3<f64>>,
    pub riem_tttt: Vec<Array4<f64>>,
    /// Normal covariant derivatives of the above.
    pub nab0_ric00: Vec<f64>,
    pub nab0_ric_tt: Vec<Array2<f64>>,
    pub nab0_riem_0t0t: Vec<Array2<f64>>,
    /// Soliton potential restricted to the surface: value, normal
    /// derivative, tangential gradient covector, ambient Hessian blocks,
    /// and time derivative at fixed chart point.
    pub f_val: Vec<f64>,
    pub e0_f: Vec<f64>,
    pub grad_f_t: Vec<Vec<f64>>,
    pub hess_f_tt: Vec<Array2<f64>>,
    pub hess_f_0t: Vec<Vec<f64>>,
    pub dt_f: Vec<f64>,
}

fn ip(g: &Array2<f64>, u: &[f64], v: &[f64]) -> f64 {
    let n = u.len();
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            acc += g[[a, b]] * u[a] * v[b];
        }
    }
    acc
}

fn chris_contract(chris: &ndarray::Array3<f64>, u: &[f64], v: &[f64]) -> Vec<f64> {
    let n = u.len();
    (0..n)
        .map(|a| {
            let mut acc = 0.0;
            for b in 0..n {
                for c in 0..n {
                    acc += chris[[a, b, c]] * u[b] * v[c];
                }
            }
            acc
        })
        .collect()
}

/// Node-wise tangent data differentiated from the coordinate series.
struct TangentSeries {
    /// `t_vecs[i][node][ambient]`: i-th coordinate tangent.
    t_vecs: Vec<Vec<Vec<f64>>>,
    /// `d_t[(i,j)][node][ambient]`: parameter derivative `d_i T_j`.
    dt_11: Vec<Vec<f64>>,
    dt_12: Option<Vec<Vec<f64>>>,
    dt_22: Option<Vec<Vec<f64>>>,
    /// Rotation sign for the curve normal candidate (+1 counterclockwise).
    rot_sign: f64,
}

fn tangent_series(imm: &Immersion, ops: &SigmaOps) -> TangentSeries {
    let nn = imm.n_nodes();
    match imm.domain {
        Domain::ClosedCurve | Domain::OpenCurve { .. } => {
            let xs: Vec<f64> = imm.nodes.column(0).to_vec();
            let ys: Vec<f64> = imm.nodes.column(1).to_vec();
            let dx = ops.d1(&xs, Parity::Even);
            let dy = ops.d1(&ys, Parity::Even);
            let ddx = ops.d2(&xs, Parity::Even);
            let ddy = ops.d2(&ys, Parity::Even);
            let t: Vec<Vec<f64>> = (0..nn).map(|j| vec![dx[j], dy[j]]).collect();
            let dt: Vec<Vec<f64>> = (0..nn).map(|j| vec![ddx[j], ddy[j]]).collect();
            let rot_sign = match imm.domain {
                Domain::ClosedCurve => imm.chart_signed_area().signum(),
                _ => 1.0,
            };
            TangentSeries {
                t_vecs: vec![t],
                dt_11: dt,
                dt_12: None,
                dt_22: None,
                rot_sign,
            }
        }
        Domain::Profile => {
            let rho: Vec<f64> = imm.nodes.column(0).to_vec();
            let z: Vec<f64> = imm.nodes.column(1).to_vec();
            let rp = ops.d1(&rho, Parity::Odd);
            let zp = ops.d1(&z, Parity::Even);
            let rpp = ops.d2(&rho, Parity::Odd);
            let zpp = ops.d2(&z, Parity::Even);
            let t1: Vec<Vec<f64>> = (0..nn).map(|j| vec![rp[j], 0.0, zp[j]]).collect();
            let t2: Vec<Vec<f64>> = (0..nn).map(|j| vec![0.0, rho[j], 0.0]).collect();
            let d11: Vec<Vec<f64>> = (0..nn).map(|j| vec![rpp[j], 0.0, zpp[j]]).collect();
            let d12: Vec<Vec<f64>> = (0..nn).map(|j| vec![0.0, rp[j], 0.0]).collect();
            let d22: Vec<Vec<f64>> = (0..nn).map(|j| vec![-rho[j], 0.0, 0.0]).collect();
            TangentSeries {
                t_vecs: vec![t1, t2],
                dt_11: d11,
                dt_12: Some(d12),
                dt_22: Some(d22),
                rot_sign: 1.0,
            }
        }
    }
}

fn assemble_node(
    imm: &Immersion,
    ts: &TangentSeries,
    jet: &MetricJet,
    chris: &ndarray::Array3<f64>,
    j: usize,
) -> Result<NodeCore> {
    let m = imm.m();
    let g = &jet.g;

    let t_j: Vec<Vec<f64>> = (0..m).map(|i| ts.t_vecs[i][j].clone()).collect();
    let mut gamma = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for k in 0..m {
            gamma[[i, k]] = ip(g, &t_j[i], &t_j[k]);
        }
    }
    if gamma[[0, 0]] <= 1e-14 {
        return Err(Error::DegenerateTangent {
            node: j,
            norm2: gamma[[0, 0]],
        });
    }
    if m == 2 {
        if gamma[[1, 1]] <= 1e-14 {
            return Err(Error::DegenerateTangent {
                node: j,
                norm2: gamma[[1, 1]],
            });
        }
        let skew = gamma[[0, 1]].abs() / (gamma[[0, 0]] * gamma[[1, 1]]).sqrt();
        if skew > 1e-9 {
            return Err(Error::Numerical(format!(
                "profile tangent frame not orthogonal at node {j}: F/sqrt(EG) = {skew:.3e}"
            )));
        }
        gamma[[0, 1]] = 0.0;
        gamma[[1, 0]] = 0.0;
    }
    let gamma_inv = crate::linalg::inverse(&gamma)?;
    let sqrt_det = crate::linalg::det(&gamma).sqrt();

    // Normal candidate, then metric Gram-Schmidt against the tangents.
    let cand: Vec<f64> = match imm.domain {
        Domain::Profile => vec![t_j[0][2], 0.0, -t_j[0][0]],
        _ => vec![-ts.rot_sign * t_j[0][1], ts.rot_sign * t_j[0][0]],
    };
    let n_amb = cand.len();
    let mut c_perp = cand.clone();
    for i in 0..m {
        for k in 0..m {
            let coef = gamma_inv[[i, k]] * ip(g, &cand, &t_j[k]);
            for a in 0..n_amb {
                c_perp[a] -= coef * t_j[i][a];
            }
        }
    }
    let n2 = ip(g, &c_perp, &c_perp);
    if n2 <= 1e-13 * gamma[[0, 0]] {
        return Err(Error::DegenerateTangent { node: j, norm2: n2 });
    }
    let inv_norm = n2.sqrt().recip();
    let e0: Vec<f64> = c_perp.iter().map(|v| v * inv_norm).collect();

    // Second fundamental form A_ij = < e0, d_i T_j + Gamma(T_i, T_j) >.
    let mut a = Array2::<f64>::zeros((m, m));
    let second = |d: &[f64], ti: &[f64], tk: &[f64]| -> f64 {
        let gam = chris_contract(chris, ti, tk);
        let full: Vec<f64> = d.iter().zip(&gam).map(|(x, y)| x + y).collect();
        ip(g, &e0, &full)
    };
    a[[0, 0]] = second(&ts.dt_11[j], &t_j[0], &t_j[0]);
    if m == 2 {
        let d12 = ts.dt_12.as_ref().unwrap();
        let d22 = ts.dt_22.as_ref().unwrap();
        a[[0, 1]] = second(&d12[j], &t_j[0], &t_j[1]);
        a[[1, 0]] = a[[0, 1]];
        a[[1, 1]] = second(&d22[j], &t_j[1], &t_j[1]);
    }

    let mut h_mean = 0.0;
    let mut a_norm2 = 0.0;
    for i in 0..m {
        for k in 0..m {
            h_mean += gamma_inv[[i, k]] * a[[i, k]];
            for p in 0..m {
                for q in 0..m {
                    a_norm2 += gamma_inv[[i, p]] * gamma_inv[[k, q]] * a[[i, k]] * a[[p, q]];
                }
            }
        }
    }

    Ok(NodeCore {
        gamma,
        gamma_inv,
        sqrt_det,
        a,
        h_mean,
        a_norm2,
        e0,
        tangents: t_j,
    })
}

struct NodeCore {
    gamma: Array2<f64>,
    gamma_inv: Array2<f64>,
    sqrt_det: f64,
    a: Array2<f64>,
    h_mean: f64,
    a_norm2: f64,
    e0: Vec<f64>,
    tangents: Vec<Vec<f64>>,
}

/// Core geometry at time `t`, using connection data only.
pub fn core_geometry(
    imm: &Immersion,
    ops: &SigmaOps,
    bg: &Background,
    t: f64,
) -> Result<CoreGeom> {
    if bg.n() != imm.ambient_dim() {
        return Err(Error::WrongDimension {
            expected: imm.ambient_dim(),
            got: bg.n(),
        });
    }
    let nn = imm.n_nodes();
    let ts = tangent_series(imm, ops);
    let mut out = CoreGeom::with_capacity(imm, nn);
    if bg.metric_is_euclidean() {
        let jet = bg.metric_jet(&imm.ambient_point(0), t)?;
        let chris = christoffel(&jet);
        for j in 0..nn {
            out.push(assemble_node(imm, &ts, &jet, &chris, j)?);
        }
    } else {
        for j in 0..nn {
            let jet = bg.metric_jet(&imm.ambient_point(j), t)?;
            let chris = christoffel(&jet);
            out.push(assemble_node(imm, &ts, &jet, &chris, j)?);
        }
    }
    Ok(out)
}

impl CoreGeom {
    fn with_capacity(imm: &Immersion, nn: usize) -> Self {
        CoreGeom {
            m: imm.m(),
            nn: 0,
            gamma: Vec::with_capacity(nn),
            gamma_inv: Vec::with_capacity(nn),
            sqrt_det: Vec::with_capacity(nn),
            a: Vec::with_capacity(nn),
            h_mean: Vec::with_capacity(nn),
            a_norm2: Vec::with_capacity(nn),
            e0: Vec::with_capacity(nn),
            tangents: Vec::with_capacity(nn),
            area_factor: match imm.domain {
                Domain::Profile => std::f64::consts::TAU,
                _ => 1.0,
            },
        }
    }

    fn push(&mut self, nc: NodeCore) {
        self.gamma.push(nc.gamma);
        self.gamma_inv.push(nc.gamma_inv);
        self.sqrt_det.push(nc.sqrt_det);
        self.a.push(nc.a);
        self.h_mean.push(nc.h_mean);
        self.a_norm2.push(nc.a_norm2);
        self.e0.push(nc.e0);
        self.tangents.push(nc.tangents);
        self.nn += 1;
    }
}

impl SurfaceData {
    /// Full geometric state at time `t`, including ambient curvature and
    /// potential restrictions.
    pub fn build(imm: &Immersion, ops: &SigmaOps, bg: &Background, t: f64) -> Result<Self> {
        if bg.n() != imm.ambient_dim() {
            return Err(Error::WrongDimension {
                expected: imm.ambient_dim(),
                got: bg.n(),
            });
        }
        let nn = imm.n_nodes();
        let m = imm.m();
        let ts = tangent_series(imm, ops);

        let mut core = CoreGeom::with_capacity(imm, nn);
        let mut data = SurfaceData {
            core: CoreGeom::with_capacity(imm, 0),
            scalar: Vec::with_capacity(nn),
            e0_scalar: Vec::with_capacity(nn),
            ric00: Vec::with_capacity(nn),
            ric0t: Vec::with_capacity(nn),
            ric_tt: Vec::with_capacity(nn),
            riem_0t0t: Vec::with_capacity(nn),
            riem_0ttt: Vec::with_capacity(nn),
            riem_tttt: Vec::with_capacity(nn),
            nab0_ric00: Vec::with_capacity(nn),
            nab0_ric_tt: Vec::with_capacity(nn),
            nab0_riem_0t0t: Vec::with_capacity(nn),
            f_val: Vec::with_capacity(nn),
            e0_f: Vec::with_capacity(nn),
            grad_f_t: Vec::with_capacity(nn),
            hess_f_tt: Vec::with_capacity(nn),
            hess_f_0t: Vec::with_capacity(nn),
            dt_f: Vec::with_capacity(nn),
        };

        for j in 0..nn {
            let x = imm.ambient_point(j);
            let jet = bg.metric_jet(&x, t)?;
            let bundle = CurvatureBundle::from_jet(&jet);
            let nc = assemble_node(imm, &ts, &jet, &bundle.chris, j)?;
            let e0 = nc.e0.clone();
            let t_j = nc.tangents.clone();
            core.push(nc);

            data.scalar.push(bundle.scalar);
            data.e0_scalar.push(bundle.nabla_scalar_along(&e0));
            data.ric00.push(bundle.ric_of(&e0, &e0));
            data.ric0t
                .push((0..m).map(|i| bundle.ric_of(&e0, &t_j[i])).collect());
            let mut rtt = Array2::<f64>::zeros((m, m));
            let mut r0t0t = Array2::<f64>::zeros((m, m));
            let mut n0rtt = Array2::<f64>::zeros((m, m));
            let mut n0r0t0t = Array2::<f64>::zeros((m, m));
            let mut r0ttt = Array3::<f64>::zeros((m, m, m));
            let mut rtttt = Array4::<f64>::zeros((m, m, m, m));
            for i in 0..m {
                for k in 0..m {
                    rtt[[i, k]] = bundle.ric_of(&t_j[i], &t_j[k]);
                    r0t0t[[i, k]] = bundle.riem_of(&e0, &t_j[i], &e0, &t_j[k]);
                    n0rtt[[i, k]] = bundle.nabla_ric_of(&e0, &t_j[i], &t_j[k]);
                    n0r0t0t[[i, k]] = bundle.nabla_riem_of(&e0, &e0, &t_j[i], &e0, &t_j[k]);
                    for l in 0..m {
                        r0ttt[[i, k, l]] = bundle.riem_of(&e0, &t_j[i], &t_j[k], &t_j[l]);
                        for p in 0..m {
                            rtttt[[i, k, l, p]] =
                                bundle.riem_of(&t_j[i], &t_j[k], &t_j[l], &t_j[p]);
                        }
                    }
                }
            }
            data.ric_tt.push(rtt);
            data.riem_0t0t.push(r0t0t);
            data.nab0_ric_tt.push(n0rtt);
            data.nab0_riem_0t0t.push(n0r0t0t);
            data.riem_0ttt.push(r0ttt);
            data.riem_tttt.push(rtttt);
            data.nab0_ric00
                .push(bundle.nabla_ric_of(&e0, &e0, &e0));

            let f = bg.potential(&x, t);
            data.f_val.push(f.value);
            data.dt_f.push(f.dt);
            data.e0_f
                .push((0..bg.n()).map(|a| f.d1[a] * e0[a]).sum());
            data.grad_f_t.push(
                (0..m)
                    .map(|i| (0..bg.n()).map(|a| f.d1[a] * t_j[i][a]).sum())
                    .collect(),
            );
            let hess = bundle.hessian(&f);
            let hc = |u: &[f64], v: &[f64]| -> f64 {
                let mut acc = 0.0;
                for a in 0..bg.n() {
                    for b in 0..bg.n() {
                        acc += hess[[a, b]] * u[a] * v[b];
                    }
                }
                acc
            };
            let mut htt = Array2::<f64>::zeros((m, m));
            for i in 0..m {
                for k in 0..m {
                    htt[[i, k]] = hc(&t_j[i], &t_j[k]);
                }
            }
            data.hess_f_tt.push(htt);
            data.hess_f_0t
                .push((0..m).map(|i| hc(&e0, &t_j[i])).collect());
        }
        data.core = core;
        Ok(data)
    }

    /// Integral of a per-node density over the hypersurface measure.
    pub fn integrate(&self, ops: &SigmaOps, series: &[f64]) -> f64 {
        let weighted: Vec<f64> = series
            .iter()
            .zip(&self.core.sqrt_det)
            .map(|(s, w)| s * w * self.core.area_factor)
            .collect();
        // Even integrands times the odd measure density of a profile grid.
        ops.integrate(&weighted, Parity::Odd)
    }

    /// Hypersurface area (length for curves).
    pub fn area(&self, ops: &SigmaOps) -> f64 {
        self.integrate(ops, &vec![1.0; self.core.nn])
    }

    /// Weighted area `int exp(-f) dA` against the soliton potential.
    pub fn weighted_area(&self, ops: &SigmaOps) -> f64 {
        let dens: Vec<f64> = self.f_val.iter().map(|f| (-f).exp()).collect();
        self.integrate(ops, &dens)
    }

    /// Pointwise deviation from the soliton configuration: `H + e0 f`.
    pub fn soliton_deviation(&self) -> Vec<f64> {
        self.core
            .h_mean
            .iter()
            .zip(&self.e0_f)
            .map(|(h, ef)| h + ef)
            .collect()
    }
}
