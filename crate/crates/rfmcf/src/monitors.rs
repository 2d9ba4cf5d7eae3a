//! Per-run identity monitors.
//!
//! Everything the flow is supposed to satisfy is evaluated here as a
//! numerical residual over the stored snapshots of a [`FlowRun`]: the
//! evolution equations of the induced metric, second fundamental form, and
//! mean curvature; the area and weighted-area dissipation identities; the
//! differential Harnack expression; soliton deviation; and the extinction
//! inequality for spheres in three-dimensional steady backgrounds.
//!
//! Left sides of evolution equations are per-node time differences across
//! consecutive snapshots, second order in the output spacing (centered in
//! the interior, one-sided at the first and last snapshot). This only makes
//! sense when the node labels follow one material parametrization, so the
//! run must use uniform output times and no redistribution. Right sides are
//! spatial expressions of a single snapshot. Integral identities compare a
//! differenced functional against a quadrature at the same output time, and
//! the Harnack expression needs no differencing at all: its mean-curvature
//! rate is substituted from the evolution equation, making it a pure
//! function of one time slice.

use std::f64::consts::PI;

use ndarray::Array2;

use crate::backgrounds::Background;
use crate::error::{Error, Result};
use crate::flow::{FlowRun, Frame, Termination};
use crate::geom::extrinsic::SurfaceData;
use crate::geom::identities;
use crate::geom::intrinsic::IntrinsicCalc;
use crate::geom::{Domain, Immersion, SigmaOps};
use crate::tensor::SolitonClass;

/// Monitor values at one output time.
///
/// The `res_*` entries are norms (max over nodes and components for the
/// pointwise identities, absolute or relative for the integral ones), so
/// they are nonnegative; a residual at the discretization error of the run
/// certifies the corresponding identity.
#[derive(Debug, Clone)]
pub struct MonitorRow {
    pub t: f64,
    /// Hypersurface area (length for curves).
    pub area: f64,
    /// `int exp(-f) dA` against the soliton potential; frozen-time data on
    /// static-frame runs.
    pub weighted_area: f64,
    /// Rescaled weighted area `tau^{-(n-1)/2} int exp(-f) dA` on shrinking
    /// backgrounds (`tau = -t`); equals `weighted_area` on steady ones.
    pub huisken_q: f64,
    pub min_h: f64,
    pub max_h: f64,
    /// Weighted rms of the soliton deviation `H + e0 f`.
    pub soliton_dev_l2: f64,
    /// Minimum over nodes of the Harnack expression.
    pub harnack_min: f64,
    /// Evolution residual of the induced metric, max norm.
    pub res_dgdt: f64,
    /// Evolution residual of the second fundamental form, max norm.
    pub res_dadt: f64,
    /// Evolution residual of the mean curvature, max norm.
    pub res_dhdt: f64,
    /// Residual of the Simons-type identity for `Lap A`, max norm.
    pub res_simons: f64,
    /// Absolute residual of the area dissipation identity.
    pub res_area_identity: f64,
    /// Relative residual of the weighted-area (or rescaled weighted-area)
    /// dissipation identity, floored at `1e-6` to stay finite on solitons
    /// where both sides vanish.
    pub res_monotonicity: f64,
    /// Per-step extinction inequality `dA/dt <= 3A/(4t) - 4 pi` where it
    /// applies (ambient flow of a revolution sphere in a steady
    /// three-dimensional background at `t > 0`); vacuously true elsewhere.
    pub ext_bound_ok: bool,
}

impl MonitorRow {
    pub const CSV_HEADER: &'static str = "t,area,weighted_area,huisken_q,min_H,max_H,\
soliton_dev_L2,harnack_min,res_dgdt,res_dAdt,res_dHdt,res_simons,res_area_identity,\
res_monotonicity,ext_bound_ok";

    /// One CSV record in the column order of [`Self::CSV_HEADER`], full
    /// float precision, flag as `1`/`0`.
    pub fn csv_line(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            self.t,
            self.area,
            self.weighted_area,
            self.huisken_q,
            self.min_h,
            self.max_h,
            self.soliton_dev_l2,
            self.harnack_min,
            self.res_dgdt,
            self.res_dadt,
            self.res_dhdt,
            self.res_simons,
            self.res_area_identity,
            self.res_monotonicity,
            u8::from(self.ext_bound_ok)
        )
    }
}

/// Soliton diagnostics of one configuration.
#[derive(Debug, Clone)]
pub struct SolitonReport {
    /// Weighted rms of `H + e0 f`; `None` on open curves, where the closed
    /// quadrature is not available.
    pub dev_l2: Option<f64>,
    /// Max norm of `H + e0 f`.
    pub dev_max: f64,
    /// Sup residual of the restricted soliton identity on tangential
    /// indices, `Ric + Hess f + H A = lambda gamma`.
    pub restricted_tangential: f64,
    /// Sup residual of the mixed identity `Ric(e0, .) - grad H + A(grad f, .) = 0`.
    pub restricted_mixed: f64,
}

/// Aggregate verdict of the extinction inequality over a monitored run of a
/// revolution sphere in a three-dimensional background.
#[derive(Debug, Clone)]
pub struct ExtinctionReport {
    /// First output time; the bound is anchored there and must be positive.
    pub t0: f64,
    pub area0: f64,
    /// `t0 (1 + A(t0) / (16 pi t0))^4`, the latest time the surface can
    /// survive to.
    pub bound: f64,
    /// Extinction estimate of the run, when it ended in extinction.
    pub extinction: Option<f64>,
    /// Whether the estimate respects the bound.
    pub within_bound: Option<bool>,
    /// Whether the per-step inequality held at every output time.
    pub per_step_ok: bool,
    /// First output time where it did not.
    pub first_violation: Option<f64>,
}

/// Evaluate every monitor over the snapshots of a run.
///
/// Needs at least three snapshots, uniform output spacing, and a run that
/// never redistributed its nodes. On ambient runs the geometry is read at
/// each snapshot time; on static-frame runs at the frozen start time, so
/// the evolution residuals certify the static-metric variation formulas
/// with normal speed `H + e0 f` instead of the ambient-flow ones.
pub fn evaluate(run: &FlowRun, bg: &Background) -> Result<Vec<MonitorRow>> {
    let snaps = &run.snapshots;
    if snaps.len() < 3 {
        return Err(Error::BadParams(format!(
            "residual monitors need at least 3 snapshots, got {}",
            snaps.len()
        )));
    }
    if run.redistributed {
        return Err(Error::RedistributionActive);
    }
    let dt = snaps[1].0 - snaps[0].0;
    for w in snaps.windows(2) {
        let d = w[1].0 - w[0].0;
        if (d - dt).abs() > 1e-9 * dt.abs() {
            return Err(Error::NonUniformDt(dt, d));
        }
    }

    let ops = SigmaOps::for_immersion(&snaps[0].1);
    let t_freeze = snaps[0].0;
    let m = snaps[0].1.m();
    let nn = snaps[0].1.n_nodes();
    let class = bg.class();
    let shrinking_rescale = run.frame == Frame::AmbientMcf && class == SolitonClass::Shrinking;

    let mut slices = Vec::with_capacity(snaps.len());
    for (tk, imm) in snaps {
        let t_geom = match run.frame {
            Frame::AmbientMcf => *tk,
            Frame::StaticWeighted => t_freeze,
        };
        let data = SurfaceData::build(imm, &ops, bg, t_geom)?;
        let calc = IntrinsicCalc::build(&data.core, &ops);
        let pref = if shrinking_rescale {
            (-tk).powf(-((bg.n() as f64 - 1.0) / 2.0))
        } else {
            1.0
        };
        slices.push(Slice::assemble(data, calc, &ops, run.frame, pref));
    }

    let area: Vec<f64> = slices.iter().map(|s| s.area).collect();
    let q: Vec<f64> = slices.iter().map(|s| s.q).collect();
    let last = snaps.len() - 1;

    let mut rows = Vec::with_capacity(snaps.len());
    for (k, s) in slices.iter().enumerate() {
        let tk = snaps[k].0;
        let st = ddt_stencil(k, last);

        let mut res_dgdt = 0.0f64;
        let mut res_dadt = 0.0f64;
        let mut res_dhdt = 0.0f64;
        for j in 0..nn {
            let mut dh = 0.0;
            for (idx, c) in st {
                dh += c * slices[idx].data.core.h_mean[j];
            }
            res_dhdt = res_dhdt.max((dh / dt - s.rhs_h[j]).abs());
            for i in 0..m {
                for l in 0..m {
                    let mut dg = 0.0;
                    let mut da = 0.0;
                    for (idx, c) in st {
                        dg += c * slices[idx].data.core.gamma[j][[i, l]];
                        da += c * slices[idx].data.core.a[j][[i, l]];
                    }
                    res_dgdt = res_dgdt.max((dg / dt - s.rhs_g[j][[i, l]]).abs());
                    res_dadt = res_dadt.max((da / dt - s.rhs_a[j][[i, l]]).abs());
                }
            }
        }

        let dadt = apply(&st, &area) / dt;
        let res_area_identity = (dadt - s.area_rhs).abs();
        let dqdt = apply(&st, &q) / dt;
        let mono_rhs = -s.dev_l2 * s.dev_l2 * s.q;
        let res_monotonicity = (dqdt - mono_rhs).abs() / mono_rhs.abs().max(1e-6);

        let applicable = run.frame == Frame::AmbientMcf
            && m == 2
            && bg.n() == 3
            && class == SolitonClass::Steady
            && tk > 0.0;
        let ext_bound_ok = if applicable {
            let slack = 1e-6 + 10.0 * res_area_identity;
            dadt <= 3.0 / (4.0 * tk) * s.area - 4.0 * PI + slack
        } else {
            true
        };

        rows.push(MonitorRow {
            t: tk,
            area: s.area,
            weighted_area: s.warea,
            huisken_q: s.q,
            min_h: s.h_min,
            max_h: s.h_max,
            soliton_dev_l2: s.dev_l2,
            harnack_min: s.harnack_min,
            res_dgdt,
            res_dadt,
            res_dhdt,
            res_simons: s.simons_max,
            res_area_identity,
            res_monotonicity,
            ext_bound_ok,
        });
    }
    Ok(rows)
}

/// Soliton deviation and restricted-identity residuals of one immersion at
/// one time, with the soliton constant taken from the background class.
pub fn soliton_report(imm: &Immersion, bg: &Background, t: f64) -> Result<SolitonReport> {
    let ops = SigmaOps::for_immersion(imm);
    let data = SurfaceData::build(imm, &ops, bg, t)?;
    let calc = IntrinsicCalc::build(&data.core, &ops);
    let lambda = match bg.class() {
        SolitonClass::Shrinking => -1.0 / (2.0 * t),
        _ => 0.0,
    };
    let (r1, r2) = identities::soliton_restricted(&data, &calc, &ops, lambda);
    let dev = data.soliton_deviation();
    let dev_max = dev.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let dev_l2 = if matches!(imm.domain, Domain::OpenCurve { .. }) {
        None
    } else {
        Some(weighted_rms(&data, &ops, &dev))
    };
    Ok(SolitonReport {
        dev_l2,
        dev_max,
        restricted_tangential: r1.iter().fold(0.0f64, |a, r| a.max(*r)),
        restricted_mixed: r2.iter().fold(0.0f64, |a, r| a.max(*r)),
    })
}

/// Rescaled weighted area `tau^{-(n-1)/2} int exp(-f) dA` with `tau = -t`.
/// Only meaningful on shrinking backgrounds at `t < 0`.
pub fn huisken_quantity(imm: &Immersion, bg: &Background, t: f64) -> Result<f64> {
    if bg.class() != SolitonClass::Shrinking || !(t < 0.0) {
        return Err(Error::WrongSolitonClass {
            monitor: "rescaled weighted area".into(),
            class: format!("{:?}", bg.class()).to_lowercase(),
        });
    }
    let ops = SigmaOps::for_immersion(imm);
    let data = SurfaceData::build(imm, &ops, bg, t)?;
    Ok((-t).powf(-((bg.n() as f64 - 1.0) / 2.0)) * data.weighted_area(&ops))
}

/// Extinction verdict for a monitored run of a revolution sphere in a
/// three-dimensional background: the survival bound anchored at the first
/// output time, the run's extinction estimate against it, and the per-step
/// inequality collected from the rows.
pub fn extinction_report(
    run: &FlowRun,
    bg: &Background,
    rows: &[MonitorRow],
) -> Result<ExtinctionReport> {
    let m = run.snapshots[0].1.m();
    if m != 2 {
        return Err(Error::WrongDimension { expected: 2, got: m });
    }
    if bg.n() != 3 {
        return Err(Error::WrongDimension {
            expected: 3,
            got: bg.n(),
        });
    }
    let first = rows
        .first()
        .ok_or_else(|| Error::BadParams("extinction report needs monitor rows".into()))?;
    if !(first.t > 0.0) {
        return Err(Error::BadParams(format!(
            "the extinction bound is anchored at a positive start time, got t0 = {}",
            first.t
        )));
    }
    let bound = first.t * (1.0 + first.area / (16.0 * PI * first.t)).powi(4);
    let extinction = match run.termination {
        Termination::Extinction { t_estimate } => Some(t_estimate),
        _ => None,
    };
    let first_violation = rows.iter().find(|r| !r.ext_bound_ok).map(|r| r.t);
    Ok(ExtinctionReport {
        t0: first.t,
        area0: first.area,
        bound,
        extinction,
        within_bound: extinction.map(|te| te <= bound),
        per_step_ok: first_violation.is_none(),
        first_violation,
    })
}

/// Everything the row loop needs from one snapshot.
struct Slice {
    data: SurfaceData,
    rhs_g: Vec<Array2<f64>>,
    rhs_a: Vec<Array2<f64>>,
    rhs_h: Vec<f64>,
    area: f64,
    warea: f64,
    q: f64,
    dev_l2: f64,
    harnack_min: f64,
    simons_max: f64,
    area_rhs: f64,
    h_min: f64,
    h_max: f64,
}

impl Slice {
    fn assemble(
        data: SurfaceData,
        calc: IntrinsicCalc,
        ops: &SigmaOps,
        frame: Frame,
        pref: f64,
    ) -> Slice {
        let nn = data.core.nn;
        let m = data.core.m;
        let area = data.area(ops);
        let warea = data.weighted_area(ops);
        let dev = data.soliton_deviation();
        let dev_l2 = weighted_rms(&data, ops, &dev);
        let harnack_min = identities::harnack(&data, &calc, ops)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let simons_max = identities::simons(&data, &calc, ops)
            .into_iter()
            .fold(0.0f64, f64::max);
        let h_min = data.core.h_mean.iter().cloned().fold(f64::INFINITY, f64::min);
        let h_max = data
            .core
            .h_mean
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);

        let (rhs_g, rhs_a, rhs_h, area_rhs) = match frame {
            Frame::AmbientMcf => {
                let trh2: Vec<f64> = (0..nn)
                    .map(|j| {
                        let gi = &calc.gamma_inv[j];
                        let mut tr = 0.0;
                        for i in 0..m {
                            for k in 0..m {
                                tr += gi[[i, k]] * data.ric_tt[j][[i, k]];
                            }
                        }
                        tr + data.core.h_mean[j] * data.core.h_mean[j]
                    })
                    .collect();
                (
                    mcf_gamma_rhs(&data),
                    mcf_a_rhs(&data, &calc, ops),
                    mcf_h_rhs(&data, &calc, ops),
                    -data.integrate(ops, &trh2),
                )
            }
            Frame::StaticWeighted => {
                let phi = &dev;
                let hphi: Vec<f64> = (0..nn)
                    .map(|j| data.core.h_mean[j] * phi[j])
                    .collect();
                (
                    static_gamma_rhs(&data, phi),
                    static_a_rhs(&data, &calc, ops, phi),
                    static_h_rhs(&data, &calc, ops, phi),
                    -data.integrate(ops, &hphi),
                )
            }
        };

        Slice {
            data,
            rhs_g,
            rhs_a,
            rhs_h,
            area,
            warea,
            q: pref * warea,
            dev_l2,
            harnack_min,
            simons_max,
            area_rhs,
            h_min,
            h_max,
        }
    }
}

/// Weighted rms `sqrt(int s^2 exp(-f) dA / int exp(-f) dA)`.
fn weighted_rms(data: &SurfaceData, ops: &SigmaOps, series: &[f64]) -> f64 {
    let integrand: Vec<f64> = series
        .iter()
        .zip(&data.f_val)
        .map(|(s, f)| s * s * (-f).exp())
        .collect();
    (data.integrate(ops, &integrand) / data.weighted_area(ops))
        .max(0.0)
        .sqrt()
}

/// Second-order time-derivative stencil over the snapshot index: centered
/// in the interior, one-sided at the ends. Weights are in units of `1/dt`.
fn ddt_stencil(k: usize, last: usize) -> [(usize, f64); 3] {
    if k == 0 {
        [(0, -1.5), (1, 2.0), (2, -0.5)]
    } else if k == last {
        [(last, 1.5), (last - 1, -2.0), (last - 2, 0.5)]
    } else {
        [(k - 1, -0.5), (k, 0.0), (k + 1, 0.5)]
    }
}

fn apply(st: &[(usize, f64); 3], series: &[f64]) -> f64 {
    st.iter().map(|(i, c)| c * series[*i]).sum()
}

/// Metric evolution under the ambient flow: `-2 Ric_tt - 2 H A`.
fn mcf_gamma_rhs(data: &SurfaceData) -> Vec<Array2<f64>> {
    let m = data.core.m;
    (0..data.core.nn)
        .map(|j| {
            let h = data.core.h_mean[j];
            let mut r = Array2::zeros((m, m));
            for i in 0..m {
                for l in 0..m {
                    r[[i, l]] =
                        -2.0 * data.ric_tt[j][[i, l]] - 2.0 * h * data.core.a[j][[i, l]];
                }
            }
            r
        })
        .collect()
}

/// Second-fundamental-form evolution under the ambient flow:
/// `Lap A - A Riem - Riem A + 2 A:Riem - 2 H A^2 + |A|^2 A + nab0 Riem(e0,.,e0,.)`,
/// with every Riemann contraction tangential.
fn mcf_a_rhs(data: &SurfaceData, calc: &IntrinsicCalc, ops: &SigmaOps) -> Vec<Array2<f64>> {
    let m = calc.m;
    let lap_a = calc.laplacian_2tensor(ops, &data.core.a);
    (0..calc.nn)
        .map(|nj| {
            let gi = &calc.gamma_inv[nj];
            let a = &data.core.a[nj];
            let h = data.core.h_mean[nj];
            let a2 = data.core.a_norm2[nj];
            let riem = &data.riem_tttt[nj];
            let mut out = Array2::zeros((m, m));
            for i in 0..m {
                for j in 0..m {
                    let mut r =
                        lap_a[nj][[i, j]] + a2 * a[[i, j]] + data.nab0_riem_0t0t[nj][[i, j]];
                    for k in 0..m {
                        for l in 0..m {
                            r -= 2.0 * h * gi[[k, l]] * a[[i, k]] * a[[l, j]];
                            for p in 0..m {
                                for q in 0..m {
                                    let au = gi[[k, p]] * gi[[l, q]];
                                    r -= au * a[[p, i]] * riem[[q, k, l, j]];
                                    r -= au * a[[p, j]] * riem[[q, k, l, i]];
                                    r += 2.0 * au * a[[p, q]] * riem[[k, i, l, j]];
                                }
                            }
                        }
                    }
                    out[[i, j]] = r;
                }
            }
            out
        })
        .collect()
}

/// Mean-curvature evolution under the ambient flow:
/// `Lap H + 2 A^{ij} Ric_ij + |A|^2 H + nab0 Ric(e0,e0)`.
fn mcf_h_rhs(data: &SurfaceData, calc: &IntrinsicCalc, ops: &SigmaOps) -> Vec<f64> {
    let m = calc.m;
    let lap_h = calc.laplacian_scalar(ops, &data.core.h_mean);
    (0..calc.nn)
        .map(|j| {
            let gi = &calc.gamma_inv[j];
            let a = &data.core.a[j];
            let mut r =
                lap_h[j] + data.core.a_norm2[j] * data.core.h_mean[j] + data.nab0_ric00[j];
            for i in 0..m {
                for k in 0..m {
                    for p in 0..m {
                        for q in 0..m {
                            r += 2.0 * gi[[i, p]] * gi[[k, q]] * a[[p, q]]
                                * data.ric_tt[j][[i, k]];
                        }
                    }
                }
            }
            r
        })
        .collect()
}

/// Metric variation under normal speed `phi` in a frozen ambient metric.
fn static_gamma_rhs(data: &SurfaceData, phi: &[f64]) -> Vec<Array2<f64>> {
    let m = data.core.m;
    (0..data.core.nn)
        .map(|j| {
            let mut r = Array2::zeros((m, m));
            for i in 0..m {
                for l in 0..m {
                    r[[i, l]] = -2.0 * phi[j] * data.core.a[j][[i, l]];
                }
            }
            r
        })
        .collect()
}

/// Second-fundamental-form variation under normal speed `phi` in a frozen
/// ambient metric: `Hess phi - phi A^2 + phi Riem(e0,.,e0,.)`.
fn static_a_rhs(
    data: &SurfaceData,
    calc: &IntrinsicCalc,
    ops: &SigmaOps,
    phi: &[f64],
) -> Vec<Array2<f64>> {
    let m = calc.m;
    let hess = calc.hess_scalar(ops, phi);
    (0..calc.nn)
        .map(|nj| {
            let gi = &calc.gamma_inv[nj];
            let a = &data.core.a[nj];
            let mut out = Array2::zeros((m, m));
            for i in 0..m {
                for j in 0..m {
                    let mut r = hess[nj][[i, j]] + phi[nj] * data.riem_0t0t[nj][[i, j]];
                    for k in 0..m {
                        for l in 0..m {
                            r -= phi[nj] * gi[[k, l]] * a[[i, k]] * a[[l, j]];
                        }
                    }
                    out[[i, j]] = r;
                }
            }
            out
        })
        .collect()
}

/// Mean-curvature variation under normal speed `phi` in a frozen ambient
/// metric: `Lap phi + phi (|A|^2 + Ric(e0,e0))`.
fn static_h_rhs(
    data: &SurfaceData,
    calc: &IntrinsicCalc,
    ops: &SigmaOps,
    phi: &[f64],
) -> Vec<f64> {
    let lap = calc.laplacian_scalar(ops, phi);
    (0..calc.nn)
        .map(|j| lap[j] + phi[j] * (data.core.a_norm2[j] + data.ric00[j]))
        .collect()
}
