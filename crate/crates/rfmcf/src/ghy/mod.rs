//! Weighted boundary-action functionals on rotationally symmetric
//! manifolds-with-boundary.
//!
//! Everything here lives in one radial dimension. A [`RadialDomain`] is a
//! ball or annulus carrying the warped-product metric
//! `q(r)^2 dr^2 + phi(r)^2 ghat`, with `ghat` the unit round sphere, plus a
//! radial potential `f(r)`. Curvature, weighted curvature, boundary mean
//! curvatures, and both action integrals collapse to one-dimensional
//! quadratures, which is what buys the tight tolerances the variation and
//! flow identities are held to. [`variation`] differentiates the actions
//! along metric and potential variations and compares against the closed
//! first-variation formulas, [`modified`] integrates the coupled
//! metric/potential flow and checks the action-dissipation identity, and
//! [`heat`] solves the conjugate heat equation backwards over an evolving
//! background.
//!
//! Ball grids place a node at the pole. Derivative stencils reflect across
//! the pole with the parity of the series, and the `1/phi` curvature terms
//! are closed there by one-sided limits of numerator and denominator. Pole
//! regularity (`phi ~ q r` near `r = 0`) is a constructor invariant.

pub mod heat;
pub mod modified;
pub mod variation;

use std::f64::consts::PI;

use ndarray::Array1;

use crate::backgrounds::Background;
use crate::error::{Error, Result};
use crate::geom::deriv::{fornberg_weights, open_deriv, Parity};

/// Ball (pole at `r = 0`) or annulus (two boundary spheres).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Ball,
    Annulus,
}

/// A boundary component. `Outer` is the sphere at `r_max`; `Inner` exists
/// only on annuli. The inward unit normal points toward decreasing `r` at
/// the outer end and toward increasing `r` at the inner end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Inner,
    Outer,
}

impl End {
    /// Sign of the inward normal against the arclength direction.
    pub fn eps0(self) -> f64 {
        match self {
            End::Outer => -1.0,
            End::Inner => 1.0,
        }
    }
}

/// Rotationally symmetric manifold-with-boundary on a uniform radial grid:
/// metric `q^2 dr^2 + phi^2 ghat` and potential `f`, sampled at the nodes
/// `r_j = r_min + j h`.
#[derive(Debug, Clone)]
pub struct RadialDomain {
    pub n: usize,
    pub kind: DomainKind,
    pub r_min: f64,
    pub r_max: f64,
    pub q: Array1<f64>,
    pub phi: Array1<f64>,
    pub f: Array1<f64>,
}

impl RadialDomain {
    pub fn new(
        n: usize,
        kind: DomainKind,
        r_min: f64,
        r_max: f64,
        q: Array1<f64>,
        phi: Array1<f64>,
        f: Array1<f64>,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::BadParams(format!("ambient dimension {n} < 2")));
        }
        let nodes = q.len();
        if phi.len() != nodes || f.len() != nodes {
            return Err(Error::BadShape(format!(
                "profile lengths differ: q {nodes}, phi {}, f {}",
                phi.len(),
                f.len()
            )));
        }
        if nodes < 9 || (nodes - 1) % 2 != 0 {
            return Err(Error::TooCoarse {
                got: nodes,
                min: 9,
            });
        }
        if !(r_max.is_finite() && r_min.is_finite() && r_max > r_min) {
            return Err(Error::BadParams(format!(
                "bad radial range [{r_min}, {r_max}]"
            )));
        }
        for arr in [&q, &phi, &f] {
            if arr.iter().any(|v| !v.is_finite()) {
                return Err(Error::BadParams("non-finite profile entry".into()));
            }
        }
        if let Some(&bad) = q.iter().find(|&&v| v <= 0.0) {
            return Err(Error::DegenerateMetric {
                eigen: bad,
                tol: 0.0,
            });
        }
        match kind {
            DomainKind::Ball => {
                if r_min != 0.0 {
                    return Err(Error::BadParams(format!(
                        "ball grid must start at the pole, got r_min = {r_min}"
                    )));
                }
                if phi[0].abs() > 1e-12 * r_max {
                    return Err(Error::BadParams(format!(
                        "warping must vanish at the pole, got {}",
                        phi[0]
                    )));
                }
                if let Some(&bad) = phi.iter().skip(1).find(|&&v| v <= 0.0) {
                    return Err(Error::DegenerateMetric {
                        eigen: bad,
                        tol: 0.0,
                    });
                }
                let h = (r_max - r_min) / (nodes - 1) as f64;
                let phi_r0 = radial_deriv(phi.as_slice().unwrap(), h, 1, Some(Parity::Odd))[0];
                if (phi_r0 / q[0] - 1.0).abs() > 1e-3 {
                    return Err(Error::BadParams(format!(
                        "pole regularity violated: phi_r(0)/q(0) = {}",
                        phi_r0 / q[0]
                    )));
                }
            }
            DomainKind::Annulus => {
                if r_min <= 0.0 {
                    return Err(Error::BadParams(format!(
                        "annulus needs r_min > 0, got {r_min}"
                    )));
                }
                if let Some(&bad) = phi.iter().find(|&&v| v <= 0.0) {
                    return Err(Error::DegenerateMetric {
                        eigen: bad,
                        tol: 0.0,
                    });
                }
            }
        }
        Ok(Self {
            n,
            kind,
            r_min,
            r_max,
            q,
            phi,
            f,
        })
    }

    /// Sample a rotationally symmetric catalog background on a ball of
    /// coordinate radius `r_max` at time `t`, with `m` grid intervals.
    pub fn from_background(bg: &Background, r_max: f64, m: usize, t: f64) -> Result<Self> {
        let radial = matches!(
            bg.name(),
            "flat-static" | "gaussian-shrinker" | "cigar-steady" | "round-shrinking-sphere"
        );
        if !radial {
            return Err(Error::BadParams(format!(
                "background {} is not rotationally symmetric about the chart origin",
                bg.name()
            )));
        }
        let n = bg.n();
        let probe = {
            let mut x = vec![0.0; n];
            x[0] = r_max;
            x
        };
        bg.check_point(&probe, t)?;
        let h = r_max / m as f64;
        let mut q = Array1::zeros(m + 1);
        let mut phi = Array1::zeros(m + 1);
        let mut f = Array1::zeros(m + 1);
        for j in 0..=m {
            let r = j as f64 * h;
            let mut x = vec![0.0; n];
            x[0] = r;
            let g = bg.metric(&x, t);
            q[j] = g[[0, 0]].sqrt();
            phi[j] = r * g[[1, 1]].sqrt();
            f[j] = bg.potential(&x, t).value;
        }
        Self::new(n, DomainKind::Ball, 0.0, r_max, q, phi, f)
    }

    pub fn nodes(&self) -> usize {
        self.q.len()
    }

    pub fn h(&self) -> f64 {
        (self.r_max - self.r_min) / (self.nodes() - 1) as f64
    }

    /// Reflection closure at the left grid end: parity ghosts on balls,
    /// one-sided stencils on annuli.
    pub fn pole(&self) -> bool {
        self.kind == DomainKind::Ball
    }

    pub fn ends(&self) -> &'static [End] {
        match self.kind {
            DomainKind::Ball => &[End::Outer],
            DomainKind::Annulus => &[End::Inner, End::Outer],
        }
    }

    pub fn end_index(&self, end: End) -> usize {
        match end {
            End::Inner => 0,
            End::Outer => self.nodes() - 1,
        }
    }

    /// The domain with metric scaled by `1 + eps a` radially and
    /// `1 + eps c` tangentially, and potential shifted by `eps h`. The
    /// builder for action derivatives along a variation.
    pub fn perturbed(&self, var: &variation::VariationField, eps: f64) -> Result<Self> {
        let mut q = self.q.clone();
        let mut phi = self.phi.clone();
        let mut f = self.f.clone();
        for j in 0..self.nodes() {
            let sa = 1.0 + eps * var.a[j];
            let sc = 1.0 + eps * var.c[j];
            if sa <= 0.0 || sc <= 0.0 {
                return Err(Error::BadParams(format!(
                    "variation step {eps} degenerates the metric at node {j}"
                )));
            }
            q[j] *= sa.sqrt();
            phi[j] *= sc.sqrt();
            f[j] += eps * var.h[j];
        }
        Self::new(self.n, self.kind, self.r_min, self.r_max, q, phi, f)
    }

}

/// Pointwise curvature and potential data of a radial domain, in arclength
/// derivatives (`u_s = u_r / q`). Angular tensor components are reported as
/// eigenvalues per unit induced metric.
#[derive(Debug, Clone)]
pub struct RadialGeometry {
    /// Tangential dimension of the boundary spheres, `n - 1`.
    pub k: usize,
    pub phi_s: Array1<f64>,
    pub f_s: Array1<f64>,
    pub f_ss: Array1<f64>,
    /// Radial-radial Ricci curvature.
    pub ric_ss: Array1<f64>,
    /// Angular Ricci eigenvalue.
    pub lam_ang: Array1<f64>,
    pub r_scalar: Array1<f64>,
    /// Angular Hessian eigenvalue of the potential.
    pub lam_hess: Array1<f64>,
    pub lap_f: Array1<f64>,
    pub grad_f2: Array1<f64>,
    /// Weighted scalar curvature `R + 2 lap f - |grad f|^2`.
    pub r_inf: Array1<f64>,
}

impl RadialGeometry {
    pub fn new(dom: &RadialDomain) -> Self {
        let h = dom.h();
        let pole = dom.pole();
        let k = dom.n - 1;
        let kf = k as f64;
        let nodes = dom.nodes();
        let q = dom.q.as_slice().unwrap();
        let phi = dom.phi.as_slice().unwrap();
        let f = dom.f.as_slice().unwrap();

        let par = |p: Parity| pole.then_some(p);
        let phi_r = radial_deriv(phi, h, 1, par(Parity::Odd));
        let f_r = radial_deriv(f, h, 1, par(Parity::Even));
        let phi_s: Vec<f64> = (0..nodes).map(|j| phi_r[j] / q[j]).collect();
        let f_s: Vec<f64> = (0..nodes).map(|j| f_r[j] / q[j]).collect();
        let phi_s_r = radial_deriv(&phi_s, h, 1, par(Parity::Even));
        let f_s_r = radial_deriv(&f_s, h, 1, par(Parity::Odd));
        let phi_ss: Vec<f64> = (0..nodes).map(|j| phi_s_r[j] / q[j]).collect();
        let f_ss: Vec<f64> = (0..nodes).map(|j| f_s_r[j] / q[j]).collect();

        // phi_ss / phi, finite at the pole by one-sided limits.
        let c1 = ratio_phi(&phi_ss, Parity::Odd, phi, h, pole);
        // (1 - phi_s^2) / phi^2, a double zero over a double zero at the pole.
        let num: Vec<f64> = phi_s.iter().map(|v| 1.0 - v * v).collect();
        let c2 = ratio_phi2(&num, phi, h, pole);
        // phi_s f_s / phi.
        let numh: Vec<f64> = (0..nodes).map(|j| phi_s[j] * f_s[j]).collect();
        let lam_hess = ratio_phi(&numh, Parity::Odd, phi, h, pole);

        let ric_ss: Vec<f64> = c1.iter().map(|v| -kf * v).collect();
        let lam_ang: Vec<f64> = (0..nodes).map(|j| (kf - 1.0) * c2[j] - c1[j]).collect();
        let r_scalar: Vec<f64> = (0..nodes)
            .map(|j| -2.0 * kf * c1[j] + kf * (kf - 1.0) * c2[j])
            .collect();
        let lap_f: Vec<f64> = (0..nodes).map(|j| f_ss[j] + kf * lam_hess[j]).collect();
        let grad_f2: Vec<f64> = f_s.iter().map(|v| v * v).collect();
        let r_inf: Vec<f64> = (0..nodes)
            .map(|j| r_scalar[j] + 2.0 * lap_f[j] - grad_f2[j])
            .collect();

        Self {
            k,
            phi_s: Array1::from_vec(phi_s),
            f_s: Array1::from_vec(f_s),
            f_ss: Array1::from_vec(f_ss),
            ric_ss: Array1::from_vec(ric_ss),
            lam_ang: Array1::from_vec(lam_ang),
            r_scalar: Array1::from_vec(r_scalar),
            lam_hess: Array1::from_vec(lam_hess),
            lap_f: Array1::from_vec(lap_f),
            grad_f2: Array1::from_vec(grad_f2),
            r_inf: Array1::from_vec(r_inf),
        }
    }

    /// Second-fundamental-form eigenvalue of a boundary sphere, with the
    /// inward normal of its end.
    pub fn shape_eigen(&self, dom: &RadialDomain, end: End) -> f64 {
        let j = dom.end_index(end);
        -end.eps0() * self.phi_s[j] / dom.phi[j]
    }

    pub fn mean_curvature(&self, dom: &RadialDomain, end: End) -> f64 {
        self.k as f64 * self.shape_eigen(dom, end)
    }

    /// Normal derivative of the potential along the inward normal.
    pub fn normal_f(&self, dom: &RadialDomain, end: End) -> f64 {
        end.eps0() * self.f_s[dom.end_index(end)]
    }

    /// Weighted mean curvature `H + e0 f`.
    pub fn weighted_mean_curvature(&self, dom: &RadialDomain, end: End) -> f64 {
        self.mean_curvature(dom, end) + self.normal_f(dom, end)
    }
}

/// Total action: bulk scalar curvature plus twice the boundary mean
/// curvature, both against the unweighted measures.
pub fn ghy_action(dom: &RadialDomain) -> Result<f64> {
    let geo = RadialGeometry::new(dom);
    let k = (dom.n - 1) as f64;
    let omega = unit_sphere_area(dom.n - 1);
    let bulk: Vec<f64> = (0..dom.nodes())
        .map(|j| geo.r_scalar[j] * dom.q[j] * dom.phi[j].powf(k))
        .collect();
    let mut total = omega * simpson(&bulk, dom.h());
    for &end in dom.ends() {
        let j = dom.end_index(end);
        total += 2.0 * omega * geo.mean_curvature(dom, end) * dom.phi[j].powf(k);
    }
    Ok(total)
}

/// Weighted action: weighted scalar curvature and weighted mean curvature
/// against the measure `e^{-f} dV`.
pub fn weighted_action(dom: &RadialDomain) -> Result<f64> {
    let geo = RadialGeometry::new(dom);
    let k = (dom.n - 1) as f64;
    let omega = unit_sphere_area(dom.n - 1);
    let bulk: Vec<f64> = (0..dom.nodes())
        .map(|j| geo.r_inf[j] * (-dom.f[j]).exp() * dom.q[j] * dom.phi[j].powf(k))
        .collect();
    let mut total = omega * simpson(&bulk, dom.h());
    for &end in dom.ends() {
        let j = dom.end_index(end);
        total += 2.0
            * omega
            * geo.weighted_mean_curvature(dom, end)
            * (-dom.f[j]).exp()
            * dom.phi[j].powf(k);
    }
    Ok(total)
}

/// Area of the unit `k`-sphere, exact through half-integer gamma recursion.
pub fn unit_sphere_area(k: usize) -> f64 {
    fn gamma_half(two_x: usize) -> f64 {
        match two_x {
            1 => PI.sqrt(),
            2 => 1.0,
            _ => (two_x as f64 / 2.0 - 1.0) * gamma_half(two_x - 2),
        }
    }
    2.0 * PI.powf((k + 1) as f64 / 2.0) / gamma_half(k + 1)
}

/// Composite Simpson quadrature; the grid invariant guarantees the odd
/// node count.
pub(crate) fn simpson(data: &[f64], h: f64) -> f64 {
    let n = data.len();
    debug_assert!(n % 2 == 1 && n >= 3);
    let mut s = data[0] + data[n - 1];
    for (j, &v) in data.iter().enumerate().take(n - 1).skip(1) {
        s += v * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Fourth-order radial derivative. With `pole` set, the series reflects
/// across node zero with the given parity and the right end falls back to
/// one-sided windows; without it, both ends are one-sided.
pub(crate) fn radial_deriv(
    data: &[f64],
    h: f64,
    order: usize,
    pole: Option<Parity>,
) -> Vec<f64> {
    let n = data.len();
    let Some(parity) = pole else {
        return open_deriv(data, h, order);
    };
    let s = match parity {
        Parity::Even => 1.0,
        Parity::Odd => -1.0,
    };
    let get = |j: isize| -> f64 {
        if j < 0 {
            s * data[(-j) as usize]
        } else {
            data[j as usize]
        }
    };
    let (w, hp): (&[f64], f64) = match order {
        1 => (&[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0], h),
        2 => (
            &[-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0],
            h * h,
        ),
        _ => panic!("radial derivatives support orders 1 and 2"),
    };
    let mut out = vec![0.0; n];
    for (j, slot) in out.iter_mut().enumerate() {
        if j + 2 < n {
            *slot = (0..5)
                .map(|k| w[k] * get(j as isize + k as isize - 2))
                .sum::<f64>()
                / hp;
        } else {
            let start = n - 6;
            let xs: Vec<f64> = (0..6)
                .map(|k| ((start + k) as f64 - j as f64) * h)
                .collect();
            let wts = fornberg_weights(0.0, &xs, order);
            *slot = (0..6).map(|k| wts[k] * data[start + k]).sum();
        }
    }
    out
}

/// `num / phi` with the pole node closed by the ratio of first radial
/// derivatives. Away from poles this is plain division.
pub(crate) fn ratio_phi(
    num: &[f64],
    num_parity: Parity,
    phi: &[f64],
    h: f64,
    pole: bool,
) -> Vec<f64> {
    let mut out: Vec<f64> = num.iter().zip(phi).map(|(n, p)| n / p).collect();
    if pole {
        let nr = radial_deriv(num, h, 1, Some(num_parity))[0];
        let pr = radial_deriv(phi, h, 1, Some(Parity::Odd))[0];
        out[0] = nr / pr;
    }
    out
}

/// `num / phi^2` for even numerators that vanish quadratically at the
/// pole, closed by the ratio of second radial derivatives there.
pub(crate) fn ratio_phi2(num: &[f64], phi: &[f64], h: f64, pole: bool) -> Vec<f64> {
    let mut out: Vec<f64> = num.iter().zip(phi).map(|(n, p)| n / (p * p)).collect();
    if pole {
        let nrr = radial_deriv(num, h, 2, Some(Parity::Even))[0];
        let pr = radial_deriv(phi, h, 1, Some(Parity::Odd))[0];
        out[0] = nrr / (2.0 * pr * pr);
    }
    out
}

/// A flat ball of radius `r` in dimension `n` with potential `f`.
pub fn flat_ball(n: usize, r: f64, m: usize, f: impl Fn(f64) -> f64) -> Result<RadialDomain> {
    let h = r / m as f64;
    let q = Array1::ones(m + 1);
    let phi = Array1::from_iter((0..=m).map(|j| j as f64 * h));
    let fv = Array1::from_iter((0..=m).map(|j| f(j as f64 * h)));
    RadialDomain::new(n, DomainKind::Ball, 0.0, r, q, phi, fv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn conformal_disk(c: impl Fn(f64) -> f64, r_max: f64, m: usize) -> RadialDomain {
        let h = r_max / m as f64;
        let q = Array1::from_iter((0..=m).map(|j| c(j as f64 * h).exp()));
        let phi = Array1::from_iter((0..=m).map(|j| {
            let r = j as f64 * h;
            r * c(r).exp()
        }));
        let f = Array1::zeros(m + 1);
        RadialDomain::new(2, DomainKind::Ball, 0.0, r_max, q, phi, f).unwrap()
    }

    #[test]
    fn disk_actions_are_topological() {
        for r_max in [0.7, 1.0, 2.3] {
            let dom = conformal_disk(|_| 0.0, r_max, 64);
            assert_abs_diff_eq!(ghy_action(&dom).unwrap(), 4.0 * PI, epsilon = 1e-9);
        }
        let dom = conformal_disk(|r| 0.3 * (1.0 - r * r).powi(2) - 0.1 * r * r, 1.3, 128);
        assert_abs_diff_eq!(ghy_action(&dom).unwrap(), 4.0 * PI, epsilon = 2e-6);
        let bg = Background::new("cigar-steady", 2, None).unwrap();
        let dom = RadialDomain::from_background(&bg, 1.4, 64, 0.2).unwrap();
        assert_abs_diff_eq!(ghy_action(&dom).unwrap(), 4.0 * PI, epsilon = 5e-6);

        // A flat annulus has zero Euler characteristic.
        let m = 64;
        let (r0, r1) = (0.5, 1.5);
        let h = (r1 - r0) / m as f64;
        let ann = RadialDomain::new(
            2,
            DomainKind::Annulus,
            r0,
            r1,
            Array1::ones(m + 1),
            Array1::from_iter((0..=m).map(|j| r0 + j as f64 * h)),
            Array1::zeros(m + 1),
        )
        .unwrap();
        assert_abs_diff_eq!(ghy_action(&ann).unwrap(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn flat_ball_action_is_linear_in_radius() {
        for r in [1.0, 2.0] {
            let dom = flat_ball(3, r, 64, |_| 0.0).unwrap();
            assert_abs_diff_eq!(ghy_action(&dom).unwrap(), 16.0 * PI * r, epsilon = 1e-8);
            // With no potential the two actions coincide.
            assert_abs_diff_eq!(
                weighted_action(&dom).unwrap(),
                ghy_action(&dom).unwrap(),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn radial_geometry_matches_the_ambient_bundles() {
        let cases = [
            ("cigar-steady", 2, 0.3, 1.5),
            ("round-shrinking-sphere", 3, -1.0, 0.8),
            ("gaussian-shrinker", 3, -1.0, 1.6),
        ];
        for (name, n, t, r_max) in cases {
            let bg = Background::new(name, n, None).unwrap();
            let m = 64;
            let dom = RadialDomain::from_background(&bg, r_max, m, t).unwrap();
            let geo = RadialGeometry::new(&dom);
            for j in [0usize, 1, 2, 9, 33, m] {
                let r = j as f64 * dom.h();
                let mut x = vec![0.0; n];
                x[0] = r;
                // Pole closures and the one-sided boundary windows carry
                // larger constants than the interior stencils.
                let tol = if j <= 2 {
                    2e-4
                } else if j == m {
                    1e-5
                } else {
                    2e-6
                };
                assert_abs_diff_eq!(
                    geo.r_scalar[j],
                    bg.exact_scalar(&x, t),
                    epsilon = tol * (1.0 + bg.exact_scalar(&x, t).abs())
                );
                let bundle = bg.bundle(&x, t).unwrap();
                let er: Vec<f64> = {
                    let mut e = vec![0.0; n];
                    e[0] = 1.0 / dom.q[j];
                    e
                };
                assert_abs_diff_eq!(
                    geo.ric_ss[j],
                    bundle.ric_of(&er, &er),
                    epsilon = tol * (1.0 + geo.ric_ss[j].abs())
                );
                let pot = bg.potential(&x, t);
                assert_abs_diff_eq!(
                    geo.lap_f[j],
                    bundle.laplacian(&pot),
                    epsilon = tol * (1.0 + geo.lap_f[j].abs())
                );
                assert_abs_diff_eq!(
                    geo.grad_f2[j],
                    bundle.grad_norm2(&pot),
                    epsilon = tol * (1.0 + geo.grad_f2[j].abs())
                );
                if j > 0 {
                    let g = bg.metric(&x, t);
                    let ey: Vec<f64> = {
                        let mut e = vec![0.0; n];
                        e[1] = 1.0 / g[[1, 1]].sqrt();
                        e
                    };
                    assert_abs_diff_eq!(
                        geo.lam_ang[j],
                        bundle.ric_of(&ey, &ey),
                        epsilon = tol * (1.0 + geo.lam_ang[j].abs())
                    );
                }
            }
        }
    }

    #[test]
    fn constructor_guards_reject_bad_profiles() {
        // Odd interval count.
        let r: Array1<f64> = Array1::from_iter((0..=9).map(|j| j as f64 * 0.1));
        assert!(matches!(
            RadialDomain::new(
                2,
                DomainKind::Ball,
                0.0,
                0.9,
                Array1::ones(10),
                r,
                Array1::zeros(10)
            ),
            Err(Error::TooCoarse { .. })
        ));
        // Vanishing metric coefficient.
        let m = 16;
        let h = 1.0 / m as f64;
        let mut q = Array1::ones(m + 1);
        q[3] = 0.0;
        assert!(matches!(
            RadialDomain::new(
                2,
                DomainKind::Ball,
                0.0,
                1.0,
                q,
                Array1::from_iter((0..=m).map(|j| j as f64 * h)),
                Array1::zeros(m + 1)
            ),
            Err(Error::DegenerateMetric { .. })
        ));
        // Pole regularity.
        assert!(matches!(
            RadialDomain::new(
                2,
                DomainKind::Ball,
                0.0,
                1.0,
                Array1::ones(m + 1),
                Array1::from_iter((0..=m).map(|j| 2.0 * j as f64 * h)),
                Array1::zeros(m + 1)
            ),
            Err(Error::BadParams(_))
        ));
        // Unsymmetric background.
        let bg = Background::new("translating-steady", 2, None).unwrap();
        assert!(RadialDomain::from_background(&bg, 1.0, 16, 0.0).is_err());
    }

    #[test]
    fn sphere_areas_are_exact() {
        assert_abs_diff_eq!(unit_sphere_area(1), 2.0 * PI, epsilon = 1e-14);
        assert_abs_diff_eq!(unit_sphere_area(2), 4.0 * PI, epsilon = 1e-13);
        assert_abs_diff_eq!(unit_sphere_area(3), 2.0 * PI * PI, epsilon = 1e-13);
    }
}
