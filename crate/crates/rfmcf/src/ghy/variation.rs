//! First variations of the boundary actions.
//!
//! A [`VariationField`] deforms a radial domain inside its symmetry class:
//! the metric moves by `a ds^2 + c g_ang` and the potential by `h`. The
//! closed first-variation formulas for both actions reduce to radial
//! quadratures plus boundary terms, and [`variation_check`] holds them
//! against a five-point finite difference of the action along the
//! deformation, together with pointwise checks of the variation of volume
//! density, boundary area, shape operator, mean curvature, and scalar
//! curvature. The weighted action is only stationary data when the
//! deformation preserves the weighted measure, `h = (a + k c) / 2`, and
//! the check refuses to run otherwise.

use ndarray::Array1;

use super::{ratio_phi, simpson, unit_sphere_area, RadialDomain, RadialGeometry};
use crate::error::{Error, Result};
use crate::geom::deriv::Parity;

/// Which action to differentiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Ghy,
    Weighted,
}

/// A symmetric deformation: `a` scales the radial direction, `c` the
/// spheres (both per unit metric), `h` shifts the potential.
#[derive(Debug, Clone)]
pub struct VariationField {
    pub a: Array1<f64>,
    pub c: Array1<f64>,
    pub h: Array1<f64>,
    /// Whether `h = (a + k c) / 2`, so the weighted measure is frozen.
    pub measure_preserving: bool,
}

impl VariationField {
    /// An arbitrary deformation; the weighted action will reject it unless
    /// `h` happens to freeze the measure.
    pub fn general(a: Array1<f64>, c: Array1<f64>, h: Array1<f64>) -> Self {
        Self {
            a,
            c,
            h,
            measure_preserving: false,
        }
    }

    /// The measure-preserving deformation over the given metric variation
    /// in ambient dimension `n`.
    pub fn measure_preserving(a: Array1<f64>, c: Array1<f64>, n: usize) -> Self {
        let k = (n - 1) as f64;
        let h = Array1::from_iter(a.iter().zip(&c).map(|(a, c)| 0.5 * (a + k * c)));
        Self {
            a,
            c,
            h,
            measure_preserving: true,
        }
    }

    /// The Lie derivative of the metric along the radial field `chi e_s`,
    /// paired with the measure-preserving potential shift. On balls `chi`
    /// must vanish at the pole with odd symmetry.
    pub fn lie(dom: &RadialDomain, chi: &[f64]) -> Result<Self> {
        if chi.len() != dom.nodes() {
            return Err(Error::BadShape(format!(
                "field has {} nodes, domain has {}",
                chi.len(),
                dom.nodes()
            )));
        }
        if dom.pole() && chi[0].abs() > 1e-12 {
            return Err(Error::BadParams(
                "radial fields on a ball must vanish at the pole".into(),
            ));
        }
        let geo = RadialGeometry::new(dom);
        let chi_r = super::radial_deriv(chi, dom.h(), 1, dom.pole().then_some(Parity::Odd));
        let a: Array1<f64> =
            Array1::from_iter((0..dom.nodes()).map(|j| 2.0 * chi_r[j] / dom.q[j]));
        let num: Vec<f64> = (0..dom.nodes()).map(|j| 2.0 * chi[j] * geo.phi_s[j]).collect();
        let mut c = Array1::from_vec(ratio_phi(
            &num,
            Parity::Odd,
            dom.phi.as_slice().unwrap(),
            dom.h(),
            dom.pole(),
        ));
        if dom.pole() {
            // Both components limit to 2 chi_s at the pole; snap the
            // angular one so the equality is exact on the grid.
            c[0] = a[0];
        }
        Ok(Self::measure_preserving(a, c, dom.n))
    }
}

/// Finite-difference derivative of the action against the closed formula,
/// with the pointwise sub-checks that feed it.
#[derive(Debug, Clone)]
pub struct VariationReport {
    pub fd: f64,
    pub formula: f64,
    pub residual: f64,
    pub d_volume: f64,
    pub d_area: f64,
    pub d_shape: f64,
    pub d_mean_curvature: f64,
    pub d_scalar: f64,
}

fn sup(vals: impl IntoIterator<Item = f64>) -> f64 {
    vals.into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Differentiate the chosen action along `var` and compare with the closed
/// first-variation formula.
pub fn variation_check(
    dom: &RadialDomain,
    var: &VariationField,
    action: Action,
) -> Result<VariationReport> {
    let nodes = dom.nodes();
    for arr in [&var.a, &var.c, &var.h] {
        if arr.len() != nodes {
            return Err(Error::BadShape(format!(
                "variation has {} nodes, domain has {nodes}",
                arr.len()
            )));
        }
        if arr.iter().any(|v| !v.is_finite()) {
            return Err(Error::BadParams("non-finite variation entry".into()));
        }
    }
    let k = (dom.n - 1) as f64;
    if dom.pole() && (var.a[0] - var.c[0]).abs() > 1e-10 * (1.0 + var.a[0].abs()) {
        return Err(Error::BadParams(
            "pole-regular variations need a = c at the pole".into(),
        ));
    }
    if action == Action::Weighted {
        let half_tr = sup((0..nodes).map(|j| 0.5 * (var.a[j] + k * var.c[j])));
        let dev = sup((0..nodes).map(|j| var.h[j] - 0.5 * (var.a[j] + k * var.c[j])))
            / (1.0 + half_tr);
        if dev > 1e-12 {
            return Err(Error::NotMeasurePreserving(dev));
        }
    }

    let eval = |d: &RadialDomain| -> Result<f64> {
        match action {
            Action::Ghy => super::ghy_action(d),
            Action::Weighted => super::weighted_action(d),
        }
    };
    let eps = 0.02 / (1.0 + sup(var.a.iter().chain(&var.c).chain(&var.h).copied()));
    let dp = dom.perturbed(var, eps)?;
    let dm = dom.perturbed(var, -eps)?;
    let dp2 = dom.perturbed(var, 2.0 * eps)?;
    let dm2 = dom.perturbed(var, -2.0 * eps)?;
    let five_point = |f_p2: f64, f_p: f64, f_m: f64, f_m2: f64| {
        (-f_p2 + 8.0 * f_p - 8.0 * f_m + f_m2) / (12.0 * eps)
    };
    let fd = five_point(eval(&dp2)?, eval(&dp)?, eval(&dm)?, eval(&dm2)?);

    let geo = RadialGeometry::new(dom);
    let omega = unit_sphere_area(dom.n - 1);
    let h_grid = dom.h();
    let formula = match action {
        Action::Ghy => {
            let bulk: Vec<f64> = (0..nodes)
                .map(|j| {
                    let tr = var.a[j] + k * var.c[j];
                    (var.a[j] * geo.ric_ss[j] + k * var.c[j] * geo.lam_ang[j]
                        - 0.5 * geo.r_scalar[j] * tr)
                        * dom.q[j]
                        * dom.phi[j].powf(k)
                })
                .collect();
            let mut total = -omega * simpson(&bulk, h_grid);
            for &end in dom.ends() {
                let j = dom.end_index(end);
                total += (k - 1.0)
                    * omega
                    * var.c[j]
                    * geo.mean_curvature(dom, end)
                    * dom.phi[j].powf(k);
            }
            total
        }
        Action::Weighted => {
            let bulk: Vec<f64> = (0..nodes)
                .map(|j| {
                    (var.a[j] * (geo.ric_ss[j] + geo.f_ss[j])
                        + k * var.c[j] * (geo.lam_ang[j] + geo.lam_hess[j]))
                        * (-dom.f[j]).exp()
                        * dom.q[j]
                        * dom.phi[j].powf(k)
                })
                .collect();
            let mut total = -omega * simpson(&bulk, h_grid);
            for &end in dom.ends() {
                let j = dom.end_index(end);
                total -= omega
                    * (var.c[j] * geo.mean_curvature(dom, end)
                        + var.a[j] * geo.weighted_mean_curvature(dom, end))
                    * (-dom.f[j]).exp()
                    * dom.phi[j].powf(k);
            }
            total
        }
    };
    let residual = (fd - formula).abs() / (1.0 + formula.abs());

    // Pointwise sub-checks from the same four perturbed states.
    let geos = [
        RadialGeometry::new(&dp2),
        RadialGeometry::new(&dp),
        RadialGeometry::new(&dm),
        RadialGeometry::new(&dm2),
    ];
    let doms = [&dp2, &dp, &dm, &dm2];

    let density =
        |d: &RadialDomain, j: usize| -> f64 { d.q[j] * d.phi[j].powf(k) };
    let mut dvol_err: f64 = 0.0;
    let mut dvol_scale: f64 = 0.0;
    for j in 0..nodes {
        let fd_v = five_point(
            density(doms[0], j),
            density(doms[1], j),
            density(doms[2], j),
            density(doms[3], j),
        );
        let closed = 0.5 * (var.a[j] + k * var.c[j]) * density(dom, j);
        dvol_err = dvol_err.max((fd_v - closed).abs());
        dvol_scale = dvol_scale.max(closed.abs());
    }
    let d_volume = dvol_err / (1.0 + dvol_scale);

    let par = dom.pole().then_some(Parity::Even);
    let c_r = super::radial_deriv(var.c.as_slice().unwrap(), h_grid, 1, par);
    let mut darea_err: f64 = 0.0;
    let mut dshape_err: f64 = 0.0;
    let mut dmean_err: f64 = 0.0;
    for &end in dom.ends() {
        let j = dom.end_index(end);
        let fd_area = five_point(
            doms[0].phi[j].powf(k),
            doms[1].phi[j].powf(k),
            doms[2].phi[j].powf(k),
            doms[3].phi[j].powf(k),
        );
        darea_err = darea_err
            .max((fd_area - 0.5 * k * var.c[j] * dom.phi[j].powf(k)).abs());

        let c_s = c_r[j] / dom.q[j];
        let a_hat = geo.shape_eigen(dom, end);
        let fd_shape = five_point(
            geos[0].shape_eigen(doms[0], end),
            geos[1].shape_eigen(doms[1], end),
            geos[2].shape_eigen(doms[2], end),
            geos[3].shape_eigen(doms[3], end),
        );
        dshape_err = dshape_err
            .max((fd_shape + 0.5 * (end.eps0() * c_s + var.a[j] * a_hat)).abs());

        let hm = geo.mean_curvature(dom, end);
        let fd_mean = five_point(
            geos[0].mean_curvature(doms[0], end),
            geos[1].mean_curvature(doms[1], end),
            geos[2].mean_curvature(doms[2], end),
            geos[3].mean_curvature(doms[3], end),
        );
        dmean_err = dmean_err
            .max((fd_mean + 0.5 * (end.eps0() * k * c_s + hm * var.a[j])).abs());
    }

    // Scalar-curvature variation: div div v - lap tr v - <v, Ric>.
    let pole = dom.pole();
    let q = dom.q.as_slice().unwrap();
    let phi = dom.phi.as_slice().unwrap();
    let a_r = super::radial_deriv(var.a.as_slice().unwrap(), h_grid, 1, par);
    let a_s: Vec<f64> = (0..nodes).map(|j| a_r[j] / q[j]).collect();
    let c_s: Vec<f64> = (0..nodes).map(|j| c_r[j] / q[j]).collect();
    let amc: Vec<f64> = (0..nodes)
        .map(|j| geo.phi_s[j] * (var.a[j] - var.c[j]))
        .collect();
    let p1 = ratio_phi(&amc, Parity::Even, phi, h_grid, pole);
    let w_s: Vec<f64> = (0..nodes).map(|j| a_s[j] + k * p1[j]).collect();
    let w_s_r = super::radial_deriv(&w_s, h_grid, 1, pole.then_some(Parity::Odd));
    let pw: Vec<f64> = (0..nodes).map(|j| geo.phi_s[j] * w_s[j]).collect();
    let p2 = ratio_phi(&pw, Parity::Odd, phi, h_grid, pole);
    let tr_s: Vec<f64> = (0..nodes).map(|j| a_s[j] + k * c_s[j]).collect();
    let tr_s_r = super::radial_deriv(&tr_s, h_grid, 1, pole.then_some(Parity::Odd));
    let pt: Vec<f64> = (0..nodes).map(|j| geo.phi_s[j] * tr_s[j]).collect();
    let p3 = ratio_phi(&pt, Parity::Odd, phi, h_grid, pole);
    let mut dscal_err: f64 = 0.0;
    let mut dscal_scale: f64 = 0.0;
    for j in 0..nodes {
        let divdiv = w_s_r[j] / q[j] + k * p2[j];
        let lap_tr = tr_s_r[j] / q[j] + k * p3[j];
        let vric = var.a[j] * geo.ric_ss[j] + k * var.c[j] * geo.lam_ang[j];
        let closed = divdiv - lap_tr - vric;
        let fd_r = five_point(
            geos[0].r_scalar[j],
            geos[1].r_scalar[j],
            geos[2].r_scalar[j],
            geos[3].r_scalar[j],
        );
        dscal_err = dscal_err.max((fd_r - closed).abs());
        dscal_scale = dscal_scale.max(closed.abs());
    }

    Ok(VariationReport {
        fd,
        formula,
        residual,
        d_volume,
        d_area: darea_err / (1.0 + sup((0..nodes).map(|j| dom.phi[j].powf(k)))),
        d_shape: dshape_err,
        d_mean_curvature: dmean_err,
        d_scalar: dscal_err / (1.0 + dscal_scale),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backgrounds::Background;
    use crate::ghy::{flat_ball, DomainKind};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn curved_ball(m: usize) -> RadialDomain {
        let r_max = 1.0;
        let h = r_max / m as f64;
        let q = Array1::from_iter((0..=m).map(|j| {
            let r = j as f64 * h;
            1.0 + 0.1 * r * r
        }));
        let phi = Array1::from_iter((0..=m).map(|j| {
            let r = j as f64 * h;
            r * (1.0 + 0.05 * r * r)
        }));
        let f = Array1::from_iter((0..=m).map(|j| {
            let r = j as f64 * h;
            0.3 + 0.2 * r * r
        }));
        RadialDomain::new(3, DomainKind::Ball, 0.0, r_max, q, phi, f).unwrap()
    }

    fn curved_annulus(m: usize) -> RadialDomain {
        let (r0, r1) = (0.6, 1.4);
        let h = (r1 - r0) / m as f64;
        let q = Array1::from_iter((0..=m).map(|j| {
            let r = r0 + j as f64 * h;
            1.0 + 0.1 * (r - 1.0) * (r - 1.0)
        }));
        let phi = Array1::from_iter((0..=m).map(|j| {
            let r = r0 + j as f64 * h;
            0.8 + 0.3 * (r - 0.9) * (r - 0.9)
        }));
        let f = Array1::from_iter((0..=m).map(|j| {
            let r = r0 + j as f64 * h;
            0.1 * r * r
        }));
        RadialDomain::new(2, DomainKind::Annulus, r0, r1, q, phi, f).unwrap()
    }

    fn random_even(rng: &mut ChaCha8Rng, dom: &RadialDomain) -> Array1<f64> {
        let coef: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
        Array1::from_iter((0..dom.nodes()).map(|j| {
            let r = dom.r_min + j as f64 * dom.h();
            coef[0] + coef[1] * r * r + coef[2] * r.powi(4)
        }))
    }

    #[test]
    fn variation_formulas_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for dom in [curved_ball(48), curved_annulus(48)] {
            for _ in 0..10 {
                let a = random_even(&mut rng, &dom);
                let mut c = random_even(&mut rng, &dom);
                if dom.pole() {
                    let shift = a[0] - c[0];
                    c.mapv_inplace(|v| v + shift);
                }
                let h = random_even(&mut rng, &dom);
                let var = VariationField::general(a.clone(), c.clone(), h);
                let rep = variation_check(&dom, &var, Action::Ghy).unwrap();
                assert!(rep.residual < 2e-5, "ghy residual {:.3e}", rep.residual);
                assert!(rep.d_volume < 1e-8, "d_volume {:.3e}", rep.d_volume);
                assert!(rep.d_area < 1e-8, "d_area {:.3e}", rep.d_area);
                assert!(rep.d_shape < 1e-6, "d_shape {:.3e}", rep.d_shape);
                assert!(
                    rep.d_mean_curvature < 1e-6,
                    "d_mean {:.3e}",
                    rep.d_mean_curvature
                );
                assert!(rep.d_scalar < 5e-4, "d_scalar {:.3e}", rep.d_scalar);

                let var = VariationField::measure_preserving(a, c, dom.n);
                let rep = variation_check(&dom, &var, Action::Weighted).unwrap();
                assert!(
                    rep.residual < 1e-5,
                    "weighted residual {:.3e}",
                    rep.residual
                );
            }
        }
    }

    #[test]
    fn weighted_variation_requires_measure_preservation() {
        let dom = curved_ball(32);
        let a = Array1::from_elem(dom.nodes(), 0.2);
        let c = Array1::from_elem(dom.nodes(), 0.2);
        let h = Array1::from_elem(dom.nodes(), 0.7);
        let var = VariationField::general(a, c, h);
        assert!(matches!(
            variation_check(&dom, &var, Action::Weighted),
            Err(Error::NotMeasurePreserving(_))
        ));
        assert!(variation_check(&dom, &var, Action::Ghy).is_ok());
    }

    /// Independent quadrature for the derivative of the weighted action
    /// along a Lie deformation with the measure-preserving potential shift:
    /// the weighted divergence `w = div X - X f` feeds the weighted scalar
    /// curvature in the bulk and the weighted mean curvature on the rim.
    fn lie_offset(dom: &RadialDomain, chi: &[f64], var: &VariationField) -> f64 {
        let geo = RadialGeometry::new(dom);
        let k = (dom.n - 1) as f64;
        let omega = unit_sphere_area(dom.n - 1);
        let w: Vec<f64> = (0..dom.nodes())
            .map(|j| var.h[j] - chi[j] * geo.f_s[j])
            .collect();
        let bulk: Vec<f64> = (0..dom.nodes())
            .map(|j| geo.r_inf[j] * w[j] * (-dom.f[j]).exp() * dom.q[j] * dom.phi[j].powf(k))
            .collect();
        let mut total = -omega * simpson(&bulk, dom.h());
        for &end in dom.ends() {
            let j = dom.end_index(end);
            total -= 2.0
                * omega
                * geo.weighted_mean_curvature(dom, end)
                * w[j]
                * (-dom.f[j]).exp()
                * dom.phi[j].powf(k);
        }
        total
    }

    #[test]
    fn lie_variations_split_into_gauge_and_measure_parts() {
        // Pulling the metric back along a radial field never moves the
        // boundary action.
        let disk = flat_ball(2, 1.0, 64, |_| 0.0).unwrap();
        let chi: Vec<f64> = (0..disk.nodes())
            .map(|j| {
                let r = j as f64 * disk.h();
                0.3 * r * (1.0 - r * r)
            })
            .collect();
        let var = VariationField::lie(&disk, &chi).unwrap();
        let rep = variation_check(&disk, &var, Action::Ghy).unwrap();
        assert!(rep.fd.abs() < 1e-8, "ghy fd {:.3e}", rep.fd);
        assert!(rep.formula.abs() < 1e-8, "ghy formula {:.3e}", rep.formula);

        // The weighted action does move: the measure-preserving potential
        // shift is `div X`, not the pullback `X f`, and the mismatch `w`
        // sources both terms of `lie_offset`. Even on the flat disk the
        // rim term survives.
        let rep = variation_check(&disk, &var, Action::Weighted).unwrap();
        let offset = lie_offset(&disk, &chi, &var);
        assert!(offset.abs() > 1.0, "offset should be O(1): {offset:.3e}");
        assert_abs_diff_eq!(rep.fd, offset, epsilon = 1e-5 * offset.abs());
        assert_abs_diff_eq!(rep.formula, offset, epsilon = 1e-7 * offset.abs());

        // Same split on a curved soliton ball.
        let bg = Background::new("cigar-steady", 2, None).unwrap();
        let cigar = RadialDomain::from_background(&bg, 1.3, 64, 0.0).unwrap();
        let chi: Vec<f64> = (0..cigar.nodes())
            .map(|j| {
                let r = j as f64 * cigar.h();
                0.2 * r * (1.69 - r * r)
            })
            .collect();
        let var = VariationField::lie(&cigar, &chi).unwrap();
        assert!(var.measure_preserving);
        let rep = variation_check(&cigar, &var, Action::Weighted).unwrap();
        let offset = lie_offset(&cigar, &chi, &var);
        assert!(offset.abs() > 1.0, "offset should be O(1): {offset:.3e}");
        assert_abs_diff_eq!(rep.fd, offset, epsilon = 1e-5 * offset.abs());
        assert_abs_diff_eq!(rep.formula, offset, epsilon = 1e-6 * offset.abs());

        // Shifting the potential by the pullback `X f` instead restores
        // the full diffeomorphism, and that direction does leave the
        // weighted action fixed. The pullback shift breaks measure
        // preservation, so difference the action by hand.
        let geo = RadialGeometry::new(&cigar);
        let h_pull = Array1::from_iter((0..cigar.nodes()).map(|j| chi[j] * geo.f_s[j]));
        let pull = VariationField::general(var.a.clone(), var.c.clone(), h_pull);
        let eps = 0.01;
        let sample = |mult: f64| {
            let bumped = cigar.perturbed(&pull, mult * eps).unwrap();
            crate::ghy::weighted_action(&bumped).unwrap()
        };
        let fd = (-sample(2.0) + 8.0 * sample(1.0) - 8.0 * sample(-1.0) + sample(-2.0))
            / (12.0 * eps);
        assert!(fd.abs() < 1e-4, "pullback fd {:.3e}", fd);

        // A generic ball, with nothing constant, exercises the bulk term.
        let dom = curved_ball(64);
        let chi: Vec<f64> = (0..dom.nodes())
            .map(|j| {
                let r = j as f64 * dom.h();
                0.25 * r * (1.0 - r * r)
            })
            .collect();
        let var = VariationField::lie(&dom, &chi).unwrap();
        let rep = variation_check(&dom, &var, Action::Weighted).unwrap();
        let offset = lie_offset(&dom, &chi, &var);
        assert!(rep.residual < 1e-5, "generic residual {:.3e}", rep.residual);
        assert_abs_diff_eq!(rep.formula, offset, epsilon = 1e-5 * (1.0 + offset.abs()));
    }

    #[test]
    fn variations_must_match_at_the_pole() {
        let dom = curved_ball(32);
        let a = Array1::from_elem(dom.nodes(), 0.3);
        let c = Array1::from_elem(dom.nodes(), -0.1);
        let var = VariationField::measure_preserving(a, c, dom.n);
        assert!(matches!(
            variation_check(&dom, &var, Action::Weighted),
            Err(Error::BadParams(_))
        ));
    }
}
